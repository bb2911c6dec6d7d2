use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use cstar::lattice::hasse_dot;
use cstar::models::{corpus, lookup, ModelSpec};
use cstar::rng::{default_seed, parse_seed};
use cstar::suites::{lattice_report, run, tower_report, Suite};
use cstar::{tol, Error, Report, Status};

#[derive(Parser)]
#[command(name = "cstar", version, about = "Index theory and Fourier analysis for finite-dimensional inclusions")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build the tower over a model and run the expectation and tower invariants.
    Tower {
        /// Model spec file (JSON) or corpus id.
        model: String,
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Run an invariant suite over corpus models.
    Verify {
        #[arg(long, value_parser = parse_suite)]
        suite: Suite,
        /// `all`, or comma-separated corpus ids / spec files.
        #[arg(long, default_value = "all")]
        models: String,
        /// Directory for one JSON report per model.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Enumerate intermediate subalgebras and check the lattice bounds.
    Lattice {
        model: String,
        #[arg(long)]
        dot: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Node cap for the enumeration.
        #[arg(long, default_value_t = tol::NODE_CAP)]
        cap: usize,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(clap::Args)]
struct Common {
    /// Seed (decimal or 0x-hex); defaults to $CSTAR_SEED, then 0xC57A.
    #[arg(long, value_parser = parse_seed_arg)]
    seed: Option<u64>,
    /// Multiplier applied to every residual tolerance.
    #[arg(long, default_value_t = 1.0)]
    tol: f64,
    /// Include wall-clock timing in reports (breaks byte-determinism).
    #[arg(long)]
    timing: bool,
}

impl Common {
    fn seed(&self) -> u64 {
        self.seed.unwrap_or_else(default_seed)
    }
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    s.parse().map_err(|_| format!("unknown suite `{s}` (expected one of expect, tower, fourier, biproj, angles, lattice)"))
}

fn parse_seed_arg(s: &str) -> Result<u64, String> {
    parse_seed(s).ok_or_else(|| format!("bad seed `{s}`"))
}

/// Failure to produce a report. Usage errors map to exit 2.
struct Failure {
    msg: String,
    usage: bool,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let usage = matches!(e, Error::BadSpec(_) | Error::DepthLimit { .. } | Error::NotNested(_) | Error::InconsistentBlocks(_));
        Failure { msg: e.to_string(), usage }
    }
}

fn usage(msg: String) -> Failure {
    Failure { msg, usage: true }
}

fn load(arg: &str) -> Result<ModelSpec, Failure> {
    if let Some(s) = lookup(arg) {
        return Ok(s);
    }
    let path = Path::new(arg);
    if !path.exists() {
        return Err(usage(format!("`{arg}` is neither a corpus id nor a readable file")));
    }
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{arg}: {e}")))?;
    let mut spec = ModelSpec::from_json(&text)?;
    if spec.label.is_empty() {
        spec.label = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    }
    Ok(spec)
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| usage(format!("{}: {e}", dir.display())))?;
    }
    std::fs::write(path, text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn finish(rep: &mut Report, common: &Common, started: Instant) {
    rep.rescale(common.tol);
    if common.timing {
        rep.timing_ms = Some(started.elapsed().as_millis() as u64);
    }
}

fn header() {
    println!("{:<16} {:<8} {:>5} {:>5} {:>5} {:>5}", "model", "suite", "pass", "fail", "hnm", "undef");
}

fn row(rep: &Report) {
    let mut line = format!(
        "{:<16} {:<8} {:>5} {:>5} {:>5} {:>5}",
        rep.model,
        rep.suite,
        rep.count(Status::Pass),
        rep.count(Status::Fail),
        rep.count(Status::HypothesisNotMet),
        rep.count(Status::Undefined)
    );
    if let Some(ms) = rep.timing_ms {
        line.push_str(&format!(" {ms:>7} ms"));
    }
    println!("{line}");
    for c in rep.checks.iter().filter(|c| c.is_fail()) {
        println!("  fail {} residual {:?} tolerance {:e}: {}", c.name, c.residual, c.tolerance, c.paper_ref);
    }
    for w in &rep.warnings {
        println!("  warning: {w}");
    }
}

fn exec(cmd: Cmd) -> Result<bool, Failure> {
    match cmd {
        Cmd::Tower { model, depth, out, common } => {
            let t = Instant::now();
            let spec = load(&model)?;
            let depth = match depth {
                Some(d) => d,
                None => cstar::models::build(&spec)?.depth,
            };
            let mut rep = tower_report(&spec, depth, common.seed())?;
            finish(&mut rep, &common, t);
            header();
            row(&rep);
            if let Some(p) = out {
                write(&p, &rep.to_json())?;
            }
            Ok(rep.failures() == 0)
        }
        Cmd::Verify { suite, models, out_dir, common } => {
            let specs = if models == "all" { corpus() } else { models.split(',').map(|m| load(m.trim())).collect::<Result<Vec<_>, _>>()? };
            let seed = common.seed();
            // one thread per model; reports are collected in corpus order
            let results: Vec<Result<Report, Failure>> = std::thread::scope(|s| {
                let handles: Vec<_> = specs
                    .iter()
                    .map(|spec| {
                        let common = &common;
                        s.spawn(move || {
                            let t = Instant::now();
                            let mut rep = run(suite, spec, seed)?;
                            finish(&mut rep, common, t);
                            Ok(rep)
                        })
                    })
                    .collect();
                handles.into_iter().map(|h| h.join().expect("suite thread panicked")).collect()
            });
            header();
            let mut ok = true;
            for (spec, r) in specs.iter().zip(results) {
                let rep = match r {
                    Ok(rep) => rep,
                    Err(f) if f.usage => return Err(f),
                    Err(f) => {
                        println!("{:<16} {:<8} error: {}", spec.label, suite.as_str(), f.msg);
                        ok = false;
                        continue;
                    }
                };
                row(&rep);
                ok &= rep.failures() == 0;
                if let Some(dir) = &out_dir {
                    write(&dir.join(format!("{}_{}.json", rep.model, rep.suite)), &rep.to_json())?;
                }
            }
            Ok(ok)
        }
        Cmd::Lattice { model, dot, out, cap, common } => {
            let t = Instant::now();
            let spec = load(&model)?;
            let (mut rep, lat) = lattice_report(&spec, common.seed(), cap)?;
            finish(&mut rep, &common, t);
            header();
            row(&rep);
            println!("{} nodes, {} minimal", lat.len(), lat.minimal().len());
            if let Some(p) = dot {
                write(&p, &hasse_dot(&lat))?;
            }
            if let Some(p) = out {
                write(&p, &rep.to_json())?;
            }
            Ok(rep.failures() == 0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match exec(cli.cmd) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(f) => {
            eprintln!("cstar: {}", f.msg);
            ExitCode::from(if f.usage { 2 } else { 1 })
        }
    }
}
