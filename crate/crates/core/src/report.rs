//! Check records and per-model reports.

use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    HypothesisNotMet,
    Undefined,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::HypothesisNotMet => "hypothesis_not_met",
            Status::Undefined => "undefined",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    /// The statement being checked, in words.
    pub paper_ref: String,
    pub status: Status,
    pub residual: Option<f64>,
    pub tolerance: f64,
    /// A measured quantity reported alongside the check (an angle, a count).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    /// The hypothesis of a conditional check, kept so tolerances can be rescaled.
    #[serde(skip)]
    hypothesis: Option<bool>,
}

impl Check {
    /// Unconditional identity: pass iff residual ≤ tolerance.
    pub fn identity(name: &str, statement: &str, residual: f64, tolerance: f64) -> Check {
        let status = if residual.is_finite() && residual <= tolerance { Status::Pass } else { Status::Fail };
        Check { name: name.into(), paper_ref: statement.into(), status, residual: Some(clean(residual)), tolerance, value: None, hypothesis: None }
    }

    /// Identity proved under a hypothesis: a miss with the hypothesis false is not a failure.
    pub fn conditional(name: &str, statement: &str, residual: f64, tolerance: f64, hypothesis: bool) -> Check {
        let mut c = Check::identity(name, statement, residual, tolerance);
        if c.status == Status::Fail && !hypothesis {
            c.status = Status::HypothesisNotMet;
        }
        c.hypothesis = Some(hypothesis);
        c
    }

    pub fn flag(name: &str, statement: &str, ok: bool) -> Check {
        let status = if ok { Status::Pass } else { Status::Fail };
        Check { name: name.into(), paper_ref: statement.into(), status, residual: None, tolerance: 0.0, value: None, hypothesis: None }
    }

    pub fn with_status(name: &str, statement: &str, status: Status, residual: Option<f64>, tolerance: f64) -> Check {
        Check { name: name.into(), paper_ref: statement.into(), status, residual: residual.map(clean), tolerance, value: None, hypothesis: None }
    }

    /// A measured value with no pass criterion of its own.
    pub fn record(name: &str, statement: &str, value: f64) -> Check {
        let mut c = Check::with_status(name, statement, Status::Pass, None, 0.0);
        c.value = Some(clean_value(value));
        c
    }

    pub fn with_value(mut self, v: f64) -> Check {
        self.value = Some(clean_value(v));
        self
    }

    pub fn renamed(mut self, name: String) -> Check {
        self.name = name;
        self
    }

    /// Re-judge a residual check against its tolerance times `factor`.
    pub fn rescale(&mut self, factor: f64) {
        let Some(r) = self.residual else { return };
        if self.tolerance <= 0.0 || !matches!(self.status, Status::Pass | Status::Fail | Status::HypothesisNotMet) {
            return;
        }
        // identity checks carry no hypothesis; flag-style statuses set by hand are left alone
        if self.status == Status::HypothesisNotMet && self.hypothesis.is_none() {
            return;
        }
        self.tolerance *= factor;
        let ok = r <= self.tolerance;
        self.status = match (ok, self.hypothesis) {
            (true, _) => Status::Pass,
            (false, Some(false)) => Status::HypothesisNotMet,
            (false, _) => Status::Fail,
        };
    }

    pub fn undefined(name: &str, statement: &str) -> Check {
        Check::with_status(name, statement, Status::Undefined, None, 0.0)
    }

    pub fn is_fail(&self) -> bool {
        self.status == Status::Fail
    }
}

/// Rounds residuals so that reports are stable across platforms' last-bit noise.
fn clean(x: f64) -> f64 {
    if !x.is_finite() {
        return f64::MAX;
    }
    if x == 0.0 {
        return 0.0;
    }
    let s = format!("{x:.3e}");
    s.parse().unwrap_or(x)
}

/// Measured values keep twelve significant digits.
fn clean_value(x: f64) -> f64 {
    if !x.is_finite() {
        return f64::MAX;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub tool_version: String,
    pub seed: u64,
    pub model: String,
    pub suite: String,
    pub tolerances: Vec<(String, f64)>,
    pub checks: Vec<Check>,
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<u64>,
}

impl Report {
    pub fn new(model: &str, suite: &str, seed: u64) -> Self {
        Report {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            model: model.into(),
            suite: suite.into(),
            tolerances: crate::tol::ledger().into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
            checks: Vec::new(),
            warnings: Vec::new(),
            timing_ms: None,
        }
    }

    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| c.is_fail()).count()
    }

    pub fn count(&self, s: Status) -> usize {
        self.checks.iter().filter(|c| c.status == s).count()
    }

    pub fn rescale(&mut self, factor: f64) {
        for c in &mut self.checks {
            c.rescale(factor);
        }
        if factor != 1.0 {
            for t in &mut self.tolerances {
                t.1 *= factor;
            }
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
