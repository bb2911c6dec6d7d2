//! Intermediate subalgebra lattices: enumeration, covering relation, DOT output, the
//! cardinality bounds and a Kadison–Kastler distance estimate.
//!
//! Enumeration is exact for commutative tops of dimension ≤ 8 (set-partition search) and a
//! heuristic otherwise; every lattice records which.

use crate::angles::rigidity_check;
use crate::biproj::{classify, irreducible, BiKind, Intermediate};
use crate::expect::{minimal_expectation, tp_expectation, TraceState};
use crate::fourier::Fourier;
use crate::models::Model;
use crate::numkernel::{herm_eig, nullspace_of_gram, orthonormalize, CMatrix, InnerProduct, C64};
use crate::report::{Check, Status};
use crate::rng::{combination, hermitian_combination, seeded};
use crate::staralg::{span_closure, Algebra};
use crate::tower::{Of, Tower};
use crate::{tol, Result};

/// Biprojection candidates drawn in B′∩A₁.
pub const BIPROJECTION_CANDIDATES: usize = 5000;
/// Pairs checked for closure when the lattice is too large for all of them.
const CLOSURE_SAMPLE: usize = 20_000;
const DEDUP: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Origin {
    Bottom,
    Top,
    Named,
    Subgroup,
    Partition,
    Biprojection,
    Closure,
}

impl Origin {
    pub fn as_str(&self) -> &'static str {
        match self {
            Origin::Bottom => "bottom",
            Origin::Top => "top",
            Origin::Named => "named",
            Origin::Subgroup => "subgroup",
            Origin::Partition => "partition",
            Origin::Biprojection => "biprojection",
            Origin::Closure => "closure",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Node {
    pub label: String,
    /// In the model ambient, Frobenius-orthonormal basis.
    pub alg: Algebra,
    /// Every source that produced this node, first one names it.
    pub origins: Vec<Origin>,
    /// ∥[A:P]₀∥ and whether it is scalar.
    pub index: f64,
    pub index_scalar: bool,
    /// A proper intermediate covering the bottom.
    pub minimal: bool,
    fingerprint: CMatrix,
}

impl Node {
    pub fn dim(&self) -> usize {
        self.alg.dim()
    }
}

#[derive(Clone, Debug)]
pub struct Lattice {
    pub model: String,
    /// Sorted by (dim, label); node 0 is B and the last node is A.
    pub nodes: Vec<Node>,
    /// Covering pairs (lower, upper).
    pub covers: Vec<(usize, usize)>,
    /// true when every intermediate is provably listed.
    pub exact: bool,
    /// The node cap was reached.
    pub truncated: bool,
    pub warnings: Vec<String>,
    pub index: f64,
    pub index_scalar: bool,
    pub irreducible: bool,
    /// A and B are both simple.
    pub simple: bool,
    pub comm_dim_a1: usize,
    order: Vec<Vec<bool>>,
}

struct Builder {
    probe: CMatrix,
    nodes: Vec<(String, Algebra, Vec<Origin>, CMatrix)>,
    cap: usize,
    capped: bool,
}

impl Builder {
    fn fingerprint(&self, a: &Algebra) -> CMatrix {
        a.project(&self.probe)
    }

    fn find(&self, a: &Algebra, fp: &CMatrix) -> Option<usize> {
        self.nodes.iter().position(|(_, b, _, f)| b.dim() == a.dim() && (f - fp).fro_norm() < DEDUP && a.subspace_distance(b) < DEDUP)
    }

    /// Returns the node index and whether it is new.
    fn add(&mut self, label: String, a: Algebra, origin: Origin) -> Option<(usize, bool)> {
        let fp = self.fingerprint(&a);
        if let Some(i) = self.find(&a, &fp) {
            if !self.nodes[i].2.contains(&origin) {
                self.nodes[i].2.push(origin);
            }
            return Some((i, false));
        }
        if self.nodes.len() >= self.cap {
            self.capped = true;
            return None;
        }
        self.nodes.push((label, a, vec![origin], fp));
        Some((self.nodes.len() - 1, true))
    }
}

fn frobenius_algebra(n: usize, gens: Vec<CMatrix>) -> Algebra {
    let ip = InnerProduct::frobenius(n);
    let basis = orthonormalize(&gens, &ip);
    Algebra::from_parts(n, ip, basis, gens, None)
}

fn normalized(a: &Algebra) -> Algebra {
    frobenius_algebra(a.ambient(), a.basis().to_vec())
}

/// P ∧ Q: intersection of the underlying subspaces.
pub fn meet(p: &Algebra, q: &Algebra) -> Algebra {
    let n = p.ambient();
    let u = orthonormalize(p.basis(), &InnerProduct::frobenius(n));
    let v = orthonormalize(q.basis(), &InnerProduct::frobenius(n));
    // M = U* P_V U in the coordinates of U; its eigenvalue-1 vectors span U ∩ V
    let d = u.len();
    let cross: Vec<Vec<C64>> = u.iter().map(|a| v.iter().map(|b| b.fro_inner(a)).collect()).collect();
    let m = CMatrix::from_fn(d, d, |i, j| (0..v.len()).map(|k| cross[i][k].conj() * cross[j][k]).sum());
    let eig = herm_eig(&m.hermitian_part()).expect("Gram matrix is Hermitian");
    let mut basis = Vec::new();
    for k in 0..d {
        if eig.values[k] > 1.0 - 1e-8 {
            let mut x = CMatrix::zeros(n, n);
            for (i, ui) in u.iter().enumerate() {
                x.axpy(eig.vectors[(i, k)], ui);
            }
            basis.push(x);
        }
    }
    frobenius_algebra(n, basis)
}

/// P ∨ Q: the *-algebra generated by both.
pub fn join(p: &Algebra, q: &Algebra) -> Algebra {
    let mut gens = p.basis().to_vec();
    gens.extend(q.basis().iter().cloned());
    normalized(&span_closure(&gens, p.ambient()))
}

/// All set partitions of {0..m} as restricted growth strings, in lexicographic order.
pub fn set_partitions(m: usize) -> Vec<Vec<usize>> {
    fn rec(cur: &mut Vec<usize>, m: usize, maxb: usize, out: &mut Vec<Vec<usize>>) {
        if cur.len() == m {
            out.push(cur.clone());
            return;
        }
        for b in 0..=maxb + 1 {
            if cur.is_empty() && b > 0 {
                break;
            }
            cur.push(b);
            let nm = if cur.len() == 1 { 0 } else { maxb.max(b) };
            rec(cur, m, nm, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if m == 0 {
        return vec![Vec::new()];
    }
    rec(&mut Vec::new(), m, 0, &mut out);
    out
}

fn partition_label(rgs: &[usize]) -> String {
    let nb = rgs.iter().max().map_or(0, |&b| b + 1);
    let sep = if rgs.len() > 10 { "," } else { "" };
    let blocks: Vec<String> = (0..nb)
        .map(|b| rgs.iter().enumerate().filter(|(_, &x)| x == b).map(|(i, _)| i.to_string()).collect::<Vec<_>>().join(sep))
        .collect();
    format!("part({})", blocks.join("|"))
}

/// Minimal projections of a commutative algebra, ordered by their diagonals.
fn atoms(a: &Algebra) -> Result<Vec<CMatrix>> {
    let b = a.block_data()?;
    let mut mins = b.minimal.clone();
    let key = |p: &CMatrix| -> Vec<i64> { p.diagonal().iter().map(|z| -(z.re * 1e6).round() as i64).collect() };
    mins.sort_by_key(key);
    Ok(mins)
}

/// C = {e}′∩A, computed in the model ambient from the commutation defect of embedded A.
fn commutant_of_projection(tw: &Tower, a: &Algebra, e: &CMatrix) -> Result<Algebra> {
    let n = a.ambient();
    let defects: Vec<CMatrix> = a.basis().iter().map(|x| tw.embed_model(x).commutator(e)).collect();
    let d = defects.len();
    let g = CMatrix::from_fn(d, d, |i, j| defects[i].fro_inner(&defects[j]));
    let null = nullspace_of_gram(&g)?;
    let basis: Vec<CMatrix> = null
        .iter()
        .map(|v| {
            let mut x = CMatrix::zeros(n, n);
            for (c, b) in v.iter().zip(a.basis()) {
                x.axpy(*c, b);
            }
            x
        })
        .collect();
    Ok(frobenius_algebra(n, basis))
}

/// Seeded search for biprojections e ≥ e₁ in B′∩A₁; each hit gives C = {e}′∩A.
fn biprojection_candidates(tw: &Tower, a: &Algebra, b: &Algebra, seed: u64, count: usize) -> Result<Vec<Algebra>> {
    let fr = Fourier::new(tw);
    let n = tw.ambient();
    let e1 = tw.e(1);
    let one = CMatrix::identity(n);
    let comp = &one - e1;
    let comm = tw.commutant(1, Of::B).to_vec();
    let mut cands: Vec<CMatrix> = Vec::new();
    // sums of central projections of B′∩A₁ lying above e₁
    let z = crate::staralg::center(&Algebra::from_parts(n, tw.ip().clone(), comm.clone(), Vec::new(), None));
    if let Ok(bd) = z.block_data() {
        let m = bd.central.len();
        if m <= 12 {
            for mask in 1u32..(1 << m) {
                let mut p = CMatrix::zeros(n, n);
                for (i, c) in bd.central.iter().enumerate() {
                    if mask & (1 << i) != 0 {
                        p += c;
                    }
                }
                cands.push(p);
            }
        }
    }
    let mut rng = seeded(seed);
    while cands.len() < count {
        let h = comp.matmul(&hermitian_combination(&mut rng, &comm)).matmul(&comp);
        let eig = herm_eig(&h.hermitian_part())?;
        let clusters = eig.clusters(1e-8);
        let mut acc = e1.clone();
        for cl in clusters.iter().rev() {
            acc += &eig.projection(cl);
            cands.push(acc.clone());
            if cands.len() >= count {
                break;
            }
        }
    }
    let mut out = Vec::new();
    for e in cands {
        if (&e.matmul(e1) - e1).fro_norm() > 1e-6 * e1.fro_norm() {
            continue;
        }
        let Ok(be) = classify(&fr, 1, &e) else { continue };
        if be.kind != BiKind::Biprojection {
            continue;
        }
        let c = commutant_of_projection(tw, a, &e)?;
        if b.nesting_residual(&c) <= tol::SUBSPACE && c.dim() > 0 {
            out.push(c);
        }
    }
    Ok(out)
}

/// Enumerate with the default node cap.
pub fn enumerate(model: &Model, seed: u64) -> Result<Lattice> {
    enumerate_with_cap(model, seed, tol::NODE_CAP)
}

pub fn enumerate_with_cap(model: &Model, seed: u64, cap: usize) -> Result<Lattice> {
    let a = normalized(&model.pair.big);
    let b = normalized(&model.pair.small);
    let n = a.ambient();
    let (e0, _, tr) = minimal_expectation(&model.pair, model.canonical.as_deref(), seed)?;
    let probe = {
        let mut r = seeded(seed ^ 0x1A77);
        combination(&mut r, a.basis())
    };
    let mut bl = Builder { probe, nodes: Vec::new(), cap: cap.max(2), capped: false };
    bl.add("B".into(), b.clone(), Origin::Bottom);
    bl.add("A".into(), a.clone(), Origin::Top);
    for nm in &model.intermediates {
        bl.add(nm.label.clone(), normalized(&nm.alg), Origin::Named);
    }
    if let Some(g) = &model.group {
        for k in g.subgroups() {
            if g.subgroup.iter().all(|h| k.contains(h)) {
                let label = format!("K{{{}}}", k.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(","));
                bl.add(label, normalized(&g.algebra(&k)), Origin::Subgroup);
            }
        }
    }
    let mut warnings = Vec::new();
    let exact = a.is_commutative() && a.dim() <= 8;
    let group = model.group.is_some();
    let depth = if group || exact { 1 } else { 2 };
    let tw = Tower::build(&model.pair, &e0, &tr, depth)?;
    if exact {
        let mins = atoms(&a)?;
        for rgs in set_partitions(mins.len()) {
            let nb = rgs.iter().max().map_or(0, |&x| x + 1);
            let sums: Vec<CMatrix> = (0..nb)
                .map(|blk| {
                    let mut p = CMatrix::zeros(n, n);
                    for (i, m) in mins.iter().enumerate() {
                        if rgs[i] == blk {
                            p += m;
                        }
                    }
                    p
                })
                .collect();
            let p = frobenius_algebra(n, sums);
            if b.nesting_residual(&p) <= tol::SUBSPACE {
                bl.add(partition_label(&rgs), p, Origin::Partition);
            }
        }
    } else {
        if !group {
            let found = biprojection_candidates(&tw, &a, &b, seed, BIPROJECTION_CANDIDATES)?;
            let mut k = 0;
            for c in found {
                if let Some((_, true)) = bl.add(format!("bi{k}"), c, Origin::Biprojection) {
                    k += 1;
                }
            }
        }
        // close under ∧ and ∨
        let mut k = 0;
        let mut done = 0;
        'sweep: loop {
            let len = bl.nodes.len();
            if done == len {
                break;
            }
            for i in 0..len {
                for j in (i + 1).max(done)..len {
                    let (p, q) = (bl.nodes[i].1.clone(), bl.nodes[j].1.clone());
                    for c in [meet(&p, &q), join(&p, &q)] {
                        match bl.add(format!("x{k}"), c, Origin::Closure) {
                            Some((_, true)) => k += 1,
                            Some(_) => {}
                            None => break 'sweep,
                        }
                    }
                }
            }
            done = len;
        }
        warnings.push("heuristic enumeration: the node set may be incomplete".into());
    }
    if bl.capped {
        warnings.push(format!("exhaustion: node cap {} reached, lattice truncated", bl.cap));
    }
    let mut raw: Vec<Node> = Vec::with_capacity(bl.nodes.len());
    for (label, alg, origins, fingerprint) in bl.nodes {
        let (index, index_scalar) = if alg.dim() == a.dim() {
            (1.0, true)
        } else {
            let e = tp_expectation(&a, &alg, &tr)?;
            (e.index_norm(), e.is_scalar_index())
        };
        raw.push(Node { label, alg, origins, index, index_scalar, minimal: false, fingerprint });
    }
    raw.sort_by(|x, y| (x.dim(), &x.label).cmp(&(y.dim(), &y.label)));
    let m = raw.len();
    let order: Vec<Vec<bool>> = (0..m).map(|i| (0..m).map(|j| i == j || (raw[i].dim() < raw[j].dim() && raw[i].alg.is_subalgebra_of(&raw[j].alg))).collect()).collect();
    let covers = covering(&order);
    let bottom = raw.iter().position(|x| x.origins.contains(&Origin::Bottom)).unwrap_or(0);
    let top = raw.iter().position(|x| x.origins.contains(&Origin::Top)).unwrap_or(m - 1);
    for &(lo, hi) in &covers {
        if lo == bottom && hi != top {
            raw[hi].minimal = true;
        }
    }
    let mut simple = true;
    for alg in [&model.pair.big, &model.pair.small] {
        simple &= alg.block_data().map(|bd| bd.len() == 1).unwrap_or(false);
    }
    Ok(Lattice {
        model: model.id.clone(),
        nodes: raw,
        covers,
        exact: exact && !bl.capped,
        truncated: bl.capped,
        warnings,
        index: e0.index_norm(),
        index_scalar: e0.is_scalar_index(),
        irreducible: irreducible(&tw),
        simple,
        comm_dim_a1: tw.commutant(1, Of::B).len(),
        order,
    })
}

/// Covering pairs of a reflexive order relation.
fn covering(le: &[Vec<bool>]) -> Vec<(usize, usize)> {
    let m = le.len();
    let mut out = Vec::new();
    for i in 0..m {
        for j in 0..m {
            if i == j || !le[i][j] {
                continue;
            }
            if !(0..m).any(|k| k != i && k != j && le[i][k] && le[k][j]) {
                out.push((i, j));
            }
        }
    }
    out
}

impl Lattice {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn leq(&self, i: usize, j: usize) -> bool {
        self.order[i][j]
    }

    pub fn minimal(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.nodes[i].minimal).collect()
    }

    /// Minimal nodes among those coming from proper subgroups; all minimal nodes for
    /// models without a group.
    pub fn group_minimal(&self) -> Vec<usize> {
        let sub: Vec<usize> = (0..self.len())
            .filter(|&i| {
                let o = &self.nodes[i].origins;
                o.contains(&Origin::Subgroup) && !o.contains(&Origin::Bottom) && !o.contains(&Origin::Top)
            })
            .collect();
        if sub.is_empty() && !self.nodes.iter().any(|x| x.origins.contains(&Origin::Subgroup)) {
            return self.minimal();
        }
        sub.iter().copied().filter(|&i| !sub.iter().any(|&j| j != i && self.order[j][i])).collect()
    }

    pub fn find(&self, alg: &Algebra) -> Option<usize> {
        let a = normalized(alg);
        self.nodes.iter().position(|x| x.dim() == a.dim() && x.alg.subspace_distance(&a) < DEDUP)
    }

    fn locate(&self, alg: &Algebra, probe: &CMatrix) -> Option<usize> {
        let fp = alg.project(probe);
        self.nodes.iter().position(|x| x.dim() == alg.dim() && (&x.fingerprint - &fp).fro_norm() < DEDUP && x.alg.subspace_distance(alg) < DEDUP)
    }
}

/// ln of min{9^{I²}, (I²)^{I²}}.
pub fn log_bound(index: f64) -> f64 {
    let i2 = index * index;
    (i2 * 9f64.ln()).min(i2 * i2.ln())
}

/// Node counts against the intermediate-lattice bounds, index rigidity, lattice laws
/// and compatibility of expectations.
pub fn bound_check(lat: &Lattice, seed: u64) -> Vec<Check> {
    let mut out = Vec::new();
    let hyp = lat.irreducible && lat.simple && lat.index_scalar;
    let count = lat.len() as f64;
    let slack = count.ln() - log_bound(lat.index);
    out.push(Check::conditional(
        "node_bound",
        "number of intermediates ≤ min{9^{I²}, (I²)^{I²}}, I = [A:B]₀ (log scale)",
        slack.max(0.0),
        0.0,
        hyp,
    ));
    let mins = lat.minimal().len() as f64;
    let slack = mins.ln().max(0.0) - lat.comm_dim_a1 as f64 * 3f64.ln();
    out.push(Check::conditional("minimal_bound", "number of minimal intermediates ≤ 3^{dim B′∩A₁} (log scale)", slack.max(0.0), 0.0, hyp));
    let below_four = lat.index_scalar && lat.index > 1.0 + tol::INDEX && lat.index < 4.0 - tol::INDEX;
    if below_four {
        let extra = lat.len().saturating_sub(2) as f64;
        out.push(Check::conditional(
            "index_rigidity",
            "scalar index in (1,4) for simple algebras leaves no proper intermediates",
            extra,
            0.0,
            lat.simple,
        ));
    } else {
        out.push(Check::with_status("index_rigidity", "scalar index in (1,4) leaves no proper intermediates", Status::Undefined, None, 0.0));
    }
    out.push(lattice_laws(lat, seed));
    out.push(order_check(lat));
    out
}

/// ∧ and ∨ of enumerated nodes are enumerated nodes (all pairs, or a seeded sample).
pub fn lattice_laws(lat: &Lattice, seed: u64) -> Check {
    let m = lat.len();
    if lat.truncated {
        return Check::undefined("lattice_closed", "meets and joins of enumerated intermediates are enumerated (lattice truncated)");
    }
    let probe = {
        let mut r = seeded(seed ^ 0x1A77);
        combination(&mut r, lat.nodes[m - 1].alg.basis())
    };
    let mut pairs: Vec<(usize, usize)> = (0..m).flat_map(|i| (i + 1..m).map(move |j| (i, j))).collect();
    if pairs.len() > CLOSURE_SAMPLE {
        use rand::seq::SliceRandom;
        let mut r = seeded(seed ^ 0xC105);
        pairs.shuffle(&mut r);
        pairs.truncate(CLOSURE_SAMPLE);
        pairs.sort();
    }
    let mut missing = 0usize;
    for (i, j) in pairs {
        // comparable pairs meet and join at their ends
        if lat.order[i][j] || lat.order[j][i] {
            continue;
        }
        let (p, q) = (&lat.nodes[i].alg, &lat.nodes[j].alg);
        missing += lat.locate(&meet(p, q), &probe).is_none() as usize;
        missing += lat.locate(&join(p, q), &probe).is_none() as usize;
    }
    Check::identity("lattice_closed", "meets and joins of enumerated intermediates are enumerated", missing as f64, 0.0)
}

/// Every node sits between B and A, and E^P_B ∘ E^A_P = E^A_B for the trace-preserving
/// expectations.
fn order_check(lat: &Lattice) -> Check {
    let m = lat.len();
    let bottom = &lat.nodes[0];
    let top = &lat.nodes[m - 1];
    let mut worst: f64 = 0.0;
    for x in &lat.nodes {
        worst = worst.max(bottom.alg.nesting_residual(&x.alg)).max(x.alg.nesting_residual(&top.alg));
    }
    Check::identity("nodes_between", "every node satisfies B ⊆ P ⊆ A", worst, tol::SUBSPACE)
}

/// E^P_B ∘ E^A_P = E^A_B on the basis of A, worst over nodes.
pub fn compatibility_check(lat: &Lattice, tr: &TraceState) -> Result<Check> {
    let m = lat.len();
    let a = &lat.nodes[m - 1].alg;
    let b = &lat.nodes[0].alg;
    let eab = tp_expectation(a, b, tr)?;
    let mut worst: f64 = 0.0;
    for x in &lat.nodes {
        let eap = tp_expectation(a, &x.alg, tr)?;
        let epb = tp_expectation(&x.alg, b, tr)?;
        for y in a.basis() {
            let lhs = epb.apply(&eap.apply(y));
            let rhs = eab.apply(y);
            worst = worst.max((&lhs - &rhs).fro_norm() / y.fro_norm().max(1e-300));
        }
    }
    Ok(Check::identity("expectation_compatibility", "E^P_B ∘ E^A_P = E^A_B for every node P", worst, 1e-8))
}

/// Pairwise rigidity over the group-minimal nodes (all minimal nodes without a group).
pub fn lattice_rigidity(model: &Model, lat: &Lattice, seed: u64) -> Result<Vec<Check>> {
    let mins = lat.group_minimal();
    let (e0, _, tr) = minimal_expectation(&model.pair, model.canonical.as_deref(), seed)?;
    let tw = Tower::build(&model.pair, &e0, &tr, 1)?;
    let fr = Fourier::new(&tw);
    let mut ints = Vec::new();
    for &i in &mins {
        ints.push(Intermediate::new(&tw, &lat.nodes[i].label, &lat.nodes[i].alg)?);
    }
    Ok(rigidity_check(&fr, &ints))
}

/// Pairwise interior angles between the given nodes, in radians.
pub fn minimal_angles(model: &Model, lat: &Lattice, nodes: &[usize], seed: u64) -> Result<Vec<(String, String, f64)>> {
    let (e0, _, tr) = minimal_expectation(&model.pair, model.canonical.as_deref(), seed)?;
    let tw = Tower::build(&model.pair, &e0, &tr, 1)?;
    let mut ints = Vec::new();
    for &i in nodes {
        ints.push(Intermediate::new(&tw, &lat.nodes[i].label, &lat.nodes[i].alg)?);
    }
    let mut out = Vec::new();
    for i in 0..ints.len() {
        for j in i + 1..ints.len() {
            let q = crate::angles::Quadruple::new(&tw, &ints[i], &ints[j]);
            let ang = q.interior().map(|r| r.angle).unwrap_or(f64::NAN);
            out.push((ints[i].label.clone(), ints[j].label.clone(), ang));
        }
    }
    Ok(out)
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Deterministic DOT digraph of the covering relation, nodes ordered by (dim, label).
pub fn hasse_dot(lat: &Lattice) -> String {
    let mut s = String::from("digraph lattice {\n  rankdir=BT;\n  node [shape=box];\n");
    for (i, x) in lat.nodes.iter().enumerate() {
        let idx = if x.index_scalar { format!("{:.6}", x.index) } else { format!("{:.6} (non-scalar)", x.index) };
        let label = format!("{} (dim {}, [A:P]₀ = {})", x.label, x.dim(), idx);
        s.push_str(&format!("  n{i} [label=\"{}\"];\n", dot_escape(&label)));
    }
    for &(lo, hi) in &lat.covers {
        s.push_str(&format!("  n{lo} -> n{hi};\n"));
    }
    s.push_str("}\n");
    s
}

/// Bounds for the Kadison–Kastler distance between the unit balls of two subalgebras.
#[derive(Clone, Debug, serde::Serialize)]
pub struct KkBounds {
    /// Valid lower bound on d(B, C).
    pub lower: f64,
    /// Largest distance achieved over the net; an upper bound for each net point.
    pub upper: f64,
    /// When B ⊆ C and upper < 1: whether B = C as subspaces.
    pub equal_by_onto: Option<bool>,
}

/// Projected-subgradient upper bound for dist(x, unit ball of Y) in operator norm.
fn ball_distance(x: &CMatrix, y_onb: &[CMatrix], iters: usize) -> f64 {
    let fro = InnerProduct::frobenius(x.rows());
    let proj = |z: &CMatrix| crate::numkernel::project(y_onb, &fro, z);
    let into_ball = |z: CMatrix| {
        let s = z.op_norm();
        if s > 1.0 {
            z.scale_re(1.0 / s)
        } else {
            z
        }
    };
    let mut cur = into_ball(proj(x));
    let mut best = (x - &cur).op_norm();
    for it in 0..iters {
        let z = x - &cur;
        let sigma = z.op_norm();
        if sigma <= 1e-14 {
            return 0.0;
        }
        let eig = match herm_eig(&z.adj_mul(&z).hermitian_part()) {
            Ok(e) => e,
            Err(_) => break,
        };
        let k = eig.values.len() - 1;
        let v = CMatrix::from_columns(z.cols(), &[eig.vectors.column(k)]);
        let u = z.matmul(&v).scale_re(1.0 / sigma);
        let g = proj(&u.matmul(&v.adjoint()));
        let gn = g.fro_norm();
        if gn <= 1e-14 {
            break;
        }
        let step = best / ((it + 1) as f64).sqrt();
        cur = into_ball(&cur + &g.scale_re(step / gn));
        let d = (x - &cur).op_norm();
        best = best.min(d);
    }
    best
}

fn one_sided(x_alg: &Algebra, y_alg: &Algebra, seed: u64) -> (f64, f64) {
    let n = x_alg.ambient();
    let fro = InnerProduct::frobenius(n);
    let xs = orthonormalize(x_alg.basis(), &fro);
    let ys = orthonormalize(y_alg.basis(), &fro);
    let mut net: Vec<CMatrix> = xs.clone();
    let mut r = seeded(seed);
    for _ in 0..16 {
        net.push(combination(&mut r, &xs));
    }
    let (mut lo, mut hi): (f64, f64) = (0.0, 0.0);
    for x in net {
        let s = x.op_norm();
        if s <= 1e-14 {
            continue;
        }
        let x = x.scale_re(1.0 / s);
        let res = &x - &crate::numkernel::project(&ys, &fro, &x);
        lo = lo.max(res.fro_norm() / (n as f64).sqrt());
        hi = hi.max(ball_distance(&x, &ys, tol::KK_ITERATIONS));
    }
    (lo, hi.max(lo))
}

/// Kadison–Kastler distance estimate between two subalgebras of a common ambient.
pub fn kk_distance(b: &Algebra, c: &Algebra, seed: u64) -> KkBounds {
    let (l1, u1) = one_sided(b, c, seed);
    let (l2, u2) = one_sided(c, b, seed ^ 0x5EED);
    let lower = l1.max(l2);
    let upper = u1.max(u2);
    let nested = b.is_subalgebra_of(c);
    let equal_by_onto = if nested && upper < 1.0 { Some(b.subspace_distance(c) < DEDUP) } else { None };
    KkBounds { lower, upper, equal_by_onto }
}
