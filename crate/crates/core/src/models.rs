//! Model builders: matrix, diagonal, group-algebra, Bratteli and inner crossed-product inclusions.

use crate::numkernel::{orthonormalize, CMatrix, InnerProduct, ONE};
use crate::staralg::{span_closure, Algebra, BlockData, InclusionPair};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

pub const GROUP_CAP: usize = 24;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ModelSpec {
    pub family: String,
    #[serde(default)]
    pub params: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<f64>>,
    #[serde(default)]
    pub label: String,
}

impl ModelSpec {
    pub fn new(family: &str, params: Value, label: &str) -> Self {
        ModelSpec { family: family.into(), params, trace: None, label: label.into() }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::BadSpec(e.to_string()))
    }
}

/// A named intermediate B ⊆ C ⊆ A in the model ambient.
#[derive(Clone, Debug)]
pub struct Named {
    pub label: String,
    pub alg: Algebra,
}

/// Permutation group data of a group-algebra model.
#[derive(Clone, Debug)]
pub struct GroupData {
    pub elements: Vec<Vec<usize>>,
    pub subgroup: Vec<usize>,
    pub unitaries: Vec<CMatrix>,
}

impl GroupData {
    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn index_of(&self, g: &[usize]) -> Option<usize> {
        self.elements.iter().position(|x| x == g)
    }

    /// Group algebra of a subgroup given by element indices.
    pub fn algebra(&self, members: &[usize]) -> Algebra {
        let n = self.order();
        let ip = InnerProduct::frobenius(n);
        let us: Vec<CMatrix> = members.iter().map(|&i| self.unitaries[i].clone()).collect();
        let basis = orthonormalize(&us, &ip);
        Algebra::from_parts(n, ip, basis, us, None)
    }

    /// Element indices of the subgroup generated by the given elements.
    pub fn generated(&self, gens: &[usize]) -> Vec<usize> {
        let mut out = vec![0usize];
        let mut i = 0;
        while i < out.len() {
            for &g in gens {
                let h = compose(&self.elements[g], &self.elements[out[i]]);
                let k = self.index_of(&h).expect("closed");
                if !out.contains(&k) {
                    out.push(k);
                }
            }
            i += 1;
        }
        out.sort();
        out
    }

    /// All subgroups, as sorted element-index lists, ordered by (size, members).
    pub fn subgroups(&self) -> Vec<Vec<usize>> {
        let n = self.order();
        let mut subs: Vec<Vec<usize>> = (0..n).map(|g| self.generated(&[g])).collect();
        subs.sort();
        subs.dedup();
        loop {
            let mut added = false;
            let cur = subs.clone();
            for a in &cur {
                for b in &cur {
                    let mut gens = a.clone();
                    gens.extend(b);
                    let j = self.generated(&gens);
                    if !subs.contains(&j) {
                        subs.push(j);
                        added = true;
                    }
                }
            }
            if !added {
                break;
            }
        }
        subs.sort_by(|a, b| (a.len(), a).cmp(&(b.len(), b)));
        subs
    }
}

/// (g∘h)(k) = g(h(k)).
pub fn compose(g: &[usize], h: &[usize]) -> Vec<usize> {
    h.iter().map(|&k| g[k]).collect()
}

/// Enumerate the group generated by permutations (image notation), identity first.
pub fn perm_group(gens: &[Vec<usize>], degree: usize) -> Result<Vec<Vec<usize>>> {
    for g in gens {
        let mut seen = g.clone();
        seen.sort();
        if g.len() != degree || seen != (0..degree).collect::<Vec<_>>() {
            return Err(Error::BadSpec(format!("{g:?} is not a permutation of 0..{degree}")));
        }
    }
    let mut els = vec![(0..degree).collect::<Vec<usize>>()];
    let mut i = 0;
    while i < els.len() {
        for g in gens {
            let h = compose(g, &els[i]);
            if !els.contains(&h) {
                els.push(h);
                if els.len() > GROUP_CAP {
                    return Err(Error::BadSpec(format!("group order exceeds {GROUP_CAP}")));
                }
            }
        }
        i += 1;
    }
    Ok(els)
}

/// Left regular representation: u_g δ_x = δ_{gx}.
pub fn regular_rep(els: &[Vec<usize>]) -> Vec<CMatrix> {
    let n = els.len();
    els.iter()
        .map(|g| {
            let mut m = CMatrix::zeros(n, n);
            for (xi, x) in els.iter().enumerate() {
                let gx = compose(g, x);
                let j = els.iter().position(|y| *y == gx).expect("closed");
                m[(j, xi)] = ONE;
            }
            m
        })
        .collect()
}

pub fn perm_matrix(p: &[usize]) -> CMatrix {
    let n = p.len();
    let mut m = CMatrix::zeros(n, n);
    for (i, &j) in p.iter().enumerate() {
        m[(j, i)] = ONE;
    }
    m
}

/// A built model: the inclusion, its canonical trace, named intermediates and quadruples.
#[derive(Clone, Debug)]
pub struct Model {
    pub id: String,
    pub spec: ModelSpec,
    pub pair: InclusionPair,
    /// Weights of minimal projections of A (canonical trace), if the family defines one.
    pub canonical: Option<Vec<f64>>,
    pub intermediates: Vec<Named>,
    /// (C, D) pairs, indices into `intermediates`.
    pub quadruples: Vec<(usize, usize)>,
    pub group: Option<GroupData>,
    pub depth: usize,
}

fn param_usize(p: &Value, key: &str) -> Result<usize> {
    p.get(key).and_then(Value::as_u64).map(|v| v as usize).ok_or_else(|| Error::BadSpec(format!("missing integer parameter `{key}`")))
}

fn param_perms(p: &Value, key: &str) -> Result<Vec<Vec<usize>>> {
    match p.get(key) {
        None | Some(Value::Null) => Ok(Vec::new()),
        Some(v) => serde_json::from_value(v.clone()).map_err(|e| Error::BadSpec(format!("`{key}`: {e}"))),
    }
}

fn fro_alg(n: usize, gens: Vec<CMatrix>, basis: Vec<CMatrix>) -> Algebra {
    let ip = InnerProduct::frobenius(n);
    let basis = orthonormalize(&basis, &ip);
    Algebra::from_parts(n, ip, basis, gens, None)
}

/// M_k ⊗ 1 inside M_n.
fn matrix_tensor(k: usize, n: usize) -> Algebra {
    let m = n / k;
    let units: Vec<CMatrix> = (0..k).flat_map(|i| (0..k).map(move |j| (i, j))).map(|(i, j)| CMatrix::unit(k, i, j).kron(&CMatrix::identity(m))).collect();
    fro_alg(n, units.clone(), units)
}

fn full_matrix(n: usize) -> Algebra {
    let ip = InnerProduct::frobenius(n);
    Algebra::full_blocks(&[n], ip)
}

fn diagonal(n: usize) -> Algebra {
    let units: Vec<CMatrix> = (0..n).map(|i| CMatrix::unit(n, i, i)).collect();
    fro_alg(n, units.clone(), units)
}

pub fn hadamard() -> CMatrix {
    let s = 1.0 / 2f64.sqrt();
    CMatrix::from_real(&[vec![s, s], vec![s, -s]])
}

/// Build a model from its spec.
pub fn build(spec: &ModelSpec) -> Result<Model> {
    let p = &spec.params;
    let id = if spec.label.is_empty() { spec.family.clone() } else { spec.label.clone() };
    let mut intermediates = Vec::new();
    let mut quadruples = Vec::new();
    let mut group = None;
    let mut canonical = None;
    let depth;
    let (big, small) = match spec.family.as_str() {
        "full_matrix" => {
            let k = param_usize(p, "k")?;
            let n = param_usize(p, "n")?;
            if k == 0 || n == 0 || n % k != 0 || n > 64 {
                return Err(Error::BadSpec(format!("full_matrix needs k | n, got k={k}, n={n}")));
            }
            if p.get("quadruple").and_then(Value::as_str) == Some("hadamard") {
                if (k, n) != (1, 2) {
                    return Err(Error::BadSpec("the hadamard quadruple lives in C ⊂ M_2".into()));
                }
                let d = diagonal(2);
                let du = d.conjugate(&hadamard());
                intermediates.push(Named { label: "diag".into(), alg: d });
                intermediates.push(Named { label: "hadamard_diag".into(), alg: du });
                quadruples.push((0, 1));
            }
            depth = if n <= 2 { 3 } else { 2 };
            (full_matrix(n), matrix_tensor(k, n))
        }
        "diagonal" => {
            let n = param_usize(p, "n")?;
            if n == 0 || n > 16 {
                return Err(Error::BadSpec(format!("diagonal needs 1 ≤ n ≤ 16, got {n}")));
            }
            depth = 3;
            (full_matrix(n), diagonal(n))
        }
        "group_algebra" => {
            let g = param_perms(p, "g")?;
            if g.is_empty() {
                return Err(Error::BadSpec("group_algebra needs generators `g`".into()));
            }
            let degree = g[0].len();
            let els = perm_group(&g, degree)?;
            let us = regular_rep(&els);
            let n = els.len();
            let gd = GroupData { elements: els.clone(), subgroup: Vec::new(), unitaries: us.clone() };
            let sub_of = |key: &str| -> Result<Vec<usize>> {
                let hs = param_perms(p, key)?;
                let mut idx = Vec::new();
                for h in &hs {
                    idx.push(gd.index_of(h).ok_or_else(|| Error::BadSpec(format!("`{key}` generator {h:?} is not in G")))?);
                }
                Ok(gd.generated(&idx))
            };
            let h = sub_of("h")?;
            let mut named = Vec::new();
            for key in ["c", "d"] {
                if p.get(key).is_some() {
                    let k = sub_of(key)?;
                    if !h.iter().all(|x| k.contains(x)) {
                        return Err(Error::BadSpec(format!("`{key}` does not contain H")));
                    }
                    named.push((key.to_uppercase(), k));
                }
            }
            let mut gd = gd;
            gd.subgroup = h.clone();
            for (label, k) in named {
                intermediates.push(Named { label, alg: gd.algebra(&k) });
            }
            if intermediates.len() == 2 {
                quadruples.push((0, 1));
            }
            canonical = None;
            depth = if n <= 3 { 3 } else { 2 };
            let a = fro_alg(n, us.clone(), us.clone());
            let b = gd.algebra(&h);
            group = Some(gd);
            (a, b)
        }
        "bratteli" => {
            let lam: Vec<Vec<usize>> =
                serde_json::from_value(p.get("lambda").cloned().unwrap_or(Value::Null)).map_err(|e| Error::BadSpec(format!("`lambda`: {e}")))?;
            let dims_b: Vec<usize> =
                serde_json::from_value(p.get("dims_b").cloned().unwrap_or(Value::Null)).map_err(|e| Error::BadSpec(format!("`dims_b`: {e}")))?;
            if lam.is_empty() || lam.iter().any(|r| r.len() != dims_b.len()) || dims_b.contains(&0) {
                return Err(Error::BadSpec("lambda must be a non-empty |A-blocks| × |B-blocks| matrix".into()));
            }
            let dims_a: Vec<usize> = lam.iter().map(|r| r.iter().zip(&dims_b).map(|(l, d)| l * d).sum()).collect();
            if let Some(v) = p.get("dims_a") {
                let given: Vec<usize> = serde_json::from_value(v.clone()).map_err(|e| Error::BadSpec(format!("`dims_a`: {e}")))?;
                if given != dims_a {
                    return Err(Error::BadSpec(format!("dims_a {given:?} disagrees with Λ·dims_b = {dims_a:?}")));
                }
            }
            if dims_a.contains(&0) {
                return Err(Error::BadSpec("every A-block must contain some B-block".into()));
            }
            let n: usize = dims_a.iter().sum();
            if n > 64 {
                return Err(Error::BadSpec("ambient too large".into()));
            }
            let a = Algebra::full_blocks(&dims_a, InnerProduct::frobenius(n));
            // B-block j sits in A-block i as x ⊗ 1_{Λ_ij}
            let mut units = Vec::new();
            for (j, &bj) in dims_b.iter().enumerate() {
                for s in 0..bj {
                    for t in 0..bj {
                        let mut m = CMatrix::zeros(n, n);
                        let mut off = 0;
                        for (i, row) in lam.iter().enumerate() {
                            let mut inner = off;
                            for (jj, &l) in row.iter().enumerate() {
                                for copy in 0..l {
                                    if jj == j {
                                        let base = inner + copy * bj;
                                        m[(base + s, base + t)] = ONE;
                                    }
                                }
                                inner += l * dims_b[jj];
                            }
                            off += dims_a[i];
                        }
                        units.push(m);
                    }
                }
            }
            if let Some(w) = &spec.trace {
                if w.len() != dims_a.len() {
                    return Err(Error::BadSpec("trace needs one weight per A-block".into()));
                }
                canonical = Some(w.clone());
            }
            depth = 2;
            (a, fro_alg(n, units.clone(), units))
        }
        "inner_crossed" => {
            let n0 = param_usize(p, "n")?;
            let g = param_perms(p, "g")?;
            if g.is_empty() || g.iter().any(|x| x.len() != n0) {
                return Err(Error::BadSpec("inner_crossed needs permutations of n points in `g`".into()));
            }
            let els = perm_group(&g, n0)?;
            let us = regular_rep(&els);
            let m = els.len();
            let n = n0 * m;
            if n > 64 {
                return Err(Error::BadSpec("ambient too large".into()));
            }
            let b = matrix_tensor(n0, n);
            let mut gens: Vec<CMatrix> = b.generators().to_vec();
            for (gi, gp) in els.iter().enumerate() {
                gens.push(perm_matrix(gp).kron(&us[gi]));
            }
            let a = span_closure(&gens, n);
            depth = 1;
            (a, b)
        }
        other => return Err(Error::BadSpec(format!("unknown family `{other}`"))),
    };
    let pair = InclusionPair::new(big, small)?;
    if let Some(w) = &canonical {
        if w.len() != pair.big_blocks().len() || w.iter().any(|&x| !(x > 0.0)) {
            return Err(Error::BadSpec("trace weights must be positive, one per A-block".into()));
        }
    }
    Ok(Model { id, spec: spec.clone(), pair, canonical, intermediates, quadruples, group, depth })
}

fn group_spec(label: &str, g: Value, h: Value, extra: Option<(Value, Value)>) -> ModelSpec {
    let mut params = json!({ "g": g, "h": h });
    if let Some((c, d)) = extra {
        params["c"] = c;
        params["d"] = d;
    }
    ModelSpec::new("group_algebra", params, label)
}

/// The standard acceptance corpus (10 entries).
pub fn corpus() -> Vec<ModelSpec> {
    vec![
        group_spec("z2", json!([[1, 0]]), json!([]), None),
        group_spec("z3", json!([[1, 2, 0]]), json!([]), None),
        group_spec("z4", json!([[1, 2, 3, 0]]), json!([]), Some((json!([[2, 3, 0, 1]]), json!([[2, 3, 0, 1]])))),
        group_spec("z2_z4", json!([[1, 2, 3, 0]]), json!([[2, 3, 0, 1]]), None),
        group_spec("s3", json!([[1, 0, 2], [1, 2, 0]]), json!([]), Some((json!([[1, 0, 2]]), json!([[2, 1, 0]])))),
        group_spec("s3_h", json!([[1, 0, 2], [1, 2, 0]]), json!([[1, 0, 2]]), None),
        ModelSpec::new("full_matrix", json!({"k": 1, "n": 2}), "c_m2"),
        ModelSpec::new("diagonal", json!({"n": 2}), "diag_m2"),
        ModelSpec::new("full_matrix", json!({"k": 2, "n": 4}), "m2_m4"),
        ModelSpec::new("full_matrix", json!({"k": 1, "n": 2, "quadruple": "hadamard"}), "hadamard"),
    ]
}

/// Corpus plus auxiliary models.
pub fn extended_corpus() -> Vec<ModelSpec> {
    let mut v = corpus();
    v.push(group_spec("z6", json!([[1, 2, 3, 4, 5, 0]]), json!([]), Some((json!([[3, 4, 5, 0, 1, 2]]), json!([[2, 3, 4, 5, 0, 1]])))));
    v.push(group_spec("s3_quadruple", json!([[1, 0, 2], [1, 2, 0]]), json!([]), Some((json!([[1, 0, 2]]), json!([[2, 1, 0]])))));
    v.push(ModelSpec::new("bratteli", json!({"lambda": [[1, 1]], "dims_b": [1, 1]}), "bratteli_diag"));
    v.push(ModelSpec::new("inner_crossed", json!({"n": 2, "g": [[1, 0]]}), "m2_crossed_z2"));
    v
}

pub fn lookup(id: &str) -> Option<ModelSpec> {
    extended_corpus().into_iter().find(|s| s.label == id)
}

/// Normalized ambient trace weights of a block structure.
pub fn ambient_weights(b: &BlockData) -> Vec<f64> {
    b.minimal.iter().map(|p| p.trace().re).collect()
}

