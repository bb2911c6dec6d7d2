use cstar::expect::minimal_expectation;
use cstar::models::{build, corpus, extended_corpus, lookup, perm_group, ModelSpec};
use cstar::tower::Tower;
use cstar::{herm_eig, CMatrix, Error};
use serde_json::json;

fn bad(spec: ModelSpec) -> bool {
    matches!(build(&spec), Err(Error::BadSpec(_)))
}

fn index_of(spec: &ModelSpec) -> f64 {
    let m = build(spec).unwrap();
    let (e, _, tr) = minimal_expectation(&m.pair, m.canonical.as_deref(), 1).unwrap();
    Tower::build(&m.pair, &e, &tr, 0).unwrap().index
}

fn lambda_norm_sq(lam: &[Vec<usize>]) -> f64 {
    let (r, c) = (lam.len(), lam[0].len());
    let m = CMatrix::from_fn(r, r, |i, j| ((0..c).map(|k| lam[i][k] * lam[j][k]).sum::<usize>() as f64).into());
    *herm_eig(&m).unwrap().values.last().unwrap()
}

#[test]
fn transposition_in_s3() {
    let m = build(&lookup("s3_h").unwrap()).unwrap();
    assert_eq!(m.pair.big.dim(), 6);
    assert_eq!(m.pair.small.dim(), 2);
    assert_eq!(m.group.as_ref().unwrap().subgroup.len(), 2);
}

#[test]
fn bratteli_one_one_is_diagonal_in_m2() {
    let spec = ModelSpec::new("bratteli", json!({"lambda": [[1, 1]], "dims_b": [1, 1]}), "");
    let m = build(&spec).unwrap();
    assert_eq!(m.id, "bratteli");
    assert_eq!(m.pair.big.dim(), 4);
    assert_eq!(m.pair.small.dim(), 2);
    let diag = build(&lookup("diag_m2").unwrap()).unwrap();
    assert_eq!(m.pair.lambda, diag.pair.lambda);
    assert!(m.pair.small.subspace_distance(&diag.pair.small) < 1e-10);
}

#[test]
fn minimal_index_on_corpus() {
    for spec in extended_corpus() {
        let m = build(&spec).unwrap();
        let got = index_of(&spec);
        let want = match &m.group {
            // the trace-preserving expectation onto ℂH is minimal, with index [G:H]
            Some(g) => (g.order() / g.subgroup.len()) as f64,
            None if m.pair.big_blocks().len() == 1 && m.pair.small_blocks().len() == 1 => lambda_norm_sq(&m.pair.lambda),
            None => continue,
        };
        assert!((got - want).abs() < 1e-8, "{}: {got} vs {want}", spec.label);
    }
    // ℂ² ⊂ M₂ with Λ = (1 1): ∥Λ∥² = 2
    assert!((index_of(&lookup("diag_m2").unwrap()) - 2.0).abs() < 1e-9);
}

#[test]
fn inner_crossed_product() {
    // M₂ ⋊ ℤ₂ by an inner action is M₂ ⊗ ℂ²
    let m = build(&lookup("m2_crossed_z2").unwrap()).unwrap();
    assert_eq!(m.pair.big.dim(), 8);
    assert_eq!(m.pair.small.dim(), 4);
    assert!((index_of(&m.spec) - 2.0).abs() < 1e-9);
}

#[test]
fn corpus_has_ten_models() {
    let ids: Vec<String> = corpus().into_iter().map(|s| s.label).collect();
    assert_eq!(ids.len(), 10);
    for id in &ids {
        assert!(lookup(id).is_some());
    }
    assert!(lookup("nope").is_none());
}

#[test]
fn bad_specs_are_rejected() {
    assert!(bad(ModelSpec::new("klein", json!({}), "")));
    assert!(bad(ModelSpec::new("full_matrix", json!({"k": 3, "n": 4}), "")));
    assert!(bad(ModelSpec::new("full_matrix", json!({"n": 4}), "")));
    assert!(bad(ModelSpec::new("full_matrix", json!({"k": 2, "n": 4, "quadruple": "hadamard"}), "")));
    assert!(bad(ModelSpec::new("diagonal", json!({"n": 0}), "")));
    assert!(bad(ModelSpec::new("group_algebra", json!({"g": []}), "")));
    assert!(bad(ModelSpec::new("group_algebra", json!({"g": [[1, 2, 0]], "h": [[1, 0, 2]]}), "")));
    assert!(bad(ModelSpec::new("group_algebra", json!({"g": [[1, 0, 2], [1, 2, 0]], "h": [[1, 0, 2]], "c": [[1, 2, 0]]}), "")));
    assert!(bad(ModelSpec::new("bratteli", json!({"lambda": [[1, 1]], "dims_b": [1]}), "")));
    assert!(bad(ModelSpec::new("bratteli", json!({"lambda": [[1, 1]], "dims_b": [1, 1], "dims_a": [3]}), "")));
    let mut spec = ModelSpec::new("bratteli", json!({"lambda": [[1], [1]], "dims_b": [1]}), "");
    spec.trace = Some(vec![0.5, -0.5]);
    assert!(bad(spec));
    assert!(matches!(ModelSpec::from_json("{\"family\": "), Err(Error::BadSpec(_))));
}

#[test]
fn large_groups_are_refused() {
    // S₅ has 120 elements
    assert!(perm_group(&[vec![1, 0, 2, 3, 4], vec![1, 2, 3, 4, 0]], 5).is_err());
    assert_eq!(perm_group(&[vec![1, 0, 2, 3], vec![1, 2, 3, 0]], 4).unwrap().len(), 24);
}

#[test]
fn specs_roundtrip_through_json() {
    for spec in extended_corpus() {
        let text = serde_json::to_string(&spec).unwrap();
        assert_eq!(ModelSpec::from_json(&text).unwrap(), spec);
    }
    let s = ModelSpec::from_json(r#"{"family": "diagonal", "params": {"n": 3}}"#).unwrap();
    assert_eq!(build(&s).unwrap().id, "diagonal");
}
