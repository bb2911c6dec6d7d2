use cstar::numkernel::{nullspace, orthonormalize, project, projection_join, projection_meet, psd_root_pinv, support_projection};
use cstar::rng::{random_hermitian, random_matrix, seeded};
use cstar::{c, herm_eig, CMatrix, InnerProduct};
use proptest::prelude::*;

fn dist(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).fro_norm()
}

#[test]
fn eig_reconstructs_random_hermitian() {
    let mut r = seeded(1);
    let h = random_hermitian(&mut r, 8);
    let e = herm_eig(&h).unwrap();
    // V diag(μ) V*, rebuilt by hand
    let d = CMatrix::diag_real(&e.values);
    let back = e.vectors.matmul(&d).matmul(&e.vectors.adjoint());
    assert!(dist(&back, &h) < 1e-10 * h.fro_norm());
    assert!(dist(&e.vectors.adj_mul(&e.vectors), &CMatrix::identity(8)) < 1e-10);
    assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn eig_of_known_matrix() {
    // [[2, i], [-i, 2]] has eigenvalues 1 and 3
    let mut h = CMatrix::identity(2).scale_re(2.0);
    h[(0, 1)] = c(0.0, 1.0);
    h[(1, 0)] = c(0.0, -1.0);
    let e = herm_eig(&h).unwrap();
    assert!((e.values[0] - 1.0).abs() < 1e-12);
    assert!((e.values[1] - 3.0).abs() < 1e-12);
}

#[test]
fn eig_rejects_non_hermitian() {
    assert!(herm_eig(&CMatrix::unit(2, 0, 1)).is_err());
}

#[test]
fn inverse_square_root_of_projection_is_itself() {
    let mut r = seeded(2);
    let v = random_matrix(&mut r, 4, 2);
    // projection onto the column span of v
    let p = support_projection(&v.matmul(&v.adjoint())).unwrap();
    let q = psd_root_pinv(&p, -0.5).unwrap();
    assert!(dist(&q, &p) < 1e-10);
}

#[test]
fn inverse_square_root_on_support() {
    let h = CMatrix::diag_real(&[4.0, 0.25, 0.0]);
    let q = psd_root_pinv(&h, -0.5).unwrap();
    assert!(dist(&q, &CMatrix::diag_real(&[0.5, 2.0, 0.0])) < 1e-12);
    assert!(psd_root_pinv(&CMatrix::diag_real(&[1.0, -1.0]), 0.5).is_err());
}

#[test]
fn commutator_with_diag_has_diagonal_kernel() {
    // x ↦ [diag(1,2), x] on M₂ in the basis e11, e12, e21, e22
    let d = CMatrix::diag_real(&[1.0, 2.0]);
    let basis: Vec<CMatrix> = (0..4).map(|k| CMatrix::unit(2, k / 2, k % 2)).collect();
    let map = CMatrix::from_fn(4, 4, |i, j| {
        let img = d.commutator(&basis[j]);
        img[(i / 2, i % 2)]
    });
    let ker = nullspace(&map).unwrap();
    assert_eq!(ker.len(), 2);
    // by hand: [d, x]_{ij} = (d_i − d_j) x_{ij}, so the kernel is spanned by e11, e22
    for v in &ker {
        assert!(v[1].norm() < 1e-10 && v[2].norm() < 1e-10);
    }
}

#[test]
fn gram_schmidt_gives_identity_gram() {
    let mut r = seeded(3);
    let vs: Vec<CMatrix> = (0..5).map(|_| random_matrix(&mut r, 3, 3)).collect();
    let ip = InnerProduct::frobenius(3);
    let onb = orthonormalize(&vs, &ip);
    assert_eq!(onb.len(), 5);
    for (i, x) in onb.iter().enumerate() {
        for (j, y) in onb.iter().enumerate() {
            let want = if i == j { 1.0 } else { 0.0 };
            assert!((ip.inner(x, y) - c(want, 0.0)).norm() < 1e-10);
        }
    }
}

#[test]
fn gram_schmidt_drops_dependent_vectors() {
    let ip = InnerProduct::frobenius(2);
    let a = CMatrix::unit(2, 0, 0);
    let b = CMatrix::unit(2, 1, 1);
    let sum = &a + &b;
    assert_eq!(orthonormalize(&[a, b, sum], &ip).len(), 2);
}

#[test]
fn weighted_inner_product_projection() {
    let ip = InnerProduct::new(CMatrix::diag_real(&[0.75, 0.25])).unwrap();
    let onb = orthonormalize(&[CMatrix::identity(2)], &ip);
    // projection of e11 onto ℂ1 for the state diag(3/4, 1/4) is 3/4
    let p = project(&onb, &ip, &CMatrix::unit(2, 0, 0));
    assert!(dist(&p, &CMatrix::identity(2).scale_re(0.75)) < 1e-12);
}

#[test]
fn join_and_meet_of_projections() {
    let p = CMatrix::diag_real(&[1.0, 1.0, 0.0]);
    let q = CMatrix::diag_real(&[0.0, 1.0, 1.0]);
    assert!(dist(&projection_join(&p, &q).unwrap(), &CMatrix::identity(3)) < 1e-10);
    assert!(dist(&projection_meet(&p, &q).unwrap(), &CMatrix::diag_real(&[0.0, 1.0, 0.0])) < 1e-10);
}

#[test]
fn kron_dimensions_and_product_rule() {
    let mut r = seeded(4);
    let (a, b, x, y) = (random_matrix(&mut r, 2, 2), random_matrix(&mut r, 3, 3), random_matrix(&mut r, 2, 2), random_matrix(&mut r, 3, 3));
    let lhs = a.kron(&b).matmul(&x.kron(&y));
    let rhs = a.matmul(&x).kron(&b.matmul(&y));
    assert_eq!(lhs.rows(), 6);
    assert!(dist(&lhs, &rhs) < 1e-10 * lhs.fro_norm());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn eig_reconstruction(seed in any::<u64>(), n in 1usize..7) {
        let mut r = seeded(seed);
        let h = random_hermitian(&mut r, n);
        let e = herm_eig(&h).unwrap();
        let back = e.apply(|x| x);
        prop_assert!(dist(&back, &h) <= 1e-10 * h.fro_norm().max(1.0));
        let tr: f64 = e.values.iter().sum();
        prop_assert!((tr - h.trace().re).abs() <= 1e-10 * h.fro_norm().max(1.0));
    }

    #[test]
    fn op_norm_bounds(seed in any::<u64>(), n in 1usize..6) {
        let mut r = seeded(seed);
        let x = random_matrix(&mut r, n, n);
        let op = x.op_norm();
        prop_assert!(op <= x.fro_norm() * (1.0 + 1e-12));
        prop_assert!(op * (n as f64).sqrt() >= x.fro_norm() * (1.0 - 1e-12));
    }

    #[test]
    fn adjoint_reverses_products(seed in any::<u64>(), n in 1usize..6) {
        let mut r = seeded(seed);
        let x = random_matrix(&mut r, n, n);
        let y = random_matrix(&mut r, n, n);
        let lhs = x.matmul(&y).adjoint();
        let rhs = y.adjoint().matmul(&x.adjoint());
        prop_assert!(dist(&lhs, &rhs) <= 1e-12 * lhs.fro_norm().max(1.0));
        prop_assert!(dist(&x.adj_mul(&y), &x.adjoint().matmul(&y)) <= 1e-12 * lhs.fro_norm().max(1.0));
    }
}
