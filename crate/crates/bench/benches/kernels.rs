use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use cstar::fourier::Fourier;
use cstar::herm_eig;
use cstar::lattice::enumerate;
use cstar::rng::{combination, seeded};
use cstar::tower::Of;
use cstar_bench::{hermitian, model, tower};

fn eig(c: &mut Criterion) {
    let mut g = c.benchmark_group("herm_eig");
    for n in [8, 16, 32] {
        let h = hermitian(n);
        g.bench_with_input(BenchmarkId::from_parameter(n), &h, |b, h| b.iter(|| herm_eig(black_box(h)).unwrap()));
    }
    g.finish();
}

fn towers(c: &mut Criterion) {
    let mut g = c.benchmark_group("tower_build");
    g.sample_size(10);
    for (id, depth) in [("z2", 3), ("z3", 2), ("c_m2", 3)] {
        g.bench_function(format!("{id}_d{depth}"), |b| b.iter(|| tower(black_box(id), depth)));
    }
    g.finish();
}

fn fourier(c: &mut Criterion) {
    let tw = tower("z3", 3);
    let fr = Fourier::new(&tw);
    let x = combination(&mut seeded(3), tw.commutant(1, Of::B));
    c.bench_function("fourier_k1_z3", |b| b.iter(|| fr.fourier(1, black_box(&x)).unwrap()));
    c.bench_function("coproduct_k1_z3", |b| b.iter(|| fr.coproduct(1, black_box(&x), &x).unwrap()));
}

fn lattice(c: &mut Criterion) {
    let m = model("z4");
    let mut g = c.benchmark_group("lattice");
    g.sample_size(10);
    g.bench_function("z4", |b| b.iter(|| enumerate(black_box(&m), 1).unwrap()));
    g.finish();
}

criterion_group!(benches, eig, towers, fourier, lattice);
criterion_main!(benches);
