//! Shared fixtures for the criterion benches.

use cstar::expect::minimal_expectation;
use cstar::models::{build, lookup, Model};
use cstar::rng::{random_hermitian, seeded};
use cstar::tower::Tower;
use cstar::CMatrix;

pub fn hermitian(n: usize) -> CMatrix {
    random_hermitian(&mut seeded(n as u64), n)
}

pub fn model(id: &str) -> Model {
    build(&lookup(id).expect("corpus id")).expect("corpus model builds")
}

pub fn tower(id: &str, depth: usize) -> Tower {
    let m = model(id);
    let (e, _, tr) = minimal_expectation(&m.pair, m.canonical.as_deref(), 1).expect("minimal expectation");
    Tower::build(&m.pair, &e, &tr, depth).expect("tower")
}
