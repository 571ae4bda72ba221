#![allow(dead_code)]

use mongeampere_core::{JetPoint, MaKind, SymMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Entry {
    pub text: &'static str,
    pub kind: MaKind,
    pub exceptional: bool,
}

const fn entry(text: &'static str, kind: MaKind, exceptional: bool) -> Entry {
    Entry { text, kind, exceptional }
}

pub const CORPUS: [Entry; 10] = [
    entry("u11+u22", MaKind::Linear, true),
    entry("u11-u22", MaKind::Linear, true),
    entry("u12+u1*u11", MaKind::QuasiLinear, true),
    entry("u11*u22-u12^2-1", MaKind::MongeAmpere, true),
    entry("u11*u22-u12^2+1", MaKind::MongeAmpere, true),
    entry("u11*u22-u12^2", MaKind::MongeAmpere, true),
    entry("u11^2-u22", MaKind::NonMongeAmpere, false),
    entry("u11 - (1/3)*u22^3 - u22", MaKind::NonMongeAmpere, false),
    entry("sin(x1)*u11 + u*(u11*u22-u12^2)", MaKind::MongeAmpere, true),
    entry("u11+u22+u11^2", MaKind::NonMongeAmpere, false),
];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_sym(n: usize, scale: f64, rng: &mut impl Rng) -> SymMatrix {
    SymMatrix::from_fn(n, |_, _| rng.random_range(-scale..=scale))
}

pub fn random_point(n: usize, rng: &mut impl Rng) -> JetPoint {
    let mut v = || rng.random_range(-2.0..=2.0);
    let x = (0..n).map(|_| v()).collect();
    let u = v();
    let p = (0..n).map(|_| v()).collect();
    let h = SymMatrix::from_fn(n, |_, _| v());
    JetPoint::new(x, u, p, h).unwrap()
}

pub fn max_abs(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, |m, x| m.max(x.abs()))
}
