#![allow(dead_code)]

use loewner::bernstein::BernsteinRepr;
use loewner::evolution::HerglotzField;
use loewner::generator::GeneratorRepr;
use loewner::measure::{Atom, DensityPanel, JumpMeasure};
use loewner::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Atoms plus an optional exponential panel; every moment is finite.
pub fn measure(rng: &mut ChaCha8Rng) -> JumpMeasure {
    let n = rng.random_range(0..3);
    let atoms = (0..n)
        .map(|_| Atom { x: rng.random_range(0.1..3.0), w: rng.random_range(0.0..1.0) })
        .collect();
    let panels = if rng.random_bool(0.5) {
        vec![DensityPanel::exponential(rng.random_range(0.5..3.0), rng.random_range(0.0..1.0), 0.0, f64::INFINITY)]
    } else {
        Vec::new()
    };
    JumpMeasure::new(atoms, panels).unwrap()
}

/// A generator; with `killing` false it has a boundary fixed point at 0.
pub fn generator(rng: &mut ChaCha8Rng, killing: bool) -> GeneratorRepr {
    let q = if killing && rng.random_bool(0.3) { rng.random_range(0.0..1.0) } else { 0.0 };
    let a = rng.random_range(-1.0..2.0);
    let b = if rng.random_bool(0.7) { rng.random_range(0.0..1.0) } else { 0.0 };
    GeneratorRepr::new(q, a, b, measure(rng)).unwrap()
}

pub fn field(rng: &mut ChaCha8Rng, max_slices: usize, killing: bool) -> HerglotzField {
    let m = rng.random_range(1..=max_slices);
    let mut breakpoints = vec![0.0];
    for _ in 0..m {
        let last = *breakpoints.last().unwrap();
        breakpoints.push(last + rng.random_range(0.2..1.0));
    }
    let slices = (0..m).map(|_| generator(rng, killing)).collect();
    HerglotzField::new(breakpoints, slices).unwrap()
}

pub fn bernstein(rng: &mut ChaCha8Rng) -> BernsteinRepr {
    loop {
        let alpha = if rng.random_bool(0.5) { rng.random_range(0.0..1.0) } else { 0.0 };
        let beta = if rng.random_bool(0.7) { rng.random_range(0.0..2.0) } else { 0.0 };
        if let Ok(f) = BernsteinRepr::new(alpha, beta, measure(rng)) {
            return f;
        }
    }
}

/// A point of the right half-plane with modulus spread over a few decades.
pub fn point(rng: &mut ChaCha8Rng) -> Complex {
    let re = 10f64.powf(rng.random_range(-1.5..1.0));
    let im = rng.random_range(-5.0..5.0);
    Complex::new(re, im)
}

/// Ordered times inside `[0, span]`.
pub fn times<const N: usize>(rng: &mut ChaCha8Rng, span: f64) -> [f64; N] {
    let mut out = [0.0; N];
    for t in out.iter_mut() {
        *t = rng.random_range(0.0..span);
    }
    out.sort_by(f64::total_cmp);
    out
}

pub fn grid() -> Vec<(f64, f64)> {
    (0..10).map(|i| (0.2 + 0.7 * i as f64, 0.1)).collect()
}
