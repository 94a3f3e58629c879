#![allow(dead_code)]

use jacprobe::corpus::load_corpus;
use jacprobe::polymap::{AnyMap, RealMap};
use jacprobe::realify::realify;
use jacprobe::sampling::trial_rng;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Every corpus map as a real map, complex ones realified.
pub fn real_corpus() -> Vec<(String, RealMap)> {
    load_corpus()
        .unwrap()
        .into_iter()
        .filter(|e| e.witness.is_none())
        .map(|e| {
            let map = match e.map {
                AnyMap::Real(m) => m,
                AnyMap::Complex(m) => realify(&m).unwrap().doubled,
            };
            (e.name, map)
        })
        .collect()
}

pub fn rng(stream: u64) -> ChaCha8Rng {
    trial_rng(2024, stream)
}

pub fn uniform_point(rng: &mut ChaCha8Rng, n: usize, half: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-half..=half)).collect()
}

/// `|got - want|` relative to `|want|`, absolute below one.
pub fn rel_err(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs().max(1.0)
}
