//! Deterministic sample generators for the sample-based checkers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::metric::{uniform_nodes, GridFunction};

pub const DEFAULT_SEED: u64 = 0x5eed_c5a7;
pub const DEFAULT_PAIR_COUNT: usize = 512;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_scalars(low: f64, high: f64, count: usize, seed: u64) -> Vec<f64> {
    let mut rng = rng(seed);
    (0..count).map(|_| rng.random_range(low..=high)).collect()
}

/// `count` ordered pairs from `[low, high]`: a lattice (odd side, so the
/// midpoint is included) with all its pairs including `x = y`, a
/// near-coincidence pair per lattice point, and uniform random pairs for the rest.
pub fn scalar_pairs(low: f64, high: f64, count: usize, seed: u64) -> Vec<(f64, f64)> {
    let mut side = ((count / 2) as f64).sqrt().floor() as usize;
    if side % 2 == 0 {
        side = side.saturating_sub(1);
    }
    let side = side.max(1);
    let lattice: Vec<f64> = if side == 1 {
        vec![0.5 * (low + high)]
    } else {
        (0..side)
            .map(|i| low + (high - low) * i as f64 / (side - 1) as f64)
            .collect()
    };

    let mut pairs = Vec::with_capacity(count);
    for &x in &lattice {
        for &y in &lattice {
            pairs.push((x, y));
        }
    }
    for &x in &lattice {
        pairs.push((x, x + 1e-6 * (1.0 + x.abs())));
    }
    pairs.truncate(count);
    let mut rng = rng(seed);
    while pairs.len() < count {
        pairs.push((rng.random_range(low..=high), rng.random_range(low..=high)));
    }
    pairs
}

pub fn scalar_triples(low: f64, high: f64, count: usize, seed: u64) -> Vec<(f64, f64, f64)> {
    let mut rng = rng(seed);
    (0..count)
        .map(|_| {
            (
                rng.random_range(low..=high),
                rng.random_range(low..=high),
                rng.random_range(low..=high),
            )
        })
        .collect()
}

/// A smooth random function on the `n`-node grid: a few random Fourier
/// modes of size up to `amplitude`, plus a little node-level noise.
pub fn random_grid_function<R: Rng>(n: usize, amplitude: f64, rng: &mut R) -> GridFunction {
    let coeffs: Vec<(f64, f64)> = (0..4)
        .map(|_| {
            (
                rng.random_range(-amplitude..=amplitude),
                rng.random_range(-amplitude..=amplitude),
            )
        })
        .collect();
    let values = uniform_nodes(n)
        .into_iter()
        .map(|t| {
            let smooth: f64 = coeffs
                .iter()
                .enumerate()
                .map(|(k, (a, b))| {
                    let w = std::f64::consts::PI * k as f64 * t;
                    a * w.cos() + b * w.sin()
                })
                .sum::<f64>()
                / 4.0;
            smooth + 0.01 * amplitude * rng.random_range(-1.0..=1.0)
        })
        .collect();
    GridFunction::new(values).expect("finite by construction")
}

/// Random grid-function pairs; one in eight is an `x = y` pair and one in
/// eight a near-coincidence pair.
pub fn grid_function_pairs(
    n: usize,
    count: usize,
    amplitude: f64,
    seed: u64,
) -> Vec<(GridFunction, GridFunction)> {
    let mut rng = rng(seed);
    (0..count)
        .map(|i| {
            let x = random_grid_function(n, amplitude, &mut rng);
            let y = match i % 8 {
                0 => x.clone(),
                1 => {
                    let v = x.values().iter().map(|v| v + 1e-7 * amplitude).collect();
                    GridFunction::new(v).expect("finite")
                }
                _ => random_grid_function(n, amplitude, &mut rng),
            };
            (x, y)
        })
        .collect()
}
