//! Shared helpers for the integration suites: seeded random configurations,
//! random orthogonal maps, and finite-difference gradients.
#![allow(dead_code)] // each test binary uses a different subset

use framepack::energy::energy_of_columns;
use framepack::frame::FrameConfig;
use framepack::kernels::KernelSpec;
use framepack::optimizer::random_uniform_frame;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn random_config(d: usize, n: usize, seed: u64) -> FrameConfig {
    random_uniform_frame(d, n, seed).unwrap()
}

/// Random configuration in generic position: no pair of lines closer than
/// |<x,y>| = 0.9. Finite-difference oracles need this; several kernels have
/// singular derivatives at coincident lines, where a fixed-step difference
/// quotient is meaningless.
pub fn separated_random_config(d: usize, n: usize, seed: u64) -> FrameConfig {
    use framepack::kernels::gram_abs;
    use framepack::optimizer::split_seed;
    for attempt in 0..1000 {
        let x = random_uniform_frame(d, n, split_seed(seed, attempt)).unwrap();
        let g = gram_abs(&x);
        let mut max_off = 0.0_f64;
        for i in 0..n {
            for j in (i + 1)..n {
                max_off = max_off.max(g[i][j]);
            }
        }
        if max_off < 0.9 {
            return x;
        }
    }
    panic!("no well-separated random configuration found for d={d}, n={n}");
}

pub fn columns_of(x: &FrameConfig) -> Vec<Vec<f64>> {
    x.vectors().iter().map(|v| v.coords().to_vec()).collect()
}

/// Random orthogonal d x d matrix: Gram-Schmidt on a Gaussian matrix, with
/// a deterministic sign convention.
pub fn random_orthogonal(d: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(d);
    while q.len() < d {
        let mut v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        for prev in &q {
            let proj: f64 = prev.iter().zip(&v).map(|(p, w)| p * w).sum();
            for (w, p) in v.iter_mut().zip(prev) {
                *w -= proj * p;
            }
        }
        let norm: f64 = v.iter().map(|w| w * w).sum::<f64>().sqrt();
        if norm < 1e-8 {
            continue;
        }
        q.push(v.into_iter().map(|w| w / norm).collect());
    }
    q
}

/// Apply the orthogonal map (rows of q) to every column of the configuration.
pub fn apply_orthogonal(q: &[Vec<f64>], x: &FrameConfig) -> FrameConfig {
    let d = x.d();
    let cols = x
        .vectors()
        .iter()
        .map(|v| {
            (0..d)
                .map(|i| q[i].iter().zip(v.coords()).map(|(a, b)| a * b).sum())
                .collect()
        })
        .collect();
    FrameConfig::from_columns(d, cols).unwrap()
}

/// Central-difference gradient of the raw energy with respect to every
/// ambient coordinate.
pub fn central_diff_gradient(k: &KernelSpec, cols: &[Vec<f64>], h: f64) -> Vec<Vec<f64>> {
    let mut fd = vec![vec![0.0; cols[0].len()]; cols.len()];
    let mut work = cols.to_vec();
    for i in 0..cols.len() {
        for a in 0..cols[0].len() {
            work[i][a] = cols[i][a] + h;
            let plus = energy_of_columns(k, &work);
            work[i][a] = cols[i][a] - h;
            let minus = energy_of_columns(k, &work);
            work[i][a] = cols[i][a];
            fd[i][a] = (plus - minus) / (2.0 * h);
        }
    }
    fd
}

/// Max entrywise error of `a` against `b`, relative to the largest
/// magnitude in `b` (floored at 1).
pub fn max_rel_err(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let scale = b
        .iter()
        .flat_map(|r| r.iter())
        .map(|v| v.abs())
        .fold(1.0_f64, f64::max);
    a.iter()
        .zip(b)
        .flat_map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| (x - y).abs()))
        .fold(0.0_f64, f64::max)
        / scale
}
