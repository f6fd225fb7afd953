//! Closed-form reference configurations used as optimization oracles.

use crate::error::{Error, Result};
use crate::frame::{FrameConfig, UnitVector};

/// N equally spaced points on the half-circle:
/// (cos(k pi / N), sin(k pi / N)) for k = 0..N-1.
///
/// The unique optimal class for convex decreasing kernels of the chordal
/// distance on S^1, and therefore for the projective Riesz family at s >= 0.
pub fn half_circle_config(n: usize) -> Result<FrameConfig> {
    if n < 1 {
        return Err(Error::TooFewVectors { needed: 1, got: n });
    }
    let vectors = (0..n)
        .map(|k| {
            let theta = k as f64 * std::f64::consts::PI / n as f64;
            UnitVector::new(vec![theta.cos(), theta.sin()])
        })
        .collect::<Result<Vec<_>>>()?;
    FrameConfig::new(2, vectors)
}

/// The d+1 vertices of the regular d-simplex as unit vectors in R^d, an
/// equiangular tight frame with pairwise inner product exactly -1/d.
///
/// Construction: center the d+1 standard basis vectors of R^(d+1) on their
/// mean, normalize, then rotate the hyperplane orthogonal to the all-ones
/// vector onto the first d coordinates with a Householder reflection.
pub fn simplex_etf(d: usize) -> Result<FrameConfig> {
    if d < 2 {
        return Err(Error::DimensionTooSmall(d));
    }
    let dp1 = d + 1;
    let centroid = 1.0 / dp1 as f64;
    let scale = ((d as f64) / dp1 as f64).sqrt();

    // Householder vector sending 1/sqrt(d+1) * ones to e_{d+1}.
    let a = (1.0 / (dp1 as f64).sqrt(), 1.0);
    let mut w: Vec<f64> = vec![a.0; dp1];
    w[d] -= a.1;
    let wnorm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
    for v in &mut w {
        *v /= wnorm;
    }

    let mut vectors = Vec::with_capacity(dp1);
    for i in 0..dp1 {
        let mut v: Vec<f64> = vec![-centroid; dp1];
        v[i] += 1.0;
        for c in &mut v {
            *c /= scale;
        }
        // Reflect; the last coordinate lands on (numerical) zero.
        let proj: f64 = w.iter().zip(&v).map(|(wi, vi)| wi * vi).sum();
        for (c, wi) in v.iter_mut().zip(&w) {
            *c -= 2.0 * proj * wi;
        }
        v.truncate(d);
        vectors.push(UnitVector::new(v)?);
    }
    FrameConfig::new(d, vectors)
}

/// Six unit vectors in R^3 with all pairwise |inner products| equal to
/// 1/sqrt(5): one representative per antipodal pair of icosahedron
/// vertices, signs fixed so the first nonzero coordinate is positive.
pub fn icosahedron_etf6() -> FrameConfig {
    let phi = (1.0 + 5.0_f64.sqrt()) / 2.0;
    let raw = [
        [0.0, 1.0, phi],
        [0.0, 1.0, -phi],
        [1.0, phi, 0.0],
        [1.0, -phi, 0.0],
        [phi, 0.0, 1.0],
        [phi, 0.0, -1.0],
    ];
    let vectors = raw
        .iter()
        .map(|c| UnitVector::new(c.to_vec()).expect("nonzero"))
        .collect();
    FrameConfig::new(3, vectors).expect("valid shape")
}

/// The standard orthonormal basis of R^d as a frame.
pub fn orthonormal_basis(d: usize) -> Result<FrameConfig> {
    if d < 2 {
        return Err(Error::DimensionTooSmall(d));
    }
    let vectors = (0..d)
        .map(|i| {
            let mut c = vec![0.0; d];
            c[i] = 1.0;
            UnitVector::new(c)
        })
        .collect::<Result<Vec<_>>>()?;
    FrameConfig::new(d, vectors)
}
