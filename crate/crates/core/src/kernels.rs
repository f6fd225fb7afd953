//! Kernel and projective-geometry primitives: absolute inner products,
//! chordal distance between lines, projective and classical Riesz kernels,
//! and the isometric embedding of lines into flattened rank-1 projectors.

use crate::error::{Error, Result};
use crate::frame::{FrameConfig, UnitVector};
use crate::linalg::dot;

/// Pairs whose absolute inner product is within this distance of 1 are
/// treated as coincident lines: singular kernels return infinity there and
/// gradients refuse to evaluate, instead of overflowing nondeterministically.
pub const DEGENERATE_LINE_TOL: f64 = 1e-14;

/// Kernel family selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelFamily {
    /// Repulsive potential on lines: (1 - |<x,y>|^2)^(-s/2) for s > 0,
    /// log(1/(1 - |<x,y>|^2)) at s = 0, and -(1 - |<x,y>|^2)^(-s/2) for s < 0.
    ProjectiveRiesz,
    /// Classical Riesz kernel on the ambient points: 1/||x-y||^s for s > 0,
    /// log(1/||x-y||) at s = 0, -||x-y||^(-s) for s < 0.
    Riesz,
    /// Frame potential kernel |<x,y>|^2. Its minimizers coincide with those
    /// of the projective family at s = -2 (the kernels differ by a constant).
    FramePotential,
}

/// A kernel family plus its exponent. `FramePotential` ignores `s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    pub family: KernelFamily,
    pub s: f64,
}

impl KernelSpec {
    pub fn projective_riesz(s: f64) -> Self {
        Self {
            family: KernelFamily::ProjectiveRiesz,
            s,
        }
    }

    pub fn riesz(s: f64) -> Self {
        Self {
            family: KernelFamily::Riesz,
            s,
        }
    }

    pub fn frame_potential() -> Self {
        Self {
            family: KernelFamily::FramePotential,
            s: 0.0,
        }
    }

    /// True when the kernel diverges on coincident lines (or points) and the
    /// gradient must treat such pairs as errors.
    pub fn singular_at_coincidence(&self) -> bool {
        match self.family {
            KernelFamily::ProjectiveRiesz | KernelFamily::Riesz => self.s >= 0.0,
            KernelFamily::FramePotential => false,
        }
    }
}

/// |<x,y>| clamped to [0, 1]; the clamp guards round-off above 1.
pub fn abs_inner(x: &UnitVector, y: &UnitVector) -> Result<f64> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch {
            left: x.dim(),
            right: y.dim(),
        });
    }
    Ok(dot(x.coords(), y.coords()).abs().clamp(0.0, 1.0))
}

/// Chordal distance between the lines spanned by x and y:
/// sqrt(2 - 2|<x,y>|^2), in [0, sqrt(2)].
pub fn chordal_distance(x: &UnitVector, y: &UnitVector) -> Result<f64> {
    let t = abs_inner(x, y)?;
    Ok((2.0 - 2.0 * t * t).max(0.0).sqrt())
}

/// Kernel value at a pair of unit vectors. Infinity is a valid return for
/// singular kernels at coincident lines, not an error.
pub fn kernel_value(k: &KernelSpec, x: &UnitVector, y: &UnitVector) -> Result<f64> {
    match k.family {
        KernelFamily::ProjectiveRiesz | KernelFamily::FramePotential => {
            let t = abs_inner(x, y)?;
            Ok(projective_kernel_at(k, t))
        }
        KernelFamily::Riesz => {
            if x.dim() != y.dim() {
                return Err(Error::DimensionMismatch {
                    left: x.dim(),
                    right: y.dim(),
                });
            }
            let r = x
                .coords()
                .iter()
                .zip(y.coords())
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            Ok(riesz_kernel_at(k.s, r))
        }
    }
}

/// Projective-family kernel as a function of t = |<x,y>| in [0, 1].
pub(crate) fn projective_kernel_at(k: &KernelSpec, t: f64) -> f64 {
    match k.family {
        KernelFamily::FramePotential => t * t,
        KernelFamily::ProjectiveRiesz => {
            if k.s >= 0.0 && t >= 1.0 - DEGENERATE_LINE_TOL {
                return f64::INFINITY;
            }
            let w = 1.0 - t * t;
            if k.s > 0.0 {
                w.powf(-k.s / 2.0)
            } else if k.s == 0.0 {
                -w.ln()
            } else {
                -w.powf(-k.s / 2.0)
            }
        }
        KernelFamily::Riesz => unreachable!("Riesz is not a function of the inner product alone"),
    }
}

/// Classical Riesz kernel as a function of the distance r >= 0.
pub(crate) fn riesz_kernel_at(s: f64, r: f64) -> f64 {
    if s >= 0.0 && r == 0.0 {
        return f64::INFINITY;
    }
    if s > 0.0 {
        r.powf(-s)
    } else if s == 0.0 {
        -r.ln()
    } else {
        -r.powf(-s)
    }
}

/// A line embedded as the flattened rank-1 projector xx^T, a unit vector in
/// R^m with m = d(d+1)/2.
///
/// Flattening order is the row-major upper triangle with off-diagonal
/// entries scaled by sqrt(2):
/// (M11, sqrt(2)M12, ..., sqrt(2)M1d, M22, sqrt(2)M23, ..., Mdd).
/// Under this scaling the Frobenius geometry of the projectors transfers
/// verbatim: ||p_x - p_y||^2 = 2 - 2|<x,y>|^2 and <p_x, p_y> = |<x,y>|^2.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjPoint {
    ambient_d: usize,
    coords: Vec<f64>,
}

impl ProjPoint {
    /// Dimension d of the sphere the line came from.
    pub fn ambient_dim(&self) -> usize {
        self.ambient_d
    }

    /// m = d(d+1)/2.
    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Undo the flattening, returning the symmetric matrix xx^T.
    pub fn to_matrix(&self) -> Vec<Vec<f64>> {
        let d = self.ambient_d;
        let mut m = vec![vec![0.0; d]; d];
        let mut idx = 0;
        let inv_sqrt2 = 1.0 / std::f64::consts::SQRT_2;
        for i in 0..d {
            for j in i..d {
                let v = if i == j {
                    self.coords[idx]
                } else {
                    self.coords[idx] * inv_sqrt2
                };
                m[i][j] = v;
                m[j][i] = v;
                idx += 1;
            }
        }
        m
    }

    /// Reinterpret as a unit vector in R^m (the embedded image has unit
    /// Frobenius norm), so classical Riesz energies can run on it directly.
    pub fn into_unit_vector(self) -> UnitVector {
        UnitVector::new(self.coords).expect("embedded point is unit norm")
    }
}

/// Embed the line through x as the flattened projector xx^T.
pub fn embed(x: &UnitVector) -> ProjPoint {
    let d = x.dim();
    let c = x.coords();
    let mut coords = Vec::with_capacity(d * (d + 1) / 2);
    for i in 0..d {
        for j in i..d {
            if i == j {
                coords.push(c[i] * c[i]);
            } else {
                coords.push(std::f64::consts::SQRT_2 * c[i] * c[j]);
            }
        }
    }
    ProjPoint {
        ambient_d: d,
        coords,
    }
}

/// Embed every column, producing a configuration on the unit sphere of R^m.
pub fn embedded_config(x: &FrameConfig) -> FrameConfig {
    let m = x.d() * (x.d() + 1) / 2;
    let vectors = x
        .vectors()
        .iter()
        .map(|v| embed(v).into_unit_vector())
        .collect();
    FrameConfig::new(m, vectors).expect("embedding preserves shape")
}

/// N x N matrix of absolute inner products |<x_i, x_j>|; symmetric with
/// unit diagonal.
pub fn gram_abs(x: &FrameConfig) -> Vec<Vec<f64>> {
    let n = x.n();
    let mut g = vec![vec![0.0; n]; n];
    for i in 0..n {
        g[i][i] = 1.0;
        for j in (i + 1)..n {
            let t = dot(x.column(i).coords(), x.column(j).coords())
                .abs()
                .clamp(0.0, 1.0);
            g[i][j] = t;
            g[j][i] = t;
        }
    }
    g
}
