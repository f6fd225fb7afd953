//! Energy functionals over frame configurations and their analytic
//! gradients in ambient, tangent-projected, and spherical-coordinate form.
//!
//! The energy of a configuration is the sum of kernel values over ordered
//! pairs (i != j), so each unordered pair is counted twice. Summation is
//! sequential in pair index order (i < j, doubled), which keeps reported
//! energies deterministic run-to-run.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::frame::{FrameConfig, UnitVector};
use crate::kernels::{
    projective_kernel_at, riesz_kernel_at, KernelFamily, KernelSpec, DEGENERATE_LINE_TOL,
};
use crate::linalg::dot;

/// Angle rows for N points, one row of d-1 hyperspherical angles per point.
/// Angles are stored unconstrained; trigonometry wraps them on conversion.
#[derive(Debug, Clone, PartialEq)]
pub struct SphericalCoords {
    d: usize,
    angles: Vec<Vec<f64>>,
}

impl SphericalCoords {
    pub fn new(d: usize, angles: Vec<Vec<f64>>) -> Result<Self> {
        if d < 2 {
            return Err(Error::DimensionTooSmall(d));
        }
        for row in &angles {
            if row.len() != d - 1 {
                return Err(Error::DimensionMismatch {
                    left: d - 1,
                    right: row.len(),
                });
            }
        }
        Ok(Self { d, angles })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.angles.len()
    }

    pub fn angles(&self) -> &[Vec<f64>] {
        &self.angles
    }

    pub fn angles_mut(&mut self) -> &mut [Vec<f64>] {
        &mut self.angles
    }
}

/// Outcome of one energy-minimization run.
#[derive(Debug, Clone, Serialize)]
pub struct EnergyReport {
    pub energy: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Wall-clock time. The one field exempt from run-to-run determinism.
    pub wall_time_ms: f64,
}

/// Energy of the configuration: sum of K(x_i, x_j) over ordered pairs.
/// Returns +inf if any pair hits a singular kernel value.
pub fn energy(k: &KernelSpec, x: &FrameConfig) -> f64 {
    let views: Vec<&[f64]> = x.vectors().iter().map(|v| v.coords()).collect();
    energy_views(k, &views)
}

/// Energy evaluated on raw coordinate columns.
///
/// Columns need not be exactly unit norm: the projective kernels read the
/// raw inner product (|u| capped at 1) and the Riesz kernel the raw
/// distance. This is the function the finite-difference oracles perturb.
pub fn energy_of_columns(k: &KernelSpec, columns: &[Vec<f64>]) -> f64 {
    let views: Vec<&[f64]> = columns.iter().map(|c| c.as_slice()).collect();
    energy_views(k, &views)
}

pub(crate) fn energy_views(k: &KernelSpec, cols: &[&[f64]]) -> f64 {
    let n = cols.len();
    let mut total = 0.0;
    match k.family {
        KernelFamily::ProjectiveRiesz | KernelFamily::FramePotential => {
            for i in 0..n {
                for j in (i + 1)..n {
                    let t = dot(cols[i], cols[j]).abs().min(1.0);
                    total += 2.0 * projective_kernel_at(k, t);
                }
            }
        }
        KernelFamily::Riesz => {
            for i in 0..n {
                for j in (i + 1)..n {
                    let r = sub_norm(cols[i], cols[j]);
                    total += 2.0 * riesz_kernel_at(k.s, r);
                }
            }
        }
    }
    total
}

fn sub_norm(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Derivative weight of the projective-family pair term with respect to the
/// raw inner product u, including the factor 2 from the ordered-pair sum.
/// The ambient gradient column is then sum over j != i of w(u_ij) x_j.
///
/// Closed forms (w = 1 - u^2):
/// - s > 0:            2 s u w^(-s/2 - 1)
/// - s = 0 (log):      4 u / w
/// - s < 0:            -2 s u w^(-s/2 - 1)   (equals 2|s| u w^(-s/2 - 1))
/// - frame potential:  4 u
///
/// The kernels depend on u only through u^2, so the weight carries a bare
/// factor of u and is smooth through u = 0; no sign function is needed.
fn projective_pair_weight(k: &KernelSpec, u: f64) -> f64 {
    match k.family {
        KernelFamily::FramePotential => 4.0 * u,
        KernelFamily::ProjectiveRiesz => {
            let w = 1.0 - u * u;
            if k.s == 0.0 {
                4.0 * u / w
            } else {
                2.0 * k.s.abs() * u * w.powf(-k.s / 2.0 - 1.0)
            }
        }
        KernelFamily::Riesz => unreachable!(),
    }
}

/// Radial weight c such that the Riesz pair term contributes c * (x_i - x_j)
/// to column i (and the negation to column j), factor 2 included:
/// -2|s| r^(-s-2) for s != 0 and -2/r^2 for the log kernel.
fn riesz_pair_weight(s: f64, r: f64) -> f64 {
    if s == 0.0 {
        -2.0 / (r * r)
    } else {
        -2.0 * s.abs() * r.powf(-s - 2.0)
    }
}

/// Ambient gradient dE/dx_i with each x_i treated as a free vector in R^d.
/// Returned as N columns of length d (column i pairs with vector i).
///
/// For the projective families this is, per column i,
/// sum over j != i of w(u_ij) x_j with w as in `projective_pair_weight`.
pub fn energy_gradient(k: &KernelSpec, x: &FrameConfig) -> Result<Vec<Vec<f64>>> {
    let views: Vec<&[f64]> = x.vectors().iter().map(|v| v.coords()).collect();
    ambient_gradient_views(k, &views)
}

pub(crate) fn ambient_gradient_views(k: &KernelSpec, cols: &[&[f64]]) -> Result<Vec<Vec<f64>>> {
    let n = cols.len();
    let d = if n == 0 { 0 } else { cols[0].len() };
    let mut grad = vec![vec![0.0; d]; n];
    let singular = k.singular_at_coincidence();
    match k.family {
        KernelFamily::ProjectiveRiesz | KernelFamily::FramePotential => {
            for i in 0..n {
                for j in (i + 1)..n {
                    let u = dot(cols[i], cols[j]).clamp(-1.0, 1.0);
                    if singular && u.abs() >= 1.0 - DEGENERATE_LINE_TOL {
                        return Err(Error::DegeneratePair { i, j });
                    }
                    let w = projective_pair_weight(k, u);
                    for a in 0..d {
                        grad[i][a] += w * cols[j][a];
                        grad[j][a] += w * cols[i][a];
                    }
                }
            }
        }
        KernelFamily::Riesz => {
            for i in 0..n {
                for j in (i + 1)..n {
                    let r = sub_norm(cols[i], cols[j]);
                    if singular && r <= DEGENERATE_LINE_TOL {
                        return Err(Error::DegeneratePair { i, j });
                    }
                    let c = riesz_pair_weight(k.s, r);
                    for a in 0..d {
                        let diff = cols[i][a] - cols[j][a];
                        grad[i][a] += c * diff;
                        grad[j][a] -= c * diff;
                    }
                }
            }
        }
    }
    Ok(grad)
}

/// Riemannian gradient: ambient gradient with each column projected onto
/// the tangent space of the sphere at its base point,
/// g_i - <g_i, x_i> x_i.
pub fn tangent_gradient(k: &KernelSpec, x: &FrameConfig) -> Result<Vec<Vec<f64>>> {
    let views: Vec<&[f64]> = x.vectors().iter().map(|v| v.coords()).collect();
    tangent_gradient_views(k, &views)
}

pub(crate) fn tangent_gradient_views(k: &KernelSpec, cols: &[&[f64]]) -> Result<Vec<Vec<f64>>> {
    let mut grad = ambient_gradient_views(k, cols)?;
    for (g, x) in grad.iter_mut().zip(cols) {
        project_tangent(g, x);
    }
    Ok(grad)
}

/// In-place projection of g onto the tangent space at unit vector x.
pub(crate) fn project_tangent(g: &mut [f64], x: &[f64]) {
    let radial = dot(g, x);
    for (gv, xv) in g.iter_mut().zip(x) {
        *gv -= radial * xv;
    }
}

/// Hyperspherical map: angles t_1..t_{d-1} to the unit vector
/// (cos t_1, sin t_1 cos t_2, ..., prod sin t_k).
pub fn spherical_to_cartesian(a: &SphericalCoords) -> FrameConfig {
    let d = a.d();
    let vectors = a
        .angles()
        .iter()
        .map(|row| UnitVector::new(angles_to_point(d, row)).expect("nonzero by construction"))
        .collect();
    FrameConfig::new(d, vectors).expect("valid shape")
}

fn angles_to_point(d: usize, t: &[f64]) -> Vec<f64> {
    let mut x = vec![0.0; d];
    let mut prefix = 1.0;
    for j in 0..d - 1 {
        x[j] = prefix * t[j].cos();
        prefix *= t[j].sin();
    }
    x[d - 1] = prefix;
    x
}

/// Inverse of the hyperspherical map. The leading d-2 angles come from
/// arccos against tail norms (range [0, pi]); the last from atan2, wrapped
/// to [0, 2pi). Zero tails map to angle 0.
pub fn cartesian_to_spherical(x: &FrameConfig) -> SphericalCoords {
    let d = x.d();
    let rows = x
        .vectors()
        .iter()
        .map(|v| point_to_angles(v.coords()))
        .collect();
    SphericalCoords::new(d, rows).expect("valid shape")
}

fn point_to_angles(c: &[f64]) -> Vec<f64> {
    let d = c.len();
    let mut t = vec![0.0; d - 1];
    for k in 0..d - 2 {
        let tail: f64 = c[k..].iter().map(|v| v * v).sum::<f64>().sqrt();
        t[k] = if tail > 0.0 {
            (c[k] / tail).clamp(-1.0, 1.0).acos()
        } else {
            0.0
        };
    }
    let last = f64::atan2(c[d - 1], c[d - 2]);
    t[d - 2] = if last < 0.0 {
        last + 2.0 * std::f64::consts::PI
    } else {
        last
    };
    t
}

/// Gradient of the energy in angle space: per point, the transpose of the
/// parametrization Jacobian applied to the ambient gradient column.
/// Returned as N rows of length d-1, matching [`SphericalCoords`].
pub fn spherical_chain_gradient(k: &KernelSpec, a: &SphericalCoords) -> Result<Vec<Vec<f64>>> {
    let x = spherical_to_cartesian(a);
    let ambient = energy_gradient(k, &x)?;
    Ok(chain_through_jacobian(a, &ambient))
}

pub(crate) fn chain_through_jacobian(
    a: &SphericalCoords,
    ambient: &[Vec<f64>],
) -> Vec<Vec<f64>> {
    a.angles()
        .iter()
        .zip(ambient)
        .map(|(t, g)| point_chain(t, g))
        .collect()
}

/// J^T g for one point, where J is the Jacobian of `angles_to_point`.
fn point_chain(t: &[f64], g: &[f64]) -> Vec<f64> {
    let da = t.len();
    let d = da + 1;
    let mut prefix = vec![1.0; da + 1];
    for k in 0..da {
        prefix[k + 1] = prefix[k] * t[k].sin();
    }
    let mut out = vec![0.0; da];
    for a in 0..da {
        // Coordinate a carries prefix_a * cos t_a; its t_a derivative.
        let mut acc = -prefix[a] * t[a].sin() * g[a];
        // Later coordinates carry sin t_a; the derivative swaps it for cos.
        let mut run = prefix[a] * t[a].cos();
        for j in (a + 1)..(d - 1) {
            acc += run * t[j].cos() * g[j];
            run *= t[j].sin();
        }
        acc += run * g[d - 1];
        out[a] = acc;
    }
    out
}

/// Frobenius norm of a column/row collection.
pub fn grad_norm(grad: &[Vec<f64>]) -> f64 {
    grad.iter()
        .flat_map(|c| c.iter())
        .map(|v| v * v)
        .sum::<f64>()
        .sqrt()
}
