//! Deterministic, seedable first-order minimization of frame energies:
//! projected gradient descent with Armijo backtracking, multistart over
//! independent random initializations, and the three-step pipeline that
//! polishes a well-separated minimizer into an exactly tight frame.

use std::time::Instant;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::energy::{
    cartesian_to_spherical, chain_through_jacobian, energy_views, grad_norm,
    spherical_to_cartesian, tangent_gradient_views, EnergyReport, SphericalCoords,
};
use crate::error::{Error, Result};
use crate::frame::{FrameConfig, UnitVector};
use crate::kernels::KernelSpec;

/// Line-search attempts before a run gives up and reports non-convergence.
const MAX_BACKTRACKS: usize = 60;

/// How descent steps stay on the sphere.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parametrization {
    /// Step along the tangent-projected gradient, then renormalize each
    /// column (project-then-retract). The default: no pole degeneracy.
    Tangent,
    /// Unconstrained descent on hyperspherical angles. Degenerate at the
    /// poles (sin = 0); random initialization avoids them generically.
    Spherical,
}

/// Knobs for a single minimization run and for multistart.
#[derive(Debug, Clone, Copy)]
pub struct OptimizerSettings {
    pub grad_tol: f64,
    pub max_iters: usize,
    pub restarts: usize,
    pub seed: u64,
    pub parametrization: Parametrization,
    pub step_init: f64,
    pub backtrack_factor: f64,
    pub armijo_c: f64,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        Self {
            grad_tol: 1e-8,
            max_iters: 10_000,
            restarts: 20,
            seed: 0,
            parametrization: Parametrization::Tangent,
            step_init: 1.0,
            backtrack_factor: 0.5,
            armijo_c: 1e-4,
        }
    }
}

impl OptimizerSettings {
    fn validate(&self) -> Result<()> {
        if !(self.grad_tol > 0.0) {
            return Err(Error::InvalidSettings("grad_tol must be positive".into()));
        }
        if self.max_iters < 1 {
            return Err(Error::InvalidSettings("max_iters must be at least 1".into()));
        }
        if self.restarts < 1 {
            return Err(Error::InvalidSettings("restarts must be at least 1".into()));
        }
        if !(self.step_init > 0.0) {
            return Err(Error::InvalidSettings("step_init must be positive".into()));
        }
        if !(self.backtrack_factor > 0.0 && self.backtrack_factor < 1.0) {
            return Err(Error::InvalidSettings(
                "backtrack_factor must lie in (0, 1)".into(),
            ));
        }
        if !(self.armijo_c > 0.0 && self.armijo_c < 1.0) {
            return Err(Error::InvalidSettings("armijo_c must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

/// One finished run: the configuration (columns renormalized), its report,
/// the restart that produced it, and the kernel it minimized.
///
/// Every numeric field is bit-reproducible for identical inputs and seeds;
/// `report.wall_time_ms` is the one exception.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub config: FrameConfig,
    pub report: EnergyReport,
    pub restart_index: usize,
    pub kernel: KernelSpec,
}

/// Both stages of the separated-then-tight pipeline.
#[derive(Debug, Clone)]
pub struct PipelineResult {
    /// Best projective Riesz minimizer found in stage 2.
    pub separated: RunResult,
    /// Stage-3 frame-potential polish of that minimizer; the pipeline output.
    pub tightened: RunResult,
}

/// Per-restart (and per-trial) seed derivation: the SplitMix64 finalizer
/// applied to `master + (index + 1) * golden`. Fixed for reproducibility;
/// changing it would silently change every seeded experiment.
pub fn split_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// N columns drawn i.i.d. uniform on S^(d-1) (normalized isotropic
/// Gaussians), deterministic given the seed.
pub fn random_uniform_frame(d: usize, n: usize, seed: u64) -> Result<FrameConfig> {
    if d < 2 {
        return Err(Error::DimensionTooSmall(d));
    }
    if n < 1 {
        return Err(Error::TooFewVectors { needed: 1, got: n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut vectors = Vec::with_capacity(n);
    while vectors.len() < n {
        let c: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let norm: f64 = c.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm < 1e-12 {
            continue; // resample the (measure-zero) degenerate draw
        }
        vectors.push(UnitVector::new(c).expect("nonzero"));
    }
    FrameConfig::new(d, vectors)
}

/// Gradient descent with Armijo backtracking from the given configuration.
///
/// Terminates when the tangent (or angle-space) gradient norm reaches
/// `grad_tol`, the iteration cap is hit, or the line search fails after 60
/// backtracks (returning the best iterate with `converged = false`).
/// Accepted steps are monotone non-increasing in energy by construction,
/// and this is asserted.
pub fn minimize(k: &KernelSpec, x0: &FrameConfig, settings: &OptimizerSettings) -> Result<RunResult> {
    settings.validate()?;
    let start = Instant::now();
    let (config, energy, gnorm, iterations, converged) = match settings.parametrization {
        Parametrization::Tangent => minimize_tangent(k, x0, settings)?,
        Parametrization::Spherical => minimize_spherical(k, x0, settings)?,
    };
    Ok(RunResult {
        config,
        report: EnergyReport {
            energy,
            grad_norm: gnorm,
            iterations,
            converged,
            wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
        },
        restart_index: 0,
        kernel: *k,
    })
}

type RawOutcome = (FrameConfig, f64, f64, usize, bool);

fn minimize_tangent(
    k: &KernelSpec,
    x0: &FrameConfig,
    settings: &OptimizerSettings,
) -> Result<RawOutcome> {
    let d = x0.d();
    let mut cols: Vec<Vec<f64>> = x0.vectors().iter().map(|v| v.coords().to_vec()).collect();
    let mut e = energy_cols(k, &cols);
    if !e.is_finite() {
        return Err(Error::NonFiniteEnergy);
    }

    let mut step = settings.step_init;
    let mut iterations = 0;
    let mut converged = false;
    let mut gnorm = 0.0;
    let mut stalled = false;

    for _ in 0..settings.max_iters {
        let grad = {
            let views: Vec<&[f64]> = cols.iter().map(|c| c.as_slice()).collect();
            tangent_gradient_views(k, &views)?
        };
        gnorm = grad_norm(&grad);
        if gnorm <= settings.grad_tol {
            converged = true;
            break;
        }

        // Warm-started Armijo backtracking; the descent direction is the
        // negative tangent gradient, so the predicted slope is -gnorm^2.
        // Once the sufficient-decrease margin drops below what f64 can
        // resolve on e, strict decrease is accepted instead.
        let mut alpha = (step / settings.backtrack_factor).min(settings.step_init);
        let mut accepted = false;
        for _ in 0..MAX_BACKTRACKS {
            let cand = retract(&cols, &grad, alpha);
            let e_new = energy_cols(k, &cand);
            let margin = settings.armijo_c * alpha * gnorm * gnorm;
            if e_new <= e - margin || (margin < e.abs() * 1e-15 && e_new < e) {
                assert!(e_new <= e, "accepted step increased energy");
                cols = cand;
                e = e_new;
                step = alpha;
                accepted = true;
                break;
            }
            alpha *= settings.backtrack_factor;
        }
        if !accepted {
            stalled = true;
            break;
        }
        iterations += 1;
    }

    if !converged && !stalled {
        // Iteration cap: report the gradient norm at the returned iterate.
        let views: Vec<&[f64]> = cols.iter().map(|c| c.as_slice()).collect();
        gnorm = grad_norm(&tangent_gradient_views(k, &views)?);
        converged = gnorm <= settings.grad_tol;
    }

    let config = FrameConfig::from_columns(d, cols)?;
    Ok((config, e, gnorm, iterations, converged))
}

fn minimize_spherical(
    k: &KernelSpec,
    x0: &FrameConfig,
    settings: &OptimizerSettings,
) -> Result<RawOutcome> {
    let mut angles = cartesian_to_spherical(x0);
    let mut e = energy_of_angles(k, &angles);
    if !e.is_finite() {
        return Err(Error::NonFiniteEnergy);
    }

    let mut step = settings.step_init;
    let mut iterations = 0;
    let mut converged = false;
    let mut gnorm = 0.0;
    let mut stalled = false;

    for _ in 0..settings.max_iters {
        let grad = angle_gradient(k, &angles)?;
        gnorm = grad_norm(&grad);
        if gnorm <= settings.grad_tol {
            converged = true;
            break;
        }

        let mut alpha = (step / settings.backtrack_factor).min(settings.step_init);
        let mut accepted = false;
        for _ in 0..MAX_BACKTRACKS {
            let cand = angle_step(&angles, &grad, alpha);
            let e_new = energy_of_angles(k, &cand);
            let margin = settings.armijo_c * alpha * gnorm * gnorm;
            if e_new <= e - margin || (margin < e.abs() * 1e-15 && e_new < e) {
                assert!(e_new <= e, "accepted step increased energy");
                angles = cand;
                e = e_new;
                step = alpha;
                accepted = true;
                break;
            }
            alpha *= settings.backtrack_factor;
        }
        if !accepted {
            stalled = true;
            break;
        }
        iterations += 1;
    }

    if !converged && !stalled {
        gnorm = grad_norm(&angle_gradient(k, &angles)?);
        converged = gnorm <= settings.grad_tol;
    }

    let config = spherical_to_cartesian(&angles);
    Ok((config, e, gnorm, iterations, converged))
}

fn energy_cols(k: &KernelSpec, cols: &[Vec<f64>]) -> f64 {
    let views: Vec<&[f64]> = cols.iter().map(|c| c.as_slice()).collect();
    energy_views(k, &views)
}

/// Step along the negative tangent direction and renormalize each column.
/// The tangent column is orthogonal to its base point, so the stepped
/// column has norm >= 1 and renormalization never divides by zero.
fn retract(cols: &[Vec<f64>], grad: &[Vec<f64>], alpha: f64) -> Vec<Vec<f64>> {
    cols.iter()
        .zip(grad)
        .map(|(x, g)| {
            let stepped: Vec<f64> = x.iter().zip(g).map(|(xv, gv)| xv - alpha * gv).collect();
            let norm: f64 = stepped.iter().map(|v| v * v).sum::<f64>().sqrt();
            stepped.into_iter().map(|v| v / norm).collect()
        })
        .collect()
}

fn energy_of_angles(k: &KernelSpec, a: &SphericalCoords) -> f64 {
    crate::energy::energy(k, &spherical_to_cartesian(a))
}

fn angle_gradient(k: &KernelSpec, a: &SphericalCoords) -> Result<Vec<Vec<f64>>> {
    let x = spherical_to_cartesian(a);
    let views: Vec<&[f64]> = x.vectors().iter().map(|v| v.coords()).collect();
    let ambient = crate::energy::ambient_gradient_views(k, &views)?;
    Ok(chain_through_jacobian(a, &ambient))
}

fn angle_step(a: &SphericalCoords, grad: &[Vec<f64>], alpha: f64) -> SphericalCoords {
    let mut out = a.clone();
    for (row, g) in out.angles_mut().iter_mut().zip(grad) {
        for (t, gv) in row.iter_mut().zip(g) {
            *t -= alpha * gv;
        }
    }
    out
}

/// Run `minimize` from `restarts` independent uniform-random frames whose
/// seeds derive from the master seed via [`split_seed`], and keep the
/// lowest-energy result (ties broken by lower restart index). Restarts run
/// in parallel but are reduced in restart order, so the winner is
/// independent of scheduling.
pub fn multistart(
    k: &KernelSpec,
    d: usize,
    n: usize,
    settings: &OptimizerSettings,
) -> Result<RunResult> {
    settings.validate()?;
    if d < 2 {
        return Err(Error::DimensionTooSmall(d));
    }
    if n < 2 {
        return Err(Error::TooFewVectors { needed: 2, got: n });
    }

    let outcomes: Vec<Result<RunResult>> = (0..settings.restarts)
        .into_par_iter()
        .map(|r| {
            let x0 = random_uniform_frame(d, n, split_seed(settings.seed, r as u64))?;
            let mut run = minimize(k, &x0, settings)?;
            run.restart_index = r;
            Ok(run)
        })
        .collect();

    let mut best: Option<RunResult> = None;
    let mut failures = 0;
    let mut last_err = None;
    for outcome in outcomes {
        match outcome {
            Ok(run) => {
                let better = match &best {
                    None => true,
                    Some(b) => run.report.energy < b.report.energy,
                };
                if better {
                    best = Some(run);
                }
            }
            Err(e) => {
                failures += 1;
                last_err = Some(e);
            }
        }
    }
    match best {
        Some(run) => Ok(run),
        None => Err(last_err.unwrap_or(Error::AllRestartsFailed(failures))),
    }
}

/// True when the stage-2 exponent is at or below the d-1 threshold that the
/// separation guarantee needs. Smaller exponents still run (and are useful
/// in practice); callers may want to warn.
pub fn below_recommended_separation_exponent(d: usize, s_sep: f64) -> bool {
    s_sep <= (d - 1) as f64
}

/// Three-step construction of a well-separated tight frame:
/// 1. draw random frames,
/// 2. multistart-minimize the projective Riesz `s_sep`-energy (separation),
/// 3. minimize the frame potential from the stage-2 minimizer unperturbed
///    (every frame-potential local minimizer is tight, and a tight frame
///    lies near the nearly tight stage-2 output).
pub fn pipeline_tight_separated(
    d: usize,
    n: usize,
    s_sep: f64,
    settings: &OptimizerSettings,
) -> Result<PipelineResult> {
    let separated = multistart(&KernelSpec::projective_riesz(s_sep), d, n, settings)?;
    let mut tightened = minimize(&KernelSpec::frame_potential(), &separated.config, settings)?;
    tightened.restart_index = separated.restart_index;
    Ok(PipelineResult {
        separated,
        tightened,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::energy;
    use crate::metrics::{coherence, tightness_residual};
    use crate::reference::{half_circle_config, simplex_etf};

    fn settings(seed: u64, restarts: usize) -> OptimizerSettings {
        OptimizerSettings {
            seed,
            restarts,
            ..OptimizerSettings::default()
        }
    }

    #[test]
    fn settings_validation() {
        let bad = OptimizerSettings {
            grad_tol: 0.0,
            ..OptimizerSettings::default()
        };
        assert!(minimize(
            &KernelSpec::frame_potential(),
            &simplex_etf(3).unwrap(),
            &bad
        )
        .is_err());
    }

    #[test]
    fn simplex_is_already_optimal() {
        let x0 = simplex_etf(3).unwrap();
        let run = minimize(
            &KernelSpec::projective_riesz(2.0),
            &x0,
            &OptimizerSettings::default(),
        )
        .unwrap();
        assert!(run.report.converged);
        assert!(run.report.iterations <= 2);
        assert!((coherence(&run.config).unwrap() - 1.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_infinite_initial_energy() {
        let v = vec![1.0, 0.0];
        let x0 = FrameConfig::from_columns(2, vec![v.clone(), v]).unwrap();
        let err = minimize(
            &KernelSpec::projective_riesz(2.0),
            &x0,
            &OptimizerSettings::default(),
        );
        assert!(matches!(err, Err(Error::NonFiniteEnergy)));
    }

    #[test]
    fn descent_reduces_energy_and_keeps_feasibility() {
        let k = KernelSpec::projective_riesz(2.0);
        let x0 = random_uniform_frame(3, 6, 17).unwrap();
        let e0 = energy(&k, &x0);
        let run = minimize(&k, &x0, &OptimizerSettings::default()).unwrap();
        assert!(run.report.energy <= e0);
        assert!(run.config.max_norm_deviation() < 1e-12);
        if run.report.converged {
            assert!(run.report.grad_norm <= 1e-8);
        }
    }

    #[test]
    fn multistart_is_deterministic() {
        let k = KernelSpec::projective_riesz(2.0);
        let a = multistart(&k, 3, 4, &settings(42, 3)).unwrap();
        let b = multistart(&k, 3, 4, &settings(42, 3)).unwrap();
        assert_eq!(a.report.energy.to_bits(), b.report.energy.to_bits());
        assert_eq!(a.restart_index, b.restart_index);
        let fa = a.config.flattened();
        let fb = b.config.flattened();
        assert!(fa.iter().zip(&fb).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn multistart_matches_half_circle_oracle() {
        let k = KernelSpec::projective_riesz(2.0);
        let run = multistart(&k, 2, 5, &settings(7, 20)).unwrap();
        let oracle = energy(&k, &half_circle_config(5).unwrap());
        let rel = (run.report.energy - oracle).abs() / oracle;
        assert!(rel < 1e-6, "rel {rel}");
    }

    #[test]
    fn multistart_frame_potential_reaches_tightness() {
        let run = multistart(&KernelSpec::frame_potential(), 3, 3, &settings(5, 8)).unwrap();
        assert!(tightness_residual(&run.config) < 1e-5);
    }

    #[test]
    fn half_circle_coherence_for_d2_n4_s1() {
        let run = multistart(&KernelSpec::projective_riesz(1.0), 2, 4, &settings(11, 20)).unwrap();
        let expect = (std::f64::consts::PI / 4.0).cos();
        assert!((coherence(&run.config).unwrap() - expect).abs() < 1e-6);
    }

    #[test]
    fn spherical_mode_reaches_the_same_minimum() {
        let k = KernelSpec::projective_riesz(2.0);
        let tangent = multistart(&k, 2, 5, &settings(3, 10)).unwrap();
        let spherical = multistart(
            &k,
            2,
            5,
            &OptimizerSettings {
                parametrization: Parametrization::Spherical,
                ..settings(3, 10)
            },
        )
        .unwrap();
        let rel = (tangent.report.energy - spherical.report.energy).abs() / tangent.report.energy;
        assert!(rel < 1e-6, "rel {rel}");
    }

    #[test]
    fn pipeline_recovers_simplex() {
        let result = pipeline_tight_separated(3, 4, 3.0, &settings(23, 8)).unwrap();
        let x = &result.tightened.config;
        assert!((coherence(x).unwrap() - 1.0 / 3.0).abs() < 1e-4);
        assert!(tightness_residual(x) < 1e-6);
    }

    #[test]
    fn random_frame_determinism_and_shape() {
        let a = random_uniform_frame(3, 5, 9).unwrap();
        let b = random_uniform_frame(3, 5, 9).unwrap();
        let c = random_uniform_frame(3, 5, 10).unwrap();
        assert_eq!(a.flattened(), b.flattened());
        assert_ne!(a.flattened(), c.flattened());
        assert!(a.max_norm_deviation() < 1e-12);
    }

    #[test]
    fn random_pair_mean_abs_inner_is_half_in_d3() {
        // |<x1,x2>| of two uniform points on S^2 is uniform on [0,1].
        let trials = 100_000;
        let mut sum = 0.0;
        for t in 0..trials {
            let f = random_uniform_frame(3, 2, split_seed(1234, t)).unwrap();
            sum += crate::kernels::abs_inner(f.column(0), f.column(1)).unwrap();
        }
        let mean = sum / trials as f64;
        assert!((mean - 0.5).abs() < 5e-3, "mean {mean}");
    }

    #[test]
    fn warning_threshold_for_separation_exponent() {
        assert!(below_recommended_separation_exponent(3, 2.0));
        assert!(below_recommended_separation_exponent(3, 0.5));
        assert!(!below_recommended_separation_exponent(3, 2.5));
    }
}
