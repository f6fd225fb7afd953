//! Output records and their CSV/JSON encodings.

use framepack::energy::EnergyReport;
use framepack::frame::FrameConfig;
use framepack::metrics::MetricsReport;
use serde::Serialize;

/// One experiment cell. The `s` column is the kernel tag: a decimal
/// exponent for the projective Riesz kernel or "fp" for the frame
/// potential. `wall_time_ms` is the only field exempt from run-to-run
/// determinism.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRecord {
    pub d: usize,
    pub n: usize,
    pub s: String,
    pub best_energy: f64,
    pub coherence: f64,
    pub tightness_residual: f64,
    pub welch: f64,
    pub levenstein: Option<f64>,
    pub sep_bound: Option<f64>,
    pub restarts_used: usize,
    pub seed: u64,
    pub converged: bool,
    pub wall_time_ms: f64,
}

pub const SWEEP_HEADER: &str = "d,n,s,best_energy,coherence,tightness_residual,welch,levenstein,sep_bound,restarts_used,seed,converged,wall_time_ms";

impl SweepRecord {
    /// Float columns use `{:e}`, which round-trips f64 exactly.
    pub fn to_csv_row(&self) -> String {
        let opt = |v: &Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
        format!(
            "{},{},{},{:e},{:e},{:e},{:e},{},{},{},{},{},{:e}",
            self.d,
            self.n,
            self.s,
            self.best_energy,
            self.coherence,
            self.tightness_residual,
            self.welch,
            opt(&self.levenstein),
            opt(&self.sep_bound),
            self.restarts_used,
            self.seed,
            self.converged,
            self.wall_time_ms
        )
    }
}

/// Run summary shared by `optimize` and each `pipeline` stage.
#[derive(Debug, Clone, Serialize)]
pub struct StageOutput {
    pub kernel: String,
    pub energy: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    pub wall_time_ms: f64,
    pub metrics: MetricsReport,
}

impl StageOutput {
    pub fn new(kernel: String, report: &EnergyReport, metrics: MetricsReport) -> Self {
        Self {
            kernel,
            energy: report.energy,
            grad_norm: report.grad_norm,
            iterations: report.iterations,
            converged: report.converged,
            wall_time_ms: report.wall_time_ms,
            metrics,
        }
    }
}

/// Coordinates in vector-major order for JSON payloads.
pub fn coordinate_rows(x: &FrameConfig) -> Vec<Vec<f64>> {
    x.vectors().iter().map(|v| v.coords().to_vec()).collect()
}
