//! Command-line surface: optimization, experiment sweeps, the
//! separated-then-tight pipeline, gradient checks, reference
//! configurations, metrics, and packing-file comparison.
//!
//! Exit codes: 0 success (a non-converged optimization is still 0, reported
//! in the payload), 1 gradient-check failure, 2 usage or input error.

mod records;
mod sweep;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use framepack::energy::{
    cartesian_to_spherical, energy_gradient, energy_of_columns, spherical_chain_gradient,
};
use framepack::ingest::{compare_to_reference, load_packing, packing_text, save_packing};
use framepack::kernels::{gram_abs, KernelFamily, KernelSpec};
use framepack::metrics::metrics_report;
use framepack::optimizer::{
    below_recommended_separation_exponent, multistart, pipeline_tight_separated,
    random_uniform_frame, split_seed, OptimizerSettings, Parametrization, RunResult,
};
use framepack::reference::{half_circle_config, icosahedron_etf6, orthonormal_basis, simplex_etf};
use framepack::FrameConfig;

use records::{coordinate_rows, StageOutput, SweepRecord};

#[derive(Parser)]
#[command(
    name = "framepack",
    version,
    about = "Well-separated tight frames by projective Riesz energy minimization"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Multistart-minimize a kernel energy and report metrics.
    Optimize(OptimizeArgs),
    /// Run a (d, N, s) experiment grid and emit one record per cell.
    Sweep(SweepArgs),
    /// Separation stage (projective Riesz) followed by a frame-potential
    /// polish to an exactly tight frame.
    Pipeline(PipelineArgs),
    /// Compare analytic gradients against central finite differences.
    Gradcheck(GradcheckArgs),
    /// Emit a closed-form reference configuration.
    Reference(ReferenceArgs),
    /// Measure a configuration file.
    Metrics(MetricsArgs),
    /// Compare two configuration files of the same shape.
    Compare(CompareArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ParamChoice {
    Tangent,
    Spherical,
}

impl From<ParamChoice> for Parametrization {
    fn from(p: ParamChoice) -> Self {
        match p {
            ParamChoice::Tangent => Parametrization::Tangent,
            ParamChoice::Spherical => Parametrization::Spherical,
        }
    }
}

#[derive(clap::Args)]
struct OptimizeArgs {
    #[arg(long)]
    d: usize,
    #[arg(long)]
    n: usize,
    /// Projective Riesz exponent (any sign; 0 selects the log kernel).
    #[arg(long, allow_negative_numbers = true)]
    s: Option<f64>,
    /// Minimize the frame potential instead of a projective Riesz energy.
    #[arg(long)]
    frame_potential: bool,
    #[arg(long, default_value_t = 20)]
    restarts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, default_value_t = 10_000)]
    max_iters: usize,
    #[arg(long, value_enum, default_value_t = ParamChoice::Tangent)]
    param: ParamChoice,
    /// Write the configuration to this path in the packing file format.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(clap::Args)]
pub(crate) struct SweepArgs {
    #[arg(long)]
    pub d: usize,
    /// Inclusive N range, formatted A:B.
    #[arg(long)]
    pub n_range: String,
    /// Comma list of kernel tags: decimal exponents and/or "fp".
    #[arg(long, allow_hyphen_values = true)]
    pub s_list: String,
    #[arg(long, default_value_t = 20)]
    pub restarts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long, default_value_t = 10_000)]
    pub max_iters: usize,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Reuse rows already present in --out instead of recomputing them.
    #[arg(long)]
    pub skip_existing: bool,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(clap::Args)]
struct PipelineArgs {
    #[arg(long)]
    d: usize,
    #[arg(long)]
    n: usize,
    /// Separation-stage exponent; values above d-1 carry the separation
    /// guarantee, smaller ones still run (with a warning).
    #[arg(long, allow_negative_numbers = true)]
    s_sep: f64,
    #[arg(long, default_value_t = 20)]
    restarts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, default_value_t = 10_000)]
    max_iters: usize,
    /// Write the stage-3 configuration to this path.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(clap::Args)]
struct GradcheckArgs {
    #[arg(long, default_value_t = 3)]
    d: usize,
    #[arg(long, default_value_t = 5)]
    n: usize,
    #[arg(long, allow_negative_numbers = true)]
    s: Option<f64>,
    #[arg(long)]
    frame_potential: bool,
    #[arg(long, default_value_t = 5)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReferenceKind {
    HalfCircle,
    Simplex,
    Onb,
    Icosa6,
}

#[derive(clap::Args)]
struct ReferenceArgs {
    #[arg(long, value_enum)]
    kind: ReferenceKind,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(clap::Args)]
struct MetricsArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    d: usize,
    #[arg(long)]
    n: usize,
    /// Kernel exponent the configuration was optimized with; enables the
    /// separation-bound column.
    #[arg(long, allow_negative_numbers = true)]
    s: Option<f64>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(clap::Args)]
struct CompareArgs {
    #[arg(long)]
    in_a: PathBuf,
    #[arg(long)]
    in_b: PathBuf,
    #[arg(long)]
    d: usize,
    #[arg(long)]
    n: usize,
    /// Tolerance for the |Gram|-multiset equivalence check.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("THREADS") {
        match threads.parse::<usize>() {
            Ok(t) if t >= 1 => {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(t)
                    .build_global()
                    .ok();
            }
            _ => {
                eprintln!("error: THREADS must be a positive integer, got '{threads}'");
                return ExitCode::from(2);
            }
        }
    }
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Optimize(args) => cmd_optimize(args),
        Command::Sweep(args) => sweep::cmd_sweep(args),
        Command::Pipeline(args) => cmd_pipeline(args),
        Command::Gradcheck(args) => cmd_gradcheck(args),
        Command::Reference(args) => cmd_reference(args),
        Command::Metrics(args) => cmd_metrics(args),
        Command::Compare(args) => cmd_compare(args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

pub(crate) type CmdResult = Result<u8, String>;

fn pick_kernel(s: Option<f64>, frame_potential: bool) -> Result<(KernelSpec, String), String> {
    match (s, frame_potential) {
        (Some(s), false) => Ok((KernelSpec::projective_riesz(s), s.to_string())),
        (None, true) => Ok((KernelSpec::frame_potential(), "fp".to_string())),
        (None, false) => Err("one of --s or --frame-potential is required".into()),
        (Some(_), true) => Err("--s and --frame-potential are mutually exclusive".into()),
    }
}

fn kernel_label(k: &KernelSpec) -> String {
    match k.family {
        KernelFamily::ProjectiveRiesz => format!("projective-riesz(s={})", k.s),
        KernelFamily::Riesz => format!("riesz(s={})", k.s),
        KernelFamily::FramePotential => "frame-potential".to_string(),
    }
}

pub(crate) fn settings(
    seed: u64,
    restarts: usize,
    tol: f64,
    max_iters: usize,
    param: Parametrization,
) -> OptimizerSettings {
    OptimizerSettings {
        seed,
        restarts,
        grad_tol: tol,
        max_iters,
        parametrization: param,
        ..OptimizerSettings::default()
    }
}

fn print_json<T: Serialize>(value: &T) -> Result<(), String> {
    let text = serde_json::to_string_pretty(value).map_err(|e| e.to_string())?;
    println!("{text}");
    Ok(())
}

pub(crate) fn run_record(
    run: &RunResult,
    d: usize,
    n: usize,
    s_tag: &str,
    s_value: Option<f64>,
    restarts: usize,
    seed: u64,
) -> Result<SweepRecord, String> {
    let report = metrics_report(&run.config, s_value).map_err(|e| e.to_string())?;
    Ok(SweepRecord {
        d,
        n,
        s: s_tag.to_string(),
        best_energy: run.report.energy,
        coherence: report.coherence,
        tightness_residual: report.tightness_residual,
        welch: report.welch,
        levenstein: report.levenstein,
        sep_bound: report.sep_bound_rhs,
        restarts_used: restarts,
        seed,
        converged: run.report.converged,
        wall_time_ms: run.report.wall_time_ms,
    })
}

fn cmd_optimize(args: OptimizeArgs) -> CmdResult {
    let (kernel, s_tag) = pick_kernel(args.s, args.frame_potential)?;
    let opts = settings(
        args.seed,
        args.restarts,
        args.tol,
        args.max_iters,
        args.param.into(),
    );
    let run = multistart(&kernel, args.d, args.n, &opts).map_err(|e| e.to_string())?;
    let s_value = match kernel.family {
        KernelFamily::ProjectiveRiesz => Some(kernel.s),
        _ => None,
    };
    if let Some(path) = &args.out {
        save_packing(path, &run.config).map_err(|e| e.to_string())?;
    }
    match args.format {
        Format::Json => {
            let metrics = metrics_report(&run.config, s_value).map_err(|e| e.to_string())?;
            let payload = json!({
                "d": args.d,
                "n": args.n,
                "s": s_tag,
                "kernel": kernel_label(&kernel),
                "seed": args.seed,
                "restarts": args.restarts,
                "parametrization": match args.param {
                    ParamChoice::Tangent => "tangent",
                    ParamChoice::Spherical => "spherical",
                },
                "energy": run.report.energy,
                "grad_norm": run.report.grad_norm,
                "iterations": run.report.iterations,
                "converged": run.report.converged,
                "restart_index": run.restart_index,
                "wall_time_ms": run.report.wall_time_ms,
                "metrics": metrics,
                "coordinates": coordinate_rows(&run.config),
            });
            print_json(&payload)?;
        }
        Format::Csv => {
            let record = run_record(
                &run, args.d, args.n, &s_tag, s_value, args.restarts, args.seed,
            )?;
            println!("{}", records::SWEEP_HEADER);
            println!("{}", record.to_csv_row());
        }
        Format::Text => return Err("optimize supports --format json or csv".into()),
    }
    Ok(0)
}

fn cmd_pipeline(args: PipelineArgs) -> CmdResult {
    if args.format != Format::Json {
        return Err("pipeline supports --format json".into());
    }
    let warning = below_recommended_separation_exponent(args.d, args.s_sep).then(|| {
        format!(
            "s-sep {} is at or below d-1 = {}; the separation guarantee needs s > d-1",
            args.s_sep,
            args.d - 1
        )
    });
    if let Some(w) = &warning {
        eprintln!("warning: {w}");
    }
    let opts = settings(
        args.seed,
        args.restarts,
        args.tol,
        args.max_iters,
        Parametrization::Tangent,
    );
    let result =
        pipeline_tight_separated(args.d, args.n, args.s_sep, &opts).map_err(|e| e.to_string())?;
    let stage2 = StageOutput::new(
        kernel_label(&result.separated.kernel),
        &result.separated.report,
        metrics_report(&result.separated.config, Some(args.s_sep)).map_err(|e| e.to_string())?,
    );
    let stage3 = StageOutput::new(
        kernel_label(&result.tightened.kernel),
        &result.tightened.report,
        metrics_report(&result.tightened.config, None).map_err(|e| e.to_string())?,
    );
    if let Some(path) = &args.out {
        save_packing(path, &result.tightened.config).map_err(|e| e.to_string())?;
    }
    let payload = json!({
        "d": args.d,
        "n": args.n,
        "s_sep": args.s_sep,
        "seed": args.seed,
        "restarts": args.restarts,
        "warning": warning,
        "stage2": stage2,
        "stage3": stage3,
        "coordinates": coordinate_rows(&result.tightened.config),
    });
    print_json(&payload)?;
    Ok(0)
}

/// Gradient-check threshold; the analytic and central-difference gradients
/// agree to ~1e-9 in practice, so exceeding 1e-4 means a broken derivative.
const GRADCHECK_THRESHOLD: f64 = 1e-4;

fn cmd_gradcheck(args: GradcheckArgs) -> CmdResult {
    if args.format != Format::Json {
        return Err("gradcheck supports --format json".into());
    }
    let (kernel, s_tag) = match (args.s, args.frame_potential) {
        (None, false) => (KernelSpec::projective_riesz(2.0), "2".to_string()),
        other => pick_kernel(other.0, other.1)?,
    };
    if args.trials == 0 {
        return Err("--trials must be at least 1".into());
    }
    let step = 1e-6;
    let mut worst_ambient = 0.0_f64;
    let mut worst_spherical = 0.0_f64;
    for trial in 0..args.trials {
        let x = separated_random_frame(args.d, args.n, split_seed(args.seed, trial as u64))?;
        let cols: Vec<Vec<f64>> = x.vectors().iter().map(|v| v.coords().to_vec()).collect();

        let analytic = energy_gradient(&kernel, &x).map_err(|e| e.to_string())?;
        let mut fd = vec![vec![0.0; args.d]; args.n];
        let mut work = cols.clone();
        for i in 0..args.n {
            for a in 0..args.d {
                work[i][a] = cols[i][a] + step;
                let plus = energy_of_columns(&kernel, &work);
                work[i][a] = cols[i][a] - step;
                let minus = energy_of_columns(&kernel, &work);
                work[i][a] = cols[i][a];
                fd[i][a] = (plus - minus) / (2.0 * step);
            }
        }
        worst_ambient = worst_ambient.max(rel_err(&analytic, &fd));

        let angles = cartesian_to_spherical(&x);
        let chain = spherical_chain_gradient(&kernel, &angles).map_err(|e| e.to_string())?;
        let mut fd_angles = vec![vec![0.0; args.d - 1]; args.n];
        let mut work = angles.clone();
        for i in 0..args.n {
            for j in 0..args.d - 1 {
                let orig = angles.angles()[i][j];
                work.angles_mut()[i][j] = orig + step;
                let plus = framepack::energy::energy(
                    &kernel,
                    &framepack::energy::spherical_to_cartesian(&work),
                );
                work.angles_mut()[i][j] = orig - step;
                let minus = framepack::energy::energy(
                    &kernel,
                    &framepack::energy::spherical_to_cartesian(&work),
                );
                work.angles_mut()[i][j] = orig;
                fd_angles[i][j] = (plus - minus) / (2.0 * step);
            }
        }
        worst_spherical = worst_spherical.max(rel_err(&chain, &fd_angles));
    }
    let worst = worst_ambient.max(worst_spherical);
    let pass = worst <= GRADCHECK_THRESHOLD;
    let payload = json!({
        "d": args.d,
        "n": args.n,
        "s": s_tag,
        "kernel": kernel_label(&kernel),
        "trials": args.trials,
        "seed": args.seed,
        "step": step,
        "max_rel_error_ambient": worst_ambient,
        "max_rel_error_spherical": worst_spherical,
        "threshold": GRADCHECK_THRESHOLD,
        "pass": pass,
    });
    print_json(&payload)?;
    Ok(if pass { 0 } else { 1 })
}

/// Random frame in generic position (no |inner| above 0.9): a fixed-step
/// difference quotient is meaningless next to a kernel singularity.
fn separated_random_frame(d: usize, n: usize, seed: u64) -> Result<FrameConfig, String> {
    for attempt in 0..1000 {
        let x = random_uniform_frame(d, n, split_seed(seed, attempt)).map_err(|e| e.to_string())?;
        let g = gram_abs(&x);
        let mut max_off = 0.0_f64;
        for i in 0..n {
            for j in (i + 1)..n {
                max_off = max_off.max(g[i][j]);
            }
        }
        if max_off < 0.9 {
            return Ok(x);
        }
    }
    Err(format!(
        "could not draw a well-separated random frame for d={d}, n={n}"
    ))
}

fn rel_err(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
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

fn cmd_reference(args: ReferenceArgs) -> CmdResult {
    let (config, kind_name) = match args.kind {
        ReferenceKind::HalfCircle => {
            let n = args.n.ok_or("--kind half-circle requires --n")?;
            if matches!(args.d, Some(d) if d != 2) {
                return Err("half-circle configurations live in d=2".into());
            }
            (
                half_circle_config(n).map_err(|e| e.to_string())?,
                "half-circle",
            )
        }
        ReferenceKind::Simplex => {
            let d = args.d.ok_or("--kind simplex requires --d")?;
            if matches!(args.n, Some(n) if n != d + 1) {
                return Err("a d-simplex has N = d+1 vectors; omit --n".into());
            }
            (simplex_etf(d).map_err(|e| e.to_string())?, "simplex")
        }
        ReferenceKind::Onb => {
            let d = args.d.ok_or("--kind onb requires --d")?;
            if matches!(args.n, Some(n) if n != d) {
                return Err("an orthonormal basis has N = d vectors; omit --n".into());
            }
            (orthonormal_basis(d).map_err(|e| e.to_string())?, "onb")
        }
        ReferenceKind::Icosa6 => {
            if matches!(args.d, Some(d) if d != 3) || matches!(args.n, Some(n) if n != 6) {
                return Err("icosa6 is the fixed d=3, N=6 configuration; omit --d/--n".into());
            }
            (icosahedron_etf6(), "icosa6")
        }
    };
    match args.format {
        Format::Text => {
            let text = packing_text(&config);
            match &args.out {
                Some(path) => std::fs::write(path, text).map_err(|e| e.to_string())?,
                None => print!("{text}"),
            }
        }
        Format::Json => {
            let payload = json!({
                "kind": kind_name,
                "d": config.d(),
                "n": config.n(),
                "coordinates": coordinate_rows(&config),
            });
            if let Some(path) = &args.out {
                save_packing(path, &config).map_err(|e| e.to_string())?;
            }
            print_json(&payload)?;
        }
        Format::Csv => return Err("reference supports --format text or json".into()),
    }
    Ok(0)
}

fn cmd_metrics(args: MetricsArgs) -> CmdResult {
    if args.format != Format::Json {
        return Err("metrics supports --format json".into());
    }
    let loaded = load_packing(&args.input, args.d, args.n).map_err(|e| e.to_string())?;
    for w in &loaded.warnings {
        eprintln!("warning: {}: {w}", args.input.display());
    }
    let report = metrics_report(&loaded.config, args.s).map_err(|e| e.to_string())?;
    print_json(&report)?;
    Ok(0)
}

fn cmd_compare(args: CompareArgs) -> CmdResult {
    if args.format != Format::Json {
        return Err("compare supports --format json".into());
    }
    let a = load_packing(&args.in_a, args.d, args.n).map_err(|e| e.to_string())?;
    let b = load_packing(&args.in_b, args.d, args.n).map_err(|e| e.to_string())?;
    for (path, loaded) in [(&args.in_a, &a), (&args.in_b, &b)] {
        for w in &loaded.warnings {
            eprintln!("warning: {}: {w}", path.display());
        }
    }
    let record = compare_to_reference(&a.config, &b.config, args.tol).map_err(|e| e.to_string())?;
    let payload = json!({
        "path_a": args.in_a.display().to_string(),
        "path_b": args.in_b.display().to_string(),
        "comparison": record,
    });
    print_json(&payload)?;
    Ok(0)
}
