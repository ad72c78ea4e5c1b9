//! Benchmark runner: builds the unit-disk completion problem with the known
//! harmonic solution `u = x^2 - y^2`, runs one or both drivers, and emits
//! CSV iteration curves plus a summary.
//!
//! Output files in the chosen directory:
//!
//! * `standard.csv` / `alternating.csv` — one row per iteration with header
//!   `n,E,e_u,e_v,solves`,
//! * `trace.csv` — the recovered trace on `Gamma1` next to the exact trace
//!   and the initial guess, header `t,u_exact,u0,u_standard,u_alternating`,
//! * `summary.csv` — per-algorithm totals.
//!
//! All floats are written with 12 significant digits and every run is
//! deterministic for a fixed configuration, including the noise seed.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::fem::{BoundaryField, FemError};
use crate::kmf::{
    kmf_alternating, kmf_standard, perturb, CauchyData, CompletionResult, ExactGamma1, KmfError,
    KmfOptions,
};
use crate::mesh::{generate_disk_mesh, read_mesh, MeshError, Region, TriMesh};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("theta must lie strictly inside (0, 2*pi), got {0}")]
    InvalidTheta(f64),
    #[error("n_boundary must be at least 8, got {0}")]
    InvalidResolution(usize),
    #[error("noise_level must be non-negative, got {0}")]
    InvalidNoise(f64),
    #[error("no run summaries to compare")]
    NoSummaries,
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Fem(#[from] FemError),
    #[error(transparent)]
    Kmf(#[from] KmfError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Which driver(s) to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Standard,
    Alternating,
    Both,
}

/// One concrete driver, used in summaries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlgorithmKind {
    Standard,
    Alternating,
}

impl AlgorithmKind {
    pub fn name(self) -> &'static str {
        match self {
            AlgorithmKind::Standard => "standard",
            AlgorithmKind::Alternating => "alternating",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    /// Opening angle of the inaccessible segment, radians in (0, 2*pi).
    pub theta: f64,
    /// Boundary edge count of the generated disk mesh.
    pub n_boundary: usize,
    pub algorithm: Algorithm,
    /// Stopping tolerance on the successive-trace norm.
    pub tol: f64,
    pub max_iters: usize,
    /// Relative Gaussian noise on the given data; `0` disables it.
    pub noise_level: f64,
    pub seed: u64,
    /// Relaxation factor for the flux updates; `1` disables relaxation.
    pub omega: f64,
    pub output_dir: PathBuf,
    /// Load this mesh instead of generating one.
    pub mesh_file: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            theta: PI / 2.0,
            n_boundary: 128,
            algorithm: Algorithm::Both,
            tol: 1e-5,
            max_iters: 1000,
            noise_level: 0.0,
            seed: 0,
            omega: 1.0,
            output_dir: PathBuf::from("out"),
            mesh_file: None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        if !(self.theta > 0.0 && self.theta < 2.0 * PI) {
            return Err(ExperimentError::InvalidTheta(self.theta));
        }
        if self.n_boundary < 8 {
            return Err(ExperimentError::InvalidResolution(self.n_boundary));
        }
        if self.noise_level < 0.0 {
            return Err(ExperimentError::InvalidNoise(self.noise_level));
        }
        Ok(())
    }
}

/// The assembled completion problem: disk mesh, given data on `Gamma0`, the
/// deliberately-far initial guess, and the exact reference fields on
/// `Gamma1`.
pub struct BenchmarkProblem {
    pub mesh: TriMesh<f64>,
    pub data: CauchyData<f64>,
    pub initial_trace: BoundaryField<f64>,
    pub exact: ExactGamma1<f64>,
}

/// Builds the disk problem for the exact solution `u = x^2 - y^2`: Dirichlet
/// trace and flux `2(2x^2 - 1)` on `Gamma0`, initial guess
/// `x^2 - x - 1/2` on `Gamma1`, optional seeded noise on the given data.
pub fn build_benchmark_problem(
    config: &ExperimentConfig,
) -> Result<BenchmarkProblem, ExperimentError> {
    config.validate()?;
    let mesh = match &config.mesh_file {
        Some(path) => read_mesh(path)?,
        None => generate_disk_mesh(config.n_boundary, config.theta)?,
    };
    let mut dirichlet =
        BoundaryField::interpolate(&mesh, Region::Gamma0, |x, y| x * x - y * y)?;
    let mut neumann =
        BoundaryField::interpolate(&mesh, Region::Gamma0, |x, _| 2.0 * (2.0 * x * x - 1.0))?;
    if config.noise_level > 0.0 {
        dirichlet = perturb(&dirichlet, config.noise_level, config.seed);
        neumann = perturb(&neumann, config.noise_level, config.seed.wrapping_add(1));
    }
    let initial_trace =
        BoundaryField::interpolate(&mesh, Region::Gamma1, |x, _| x * x - x - 0.5)?;
    let exact = ExactGamma1 {
        trace: BoundaryField::interpolate(&mesh, Region::Gamma1, |x, _| 2.0 * x * x - 1.0)?,
        flux: BoundaryField::interpolate(&mesh, Region::Gamma1, |x, _| {
            2.0 * (2.0 * x * x - 1.0)
        })?,
    };
    let data = CauchyData::new(dirichlet, neumann)?;
    Ok(BenchmarkProblem {
        mesh,
        data,
        initial_trace,
        exact,
    })
}

/// Totals of one driver run.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub theta: f64,
    pub algorithm: AlgorithmKind,
    pub iterations: usize,
    pub total_solves: usize,
    pub converged: bool,
    pub final_stopping: f64,
    pub final_trace_error: Option<f64>,
    pub final_flux_error: Option<f64>,
    pub wall_time: Duration,
}

impl RunSummary {
    fn from_result(
        theta: f64,
        algorithm: AlgorithmKind,
        result: &CompletionResult<'_, f64>,
        wall_time: Duration,
    ) -> Self {
        let last = result.history.last();
        RunSummary {
            theta,
            algorithm,
            iterations: last.map_or(0, |r| r.n),
            total_solves: last.map_or(0, |r| r.solves_so_far),
            converged: result.converged,
            final_stopping: last.map_or(f64::NAN, |r| r.stopping),
            final_trace_error: last.and_then(|r| r.trace_error),
            final_flux_error: last.and_then(|r| r.flux_error),
            wall_time,
        }
    }
}

/// Runs the configured driver(s), writes all CSV files, and returns one
/// summary per run. The output directory is created (and must be writable)
/// before the first solve.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<RunSummary>, ExperimentError> {
    config.validate()?;
    fs::create_dir_all(&config.output_dir)?;
    probe_writable(config)?;

    let problem = build_benchmark_problem(config)?;
    let opts = KmfOptions {
        tol: config.tol,
        max_iters: config.max_iters,
        omega: config.omega,
        exact: Some(problem.exact.clone()),
    };

    let kinds: &[AlgorithmKind] = match config.algorithm {
        Algorithm::Standard => &[AlgorithmKind::Standard],
        Algorithm::Alternating => &[AlgorithmKind::Alternating],
        Algorithm::Both => &[AlgorithmKind::Standard, AlgorithmKind::Alternating],
    };

    let mut summaries = Vec::new();
    let mut traces: [Option<Vec<f64>>; 2] = [None, None];
    for &kind in kinds {
        let start = Instant::now();
        let result = match kind {
            AlgorithmKind::Standard => {
                kmf_standard(&problem.mesh, &problem.data, &problem.initial_trace, &opts)?
            }
            AlgorithmKind::Alternating => {
                kmf_alternating(&problem.mesh, &problem.data, &problem.initial_trace, &opts)?
            }
        };
        let wall = start.elapsed();
        write_history_csv(config, kind, &result)?;
        let slot = match kind {
            AlgorithmKind::Standard => 0,
            AlgorithmKind::Alternating => 1,
        };
        traces[slot] = Some(result.trace_gamma1.values().to_vec());
        summaries.push(RunSummary::from_result(config.theta, kind, &result, wall));
    }

    write_trace_csv(config, &problem, &traces)?;
    write_summary_csv(config, &summaries)?;
    Ok(summaries)
}

fn probe_writable(config: &ExperimentConfig) -> Result<(), ExperimentError> {
    let probe = config.output_dir.join("summary.csv");
    fs::write(&probe, "")?;
    Ok(())
}

/// 12 significant digits.
fn sig(x: f64) -> String {
    format!("{x:.11e}")
}

fn opt_sig(x: Option<f64>) -> String {
    x.map(sig).unwrap_or_default()
}

fn write_history_csv(
    config: &ExperimentConfig,
    kind: AlgorithmKind,
    result: &CompletionResult<'_, f64>,
) -> Result<(), ExperimentError> {
    let mut text = String::from("n,E,e_u,e_v,solves\n");
    for rec in &result.history {
        let _ = writeln!(
            text,
            "{},{},{},{},{}",
            rec.n,
            sig(rec.stopping),
            opt_sig(rec.trace_error),
            opt_sig(rec.flux_error),
            rec.solves_so_far
        );
    }
    fs::write(
        config.output_dir.join(format!("{}.csv", kind.name())),
        text,
    )?;
    Ok(())
}

fn write_trace_csv(
    config: &ExperimentConfig,
    problem: &BenchmarkProblem,
    traces: &[Option<Vec<f64>>; 2],
) -> Result<(), ExperimentError> {
    let mut text = String::from("t,u_exact,u0,u_standard,u_alternating\n");
    for (i, &node) in problem.exact.trace.node_ids().iter().enumerate() {
        let t = problem.mesh.vertices()[node].angle();
        let _ = writeln!(
            text,
            "{},{},{},{},{}",
            sig(t),
            sig(problem.exact.trace.values()[i]),
            sig(problem.initial_trace.values()[i]),
            opt_sig(traces[0].as_ref().map(|v| v[i])),
            opt_sig(traces[1].as_ref().map(|v| v[i]))
        );
    }
    fs::write(config.output_dir.join("trace.csv"), text)?;
    Ok(())
}

fn write_summary_csv(
    config: &ExperimentConfig,
    summaries: &[RunSummary],
) -> Result<(), ExperimentError> {
    // wall time is intentionally absent: output files are byte-reproducible
    let mut text =
        String::from("theta,algorithm,iterations,total_solves,converged,final_E,final_e_u,final_e_v\n");
    for s in summaries {
        let _ = writeln!(
            text,
            "{},{},{},{},{},{},{},{}",
            sig(s.theta),
            s.algorithm.name(),
            s.iterations,
            s.total_solves,
            s.converged,
            sig(s.final_stopping),
            opt_sig(s.final_trace_error),
            opt_sig(s.final_flux_error)
        );
    }
    fs::write(config.output_dir.join("summary.csv"), text)?;
    Ok(())
}

/// Aligned text table of run summaries, wall time included.
pub fn summary_table(summaries: &[RunSummary]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:>10} {:>12} {:>7} {:>7} {:>10} {:>12} {:>12} {:>12} {:>9}",
        "theta", "algorithm", "iters", "solves", "converged", "E", "e_u", "e_v", "wall [s]"
    );
    for s in summaries {
        let _ = writeln!(
            out,
            "{:>10.6} {:>12} {:>7} {:>7} {:>10} {:>12.4e} {:>12} {:>12} {:>9.3}",
            s.theta,
            s.algorithm.name(),
            s.iterations,
            s.total_solves,
            s.converged,
            s.final_stopping,
            s.final_trace_error
                .map_or_else(|| "-".into(), |v| format!("{v:.4e}")),
            s.final_flux_error
                .map_or_else(|| "-".into(), |v| format!("{v:.4e}")),
            s.wall_time.as_secs_f64()
        );
    }
    out
}

/// Per-theta comparison: iteration and final-error ratios of the
/// alternating driver against the standard one.
pub fn compare_report(summaries: &[RunSummary]) -> Result<String, ExperimentError> {
    if summaries.is_empty() {
        return Err(ExperimentError::NoSummaries);
    }
    let mut thetas: Vec<f64> = summaries.iter().map(|s| s.theta).collect();
    thetas.sort_by(|a, b| a.total_cmp(b));
    thetas.dedup();

    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:>10} {:>10} {:>10} {:>12} {:>12} {:>12} {:>12}",
        "theta", "std iters", "alt iters", "iter ratio", "std err", "alt err", "err ratio"
    );
    for theta in thetas {
        let std = summaries
            .iter()
            .find(|s| s.theta == theta && s.algorithm == AlgorithmKind::Standard);
        let alt = summaries
            .iter()
            .find(|s| s.theta == theta && s.algorithm == AlgorithmKind::Alternating);
        let err_of = |s: &RunSummary| s.final_trace_error.unwrap_or(s.final_stopping);
        let fmt_iters = |s: Option<&RunSummary>| {
            s.map_or_else(|| "-".into(), |s| s.iterations.to_string())
        };
        let fmt_err = |s: Option<&RunSummary>| {
            s.map_or_else(|| "-".into(), |s| format!("{:.4e}", err_of(s)))
        };
        let ratio = |f: &dyn Fn(&RunSummary) -> f64| match (std, alt) {
            (Some(s), Some(a)) if f(s) != 0.0 => format!("{:.3}", f(a) / f(s)),
            _ => "-".into(),
        };
        let _ = writeln!(
            out,
            "{:>10.6} {:>10} {:>10} {:>12} {:>12} {:>12} {:>12}",
            theta,
            fmt_iters(std),
            fmt_iters(alt),
            ratio(&|s| s.iterations as f64),
            fmt_err(std),
            fmt_err(alt),
            ratio(&err_of),
        );
    }
    Ok(out)
}
