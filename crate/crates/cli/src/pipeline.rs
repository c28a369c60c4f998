//! decompose → noise → QR solve → recompose → metrics.

use std::time::Instant;

use qr_cauchy::data::{self, CauchyData, TestProblem};
use qr_cauchy::field::{Field, Grid};
use qr_cauchy::metrics::{self, ErrorReport};
use qr_cauchy::params::RegParams;
use qr_cauchy::qr_solver;
use rayon::prelude::*;

use crate::config::{DerivativeSource, ExperimentConfig};
use crate::RunError;

/// One `(test, eps, seed)` job.
#[derive(Debug, Clone, PartialEq)]
pub struct Case {
    pub test: String,
    pub eps: f64,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct CaseResult {
    pub case: Case,
    pub params: RegParams,
    pub grid: Grid,
    pub report: ErrorReport,
    /// L² error on the line `x = 1`.
    pub l2_final: f64,
    pub runtime_s: f64,
    pub data: CauchyData,
    /// Reconstruction `u^ε` of the homogeneous part.
    pub homogeneous: Field,
    pub aux: Field,
    /// `w^ε = u^ε + ũ`.
    pub reconstruction: Field,
    pub truth: Field,
}

/// Cases in deterministic order: tests, then eps, then seeds.
pub fn cases(config: &ExperimentConfig) -> Vec<Case> {
    let mut out = Vec::new();
    for t in &config.tests {
        for &eps in &config.eps {
            for &seed in &config.seeds {
                out.push(Case { test: t.clone(), eps, seed });
            }
        }
    }
    out
}

/// Grid with `M = ⌈1/Δx⌉` and `N = M`.
pub fn grid_for(params: &RegParams) -> Result<Grid, RunError> {
    let m = params.x_intervals();
    Grid::new(m, m).map_err(|e| RunError::Solver(e.to_string()))
}

pub fn run_case(problem: &TestProblem, case: &Case, config: &ExperimentConfig) -> Result<CaseResult, RunError> {
    let start = Instant::now();
    let ctx = |stage: &str, e: &dyn std::fmt::Display| {
        RunError::Solver(format!("{} eps={} seed={}: {stage}: {e}", case.test, case.eps, case.seed))
    };
    let params = config.params(case.eps)?;
    let grid = grid_for(&params)?;
    let clean = data::clean_datum(problem, grid, config.bvp_refine, config.bvp_tol).map_err(|e| ctx("auxiliary problem", &e))?;

    let noise = if config.noiseless { 0.0 } else { case.eps };
    let mut datum =
        data::make_noisy_data(&clean.values, &clean.derivative, noise, case.seed).map_err(|e| ctx("noise", &e))?;
    datum.eps = case.eps;
    if config.derivative == DerivativeSource::Estimated {
        let k = data::measurement_intervals(&params);
        let coarse = datum.values.resample(k.max(1));
        datum.derivative =
            data::estimate_derivative_from_values(&coarse, &params, grid.n).map_err(|e| ctx("derivative", &e))?;
    }

    let homogeneous = qr_solver::linearized_solve(&params, &datum, grid).map_err(|e| ctx("march", &e))?;
    let reconstruction = homogeneous.add(&clean.aux).map_err(|e| ctx("recompose", &e))?;
    let truth = problem.truth(grid);
    let report = ErrorReport::compute(&reconstruction, &truth).map_err(|e| ctx("metrics", &e))?;
    let l2_final = metrics::final_line_l2_error(&reconstruction, &truth).map_err(|e| ctx("metrics", &e))?;
    let runtime_s = if config.timing { start.elapsed().as_secs_f64() } else { 0.0 };

    Ok(CaseResult {
        case: case.clone(),
        params,
        grid,
        report,
        l2_final,
        runtime_s,
        data: datum,
        homogeneous,
        aux: clean.aux,
        reconstruction,
        truth,
    })
}

/// Runs every case of the config, in parallel, returning results in case order.
pub fn run_cases(config: &ExperimentConfig) -> Result<Vec<CaseResult>, RunError> {
    config.validate()?;
    let jobs = cases(config);
    let work = || {
        jobs.par_iter()
            .map(|c| run_case(&TestProblem::by_name(&c.test)?, c, config))
            .collect::<Result<Vec<_>, _>>()
    };
    if config.jobs == 0 {
        work()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(config.jobs)
            .build()
            .map_err(|e| RunError::Config(e.to_string()))?
            .install(work)
    }
}

