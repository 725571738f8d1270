//! Parallel drivers for ensembles and analytic evaluations.

use rayon::prelude::*;
use simloc_core::analytic::{iq_finite_n, iq_thermo, AnalyticMomentQuery, FiniteNQuery};
use simloc_core::ensemble::{process_realization, reduce, EnsemblePlan, EnsembleResult};
use simloc_core::model::ModelParams;

use crate::config::RunConfig;
use crate::error::CliError;

/// Realizations dispatched to the pool at a time; bounds memory for long runs.
const CHUNK: u64 = 4096;

pub fn thread_pool(threads: Option<usize>) -> Result<rayon::ThreadPool, CliError> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(k) = threads {
        if k == 0 {
            return Err(CliError::Config("thread count must be positive".into()));
        }
        b = b.num_threads(k);
    }
    b.build().map_err(|e| CliError::Config(format!("cannot build thread pool: {e}")))
}

/// Runs a plan on the pool. The reduction sees realizations in index order,
/// so the result does not depend on the thread count.
pub fn run_plan_parallel(pool: &rayon::ThreadPool, plan: &EnsemblePlan) -> simloc_core::Result<EnsembleResult> {
    let total = plan.realizations;
    let mut failure = None;
    let stream = (0..total)
        .step_by(CHUNK as usize)
        .map_while(|start| {
            let end = (start + CHUNK).min(total);
            let chunk = pool.install(|| {
                (start..end)
                    .into_par_iter()
                    .map(|i| process_realization(plan, i))
                    .collect::<simloc_core::Result<Vec<_>>>()
            });
            match chunk {
                Ok(v) => Some(v),
                Err(e) => {
                    failure = Some(e);
                    None
                }
            }
        })
        .flatten();
    let out = reduce(plan, stream);
    match failure {
        Some(e) => Err(e),
        None => out,
    }
}

/// One simplex ensemble per disorder strength, at `E = 0`.
pub fn simulate(pool: &rayon::ThreadPool, cfg: &RunConfig) -> Result<Vec<EnsembleResult>, CliError> {
    cfg.w_values
        .iter()
        .map(|&w| {
            let stage = format!("simulate (w = {w})");
            let params = ModelParams::new(cfg.n, w, 0.0, cfg.seed).map_err(|e| CliError::numeric(&stage, e))?;
            let plan = EnsemblePlan::simplex(params, cfg.realizations, &cfg.q_values, cfg.window_factor)
                .map_err(|e| CliError::numeric(&stage, e))?;
            run_plan_parallel(pool, &plan).map_err(|e| CliError::numeric(&stage, e))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Thermo,
    FiniteN(usize),
}

impl Mode {
    pub fn label(&self) -> &'static str {
        match self {
            Mode::Thermo => "thermo",
            Mode::FiniteN(_) => "finite_n",
        }
    }

    pub fn n_or_inf(&self) -> String {
        match self {
            Mode::Thermo => "inf".into(),
            Mode::FiniteN(n) => n.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticRow {
    pub q: f64,
    pub w: f64,
    pub mode: Mode,
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: u64,
}

pub fn analytic_one(q: f64, w: f64, mode: Mode) -> Result<AnalyticRow, CliError> {
    let stage = format!("analytic ({}, q = {q}, w = {w})", mode.label());
    let fail = |e| CliError::numeric(&stage, e);
    let r = match mode {
        Mode::Thermo => iq_thermo(&AnalyticMomentQuery::new(q, w).map_err(fail)?).map_err(fail)?,
        Mode::FiniteN(n) => {
            if q.fract() != 0.0 || q > u32::MAX as f64 {
                return Err(CliError::Config(format!("finite_n mode needs integer q, got {q}")));
            }
            iq_finite_n(&FiniteNQuery::new(q as u32, w, n).map_err(fail)?).map_err(fail)?
        }
    };
    Ok(AnalyticRow {
        q,
        w,
        mode,
        value: r.value,
        error_estimate: r.error_estimate,
        evaluations: r.evaluations,
    })
}

/// Every `(w, q)` pair in config order (w outer).
pub fn analytic_grid(
    pool: &rayon::ThreadPool,
    w_values: &[f64],
    q_values: &[f64],
    mode: Mode,
) -> Result<Vec<AnalyticRow>, CliError> {
    let pairs: Vec<(f64, f64)> = w_values
        .iter()
        .flat_map(|&w| q_values.iter().map(move |&q| (q, w)))
        .collect();
    pool.install(|| {
        pairs
            .par_iter()
            .map(|&(q, w)| analytic_one(q, w, mode))
            .collect()
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub q: f64,
    pub w: f64,
    pub n: usize,
    pub estimate: f64,
    pub std_error: f64,
    pub states_used: u64,
    pub analytic: f64,
    pub analytic_error: f64,
    pub rel_dev: f64,
    pub sigma_dev: f64,
}

pub fn compare_rows(sim: &[EnsembleResult], analytic: &[AnalyticRow]) -> Vec<ComparisonRow> {
    sim.iter()
        .flat_map(|r| r.moments.iter())
        .zip(analytic)
        .map(|(m, a)| {
            debug_assert!(m.q == a.q && m.w == a.w);
            let sigma = (m.std_error * m.std_error + a.error_estimate * a.error_estimate).sqrt();
            let diff = m.estimate - a.value;
            ComparisonRow {
                q: m.q,
                w: m.w,
                n: m.n,
                estimate: m.estimate,
                std_error: m.std_error,
                states_used: m.states_used,
                analytic: a.value,
                analytic_error: a.error_estimate,
                rel_dev: diff / a.value,
                sigma_dev: if sigma > 0.0 { diff / sigma } else if diff == 0.0 { 0.0 } else { f64::INFINITY.copysign(diff) },
            }
        })
        .collect()
}
