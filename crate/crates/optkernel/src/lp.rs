use std::time::Instant;

use crate::error::KernelError;
use crate::model::LinearModel;
use crate::result::{SolveResult, SolveStatus};
use crate::simplex::{LpOptions, LpStatus, Simplex};

pub fn solve_lp(model: &LinearModel) -> Result<SolveResult, KernelError> {
    solve_lp_with(model, &LpOptions::default())
}

/// Solves the continuous relaxation of `model` (integrality is ignored).
pub fn solve_lp_with(model: &LinearModel, opts: &LpOptions) -> Result<SolveResult, KernelError> {
    model.validate()?;
    let start = Instant::now();
    let lower: Vec<f64> = model.vars().iter().map(|v| v.lower).collect();
    let upper: Vec<f64> = model.vars().iter().map(|v| v.upper).collect();
    let mut lp = Simplex::new(model, &lower, &upper, opts);
    let status = lp.solve();
    let mut res = SolveResult::empty(map_status(status));
    match status {
        LpStatus::Optimal => {
            res.x = lp.primal();
            res.objective = lp.objective();
            res.bound = res.objective;
            res.duals = lp.duals();
            res.reduced_costs = lp.reduced_costs(&res.duals, model);
        }
        LpStatus::Infeasible => {
            res.bound = f64::NEG_INFINITY;
            res.farkas = lp.farkas();
        }
        LpStatus::Unbounded => {
            res.ray = lp.take_ray();
        }
        LpStatus::TimeLimit | LpStatus::IterationLimit => {}
    }
    res.stats.simplex_iterations = lp.iterations;
    res.stats.wall_seconds = start.elapsed().as_secs_f64();
    Ok(res)
}

pub(crate) fn map_status(s: LpStatus) -> SolveStatus {
    match s {
        LpStatus::Optimal => SolveStatus::Optimal,
        LpStatus::Infeasible => SolveStatus::Infeasible,
        LpStatus::Unbounded => SolveStatus::Unbounded,
        LpStatus::TimeLimit => SolveStatus::TimeLimit,
        LpStatus::IterationLimit => SolveStatus::IterationLimit,
    }
}
