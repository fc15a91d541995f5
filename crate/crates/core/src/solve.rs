//! Uniform entry point over all solution methods.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use optkernel::SolveStatus;
use serde::{Deserialize, Serialize};

use crate::analysis::{solve_oracle, DEFAULT_ORACLE_BUDGET};
use crate::benders::{relative_gap, solve_branch_and_cut, solve_iterative, zero_plan, BendersOptions, IterationRecord, ViFlags};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::extensive::solve_extensive;
use crate::model::ProductionInstance;
use crate::solution::MasterSolution;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "extensive")]
    Extensive,
    #[serde(rename = "bbm")]
    Bbm,
    #[serde(rename = "bbm-vi1")]
    BbmVi1,
    #[serde(rename = "bbm-vi2")]
    BbmVi2,
    /// Branch-and-cut over the master with the second valid inequality.
    #[serde(rename = "bbm-bc")]
    BbmBc,
    #[serde(rename = "oracle")]
    Oracle,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Extensive,
        Method::Bbm,
        Method::BbmVi1,
        Method::BbmVi2,
        Method::BbmBc,
        Method::Oracle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Extensive => "extensive",
            Method::Bbm => "bbm",
            Method::BbmVi1 => "bbm-vi1",
            Method::BbmVi2 => "bbm-vi2",
            Method::BbmBc => "bbm-bc",
            Method::Oracle => "oracle",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown method `{s}`")))
    }
}

#[derive(Clone, Debug)]
pub struct SolveOptions {
    /// Relative optimality tolerance.
    pub gap: f64,
    pub time_limit: Option<Duration>,
    /// Largest number of level assignments the oracle may enumerate.
    pub oracle_budget: u64,
    pub execution: Execution,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            gap: 1e-4,
            time_limit: Some(Duration::from_secs(1800)),
            oracle_budget: DEFAULT_ORACLE_BUDGET,
            execution: Execution::Parallel,
        }
    }
}

#[derive(Clone, Debug)]
pub struct MethodOutcome {
    pub method: Method,
    pub status: SolveStatus,
    /// True objective of `solution`.
    pub objective: f64,
    /// Upper bound on the optimal value.
    pub bound: f64,
    pub gap: f64,
    pub solution: MasterSolution,
    pub distributions: Vec<usize>,
    /// Master iterations, callback rounds or LP solves, depending on method.
    pub iterations: usize,
    pub nodes: u64,
    pub cuts: usize,
    pub wall_seconds: f64,
    pub root_bound: Option<f64>,
    pub log: Vec<IterationRecord>,
}

impl MethodOutcome {
    pub fn is_solved(&self) -> bool {
        matches!(self.status, SolveStatus::Optimal | SolveStatus::GapLimit)
    }
}

pub fn solve(inst: &ProductionInstance, method: Method, opts: &SolveOptions) -> Result<MethodOutcome> {
    let start = Instant::now();
    let benders = |vi: ViFlags| BendersOptions {
        epsilon: opts.gap,
        time_limit: opts.time_limit,
        vi,
        execution: opts.execution,
    };
    let mut out = match method {
        Method::Extensive => {
            let ext = solve_extensive(inst, opts.time_limit, opts.gap)?;
            let (solution, distributions) = match ext.solution {
                Some(s) => (s, ext.distributions),
                None => {
                    let z = zero_plan(inst);
                    let d = z.distributions(inst)?;
                    (z, d)
                }
            };
            let objective = solution.objective;
            let bound = ext.result.bound.max(objective);
            MethodOutcome {
                method,
                status: ext.result.status,
                objective,
                bound,
                gap: relative_gap(bound, objective),
                solution,
                distributions,
                iterations: ext.result.stats.simplex_iterations as usize,
                nodes: ext.result.stats.nodes,
                cuts: 0,
                wall_seconds: 0.0,
                root_bound: ext.result.bound_trace.first().map(|s| s.bound),
                log: Vec::new(),
            }
        }
        Method::Bbm | Method::BbmVi1 | Method::BbmVi2 | Method::BbmBc => {
            let (vi, bc) = match method {
                Method::Bbm => (ViFlags::NONE, false),
                Method::BbmVi1 => (ViFlags::VI1, false),
                Method::BbmVi2 => (ViFlags::VI2, false),
                _ => (ViFlags::VI2, true),
            };
            let res = if bc {
                solve_branch_and_cut(inst, &benders(vi))?
            } else {
                solve_iterative(inst, &benders(vi))?
            };
            let distributions = res.solution.distributions(inst)?;
            MethodOutcome {
                method,
                status: res.state.status,
                objective: res.solution.objective,
                bound: res.state.v_rmp.max(res.solution.objective),
                gap: res.state.gap,
                distributions,
                solution: res.solution,
                iterations: res.state.iterations.len(),
                nodes: res.state.nodes,
                cuts: res.state.cuts.len(),
                wall_seconds: 0.0,
                root_bound: res.state.root_bound,
                log: res.state.iterations,
            }
        }
        Method::Oracle => {
            let res = solve_oracle(inst, opts.oracle_budget, opts.execution)?;
            MethodOutcome {
                method,
                status: SolveStatus::Optimal,
                objective: res.solution.objective,
                bound: res.solution.objective,
                gap: 0.0,
                distributions: res.distributions,
                solution: res.solution,
                iterations: res.lp_solves,
                nodes: 0,
                cuts: 0,
                wall_seconds: 0.0,
                root_bound: None,
                log: Vec::new(),
            }
        }
    };
    out.wall_seconds = start.elapsed().as_secs_f64();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::micro1;

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert!("cplex".parse::<Method>().is_err());
    }

    #[test]
    fn every_method_solves_micro() {
        let inst = micro1();
        let opts = SolveOptions { gap: 1e-9, time_limit: None, ..SolveOptions::default() };
        for m in Method::ALL {
            let out = solve(&inst, m, &opts).unwrap();
            assert!(out.is_solved(), "{m}: {:?}", out.status);
            assert!((out.objective - 63.0).abs() < 1e-6, "{m}: {}", out.objective);
            assert_eq!(out.solution.levels[0][0], 1, "{m}");
            assert_eq!(out.distributions, vec![1]);
        }
    }
}
