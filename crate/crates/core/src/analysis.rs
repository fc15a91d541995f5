//! Enumeration oracle, expected-value problems and VSS statistics.

use std::fmt;
use std::str::FromStr;

use optkernel::{solve_lp, LinearModel, Sense, SolveStatus};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::model::{infer_distribution, JointDistribution, ProductionInstance, ProductionLevel, ScenarioRealization, FORMAT_VERSION};
use crate::secondstage::evaluate_full;
use crate::solution::MasterSolution;
use crate::solve::{solve, Method, SolveOptions};

pub const DEFAULT_ORACLE_BUDGET: u64 = 100_000;

/// One product, one facility, two levels. Optimum 63 at `x = 10` on level 1.
pub fn micro1() -> ProductionInstance {
    let sc = |probability: f64, y: f64, demand: f64| ScenarioRealization { probability, yields: vec![y], demand };
    ProductionInstance {
        format_version: FORMAT_VERSION,
        products: vec!["p1".into()],
        facilities: vec!["f1".into()],
        capacity: vec![20.0],
        cost: vec![vec![6.0]],
        price: vec![15.0],
        salvage: vec![2.0],
        levels: vec![vec![vec![ProductionLevel::new(0.0, 10.0), ProductionLevel::new(10.0, 20.0)]]],
        distributions: vec![vec![
            JointDistribution { enforced_level: vec![0], scenarios: vec![sc(0.5, 1.0, 8.0), sc(0.5, 0.5, 8.0)] },
            JointDistribution { enforced_level: vec![1], scenarios: vec![sc(0.5, 1.0, 8.0), sc(0.5, 0.9, 8.0)] },
        ]],
        meta: None,
    }
}

#[derive(Clone, Debug)]
pub struct OracleOutcome {
    pub solution: MasterSolution,
    pub distributions: Vec<usize>,
    pub lp_solves: usize,
}

/// Number of complete level assignments, or `None` past `u64`.
pub fn assignment_count(inst: &ProductionInstance) -> Option<u64> {
    inst.levels
        .iter()
        .flatten()
        .try_fold(1u64, |acc, lv| acc.checked_mul(lv.len() as u64))
}

fn decode(index: u64, radix: &[usize]) -> Vec<usize> {
    let mut digits = vec![0; radix.len()];
    let mut rest = index;
    for (i, &r) in radix.iter().enumerate().rev() {
        digits[i] = (rest % r as u64) as usize;
        rest /= r as u64;
    }
    digits
}

/// Solves the joint LP with levels fixed. `None` when the levels are
/// infeasible for the capacities.
fn fixed_level_lp(inst: &ProductionInstance, levels: &[Vec<usize>], dists: &[usize]) -> Result<Option<MasterSolution>> {
    let (np, nf) = (inst.num_products(), inst.num_facilities());
    let mut m = LinearModel::new();
    let mut x = Vec::with_capacity(np);
    for p in 0..np {
        let mut row = Vec::with_capacity(nf);
        for f in 0..nf {
            let lv = inst.levels[p][f][levels[p][f]];
            let hi = lv.upper.min(inst.capacity[f]);
            if lv.lower > hi {
                return Ok(None);
            }
            row.push(m.add_continuous(format!("x_{p}_{f}"), lv.lower, hi, -inst.cost[p][f]));
        }
        x.push(row);
    }
    for f in 0..nf {
        m.add_constraint(format!("cap_{f}"), (0..np).map(|p| (x[p][f], 1.0)).collect(), Sense::Le, inst.capacity[f]);
    }
    let mut sales = Vec::with_capacity(np);
    for p in 0..np {
        let dist = &inst.distributions[p][dists[p]];
        let mut per_s = Vec::with_capacity(dist.scenarios.len());
        for (s, sc) in dist.scenarios.iter().enumerate() {
            let w = m.add_continuous(format!("w_{p}_{s}"), 0.0, sc.demand, sc.probability * inst.price[p]);
            let o = m.add_continuous(format!("o_{p}_{s}"), 0.0, f64::INFINITY, sc.probability * inst.salvage[p]);
            let mut bal = vec![(w, 1.0), (o, 1.0)];
            bal.extend((0..nf).map(|f| (x[p][f], -sc.yields[f])));
            m.add_constraint(format!("bal_{p}_{s}"), bal, Sense::Eq, 0.0);
            per_s.push((w, o));
        }
        sales.push(per_s);
    }
    let res = solve_lp(&m)?;
    match res.status {
        SolveStatus::Optimal => {}
        SolveStatus::Infeasible => return Ok(None),
        other => return Err(Error::Solver(format!("oracle LP ended with {other:?}"))),
    }
    let mu = sales
        .iter()
        .map(|per_s| per_s.iter().map(|&(w, o)| m.var(w).obj * res.x[w.0] + m.var(o).obj * res.x[o.0]).sum())
        .collect();
    Ok(Some(MasterSolution {
        x: x.iter().map(|row| row.iter().map(|v| res.x[v.0]).collect()).collect(),
        levels: levels.to_vec(),
        mu,
        objective: res.objective,
    }))
}

/// Enumerates every level assignment and solves one LP per assignment.
/// Ties keep the lexicographically smallest assignment.
pub fn solve_oracle(inst: &ProductionInstance, budget: u64, exec: Execution) -> Result<OracleOutcome> {
    inst.ensure_valid()?;
    let count = match assignment_count(inst) {
        Some(c) if c <= budget => c,
        Some(c) => return Err(Error::OracleTooLarge { combinations: c.to_string(), budget }),
        None => return Err(Error::OracleTooLarge { combinations: "more than 2^64".into(), budget }),
    };
    let nf = inst.num_facilities();
    let radix: Vec<usize> = inst.levels.iter().flatten().map(Vec::len).collect();
    let results = exec.map_range(count as usize, |i| -> Result<Option<(MasterSolution, Vec<usize>)>> {
        let flat = decode(i as u64, &radix);
        let levels: Vec<Vec<usize>> = flat.chunks(nf).map(<[usize]>::to_vec).collect();
        let dists = (0..levels.len())
            .map(|p| infer_distribution(inst, p, &levels[p]))
            .collect::<Result<Vec<_>>>()?;
        Ok(fixed_level_lp(inst, &levels, &dists)?.map(|s| (s, dists)))
    });
    let mut best: Option<(MasterSolution, Vec<usize>)> = None;
    for r in results {
        if let Some((sol, dists)) = r? {
            let better = match &best {
                None => true,
                Some((b, _)) => sol.objective > b.objective + 1e-9 * (1.0 + b.objective.abs()),
            };
            if better {
                best = Some((sol, dists));
            }
        }
    }
    let (solution, distributions) = best.ok_or_else(|| Error::Solver("no level assignment is feasible".into()))?;
    Ok(OracleOutcome { solution, distributions, lp_solves: count as usize })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvVariant {
    /// Yields replaced by their expectation.
    Supply,
    /// Demand replaced by its expectation.
    Demand,
    Full,
}

impl EvVariant {
    pub const ALL: [EvVariant; 3] = [EvVariant::Supply, EvVariant::Demand, EvVariant::Full];

    pub fn name(self) -> &'static str {
        match self {
            EvVariant::Supply => "supply",
            EvVariant::Demand => "demand",
            EvVariant::Full => "full",
        }
    }
}

impl fmt::Display for EvVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EvVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        EvVariant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown variant `{s}`")))
    }
}

fn expected_yields(dist: &JointDistribution, nf: usize) -> Vec<f64> {
    (0..nf)
        .map(|f| dist.scenarios.iter().map(|s| s.probability * s.yields[f]).sum())
        .collect()
}

fn expected_demand(dist: &JointDistribution) -> f64 {
    dist.scenarios.iter().map(|s| s.probability * s.demand).sum()
}

/// Copy of `inst` with the chosen random parameters replaced by their
/// probability-weighted means within each distribution.
pub fn expected_value_instance(inst: &ProductionInstance, variant: EvVariant) -> ProductionInstance {
    let nf = inst.num_facilities();
    let mut ev = inst.clone();
    for dist in ev.distributions.iter_mut().flatten() {
        let ey = expected_yields(dist, nf);
        let ed = expected_demand(dist);
        match variant {
            EvVariant::Supply => dist.scenarios.iter_mut().for_each(|s| s.yields.clone_from(&ey)),
            EvVariant::Demand => dist.scenarios.iter_mut().for_each(|s| s.demand = ed),
            EvVariant::Full => {
                dist.scenarios = vec![ScenarioRealization { probability: 1.0, yields: ey, demand: ed }];
            }
        }
    }
    ev
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvSolution {
    pub variant: EvVariant,
    /// First stage of the expected-value problem.
    pub solution: MasterSolution,
    /// Distributions enforced by that first stage in the original instance.
    pub distributions: Vec<usize>,
    /// Value of the first stage under the original distributions.
    pub v_ev: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VssReport {
    pub v_sp: f64,
    pub v_ev_supply: Option<f64>,
    pub v_ev_demand: Option<f64>,
    pub v_ev_full: Option<f64>,
    /// Relative when `ratio_defined`, absolute `v_sp − v_ev` otherwise.
    pub vss_supply: Option<f64>,
    pub vss_demand: Option<f64>,
    pub vss_full: Option<f64>,
    pub ratio_defined: bool,
    pub ev: Vec<EvSolution>,
}

impl VssReport {
    pub fn vss(&self, variant: EvVariant) -> Option<f64> {
        match variant {
            EvVariant::Supply => self.vss_supply,
            EvVariant::Demand => self.vss_demand,
            EvVariant::Full => self.vss_full,
        }
    }
}

/// Solves the expected-value problem and evaluates its first stage on `inst`.
pub fn evaluate_ev(inst: &ProductionInstance, variant: EvVariant, opts: &SolveOptions) -> Result<EvSolution> {
    let ev_inst = expected_value_instance(inst, variant);
    let out = solve(&ev_inst, Method::BbmVi2, opts)?;
    let solution = out.solution;
    let distributions = solution.distributions(inst)?;
    let v_ev = evaluate_full(inst, &solution.x, &solution.levels)?;
    Ok(EvSolution { variant, solution, distributions, v_ev })
}

pub fn compute_vss(inst: &ProductionInstance, v_sp: f64, variants: &[EvVariant], opts: &SolveOptions) -> Result<VssReport> {
    let ratio_defined = v_sp > 0.0;
    let mut report = VssReport {
        v_sp,
        v_ev_supply: None,
        v_ev_demand: None,
        v_ev_full: None,
        vss_supply: None,
        vss_demand: None,
        vss_full: None,
        ratio_defined,
        ev: Vec::new(),
    };
    for &variant in variants {
        let ev = evaluate_ev(inst, variant, opts)?;
        let diff = v_sp - ev.v_ev;
        let vss = Some(if ratio_defined { diff / v_sp } else { diff });
        let v = Some(ev.v_ev);
        match variant {
            EvVariant::Supply => (report.v_ev_supply, report.vss_supply) = (v, vss),
            EvVariant::Demand => (report.v_ev_demand, report.vss_demand) = (v, vss),
            EvVariant::Full => (report.v_ev_full, report.vss_full) = (v, vss),
        }
        report.ev.push(ev);
    }
    Ok(report)
}
