//! Deterministic equivalent with distribution-selection binaries and
//! McCormick envelopes for the products of selection and sales.

use std::time::Duration;

use optkernel::{solve_mip, LinearModel, MipOptions, Sense, SolveResult, VarId};

use crate::error::{Error, Result};
use crate::model::ProductionInstance;
use crate::secondstage::{compute_bounds, recourse, RecourseEvaluation};
use crate::solution::MasterSolution;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ScenarioVars {
    /// Inventory.
    pub z: VarId,
    /// Full-price sales.
    pub w: VarId,
    /// Overage sold at salvage.
    pub o: VarId,
    /// Selection times full-price sales.
    pub mu: VarId,
    /// Selection times overage.
    pub rho: VarId,
}

#[derive(Clone, Debug)]
pub struct ExtensiveFormModel {
    pub model: LinearModel,
    pub x: Vec<Vec<VarId>>,
    pub y: Vec<Vec<Vec<VarId>>>,
    pub delta: Vec<Vec<VarId>>,
    /// Indexed by product, distribution, scenario.
    pub scenario: Vec<Vec<Vec<ScenarioVars>>>,
}

pub fn build_extensive(inst: &ProductionInstance) -> Result<ExtensiveFormModel> {
    inst.ensure_valid()?;
    let bounds = compute_bounds(inst);
    let (np, nf) = (inst.num_products(), inst.num_facilities());
    let mut m = LinearModel::new();

    let x: Vec<Vec<VarId>> = (0..np)
        .map(|p| {
            (0..nf)
                .map(|f| m.add_continuous(format!("x_{p}_{f}"), 0.0, inst.capacity[f], -inst.cost[p][f]))
                .collect()
        })
        .collect();
    let y: Vec<Vec<Vec<VarId>>> = (0..np)
        .map(|p| {
            (0..nf)
                .map(|f| {
                    (0..inst.levels[p][f].len())
                        .map(|l| m.add_binary(format!("y_{p}_{f}_{l}"), 0.0))
                        .collect()
                })
                .collect()
        })
        .collect();
    let delta: Vec<Vec<VarId>> = (0..np)
        .map(|p| {
            (0..inst.num_distributions(p))
                .map(|d| m.add_binary(format!("delta_{p}_{d}"), 0.0))
                .collect()
        })
        .collect();

    for f in 0..nf {
        let coeffs = (0..np).map(|p| (x[p][f], 1.0)).collect();
        m.add_constraint(format!("capacity_{f}"), coeffs, Sense::Le, inst.capacity[f]);
    }
    for p in 0..np {
        for f in 0..nf {
            let levels = &inst.levels[p][f];
            let ys = &y[p][f];
            m.add_constraint(format!("one_level_{p}_{f}"), ys.iter().map(|&v| (v, 1.0)).collect(), Sense::Eq, 1.0);
            let mut lo = vec![(x[p][f], 1.0)];
            lo.extend(ys.iter().zip(levels).map(|(&v, lv)| (v, -lv.lower)));
            m.add_constraint(format!("level_lo_{p}_{f}"), lo, Sense::Ge, 0.0);
            let mut hi = vec![(x[p][f], 1.0)];
            hi.extend(ys.iter().zip(levels).map(|(&v, lv)| (v, -lv.upper.min(inst.capacity[f]))));
            m.add_constraint(format!("level_hi_{p}_{f}"), hi, Sense::Le, 0.0);
        }
        m.add_constraint(format!("one_dist_{p}"), delta[p].iter().map(|&v| (v, 1.0)).collect(), Sense::Eq, 1.0);
    }

    let mut scenario = Vec::with_capacity(np);
    for p in 0..np {
        let (price, salvage) = (inst.price[p], inst.salvage[p]);
        let mut per_d = Vec::with_capacity(inst.num_distributions(p));
        for (d, dist) in inst.distributions[p].iter().enumerate() {
            let dv = delta[p][d];
            let mut link: Vec<(VarId, f64)> = (0..nf).map(|f| (y[p][f][dist.enforced_level[f]], 1.0)).collect();
            link.push((dv, -(nf as f64)));
            m.add_constraint(format!("select_{p}_{d}"), link, Sense::Ge, 0.0);

            let mut per_s = Vec::with_capacity(dist.scenarios.len());
            for (s, sc) in dist.scenarios.iter().enumerate() {
                let tag = format!("{p}_{d}_{s}");
                let demand = sc.demand;
                let n_cap = bounds.overage_cap[p][d][s];
                let z = m.add_continuous(format!("z_{tag}"), 0.0, f64::INFINITY, 0.0);
                let w = m.add_continuous(format!("w_{tag}"), 0.0, demand, 0.0);
                let o = m.add_continuous(format!("o_{tag}"), 0.0, f64::INFINITY, 0.0);
                let mu = m.add_continuous(format!("mu_{tag}"), 0.0, demand, sc.probability * price);
                let rho = m.add_continuous(format!("rho_{tag}"), 0.0, n_cap, sc.probability * salvage);

                let mut inv = vec![(z, 1.0)];
                inv.extend((0..nf).map(|f| (x[p][f], -sc.yields[f])));
                m.add_constraint(format!("inventory_{tag}"), inv, Sense::Eq, 0.0);
                m.add_constraint(format!("balance_{tag}"), vec![(w, 1.0), (o, 1.0), (z, -1.0)], Sense::Eq, 0.0);

                if demand > 0.0 {
                    m.add_constraint(format!("mu_w_{tag}"), vec![(mu, 1.0), (w, -1.0)], Sense::Le, 0.0);
                    m.add_constraint(format!("mu_d_{tag}"), vec![(mu, 1.0), (dv, -demand)], Sense::Le, 0.0);
                    m.add_constraint(format!("mu_lo_{tag}"), vec![(mu, 1.0), (w, -1.0), (dv, -demand)], Sense::Ge, -demand);
                }
                m.add_constraint(format!("rho_o_{tag}"), vec![(rho, 1.0), (o, -1.0)], Sense::Le, 0.0);
                m.add_constraint(format!("rho_n_{tag}"), vec![(rho, 1.0), (dv, -n_cap)], Sense::Le, 0.0);
                m.add_constraint(format!("rho_lo_{tag}"), vec![(rho, 1.0), (o, -1.0), (dv, -n_cap)], Sense::Ge, -n_cap);
                per_s.push(ScenarioVars { z, w, o, mu, rho });
            }
            per_d.push(per_s);
        }
        scenario.push(per_d);
    }
    Ok(ExtensiveFormModel { model: m, x, y, delta, scenario })
}

impl ExtensiveFormModel {
    /// Reads the first stage from a primal point; levels and selections are
    /// the largest binaries.
    pub fn extract(&self, values: &[f64]) -> (MasterSolution, Vec<usize>) {
        let argmax = |vars: &[VarId]| {
            let mut best = 0;
            for (i, v) in vars.iter().enumerate() {
                if values[v.0] > values[vars[best].0] {
                    best = i;
                }
            }
            best
        };
        let x = self
            .x
            .iter()
            .map(|row| row.iter().map(|v| values[v.0].max(0.0)).collect())
            .collect();
        let levels = self.y.iter().map(|row| row.iter().map(|ys| argmax(ys)).collect()).collect();
        let chosen: Vec<usize> = self.delta.iter().map(|ds| argmax(ds)).collect();
        let mu = self
            .scenario
            .iter()
            .map(|per_d| {
                per_d
                    .iter()
                    .flatten()
                    .map(|sv| {
                        let c = &self.model.var(sv.mu).obj;
                        let r = &self.model.var(sv.rho).obj;
                        c * values[sv.mu.0] + r * values[sv.rho.0]
                    })
                    .sum()
            })
            .collect();
        let objective = self.model.objective_value(values);
        (MasterSolution { x, levels, mu, objective }, chosen)
    }

    /// Largest `|μ − δ w|` or `|ρ − δ o|` over all scenarios.
    pub fn linearization_residual(&self, values: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (per_d, deltas) in self.scenario.iter().zip(&self.delta) {
            for (per_s, dv) in per_d.iter().zip(deltas) {
                let delta = values[dv.0];
                for sv in per_s {
                    worst = worst.max((values[sv.mu.0] - delta * values[sv.w.0]).abs());
                    worst = worst.max((values[sv.rho.0] - delta * values[sv.o.0]).abs());
                }
            }
        }
        worst
    }
}

#[derive(Clone, Debug)]
pub struct ExtensiveOutcome {
    /// Absent when the search stopped before finding an incumbent.
    pub solution: Option<MasterSolution>,
    pub distributions: Vec<usize>,
    pub recourse: Option<RecourseEvaluation>,
    pub result: SolveResult,
    pub form: ExtensiveFormModel,
}

pub fn solve_extensive(inst: &ProductionInstance, time_limit: Option<Duration>, rel_gap: f64) -> Result<ExtensiveOutcome> {
    let form = build_extensive(inst)?;
    let opts = MipOptions { rel_gap, time_limit, ..MipOptions::default() };
    let result = solve_mip(&form.model, None, &opts)?;
    if !result.has_solution() {
        return Ok(ExtensiveOutcome { solution: None, distributions: Vec::new(), recourse: None, result, form });
    }
    let (solution, distributions) = form.extract(&result.x);
    let rec = recourse(inst, &solution.x, &solution.levels).map_err(|e| Error::Solver(format!("extensive incumbent rejected: {e}")))?;
    Ok(ExtensiveOutcome { solution: Some(solution), distributions, recourse: Some(rec), result, form })
}
