//! Closed-form recourse, scenario partitions and the analytic bounds used by
//! the master problems.

use crate::error::{Error, Result};
use crate::model::{infer_distribution, ProductionInstance};

/// Revenue of one scenario: sell `min(D, z)` at full price and the rest at
/// salvage.
pub fn scenario_revenue(price: f64, salvage: f64, demand: f64, inventory: f64) -> f64 {
    if demand <= inventory {
        price * demand + salvage * (inventory - demand)
    } else {
        price * inventory
    }
}

/// `z = Σ_f Y_f x_f`.
pub fn inventory(yields: &[f64], x_p: &[f64]) -> f64 {
    yields.iter().zip(x_p).map(|(y, x)| y * x).sum()
}

/// Scenario indices split by whether inventory strictly exceeds demand.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ScenarioPartition {
    /// Scenarios with `D < z`.
    pub up: Vec<usize>,
    /// Scenarios with `D ≥ z`.
    pub down: Vec<usize>,
}

impl ScenarioPartition {
    /// Bitset of `up`, one bit per scenario.
    pub fn up_mask(&self, num_scenarios: usize) -> Vec<u64> {
        let mut mask = vec![0u64; num_scenarios.div_ceil(64).max(1)];
        for &s in &self.up {
            mask[s / 64] |= 1 << (s % 64);
        }
        mask
    }
}

pub fn partition(inst: &ProductionInstance, p: usize, d: usize, x_p: &[f64]) -> Result<ScenarioPartition> {
    let dist = inst.distribution(p, d)?;
    let mut part = ScenarioPartition::default();
    for (s, sc) in dist.scenarios.iter().enumerate() {
        if sc.demand < inventory(&sc.yields, x_p) {
            part.up.push(s);
        } else {
            part.down.push(s);
        }
    }
    Ok(part)
}

/// Expected revenue of product `p` under distribution `d`.
pub fn expected_revenue_under(inst: &ProductionInstance, p: usize, d: usize, x_p: &[f64]) -> Result<f64> {
    let dist = inst.distribution(p, d)?;
    let (price, salvage) = (inst.price[p], inst.salvage[p]);
    Ok(dist
        .scenarios
        .iter()
        .map(|sc| sc.probability * scenario_revenue(price, salvage, sc.demand, inventory(&sc.yields, x_p)))
        .sum())
}

/// `Q_p(x, y)` with the distribution implied by the level vector `y_p`.
pub fn expected_revenue(inst: &ProductionInstance, p: usize, x_p: &[f64], y_p: &[usize]) -> Result<f64> {
    let d = infer_distribution(inst, p, y_p)?;
    expected_revenue_under(inst, p, d, x_p)
}

/// Checks capacity, level choice and level bounds of a first-stage decision.
pub fn check_first_stage(inst: &ProductionInstance, x: &[Vec<f64>], y: &[Vec<usize>]) -> Result<()> {
    let (np, nf) = (inst.num_products(), inst.num_facilities());
    if x.len() != np || y.len() != np || x.iter().any(|r| r.len() != nf) || y.iter().any(|r| r.len() != nf) {
        return Err(Error::InfeasibleDecision("decision does not match instance dimensions".into()));
    }
    let tol = |v: f64| 1e-6 * (1.0 + v.abs());
    for f in 0..nf {
        let used: f64 = (0..np).map(|p| x[p][f]).sum();
        if used > inst.capacity[f] + tol(inst.capacity[f]) {
            return Err(Error::InfeasibleDecision(format!(
                "facility {} uses {used} of capacity {}",
                inst.facilities[f], inst.capacity[f]
            )));
        }
    }
    for p in 0..np {
        for f in 0..nf {
            let l = y[p][f];
            let lv = inst.levels[p][f].get(l).ok_or_else(|| {
                Error::InfeasibleDecision(format!("level {l} does not exist at ({},{})", inst.products[p], inst.facilities[f]))
            })?;
            let v = x[p][f];
            if v < lv.lower - tol(lv.lower) || v > lv.upper + tol(lv.upper) {
                return Err(Error::InfeasibleDecision(format!(
                    "allocation {v} of ({},{}) lies outside level {l} = [{}, {}]",
                    inst.products[p], inst.facilities[f], lv.lower, lv.upper
                )));
            }
        }
    }
    Ok(())
}

/// True objective `-Σ C x + Σ_p Q_p(x, y)` of a first-stage decision.
pub fn evaluate_full(inst: &ProductionInstance, x: &[Vec<f64>], y: &[Vec<usize>]) -> Result<f64> {
    check_first_stage(inst, x, y)?;
    let mut v = 0.0;
    for p in 0..inst.num_products() {
        v -= inst.cost[p].iter().zip(&x[p]).map(|(c, x)| c * x).sum::<f64>();
        v += expected_revenue(inst, p, &x[p], &y[p])?;
    }
    Ok(v)
}

/// Optimal sales of one scenario.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScenarioRecourse {
    pub inventory: f64,
    pub full_price_sales: f64,
    pub overage: f64,
    pub revenue: f64,
}

/// Second-stage solution of one product under its enforced distribution.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductRecourse {
    pub distribution: usize,
    pub scenarios: Vec<ScenarioRecourse>,
    pub expected_revenue: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RecourseEvaluation {
    pub products: Vec<ProductRecourse>,
}

pub fn recourse(inst: &ProductionInstance, x: &[Vec<f64>], y: &[Vec<usize>]) -> Result<RecourseEvaluation> {
    check_first_stage(inst, x, y)?;
    let mut products = Vec::with_capacity(inst.num_products());
    for p in 0..inst.num_products() {
        let d = infer_distribution(inst, p, &y[p])?;
        let dist = inst.distribution(p, d)?;
        let (price, salvage) = (inst.price[p], inst.salvage[p]);
        let mut expected = 0.0;
        let scenarios = dist
            .scenarios
            .iter()
            .map(|sc| {
                let z = inventory(&sc.yields, &x[p]);
                let w = sc.demand.min(z);
                let revenue = scenario_revenue(price, salvage, sc.demand, z);
                expected += sc.probability * revenue;
                ScenarioRecourse { inventory: z, full_price_sales: w, overage: z - w, revenue }
            })
            .collect();
        products.push(ProductRecourse { distribution: d, scenarios, expected_revenue: expected });
    }
    Ok(RecourseEvaluation { products })
}

/// Analytic caps on inventory and revenue.
#[derive(Clone, Debug, PartialEq)]
pub struct InstanceBounds {
    /// `Z̄_pds`: inventory reachable under the levels enforcing `d`.
    pub inventory_cap: Vec<Vec<Vec<f64>>>,
    /// `N_pds`: inventory reachable under any level.
    pub overage_cap: Vec<Vec<Vec<f64>>>,
    /// `M_p`.
    pub revenue_cap: Vec<f64>,
    /// `Ȳ_pf`.
    pub max_yield: Vec<Vec<f64>>,
    /// `Yᴱ_pfd`.
    pub expected_yield: Vec<Vec<Vec<f64>>>,
}

impl InstanceBounds {
    /// `max_d Yᴱ_pfd`.
    pub fn max_expected_yield(&self, p: usize, f: usize) -> f64 {
        self.expected_yield[p]
            .iter()
            .map(|per_f| per_f[f])
            .fold(0.0, f64::max)
    }
}

pub fn compute_bounds(inst: &ProductionInstance) -> InstanceBounds {
    let (np, nf) = (inst.num_products(), inst.num_facilities());
    let mut b = InstanceBounds {
        inventory_cap: Vec::with_capacity(np),
        overage_cap: Vec::with_capacity(np),
        revenue_cap: vec![0.0; np],
        max_yield: vec![vec![0.0; nf]; np],
        expected_yield: Vec::with_capacity(np),
    };
    for p in 0..np {
        let (price, salvage) = (inst.price[p], inst.salvage[p]);
        let top: Vec<f64> = (0..nf)
            .map(|f| {
                let umax = inst.levels[p][f].iter().map(|l| l.upper).fold(0.0, f64::max);
                inst.capacity[f].min(umax)
            })
            .collect();
        let (mut zcap, mut ncap, mut ey) = (Vec::new(), Vec::new(), Vec::new());
        for dist in &inst.distributions[p] {
            let reach: Vec<f64> = (0..nf)
                .map(|f| inst.capacity[f].min(inst.levels[p][f][dist.enforced_level[f]].upper))
                .collect();
            let mut zd = Vec::with_capacity(dist.scenarios.len());
            let mut nd = Vec::with_capacity(dist.scenarios.len());
            let mut eyd = vec![0.0; nf];
            let mut revenue = 0.0;
            for sc in &dist.scenarios {
                let z = inventory(&sc.yields, &reach);
                zd.push(z);
                nd.push(inventory(&sc.yields, &top));
                revenue += sc.probability * (price * sc.demand.min(z) + salvage * (z - sc.demand).max(0.0));
                for f in 0..nf {
                    eyd[f] += sc.probability * sc.yields[f];
                    b.max_yield[p][f] = b.max_yield[p][f].max(sc.yields[f]);
                }
            }
            b.revenue_cap[p] = b.revenue_cap[p].max(revenue);
            zcap.push(zd);
            ncap.push(nd);
            ey.push(eyd);
        }
        b.inventory_cap.push(zcap);
        b.overage_cap.push(ncap);
        b.expected_yield.push(ey);
    }
    b
}
