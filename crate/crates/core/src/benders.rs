//! Benders-type decomposition over the first stage: the relaxed master keeps
//! one revenue variable per product, and optimality cuts built from the
//! scenario partition at a candidate correct overestimates.

use std::collections::HashSet;
use std::time::{Duration, Instant};

use optkernel::{solve_mip, IncumbentCandidate, LinearModel, MipOptions, Row, Sense, SolveStatus, VarId};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::model::{infer_distribution, ProductionInstance};
use crate::secondstage::{compute_bounds, evaluate_full, expected_revenue_under, partition, InstanceBounds, ScenarioPartition};
use crate::solution::MasterSolution;

/// Relative violation a candidate must exceed before a cut is emitted.
pub const CUT_VIOLATION_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViFlags {
    /// `μ_p ≤ P_p Σ_f Ȳ_pf x_pf`.
    pub vi1: bool,
    /// `μ_p ≤ P_p Σ_f max_d Yᴱ_pfd x_pf`.
    pub vi2: bool,
}

impl ViFlags {
    pub const NONE: ViFlags = ViFlags { vi1: false, vi2: false };
    pub const VI1: ViFlags = ViFlags { vi1: true, vi2: false };
    pub const VI2: ViFlags = ViFlags { vi1: false, vi2: true };
}

/// Relaxed master problem with variable handles.
#[derive(Clone, Debug)]
pub struct Rmp {
    pub model: LinearModel,
    pub x: Vec<Vec<VarId>>,
    pub y: Vec<Vec<Vec<VarId>>>,
    pub mu: Vec<VarId>,
    pub bounds: InstanceBounds,
}

pub fn build_rmp(inst: &ProductionInstance, vi: ViFlags) -> Result<Rmp> {
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
    let mu: Vec<VarId> = (0..np)
        .map(|p| m.add_continuous(format!("mu_{p}"), 0.0, bounds.revenue_cap[p], 1.0))
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
        let price = inst.price[p];
        if vi.vi1 {
            let mut row = vec![(mu[p], 1.0)];
            row.extend((0..nf).map(|f| (x[p][f], -price * bounds.max_yield[p][f])));
            m.add_constraint(format!("vi1_{p}"), row, Sense::Le, 0.0);
        }
        if vi.vi2 {
            let mut row = vec![(mu[p], 1.0)];
            row.extend((0..nf).map(|f| (x[p][f], -price * bounds.max_expected_yield(p, f))));
            m.add_constraint(format!("vi2_{p}"), row, Sense::Le, 0.0);
        }
    }
    Ok(Rmp { model: m, x, y, mu, bounds })
}

impl Rmp {
    pub fn extract(&self, values: &[f64]) -> MasterSolution {
        let x = self
            .x
            .iter()
            .map(|row| row.iter().map(|v| values[v.0].max(0.0)).collect())
            .collect();
        let levels = self
            .y
            .iter()
            .map(|row| {
                row.iter()
                    .map(|ys| {
                        let mut best = 0;
                        for (l, v) in ys.iter().enumerate() {
                            if values[v.0] > values[ys[best].0] {
                                best = l;
                            }
                        }
                        best
                    })
                    .collect()
            })
            .collect();
        let mu = self.mu.iter().map(|v| values[v.0]).collect();
        MasterSolution { x, levels, mu, objective: self.model.objective_value(values) }
    }
}

/// `μ_p ≤ Σ_f a_f x_pf + c + M_p (|F| − Σ_f y_{p,f,l(p,f,d)})`.
#[derive(Clone, Debug, PartialEq)]
pub struct OptimalityCut {
    pub product: usize,
    pub distribution: usize,
    pub coeffs: Vec<f64>,
    pub constant: f64,
    pub big_m: f64,
    pub levels: Vec<usize>,
    pub partition: ScenarioPartition,
    /// Allocation `x̄_p` the cut was generated at.
    pub origin: Vec<f64>,
}

/// Identifies cuts that are equal by construction.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CutKey {
    pub product: usize,
    pub distribution: usize,
    pub up_mask: Vec<u64>,
}

impl OptimalityCut {
    pub fn rhs(&self, x_p: &[f64], y_p: &[usize]) -> f64 {
        let linear: f64 = self.coeffs.iter().zip(x_p).map(|(a, x)| a * x).sum();
        let missing = self.levels.iter().zip(y_p).filter(|(a, b)| a != b).count();
        linear + self.constant + self.big_m * missing as f64
    }

    pub fn key(&self) -> CutKey {
        let n = self.partition.up.len() + self.partition.down.len();
        CutKey {
            product: self.product,
            distribution: self.distribution,
            up_mask: self.partition.up_mask(n),
        }
    }

    pub fn to_row(&self, rmp: &Rmp, name: String) -> Row {
        let p = self.product;
        let mut coeffs = vec![(rmp.mu[p], 1.0)];
        for (f, &a) in self.coeffs.iter().enumerate() {
            if a != 0.0 {
                coeffs.push((rmp.x[p][f], -a));
            }
        }
        for (f, &l) in self.levels.iter().enumerate() {
            coeffs.push((rmp.y[p][f][l], self.big_m));
        }
        let rhs = self.constant + self.big_m * self.levels.len() as f64;
        Row::new(name, coeffs, Sense::Le, rhs)
    }
}

/// Cut generated at `(x_p, y_p)` regardless of violation.
pub fn build_cut(inst: &ProductionInstance, bounds: &InstanceBounds, p: usize, x_p: &[f64], y_p: &[usize]) -> Result<OptimalityCut> {
    let d = infer_distribution(inst, p, y_p)?;
    let part = partition(inst, p, d, x_p)?;
    let dist = inst.distribution(p, d)?;
    let (price, salvage) = (inst.price[p], inst.salvage[p]);
    let nf = inst.num_facilities();
    let mut coeffs = vec![0.0; nf];
    let mut constant = 0.0;
    for &s in &part.down {
        let sc = &dist.scenarios[s];
        for f in 0..nf {
            coeffs[f] += sc.probability * price * sc.yields[f];
        }
    }
    for &s in &part.up {
        let sc = &dist.scenarios[s];
        for f in 0..nf {
            coeffs[f] += sc.probability * salvage * sc.yields[f];
        }
        constant += sc.probability * (price - salvage) * sc.demand;
    }
    Ok(OptimalityCut {
        product: p,
        distribution: d,
        coeffs,
        constant,
        big_m: bounds.revenue_cap[p],
        levels: dist.enforced_level.clone(),
        partition: part,
        origin: x_p.to_vec(),
    })
}

/// Returns a cut when `μ̄_p` overestimates `Q_p` at the candidate.
pub fn separate_cut(inst: &ProductionInstance, bounds: &InstanceBounds, p: usize, candidate: &MasterSolution) -> Result<Option<OptimalityCut>> {
    let d = infer_distribution(inst, p, &candidate.levels[p])?;
    let q = expected_revenue_under(inst, p, d, &candidate.x[p])?;
    if candidate.mu[p] > q + CUT_VIOLATION_TOL * (1.0 + q.abs()) {
        Ok(Some(build_cut(inst, bounds, p, &candidate.x[p], &candidate.levels[p])?))
    } else {
        Ok(None)
    }
}

#[derive(Clone, Debug)]
pub struct BendersOptions {
    /// Relative optimality tolerance.
    pub epsilon: f64,
    pub time_limit: Option<Duration>,
    pub vi: ViFlags,
    pub execution: Execution,
}

impl Default for BendersOptions {
    fn default() -> Self {
        BendersOptions {
            epsilon: 1e-4,
            time_limit: Some(Duration::from_secs(1800)),
            vi: ViFlags::NONE,
            execution: Execution::Sequential,
        }
    }
}

/// One row of the iteration log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub k: usize,
    pub v_rmp: f64,
    pub v_mp: f64,
    pub v_best: f64,
    pub gap: f64,
    pub cuts_added: usize,
    pub elapsed_seconds: f64,
}

#[derive(Clone, Debug)]
pub struct BendersState {
    pub iterations: Vec<IterationRecord>,
    pub cuts: Vec<OptimalityCut>,
    pub v_best: f64,
    pub v_rmp: f64,
    pub gap: f64,
    /// Bound of the first master solve.
    pub root_bound: Option<f64>,
    pub status: SolveStatus,
    pub elapsed: Duration,
    pub nodes: u64,
    pub simplex_iterations: u64,
}

#[derive(Clone, Debug)]
pub struct BendersOutcome {
    pub solution: MasterSolution,
    pub state: BendersState,
}

/// Relative gap with an absolute fallback for nonpositive bounds, never
/// negative.
pub fn relative_gap(v_rmp: f64, v_best: f64) -> f64 {
    let g = if v_rmp > 0.0 { (v_rmp - v_best) / v_rmp } else { v_rmp - v_best };
    g.max(0.0)
}

/// The all-zero plan, which is always feasible.
pub fn zero_plan(inst: &ProductionInstance) -> MasterSolution {
    let mut sol = MasterSolution::zero(inst);
    for p in 0..inst.num_products() {
        for f in 0..inst.num_facilities() {
            sol.levels[p][f] = inst.levels[p][f].iter().position(|l| l.lower == 0.0).unwrap_or(0);
        }
    }
    sol
}

fn remaining(deadline: Option<Instant>) -> Option<Duration> {
    deadline.map(|d| d.saturating_duration_since(Instant::now()))
}

fn status_for_gap(gap: f64, epsilon: f64) -> SolveStatus {
    if gap <= 1e-9 {
        SolveStatus::Optimal
    } else if gap <= epsilon {
        SolveStatus::GapLimit
    } else {
        SolveStatus::TimeLimit
    }
}

/// Iterative scheme: solve the master, evaluate the candidate exactly, add at
/// most one new cut per product, repeat.
pub fn solve_iterative(inst: &ProductionInstance, opts: &BendersOptions) -> Result<BendersOutcome> {
    let start = Instant::now();
    let deadline = opts.time_limit.map(|t| start + t);
    let mut rmp = build_rmp(inst, opts.vi)?;
    let np = inst.num_products();
    let mut pool: HashSet<CutKey> = HashSet::new();
    let mut best = zero_plan(inst);
    let mut state = BendersState {
        iterations: Vec::new(),
        cuts: Vec::new(),
        v_best: 0.0,
        v_rmp: f64::INFINITY,
        gap: f64::INFINITY,
        root_bound: None,
        status: SolveStatus::TimeLimit,
        elapsed: Duration::ZERO,
        nodes: 0,
        simplex_iterations: 0,
    };
    let products: Vec<usize> = (0..np).collect();

    for k in 1.. {
        if remaining(deadline).is_some_and(|r| r.is_zero()) && k > 1 {
            state.status = SolveStatus::TimeLimit;
            break;
        }
        let mip = MipOptions { rel_gap: opts.epsilon, time_limit: remaining(deadline), ..MipOptions::default() };
        let res = solve_mip(&rmp.model, None, &mip)?;
        state.nodes += res.stats.nodes;
        state.simplex_iterations += res.stats.simplex_iterations;
        if res.bound.is_finite() {
            state.v_rmp = state.v_rmp.min(res.bound);
        }
        if k == 1 && res.bound.is_finite() {
            state.root_bound = Some(res.bound);
        }
        if !res.has_solution() {
            if res.status == SolveStatus::TimeLimit {
                state.status = SolveStatus::TimeLimit;
                state.gap = relative_gap(state.v_rmp, state.v_best);
                break;
            }
            return Err(Error::Solver(format!("master problem ended with {:?}", res.status)));
        }
        let cand = rmp.extract(&res.x);
        let v_mp = evaluate_full(inst, &cand.x, &cand.levels)?;
        if v_mp > state.v_best {
            state.v_best = v_mp;
            best = MasterSolution { objective: v_mp, ..cand.clone() };
        }
        let found = opts.execution.map(&products, |&p| separate_cut(inst, &rmp.bounds, p, &cand));
        let mut added = 0;
        for cut in found {
            if let Some(cut) = cut? {
                if pool.insert(cut.key()) {
                    let row = cut.to_row(&rmp, format!("cut_{}", state.cuts.len()));
                    rmp.model.add_row(row);
                    state.cuts.push(cut);
                    added += 1;
                }
            }
        }
        state.gap = relative_gap(state.v_rmp, state.v_best);
        state.iterations.push(IterationRecord {
            k,
            v_rmp: state.v_rmp,
            v_mp,
            v_best: state.v_best,
            gap: state.gap,
            cuts_added: added,
            elapsed_seconds: start.elapsed().as_secs_f64(),
        });
        if res.status == SolveStatus::TimeLimit {
            state.status = SolveStatus::TimeLimit;
            break;
        }
        if added == 0 || state.gap <= opts.epsilon {
            state.status = status_for_gap(state.gap, opts.epsilon);
            if added == 0 && state.status == SolveStatus::TimeLimit {
                // Every candidate revenue is exact, so the master bound is
                // only loose by its own MIP tolerance.
                state.status = SolveStatus::GapLimit;
            }
            break;
        }
        if deadline.is_some_and(|d| Instant::now() >= d) {
            state.status = SolveStatus::TimeLimit;
            break;
        }
    }
    state.elapsed = start.elapsed();
    Ok(BendersOutcome { solution: best, state })
}

/// Single branch-and-bound over the master; integer candidates are checked
/// in a callback that returns violated cuts for all products.
pub fn solve_branch_and_cut(inst: &ProductionInstance, opts: &BendersOptions) -> Result<BendersOutcome> {
    let start = Instant::now();
    let rmp = build_rmp(inst, opts.vi)?;
    let np = inst.num_products();
    let mut pool: HashSet<CutKey> = HashSet::new();
    let mut cuts: Vec<OptimalityCut> = Vec::new();
    let mut log: Vec<IterationRecord> = Vec::new();
    let mut failure: Option<Error> = None;
    let mut v_best: f64 = 0.0;

    let mut callback = |c: &IncumbentCandidate<'_>| -> Vec<Row> {
        let cand = rmp.extract(c.x);
        let mut rows = Vec::new();
        let v_mp = match evaluate_full(inst, &cand.x, &cand.levels) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                return rows;
            }
        };
        for p in 0..np {
            match separate_cut(inst, &rmp.bounds, p, &cand) {
                Ok(Some(cut)) => {
                    if pool.insert(cut.key()) {
                        rows.push(cut.to_row(&rmp, format!("cut_{}", cuts.len())));
                        cuts.push(cut);
                    }
                }
                Ok(None) => {}
                Err(e) => {
                    failure.get_or_insert(e);
                }
            }
        }
        if rows.is_empty() {
            v_best = v_best.max(v_mp);
        }
        log.push(IterationRecord {
            k: log.len() + 1,
            v_rmp: c.bound,
            v_mp,
            v_best,
            gap: relative_gap(c.bound, v_best),
            cuts_added: rows.len(),
            elapsed_seconds: start.elapsed().as_secs_f64(),
        });
        rows
    };
    let mip = MipOptions { rel_gap: opts.epsilon, time_limit: opts.time_limit, ..MipOptions::default() };
    let res = solve_mip(&rmp.model, Some(&mut callback), &mip)?;
    if let Some(e) = failure {
        return Err(e);
    }

    let mut solution = zero_plan(inst);
    let mut v = 0.0;
    if res.has_solution() {
        let cand = rmp.extract(&res.x);
        v = evaluate_full(inst, &cand.x, &cand.levels)?;
        if v >= 0.0 {
            solution = MasterSolution { objective: v, ..cand };
        } else {
            v = 0.0;
        }
    }
    let bound = res.bound.max(v);
    let gap = relative_gap(bound, v);
    let status = match res.status {
        SolveStatus::TimeLimit => SolveStatus::TimeLimit,
        _ => status_for_gap(gap, opts.epsilon.max(1e-9)),
    };
    let state = BendersState {
        iterations: log,
        cuts,
        v_best: v,
        v_rmp: bound,
        gap,
        root_bound: res.bound_trace.first().map(|s| s.bound),
        status,
        elapsed: start.elapsed(),
        nodes: res.stats.nodes,
        simplex_iterations: res.stats.simplex_iterations,
    };
    Ok(BendersOutcome { solution, state })
}

/// Optimal value of the master problem without cuts.
pub fn root_bound(inst: &ProductionInstance, vi: ViFlags) -> Result<f64> {
    let rmp = build_rmp(inst, vi)?;
    let res = solve_mip(&rmp.model, None, &MipOptions { rel_gap: 0.0, ..MipOptions::default() })?;
    if !res.is_solved() {
        return Err(Error::Solver(format!("master problem ended with {:?}", res.status)));
    }
    Ok(res.objective)
}
