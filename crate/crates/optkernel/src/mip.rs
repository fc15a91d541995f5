//! Best-first branch-and-bound over binary variables with an incumbent
//! callback that may reject integer-feasible points by returning rows.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::rc::Rc;
use std::time::{Duration, Instant};

use crate::error::KernelError;
use crate::lp::solve_lp_with;
use crate::model::{LinearModel, Row, VarKind};
use crate::result::{BoundSample, SolveResult, SolveStatus};
use crate::simplex::{Basis, LpOptions, LpStatus, Simplex};

#[derive(Clone, Debug)]
pub struct MipOptions {
    /// Nodes whose bound is within this relative gap of the incumbent are pruned.
    pub rel_gap: f64,
    pub int_tol: f64,
    pub time_limit: Option<Duration>,
    pub node_limit: Option<u64>,
    pub lp: LpOptions,
}

impl Default for MipOptions {
    fn default() -> Self {
        MipOptions {
            rel_gap: 1e-6,
            int_tol: 1e-6,
            time_limit: None,
            node_limit: None,
            lp: LpOptions::default(),
        }
    }
}

/// An integer-feasible LP optimum offered to the callback.
#[derive(Debug)]
pub struct IncumbentCandidate<'a> {
    pub x: &'a [f64],
    pub objective: f64,
    /// Global bound at the time the candidate was found.
    pub bound: f64,
    pub node: u64,
}

pub type IncumbentCallback<'c> = dyn FnMut(&IncumbentCandidate<'_>) -> Vec<Row> + 'c;

struct Node {
    bound: f64,
    seq: u64,
    fixes: Vec<(usize, f64)>,
    basis: Option<Rc<Basis>>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        self.bound
            .total_cmp(&other.bound)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

fn abs_tol(v: f64) -> f64 {
    1e-9 * (1.0 + v.abs())
}

/// Solves `model` with its binary variables enforced. Without binaries and
/// without a callback this is exactly `solve_lp_with(model, &opts.lp)`.
pub fn solve_mip(
    model: &LinearModel,
    mut callback: Option<&mut IncumbentCallback<'_>>,
    opts: &MipOptions,
) -> Result<SolveResult, KernelError> {
    model.validate()?;
    let start = Instant::now();
    let deadline = opts.time_limit.map(|t| start + t);
    let mut lp_opts = opts.lp.clone();
    lp_opts.deadline = match (lp_opts.deadline, deadline) {
        (Some(a), Some(b)) => Some(a.min(b)),
        (a, b) => a.or(b),
    };

    if model.num_binaries() == 0 && callback.is_none() {
        let mut res = solve_lp_with(model, &lp_opts)?;
        res.stats.nodes = 1;
        res.bound_trace.push(BoundSample {
            nodes: 1,
            bound: res.bound,
            incumbent: res.has_solution().then_some(res.objective),
        });
        return Ok(res);
    }

    let binaries: Vec<usize> = model
        .vars()
        .iter()
        .enumerate()
        .filter(|(_, v)| v.kind == VarKind::Binary)
        .map(|(j, _)| j)
        .collect();
    let base_lower: Vec<f64> = model.vars().iter().map(|v| v.lower).collect();
    let base_upper: Vec<f64> = model.vars().iter().map(|v| v.upper).collect();

    let mut work = model.clone();
    let mut lazy_rows: Vec<Row> = Vec::new();
    let mut heap = BinaryHeap::new();
    let mut seq = 0u64;
    heap.push(Node {
        bound: f64::INFINITY,
        seq,
        fixes: Vec::new(),
        basis: None,
    });
    let mut incumbent: Option<(f64, Vec<f64>)> = None;
    let mut gap_pruned = f64::NEG_INFINITY;
    let mut nodes = 0u64;
    let mut iterations = 0u64;
    let mut trace = Vec::new();
    let mut stopped = false;
    let mut unbounded_ray = None;

    let inc_value = |inc: &Option<(f64, Vec<f64>)>| inc.as_ref().map(|(v, _)| *v);
    let prunable = |bound: f64, inc: Option<f64>| match inc {
        Some(v) => bound <= v + abs_tol(v).max(opts.rel_gap * v.abs()),
        None => false,
    };

    while let Some(node) = heap.pop() {
        let inc = inc_value(&incumbent);
        if prunable(node.bound, inc) {
            if node.bound > inc.unwrap() + abs_tol(inc.unwrap()) {
                gap_pruned = gap_pruned.max(node.bound);
            }
            continue;
        }
        let out_of_time = deadline.is_some_and(|d| Instant::now() >= d);
        let out_of_nodes = opts.node_limit.is_some_and(|l| nodes >= l);
        if nodes > 0 && (out_of_time || out_of_nodes) {
            heap.push(node);
            stopped = true;
            break;
        }
        nodes += 1;

        let mut lower = base_lower.clone();
        let mut upper = base_upper.clone();
        for &(j, v) in &node.fixes {
            lower[j] = v;
            upper[j] = v;
        }
        let mut basis = node.basis.clone();
        'node: loop {
            let mut lp = Simplex::new(&work, &lower, &upper, &lp_opts);
            if let Some(b) = &basis {
                lp.warm_start(b);
            }
            let status = lp.solve();
            iterations += lp.iterations;
            match status {
                LpStatus::Infeasible => break 'node,
                LpStatus::TimeLimit | LpStatus::IterationLimit => {
                    heap.push(Node { bound: node.bound, seq: node.seq, fixes: node.fixes.clone(), basis: node.basis.clone() });
                    stopped = true;
                    break 'node;
                }
                LpStatus::Unbounded => {
                    unbounded_ray = lp.take_ray();
                    stopped = true;
                    break 'node;
                }
                LpStatus::Optimal => {}
            }
            let x = lp.primal();
            let obj = lp.objective();
            let inc = inc_value(&incumbent);
            if prunable(obj, inc) {
                if obj > inc.unwrap() + abs_tol(inc.unwrap()) {
                    gap_pruned = gap_pruned.max(obj);
                }
                break 'node;
            }
            let branch = most_fractional(&x, &binaries, opts.int_tol);
            if let Some(j) = branch {
                let parent = Some(Rc::new(lp.basis()));
                for v in [0.0, 1.0] {
                    seq += 1;
                    let mut fixes = node.fixes.clone();
                    fixes.push((j, v));
                    heap.push(Node { bound: obj, seq, fixes, basis: parent.clone() });
                }
                break 'node;
            }
            let mut x = x;
            for &j in &binaries {
                x[j] = x[j].round();
            }
            if let Some(cb) = callback.as_deref_mut() {
                let open = heap.peek().map_or(f64::NEG_INFINITY, |n| n.bound);
                let bound = open.max(obj).max(gap_pruned);
                let rows = cb(&IncumbentCandidate { x: &x, objective: obj, bound, node: nodes });
                if !rows.is_empty() {
                    basis = Some(Rc::new(lp.basis()));
                    for r in rows {
                        work.add_row(r.clone());
                        lazy_rows.push(r);
                    }
                    work.validate()?;
                    if deadline.is_some_and(|d| Instant::now() >= d) {
                        heap.push(Node { bound: obj, seq: node.seq, fixes: node.fixes.clone(), basis });
                        stopped = true;
                        break 'node;
                    }
                    continue 'node;
                }
            }
            if inc.is_none_or(|v| obj > v) {
                incumbent = Some((obj, x));
            }
            break 'node;
        }
        if unbounded_ray.is_some() {
            break;
        }

        let inc = inc_value(&incumbent);
        let open = heap.peek().map_or(f64::NEG_INFINITY, |n| n.bound);
        let global = open.max(gap_pruned).max(inc.unwrap_or(f64::NEG_INFINITY));
        trace.push(BoundSample { nodes, bound: global, incumbent: inc });
        if stopped {
            break;
        }
    }

    let mut res = if let Some(ray) = unbounded_ray {
        let mut r = SolveResult::empty(SolveStatus::Unbounded);
        r.ray = Some(ray);
        r
    } else {
        let inc = inc_value(&incumbent);
        let open = heap.peek().map_or(f64::NEG_INFINITY, |n| n.bound);
        let bound = open.max(gap_pruned).max(inc.unwrap_or(f64::NEG_INFINITY));
        let status = if stopped {
            SolveStatus::TimeLimit
        } else if let Some(v) = inc {
            if bound <= v + abs_tol(v) {
                SolveStatus::Optimal
            } else {
                SolveStatus::GapLimit
            }
        } else {
            SolveStatus::Infeasible
        };
        let mut r = SolveResult::empty(status);
        r.bound = bound;
        if let Some((v, x)) = incumbent {
            r.objective = v;
            r.x = x;
        }
        r
    };
    // Keep the trace monotone even after the final gap-pruned bookkeeping.
    let mut running = f64::INFINITY;
    for s in &mut trace {
        running = running.min(s.bound);
        s.bound = running;
    }
    if res.status != SolveStatus::Unbounded && res.bound > running {
        res.bound = running.max(res.objective);
    }
    res.lazy_rows = lazy_rows;
    res.bound_trace = trace;
    res.stats.nodes = nodes;
    res.stats.simplex_iterations = iterations;
    res.stats.lazy_rows_added = res.lazy_rows.len();
    res.stats.wall_seconds = start.elapsed().as_secs_f64();
    Ok(res)
}

/// Binary with the largest distance to the nearest integer; ties go to the
/// lowest index.
fn most_fractional(x: &[f64], binaries: &[usize], tol: f64) -> Option<usize> {
    let mut best = None;
    let mut best_frac = tol;
    for &j in binaries {
        let f = (x[j] - x[j].round()).abs();
        if f > best_frac {
            best_frac = f;
            best = Some(j);
        }
    }
    best
}
