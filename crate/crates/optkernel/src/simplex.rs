//! Bounded-variable primal simplex.
//!
//! Rows are scaled by their largest absolute coefficient and every row gets a
//! logical variable `s_i = a_i x` carrying the row sense as bounds, so the
//! internal system is `-A x + s = 0` over a box. Phase one minimizes the sum of
//! bound violations of basic variables (composite method); it starts from any
//! supplied basis, which is how branch-and-bound warm starts child nodes.

use std::time::Instant;

use crate::factor::EtaFile;
use crate::model::{LinearModel, Sense};

const NONE: usize = usize::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BasisStatus {
    Basic,
    AtLower,
    AtUpper,
    /// Nonbasic free variable resting at zero.
    Free,
}

/// Status of every structural variable followed by every row logical.
#[derive(Clone, Debug, PartialEq)]
pub struct Basis {
    pub(crate) status: Vec<BasisStatus>,
    pub(crate) num_structural: usize,
}

impl Basis {
    pub fn statuses(&self) -> &[BasisStatus] {
        &self.status
    }

    /// Pads the basis for rows appended to the model; new logicals are basic.
    pub(crate) fn with_rows(&self, num_rows: usize) -> Basis {
        let mut status = self.status.clone();
        status.resize(self.num_structural + num_rows, BasisStatus::Basic);
        Basis {
            status,
            num_structural: self.num_structural,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LpOptions {
    /// Primal feasibility tolerance on scaled rows and on bounds.
    pub primal_tol: f64,
    /// Reduced-cost tolerance, relative to the largest objective coefficient.
    pub dual_tol: f64,
    pub pivot_tol: f64,
    /// Pivots between refactorizations of the basis.
    pub refactor_every: usize,
    /// Consecutive degenerate pivots before switching to Bland's rule.
    pub bland_after: usize,
    pub max_iterations: Option<u64>,
    pub deadline: Option<Instant>,
}

impl Default for LpOptions {
    fn default() -> Self {
        LpOptions {
            primal_tol: 1e-9,
            dual_tol: 1e-9,
            pivot_tol: 1e-9,
            refactor_every: 100,
            bland_after: 5000,
            max_iterations: None,
            deadline: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    TimeLimit,
    IterationLimit,
}

pub(crate) struct Simplex<'o> {
    n: usize,
    m: usize,
    col_start: Vec<usize>,
    col_idx: Vec<usize>,
    col_val: Vec<f64>,
    cost: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    row_scale: Vec<f64>,
    x: Vec<f64>,
    status: Vec<BasisStatus>,
    basis: Vec<usize>,
    position: Vec<usize>,
    factor: EtaFile,
    updates: usize,
    dual_tol: f64,
    pub(crate) iterations: u64,
    ray: Option<Vec<f64>>,
    phase_one_duals: Option<Vec<f64>>,
    opts: &'o LpOptions,
}

impl<'o> Simplex<'o> {
    /// Builds the internal problem using `lower`/`upper` in place of the
    /// model's own variable bounds.
    pub(crate) fn new(model: &LinearModel, lower: &[f64], upper: &[f64], opts: &'o LpOptions) -> Self {
        let n = model.num_vars();
        let m = model.num_rows();
        let mut row_scale = vec![1.0; m];
        let mut counts = vec![0usize; n];
        for (i, row) in model.rows().iter().enumerate() {
            let amax = row.coeffs.iter().map(|&(_, a)| a.abs()).fold(0.0, f64::max);
            if amax > 0.0 {
                row_scale[i] = 1.0 / amax;
            }
            for &(v, a) in &row.coeffs {
                if a != 0.0 {
                    counts[v.0] += 1;
                }
            }
        }
        let mut col_start = vec![0usize; n + 1];
        for j in 0..n {
            col_start[j + 1] = col_start[j] + counts[j];
        }
        let nnz = col_start[n];
        let mut col_idx = vec![0usize; nnz];
        let mut col_val = vec![0.0; nnz];
        let mut fill = col_start.clone();
        for (i, row) in model.rows().iter().enumerate() {
            for &(v, a) in &row.coeffs {
                if a != 0.0 {
                    let k = fill[v.0];
                    col_idx[k] = i;
                    col_val[k] = -a * row_scale[i];
                    fill[v.0] += 1;
                }
            }
        }

        let mut cost = Vec::with_capacity(n + m);
        cost.extend(model.vars().iter().map(|v| v.obj));
        cost.resize(n + m, 0.0);
        let mut lo = lower.to_vec();
        let mut hi = upper.to_vec();
        for (i, row) in model.rows().iter().enumerate() {
            let b = row.rhs * row_scale[i];
            let (l, u) = match row.sense {
                Sense::Le => (f64::NEG_INFINITY, b),
                Sense::Ge => (b, f64::INFINITY),
                Sense::Eq => (b, b),
            };
            lo.push(l);
            hi.push(u);
        }
        let cmax = cost.iter().map(|c| c.abs()).fold(1.0, f64::max);

        let mut status = Vec::with_capacity(n + m);
        for j in 0..n {
            status.push(if lo[j].is_finite() {
                BasisStatus::AtLower
            } else if hi[j].is_finite() {
                BasisStatus::AtUpper
            } else {
                BasisStatus::Free
            });
        }
        status.resize(n + m, BasisStatus::Basic);

        Simplex {
            n,
            m,
            col_start,
            col_idx,
            col_val,
            cost,
            lower: lo,
            upper: hi,
            row_scale,
            x: vec![0.0; n + m],
            status,
            basis: vec![NONE; m],
            position: vec![NONE; n + m],
            factor: EtaFile::default(),
            updates: 0,
            dual_tol: opts.dual_tol * cmax,
            iterations: 0,
            ray: None,
            phase_one_duals: None,
            opts,
        }
    }

    pub(crate) fn warm_start(&mut self, basis: &Basis) {
        let b = basis.with_rows(self.m);
        if basis.num_structural != self.n {
            return;
        }
        self.status = b.status;
    }

    pub(crate) fn basis(&self) -> Basis {
        Basis {
            status: self.status.clone(),
            num_structural: self.n,
        }
    }

    /// Sparse structural column `j < n`.
    fn column(&self, j: usize) -> (&[usize], &[f64]) {
        let r = self.col_start[j]..self.col_start[j + 1];
        (&self.col_idx[r.clone()], &self.col_val[r])
    }

    fn scatter_column(&self, j: usize, out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        if j < self.n {
            let (idx, val) = self.column(j);
            for (&i, &a) in idx.iter().zip(val) {
                out[i] += a;
            }
        } else {
            out[j - self.n] = 1.0;
        }
    }

    fn column_dot(&self, j: usize, v: &[f64]) -> f64 {
        if j < self.n {
            let (idx, val) = self.column(j);
            idx.iter().zip(val).map(|(&i, &a)| a * v[i]).sum()
        } else {
            v[j - self.n]
        }
    }

    fn column_nnz(&self, j: usize) -> usize {
        if j < self.n {
            self.col_start[j + 1] - self.col_start[j]
        } else {
            1
        }
    }

    fn nonbasic_value(&self, j: usize) -> f64 {
        match self.status[j] {
            BasisStatus::AtLower => self.lower[j],
            BasisStatus::AtUpper => self.upper[j],
            BasisStatus::Free | BasisStatus::Basic => 0.0,
        }
    }

    /// Makes nonbasic statuses consistent with the (possibly changed) bounds.
    fn sanitize_statuses(&mut self) {
        for j in 0..self.n + self.m {
            let (l, u) = (self.lower[j], self.upper[j]);
            self.status[j] = match self.status[j] {
                BasisStatus::Basic => BasisStatus::Basic,
                s => match (l.is_finite(), u.is_finite()) {
                    (false, false) => BasisStatus::Free,
                    (true, false) => BasisStatus::AtLower,
                    (false, true) => BasisStatus::AtUpper,
                    (true, true) if l == u || s != BasisStatus::AtUpper => BasisStatus::AtLower,
                    (true, true) => BasisStatus::AtUpper,
                },
            };
        }
    }

    fn nearest_bound_status(&self, j: usize) -> BasisStatus {
        let (l, u, v) = (self.lower[j], self.upper[j], self.x[j]);
        match (l.is_finite(), u.is_finite()) {
            (true, true) => {
                if (v - l).abs() <= (u - v).abs() {
                    BasisStatus::AtLower
                } else {
                    BasisStatus::AtUpper
                }
            }
            (true, false) => BasisStatus::AtLower,
            (false, true) => BasisStatus::AtUpper,
            (false, false) => BasisStatus::Free,
        }
    }

    /// Rebuilds the eta file from scratch for the current basic set, dropping
    /// structurals that turn out linearly dependent and patching the gaps
    /// with row logicals.
    fn reinvert(&mut self) {
        self.factor.clear();
        self.updates = 0;
        self.basis.iter_mut().for_each(|b| *b = NONE);
        self.position.iter_mut().for_each(|p| *p = NONE);
        let mut taken = vec![false; self.m];
        for i in 0..self.m {
            if self.status[self.n + i] == BasisStatus::Basic {
                self.basis[i] = self.n + i;
                self.position[self.n + i] = i;
                taken[i] = true;
            }
        }
        let mut structurals: Vec<usize> =
            (0..self.n).filter(|&j| self.status[j] == BasisStatus::Basic).collect();
        structurals.sort_by_key(|&j| (self.column_nnz(j), j));
        let mut work = vec![0.0; self.m];
        for j in structurals {
            self.scatter_column(j, &mut work);
            self.factor.ftran(&mut work);
            let mut best = NONE;
            let mut best_abs = 0.0;
            for (r, &v) in work.iter().enumerate() {
                if !taken[r] && v.abs() > best_abs {
                    best_abs = v.abs();
                    best = r;
                }
            }
            if best == NONE || best_abs < 1e-9 {
                self.status[j] = self.nearest_bound_status(j);
                continue;
            }
            self.factor.push(best, &work);
            self.basis[best] = j;
            self.position[j] = best;
            taken[best] = true;
        }
        for r in 0..self.m {
            if !taken[r] {
                let s = self.n + r;
                self.status[s] = BasisStatus::Basic;
                self.basis[r] = s;
                self.position[s] = r;
            }
        }
    }

    fn recompute_primal(&mut self) {
        let mut rhs = vec![0.0; self.m];
        for j in 0..self.n + self.m {
            if self.status[j] == BasisStatus::Basic {
                continue;
            }
            let v = self.nonbasic_value(j);
            self.x[j] = v;
            if v != 0.0 {
                if j < self.n {
                    let (idx, val) = self.column(j);
                    for (&i, &a) in idx.iter().zip(val) {
                        rhs[i] -= a * v;
                    }
                } else {
                    rhs[j - self.n] -= v;
                }
            }
        }
        self.factor.ftran(&mut rhs);
        for (i, &v) in rhs.iter().enumerate() {
            self.x[self.basis[i]] = v;
        }
    }

    /// Fills basic costs for the current phase; returns true in phase one.
    fn phase_costs(&self, cb: &mut [f64]) -> bool {
        let tol = self.opts.primal_tol;
        let mut infeasible = false;
        for (i, c) in cb.iter_mut().enumerate() {
            let b = self.basis[i];
            let v = self.x[b];
            *c = if v < self.lower[b] - tol {
                infeasible = true;
                1.0
            } else if v > self.upper[b] + tol {
                infeasible = true;
                -1.0
            } else {
                0.0
            };
        }
        if !infeasible {
            for (i, c) in cb.iter_mut().enumerate() {
                *c = self.cost[self.basis[i]];
            }
        }
        infeasible
    }

    /// Bound at which basic variable `b`, moving at rate `g`, stops the
    /// step. Infeasible basics stop at the bound they violate when moving
    /// toward it and never stop when moving away.
    fn block_target(&self, b: usize, g: f64) -> Option<f64> {
        let tol = self.opts.primal_tol;
        let (v, l, u) = (self.x[b], self.lower[b], self.upper[b]);
        let t = if g > 0.0 {
            if v < l - tol {
                l
            } else if v > u + tol {
                return None;
            } else {
                u
            }
        } else if v > u + tol {
            u
        } else if v < l - tol {
            return None;
        } else {
            l
        };
        t.is_finite().then_some(t)
    }

    fn price(&self, pi: &[f64], phase_one: bool, bland: bool) -> Option<(usize, f64)> {
        let tol = if phase_one { 1e-9 } else { self.dual_tol };
        let mut best: Option<(usize, f64)> = None;
        let mut best_abs = 0.0;
        for j in 0..self.n + self.m {
            let st = self.status[j];
            if st == BasisStatus::Basic || self.lower[j] == self.upper[j] {
                continue;
            }
            let c = if phase_one { 0.0 } else { self.cost[j] };
            let d = c - self.column_dot(j, pi);
            let dir = match st {
                BasisStatus::AtLower if d > tol => 1.0,
                BasisStatus::AtUpper if d < -tol => -1.0,
                BasisStatus::Free if d.abs() > tol => d.signum(),
                _ => continue,
            };
            if bland {
                return Some((j, dir));
            }
            if d.abs() > best_abs {
                best_abs = d.abs();
                best = Some((j, dir));
            }
        }
        best
    }

    pub(crate) fn solve(&mut self) -> LpStatus {
        let tol = self.opts.primal_tol;
        for j in 0..self.n + self.m {
            if self.lower[j] > self.upper[j] + tol {
                return LpStatus::Infeasible;
            }
        }
        self.sanitize_statuses();
        self.reinvert();
        self.recompute_primal();

        let max_iter = self
            .opts
            .max_iterations
            .unwrap_or(10_000 + 50 * (self.n + self.m) as u64);
        let mut cb = vec![0.0; self.m];
        let mut pi = vec![0.0; self.m];
        let mut alpha = vec![0.0; self.m];
        let mut degenerate_run = 0usize;
        let mut bland = false;
        let mut local_iter = 0u64;

        loop {
            if local_iter >= max_iter {
                return LpStatus::IterationLimit;
            }
            if local_iter > 0 && local_iter % 32 == 0 {
                if let Some(d) = self.opts.deadline {
                    if Instant::now() >= d {
                        return LpStatus::TimeLimit;
                    }
                }
            }
            if self.updates >= self.opts.refactor_every {
                self.reinvert();
                self.recompute_primal();
            }
            let phase_one = self.phase_costs(&mut cb);
            pi.copy_from_slice(&cb);
            self.factor.btran(&mut pi);

            let Some((q, dir)) = self.price(&pi, phase_one, bland) else {
                if self.updates > 0 {
                    self.reinvert();
                    self.recompute_primal();
                    continue;
                }
                if phase_one {
                    self.phase_one_duals = Some(pi.clone());
                    return LpStatus::Infeasible;
                }
                return LpStatus::Optimal;
            };

            self.scatter_column(q, &mut alpha);
            self.factor.ftran(&mut alpha);

            // Harris two-pass ratio test.
            let ptol = self.opts.pivot_tol;
            let flip = self.upper[q] - self.lower[q];
            let mut theta_max = flip;
            for (i, &a) in alpha.iter().enumerate() {
                if a.abs() < ptol {
                    continue;
                }
                let g = -dir * a;
                let b = self.basis[i];
                if let Some(t) = self.block_target(b, g) {
                    theta_max = theta_max.min(((t - self.x[b]) / g).max(0.0) + tol / g.abs());
                }
            }
            if theta_max.is_infinite() {
                if phase_one {
                    // Cannot happen in exact arithmetic; refresh and retry.
                    self.reinvert();
                    self.recompute_primal();
                    bland = true;
                    local_iter += 1;
                    continue;
                }
                let mut ray = vec![0.0; self.n];
                if q < self.n {
                    ray[q] = dir;
                }
                for (i, &a) in alpha.iter().enumerate() {
                    let b = self.basis[i];
                    if b < self.n {
                        ray[b] = -dir * a;
                    }
                }
                self.ray = Some(ray);
                return LpStatus::Unbounded;
            }

            let mut leave: Option<(usize, f64, f64)> = None; // (pos, step, target)
            let mut best_key = f64::NEG_INFINITY;
            for (i, &a) in alpha.iter().enumerate() {
                if a.abs() < ptol {
                    continue;
                }
                let g = -dir * a;
                let b = self.basis[i];
                let v = self.x[b];
                let Some(target) = self.block_target(b, g) else {
                    continue;
                };
                let ratio = ((target - v) / g).max(0.0);
                if ratio <= theta_max {
                    let key = if bland { -(b as f64) } else { g.abs() };
                    if key > best_key {
                        best_key = key;
                        leave = Some((i, ratio, target));
                    }
                }
            }

            let is_flip = match leave {
                None => true,
                Some((_, s, _)) => flip.is_finite() && flip <= theta_max && flip <= s,
            };
            let step = match leave {
                Some((_, s, _)) if !is_flip => s,
                _ => flip,
            };
            if step > 0.0 {
                for (i, &a) in alpha.iter().enumerate() {
                    if a != 0.0 {
                        let b = self.basis[i];
                        self.x[b] -= dir * a * step;
                    }
                }
                self.x[q] += dir * step;
            }
            if is_flip {
                if dir > 0.0 {
                    self.status[q] = BasisStatus::AtUpper;
                    self.x[q] = self.upper[q];
                } else {
                    self.status[q] = BasisStatus::AtLower;
                    self.x[q] = self.lower[q];
                }
            } else {
                let (r, _, target) = leave.expect("ratio test produced a leaving row");
                let b = self.basis[r];
                self.x[b] = target;
                self.status[b] = if target == self.lower[b] {
                    BasisStatus::AtLower
                } else {
                    BasisStatus::AtUpper
                };
                self.position[b] = NONE;
                self.basis[r] = q;
                self.position[q] = r;
                self.status[q] = BasisStatus::Basic;
                self.factor.push(r, &alpha);
                self.updates += 1;
            }

            if step <= 1e-12 {
                degenerate_run += 1;
                if degenerate_run > self.opts.bland_after {
                    bland = true;
                }
            } else {
                degenerate_run = 0;
                bland = false;
            }
            local_iter += 1;
            self.iterations += 1;
        }
    }

    pub(crate) fn primal(&self) -> Vec<f64> {
        self.x[..self.n].to_vec()
    }

    pub(crate) fn objective(&self) -> f64 {
        self.x[..self.n]
            .iter()
            .zip(&self.cost)
            .map(|(x, c)| x * c)
            .sum()
    }

    /// Row duals in model units (`y` with `d = c - y A`).
    pub(crate) fn duals(&self) -> Vec<f64> {
        let mut pi: Vec<f64> = (0..self.m).map(|i| self.cost[self.basis[i]]).collect();
        self.factor.btran(&mut pi);
        self.unscale_row_multipliers(&pi)
    }

    pub(crate) fn reduced_costs(&self, duals: &[f64], model: &LinearModel) -> Vec<f64> {
        let mut d: Vec<f64> = model.vars().iter().map(|v| v.obj).collect();
        for (i, row) in model.rows().iter().enumerate() {
            for &(v, a) in &row.coeffs {
                d[v.0] -= duals[i] * a;
            }
        }
        d
    }

    pub(crate) fn farkas(&self) -> Option<Vec<f64>> {
        self.phase_one_duals
            .as_ref()
            .map(|pi| self.unscale_row_multipliers(pi))
    }

    pub(crate) fn take_ray(&mut self) -> Option<Vec<f64>> {
        self.ray.take()
    }

    fn unscale_row_multipliers(&self, pi: &[f64]) -> Vec<f64> {
        pi.iter()
            .zip(&self.row_scale)
            .map(|(p, s)| -p * s)
            .collect()
    }
}
