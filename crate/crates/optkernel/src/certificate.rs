//! Independent checks of solver output against the original model.

use crate::model::{LinearModel, Sense};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DualityReport {
    pub primal_objective: f64,
    pub dual_objective: f64,
    /// Largest row or bound violation of the primal point.
    pub primal_infeasibility: f64,
    /// Largest sign violation of row duals or of reduced costs against
    /// infinite bounds.
    pub dual_infeasibility: f64,
}

impl DualityReport {
    pub fn gap(&self) -> f64 {
        self.dual_objective - self.primal_objective
    }

    /// Both feasibilities within `feas_tol` and `|gap| <= gap_tol (1 + |primal|)`.
    pub fn holds(&self, feas_tol: f64, gap_tol: f64) -> bool {
        self.primal_infeasibility <= feas_tol
            && self.dual_infeasibility <= feas_tol
            && self.gap().abs() <= gap_tol * (1.0 + self.primal_objective.abs())
    }
}

/// Evaluates a primal point and row duals `y` (with `d = c - y A`) of a
/// maximization model.
pub fn duality_report(model: &LinearModel, x: &[f64], y: &[f64]) -> DualityReport {
    let mut d: Vec<f64> = model.vars().iter().map(|v| v.obj).collect();
    let mut dual_obj = 0.0;
    let mut dual_inf: f64 = 0.0;
    for (row, &yi) in model.rows().iter().zip(y) {
        for &(v, a) in &row.coeffs {
            d[v.0] -= yi * a;
        }
        dual_obj += yi * row.rhs;
        let wrong_sign = match row.sense {
            Sense::Le => (-yi).max(0.0),
            Sense::Ge => yi.max(0.0),
            Sense::Eq => 0.0,
        };
        dual_inf = dual_inf.max(wrong_sign);
    }
    for (var, &dj) in model.vars().iter().zip(&d) {
        if dj > 0.0 {
            if var.upper.is_finite() {
                dual_obj += dj * var.upper;
            } else {
                dual_inf = dual_inf.max(dj);
            }
        } else if dj < 0.0 {
            if var.lower.is_finite() {
                dual_obj += dj * var.lower;
            } else {
                dual_inf = dual_inf.max(-dj);
            }
        }
    }
    DualityReport {
        primal_objective: model.objective_value(x),
        dual_objective: dual_obj,
        primal_infeasibility: model.max_violation(x),
        dual_infeasibility: dual_inf,
    }
}

/// Checks that row multipliers `y` prove infeasibility: the combination
/// `(y A) x - y r` is bounded away from zero over the variable box and the
/// row ranges, while every feasible point would make it zero.
pub fn verify_farkas(model: &LinearModel, y: &[f64]) -> bool {
    let scale = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 || y.len() != model.num_rows() {
        return false;
    }
    // Multipliers at round-off level are cleaned to zero; the check below is
    // then exact for the cleaned vector.
    let y: Vec<f64> = y
        .iter()
        .map(|v| v / scale)
        .map(|v| if v.abs() <= 1e-11 { 0.0 } else { v })
        .collect();
    let mut g = vec![0.0; model.num_vars()];
    for (row, &yi) in model.rows().iter().zip(&y) {
        for &(v, a) in &row.coeffs {
            g[v.0] += yi * a;
        }
    }
    let gmax = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let zero = 1e-11 * (1.0 + gmax);
    let (mut lo, mut hi) = (0.0, 0.0);
    for (var, &gj) in model.vars().iter().zip(&g) {
        if gj.abs() <= zero {
            continue;
        }
        let (a, b) = (gj * var.lower, gj * var.upper);
        let (mn, mx) = if gj > 0.0 { (a, b) } else { (b, a) };
        lo += if mn.is_nan() { f64::NEG_INFINITY } else { mn };
        hi += if mx.is_nan() { f64::INFINITY } else { mx };
    }
    for (row, &yi) in model.rows().iter().zip(&y) {
        // range of -y r over the row's admissible activities r
        let v = -yi * row.rhs;
        let (mn, mx) = match row.sense {
            Sense::Eq => (v, v),
            Sense::Le if yi >= 0.0 => (v, f64::INFINITY),
            Sense::Le => (f64::NEG_INFINITY, v),
            Sense::Ge if yi <= 0.0 => (v, f64::INFINITY),
            Sense::Ge => (f64::NEG_INFINITY, v),
        };
        if yi == 0.0 {
            continue;
        }
        lo += mn;
        hi += mx;
    }
    let tol = 1e-7;
    lo > tol || hi < -tol
}

/// Checks that `ray` is a recession direction of the feasible region with
/// strictly positive objective slope.
pub fn verify_ray(model: &LinearModel, ray: &[f64]) -> bool {
    if ray.len() != model.num_vars() {
        return false;
    }
    let norm = ray.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if norm == 0.0 {
        return false;
    }
    let r: Vec<f64> = ray.iter().map(|v| v / norm).collect();
    let tol = 1e-7;
    for (var, &rj) in model.vars().iter().zip(&r) {
        if (var.upper.is_finite() && rj > tol) || (var.lower.is_finite() && rj < -tol) {
            return false;
        }
    }
    for row in model.rows() {
        let a = row.activity(&r);
        let ok = match row.sense {
            Sense::Le => a <= tol,
            Sense::Ge => a >= -tol,
            Sense::Eq => a.abs() <= tol,
        };
        if !ok {
            return false;
        }
    }
    model.objective_value(&r) > tol
}
