use std::time::Duration;

use optkernel::{
    solve_lp, solve_mip, IncumbentCandidate, LinearModel, MipOptions, Row, Sense, SolveStatus,
    VarId,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_binary_program(rng: &mut ChaCha8Rng) -> LinearModel {
    let n = rng.random_range(1..=12);
    let rows = rng.random_range(0..=8);
    let mut m = LinearModel::new();
    for j in 0..n {
        m.add_binary(format!("b{j}"), rng.random_range(-5..=10) as f64);
    }
    for i in 0..rows {
        let coeffs: Vec<(VarId, f64)> = (0..n)
            .filter_map(|j| rng.random_bool(0.6).then(|| (VarId(j), rng.random_range(-4..=6) as f64)))
            .collect();
        let sense = match rng.random_range(0..5) {
            0 => Sense::Ge,
            1 => Sense::Eq,
            _ => Sense::Le,
        };
        m.add_constraint(format!("r{i}"), coeffs, sense, rng.random_range(-2..=8) as f64);
    }
    m
}

fn brute_force(m: &LinearModel) -> Option<f64> {
    let n = m.num_vars();
    let mut best: Option<f64> = None;
    for mask in 0u32..(1 << n) {
        let x: Vec<f64> = (0..n).map(|j| ((mask >> j) & 1) as f64).collect();
        if m.max_violation(&x) <= 1e-9 {
            let v = m.objective_value(&x);
            best = Some(best.map_or(v, |b: f64| b.max(v)));
        }
    }
    best
}

#[test]
fn branch_and_bound_matches_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let opts = MipOptions { rel_gap: 0.0, ..MipOptions::default() };
    for case in 0..200 {
        let m = random_binary_program(&mut rng);
        let r = solve_mip(&m, None, &opts).unwrap();
        match brute_force(&m) {
            None => assert_eq!(r.status, SolveStatus::Infeasible, "case {case}"),
            Some(v) => {
                assert_eq!(r.status, SolveStatus::Optimal, "case {case}");
                assert!((r.objective - v).abs() <= 1e-6, "case {case}: {} vs {v}", r.objective);
                assert!(m.max_violation(&r.x) <= 1e-7);
            }
        }
    }
}

#[test]
fn bound_trace_is_monotone_and_ends_at_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..50 {
        let m = random_binary_program(&mut rng);
        let r = solve_mip(&m, None, &MipOptions::default()).unwrap();
        for w in r.bound_trace.windows(2) {
            assert!(w[1].bound <= w[0].bound + 1e-12);
        }
        if r.is_solved() {
            assert!(r.bound >= r.objective - 1e-9);
        }
    }
}

/// Maximize the sum of binaries subject to a hidden knapsack that is only
/// revealed through the callback.
#[test]
fn callback_rows_are_enforced_on_the_returned_incumbent() {
    let weights = [3.0, 4.0, 2.0, 5.0, 1.0, 6.0];
    let cap = 9.0;
    let mut m = LinearModel::new();
    let vars: Vec<VarId> = (0..weights.len())
        .map(|j| m.add_binary(format!("b{j}"), 1.0 + 0.1 * j as f64))
        .collect();
    let mut offered = 0;
    let mut cb = |c: &IncumbentCandidate<'_>| -> Vec<Row> {
        offered += 1;
        let load: f64 = weights.iter().zip(c.x).map(|(w, x)| w * x).sum();
        if load > cap + 1e-9 {
            vec![Row::new(
                "knap",
                vars.iter().zip(weights).map(|(&v, w)| (v, w)).collect(),
                Sense::Le,
                cap,
            )]
        } else {
            Vec::new()
        }
    };
    let r = solve_mip(&m, Some(&mut cb), &MipOptions::default()).unwrap();
    assert_eq!(r.status, SolveStatus::Optimal);
    let load: f64 = weights.iter().zip(&r.x).map(|(w, x)| w * x).sum();
    assert!(load <= cap + 1e-9);
    assert_eq!(r.lazy_rows.len(), 1);
    assert!(offered >= 2);
    let mut full = m.clone();
    full.add_row(r.lazy_rows[0].clone());
    let exact = solve_mip(&full, None, &MipOptions::default()).unwrap();
    assert!((exact.objective - r.objective).abs() <= 1e-9);
}

#[test]
fn without_binaries_matches_lp() {
    let mut m = LinearModel::new();
    let x = m.add_continuous("x", 0.0, 4.0, 2.0);
    let y = m.add_continuous("y", 0.0, f64::INFINITY, 1.0);
    m.add_constraint("c", vec![(x, 1.0), (y, 1.0)], Sense::Le, 5.0);
    let a = solve_lp(&m).unwrap();
    let b = solve_mip(&m, None, &MipOptions::default()).unwrap();
    assert_eq!(a.status, b.status);
    assert_eq!(a.x, b.x);
    assert_eq!(a.objective, b.objective);
    assert_eq!(a.duals, b.duals);
}

#[test]
fn zero_time_limit_still_reports_root_bound() {
    // A program that needs branching: the root LP is fractional.
    let mut m = LinearModel::new();
    let v: Vec<VarId> = (0..5).map(|j| m.add_binary(format!("b{j}"), 1.0)).collect();
    m.add_constraint("c", v.iter().map(|&b| (b, 2.0)).collect(), Sense::Le, 5.0);
    let opts = MipOptions { time_limit: Some(Duration::ZERO), ..MipOptions::default() };
    let r = solve_mip(&m, None, &opts).unwrap();
    assert_eq!(r.status, SolveStatus::TimeLimit);
    assert!(r.bound >= 2.0 && r.bound <= 2.5 + 1e-9);
}

#[test]
fn gap_limit_status_when_closed_within_tolerance() {
    let mut m = LinearModel::new();
    let v: Vec<VarId> = (0..8)
        .map(|j| m.add_binary(format!("b{j}"), 10.0 + j as f64 * 0.001))
        .collect();
    m.add_constraint("c", v.iter().map(|&b| (b, 2.0)).collect(), Sense::Le, 7.0);
    let opts = MipOptions { rel_gap: 0.5, ..MipOptions::default() };
    let r = solve_mip(&m, None, &opts).unwrap();
    assert!(r.is_solved());
    assert!(r.bound >= r.objective);
    assert!((r.bound - r.objective) <= 0.5 * r.objective.abs() + 1e-9);
}
