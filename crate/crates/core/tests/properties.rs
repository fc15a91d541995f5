mod common;

use common::{rel_close, sample_feasible};
use ppdesup::analysis::{solve_oracle, DEFAULT_ORACLE_BUDGET};
use ppdesup::benders::build_cut;
use ppdesup::generator::level_vector;
use ppdesup::model::infer_distribution;
use ppdesup::optkernel::{solve_lp, LinearModel, Sense, SolveStatus};
use ppdesup::secondstage::{compute_bounds, expected_revenue, expected_revenue_under, partition, scenario_revenue};
use ppdesup::solve::{solve, Method, SolveOptions};
use ppdesup::{generate, validate_instance, Execution, GeneratorConfig};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Optimal value of `max P w + O o` subject to `w + o = z`, `0 ≤ w ≤ D`.
fn revenue_lp(price: f64, salvage: f64, demand: f64, z: f64) -> f64 {
    let mut m = LinearModel::new();
    let w = m.add_continuous("w", 0.0, demand, price);
    let o = m.add_continuous("o", 0.0, f64::INFINITY, salvage);
    m.add_constraint("balance", vec![(w, 1.0), (o, 1.0)], Sense::Eq, z);
    let r = solve_lp(&m).unwrap();
    assert_eq!(r.status, SolveStatus::Optimal);
    r.objective
}

#[test]
fn scenario_revenue_matches_lp() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    for _ in 0..10_000 {
        let salvage = rng.random_range(0.0..40.0);
        let price = salvage + rng.random_range(0.01..150.0);
        let demand = if rng.random_bool(0.05) { 0.0 } else { rng.random_range(0.0..50_000.0) };
        let z = if rng.random_bool(0.05) { demand } else { rng.random_range(0.0..60_000.0) };
        let closed = scenario_revenue(price, salvage, demand, z);
        let lp = revenue_lp(price, salvage, demand, z);
        assert!(rel_close(closed, lp, 1e-9), "P={price} O={salvage} D={demand} z={z}: {closed} vs {lp}");
    }
}

fn small_config() -> impl Strategy<Value = GeneratorConfig> {
    (1usize..=3, 1usize..=3, 2usize..=3, 1usize..=5, any::<u64>()).prop_map(|(p, f, l, s, seed)| GeneratorConfig::new(p, f, l, s, seed))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn scenario_revenue_is_concave(
        salvage in 0.0f64..40.0,
        margin in 0.01f64..150.0,
        demand in 0.0f64..100.0,
        z1 in 0.0f64..200.0,
        z2 in 0.0f64..200.0,
        t in 0.0f64..=1.0,
    ) {
        let price = salvage + margin;
        let r = |z| scenario_revenue(price, salvage, demand, z);
        let mid = r(t * z1 + (1.0 - t) * z2);
        prop_assert!(mid >= t * r(z1) + (1.0 - t) * r(z2) - 1e-9 * (1.0 + mid.abs()));
    }

    #[test]
    fn generated_instances_satisfy_invariants(cfg in small_config()) {
        let inst = generate(&cfg).unwrap();
        let report = validate_instance(&inst);
        prop_assert!(report.is_valid(), "{report}");
        for (p, dists) in inst.distributions.iter().enumerate() {
            prop_assert_eq!(dists.len(), cfg.n_levels.pow(cfg.n_facilities as u32));
            let demands: Vec<f64> = dists[0].scenarios.iter().map(|s| s.demand).collect();
            for (d, dist) in dists.iter().enumerate() {
                prop_assert_eq!(&dist.enforced_level, &level_vector(d, cfg.n_levels, cfg.n_facilities));
                prop_assert_eq!(infer_distribution(&inst, p, &dist.enforced_level).unwrap(), d);
                prop_assert_eq!(dist.scenarios.len(), cfg.scenarios);
                for (s, sc) in dist.scenarios.iter().enumerate() {
                    prop_assert_eq!(sc.probability, 1.0 / cfg.scenarios as f64);
                    prop_assert_eq!(sc.demand, demands[s]);
                    prop_assert!(sc.demand >= 0.0);
                    prop_assert!(sc.yields.iter().all(|y| (0.25..=1.0).contains(y)));
                }
            }
        }
    }

    #[test]
    fn revenue_respects_bounds_and_inequalities(cfg in small_config(), sample_seed in any::<u64>()) {
        let inst = generate(&cfg).unwrap();
        let b = compute_bounds(&inst);
        let mut rng = ChaCha8Rng::seed_from_u64(sample_seed);
        for p in 0..inst.num_products() {
            for f in 0..inst.num_facilities() {
                prop_assert!(b.max_expected_yield(p, f) <= b.max_yield[p][f] + 1e-15);
            }
        }
        for _ in 0..50 {
            let (x, y) = sample_feasible(&inst, &mut rng);
            for p in 0..inst.num_products() {
                let q = expected_revenue(&inst, p, &x[p], &y[p]).unwrap();
                let tol = 1e-9 * (1.0 + q.abs());
                let vi1: f64 = (0..inst.num_facilities()).map(|f| inst.price[p] * b.max_yield[p][f] * x[p][f]).sum();
                let vi2: f64 = (0..inst.num_facilities()).map(|f| inst.price[p] * b.max_expected_yield(p, f) * x[p][f]).sum();
                prop_assert!(q <= b.revenue_cap[p] + tol);
                prop_assert!(q <= vi2 + tol);
                prop_assert!(vi2 <= vi1 + tol);
            }
        }
    }

    #[test]
    fn cuts_are_tight_valid_and_locally_exact(cfg in small_config(), sample_seed in any::<u64>()) {
        let inst = generate(&cfg).unwrap();
        let b = compute_bounds(&inst);
        let mut rng = ChaCha8Rng::seed_from_u64(sample_seed);
        let (gx, gy) = sample_feasible(&inst, &mut rng);
        for p in 0..inst.num_products() {
            let cut = build_cut(&inst, &b, p, &gx[p], &gy[p]).unwrap();
            let q0 = expected_revenue(&inst, p, &gx[p], &gy[p]).unwrap();
            prop_assert!(rel_close(cut.rhs(&gx[p], &gy[p]), q0, 1e-9));
            prop_assert!(cut.coeffs.iter().all(|a| *a >= 0.0) && cut.constant >= 0.0);

            for _ in 0..100 {
                let (x, y) = sample_feasible(&inst, &mut rng);
                let q = expected_revenue(&inst, p, &x[p], &y[p]).unwrap();
                prop_assert!(q <= cut.rhs(&x[p], &y[p]) + 1e-6 * (1.0 + q.abs()));
            }

            for _ in 0..20 {
                let x: Vec<f64> = gx[p].iter().map(|v| v * (1.0 + rng.random_range(-1e-4..1e-4))).collect();
                if partition(&inst, p, cut.distribution, &x).unwrap() == cut.partition {
                    let q = expected_revenue_under(&inst, p, cut.distribution, &x).unwrap();
                    prop_assert!(rel_close(cut.rhs(&x, &gy[p]), q, 1e-9));
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn all_methods_agree_with_the_oracle(
        p in 1usize..=2,
        f in 1usize..=2,
        l in 2usize..=3,
        s in 1usize..=3,
        seed in any::<u64>(),
    ) {
        let inst = generate(&GeneratorConfig::new(p, f, l, s, seed)).unwrap();
        let seq = solve_oracle(&inst, DEFAULT_ORACLE_BUDGET, Execution::Sequential).unwrap();
        let par = solve_oracle(&inst, DEFAULT_ORACLE_BUDGET, Execution::Parallel).unwrap();
        prop_assert_eq!(&seq.solution, &par.solution);
        let opts = SolveOptions { gap: 1e-7, time_limit: None, ..SolveOptions::default() };
        for m in [Method::Extensive, Method::Bbm, Method::BbmVi1, Method::BbmVi2, Method::BbmBc] {
            let out = solve(&inst, m, &opts).unwrap();
            prop_assert!(out.is_solved());
            prop_assert!(
                rel_close(out.objective, seq.solution.objective, 1e-6),
                "{}: {} vs {}", m, out.objective, seq.solution.objective
            );
            prop_assert!(out.bound >= out.objective - 1e-9 * (1.0 + out.objective.abs()));
        }
    }
}
