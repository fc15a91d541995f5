//! Seeded random instances with the yield catalog for two and three levels.
//!
//! Every random quantity comes from its own ChaCha stream keyed by purpose
//! and index, so changing one dimension of the configuration leaves the
//! draws of unrelated entities untouched.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{JointDistribution, ProductionInstance, ProductionLevel, ScenarioRealization, FORMAT_VERSION};

/// Bounds applied to every yield draw.
pub const YIELD_BOUNDS: [f64; 2] = [0.25, 1.0];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorConfig {
    pub n_products: usize,
    pub n_facilities: usize,
    /// Levels per product and facility, 2 or 3.
    pub n_levels: usize,
    /// Scenarios per distribution.
    pub scenarios: usize,
    pub seed: u64,
    pub cost_range: [f64; 2],
    pub price_range: [f64; 2],
    pub salvage_range: [f64; 2],
    /// Relative half-width of the capacity range.
    pub capacity_slack: f64,
    pub demand_mean: f64,
    pub demand_std: f64,
    pub yield_bounds: [f64; 2],
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            n_products: 5,
            n_facilities: 2,
            n_levels: 2,
            scenarios: 5,
            seed: 0,
            cost_range: [60.0, 80.0],
            price_range: [125.0, 185.0],
            salvage_range: [15.0, 40.0],
            capacity_slack: 0.1,
            demand_mean: 20_000.0,
            demand_std: 15_000.0,
            yield_bounds: YIELD_BOUNDS,
        }
    }
}

impl GeneratorConfig {
    pub fn new(n_products: usize, n_facilities: usize, n_levels: usize, scenarios: usize, seed: u64) -> Self {
        GeneratorConfig { n_products, n_facilities, n_levels, scenarios, seed, ..GeneratorConfig::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.n_products == 0 || self.n_facilities == 0 || self.scenarios == 0 {
            return bad("products, facilities and scenarios must be positive".into());
        }
        if !(2..=3).contains(&self.n_levels) {
            return bad(format!("{} levels requested, the yield catalog covers 2 or 3", self.n_levels));
        }
        for (name, r) in [
            ("cost", self.cost_range),
            ("price", self.price_range),
            ("salvage", self.salvage_range),
            ("yield", self.yield_bounds),
        ] {
            if !(r[0].is_finite() && r[1].is_finite() && r[0] <= r[1]) {
                return bad(format!("{name} range [{}, {}] is empty", r[0], r[1]));
            }
        }
        if self.salvage_range[1] >= self.cost_range[0] {
            return bad("salvage range must lie below the cost range".into());
        }
        if self.price_range[0] <= self.salvage_range[1] {
            return bad("price range must lie above the salvage range".into());
        }
        if self.yield_bounds[0] <= 0.0 || self.yield_bounds[1] > 1.0 || self.yield_bounds[0] >= self.yield_bounds[1] {
            return bad("yield bounds must satisfy 0 < lo < hi <= 1".into());
        }
        if !(0.0..1.0).contains(&self.capacity_slack) || self.demand_mean <= 0.0 || self.demand_std < 0.0 {
            return bad("capacity slack must be in [0, 1), demand mean positive, std nonnegative".into());
        }
        Ok(())
    }

    /// Total number of raw draws: `S·|P|·(|L|^|F| + 1)`.
    pub fn scenario_count(&self) -> usize {
        self.scenarios * self.n_products * (self.n_levels.pow(self.n_facilities as u32) + 1)
    }
}

/// Mean and standard deviation of the yield for a catalog family and level,
/// both zero-based.
pub fn yield_family(n_levels: usize, family: usize, level: usize) -> Option<(f64, f64)> {
    const MEANS: [f64; 3] = [0.5, 0.7, 0.9];
    const STD2: [[f64; 2]; 3] = [[0.2, 0.1], [0.2, 0.1], [0.05, 0.01]];
    const STD3: [[f64; 3]; 3] = [[0.2, 0.15, 0.1], [0.2, 0.15, 0.1], [0.05, 0.03, 0.01]];
    let mean = *MEANS.get(family)?;
    let std = match n_levels {
        2 => *STD2[family].get(level)?,
        3 => *STD3[family].get(level)?,
        _ => return None,
    };
    Some((mean, std))
}

/// Level intervals as fractions of expected demand.
pub fn level_fractions(n_levels: usize) -> &'static [(f64, f64)] {
    match n_levels {
        2 => &[(0.0, 0.75), (0.75, 1.0)],
        3 => &[(0.0, 0.5), (0.5, 0.75), (0.75, 1.0)],
        _ => &[],
    }
}

/// Normal draw clamped to `[lo, hi]`.
pub fn truncated_normal<R: Rng + ?Sized>(mean: f64, std: f64, lo: f64, hi: f64, rng: &mut R) -> Result<f64> {
    if lo >= hi {
        return Err(Error::Config(format!("truncation interval [{lo}, {hi}] is empty")));
    }
    let normal = Normal::new(mean, std).map_err(|e| Error::Config(format!("normal({mean}, {std}): {e}")))?;
    Ok(normal.sample(rng).clamp(lo, hi))
}

#[derive(Clone, Copy)]
enum Purpose {
    Capacity = 1,
    Cost = 2,
    Price = 3,
    Salvage = 4,
    Family = 5,
    Yield = 6,
    Demand = 7,
}

fn stream(seed: u64, purpose: Purpose, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((purpose as u64) << 48) | index as u64);
    rng
}

/// Level vector of distribution `d` in mixed-radix order, first facility
/// most significant.
pub fn level_vector(d: usize, n_levels: usize, n_facilities: usize) -> Vec<usize> {
    let mut v = vec![0; n_facilities];
    let mut rest = d;
    for slot in v.iter_mut().rev() {
        *slot = rest % n_levels;
        rest /= n_levels;
    }
    v
}

pub fn generate(cfg: &GeneratorConfig) -> Result<ProductionInstance> {
    cfg.validate()?;
    let (np, nf, nl, ns) = (cfg.n_products, cfg.n_facilities, cfg.n_levels, cfg.scenarios);
    let nu = cfg.demand_mean;
    let chi = nu * np as f64 / nf as f64;
    let uniform = |rng: &mut ChaCha8Rng, r: [f64; 2]| if r[0] < r[1] { rng.random_range(r[0]..r[1]) } else { r[0] };

    let capacity = (0..nf)
        .map(|f| uniform(&mut stream(cfg.seed, Purpose::Capacity, f), [chi * (1.0 - cfg.capacity_slack), chi * (1.0 + cfg.capacity_slack)]))
        .collect();
    let cost = (0..np)
        .map(|p| {
            let mut rng = stream(cfg.seed, Purpose::Cost, p);
            (0..nf).map(|_| uniform(&mut rng, cfg.cost_range)).collect()
        })
        .collect();
    let price = (0..np).map(|p| uniform(&mut stream(cfg.seed, Purpose::Price, p), cfg.price_range)).collect();
    let salvage = (0..np).map(|p| uniform(&mut stream(cfg.seed, Purpose::Salvage, p), cfg.salvage_range)).collect();
    let levels: Vec<Vec<Vec<ProductionLevel>>> = (0..np)
        .map(|_| {
            let per_f: Vec<ProductionLevel> = level_fractions(nl).iter().map(|&(a, b)| ProductionLevel::new(a * nu, b * nu)).collect();
            vec![per_f; nf]
        })
        .collect();

    let [ylo, yhi] = cfg.yield_bounds;
    let mut distributions = Vec::with_capacity(np);
    for p in 0..np {
        let mut fam_rng = stream(cfg.seed, Purpose::Family, p);
        let families: Vec<usize> = (0..nf).map(|_| fam_rng.random_range(0..3)).collect();
        let mut dem_rng = stream(cfg.seed, Purpose::Demand, p);
        let demands = (0..ns)
            .map(|_| truncated_normal(cfg.demand_mean, cfg.demand_std, 0.0, f64::INFINITY, &mut dem_rng))
            .collect::<Result<Vec<f64>>>()?;
        let mut y_rng = stream(cfg.seed, Purpose::Yield, p);
        let n_dist = nl.pow(nf as u32);
        let mut per_p = Vec::with_capacity(n_dist);
        for d in 0..n_dist {
            let lv = level_vector(d, nl, nf);
            let scenarios = demands
                .iter()
                .map(|&demand| {
                    let yields = (0..nf)
                        .map(|f| {
                            let (mean, std) = yield_family(nl, families[f], lv[f]).expect("catalog covers validated levels");
                            truncated_normal(mean, std, ylo, yhi, &mut y_rng)
                        })
                        .collect::<Result<Vec<f64>>>()?;
                    Ok(ScenarioRealization { probability: 1.0 / ns as f64, yields, demand })
                })
                .collect::<Result<Vec<_>>>()?;
            per_p.push(JointDistribution { enforced_level: lv, scenarios });
        }
        distributions.push(per_p);
    }

    Ok(ProductionInstance {
        format_version: FORMAT_VERSION,
        products: (1..=np).map(|i| format!("p{i}")).collect(),
        facilities: (1..=nf).map(|i| format!("f{i}")).collect(),
        capacity,
        cost,
        price,
        salvage,
        levels,
        distributions,
        meta: Some(serde_json::json!({ "generator": cfg })),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_lookup() {
        assert_eq!(yield_family(3, 2, 2), Some((0.9, 0.01)));
        assert_eq!(yield_family(2, 0, 0), Some((0.5, 0.2)));
        assert_eq!(yield_family(2, 2, 1), Some((0.9, 0.01)));
        assert_eq!(yield_family(3, 1, 1), Some((0.7, 0.15)));
        assert_eq!(yield_family(4, 0, 0), None);
        assert_eq!(yield_family(2, 0, 2), None);
    }

    #[test]
    fn truncated_normal_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(truncated_normal(0.9, 0.0, 0.25, 1.0, &mut rng).unwrap(), 0.9);
        assert_eq!(truncated_normal(-5.0, 0.1, 0.25, 1.0, &mut rng).unwrap(), 0.25);
        assert!(truncated_normal(0.5, 0.1, 1.0, 1.0, &mut rng).is_err());
        assert!(truncated_normal(0.5, 0.1, 2.0, 1.0, &mut rng).is_err());
    }

    #[test]
    fn truncated_normal_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 1_000_000;
        let sum: f64 = (0..n).map(|_| truncated_normal(0.7, 0.1, 0.25, 1.0, &mut rng).unwrap()).sum();
        assert!((sum / n as f64 - 0.7).abs() < 1e-3);
    }

    #[test]
    fn shape_of_small_class() {
        let cfg = GeneratorConfig::new(5, 2, 2, 5, 7);
        let inst = generate(&cfg).unwrap();
        assert_eq!(cfg.scenario_count(), 125);
        assert_eq!(inst.num_products(), 5);
        for p in 0..5 {
            assert_eq!(inst.num_distributions(p), 4);
            for d in &inst.distributions[p] {
                assert_eq!(d.scenarios.len(), 5);
            }
        }
        assert_eq!(inst.distributions[0][2].enforced_level, vec![1, 0]);
        assert_eq!(inst.levels[0][0][1], ProductionLevel::new(15_000.0, 20_000.0));
    }

    #[test]
    fn three_level_bounds() {
        let inst = generate(&GeneratorConfig::new(2, 2, 3, 2, 1)).unwrap();
        let lv = &inst.levels[1][1];
        assert_eq!(lv.len(), 3);
        assert_eq!((lv[0].lower, lv[0].upper), (0.0, 10_000.0));
        assert_eq!((lv[1].lower, lv[1].upper), (10_000.0, 15_000.0));
        assert_eq!((lv[2].lower, lv[2].upper), (15_000.0, 20_000.0));
        assert_eq!(inst.num_distributions(0), 9);
    }

    #[test]
    fn deterministic_and_recorded() {
        let cfg = GeneratorConfig::new(3, 2, 2, 4, 99);
        let a = generate(&cfg).unwrap().to_json().unwrap();
        let b = generate(&cfg).unwrap().to_json().unwrap();
        assert_eq!(a, b);
        let inst = generate(&cfg).unwrap();
        assert_eq!(inst.meta.unwrap()["generator"]["seed"], 99);
    }

    #[test]
    fn facility_draws_ignore_product_count() {
        let a = generate(&GeneratorConfig::new(2, 3, 2, 3, 5)).unwrap();
        let b = generate(&GeneratorConfig::new(4, 3, 2, 3, 5)).unwrap();
        for f in 0..3 {
            assert!((a.capacity[f] / a.capacity[0] - b.capacity[f] / b.capacity[0]).abs() < 1e-12);
        }
        assert_eq!(a.cost[1], b.cost[1]);
        assert_eq!(a.distributions[0], b.distributions[0]);
    }

    #[test]
    fn rejects_unsupported_levels() {
        assert!(generate(&GeneratorConfig::new(2, 2, 4, 2, 0)).is_err());
        assert!(generate(&GeneratorConfig::new(2, 2, 1, 2, 0)).is_err());
        assert!(generate(&GeneratorConfig::new(0, 2, 2, 2, 0)).is_err());
    }
}
