//! Instance data, validation and the level-assignment to distribution map.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

/// Tolerance on the sum of scenario probabilities of a distribution.
pub const PROBABILITY_TOL: f64 = 1e-9;

fn format_version() -> u32 {
    FORMAT_VERSION
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductionLevel {
    #[serde(rename = "lo")]
    pub lower: f64,
    #[serde(rename = "hi")]
    pub upper: f64,
}

impl ProductionLevel {
    pub fn new(lower: f64, upper: f64) -> Self {
        ProductionLevel { lower, upper }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioRealization {
    #[serde(rename = "pi")]
    pub probability: f64,
    /// Yield fraction per facility.
    pub yields: Vec<f64>,
    pub demand: f64,
}

/// One joint yield and demand distribution of a product. Its id is its
/// position in the product's distribution list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointDistribution {
    /// Level index per facility that selects this distribution.
    #[serde(rename = "levels")]
    pub enforced_level: Vec<usize>,
    pub scenarios: Vec<ScenarioRealization>,
}

/// Full problem data. Vectors are positional in product and facility order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductionInstance {
    #[serde(default = "format_version")]
    pub format_version: u32,
    pub products: Vec<String>,
    pub facilities: Vec<String>,
    /// `B_f` per facility.
    pub capacity: Vec<f64>,
    /// `C_pf`, products by facilities.
    pub cost: Vec<Vec<f64>>,
    /// Full price `P_p`.
    pub price: Vec<f64>,
    /// Salvage price `O_p` for inventory left after demand is met.
    pub salvage: Vec<f64>,
    /// Production levels per product and facility.
    pub levels: Vec<Vec<Vec<ProductionLevel>>>,
    pub distributions: Vec<Vec<JointDistribution>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<serde_json::Value>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ViolationKind {
    Shape,
    Capacity,
    Cost,
    SalvageNotBelowCost,
    PriceNotAboveSalvage,
    LevelBounds,
    LevelOverlap,
    NoZeroLevel,
    EnforcedLevel,
    EmptyDistribution,
    Probability,
    ProbabilitySum,
    Yield,
    Demand,
    MapNotBijective,
}

/// Coordinates of a violation; unset fields do not apply.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Location {
    pub product: Option<usize>,
    pub facility: Option<usize>,
    pub level: Option<usize>,
    pub distribution: Option<usize>,
    pub scenario: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub location: Location,
    pub message: String,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, kind: ViolationKind) -> bool {
        self.violations.iter().any(|v| v.kind == kind)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "- {}", v.message)?;
        }
        Ok(())
    }
}

impl ProductionInstance {
    pub fn num_products(&self) -> usize {
        self.products.len()
    }

    pub fn num_facilities(&self) -> usize {
        self.facilities.len()
    }

    pub fn num_distributions(&self, p: usize) -> usize {
        self.distributions[p].len()
    }

    pub fn distribution(&self, p: usize, d: usize) -> Result<&JointDistribution> {
        self.distributions
            .get(p)
            .ok_or(Error::UnknownProduct { product: p })?
            .get(d)
            .ok_or(Error::UnknownDistribution { product: p, distribution: d })
    }

    /// Total number of scenarios over all distributions.
    pub fn num_scenarios(&self) -> usize {
        self.distributions
            .iter()
            .flatten()
            .map(|d| d.scenarios.len())
            .sum()
    }

    /// Returns `Err(Error::Invalid)` unless the report is empty.
    pub fn ensure_valid(&self) -> Result<()> {
        let report = validate_instance(self);
        if report.is_valid() {
            Ok(())
        } else {
            Err(Error::Invalid(report))
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

struct Checker<'a> {
    inst: &'a ProductionInstance,
    out: Vec<Violation>,
}

impl Checker<'_> {
    fn push(&mut self, kind: ViolationKind, location: Location, message: String) {
        self.out.push(Violation { kind, location, message });
    }

    fn pf(&self, p: usize, f: usize) -> String {
        format!("({},{})", self.inst.products[p], self.inst.facilities[f])
    }

    fn shape(&mut self) -> bool {
        let inst = self.inst;
        let (np, nf) = (inst.num_products(), inst.num_facilities());
        let mut bad = Vec::new();
        if np == 0 {
            bad.push("instance has no products".to_string());
        }
        if nf == 0 {
            bad.push("instance has no facilities".to_string());
        }
        if inst.capacity.len() != nf {
            bad.push(format!("capacity has {} entries for {nf} facilities", inst.capacity.len()));
        }
        for (name, len) in [
            ("cost", inst.cost.len()),
            ("price", inst.price.len()),
            ("salvage", inst.salvage.len()),
            ("levels", inst.levels.len()),
            ("distributions", inst.distributions.len()),
        ] {
            if len != np {
                bad.push(format!("{name} has {len} entries for {np} products"));
            }
        }
        if bad.is_empty() {
            for p in 0..np {
                if inst.cost[p].len() != nf || inst.levels[p].len() != nf {
                    bad.push(format!("cost or levels of {} do not cover {nf} facilities", inst.products[p]));
                }
                for (d, dist) in inst.distributions[p].iter().enumerate() {
                    if dist.enforced_level.len() != nf {
                        bad.push(format!("distribution {d} of {} has {} level entries", inst.products[p], dist.enforced_level.len()));
                    }
                    for (s, sc) in dist.scenarios.iter().enumerate() {
                        if sc.yields.len() != nf {
                            bad.push(format!("scenario {s} of ({},d{d}) has {} yields", inst.products[p], sc.yields.len()));
                        }
                    }
                }
            }
        }
        let ok = bad.is_empty();
        for msg in bad {
            self.push(ViolationKind::Shape, Location::default(), msg);
        }
        ok
    }

    fn economics(&mut self) {
        let inst = self.inst;
        for (f, &b) in inst.capacity.iter().enumerate() {
            if !(b >= 0.0 && b.is_finite()) {
                let loc = Location { facility: Some(f), ..Location::default() };
                self.push(ViolationKind::Capacity, loc, format!("capacity {b} of {} is not a finite nonnegative number", inst.facilities[f]));
            }
        }
        for p in 0..inst.num_products() {
            let (price, salvage) = (inst.price[p], inst.salvage[p]);
            if !(price > salvage) || !price.is_finite() || !salvage.is_finite() {
                let loc = Location { product: Some(p), ..Location::default() };
                self.push(ViolationKind::PriceNotAboveSalvage, loc, format!("price {price} ≤ salvage {salvage} for {}", inst.products[p]));
            }
            for f in 0..inst.num_facilities() {
                let c = inst.cost[p][f];
                let loc = Location { product: Some(p), facility: Some(f), ..Location::default() };
                if !(c > 0.0 && c.is_finite()) {
                    self.push(ViolationKind::Cost, loc, format!("cost {c} at {} is not positive", self.pf(p, f)));
                }
                if !(salvage < c) {
                    self.push(ViolationKind::SalvageNotBelowCost, loc, format!("salvage ≥ cost at {} ({salvage} ≥ {c})", self.pf(p, f)));
                }
            }
        }
    }

    fn levels(&mut self) {
        let inst = self.inst;
        for p in 0..inst.num_products() {
            for f in 0..inst.num_facilities() {
                let levels = &inst.levels[p][f];
                let base = Location { product: Some(p), facility: Some(f), ..Location::default() };
                if levels.is_empty() {
                    self.push(ViolationKind::LevelBounds, base, format!("no levels at {}", self.pf(p, f)));
                    continue;
                }
                let mut sound = true;
                for (l, lv) in levels.iter().enumerate() {
                    if !(lv.lower >= 0.0 && lv.lower <= lv.upper && lv.upper.is_finite()) {
                        sound = false;
                        let loc = Location { level: Some(l), ..base };
                        self.push(ViolationKind::LevelBounds, loc, format!("level {l} at {} has bounds [{}, {}]", self.pf(p, f), lv.lower, lv.upper));
                    }
                }
                if !sound {
                    continue;
                }
                // Closed intervals may touch; only interiors must be disjoint.
                let mut order: Vec<usize> = (0..levels.len()).collect();
                order.sort_by(|&a, &b| levels[a].lower.total_cmp(&levels[b].lower).then(a.cmp(&b)));
                for w in order.windows(2) {
                    let (a, b) = (levels[w[0]], levels[w[1]]);
                    let a_wide = a.lower < a.upper;
                    let b_wide = b.lower < b.upper;
                    if a_wide && b_wide && a.upper > b.lower {
                        let loc = Location { level: Some(w[1]), ..base };
                        self.push(ViolationKind::LevelOverlap, loc, format!("levels {} and {} overlap at {}", w[0], w[1], self.pf(p, f)));
                    }
                }
                if !levels.iter().any(|lv| lv.lower == 0.0) {
                    self.push(ViolationKind::NoZeroLevel, base, format!("no level at {} allows zero production", self.pf(p, f)));
                }
            }
        }
    }

    fn distributions(&mut self) {
        let inst = self.inst;
        let nf = inst.num_facilities();
        for p in 0..inst.num_products() {
            let name = &inst.products[p];
            let mut seen = HashSet::new();
            let mut all_valid = true;
            for (d, dist) in inst.distributions[p].iter().enumerate() {
                let base = Location { product: Some(p), distribution: Some(d), ..Location::default() };
                for (f, &l) in dist.enforced_level.iter().enumerate() {
                    if l >= inst.levels[p][f].len() {
                        all_valid = false;
                        let loc = Location { facility: Some(f), level: Some(l), ..base };
                        self.push(ViolationKind::EnforcedLevel, loc, format!("distribution d{d} of {name} enforces missing level {l} at {}", inst.facilities[f]));
                    }
                }
                if !seen.insert(dist.enforced_level.clone()) {
                    self.push(ViolationKind::MapNotBijective, base, format!("distribution d{d} of {name} repeats level vector {:?}", dist.enforced_level));
                }
                if dist.scenarios.is_empty() {
                    self.push(ViolationKind::EmptyDistribution, base, format!("distribution d{d} of {name} has no scenarios"));
                    continue;
                }
                let mut total = 0.0;
                for (s, sc) in dist.scenarios.iter().enumerate() {
                    let loc = Location { scenario: Some(s), ..base };
                    if !(sc.probability > 0.0 && sc.probability <= 1.0) {
                        self.push(ViolationKind::Probability, loc, format!("probability {} of ({name},d{d},s{s}) is outside (0,1]", sc.probability));
                    }
                    total += sc.probability;
                    for (f, &y) in sc.yields.iter().enumerate() {
                        if !(0.0..=1.0).contains(&y) {
                            let loc = Location { facility: Some(f), ..loc };
                            self.push(ViolationKind::Yield, loc, format!("yield {y} of ({name},{},d{d},s{s}) is outside [0,1]", inst.facilities[f]));
                        }
                    }
                    if !(sc.demand >= 0.0 && sc.demand.is_finite()) {
                        self.push(ViolationKind::Demand, loc, format!("demand {} of ({name},d{d},s{s}) is negative", sc.demand));
                    }
                }
                if (total - 1.0).abs() > PROBABILITY_TOL || !total.is_finite() {
                    self.push(ViolationKind::ProbabilitySum, base, format!("probabilities sum to {} for ({name},d{d})", round_for_display(total)));
                }
            }
            if all_valid && nf > 0 {
                let combos: f64 = inst.levels[p].iter().map(|l| l.len() as f64).product();
                if seen.len() as f64 != combos {
                    let loc = Location { product: Some(p), ..Location::default() };
                    self.push(ViolationKind::MapNotBijective, loc, format!("{name} has {} distinct level vectors for {combos} level assignments", seen.len()));
                }
            }
        }
    }
}

fn round_for_display(v: f64) -> f64 {
    (v * 1e9).round() / 1e9
}

/// Collects every violated invariant. Shape problems stop further checks
/// because coordinates would not be meaningful.
pub fn validate_instance(inst: &ProductionInstance) -> ValidationReport {
    let mut c = Checker { inst, out: Vec::new() };
    if c.shape() {
        c.economics();
        c.levels();
        c.distributions();
    }
    ValidationReport { violations: c.out }
}

/// Level index per facility that selects distribution `d` of product `p`.
pub fn enforced_levels(inst: &ProductionInstance, p: usize, d: usize) -> Result<&[usize]> {
    Ok(&inst.distribution(p, d)?.enforced_level)
}

/// The distribution of product `p` selected by one level per facility.
pub fn infer_distribution(inst: &ProductionInstance, p: usize, levels: &[usize]) -> Result<usize> {
    let dists = inst.distributions.get(p).ok_or(Error::UnknownProduct { product: p })?;
    // Generated instances list distributions in mixed-radix order, which makes
    // the first probe exact; other layouts fall back to a scan.
    let mut guess = 0usize;
    let mut radix_ok = levels.len() == inst.num_facilities();
    if radix_ok {
        for (f, &l) in levels.iter().enumerate() {
            let base = inst.levels[p][f].len();
            if l >= base {
                radix_ok = false;
                break;
            }
            guess = guess * base + l;
        }
    }
    if radix_ok && dists.get(guess).is_some_and(|d| d.enforced_level == levels) {
        return Ok(guess);
    }
    dists
        .iter()
        .position(|d| d.enforced_level == levels)
        .ok_or_else(|| Error::MapNotTotal { product: p, levels: levels.to_vec() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::micro1;

    /// Two facilities with levels A,B and C,D; distributions enumerate
    /// (A,C), (A,D), (B,C), (B,D).
    fn two_by_two() -> ProductionInstance {
        let mut inst = micro1();
        inst.facilities = vec!["F1".into(), "F2".into()];
        inst.capacity = vec![20.0, 20.0];
        inst.cost = vec![vec![6.0, 6.0]];
        let lv = vec![ProductionLevel::new(0.0, 10.0), ProductionLevel::new(10.0, 20.0)];
        inst.levels = vec![vec![lv.clone(), lv]];
        let sc = ScenarioRealization { probability: 1.0, yields: vec![0.8, 0.8], demand: 8.0 };
        inst.distributions = vec![(0..4)
            .map(|d| JointDistribution { enforced_level: vec![d / 2, d % 2], scenarios: vec![sc.clone()] })
            .collect()];
        inst
    }

    #[test]
    fn micro_fixture_is_valid() {
        assert!(validate_instance(&micro1()).is_valid());
    }

    #[test]
    fn salvage_above_cost_is_reported() {
        let mut inst = micro1();
        inst.salvage[0] = 7.0;
        let r = validate_instance(&inst);
        assert!(r.has(ViolationKind::SalvageNotBelowCost));
        assert!(r.to_string().contains("salvage ≥ cost at (p1,f1)"), "{r}");
    }

    #[test]
    fn probability_sum_is_reported() {
        let mut inst = micro1();
        inst.distributions[0][0].scenarios[1].probability = 0.6;
        let r = validate_instance(&inst);
        assert!(r.has(ViolationKind::ProbabilitySum));
        assert!(r.to_string().contains("probabilities sum to 1.1"), "{r}");
    }

    #[test]
    fn validation_is_repeatable() {
        let mut inst = micro1();
        inst.salvage[0] = 9.0;
        inst.levels[0][0][1].lower = 5.0;
        assert_eq!(validate_instance(&inst), validate_instance(&inst));
        assert!(validate_instance(&inst).has(ViolationKind::LevelOverlap));
    }

    #[test]
    fn touching_levels_are_allowed_but_overlap_is_not() {
        let mut inst = micro1();
        assert!(validate_instance(&inst).is_valid());
        inst.levels[0][0][0].upper = 12.0;
        assert!(validate_instance(&inst).has(ViolationKind::LevelOverlap));
    }

    #[test]
    fn missing_zero_level_is_reported() {
        let mut inst = micro1();
        inst.levels[0][0][0].lower = 1.0;
        assert!(validate_instance(&inst).has(ViolationKind::NoZeroLevel));
    }

    #[test]
    fn level_map_lookups() {
        let inst = two_by_two();
        assert!(validate_instance(&inst).is_valid());
        // (p, d1) is (A, C); (p, d4) is (B, D); (A, D) selects d2.
        assert_eq!(enforced_levels(&inst, 0, 0).unwrap(), &[0, 0]);
        assert_eq!(enforced_levels(&inst, 0, 3).unwrap(), &[1, 1]);
        assert_eq!(infer_distribution(&inst, 0, &[0, 1]).unwrap(), 1);
        let micro = micro1();
        assert_eq!(enforced_levels(&micro, 0, 1).unwrap(), &[1]);
        assert_eq!(infer_distribution(&micro, 0, &[0]).unwrap(), 0);
        assert!(matches!(enforced_levels(&micro, 0, 5), Err(Error::UnknownDistribution { .. })));
    }

    #[test]
    fn scan_fallback_handles_unordered_distributions() {
        let mut inst = two_by_two();
        inst.distributions[0].reverse();
        assert!(validate_instance(&inst).is_valid());
        for d in 0..4 {
            let y = enforced_levels(&inst, 0, d).unwrap().to_vec();
            assert_eq!(infer_distribution(&inst, 0, &y).unwrap(), d);
        }
    }

    #[test]
    fn deleting_a_distribution_breaks_totality() {
        let mut inst = micro1();
        inst.distributions[0].pop();
        assert!(validate_instance(&inst).has(ViolationKind::MapNotBijective));
        assert!(matches!(infer_distribution(&inst, 0, &[1]), Err(Error::MapNotTotal { .. })));
    }

    #[test]
    fn json_uses_short_field_names_and_round_trips() {
        let inst = micro1();
        let text = inst.to_json().unwrap();
        for key in ["\"lo\"", "\"hi\"", "\"pi\"", "\"levels\"", "\"format_version\"", "\"salvage\""] {
            assert!(text.contains(key), "{key} missing");
        }
        assert_eq!(ProductionInstance::from_json(&text).unwrap(), inst);
    }

    #[test]
    fn shape_errors_are_reported_without_panicking() {
        let mut inst = micro1();
        inst.capacity.clear();
        inst.distributions[0][0].scenarios[0].yields.push(1.0);
        let r = validate_instance(&inst);
        assert!(r.has(ViolationKind::Shape));
        assert!(!r.is_valid());
    }
}
