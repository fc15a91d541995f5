//! Solution files, CSV exports and benchmark campaigns.

use std::fmt::Write as _;
use std::io::Write;
use std::time::Duration;

use optkernel::SolveStatus;
use serde::{Deserialize, Serialize};

use crate::analysis::{VssReport, DEFAULT_ORACLE_BUDGET};
use crate::benders::IterationRecord;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::generator::{generate, GeneratorConfig};
use crate::model::FORMAT_VERSION;
use crate::solve::{solve, Method, MethodOutcome, SolveOptions};

pub fn status_name(status: SolveStatus) -> &'static str {
    match status {
        SolveStatus::Optimal => "optimal",
        SolveStatus::Infeasible => "infeasible",
        SolveStatus::Unbounded => "unbounded",
        SolveStatus::TimeLimit => "time_limit",
        SolveStatus::GapLimit => "gap_limit",
        SolveStatus::IterationLimit => "iteration_limit",
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionStats {
    pub iterations: usize,
    pub nodes: u64,
    pub cuts: usize,
    pub wall_seconds: f64,
    pub root_bound: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionFile {
    pub format_version: u32,
    pub method: Method,
    pub status: String,
    pub objective: f64,
    pub bound: f64,
    pub gap: f64,
    pub x: Vec<Vec<f64>>,
    pub levels: Vec<Vec<usize>>,
    pub distributions: Vec<usize>,
    pub mu: Vec<f64>,
    pub stats: SolutionStats,
}

impl SolutionFile {
    pub fn from_outcome(out: &MethodOutcome) -> Self {
        SolutionFile {
            format_version: FORMAT_VERSION,
            method: out.method,
            status: status_name(out.status).to_string(),
            objective: out.objective,
            bound: out.bound,
            gap: out.gap,
            x: out.solution.x.clone(),
            levels: out.solution.levels.clone(),
            distributions: out.distributions.clone(),
            mu: out.solution.mu.clone(),
            stats: SolutionStats {
                iterations: out.iterations,
                nodes: out.nodes,
                cuts: out.cuts,
                wall_seconds: out.wall_seconds,
                root_bound: out.root_bound,
            },
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

pub fn write_iteration_log<W: Write>(w: W, log: &[IterationRecord]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    if log.is_empty() {
        out.write_record(["k", "v_rmp", "v_mp", "v_best", "gap", "cuts_added", "elapsed_seconds"])?;
    }
    for r in log {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VssRow {
    pub instance: String,
    pub v_sp: f64,
    pub v_ev_supply: Option<f64>,
    pub v_ev_demand: Option<f64>,
    pub v_ev_full: Option<f64>,
    pub vss_supply: Option<f64>,
    pub vss_demand: Option<f64>,
    pub vss_full: Option<f64>,
    pub ratio_defined: bool,
    /// False when the stochastic problem stopped before proving optimality.
    pub sp_solved: bool,
}

impl VssRow {
    pub fn new(instance: impl Into<String>, r: &VssReport) -> Self {
        VssRow {
            instance: instance.into(),
            v_sp: r.v_sp,
            v_ev_supply: r.v_ev_supply,
            v_ev_demand: r.v_ev_demand,
            v_ev_full: r.v_ev_full,
            vss_supply: r.vss_supply,
            vss_demand: r.vss_demand,
            vss_full: r.vss_full,
            ratio_defined: r.ratio_defined,
            sp_solved: true,
        }
    }
}

const VSS_HEADER: [&str; 10] = [
    "instance",
    "v_sp",
    "v_ev_supply",
    "v_ev_demand",
    "v_ev_full",
    "vss_supply",
    "vss_demand",
    "vss_full",
    "ratio_defined",
    "sp_solved",
];

pub fn write_vss_csv<W: Write>(w: W, rows: &[VssRow]) -> Result<()> {
    let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    out.write_record(VSS_HEADER)?;
    for r in rows {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ClassSpec {
    pub products: usize,
    pub facilities: usize,
    pub levels: usize,
}

impl ClassSpec {
    pub fn label(&self) -> String {
        format!("({},{},{})", self.products, self.facilities, self.levels)
    }
}

fn default_gap() -> f64 {
    1e-4
}

fn default_time_limit() -> Option<f64> {
    Some(1800.0)
}

fn default_budget() -> u64 {
    DEFAULT_ORACLE_BUDGET
}

/// Cross product of classes, scenario counts, seeds and methods.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignConfig {
    #[serde(default = "crate::io::format_version")]
    pub format_version: u32,
    #[serde(default)]
    pub classes: Vec<ClassSpec>,
    #[serde(default)]
    pub scenarios: Vec<usize>,
    #[serde(default)]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub methods: Vec<Method>,
    #[serde(default = "default_gap")]
    pub gap: f64,
    /// Seconds per run; absent means unlimited.
    #[serde(default = "default_time_limit")]
    pub time_limit: Option<f64>,
    #[serde(default = "default_budget")]
    pub oracle_budget: u64,
    /// How runs are spread over workers.
    #[serde(default)]
    pub execution: Execution,
}

fn format_version() -> u32 {
    FORMAT_VERSION
}

impl CampaignConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gap >= 0.0) {
            return Err(Error::Config(format!("gap {} must be nonnegative", self.gap)));
        }
        if self.time_limit.is_some_and(|t| !(t >= 0.0) || !t.is_finite()) {
            return Err(Error::Config("time limit must be a nonnegative number of seconds".into()));
        }
        for c in &self.classes {
            for &s in &self.scenarios {
                GeneratorConfig::new(c.products, c.facilities, c.levels, s, 0).validate()?;
            }
        }
        Ok(())
    }

    pub fn num_runs(&self) -> usize {
        self.classes.len() * self.scenarios.len() * self.seeds.len() * self.methods.len()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub class: String,
    pub products: usize,
    pub facilities: usize,
    pub levels: usize,
    pub scenarios: usize,
    pub seed: u64,
    pub method: Method,
    pub status: String,
    pub solved: bool,
    pub objective: Option<f64>,
    pub bound: Option<f64>,
    pub gap: Option<f64>,
    pub iterations: usize,
    pub nodes: u64,
    pub cuts: usize,
    pub wall_seconds: f64,
    pub error: Option<String>,
}

const BENCH_HEADER: [&str; 17] = [
    "class",
    "products",
    "facilities",
    "levels",
    "scenarios",
    "seed",
    "method",
    "status",
    "solved",
    "objective",
    "bound",
    "gap",
    "iterations",
    "nodes",
    "cuts",
    "wall_seconds",
    "error",
];

pub fn write_bench_csv<W: Write>(w: W, rows: &[BenchRow]) -> Result<()> {
    let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    out.write_record(BENCH_HEADER)?;
    for r in rows {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_bench_csv<R: std::io::Read>(r: R) -> Result<Vec<BenchRow>> {
    let mut rd = csv::Reader::from_reader(r);
    rd.deserialize().map(|row| row.map_err(Error::from)).collect()
}

fn bench_row(class: ClassSpec, scenarios: usize, seed: u64, method: Method, out: Result<MethodOutcome>) -> BenchRow {
    let mut row = BenchRow {
        class: class.label(),
        products: class.products,
        facilities: class.facilities,
        levels: class.levels,
        scenarios,
        seed,
        method,
        status: "error".into(),
        solved: false,
        objective: None,
        bound: None,
        gap: None,
        iterations: 0,
        nodes: 0,
        cuts: 0,
        wall_seconds: 0.0,
        error: None,
    };
    match out {
        Ok(o) => {
            row.status = status_name(o.status).into();
            row.solved = o.is_solved();
            row.objective = Some(o.objective);
            row.bound = Some(o.bound);
            row.gap = Some(o.gap);
            row.iterations = o.iterations;
            row.nodes = o.nodes;
            row.cuts = o.cuts;
            row.wall_seconds = o.wall_seconds;
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}

/// Runs every combination; failures become rows with status `error`.
/// Rows come back in campaign order whatever the execution mode.
pub fn run_campaign(cfg: &CampaignConfig) -> Result<Vec<BenchRow>> {
    cfg.validate()?;
    let mut jobs = Vec::with_capacity(cfg.num_runs());
    for &class in &cfg.classes {
        for &s in &cfg.scenarios {
            for &seed in &cfg.seeds {
                for &method in &cfg.methods {
                    jobs.push((class, s, seed, method));
                }
            }
        }
    }
    let opts = SolveOptions {
        gap: cfg.gap,
        time_limit: cfg.time_limit.map(Duration::from_secs_f64),
        oracle_budget: cfg.oracle_budget,
        execution: Execution::Sequential,
    };
    Ok(cfg.execution.map(&jobs, |&(class, s, seed, method)| {
        let out = generate(&GeneratorConfig::new(class.products, class.facilities, class.levels, s, seed))
            .and_then(|inst| solve(&inst, method, &opts));
        bench_row(class, s, seed, method, out)
    }))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Aggregate {
    pub method: Method,
    pub class: String,
    pub runs: usize,
    pub solved: usize,
    /// Percentage of runs solved within the limits.
    pub pct_solved: f64,
    /// Mean wall time over solved runs.
    pub mean_seconds: Option<f64>,
}

/// Per method and class aggregates, in order of first appearance.
pub fn aggregate(rows: &[BenchRow]) -> Vec<Aggregate> {
    let mut keys: Vec<(Method, String)> = Vec::new();
    let mut acc: Vec<(usize, usize, f64)> = Vec::new();
    for r in rows {
        let key = (r.method, r.class.clone());
        let i = keys.iter().position(|k| *k == key).unwrap_or_else(|| {
            keys.push(key);
            acc.push((0, 0, 0.0));
            keys.len() - 1
        });
        acc[i].0 += 1;
        if r.solved {
            acc[i].1 += 1;
            acc[i].2 += r.wall_seconds;
        }
    }
    keys.into_iter()
        .zip(acc)
        .map(|((method, class), (runs, solved, secs))| Aggregate {
            method,
            class,
            runs,
            solved,
            pct_solved: 100.0 * solved as f64 / runs as f64,
            mean_seconds: (solved > 0).then(|| secs / solved as f64),
        })
        .collect()
}

/// Plain-text table with methods as rows and classes as columns; each cell
/// holds the percentage solved and the mean time of solved runs.
pub fn summary_table(rows: &[BenchRow]) -> String {
    let aggs = aggregate(rows);
    let mut methods: Vec<Method> = Vec::new();
    let mut classes: Vec<String> = Vec::new();
    for a in &aggs {
        if !methods.contains(&a.method) {
            methods.push(a.method);
        }
        if !classes.contains(&a.class) {
            classes.push(a.class.clone());
        }
    }
    let cell = |m: Method, c: &str| {
        aggs.iter().find(|a| a.method == m && a.class == c).map_or_else(
            || "-".to_string(),
            |a| match a.mean_seconds {
                Some(t) => format!("{:.1}% {:.2}s", a.pct_solved, t),
                None => format!("{:.1}% -", a.pct_solved),
            },
        )
    };
    let mut s = String::new();
    let _ = write!(s, "{:<10}", "method");
    for c in &classes {
        let _ = write!(s, " {c:>18}");
    }
    s.push('\n');
    for &m in &methods {
        let _ = write!(s, "{:<10}", m.name());
        for c in &classes {
            let _ = write!(s, " {:>18}", cell(m, c));
        }
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::micro1;

    #[test]
    fn solution_round_trip() {
        let opts = SolveOptions { gap: 0.0, time_limit: None, ..SolveOptions::default() };
        let out = solve(&micro1(), Method::BbmVi2, &opts).unwrap();
        let file = SolutionFile::from_outcome(&out);
        let text = file.to_json().unwrap();
        assert!(text.contains("\"method\": \"bbm-vi2\""));
        assert!(text.contains("\"format_version\": 1"));
        assert_eq!(SolutionFile::from_json(&text).unwrap(), file);
    }

    #[test]
    fn iteration_log_header() {
        let mut buf = Vec::new();
        write_iteration_log(&mut buf, &[]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "k,v_rmp,v_mp,v_best,gap,cuts_added,elapsed_seconds\n");
    }

    #[test]
    fn empty_campaign_gives_header_only() {
        let cfg: CampaignConfig = serde_json::from_str("{}").unwrap();
        let rows = run_campaign(&cfg).unwrap();
        assert!(rows.is_empty());
        let mut buf = Vec::new();
        write_bench_csv(&mut buf, &rows).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 1);
    }

    #[test]
    fn small_campaign_agrees_and_aggregates() {
        let cfg = CampaignConfig {
            format_version: 1,
            classes: vec![ClassSpec { products: 2, facilities: 2, levels: 2 }],
            scenarios: vec![3],
            seeds: vec![1, 2],
            methods: vec![Method::Oracle, Method::Bbm, Method::BbmVi2, Method::Extensive],
            gap: 1e-6,
            time_limit: Some(60.0),
            oracle_budget: DEFAULT_ORACLE_BUDGET,
            execution: Execution::Parallel,
        };
        let rows = run_campaign(&cfg).unwrap();
        assert_eq!(rows.len(), 8);
        assert!(rows.iter().all(|r| r.solved), "{rows:?}");
        for chunk in rows.chunks(4) {
            let v0 = chunk[0].objective.unwrap();
            for r in chunk {
                assert!((r.objective.unwrap() - v0).abs() <= 1e-6 * v0.abs().max(1.0), "{r:?}");
            }
        }
        let mut buf = Vec::new();
        write_bench_csv(&mut buf, &rows).unwrap();
        let back = read_bench_csv(buf.as_slice()).unwrap();
        assert_eq!(aggregate(&back), aggregate(&rows));
        let aggs = aggregate(&rows);
        assert_eq!(aggs.len(), 4);
        assert!(aggs.iter().all(|a| a.pct_solved == 100.0 && a.runs == 2));
        let table = summary_table(&rows);
        assert!(table.contains("(2,2,2)"));
        assert_eq!(table.lines().count(), 5);
    }
}
