use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand};
use ppdesup::analysis::{compute_vss, EvVariant};
use ppdesup::io::{run_campaign, summary_table, write_bench_csv, write_iteration_log, write_vss_csv, CampaignConfig, SolutionFile, VssRow};
use ppdesup::{generate, Error, Execution, GeneratorConfig, Method, ProductionInstance, SolveOptions};

const EXIT_USAGE: u8 = 2;
const EXIT_UNSOLVED: u8 = 3;
const EXIT_BUDGET: u8 = 4;

#[derive(Parser)]
#[command(name = "ppdesup", version, about = "Production planning under demand and endogenous supply uncertainty")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write random instances, one file per seed.
    Generate {
        #[arg(long)]
        products: usize,
        #[arg(long)]
        facilities: usize,
        /// Levels per product and facility (2 or 3).
        #[arg(long)]
        levels: usize,
        /// Scenarios per distribution.
        #[arg(long)]
        scenarios: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        count: u64,
        #[arg(short, long, default_value = ".")]
        output: PathBuf,
    },
    /// Solve an instance file.
    Solve {
        instance: PathBuf,
        #[arg(long, default_value = "bbm-vi2", value_parser = parse_method)]
        method: Method,
        /// Relative optimality tolerance.
        #[arg(long, default_value_t = 1e-4)]
        gap: f64,
        /// Seconds; 0 stops after the first master solve.
        #[arg(long, default_value_t = 1800.0)]
        time_limit: f64,
        /// Solution file; printed to stdout when absent.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Iteration log as CSV.
        #[arg(long)]
        log: Option<PathBuf>,
        #[arg(long, default_value_t = ppdesup::analysis::DEFAULT_ORACLE_BUDGET)]
        oracle_budget: u64,
    },
    /// Value of the stochastic solution for one or all sources of uncertainty.
    Vss {
        instance: PathBuf,
        /// supply, demand, full or all.
        #[arg(long, default_value = "all")]
        variant: String,
        #[arg(long, default_value_t = 1e-4)]
        gap: f64,
        #[arg(long, default_value_t = 1800.0)]
        time_limit: f64,
        /// CSV file; printed to stdout when absent.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run a benchmark campaign described by a TOML file.
    Bench {
        config: PathBuf,
        /// Per-run CSV; printed to stdout when absent.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Error with the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure { code: EXIT_USAGE, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::OracleTooLarge { .. } => EXIT_BUDGET,
            Error::Invalid(_) | Error::Config(_) | Error::Io(_) | Error::Json(_) => EXIT_USAGE,
            _ => 1,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure { code: 1, message: e.to_string() }
    }
}

fn read_instance(path: &Path) -> Result<ProductionInstance, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
    let inst = ProductionInstance::from_json(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    inst.ensure_valid()?;
    Ok(inst)
}

fn time_limit(seconds: f64) -> Result<Option<Duration>, Failure> {
    if seconds.is_infinite() && seconds > 0.0 {
        return Ok(None);
    }
    Duration::try_from_secs_f64(seconds)
        .map(Some)
        .map_err(|_| Failure::usage(format!("invalid time limit {seconds}")))
}

fn check_gap(gap: f64) -> Result<(), Failure> {
    if gap >= 0.0 {
        Ok(())
    } else {
        Err(Failure::usage(format!("invalid gap {gap}")))
    }
}

fn emit(output: Option<&Path>, bytes: &[u8]) -> Result<(), Failure> {
    match output {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            fs::write(path, bytes)?;
        }
        None => io::stdout().write_all(bytes)?,
    }
    Ok(())
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Generate { products, facilities, levels, scenarios, seed, count, output } => {
            let base = GeneratorConfig::new(products, facilities, levels, scenarios, seed);
            base.validate().map_err(|e| Failure::usage(e.to_string()))?;
            fs::create_dir_all(&output)?;
            for k in 0..count {
                let cfg = GeneratorConfig { seed: seed + k, ..base.clone() };
                let inst = generate(&cfg)?;
                let path = output.join(format!("inst_p{products}_f{facilities}_l{levels}_s{scenarios}_seed{}.json", cfg.seed));
                fs::write(&path, inst.to_json()?)?;
                println!("{}", path.display());
            }
            Ok(0)
        }
        Command::Solve { instance, method, gap, time_limit: tl, output, log, oracle_budget } => {
            check_gap(gap)?;
            let opts = SolveOptions { gap, time_limit: time_limit(tl)?, oracle_budget, execution: Execution::Sequential };
            let inst = read_instance(&instance)?;
            let out = ppdesup::solve(&inst, method, &opts)?;
            let file = SolutionFile::from_outcome(&out);
            emit(output.as_deref(), format!("{}\n", file.to_json()?).as_bytes())?;
            if let Some(path) = log {
                let mut buf = Vec::new();
                write_iteration_log(&mut buf, &out.log)?;
                emit(Some(&path), &buf)?;
            }
            eprintln!("{method}: {} objective {:.6} bound {:.6} gap {:.3e}", file.status, out.objective, out.bound, out.gap);
            Ok(if out.is_solved() { 0 } else { EXIT_UNSOLVED })
        }
        Command::Vss { instance, variant, gap, time_limit: tl, output } => {
            check_gap(gap)?;
            let variants: Vec<EvVariant> = match variant.as_str() {
                "all" => EvVariant::ALL.to_vec(),
                v => vec![v.parse().map_err(|e: Error| Failure::usage(e.to_string()))?],
            };
            let opts = SolveOptions { gap, time_limit: time_limit(tl)?, execution: Execution::Sequential, ..SolveOptions::default() };
            let inst = read_instance(&instance)?;
            let sp = ppdesup::solve(&inst, Method::BbmVi2, &opts)?;
            let report = compute_vss(&inst, sp.objective, &variants, &opts)?;
            let name = instance.file_stem().map_or_else(|| instance.display().to_string(), |s| s.to_string_lossy().into_owned());
            let row = VssRow { sp_solved: sp.is_solved(), ..VssRow::new(name, &report) };
            let mut buf = Vec::new();
            write_vss_csv(&mut buf, &[row])?;
            emit(output.as_deref(), &buf)?;
            Ok(if sp.is_solved() { 0 } else { EXIT_UNSOLVED })
        }
        Command::Bench { config, output } => {
            let text = fs::read_to_string(&config).map_err(|e| Failure::usage(format!("cannot read {}: {e}", config.display())))?;
            let cfg: CampaignConfig = toml::from_str(&text).map_err(|e| Failure::usage(format!("{}: {e}", config.display())))?;
            cfg.validate().map_err(|e| Failure::usage(e.to_string()))?;
            let rows = run_campaign(&cfg)?;
            let mut buf = Vec::new();
            write_bench_csv(&mut buf, &rows)?;
            emit(output.as_deref(), &buf)?;
            let table = summary_table(&rows);
            if output.is_some() {
                print!("{table}");
            } else {
                eprint!("{table}");
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
