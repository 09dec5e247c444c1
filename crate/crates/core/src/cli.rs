//! Command-line driver: `run <config>` and `verify <config> --suite <name>`.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::approximant::{CheckCount, Constants, ErrorReport, LipschitzReport};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::gates::Gate;
use crate::mollifier::NuBackend;
use crate::verify::{build_from_config, run_suite, Ledger, Suite};

pub const SCHEMA_VERSION: u32 = 1;

pub const EXIT_OK: u8 = 0;
pub const EXIT_IO: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_CAPACITY: u8 = 3;
pub const EXIT_INVARIANT: u8 = 4;

#[derive(Debug, Parser)]
#[command(name = "analytic-approx", version, about = "Build and check Lipschitz analytic approximants")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Overrides `backend.seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for point-parallel evaluation.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub backend: Option<BackendArg>,
    #[arg(long, global = true)]
    pub mc_samples: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the approximant, evaluate it and write the report and point table.
    Run { config: PathBuf },
    /// Run invariant batteries and write a ledger.
    Verify {
        config: PathBuf,
        #[arg(long, value_enum, default_value = "all")]
        suite: Suite,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum BackendArg {
    Layercake,
    Mc,
}

/// Exit code for an error that stopped a run.
pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io(_) | Error::Csv(_) | Error::Json(_) => EXIT_IO,
        Error::Capacity { .. } => EXIT_CAPACITY,
        Error::InvariantViolation(_)
        | Error::CertificationFailed { .. }
        | Error::DomainExcursion { .. }
        | Error::BracketFailure { .. }
        | Error::Overflow(_) => EXIT_INVARIANT,
        _ => EXIT_CONFIG,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct NetSummary {
    pub size: usize,
    pub covering_radius: f64,
    pub spacing: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ErrorSummary {
    pub points: usize,
    pub sup_error: f64,
    pub margin: f64,
    pub min_denominator: f64,
    pub violations: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub config: RunConfig,
    pub target: String,
    pub constants: Constants,
    pub log_kappa_first: f64,
    pub log_kappa_last: f64,
    pub gates: Vec<Gate>,
    pub net: NetSummary,
    pub error: ErrorSummary,
    pub lipschitz: LipschitzReport,
    pub invariants: Vec<CheckCount>,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub schema_version: u32,
    pub config: RunConfig,
    pub ledger: Ledger,
    pub passed: bool,
}

fn flag(name: &str, ok: bool) -> CheckCount {
    CheckCount { name: name.into(), checked: 1, violations: usize::from(!ok), worst_margin: if ok { 1.0 } else { -1.0 } }
}

/// Writes `index, x0.., F, K, abs_err` rows in point order.
pub fn write_point_table(path: &Path, dim: usize, rep: &ErrorReport) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["index".to_string()];
    header.extend((0..dim).map(|i| format!("x{i}")));
    header.extend(["F", "K", "abs_err"].map(String::from));
    w.write_record(&header)?;
    for p in &rep.points {
        let mut row = vec![p.index.to_string()];
        row.extend(p.x.iter().map(f64::to_string));
        row.extend([p.f, p.k, p.abs_err].map(|v| v.to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(())
}

/// Builds, evaluates and reports. Returns the report and whether it passed.
pub fn run_experiment(cfg: &RunConfig) -> Result<RunReport> {
    cfg.validate()?;
    let ap = build_from_config(cfg)?;
    let points = cfg.eval_points(ap.domain())?;
    let rep = ap.error_report(&points);
    let lip = ap.lipschitz_estimate(cfg.eval.lipschitz_pairs, cfg.backend.seed)?;

    let mut invariants = rep.checks.clone();
    invariants.push(flag("evaluated_all_points", rep.points.len() == points.len()));
    invariants.push(flag("lipschitz_below_chain_bound", lip.below_bound));
    invariants.push(flag("lipschitz_no_growth", lip.no_growth));
    invariants.push(flag("kappa_schedule", ap.family().verify_schedule().is_ok()));
    let passed = rep.sup_error < cfg.epsilon && invariants.iter().all(|c| c.violations == 0);

    let c = ap.constants();
    let lk = ap.family().log_kappa();
    let report = RunReport {
        schema_version: SCHEMA_VERSION,
        config: cfg.clone(),
        target: ap.target().describe(),
        net: NetSummary { size: c.net_size, covering_radius: c.covering_radius, spacing: c.lattice_spacing },
        constants: c,
        log_kappa_first: lk.first().copied().unwrap_or(0.0),
        log_kappa_last: lk.last().copied().unwrap_or(0.0),
        gates: ap.gates().gates().into_iter().cloned().collect(),
        error: ErrorSummary {
            points: rep.points.len(),
            sup_error: rep.sup_error,
            margin: rep.margin,
            min_denominator: rep.min_denominator,
            violations: rep.violations.clone(),
        },
        lipschitz: lip,
        invariants,
        passed,
    };

    let dir = &cfg.output.dir;
    std::fs::create_dir_all(dir)?;
    write_point_table(&dir.join(&cfg.output.table), ap.domain().dim(), &rep)?;
    write_json(&dir.join(&cfg.output.report), &report)?;
    Ok(report)
}

/// Runs a suite and writes the ledger file.
pub fn verify_suite(cfg: &RunConfig, suite: Suite) -> Result<Ledger> {
    cfg.validate()?;
    let ledger = run_suite(cfg, suite)?;
    let dir = &cfg.output.dir;
    std::fs::create_dir_all(dir)?;
    let out = VerifyReport { schema_version: SCHEMA_VERSION, config: cfg.clone(), passed: ledger.passed(), ledger };
    write_json(&dir.join(&cfg.output.ledger), &out)?;
    Ok(out.ledger)
}

fn apply_overrides(cli: &Cli, cfg: &mut RunConfig) {
    if let Some(s) = cli.seed {
        cfg.backend.seed = s;
    }
    if let Some(d) = &cli.out_dir {
        cfg.output.dir = d.clone();
    }
    if let Some(b) = cli.backend {
        cfg.backend.nu = match b {
            BackendArg::Layercake => NuBackend::Layercake,
            BackendArg::Mc => NuBackend::Mc,
        };
    }
    if let Some(n) = cli.mc_samples {
        cfg.backend.mc_samples = n;
    }
}

fn execute(cli: &Cli) -> u8 {
    let path = match &cli.command {
        Command::Run { config } | Command::Verify { config, .. } => config,
    };
    let mut cfg = match RunConfig::load(path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    apply_overrides(cli, &mut cfg);
    let outcome = match cli.command {
        Command::Run { .. } => run_experiment(&cfg).map(|r| {
            println!(
                "sup error {:.6e} (eps {}), min denominator {:.6}, net size {}",
                r.error.sup_error, cfg.epsilon, r.error.min_denominator, r.net.size
            );
            for c in r.invariants.iter().filter(|c| c.violations > 0) {
                println!("violated: {} ({} of {})", c.name, c.violations, c.checked);
            }
            r.passed
        }),
        Command::Verify { suite, .. } => verify_suite(&cfg, suite).map(|l| {
            for p in &l.properties {
                let tag = if p.passed() { "ok  " } else { "FAIL" };
                println!("{tag} {:<44} {:>9} checked {:>6} violations  worst {:.3e}", p.name, p.checked, p.violations, p.worst_margin);
            }
            l.passed()
        }),
    };
    match outcome {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_INVARIANT,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.workers {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| execute(&cli)),
            Err(e) => {
                eprintln!("error: {e}");
                EXIT_CONFIG
            }
        },
        None => execute(&cli),
    };
    ExitCode::from(code)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Capacity { requested: 10, cap: 1 }), EXIT_CAPACITY);
        assert_eq!(exit_code(&Error::Config("x".into())), EXIT_CONFIG);
        assert_eq!(exit_code(&Error::InvariantViolation("x".into())), EXIT_INVARIANT);
    }

    #[test]
    fn parses_flags() {
        let cli = Cli::try_parse_from(["analytic-approx", "verify", "c.toml", "--suite", "lemma3", "--seed", "4", "--backend", "mc"]).unwrap();
        assert_eq!(cli.seed, Some(4));
        assert!(matches!(cli.command, Command::Verify { suite: Suite::Mollifier, .. }));
    }
}
