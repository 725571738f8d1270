//! Argument parsing and command dispatch.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use simloc_core::ensemble::EnsembleResult;

use crate::checks::{genfun_suite, selftest_suite, CheckItem};
use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{fmt_num, timestamp, Manifest, OutputSet, RunLock, Table};
use crate::run::{analytic_grid, compare_rows, simulate, thread_pool, AnalyticRow, ComparisonRow, Mode};

#[derive(Debug, Parser)]
#[command(name = "simloc", version, about = "Eigenstate moments of the Anderson model on a simplex")]
pub struct Cli {
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true, env = "SIMLOC_THREADS")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Monte Carlo ensembles: moments.csv, dos csv files, manifest.json.
    Simulate(RunArgs),
    /// Analytic moments: analytic.csv (or stdout only without an output directory).
    Analytic(AnalyticArgs),
    /// Monte Carlo against the thermodynamic-limit moments: compare.csv.
    Compare(RunArgs),
    /// Checks of the general field representation at small N.
    GenfunCheck {
        /// Also run the N=4 simplex comparison (several minutes).
        #[arg(long)]
        slow: bool,
    },
    /// Special-function and quadrature oracles.
    Selftest,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory (overrides `output_dir` of the config).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Thermo,
    #[value(name = "finite_n")]
    FiniteN,
}

#[derive(Debug, Args)]
pub struct AnalyticArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long)]
    pub w: Option<f64>,
    #[arg(long, value_enum, default_value = "thermo")]
    pub mode: ModeArg,
    /// Lattice size for `--mode finite_n` (default: `n` of the config).
    #[arg(long = "finite-n")]
    pub finite_n: Option<usize>,
}

/// Parses `argv` (program name first), runs the command and returns the exit
/// code.
pub fn run_command<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Simulate(args) => cmd_simulate(args, cli.threads),
        Command::Compare(args) => cmd_compare(args, cli.threads),
        Command::Analytic(args) => cmd_analytic(args, cli.threads),
        Command::GenfunCheck { slow } => {
            let pool = thread_pool(cli.threads)?;
            report(&genfun_suite(&pool, *slow))
        }
        Command::Selftest => report(&selftest_suite()),
    }
}

fn report(items: &[CheckItem]) -> Result<(), CliError> {
    for item in items {
        println!("{item}");
    }
    let failed = items.iter().filter(|i| !i.passed).count();
    if failed > 0 {
        return Err(CliError::Comparison(format!("{failed} of {} checks failed", items.len())));
    }
    Ok(())
}

fn load_run_config(args: &RunArgs) -> Result<(RunConfig, PathBuf), CliError> {
    let mut cfg = RunConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &args.out {
        cfg.output_dir = Some(out.clone());
    }
    let dir = cfg
        .output_dir
        .clone()
        .ok_or_else(|| CliError::Config("no output directory: pass --out or set `output_dir`".into()))?;
    Ok((cfg, dir))
}

fn threads_used(threads: Option<usize>) -> usize {
    threads.unwrap_or_else(rayon::current_num_threads)
}

fn moments_table(sims: &[EnsembleResult]) -> Table {
    let mut t = Table::new(&["q", "w", "n", "estimate", "std_error", "states_used"]);
    for m in sims.iter().flat_map(|r| &r.moments) {
        t.push(vec![
            fmt_num(m.q),
            fmt_num(m.w),
            m.n.to_string(),
            fmt_num(m.estimate),
            fmt_num(m.std_error),
            m.states_used.to_string(),
        ]);
    }
    t
}

fn dos_table(r: &EnsembleResult) -> Table {
    let mut t = Table::new(&["bin_center", "density", "std_error"]);
    for k in 0..r.dos.bins() {
        let (d, se) = r.dos.density(k);
        t.push(vec![fmt_num(r.dos.bin_center(k)), fmt_num(d), fmt_num(se)]);
    }
    t
}

/// `dos.csv` for a single disorder strength, `dos_w<k>.csv` (k indexing
/// `w_values`) otherwise.
pub fn dos_file_name(k: usize, count: usize) -> String {
    if count == 1 {
        "dos.csv".into()
    } else {
        format!("dos_w{k}.csv")
    }
}

fn analytic_table(rows: &[AnalyticRow]) -> Table {
    let mut t = Table::new(&["q", "w", "mode", "n_or_inf", "value", "error_estimate"]);
    for r in rows {
        t.push(vec![
            fmt_num(r.q),
            fmt_num(r.w),
            r.mode.label().into(),
            r.mode.n_or_inf(),
            fmt_num(r.value),
            fmt_num(r.error_estimate),
        ]);
    }
    t
}

fn compare_table(rows: &[ComparisonRow]) -> Table {
    let mut t = Table::new(&[
        "q",
        "w",
        "n",
        "estimate",
        "std_error",
        "states_used",
        "analytic",
        "analytic_error",
        "rel_dev",
        "sigma_dev",
    ]);
    for r in rows {
        t.push(vec![
            fmt_num(r.q),
            fmt_num(r.w),
            r.n.to_string(),
            fmt_num(r.estimate),
            fmt_num(r.std_error),
            r.states_used.to_string(),
            fmt_num(r.analytic),
            fmt_num(r.analytic_error),
            fmt_num(r.rel_dev),
            fmt_num(r.sigma_dev),
        ]);
    }
    t
}

fn add_simulation(out: &mut OutputSet, sims: &[EnsembleResult]) -> Result<(), CliError> {
    out.add_table("moments.csv", &moments_table(sims))?;
    for (k, r) in sims.iter().enumerate() {
        out.add_table(&dos_file_name(k, sims.len()), &dos_table(r))?;
    }
    Ok(())
}

fn finish(
    dir: &Path,
    command: &str,
    config: Option<RunConfig>,
    started: String,
    threads: usize,
    evaluations: BTreeMap<String, u64>,
    out: &OutputSet,
) -> Result<(), CliError> {
    let (files, content_hash) = out.hashes();
    let manifest = Manifest {
        command: command.into(),
        config,
        library_version: env!("CARGO_PKG_VERSION").into(),
        started,
        finished: timestamp(),
        threads,
        evaluations,
        files,
        content_hash,
    };
    out.commit(dir, &manifest)
}

fn print_moments(sims: &[EnsembleResult]) {
    for m in sims.iter().flat_map(|r| &r.moments) {
        println!(
            "q={} w={} n={}: {:.6} +- {:.6} ({} states)",
            m.q, m.w, m.n, m.estimate, m.std_error, m.states_used
        );
    }
}

fn cmd_simulate(args: &RunArgs, threads: Option<usize>) -> Result<(), CliError> {
    let started = timestamp();
    let (cfg, dir) = load_run_config(args)?;
    let _lock = RunLock::acquire(&dir)?;
    let pool = thread_pool(threads)?;
    let sims = simulate(&pool, &cfg)?;
    let mut out = OutputSet::default();
    add_simulation(&mut out, &sims)?;
    let mut evals = BTreeMap::new();
    evals.insert("simulate.realizations".into(), cfg.realizations * cfg.w_values.len() as u64);
    print_moments(&sims);
    finish(&dir, "simulate", Some(cfg), started, threads_used(threads), evals, &out)
}

fn cmd_compare(args: &RunArgs, threads: Option<usize>) -> Result<(), CliError> {
    let started = timestamp();
    let (cfg, dir) = load_run_config(args)?;
    let _lock = RunLock::acquire(&dir)?;
    let pool = thread_pool(threads)?;
    let sims = simulate(&pool, &cfg)?;
    let analytic = analytic_grid(&pool, &cfg.w_values, &cfg.q_values, Mode::Thermo)?;
    let rows = compare_rows(&sims, &analytic);

    let mut out = OutputSet::default();
    add_simulation(&mut out, &sims)?;
    out.add_table("analytic.csv", &analytic_table(&analytic))?;
    out.add_table("compare.csv", &compare_table(&rows))?;
    let mut evals = BTreeMap::new();
    evals.insert("simulate.realizations".into(), cfg.realizations * cfg.w_values.len() as u64);
    evals.insert("analytic.integrand".into(), analytic.iter().map(|r| r.evaluations).sum());
    let threshold = cfg.tolerances.sigma_threshold;
    finish(&dir, "compare", Some(cfg), started, threads_used(threads), evals, &out)?;

    let mut bad = 0;
    for r in &rows {
        let ok = r.sigma_dev.abs() <= threshold;
        bad += usize::from(!ok);
        println!(
            "{} q={} w={}: Monte Carlo {:.6} +- {:.6}, analytic {:.6}, rel_dev {:+.4}, sigma_dev {:+.2}",
            if ok { "ok  " } else { "FAIL" },
            r.q,
            r.w,
            r.estimate,
            r.std_error,
            r.analytic,
            r.rel_dev,
            r.sigma_dev
        );
    }
    if bad > 0 {
        return Err(CliError::Comparison(format!(
            "{bad} of {} rows exceed {threshold} standard errors",
            rows.len()
        )));
    }
    Ok(())
}

fn cmd_analytic(args: &AnalyticArgs, threads: Option<usize>) -> Result<(), CliError> {
    let started = timestamp();
    let cfg = args.config.as_deref().map(RunConfig::load).transpose()?;
    let w_values = match (args.w, &cfg) {
        (Some(w), _) => vec![w],
        (None, Some(c)) => c.w_values.clone(),
        (None, None) => return Err(CliError::Config("pass --w or --config".into())),
    };
    let q_values = match (args.q, &cfg) {
        (Some(q), _) => vec![q],
        (None, Some(c)) => c.q_values.clone(),
        (None, None) => return Err(CliError::Config("pass --q or --config".into())),
    };
    if let Some(w) = w_values.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
        return Err(CliError::Config(format!("--w must be positive, got {w}")));
    }
    if let Some(q) = q_values.iter().find(|q| !(q.is_finite() && **q > 1.0)) {
        return Err(CliError::Config(format!("--q must exceed 1, got {q}")));
    }
    let mode = match args.mode {
        ModeArg::Thermo => Mode::Thermo,
        ModeArg::FiniteN => {
            let n = args
                .finite_n
                .or(cfg.as_ref().map(|c| c.n))
                .ok_or_else(|| CliError::Config("finite_n mode needs --finite-n or a config".into()))?;
            if n < 2 || n % 2 != 0 {
                return Err(CliError::Config(format!("--finite-n must be even and >= 2, got {n}")));
            }
            Mode::FiniteN(n)
        }
    };
    let dir = args.out.clone().or_else(|| cfg.as_ref().and_then(|c| c.output_dir.clone()));
    let _lock = dir.as_deref().map(RunLock::acquire).transpose()?;
    let pool = thread_pool(threads)?;
    let rows = analytic_grid(&pool, &w_values, &q_values, mode)?;
    for r in &rows {
        println!(
            "q={} w={} {} n={}: {:.10} +- {:.2e}",
            r.q,
            r.w,
            r.mode.label(),
            r.mode.n_or_inf(),
            r.value,
            r.error_estimate
        );
    }
    if let Some(dir) = dir {
        let mut out = OutputSet::default();
        out.add_table("analytic.csv", &analytic_table(&rows))?;
        let mut evals = BTreeMap::new();
        evals.insert("analytic.integrand".into(), rows.iter().map(|r| r.evaluations).sum());
        finish(&dir, "analytic", cfg, started, threads_used(threads), evals, &out)?;
    }
    Ok(())
}
