//! Command-line front end. Data goes to stdout, diagnostics to stderr.
//! Exit codes: 0 ok, 1 validation failure, 2 usage, 3 I/O.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::error::Error;
use crate::mispricing::{p_trade, MarketParams};
use crate::pool::{FeeSchedule, PoolModel};
use crate::rates::{frontier, rate_report};
use crate::sim::{path_rng, simulate_arrivals, write_event_log, Recording};
use crate::validate::{self, ValidateOptions, PTRADE_BLOCK_TIMES_S, PTRADE_GAMMA_BP};

#[derive(Parser, Debug)]
#[command(
    name = "cfmm-arb",
    about = "Arbitrage, fee and mispricing analytics for constant function market makers",
    version
)]
struct Cli {
    /// Optional key=value config file; flags take precedence over it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Daily volatility as a fraction (default 0.05).
    #[arg(long, global = true)]
    sigma_daily: Option<f64>,
    /// Mean block (inter-arrival) time in seconds (default 12).
    #[arg(long, global = true)]
    block_time_s: Option<f64>,
    /// Comma-separated fee levels in basis points.
    #[arg(long, global = true)]
    gamma_bp: Option<String>,
    /// Buy-side fee in basis points (asymmetric mode, with --sell-fee-bp).
    #[arg(long, global = true)]
    buy_fee_bp: Option<f64>,
    /// Sell-side fee in basis points (asymmetric mode, with --buy-fee-bp).
    #[arg(long, global = true)]
    sell_fee_bp: Option<f64>,
    /// Pool spec: `cpmm` or `gmm:<weight>` (default cpmm).
    #[arg(long, global = true)]
    pool: Option<String>,
    /// Pool level constant L (default 1).
    #[arg(long, global = true)]
    level: Option<f64>,
    /// Current market price P0 (default 1).
    #[arg(long, global = true)]
    price: Option<f64>,
    /// Daily price drift mu (default sigma^2/2, i.e. driftless mispricing).
    #[arg(long, global = true)]
    mu_daily: Option<f64>,
    /// RNG seed (default 2).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Number of Monte Carlo paths (default 200).
    #[arg(long, global = true)]
    paths: Option<usize>,
    /// Number of arrivals for arrival-driven runs (default 10000).
    #[arg(long, global = true)]
    arrivals: Option<u64>,
    /// Output format: csv or json (default csv).
    #[arg(long, global = true)]
    out: Option<String>,
    /// Reduced samples with widened tolerances.
    #[arg(long, global = true)]
    quick: bool,
    /// Convert basis points compounding: gamma+ = ln(1+f), gamma- = -ln(1-f).
    #[arg(long, global = true)]
    compound_fee: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Trade-probability table over a (block time, fee) grid.
    PtradeTable,
    /// Accuracy/arbitrage frontier rows, one per fee level.
    Frontier,
    /// Analytic rate report for a single configuration.
    Rates,
    /// Simulate one path and dump its event log.
    Simulate {
        /// Write the event log to this file instead of stdout.
        #[arg(long)]
        out_file: Option<PathBuf>,
    },
    /// Run the self-check battery.
    Validate {
        /// Scale factor on all tolerances (must be positive).
        #[arg(long)]
        tolerance: Option<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum OutputFormat {
    Csv,
    Json,
}

/// Fully resolved run configuration, units already converted:
/// rates per day, fees in natural log units.
struct RunConfig {
    params: MarketParams,
    block_time_s: f64,
    gammas: Vec<f64>,
    fees: FeeSchedule,
    pool: PoolModel,
    price: f64,
    seed: u64,
    paths: usize,
    arrivals: u64,
    out: OutputFormat,
    quick: bool,
}

fn parse_config_file(path: &PathBuf) -> Result<HashMap<String, String>, Error> {
    let text = fs::read_to_string(path)?;
    let mut map = HashMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!("{}:{}: expected key=value", path.display(), lineno + 1))
        })?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

fn file_val<T: std::str::FromStr>(
    file: &HashMap<String, String>,
    key: &str,
) -> Result<Option<T>, Error> {
    match file.get(key) {
        None => Ok(None),
        Some(raw) => raw
            .parse()
            .map(Some)
            .map_err(|_| Error::Config(format!("config key {key}: cannot parse {raw:?}"))),
    }
}

fn parse_pool_spec(spec: &str, level: f64) -> Result<PoolModel, Error> {
    if spec == "cpmm" {
        return PoolModel::constant_product(level);
    }
    if let Some(w) = spec.strip_prefix("gmm:") {
        let w: f64 = w
            .parse()
            .map_err(|_| Error::Config(format!("bad pool weight in {spec:?}")))?;
        return PoolModel::geometric_mean(level, w);
    }
    Err(Error::Config(format!(
        "unknown pool spec {spec:?}; expected cpmm or gmm:<weight>"
    )))
}

fn parse_gamma_list(raw: &str, compound: bool) -> Result<Vec<f64>, Error> {
    let mut out = Vec::new();
    for part in raw.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let bp: f64 = part
            .parse()
            .map_err(|_| Error::Config(format!("bad fee level {part:?} in --gamma-bp")))?;
        if bp < 0.0 {
            return Err(Error::Config(format!("fee level must be non-negative, got {bp}")));
        }
        out.push(bp_to_gamma(bp, compound));
    }
    if out.is_empty() {
        return Err(Error::Config("empty fee list".into()));
    }
    Ok(out)
}

/// The single place basis points become log fees. The direct convention is
/// the default; compounding maps the fee fraction through ln(1 ± f).
fn bp_to_gamma(bp: f64, compound: bool) -> f64 {
    if compound {
        (1.0 + bp * 1e-4).ln()
    } else {
        bp * 1e-4
    }
}

fn resolve(cli: &Cli) -> Result<RunConfig, Error> {
    let file = match &cli.config {
        Some(path) => parse_config_file(path)?,
        None => HashMap::new(),
    };
    let sigma = cli
        .sigma_daily
        .or(file_val(&file, "sigma-daily")?)
        .unwrap_or(0.05);
    let block_time_s = cli
        .block_time_s
        .or(file_val(&file, "block-time-s")?)
        .unwrap_or(12.0);
    if !(block_time_s > 0.0) {
        return Err(Error::Config(format!("block time must be positive, got {block_time_s}")));
    }
    let lambda = 86_400.0 / block_time_s;
    let mu = cli
        .mu_daily
        .or(file_val(&file, "mu-daily")?)
        .unwrap_or(0.5 * sigma * sigma);
    let params = MarketParams::new(mu, sigma, lambda)
        .map_err(|e| Error::Config(e.to_string()))?;

    let compound = cli.compound_fee || file_val(&file, "compound-fee")?.unwrap_or(false);
    let gamma_raw: Option<String> = cli.gamma_bp.clone().or(file_val(&file, "gamma-bp")?);
    let gammas = match &gamma_raw {
        Some(raw) => parse_gamma_list(raw, compound)?,
        None => vec![bp_to_gamma(30.0, compound)],
    };

    let buy = cli.buy_fee_bp.or(file_val(&file, "buy-fee-bp")?);
    let sell = cli.sell_fee_bp.or(file_val(&file, "sell-fee-bp")?);
    let fees = match (buy, sell) {
        (Some(b), Some(s)) => {
            let gp = if cli.compound_fee { (1.0 + b * 1e-4).ln() } else { b * 1e-4 };
            let gm = if cli.compound_fee { -(1.0 - s * 1e-4).ln() } else { s * 1e-4 };
            FeeSchedule::new(gp, gm).map_err(|e| Error::Config(e.to_string()))?
        }
        (None, None) => FeeSchedule::symmetric(gammas[0]).map_err(|e| Error::Config(e.to_string()))?,
        _ => {
            return Err(Error::Config(
                "--buy-fee-bp and --sell-fee-bp must be given together".into(),
            ))
        }
    };

    let level = cli.level.or(file_val(&file, "level")?).unwrap_or(1.0);
    let pool_spec: String = cli
        .pool
        .clone()
        .or(file_val(&file, "pool")?)
        .unwrap_or_else(|| "cpmm".to_string());
    let pool = parse_pool_spec(&pool_spec, level)?;
    let price = cli.price.or(file_val(&file, "price")?).unwrap_or(1.0);
    if !(price > 0.0) {
        return Err(Error::Config(format!("price must be positive, got {price}")));
    }

    let out = match cli
        .out
        .clone()
        .or(file_val(&file, "out")?)
        .unwrap_or_else(|| "csv".to_string())
        .as_str()
    {
        "csv" => OutputFormat::Csv,
        "json" => OutputFormat::Json,
        other => return Err(Error::Config(format!("unknown output format {other:?}"))),
    };

    Ok(RunConfig {
        params,
        block_time_s,
        gammas,
        fees,
        pool,
        price,
        seed: cli.seed.or(file_val(&file, "seed")?).unwrap_or(2),
        paths: cli.paths.or(file_val(&file, "paths")?).unwrap_or(200),
        arrivals: cli.arrivals.or(file_val(&file, "arrivals")?).unwrap_or(10_000),
        out,
        quick: cli.quick || file_val(&file, "quick")?.unwrap_or(false),
    })
}

fn cmd_ptrade_table(cli: &Cli, cfg: &RunConfig) -> Result<(), Error> {
    // default grid: the reference block times x fee levels; explicit flags
    // narrow it to the requested values
    let block_times: Vec<f64> = if cli.block_time_s.is_some() {
        vec![cfg.block_time_s]
    } else {
        PTRADE_BLOCK_TIMES_S.to_vec()
    };
    let gammas: Vec<f64> = if cli.gamma_bp.is_some() {
        cfg.gammas.clone()
    } else {
        PTRADE_GAMMA_BP.iter().map(|bp| bp_to_gamma(*bp, cli.compound_fee)).collect()
    };
    let mut rows = Vec::new();
    for &dt in &block_times {
        let params = MarketParams::new(cfg.params.mu, cfg.params.sigma, 86_400.0 / dt)?;
        for &gamma in &gammas {
            let fees = FeeSchedule::symmetric(gamma)?;
            rows.push((dt, gamma * 1e4, p_trade(&params, &fees)?));
        }
    }
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match cfg.out {
        OutputFormat::Csv => {
            writeln!(out, "block_time_s,gamma_bp,ptrade")?;
            for (dt, bp, p) in rows {
                writeln!(out, "{dt},{bp},{p}")?;
            }
        }
        OutputFormat::Json => {
            let objs: Vec<_> = rows
                .iter()
                .map(|(dt, bp, p)| {
                    serde_json::json!({"block_time_s": dt, "gamma_bp": bp, "ptrade": p})
                })
                .collect();
            writeln!(out, "{}", serde_json::to_string_pretty(&objs).unwrap())?;
        }
    }
    Ok(())
}

fn cmd_frontier(cli: &Cli, cfg: &RunConfig) -> Result<(), Error> {
    let gammas: Vec<f64> = if cli.gamma_bp.is_some() || cli.config.is_some() {
        cfg.gammas.clone()
    } else {
        // default: the reference table's fee grid
        validate::parse_reference_table()
            .iter()
            .map(|r| bp_to_gamma(r[0], cli.compound_fee))
            .collect()
    };
    let rows = frontier(&cfg.params, &gammas, &cfg.pool)?;
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match cfg.out {
        OutputFormat::Csv => {
            writeln!(out, "gamma,arb,stdev,ptr,lvrptr,lvr,pcterror")?;
            for r in rows {
                writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    r.gamma, r.arb, r.stdev, r.ptr, r.lvrptr, r.lvr, r.pcterror
                )?;
            }
        }
        OutputFormat::Json => {
            writeln!(out, "{}", serde_json::to_string_pretty(&rows).unwrap())?;
        }
    }
    Ok(())
}

fn cmd_rates(cfg: &RunConfig) -> Result<(), Error> {
    let report = rate_report(&cfg.pool, cfg.price, &cfg.params, &cfg.fees)?;
    if !report.arb_rate.is_finite() {
        eprintln!(
            "warning: arbitrage rate diverges at these parameters (blocks too slow for the \
             volatility); reporting inf"
        );
    }
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match cfg.out {
        OutputFormat::Csv => {
            writeln!(
                out,
                "price,pool_value,lvr_rate,arb_rate,fee_rate,arb_rate_normalized,\
                 fee_rate_normalized,p_trade,sigma_z,arb_asymptotic,fee_asymptotic,method"
            )?;
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{:?}",
                report.price,
                report.pool_value,
                report.lvr_rate,
                report.arb_rate,
                report.fee_rate,
                report.arb_rate_normalized,
                report.fee_rate_normalized,
                report.p_trade,
                report.sigma_z,
                report.arb_asymptotic,
                report.fee_asymptotic,
                report.method
            )?;
        }
        OutputFormat::Json => {
            writeln!(out, "{}", serde_json::to_string_pretty(&report).unwrap())?;
        }
    }
    Ok(())
}

fn cmd_simulate(cfg: &RunConfig, out_file: &Option<PathBuf>, ensemble: bool) -> Result<(), Error> {
    let mut rng = path_rng(cfg.seed, 0);
    let z0 = match crate::mispricing::stationary_law(&cfg.params, &cfg.fees) {
        Ok(law) => law.sample(&mut rng),
        Err(_) => 0.0,
    };
    let run = simulate_arrivals(
        &cfg.pool,
        &cfg.fees,
        &cfg.params,
        cfg.price,
        z0,
        cfg.arrivals,
        &mut rng,
        Recording::Events,
    )?;
    let events = run.event_log.as_deref().unwrap_or(&[]);
    match out_file {
        Some(path) => {
            let mut f = fs::File::create(path)?;
            write_event_log(events, &mut f)?;
        }
        None => {
            let stdout = std::io::stdout();
            write_event_log(events, &mut stdout.lock())?;
        }
    }
    eprintln!(
        "horizon {:.6} days, {} arrivals, {} trades, arb_total {:.6e} ({:.6e}/day), \
         fee_total {:.6e} ({:.6e}/day)",
        run.horizon,
        run.n_arrivals,
        run.n_trades,
        run.arb_total,
        run.arb_total / run.horizon,
        run.fee_total,
        run.fee_total / run.horizon
    );
    if ensemble && cfg.paths >= 2 {
        // ensemble summary across independent streams of the same seed
        let horizon = cfg.arrivals as f64 / cfg.params.lambda;
        let (arb, fee) = crate::sim::estimate_rates(
            &cfg.pool,
            &cfg.fees,
            &cfg.params,
            cfg.price,
            cfg.paths,
            horizon,
            cfg.seed,
        )?;
        eprintln!(
            "ensemble ({} paths x {:.4} days): arb {:.6e} +- {:.2e} /day, fee {:.6e} +- {:.2e} /day",
            cfg.paths, horizon, arb.mean, arb.std_error, fee.mean, fee.std_error
        );
    }
    Ok(())
}

/// Returns the process exit code.
fn cmd_validate(cfg: &RunConfig, tolerance: Option<f64>) -> Result<i32, Error> {
    if let Some(t) = tolerance {
        if !(t > 0.0) {
            return Err(Error::Config(format!("tolerance scale must be positive, got {t}")));
        }
    }
    let scale = tolerance.unwrap_or(1.0);
    let opts = ValidateOptions { seed: cfg.seed, quick: cfg.quick };
    let mut failed = false;
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    for check in validate::run_all(&opts) {
        let tol = check.tolerance * scale;
        let ok = check.statistic <= tol;
        failed |= !ok;
        writeln!(
            out,
            "{:<26} statistic={:<12.4e} tolerance={:<12.4e} {}",
            check.name,
            check.statistic,
            tol,
            if ok { "PASS" } else { "FAIL" }
        )?;
        eprintln!("  {}: {}", check.name, check.detail);
    }
    Ok(if failed { 1 } else { 0 })
}

fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Io(_) => 3,
        Error::Config(_) | Error::Domain(_) | Error::UnsupportedConfiguration(_) => 2,
        _ => 1,
    }
}

/// Parse arguments and run; returns the process exit code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    let cfg = match resolve(&cli) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code_for(&e);
        }
    };
    let result = match &cli.command {
        Command::PtradeTable => cmd_ptrade_table(&cli, &cfg).map(|_| 0),
        Command::Frontier => cmd_frontier(&cli, &cfg).map(|_| 0),
        Command::Rates => cmd_rates(&cfg).map(|_| 0),
        Command::Simulate { out_file } => {
            cmd_simulate(&cfg, out_file, cli.paths.is_some()).map(|_| 0)
        }
        Command::Validate { tolerance } => cmd_validate(&cfg, *tolerance),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}
