//! The self-check battery behind `cfmm-arb validate`: every analytic result
//! in the crate is cross-checked against an independent oracle (reference
//! table, quadrature, Monte Carlo, generator residuals, brute force).

use rand::Rng;
use serde::Serialize;

use crate::generator::{generator_residual, TestFunction};
use crate::mispricing::{
    mispricing_stdev, nonsymmetric_law, p_trade, stationary_law, MarketParams,
};
use crate::pool::{arb_profit, fee_paid, FeeSchedule, PoolModel};
use crate::rates::{arb_rate, arb_rate_cpmm, fee_rate_cpmm, frontier, lvr_rate};
use crate::sim::{estimate_rates, estimate_stationary, path_rng, simulate_path, Recording};

/// Reference frontier table (σ = 5%/day, Δt = 12 s, constant product):
/// frozen regression values for the closed forms.
pub const FRONTIER_REFERENCE_CSV: &str = include_str!("data/frontier_reference.csv");

/// Reference trade-probability table: rows are mean block times in seconds,
/// columns fee levels in basis points, cells P_trade in percent (1 decimal).
pub const PTRADE_BLOCK_TIMES_S: [f64; 5] = [600.0, 120.0, 12.0, 2.0, 0.05];
pub const PTRADE_GAMMA_BP: [f64; 5] = [1.0, 5.0, 10.0, 30.0, 100.0];
pub const PTRADE_REFERENCE_PCT: [[f64; 5]; 5] = [
    [96.7, 85.5, 74.7, 49.6, 22.8],
    [92.9, 72.5, 56.9, 30.5, 11.6],
    [80.7, 45.6, 29.5, 12.3, 4.0],
    [63.0, 25.4, 14.5, 5.4, 1.7],
    [21.2, 5.1, 2.6, 0.9, 0.3],
];

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    /// Worst observed statistic, scaled so that `statistic <= tolerance`
    /// means pass.
    pub statistic: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn new(name: &str, statistic: f64, tolerance: f64, detail: String) -> Self {
        CheckResult {
            name: name.to_string(),
            statistic,
            tolerance,
            passed: statistic <= tolerance,
            detail,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ValidateOptions {
    pub seed: u64,
    pub quick: bool,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        ValidateOptions { seed: 2, quick: false }
    }
}

pub fn parse_reference_table() -> Vec<[f64; 7]> {
    FRONTIER_REFERENCE_CSV
        .lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|line| {
            let mut row = [0.0; 7];
            for (i, field) in line.split(',').enumerate() {
                row[i] = field.parse().expect("bad reference table field");
            }
            row
        })
        .collect()
}

fn desk_params() -> MarketParams {
    MarketParams::driftless(0.05, 86_400.0 / 12.0).unwrap()
}

/// Criterion 1: the closed forms regenerate the reference frontier table to
/// six significant digits.
pub fn check_frontier_table() -> CheckResult {
    let params = desk_params();
    let pool = PoolModel::constant_product(1.0).unwrap();
    let reference = parse_reference_table();
    let gammas: Vec<f64> = reference.iter().map(|r| r[0] * 1e-4).collect();
    let rows = match frontier(&params, &gammas, &pool) {
        Ok(r) => r,
        Err(e) => return CheckResult::new("frontier-table", f64::INFINITY, 1e-6, e.to_string()),
    };
    let mut worst = 0.0_f64;
    let mut where_ = String::new();
    for (row, expect) in rows.iter().zip(&reference) {
        let got = [row.gamma, row.arb, row.stdev, row.ptr, row.lvrptr, row.lvr, row.pcterror];
        for (col, (g, e)) in got.iter().zip(expect).enumerate() {
            // the pcterror column is printed with ~5 significant digits,
            // so compare it at that precision; everything else at 6+
            let scale = if col == 6 { 5e-5 } else { 1e-6 };
            let rel = ((g - e) / e).abs() / scale;
            if rel > worst {
                worst = rel;
                where_ = format!("gamma={} col={}", expect[0], col);
            }
        }
    }
    CheckResult::new(
        "frontier-table",
        worst,
        1.0,
        format!(
            "worst cell at {where_}: {worst:.3} of the printed-precision budget over {} rows",
            reference.len()
        ),
    )
}

/// Criterion 2: the 25-cell trade-probability table, each cell within 0.1
/// percentage point after rounding to the table's printed precision.
pub fn check_ptrade_table() -> CheckResult {
    let mut worst = 0.0_f64;
    let mut where_ = String::new();
    for (i, &dt) in PTRADE_BLOCK_TIMES_S.iter().enumerate() {
        let params = MarketParams::driftless(0.05, 86_400.0 / dt).unwrap();
        for (j, &bp) in PTRADE_GAMMA_BP.iter().enumerate() {
            let fees = FeeSchedule::symmetric(bp * 1e-4).unwrap();
            let pct = p_trade(&params, &fees).unwrap() * 100.0;
            // the reference prints one decimal; compare at that precision
            let rounded = (pct * 10.0).round() / 10.0;
            let diff = (rounded - PTRADE_REFERENCE_PCT[i][j]).abs();
            if diff > worst {
                worst = diff;
                where_ = format!("dt={dt}s gamma={bp}bp ({rounded} vs {})", PTRADE_REFERENCE_PCT[i][j]);
            }
        }
    }
    CheckResult::new(
        "ptrade-table",
        worst,
        0.1 + 1e-9,
        format!("max cell gap {worst:.2} pp at {where_}"),
    )
}

/// Criterion 3: quadrature agrees with the constant-product closed form
/// across 50 (γ, λ) pairs.
pub fn check_quadrature_oracle() -> CheckResult {
    let pool = PoolModel::constant_product(1.0).unwrap();
    let v = pool.value(1.0).unwrap();
    let gammas_bp = [1.0, 5.0, 10.0, 20.0, 30.0, 50.0, 80.0, 100.0, 150.0, 300.0];
    let lambdas = [0.02, 1.0, 50.0, 7200.0, 43_200.0];
    let mut worst = 0.0_f64;
    let mut where_ = String::new();
    let mut n = 0;
    for &lam in &lambdas {
        let params = MarketParams::driftless(0.05, lam).unwrap();
        for &bp in &gammas_bp {
            let fees = FeeSchedule::symmetric(bp * 1e-4).unwrap();
            let closed = arb_rate_cpmm(&params, &fees).unwrap();
            let quad = arb_rate(&pool, 1.0, &params, &fees).unwrap() / v;
            let rel = ((quad - closed) / closed).abs();
            n += 1;
            if rel > worst {
                worst = rel;
                where_ = format!("gamma={bp}bp lambda={lam}");
            }
        }
    }
    CheckResult::new(
        "quadrature-vs-closed-form",
        worst,
        1e-8,
        format!("max relative gap {worst:.3e} at {where_} over {n} pairs"),
    )
}

/// Criterion 4: Monte Carlo rate estimates agree with the closed forms
/// within 3 path-level standard errors (5 in quick mode).
pub fn check_mc_rates(opts: &ValidateOptions) -> CheckResult {
    let params = desk_params();
    let fees = FeeSchedule::symmetric(0.003).unwrap();
    let pool = PoolModel::constant_product(1.0).unwrap();
    let v = pool.value(1.0).unwrap();
    let (n_paths, horizon, k) = if opts.quick { (50, 0.5, 5.0) } else { (200, 2.0, 3.0) };
    let (arb, fee) = match estimate_rates(&pool, &fees, &params, 1.0, n_paths, horizon, opts.seed) {
        Ok(r) => r,
        Err(e) => return CheckResult::new("mc-rates", f64::INFINITY, 1.0, e.to_string()),
    };
    let arb_exact = arb_rate_cpmm(&params, &fees).unwrap() * v;
    let fee_exact = fee_rate_cpmm(&params, &fees).unwrap() * v;
    let arb_dev = (arb.mean - arb_exact).abs() / arb.std_error;
    let fee_dev = (fee.mean - fee_exact).abs() / fee.std_error;
    let stat = (arb_dev / k).max(fee_dev / k);
    CheckResult::new(
        "mc-rates",
        stat,
        1.0,
        format!(
            "arb {:.4e} vs {:.4e} ({arb_dev:.2} se), fee {:.4e} vs {:.4e} ({fee_dev:.2} se), limit {k} se",
            arb.mean, arb_exact, fee.mean, fee_exact
        ),
    )
}

/// One-sample Kolmogorov–Smirnov statistic of `samples` against `cdf`.
/// `samples` is sorted in place.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &mut [f64], cdf: F) -> f64 {
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = samples.len() as f64;
    let mut ks = 0.0_f64;
    for (i, z) in samples.iter().enumerate() {
        let f = cdf(*z);
        ks = ks.max((f - i as f64 / n).abs()).max(((i + 1) as f64 / n - f).abs());
    }
    ks
}

/// Criterion 5: a long single path reproduces the stationary law: trade
/// frequency, mispricing stdev, and the full CDF (Kolmogorov–Smirnov).
pub fn check_mc_stationarity(opts: &ValidateOptions) -> CheckResult {
    let params = desk_params();
    let fees = FeeSchedule::symmetric(0.003).unwrap();
    let pool = PoolModel::constant_product(1.0).unwrap();
    let n: u64 = if opts.quick { 100_000 } else { 1_000_000 };
    let (k_sigma, stdev_tol, ks_tol) = if opts.quick {
        // tolerances widened with the 1/sqrt(n) statistics
        (5.0, 0.03, 0.005 * 10.0_f64.sqrt())
    } else {
        (3.0, 0.01, 0.005)
    };
    let est = match estimate_stationary(&pool, &fees, &params, n, opts.seed) {
        Ok(e) => e,
        Err(e) => return CheckResult::new("mc-stationarity", f64::INFINITY, 1.0, e.to_string()),
    };
    let law = stationary_law(&params, &fees).unwrap();
    let pt = p_trade(&params, &fees).unwrap();
    let se = (pt * (1.0 - pt) / n as f64).sqrt();
    let pt_dev = (est.p_trade_hat - pt).abs() / se;
    let sigma_z = mispricing_stdev(&params, &fees).unwrap();
    let sd_rel = (est.sigma_z_hat - sigma_z).abs() / sigma_z;
    let mut samples = est.z_samples;
    let ks = ks_statistic(&mut samples, |z| law.cdf(z));
    let stat = (pt_dev / k_sigma).max(sd_rel / stdev_tol).max(ks / ks_tol);
    CheckResult::new(
        "mc-stationarity",
        stat,
        1.0,
        format!(
            "p_trade {:.6} vs {:.6} ({pt_dev:.2} se, limit {k_sigma}); sigma_z {:.4e} vs {:.4e} \
             (rel {sd_rel:.4}, limit {stdev_tol}); KS {ks:.5} (limit {ks_tol:.5})",
            est.p_trade_hat, pt, est.sigma_z_hat, sigma_z
        ),
    )
}

/// Criterion 6: generator residuals vanish for the six-function battery
/// under both the symmetric and a drifting law.
pub fn check_generator_residuals() -> CheckResult {
    let fees = FeeSchedule::symmetric(0.003).unwrap();
    let sym_params = desk_params();
    let drift_params =
        MarketParams::new(0.01 + 0.5 * 0.05 * 0.05, 0.05, 86_400.0 / 12.0).unwrap();
    let mut worst = 0.0_f64;
    let mut where_ = String::new();
    for (tag, params, law) in [
        ("symmetric", sym_params, stationary_law(&sym_params, &fees)),
        ("drift", drift_params, nonsymmetric_law(&drift_params, &fees)),
    ] {
        let law = match law {
            Ok(l) => l,
            Err(e) => {
                return CheckResult::new("generator-residuals", f64::INFINITY, 1e-7, e.to_string())
            }
        };
        for tf in TestFunction::battery(&law) {
            match generator_residual(&params, &law, &tf) {
                Ok(r) => {
                    if r.abs() > worst {
                        worst = r.abs();
                        where_ = format!("{tag}/{}", tf.name);
                    }
                }
                Err(e) => {
                    return CheckResult::new(
                        "generator-residuals",
                        f64::INFINITY,
                        1e-7,
                        e.to_string(),
                    )
                }
            }
        }
    }
    CheckResult::new(
        "generator-residuals",
        worst,
        1e-7,
        format!("max |E[Af]| = {worst:.3e} at {where_} (12 law/function pairs)"),
    )
}

/// Criterion 7: fast-block asymptotics at desk scale — the tabulated
/// relative-error column, the ARB+FEE=LVR decomposition, and the λ^(-1/2)
/// scaling of the arbitrage rate.
pub fn check_asymptotics() -> CheckResult {
    // (a) relative error of the LVR x P_trade approximation vs the exact
    // rate must reproduce the reference pcterror column
    let params = desk_params();
    let mut pct_worst = 0.0_f64;
    for row in parse_reference_table() {
        let fees = FeeSchedule::symmetric(row[0] * 1e-4).unwrap();
        let arb = arb_rate_cpmm(&params, &fees).unwrap();
        let lvrptr = 0.05 * 0.05 / 8.0 * p_trade(&params, &fees).unwrap();
        let pcterror = (arb - lvrptr) / arb;
        pct_worst = pct_worst.max((pcterror - row[6]).abs());
    }
    // (b) LVR decomposition at gamma = 10 bp, 2-second blocks
    let fast = MarketParams::driftless(0.05, 86_400.0 / 2.0).unwrap();
    let fees10 = FeeSchedule::symmetric(0.001).unwrap();
    let arb = arb_rate_cpmm(&fast, &fees10).unwrap();
    let fee = fee_rate_cpmm(&fast, &fees10).unwrap();
    let lvr = 0.05 * 0.05 / 8.0;
    let decomp = ((arb + fee - lvr) / lvr).abs();
    // (c) lambda^(-1/2) scaling of the normalized rate
    let mut scale_worst = 0.0_f64;
    let mut scale_where = String::new();
    for bp in [10.0, 30.0] {
        let fees = FeeSchedule::symmetric(bp * 1e-4).unwrap();
        let base = arb_rate_cpmm(&params, &fees).unwrap();
        for k in [4.0, 16.0] {
            let scaled = MarketParams::driftless(0.05, params.lambda * k).unwrap();
            let dev = (k.sqrt() * arb_rate_cpmm(&scaled, &fees).unwrap() / base - 1.0).abs();
            if dev > scale_worst {
                scale_worst = dev;
                scale_where = format!("gamma={bp}bp k={k}");
            }
        }
    }
    let stat = (pct_worst / 1e-9).max(decomp / 1e-3).max(scale_worst / 0.02);
    CheckResult::new(
        "asymptotics",
        stat,
        1.0,
        format!(
            "pcterror column max abs gap {pct_worst:.2e} (limit 1e-9); decomposition {decomp:.2e} \
             (limit 1e-3); scaling deviation {scale_worst:.4} at {scale_where} (limit 0.02)"
        ),
    )
}

/// Criterion 8: structural properties — envelope identities, myopic-trade
/// optimality, density normalization, seed determinism.
pub fn check_properties(opts: &ValidateOptions) -> CheckResult {
    let mut parts: Vec<(f64, f64, String)> = Vec::new();

    // envelope identities by finite differences
    let pools = [
        PoolModel::constant_product(1.0).unwrap(),
        PoolModel::geometric_mean(1.5, 0.3).unwrap(),
    ];
    let mut env_worst = 0.0_f64;
    for pool in &pools {
        for p in [0.2, 0.7, 1.0, 2.5, 8.0] {
            let h = 1e-5 * p;
            let vp = (pool.value(p + h).unwrap() - pool.value(p - h).unwrap()) / (2.0 * h);
            let x = pool.demand_x(p).unwrap();
            env_worst = env_worst.max(((vp - x) / x).abs());
            let xp = (pool.demand_x(p + h).unwrap() - pool.demand_x(p - h).unwrap()) / (2.0 * h);
            let y_prime = pool.marginal_liquidity(p).unwrap();
            env_worst = env_worst.max(((y_prime + p * xp) / y_prime).abs());
            let v2 = (pool.value(p + h).unwrap() - 2.0 * pool.value(p).unwrap()
                + pool.value(p - h).unwrap())
                / (h * h);
            if v2 > 1e-6 {
                env_worst = env_worst.max(v2);
            }
        }
    }
    parts.push((env_worst, 1e-6, format!("envelope {env_worst:.2e}")));

    // myopic trade dominates a brute-force grid of candidate trades
    let pool = PoolModel::constant_product(1.0).unwrap();
    let fees = FeeSchedule::symmetric(0.003).unwrap();
    let mut excess = 0.0_f64;
    let mut rng = path_rng(opts.seed, 99);
    for _ in 0..10 {
        let price: f64 = rng.gen_range(0.5..2.0);
        let mag: f64 = rng.gen_range(0.004..0.05);
        let z = if rng.gen_bool(0.5) { mag } else { -mag };
        let best = arb_profit(&pool, &fees, price, z).unwrap();
        let pre = price * (-z).exp();
        for i in 0..1000 {
            let q = pre * ((2.0 * z) * (i as f64 / 999.0)).exp();
            let dx_out = pool.demand_x(pre).unwrap() - pool.demand_x(q).unwrap();
            let dy = pool.demand_y(pre).unwrap() - pool.demand_y(q).unwrap();
            let fee_factor = if q >= pre { fees.gamma_plus.exp() } else { (-fees.gamma_minus).exp() };
            let profit = price * dx_out + fee_factor * dy;
            excess = excess.max(profit - best);
        }
    }
    parts.push((excess, 1e-12, format!("myopic excess {excess:.2e}")));

    // density normalization
    let params = desk_params();
    let law = stationary_law(&params, &fees).unwrap();
    let lo = law.band_lo - 30.0 / law.tail_rate_minus;
    let hi = law.band_hi + 30.0 / law.tail_rate_plus;
    let mass = crate::quad::adaptive_simpson(&|z| law.density(z), lo, law.band_lo, 1e-14)
        + crate::quad::adaptive_simpson(&|z| law.density(z), law.band_lo, law.band_hi, 1e-14)
        + crate::quad::adaptive_simpson(&|z| law.density(z), law.band_hi, hi, 1e-14);
    parts.push(((mass - 1.0).abs(), 1e-10, format!("density mass gap {:.2e}", (mass - 1.0).abs())));

    // seed determinism, byte-exact
    let run = |seed: u64| {
        let mut rng = path_rng(seed, 0);
        simulate_path(&pool, &fees, &params, 1.0, 0.0, 0.1, &mut rng, Recording::Totals).unwrap()
    };
    let (a, b) = (run(opts.seed), run(opts.seed));
    let deterministic = a.arb_total.to_bits() == b.arb_total.to_bits()
        && a.fee_total.to_bits() == b.fee_total.to_bits()
        && a.n_arrivals == b.n_arrivals;
    parts.push((
        if deterministic { 0.0 } else { 1.0 },
        0.5,
        format!("determinism {}", if deterministic { "ok" } else { "BROKEN" }),
    ));

    // sanity of lvr vs arb orientation while we are here
    let arb = arb_rate_cpmm(&params, &fees).unwrap();
    let lvr = lvr_rate(&pool, 1.0, params.sigma).unwrap() / pool.value(1.0).unwrap();
    parts.push((
        (arb - lvr).max(0.0),
        1e-12,
        format!("arb {arb:.3e} <= lvr {lvr:.3e}"),
    ));
    let _ = fee_paid(&pool, &fees, 1.0, 0.0); // keep the import honest

    let stat = parts
        .iter()
        .map(|(s, tol, _)| s / tol)
        .fold(0.0_f64, f64::max);
    let detail = parts.iter().map(|(_, _, d)| d.as_str()).collect::<Vec<_>>().join("; ");
    CheckResult::new("property-suite", stat, 1.0, detail)
}

/// Run the full battery in order. Each entry corresponds to one acceptance
/// criterion of the crate.
pub fn run_all(opts: &ValidateOptions) -> Vec<CheckResult> {
    vec![
        check_frontier_table(),
        check_ptrade_table(),
        check_quadrature_oracle(),
        check_mc_rates(opts),
        check_mc_stationarity(opts),
        check_generator_residuals(),
        check_asymptotics(),
        check_properties(opts),
    ]
}
