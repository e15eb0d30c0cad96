//! Analytic intensities: loss-versus-rebalancing, exact arbitrage and fee
//! rates via the stationary expectation, the constant-product closed forms,
//! and the fast-block asymptotics.

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::mispricing::{mispricing_stdev, p_trade, MarketParams};
use crate::pool::{arb_profit, fee_paid, FeeSchedule, PoolModel};
use crate::quad::{adaptive_simpson, gauss_laguerre};

/// Serialize possibly-infinite rates as the string "inf" (or "nan") so JSON
/// output stays lossless; plain serde_json would emit null.
fn ser_rate<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else if v.is_nan() {
        s.serialize_str("nan")
    } else {
        s.serialize_str(if *v > 0.0 { "inf" } else { "-inf" })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RateMethod {
    ClosedForm,
    Quadrature,
}

/// Bundle of analytic intensities at one configuration. Rates are in
/// numeraire per day; `*_normalized` divides by the pool value `V(P)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RateReport {
    pub price: f64,
    pub pool_value: f64,
    pub lvr_rate: f64,
    #[serde(serialize_with = "ser_rate")]
    pub arb_rate: f64,
    #[serde(serialize_with = "ser_rate")]
    pub fee_rate: f64,
    #[serde(serialize_with = "ser_rate")]
    pub arb_rate_normalized: f64,
    #[serde(serialize_with = "ser_rate")]
    pub fee_rate_normalized: f64,
    pub p_trade: f64,
    pub sigma_z: f64,
    pub arb_asymptotic: f64,
    pub fee_asymptotic: f64,
    pub method: RateMethod,
}

/// Loss-versus-rebalancing rate `(σ²P/2)·y*'(P)`, the frictionless
/// arbitrage intensity. For the constant-product pool this is
/// `(σ²/8)·V(P)`.
pub fn lvr_rate(pool: &PoolModel, price: f64, sigma: f64) -> Result<f64> {
    if !(sigma >= 0.0) {
        return Err(Error::Domain(format!("sigma must be non-negative, got {sigma}")));
    }
    Ok(0.5 * sigma * sigma * price * pool.marginal_liquidity(price)?)
}

/// Average profit of the two trade directions at distance `x > 0` beyond
/// the band edge: `(A₊(P, γ+x) + A₋(P, −γ−x))/2`.
fn mean_profit(
    pool: &PoolModel,
    fees: &FeeSchedule,
    price: f64,
    gamma: f64,
    x: f64,
    kernel: fn(&PoolModel, &FeeSchedule, f64, f64) -> Result<f64>,
) -> Result<f64> {
    Ok(0.5 * (kernel(pool, fees, price, gamma + x)? + kernel(pool, fees, price, -gamma - x)?))
}

/// Exact stationary rate `λ·P_trade·s·∫₀^∞ mean_profit(x)·e^{−sx} dx` with
/// `s = √(2λ)/σ`, evaluated by Gauss-Laguerre after substituting `u = sx`.
/// Returns `+∞` when the integrand's exponential growth reaches the tail
/// decay rate.
fn stationary_rate(
    pool: &PoolModel,
    fees: &FeeSchedule,
    price: f64,
    params: &MarketParams,
    kernel: fn(&PoolModel, &FeeSchedule, f64, f64) -> Result<f64>,
) -> Result<f64> {
    let gamma = fees.symmetric_gamma()?;
    let s = (2.0 * params.lambda).sqrt() / params.sigma;
    let pt = p_trade(params, fees)?;

    // divergence probe: log-slope of the integrand at x_k = 5k/s
    let probe: Vec<f64> = (1..=4)
        .map(|k| mean_profit(pool, fees, price, gamma, 5.0 * k as f64 / s, kernel))
        .collect::<Result<_>>()?;
    if probe.iter().all(|v| *v > 0.0) {
        let mut growth = f64::NEG_INFINITY;
        for k in 1..4 {
            let g = (probe[k].ln() - probe[k - 1].ln()) / (5.0 / s);
            growth = growth.max(g);
        }
        if growth >= s - 1e-6 {
            return Ok(f64::INFINITY);
        }
    }

    let integrand = |u: f64| mean_profit(pool, fees, price, gamma, u / s, kernel).unwrap_or(f64::NAN);
    let quad = |n: usize| -> f64 {
        let (x, w) = gauss_laguerre(n);
        x.iter().zip(&w).map(|(u, wi)| wi * integrand(*u)).sum()
    };
    let i64n = quad(64);
    let i128n = quad(128);
    let mut integral = i128n;
    let scale = i128n.abs().max(1e-300);
    if ((i64n - i128n) / scale).abs() > 1e-9 {
        // adaptive fallback on a window wide enough for the residual decay
        integral = adaptive_simpson(&|u: f64| integrand(u) * (-u).exp(), 0.0, 60.0, 1e-11 * scale);
    }
    if !integral.is_finite() {
        return Ok(f64::INFINITY);
    }
    Ok(params.lambda * pt * integral)
}

/// Exact arbitrage-profit rate, numeraire per day.
pub fn arb_rate(
    pool: &PoolModel,
    price: f64,
    params: &MarketParams,
    fees: &FeeSchedule,
) -> Result<f64> {
    stationary_rate(pool, fees, price, params, arb_profit)
}

/// Exact fee-income rate, numeraire per day.
pub fn fee_rate(
    pool: &PoolModel,
    price: f64,
    params: &MarketParams,
    fees: &FeeSchedule,
) -> Result<f64> {
    stationary_rate(pool, fees, price, params, fee_paid)
}

/// Constant-product closed form for the normalized arbitrage rate:
/// `(σ²/8)·P_trade·cosh(γ/2)/(1 − σ²/(8λ))`, or `+∞` when `λ ≤ σ²/8`.
pub fn arb_rate_cpmm(params: &MarketParams, fees: &FeeSchedule) -> Result<f64> {
    let gamma = fees.symmetric_gamma()?;
    let denom = 1.0 - params.sigma * params.sigma / (8.0 * params.lambda);
    if denom <= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(params.sigma * params.sigma / 8.0 * p_trade(params, fees)? * (0.5 * gamma).cosh() / denom)
}

/// Constant-product closed form for the normalized fee rate:
/// `(σ²/8)·(sinh(γ/2)/(γ/2))·(1 − P_trade)/(1 − σ²/(8λ))`.
pub fn fee_rate_cpmm(params: &MarketParams, fees: &FeeSchedule) -> Result<f64> {
    let gamma = fees.symmetric_gamma()?;
    let denom = 1.0 - params.sigma * params.sigma / (8.0 * params.lambda);
    if denom <= 0.0 {
        return Ok(f64::INFINITY);
    }
    let sinhc = if gamma == 0.0 { 1.0 } else { (0.5 * gamma).sinh() / (0.5 * gamma) };
    Ok(params.sigma * params.sigma / 8.0 * sinhc * (1.0 - p_trade(params, fees)?) / denom)
}

/// Fast-block asymptotic arbitrage rate
/// `(σ²P/2)·(y*'(Pe^{−γ}) + y*'(Pe^{+γ}))/2·P_trade`.
pub fn arb_rate_asymptotic(
    pool: &PoolModel,
    price: f64,
    params: &MarketParams,
    fees: &FeeSchedule,
) -> Result<f64> {
    let gamma = fees.symmetric_gamma()?;
    let depth = 0.5
        * (pool.marginal_liquidity(price * (-gamma).exp())?
            + pool.marginal_liquidity(price * gamma.exp())?);
    Ok(0.5 * params.sigma * params.sigma * price * depth * p_trade(params, fees)?)
}

/// Fast-block asymptotic fee rate
/// `(σ²P/2)·((1−e^{−γ})y*'(Pe^{−γ}) + (e^{+γ}−1)y*'(Pe^{+γ}))/(2γ)·(1−P_trade)`.
pub fn fee_rate_asymptotic(
    pool: &PoolModel,
    price: f64,
    params: &MarketParams,
    fees: &FeeSchedule,
) -> Result<f64> {
    let gamma = fees.symmetric_gamma()?;
    if gamma == 0.0 {
        return Ok(0.0);
    }
    let depth = ((1.0 - (-gamma).exp()) * pool.marginal_liquidity(price * (-gamma).exp())?
        + (gamma.exp() - 1.0) * pool.marginal_liquidity(price * gamma.exp())?)
        / (2.0 * gamma);
    Ok(0.5 * params.sigma * params.sigma * price * depth * (1.0 - p_trade(params, fees)?))
}

/// Full rate bundle at one configuration.
pub fn rate_report(
    pool: &PoolModel,
    price: f64,
    params: &MarketParams,
    fees: &FeeSchedule,
) -> Result<RateReport> {
    let value = pool.value(price)?;
    let (arb, fee, method) = match pool {
        PoolModel::ConstantProduct { .. } => (
            arb_rate_cpmm(params, fees)? * value,
            fee_rate_cpmm(params, fees)? * value,
            RateMethod::ClosedForm,
        ),
        _ => (
            arb_rate(pool, price, params, fees)?,
            fee_rate(pool, price, params, fees)?,
            RateMethod::Quadrature,
        ),
    };
    Ok(RateReport {
        price,
        pool_value: value,
        lvr_rate: lvr_rate(pool, price, params.sigma)?,
        arb_rate: arb,
        fee_rate: fee,
        arb_rate_normalized: arb / value,
        fee_rate_normalized: fee / value,
        p_trade: p_trade(params, fees)?,
        sigma_z: mispricing_stdev(params, fees)?,
        arb_asymptotic: arb_rate_asymptotic(pool, price, params, fees)?,
        fee_asymptotic: fee_rate_asymptotic(pool, price, params, fees)?,
        method,
    })
}

/// One row of the fee frontier, in the display units of the report table:
/// fee and stdev in basis points, rates in basis points of pool value per
/// day, `ptr` and `pcterror` dimensionless.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FrontierRow {
    pub gamma: f64,
    #[serde(serialize_with = "ser_rate")]
    pub arb: f64,
    pub stdev: f64,
    pub ptr: f64,
    pub lvrptr: f64,
    pub lvr: f64,
    #[serde(serialize_with = "ser_rate")]
    pub pcterror: f64,
}

/// The accuracy/arbitrage frontier: one row per fee level `γ` (natural log
/// units). Uses the constant-product closed form when available, quadrature
/// at `P = 1` otherwise (normalized rates are price-independent for both
/// pool families).
pub fn frontier(
    params: &MarketParams,
    gamma_list: &[f64],
    pool: &PoolModel,
) -> Result<Vec<FrontierRow>> {
    let mut rows = Vec::with_capacity(gamma_list.len());
    for &gamma in gamma_list {
        let fees = FeeSchedule::symmetric(gamma)?;
        let arb_norm = match pool {
            PoolModel::ConstantProduct { .. } => arb_rate_cpmm(params, &fees)?,
            _ => arb_rate(pool, 1.0, params, &fees)? / pool.value(1.0)?,
        };
        let lvr_norm = lvr_rate(pool, 1.0, params.sigma)? / pool.value(1.0)?;
        let ptr = p_trade(params, &fees)?;
        let lvrptr = lvr_norm * ptr;
        let pcterror = if arb_norm.is_finite() {
            (arb_norm - lvrptr) / arb_norm
        } else {
            f64::NAN
        };
        rows.push(FrontierRow {
            gamma: gamma * 1e4,
            arb: arb_norm * 1e4,
            stdev: mispricing_stdev(params, &fees)? * 1e4,
            ptr,
            lvrptr: lvrptr * 1e4,
            lvr: lvr_norm * 1e4,
            pcterror,
        });
    }
    Ok(rows)
}
