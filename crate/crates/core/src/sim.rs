//! Exact event-driven Monte Carlo of the mispricing process and the
//! cumulative arbitrage/fee processes.
//!
//! Nothing here is discretized: inter-arrival times are exponential draws
//! and the Gaussian increment between arrivals is applied in one step, so
//! path laws are exact. The log price and the mispricing share each
//! increment, which is what makes the clamp-at-arrival dynamics exact as
//! well.

use std::io::Write;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mispricing::{stationary_law, MarketParams, StationaryLaw};
use crate::pool::{myopic_trade, FeeSchedule, PoolModel};

/// One arrival-epoch record.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Event {
    pub tau: f64,
    pub z_pre: f64,
    pub z_post: f64,
    pub arb: f64,
    pub fee: f64,
    pub price: f64,
}

/// Cumulative outcome of one simulated path.
#[derive(Debug, Clone, Serialize)]
pub struct PathResult {
    pub horizon: f64,
    pub n_arrivals: u64,
    pub n_trades: u64,
    pub arb_total: f64,
    pub fee_total: f64,
    pub z_final: f64,
    pub event_log: Option<Vec<Event>>,
    pub z_samples: Option<Vec<f64>>,
}

/// Mean and path-level standard error of a Monte Carlo estimate.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SimEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_paths: usize,
}

/// What a path records beyond its totals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Recording {
    Totals,
    ZSamples,
    Events,
}

/// Mutable state of one path: log price and mispricing, advanced jointly.
struct PathState {
    t: f64,
    log_price: f64,
    z: f64,
    exp: Exp<f64>,
    drift: f64,
    sigma: f64,
}

impl PathState {
    fn new(params: &MarketParams, p0: f64, z0: f64) -> Result<Self> {
        if !(p0 > 0.0 && p0.is_finite()) {
            return Err(Error::Domain(format!("initial price must be positive, got {p0}")));
        }
        Ok(PathState {
            t: 0.0,
            log_price: p0.ln(),
            z: z0,
            exp: Exp::new(params.lambda)
                .map_err(|e| Error::Domain(format!("bad arrival rate: {e}")))?,
            drift: params.drift_z(),
            sigma: params.sigma,
        })
    }

    /// Advance to the next arrival; both z and log P receive the identical
    /// Gaussian increment.
    fn step<R: RngCore>(&mut self, rng: &mut R) {
        let dt = self.exp.sample(rng);
        let g: f64 = StandardNormal.sample(rng);
        let inc = self.drift * dt + self.sigma * dt.sqrt() * g;
        self.t += dt;
        self.z += inc;
        self.log_price += inc;
    }
}

/// Burn-in horizon used before measuring: long relative to both the
/// arrival spacing and the band-crossing time scale.
pub fn burn_in_days(params: &MarketParams, fees: &FeeSchedule) -> f64 {
    let gamma = fees.gamma_plus.max(fees.gamma_minus);
    (100.0 / params.lambda).max(50.0 * gamma * gamma / (params.sigma * params.sigma))
}

/// Simulate one path over `horizon` days from mispricing `z0`.
pub fn simulate_path<R: RngCore>(
    pool: &PoolModel,
    fees: &FeeSchedule,
    params: &MarketParams,
    p0: f64,
    z0: f64,
    horizon: f64,
    rng: &mut R,
    recording: Recording,
) -> Result<PathResult> {
    if !(horizon > 0.0) {
        return Err(Error::Domain(format!("horizon must be positive, got {horizon}")));
    }
    let mut state = PathState::new(params, p0, z0)?;
    let mut result = PathResult {
        horizon,
        n_arrivals: 0,
        n_trades: 0,
        arb_total: 0.0,
        fee_total: 0.0,
        z_final: z0,
        event_log: (recording == Recording::Events).then(Vec::new),
        z_samples: (recording != Recording::Totals).then(Vec::new),
    };
    loop {
        state.step(rng);
        if state.t > horizon {
            break;
        }
        result.n_arrivals += 1;
        let price = state.log_price.exp();
        let z_pre = state.z;
        let outcome = myopic_trade(pool, fees, price, z_pre)?;
        state.z = outcome.z_post;
        if outcome.traded {
            result.n_trades += 1;
            result.arb_total += outcome.arb_profit;
            result.fee_total += outcome.fee_paid;
        }
        if let Some(log) = result.event_log.as_mut() {
            log.push(Event {
                tau: state.t,
                z_pre,
                z_post: outcome.z_post,
                arb: outcome.arb_profit,
                fee: outcome.fee_paid,
                price,
            });
        }
        if let Some(zs) = result.z_samples.as_mut() {
            zs.push(z_pre);
        }
    }
    result.z_final = state.z;
    Ok(result)
}

/// Simulate until exactly `n_arrivals` arrivals have occurred; the horizon
/// is the (random) time of the last arrival.
pub fn simulate_arrivals<R: RngCore>(
    pool: &PoolModel,
    fees: &FeeSchedule,
    params: &MarketParams,
    p0: f64,
    z0: f64,
    n_arrivals: u64,
    rng: &mut R,
    recording: Recording,
) -> Result<PathResult> {
    if n_arrivals == 0 {
        return Err(Error::Domain("need at least one arrival".into()));
    }
    let mut state = PathState::new(params, p0, z0)?;
    let mut result = PathResult {
        horizon: 0.0,
        n_arrivals: 0,
        n_trades: 0,
        arb_total: 0.0,
        fee_total: 0.0,
        z_final: z0,
        event_log: (recording == Recording::Events).then(Vec::new),
        z_samples: (recording != Recording::Totals).then(Vec::new),
    };
    for _ in 0..n_arrivals {
        state.step(rng);
        result.n_arrivals += 1;
        let price = state.log_price.exp();
        let z_pre = state.z;
        let outcome = myopic_trade(pool, fees, price, z_pre)?;
        state.z = outcome.z_post;
        if outcome.traded {
            result.n_trades += 1;
            result.arb_total += outcome.arb_profit;
            result.fee_total += outcome.fee_paid;
        }
        if let Some(log) = result.event_log.as_mut() {
            log.push(Event {
                tau: state.t,
                z_pre,
                z_post: outcome.z_post,
                arb: outcome.arb_profit,
                fee: outcome.fee_paid,
                price,
            });
        }
        if let Some(zs) = result.z_samples.as_mut() {
            zs.push(z_pre);
        }
    }
    result.horizon = state.t;
    result.z_final = state.z;
    Ok(result)
}

/// RNG for path `index` of a run seeded with `seed`: one ChaCha stream per
/// path, so paths are independent and reproducible in any order.
pub fn path_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Starting mispricing for a measurement leg: an exact stationary draw when
/// the closed-form law exists, otherwise 0 followed by a burn-in run whose
/// terminal mispricing seeds the measurement.
fn warm_start<R: RngCore>(
    pool: &PoolModel,
    fees: &FeeSchedule,
    params: &MarketParams,
    p0: f64,
    law: Option<&StationaryLaw>,
    rng: &mut R,
) -> Result<f64> {
    match law {
        Some(law) => Ok(law.sample(rng)),
        None => {
            let burn = burn_in_days(params, fees);
            let warm =
                simulate_path(pool, fees, params, p0, 0.0, burn, rng, Recording::Totals)?;
            Ok(warm.z_final)
        }
    }
}

/// Time-averaged arbitrage and fee rates over `n_paths` independent paths
/// of `horizon` days each, after burn-in. Returns (arb, fee) estimates in
/// numeraire per day.
pub fn estimate_rates(
    pool: &PoolModel,
    fees: &FeeSchedule,
    params: &MarketParams,
    p0: f64,
    n_paths: usize,
    horizon: f64,
    seed: u64,
) -> Result<(SimEstimate, SimEstimate)> {
    if n_paths < 2 {
        return Err(Error::Domain(format!("need at least 2 paths, got {n_paths}")));
    }
    let law = stationary_law(params, fees).ok();
    let mut arb_rates = Vec::with_capacity(n_paths);
    let mut fee_rates = Vec::with_capacity(n_paths);
    for i in 0..n_paths {
        let mut rng = path_rng(seed, i as u64);
        let z0 = warm_start(pool, fees, params, p0, law.as_ref(), &mut rng)?;
        let run = simulate_path(pool, fees, params, p0, z0, horizon, &mut rng, Recording::Totals)?;
        arb_rates.push(run.arb_total / horizon);
        fee_rates.push(run.fee_total / horizon);
    }
    Ok((mean_and_se(&arb_rates), mean_and_se(&fee_rates)))
}

fn mean_and_se(xs: &[f64]) -> SimEstimate {
    let n = xs.len();
    let mean = xs.iter().sum::<f64>() / n as f64;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n as f64 - 1.0);
    SimEstimate {
        mean,
        std_error: (var / n as f64).sqrt(),
        n_paths: n,
    }
}

/// Stationary diagnostics from one long path observed at arrival epochs.
#[derive(Debug, Clone, Serialize)]
pub struct StationaryEstimate {
    pub p_trade_hat: f64,
    pub sigma_z_hat: f64,
    pub z_samples: Vec<f64>,
}

/// Run a single path until `n_arrivals` arrivals have been observed (after
/// burn-in) and summarize the arrival-epoch mispricing samples.
pub fn estimate_stationary(
    pool: &PoolModel,
    fees: &FeeSchedule,
    params: &MarketParams,
    n_arrivals: u64,
    seed: u64,
) -> Result<StationaryEstimate> {
    if n_arrivals < 10_000 {
        return Err(Error::Domain(format!(
            "need at least 10^4 arrivals for stationary diagnostics, got {n_arrivals}"
        )));
    }
    let mut rng = path_rng(seed, 0);
    let law = stationary_law(params, fees).ok();
    let z0 = match law.as_ref() {
        Some(law) => law.sample(&mut rng),
        None => 0.0,
    };
    // short burn-in even from a stationary draw; mandatory from z0 = 0
    let burn_arrivals = (burn_in_days(params, fees) * params.lambda).ceil() as u64;

    let mut state = PathState::new(params, 1.0, z0)?;
    let mut samples = Vec::with_capacity(n_arrivals as usize);
    let mut outside = 0u64;
    for i in 0..(burn_arrivals + n_arrivals) {
        state.step(&mut rng);
        let z_pre = state.z;
        let outcome = myopic_trade(pool, fees, state.log_price.exp(), z_pre)?;
        state.z = outcome.z_post;
        if i >= burn_arrivals {
            samples.push(z_pre);
            if outcome.traded {
                outside += 1;
            }
        }
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|z| (z - mean) * (z - mean)).sum::<f64>() / n;
    Ok(StationaryEstimate {
        p_trade_hat: outside as f64 / n,
        sigma_z_hat: var.sqrt(),
        z_samples: samples,
    })
}

/// Write an event log as CSV with full float precision.
pub fn write_event_log<W: Write>(events: &[Event], out: &mut W) -> Result<()> {
    writeln!(out, "tau,z_pre,z_post,arb,fee,price")?;
    for e in events {
        writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            e.tau, e.z_pre, e.z_post, e.arb, e.fee, e.price
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mispricing::p_trade;
    use crate::rates::{arb_rate_cpmm, fee_rate_cpmm};
    use approx::assert_relative_eq;

    fn desk() -> (MarketParams, FeeSchedule) {
        (
            MarketParams::driftless(0.05, 7200.0).unwrap(),
            FeeSchedule::symmetric(0.003).unwrap(),
        )
    }

    fn cpmm() -> PoolModel {
        PoolModel::constant_product(1.0).unwrap()
    }

    #[test]
    fn seed_determinism_is_byte_exact() {
        let (params, fees) = desk();
        let pool = cpmm();
        let run = |seed| {
            let mut rng = path_rng(seed, 3);
            simulate_path(&pool, &fees, &params, 1.0, 0.0, 0.5, &mut rng, Recording::Events)
                .unwrap()
        };
        let a = run(42);
        let b = run(42);
        assert_eq!(a.n_arrivals, b.n_arrivals);
        assert_eq!(a.arb_total.to_bits(), b.arb_total.to_bits());
        assert_eq!(a.fee_total.to_bits(), b.fee_total.to_bits());
        let (ea, eb) = (a.event_log.unwrap(), b.event_log.unwrap());
        assert_eq!(ea.len(), eb.len());
        for (x, y) in ea.iter().zip(&eb) {
            assert_eq!(x.z_pre.to_bits(), y.z_pre.to_bits());
            assert_eq!(x.price.to_bits(), y.price.to_bits());
        }
        let c = run(43);
        assert_ne!(a.arb_total.to_bits(), c.arb_total.to_bits());
    }

    #[test]
    fn event_log_invariants() {
        let (params, fees) = desk();
        let pool = cpmm();
        let mut rng = path_rng(7, 0);
        let run =
            simulate_path(&pool, &fees, &params, 1.0, 0.0, 0.25, &mut rng, Recording::Events)
                .unwrap();
        let log = run.event_log.unwrap();
        assert_eq!(log.len() as u64, run.n_arrivals);
        assert!(run.n_trades <= run.n_arrivals);
        assert!(run.n_trades > 0, "quarter-day at 12s blocks must trade");
        let arb_sum: f64 = log.iter().map(|e| e.arb).sum();
        assert_relative_eq!(arb_sum, run.arb_total, max_relative = 1e-12);
        let mut prev: Option<&Event> = None;
        for e in &log {
            assert!(e.arb >= 0.0 && e.fee >= 0.0);
            if e.z_pre.abs() > fees.gamma_plus {
                // post-trade mispricing sits exactly on the band edge
                assert!(e.z_post == fees.gamma_plus || e.z_post == -fees.gamma_minus);
            } else {
                assert_eq!(e.z_post, e.z_pre);
            }
            if let Some(p) = prev {
                assert!(e.tau > p.tau);
                // shared increment: mispricing and log price move together
                let dz = e.z_pre - p.z_post;
                let dlp = e.price.ln() - p.price.ln();
                assert_relative_eq!(dz, dlp, epsilon = 1e-12);
            }
            prev = Some(e);
        }
    }

    #[test]
    fn nested_horizons_are_monotone() {
        let (params, fees) = desk();
        let pool = cpmm();
        let totals: Vec<(f64, f64)> = [0.1, 0.2, 0.4]
            .iter()
            .map(|&h| {
                let mut rng = path_rng(11, 0);
                let r = simulate_path(
                    &pool, &fees, &params, 1.0, 0.0, h, &mut rng, Recording::Totals,
                )
                .unwrap();
                (r.arb_total, r.fee_total)
            })
            .collect();
        assert!(totals[0].0 <= totals[1].0 && totals[1].0 <= totals[2].0);
        assert!(totals[0].1 <= totals[1].1 && totals[1].1 <= totals[2].1);
    }

    #[test]
    fn rates_match_closed_forms() {
        let (params, fees) = desk();
        let pool = cpmm();
        let (arb, fee) = estimate_rates(&pool, &fees, &params, 1.0, 200, 2.0, 1).unwrap();
        let v = pool.value(1.0).unwrap();
        let arb_exact = arb_rate_cpmm(&params, &fees).unwrap() * v;
        let fee_exact = fee_rate_cpmm(&params, &fees).unwrap() * v;
        assert!(
            (arb.mean - arb_exact).abs() <= 3.0 * arb.std_error,
            "arb {} vs {} (se {})",
            arb.mean,
            arb_exact,
            arb.std_error
        );
        assert!(
            (fee.mean - fee_exact).abs() <= 3.0 * fee.std_error,
            "fee {} vs {} (se {})",
            fee.mean,
            fee_exact,
            fee.std_error
        );
        // and the standard errors are actually informative
        assert!(arb.std_error < 0.2 * arb_exact);
    }

    #[test]
    fn huge_fee_kills_trading() {
        let params = MarketParams::driftless(0.05, 7200.0).unwrap();
        let fees = FeeSchedule::symmetric(0.5).unwrap();
        let pool = cpmm();
        let (arb, _) = estimate_rates(&pool, &fees, &params, 1.0, 20, 0.5, 5).unwrap();
        assert!(arb.mean.abs() <= arb.std_error.max(1e-12) * 3.0 + 1e-12);
    }

    #[test]
    fn doubling_paths_shrinks_std_error() {
        let (params, fees) = desk();
        let pool = cpmm();
        let (a1, _) = estimate_rates(&pool, &fees, &params, 1.0, 50, 0.5, 9).unwrap();
        let (a2, _) = estimate_rates(&pool, &fees, &params, 1.0, 200, 0.5, 9).unwrap();
        let ratio = a2.std_error / a1.std_error;
        // 4x the paths: expect about half the standard error
        assert!(ratio > 0.3 && ratio < 0.7, "ratio {ratio}");
    }

    #[test]
    fn stationary_estimates_match_law() {
        let (params, fees) = desk();
        let pool = cpmm();
        let est = estimate_stationary(&pool, &fees, &params, 200_000, 2).unwrap();
        let pt = p_trade(&params, &fees).unwrap();
        let se = (pt * (1.0 - pt) / 200_000.0_f64).sqrt();
        assert!(
            (est.p_trade_hat - pt).abs() <= 4.0 * se,
            "p_trade {} vs {}",
            est.p_trade_hat,
            pt
        );
        let sigma_z = crate::mispricing::mispricing_stdev(&params, &fees).unwrap();
        assert_relative_eq!(est.sigma_z_hat, sigma_z, max_relative = 0.03);
        assert_eq!(est.z_samples.len(), 200_000);
    }

    #[test]
    fn event_log_csv_format() {
        let events = vec![Event {
            tau: 0.5,
            z_pre: 0.004,
            z_post: 0.003,
            arb: 1e-6,
            fee: 2e-6,
            price: 1.01,
        }];
        let mut buf = Vec::new();
        write_event_log(&events, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "tau,z_pre,z_post,arb,fee,price");
        let row = lines.next().unwrap();
        assert_eq!(row.split(',').count(), 6);
        assert!(row.starts_with("5.0000000000000000e-1,"));
    }
}
