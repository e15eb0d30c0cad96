//! The mispricing process and its stationary law.
//!
//! Between trade arrivals the log mispricing `z = log(P / P~)` follows a
//! Brownian motion with drift `Δ = μ − σ²/2`; at Poisson(λ) arrival epochs
//! it is clamped to the no-trade band `[-γ⁻, +γ⁺]` by the myopic
//! arbitrageur. The stationary law is piecewise: exponential tails outside
//! the band and a (possibly truncated-exponential) core inside it.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::pool::FeeSchedule;
use crate::quad::adaptive_simpson;

/// Market environment: drift and volatility of the true price, and the
/// Poisson arrival rate of trades. All rates are per the same time unit
/// (days throughout this crate).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MarketParams {
    pub mu: f64,
    pub sigma: f64,
    pub lambda: f64,
}

impl MarketParams {
    pub fn new(mu: f64, sigma: f64, lambda: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::Domain(format!("sigma must be positive, got {sigma}")));
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::Domain(format!("lambda must be positive, got {lambda}")));
        }
        if !mu.is_finite() {
            return Err(Error::Domain(format!("mu must be finite, got {mu}")));
        }
        Ok(MarketParams { mu, sigma, lambda })
    }

    /// Zero-drift parameters (μ = σ²/2 so that the mispricing is driftless).
    pub fn driftless(sigma: f64, lambda: f64) -> Result<Self> {
        Self::new(0.5 * sigma * sigma, sigma, lambda)
    }

    /// Mean inter-arrival time Δt = 1/λ.
    pub fn block_time(&self) -> f64 {
        1.0 / self.lambda
    }

    /// Drift of the log mispricing, Δ = μ − σ²/2.
    pub fn drift_z(&self) -> f64 {
        self.mu - 0.5 * self.sigma * self.sigma
    }

    pub fn is_driftless(&self) -> bool {
        self.drift_z() == 0.0
    }
}

fn symmetric_gamma(fees: &FeeSchedule) -> Result<f64> {
    fees.symmetric_gamma()
}

/// The composite parameter η = √(2λ)·γ/σ. Requires a symmetric fee.
pub fn eta(params: &MarketParams, fees: &FeeSchedule) -> Result<f64> {
    let gamma = symmetric_gamma(fees)?;
    Ok((2.0 * params.lambda).sqrt() * gamma / params.sigma)
}

/// Probability that an arrival finds the mispricing outside the band and
/// trades: P_trade = 1/(1+η). Depends only on η, not on the pool.
pub fn p_trade(params: &MarketParams, fees: &FeeSchedule) -> Result<f64> {
    Ok(1.0 / (1.0 + eta(params, fees)?))
}

/// Closed-form stationary standard deviation of the mispricing
/// (symmetric, driftless case).
pub fn mispricing_stdev(params: &MarketParams, fees: &FeeSchedule) -> Result<f64> {
    let gamma = symmetric_gamma(fees)?;
    let pt = p_trade(params, fees)?;
    let s = params.sigma / (2.0 * params.lambda).sqrt();
    let tail = (gamma + s).powi(2) + s * s;
    Ok(((1.0 - pt) * gamma * gamma / 3.0 + pt * tail).sqrt())
}

/// Shape of the stationary density on the no-trade band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum CoreShape {
    Uniform,
    /// Density proportional to `exp(zeta_0 * z)` on the band.
    TruncatedExponential { zeta_0: f64 },
}

/// Piecewise stationary law of the mispricing: mass `pi_minus` in an
/// exponential lower tail below `band_lo`, `pi_0` on the band, `pi_plus` in
/// an exponential upper tail above `band_hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StationaryLaw {
    pub band_lo: f64,
    pub band_hi: f64,
    pub pi_0: f64,
    pub pi_plus: f64,
    pub pi_minus: f64,
    pub tail_rate_plus: f64,
    pub tail_rate_minus: f64,
    pub core_shape: CoreShape,
}

/// Symmetric stationary law (driftless, γ⁺ = γ⁻ = γ > 0): uniform core of
/// mass η/(1+η) and exponential tails with rate √(2λ)/σ.
pub fn stationary_law(params: &MarketParams, fees: &FeeSchedule) -> Result<StationaryLaw> {
    if !params.is_driftless() {
        return Err(Error::UnsupportedConfiguration(format!(
            "stationary_law requires zero mispricing drift (mu = sigma^2/2), got drift {}; \
             use nonsymmetric_law",
            params.drift_z()
        )));
    }
    let gamma = symmetric_gamma(fees)?;
    if gamma == 0.0 {
        return Err(Error::DegenerateLaw(
            "the three-segment stationary law requires gamma > 0; with gamma = 0 only \
             p_trade = 1 and the sigma*sqrt(1/lambda) stdev limit are defined"
                .into(),
        ));
    }
    let eta = eta(params, fees)?;
    let rate = (2.0 * params.lambda).sqrt() / params.sigma;
    Ok(StationaryLaw {
        band_lo: -gamma,
        band_hi: gamma,
        pi_0: eta / (1.0 + eta),
        pi_plus: 0.5 / (1.0 + eta),
        pi_minus: 0.5 / (1.0 + eta),
        tail_rate_plus: rate,
        tail_rate_minus: rate,
        core_shape: CoreShape::Uniform,
    })
}

/// Stationary law for drifting mispricing (Δ = μ − σ²/2 ≠ 0) and possibly
/// asymmetric band. Tail rates are
/// `ζ± = (√(Δ² + 2λσ²) ∓ Δ)/σ²` and the core is a truncated exponential
/// with rate `ζ₀ = 2Δ/σ²`; the segment masses come from density continuity
/// at both band edges plus normalization.
pub fn nonsymmetric_law(params: &MarketParams, fees: &FeeSchedule) -> Result<StationaryLaw> {
    if !(fees.gamma_plus > 0.0 && fees.gamma_minus > 0.0) {
        return Err(Error::DegenerateLaw(format!(
            "nonsymmetric_law requires gamma_plus, gamma_minus > 0, got ({}, {})",
            fees.gamma_plus, fees.gamma_minus
        )));
    }
    let delta = params.drift_z();
    if delta == 0.0 && fees.is_symmetric() {
        return stationary_law(params, fees);
    }
    let s2 = params.sigma * params.sigma;
    let root = (delta * delta + 2.0 * params.lambda * s2).sqrt();
    let zeta_plus = (root - delta) / s2;
    let zeta_minus = (root + delta) / s2;
    let zeta_0 = 2.0 * delta / s2;
    let (gp, gm) = (fees.gamma_plus, fees.gamma_minus);

    // Core density is b*exp(zeta_0*z). Continuity at the edges fixes the
    // tail masses in terms of b; normalization then pins b:
    //   pi_plus * zeta_plus  = b * exp(+zeta_0*gp)
    //   pi_minus * zeta_minus = b * exp(-zeta_0*gm)
    //   pi_plus + pi_minus + b * core_integral = 1
    let e_hi = (zeta_0 * gp).exp();
    let e_lo = (-zeta_0 * gm).exp();
    // integral of exp(zeta_0*z) over the band; the exp_m1 form stays
    // accurate down to the zeta_0 -> 0 (uniform) limit
    let core_integral = if zeta_0 == 0.0 {
        gp + gm
    } else {
        e_lo * (zeta_0 * (gp + gm)).exp_m1() / zeta_0
    };
    let b = 1.0 / (e_hi / zeta_plus + e_lo / zeta_minus + core_integral);
    let pi_plus = b * e_hi / zeta_plus;
    let pi_minus = b * e_lo / zeta_minus;
    let pi_0 = 1.0 - pi_plus - pi_minus;
    let core_shape = if zeta_0.abs() * (gp + gm) < 1e-12 {
        CoreShape::Uniform
    } else {
        CoreShape::TruncatedExponential { zeta_0 }
    };
    Ok(StationaryLaw {
        band_lo: -gm,
        band_hi: gp,
        pi_0,
        pi_plus,
        pi_minus,
        tail_rate_plus: zeta_plus,
        tail_rate_minus: zeta_minus,
        core_shape,
    })
}

impl StationaryLaw {
    /// Probability that a fresh arrival trades (mass outside the band).
    pub fn p_trade(&self) -> f64 {
        self.pi_plus + self.pi_minus
    }

    /// Core density coefficient: density on the band is
    /// `coeff * exp(zeta_0 * z)` (with zeta_0 = 0 for the uniform core).
    fn core_coeff(&self) -> f64 {
        match self.core_shape {
            CoreShape::Uniform => self.pi_0 / (self.band_hi - self.band_lo),
            CoreShape::TruncatedExponential { zeta_0 } => {
                let num = (zeta_0 * self.band_lo).exp()
                    * (zeta_0 * (self.band_hi - self.band_lo)).exp_m1();
                self.pi_0 * zeta_0 / num
            }
        }
    }

    /// Stationary probability density at `z`.
    pub fn density(&self, z: f64) -> f64 {
        if z < self.band_lo {
            self.pi_minus * self.tail_rate_minus * (self.tail_rate_minus * (z - self.band_lo)).exp()
        } else if z > self.band_hi {
            self.pi_plus * self.tail_rate_plus * (-self.tail_rate_plus * (z - self.band_hi)).exp()
        } else {
            match self.core_shape {
                CoreShape::Uniform => self.core_coeff(),
                CoreShape::TruncatedExponential { zeta_0 } => {
                    self.core_coeff() * (zeta_0 * z).exp()
                }
            }
        }
    }

    /// Cumulative distribution function at `z`.
    pub fn cdf(&self, z: f64) -> f64 {
        if z < self.band_lo {
            self.pi_minus * (self.tail_rate_minus * (z - self.band_lo)).exp()
        } else if z > self.band_hi {
            1.0 - self.pi_plus * (-self.tail_rate_plus * (z - self.band_hi)).exp()
        } else {
            let core = match self.core_shape {
                CoreShape::Uniform => self.core_coeff() * (z - self.band_lo),
                CoreShape::TruncatedExponential { zeta_0 } => {
                    self.core_coeff() / zeta_0
                        * (zeta_0 * self.band_lo).exp()
                        * (zeta_0 * (z - self.band_lo)).exp_m1()
                }
            };
            self.pi_minus + core
        }
    }

    /// Draw one sample by inverse-CDF over the three segments.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
        if u < self.pi_minus {
            self.band_lo + (u / self.pi_minus).ln() / self.tail_rate_minus
        } else if u < self.pi_minus + self.pi_0 {
            let v = (u - self.pi_minus) / self.pi_0;
            match self.core_shape {
                CoreShape::Uniform => self.band_lo + v * (self.band_hi - self.band_lo),
                CoreShape::TruncatedExponential { zeta_0 } => {
                    let span = (zeta_0 * (self.band_hi - self.band_lo)).exp_m1();
                    self.band_lo + (v * span).ln_1p() / zeta_0
                }
            }
        } else {
            let v = 1.0 - u; // in (0, pi_plus]
            self.band_hi + (self.pi_plus / v).ln() / self.tail_rate_plus
        }
    }

    /// Stationary mean E[z]: closed-form tails, quadrature core.
    pub fn mean(&self) -> f64 {
        self.moment(1)
    }

    /// Stationary standard deviation √(E[z²] − E[z]²).
    pub fn stdev(&self) -> f64 {
        let m1 = self.moment(1);
        (self.moment(2) - m1 * m1).max(0.0).sqrt()
    }

    fn moment(&self, k: i32) -> f64 {
        // tails: E[(edge ± X)^k] with X ~ Exp(rate), closed form for k <= 2
        let tail = |edge: f64, rate: f64, sign: f64| -> f64 {
            match k {
                1 => edge + sign / rate,
                2 => edge * edge + sign * 2.0 * edge / rate + 2.0 / (rate * rate),
                _ => unreachable!("only first two moments supported"),
            }
        };
        let upper = self.pi_plus * tail(self.band_hi, self.tail_rate_plus, 1.0);
        let lower = self.pi_minus * tail(self.band_lo, self.tail_rate_minus, -1.0);
        let core = adaptive_simpson(
            &|z: f64| z.powi(k) * self.density(z),
            self.band_lo,
            self.band_hi,
            1e-14,
        );
        upper + lower + core
    }
}
