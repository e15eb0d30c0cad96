//! Stationarity checks via the infinitesimal generator of the mispricing
//! process. For the jump-diffusion with clamping at arrival epochs,
//!
//! ```text
//! A f(z) = Δ f'(z) + (σ²/2) f''(z)
//!          + λ (f(band_hi) − f(z)) 1{z > band_hi}
//!          + λ (f(band_lo) − f(z)) 1{z < band_lo}
//! ```
//!
//! and a law π is stationary iff `E_π[A f] = 0` for all nice test
//! functions. `generator_residual` evaluates that expectation by quadrature,
//! so it is an independent check on any constructed [`StationaryLaw`].

use crate::error::{Error, Result};
use crate::mispricing::{MarketParams, StationaryLaw};
use crate::quad::{adaptive_simpson, gauss_laguerre};

type Fun = Box<dyn Fn(f64) -> f64 + Send + Sync>;

/// A C¹ test function with its first two derivatives and exponential growth
/// envelopes (|f|, |f'|, |f''| = O(e^{growth·|z|}) in each tail).
pub struct TestFunction {
    pub name: String,
    f: Fun,
    df: Fun,
    d2f: Fun,
    pub growth_plus: f64,
    pub growth_minus: f64,
}

impl TestFunction {
    pub fn f(&self, z: f64) -> f64 {
        (self.f)(z)
    }
    pub fn df(&self, z: f64) -> f64 {
        (self.df)(z)
    }
    pub fn d2f(&self, z: f64) -> f64 {
        (self.d2f)(z)
    }

    /// Monomial z^k, 1 <= k <= 4.
    pub fn monomial(k: u32) -> Result<Self> {
        if !(1..=4).contains(&k) {
            return Err(Error::Domain(format!("monomial degree must be 1..=4, got {k}")));
        }
        let kf = k as f64;
        Ok(TestFunction {
            name: format!("z^{k}"),
            f: Box::new(move |z| z.powi(k as i32)),
            df: Box::new(move |z| kf * z.powi(k as i32 - 1)),
            d2f: Box::new(move |z| {
                if k == 1 {
                    0.0
                } else {
                    kf * (kf - 1.0) * z.powi(k as i32 - 2)
                }
            }),
            growth_plus: 0.0,
            growth_minus: 0.0,
        })
    }

    /// Upper exponential probe: `e^{-α(z - band_hi)}` above the band,
    /// its linear C¹ extension `1 - α(z - band_hi)` elsewhere.
    pub fn upper_exp(alpha: f64, band_hi: f64) -> Self {
        TestFunction {
            name: format!("upper_exp({alpha})"),
            f: Box::new(move |z| {
                if z > band_hi {
                    (-alpha * (z - band_hi)).exp()
                } else {
                    1.0 - alpha * (z - band_hi)
                }
            }),
            df: Box::new(move |z| {
                if z > band_hi {
                    -alpha * (-alpha * (z - band_hi)).exp()
                } else {
                    -alpha
                }
            }),
            d2f: Box::new(move |z| {
                if z > band_hi {
                    alpha * alpha * (-alpha * (z - band_hi)).exp()
                } else {
                    0.0
                }
            }),
            growth_plus: (-alpha).max(0.0),
            growth_minus: 0.0,
        }
    }

    /// Middle exponential probe: `e^{-αz}` on the band, linear C¹
    /// extensions beyond both edges.
    pub fn middle_exp(alpha: f64, band_lo: f64, band_hi: f64) -> Self {
        let hi_val = (-alpha * band_hi).exp();
        let lo_val = (-alpha * band_lo).exp();
        TestFunction {
            name: format!("middle_exp({alpha})"),
            f: Box::new(move |z| {
                if z > band_hi {
                    hi_val - alpha * hi_val * (z - band_hi)
                } else if z < band_lo {
                    lo_val - alpha * lo_val * (z - band_lo)
                } else {
                    (-alpha * z).exp()
                }
            }),
            df: Box::new(move |z| {
                if z > band_hi {
                    -alpha * hi_val
                } else if z < band_lo {
                    -alpha * lo_val
                } else {
                    -alpha * (-alpha * z).exp()
                }
            }),
            d2f: Box::new(move |z| {
                if z > band_hi || z < band_lo {
                    0.0
                } else {
                    alpha * alpha * (-alpha * z).exp()
                }
            }),
            growth_plus: 0.0,
            growth_minus: 0.0,
        }
    }

    /// The standard battery: four monomials plus the two exponential probes
    /// fitted to the law's band.
    pub fn battery(law: &StationaryLaw) -> Vec<Self> {
        vec![
            Self::monomial(1).unwrap(),
            Self::monomial(2).unwrap(),
            Self::monomial(3).unwrap(),
            Self::monomial(4).unwrap(),
            Self::upper_exp(1.0, law.band_hi),
            Self::middle_exp(1.0, law.band_lo, law.band_hi),
        ]
    }
}

/// `E_π[A f]` for the given law and market parameters. Zero (to quadrature
/// accuracy) iff the law is stationary for the process.
pub fn generator_residual(
    params: &MarketParams,
    law: &StationaryLaw,
    tf: &TestFunction,
) -> Result<f64> {
    if tf.growth_plus >= law.tail_rate_plus || tf.growth_minus >= law.tail_rate_minus {
        return Err(Error::Integrability(format!(
            "test function {} grows at rate ({}, {}) against tail rates ({}, {})",
            tf.name, tf.growth_plus, tf.growth_minus, law.tail_rate_plus, law.tail_rate_minus
        )));
    }
    let delta = params.drift_z();
    let half_s2 = 0.5 * params.sigma * params.sigma;
    let lambda = params.lambda;
    let (lo, hi) = (law.band_lo, law.band_hi);
    let f_hi = tf.f(hi);
    let f_lo = tf.f(lo);

    let gen = |z: f64| -> f64 {
        let mut a = delta * tf.df(z) + half_s2 * tf.d2f(z);
        if z > hi {
            a += lambda * (f_hi - tf.f(z));
        } else if z < lo {
            a += lambda * (f_lo - tf.f(z));
        }
        a
    };

    // core on [lo, hi]
    let core = adaptive_simpson(&|z| gen(z) * law.density(z), lo, hi, 1e-12);

    // tails: substitute u = rate * (z - edge), so the exponential density
    // becomes the Laguerre weight
    let (nodes, weights) = gauss_laguerre(64);
    let upper: f64 = nodes
        .iter()
        .zip(&weights)
        .map(|(u, w)| w * gen(hi + u / law.tail_rate_plus))
        .sum::<f64>()
        * law.pi_plus;
    let lower: f64 = nodes
        .iter()
        .zip(&weights)
        .map(|(u, w)| w * gen(lo - u / law.tail_rate_minus))
        .sum::<f64>()
        * law.pi_minus;

    Ok(core + upper + lower)
}

/// Maximum absolute residual of the standard six-function battery.
pub fn battery_residual(params: &MarketParams, law: &StationaryLaw) -> Result<f64> {
    let mut worst = 0.0_f64;
    for tf in TestFunction::battery(law) {
        worst = worst.max(generator_residual(params, law, &tf)?.abs());
    }
    Ok(worst)
}
