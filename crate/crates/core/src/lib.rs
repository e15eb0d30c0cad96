//! Analytics for arbitrage against constant function market makers with
//! proportional fees, under a jump-diffusion mispricing process with Poisson
//! trade arrivals.
//!
//! The crate is organized around a small pipeline:
//!
//! * [`pool`] — bonding curves, demand functions, fees, the myopic trade;
//! * [`mispricing`] — the stationary law of the mispricing process;
//! * [`generator`] — stationarity checks via the infinitesimal generator;
//! * [`rates`] — closed-form and quadrature arbitrage/fee/LVR rates;
//! * [`sim`] — exact event-driven Monte Carlo;
//! * [`validate`] — the self-check battery behind `cfmm-arb validate`.

pub mod cli;
pub mod error;
pub mod generator;
pub mod mispricing;
pub mod pool;
pub mod quad;
pub mod rates;
pub mod sim;
pub mod validate;

pub use error::{Error, Result};
pub use mispricing::{eta, p_trade, MarketParams, StationaryLaw};
pub use pool::{FeeSchedule, PoolModel, TradeOutcome};
pub use rates::RateReport;
