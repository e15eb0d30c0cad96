//! Monte Carlo cross-check: ensemble estimates of the arbitrage and fee
//! intensities against the closed forms, plus the stationary diagnostics
//! from one long path.

use cfmm_arb::mispricing::{mispricing_stdev, p_trade, MarketParams};
use cfmm_arb::pool::{FeeSchedule, PoolModel};
use cfmm_arb::sim::{estimate_rates, estimate_stationary};
use cfmm_arb::rates::{arb_rate_cpmm, fee_rate_cpmm};

fn main() {
    let params = MarketParams::driftless(0.05, 86_400.0 / 12.0).unwrap();
    let fees = FeeSchedule::symmetric(0.003).unwrap();
    let pool = PoolModel::constant_product(1.0).unwrap();
    let v = pool.value(1.0).unwrap();

    let (arb, fee) = estimate_rates(&pool, &fees, &params, 1.0, 200, 2.0, 2).unwrap();
    let arb_exact = arb_rate_cpmm(&params, &fees).unwrap() * v;
    let fee_exact = fee_rate_cpmm(&params, &fees).unwrap() * v;
    println!("ARB  mc {:.4e} +- {:.1e}   exact {:.4e}  ({:+.2} se)",
        arb.mean, arb.std_error, arb_exact, (arb.mean - arb_exact) / arb.std_error);
    println!("FEE  mc {:.4e} +- {:.1e}   exact {:.4e}  ({:+.2} se)",
        fee.mean, fee.std_error, fee_exact, (fee.mean - fee_exact) / fee.std_error);

    // one long path, observed at arrival epochs
    let est = estimate_stationary(&pool, &fees, &params, 1_000_000, 2).unwrap();
    println!("\nP_trade  mc {:.6}   exact {:.6}", est.p_trade_hat, p_trade(&params, &fees).unwrap());
    println!("sigma_z  mc {:.4} bp  exact {:.4} bp",
        est.sigma_z_hat * 1e4, mispricing_stdev(&params, &fees).unwrap() * 1e4);
}
