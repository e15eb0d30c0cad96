//! Exact long-run rates of arbitrage profit, fee income and LVR, and how
//! they relate: ARB + FEE ~= LVR for the constant-product pool, with an
//! O(gamma^2) + sigma^2/(8 lambda) correction.

use cfmm_arb::mispricing::MarketParams;
use cfmm_arb::pool::{FeeSchedule, PoolModel};
use cfmm_arb::rates::rate_report;

fn main() {
    let params = MarketParams::driftless(0.05, 86_400.0 / 12.0).unwrap();
    let pool = PoolModel::constant_product(1.0).unwrap();

    println!("{:>8} {:>12} {:>12} {:>12} {:>10}", "fee(bp)", "ARB/V", "FEE/V", "LVR/V", "P_trade");
    for bp in [1.0, 5.0, 10.0, 30.0, 100.0] {
        let fees = FeeSchedule::symmetric(bp * 1e-4).unwrap();
        let r = rate_report(&pool, 1.0, &params, &fees).unwrap();
        let lvr_norm = r.lvr_rate / r.pool_value;
        println!(
            "{bp:>8} {:>12.6e} {:>12.6e} {:>12.6e} {:>10.6}",
            r.arb_rate_normalized, r.fee_rate_normalized, lvr_norm, r.p_trade
        );
        // what the LPs lose to rebalancing is split between arbitrageur
        // profit and fee income, up to a relative O(gamma^2) correction
        let rel = (r.arb_rate_normalized + r.fee_rate_normalized) / lvr_norm - 1.0;
        assert!(rel.abs() < 1e-4, "ARB + FEE far from LVR (rel {rel:e})");
    }

    // same report for a weighted pool goes through Gauss-Laguerre quadrature
    let gmm = PoolModel::geometric_mean(1.0, 0.3).unwrap();
    let fees = FeeSchedule::symmetric(0.003).unwrap();
    let r = rate_report(&gmm, 1.0, &params, &fees).unwrap();
    println!("\ngmm w=0.3, 30bp ({:?}):", r.method);
    println!(
        "  ARB/V {:.6e}  FEE/V {:.6e}  LVR/V {:.6e}",
        r.arb_rate_normalized,
        r.fee_rate_normalized,
        r.lvr_rate / r.pool_value
    );
    println!(
        "  asymptotics: arb {:.6e}  fee {:.6e}",
        r.arb_asymptotic / r.pool_value,
        r.fee_asymptotic / r.pool_value
    );

    // slow blocks can push the integral past its convergence threshold;
    // the rate is reported as infinite rather than an error
    let slow = MarketParams::driftless(0.5, 0.02).unwrap();
    let r = rate_report(&pool, 1.0, &slow, &fees).unwrap();
    println!("\nsigma=0.5, lambda=0.02/day: ARB/V = {}", r.arb_rate_normalized);
}
