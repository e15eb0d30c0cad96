//! Sweep the fee band and print the frontier table: exact arbitrage rate,
//! mispricing stdev, trade probability, and the LVR*P_trade approximation
//! with its relative error.

use cfmm_arb::mispricing::MarketParams;
use cfmm_arb::pool::PoolModel;
use cfmm_arb::rates::frontier;

fn main() {
    let params = MarketParams::driftless(0.05, 86_400.0 / 12.0).unwrap();
    let pool = PoolModel::constant_product(1.0).unwrap();
    let gammas: Vec<f64> = [1.0, 5.0, 10.0, 30.0, 60.0, 100.0, 150.0]
        .iter()
        .map(|bp| bp * 1e-4)
        .collect();

    let rows = frontier(&params, &gammas, &pool).unwrap();
    println!("gamma,arb,stdev,ptr,lvrptr,lvr,pcterror");
    for r in rows {
        println!("{},{},{},{},{},{},{}", r.gamma, r.arb, r.stdev, r.ptr, r.lvrptr, r.lvr, r.pcterror);
    }
    // gamma/stdev are in bp, rate columns in bp of pool value per day,
    // same layout as the CLI's `frontier` subcommand. lvrptr = LVR*P_trade
    // tracks arb to a relative error of sigma^2/(8 lambda) + O(gamma^2).
}
