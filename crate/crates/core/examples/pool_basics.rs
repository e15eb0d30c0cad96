//! Demand curves, pool value, and the myopic arbitrage trade for a
//! constant-product and a 20/80 geometric-mean pool.

use cfmm_arb::pool::{myopic_trade, FeeSchedule, PoolModel};

fn main() {
    let cpmm = PoolModel::constant_product(1.0).unwrap();
    let gmm = PoolModel::geometric_mean(1.0, 0.2).unwrap();
    let fees = FeeSchedule::symmetric(0.003).unwrap(); // 30 bp each way

    for (name, pool) in [("cpmm", &cpmm), ("gmm w=0.2", &gmm)] {
        println!("-- {name}");
        for p in [0.5, 1.0, 2.0] {
            println!(
                "  P={p:<4} x*={:.6} y*={:.6} V={:.6}",
                pool.demand_x(p).unwrap(),
                pool.demand_y(p).unwrap(),
                pool.value(p).unwrap()
            );
        }
    }

    // An arbitrageur arrives and finds the pool price 1% below the market
    // price (z = log mispricing = 0.01). With a 30 bp fee the trade happens
    // only because z clears the band; the pool is left at the band edge.
    let z = 0.01;
    let out = myopic_trade(&cpmm, &fees, 1.0, z).unwrap();
    println!("\nz=0.01 against the 30bp cpmm:");
    println!("  traded      {}", out.traded);
    println!("  z after     {:.6}", out.z_post);
    println!("  dx into pool {:.3e}", out.delta_x);
    println!("  dy into pool {:.3e}", out.delta_y);
    println!("  arb profit  {:.6e}", out.arb_profit);
    println!("  fee paid    {:.6e}", out.fee_paid);

    // inside the band nothing happens
    let idle = myopic_trade(&cpmm, &fees, 1.0, 0.0005).unwrap();
    assert!(!idle.traded && idle.arb_profit == 0.0);
    println!("\nz=5bp (inside the band): no trade");
}
