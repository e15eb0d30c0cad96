//! Verify stationarity the hard way: for a stationary law pi and the
//! process generator A, E_pi[A f] must vanish for every nice test
//! function f. Run the battery and print the residuals.

use cfmm_arb::generator::{generator_residual, TestFunction};
use cfmm_arb::mispricing::{nonsymmetric_law, stationary_law, MarketParams};
use cfmm_arb::pool::FeeSchedule;

fn main() {
    let fees = FeeSchedule::symmetric(0.003).unwrap();

    let driftless = MarketParams::driftless(0.05, 86_400.0 / 12.0).unwrap();
    let sym = stationary_law(&driftless, &fees).unwrap();

    let drifting = MarketParams::new(0.08, 0.05, 86_400.0 / 12.0).unwrap();
    let tilted = nonsymmetric_law(&drifting, &fees).unwrap();

    for (tag, params, law) in [("driftless", &driftless, &sym), ("mu=8%/day", &drifting, &tilted)] {
        println!("-- {tag}");
        for tf in TestFunction::battery(law) {
            let r = generator_residual(params, law, &tf).unwrap();
            println!("  E[Af] = {r:+.3e}   f = {}", tf.name);
        }
    }

    // a wrong law fails loudly: reuse the driftless law under the
    // drifting dynamics
    let tf = &TestFunction::battery(&sym)[0];
    let bad = generator_residual(&drifting, &sym, tf).unwrap();
    println!("\ndriftless law under drifting dynamics: E[Af] = {bad:+.3e} (should be far from 0)");
}
