//! The stationary mispricing distribution: uniform core plus exponential
//! tails in the driftless case, tilted core when the asset drifts.

use cfmm_arb::mispricing::{
    eta, mispricing_stdev, nonsymmetric_law, p_trade, stationary_law, MarketParams,
};
use cfmm_arb::pool::FeeSchedule;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    // 5% daily vol, 12 second blocks, 30 bp fee
    let params = MarketParams::driftless(0.05, 86_400.0 / 12.0).unwrap();
    let fees = FeeSchedule::symmetric(0.003).unwrap();

    println!("eta      = {:.4}", eta(&params, &fees).unwrap());
    println!("P_trade  = {:.6}", p_trade(&params, &fees).unwrap());
    println!("sigma_z  = {:.4} bp", mispricing_stdev(&params, &fees).unwrap() * 1e4);

    let law = stationary_law(&params, &fees).unwrap();
    println!(
        "masses: core {:.6}  tails {:.6} / {:.6}  (sum {:.6})",
        law.pi_0,
        law.pi_plus,
        law.pi_minus,
        law.pi_0 + law.pi_plus + law.pi_minus
    );

    // density profile across the band edge
    for z_bp in [-60.0, -30.0, 0.0, 29.9, 30.1, 45.0, 90.0] {
        let z = z_bp * 1e-4;
        println!("  f({z_bp:>6} bp) = {:10.4}", law.density(z));
    }

    // draw a few samples
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let draws: Vec<f64> = (0..5).map(|_| law.sample(&mut rng) * 1e4).collect();
    println!("samples (bp): {draws:.2?}");

    // with drift the core tilts and the tail rates split
    let drifting = MarketParams::new(0.08, 0.05, 86_400.0 / 12.0).unwrap();
    let tilted = nonsymmetric_law(&drifting, &fees).unwrap();
    println!(
        "\nmu=8%/day: pi+ {:.6} pi- {:.6}, tail rates {:.1} / {:.1}, P_trade {:.6}",
        tilted.pi_plus,
        tilted.pi_minus,
        tilted.tail_rate_plus,
        tilted.tail_rate_minus,
        tilted.p_trade()
    );
}
