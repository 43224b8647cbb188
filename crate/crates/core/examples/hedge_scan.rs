//! How far the domain probabilities can drop before the measured
//! agreements stop certifying.

use fano_steering::stats::{hedge_min_domain, HedgeMode};

fn main() -> fano_steering::Result<()> {
    let (eta_x, eta_k, n_bar, rhs) = (0.694, 0.751, 256, 8.284);
    let modes = [
        ("common", HedgeMode::Common),
        (
            "position, mu_k = 0.952",
            HedgeMode::Position { mu_k: 0.952 },
        ),
        (
            "momentum, mu_x = 0.917",
            HedgeMode::Momentum { mu_x: 0.997 * 0.92 },
        ),
    ];
    for (name, mode) in modes {
        let mu = hedge_min_domain(eta_x, eta_k, n_bar, rhs, mode)?;
        println!("{name:<24} mu_min = {mu:.4}");
    }
    for eta in [0.8, 0.9, 1.0] {
        let mu = hedge_min_domain(eta, eta, n_bar, rhs, HedgeMode::Common)?;
        println!("eta_x = eta_k = {eta:<4}      mu_min = {mu:.4}");
    }
    Ok(())
}
