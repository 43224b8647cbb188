//! One-way secret key rate bound as the domain probabilities shrink.

use fano_steering::{secret_key_rate, CorrelationStats, DetectorGeometry};

fn main() -> fano_steering::Result<()> {
    let g = DetectorGeometry::from_rhs_bits(8.284, 256)?;
    for mu in [1.0, 0.99, 0.97, 0.95, 0.93, 0.91] {
        let s = CorrelationStats::new(0.694, 0.751, mu, mu)?;
        let k = secret_key_rate(&s, &g)?;
        println!(
            "mu = {mu:.2}: {:>8.4} bits per pair ({})",
            k.bits,
            k.verdict()
        );
    }
    Ok(())
}
