//! Domain probability estimated from a Gaussian fit to a windowed
//! marginal, against the true mass inside the window.

use fano_steering::normal::gaussian_interval_mass;
use fano_steering::stats::domain_probability_from_fit;
use fano_steering::ProbabilityVector;

fn main() -> fano_steering::Result<()> {
    let bins = 32;
    let centre = (bins - 1) as f64 / 2.0;
    for sigma in [3.0, 6.0, 9.0, 12.0] {
        let weights: Vec<f64> = (0..bins)
            .map(|i| gaussian_interval_mass(centre, sigma, i as f64 - 0.5, i as f64 + 0.5))
            .collect();
        let truth: f64 = weights.iter().sum();
        // only the window is observed
        let observed = ProbabilityVector::from_counts(&weights)?;
        let (mu, fit) = domain_probability_from_fit(&observed, bins)?;
        println!(
            "sigma {sigma:>5.1}: fitted sigma {:>7.4}, mu {mu:.6} (true {truth:.6})",
            fit.sigma
        );
    }
    Ok(())
}
