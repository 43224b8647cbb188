//! Synthetic photon pair data: agreement and domain probabilities of
//! the double-Gaussian model as the correlation ratio grows.

use fano_steering::spdc_sim::{
    joint_momentum_distribution, joint_position_distribution, sample_counts, threshold_renormalize,
    truncate_to_window, BiphotonModel,
};
use fano_steering::stats::agreement_best_ordering;

fn main() -> fano_steering::Result<()> {
    println!(
        "{:>6} {:>8} {:>8} {:>8} {:>8}",
        "ratio", "eta_x", "eta_k", "mu_x", "mu_k"
    );
    for ratio in [1.0, 2.0, 5.0, 10.0, 50.0] {
        let m = BiphotonModel::with_ratio(1.0, ratio, 40, 10.0)?;
        let mut row = Vec::new();
        let mut mus = Vec::new();
        for (i, sim) in [
            joint_position_distribution(&m)?,
            joint_momentum_distribution(&m)?,
        ]
        .into_iter()
        .enumerate()
        {
            let (window, mu) = truncate_to_window(&sim, 32)?;
            let counts = sample_counts(&window, 1_000_000, 17 + i as u64)?;
            let kept = threshold_renormalize(&counts.to_joint()?, 0.1)?;
            row.push(agreement_best_ordering(&kept)?.0);
            mus.push(mu);
        }
        println!(
            "{ratio:>6} {:>8.4} {:>8.4} {:>8.5} {:>8.5}",
            row[0], row[1], mus[0], mus[1]
        );
    }
    Ok(())
}
