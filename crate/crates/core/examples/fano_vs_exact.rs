//! The Fano bounds against exact conditional entropies of simulated
//! windows, and the resulting certificates.

use fano_steering::entropy::conditional_entropy;
use fano_steering::spdc_sim::{
    joint_momentum_distribution, joint_position_distribution, truncate_to_window, BiphotonModel,
};
use fano_steering::stats::agreement_best_ordering;
use fano_steering::{
    discrete_steering_check, modified_fano_bound, steering_certificate, CorrelationStats,
    DetectorGeometry,
};

fn main() -> fano_steering::Result<()> {
    let window = 24;
    for ratio in [4.0, 10.0, 30.0] {
        let m = BiphotonModel::with_ratio(1.0, ratio, 32, 8.0)?;
        let (jx, mu_x) = truncate_to_window(&joint_position_distribution(&m)?, window)?;
        let (jk, mu_k) = truncate_to_window(&joint_momentum_distribution(&m)?, window)?;
        let (eta_x, _) = agreement_best_ordering(&jx)?;
        let (eta_k, _) = agreement_best_ordering(&jk)?;
        let g = DetectorGeometry::new(m.delta_x(), m.delta_k(), window)?;

        println!("ratio {ratio}");
        for (axis, j, eta, mu) in [("x", &jx, eta_x, mu_x), ("k", &jk, eta_k, mu_k)] {
            let bound = modified_fano_bound(eta, mu, window)?;
            println!(
                "  {axis}: eta {eta:.4} mu {mu:.6}  H(B|A) {:.4} <= {:.4}{}",
                conditional_entropy(j)?,
                bound.bits,
                if bound.applicable {
                    ""
                } else {
                    " (inapplicable)"
                }
            );
        }
        let cert = steering_certificate(&CorrelationStats::new(eta_x, eta_k, mu_x, mu_k)?, &g)?;
        let exact = discrete_steering_check(&jx, &jk, &g)?;
        println!(
            "  violation: Fano {:.4} ({}), exact {:.4}",
            cert.violation,
            cert.verdict(),
            exact.violation
        );
    }
    Ok(())
}
