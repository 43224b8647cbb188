//! Agreement under the best relabeling of outcomes, on a joint whose
//! correlations follow a scrambled pairing.

use fano_steering::stats::{agreement_best_ordering, agreement_identity, agreement_reversed};
use fano_steering::JointDistribution;

fn main() -> fano_steering::Result<()> {
    let n = 6;
    let pairing = [3, 0, 5, 1, 4, 2];
    let mut rows = vec![vec![0.02 / (n * n) as f64; n]; n];
    for (a, &b) in pairing.iter().enumerate() {
        rows[a][b] += 0.98 / n as f64;
    }
    let j = JointDistribution::from_rows(&rows)?;
    let (best, ordering) = agreement_best_ordering(&j)?;
    println!("identity {:.4}", agreement_identity(&j)?);
    println!("reversed {:.4}", agreement_reversed(&j)?);
    println!("best     {best:.4} ({:?})", ordering.kind);
    if let Some(p) = &ordering.permutation {
        println!("B outcome -> A outcome: {p:?}");
    }

    let anti = JointDistribution::from_rows(&[
        vec![0.0, 0.05, 0.45],
        vec![0.0, 0.0, 0.0],
        vec![0.45, 0.05, 0.0],
    ])?;
    let (best, ordering) = agreement_best_ordering(&anti)?;
    println!("anticorrelated: best {best:.2} ({:?})", ordering.kind);
    Ok(())
}
