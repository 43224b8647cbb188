mod common;

use fano_steering::stats::{agreement_best_ordering, agreement_with, OrderingKind};
use fano_steering::JointDistribution;
use rand::Rng;

fn check(rows: &[Vec<f64>]) {
    let j = JointDistribution::from_rows(rows).unwrap();
    let (best, ordering) = agreement_best_ordering(&j).unwrap();
    let oracle = common::brute_force_agreement(rows);
    assert!(
        (best - oracle).abs() <= 1e-12,
        "{best} vs {oracle} on {rows:?}"
    );
    assert!((agreement_with(&j, &ordering).unwrap() - best).abs() <= 1e-12);
}

#[test]
fn matches_exhaustive_search_on_random_matrices() {
    let mut rng = common::rng(5);
    for case in 0..150 {
        let n = 1 + case % 8;
        let mut rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..n).map(|_| rng.random::<f64>()).collect())
            .collect();
        common::normalize(&mut rows);
        check(&rows);
    }
}

#[test]
fn matches_exhaustive_search_with_ties() {
    let mut rng = common::rng(6);
    for case in 0..100 {
        let n = 2 + case % 7;
        let mut rows: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                (0..n)
                    .map(|_| f64::from(rng.random_range(0u8..3)))
                    .collect()
            })
            .collect();
        rows[0][0] += 1.0;
        common::normalize(&mut rows);
        check(&rows);
    }
}

#[test]
fn anticorrelated_data_prefers_reversal() {
    let n = 7;
    let mut rows = vec![vec![0.01; n]; n];
    for (a, row) in rows.iter_mut().enumerate() {
        row[n - 1 - a] = 1.0;
    }
    common::normalize(&mut rows);
    let j = JointDistribution::from_rows(&rows).unwrap();
    assert_eq!(
        agreement_best_ordering(&j).unwrap().1.kind,
        OrderingKind::Reversed
    );
    check(&rows);
}
