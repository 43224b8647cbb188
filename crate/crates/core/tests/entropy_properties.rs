mod common;

use approx::assert_abs_diff_eq;
use fano_steering::entropy::{
    binary_entropy, conditional_entropy, differential_entropy_upper_estimate,
    gaussian_differential_entropy, geometric_entropy_bound, mutual_information, shannon_entropy,
};
use fano_steering::{JointDistribution, ProbabilityVector};
use proptest::prelude::*;

fn joint(rows: &[Vec<f64>]) -> JointDistribution {
    JointDistribution::from_rows(rows).unwrap()
}

proptest! {
    #[test]
    fn h2_is_symmetric(p in 0.0f64..=1.0) {
        let a = binary_entropy(p).unwrap();
        let b = binary_entropy(1.0 - p).unwrap();
        prop_assert!((a - b).abs() <= 1e-15);
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert!((a - common::h2(p)).abs() <= 1e-15);
    }

    #[test]
    fn conditional_entropy_matches_oracle(seed in any::<u64>(), n in 2usize..12) {
        let rows = common::random_joint(&mut common::rng(seed), n, 0.0);
        let h = conditional_entropy(&joint(&rows)).unwrap();
        prop_assert!((h - common::conditional_entropy(&rows)).abs() <= 1e-9);
    }

    #[test]
    fn conditioning_reduces_entropy(seed in any::<u64>(), n in 2usize..12) {
        let rows = common::random_joint(&mut common::rng(seed), n, 0.0);
        let j = joint(&rows);
        let hb = shannon_entropy(&ProbabilityVector::new(j.marginal_b()).unwrap()).unwrap();
        prop_assert!(conditional_entropy(&j).unwrap() <= hb + 1e-12);
        prop_assert!(mutual_information(&j).unwrap() >= 0.0);
    }

    #[test]
    fn product_states_share_no_information(
        a in prop::collection::vec(0.01f64..1.0, 2..10),
        b in prop::collection::vec(0.01f64..1.0, 2..10),
    ) {
        let sa: f64 = a.iter().sum();
        let sb: f64 = b.iter().sum();
        let a: Vec<f64> = a.iter().map(|x| x / sa).collect();
        let b: Vec<f64> = b.iter().map(|x| x / sb).collect();
        let j = JointDistribution::product(&a, &b).unwrap();
        prop_assert!(mutual_information(&j).unwrap() <= 1e-12);
        prop_assert!((conditional_entropy(&j).unwrap() - common::entropy(&b)).abs() <= 1e-12);
    }

    #[test]
    fn geometric_bound_dominates_constrained_tails(
        mu in 0.05f64..0.999,
        tail in prop::collection::vec(0.0f64..1.0, 1..40),
        fill in 0.0f64..=1.0,
    ) {
        let total: f64 = tail.iter().sum();
        prop_assume!(total > 0.0);
        // conditional law of w >= 1, then pulled toward w = 1 until its mean
        // sits at a random point of [1, 1/mu]
        let mut q: Vec<f64> = tail.iter().map(|t| t / total).collect();
        let m: f64 = q.iter().enumerate().map(|(i, p)| (i + 1) as f64 * p).sum();
        let target = 1.0 + fill * (1.0 / mu - 1.0);
        if m > target {
            let lambda = (m - target) / (m - 1.0);
            for p in q.iter_mut() {
                *p *= 1.0 - lambda;
            }
            q[0] += lambda;
        }
        let mut p = vec![mu];
        p.extend(q.iter().map(|x| x * (1.0 - mu)));
        let mean: f64 = p.iter().enumerate().map(|(w, x)| w as f64 * x).sum();
        prop_assert!(mean <= (1.0 - mu) / mu * (1.0 + 1e-12));
        prop_assert!(common::entropy(&p) <= geometric_entropy_bound(mu).unwrap() + 1e-12);
    }
}

#[test]
fn geometric_bound_is_the_geometric_entropy() {
    for mu in [0.1, 0.25, 0.5, 0.9, 0.952, 0.997] {
        let direct = common::geometric_entropy_sum(mu, 1e-12);
        assert_abs_diff_eq!(geometric_entropy_bound(mu).unwrap(), direct, epsilon = 1e-9);
    }
}

#[test]
fn geometric_bound_needs_the_mean_constraint() {
    // half the mass at w = 0, the rest spread over 64 far windows
    let mut p = vec![0.5];
    p.extend(std::iter::repeat_n(0.5 / 64.0, 64));
    assert_abs_diff_eq!(common::entropy(&p), 4.0, epsilon = 1e-12);
    assert!(common::entropy(&p) > geometric_entropy_bound(0.5).unwrap());
}

/// Bin probabilities of the unit normal by Simpson quadrature.
fn binned_unit_normal(width: f64) -> Vec<f64> {
    let half = (12.0 / width).ceil() as i64;
    (-half..half)
        .map(|i| {
            let lo = i as f64 * width;
            common::simpson(common::std_normal_pdf, lo, lo + width, 16)
        })
        .collect()
}

#[test]
fn binned_gaussian_entropy_approaches_the_differential_entropy() {
    let h = 0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E).log2();
    assert_abs_diff_eq!(
        gaussian_differential_entropy(1.0).unwrap(),
        h,
        epsilon = 1e-12
    );
    let mut gaps = Vec::new();
    for width in [1.0, 0.5, 0.1, 0.01] {
        let p = ProbabilityVector::from_counts(&binned_unit_normal(width)).unwrap();
        let estimate =
            differential_entropy_upper_estimate(shannon_entropy(&p).unwrap(), width).unwrap();
        assert!(estimate >= h, "width {width}: {estimate} < {h}");
        gaps.push(estimate - h);
    }
    assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
    assert!(gaps[3] < 1e-4, "{gaps:?}");
}
