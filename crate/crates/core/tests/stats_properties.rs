mod common;

use approx::assert_abs_diff_eq;
use fano_steering::spdc_sim::{
    joint_position_distribution, sample_counts, truncate_to_window, BiphotonModel,
};
use fano_steering::stats::{agreement_best_ordering, domain_probability_from_fit, lhs_std};
use fano_steering::{fano_steering_lhs, CorrelationStats, JointDistribution, ProbabilityVector};
use rand_distr::{Binomial, Distribution};
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn monte_carlo_lhs_std(eta_x: f64, eta_k: f64, mu_x: f64, mu_k: f64, n: u64, draws: usize) -> f64 {
    let mut rng = common::rng(99);
    let bx = Binomial::new(n, eta_x).unwrap();
    let bk = Binomial::new(n, eta_k).unwrap();
    let samples: Vec<f64> = (0..draws)
        .map(|_| {
            let ex = bx.sample(&mut rng) as f64 / n as f64;
            let ek = bk.sample(&mut rng) as f64 / n as f64;
            common::fano_lhs(ex, ek, mu_x, mu_k, 256)
        })
        .collect();
    let mean = samples.iter().sum::<f64>() / draws as f64;
    (samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (draws - 1) as f64).sqrt()
}

#[test]
fn delta_method_matches_resampling() {
    for (mx, mk) in [(1.0, 1.0), (0.997 * 0.92, 0.952)] {
        let s = CorrelationStats::new(0.694, 0.751, mx, mk)
            .unwrap()
            .with_counts(10_000, 10_000)
            .unwrap();
        let delta = lhs_std(&s, 256).unwrap();
        let mc = monte_carlo_lhs_std(0.694, 0.751, mx, mk, 10_000, 100_000);
        assert!((delta / mc - 1.0).abs() < 0.10, "delta {delta}, mc {mc}");
    }
}

fn test_joint() -> JointDistribution {
    JointDistribution::from_rows(&[
        vec![0.20, 0.05, 0.01, 0.00],
        vec![0.04, 0.15, 0.05, 0.01],
        vec![0.01, 0.05, 0.15, 0.04],
        vec![0.00, 0.01, 0.03, 0.20],
    ])
    .unwrap()
}

#[test]
fn sampled_counts_pass_a_chi_square_test() {
    let j = test_joint();
    let cells: Vec<(usize, f64)> = j
        .data()
        .iter()
        .copied()
        .enumerate()
        .filter(|c| c.1 > 0.0)
        .collect();
    let critical = ChiSquared::new((cells.len() - 1) as f64)
        .unwrap()
        .inverse_cdf(0.999);
    let total = 100_000u64;
    for seed in 0..20 {
        let counts = sample_counts(&j, total, seed).unwrap();
        assert_eq!(counts.counts.iter().sum::<u64>(), total);
        assert_eq!(counts.counts[3], 0);
        let stat: f64 = cells
            .iter()
            .map(|&(i, p)| {
                let e = p * total as f64;
                (counts.counts[i] as f64 - e).powi(2) / e
            })
            .sum();
        assert!(stat < critical, "seed {seed}: {stat} >= {critical}");
    }
}

#[test]
fn frequencies_converge() {
    let j = test_joint();
    let counts = sample_counts(&j, 10_000_000, 3).unwrap();
    let freq = counts.to_joint().unwrap();
    for (f, p) in freq.data().iter().zip(j.data()) {
        assert!((f - p).abs() < 1e-3, "{f} vs {p}");
    }
}

#[test]
fn sampling_is_reproducible() {
    let j = test_joint();
    assert_eq!(
        sample_counts(&j, 5000, 8).unwrap(),
        sample_counts(&j, 5000, 8).unwrap()
    );
    assert_ne!(
        sample_counts(&j, 5000, 8).unwrap().counts,
        sample_counts(&j, 5000, 9).unwrap().counts
    );
}

#[test]
fn agreement_grows_with_correlation() {
    let mut last = 0.0;
    for ratio in [1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0] {
        let m = BiphotonModel::with_ratio(1.0, ratio, 40, 10.0).unwrap();
        let (w, _) = truncate_to_window(&joint_position_distribution(&m).unwrap(), 32).unwrap();
        let (eta, _) = agreement_best_ordering(&w).unwrap();
        assert!(eta > last, "ratio {ratio}: {eta} <= {last}");
        last = eta;
    }
}

/// Two-photon amplitude of the position model: the square root of its
/// density.
fn amplitude(sum: f64, diff: f64, a: f64, b: f64) -> f64 {
    (-(a + b).powi(2) / (8.0 * sum * sum) - (a - b).powi(2) / (8.0 * diff * diff)).exp()
}

/// `|integral psi(a, b) exp(-i (ka a + kb b)) da db|^2` by the trapezoid rule.
/// The amplitude is even, so only the cosine part survives.
fn momentum_density(sum: f64, diff: f64, ka: f64, kb: f64) -> f64 {
    let (half, steps) = (12.0, 600);
    let h = 2.0 * half / steps as f64;
    let mut acc = 0.0;
    for i in 0..=steps {
        let a = -half + i as f64 * h;
        let wa = if i == 0 || i == steps { 0.5 } else { 1.0 };
        for j in 0..=steps {
            let b = -half + j as f64 * h;
            let wb = if j == 0 || j == steps { 0.5 } else { 1.0 };
            acc += wa * wb * amplitude(sum, diff, a, b) * (ka * a + kb * b).cos();
        }
    }
    (acc * h * h).powi(2)
}

#[test]
fn momentum_widths_are_fourier_conjugate() {
    let m = BiphotonModel::with_ratio(1.0, 5.0, 40, 10.0).unwrap();
    let modes = m.momentum_modes();
    let origin = momentum_density(m.sigma_plus, m.sigma_minus, 0.0, 0.0);
    for (ka, kb) in [(0.3, 0.1), (1.0, -0.8), (-0.5, -0.2), (2.0, -2.5)] {
        let numeric = momentum_density(m.sigma_plus, m.sigma_minus, ka, kb) / origin;
        let model = modes.density(ka, kb) / modes.density(0.0, 0.0);
        assert_abs_diff_eq!(numeric, model, epsilon = 1e-9);
    }
}

#[test]
fn fitted_domain_tracks_the_true_window_mass() {
    let m = BiphotonModel::with_ratio(1.0, 20.0, 48, 6.0).unwrap();
    let sim = joint_position_distribution(&m).unwrap();
    for w in [24, 32, 40] {
        let (_, mu_true) = truncate_to_window(&sim, w).unwrap();
        let counts = sample_counts(&sim.joint, 1_000_000, 4)
            .unwrap()
            .to_joint()
            .unwrap();
        let marginal = ProbabilityVector::from_counts(&counts.marginal_a()).unwrap();
        let (mu_a, _) = domain_probability_from_fit(&marginal, w).unwrap();
        // one-sided window mass bounds the joint mass from above
        assert!(mu_a >= mu_true - 2e-3, "window {w}: {mu_a} vs {mu_true}");
        assert!(mu_a - mu_true < 0.05, "window {w}: {mu_a} vs {mu_true}");
    }
}

#[test]
fn error_bars_shrink_with_counts() {
    let s = CorrelationStats::full_domain(0.694, 0.751).unwrap();
    let a = lhs_std(&s.with_counts(1000, 1000).unwrap(), 256).unwrap();
    let b = lhs_std(&s.with_counts(100_000, 100_000).unwrap(), 256).unwrap();
    assert_abs_diff_eq!(a / b, 10.0, epsilon = 1e-9);
    assert!(fano_steering_lhs(&s, 256).unwrap().applicable);
}
