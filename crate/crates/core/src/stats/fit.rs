//! Least-squares Gaussian fits to binned marginals.
//!
//! The model is bin-integrated: bin `i` covers `[i - 1/2, i + 1/2]` in
//! bin-index units and receives `amplitude * P(bin | mean, sigma)`. The
//! amplitude is therefore the total area under the fitted Gaussian.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::entropy::ProbabilityVector;
use crate::error::{Error, Result};
use crate::normal::{gaussian_interval_mass, pdf};

pub const MAX_ITERATIONS: usize = 200;
pub const RELATIVE_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianFit {
    /// Area under the fitted curve, in the units of the fitted data.
    pub amplitude: f64,
    /// Center in bin-index units (bin `i` is centered at `i`).
    pub mean: f64,
    pub sigma: f64,
    /// Sum of squared residuals at the solution.
    pub residual: f64,
    pub iterations: usize,
}

impl GaussianFit {
    /// Fraction of the fitted Gaussian's area between two bin-index edges.
    pub fn mass_between(&self, lo: f64, hi: f64) -> f64 {
        gaussian_interval_mass(self.mean, self.sigma, lo, hi)
    }

    /// Model value for bin `i`.
    pub fn bin_value(&self, i: usize) -> f64 {
        let x = i as f64;
        self.amplitude * self.mass_between(x - 0.5, x + 0.5)
    }
}

struct Model<'a> {
    data: &'a [f64],
}

impl Model<'_> {
    fn ssr(&self, p: &Vector3<f64>) -> f64 {
        self.data
            .iter()
            .enumerate()
            .map(|(i, &y)| {
                let x = i as f64;
                let r = y - p[0] * gaussian_interval_mass(p[1], p[2], x - 0.5, x + 0.5);
                r * r
            })
            .sum()
    }

    /// Normal equations `J^T J` and `J^T r` at `p`.
    fn normal_equations(&self, p: &Vector3<f64>) -> (Matrix3<f64>, Vector3<f64>) {
        let (a, m, s) = (p[0], p[1], p[2]);
        let mut jtj = Matrix3::zeros();
        let mut jtr = Vector3::zeros();
        for (i, &y) in self.data.iter().enumerate() {
            let x = i as f64;
            let zl = (x - 0.5 - m) / s;
            let zh = (x + 0.5 - m) / s;
            let mass = gaussian_interval_mass(m, s, x - 0.5, x + 0.5);
            let (pl, ph) = (pdf(zl), pdf(zh));
            let grad = Vector3::new(mass, a * (pl - ph) / s, a * (zl * pl - zh * ph) / s);
            let r = y - a * mass;
            jtj += grad * grad.transpose();
            jtr += grad * r;
        }
        (jtj, jtr)
    }
}

/// Fits a Gaussian to binned values by Levenberg-Marquardt.
///
/// The starting point is the histogram's own mean and variance. Iteration
/// stops once every parameter moves by less than [`RELATIVE_TOLERANCE`]
/// relative, or when no damped step can lower the residual any further.
pub fn fit_gaussian(values: &[f64]) -> Result<GaussianFit> {
    let nonzero = values.iter().filter(|&&v| v > 0.0).count();
    if nonzero < 4 {
        return Err(Error::Fit(format!(
            "need at least 4 nonzero bins, found {nonzero}"
        )));
    }
    if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::Fit("bins must be finite and nonnegative".into()));
    }
    let total: f64 = values.iter().sum();
    let mean = values
        .iter()
        .enumerate()
        .map(|(i, v)| i as f64 * v)
        .sum::<f64>()
        / total;
    let var = values
        .iter()
        .enumerate()
        .map(|(i, v)| (i as f64 - mean).powi(2) * v)
        .sum::<f64>()
        / total;
    // remove the uniform-bin contribution (1/12) when it leaves something
    let sigma0 = if var > 1.0 / 6.0 {
        (var - 1.0 / 12.0).sqrt()
    } else {
        var.sqrt().max(0.25)
    };

    let model = Model { data: values };
    let mut p = Vector3::new(total, mean, sigma0);
    let mut ssr = model.ssr(&p);
    let mut lambda = 1e-3;

    for iteration in 1..=MAX_ITERATIONS {
        let (jtj, jtr) = model.normal_equations(&p);
        let mut accepted = None;
        while lambda < 1e16 {
            let mut damped = jtj;
            for d in 0..3 {
                damped[(d, d)] += lambda * jtj[(d, d)].max(f64::MIN_POSITIVE);
            }
            let Some(step) = damped.lu().solve(&jtr) else {
                lambda *= 10.0;
                continue;
            };
            let trial = p + step;
            if trial[0] <= 0.0 || trial[2] <= 0.0 || !trial.iter().all(|v| v.is_finite()) {
                lambda *= 10.0;
                continue;
            }
            let trial_ssr = model.ssr(&trial);
            if trial_ssr <= ssr {
                accepted = Some((trial, trial_ssr, step));
                lambda = (lambda * 0.1).max(1e-12);
                break;
            }
            lambda *= 10.0;
        }
        let Some((trial, trial_ssr, step)) = accepted else {
            // no descent direction left: p is a numerical minimum
            return Ok(finish(p, ssr, iteration));
        };
        p = trial;
        ssr = trial_ssr;
        let converged =
            (0..3).all(|d| step[d].abs() <= RELATIVE_TOLERANCE * p[d].abs().max(1e-300));
        if converged {
            return Ok(finish(p, ssr, iteration));
        }
    }
    Err(Error::Fit(format!(
        "no convergence after {MAX_ITERATIONS} iterations"
    )))
}

fn finish(p: Vector3<f64>, residual: f64, iterations: usize) -> GaussianFit {
    GaussianFit {
        amplitude: p[0],
        mean: p[1],
        sigma: p[2],
        residual,
        iterations,
    }
}

/// Domain probability of one detector from a Gaussian fit to its marginal.
///
/// `marginal` spans the detector's bins; the window is the centered
/// `window_bin_count` bins of it. The estimate is the fitted Gaussian's
/// mass over the window divided by its mass over the whole line.
pub fn domain_probability_from_fit(
    marginal: &ProbabilityVector,
    window_bin_count: usize,
) -> Result<(f64, GaussianFit)> {
    let n = marginal.len();
    if window_bin_count == 0 || window_bin_count > n {
        return Err(Error::Window {
            window: window_bin_count,
            grid: n,
        });
    }
    let fit = fit_gaussian(marginal.weights())?;
    let lo = (n - window_bin_count) as f64 / 2.0 - 0.5;
    let hi = lo + window_bin_count as f64;
    Ok((fit.mass_between(lo, hi), fit))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normal::interval_mass;
    use approx::assert_abs_diff_eq;

    fn binned(n: usize, mean: f64, sigma: f64, scale: f64) -> Vec<f64> {
        (0..n)
            .map(|i| scale * gaussian_interval_mass(mean, sigma, i as f64 - 0.5, i as f64 + 0.5))
            .collect()
    }

    #[test]
    fn recovers_exact_parameters() {
        let data = binned(40, 18.3, 4.7, 1000.0);
        let fit = fit_gaussian(&data).unwrap();
        assert_abs_diff_eq!(fit.mean, 18.3, epsilon = 1e-8);
        assert_abs_diff_eq!(fit.sigma, 4.7, epsilon = 1e-8);
        assert_abs_diff_eq!(fit.amplitude, 1000.0, epsilon = 1e-6);
        assert!(fit.residual < 1e-12);
    }

    #[test]
    fn recovers_a_truncated_gaussian() {
        // window only covers +-1.5 sigma; the fit must extrapolate the tails
        let data = binned(16, 7.5, 5.0, 1.0);
        let fit = fit_gaussian(&data).unwrap();
        assert_abs_diff_eq!(fit.sigma, 5.0, epsilon = 1e-7);
        assert_abs_diff_eq!(fit.amplitude, 1.0, epsilon = 1e-7);
    }

    #[test]
    fn domain_from_wide_window() {
        // 60 bins, sigma 5 bins: window spans +-6 sigma
        let data = binned(60, 29.5, 5.0, 1.0);
        let pv = ProbabilityVector::from_counts(&data).unwrap();
        let (mu, _) = domain_probability_from_fit(&pv, 60).unwrap();
        assert!(mu >= 0.9999, "mu = {mu}");
    }

    #[test]
    fn domain_from_two_sigma_window() {
        // 40 bins with sigma 10: edges at +-20 bins = +-2 sigma
        let data = binned(40, 19.5, 10.0, 1.0);
        let pv = ProbabilityVector::from_counts(&data).unwrap();
        let (mu, fit) = domain_probability_from_fit(&pv, 40).unwrap();
        assert_abs_diff_eq!(mu, interval_mass(-2.0, 2.0), epsilon = 1e-6);
        assert_abs_diff_eq!(mu, 0.9545, epsilon = 1e-4);
        assert_abs_diff_eq!(fit.sigma, 10.0, epsilon = 1e-6);
    }

    #[test]
    fn rescaling_counts_does_not_move_the_estimate() {
        let data: Vec<f64> = binned(24, 11.0, 4.0, 1e4)
            .iter()
            .map(|v| v.round())
            .collect();
        let scaled: Vec<f64> = data.iter().map(|v| v * 37.0).collect();
        let a = domain_probability_from_fit(&ProbabilityVector::from_counts(&data).unwrap(), 20)
            .unwrap();
        let b = domain_probability_from_fit(&ProbabilityVector::from_counts(&scaled).unwrap(), 20)
            .unwrap();
        assert_abs_diff_eq!(a.0, b.0, epsilon = 1e-12);
    }

    #[test]
    fn degenerate_data_is_rejected() {
        assert!(matches!(
            fit_gaussian(&[0.0, 1.0, 0.0, 0.0]),
            Err(Error::Fit(_))
        ));
        assert!(matches!(
            fit_gaussian(&[0.0, 1.0, 1.0, 1.0]),
            Err(Error::Fit(_))
        ));
        let pv = ProbabilityVector::new(vec![0.25; 4]).unwrap();
        assert!(domain_probability_from_fit(&pv, 5).is_err());
    }
}
