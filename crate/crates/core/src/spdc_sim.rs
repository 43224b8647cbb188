//! Synthetic biphoton data: double-Gaussian joint position and momentum
//! distributions, finite viewing windows, dead space, multinomial
//! coincidence counts and noise-floor thresholding.
//!
//! The position density is
//!
//! ```text
//! p(xa, xb) ~ exp(-(xa + xb)^2 / (4 s+^2) - (xa - xb)^2 / (4 s-^2))
//! ```
//!
//! and its Fourier conjugate has sum width `1/(2 s+)` and difference width
//! `1/(2 s-)`, so a narrow `s-` gives correlated positions and
//! anti-correlated momenta.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::entropy::JointDistribution;
use crate::error::{check_positive, check_probability, check_unit_open_closed, Error, Result};
use crate::normal::interval_mass;

/// Sub-intervals per pixel along the integrated axis.
const SUBINTERVALS: usize = 8;

/// 4-point Gauss-Legendre nodes and weights on [-1, 1].
const GL_NODES: [f64; 4] = [
    -0.861_136_311_594_052_6,
    -0.339_981_043_584_856_3,
    0.339_981_043_584_856_3,
    0.861_136_311_594_052_6,
];
const GL_WEIGHTS: [f64; 4] = [
    0.347_854_845_137_453_9,
    0.652_145_154_862_546_1,
    0.652_145_154_862_546_1,
    0.347_854_845_137_453_9,
];

/// Widths of the sum and difference modes of a double Gaussian.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DoubleGaussian {
    /// Width of `a + b`.
    pub sum_width: f64,
    /// Width of `a - b`.
    pub diff_width: f64,
}

impl DoubleGaussian {
    /// Standard deviation of either single-party marginal.
    pub fn marginal_sigma(&self) -> f64 {
        ((self.sum_width.powi(2) + self.diff_width.powi(2)) / 2.0).sqrt()
    }

    /// `B` given `A = a` is Gaussian with mean `slope * a`.
    pub fn conditional_slope(&self) -> f64 {
        let (s2, d2) = (self.sum_width.powi(2), self.diff_width.powi(2));
        (s2 - d2) / (s2 + d2)
    }

    pub fn conditional_sigma(&self) -> f64 {
        let (s2, d2) = (self.sum_width.powi(2), self.diff_width.powi(2));
        (2.0 * s2 * d2 / (s2 + d2)).sqrt()
    }

    /// Unnormalized density, for spot checks.
    pub fn density(&self, a: f64, b: f64) -> f64 {
        (-(a + b).powi(2) / (4.0 * self.sum_width.powi(2))
            - (a - b).powi(2) / (4.0 * self.diff_width.powi(2)))
        .exp()
    }
}

/// Parameters of the simulated photon pair source and detector grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BiphotonModel {
    /// Width of the `xa + xb` mode.
    pub sigma_plus: f64,
    /// Width of the `xa - xb` mode.
    pub sigma_minus: f64,
    /// Full width of the position grid, centered on zero.
    pub grid_extent: f64,
    pub pixels_per_axis: usize,
    /// Full width of the momentum grid. Defaults to the position extent
    /// scaled by the ratio of marginal widths, so both grids span the same
    /// number of marginal standard deviations.
    pub momentum_extent: Option<f64>,
}

impl Default for BiphotonModel {
    fn default() -> Self {
        Self::with_ratio(1.0, 50.0, 40, 10.0).expect("valid default model")
    }
}

impl BiphotonModel {
    /// Model with `sigma_plus / sigma_minus = ratio` whose grid spans
    /// `marginal_span` position marginal standard deviations.
    pub fn with_ratio(
        sigma_plus: f64,
        ratio: f64,
        pixels_per_axis: usize,
        marginal_span: f64,
    ) -> Result<Self> {
        check_positive("ratio", ratio)?;
        check_positive("marginal_span", marginal_span)?;
        let sigma_minus = sigma_plus / ratio;
        let position = DoubleGaussian {
            sum_width: sigma_plus,
            diff_width: sigma_minus,
        };
        let m = Self {
            sigma_plus,
            sigma_minus,
            grid_extent: marginal_span * position.marginal_sigma(),
            pixels_per_axis,
            momentum_extent: None,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        check_positive("sigma_plus", self.sigma_plus)?;
        check_positive("sigma_minus", self.sigma_minus)?;
        if self.sigma_minus > self.sigma_plus {
            return Err(Error::domain(
                "sigma_minus",
                self.sigma_minus,
                "sigma_minus <= sigma_plus",
            ));
        }
        check_positive("grid_extent", self.grid_extent)?;
        if let Some(k) = self.momentum_extent {
            check_positive("momentum_extent", k)?;
        }
        if self.pixels_per_axis < 2 {
            return Err(Error::Shape(format!(
                "grid needs at least 2 pixels per axis, got {}",
                self.pixels_per_axis
            )));
        }
        Ok(())
    }

    pub fn position_modes(&self) -> DoubleGaussian {
        DoubleGaussian {
            sum_width: self.sigma_plus,
            diff_width: self.sigma_minus,
        }
    }

    /// Fourier-conjugate modes: a narrow position difference becomes a
    /// broad momentum difference and vice versa.
    pub fn momentum_modes(&self) -> DoubleGaussian {
        DoubleGaussian {
            sum_width: 1.0 / (2.0 * self.sigma_plus),
            diff_width: 1.0 / (2.0 * self.sigma_minus),
        }
    }

    pub fn momentum_grid_extent(&self) -> f64 {
        self.momentum_extent.unwrap_or_else(|| {
            self.grid_extent * self.momentum_modes().marginal_sigma()
                / self.position_modes().marginal_sigma()
        })
    }

    pub fn delta_x(&self) -> f64 {
        self.grid_extent / self.pixels_per_axis as f64
    }

    pub fn delta_k(&self) -> f64 {
        self.momentum_grid_extent() / self.pixels_per_axis as f64
    }
}

/// A pixel-integrated joint over the simulation grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulatedJoint {
    /// Normalized over the grid.
    pub joint: JointDistribution,
    /// Fraction of all coincidences that land on the grid.
    pub grid_mass: f64,
}

/// Pixel masses of a double Gaussian on a centered `n x n` grid.
///
/// Rows integrate `A` numerically (composite Gauss-Legendre) and `B`
/// exactly through the conditional normal CDF. Averaging with the
/// transpose averages in the rule that integrates `B` numerically, and
/// makes the result exactly exchange-symmetric.
fn pixel_masses(modes: &DoubleGaussian, extent: f64, n: usize) -> Vec<f64> {
    let width = extent / n as f64;
    let edge = |i: usize| -extent / 2.0 + i as f64 * width;
    let sigma_a = modes.marginal_sigma();
    let slope = modes.conditional_slope();
    let sigma_c = modes.conditional_sigma();
    let sub = width / SUBINTERVALS as f64;

    let mut q = vec![0.0; n * n];
    for i in 0..n {
        let row = &mut q[i * n..(i + 1) * n];
        for s in 0..SUBINTERVALS {
            let mid = edge(i) + (s as f64 + 0.5) * sub;
            for (node, weight) in GL_NODES.iter().zip(GL_WEIGHTS) {
                let a = mid + node * sub / 2.0;
                let w = weight * sub / 2.0 * crate::normal::pdf(a / sigma_a) / sigma_a;
                let centre = slope * a;
                for (j, cell) in row.iter_mut().enumerate() {
                    let lo = (edge(j) - centre) / sigma_c;
                    let hi = (edge(j + 1) - centre) / sigma_c;
                    *cell += w * interval_mass(lo, hi);
                }
            }
        }
    }
    let mut p = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            p[i * n + j] = 0.5 * (q[i * n + j] + q[j * n + i]);
        }
    }
    p
}

fn simulate(modes: &DoubleGaussian, extent: f64, n: usize) -> Result<SimulatedJoint> {
    let masses = pixel_masses(modes, extent, n);
    let grid_mass: f64 = masses.iter().sum();
    if grid_mass.is_nan() || grid_mass <= 0.0 {
        return Err(Error::Shape("grid captures no probability".into()));
    }
    let width = extent / n as f64;
    let joint = JointDistribution::from_weights(n, n, masses)?.with_bin_widths(width, width)?;
    Ok(SimulatedJoint {
        joint,
        grid_mass: grid_mass.min(1.0),
    })
}

/// Joint position distribution on the model grid.
pub fn joint_position_distribution(m: &BiphotonModel) -> Result<SimulatedJoint> {
    m.validate()?;
    simulate(&m.position_modes(), m.grid_extent, m.pixels_per_axis)
}

/// Joint momentum distribution on the model's momentum grid.
pub fn joint_momentum_distribution(m: &BiphotonModel) -> Result<SimulatedJoint> {
    m.validate()?;
    simulate(
        &m.momentum_modes(),
        m.momentum_grid_extent(),
        m.pixels_per_axis,
    )
}

/// Restricts both parties to the centered `window_pixels` pixels.
///
/// Returns the renormalized windowed joint and the true domain probability:
/// the fraction of all coincidences (not just those on the grid) that land
/// in the window on both sides.
pub fn truncate_to_window(
    full: &SimulatedJoint,
    window_pixels: usize,
) -> Result<(JointDistribution, f64)> {
    let n = full.joint.rows();
    if window_pixels < 2 || window_pixels > n || !(n - window_pixels).is_multiple_of(2) {
        return Err(Error::Window {
            window: window_pixels,
            grid: n,
        });
    }
    let offset = (n - window_pixels) / 2;
    let mut data = Vec::with_capacity(window_pixels * window_pixels);
    for i in offset..offset + window_pixels {
        data.extend_from_slice(&full.joint.row(i)[offset..offset + window_pixels]);
    }
    let in_window: f64 = data.iter().sum();
    let joint = JointDistribution::from_weights(window_pixels, window_pixels, data)?
        .with_bin_widths(full.joint.bin_width_a(), full.joint.bin_width_b())?;
    Ok((joint, in_window * full.grid_mass))
}

/// Uniform detection loss from dead space between pixels. The result keeps
/// its shape but carries total mass `fill_a * fill_b`.
pub fn apply_dead_space(
    j: &JointDistribution,
    fill_a: f64,
    fill_b: f64,
) -> Result<JointDistribution> {
    check_unit_open_closed("fill_a", fill_a)?;
    check_unit_open_closed("fill_b", fill_b)?;
    Ok(j.scaled(fill_a * fill_b))
}

/// Coincidence counts drawn from a joint distribution.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountMatrix {
    pub rows: usize,
    pub cols: usize,
    /// Row-major.
    pub counts: Vec<u64>,
    pub total: u64,
    pub seed: u64,
}

impl CountMatrix {
    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.counts[i * self.cols + j]
    }

    pub fn to_joint(&self) -> Result<JointDistribution> {
        JointDistribution::from_counts(self.rows, self.cols, &self.counts)
    }
}

/// Multinomial draw of `total` coincidences, reproducible from `seed`.
///
/// Cells are drawn as a chain of conditional binomials on a ChaCha8 stream
/// seeded with `seed`.
pub fn sample_counts(j: &JointDistribution, total: u64, seed: u64) -> Result<CountMatrix> {
    j.ensure_normalized()?;
    if total == 0 {
        return Err(Error::domain("total", 0.0, "total >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut remaining = total;
    let mut mass_left = 1.0;
    let last = j.data().iter().rposition(|&p| p > 0.0).unwrap_or(0);
    let mut counts = vec![0u64; j.data().len()];
    for (idx, &p) in j.data().iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if idx == last {
            counts[idx] = remaining;
            break;
        }
        if p <= 0.0 {
            continue;
        }
        let ratio = (p / mass_left).clamp(0.0, 1.0);
        let k = Binomial::new(remaining, ratio)
            .map_err(|_| Error::domain("binomial p", ratio, "0 <= p <= 1"))?
            .sample(&mut rng);
        counts[idx] = k;
        remaining -= k;
        mass_left -= p;
    }
    Ok(CountMatrix {
        rows: j.rows(),
        cols: j.cols(),
        counts,
        total,
        seed,
    })
}

/// Zeroes every entry below `fraction` of the largest entry, then
/// renormalizes. Recorded counts are scaled to the surviving mass.
pub fn threshold_renormalize(j: &JointDistribution, fraction: f64) -> Result<JointDistribution> {
    check_probability("fraction", fraction)?;
    let max = j.data().iter().copied().fold(0.0, f64::max);
    if max.is_nan() || max <= 0.0 {
        return Err(Error::EmptyAfterThreshold);
    }
    let floor = fraction * max;
    let kept: Vec<f64> = j
        .data()
        .iter()
        .map(|&p| if p < floor { 0.0 } else { p })
        .collect();
    let kept_mass: f64 = kept.iter().sum();
    let total = j.total();
    let out = JointDistribution::from_weights(j.rows(), j.cols(), kept)
        .map_err(|_| Error::EmptyAfterThreshold)?
        .with_bin_widths(j.bin_width_a(), j.bin_width_b())?;
    Ok(out.with_total_counts(
        j.total_counts()
            .map(|n| (n as f64 * kept_mass / total).round() as u64),
    ))
}
