use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{fano_steering_lhs, steering_rhs, CorrelationStats, DetectorGeometry};
use crate::error::{check_unit_open_closed, Error, Result};

use super::lhs_std;

/// Violation of the Fano steering bound sampled over measured agreements.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContourGrid {
    pub eta_x_values: Vec<f64>,
    pub eta_k_values: Vec<f64>,
    /// `violation[i][j]` at `(eta_x_values[i], eta_k_values[j])`.
    pub violation: Vec<Vec<f64>>,
    pub sigma: Option<Vec<Vec<f64>>>,
    pub mu_x: f64,
    pub mu_k: f64,
    pub rhs: f64,
}

fn applicable_axis(mu: f64, resolution: usize) -> Result<Vec<f64>> {
    let lo = 0.5f64.max(0.5 / mu);
    if lo > 1.0 {
        return Err(Error::domain(
            "mu",
            mu,
            "mu >= 1/2 for a nonempty applicable region",
        ));
    }
    let last = (resolution - 1) as f64;
    Ok((0..resolution)
        .map(|i| {
            if i + 1 == resolution {
                1.0
            } else {
                lo + (1.0 - lo) * i as f64 / last
            }
        })
        .collect())
}

/// Evaluates `rhs - lhs` on a `resolution x resolution` grid spanning the
/// applicable region `eta_bar * mu >= 1/2` of both axes.
///
/// With `counts = Some((n_x, n_k))` the grid also carries the counting
/// standard deviation of the left side at every cell.
pub fn contour_grid(
    g: &DetectorGeometry,
    mu_x: f64,
    mu_k: f64,
    resolution: usize,
    counts: Option<(u64, u64)>,
) -> Result<ContourGrid> {
    g.validate()?;
    check_unit_open_closed("mu_x", mu_x)?;
    check_unit_open_closed("mu_k", mu_k)?;
    if resolution < 2 {
        return Err(Error::domain(
            "resolution",
            resolution as f64,
            "resolution >= 2",
        ));
    }
    let eta_x_values = applicable_axis(mu_x, resolution)?;
    let eta_k_values = applicable_axis(mu_k, resolution)?;
    let rhs = steering_rhs(g).bits;

    let cells: Vec<Vec<(f64, Option<f64>)>> = eta_x_values
        .par_iter()
        .map(|&ex| {
            eta_k_values
                .iter()
                .map(|&ek| {
                    let mut s = CorrelationStats::new(ex, ek, mu_x, mu_k)?;
                    let violation = rhs - fano_steering_lhs(&s, g.n_bar)?.bits;
                    let sigma = match counts {
                        Some((nx, nk)) => {
                            s = s.with_counts(nx, nk)?;
                            Some(lhs_std(&s, g.n_bar)?)
                        }
                        None => None,
                    };
                    Ok((violation, sigma))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let violation = cells
        .iter()
        .map(|row| row.iter().map(|c| c.0).collect())
        .collect();
    let sigma = counts.map(|_| {
        cells
            .iter()
            .map(|row| row.iter().map(|c| c.1.unwrap_or(0.0)).collect())
            .collect()
    });
    Ok(ContourGrid {
        eta_x_values,
        eta_k_values,
        violation,
        sigma,
        mu_x,
        mu_k,
        rhs,
    })
}

fn bracket(values: &[f64], v: f64) -> Option<(usize, f64)> {
    if v < values[0] || v > *values.last()? {
        return None;
    }
    let i = values
        .partition_point(|&x| x <= v)
        .clamp(1, values.len() - 1)
        - 1;
    Some((i, (v - values[i]) / (values[i + 1] - values[i])))
}

impl ContourGrid {
    pub fn shape(&self) -> (usize, usize) {
        (self.eta_x_values.len(), self.eta_k_values.len())
    }

    /// Bilinear interpolation of `field` inside the grid.
    fn interpolate(&self, field: &[Vec<f64>], eta_x: f64, eta_k: f64) -> Option<f64> {
        let (i, tx) = bracket(&self.eta_x_values, eta_x)?;
        let (j, tk) = bracket(&self.eta_k_values, eta_k)?;
        let f = |a: usize, b: usize| field[a][b];
        Some(
            (1.0 - tx) * (1.0 - tk) * f(i, j)
                + tx * (1.0 - tk) * f(i + 1, j)
                + (1.0 - tx) * tk * f(i, j + 1)
                + tx * tk * f(i + 1, j + 1),
        )
    }

    pub fn violation_at(&self, eta_x: f64, eta_k: f64) -> Option<f64> {
        self.interpolate(&self.violation, eta_x, eta_k)
    }

    pub fn sigma_at(&self, eta_x: f64, eta_k: f64) -> Option<f64> {
        self.interpolate(self.sigma.as_ref()?, eta_x, eta_k)
    }

    /// Crossings of `violation = level + k sigma` along each row of constant
    /// `eta_x`, located by linear interpolation in `eta_k`.
    ///
    /// Returns `(eta_x, eta_k)` pairs. `k` is ignored when the grid has no
    /// error bars.
    pub fn level_crossings(&self, level: f64, k: f64) -> Vec<(f64, f64)> {
        let shifted = |i: usize, j: usize| {
            let s = self.sigma.as_ref().map_or(0.0, |s| s[i][j]);
            self.violation[i][j] - level - k * s
        };
        let mut out = Vec::new();
        for (i, &ex) in self.eta_x_values.iter().enumerate() {
            for j in 0..self.eta_k_values.len() - 1 {
                let (a, b) = (shifted(i, j), shifted(i, j + 1));
                if a == 0.0 {
                    out.push((ex, self.eta_k_values[j]));
                } else if a * b < 0.0 {
                    let t = a / (a - b);
                    let (k0, k1) = (self.eta_k_values[j], self.eta_k_values[j + 1]);
                    out.push((ex, k0 + t * (k1 - k0)));
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::h2;
    use approx::assert_abs_diff_eq;

    fn reference_geometry() -> DetectorGeometry {
        DetectorGeometry::from_rhs_bits(8.284, 256).unwrap()
    }

    #[test]
    fn shape_and_corner() {
        let g = reference_geometry();
        let grid = contour_grid(&g, 0.91724, 0.952, 7, None).unwrap();
        assert_eq!(grid.shape(), (7, 7));
        assert_eq!(grid.violation.len(), 7);
        assert!(grid.violation.iter().all(|r| r.len() == 7));
        assert_eq!(*grid.eta_x_values.last().unwrap(), 1.0);
        assert!(grid.eta_x_values.windows(2).all(|w| w[0] < w[1]));
        let corner = grid.violation[6][6];
        let expected = grid.rhs
            - h2(0.91724) / 0.91724
            - h2(0.952) / 0.952
            - h2(0.91724)
            - h2(0.952)
            - (2.0 - 0.91724 - 0.952) * 255f64.log2();
        assert_abs_diff_eq!(corner, expected, epsilon = 1e-12);
    }

    #[test]
    fn full_domain_corner_is_rhs() {
        let g = reference_geometry();
        let grid = contour_grid(&g, 1.0, 1.0, 3, None).unwrap();
        assert_abs_diff_eq!(grid.violation[2][2], grid.rhs, epsilon = 1e-15);
        assert_eq!(grid.eta_x_values[0], 0.5);
    }

    #[test]
    fn measured_point_sits_on_the_violating_side() {
        let g = reference_geometry();
        for (mx, mk) in [(1.0, 1.0), (0.997, 0.952), (0.997 * 0.92, 0.952)] {
            let grid = contour_grid(&g, mx, mk, 101, None).unwrap();
            assert!(grid.violation_at(0.694, 0.751).unwrap() > 0.0);
        }
    }

    #[test]
    fn rejects_empty_region() {
        let g = reference_geometry();
        assert!(contour_grid(&g, 0.4, 1.0, 10, None).is_err());
        assert!(contour_grid(&g, 1.0, 1.0, 1, None).is_err());
    }

    #[test]
    fn sigma_field_present_with_counts() {
        let g = reference_geometry();
        let grid = contour_grid(&g, 1.0, 1.0, 5, Some((10_000, 10_000))).unwrap();
        let sigma = grid.sigma.as_ref().unwrap();
        assert!(sigma[1][1] > 0.0);
        assert_eq!(sigma[4][4], 0.0);
        let plus = grid.level_crossings(0.0, 5.0);
        let minus = grid.level_crossings(0.0, -5.0);
        assert!(!plus.is_empty() && !minus.is_empty());
    }

    #[test]
    fn evaluation_order_does_not_matter() {
        let g = reference_geometry();
        let a = contour_grid(&g, 0.95, 0.97, 33, Some((5000, 7000))).unwrap();
        let b = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| contour_grid(&g, 0.95, 0.97, 33, Some((5000, 7000))).unwrap());
        assert_eq!(a, b);
    }
}
