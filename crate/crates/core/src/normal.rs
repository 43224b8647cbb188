//! Standard normal helpers with tail-accurate interval masses.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use libm::erfc;

/// Upper tail `P(Z > z)`.
#[inline]
pub fn sf(z: f64) -> f64 {
    0.5 * erfc(z * FRAC_1_SQRT_2)
}

#[inline]
pub fn cdf(z: f64) -> f64 {
    sf(-z)
}

#[inline]
pub fn pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}

/// `P(lo < Z < hi)`, computed from whichever tail avoids cancellation.
pub fn interval_mass(lo: f64, hi: f64) -> f64 {
    if hi <= lo {
        0.0
    } else if lo >= 0.0 {
        sf(lo) - sf(hi)
    } else if hi <= 0.0 {
        cdf(hi) - cdf(lo)
    } else {
        1.0 - cdf(lo) - sf(hi)
    }
}

/// `P(lo < X < hi)` for `X ~ N(mean, sigma^2)`.
pub fn gaussian_interval_mass(mean: f64, sigma: f64, lo: f64, hi: f64) -> f64 {
    interval_mass((lo - mean) / sigma, (hi - mean) / sigma)
}
