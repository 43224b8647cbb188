//! Fano-type upper bounds on conditional entropies and the steering
//! inequalities built from them.
//!
//! A steering certificate compares a left-hand side (an upper bound on
//! `H(X_B|X_A) + H(K_B|K_A)`) against the uncertainty floor
//! `dims * log2(pi e / (dx dk))`. When the left side falls below the floor the
//! data cannot come from a local hidden state model.

use std::f64::consts::{E, PI};

use serde::{Deserialize, Serialize};

use crate::entropy::{conditional_entropy, geometric_entropy_bound, h2, JointDistribution};
use crate::error::{check_positive, check_probability, check_unit_open_closed, Error, Result};

/// Measurement geometry of the two detector arrays.
///
/// `delta_x * delta_k` must be dimensionless (for example pixel pitch in
/// meters times transverse wavenumber pitch in inverse meters).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectorGeometry {
    pub delta_x: f64,
    pub delta_k: f64,
    /// Pixels in each viewing window, shared by position and momentum.
    pub n_bar: usize,
    pub fill_x: f64,
    pub fill_k: f64,
    /// Coincidence detection efficiency.
    pub efficiency: f64,
    pub dims: u32,
}

impl DetectorGeometry {
    pub fn new(delta_x: f64, delta_k: f64, n_bar: usize) -> Result<Self> {
        let g = Self {
            delta_x,
            delta_k,
            n_bar,
            fill_x: 1.0,
            fill_k: 1.0,
            efficiency: 1.0,
            dims: 1,
        };
        g.validate()?;
        Ok(g)
    }

    /// Geometry whose one-dimensional right-hand side equals `rhs_bits`.
    ///
    /// The bin-width product is `pi e / 2^rhs_bits`; it is carried entirely by
    /// `delta_k` with `delta_x = 1`.
    pub fn from_rhs_bits(rhs_bits: f64, n_bar: usize) -> Result<Self> {
        if !rhs_bits.is_finite() {
            return Err(Error::domain("rhs_bits", rhs_bits, "finite"));
        }
        Self::new(1.0, PI * E / rhs_bits.exp2(), n_bar)
    }

    pub fn with_fill_factors(mut self, fill_x: f64, fill_k: f64) -> Result<Self> {
        self.fill_x = fill_x;
        self.fill_k = fill_k;
        self.validate()?;
        Ok(self)
    }

    pub fn with_efficiency(mut self, efficiency: f64) -> Result<Self> {
        self.efficiency = efficiency;
        self.validate()?;
        Ok(self)
    }

    pub fn with_dims(mut self, dims: u32) -> Result<Self> {
        self.dims = dims;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        check_positive("delta_x", self.delta_x)?;
        check_positive("delta_k", self.delta_k)?;
        if self.n_bar < 2 {
            return Err(Error::domain("n_bar", self.n_bar as f64, "n_bar >= 2"));
        }
        check_unit_open_closed("fill_x", self.fill_x)?;
        check_unit_open_closed("fill_k", self.fill_k)?;
        check_unit_open_closed("efficiency", self.efficiency)?;
        if self.dims == 0 {
            return Err(Error::domain("dims", 0.0, "dims >= 1"));
        }
        Ok(())
    }
}

/// Position and momentum windows must have the same pixel count.
pub fn shared_window(n_x: usize, n_k: usize) -> Result<usize> {
    if n_x == n_k {
        Ok(n_x)
    } else {
        Err(Error::AsymmetricWindows { x: n_x, k: n_k })
    }
}

/// Agreement and domain probabilities for position (`x`) and momentum (`k`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationStats {
    /// `P(X_A = X_B | both in window)`.
    pub eta_x_bar: f64,
    pub eta_k_bar: f64,
    /// Probability that a coincidence lands inside both windows.
    pub mu_x: f64,
    pub mu_k: f64,
    /// Coincidences inside the window, for counting error bars.
    pub n_coinc_x: Option<u64>,
    pub n_coinc_k: Option<u64>,
}

impl CorrelationStats {
    pub fn new(eta_x_bar: f64, eta_k_bar: f64, mu_x: f64, mu_k: f64) -> Result<Self> {
        let s = Self {
            eta_x_bar,
            eta_k_bar,
            mu_x,
            mu_k,
            n_coinc_x: None,
            n_coinc_k: None,
        };
        s.validate()?;
        Ok(s)
    }

    /// Stats with both domain probabilities equal to one.
    pub fn full_domain(eta_x_bar: f64, eta_k_bar: f64) -> Result<Self> {
        Self::new(eta_x_bar, eta_k_bar, 1.0, 1.0)
    }

    pub fn with_counts(mut self, n_x: u64, n_k: u64) -> Result<Self> {
        if n_x == 0 || n_k == 0 {
            return Err(Error::domain("coincidence count", 0.0, "positive"));
        }
        self.n_coinc_x = Some(n_x);
        self.n_coinc_k = Some(n_k);
        Ok(self)
    }

    pub fn with_domains(mut self, mu_x: f64, mu_k: f64) -> Result<Self> {
        self.mu_x = mu_x;
        self.mu_k = mu_k;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        check_probability("eta_x_bar", self.eta_x_bar)?;
        check_probability("eta_k_bar", self.eta_k_bar)?;
        check_probability("mu_x", self.mu_x)?;
        check_probability("mu_k", self.mu_k)
    }

    /// `eta_x_bar * mu_x`, a lower bound on the unwindowed agreement.
    pub fn joint_agreement_x(&self) -> f64 {
        self.eta_x_bar * self.mu_x
    }

    pub fn joint_agreement_k(&self) -> f64 {
        self.eta_k_bar * self.mu_k
    }
}

/// Value of a Fano-type bound plus whether its validity condition holds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FanoBound {
    pub bits: f64,
    pub applicable: bool,
}

/// Right-hand side of the discretized steering inequality.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SteeringRhs {
    pub bits: f64,
    /// Set when the bins are so coarse that the floor is `<= 0`; no data can
    /// then violate the inequality.
    pub nonpositive: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Certified,
    NotCertified,
    /// A Fano bound was evaluated outside `eta_bar * mu >= 1/2`.
    Inapplicable,
}

impl Verdict {
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Certified => 0,
            Verdict::NotCertified => 1,
            Verdict::Inapplicable => 2,
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Certified => "certified",
            Verdict::NotCertified => "not certified",
            Verdict::Inapplicable => "inapplicable",
        })
    }
}

/// Both sides of a steering inequality.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs - lhs`; positive means the inequality is violated.
    pub violation: f64,
    /// Standard deviation of `lhs` from counting statistics.
    pub sigma: Option<f64>,
    pub applicable: bool,
}

impl BoundReport {
    pub fn new(lhs: f64, rhs: f64, applicable: bool) -> Self {
        Self {
            lhs,
            rhs,
            violation: rhs - lhs,
            sigma: None,
            applicable,
        }
    }

    pub fn verdict(&self) -> Verdict {
        if !self.applicable {
            Verdict::Inapplicable
        } else if self.violation > 0.0 {
            Verdict::Certified
        } else {
            Verdict::NotCertified
        }
    }

    pub fn is_certified(&self) -> bool {
        self.verdict() == Verdict::Certified
    }

    /// Violation in units of `sigma`, when error bars are available.
    pub fn significance(&self) -> Option<f64> {
        self.sigma.filter(|s| *s > 0.0).map(|s| self.violation / s)
    }
}

fn check_outcomes(n: usize) -> Result<()> {
    if n < 2 {
        Err(Error::domain("n", n as f64, "n >= 2"))
    } else {
        Ok(())
    }
}

/// Fano's inequality: `H(B|A) <= h2(eta) + (1 - eta) log2(n - 1)` for
/// `n`-outcome variables agreeing with probability `eta`.
pub fn fano_bound(eta: f64, n: usize) -> Result<f64> {
    check_probability("eta", eta)?;
    check_outcomes(n)?;
    Ok(fano_unchecked(eta, n))
}

#[inline]
fn fano_unchecked(eta: f64, n: usize) -> f64 {
    h2(eta) + (1.0 - eta) * ((n - 1) as f64).log2()
}

/// Fano bound for a discretized continuous variable observed through an
/// `n_bar`-pixel window that captures a fraction `mu` of the coincidences.
///
/// Equals `fano_bound(eta_bar * mu, n_bar) + h2(mu) / mu`. The bound is only
/// valid while `eta_bar * mu >= 1/2`; outside that region it is still
/// returned, flagged inapplicable.
pub fn modified_fano_bound(eta_bar: f64, mu: f64, n_bar: usize) -> Result<FanoBound> {
    check_probability("eta_bar", eta_bar)?;
    check_unit_open_closed("mu", mu)?;
    check_outcomes(n_bar)?;
    let eta = eta_bar * mu;
    Ok(FanoBound {
        bits: fano_unchecked(eta, n_bar) + geometric_entropy_bound(mu)?,
        applicable: eta >= 0.5,
    })
}

/// `dims * log2(pi e / (delta_x delta_k))`.
pub fn steering_rhs(g: &DetectorGeometry) -> SteeringRhs {
    let bits = f64::from(g.dims) * (PI * E / (g.delta_x * g.delta_k)).log2();
    SteeringRhs {
        bits,
        nonpositive: bits <= 0.0,
    }
}

/// Left-hand side of the Fano steering bound:
///
/// ```text
/// h2(ex mx) + h2(ek mk) + h2(mx)/mx + h2(mk)/mk + (2 - ex mx - ek mk) log2(n_bar - 1)
/// ```
pub fn fano_steering_lhs(s: &CorrelationStats, n_bar: usize) -> Result<FanoBound> {
    s.validate()?;
    check_unit_open_closed("mu_x", s.mu_x)?;
    check_unit_open_closed("mu_k", s.mu_k)?;
    check_outcomes(n_bar)?;
    let px = s.joint_agreement_x();
    let pk = s.joint_agreement_k();
    let bits = h2(px)
        + h2(pk)
        + h2(s.mu_x) / s.mu_x
        + h2(s.mu_k) / s.mu_k
        + (2.0 - px - pk) * ((n_bar - 1) as f64).log2();
    Ok(FanoBound {
        bits,
        applicable: px >= 0.5 && pk >= 0.5,
    })
}

/// Compares the Fano steering bound against the uncertainty floor.
///
/// `s.mu_x` and `s.mu_k` are used as given: fold fill factors and efficiency
/// in beforehand with [`crate::stats::effective_domain`]. When both
/// coincidence counts are present the report carries the propagated
/// standard deviation of the left side.
pub fn steering_certificate(s: &CorrelationStats, g: &DetectorGeometry) -> Result<BoundReport> {
    g.validate()?;
    let lhs = fano_steering_lhs(s, g.n_bar)?;
    let rhs = steering_rhs(g);
    let mut report = BoundReport::new(lhs.bits, rhs.bits, lhs.applicable);
    if s.n_coinc_x.is_some() && s.n_coinc_k.is_some() {
        report.sigma = Some(crate::stats::lhs_std(s, g.n_bar)?);
    }
    Ok(report)
}

/// The steering inequality evaluated on complete joint distributions, with
/// exact conditional entropies instead of Fano bounds.
pub fn discrete_steering_check(
    jx: &JointDistribution,
    jk: &JointDistribution,
    g: &DetectorGeometry,
) -> Result<BoundReport> {
    g.validate()?;
    let lhs = conditional_entropy(jx)? + conditional_entropy(jk)?;
    Ok(BoundReport::new(lhs, steering_rhs(g).bits, true))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KeyRate {
    /// Lower bound on the one-way secret key rate, bits per measurement pair.
    pub bits: f64,
    pub applicable: bool,
}

impl KeyRate {
    pub fn is_certified(&self) -> bool {
        self.applicable && self.bits >= 0.0
    }

    pub fn verdict(&self) -> Verdict {
        if !self.applicable {
            Verdict::Inapplicable
        } else if self.bits >= 0.0 {
            Verdict::Certified
        } else {
            Verdict::NotCertified
        }
    }
}

/// One-way secret key rate lower bound: the steering floor minus the
/// modified Fano bounds on both conditional entropies.
pub fn secret_key_rate(s: &CorrelationStats, g: &DetectorGeometry) -> Result<KeyRate> {
    g.validate()?;
    s.validate()?;
    let bx = modified_fano_bound(s.eta_x_bar, s.mu_x, g.n_bar)?;
    let bk = modified_fano_bound(s.eta_k_bar, s.mu_k, g.n_bar)?;
    Ok(KeyRate {
        bits: steering_rhs(g).bits - bx.bits - bk.bits,
        applicable: bx.applicable && bk.applicable,
    })
}
