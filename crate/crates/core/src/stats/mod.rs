//! Agreement and domain probabilities, counting error bars, hedging and
//! violation maps.

mod assignment;
mod contour;
mod fit;

use serde::{Deserialize, Serialize};

pub use assignment::max_weight_assignment;
pub use contour::{contour_grid, ContourGrid};
pub use fit::{domain_probability_from_fit, fit_gaussian, GaussianFit};

use crate::bounds::{fano_steering_lhs, CorrelationStats, DetectorGeometry};
use crate::entropy::JointDistribution;
use crate::error::{check_unit_open_closed, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrderingKind {
    Identity,
    /// `B` outcome `i` is paired with `A` outcome `n - 1 - i`; the natural
    /// pairing for anti-correlated momenta on a centered grid.
    Reversed,
    Permutation,
}

/// A relabeling of `B` outcomes onto `A` outcomes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ordering {
    pub kind: OrderingKind,
    /// `permutation[b] = a`; only stored for general permutations.
    pub permutation: Option<Vec<usize>>,
}

impl Ordering {
    pub fn identity() -> Self {
        Self {
            kind: OrderingKind::Identity,
            permutation: None,
        }
    }

    pub fn reversed() -> Self {
        Self {
            kind: OrderingKind::Reversed,
            permutation: None,
        }
    }

    pub fn from_permutation(permutation: Vec<usize>) -> Result<Self> {
        let n = permutation.len();
        let mut seen = vec![false; n];
        for &a in &permutation {
            if a >= n || std::mem::replace(&mut seen[a], true) {
                return Err(Error::Shape("ordering is not a bijection".into()));
            }
        }
        if permutation.iter().enumerate().all(|(b, &a)| a == b) {
            Ok(Self::identity())
        } else if permutation.iter().enumerate().all(|(b, &a)| a == n - 1 - b) {
            Ok(Self::reversed())
        } else {
            Ok(Self {
                kind: OrderingKind::Permutation,
                permutation: Some(permutation),
            })
        }
    }

    /// The `A` outcome paired with `B` outcome `b` among `n`.
    pub fn partner(&self, b: usize, n: usize) -> usize {
        match self.kind {
            OrderingKind::Identity => b,
            OrderingKind::Reversed => n - 1 - b,
            OrderingKind::Permutation => self.permutation.as_ref().expect("permutation")[b],
        }
    }
}

fn require_square(j: &JointDistribution) -> Result<usize> {
    if j.is_square() {
        Ok(j.rows())
    } else {
        Err(Error::Shape(format!(
            "agreement needs a square matrix, got {}x{}",
            j.rows(),
            j.cols()
        )))
    }
}

/// Probability mass paired by `ordering`: `sum_b P(A = partner(b), B = b)`.
pub fn agreement_with(j: &JointDistribution, ordering: &Ordering) -> Result<f64> {
    let n = require_square(j)?;
    if let Some(p) = &ordering.permutation {
        if p.len() != n {
            return Err(Error::Shape(format!(
                "ordering over {} outcomes applied to {n}",
                p.len()
            )));
        }
    }
    let sum: f64 = (0..n).map(|b| j.get(ordering.partner(b, n), b)).sum();
    Ok(sum.min(1.0))
}

/// Trace of the joint matrix.
pub fn agreement_identity(j: &JointDistribution) -> Result<f64> {
    agreement_with(j, &Ordering::identity())
}

/// Anti-diagonal sum.
pub fn agreement_reversed(j: &JointDistribution) -> Result<f64> {
    agreement_with(j, &Ordering::reversed())
}

/// Largest agreement over all relabelings, found by linear assignment.
///
/// Identity and reversal are reported as such whenever they attain the
/// optimum.
pub fn agreement_best_ordering(j: &JointDistribution) -> Result<(f64, Ordering)> {
    let n = require_square(j)?;
    // rows of the assignment problem are B outcomes, columns A outcomes
    let weights = j.transposed();
    let assignment = max_weight_assignment(n, weights.data());
    let best = assignment
        .iter()
        .enumerate()
        .map(|(b, &a)| j.get(a, b))
        .sum::<f64>()
        .min(1.0);
    let identity = agreement_identity(j)?;
    if identity >= best {
        return Ok((identity, Ordering::identity()));
    }
    let reversed = agreement_reversed(j)?;
    if reversed >= best {
        return Ok((reversed, Ordering::reversed()));
    }
    Ok((best, Ordering::from_permutation(assignment)?))
}

/// Domain probability after dead space and detection losses:
/// `mu * fill * efficiency`.
pub fn effective_domain(mu: f64, fill: f64, efficiency: f64) -> Result<f64> {
    check_unit_open_closed("mu", mu)?;
    check_unit_open_closed("fill", fill)?;
    check_unit_open_closed("efficiency", efficiency)?;
    Ok(mu * fill * efficiency)
}

/// Keeps `h2'` finite where `eta_bar * mu` touches 0 or 1.
const DERIVATIVE_CLAMP: f64 = 1e-12;

/// `d LHS / d eta_bar` for one axis.
fn lhs_slope(eta_bar: f64, mu: f64, n_bar: usize) -> f64 {
    let p = (eta_bar * mu).clamp(DERIVATIVE_CLAMP, 1.0 - DERIVATIVE_CLAMP);
    mu * (((1.0 - p) / p).log2() - ((n_bar - 1) as f64).log2())
}

/// Standard deviation of the Fano steering left-hand side from counting
/// noise.
///
/// Each measured agreement is treated as a binomial proportion over its
/// coincidence count, with variance `eta (1 - eta) / n`, and propagated
/// through the analytic slope of the left side. Domain probabilities are
/// held fixed.
pub fn lhs_std(s: &CorrelationStats, n_bar: usize) -> Result<f64> {
    s.validate()?;
    let (Some(nx), Some(nk)) = (s.n_coinc_x, s.n_coinc_k) else {
        return Err(Error::domain(
            "coincidence counts",
            f64::NAN,
            "both counts required for error bars",
        ));
    };
    if n_bar < 2 {
        return Err(Error::domain("n_bar", n_bar as f64, "n_bar >= 2"));
    }
    let var_x = s.eta_x_bar * (1.0 - s.eta_x_bar) / nx as f64;
    let var_k = s.eta_k_bar * (1.0 - s.eta_k_bar) / nk as f64;
    let dx = lhs_slope(s.eta_x_bar, s.mu_x, n_bar);
    let dk = lhs_slope(s.eta_k_bar, s.mu_k, n_bar);
    Ok((dx * dx * var_x + dk * dk * var_k).sqrt())
}

/// Which domain probabilities the hedge scan lowers.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HedgeMode {
    /// One `mu` shared by both axes.
    Common,
    /// Scan `mu_x` with `mu_k` held at the given value.
    Position { mu_k: f64 },
    /// Scan `mu_k` with `mu_x` held at the given value.
    Momentum { mu_x: f64 },
}

/// Scan step for [`hedge_min_domain`].
pub const HEDGE_RESOLUTION: f64 = 1e-4;

fn certifies(eta_x: f64, eta_k: f64, mu_x: f64, mu_k: f64, n_bar: usize, rhs: f64) -> bool {
    let s = CorrelationStats {
        eta_x_bar: eta_x,
        eta_k_bar: eta_k,
        mu_x,
        mu_k,
        n_coinc_x: None,
        n_coinc_k: None,
    };
    fano_steering_lhs(&s, n_bar).is_ok_and(|lhs| lhs.applicable && rhs - lhs.bits > 0.0)
}

/// Smallest domain probability that still certifies steering.
///
/// Scans downward from `mu = 1` in steps of [`HEDGE_RESOLUTION`] and returns
/// the last certifying value before the first failure.
pub fn hedge_min_domain(
    eta_x_bar: f64,
    eta_k_bar: f64,
    n_bar: usize,
    rhs: f64,
    mode: HedgeMode,
) -> Result<f64> {
    CorrelationStats::full_domain(eta_x_bar, eta_k_bar)?;
    let at = |mu: f64| match mode {
        HedgeMode::Common => (mu, mu),
        HedgeMode::Position { mu_k } => (mu, mu_k),
        HedgeMode::Momentum { mu_x } => (mu_x, mu),
    };
    if let HedgeMode::Position { mu_k: fixed } | HedgeMode::Momentum { mu_x: fixed } = mode {
        check_unit_open_closed("fixed mu", fixed)?;
    }
    let (mx, mk) = at(1.0);
    if !certifies(eta_x_bar, eta_k_bar, mx, mk, n_bar, rhs) {
        return Err(Error::NoHedge(format!(
            "no certified violation at full domain (rhs = {rhs} bits)"
        )));
    }
    let steps = (1.0 / HEDGE_RESOLUTION).round() as u32;
    let mut last = 1.0;
    for step in 1..steps {
        let mu = f64::from(steps - step) / f64::from(steps);
        let (mx, mk) = at(mu);
        if !certifies(eta_x_bar, eta_k_bar, mx, mk, n_bar, rhs) {
            break;
        }
        last = mu;
    }
    Ok(last)
}

/// Folds the geometry's fill factors and efficiency into both domain
/// probabilities.
pub fn fold_losses(s: &CorrelationStats, g: &DetectorGeometry) -> Result<CorrelationStats> {
    let mut out = *s;
    out.mu_x = effective_domain(s.mu_x, g.fill_x, g.efficiency)?;
    out.mu_k = effective_domain(s.mu_k, g.fill_k, g.efficiency)?;
    Ok(out)
}
