//! Entropy kernels over discrete distributions, all in bits.
//!
//! Distributions carry raw nonnegative weights. Every entropy routine checks
//! that the weights sum to one within [`NORMALIZATION_TOLERANCE`]; values
//! inside the tolerance are renormalized exactly on construction, anything
//! further off is rejected.

use std::f64::consts::{E, PI};

use serde::{Deserialize, Serialize};

use crate::error::{check_positive, check_probability, Error, Result};

pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

/// `-p log2 p` with the `0 log 0 = 0` convention made explicit.
#[inline]
pub(crate) fn plogp(p: f64) -> f64 {
    if p <= 0.0 {
        0.0
    } else {
        -p * p.log2()
    }
}

/// Binary entropy without range checks; callers guarantee `0 <= p <= 1`.
#[inline]
pub(crate) fn h2(p: f64) -> f64 {
    plogp(p) + plogp(1.0 - p)
}

fn validate_weights(weights: &[f64]) -> Result<f64> {
    let mut sum = 0.0;
    for (index, &value) in weights.iter().enumerate() {
        if value < 0.0 || !value.is_finite() {
            return Err(Error::NegativeEntry { index, value });
        }
        sum += value;
    }
    Ok(sum)
}

/// Divides by `sum` unless the weights are already normalized to rounding
/// error, which keeps normalization idempotent.
fn normalize_in_place(weights: &mut [f64], sum: f64) {
    if (sum - 1.0).abs() > weights.len() as f64 * f64::EPSILON {
        weights.iter_mut().for_each(|w| *w /= sum);
    }
}

fn check_sum(sum: f64) -> Result<()> {
    if (sum - 1.0).abs() <= NORMALIZATION_TOLERANCE {
        Ok(())
    } else {
        Err(Error::Unnormalized { sum })
    }
}

/// A discrete distribution over `len()` ordered bins.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityVector {
    weights: Vec<f64>,
    bin_width: Option<f64>,
    from_counts: bool,
}

impl ProbabilityVector {
    /// Probabilities summing to one within tolerance.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        let sum = validate_weights(&weights)?;
        check_sum(sum)?;
        let mut weights = weights;
        normalize_in_place(&mut weights, sum);
        Ok(Self {
            weights,
            bin_width: None,
            from_counts: false,
        })
    }

    /// Raw histogram counts, normalized on ingest.
    pub fn from_counts(counts: &[f64]) -> Result<Self> {
        let sum = validate_weights(counts)?;
        if sum <= 0.0 {
            return Err(Error::Unnormalized { sum });
        }
        Ok(Self {
            weights: counts.iter().map(|c| c / sum).collect(),
            bin_width: None,
            from_counts: true,
        })
    }

    pub fn with_bin_width(mut self, width: f64) -> Result<Self> {
        check_positive("bin_width", width)?;
        self.bin_width = Some(width);
        Ok(self)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn bin_width(&self) -> Option<f64> {
        self.bin_width
    }

    /// True when the vector was built from raw counts.
    pub fn is_from_counts(&self) -> bool {
        self.from_counts
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Joint outcome probabilities `P(A = i, B = j)`, rows indexed by the
/// conditioning party `A`, columns by `B`. Stored row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointDistribution {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
    bin_width_a: f64,
    bin_width_b: f64,
    total_counts: Option<u64>,
}

impl JointDistribution {
    /// Builds a normalized joint from row-major probabilities.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        let mut joint = Self::unchecked_shape(rows, cols, data)?;
        let sum = validate_weights(&joint.data)?;
        check_sum(sum)?;
        normalize_in_place(&mut joint.data, sum);
        Ok(joint)
    }

    /// Builds a joint from nonnegative weights of any positive total,
    /// normalizing them.
    pub fn from_weights(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        let mut joint = Self::unchecked_shape(rows, cols, data)?;
        let sum = validate_weights(&joint.data)?;
        if sum <= 0.0 {
            return Err(Error::Unnormalized { sum });
        }
        joint.data.iter_mut().for_each(|p| *p /= sum);
        Ok(joint)
    }

    /// Builds a normalized joint from coincidence counts, keeping the total.
    pub fn from_counts(rows: usize, cols: usize, counts: &[u64]) -> Result<Self> {
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(Error::Unnormalized { sum: 0.0 });
        }
        let data = counts.iter().map(|&c| c as f64 / total as f64).collect();
        let mut joint = Self::unchecked_shape(rows, cols, data)?;
        joint.total_counts = Some(total);
        Ok(joint)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Shape("ragged rows".into()));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    fn unchecked_shape(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Shape(format!("{rows}x{cols} has no outcomes")));
        }
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self {
            rows,
            cols,
            data,
            bin_width_a: 1.0,
            bin_width_b: 1.0,
            total_counts: None,
        })
    }

    pub fn with_bin_widths(mut self, a: f64, b: f64) -> Result<Self> {
        check_positive("bin_width_a", a)?;
        check_positive("bin_width_b", b)?;
        self.bin_width_a = a;
        self.bin_width_b = b;
        Ok(self)
    }

    pub fn with_total_counts(mut self, total: Option<u64>) -> Self {
        self.total_counts = total;
        self
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn bin_width_a(&self) -> f64 {
        self.bin_width_a
    }

    pub fn bin_width_b(&self) -> f64 {
        self.bin_width_b
    }

    pub fn total_counts(&self) -> Option<u64> {
        self.total_counts
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn total(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.total() - 1.0).abs() <= NORMALIZATION_TOLERANCE
    }

    pub(crate) fn ensure_normalized(&self) -> Result<()> {
        check_sum(self.total())
    }

    /// Row sums, i.e. the distribution of `A`.
    pub fn marginal_a(&self) -> Vec<f64> {
        (0..self.rows).map(|i| self.row(i).iter().sum()).collect()
    }

    /// Column sums, i.e. the distribution of `B`.
    pub fn marginal_b(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for i in 0..self.rows {
            for (o, p) in out.iter_mut().zip(self.row(i)) {
                *o += p;
            }
        }
        out
    }

    /// Multiplies every entry by `factor`. The result is generally not
    /// normalized; this models uniform detection loss.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|p| *p *= factor);
        out
    }

    /// Rescales the entries to unit total.
    pub fn renormalized(&self) -> Result<Self> {
        let sum = self.total();
        if sum <= 0.0 {
            return Err(Error::Unnormalized { sum });
        }
        let mut out = self.clone();
        out.data.iter_mut().for_each(|p| *p /= sum);
        Ok(out)
    }

    pub fn transposed(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                data.push(self.get(i, j));
            }
        }
        Self {
            rows: self.cols,
            cols: self.rows,
            data,
            bin_width_a: self.bin_width_b,
            bin_width_b: self.bin_width_a,
            total_counts: self.total_counts,
        }
    }

    /// Outer product of two marginals.
    pub fn product(a: &[f64], b: &[f64]) -> Result<Self> {
        let data = a
            .iter()
            .flat_map(|pa| b.iter().map(move |pb| pa * pb))
            .collect();
        Self::new(a.len(), b.len(), data)
    }
}

/// `h2(p) = -p log2 p - (1-p) log2 (1-p)`.
pub fn binary_entropy(p: f64) -> Result<f64> {
    check_probability("p", p)?;
    Ok(h2(p))
}

pub fn shannon_entropy(d: &ProbabilityVector) -> Result<f64> {
    check_sum(d.total())?;
    Ok(d.weights.iter().copied().map(plogp).sum())
}

/// `log2(a / b)`, falling back to a difference of logs when the quotient
/// overflows on subnormal `b`.
fn log2_ratio(a: f64, b: f64) -> f64 {
    let r = a / b;
    if r.is_finite() {
        r.log2()
    } else {
        a.log2() - b.log2()
    }
}

/// `H(B|A)` in bits, from the joint matrix.
///
/// Evaluated as `sum_ij p_ij log2(p_i / p_ij)`, which equals `H(A,B) - H(A)`
/// without the cancellation of subtracting two large entropies.
pub fn conditional_entropy(j: &JointDistribution) -> Result<f64> {
    j.ensure_normalized()?;
    let mut h = 0.0;
    for i in 0..j.rows {
        let row = j.row(i);
        let pa: f64 = row.iter().sum();
        if pa <= 0.0 {
            continue;
        }
        for &p in row {
            if p > 0.0 {
                h += p * log2_ratio(pa, p);
            }
        }
    }
    Ok(h.max(0.0))
}

/// `I(A:B) = H(A) + H(B) - H(A,B)`, clamped at zero against rounding.
pub fn mutual_information(j: &JointDistribution) -> Result<f64> {
    j.ensure_normalized()?;
    let pa = j.marginal_a();
    let pb = j.marginal_b();
    let mut info = 0.0;
    for (i, &ai) in pa.iter().enumerate() {
        for (&p, &bj) in j.row(i).iter().zip(&pb) {
            if p > 0.0 {
                info += p * (log2_ratio(p, ai) - bj.log2());
            }
        }
    }
    Ok(info.max(0.0))
}

/// Upper estimate of a differential entropy from the entropy of its
/// discretization at the given bin width: `H + log2(width)`.
pub fn differential_entropy_upper_estimate(h_discrete: f64, bin_width: f64) -> Result<f64> {
    check_positive("bin_width", bin_width)?;
    Ok(h_discrete + bin_width.log2())
}

/// Entropy of the geometric distribution `P(k) = mu (1-mu)^k`, which is
/// `h2(mu) / mu`. Bounds the entropy of the window index `W` given
/// `P(W = 0) = mu`.
pub fn geometric_entropy_bound(mu: f64) -> Result<f64> {
    if !(mu > 0.0 && mu <= 1.0) {
        return Err(Error::domain("mu", mu, "0 < mu <= 1"));
    }
    Ok(h2(mu) / mu)
}

/// `0.5 log2(2 pi e sigma^2)`.
pub fn gaussian_differential_entropy(sigma: f64) -> Result<f64> {
    check_positive("sigma", sigma)?;
    Ok(0.5 * (2.0 * PI * E * sigma * sigma).log2())
}
