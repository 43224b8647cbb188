//! Reference implementations used as test oracles. Written independently
//! of the library: plain sums, brute force and quadrature.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn h2(p: f64) -> f64 {
    let term = |q: f64| if q > 0.0 { -q * q.log2() } else { 0.0 };
    term(p) + term(1.0 - p)
}

pub fn entropy(p: &[f64]) -> f64 {
    p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.log2()).sum()
}

/// `H(B|A) = H(A,B) - H(A)` for a row-major `n x m` matrix.
pub fn conditional_entropy(rows: &[Vec<f64>]) -> f64 {
    let joint: Vec<f64> = rows.iter().flatten().copied().collect();
    let marginal: Vec<f64> = rows.iter().map(|r| r.iter().sum()).collect();
    entropy(&joint) - entropy(&marginal)
}

/// The five-term left side, written out term by term.
pub fn fano_lhs(eta_x: f64, eta_k: f64, mu_x: f64, mu_k: f64, n_bar: usize) -> f64 {
    let log_n = ((n_bar - 1) as f64).log2();
    h2(eta_x * mu_x)
        + h2(eta_k * mu_k)
        + h2(mu_x) / mu_x
        + h2(mu_k) / mu_k
        + (2.0 - eta_x * mu_x - eta_k * mu_k) * log_n
}

/// Fano bound from its textbook form.
pub fn fano(eta: f64, n: usize) -> f64 {
    h2(eta) + (1.0 - eta) * ((n - 1) as f64).log2()
}

/// Entropy of the geometric law `P(w) = mu (1 - mu)^w`, summed until the
/// tail mass drops below `tail`.
pub fn geometric_entropy_sum(mu: f64, tail: f64) -> f64 {
    let mut h = 0.0;
    let mut p = mu;
    let mut remaining = 1.0;
    while remaining > tail {
        h -= p * p.log2();
        remaining -= p;
        p *= 1.0 - mu;
    }
    h
}

/// Every permutation of `0..n` (Heap's algorithm).
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut a: Vec<usize> = (0..n).collect();
    let mut out = vec![a.clone()];
    let mut c = vec![0; n];
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                a.swap(0, i);
            } else {
                a.swap(c[i], i);
            }
            out.push(a.clone());
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    out
}

/// Largest `sum_a P(a, pi(a))` over every permutation.
pub fn brute_force_agreement(rows: &[Vec<f64>]) -> f64 {
    let n = rows.len();
    permutations(n)
        .iter()
        .map(|p| (0..n).map(|a| rows[a][p[a]]).sum::<f64>())
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Random normalized `n x n` matrix whose trace is at least `min_trace`.
pub fn random_joint(rng: &mut ChaCha8Rng, n: usize, min_trace: f64) -> Vec<Vec<f64>> {
    let mut rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..n).map(|_| rng.random::<f64>().powi(3)).collect())
        .collect();
    let sparse = rng.random_bool(0.3);
    for (i, row) in rows.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            if sparse && i != j && rng.random_bool(0.7) {
                *v = 0.0;
            }
        }
    }
    normalize(&mut rows);
    let trace: f64 = (0..n).map(|i| rows[i][i]).sum();
    if trace < min_trace {
        // mix with a random diagonal until the trace reaches a random target
        let target = min_trace + (1.0 - min_trace) * rng.random::<f64>();
        let t = (target - trace) / (1.0 - trace);
        let d: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + 1e-3).collect();
        let ds: f64 = d.iter().sum();
        for (i, row) in rows.iter_mut().enumerate() {
            for v in row.iter_mut() {
                *v *= 1.0 - t;
            }
            row[i] += t * d[i] / ds;
        }
    }
    normalize(&mut rows);
    rows
}

pub fn normalize(rows: &mut [Vec<f64>]) {
    let s: f64 = rows.iter().flatten().sum();
    for v in rows.iter_mut().flatten() {
        *v /= s;
    }
}

pub fn std_normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Composite Simpson rule with `panels` (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, lo: f64, hi: f64, panels: usize) -> f64 {
    let h = (hi - lo) / panels as f64;
    let mut s = f(lo) + f(hi);
    for i in 1..panels {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(lo + i as f64 * h);
    }
    s * h / 3.0
}
