//! Error metrics, Hoeffding sample sizes and binomial tail probabilities.

use crate::dp::EdgeMatrix;
use crate::error::{Error, Result};
use crate::math::{ceil, exp, ln, ln_gamma, LogAccumulator};

/// Sum of absolute differences over all ordered pairs `i ≠ j`.
pub fn sad(exact: &EdgeMatrix, estimated: &EdgeMatrix) -> Result<f64> {
    if exact.n() != estimated.n() {
        return Err(Error::Shape(alloc::format!("{} vs {} variables", exact.n(), estimated.n())));
    }
    Ok(EdgeMatrix::pairs(exact.n())
        .map(|(i, j)| (exact.get(i, j) - estimated.get(i, j)).abs())
        .sum())
}

/// `SAD / (n(n−1))`; zero for a single variable.
pub fn mad(exact: &EdgeMatrix, estimated: &EdgeMatrix) -> Result<f64> {
    let n = exact.n();
    let s = sad(exact, estimated)?;
    Ok(if n < 2 { 0.0 } else { s / (n * (n - 1)) as f64 })
}

/// Largest absolute entrywise difference.
pub fn max_abs_difference(a: &EdgeMatrix, b: &EdgeMatrix) -> Result<f64> {
    if a.n() != b.n() {
        return Err(Error::Shape(alloc::format!("{} vs {} variables", a.n(), b.n())));
    }
    Ok(EdgeMatrix::pairs(a.n()).map(|(i, j)| (a.get(i, j) - b.get(i, j)).abs()).fold(0.0, f64::max))
}

/// Smallest `N` with `P(|p̂ − p| ≥ ε) ≤ δ` by Hoeffding: `⌈ln(2/δ) / (2ε²)⌉`.
pub fn hoeffding_sample_size(epsilon: f64, delta: f64) -> Result<usize> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::Domain(alloc::format!("epsilon must be positive, got {epsilon}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Domain(alloc::format!("delta must lie in (0, 1), got {delta}")));
    }
    let n = ceil(ln(2.0 / delta) / (2.0 * epsilon * epsilon));
    Ok((n as usize).max(1))
}

fn ln_binomial_pmf(k: u64, n: u64, p: f64) -> f64 {
    if p == 0.0 {
        return if k == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    if p == 1.0 {
        return if k == n { 0.0 } else { f64::NEG_INFINITY };
    }
    let (kf, nf) = (k as f64, n as f64);
    ln_gamma(nf + 1.0) - ln_gamma(kf + 1.0) - ln_gamma(nf - kf + 1.0) + kf * ln(p) + (nf - kf) * crate::math::ln_1p(-p)
}

/// `P(X ≤ k)` for `X ~ Binomial(n, p)`.
pub fn binomial_cdf(k: u64, n: u64, p: f64) -> f64 {
    if k >= n {
        return 1.0;
    }
    let mut acc = LogAccumulator::new();
    for i in 0..=k {
        acc.add(ln_binomial_pmf(i, n, p));
    }
    exp(acc.value()).min(1.0)
}

/// `P(X ≥ k)` for `X ~ Binomial(n, p)`.
pub fn binomial_sf(k: u64, n: u64, p: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    if k > n {
        return 0.0;
    }
    let mut acc = LogAccumulator::new();
    for i in k..=n {
        acc.add(ln_binomial_pmf(i, n, p));
    }
    exp(acc.value()).min(1.0)
}

/// Total variation distance between two pmfs on the same support.
pub fn total_variation(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::Shape(alloc::format!("supports of size {} and {}", p.len(), q.len())));
    }
    Ok(0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>())
}
