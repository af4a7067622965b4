//! Floating-point helpers shared by every module.
//!
//! `core` has no transcendental functions, so everything goes through `libm`.

#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub fn ln_1p(x: f64) -> f64 {
    libm::log1p(x)
}

#[inline]
pub fn exp_m1(x: f64) -> f64 {
    libm::expm1(x)
}

#[inline]
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}

/// `ln(e^a + e^b)`.
#[inline]
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + ln_1p(exp(lo - hi))
}

/// `ln(e^a - e^b)` for `a >= b`; returns `-inf` when the difference vanishes.
#[inline]
pub fn log_sub_exp(a: f64, b: f64) -> f64 {
    if b == f64::NEG_INFINITY {
        return a;
    }
    if b >= a {
        return f64::NEG_INFINITY;
    }
    a + ln_1p(-exp(b - a))
}

/// `ln Σ e^{x_i}` with max-subtraction. Empty input gives `-inf`.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    log_sum_exp_iter(xs.iter().copied())
}

/// Iterator form of [`log_sum_exp`]; the iterator is cloned for the second pass.
pub fn log_sum_exp_iter<I>(xs: I) -> f64
where
    I: Iterator<Item = f64> + Clone,
{
    let max = xs.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY || max.is_nan() {
        return max;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    let sum: f64 = xs.map(|x| exp(x - max)).sum();
    max + ln(sum)
}

/// Streaming log-sum-exp accumulator; rescales when a larger term arrives.
#[derive(Debug, Clone, Copy)]
pub struct LogAccumulator {
    max: f64,
    sum: f64,
}

impl Default for LogAccumulator {
    fn default() -> Self {
        Self::new()
    }
}

impl LogAccumulator {
    pub const fn new() -> Self {
        Self { max: f64::NEG_INFINITY, sum: 0.0 }
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        if x == f64::NEG_INFINITY {
            return;
        }
        if x <= self.max {
            self.sum += exp(x - self.max);
        } else {
            self.sum = self.sum * exp(self.max - x) + 1.0;
            self.max = x;
        }
    }

    pub fn value(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + ln(self.sum)
        }
    }
}

/// Exact binomial coefficient for the small arguments used by set ranking.
pub const fn binomial(n: u32, k: u32) -> u64 {
    if k > n {
        return 0;
    }
    let k = if k > n - k { n - k } else { k };
    let mut acc: u64 = 1;
    let mut i = 0;
    while i < k {
        acc = acc * (n - i) as u64 / (i + 1) as u64;
        i += 1;
    }
    acc
}

/// `ln C(n, k)` via log-gamma.
pub fn ln_binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

/// `ln n!`.
pub fn ln_factorial(n: u32) -> f64 {
    ln_gamma(n as f64 + 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_sum_exp_handles_extremes() {
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
        assert_eq!(log_sum_exp(&[f64::NEG_INFINITY, f64::NEG_INFINITY]), f64::NEG_INFINITY);
        let v = log_sum_exp(&[-1000.0, -1000.0]);
        assert!((v - (-1000.0 + core::f64::consts::LN_2)).abs() < 1e-12);
        let v = log_sum_exp(&[800.0, 0.0]);
        assert!((v - 800.0).abs() < 1e-12);
    }

    #[test]
    fn accumulator_matches_batch() {
        let xs = [-3.0, 5.0, -700.0, 2.5, 4.9, f64::NEG_INFINITY];
        let mut acc = LogAccumulator::new();
        for &x in &xs {
            acc.add(x);
        }
        assert!((acc.value() - log_sum_exp(&xs)).abs() < 1e-12);
    }

    #[test]
    fn log_sub_exp_inverts_add() {
        let a = log_add_exp(-2.0, -3.0);
        assert!((log_sub_exp(a, -3.0) - (-2.0)).abs() < 1e-12);
        assert_eq!(log_sub_exp(1.0, 1.0), f64::NEG_INFINITY);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(4, 2), 6);
        assert_eq!(binomial(24, 3), 2024);
        assert_eq!(binomial(3, 5), 0);
        assert_eq!(binomial(30, 15), 155_117_520);
        assert!((ln_binomial(10, 3) - ln(120.0)).abs() < 1e-12);
    }
}
