//! Log-domain scalar helpers shared across the crate.

use serde::{Deserialize, Serialize};

/// A nonnegative real carried in natural-log domain.
///
/// Zero gets an explicit flag so that `log per = -inf` never contaminates
/// arithmetic by accident.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogValue {
    pub log_magnitude: f64,
    pub is_zero: bool,
}

impl LogValue {
    pub fn zero() -> Self {
        LogValue {
            log_magnitude: f64::NEG_INFINITY,
            is_zero: true,
        }
    }

    pub fn from_ln(ln: f64) -> Self {
        LogValue {
            log_magnitude: ln,
            is_zero: false,
        }
    }

    /// Ingest a linear-domain value; nonpositive values collapse to zero.
    pub fn from_value(v: f64) -> Self {
        if v <= 0.0 {
            LogValue::zero()
        } else {
            LogValue::from_ln(v.ln())
        }
    }

    /// Natural log, `-inf` for zero.
    pub fn ln(&self) -> f64 {
        if self.is_zero {
            f64::NEG_INFINITY
        } else {
            self.log_magnitude
        }
    }

    /// Back to linear domain (may overflow to `inf` for large logs).
    pub fn value(&self) -> f64 {
        if self.is_zero {
            0.0
        } else {
            self.log_magnitude.exp()
        }
    }
}

/// ln(n!) by cumulative summation; exact integer arguments only.
///
/// Accumulated rounding is ~n·eps, far below every tolerance used here
/// (n stays in the hundreds).
pub fn ln_factorial(n: u64) -> f64 {
    let mut acc = 0.0f64;
    let mut c = 0.0f64; // Kahan compensation
    for k in 2..=n {
        let term = (k as f64).ln();
        let y = term - c;
        let t = acc + y;
        c = (t - acc) - y;
        acc = t;
    }
    acc
}

/// ln C(n, k).
pub fn ln_binomial(n: u64, k: u64) -> f64 {
    assert!(k <= n, "binomial out of range");
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// Numerically stable `ln Σ exp(x_i)`; `-inf` inputs are skipped.
pub fn logsumexp(xs: &[f64]) -> f64 {
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    let s: f64 = xs.iter().map(|&x| (x - m).exp()).sum();
    m + s.ln()
}

/// `x ln x` with the `0 ln 0 = 0` convention.
pub fn xlnx(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// Compensated (Kahan) accumulator for long alternating sums.
#[derive(Debug, Default, Clone, Copy)]
pub struct KahanSum {
    sum: f64,
    c: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        let y = x - self.c;
        let t = self.sum + y;
        self.c = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}
