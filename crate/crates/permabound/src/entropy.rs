//! Odd entropy on the simplex and the divergences built from it.
//!
//! `OE(p) = p ln p - (1-p) ln(1-p)` is not convex on `[0, 1]`, but its
//! coordinatewise lift `Σ_i OE(p_i)` is convex on the probability simplex.
//! That makes `BD(X‖Y)` below a genuine Bregman divergence, and makes the
//! simplex maximization of `OD(·, p)` a concave problem whose solution is
//! either an interior point or a vertex with a dominant weight.

use crate::numeric::xlnx;
use crate::{Error, Result};

/// Odd entropy `OE(p) = p ln p - (1-p) ln(1-p)` with `0 ln 0 = 0`.
pub fn odd_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!(
            "odd_entropy needs p in [0,1], got {p}"
        )));
    }
    Ok(xlnx(p) - xlnx(1.0 - p))
}

/// `OD(q, p) = Σ_i (1-q_i) ln(1-q_i) - q_i ln(q_i / p_i)` for `q` on the
/// simplex and `p` entrywise positive.
pub fn od_value(q: &[f64], p: &[f64]) -> Result<f64> {
    if q.len() != p.len() || q.is_empty() {
        return Err(Error::Domain("od_value: dimension mismatch".into()));
    }
    if p.iter().any(|&v| v <= 0.0) {
        return Err(Error::Domain(
            "od_value: p must be entrywise positive".into(),
        ));
    }
    let mut total = 0.0;
    for (&qi, &pi) in q.iter().zip(p) {
        if !(0.0..=1.0).contains(&qi) {
            return Err(Error::Domain(format!(
                "od_value: q entry {qi} outside [0,1]"
            )));
        }
        total += xlnx(1.0 - qi);
        if qi > 0.0 {
            total -= qi * (qi / pi).ln();
        }
    }
    Ok(total)
}

/// Closed-form maximum of `OD(·, c·e)` over the n-simplex:
/// `(n-1) ln(1 - 1/n) + ln n + ln c`, attained at the uniform point.
pub fn od_uniform_max(n: usize, c: f64) -> Result<f64> {
    if n < 2 || c <= 0.0 {
        return Err(Error::Domain(format!(
            "od_uniform_max needs n >= 2 and c > 0, got n = {n}, c = {c}"
        )));
    }
    let nf = n as f64;
    Ok((nf - 1.0) * (1.0 - 1.0 / nf).ln() + nf.ln() + c.ln())
}

/// Bethe divergence
/// `BD(X‖Y) = Σ_i x_i ln(x_i/y_i) - (1-x_i) ln((1-x_i)/(1-y_i))`,
/// the Bregman distance of the lifted odd entropy; nonnegative on the
/// simplex.
pub fn bethe_divergence(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.is_empty() {
        return Err(Error::Domain("bethe_divergence: dimension mismatch".into()));
    }
    let mut total = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        if !(0.0..=1.0).contains(&xi) || !(0.0..=1.0).contains(&yi) {
            return Err(Error::Domain(
                "bethe_divergence: entries must lie in [0,1]".into(),
            ));
        }
        if xi > 0.0 {
            if yi == 0.0 {
                return Ok(f64::INFINITY);
            }
            total += xi * (xi / yi).ln();
        }
        let (cx, cy) = (1.0 - xi, 1.0 - yi);
        if cx > 0.0 {
            if cy == 0.0 {
                return Ok(f64::NEG_INFINITY); // -(1-x) ln(inf): outside the simplex interior
            }
            total -= cx * (cx / cy).ln();
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn odd_entropy_midpoint_is_zero() {
        assert_eq!(odd_entropy(0.5).unwrap(), 0.0);
        assert_eq!(odd_entropy(0.0).unwrap(), 0.0);
        assert_eq!(odd_entropy(1.0).unwrap(), 0.0);
        assert!(odd_entropy(1.5).is_err());
    }

    #[test]
    fn bethe_divergence_self_is_zero() {
        let x = [0.2, 0.5, 0.3];
        assert_eq!(bethe_divergence(&x, &x).unwrap(), 0.0);
    }

    #[test]
    fn od_dominant_index_maximum() {
        // p = (3,1,1): p_1 >= p_2 + p_3, so the simplex max is ln 3 at e_1.
        let p = [3.0, 1.0, 1.0];
        let at_vertex = od_value(&[1.0, 0.0, 0.0], &p).unwrap();
        assert!((at_vertex - 3f64.ln()).abs() < 1e-14);
        // Coarse grid search stays below the vertex value.
        let steps = 60usize;
        let mut best = f64::NEG_INFINITY;
        for i in 0..=steps {
            for j in 0..=(steps - i) {
                let q = [
                    i as f64 / steps as f64,
                    j as f64 / steps as f64,
                    (steps - i - j) as f64 / steps as f64,
                ];
                best = best.max(od_value(&q, &p).unwrap());
            }
        }
        assert!(best <= at_vertex + 1e-12);
    }

    #[test]
    fn od_uniform_max_matches_grid_search() {
        // n = 2, c = 1: closed form gives ln(1/2) + ln 2 = 0.
        let closed = od_uniform_max(2, 1.0).unwrap();
        assert!(closed.abs() < 1e-14);
        let p = [1.0, 1.0];
        let mut best = f64::NEG_INFINITY;
        for i in 0..=2000 {
            let q0 = i as f64 / 2000.0;
            best = best.max(od_value(&[q0, 1.0 - q0], &p).unwrap());
        }
        assert!((best - closed).abs() < 1e-6);
        // n = 3, c = 1 frozen value.
        let v = od_uniform_max(3, 1.0).unwrap();
        assert!((v - (2.0 * (2.0f64 / 3.0).ln() + 3f64.ln())).abs() < 1e-14);
        // c only shifts by ln c.
        let shifted = od_uniform_max(3, 2.5).unwrap();
        assert!((shifted - v - 2.5f64.ln()).abs() < 1e-14);
    }
}
