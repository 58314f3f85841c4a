//! Scalar closed forms: the van der Waerden bound, the function `G`, the
//! matching lower bounds `SF` and `D`, the monomer-dimer entropy curve
//! `g_r`, and the limit curves `M_r`, `S_r`, `L_r` of the bordered family.
//!
//! Everything returns natural logs. Endpoint values at `t ∈ {0, 1}` use
//! the `0 ln 0 = 0` convention explicitly instead of evaluating `ln 0`.

use crate::numeric::{ln_factorial, xlnx};
use crate::{Error, Result};

/// `ln vdw(n) = ln(n!/n^n)`, the minimum permanent over doubly stochastic
/// matrices.
pub fn log_vdw(n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("log_vdw needs n >= 1".into()));
    }
    let nf = n as f64;
    Ok(ln_factorial(n as u64) - nf * nf.ln())
}

/// `ln G(x)` with `G(x) = ((x-1)/x)^(x-1)` for real `x >= 1`; `G(1) = 1`
/// by the `0^0 = 1` convention.
pub fn log_g(x: f64) -> Result<f64> {
    if x < 1.0 {
        return Err(Error::Domain(format!("log_g needs x >= 1, got {x}")));
    }
    if x == 1.0 {
        return Ok(0.0);
    }
    Ok((x - 1.0) * ((x - 1.0) / x).ln())
}

/// `ln G(x, t)` with `G(x, t) = ((x-t)/x)^(x-t)` for `x >= t >= 0`;
/// decreasing in `x` for fixed `t > 0`.
pub fn log_g2(x: f64, t: f64) -> Result<f64> {
    if t < 0.0 || x < t || x <= 0.0 {
        return Err(Error::Domain(format!(
            "log_g2 needs x >= t >= 0 and x > 0, got x = {x}, t = {t}"
        )));
    }
    if x == t {
        return Ok(0.0);
    }
    Ok((x - t) * ((x - t) / x).ln())
}

/// `ln` of the minimum permanent over `Ω_{k,n}` (k-regular rational doubly
/// stochastic matrices): `((k-1)/k)^{(k-1) n}`.
pub fn log_schrijver_bound(k: usize, n: usize) -> f64 {
    if k <= 1 {
        return 0.0; // permutation matrices: per = 1
    }
    let kf = k as f64;
    (kf - 1.0) * n as f64 * ((kf - 1.0) / kf).ln()
}

/// `ln SF(r, n, m)`, the lower bound on `per_m(A)` over nonnegative integer
/// matrices with all row/column sums `r`:
///
/// `SF = (1-α)^{(1-α)nr} (1-1/n)^{(1-1/n)·2n²(1-t)}
///       / (α^{nt} n^{-2n(1-t)} ((n(1-t))!)²)`,   `t = m/n`, `α = t/r`.
///
/// At `m = n` it collapses to `(r G(r))^n`, the regular-matrix permanent
/// bound.
pub fn log_sf(r: usize, n: usize, m: usize) -> Result<f64> {
    if r == 0 || n == 0 || m > n {
        return Err(Error::Domain(format!(
            "log_sf needs r >= 1 and 0 <= m <= n, got r = {r}, n = {n}, m = {m}"
        )));
    }
    let nf = n as f64;
    let nr = (n * r) as f64;
    let q = (n - m) as u64; // n(1-t), an exact integer
    let alpha = m as f64 / nr;
    // (1-α)^{(1-α)nr}: exponent (1-α)·n·r = nr - m.
    let lead = if m == n * r {
        0.0
    } else {
        (nr - m as f64) * (1.0 - alpha).ln()
    };
    // (1-1/n)^{(1-1/n)·2n²(1-t)}: exponent = 2(n-1)(n-m).
    let mid = if n == 1 {
        0.0
    } else {
        2.0 * (n as f64 - 1.0) * q as f64 * (1.0 - 1.0 / nf).ln()
    };
    // Denominator α^m n^{-2(n-m)} ((n-m)!)², with 0 ln 0 = 0 at m = 0.
    let log_denom = if m == 0 { 0.0 } else { m as f64 * alpha.ln() } - 2.0 * q as f64 * nf.ln()
        + 2.0 * ln_factorial(q);
    Ok(lead + mid - log_denom)
}

/// `ln D(r; m, n) = ln [ C(n,m)² ((r-t)/r)^{n(r-t)} (tr)^{nt} ]`, the
/// binomial-form matching lower bound, `t = m/n`.
pub fn log_d(r: usize, n: usize, m: usize) -> Result<f64> {
    if r == 0 || n == 0 || m > n {
        return Err(Error::Domain(format!(
            "log_d needs r >= 1 and 0 <= m <= n, got r = {r}, n = {n}, m = {m}"
        )));
    }
    let t = m as f64 / n as f64;
    let rf = r as f64;
    let binom =
        2.0 * (ln_factorial(n as u64) - ln_factorial(m as u64) - ln_factorial((n - m) as u64));
    let lead = if m == n * r {
        0.0
    } else {
        (n as f64 * rf - m as f64) * ((rf - t) / rf).ln()
    };
    let tail = if m == 0 {
        0.0
    } else {
        m as f64 * (t * rf).ln()
    };
    Ok(binom + lead + tail)
}

/// Closed form of `ln(D/SF) = 2 [ Σ_{i=m+1..n} ln G(i) - (n-m) ln G(n) ]`.
///
/// Each factor `G(i)/G(n) >= 1` since `G` decreases, so the ratio is `>= 1`
/// with equality only at `m >= n-1`.
pub fn log_d_sf_ratio(n: usize, m: usize) -> Result<f64> {
    if n == 0 || m > n {
        return Err(Error::Domain(format!(
            "log_d_sf_ratio needs 0 <= m <= n, got n = {n}, m = {m}"
        )));
    }
    let gn = log_g(n as f64)?;
    let mut acc = 0.0;
    for i in (m + 1)..=n {
        acc += log_g(i as f64)? - gn;
    }
    Ok(2.0 * acc)
}

/// Monomer-dimer entropy curve
/// `g_r(t) = t ln(r/t) - 2(1-t) ln(1-t) + (r-t) ln(1 - t/r)`, `t ∈ [0,1]`.
pub fn g_curve(r: usize, t: f64) -> Result<f64> {
    check_rt(r, t, "g_curve")?;
    let rf = r as f64;
    // t ln(r/t) = t ln r - t ln t.
    let first = t * rf.ln() - xlnx(t);
    let second = -2.0 * xlnx(1.0 - t);
    let third = if t >= rf {
        0.0
    } else {
        (rf - t) * (1.0 - t / rf).ln()
    };
    Ok(first + second + third)
}

/// `M_r(t) = (r-t) ln(1 - t/r) - 2(1-t)`: the limit of
/// `ln E[per_m · (scale)]/n` on the bordered family.
pub fn m_curve(r: usize, t: f64) -> Result<f64> {
    check_rt(r, t, "m_curve")?;
    let rf = r as f64;
    let lead = if t >= rf {
        0.0
    } else {
        (rf - t) * (1.0 - t / rf).ln()
    };
    Ok(lead - 2.0 * (1.0 - t))
}

/// `S_r(t) = ln( t (1-t/r)^{r-1} e^{-(1-t)} + (1-t) e^{-1} ) - (1-t)²
///           + r (1-t) ln(1 - t/r)`: the limit of `ln LMS(K)/n`.
pub fn s_curve(r: usize, t: f64) -> Result<f64> {
    check_rt(r, t, "s_curve")?;
    let rf = r as f64;
    let shrink = 1.0 - t / rf;
    let inner = t * shrink.powi(r as i32 - 1) * (-(1.0 - t)).exp() + (1.0 - t) * (-1f64).exp();
    let lead = if t >= rf {
        // t = r = 1: r(1-t) ln(...) term vanishes with 0 ln 0 = 0.
        0.0
    } else {
        rf * (1.0 - t) * shrink.ln()
    };
    Ok(inner.ln() - (1.0 - t) * (1.0 - t) + lead)
}

/// `L_r(t) = (r-1) ln(1 - t/r) - 2(1-t)`: the limit of `ln SD(K)/n`.
pub fn l_curve(r: usize, t: f64) -> Result<f64> {
    check_rt(r, t, "l_curve")?;
    let rf = r as f64;
    let lead = if r == 1 || t >= rf {
        0.0
    } else {
        (rf - 1.0) * (1.0 - t / rf).ln()
    };
    Ok(lead - 2.0 * (1.0 - t))
}

fn check_rt(r: usize, t: f64, what: &str) -> Result<()> {
    if r == 0 || !(0.0..=1.0).contains(&t) {
        return Err(Error::Domain(format!(
            "{what} needs r >= 1 and t in [0, 1], got r = {r}, t = {t}"
        )));
    }
    Ok(())
}

/// Grid argmax of `S_r(t) - M_r(t)` over `t ∈ {step, 2·step, ..., 1-step}`.
pub fn s_minus_m_argmax(r: usize, step: f64) -> Result<(f64, f64)> {
    if step <= 0.0 || step >= 0.5 {
        return Err(Error::Domain(
            "s_minus_m_argmax needs 0 < step < 0.5".into(),
        ));
    }
    let mut best_t = step;
    let mut best = f64::NEG_INFINITY;
    let mut t = step;
    while t < 1.0 - step / 2.0 {
        let v = s_curve(r, t)? - m_curve(r, t)?;
        if v > best {
            best = v;
            best_t = t;
        }
        t += step;
    }
    Ok((best_t, best))
}

/// `ln LMS(K_n)` in closed form for the counterexample family (n even):
///
/// `LMS(K_n) = ( ½(1-1/n)^{n/2} + ½(1-1/n)^{n-1} )^n
///             · ( ½(1-1/n)^{n/2-1} )^{n/2}`.
pub fn log_lms_counterexample(n: usize) -> Result<f64> {
    if n < 2 || !n.is_multiple_of(2) {
        return Err(Error::OddN(n));
    }
    let nf = n as f64;
    let base = 1.0 - 1.0 / nf;
    let top = 0.5 * base.powi((n / 2) as i32) + 0.5 * base.powi(n as i32 - 1);
    let bottom = 0.5 * base.powi((n / 2) as i32 - 1);
    Ok(nf * top.ln() + (nf / 2.0) * bottom.ln())
}

/// `ln SD(K_n)` for the counterexample family, evaluated directly from the
/// column no-collision products of the block structure:
///
/// `SD(K_n) = ( ½(1-1/n)^{n/2} + ¼(1-1/n)^{n/2-1} )^n
///            · ( (1-1/n)^{n-1} )^{n/2}`.
pub fn log_sd_counterexample(n: usize) -> Result<f64> {
    if n < 2 || !n.is_multiple_of(2) {
        return Err(Error::OddN(n));
    }
    let nf = n as f64;
    let base = 1.0 - 1.0 / nf;
    let main_col = 0.5 * base.powi((n / 2) as i32) + 0.25 * base.powi((n / 2) as i32 - 1);
    let border_col = base.powi(n as i32 - 1);
    Ok(nf * main_col.ln() + (nf / 2.0) * border_col.ln())
}

/// `ln SD(K)` for the general bordered family as published:
/// `(1-1/(n-1))^{n(1-t)} ( (1-t/r)^{r-1} (1-1/(n-1))^{n(1-t)} )^n`.
///
/// Kept as a reference curve only; direct evaluation of SD on the
/// materialized matrices differs from this display (see
/// [`log_sd_counterexample`] for the family actually used in tables).
pub fn log_sd_bordered_published(r: usize, n: usize, m: usize) -> Result<f64> {
    if r == 0 || n < 2 || m > n {
        return Err(Error::Domain(format!(
            "log_sd_bordered_published needs r >= 1, n >= 2, m <= n (got r={r}, n={n}, m={m})"
        )));
    }
    let nf = n as f64;
    let t = m as f64 / nf;
    let rf = r as f64;
    let shrink_log = if t >= rf { 0.0 } else { (1.0 - t / rf).ln() };
    let near_one = (1.0 - 1.0 / (nf - 1.0)).ln();
    Ok(nf * (1.0 - t) * near_one + nf * ((rf - 1.0) * shrink_log + nf * (1.0 - t) * near_one))
}

/// Closed-form sandwich for the probability that a sum of `r` independent
/// permutation matrices is boolean:
///
/// `Π_{i=1..r-1} ((n-i)/n)^n  <=  prob  <=
///  Π_{i=1..r-1} ((n-i)!)^{i/(n-i)} / ((n-i+1)···n)`,
///
/// both returned as logs. The lower factor is the minimum permanent of the
/// remaining (n-i)-regular layer, the upper one Bregman's bound on its
/// maximum; both sides approach `exp(-r(r-1)/2)` as n grows.
pub fn log_prob2_sandwich(r: usize, n: usize) -> Result<(f64, f64)> {
    if r == 0 || n == 0 || r > n {
        return Err(Error::Domain(format!(
            "log_prob2_sandwich needs 1 <= r <= n, got r = {r}, n = {n}"
        )));
    }
    let mut lower = 0.0;
    let mut upper = 0.0;
    for i in 1..r {
        let keep = (n - i) as f64;
        lower += n as f64 * (keep / n as f64).ln();
        let falling = ln_factorial(n as u64) - ln_factorial((n - i) as u64);
        upper += (i as f64 / keep) * ln_factorial((n - i) as u64) - falling;
    }
    Ok((lower, upper))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vdw_small_values() {
        assert!((log_vdw(3).unwrap() - (2.0f64 / 9.0).ln()).abs() < 1e-14);
        assert!((log_vdw(1).unwrap() - 0.0).abs() < 1e-15);
    }

    #[test]
    fn g_values() {
        assert_eq!(log_g(1.0).unwrap(), 0.0);
        assert!((log_g(2.0).unwrap() - 0.5f64.ln()).abs() < 1e-15);
        assert!((log_g(3.0).unwrap() - (4.0f64 / 9.0).ln()).abs() < 1e-14);
        assert!(log_g(0.5).is_err());
    }

    #[test]
    fn g2_monotone_in_x() {
        let t = 0.5;
        let xs = [1.0f64, 2.0, 4.0, 8.0];
        let vals: Vec<f64> = xs.iter().map(|&x| log_g2(x, t).unwrap()).collect();
        for w in vals.windows(2) {
            assert!(w[1] < w[0], "G(x, 0.5) must decrease in x: {vals:?}");
        }
        assert_eq!(log_g2(0.5, 0.5).unwrap(), 0.0);
        assert!(log_g2(0.4, 0.5).is_err());
    }

    #[test]
    fn schrijver_bound_values() {
        assert_eq!(log_schrijver_bound(1, 7), 0.0);
        assert!((log_schrijver_bound(2, 3) - 3.0 * 0.5f64.ln()).abs() < 1e-14);
        assert!((log_schrijver_bound(3, 2) - 4.0 * (2.0f64 / 3.0).ln()).abs() < 1e-14);
    }

    #[test]
    fn sf_endpoints() {
        // m = n: SF = (r G(r))^n.
        for (r, n) in [(2usize, 4usize), (3, 5)] {
            let expect = n as f64 * ((r as f64).ln() + log_g(r as f64).unwrap());
            assert!((log_sf(r, n, n).unwrap() - expect).abs() < 1e-10);
        }
        // m = 0: SF = (G(n)^n n^n / n!)^2 <= 1 (per_0 = 1, bound slack).
        for n in [4usize, 6] {
            let expect = -log_d_sf_ratio(n, 0).unwrap();
            assert!((log_sf(2, n, 0).unwrap() - expect).abs() < 1e-10);
            assert!(log_sf(2, n, 0).unwrap() <= 0.0);
        }
    }

    #[test]
    fn d_endpoints_match_sf() {
        // At m = n both collapse to the same regular-matrix bound.
        for (r, n) in [(2usize, 5usize), (3, 4)] {
            assert!((log_d(r, n, n).unwrap() - log_sf(r, n, n).unwrap()).abs() < 1e-10);
        }
        assert!(log_d(2, 6, 0).unwrap().abs() < 1e-12);
    }

    #[test]
    fn d_sf_ratio_identity_and_sign() {
        for r in [1usize, 2, 3] {
            for n in [3usize, 5, 8] {
                for m in 0..=n {
                    let direct = log_d(r, n, m).unwrap() - log_sf(r, n, m).unwrap();
                    let closed = log_d_sf_ratio(n, m).unwrap();
                    assert!(
                        (direct - closed).abs() < 1e-9,
                        "r={r} n={n} m={m}: direct {direct} closed {closed}"
                    );
                    if m + 1 < n {
                        assert!(direct > 0.0, "D/SF must exceed 1 for m < n-1");
                    } else {
                        assert!(direct.abs() < 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn g_curve_endpoints() {
        for r in [1usize, 2, 3, 5] {
            assert!(g_curve(r, 0.0).unwrap().abs() < 1e-15);
            // g_r(1) = ln(r G(r)).
            let expect = (r as f64).ln() + log_g(r as f64).unwrap();
            assert!((g_curve(r, 1.0).unwrap() - expect).abs() < 1e-13);
        }
        // r = 2: g_2(1) = ln(2 * 1/2) = 0.
        assert!(g_curve(2, 1.0).unwrap().abs() < 1e-14);
    }

    #[test]
    fn s_dominates_m_and_l_dominates_m() {
        for r in [1usize, 2, 3] {
            for k in 1..=9 {
                let t = 0.1 * k as f64;
                let s = s_curve(r, t).unwrap();
                let m = m_curve(r, t).unwrap();
                let l = l_curve(r, t).unwrap();
                assert!(s > m, "S_{r}({t}) = {s} must exceed M = {m}");
                assert!(l > m, "L_{r}({t}) = {l} must exceed M = {m}");
            }
            // Curves meet at the endpoints.
            assert!((s_curve(r, 0.0).unwrap() - m_curve(r, 0.0).unwrap()).abs() < 1e-12);
            assert!((s_curve(r, 1.0).unwrap() - m_curve(r, 1.0).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn s_minus_m_peak_location() {
        let (t, gap) = s_minus_m_argmax(1, 0.001).unwrap();
        assert!((t - 0.721).abs() < 0.01, "argmax at {t}");
        assert!(gap > 0.0);
    }

    #[test]
    fn curves_flatten_for_large_r() {
        // All three limits approach t - 2 as r grows.
        for k in 1..=9 {
            let t = 0.1 * k as f64;
            let target = t - 2.0;
            for f in [m_curve, s_curve, l_curve] {
                let v = f(400, t).unwrap();
                assert!(
                    (v - target).abs() < 0.02,
                    "curve at r=400, t={t}: {v} vs {target}"
                );
            }
        }
    }

    #[test]
    fn lms_counterexample_closed_form_n2() {
        // Directly evaluate the two factor types at n = 2.
        let base: f64 = 0.5;
        let top = 0.5 * base + 0.5 * base; // both exponents are 1
        let bottom: f64 = 0.5; // (1 - 1/2)^0 = 1
        let expect = 2.0 * top.ln() + 1.0 * bottom.ln();
        assert!((log_lms_counterexample(2).unwrap() - expect).abs() < 1e-14);
        assert!(log_lms_counterexample(5).is_err());
    }

    #[test]
    fn prob2_sandwich_brackets_the_derangement_ratio() {
        // r = 2: the boolean probability is the derangement ratio D_n/n!.
        for n in [4usize, 6, 10] {
            let (lower, upper) = log_prob2_sandwich(2, n).unwrap();
            // D_n via the alternating-sum recurrence.
            let mut d = 1.0f64; // D_0
            let mut d_prev = 1.0f64;
            for k in 1..=n {
                let next = (k as f64 - 1.0) * (d + if k >= 2 { d_prev } else { 0.0 });
                if k == 1 {
                    d_prev = d;
                    d = 0.0; // D_1
                } else {
                    d_prev = d;
                    d = next;
                }
            }
            let mut log_ratio = d.ln();
            for k in 1..=n {
                log_ratio -= (k as f64).ln();
            }
            assert!(
                lower <= log_ratio && log_ratio <= upper,
                "n={n}: {lower} <= {log_ratio} <= {upper}"
            );
        }
        // r = 1: empty products, probability exactly 1.
        let (lo, hi) = log_prob2_sandwich(1, 5).unwrap();
        assert_eq!((lo, hi), (0.0, 0.0));
        // Both sides flatten toward -r(r-1)/2 for large n.
        let (lo, hi) = log_prob2_sandwich(3, 4000).unwrap();
        assert!((lo - (-3.0)).abs() < 0.01 && (hi - (-3.0)).abs() < 0.01);
    }
}
