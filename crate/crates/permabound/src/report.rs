//! Per-matrix bound ledgers.

use crate::bethe::maximize_bethe;
use crate::bounds::{self, log_cpr, log_f, log_gurvits_bound, log_lms, log_sd, HolderVariant};
use crate::curves::log_vdw;
use crate::exact::{permanent_ryser, SUBPERM_CAP};
use crate::numeric::LogValue;
use crate::{Matrix, Result};
use serde_json::{json, Value};

/// One matrix's ledger: exact permanent (when feasible) and every bound,
/// all in natural-log domain.
#[derive(Debug, Clone)]
pub struct BoundReport {
    pub matrix_id: String,
    pub n: usize,
    pub log_per_exact: Option<LogValue>,
    pub log_f: f64,
    pub log_max_cw: Option<f64>,
    pub log_lms: f64,
    pub log_sd: f64,
    pub log_vdw: f64,
    pub log_bregman: Option<f64>,
    pub log_holder_upper: Option<f64>,
    pub log_cpr_bound: f64,
    pub log_gurvits_bound: f64,
}

impl BoundReport {
    /// Build the full ledger. The exact permanent is included iff
    /// `n <= 22`; the Bethe maximum iff the support has a perfect matching;
    /// Bregman iff the matrix is boolean.
    pub fn compute(
        matrix_id: impl Into<String>,
        p: &Matrix,
        tol: f64,
        max_iter: usize,
    ) -> Result<BoundReport> {
        let n = p.n();
        let log_per_exact = if n <= SUBPERM_CAP {
            Some(permanent_ryser(p)?)
        } else {
            None
        };
        let log_max_cw = if p.support_pattern().has_perfect_matching() {
            Some(maximize_bethe(p, tol, max_iter)?.value)
        } else {
            None
        };
        let log_bregman = if p.is_boolean() {
            bounds::log_bregman_upper(p).ok()
        } else {
            None
        };
        Ok(BoundReport {
            matrix_id: matrix_id.into(),
            n,
            log_per_exact,
            log_f: log_f(p)?,
            log_max_cw,
            log_lms: log_lms(p)?,
            log_sd: log_sd(p)?,
            log_vdw: log_vdw(n)?,
            log_bregman,
            log_holder_upper: bounds::log_holder_upper(p, HolderVariant::RowSumSquared).ok(),
            log_cpr_bound: bounds::log_cpr_product(p)?,
            log_gurvits_bound: log_gurvits_bound(p)?,
        })
    }

    /// Chain violations (empty when everything is consistent):
    /// `log_per >= log_max_cw >= log_f` and `LMS, SD >= F` for doubly
    /// stochastic inputs.
    pub fn chain_violations(&self, doubly_stochastic: bool) -> Vec<String> {
        let mut out = Vec::new();
        if let (Some(per), Some(cw)) = (self.log_per_exact, self.log_max_cw) {
            if per.ln() < cw - 1e-7 {
                out.push(format!("log per {} below Bethe maximum {}", per.ln(), cw));
            }
            if doubly_stochastic && cw < self.log_f - 1e-7 {
                out.push(format!("Bethe maximum {cw} below log F {}", self.log_f));
            }
        }
        if doubly_stochastic {
            if self.log_lms < self.log_f - 1e-12 {
                out.push(format!("LMS {} below log F {}", self.log_lms, self.log_f));
            }
            if self.log_sd < self.log_f - 1e-12 {
                out.push(format!("SD {} below log F {}", self.log_sd, self.log_f));
            }
        }
        out
    }

    /// JSON with fixed field names; non-finite numbers are encoded as the
    /// strings "nan" / "-inf" / "inf".
    pub fn to_json(&self) -> Value {
        json!({
            "matrix_id": self.matrix_id,
            "n": self.n,
            "log_per_exact": self.log_per_exact.map(|v| finite_or_str(v.ln())).unwrap_or(Value::Null),
            "log_F": finite_or_str(self.log_f),
            "log_max_cw": self.log_max_cw.map(finite_or_str).unwrap_or(Value::Null),
            "log_lms": finite_or_str(self.log_lms),
            "log_sd": finite_or_str(self.log_sd),
            "log_vdw": finite_or_str(self.log_vdw),
            "log_bregman": self.log_bregman.map(finite_or_str).unwrap_or(Value::Null),
            "log_holder_upper": self.log_holder_upper.map(finite_or_str).unwrap_or(Value::Null),
            "log_cpr_bound": finite_or_str(self.log_cpr_bound),
            "log_gurvits_bound": finite_or_str(self.log_gurvits_bound),
        })
    }

    /// One CSV line matching [`Self::csv_header`].
    pub fn to_csv_line(&self) -> String {
        let cells = [
            self.matrix_id.clone(),
            self.n.to_string(),
            opt_num(self.log_per_exact.map(|v| v.ln())),
            num(self.log_f),
            opt_num(self.log_max_cw),
            num(self.log_lms),
            num(self.log_sd),
            num(self.log_vdw),
            opt_num(self.log_bregman),
            opt_num(self.log_holder_upper),
            num(self.log_cpr_bound),
            num(self.log_gurvits_bound),
        ];
        cells.join(",")
    }

    pub fn csv_header() -> &'static str {
        "matrix_id,n,log_per_exact,log_F,log_max_cw,log_lms,log_sd,log_vdw,log_bregman,log_holder_upper,log_cpr_bound,log_gurvits_bound"
    }
}

/// Column products per column, handy for diagnostics.
pub fn cpr_columns(p: &Matrix) -> Result<Vec<f64>> {
    (0..p.n()).map(|j| log_cpr(p, j)).collect()
}

/// f64 to JSON, mapping non-finite values to the strings
/// "nan" / "-inf" / "inf".
pub fn finite_or_str(v: f64) -> Value {
    if v.is_nan() {
        Value::String("nan".into())
    } else if v == f64::NEG_INFINITY {
        Value::String("-inf".into())
    } else if v == f64::INFINITY {
        Value::String("inf".into())
    } else {
        json!(v)
    }
}

/// Decimal with 17 significant digits (round-trips any f64).
pub fn num(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else if v == f64::INFINITY {
        "inf".into()
    } else {
        format!("{v:.16e}")
    }
}

fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}
