//! Browser demo bindings: three interactive views over the core library,
//! each returning a JSON string for the static page in `www/` to plot.
//!
//! Build with `wasm-pack build --target web --out-dir www/pkg` and serve
//! the `www/` directory.

use permabound::bethe::maximize_bethe_traced;
use permabound::curves::{g_curve, l_curve, m_curve, s_curve, s_minus_m_argmax};
use permabound::exact::log_perm_counterexample;
use permabound::matrix::io;
use permabound::report::{finite_or_str, BoundReport};
use serde_json::json;
use wasm_bindgen::prelude::*;

fn err_json(message: impl std::fmt::Display) -> String {
    json!({"error": message.to_string()}).to_string()
}

/// Counterexample-family scan: per, LMS and SD of the bordered matrices
/// over even n, with both crossover points.
#[wasm_bindgen]
pub fn crossover_scan(n_min: usize, n_max: usize) -> String {
    match crossover_scan_impl(n_min, n_max) {
        Ok(v) => v,
        Err(e) => err_json(e),
    }
}

fn crossover_scan_impl(n_min: usize, n_max: usize) -> permabound::Result<String> {
    use permabound::curves::{log_lms_counterexample, log_sd_counterexample};
    let start = n_min.max(2) + n_min.max(2) % 2;
    let mut rows = Vec::new();
    let mut lms_crossover: Option<usize> = None;
    let mut sd_crossover: Option<usize> = None;
    let mut n = start;
    while n <= n_max.min(400) {
        let per = log_perm_counterexample(n)?.ln();
        let lms = log_lms_counterexample(n)?;
        let sd = log_sd_counterexample(n)?;
        if lms > per && lms_crossover.is_none() {
            lms_crossover = Some(n);
        }
        if sd > per && sd_crossover.is_none() {
            sd_crossover = Some(n);
        }
        rows.push(json!({"n": n, "log_per": per, "log_lms": lms, "log_sd": sd}));
        n += 2;
    }
    Ok(json!({
        "rows": rows,
        "lms_crossover": lms_crossover,
        "sd_crossover": sd_crossover,
    })
    .to_string())
}

/// The four limit curves g_r, M_r, S_r, L_r sampled over t in [0, 1],
/// plus the argmax of S_r - M_r.
#[wasm_bindgen]
pub fn limit_curves(r: usize, steps: usize) -> String {
    match limit_curves_impl(r, steps) {
        Ok(v) => v,
        Err(e) => err_json(e),
    }
}

fn limit_curves_impl(r: usize, steps: usize) -> permabound::Result<String> {
    let steps = steps.clamp(10, 5000);
    let mut rows = Vec::new();
    for k in 0..=steps {
        let t = k as f64 / steps as f64;
        rows.push(json!({
            "t": t,
            "g": g_curve(r, t)?,
            "m": m_curve(r, t)?,
            "s": s_curve(r, t)?,
            "l": l_curve(r, t)?,
        }));
    }
    let (argmax_t, gap) = s_minus_m_argmax(r, 0.001)?;
    Ok(json!({"r": r, "rows": rows, "argmax_t": argmax_t, "argmax_gap": gap}).to_string())
}

/// Bound ledger for a user-entered CSV matrix (capped at n = 12 to keep
/// the exact permanent interactive), plus the Frank-Wolfe ascent trace.
#[wasm_bindgen]
pub fn bound_ledger(matrix_csv: &str) -> String {
    match bound_ledger_impl(matrix_csv) {
        Ok(v) => v,
        Err(e) => err_json(e),
    }
}

fn bound_ledger_impl(matrix_csv: &str) -> permabound::Result<String> {
    let matrix = io::read_csv_str(matrix_csv)?;
    if matrix.n() > 12 {
        return Err(permabound::Error::TooLarge {
            what: "demo ledger",
            n: matrix.n(),
            cap: 12,
        });
    }
    let report = BoundReport::compute("input", &matrix, 1e-8, 2000)?;
    let mut trace = Vec::new();
    let fw = if matrix.support_pattern().has_perfect_matching() {
        let r = maximize_bethe_traced(&matrix, 1e-8, 2000, Some(&mut trace))?;
        json!({
            "value": r.value,
            "duality_gap": r.duality_gap,
            "iterations": r.iterations,
            "converged": r.converged,
        })
    } else {
        serde_json::Value::Null
    };
    Ok(json!({
        "report": report.to_json(),
        "frank_wolfe": fw,
        "trace": trace.iter().map(|row| json!({
            "iteration": row.iteration,
            "value": finite_or_str(row.value),
            "gap": finite_or_str(row.gap),
        })).collect::<Vec<_>>(),
    })
    .to_string())
}

/// Doubly stochastic scaling of a CSV matrix, for the ledger view.
#[wasm_bindgen]
pub fn sinkhorn_csv(matrix_csv: &str) -> String {
    let inner = || -> permabound::Result<String> {
        let matrix = io::read_csv_str(matrix_csv)?;
        let (scaled, _) = matrix.sinkhorn_scale(1e-10, 100_000)?;
        Ok(io::to_csv_string(&scaled))
    };
    match inner() {
        Ok(v) => v,
        Err(e) => err_json(e),
    }
}
