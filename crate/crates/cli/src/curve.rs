//! Analytic bias/MSE profile of the minMSE weight as the mean gap grows.

use std::io::Write;

use dynborrow::posterior::{mse_profile, optimal_a};
use serde::Serialize;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveRow {
    pub delta: f64,
    pub a_star: f64,
    pub bias: f64,
    pub bias_sq: f64,
    pub variance: f64,
    pub mse: f64,
    /// Row where the squared bias at the optimal weight peaks.
    pub bias_max: bool,
}

/// `steps + 1` equispaced gaps on `[0, delta_max]`, plus the bias peak
/// `δ = √(σ0² + σ1²)/η` inserted in order when it falls inside the range.
pub fn curve(sigma0: f64, sigma1: f64, delta_max: f64, eta: f64, steps: usize) -> Result<Vec<CurveRow>> {
    let mut bad = Vec::new();
    if !(sigma0 > 0.0 && sigma0.is_finite()) {
        bad.push(format!("--sigma0: must be positive, got {sigma0}"));
    }
    if !(sigma1 > 0.0 && sigma1.is_finite()) {
        bad.push(format!("--sigma1: must be positive, got {sigma1}"));
    }
    if !(delta_max >= 0.0 && delta_max.is_finite()) {
        bad.push(format!("--delta-max: must be non-negative, got {delta_max}"));
    }
    if !(eta >= 0.0 && eta.is_finite()) {
        bad.push(format!("--eta: must be non-negative, got {eta}"));
    }
    if steps == 0 {
        bad.push("--steps: must be at least 1".into());
    }
    if !bad.is_empty() {
        return Err(CliError::Config(bad));
    }
    let (v0, v1) = (sigma0 * sigma0, sigma1 * sigma1);
    let mut deltas: Vec<f64> = (0..=steps).map(|k| delta_max * k as f64 / steps as f64).collect();
    let peak = (eta > 0.0).then(|| (v0 + v1).sqrt() / eta);
    if let Some(p) = peak.filter(|p| *p <= delta_max) {
        if !deltas.contains(&p) {
            let at = deltas.partition_point(|d| *d < p);
            deltas.insert(at, p);
        }
    }
    deltas
        .into_iter()
        .map(|d| {
            let a = optimal_a(v0, v1, d, eta)?;
            // Report the actual MSE; η only tunes which weight is chosen.
            let prof = mse_profile(a, v0, v1, d, 1.0);
            Ok(CurveRow {
                delta: d,
                a_star: a,
                bias: prof.bias,
                bias_sq: prof.bias * prof.bias,
                variance: prof.variance,
                mse: prof.mse,
                bias_max: peak == Some(d),
            })
        })
        .collect()
}

pub fn write_curve<W: Write>(rows: &[CurveRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
