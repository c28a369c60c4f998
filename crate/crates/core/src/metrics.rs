//! Error measures and the Hölder-rate fit.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{Field, FieldError};

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("true solution vanishes identically, relative error is undefined")]
    ZeroTruth,
    #[error("need at least {needed} samples for a fit, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("fit samples must span at least two distinct noise levels")]
    DegenerateSpan,
    #[error("fit samples must be positive and finite")]
    InvalidSample,
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Discrete L² norm `sqrt(Δx Δy Σ v²)` over all nodes.
pub fn l2_norm(v: &Field) -> f64 {
    let g = v.grid();
    (g.dx() * g.dy() * v.values().iter().map(|a| a * a).sum::<f64>()).sqrt()
}

pub fn l2_error(computed: &Field, truth: &Field) -> Result<f64, MetricsError> {
    Ok(l2_norm(&computed.sub(truth)?))
}

/// Relative L² error in percent.
pub fn relative_error(computed: &Field, truth: &Field) -> Result<f64, MetricsError> {
    let denom = l2_norm(truth);
    if denom == 0.0 {
        return Err(MetricsError::ZeroTruth);
    }
    Ok(100.0 * l2_error(computed, truth)? / denom)
}

/// Discrete L² error on the single line `x = 1`.
pub fn final_line_l2_error(computed: &Field, truth: &Field) -> Result<f64, MetricsError> {
    let d = computed.sub(truth)?;
    let g = d.grid();
    Ok((g.dy() * d.line(g.m).iter().map(|a| a * a).sum::<f64>()).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub l2: f64,
    pub rel_pct: f64,
}

impl ErrorReport {
    pub fn compute(computed: &Field, truth: &Field) -> Result<Self, MetricsError> {
        Ok(Self { l2: l2_error(computed, truth)?, rel_pct: relative_error(computed, truth)? })
    }
}

/// Least-squares fit of `log err² = intercept + slope · log γ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HolderFit {
    pub slope: f64,
    pub intercept: f64,
    /// Predicted exponent `7C₁/3 − 2` at `x = 1`.
    pub predicted: f64,
    /// Same fit on `log err` (half of `slope`).
    pub slope_unsquared: f64,
    /// `log₁₀(γ_max / γ_min)`.
    pub span_decades: f64,
    pub samples: usize,
}

/// Fits squared errors against `γ`. Samples are `(γ, err²)` pairs, at least
/// three, covering at least two distinct `γ`.
pub fn fit_holder_rate(samples: &[(f64, f64)], c1: f64) -> Result<HolderFit, MetricsError> {
    if samples.len() < 3 {
        return Err(MetricsError::TooFewSamples { needed: 3, got: samples.len() });
    }
    if samples.iter().any(|&(g, e)| !(g.is_finite() && e.is_finite() && g > 0.0 && e > 0.0)) {
        return Err(MetricsError::InvalidSample);
    }
    let pts: Vec<(f64, f64)> = samples.iter().map(|&(g, e)| (g.ln(), e.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let (lo, hi) = pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.0), b.max(p.0)));
    if hi - lo < 1e-9 || sxx == 0.0 {
        return Err(MetricsError::DegenerateSpan);
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    Ok(HolderFit {
        slope,
        intercept: my - slope * mx,
        predicted: 7.0 * c1 / 3.0 - 2.0,
        slope_unsquared: slope / 2.0,
        span_decades: (hi - lo) / std::f64::consts::LN_10,
        samples: samples.len(),
    })
}

/// Median of a non-empty slice; NaNs sort last.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) })
}
