//! Log-log least-squares power-law fits.

use serde::Serialize;

/// Fits with fewer points or lower R² are flagged.
pub const MIN_SAMPLES: usize = 4;
pub const MIN_R_SQUARED: f64 = 0.9;

/// `log y = slope · log x + intercept`
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub slope: f64,
    pub std_error: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub samples: usize,
    /// Range of x covered by the fit.
    pub domain: (f64, f64),
    pub low_confidence: bool,
}

/// Returns `None` with fewer than two usable (positive, finite) points.
pub fn power_law_fit(xs: &[f64], ys: &[f64]) -> Option<FitResult> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| x.is_finite() && y.is_finite() && **x > 0.0 && **y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    let n = pts.len();
    if n < 2 {
        return None;
    }
    let nf = n as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let r_squared = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    let std_error = if n > 2 { (sse / (nf - 2.0) / sxx).sqrt() } else { f64::NAN };
    let lo = pts.iter().map(|p| p.0.exp()).fold(f64::INFINITY, f64::min);
    let hi = pts.iter().map(|p| p.0.exp()).fold(f64::NEG_INFINITY, f64::max);
    Some(FitResult {
        slope,
        std_error,
        intercept,
        r_squared,
        samples: n,
        domain: (lo, hi),
        low_confidence: n < MIN_SAMPLES || r_squared < MIN_R_SQUARED,
    })
}
