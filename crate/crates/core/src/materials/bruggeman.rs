use crate::error::{invalid, Error, Result};

/// Effective conductivity of a two-phase mixture from the symmetric
/// Bruggeman rule
///
/// `δ₁(σ₁−σₑ)/(σ₁+2σₑ) + δ₂(σ₂−σₑ)/(σ₂+2σₑ) = 0`, `δ₂ = 1 − δ₁`.
///
/// Multiplying out gives `2σₑ² − bσₑ − σ₁σ₂ = 0` with
/// `b = (3δ₁−1)σ₁ + (3δ₂−1)σ₂`; the positive root is taken in whichever
/// algebraic form avoids cancellation.
pub fn bruggeman_effective(sigma1: f64, sigma2: f64, delta1: f64) -> Result<f64> {
    if !(sigma1 > 0.0 && sigma1.is_finite()) {
        return Err(invalid(format!("sigma1 must be positive, got {sigma1}")));
    }
    if !(sigma2 >= 0.0) || sigma2.is_nan() {
        return Err(invalid(format!("sigma2 must be non-negative, got {sigma2}")));
    }
    if !(0.0..=1.0).contains(&delta1) {
        return Err(invalid(format!("volume fraction must lie in [0, 1], got {delta1}")));
    }
    let root = closed_form(sigma1, sigma2, delta1);
    if root.is_finite() && root > 0.0 {
        return Ok(root);
    }
    bisect(sigma1, sigma2, delta1)
        .ok_or_else(|| Error::Internal(format!("no positive Bruggeman root for σ₁={sigma1}, σ₂={sigma2}")))
}

fn closed_form(sigma1: f64, sigma2: f64, delta1: f64) -> f64 {
    let delta2 = 1.0 - delta1;
    let b = (3.0 * delta1 - 1.0) * sigma1 + (3.0 * delta2 - 1.0) * sigma2;
    let c = sigma1 * sigma2;
    let disc = (b * b + 8.0 * c).sqrt();
    if b >= 0.0 {
        (b + disc) / 4.0
    } else {
        2.0 * c / (disc - b)
    }
}

fn residual(sigma1: f64, sigma2: f64, delta1: f64, se: f64) -> f64 {
    let delta2 = 1.0 - delta1;
    delta1 * (sigma1 - se) / (sigma1 + 2.0 * se) + delta2 * (sigma2 - se) / (sigma2 + 2.0 * se)
}

// The residual is strictly decreasing in σₑ on (0, ∞).
fn bisect(sigma1: f64, sigma2: f64, delta1: f64) -> Option<f64> {
    let mut lo = 0.0f64;
    let mut hi = sigma1.max(sigma2).max(f64::MIN_POSITIVE);
    if !hi.is_finite() {
        return None;
    }
    if residual(sigma1, sigma2, delta1, hi) > 0.0 {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if residual(sigma1, sigma2, delta1, mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let root = 0.5 * (lo + hi);
    (root > 0.0).then_some(root)
}

/// `∂σₑ/∂σ₂` at a solution of the mixing rule (implicit differentiation).
pub fn bruggeman_sensitivity(sigma1: f64, sigma2: f64, delta1: f64, se: f64) -> f64 {
    let delta2 = 1.0 - delta1;
    let a1 = sigma1 + 2.0 * se;
    let a2 = sigma2 + 2.0 * se;
    let num = delta2 * se / (a2 * a2);
    let den = delta1 * sigma1 / (a1 * a1) + delta2 * sigma2 / (a2 * a2);
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}
