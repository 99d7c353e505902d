//! Laws and constants for the two reference scenarios.
//!
//! The permeability curve is a smooth synthetic surrogate, not measured data.

use super::analysis::MaterialBounds;
use super::bruggeman::bruggeman_effective;
use super::law::MaterialLaw;

/// Vacuum permeability in H/m.
pub const MU0: f64 = 4.0e-7 * std::f64::consts::PI;

/// Background conductivity of the steady-currents scenario (S/m).
pub const CONDUCTOR_BACKGROUND: f64 = 1e7;
/// Conductivity of the linear phase of the composite (S/m).
pub const MATRIX_SIGMA: f64 = 55.5e6;
/// Volume fraction of the linear phase.
pub const MATRIX_FRACTION: f64 = 0.668;
pub const EJ_E0: f64 = 1e-4;
pub const EJ_JC: f64 = 8e9;
pub const EJ_N: f64 = 27.0;
/// The superconducting phase is capped at this multiple of [`MATRIX_SIGMA`].
pub const EJ_CAP_RATIO: f64 = 1e3;

/// Peak relative permeability of the surrogate.
pub const SURROGATE_PEAK: f64 = 8000.0;
/// Field strength (A/m) of the permeability peak.
pub const SURROGATE_S_PEAK: f64 = 100.0;
/// Offset giving a relative permeability of about 800 at zero field.
pub const SURROGATE_SHIFT: f64 = 0.05;

/// Capped E–J power law of the superconducting phase.
pub fn superconductor() -> MaterialLaw {
    MaterialLaw::power_law_ej(EJ_E0, EJ_JC, EJ_N, EJ_CAP_RATIO * MATRIX_SIGMA).expect("valid constants")
}

/// Bruggeman mixture of copper-like matrix and superconducting filaments.
pub fn composite_conductor() -> MaterialLaw {
    MaterialLaw::bruggeman(MATRIX_FRACTION, MATRIX_SIGMA, superconductor()).expect("valid constants")
}

/// Limits of the mixture for an insulating and a perfectly conducting second phase.
pub fn composite_bounds() -> MaterialBounds {
    let lower = bruggeman_effective(MATRIX_SIGMA, 0.0, MATRIX_FRACTION).expect("valid constants");
    let upper = MATRIX_SIGMA / (MATRIX_FRACTION - 2.0 * (1.0 - MATRIX_FRACTION));
    MaterialBounds::new(lower, upper).expect("ordered")
}

/// Synthetic saturating permeability `μ(H)` in H/m.
pub fn saturating_permeability() -> MaterialLaw {
    MaterialLaw::saturating(MU0, SURROGATE_PEAK, SURROGATE_S_PEAK, SURROGATE_SHIFT).expect("valid constants")
}

/// Bounds `[μ0, peak·μ0]` of [`saturating_permeability`]; the curve tends to
/// `μ0` at large fields.
pub fn permeability_bounds() -> MaterialBounds {
    MaterialBounds::new(MU0, SURROGATE_PEAK * MU0).expect("ordered")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn composite_limits() {
        let b = composite_bounds();
        assert!((b.lower - 2.7861e7).abs() / 2.7861e7 < 5e-4);
        assert!((b.upper - 1.3875e10).abs() / 1.3875e10 < 1e-3);
    }

    #[test]
    fn surrogate_shape() {
        let law = saturating_permeability();
        let mu0 = law.value(0.0) / MU0;
        assert!((700.0..900.0).contains(&mu0), "{mu0}");
        let s_top = SURROGATE_S_PEAK * (1.0 - SURROGATE_SHIFT);
        assert!((law.value(s_top) / MU0 - SURROGATE_PEAK).abs() < 1e-9);
        assert!(law.value(1e9) / MU0 < 1.01);
    }
}
