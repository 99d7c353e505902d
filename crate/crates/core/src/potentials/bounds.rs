use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::materials::{MaterialBounds, MaterialField, MaterialLaw, OutsideRule};

/// Relation between the nonlinear law and the background.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// `c_nl^l > c_bg^u`: the nonlinear law stays above the background.
    Separated,
    /// The nonlinear law crosses the background; bounds hold only below `s_M`.
    Intersecting,
}

/// Linear comparison fields of one (test anomaly, fictitious anomaly) pair.
#[derive(Debug, Clone)]
pub struct BoundingLaws {
    /// Upper bound of the anomaly constant on `F`, background elsewhere.
    pub upper_f: MaterialField,
    /// Lower bound on `T`, background elsewhere.
    pub lower_t: MaterialField,
}

/// Builds the two linear fields from element masks of `T` and `F`.
///
/// `gamma_l` is the lower bound used on `T` in the intersecting regime; it
/// must exceed every background value.
pub fn build_bounding_laws(
    mask_t: &[bool],
    mask_f: &[bool],
    bounds: MaterialBounds,
    background: &[f64],
    regime: Regime,
    gamma_l: f64,
) -> Result<BoundingLaws> {
    if mask_t.len() != background.len() || mask_f.len() != background.len() {
        return Err(invalid("masks and background differ in length"));
    }
    let lower = match regime {
        Regime::Separated => bounds.lower,
        Regime::Intersecting => {
            let bg_max = background.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if !(gamma_l > bg_max) {
                return Err(invalid(format!(
                    "lower bound {gamma_l} does not exceed the background maximum {bg_max}"
                )));
            }
            gamma_l
        }
    };
    Ok(BoundingLaws {
        upper_f: MaterialField::linear_inclusion(background, mask_f, bounds.upper)?,
        lower_t: MaterialField::linear_inclusion(background, mask_t, lower)?,
    })
}

/// Test-anomaly material: the nonlinear law on `T`; outside, the background
/// (separated regime) or `min(γ_bg, γ_nl)` (intersecting regime).
pub fn test_anomaly_field(background: &[f64], mask_t: &[bool], law: &MaterialLaw, regime: Regime) -> Result<MaterialField> {
    let outside = match regime {
        Regime::Separated => OutsideRule::Background,
        Regime::Intersecting => OutsideRule::MinWithAnomaly,
    };
    MaterialField::with_anomaly(background.to_vec(), mask_t.to_vec(), law.clone(), outside)
}
