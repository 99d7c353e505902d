use crate::error::{invalid, Error, Result};
use crate::fem::{avg_dtn_pairing, BoundaryPotential, FemSpace, NewtonOptions};
use crate::materials::MaterialField;

/// Halvings tried by [`select_scaling`].
pub const MAX_HALVINGS: u32 = 60;

/// Largest `λ = λ_init·2^(−m)` with
/// `⟨Λ̄_T(λf), λf⟩ / λ² ≥ ½ fᵀK_T f − α|c₀|`.
///
/// `lower_form` is `fᵀK_T f` for the linear lower-bound field. A solver
/// failure at some `λ` counts as inadmissible.
#[allow(clippy::too_many_arguments)]
pub fn select_scaling(
    space: &FemSpace,
    f: &BoundaryPotential,
    t_field: &MaterialField,
    lower_form: f64,
    c0: f64,
    alpha: f64,
    lambda_init: f64,
    opts: &NewtonOptions,
) -> Result<f64> {
    select_scaling_with_energy(space, f, t_field, lower_form, c0, alpha, lambda_init, opts).map(|(l, _)| l)
}

/// [`select_scaling`] also returning `⟨Λ̄_T(λf), λf⟩` at the accepted `λ`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn select_scaling_with_energy(
    space: &FemSpace,
    f: &BoundaryPotential,
    t_field: &MaterialField,
    lower_form: f64,
    c0: f64,
    alpha: f64,
    lambda_init: f64,
    opts: &NewtonOptions,
) -> Result<(f64, f64)> {
    if !(c0 < 0.0) {
        return Err(invalid(format!("c0 must be negative, got {c0}")));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(invalid(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    if !(lambda_init > 0.0 && lambda_init.is_finite()) {
        return Err(invalid(format!("initial scaling must be positive, got {lambda_init}")));
    }
    let target = 0.5 * lower_form - alpha * c0.abs();
    let mut lambda = lambda_init;
    for m in 0..=MAX_HALVINGS {
        let trial = f.clone().with_scale(lambda);
        match avg_dtn_pairing(space, t_field, &trial, opts) {
            Ok(energy) if energy / (lambda * lambda) >= target => {
                log::trace!("scaling accepted lambda={lambda:.6e} after {m} halvings");
                return Ok((lambda, energy));
            }
            Ok(_) => {}
            Err(e @ Error::InvalidArgument(_)) => return Err(e),
            Err(e) => log::debug!("scaling trial lambda={lambda:.3e} failed: {e}"),
        }
        lambda *= 0.5;
    }
    Err(Error::SelectionFailure { halvings: MAX_HALVINGS })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{dtn_pairing, schur_from_coefficients};
    use crate::geometry::build_disk_mesh;
    use crate::materials::{MaterialLaw, OutsideRule};

    fn space() -> FemSpace {
        FemSpace::new(&build_disk_mesh(1.0, 8).unwrap()).unwrap()
    }

    #[test]
    fn linear_field_accepts_initial() {
        let s = space();
        let coeff: Vec<f64> = (0..s.element_count()).map(|e| 1.0 + (e % 3) as f64).collect();
        let field = MaterialField::linear(coeff.clone()).unwrap();
        let k = schur_from_coefficients(&s, &coeff).unwrap();
        let f = BoundaryPotential::from_angle(&s, |t| t.cos()).unwrap();
        let form = k.quadratic_form(f.values());
        let lambda = select_scaling(&s, &f, &field, form, -0.01 * form, 0.5, 3.0, &NewtonOptions::default()).unwrap();
        assert_eq!(lambda, 3.0);
    }

    #[test]
    fn decreasing_law_selection_is_sharp() {
        // γ = 1 + 1/(1+s²) falls from 2 to 1, so the scaled pairing falls with λ
        let s = space();
        let n = s.element_count();
        let law = MaterialLaw::custom("softening", |x| {
            let q = 1.0 + x * x;
            (1.0 + 1.0 / q, -2.0 * x / (q * q))
        });
        let field = MaterialField::with_anomaly(vec![1.0; n], vec![true; n], law, OutsideRule::Background).unwrap();
        let f = BoundaryPotential::from_angle(&s, |t| t.cos()).unwrap();
        let opts = NewtonOptions::default();
        let unit = dtn_pairing(&s, &MaterialField::uniform(n, 1.0).unwrap(), &f, &opts).unwrap();
        let lower = 1.5 * unit;
        let c0 = -0.1 * unit;
        let lambda = select_scaling(&s, &f, &field, lower, c0, 0.5, 64.0, &opts).unwrap();
        assert!(lambda < 64.0);
        let check = |l: f64| avg_dtn_pairing(&s, &field, &f.clone().with_scale(l), &opts).unwrap() / (l * l);
        let target = 0.5 * lower - 0.5 * c0.abs();
        assert!(check(lambda) >= target);
        assert!(check(2.0 * lambda) < target);
    }

    #[test]
    fn impossible_target_fails() {
        let s = space();
        let field = MaterialField::uniform(s.element_count(), 1.0).unwrap();
        let f = BoundaryPotential::from_angle(&s, |t| t.cos()).unwrap();
        let err = select_scaling(&s, &f, &field, 1e6, -1.0, 0.5, 1.0, &NewtonOptions::default()).unwrap_err();
        assert!(matches!(err, Error::SelectionFailure { halvings: 60 }));
    }
}
