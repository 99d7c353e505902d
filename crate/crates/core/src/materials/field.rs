use super::law::{MaterialLaw, ENERGY_REL_TOL};
use super::quadrature::integrate;
use crate::error::{invalid, Result};

/// Coefficient used on elements outside the anomaly mask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutsideRule {
    /// The linear background.
    #[default]
    Background,
    /// `min(γ_bg, γ_nl(s))`, for test anomalies whose law may dip below the background.
    MinWithAnomaly,
}

/// Piecewise-constant-per-element coefficient `γ(x, s)`.
#[derive(Debug, Clone)]
pub struct MaterialField {
    background: Vec<f64>,
    mask: Vec<bool>,
    anomaly: Option<MaterialLaw>,
    outside: OutsideRule,
}

fn check_background(background: &[f64]) -> Result<()> {
    match background.iter().position(|c| !(*c > 0.0 && c.is_finite())) {
        Some(e) => Err(invalid(format!("background coefficient of element {e} is {}", background[e]))),
        None => Ok(()),
    }
}

impl MaterialField {
    /// Linear field with one coefficient per element.
    pub fn linear(coefficients: Vec<f64>) -> Result<Self> {
        check_background(&coefficients)?;
        let n = coefficients.len();
        Ok(Self { background: coefficients, mask: vec![false; n], anomaly: None, outside: OutsideRule::Background })
    }

    pub fn uniform(elements: usize, c: f64) -> Result<Self> {
        Self::linear(vec![c; elements])
    }

    /// Linear field equal to `inside` on masked elements and the background elsewhere.
    pub fn linear_inclusion(background: &[f64], mask: &[bool], inside: f64) -> Result<Self> {
        if background.len() != mask.len() {
            return Err(invalid("mask and background differ in length"));
        }
        Self::linear(background.iter().zip(mask).map(|(&b, &m)| if m { inside } else { b }).collect())
    }

    pub fn with_anomaly(background: Vec<f64>, mask: Vec<bool>, law: MaterialLaw, outside: OutsideRule) -> Result<Self> {
        check_background(&background)?;
        if background.len() != mask.len() {
            return Err(invalid(format!(
                "mask has {} entries for {} elements",
                mask.len(),
                background.len()
            )));
        }
        Ok(Self { background, mask, anomaly: Some(law), outside })
    }

    pub fn element_count(&self) -> usize {
        self.background.len()
    }

    pub fn background(&self) -> &[f64] {
        &self.background
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn anomaly(&self) -> Option<&MaterialLaw> {
        self.anomaly.as_ref()
    }

    pub fn outside_rule(&self) -> OutsideRule {
        self.outside
    }

    /// Per-element coefficients when the field does not depend on `s`.
    pub fn linear_coefficients(&self) -> Option<Vec<f64>> {
        let Some(law) = &self.anomaly else {
            return Some(self.background.clone());
        };
        let MaterialLaw::Linear { c } = law else { return None };
        Some(
            (0..self.element_count())
                .map(|e| match (self.mask[e], self.outside) {
                    (true, _) => *c,
                    (false, OutsideRule::Background) => self.background[e],
                    (false, OutsideRule::MinWithAnomaly) => self.background[e].min(*c),
                })
                .collect(),
        )
    }

    pub fn is_linear(&self) -> bool {
        self.anomaly.as_ref().is_none_or(MaterialLaw::is_linear)
    }

    fn outside_law(&self, e: usize) -> Option<&MaterialLaw> {
        match (self.outside, &self.anomaly) {
            (OutsideRule::MinWithAnomaly, Some(law)) if law.infimum().is_none_or(|inf| inf < self.background[e]) => {
                Some(law)
            }
            _ => None,
        }
    }

    /// `(γ, ∂γ/∂s)` on element `e` at field magnitude `s`.
    pub fn coefficient(&self, e: usize, s: f64) -> (f64, f64) {
        let bg = self.background[e];
        match &self.anomaly {
            Some(law) if self.mask[e] => law.value_and_slope(s),
            _ => match self.outside_law(e) {
                Some(law) => {
                    let (g, d) = law.value_and_slope(s);
                    if g < bg {
                        (g, d)
                    } else {
                        (bg, 0.0)
                    }
                }
                None => (bg, 0.0),
            },
        }
    }

    /// `Q` on element `e`.
    pub fn energy_density(&self, e: usize, s: f64) -> f64 {
        let bg = self.background[e];
        match &self.anomaly {
            Some(law) if self.mask[e] => law.energy(s),
            _ => match self.outside_law(e) {
                Some(law) if s > 0.0 => {
                    let mut points = vec![0.0];
                    points.extend(law.breakpoints().into_iter().filter(|&b| b > 0.0 && b < s));
                    points.push(s);
                    integrate(|eta| law.value(eta).min(bg) * eta, &points, ENERGY_REL_TOL)
                }
                _ => 0.5 * bg * s * s,
            },
        }
    }
}
