use std::fmt;
use std::sync::Arc;

use super::bruggeman::{bruggeman_effective, bruggeman_sensitivity};
use super::quadrature::integrate;
use super::tabulated::TabulatedLaw;
use crate::error::{invalid, Result};

/// Relative tolerance of the adaptive quadrature behind [`MaterialLaw::energy_density`].
pub const ENERGY_REL_TOL: f64 = 1e-10;

type LawFn = dyn Fn(f64) -> (f64, f64) + Send + Sync;

/// A user-supplied law returning `(γ(s), γ'(s))`.
#[derive(Clone)]
pub struct CustomLaw {
    name: String,
    f: Arc<LawFn>,
}

impl CustomLaw {
    pub fn name(&self) -> &str {
        &self.name
    }
}

impl fmt::Debug for CustomLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CustomLaw({})", self.name)
    }
}

/// Scalar constitutive law `s ↦ γ(s)`, where `s = |∇u|`.
#[derive(Debug, Clone)]
pub enum MaterialLaw {
    Linear {
        c: f64,
    },
    /// `σ(E) = (Jc/E0)(E/E0)^((1−n)/n)`, held at `σ(s_cap)` for `s < s_cap`.
    PowerLawEj {
        e0: f64,
        jc: f64,
        n: f64,
        s_cap: f64,
    },
    Tabulated(TabulatedLaw),
    /// Two-phase mixture of a linear phase `sigma1` and a nonlinear phase `inner`.
    Bruggeman {
        delta1: f64,
        sigma1: f64,
        inner: Box<MaterialLaw>,
    },
    /// `base · (1 + (peak−1)·2y/(1+y²))` with `y = s/s_peak + shift`.
    Saturating {
        base: f64,
        peak: f64,
        s_peak: f64,
        shift: f64,
    },
    /// `coeff · s^(p−2)`, the p-Laplacian family.
    Monomial {
        coeff: f64,
        p: f64,
    },
    Custom(CustomLaw),
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be positive and finite, got {v}")))
    }
}

impl MaterialLaw {
    pub fn linear(c: f64) -> Result<Self> {
        positive("coefficient", c)?;
        Ok(Self::Linear { c })
    }

    /// Power law capped where it reaches `gamma_max`.
    pub fn power_law_ej(e0: f64, jc: f64, n: f64, gamma_max: f64) -> Result<Self> {
        positive("E0", e0)?;
        positive("Jc", jc)?;
        positive("gamma_max", gamma_max)?;
        if !(n > 1.0 && n.is_finite()) {
            return Err(invalid(format!("power-law exponent must exceed 1, got {n}")));
        }
        let s_cap = e0 * (gamma_max * e0 / jc).powf(n / (1.0 - n));
        Ok(Self::PowerLawEj { e0, jc, n, s_cap })
    }

    pub fn tabulated(samples: &[(f64, f64)]) -> Result<Self> {
        Ok(Self::Tabulated(TabulatedLaw::new(samples)?))
    }

    pub fn bruggeman(delta1: f64, sigma1: f64, inner: MaterialLaw) -> Result<Self> {
        positive("sigma1", sigma1)?;
        if !(0.0..=1.0).contains(&delta1) {
            return Err(invalid(format!("volume fraction must lie in [0, 1], got {delta1}")));
        }
        Ok(Self::Bruggeman { delta1, sigma1, inner: Box::new(inner) })
    }

    pub fn saturating(base: f64, peak: f64, s_peak: f64, shift: f64) -> Result<Self> {
        positive("base", base)?;
        positive("s_peak", s_peak)?;
        if !(peak >= 1.0 && peak.is_finite()) {
            return Err(invalid(format!("relative peak must be at least 1, got {peak}")));
        }
        if !(shift >= 0.0 && shift.is_finite()) {
            return Err(invalid(format!("shift must be non-negative, got {shift}")));
        }
        Ok(Self::Saturating { base, peak, s_peak, shift })
    }

    pub fn monomial(coeff: f64, p: f64) -> Result<Self> {
        positive("coefficient", coeff)?;
        if !(p > 1.0 && p.is_finite()) {
            return Err(invalid(format!("exponent p must exceed 1, got {p}")));
        }
        Ok(Self::Monomial { coeff, p })
    }

    pub fn custom(name: impl Into<String>, f: impl Fn(f64) -> (f64, f64) + Send + Sync + 'static) -> Self {
        Self::Custom(CustomLaw { name: name.into(), f: Arc::new(f) })
    }

    pub fn is_linear(&self) -> bool {
        matches!(self, Self::Linear { .. })
    }

    /// `γ(s)`; rejects negative or non-finite `s`.
    pub fn gamma(&self, s: f64) -> Result<f64> {
        check_s(s)?;
        Ok(self.value(s))
    }

    /// `∫₀^s γ(η)η dη`.
    pub fn energy_density(&self, s: f64) -> Result<f64> {
        check_s(s)?;
        Ok(self.energy(s))
    }

    /// Unchecked `γ(s)` for `s ≥ 0`.
    pub fn value(&self, s: f64) -> f64 {
        self.value_and_slope(s).0
    }

    /// `(γ(s), γ'(s))` for `s ≥ 0`.
    pub fn value_and_slope(&self, s: f64) -> (f64, f64) {
        match self {
            Self::Linear { c } => (*c, 0.0),
            Self::PowerLawEj { e0, jc, n, s_cap } => {
                let expo = (1.0 - n) / n;
                let at = |e: f64| jc / e0 * (e / e0).powf(expo);
                if s <= *s_cap {
                    (at(*s_cap), 0.0)
                } else {
                    let v = at(s);
                    (v, v * expo / s)
                }
            }
            Self::Tabulated(t) => t.eval(s),
            Self::Bruggeman { delta1, sigma1, inner } => {
                let (s2, ds2) = inner.value_and_slope(s);
                let se = bruggeman_effective(*sigma1, s2, *delta1).unwrap_or(f64::NAN);
                (se, bruggeman_sensitivity(*sigma1, s2, *delta1, se) * ds2)
            }
            Self::Saturating { base, peak, s_peak, shift } => {
                let y = s / s_peak + shift;
                let q = 1.0 + y * y;
                let v = base * (1.0 + (peak - 1.0) * 2.0 * y / q);
                let d = base * (peak - 1.0) * 2.0 * (1.0 - y * y) / (q * q) / s_peak;
                (v, d)
            }
            Self::Monomial { coeff, p } => {
                let v = coeff * s.powf(p - 2.0);
                (v, if s > 0.0 { v * (p - 2.0) / s } else { 0.0 })
            }
            Self::Custom(c) => (c.f)(s),
        }
    }

    /// Unchecked `Q(s)` for `s ≥ 0`.
    pub fn energy(&self, s: f64) -> f64 {
        if s == 0.0 {
            return 0.0;
        }
        match self {
            Self::Linear { c } => 0.5 * c * s * s,
            Self::PowerLawEj { e0, jc, n, s_cap } => {
                let cap = self.value(*s_cap);
                if s <= *s_cap {
                    return 0.5 * cap * s * s;
                }
                let m = 1.0 + 1.0 / n;
                let k = jc / e0 * e0.powf((n - 1.0) / n);
                0.5 * cap * s_cap * s_cap + k * (s.powf(m) - s_cap.powf(m)) / m
            }
            Self::Tabulated(t) => t.energy_density(s),
            Self::Saturating { base, peak, s_peak, shift } => {
                let prim = |y: f64| y - y.atan() - 0.5 * shift * (1.0 + y * y).ln();
                let y = s / s_peak + shift;
                0.5 * base * s * s + 2.0 * base * (peak - 1.0) * s_peak * s_peak * (prim(y) - prim(*shift))
            }
            Self::Monomial { coeff, p } => coeff * s.powf(*p) / p,
            Self::Bruggeman { .. } | Self::Custom(_) => {
                let mut points = vec![0.0];
                points.extend(self.breakpoints().into_iter().filter(|&b| b > 0.0 && b < s));
                points.push(s);
                integrate(|eta| self.value(eta) * eta, &points, ENERGY_REL_TOL)
            }
        }
    }

    /// A lower bound of `γ` over `[0, ∞)` when one is known in closed form.
    pub fn infimum(&self) -> Option<f64> {
        match self {
            Self::Linear { c } => Some(*c),
            Self::PowerLawEj { .. } => Some(0.0),
            Self::Tabulated(t) => t.samples().map(|p| p.1).reduce(f64::min),
            Self::Bruggeman { delta1, sigma1, inner } => {
                inner.infimum().and_then(|v| bruggeman_effective(*sigma1, v, *delta1).ok())
            }
            Self::Saturating { base, .. } => Some(*base),
            Self::Monomial { coeff, p } => Some(if *p == 2.0 { *coeff } else { 0.0 }),
            Self::Custom(_) => None,
        }
    }

    /// Abscissae where the law is not smooth.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            Self::PowerLawEj { s_cap, .. } => vec![*s_cap],
            Self::Tabulated(t) => t.knots().to_vec(),
            Self::Bruggeman { inner, .. } => inner.breakpoints(),
            _ => Vec::new(),
        }
    }
}

fn check_s(s: f64) -> Result<()> {
    if s >= 0.0 && s.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("field magnitude must be finite and non-negative, got {s}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::materials::presets;
    use proptest::prelude::*;

    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut sum = f(a) + f(b);
        for i in 1..n {
            sum += if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + i as f64 * h);
        }
        sum * h / 3.0
    }

    #[test]
    fn linear_law() {
        let l = MaterialLaw::linear(5.0).unwrap();
        assert_eq!(l.gamma(123.0).unwrap(), 5.0);
        assert_eq!(l.energy_density(3.0).unwrap(), 22.5);
        assert!(l.gamma(-1.0).is_err());
        assert!(MaterialLaw::linear(0.0).is_err());
    }

    #[test]
    fn power_law_at_reference_field() {
        let l = MaterialLaw::power_law_ej(1e-4, 8e9, 27.0, 1e20).unwrap();
        let g = l.gamma(1e-4).unwrap();
        assert!((g - 8e13).abs() / 8e13 < 1e-12);
    }

    #[test]
    fn power_law_cap() {
        let l = MaterialLaw::power_law_ej(1e-4, 8e9, 27.0, 1e3 * 55.5e6).unwrap();
        let MaterialLaw::PowerLawEj { s_cap, .. } = l else { unreachable!() };
        assert!((l.value(s_cap) - 5.55e10).abs() / 5.55e10 < 1e-12);
        assert_eq!(l.value(0.0), l.value(s_cap));
        assert_eq!(l.value_and_slope(0.5 * s_cap).1, 0.0);
        assert!(l.value(2.0 * s_cap) < 5.55e10);
    }

    #[test]
    fn tabulated_knot() {
        let l = MaterialLaw::tabulated(&[(0.0, 3.0), (1.0, 2.0), (2.0, 1.5)]).unwrap();
        assert_eq!(l.gamma(1.0).unwrap(), 2.0);
    }

    #[test]
    fn monomial_energy() {
        for p in [1.5, 2.0, 3.0, 4.5] {
            let l = MaterialLaw::monomial(1.0, p).unwrap();
            let s: f64 = 1.7;
            assert!((l.energy(s) - s.powf(p) / p).abs() < 1e-14 * s.powf(p));
        }
    }

    #[test]
    fn closed_forms_match_simpson() {
        let laws = [
            MaterialLaw::power_law_ej(1e-4, 8e9, 27.0, 5.55e10).unwrap(),
            presets::saturating_permeability(),
            MaterialLaw::saturating(2.0, 50.0, 0.3, 0.1).unwrap(),
        ];
        for l in &laws {
            let top = 40.0 * l.breakpoints().first().copied().unwrap_or(0.05).max(0.05);
            let mut pts = vec![0.0];
            pts.extend(l.breakpoints().into_iter().filter(|&b| b < top));
            pts.push(top);
            let oracle: f64 = pts.windows(2).map(|w| simpson(|x| l.value(x) * x, w[0], w[1], 200_000)).sum();
            let q = l.energy(top);
            assert!((q - oracle).abs() / oracle < 1e-8, "{l:?}: {q} vs {oracle}");
        }
    }

    #[test]
    fn quadrature_energy_matches_simpson() {
        let l = presets::composite_conductor();
        let s = 50.0;
        let MaterialLaw::Bruggeman { inner, .. } = &l else { unreachable!() };
        let cap = inner.breakpoints()[0];
        let oracle = simpson(|x| l.value(x) * x, 0.0, cap, 1000) + simpson(|x| l.value(x) * x, cap, s, 1_000_000);
        let q = l.energy(s);
        assert!((q - oracle).abs() / oracle < 1e-8, "{q} vs {oracle}");
    }

    #[test]
    fn slopes_match_finite_differences() {
        let laws = [
            MaterialLaw::power_law_ej(1e-4, 8e9, 27.0, 5.55e10).unwrap(),
            presets::composite_conductor(),
            presets::saturating_permeability(),
            MaterialLaw::monomial(2.0, 3.5).unwrap(),
        ];
        for l in &laws {
            for s in [0.7, 3.0, 40.0, 900.0] {
                let h = 1e-6 * s;
                let fd = (l.value(s + h) - l.value(s - h)) / (2.0 * h);
                let an = l.value_and_slope(s).1;
                assert!((fd - an).abs() <= 1e-5 * an.abs().max(1e-12 * l.value(s)), "{l:?} at {s}: {fd} vs {an}");
            }
        }
    }

    proptest! {
        #[test]
        fn linear_energy_exact(c in 1e-6f64..1e12, s in 0.0f64..1e4) {
            let l = MaterialLaw::linear(c).unwrap();
            prop_assert_eq!(l.energy(s), c * s * s / 2.0);
        }

        #[test]
        fn energy_is_convex(s in 0.5f64..500.0) {
            for l in [presets::composite_conductor(), presets::saturating_permeability()] {
                let h = 0.05 * s;
                let q0 = l.energy(s - h);
                let q1 = l.energy(s);
                let q2 = l.energy(s + h);
                let second = (q2 - 2.0 * q1 + q0) / (h * h);
                prop_assert!(second >= -1e-6 * l.value(s), "{second}");
            }
        }
    }
}
