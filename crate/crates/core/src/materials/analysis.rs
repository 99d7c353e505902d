use super::law::MaterialLaw;
use crate::error::{invalid, Result};

/// Constants bracketing a law on its evaluation range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialBounds {
    pub lower: f64,
    pub upper: f64,
}

impl MaterialBounds {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if !(lower > 0.0 && lower.is_finite() && upper.is_finite()) {
            return Err(invalid(format!("bounds must be positive and finite, got ({lower}, {upper})")));
        }
        if lower > upper {
            return Err(invalid(format!("lower bound {lower} exceeds upper bound {upper}")));
        }
        Ok(Self { lower, upper })
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.lower && v <= self.upper
    }
}

/// Outcome of a grid scan of a law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssumptionReport {
    /// `s ↦ γ(s)s` strictly increasing on the grid.
    pub h2_ok: bool,
    /// Empirical `(min γ, max γ)`.
    pub bounds: (f64, f64),
    /// Smallest difference quotient of `s ↦ γ(s)s`.
    pub kappa: f64,
}

/// Scans `γ` on `grid_size` uniform points of `[0, s_max]`.
pub fn verify_assumptions(law: &MaterialLaw, s_max: f64, grid_size: usize) -> Result<AssumptionReport> {
    verify_assumptions_on(law, 0.0, s_max, grid_size)
}

/// Scans `γ` on `grid_size` uniform points of `[s_min, s_max]`.
pub fn verify_assumptions_on(law: &MaterialLaw, s_min: f64, s_max: f64, grid_size: usize) -> Result<AssumptionReport> {
    if !(s_min >= 0.0 && s_max > s_min && s_max.is_finite()) {
        return Err(invalid(format!("invalid scan interval [{s_min}, {s_max}]")));
    }
    if grid_size < 2 {
        return Err(invalid("grid_size must be at least 2"));
    }
    let step = (s_max - s_min) / (grid_size - 1) as f64;
    let mut h2_ok = true;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut kappa = f64::INFINITY;
    let mut prev: Option<(f64, f64)> = None;
    for i in 0..grid_size {
        let s = if i + 1 == grid_size { s_max } else { s_min + i as f64 * step };
        let g = law.value(s);
        lo = lo.min(g);
        hi = hi.max(g);
        let flux = g * s;
        if let Some((ps, pf)) = prev {
            if !(flux > pf) {
                h2_ok = false;
            }
            kappa = kappa.min((flux - pf) / (s - ps));
        }
        prev = Some((s, flux));
    }
    Ok(AssumptionReport { h2_ok, bounds: (lo, hi), kappa })
}

const SCAN_POINTS: usize = 4096;

/// Smallest `s ∈ [0, s_max]` with `γ(s) = level`, or `None` without a crossing.
pub fn intersection_s0(law: &MaterialLaw, level: f64, s_max: f64) -> Option<f64> {
    if !(s_max > 0.0) {
        return None;
    }
    let g = |s: f64| law.value(s) - level;
    let step = s_max / SCAN_POINTS as f64;
    let mut a = 0.0;
    let mut ga = g(a);
    if ga == 0.0 {
        return Some(0.0);
    }
    for i in 1..=SCAN_POINTS {
        let b = if i == SCAN_POINTS { s_max } else { i as f64 * step };
        let gb = g(b);
        if gb == 0.0 {
            return Some(b);
        }
        if ga.signum() != gb.signum() {
            return Some(bisect(g, a, b, ga, 1e-12 * s_max));
        }
        a = b;
        ga = gb;
    }
    None
}

fn bisect(g: impl Fn(f64) -> f64, mut a: f64, mut b: f64, mut ga: f64, tol: f64) -> f64 {
    while b - a > tol {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let gm = g(m);
        if gm == 0.0 {
            return m;
        }
        if gm.signum() == ga.signum() {
            a = m;
            ga = gm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// `min γ` over `[0, s_m]`: grid scan followed by golden-section refinement.
pub fn lower_bound_on_range(law: &MaterialLaw, s_m: f64) -> Result<f64> {
    if !(s_m > 0.0 && s_m.is_finite()) {
        return Err(invalid(format!("s_M must be positive, got {s_m}")));
    }
    let n = 2048;
    let at = |i: usize| s_m * i as f64 / n as f64;
    let (mut best_i, mut best) = (0, law.value(0.0));
    for i in 1..=n {
        let v = law.value(at(i));
        if v < best {
            best = v;
            best_i = i;
        }
    }
    let (a, b) = (at(best_i.saturating_sub(1)), at((best_i + 1).min(n)));
    let refined = golden_min(|s| law.value(s), a, b);
    Ok(best.min(refined))
}

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    let mut best = f(a).min(f(b)).min(fc).min(fd);
    for _ in 0..200 {
        if b - a <= 1e-14 * b.abs().max(f64::MIN_POSITIVE) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
            best = best.min(fc);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
            best = best.min(fd);
        }
    }
    best
}
