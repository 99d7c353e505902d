use faer::Mat;

use super::space::{FemSpace, Local};
use crate::error::{invalid, Error, Result};
use crate::materials::MaterialField;

/// Stopping rule for [`solve_nonlinear_dirichlet`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    /// Relative residual tolerance.
    pub tol: f64,
    pub max_iter: usize,
    /// Line-search halvings before falling back to a Picard step.
    pub max_halvings: u32,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 50, max_halvings: 30 }
    }
}

/// Nodal solution with solver diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub u: Vec<f64>,
    /// Linear solves performed, including the initial lift.
    pub iterations: usize,
    /// Final residual norm relative to the residual of the bare boundary lift.
    pub residual: f64,
}

/// Solves the linear problem with per-element coefficients `coeff`.
pub fn solve_with_coefficients(space: &FemSpace, coeff: &[f64], f: &[f64]) -> Result<Vec<f64>> {
    space.check_trace(f)?;
    if coeff.len() != space.element_count() {
        return Err(invalid("coefficient count does not match the mesh"));
    }
    if let Some(e) = coeff.iter().position(|c| !(*c > 0.0 && c.is_finite())) {
        return Err(invalid(format!("coefficient of element {e} is {}", coeff[e])));
    }
    let values = space.assemble_interior(|e| space.laplace_local(e, coeff[e]));
    let llt = space.factorize(&values)?;
    let u0 = space.combine(&vec![0.0; space.interior_count()], f);
    let mut rhs = Mat::<f64>::zeros(space.interior_count(), 1);
    accumulate_residual(space, &u0, |e| space.laplace_local(e, coeff[e]), |i, r| rhs[(i, 0)] -= r);
    FemSpace::solve_in_place(&llt, rhs.as_mut());
    let x: Vec<f64> = (0..space.interior_count()).map(|i| rhs[(i, 0)]).collect();
    Ok(space.combine(&x, f))
}

/// Dirichlet problem for a field whose coefficients do not depend on `|∇u|`.
pub fn solve_linear_dirichlet(space: &FemSpace, field: &MaterialField, f: &[f64]) -> Result<Vec<f64>> {
    space.check_field(field)?;
    let coeff = field
        .linear_coefficients()
        .ok_or_else(|| invalid("solve_linear_dirichlet needs a linear material field"))?;
    solve_with_coefficients(space, &coeff, f)
}

fn accumulate_residual(space: &FemSpace, u: &[f64], local: impl Fn(usize) -> Local, mut add: impl FnMut(usize, f64)) {
    for (e, tri) in space.mesh().triangles().iter().enumerate() {
        let k = local(e);
        for a in 0..3 {
            if let Some(i) = space.interior_position(tri[a]) {
                add(i, k[a][0] * u[tri[0]] + k[a][1] * u[tri[1]] + k[a][2] * u[tri[2]]);
            }
        }
    }
}

/// Interior residual `R_i = Σ_e γ_e(|∇u|) area_e ∇u·∇φ_i`.
pub fn residual(space: &FemSpace, field: &MaterialField, u: &[f64]) -> Vec<f64> {
    let mut r = vec![0.0; space.interior_count()];
    for (e, tri) in space.mesh().triangles().iter().enumerate() {
        let grad = space.gradient(e, u);
        let (gamma, _) = field.coefficient(e, grad.norm());
        let w = gamma * space.areas()[e];
        for (a, g) in space.gradients(e).iter().enumerate() {
            if let Some(i) = space.interior_position(tri[a]) {
                r[i] += w * grad.dot(*g);
            }
        }
    }
    r
}

/// Element tangent `area·(γ g_a·g_b + (γ'/s)(∇u·g_a)(∇u·g_b))`; the isotropic
/// part alone when `picard` is set or `s = 0`.
fn tangent_local(space: &FemSpace, field: &MaterialField, u: &[f64], e: usize, picard: bool) -> Local {
    let grad = space.gradient(e, u);
    let s = grad.norm();
    let (gamma, slope) = field.coefficient(e, s);
    let mut k = space.laplace_local(e, gamma);
    if !picard && s > 0.0 && slope != 0.0 {
        let g = space.gradients(e);
        let w = space.areas()[e] * slope / s;
        let proj = [grad.dot(g[0]), grad.dot(g[1]), grad.dot(g[2])];
        for a in 0..3 {
            for b in 0..3 {
                k[a][b] += w * proj[a] * proj[b];
            }
        }
    }
    k
}

/// Applies the consistent tangent at `u` to the interior direction `v`.
pub fn apply_tangent(space: &FemSpace, field: &MaterialField, u: &[f64], v: &[f64]) -> Vec<f64> {
    let full = space.combine(v, &vec![0.0; space.boundary_count()]);
    let mut out = vec![0.0; space.interior_count()];
    accumulate_residual(space, &full, |e| tangent_local(space, field, u, e, false), |i, r| out[i] += r);
    out
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn initial_coefficients(space: &FemSpace, field: &MaterialField, f: &[f64]) -> Vec<f64> {
    let (lo, hi) = f.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let s_ref = (hi - lo) / (2.0 * space.mesh().radius());
    (0..space.element_count())
        .map(|e| {
            let c = field.coefficient(e, 0.0).0;
            if c > 0.0 && c.is_finite() {
                c
            } else {
                let c = field.coefficient(e, s_ref).0;
                if c > 0.0 && c.is_finite() {
                    c
                } else {
                    1.0
                }
            }
        })
        .collect()
}

/// Newton–Raphson solve of `∇·(γ(x,|∇u|)∇u) = 0`, `u = f` on the boundary.
///
/// Starts from the linear solve with the zero-field coefficients, damps each
/// step by halving until the residual norm decreases, and takes a Picard step
/// when no damped Newton step does.
pub fn solve_nonlinear_dirichlet(
    space: &FemSpace,
    field: &MaterialField,
    f: &[f64],
    opts: &NewtonOptions,
) -> Result<Solution> {
    space.check_field(field)?;
    space.check_trace(f)?;
    let zero = space.combine(&vec![0.0; space.interior_count()], f);
    let reference = norm(&residual(space, field, &zero));
    if reference == 0.0 {
        return Ok(Solution { u: zero, iterations: 0, residual: 0.0 });
    }
    let mut u = solve_with_coefficients(space, &initial_coefficients(space, field, f), f)?;
    let mut iterations = 1;
    let mut r = residual(space, field, &u);
    let mut rn = norm(&r);
    log::trace!("newton lift residual={:.3e}", rn / reference);
    while rn > opts.tol * reference {
        if iterations >= opts.max_iter {
            return Err(Error::ConvergenceFailure { iterations, residual: rn / reference });
        }
        iterations += 1;
        let mut accepted = false;
        for picard in [false, true] {
            let values = space.assemble_interior(|e| tangent_local(space, field, &u, e, picard));
            let llt = space.factorize(&values)?;
            let mut step = Mat::<f64>::from_fn(space.interior_count(), 1, |i, _| -r[i]);
            FemSpace::solve_in_place(&llt, step.as_mut());
            let mut t = 1.0;
            for halving in 0..=opts.max_halvings {
                let mut trial = u.clone();
                for (i, &v) in space.interior_nodes().iter().enumerate() {
                    trial[v] += t * step[(i, 0)];
                }
                let tr = residual(space, field, &trial);
                let tn = norm(&tr);
                if tn < rn {
                    log::trace!(
                        "newton iter={iterations} residual={:.3e} step={t} picard={picard} halvings={halving}",
                        tn / reference
                    );
                    u = trial;
                    r = tr;
                    rn = tn;
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if accepted {
                break;
            }
        }
        if !accepted {
            return Err(Error::ConvergenceFailure { iterations, residual: rn / reference });
        }
    }
    log::debug!("newton converged iterations={iterations} residual={:.3e}", rn / reference);
    Ok(Solution { u, iterations, residual: rn / reference })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::build_disk_mesh;
    use crate::materials::{presets, MaterialLaw, OutsideRule};

    fn trace(space: &FemSpace, g: impl Fn(f64) -> f64) -> Vec<f64> {
        space.mesh().boundary_angles().into_iter().map(g).collect()
    }

    #[test]
    fn harmonic_cosine() {
        let mesh = build_disk_mesh(1.0, 32).unwrap();
        let space = FemSpace::new(&mesh).unwrap();
        let field = MaterialField::uniform(space.element_count(), 1.0).unwrap();
        let u = solve_linear_dirichlet(&space, &field, &trace(&space, f64::cos)).unwrap();
        let err = mesh.nodes().iter().zip(&u).map(|(p, v)| (v - p.x).abs()).fold(0.0, f64::max);
        assert!(err < 0.02, "{err}");
    }

    #[test]
    fn zero_trace() {
        let mesh = build_disk_mesh(1.0, 4).unwrap();
        let space = FemSpace::new(&mesh).unwrap();
        let field = MaterialField::uniform(space.element_count(), 1.0).unwrap();
        let u = solve_linear_dirichlet(&space, &field, &vec![0.0; space.boundary_count()]).unwrap();
        assert!(u.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn linear_field_one_iteration() {
        let mesh = build_disk_mesh(1.0, 8).unwrap();
        let space = FemSpace::new(&mesh).unwrap();
        let field = MaterialField::uniform(space.element_count(), 3.0).unwrap();
        let f = trace(&space, |t| (2.0 * t).sin() + 0.3 * t.cos());
        let sol = solve_nonlinear_dirichlet(&space, &field, &f, &NewtonOptions::default()).unwrap();
        assert_eq!(sol.iterations, 1);
        let lin = solve_linear_dirichlet(&space, &field, &f).unwrap();
        for (a, b) in sol.u.iter().zip(&lin) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn tangent_matches_finite_difference() {
        let mesh = build_disk_mesh(1.0, 6).unwrap();
        let space = FemSpace::new(&mesh).unwrap();
        let mask: Vec<bool> = (0..space.element_count()).map(|e| e % 3 != 0).collect();
        let law = MaterialLaw::saturating(1.0, 20.0, 0.8, 0.05).unwrap();
        let field =
            MaterialField::with_anomaly(vec![2.0; space.element_count()], mask, law, OutsideRule::Background).unwrap();
        let u: Vec<f64> = mesh.nodes().iter().map(|p| (1.3 * p.x).sin() + p.y * p.y).collect();
        let v: Vec<f64> = (0..space.interior_count()).map(|i| ((i * 7919) % 13) as f64 / 13.0 - 0.5).collect();
        let jv = apply_tangent(&space, &field, &u, &v);
        let h = 1e-6;
        let shifted = |sign: f64| {
            let mut w = u.clone();
            for (i, &n) in space.interior_nodes().iter().enumerate() {
                w[n] += sign * h * v[i];
            }
            residual(&space, &field, &w)
        };
        let (rp, rm) = (shifted(1.0), shifted(-1.0));
        let fd: Vec<f64> = rp.iter().zip(&rm).map(|(a, b)| (a - b) / (2.0 * h)).collect();
        let diff = norm(&fd.iter().zip(&jv).map(|(a, b)| a - b).collect::<Vec<_>>());
        assert!(diff <= 1e-5 * norm(&jv), "{diff} vs {}", norm(&jv));
    }

    #[test]
    fn monomial_homogeneity() {
        let mesh = build_disk_mesh(1.0, 10).unwrap();
        let space = FemSpace::new(&mesh).unwrap();
        let law = MaterialLaw::monomial(1.0, 3.0).unwrap();
        let n = space.element_count();
        let field = MaterialField::with_anomaly(vec![1.0; n], vec![true; n], law, OutsideRule::Background).unwrap();
        let f = trace(&space, |t| t.cos() + 0.4 * (3.0 * t).sin());
        let opts = NewtonOptions::default();
        let u1 = solve_nonlinear_dirichlet(&space, &field, &f, &opts).unwrap().u;
        let alpha = 2.7;
        let fa: Vec<f64> = f.iter().map(|v| alpha * v).collect();
        let ua = solve_nonlinear_dirichlet(&space, &field, &fa, &opts).unwrap().u;
        let scale = u1.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (a, b) in u1.iter().zip(&ua) {
            assert!((alpha * a - b).abs() <= 1e-8 * alpha * scale);
        }
    }

    #[test]
    fn composite_converges() {
        let mesh = build_disk_mesh(0.03, 16).unwrap();
        let space = FemSpace::new(&mesh).unwrap();
        let mask: Vec<bool> = (0..space.element_count()).map(|e| space.mesh().centroid(e).norm() < 0.012).collect();
        let field = MaterialField::with_anomaly(
            vec![presets::CONDUCTOR_BACKGROUND; space.element_count()],
            mask,
            presets::composite_conductor(),
            OutsideRule::Background,
        )
        .unwrap();
        for amp in [1e-3, 1e-1, 10.0] {
            let f = trace(&space, |t| amp * t.cos());
            let sol = solve_nonlinear_dirichlet(&space, &field, &f, &NewtonOptions::default()).unwrap();
            assert!(sol.residual <= 1e-10);
            assert!(sol.iterations <= 30, "{}", sol.iterations);
        }
    }
}
