use faer::Mat;

use super::solve::{solve_nonlinear_dirichlet, NewtonOptions};
use super::space::FemSpace;
use crate::error::{invalid, Result};
use crate::materials::quadrature::gauss_legendre;
use crate::materials::MaterialField;

/// Zero-mean boundary trace (boundary-cycle order) times an amplitude.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryPotential {
    values: Vec<f64>,
    scale: f64,
}

impl BoundaryPotential {
    /// Projects `values` onto the zero-mean subspace of the lumped boundary mass.
    pub fn new(space: &FemSpace, mut values: Vec<f64>) -> Result<Self> {
        space.check_trace(&values)?;
        let w = space.boundary_weights();
        let mean = values.iter().zip(w).map(|(v, w)| v * w).sum::<f64>() / w.iter().sum::<f64>();
        values.iter_mut().for_each(|v| *v -= mean);
        Ok(Self { values, scale: 1.0 })
    }

    /// Wraps values that are already zero-mean.
    pub(crate) fn from_parts(values: Vec<f64>, scale: f64) -> Self {
        Self { values, scale }
    }

    /// Samples `g(θ)` at the boundary nodes.
    pub fn from_angle(space: &FemSpace, g: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(space, space.mesh().boundary_angles().into_iter().map(g).collect())
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    /// Unscaled values.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Scaled trace imposed on the boundary.
    pub fn trace(&self) -> Vec<f64> {
        self.values.iter().map(|v| v * self.scale).collect()
    }
}

/// Discrete DtN quadratic form on boundary nodes with its boundary mass matrix.
#[derive(Debug, Clone)]
pub struct DtNMatrix {
    pub matrix: Mat<f64>,
    pub mass: Mat<f64>,
}

impl DtNMatrix {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `fᵀ K f`.
    pub fn quadratic_form(&self, f: &[f64]) -> f64 {
        quadratic_form(&self.matrix, f)
    }
}

pub(crate) fn quadratic_form(m: &Mat<f64>, f: &[f64]) -> f64 {
    let n = f.len();
    let mut s = 0.0;
    for j in 0..n {
        let mut col = 0.0;
        for i in 0..n {
            col += m[(i, j)] * f[i];
        }
        s += col * f[j];
    }
    s
}

/// Piecewise-linear mass matrix of the boundary cycle.
pub fn boundary_mass_matrix(space: &FemSpace) -> Mat<f64> {
    let mesh = space.mesh();
    let nb = mesh.boundary_count();
    let mut m = Mat::<f64>::zeros(nb, nb);
    for k in 0..nb {
        let l = (k + 1) % nb;
        let h = (mesh.nodes()[mesh.boundary_nodes()[l]] - mesh.nodes()[mesh.boundary_nodes()[k]]).norm();
        m[(k, k)] += h / 3.0;
        m[(l, l)] += h / 3.0;
        m[(k, l)] += h / 6.0;
        m[(l, k)] += h / 6.0;
    }
    m
}

/// `Σ_e area_e Q_e(|∇u|_e)`.
pub fn dirichlet_energy(space: &FemSpace, field: &MaterialField, u: &[f64]) -> f64 {
    (0..space.element_count())
        .map(|e| space.areas()[e] * field.energy_density(e, space.gradient(e, u).norm()))
        .sum()
}

/// `Σ_e area_e γ_e |∇u|²`, i.e. `⟨Λ(f), f⟩` when `u` solves the problem.
pub fn flux_pairing(space: &FemSpace, field: &MaterialField, u: &[f64]) -> f64 {
    (0..space.element_count())
        .map(|e| {
            let s = space.gradient(e, u).norm();
            space.areas()[e] * field.coefficient(e, s).0 * s * s
        })
        .sum()
}

/// `⟨Λ̄(f), f⟩`, the Dirichlet energy of the solution.
pub fn avg_dtn_pairing(space: &FemSpace, field: &MaterialField, f: &BoundaryPotential, opts: &NewtonOptions) -> Result<f64> {
    let sol = solve_nonlinear_dirichlet(space, field, &f.trace(), opts)?;
    Ok(dirichlet_energy(space, field, &sol.u))
}

/// `⟨Λ(f), f⟩`.
pub fn dtn_pairing(space: &FemSpace, field: &MaterialField, f: &BoundaryPotential, opts: &NewtonOptions) -> Result<f64> {
    let sol = solve_nonlinear_dirichlet(space, field, &f.trace(), opts)?;
    Ok(flux_pairing(space, field, &sol.u))
}

/// `⟨Λ̄(f), f⟩ = ∫₀¹ ⟨Λ(αf), f⟩ dα` by `points`-point Gauss–Legendre.
pub fn avg_dtn_by_quadrature(
    space: &FemSpace,
    field: &MaterialField,
    f: &BoundaryPotential,
    points: usize,
    opts: &NewtonOptions,
) -> Result<f64> {
    if points == 0 {
        return Err(invalid("quadrature needs at least one point"));
    }
    let (x, w) = gauss_legendre(points);
    let trace = f.trace();
    let mut total = 0.0;
    for (xk, wk) in x.iter().zip(&w) {
        let alpha = 0.5 * (xk + 1.0);
        let scaled: Vec<f64> = trace.iter().map(|v| alpha * v).collect();
        let sol = solve_nonlinear_dirichlet(space, field, &scaled, opts)?;
        total += 0.5 * wk * flux_pairing(space, field, &sol.u) / alpha;
    }
    Ok(total)
}

/// Schur complement `K_bb − K_bi K_ii⁻¹ K_ib` of a linear field.
pub fn schur_dtn_matrix(space: &FemSpace, field: &MaterialField) -> Result<DtNMatrix> {
    space.check_field(field)?;
    let coeff = field
        .linear_coefficients()
        .ok_or_else(|| invalid("the Schur complement needs a linear material field"))?;
    schur_from_coefficients(space, &coeff)
}

pub fn schur_from_coefficients(space: &FemSpace, coeff: &[f64]) -> Result<DtNMatrix> {
    if coeff.len() != space.element_count() {
        return Err(invalid("coefficient count does not match the mesh"));
    }
    if let Some(e) = coeff.iter().position(|c| !(*c > 0.0 && c.is_finite())) {
        return Err(invalid(format!("coefficient of element {e} is {}", coeff[e])));
    }
    let (ni, nb) = (space.interior_count(), space.boundary_count());
    let values = space.assemble_interior(|e| space.laplace_local(e, coeff[e]));
    let llt = space.factorize(&values)?;
    let mut kbb = Mat::<f64>::zeros(nb, nb);
    let mut kib = Mat::<f64>::zeros(ni, nb);
    let mut coupling: Vec<(usize, usize, f64)> = Vec::new();
    for (e, tri) in space.mesh().triangles().iter().enumerate() {
        let k = space.laplace_local(e, coeff[e]);
        for a in 0..3 {
            for b in 0..3 {
                match (space.boundary_position(tri[a]), space.boundary_position(tri[b])) {
                    (Some(p), Some(q)) => kbb[(p, q)] += k[a][b],
                    (None, Some(q)) => {
                        let i = space.interior_position(tri[a]).expect("interior node");
                        kib[(i, q)] += k[a][b];
                        coupling.push((i, q, k[a][b]));
                    }
                    _ => {}
                }
            }
        }
    }
    FemSpace::solve_in_place(&llt, kib.as_mut());
    // kbb −= K_bi X with K_bi = K_ibᵀ
    for &(i, q, v) in &coupling {
        for p in 0..nb {
            kbb[(q, p)] -= v * kib[(i, p)];
        }
    }
    let mut matrix = Mat::<f64>::zeros(nb, nb);
    for p in 0..nb {
        for q in 0..nb {
            matrix[(p, q)] = 0.5 * (kbb[(p, q)] + kbb[(q, p)]);
        }
    }
    Ok(DtNMatrix { matrix, mass: boundary_mass_matrix(space) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::solve::solve_linear_dirichlet;
    use crate::geometry::build_disk_mesh;
    use crate::materials::{MaterialLaw, OutsideRule};
    use std::f64::consts::PI;

    fn space(radius: f64, rings: usize) -> FemSpace {
        FemSpace::new(&build_disk_mesh(radius, rings).unwrap()).unwrap()
    }

    fn two_phase(space: &FemSpace) -> MaterialField {
        let coeff = (0..space.element_count())
            .map(|e| if space.mesh().centroid(e).x > 0.2 { 7.0 } else { 1.5 })
            .collect();
        MaterialField::linear(coeff).unwrap()
    }

    #[test]
    fn mass_matrix_entries() {
        let s = space(1.0, 3);
        let m = boundary_mass_matrix(&s);
        let nb = s.boundary_count();
        let total: f64 = (0..nb).flat_map(|i| (0..nb).map(move |j| (i, j))).map(|(i, j)| m[(i, j)]).sum();
        let perimeter: f64 = s.boundary_weights().iter().sum();
        assert!((total - perimeter).abs() < 1e-12 * perimeter);
        let h = 2.0 * (PI / nb as f64).sin();
        assert!((m[(0, 0)] - 2.0 * h / 3.0).abs() < 1e-14);
        assert!((m[(0, 1)] - h / 6.0).abs() < 1e-14);
        for i in 0..nb {
            let row: f64 = (0..nb).map(|j| m[(i, j)]).sum();
            assert!((row - s.boundary_weights()[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_mean_projection() {
        let s = space(1.0, 5);
        let f = BoundaryPotential::from_angle(&s, |t| 2.0 + t.sin()).unwrap();
        let m = boundary_mass_matrix(&s);
        let nb = s.boundary_count();
        let m1: f64 = (0..nb).map(|i| (0..nb).map(|j| m[(i, j)]).sum::<f64>() * f.values()[i]).sum();
        assert!(m1.abs() < 1e-13);
    }

    #[test]
    fn schur_properties() {
        let s = space(1.0, 12);
        let field = two_phase(&s);
        let k = schur_dtn_matrix(&s, &field).unwrap();
        let nb = k.dim();
        let scale = (0..nb).map(|i| k.matrix[(i, i)].abs()).fold(0.0, f64::max);
        for i in 0..nb {
            let row: f64 = (0..nb).map(|j| k.matrix[(i, j)]).sum();
            assert!(row.abs() < 1e-10 * scale);
            for j in 0..nb {
                assert!((k.matrix[(i, j)] - k.matrix[(j, i)]).abs() <= 1e-12 * scale);
            }
        }
        let f = BoundaryPotential::from_angle(&s, |t| t.cos() - 0.5 * (2.0 * t).sin()).unwrap();
        let u = solve_linear_dirichlet(&s, &field, &f.trace()).unwrap();
        let energy = dirichlet_energy(&s, &field, &u);
        let quad = 0.5 * k.quadratic_form(f.values());
        assert!((energy - quad).abs() < 1e-10 * quad);
    }

    #[test]
    fn schur_scales_linearly() {
        let s = space(1.0, 6);
        let a = schur_dtn_matrix(&s, &MaterialField::uniform(s.element_count(), 1.0).unwrap()).unwrap();
        let b = schur_dtn_matrix(&s, &MaterialField::uniform(s.element_count(), 4.0).unwrap()).unwrap();
        for i in 0..a.dim() {
            for j in 0..a.dim() {
                assert!((b.matrix[(i, j)] - 4.0 * a.matrix[(i, j)]).abs() <= 1e-12 * b.matrix[(i, i)].abs());
            }
        }
    }

    #[test]
    fn disk_dtn_eigenvalues() {
        let s = space(1.0, 32);
        let field = MaterialField::uniform(s.element_count(), 1.0).unwrap();
        let k = schur_dtn_matrix(&s, &field).unwrap();
        let opts = NewtonOptions::default();
        for n in 1..=3 {
            let f = BoundaryPotential::from_angle(&s, |t| (n as f64 * t).cos()).unwrap();
            let exact = n as f64 * PI;
            let q = k.quadratic_form(f.values());
            assert!((q - exact).abs() / exact < 0.02 * n as f64, "n={n}: {q}");
            let p = dtn_pairing(&s, &field, &f, &opts).unwrap();
            assert!((p - q).abs() < 1e-9 * q);
        }
        let f = BoundaryPotential::from_angle(&s, f64::cos).unwrap();
        assert!((k.quadratic_form(f.values()) - PI).abs() / PI < 0.02);
    }

    #[test]
    fn linear_average_is_half() {
        let s = space(1.0, 10);
        let field = two_phase(&s);
        let f = BoundaryPotential::from_angle(&s, |t| (t + 0.3).sin()).unwrap();
        let opts = NewtonOptions::default();
        let avg = avg_dtn_pairing(&s, &field, &f, &opts).unwrap();
        let full = dtn_pairing(&s, &field, &f, &opts).unwrap();
        assert!((avg - 0.5 * full).abs() < 1e-12 * full);
    }

    #[test]
    fn monomial_average_is_one_over_p() {
        let s = space(1.0, 10);
        let n = s.element_count();
        let law = MaterialLaw::monomial(1.0, 3.0).unwrap();
        let field = MaterialField::with_anomaly(vec![1.0; n], vec![true; n], law, OutsideRule::Background).unwrap();
        let f = BoundaryPotential::from_angle(&s, |t| t.cos() + 0.2 * (2.0 * t).cos()).unwrap();
        let opts = NewtonOptions::default();
        let avg = avg_dtn_pairing(&s, &field, &f, &opts).unwrap();
        let full = dtn_pairing(&s, &field, &f, &opts).unwrap();
        assert!((avg - full / 3.0).abs() < 1e-6 * avg, "{avg} vs {}", full / 3.0);
    }

    #[test]
    fn energy_and_quadrature_paths_agree() {
        let s = space(1.0, 10);
        let mask: Vec<bool> = (0..s.element_count()).map(|e| s.mesh().centroid(e).norm() < 0.5).collect();
        let law = MaterialLaw::saturating(1.0, 30.0, 0.5, 0.05).unwrap();
        let field = MaterialField::with_anomaly(vec![3.0; s.element_count()], mask, law, OutsideRule::Background).unwrap();
        let f = BoundaryPotential::from_angle(&s, |t| t.cos()).unwrap().with_scale(1.5);
        let opts = NewtonOptions::default();
        let energy = avg_dtn_pairing(&s, &field, &f, &opts).unwrap();
        let quad = avg_dtn_by_quadrature(&s, &field, &f, 16, &opts).unwrap();
        assert!((energy - quad).abs() < 1e-4 * energy, "{energy} vs {quad}");
    }

    #[test]
    fn zero_potential() {
        let s = space(1.0, 4);
        let field = MaterialField::uniform(s.element_count(), 1.0).unwrap();
        let f = BoundaryPotential::new(&s, vec![0.0; s.boundary_count()]).unwrap();
        assert_eq!(dtn_pairing(&s, &field, &f, &NewtonOptions::default()).unwrap(), 0.0);
        assert_eq!(avg_dtn_pairing(&s, &field, &f, &NewtonOptions::default()).unwrap(), 0.0);
    }
}
