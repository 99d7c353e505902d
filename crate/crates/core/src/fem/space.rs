use faer::linalg::solvers::SolveCore;
use faer::sparse::linalg::solvers::{Llt, SymbolicLlt};
use faer::sparse::{SparseColMat, SparseColMatRef, SymbolicSparseColMat, Triplet};
use faer::{Conj, MatMut, Side};

use crate::error::{invalid, Error, Result};
use crate::geometry::{Mesh, Point};
use crate::materials::MaterialField;

const NONE: u32 = u32::MAX;

/// Local 3×3 element matrix.
pub(crate) type Local = [[f64; 3]; 3];

/// First-order finite-element space on a mesh, with the interior sparsity
/// pattern and its symbolic Cholesky factorization computed once.
#[derive(Debug, Clone)]
pub struct FemSpace {
    mesh: Mesh,
    grads: Vec<[Point; 3]>,
    areas: Vec<f64>,
    interior_of: Vec<usize>,
    boundary_of: Vec<usize>,
    interior_nodes: Vec<usize>,
    pattern: SymbolicSparseColMat<usize>,
    slots: Vec<[u32; 9]>,
    symbolic: SymbolicLlt<usize>,
    lumped: Vec<f64>,
}

impl FemSpace {
    pub fn new(mesh: &Mesh) -> Result<Self> {
        let n = mesh.node_count();
        let mut boundary_of = vec![usize::MAX; n];
        for (k, &b) in mesh.boundary_nodes().iter().enumerate() {
            boundary_of[b] = k;
        }
        let mut interior_of = vec![usize::MAX; n];
        let mut interior_nodes = Vec::new();
        for v in 0..n {
            if boundary_of[v] == usize::MAX {
                interior_of[v] = interior_nodes.len();
                interior_nodes.push(v);
            }
        }
        if interior_nodes.is_empty() {
            return Err(invalid("mesh has no interior nodes"));
        }

        let mut grads = Vec::with_capacity(mesh.triangle_count());
        let mut areas = Vec::with_capacity(mesh.triangle_count());
        for (t, tri) in mesh.triangles().iter().enumerate() {
            let p = tri.map(|v| mesh.nodes()[v]);
            let twice = 2.0 * mesh.signed_area(t);
            let g = |b: Point, c: Point| Point::new((b.y - c.y) / twice, (c.x - b.x) / twice);
            grads.push([g(p[1], p[2]), g(p[2], p[0]), g(p[0], p[1])]);
            areas.push(0.5 * twice);
        }

        let ni = interior_nodes.len();
        let mut cols: Vec<Vec<usize>> = vec![Vec::new(); ni];
        for tri in mesh.triangles() {
            for &a in tri {
                for &b in tri {
                    let (ia, ib) = (interior_of[a], interior_of[b]);
                    if ia != usize::MAX && ib != usize::MAX {
                        cols[ib].push(ia);
                    }
                }
            }
        }
        let mut col_ptr = vec![0usize];
        let mut row_idx = Vec::new();
        for c in &mut cols {
            c.sort_unstable();
            c.dedup();
            row_idx.extend_from_slice(c);
            col_ptr.push(row_idx.len());
        }
        let pattern = SymbolicSparseColMat::new_checked(ni, ni, col_ptr, None, row_idx);
        let slots = mesh
            .triangles()
            .iter()
            .map(|tri| {
                let mut s = [NONE; 9];
                for a in 0..3 {
                    for b in 0..3 {
                        let (ia, ib) = (interior_of[tri[a]], interior_of[tri[b]]);
                        if ia != usize::MAX && ib != usize::MAX {
                            let range = pattern.col_range(ib);
                            let rows = &pattern.row_idx()[range.clone()];
                            let pos = rows.binary_search(&ia).expect("pattern covers element couplings");
                            s[3 * a + b] = (range.start + pos) as u32;
                        }
                    }
                }
                s
            })
            .collect();
        let symbolic = SymbolicLlt::try_new(pattern.as_ref(), Side::Lower)
            .map_err(|e| Error::NumericalFailure(format!("symbolic factorization: {e:?}")))?;

        let nb = mesh.boundary_count();
        let mut lumped = vec![0.0; nb];
        for k in 0..nb {
            let a = mesh.nodes()[mesh.boundary_nodes()[k]];
            let b = mesh.nodes()[mesh.boundary_nodes()[(k + 1) % nb]];
            let h = (b - a).norm();
            lumped[k] += 0.5 * h;
            lumped[(k + 1) % nb] += 0.5 * h;
        }

        Ok(Self {
            mesh: mesh.clone(),
            grads,
            areas,
            interior_of,
            boundary_of,
            interior_nodes,
            pattern,
            slots,
            symbolic,
            lumped,
        })
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn node_count(&self) -> usize {
        self.mesh.node_count()
    }

    pub fn element_count(&self) -> usize {
        self.areas.len()
    }

    pub fn boundary_count(&self) -> usize {
        self.mesh.boundary_count()
    }

    pub fn interior_count(&self) -> usize {
        self.interior_nodes.len()
    }

    pub fn interior_nodes(&self) -> &[usize] {
        &self.interior_nodes
    }

    pub fn areas(&self) -> &[f64] {
        &self.areas
    }

    /// Shape-function gradients of element `e`.
    pub fn gradients(&self, e: usize) -> &[Point; 3] {
        &self.grads[e]
    }

    /// Boundary lumped-mass weights (half the adjacent edge lengths).
    pub fn boundary_weights(&self) -> &[f64] {
        &self.lumped
    }

    pub(crate) fn boundary_position(&self, node: usize) -> Option<usize> {
        let k = self.boundary_of[node];
        (k != usize::MAX).then_some(k)
    }

    pub(crate) fn interior_position(&self, node: usize) -> Option<usize> {
        let k = self.interior_of[node];
        (k != usize::MAX).then_some(k)
    }

    /// `∇u` on element `e`.
    pub fn gradient(&self, e: usize, u: &[f64]) -> Point {
        let tri = &self.mesh.triangles()[e];
        let g = &self.grads[e];
        g[0] * u[tri[0]] + g[1] * u[tri[1]] + g[2] * u[tri[2]]
    }

    pub(crate) fn laplace_local(&self, e: usize, c: f64) -> Local {
        let g = &self.grads[e];
        let w = c * self.areas[e];
        let mut k = [[0.0; 3]; 3];
        for a in 0..3 {
            for b in 0..3 {
                k[a][b] = w * g[a].dot(g[b]);
            }
        }
        k
    }

    /// Scatters element matrices into the interior pattern.
    pub(crate) fn assemble_interior(&self, local: impl Fn(usize) -> Local) -> Vec<f64> {
        let mut values = vec![0.0; self.pattern.row_idx().len()];
        for e in 0..self.element_count() {
            let k = local(e);
            for (idx, &slot) in self.slots[e].iter().enumerate() {
                if slot != NONE {
                    values[slot as usize] += k[idx / 3][idx % 3];
                }
            }
        }
        values
    }

    pub(crate) fn factorize(&self, values: &[f64]) -> Result<Llt<usize, f64>> {
        let mat = SparseColMatRef::new(self.pattern.as_ref(), values);
        Llt::try_new_with_symbolic(self.symbolic.clone(), mat, Side::Lower)
            .map_err(|e| Error::NumericalFailure(format!("interior block is not positive definite: {e:?}")))
    }

    pub(crate) fn solve_in_place(llt: &Llt<usize, f64>, rhs: MatMut<'_, f64>) {
        llt.solve_in_place_with_conj(Conj::No, rhs);
    }

    /// Full nodal vector with interior values `x` and boundary trace `f`.
    pub(crate) fn combine(&self, x: &[f64], f: &[f64]) -> Vec<f64> {
        (0..self.node_count())
            .map(|v| match (self.interior_position(v), self.boundary_position(v)) {
                (Some(i), _) => x[i],
                (_, Some(b)) => f[b],
                _ => unreachable!("every node is interior or boundary"),
            })
            .collect()
    }

    pub(crate) fn check_trace(&self, f: &[f64]) -> Result<()> {
        if f.len() != self.boundary_count() {
            return Err(invalid(format!(
                "trace has {} values for {} boundary nodes",
                f.len(),
                self.boundary_count()
            )));
        }
        if f.iter().any(|v| !v.is_finite()) {
            return Err(invalid("trace contains non-finite values"));
        }
        Ok(())
    }

    pub(crate) fn check_field(&self, field: &MaterialField) -> Result<()> {
        if field.element_count() != self.element_count() {
            return Err(invalid(format!(
                "material field has {} elements, mesh has {}",
                field.element_count(),
                self.element_count()
            )));
        }
        Ok(())
    }
}

/// Global stiffness matrix `K_ij = Σ_e c_e ∫_e ∇φ_i·∇φ_j` over all nodes.
pub fn assemble_stiffness(mesh: &Mesh, coeff: &[f64]) -> Result<SparseColMat<usize, f64>> {
    if coeff.len() != mesh.triangle_count() {
        return Err(invalid(format!("{} coefficients for {} elements", coeff.len(), mesh.triangle_count())));
    }
    if let Some(e) = coeff.iter().position(|c| !(*c > 0.0 && c.is_finite())) {
        return Err(invalid(format!("coefficient of element {e} is {}", coeff[e])));
    }
    let mut triplets = Vec::with_capacity(9 * mesh.triangle_count());
    for (e, tri) in mesh.triangles().iter().enumerate() {
        let p = tri.map(|v| mesh.nodes()[v]);
        let twice = 2.0 * mesh.signed_area(e);
        let g = |b: Point, c: Point| Point::new((b.y - c.y) / twice, (c.x - b.x) / twice);
        let grads = [g(p[1], p[2]), g(p[2], p[0]), g(p[0], p[1])];
        let w = coeff[e] * 0.5 * twice;
        for a in 0..3 {
            for b in 0..3 {
                triplets.push(Triplet::new(tri[a], tri[b], w * grads[a].dot(grads[b])));
            }
        }
    }
    SparseColMat::try_new_from_triplets(mesh.node_count(), mesh.node_count(), &triplets)
        .map_err(|e| Error::Internal(format!("stiffness assembly: {e:?}")))
}
