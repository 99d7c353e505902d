//! First-order Galerkin discretization, Newton solver and discrete
//! Dirichlet-to-Neumann operators.

mod dtn;
mod solve;
mod space;

use std::io::Write;
use std::path::Path;

pub use dtn::{
    avg_dtn_by_quadrature, avg_dtn_pairing, boundary_mass_matrix, dirichlet_energy, dtn_pairing, flux_pairing,
    schur_dtn_matrix, schur_from_coefficients, BoundaryPotential, DtNMatrix,
};
pub(crate) use dtn::quadratic_form;
pub use solve::{
    apply_tangent, residual, solve_linear_dirichlet, solve_nonlinear_dirichlet, solve_with_coefficients,
    NewtonOptions, Solution,
};
pub use space::{assemble_stiffness, FemSpace};

use crate::error::{invalid, Result};
use crate::geometry::Mesh;

/// Writes `node,x,y,u` rows.
pub fn write_field_csv(mesh: &Mesh, u: &[f64], path: impl AsRef<Path>) -> Result<()> {
    if u.len() != mesh.node_count() {
        return Err(invalid(format!("{} values for {} nodes", u.len(), mesh.node_count())));
    }
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "node,x,y,u")?;
    for (i, (p, v)) in mesh.nodes().iter().zip(u).enumerate() {
        writeln!(out, "{i},{:.17e},{:.17e},{:.17e}", p.x, p.y, v)?;
    }
    out.flush()?;
    Ok(())
}
