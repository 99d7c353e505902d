//! Constitutive laws `γ(s)`, their energy densities and per-element material fields.

mod analysis;
mod bruggeman;
mod field;
mod law;
pub mod presets;
pub mod quadrature;
mod tabulated;

pub use analysis::{
    intersection_s0, lower_bound_on_range, verify_assumptions, verify_assumptions_on, AssumptionReport,
    MaterialBounds,
};
pub use bruggeman::{bruggeman_effective, bruggeman_sensitivity};
pub use field::{MaterialField, OutsideRule};
pub use law::{CustomLaw, MaterialLaw, ENERGY_REL_TOL};
pub use tabulated::TabulatedLaw;
