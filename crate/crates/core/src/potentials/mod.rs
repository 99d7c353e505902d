//! Test boundary potentials: bounding fields, negative eigenspaces of DtN
//! differences, fictitious anomalies and amplitude selection.

mod bounds;
mod eigen;
mod fictitious;
mod scaling;
mod store;

pub use bounds::{build_bounding_laws, test_anomaly_field, BoundingLaws, Regime};
pub use eigen::{c0_of_combination, negative_eigenspace, EigenPair, EIG_REL_TOL};
pub use fictitious::{fictitious_anomalies, FictitiousStyle, TANGENT_GAP};
pub use scaling::{select_scaling, MAX_HALVINGS};
use scaling::select_scaling_with_energy;
pub use store::{load_potentials, save_potentials};

use crate::error::Result;
use crate::fem::{BoundaryPotential, DtNMatrix, FemSpace, NewtonOptions};
use crate::materials::MaterialField;

/// One applied potential `λf` with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct TestPotential {
    /// Unit trace and the selected amplitude `λ` as its scale.
    pub trace: BoundaryPotential,
    /// Most negative eigenvalue contributing to the trace.
    pub delta: f64,
    /// Test anomaly index.
    pub test: usize,
    /// Fictitious anomaly index.
    pub fictitious: usize,
    /// Eigenfunction index; `k_max` denotes the sum of the kept eigenfunctions.
    pub index: usize,
}

impl TestPotential {
    pub fn lambda(&self) -> f64 {
        self.trace.scale()
    }

    pub fn key(&self) -> (usize, usize, usize) {
        (self.test, self.fictitious, self.index)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthesisOptions {
    /// Eigenfunctions kept per pair.
    pub k_max: usize,
    /// Also emit the normalized sum of the kept eigenfunctions.
    pub include_sum: bool,
    /// Fraction of `|c₀|` given up as slack in the scaling test.
    pub alpha: f64,
    /// Multiplier of the starting amplitude.
    pub lambda_init: f64,
    /// When set, the starting amplitude is chosen so that the lower-bound
    /// energy `½λ²fᵀK_T f` equals this value (times `lambda_init²`).
    pub target_energy: Option<f64>,
}

impl Default for SynthesisOptions {
    fn default() -> Self {
        Self { k_max: 3, include_sum: true, alpha: 0.5, lambda_init: 1.0, target_energy: None }
    }
}

/// Potentials of one (test anomaly, fictitious anomaly) pair.
#[derive(Debug, Clone, Default)]
pub struct PairPotentials {
    pub potentials: Vec<TestPotential>,
    /// `⟨Λ̄_T(λf), λf⟩` of each potential against its own test anomaly.
    pub responses: Vec<f64>,
    /// Candidates dropped because no admissible amplitude was found.
    pub skipped: usize,
}

/// Eigenfunctions of `K_F − K_T` with negative eigenvalues, each scaled by
/// [`select_scaling`] against the test-anomaly field.
#[allow(clippy::too_many_arguments)]
pub fn synthesize_pair(
    space: &FemSpace,
    k_f: &DtNMatrix,
    k_t: &DtNMatrix,
    t_field: &MaterialField,
    test: usize,
    fictitious: usize,
    opts: &SynthesisOptions,
    newton: &NewtonOptions,
) -> Result<PairPotentials> {
    let pairs = negative_eigenspace(k_f, k_t, opts.k_max)?;
    let mut candidates: Vec<(usize, Vec<f64>, f64, f64)> = Vec::new();
    for (k, p) in pairs.iter().enumerate() {
        candidates.push((k, p.vector.clone(), p.delta, c0_of_combination(std::slice::from_ref(p), &[1.0], &k_f.mass)?));
    }
    if opts.include_sum && pairs.len() > 1 {
        let n = k_f.dim();
        let sum: Vec<f64> = (0..n).map(|i| pairs.iter().map(|p| p.vector[i]).sum()).collect();
        let norm = (pairs.len() as f64).sqrt();
        let betas = vec![1.0 / norm; pairs.len()];
        let c0 = c0_of_combination(&pairs, &betas, &k_f.mass)?;
        candidates.push((opts.k_max, sum.iter().map(|v| v / norm).collect(), pairs[0].delta, c0));
    }

    let mut out = PairPotentials::default();
    for (index, values, delta, c0) in candidates {
        let lower_form = k_t.quadratic_form(&values);
        let start = match opts.target_energy {
            Some(e) => opts.lambda_init * (2.0 * e / lower_form).sqrt(),
            None => opts.lambda_init,
        };
        let trace = BoundaryPotential::from_parts(values, 1.0);
        match select_scaling_with_energy(space, &trace, t_field, lower_form, c0, opts.alpha, start, newton) {
            Ok((lambda, energy)) => {
                out.potentials.push(TestPotential { trace: trace.with_scale(lambda), delta, test, fictitious, index });
                out.responses.push(energy);
            }
            Err(e) => {
                log::warn!("potential ({test},{fictitious},{index}) skipped: {e}");
                out.skipped += 1;
            }
        }
    }
    Ok(out)
}
