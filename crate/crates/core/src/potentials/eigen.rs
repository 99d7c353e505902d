use faer::linalg::triangular_solve::{solve_lower_triangular_in_place, solve_upper_triangular_in_place};
use faer::{Mat, Par, Side};

use crate::error::{invalid, Error, Result};
use crate::fem::{quadratic_form, DtNMatrix};

/// Relative threshold below which an eigenvalue counts as negative.
pub const EIG_REL_TOL: f64 = 1e-10;

/// Generalized eigenpair `(K_F − K_T)v = δMv` with `vᵀMv = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub delta: f64,
    pub vector: Vec<f64>,
}

/// Up to `k_max` most negative eigenpairs of `K_F − K_T` relative to the
/// boundary mass, on the subspace `M`-orthogonal to constants.
///
/// Eigenvalues count as negative below `−EIG_REL_TOL · max|δ|`.
pub fn negative_eigenspace(k_f: &DtNMatrix, k_t: &DtNMatrix, k_max: usize) -> Result<Vec<EigenPair>> {
    let n = k_f.dim();
    if k_t.dim() != n || k_f.mass.nrows() != n {
        return Err(invalid("DtN matrices act on different boundary sets"));
    }
    let mass = &k_f.mass;
    let llt = mass
        .llt(Side::Lower)
        .map_err(|e| Error::NumericalFailure(format!("boundary mass is not positive definite: {e:?}")))?;
    let l = llt.L();

    // B = L⁻¹ D L⁻ᵀ
    let mut b = Mat::<f64>::from_fn(n, n, |i, j| k_f.matrix[(i, j)] - k_t.matrix[(i, j)]);
    solve_lower_triangular_in_place(l, b.as_mut(), Par::Seq);
    let mut bt = b.transpose().to_owned();
    solve_lower_triangular_in_place(l, bt.as_mut(), Par::Seq);

    // w0 = Lᵀ1 spans the constants in the transformed metric
    let mut w0: Vec<f64> = (0..n).map(|j| (j..n).map(|i| l[(i, j)]).sum()).collect();
    let norm = w0.iter().map(|x| x * x).sum::<f64>().sqrt();
    w0.iter_mut().for_each(|x| *x /= norm);
    let bw: Vec<f64> = (0..n).map(|i| (0..n).map(|j| bt[(i, j)] * w0[j]).sum()).collect();
    let wbw: f64 = bw.iter().zip(&w0).map(|(a, b)| a * b).sum();
    let projected = Mat::<f64>::from_fn(n, n, |i, j| {
        let sym = 0.5 * (bt[(i, j)] + bt[(j, i)]);
        sym - w0[i] * bw[j] - bw[i] * w0[j] + wbw * w0[i] * w0[j]
    });
    // the dense solver loses accuracy on matrices with large entries
    let entry_max = (0..n).flat_map(|j| (0..n).map(move |i| (i, j))).fold(0.0f64, |m, (i, j)| m.max(projected[(i, j)].abs()));
    if !entry_max.is_finite() {
        return Err(Error::NumericalFailure("non-finite DtN difference".into()));
    }
    if entry_max == 0.0 {
        return Ok(Vec::new());
    }
    let projected = Mat::<f64>::from_fn(n, n, |i, j| projected[(i, j)] / entry_max);

    let eig = projected
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::NumericalFailure(format!("eigendecomposition failed: {e:?}")))?;
    let values: Vec<f64> = (0..n).map(|k| eig.S()[k] * entry_max).collect();
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let threshold = -EIG_REL_TOL * scale;
    let u = eig.U();

    let mut pairs = Vec::new();
    for (k, &delta) in values.iter().enumerate() {
        if pairs.len() == k_max || !(delta < threshold) {
            break;
        }
        let mut v = Mat::<f64>::from_fn(n, 1, |i, _| u[(i, k)]);
        solve_upper_triangular_in_place(l.transpose(), v.as_mut(), Par::Seq);
        let mut vector: Vec<f64> = (0..n).map(|i| v[(i, 0)]).collect();
        let m_norm = quadratic_form(mass, &vector).sqrt();
        vector.iter_mut().for_each(|x| *x /= m_norm);
        pairs.push(EigenPair { delta, vector });
    }
    Ok(pairs)
}

/// `c₀ = ½ Σ δ_k β_k² ‖φ_k‖²_M`.
pub fn c0_of_combination(pairs: &[EigenPair], betas: &[f64], mass: &Mat<f64>) -> Result<f64> {
    if pairs.len() != betas.len() {
        return Err(invalid("one coefficient per eigenpair is required"));
    }
    if betas.iter().all(|&b| b == 0.0) {
        return Err(invalid("all combination coefficients are zero"));
    }
    if pairs.iter().any(|p| !(p.delta < 0.0)) {
        return Err(invalid("every eigenvalue in the combination must be negative"));
    }
    Ok(0.5
        * pairs
            .iter()
            .zip(betas)
            .map(|(p, b)| p.delta * b * b * quadratic_form(mass, &p.vector))
            .sum::<f64>())
}
