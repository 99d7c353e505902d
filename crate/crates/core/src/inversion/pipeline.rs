use std::collections::HashMap;
use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::{GridSpec, TestGrid};
use super::noise::{Measurement, NoiseModel};
use super::reconstruct::{reconstruct, Key, MeasurementTable, ReconstructionResult, ResponseTable};
use super::scenario::Scenario;
use crate::error::{invalid, Error, Result};
use crate::fem::{avg_dtn_pairing, schur_dtn_matrix, BoundaryPotential, DtNMatrix, FemSpace, NewtonOptions};
use crate::geometry::{classify_elements, Mesh, Region};
use crate::materials::{MaterialField, OutsideRule};
use crate::potentials::{
    fictitious_anomalies, synthesize_pair, test_anomaly_field, FictitiousStyle, SynthesisOptions, TestPotential,
};

/// How test potentials are generated.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialSpec {
    /// Tangent directions per fictitious style.
    pub directions: usize,
    pub styles: Vec<FictitiousStyle>,
    pub synthesis: SynthesisOptions,
    /// Reading (V) aimed at by the starting amplitude of each potential.
    pub target_voltage: f64,
}

impl Default for PotentialSpec {
    fn default() -> Self {
        Self {
            directions: 4,
            styles: vec![FictitiousStyle::ConvexTangent, FictitiousStyle::ConcavePair],
            synthesis: SynthesisOptions::default(),
            target_voltage: 1.0,
        }
    }
}

/// Counts of one test anomaly.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellStats {
    /// Fictitious anomalies with at least one element.
    pub fictitious: usize,
    pub potentials: usize,
    /// Candidates without an admissible amplitude.
    pub skipped: usize,
}

/// Potentials with their stored responses.
#[derive(Debug, Clone)]
pub struct Precomputed {
    pub potentials: Vec<TestPotential>,
    pub responses: ResponseTable,
    pub stats: Vec<CellStats>,
}

/// Element masks of the test anomalies.
pub fn test_masks(mesh: &Mesh, grid: &TestGrid) -> Vec<Vec<bool>> {
    grid.regions.iter().map(|r| classify_elements(mesh, r)).collect()
}

/// Fictitious anomalies of one test anomaly, numbered across styles.
pub fn fictitious_set(t: &Region, radius: f64, spec: &PotentialSpec) -> Result<Vec<Region>> {
    let mut out = Vec::new();
    for &style in &spec.styles {
        out.extend(fictitious_anomalies(t, radius, style, spec.directions)?);
    }
    Ok(out)
}

struct Pair {
    test: usize,
    fictitious: usize,
    upper: usize,
}

/// Builds fictitious anomalies, synthesizes and scales the potentials of
/// every (test, fictitious) pair, and keeps each potential's energy against
/// its own test anomaly as the stored response.
pub fn precompute(
    scenario: &Scenario,
    grid: &TestGrid,
    spec: &PotentialSpec,
    newton: &NewtonOptions,
) -> Result<Precomputed> {
    if !(spec.target_voltage > 0.0 && spec.target_voltage.is_finite()) {
        return Err(invalid(format!("target voltage must be positive, got {}", spec.target_voltage)));
    }
    let mesh = &scenario.mesh;
    let space = FemSpace::new(mesh)?;
    let ne = mesh.triangle_count();
    let background = vec![scenario.background; ne];
    let lower = scenario.lower_bound()?;
    let masks = test_masks(mesh, grid);

    let mut upper_masks: Vec<Vec<bool>> = Vec::new();
    let mut upper_index: HashMap<Vec<bool>, usize> = HashMap::new();
    let mut pairs = Vec::new();
    let mut stats = vec![CellStats::default(); grid.len()];
    for (i, t) in grid.regions.iter().enumerate() {
        if !masks[i].contains(&true) {
            log::warn!("test anomaly {i} covers no element; it cannot be discarded");
            continue;
        }
        for (j, f) in fictitious_set(t, mesh.radius(), spec)?.iter().enumerate() {
            let mask = classify_elements(mesh, f);
            if !mask.contains(&true) {
                continue;
            }
            if mask.iter().zip(&masks[i]).any(|(a, b)| *a && *b) {
                return Err(Error::Internal(format!("fictitious anomaly {j} overlaps test anomaly {i}")));
            }
            stats[i].fictitious += 1;
            let next = upper_masks.len();
            let upper = *upper_index.entry(mask.clone()).or_insert_with(|| {
                upper_masks.push(mask);
                next
            });
            pairs.push(Pair { test: i, fictitious: j, upper });
        }
    }
    log::info!("{} pairs, {} distinct fictitious masks", pairs.len(), upper_masks.len());

    let upper_k: Vec<DtNMatrix> = upper_masks
        .par_iter()
        .map(|m| schur_dtn_matrix(&space, &MaterialField::linear_inclusion(&background, m, scenario.bounds.upper)?))
        .collect::<Result<_>>()?;
    let lower_k: Vec<Option<DtNMatrix>> = masks
        .par_iter()
        .map(|m| {
            if !m.contains(&true) {
                return Ok(None);
            }
            schur_dtn_matrix(&space, &MaterialField::linear_inclusion(&background, m, lower)?).map(Some)
        })
        .collect::<Result<_>>()?;
    let t_fields: Vec<MaterialField> = masks
        .iter()
        .map(|m| test_anomaly_field(&background, m, &scenario.law, scenario.regime))
        .collect::<Result<_>>()?;

    let opts = SynthesisOptions { target_energy: Some(spec.target_voltage / scenario.transducer), ..spec.synthesis };
    let results: Vec<_> = pairs
        .par_iter()
        .map(|p| {
            let k_t = lower_k[p.test].as_ref().expect("nonempty test mask");
            synthesize_pair(&space, &upper_k[p.upper], k_t, &t_fields[p.test], p.test, p.fictitious, &opts, newton)
        })
        .collect::<Result<_>>()?;

    let mut potentials = Vec::new();
    let mut responses = ResponseTable::new();
    for (p, r) in pairs.iter().zip(results) {
        stats[p.test].potentials += r.potentials.len();
        stats[p.test].skipped += r.skipped;
        for (pot, energy) in r.potentials.into_iter().zip(r.responses) {
            responses.insert(pot.key(), energy);
            potentials.push(pot);
        }
    }
    potentials.sort_by_key(TestPotential::key);
    let bare: Vec<usize> = (0..stats.len()).filter(|&i| stats[i].potentials == 0).collect();
    if !bare.is_empty() {
        log::warn!("{} test anomalies received no potential and cannot be discarded: {bare:?}", bare.len());
    }
    Ok(Precomputed { potentials, responses, stats })
}

/// Recomputes `⟨Λ̄_T(λf), λf⟩` for each potential against its test anomaly;
/// failed solves are logged and left out.
pub fn precompute_responses(
    scenario: &Scenario,
    grid: &TestGrid,
    potentials: &[TestPotential],
    newton: &NewtonOptions,
) -> Result<ResponseTable> {
    let mesh = &scenario.mesh;
    let space = FemSpace::new(mesh)?;
    let background = vec![scenario.background; mesh.triangle_count()];
    let masks = test_masks(mesh, grid);
    check_traces(&space, grid, potentials)?;
    let energies: Vec<Option<f64>> = potentials
        .par_iter()
        .map(|p| {
            let field = test_anomaly_field(&background, &masks[p.test], &scenario.law, scenario.regime)?;
            Ok(logged(p.key(), avg_dtn_pairing(&space, &field, &p.trace, newton)))
        })
        .collect::<Result<_>>()?;
    Ok(potentials.iter().zip(energies).filter_map(|(p, e)| e.map(|e| (p.key(), e))).collect())
}

fn logged(key: Key, r: Result<f64>) -> Option<f64> {
    match r {
        Ok(v) => Some(v),
        Err(e) => {
            log::warn!("potential {key:?}: {e}");
            None
        }
    }
}

fn check_traces(space: &FemSpace, grid: &TestGrid, potentials: &[TestPotential]) -> Result<()> {
    for p in potentials {
        if p.trace.values().len() != space.boundary_count() {
            return Err(Error::Config(format!(
                "potential {:?} has {} boundary values, the mesh has {}",
                p.key(),
                p.trace.values().len(),
                space.boundary_count()
            )));
        }
        if p.test >= grid.len() {
            return Err(Error::Config(format!("potential {:?} refers to a missing test anomaly", p.key())));
        }
    }
    Ok(())
}

/// Material of the true anomaly: the law on `A`, the background elsewhere.
pub fn true_field(scenario: &Scenario, mesh: &Mesh) -> Result<MaterialField> {
    let ne = mesh.triangle_count();
    MaterialField::with_anomaly(
        vec![scenario.background; ne],
        classify_elements(mesh, &scenario.anomaly),
        scenario.law.clone(),
        OutsideRule::Background,
    )
}

/// Periodic piecewise-linear resampling of boundary values in angle.
pub fn resample_trace(from_angles: &[f64], values: &[f64], to_angles: &[f64]) -> Result<Vec<f64>> {
    if from_angles.len() != values.len() || from_angles.len() < 2 {
        return Err(invalid("resampling needs matching angles and at least two values"));
    }
    let mut order: Vec<usize> = (0..from_angles.len()).collect();
    let wrap = |a: f64| a.rem_euclid(TAU);
    order.sort_by(|&a, &b| wrap(from_angles[a]).total_cmp(&wrap(from_angles[b])));
    let xs: Vec<f64> = order.iter().map(|&i| wrap(from_angles[i])).collect();
    let ys: Vec<f64> = order.iter().map(|&i| values[i]).collect();
    let n = xs.len();
    Ok(to_angles
        .iter()
        .map(|&a| {
            let a = wrap(a);
            let hi = xs.partition_point(|&x| x <= a);
            let (x0, y0, x1, y1) = if hi == 0 {
                (xs[n - 1] - TAU, ys[n - 1], xs[0], ys[0])
            } else if hi == n {
                (xs[n - 1], ys[n - 1], xs[0] + TAU, ys[0])
            } else {
                (xs[hi - 1], ys[hi - 1], xs[hi], ys[hi])
            };
            y0 + (y1 - y0) * (a - x0) / (x1 - x0)
        })
        .collect())
}

/// Noiseless `⟨Λ̄_A(λf), λf⟩` per potential on the measurement mesh.
pub fn forward_energies(
    scenario: &Scenario,
    potentials: &[TestPotential],
    newton: &NewtonOptions,
) -> Result<ResponseTable> {
    let mesh = scenario.measurement_mesh();
    let space = FemSpace::new(mesh)?;
    let field = true_field(scenario, mesh)?;
    let from = scenario.mesh.boundary_angles();
    let to = mesh.boundary_angles();
    let refined = scenario.measurement_mesh.is_some();
    let energies: Vec<Option<f64>> = potentials
        .par_iter()
        .map(|p| {
            let trace = if refined {
                BoundaryPotential::new(&space, resample_trace(&from, p.trace.values(), &to)?)?.with_scale(p.lambda())
            } else {
                p.trace.clone()
            };
            Ok(logged(p.key(), avg_dtn_pairing(&space, &field, &trace, newton)))
        })
        .collect::<Result<_>>()?;
    Ok(potentials.iter().zip(energies).filter_map(|(p, e)| e.map(|e| (p.key(), e))).collect())
}

/// Readings `k·E` with seeded noise; out-of-range readings are logged and left out.
pub fn measure_all(energies: &ResponseTable, transducer: f64, noise: &NoiseModel, seed: u64) -> MeasurementTable {
    energies
        .iter()
        .filter_map(|(&key, &e)| match noise.apply(transducer * e, seed, key) {
            Ok(m) => Some((key, m)),
            Err(err) => {
                log::warn!("potential {key:?}: {err}");
                None
            }
        })
        .collect()
}

/// One reading of one potential on the true anomaly.
pub fn measure(
    scenario: &Scenario,
    potential: &TestPotential,
    noise: &NoiseModel,
    seed: u64,
    newton: &NewtonOptions,
) -> Result<Measurement> {
    let energies = forward_energies(scenario, std::slice::from_ref(potential), newton)?;
    let energy = energies
        .get(&potential.key())
        .ok_or_else(|| Error::NumericalFailure(format!("forward solve failed for {:?}", potential.key())))?;
    noise.apply(scenario.transducer * energy, seed, potential.key())
}

/// Everything produced by [`run_pipeline`].
#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub grid: TestGrid,
    pub precomputed: Precomputed,
    /// Noiseless energies on the true anomaly.
    pub energies: ResponseTable,
    pub measurements: MeasurementTable,
    pub result: ReconstructionResult,
}

/// Grid, fictitious anomalies, potentials, stored responses, simulated
/// readings and the reconstruction, in that order.
pub fn run_pipeline(
    scenario: &Scenario,
    grid: GridSpec,
    spec: &PotentialSpec,
    noise: &NoiseModel,
    seed: u64,
    newton: &NewtonOptions,
) -> Result<PipelineOutput> {
    scenario.validate()?;
    let grid = TestGrid::new(scenario.mesh.radius(), grid)?;
    let precomputed = precompute(scenario, &grid, spec, newton)?;
    let energies = forward_energies(scenario, &precomputed.potentials, newton)?;
    let measurements = measure_all(&energies, scenario.transducer, noise, seed);
    let result = reconstruct(
        &precomputed.responses,
        &measurements,
        scenario.transducer,
        &test_masks(&scenario.mesh, &grid),
        seed,
    )?;
    Ok(PipelineOutput { grid, precomputed, energies, measurements, result })
}
