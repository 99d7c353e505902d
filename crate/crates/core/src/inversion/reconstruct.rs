use std::collections::{BTreeMap, BTreeSet};

use super::noise::Measurement;
use crate::error::{invalid, Result};

/// `(test, fictitious, eigenfunction)` key of a potential.
pub type Key = (usize, usize, usize);

/// Stored `⟨Λ̄_T(λf), λf⟩` per potential.
pub type ResponseTable = BTreeMap<Key, f64>;

/// Simulated readings per potential.
pub type MeasurementTable = BTreeMap<Key, Measurement>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Kept,
    Discarded,
}

/// Outcome for one test anomaly.
#[derive(Debug, Clone, PartialEq)]
pub struct CellVerdict {
    pub test: usize,
    pub verdict: Verdict,
    /// Smallest margin over the evaluated potentials.
    pub worst_margin: Option<f64>,
    /// `(fictitious, eigenfunction)` achieving the worst margin.
    pub worst: Option<(usize, usize)>,
    /// Potentials entering the rule.
    pub evaluated: usize,
    /// Potentials skipped for lack of a stored response or a reading.
    pub missing: usize,
}

impl CellVerdict {
    pub fn kept(&self) -> bool {
        self.verdict == Verdict::Kept
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionResult {
    /// One entry per test anomaly, by index.
    pub cells: Vec<CellVerdict>,
    /// Element mask of the union of kept test anomalies.
    pub union_mask: Vec<bool>,
    pub potential_count: usize,
    pub seed: u64,
}

impl ReconstructionResult {
    pub fn kept_indices(&self) -> Vec<usize> {
        self.cells.iter().filter(|c| c.kept()).map(|c| c.test).collect()
    }
}

/// `(M̃ + η₂L)/(1 − η₁) − k·⟨Λ̄_T(λf), λf⟩`.
pub fn margin(measurement: &Measurement, stored: f64, transducer: f64) -> f64 {
    measurement.upper_estimate() - transducer * stored
}

/// Keeps `T_i` iff every margin of its potentials is nonnegative.
///
/// Entries present in only one table are skipped with a warning, which can
/// only keep a cell that would otherwise be discarded.
pub fn reconstruct(
    responses: &ResponseTable,
    measurements: &MeasurementTable,
    transducer: f64,
    test_masks: &[Vec<bool>],
    seed: u64,
) -> Result<ReconstructionResult> {
    if !(transducer > 0.0 && transducer.is_finite()) {
        return Err(invalid(format!("transducer constant must be positive, got {transducer}")));
    }
    let elements = test_masks.first().map_or(0, Vec::len);
    if test_masks.iter().any(|m| m.len() != elements) {
        return Err(invalid("test masks differ in length"));
    }
    let keys: BTreeSet<Key> = responses.keys().chain(measurements.keys()).copied().collect();
    if let Some(&(i, _, _)) = keys.iter().find(|k| k.0 >= test_masks.len()) {
        return Err(invalid(format!("test index {i} has no mask ({} test anomalies)", test_masks.len())));
    }
    let mut cells: Vec<CellVerdict> = (0..test_masks.len())
        .map(|test| CellVerdict { test, verdict: Verdict::Kept, worst_margin: None, worst: None, evaluated: 0, missing: 0 })
        .collect();
    for key in &keys {
        let cell = &mut cells[key.0];
        let (Some(stored), Some(m)) = (responses.get(key), measurements.get(key)) else {
            log::warn!("potential {key:?} lacks a stored response or a reading; skipped");
            cell.missing += 1;
            continue;
        };
        let value = margin(m, *stored, transducer);
        cell.evaluated += 1;
        // keys arrive sorted, so ties keep the smallest (j, k)
        if cell.worst_margin.is_none_or(|w| value < w) {
            cell.worst_margin = Some(value);
            cell.worst = Some((key.1, key.2));
        }
        if !(value >= 0.0) {
            cell.verdict = Verdict::Discarded;
        }
    }
    let mut union_mask = vec![false; elements];
    for (cell, mask) in cells.iter().zip(test_masks) {
        if cell.kept() {
            for (u, &m) in union_mask.iter_mut().zip(mask) {
                *u |= m;
            }
        }
    }
    Ok(ReconstructionResult { cells, union_mask, potential_count: keys.len(), seed })
}
