//! Imaging pipeline: stored test-anomaly responses, simulated readings on the
//! true anomaly and the keep/discard rule.

mod artifacts;
mod grid;
mod noise;
mod pipeline;
mod reconstruct;
mod scenario;

pub use artifacts::{
    read_energy_table, read_pgm, write_energy_table, write_outline_csv, write_pgm, write_results_manifest,
};
pub use grid::{GridSpec, TestGrid, DEFAULT_HALF_SIDE};
pub use noise::{Measurement, NoiseModel, NoiseRange, KEITHLEY_2002};
pub use pipeline::{
    fictitious_set, forward_energies, measure, measure_all, precompute, precompute_responses, resample_trace,
    run_pipeline, test_masks, true_field, CellStats, PipelineOutput, PotentialSpec, Precomputed,
};
pub use reconstruct::{
    margin, reconstruct, CellVerdict, Key, MeasurementTable, ReconstructionResult, ResponseTable, Verdict,
};
pub use scenario::{Physics, Preset, Scenario};
