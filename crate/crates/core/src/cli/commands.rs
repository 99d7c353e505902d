use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rayon::prelude::*;

use super::config::Resolved;
use crate::error::{Error, Result};
use crate::fem::{dirichlet_energy, solve_nonlinear_dirichlet, write_field_csv, BoundaryPotential, FemSpace};
use crate::inversion::{
    forward_energies, measure_all, precompute, read_energy_table, reconstruct, test_masks, true_field,
    write_energy_table, write_outline_csv, write_pgm, write_results_manifest, CellStats, ReconstructionResult,
};
use crate::potentials::{load_potentials, save_potentials};

/// Process exit status of an error: 2 configuration, 3 missing artifact,
/// 4 solver failure, 1 anything else.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::InvalidArgument(_) | Error::Parse(_) => 2,
        Error::MissingArtifact(_) => 3,
        Error::ConvergenceFailure { .. }
        | Error::NumericalFailure(_)
        | Error::SelectionFailure { .. }
        | Error::RangeOverflow { .. } => 4,
        Error::Internal(_) | Error::Io(_) => 1,
    }
}

/// Boundary data for the forward command.
#[derive(Debug, Clone, PartialEq)]
pub enum TraceSpec {
    Zero,
    Cos(u32),
    Sin(u32),
    /// One value per boundary node, one per line.
    File(PathBuf),
}

/// Parses `zero`, `cos:N`, `sin:N` or `file:PATH`.
pub fn parse_trace(text: &str) -> Result<TraceSpec> {
    let bad = || Error::Config(format!("trace `{text}`: expected zero, cos:N, sin:N or file:PATH"));
    if text == "zero" {
        return Ok(TraceSpec::Zero);
    }
    let (kind, arg) = text.split_once(':').ok_or_else(bad)?;
    match kind {
        "cos" => Ok(TraceSpec::Cos(arg.parse().map_err(|_| bad())?)),
        "sin" => Ok(TraceSpec::Sin(arg.parse().map_err(|_| bad())?)),
        "file" => Ok(TraceSpec::File(PathBuf::from(arg))),
        _ => Err(bad()),
    }
}

#[derive(Debug, Clone)]
pub struct ForwardReport {
    pub energy: f64,
    pub iterations: usize,
    pub field_csv: PathBuf,
}

/// Solves the true-anomaly problem for one trace and writes `field.csv`.
pub fn cmd_forward(cfg: &Resolved, trace: &TraceSpec, amplitude: f64, out: &Path) -> Result<ForwardReport> {
    let mesh = &cfg.scenario.mesh;
    let space = FemSpace::new(mesh)?;
    let values = match trace {
        TraceSpec::Zero => vec![0.0; mesh.boundary_count()],
        TraceSpec::Cos(n) => mesh.boundary_angles().iter().map(|t| (*n as f64 * t).cos()).collect(),
        TraceSpec::Sin(n) => mesh.boundary_angles().iter().map(|t| (*n as f64 * t).sin()).collect(),
        TraceSpec::File(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?;
            text.lines()
                .filter(|l| !l.trim().is_empty())
                .map(|l| l.trim().parse::<f64>().map_err(|e| Error::Config(format!("{}: {e}", p.display()))))
                .collect::<Result<_>>()?
        }
    };
    if values.len() != mesh.boundary_count() {
        return Err(Error::Config(format!("{} trace values for {} boundary nodes", values.len(), mesh.boundary_count())));
    }
    let field = true_field(&cfg.scenario, mesh)?;
    let f = BoundaryPotential::new(&space, values)?.with_scale(amplitude);
    let sol = solve_nonlinear_dirichlet(&space, &field, &f.trace(), &cfg.newton)?;
    let energy = dirichlet_energy(&space, &field, &sol.u);
    std::fs::create_dir_all(out)?;
    let field_csv = out.join("field.csv");
    write_field_csv(mesh, &sol.u, &field_csv)?;
    std::fs::write(out.join("energy.txt"), format!("{energy:e}\n"))?;
    Ok(ForwardReport { energy, iterations: sol.iterations, field_csv })
}

#[derive(Debug, Clone)]
pub struct PrecomputeReport {
    pub potentials: usize,
    pub stats: Vec<CellStats>,
    pub dir: PathBuf,
}

const SETUP_FILE: &str = "setup.txt";
const RESPONSES_FILE: &str = "responses.csv";

/// Identifies the mesh and grid a potential set was built for.
fn setup_fingerprint(cfg: &Resolved) -> String {
    let s = &cfg.scenario;
    format!(
        "physics {}\nradius {:e}\nboundary_nodes {}\nelements {}\ngrid {} {:e}\nbackground {:e}\nbounds {:e} {:e}\nregime {:?}\n",
        s.physics.name(),
        s.mesh.radius(),
        s.mesh.boundary_count(),
        s.mesh.triangle_count(),
        cfg.grid.cells,
        cfg.grid_spec.half_side,
        s.background,
        s.bounds.lower,
        s.bounds.upper,
        s.regime,
    )
}

/// Synthesizes potentials and stores them with their responses under `dir`.
pub fn cmd_precompute(cfg: &Resolved, dir: &Path) -> Result<PrecomputeReport> {
    cfg.scenario.validate()?;
    let pre = precompute(&cfg.scenario, &cfg.grid, &cfg.potentials, &cfg.newton)?;
    if pre.potentials.is_empty() {
        log::warn!("no potential could be synthesized; every test anomaly will be kept");
    }
    if dir.join("traces").is_dir() {
        std::fs::remove_dir_all(dir.join("traces"))?;
    }
    save_potentials(dir, &pre.potentials)?;
    write_energy_table(dir.join(RESPONSES_FILE), &pre.responses)?;
    std::fs::write(dir.join(SETUP_FILE), setup_fingerprint(cfg))?;
    Ok(PrecomputeReport { potentials: pre.potentials.len(), stats: pre.stats, dir: dir.to_path_buf() })
}

#[derive(Debug, Clone)]
pub struct ReconstructReport {
    pub result: ReconstructionResult,
    pub kept: usize,
}

/// Simulates readings on the true anomaly and applies the keep/discard rule
/// to the stored potentials in `potentials_dir`.
pub fn cmd_reconstruct(cfg: &Resolved, potentials_dir: &Path, out: &Path) -> Result<ReconstructReport> {
    cfg.scenario.validate()?;
    let setup_path = potentials_dir.join(SETUP_FILE);
    let setup = std::fs::read_to_string(&setup_path)
        .map_err(|e| Error::MissingArtifact(format!("{}: {e}", setup_path.display())))?;
    if setup != setup_fingerprint(cfg) {
        return Err(Error::Config(format!(
            "{} was built for a different scenario or grid; rerun precompute",
            potentials_dir.display()
        )));
    }
    let potentials = load_potentials(potentials_dir)?;
    let responses = read_energy_table(potentials_dir.join(RESPONSES_FILE))?;
    let s = &cfg.scenario;
    let energies = forward_energies(s, &potentials, &cfg.newton)?;
    let measurements = measure_all(&energies, s.transducer, &cfg.noise, cfg.seed);
    let masks = test_masks(&s.mesh, &cfg.grid);
    let result = reconstruct(&responses, &measurements, s.transducer, &masks, cfg.seed)?;

    let mut stats = vec![CellStats::default(); cfg.grid.len()];
    for p in &potentials {
        stats[p.test].potentials += 1;
    }
    std::fs::create_dir_all(out)?;
    write_results_manifest(out.join("results.txt"), s, &cfg.grid, &result, &stats)?;
    write_pgm(out.join("union.pgm"), &cfg.grid, &result)?;
    write_outline_csv(out.join("anomaly_outline.csv"), &s.anomaly, 256)?;
    write_energy_table(out.join("histogram.csv"), &energies)?;
    let kept = result.cells.iter().filter(|c| c.kept()).count();
    Ok(ReconstructReport { result, kept })
}

#[derive(Debug, Clone)]
pub struct BenchReport {
    pub stages: Vec<(&'static str, Duration)>,
    pub potentials: usize,
    pub kept: Vec<usize>,
    /// Best rectangle of cells `(row0, col0, row1, col1)` found by exhaustive
    /// misfit minimization, with its misfit and the candidate count.
    pub baseline: Option<((usize, usize, usize, usize), f64, usize, Duration)>,
    pub text: String,
}

/// Times each pipeline stage; with `baseline`, also searches every
/// axis-aligned rectangle of grid cells for the smallest energy misfit
/// over a fixed set of Fourier traces.
pub fn cmd_bench(cfg: &Resolved, baseline: bool) -> Result<BenchReport> {
    let s = &cfg.scenario;
    s.validate()?;
    let mut stages = Vec::new();
    let t = Instant::now();
    let pre = precompute(s, &cfg.grid, &cfg.potentials, &cfg.newton)?;
    stages.push(("precompute", t.elapsed()));
    let t = Instant::now();
    let energies = forward_energies(s, &pre.potentials, &cfg.newton)?;
    let measurements = measure_all(&energies, s.transducer, &cfg.noise, cfg.seed);
    stages.push(("measure", t.elapsed()));
    let t = Instant::now();
    let result = reconstruct(&pre.responses, &measurements, s.transducer, &test_masks(&s.mesh, &cfg.grid), cfg.seed)?;
    stages.push(("reconstruct", t.elapsed()));

    let baseline = if baseline { Some(brute_force(cfg)?) } else { None };
    let mut text = String::new();
    for (name, d) in &stages {
        writeln!(text, "{name:<12} {:>10.3} s", d.as_secs_f64()).unwrap();
    }
    writeln!(text, "potentials   {:>10}", pre.potentials.len()).unwrap();
    writeln!(text, "kept cells   {:>10}", result.kept_indices().len()).unwrap();
    if let Some(((r0, c0, r1, c1), misfit, count, d)) = baseline {
        writeln!(
            text,
            "baseline     {:>10.3} s  {count} candidates, best rows {r0}..={r1} cols {c0}..={c1} (misfit {misfit:.3e})",
            d.as_secs_f64()
        )
        .unwrap();
    }
    Ok(BenchReport { stages, potentials: pre.potentials.len(), kept: result.kept_indices(), baseline, text })
}

const BASELINE_MODES: u32 = 3;

type Rect = (usize, usize, usize, usize);

fn brute_force(cfg: &Resolved) -> Result<(Rect, f64, usize, Duration)> {
    let start = Instant::now();
    let s = &cfg.scenario;
    let space = FemSpace::new(&s.mesh)?;
    let angles = s.mesh.boundary_angles();
    let mut traces = Vec::new();
    for n in 1..=BASELINE_MODES {
        for phase in [0.0, 0.25 * TAU / n as f64] {
            let values = angles.iter().map(|t| (n as f64 * (t - phase)).cos()).collect();
            traces.push(BoundaryPotential::new(&space, values)?);
        }
    }
    let energies_of = |field: &crate::materials::MaterialField| -> Result<Vec<f64>> {
        traces
            .iter()
            .map(|f| {
                let sol = solve_nonlinear_dirichlet(&space, field, &f.trace(), &cfg.newton)?;
                Ok(dirichlet_energy(&space, field, &sol.u))
            })
            .collect()
    };
    let observed = energies_of(&true_field(s, &s.mesh)?)?;
    let n = cfg.grid.cells;
    let mut rects = Vec::new();
    for r0 in 0..n {
        for r1 in r0..n {
            for c0 in 0..n {
                for c1 in c0..n {
                    rects.push((r0, c0, r1, c1));
                }
            }
        }
    }
    let misfits: Vec<f64> = rects
        .par_iter()
        .map(|&(r0, c0, r1, c1)| {
            let cells: Vec<(usize, usize)> = (r0..=r1).flat_map(|r| (c0..=c1).map(move |c| (r, c))).collect();
            let mut candidate = s.clone();
            candidate.anomaly = cfg.grid.union_of(&cells)?;
            let e = energies_of(&true_field(&candidate, &s.mesh)?)?;
            Ok(e.iter().zip(&observed).map(|(a, b)| ((a - b) / b).powi(2)).sum())
        })
        .collect::<Result<_>>()?;
    let (best, misfit) = rects
        .iter()
        .zip(&misfits)
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(r, m)| (*r, *m))
        .ok_or_else(|| Error::Internal("empty candidate set".into()))?;
    Ok((best, misfit, rects.len(), start.elapsed()))
}
