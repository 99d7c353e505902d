//! C interface to the monotomo imaging toolkit.
//!
//! Every entry point returns an [`MtStatus`]; results go through out
//! pointers. Handles are opaque and released with the matching `_free`
//! function. After a non-`Ok` status, [`mt_last_error`] describes the failure
//! on the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};

use monotomo::cli::{cmd_precompute, cmd_reconstruct, Resolved, RunConfig};
use monotomo::fem::{avg_dtn_pairing, BoundaryPotential, FemSpace};
use monotomo::inversion::{
    forward_energies, measure_all, precompute, reconstruct, test_masks, true_field, Precomputed, ReconstructionResult,
};
use monotomo::materials::bruggeman_effective;
use monotomo::Error;

/// Result of a call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MtStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    MissingArtifact = 4,
    SolverFailure = 5,
    Io = 6,
    Internal = 7,
    Panic = 8,
}

/// Resolved run configuration.
pub struct MtConfig {
    inner: Resolved,
}

/// Test potentials with their stored responses.
pub struct MtPotentials {
    inner: Precomputed,
}

/// Per-cell verdicts of one reconstruction.
pub struct MtReconstruction {
    inner: ReconstructionResult,
    cells: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> MtStatus {
    match err {
        Error::InvalidArgument(_) => MtStatus::InvalidArgument,
        Error::Config(_) | Error::Parse(_) => MtStatus::Config,
        Error::MissingArtifact(_) => MtStatus::MissingArtifact,
        Error::ConvergenceFailure { .. }
        | Error::NumericalFailure(_)
        | Error::SelectionFailure { .. }
        | Error::RangeOverflow { .. } => MtStatus::SolverFailure,
        Error::Io(_) => MtStatus::Io,
        Error::Internal(_) => MtStatus::Internal,
    }
}

enum Fail {
    Null(&'static str),
    Core(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Core(e)
    }
}

fn guard(body: impl FnOnce() -> Result<(), Fail>) -> MtStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            MtStatus::Ok
        }
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("{what} is null"));
            MtStatus::NullPointer
        }
        Ok(Err(Fail::Core(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            MtStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or(Fail::Null(what))
}

unsafe fn path(p: *const c_char, what: &'static str) -> Result<PathBuf, Fail> {
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    let s = CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Error::InvalidArgument(format!("{what} is not valid UTF-8")))?;
    Ok(PathBuf::from(s))
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn mt_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn mt_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Effective conductivity of a two-phase mixture.
///
/// # Safety
/// `result` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mt_bruggeman_effective(sigma1: f64, sigma2: f64, fraction1: f64, result: *mut f64) -> MtStatus {
    guard(|| {
        *out(result, "result")? = bruggeman_effective(sigma1, sigma2, fraction1)?;
        Ok(())
    })
}

/// Loads a TOML run configuration. Relative paths inside it resolve against
/// the file's directory.
///
/// # Safety
/// `file` must be a NUL-terminated string; `config` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mt_config_load(file: *const c_char, config: *mut *mut MtConfig) -> MtStatus {
    guard(|| {
        let slot = out(config, "config")?;
        let file = path(file, "file")?;
        let base = file.parent().unwrap_or(Path::new(".")).to_path_buf();
        let inner = RunConfig::load(&file)?.resolve(&base)?;
        *slot = Box::into_raw(Box::new(MtConfig { inner }));
        Ok(())
    })
}

/// Parses a configuration from TOML text; `base_dir` may be null for the
/// current directory.
///
/// # Safety
/// `text` and a non-null `base_dir` must be NUL-terminated strings;
/// `config` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mt_config_parse(
    text: *const c_char,
    base_dir: *const c_char,
    config: *mut *mut MtConfig,
) -> MtStatus {
    guard(|| {
        let slot = out(config, "config")?;
        if text.is_null() {
            return Err(Fail::Null("text"));
        }
        let text = CStr::from_ptr(text)
            .to_str()
            .map_err(|_| Error::InvalidArgument("text is not valid UTF-8".into()))?;
        let base = if base_dir.is_null() { PathBuf::from(".") } else { path(base_dir, "base_dir")? };
        let inner = RunConfig::from_toml(text)?.resolve(&base)?;
        *slot = Box::into_raw(Box::new(MtConfig { inner }));
        Ok(())
    })
}

/// # Safety
/// `config` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn mt_config_free(config: *mut MtConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Replaces the noise seed.
///
/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn mt_config_set_seed(config: *mut MtConfig, seed: u64) -> MtStatus {
    guard(|| {
        out(config, "config")?.inner.seed = seed;
        Ok(())
    })
}

/// Number of boundary nodes, i.e. the length of a boundary trace.
///
/// # Safety
/// `config` must be a live handle; `count` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mt_config_boundary_nodes(config: *const MtConfig, count: *mut usize) -> MtStatus {
    guard(|| {
        *out(count, "count")? = deref(config, "config")?.inner.scenario.mesh.boundary_count();
        Ok(())
    })
}

/// Grid cells per side.
///
/// # Safety
/// `config` must be a live handle; `cells` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mt_config_grid_cells(config: *const MtConfig, cells: *mut usize) -> MtStatus {
    guard(|| {
        *out(cells, "cells")? = deref(config, "config")?.inner.grid.cells;
        Ok(())
    })
}

/// Boundary angles of the trace entries, `len` must equal the boundary
/// node count.
///
/// # Safety
/// `angles` must be valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn mt_config_boundary_angles(config: *const MtConfig, angles: *mut f64, len: usize) -> MtStatus {
    guard(|| {
        let mesh = &deref(config, "config")?.inner.scenario.mesh;
        if angles.is_null() {
            return Err(Fail::Null("angles"));
        }
        if len != mesh.boundary_count() {
            return Err(Error::InvalidArgument(format!("{len} slots for {} boundary nodes", mesh.boundary_count())).into());
        }
        std::slice::from_raw_parts_mut(angles, len).copy_from_slice(&mesh.boundary_angles());
        Ok(())
    })
}

/// Energy `⟨Λ̄(f), f⟩` of the configured anomaly for the trace
/// `amplitude·trace` (the trace is made zero-mean first).
///
/// # Safety
/// `trace` must be valid for `len` reads; `energy` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mt_forward_energy(
    config: *const MtConfig,
    trace: *const f64,
    len: usize,
    amplitude: f64,
    energy: *mut f64,
) -> MtStatus {
    guard(|| {
        let cfg = &deref(config, "config")?.inner;
        let slot = out(energy, "energy")?;
        if trace.is_null() {
            return Err(Fail::Null("trace"));
        }
        let mesh = &cfg.scenario.mesh;
        let space = FemSpace::new(mesh)?;
        let f = BoundaryPotential::new(&space, std::slice::from_raw_parts(trace, len).to_vec())?.with_scale(amplitude);
        let field = true_field(&cfg.scenario, mesh)?;
        *slot = avg_dtn_pairing(&space, &field, &f, &cfg.newton)?;
        Ok(())
    })
}

/// Builds the test potentials in memory.
///
/// # Safety
/// `config` must be a live handle; `potentials` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mt_precompute(config: *const MtConfig, potentials: *mut *mut MtPotentials) -> MtStatus {
    guard(|| {
        let cfg = &deref(config, "config")?.inner;
        let slot = out(potentials, "potentials")?;
        cfg.scenario.validate()?;
        let inner = precompute(&cfg.scenario, &cfg.grid, &cfg.potentials, &cfg.newton)?;
        *slot = Box::into_raw(Box::new(MtPotentials { inner }));
        Ok(())
    })
}

/// # Safety
/// `potentials` must be a live handle; `count` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mt_potentials_count(potentials: *const MtPotentials, count: *mut usize) -> MtStatus {
    guard(|| {
        *out(count, "count")? = deref(potentials, "potentials")?.inner.potentials.len();
        Ok(())
    })
}

/// # Safety
/// `potentials` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn mt_potentials_free(potentials: *mut MtPotentials) {
    if !potentials.is_null() {
        drop(Box::from_raw(potentials));
    }
}

/// Simulates readings of the configured anomaly with the configured noise
/// and seed, then classifies every test cell.
///
/// # Safety
/// Handles must be live; `result` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mt_reconstruct(
    config: *const MtConfig,
    potentials: *const MtPotentials,
    result: *mut *mut MtReconstruction,
) -> MtStatus {
    guard(|| {
        let cfg = &deref(config, "config")?.inner;
        let pre = &deref(potentials, "potentials")?.inner;
        let slot = out(result, "result")?;
        let s = &cfg.scenario;
        if pre.stats.len() != cfg.grid.len() {
            return Err(Error::Config("potentials were built for a different grid".into()).into());
        }
        let energies = forward_energies(s, &pre.potentials, &cfg.newton)?;
        let readings = measure_all(&energies, s.transducer, &cfg.noise, cfg.seed);
        let inner = reconstruct(&pre.responses, &readings, s.transducer, &test_masks(&s.mesh, &cfg.grid), cfg.seed)?;
        *slot = Box::into_raw(Box::new(MtReconstruction { inner, cells: cfg.grid.cells }));
        Ok(())
    })
}

/// Writes potentials and their responses under `dir`, as the `precompute`
/// command does.
///
/// # Safety
/// `dir` must be a NUL-terminated string; `count` may be null.
#[no_mangle]
pub unsafe extern "C" fn mt_precompute_to_dir(config: *const MtConfig, dir: *const c_char, count: *mut usize) -> MtStatus {
    guard(|| {
        let cfg = &deref(config, "config")?.inner;
        let report = cmd_precompute(cfg, &path(dir, "dir")?)?;
        if let Some(c) = count.as_mut() {
            *c = report.potentials;
        }
        Ok(())
    })
}

/// Reconstructs from potentials stored under `potentials_dir` and writes the
/// result files under `out_dir`, as the `reconstruct` command does.
///
/// # Safety
/// Strings must be NUL-terminated; `result` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mt_reconstruct_from_dir(
    config: *const MtConfig,
    potentials_dir: *const c_char,
    out_dir: *const c_char,
    result: *mut *mut MtReconstruction,
) -> MtStatus {
    guard(|| {
        let cfg = &deref(config, "config")?.inner;
        let slot = out(result, "result")?;
        let report = cmd_reconstruct(cfg, &path(potentials_dir, "potentials_dir")?, &path(out_dir, "out_dir")?)?;
        *slot = Box::into_raw(Box::new(MtReconstruction { inner: report.result, cells: cfg.grid.cells }));
        Ok(())
    })
}

/// Verdict raster, row-major with row 0 at the bottom: 1 kept, 0 discarded.
///
/// # Safety
/// `mask` must be valid for `len` writes and `len` must equal cells².
#[no_mangle]
pub unsafe extern "C" fn mt_reconstruction_mask(result: *const MtReconstruction, mask: *mut u8, len: usize) -> MtStatus {
    guard(|| {
        let r = deref(result, "result")?;
        if mask.is_null() {
            return Err(Fail::Null("mask"));
        }
        if len != r.inner.cells.len() {
            return Err(Error::InvalidArgument(format!("{len} slots for {} cells", r.inner.cells.len())).into());
        }
        let dst = std::slice::from_raw_parts_mut(mask, len);
        for (d, c) in dst.iter_mut().zip(&r.inner.cells) {
            *d = c.kept() as u8;
        }
        Ok(())
    })
}

/// Cells per side and number of kept cells; either pointer may be null.
///
/// # Safety
/// `result` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn mt_reconstruction_summary(
    result: *const MtReconstruction,
    cells_per_side: *mut usize,
    kept: *mut usize,
) -> MtStatus {
    guard(|| {
        let r = deref(result, "result")?;
        if let Some(c) = cells_per_side.as_mut() {
            *c = r.cells;
        }
        if let Some(k) = kept.as_mut() {
            *k = r.inner.cells.iter().filter(|c| c.kept()).count();
        }
        Ok(())
    })
}

/// Smallest margin of one cell; NaN when no reading was evaluated.
///
/// # Safety
/// `result` must be a live handle; `margin` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mt_reconstruction_margin(result: *const MtReconstruction, cell: usize, margin: *mut f64) -> MtStatus {
    guard(|| {
        let r = deref(result, "result")?;
        let slot = out(margin, "margin")?;
        let c = r
            .inner
            .cells
            .get(cell)
            .ok_or_else(|| Error::InvalidArgument(format!("cell {cell} of {}", r.inner.cells.len())))?;
        *slot = c.worst_margin.unwrap_or(f64::NAN);
        Ok(())
    })
}

/// # Safety
/// `result` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn mt_reconstruction_free(result: *mut MtReconstruction) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}
