use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::fem::NewtonOptions;
use crate::geometry::{build_disk_mesh, shapes, Point, Region};
use crate::inversion::{
    GridSpec, NoiseModel, NoiseRange, Physics, PotentialSpec, Preset, Scenario, TestGrid, DEFAULT_HALF_SIDE,
};
use crate::materials::{presets, verify_assumptions, MaterialBounds, MaterialLaw, TabulatedLaw};
use crate::potentials::{FictitiousStyle, Regime, SynthesisOptions};

/// Whole run description, read from TOML.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Output directory, relative to the working directory.
    #[serde(default)]
    pub output: Option<PathBuf>,
    pub scenario: ScenarioSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub potentials: PotentialSection,
    #[serde(default)]
    pub noise: NoiseSection,
    #[serde(default)]
    pub solver: SolverSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    pub physics: Physics,
    #[serde(default = "default_rings")]
    pub rings: usize,
    /// Rings of a separate mesh for simulated readings.
    pub measurement_rings: Option<usize>,
    pub radius: Option<f64>,
    pub background: Option<f64>,
    pub law: Option<LawSpec>,
    /// `[lower, upper]` bounds of the law.
    pub bounds: Option<[f64; 2]>,
    pub regime: Option<Regime>,
    pub transducer: Option<f64>,
    pub field_max: Option<f64>,
    pub field_cap: Option<f64>,
    /// True anomaly, in units of the domain radius.
    #[serde(default)]
    pub anomaly: RegionSpec,
}

fn default_rings() -> usize {
    24
}

/// Constitutive law.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum LawSpec {
    Composite,
    Superconductor,
    Surrogate,
    Linear { value: f64 },
    Monomial { coeff: f64, p: f64 },
    PowerLaw { e0: f64, jc: f64, n: f64, cap: f64 },
    Saturating { base: f64, peak: f64, field_peak: f64, shift: f64 },
    Bruggeman { fraction: f64, matrix: f64, inner: Box<LawSpec> },
    /// `(s, γ)` samples given inline or as a CSV file.
    Tabulated { points: Option<Vec<[f64; 2]>>, path: Option<PathBuf> },
}

impl LawSpec {
    pub fn build(&self, base_dir: &Path) -> Result<MaterialLaw> {
        Ok(match self {
            LawSpec::Composite => presets::composite_conductor(),
            LawSpec::Superconductor => presets::superconductor(),
            LawSpec::Surrogate => presets::saturating_permeability(),
            LawSpec::Linear { value } => MaterialLaw::linear(*value)?,
            LawSpec::Monomial { coeff, p } => MaterialLaw::monomial(*coeff, *p)?,
            LawSpec::PowerLaw { e0, jc, n, cap } => MaterialLaw::power_law_ej(*e0, *jc, *n, *cap)?,
            LawSpec::Saturating { base, peak, field_peak, shift } => {
                MaterialLaw::saturating(*base, *peak, *field_peak, *shift)?
            }
            LawSpec::Bruggeman { fraction, matrix, inner } => {
                MaterialLaw::bruggeman(*fraction, *matrix, inner.build(base_dir)?)?
            }
            LawSpec::Tabulated { points, path } => match (points, path) {
                (Some(p), None) => MaterialLaw::tabulated(&p.iter().map(|[s, g]| (*s, *g)).collect::<Vec<_>>())?,
                (None, Some(p)) => MaterialLaw::Tabulated(TabulatedLaw::from_csv(base_dir.join(p))?),
                _ => return Err(Error::Config("tabulated law needs exactly one of `points` or `path`".into())),
            },
        })
    }
}

/// Region in units of the domain radius.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(tag = "shape", rename_all = "kebab-case", deny_unknown_fields)]
pub enum RegionSpec {
    #[default]
    Empty,
    Circle { center: [f64; 2], radius: f64 },
    Ellipse { center: [f64; 2], semi_axes: [f64; 2], #[serde(default)] rotation: f64 },
    Rectangle { min: [f64; 2], max: [f64; 2] },
    Polygon { vertices: Vec<[f64; 2]> },
    Peanut { center: [f64; 2], size: f64 },
    Kite { center: [f64; 2], size: f64 },
    Droplet { center: [f64; 2], size: f64 },
    HollowCircle { center: [f64; 2], outer: f64, inner: f64 },
    /// Union of test-grid cells given as `[row, col]`.
    Cells { cells: Vec<[usize; 2]> },
    Union { parts: Vec<RegionSpec> },
}

const SHAPE_VERTICES: usize = 256;

impl RegionSpec {
    pub fn build(&self, radius: f64, grid: &TestGrid) -> Result<Region> {
        let p = |c: &[f64; 2]| Point::new(c[0] * radius, c[1] * radius);
        Ok(match self {
            RegionSpec::Empty => Region::empty(),
            RegionSpec::Circle { center, radius: r } => Region::circle(p(center), r * radius),
            RegionSpec::Ellipse { center, semi_axes, rotation } => {
                Region::ellipse(p(center), (semi_axes[0] * radius, semi_axes[1] * radius), *rotation)
            }
            RegionSpec::Rectangle { min, max } => {
                Region::rectangle(min[0] * radius, min[1] * radius, max[0] * radius, max[1] * radius)?
            }
            RegionSpec::Polygon { vertices } => Region::polygon(vertices.iter().map(p).collect())?,
            RegionSpec::Peanut { center, size } => shapes::peanut(p(center), size * radius, SHAPE_VERTICES)?,
            RegionSpec::Kite { center, size } => shapes::kite(p(center), size * radius, SHAPE_VERTICES)?,
            RegionSpec::Droplet { center, size } => shapes::droplet(p(center), size * radius, SHAPE_VERTICES)?,
            RegionSpec::HollowCircle { center, outer, inner } => {
                shapes::hollow_circle(p(center), outer * radius, inner * radius)
            }
            RegionSpec::Cells { cells } => {
                grid.union_of(&cells.iter().map(|[r, c]| (*r, *c)).collect::<Vec<_>>())?
            }
            RegionSpec::Union { parts } => {
                Region::union(parts.iter().map(|s| s.build(radius, grid)).collect::<Result<_>>()?)
            }
        })
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(default = "default_cells")]
    pub cells: usize,
    #[serde(default = "default_half_side")]
    pub half_side: f64,
}

fn default_cells() -> usize {
    8
}

fn default_half_side() -> f64 {
    DEFAULT_HALF_SIDE
}

impl Default for GridSection {
    fn default() -> Self {
        Self { cells: default_cells(), half_side: DEFAULT_HALF_SIDE }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PotentialSection {
    pub directions: usize,
    pub styles: Vec<FictitiousStyle>,
    pub k_max: usize,
    pub include_sum: bool,
    pub alpha: f64,
    pub lambda_init: f64,
    pub target_voltage: f64,
}

impl Default for PotentialSection {
    fn default() -> Self {
        let p = PotentialSpec::default();
        Self {
            directions: p.directions,
            styles: p.styles,
            k_max: p.synthesis.k_max,
            include_sum: p.synthesis.include_sum,
            alpha: p.synthesis.alpha,
            lambda_init: p.synthesis.lambda_init,
            target_voltage: p.target_voltage,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    /// Named instrument, e.g. `keithley-2002` or `noiseless`.
    pub preset: Option<String>,
    /// Explicit `[limit, eta1, eta2]` rows.
    pub table: Option<Vec<[f64; 3]>>,
    #[serde(default)]
    pub seed: u64,
}

impl Default for NoiseSection {
    fn default() -> Self {
        Self { preset: Some("keithley-2002".into()), table: None, seed: 0 }
    }
}

impl NoiseSection {
    pub fn model(&self) -> Result<NoiseModel> {
        match (&self.preset, &self.table) {
            (Some(name), None) => NoiseModel::preset(name).map_err(|e| Error::Config(e.to_string())),
            (None, Some(rows)) => {
                NoiseModel::new(rows.iter().map(|&[limit, eta1, eta2]| NoiseRange { limit, eta1, eta2 }).collect())
            }
            (None, None) => Ok(NoiseModel::noiseless()),
            (Some(_), Some(_)) => Err(Error::Config("noise needs either `preset` or `table`, not both".into())),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub tol: f64,
    pub max_iter: usize,
    pub max_halvings: u32,
}

impl Default for SolverSection {
    fn default() -> Self {
        let n = NewtonOptions::default();
        Self { tol: n.tol, max_iter: n.max_iter, max_halvings: n.max_halvings }
    }
}

/// Everything a command needs, resolved from a [`RunConfig`].
#[derive(Debug, Clone)]
pub struct Resolved {
    pub scenario: Scenario,
    pub grid: TestGrid,
    pub grid_spec: GridSpec,
    pub potentials: PotentialSpec,
    pub noise: NoiseModel,
    pub seed: u64,
    pub newton: NewtonOptions,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Builds the scenario and stage options; `base_dir` anchors relative data paths.
    pub fn resolve(&self, base_dir: &Path) -> Result<Resolved> {
        let s = &self.scenario;
        let preset = Preset::for_physics(s.physics);
        let pick = |v: Option<f64>, from_preset: Option<f64>, name: &str| {
            v.or(from_preset).ok_or_else(|| Error::Config(format!("scenario.{name} is required for {}", s.physics.name())))
        };
        let radius = pick(s.radius, preset.as_ref().map(|p| p.radius), "radius")?;
        let background = pick(s.background, preset.as_ref().map(|p| p.background), "background")?;
        let transducer = pick(s.transducer, preset.as_ref().map(|p| p.transducer), "transducer")?;
        let field_max = pick(s.field_max, preset.as_ref().map(|p| p.field_max), "field_max")?;
        let law = match (&s.law, &preset) {
            (Some(spec), _) => spec.build(base_dir)?,
            (None, Some(p)) => p.law.clone(),
            (None, None) => return Err(Error::Config(format!("scenario.law is required for {}", s.physics.name()))),
        };
        let bounds = match (s.bounds, &preset, &s.law) {
            (Some([lo, hi]), _, _) => MaterialBounds::new(lo, hi)?,
            (None, Some(p), None) => p.bounds,
            _ => {
                let (lo, hi) = verify_assumptions(&law, field_max, 4096)?.bounds;
                MaterialBounds::new(lo, hi)?
            }
        };
        let regime = match (s.regime, &preset, &s.law) {
            (Some(r), _, _) => r,
            (None, Some(p), None) => p.regime,
            _ if bounds.lower > background => Regime::Separated,
            _ => Regime::Intersecting,
        };
        let field_cap = s.field_cap.or(preset.as_ref().map(|p| p.field_cap)).unwrap_or(field_max);

        let grid_spec = GridSpec { cells: self.grid.cells, half_side: self.grid.half_side };
        let grid = TestGrid::new(radius, grid_spec).map_err(|e| Error::Config(e.to_string()))?;
        let anomaly = s.anomaly.build(radius, &grid).map_err(|e| Error::Config(e.to_string()))?;
        let scenario = Scenario {
            physics: s.physics,
            mesh: build_disk_mesh(radius, s.rings)?,
            measurement_mesh: s.measurement_rings.map(|r| build_disk_mesh(radius, r)).transpose()?,
            background,
            law,
            bounds,
            anomaly,
            transducer,
            regime,
            field_max,
            field_cap,
        };
        let p = &self.potentials;
        let potentials = PotentialSpec {
            directions: p.directions,
            styles: p.styles.clone(),
            synthesis: SynthesisOptions {
                k_max: p.k_max,
                include_sum: p.include_sum,
                alpha: p.alpha,
                lambda_init: p.lambda_init,
                target_energy: None,
            },
            target_voltage: p.target_voltage,
        };
        let newton = NewtonOptions { tol: self.solver.tol, max_iter: self.solver.max_iter, max_halvings: self.solver.max_halvings };
        Ok(Resolved { scenario, grid, grid_spec, potentials, noise: self.noise.model()?, seed: self.noise.seed, newton })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_preset_config() {
        let cfg = RunConfig::from_toml(
            "[scenario]\nphysics = \"steady-currents\"\nrings = 8\nanomaly = { shape = \"circle\", center = [0.1, 0.0], radius = 0.3 }\n",
        )
        .unwrap();
        let r = cfg.resolve(Path::new(".")).unwrap();
        assert_eq!(r.scenario.transducer, 1e-2);
        assert_eq!(r.scenario.regime, Regime::Separated);
        assert!(r.scenario.anomaly.contains(Point::new(0.003, 0.0)));
        assert_eq!(r.grid.len(), 64);
        assert_eq!(r.noise, NoiseModel::keithley_2002());
        r.scenario.validate().unwrap();
    }

    #[test]
    fn unknown_keys_rejected() {
        for text in [
            "[scenario]\nphysics = \"magnetostatic\"\ncolour = 3\n",
            "typo = 1\n[scenario]\nphysics = \"magnetostatic\"\n",
            "[scenario]\nphysics = \"magnetostatic\"\n[grid]\nsize = 4\n",
            "[scenario]\nphysics = \"plasma\"\n",
            "[scenario]\nphysics = \"magnetostatic\"\nlaw = { kind = \"linear\", value = 1.0, extra = 2 }\n",
        ] {
            assert!(matches!(RunConfig::from_toml(text), Err(Error::Config(_))), "{text}");
        }
    }

    #[test]
    fn electrostatic_needs_explicit_law() {
        let base = "[scenario]\nphysics = \"electrostatic\"\nradius = 1.0\nbackground = 1.0\ntransducer = 1.0\nfield_max = 10.0\n";
        let cfg = RunConfig::from_toml(base).unwrap();
        assert!(matches!(cfg.resolve(Path::new(".")), Err(Error::Config(_))));
        let cfg = RunConfig::from_toml(&format!("{base}law = {{ kind = \"linear\", value = 3.0 }}\n")).unwrap();
        let r = cfg.resolve(Path::new(".")).unwrap();
        assert_eq!((r.scenario.bounds.lower, r.scenario.bounds.upper), (3.0, 3.0));
        assert_eq!(r.scenario.regime, Regime::Separated);
    }

    #[test]
    fn noise_and_cells() {
        let cfg = RunConfig::from_toml(
            "[scenario]\nphysics = \"magnetostatic\"\nrings = 6\nanomaly = { shape = \"cells\", cells = [[3, 3], [3, 4]] }\n\
             [noise]\ntable = [[1.0, 1e-3, 0.0]]\nseed = 42\n[potentials]\nalpha = 0.25\n",
        )
        .unwrap();
        let r = cfg.resolve(Path::new(".")).unwrap();
        assert_eq!(r.seed, 42);
        assert_eq!(r.noise.ranges()[0].eta1, 1e-3);
        assert_eq!(r.potentials.synthesis.alpha, 0.25);
        assert!(r.scenario.anomaly.contains(r.grid.center(r.grid.index(3, 4))));
        let both = "[scenario]\nphysics = \"magnetostatic\"\n[noise]\npreset = \"keithley-2002\"\ntable = [[1.0, 0.0, 0.0]]\n";
        assert!(RunConfig::from_toml(both).unwrap().resolve(Path::new(".")).is_err());
    }
}
