use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::geometry::{build_disk_mesh, Mesh, Region};
use crate::materials::{
    lower_bound_on_range, presets, verify_assumptions, MaterialBounds, MaterialLaw,
};
use crate::potentials::Regime;

/// Physical reading of the coefficient; only the unit labels differ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Physics {
    SteadyCurrents,
    Magnetostatic,
    Electrostatic,
}

impl Physics {
    /// `(coefficient, potential, energy)` units.
    pub fn units(self) -> (&'static str, &'static str, &'static str) {
        match self {
            Physics::SteadyCurrents => ("S/m", "V", "W/m"),
            Physics::Magnetostatic => ("H/m", "A", "J/m"),
            Physics::Electrostatic => ("F/m", "V", "J/m"),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Physics::SteadyCurrents => "steady-currents",
            Physics::Magnetostatic => "magnetostatic",
            Physics::Electrostatic => "electrostatic",
        }
    }
}

/// Points scanned when checking a law.
const SCAN_POINTS: usize = 4096;

/// Everything the forward and inverse problems need.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub physics: Physics,
    pub mesh: Mesh,
    /// Optional finer mesh for the simulated measurements.
    pub measurement_mesh: Option<Mesh>,
    pub background: f64,
    pub law: MaterialLaw,
    pub bounds: MaterialBounds,
    pub anomaly: Region,
    /// Volts per unit of energy.
    pub transducer: f64,
    pub regime: Regime,
    /// Largest field magnitude the bounds must cover.
    pub field_max: f64,
    /// Field magnitude below which the lower bound of the intersecting regime holds.
    pub field_cap: f64,
}

impl Scenario {
    /// Checks the law against the bounds and the regime.
    pub fn validate(&self) -> Result<()> {
        if !(self.background > 0.0 && self.background.is_finite()) {
            return Err(invalid(format!("background must be positive, got {}", self.background)));
        }
        if !(self.transducer > 0.0 && self.transducer.is_finite()) {
            return Err(invalid(format!("transducer constant must be positive, got {}", self.transducer)));
        }
        let report = verify_assumptions(&self.law, self.field_max, SCAN_POINTS)?;
        if !report.h2_ok {
            return Err(invalid("the law has a non-increasing flux γ(s)s"));
        }
        let slack = 1e-9 * self.bounds.upper;
        if report.bounds.0 < self.bounds.lower - slack || report.bounds.1 > self.bounds.upper + slack {
            return Err(invalid(format!(
                "law range [{:e}, {:e}] leaves the bounds [{:e}, {:e}]",
                report.bounds.0, report.bounds.1, self.bounds.lower, self.bounds.upper
            )));
        }
        match self.regime {
            Regime::Separated => {
                if !(self.bounds.lower > self.background) {
                    return Err(invalid("separated regime needs the lower bound above the background"));
                }
            }
            Regime::Intersecting => {
                let gl = self.lower_bound()?;
                if !(gl > self.background) {
                    return Err(invalid(format!(
                        "lower bound {gl:e} below field {} does not exceed the background",
                        self.field_cap
                    )));
                }
            }
        }
        if self.anomaly.bounding_radius().is_some_and(|r| r >= self.mesh.radius()) {
            return Err(invalid("the anomaly reaches the boundary"));
        }
        Ok(())
    }

    /// Constant used on test anomalies for the linear lower-bound field.
    pub fn lower_bound(&self) -> Result<f64> {
        match self.regime {
            Regime::Separated => Ok(self.bounds.lower),
            Regime::Intersecting => lower_bound_on_range(&self.law, self.field_cap),
        }
    }

    /// Mesh used for simulated measurements.
    pub fn measurement_mesh(&self) -> &Mesh {
        self.measurement_mesh.as_ref().unwrap_or(&self.mesh)
    }
}

/// Defaults of the two reference scenarios.
#[derive(Debug, Clone)]
pub struct Preset {
    pub radius: f64,
    pub background: f64,
    pub law: MaterialLaw,
    pub bounds: MaterialBounds,
    pub regime: Regime,
    pub transducer: f64,
    pub field_max: f64,
    pub field_cap: f64,
}

impl Preset {
    pub fn for_physics(physics: Physics) -> Option<Preset> {
        match physics {
            Physics::SteadyCurrents => Some(Preset {
                radius: 0.03,
                background: presets::CONDUCTOR_BACKGROUND,
                law: presets::composite_conductor(),
                bounds: presets::composite_bounds(),
                regime: Regime::Separated,
                transducer: 1e-2,
                field_max: 1.0,
                field_cap: 1.0,
            }),
            Physics::Magnetostatic => Some(Preset {
                radius: 0.30,
                background: presets::MU0,
                law: presets::saturating_permeability(),
                bounds: presets::permeability_bounds(),
                regime: Regime::Intersecting,
                transducer: 7e6,
                field_max: 1e6,
                field_cap: 1000.0,
            }),
            Physics::Electrostatic => None,
        }
    }

    /// Scenario on a disk mesh with `rings` rings.
    pub fn scenario(self, physics: Physics, rings: usize, anomaly: Region) -> Result<Scenario> {
        let scenario = Scenario {
            physics,
            mesh: build_disk_mesh(self.radius, rings)?,
            measurement_mesh: None,
            background: self.background,
            law: self.law,
            bounds: self.bounds,
            anomaly,
            transducer: self.transducer,
            regime: self.regime,
            field_max: self.field_max,
            field_cap: self.field_cap,
        };
        scenario.validate()?;
        Ok(scenario)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point;

    #[test]
    fn presets_validate() {
        for physics in [Physics::SteadyCurrents, Physics::Magnetostatic] {
            let p = Preset::for_physics(physics).unwrap();
            let r = p.radius;
            let s = p.scenario(physics, 6, Region::circle(Point::new(0.0, 0.0), 0.3 * r)).unwrap();
            assert!(s.lower_bound().unwrap() > s.background);
        }
        assert!(Preset::for_physics(Physics::Electrostatic).is_none());
    }

    #[test]
    fn magnetostatic_lower_bound_near_800() {
        let p = Preset::for_physics(Physics::Magnetostatic).unwrap();
        let s = p.scenario(Physics::Magnetostatic, 4, Region::empty()).unwrap();
        let rel = s.lower_bound().unwrap() / presets::MU0;
        assert!((790.0..810.0).contains(&rel), "{rel}");
    }

    #[test]
    fn rejects_inconsistent_setups() {
        let mut p = Preset::for_physics(Physics::SteadyCurrents).unwrap();
        p.background = 1e8;
        assert!(p.scenario(Physics::SteadyCurrents, 4, Region::empty()).is_err());

        let p = Preset::for_physics(Physics::SteadyCurrents).unwrap();
        let outside = Region::circle(Point::new(0.025, 0.0), 0.01);
        assert!(p.scenario(Physics::SteadyCurrents, 4, outside).is_err());

        let mut p = Preset::for_physics(Physics::Magnetostatic).unwrap();
        p.bounds = MaterialBounds::new(presets::MU0, 100.0 * presets::MU0).unwrap();
        assert!(p.scenario(Physics::Magnetostatic, 4, Region::empty()).is_err());
    }
}
