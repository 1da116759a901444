//! Scenario files (TOML, strict schema).

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cell::{build_cell_set, CellOptions, CellSet};
use crate::circle_grid::{ship_domain_radius, CompassAngle, Point};
use crate::error::{Error, Result};
use crate::ship::{ShipParams, ShipState, DEFAULT_DT_S};
use crate::static_planner::{Obstacle, PlanOptions};

pub const DEFAULT_DOMAIN_FACTOR: f64 = 6.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Free,
    Static,
    Dynamic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StartPose {
    pub x: f64,
    pub y: f64,
    pub heading_deg: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Destination {
    pub x: f64,
    pub y: f64,
    /// Defaults to the circle radius.
    #[serde(default)]
    pub reach_tolerance_m: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimSettings {
    pub dt_s: f64,
    pub max_steps: usize,
    pub cell_resolution_deg: f64,
}

impl Default for SimSettings {
    fn default() -> Self {
        Self {
            dt_s: DEFAULT_DT_S,
            max_steps: 200,
            cell_resolution_deg: 5.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub name: Option<String>,
    pub mode: Mode,
    #[serde(default)]
    pub ship: ShipParams,
    pub start: StartPose,
    pub destination: Destination,
    #[serde(default)]
    pub obstacles: Vec<Obstacle>,
    /// Circle radius; wins over `domain_factor`.
    #[serde(default)]
    pub circle_radius_m: Option<f64>,
    #[serde(default)]
    pub domain_factor: Option<f64>,
    #[serde(default)]
    pub sim: SimSettings,
}

impl Scenario {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let scenario: Scenario = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
            Error::Validation(msg) => Error::Validation(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |m: String| Err(Error::Validation(m));
        self.ship
            .validate()
            .map_err(|e| Error::Validation(format!("ship: {e}")))?;
        let start = self.start_position();
        let dest = self.destination_point();
        if ![start.x, start.y, self.start.heading_deg, dest.x, dest.y]
            .iter()
            .all(|v| v.is_finite())
        {
            return invalid("start and destination must be finite".into());
        }
        if start == dest {
            return invalid("start and destination coincide".into());
        }
        if !(self.sim.dt_s > 0.0) {
            return invalid(format!("sim.dt_s must be positive, got {}", self.sim.dt_s));
        }
        if self.sim.max_steps == 0 {
            return invalid("sim.max_steps must be positive".into());
        }
        if let Some(tol) = self.destination.reach_tolerance_m {
            if !(tol > 0.0) {
                return invalid(format!("destination.reach_tolerance_m must be positive, got {tol}"));
            }
        }
        let radius = self.radius_m()?;
        if !(radius >= 2.0 * self.ship.length_m) {
            return invalid(format!(
                "circle radius {radius} m is below two ship lengths ({} m)",
                2.0 * self.ship.length_m
            ));
        }
        for (i, o) in self.obstacles.iter().enumerate() {
            o.validate()
                .map_err(|e| Error::Validation(format!("obstacles[{i}]: {e}")))?;
        }
        let movers = self.obstacles.iter().filter(|o| o.is_moving()).count();
        match self.mode {
            Mode::Free if !self.obstacles.is_empty() => {
                invalid("mode \"free\" takes no obstacles".into())
            }
            Mode::Static if movers > 0 => {
                invalid("mode \"static\" takes only obstacles with speed_mps = 0".into())
            }
            Mode::Dynamic if movers != 1 => invalid(format!(
                "mode \"dynamic\" needs exactly one moving obstacle, found {movers}"
            )),
            _ => Ok(()),
        }
    }

    pub fn radius_m(&self) -> Result<f64> {
        match (self.circle_radius_m, self.domain_factor) {
            (Some(r), _) if r > 0.0 && r.is_finite() => Ok(r),
            (Some(r), _) => Err(Error::Validation(format!(
                "circle_radius_m must be positive, got {r}"
            ))),
            (None, Some(f)) => ship_domain_radius(&self.ship, f)
                .map_err(|e| Error::Validation(format!("domain_factor: {e}"))),
            (None, None) => ship_domain_radius(&self.ship, DEFAULT_DOMAIN_FACTOR),
        }
    }

    pub fn start_position(&self) -> Point {
        Point::new(self.start.x, self.start.y)
    }

    pub fn destination_point(&self) -> Point {
        Point::new(self.destination.x, self.destination.y)
    }

    pub fn start_state(&self) -> ShipState {
        ShipState::trimmed(
            &self.ship,
            self.start_position(),
            CompassAngle::new(self.start.heading_deg),
        )
    }

    pub fn cell_options(&self) -> CellOptions {
        CellOptions {
            dt_s: self.sim.dt_s,
            ..CellOptions::default()
        }
    }

    pub fn plan_options(&self) -> PlanOptions {
        PlanOptions {
            max_steps: self.sim.max_steps,
            reach_tolerance_m: self.destination.reach_tolerance_m,
        }
    }

    pub fn build_cells(&self) -> Result<CellSet> {
        build_cell_set(
            &self.ship,
            self.radius_m()?,
            self.sim.cell_resolution_deg,
            &self.cell_options(),
        )
    }

    /// The moving obstacle, if any.
    pub fn mover(&self) -> Option<&Obstacle> {
        self.obstacles.iter().find(|o| o.is_moving())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
mode = "free"
[start]
x = 0.0
y = 0.0
heading_deg = 0.0
[destination]
x = 0.0
y = 5000.0
"#;

    #[test]
    fn minimal_defaults() {
        let s = Scenario::from_toml_str(MINIMAL).unwrap();
        assert_eq!(s.mode, Mode::Free);
        assert_eq!(s.sim, SimSettings::default());
        assert!((s.radius_m().unwrap() - 6.0 * 63.6).abs() < 1e-9);
    }

    #[test]
    fn unknown_field_is_named() {
        let text = MINIMAL.replace("heading_deg = 0.0", "heading_deg = 0.0\nheadng = 3.0");
        match Scenario::from_toml_str(&text) {
            Err(Error::Parse(msg)) => assert!(msg.contains("headng"), "{msg}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn explicit_radius_wins() {
        let text = format!("circle_radius_m = 600.0\ndomain_factor = 4.0\n{MINIMAL}");
        assert_eq!(Scenario::from_toml_str(&text).unwrap().radius_m().unwrap(), 600.0);
    }

    #[test]
    fn validation_failures() {
        let text = MINIMAL.replace("y = 5000.0", "y = 0.0");
        assert!(matches!(Scenario::from_toml_str(&text), Err(Error::Validation(_))));
        let text = format!("{MINIMAL}[sim]\ndt_s = 0.0\n");
        assert!(matches!(Scenario::from_toml_str(&text), Err(Error::Validation(_))));
        let text = format!("domain_factor = 9.0\n{MINIMAL}");
        assert!(matches!(Scenario::from_toml_str(&text), Err(Error::Validation(_))));
        let text = format!(
            "{}\n[[obstacles]]\ncenter = {{ x = 0.0, y = 100.0 }}\nradius_m = 10.0\n",
            MINIMAL.replace("\"free\"", "\"dynamic\"")
        );
        assert!(matches!(Scenario::from_toml_str(&text), Err(Error::Validation(_))));
    }

    #[test]
    fn round_trip() {
        let s = Scenario::from_toml_str(MINIMAL).unwrap();
        let again = Scenario::from_toml_str(&s.to_toml_string().unwrap()).unwrap();
        assert_eq!(s, again);
    }
}
