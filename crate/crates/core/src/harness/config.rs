//! TOML configuration.
//!
//! ```toml
//! [geometry]
//! alpha = 4.0
//! rru_positions = [[0.6667, 0.0], ...]   # six points
//!
//! [power]
//! center_fraction = 0.5
//!
//! [maxmin]
//! bisection_epsilon = 1e-6   # relative to P_cen
//!
//! [jt]
//! beta_tolerance = 1e-6
//!
//! [oracle]
//! grid_points = 100000
//!
//! [monte_carlo]
//! fading_draws = 100
//! sigma2 = 1.0
//!
//! [run]
//! trials = 100000
//! seed = 1
//! threads = 8
//! ```
//!
//! Every key is optional. Command-line flags win over the file.

use std::path::Path;

use serde::Deserialize;

use crate::alloc::{DEFAULT_BETA_TOLERANCE, DEFAULT_BISECTION_EPSILON, DEFAULT_GRID_POINTS};
use crate::error::{Error, Result};
use crate::geometry::{NetworkGeometry, Point, DEFAULT_PATHLOSS_EXPONENT, NUM_RRUS};
use crate::DEFAULT_NOISE_VARIANCE;

pub const DEFAULT_CENTER_FRACTION: f64 = 0.5;
/// Fading draws per placement for the CDI lower bound.
pub const DEFAULT_FADING_DRAWS: usize = 100;

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub geometry: GeometrySection,
    #[serde(default)]
    pub power: PowerSection,
    #[serde(default)]
    pub maxmin: MaxminSection,
    #[serde(default)]
    pub jt: JtSection,
    #[serde(default)]
    pub oracle: OracleSection,
    #[serde(default)]
    pub monte_carlo: MonteCarloSection,
    #[serde(default)]
    pub run: RunSection,
}

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GeometrySection {
    pub alpha: Option<f64>,
    pub rru_positions: Option<Vec<[f64; 2]>>,
}

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PowerSection {
    pub center_fraction: Option<f64>,
}

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MaxminSection {
    pub bisection_epsilon: Option<f64>,
}

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct JtSection {
    pub beta_tolerance: Option<f64>,
}

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OracleSection {
    pub grid_points: Option<usize>,
}

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MonteCarloSection {
    pub fading_draws: Option<usize>,
    pub sigma2: Option<f64>,
}

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
        Self::parse(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Simulation settings with defaults filled in and validated.
    pub fn settings(&self) -> Result<Settings> {
        let mut s = Settings::default();
        if self.geometry.alpha.is_some() || self.geometry.rru_positions.is_some() {
            let alpha = self.geometry.alpha.unwrap_or(DEFAULT_PATHLOSS_EXPONENT);
            let rrus = match &self.geometry.rru_positions {
                Some(list) => {
                    let pts: Vec<Point> = list.iter().map(|p| Point::new(p[0], p[1])).collect();
                    pts.try_into().map_err(|v: Vec<Point>| {
                        Error::Config(format!("expected {NUM_RRUS} RRU positions, got {}", v.len()))
                    })?
                }
                None => *NetworkGeometry::default_geometry().rru_positions(),
            };
            s.geometry = NetworkGeometry::new(rrus, alpha).map_err(|e| Error::Config(e.to_string()))?;
        }
        if let Some(v) = self.power.center_fraction {
            s.center_fraction = v;
        }
        if let Some(v) = self.maxmin.bisection_epsilon {
            s.bisection_epsilon = v;
        }
        if let Some(v) = self.jt.beta_tolerance {
            s.beta_tolerance = v;
        }
        if let Some(v) = self.oracle.grid_points {
            s.grid_points = v;
        }
        if let Some(v) = self.monte_carlo.fading_draws {
            s.fading_draws = v;
        }
        if let Some(v) = self.monte_carlo.sigma2 {
            s.noise_var = v;
        }
        s.validate()?;
        Ok(s)
    }
}

/// Numerical knobs shared by every experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct Settings {
    pub geometry: NetworkGeometry,
    pub center_fraction: f64,
    pub bisection_epsilon: f64,
    pub beta_tolerance: f64,
    pub grid_points: usize,
    pub fading_draws: usize,
    pub noise_var: f64,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            geometry: NetworkGeometry::default_geometry(),
            center_fraction: DEFAULT_CENTER_FRACTION,
            bisection_epsilon: DEFAULT_BISECTION_EPSILON,
            beta_tolerance: DEFAULT_BETA_TOLERANCE,
            grid_points: DEFAULT_GRID_POINTS,
            fading_draws: DEFAULT_FADING_DRAWS,
            noise_var: DEFAULT_NOISE_VARIANCE,
        }
    }
}

impl Settings {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(0.0..=1.0).contains(&self.center_fraction) {
            return bad(format!("power.center_fraction must lie in [0, 1], got {}", self.center_fraction));
        }
        if !(self.bisection_epsilon > 0.0 && self.bisection_epsilon < 1.0) {
            return bad(format!("maxmin.bisection_epsilon must lie in (0, 1), got {}", self.bisection_epsilon));
        }
        if !(self.beta_tolerance > 0.0 && self.beta_tolerance < 1.0) {
            return bad(format!("jt.beta_tolerance must lie in (0, 1), got {}", self.beta_tolerance));
        }
        if self.grid_points < 2 {
            return bad(format!("oracle.grid_points must be at least 2, got {}", self.grid_points));
        }
        if self.fading_draws == 0 {
            return bad("monte_carlo.fading_draws must be positive".into());
        }
        if !(self.noise_var > 0.0 && self.noise_var.is_finite()) {
            return bad(format!("monte_carlo.sigma2 must be positive, got {}", self.noise_var));
        }
        Ok(())
    }
}
