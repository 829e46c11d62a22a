//! JSON scenario files for the command-line runner.
//!
//! ```json
//! {
//!   "mode": "insect",
//!   "period_T": 1.0,
//!   "insect": {
//!     "piU": {"b": 1, "h": 0.5, "dJ": 1, "cJ": 1, "dA": 1},
//!     "piF": {"b": 2, "h": 1, "dJ": 0.5, "cJ": 1, "dA": 0.5}
//!   },
//!   "theta": 0.4,
//!   "theta_grid": 101,
//!   "tolerances": {"perron_tol": 1e-12, "bisect_tol": 1e-10},
//!   "split": {"K": 2, "resolution": 50, "mode": "max"}
//! }
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::floquet::{uniform_grid, FloquetOptions, ThresholdOptions, TwoSeasonLinearization, DEFAULT_BISECT_TOL};
use crate::insect::{self, InsectParams};
use crate::linalg::{Matrix, DEFAULT_PERRON_TOL};
use crate::seasonal::{SeasonalSchedule, SeasonalSystem};
use crate::simulate::{OrbitOptions, SimOptions, DEFAULT_DIVERGENCE_BOUND, DEFAULT_EXTINCTION_THRESHOLD};
use crate::split::{SplitMode, SplitOptions, DEFAULT_RESOLUTION};

pub const DEFAULT_GRID_POINTS: usize = 101;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioMode {
    Insect,
    Matrices,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InsectPair {
    #[serde(rename = "piU")]
    pub pi_u: InsectParams,
    #[serde(rename = "piF")]
    pub pi_f: InsectParams,
}

/// Nested rows or a flat row-major array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixSpec {
    Rows(Vec<Vec<f64>>),
    Flat(Vec<f64>),
}

impl MatrixSpec {
    pub fn to_matrix(&self) -> Result<Matrix> {
        match self {
            MatrixSpec::Rows(r) => Matrix::from_rows(r),
            MatrixSpec::Flat(v) => {
                let n = (v.len() as f64).sqrt().round() as usize;
                Matrix::new(n, v.clone())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixPair {
    pub m1: MatrixSpec,
    pub m2: MatrixSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ThetaGrid {
    Count(usize),
    List(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub perron_tol: f64,
    pub bisect_tol: f64,
    /// `None` uses the simulator's steps-per-period default.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ode_step: Option<f64>,
    pub extinction_threshold: f64,
    pub divergence_bound: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            perron_tol: DEFAULT_PERRON_TOL,
            bisect_tol: DEFAULT_BISECT_TOL,
            ode_step: None,
            extinction_threshold: DEFAULT_EXTINCTION_THRESHOLD,
            divergence_bound: DEFAULT_DIVERGENCE_BOUND,
        }
    }
}

fn default_resolution() -> usize {
    DEFAULT_RESOLUTION
}

fn default_split_mode() -> SplitMode {
    SplitMode::Max
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitSpec {
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(default = "default_resolution")]
    pub resolution: usize,
    #[serde(default = "default_split_mode")]
    pub mode: SplitMode,
}

fn default_period() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub mode: ScenarioMode,
    #[serde(rename = "period_T", default = "default_period")]
    pub period: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub insect: Option<InsectPair>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrices: Option<MatrixPair>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_grid: Option<ThetaGrid>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<SplitSpec>,
}

fn scenario_err(key: &str, message: impl Into<String>) -> Error {
    Error::Scenario { key: key.into(), message: message.into() }
}

fn positive(key: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(scenario_err(key, format!("must be a positive number, got {v}")))
    }
}

fn fraction(key: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(scenario_err(key, format!("must lie in [0, 1], got {v}")))
    }
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let s: Scenario = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            scenario_err(&path, e.into_inner().to_string())
        })?;
        s.validate()?;
        Ok(s)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Io(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        match (self.mode, self.insect.is_some(), self.matrices.is_some()) {
            (_, true, true) => return Err(Error::Mode("both `insect` and `matrices` are populated".into())),
            (_, false, false) => return Err(Error::Mode("neither `insect` nor `matrices` is populated".into())),
            (ScenarioMode::Insect, false, true) => {
                return Err(Error::Mode("mode is `insect` but only `matrices` is populated".into()))
            }
            (ScenarioMode::Matrices, true, false) => {
                return Err(Error::Mode("mode is `matrices` but only `insect` is populated".into()))
            }
            _ => {}
        }
        positive("period_T", self.period)?;
        if let Some(th) = self.theta {
            fraction("theta", th)?;
        }
        match &self.theta_grid {
            Some(ThetaGrid::Count(n)) if *n < 2 => return Err(scenario_err("theta_grid", "needs at least 2 points")),
            Some(ThetaGrid::List(v)) => {
                if v.is_empty() {
                    return Err(scenario_err("theta_grid", "grid list is empty"));
                }
                for (i, &t) in v.iter().enumerate() {
                    fraction(&format!("theta_grid[{i}]"), t)?;
                }
            }
            _ => {}
        }
        let t = &self.tolerances;
        positive("tolerances.perron_tol", t.perron_tol)?;
        positive("tolerances.bisect_tol", t.bisect_tol)?;
        positive("tolerances.divergence_bound", t.divergence_bound)?;
        if let Some(h) = t.ode_step {
            positive("tolerances.ode_step", h)?;
        }
        if !(t.extinction_threshold.is_finite() && t.extinction_threshold >= 0.0) {
            return Err(scenario_err("tolerances.extinction_threshold", "must be nonnegative"));
        }
        if let Some(sp) = &self.split {
            if sp.k == 0 {
                return Err(scenario_err("split.K", "must be at least 1"));
            }
            if sp.resolution == 0 {
                return Err(scenario_err("split.resolution", "must be positive"));
            }
        }
        if let Some(p) = &self.insect {
            for (name, pi) in [("piU", &p.pi_u), ("piF", &p.pi_f)] {
                for (field, v) in ["b", "h", "dJ", "cJ", "dA"].iter().zip(pi.as_array()) {
                    if !(v.is_finite() && v >= 0.0) {
                        return Err(scenario_err(
                            &format!("insect.{name}.{field}"),
                            format!("must be finite and nonnegative, got {v}"),
                        ));
                    }
                }
            }
        }
        if let Some(m) = &self.matrices {
            let m1 = m.m1.to_matrix().map_err(|e| scenario_err("matrices.m1", e.to_string()))?;
            let m2 = m.m2.to_matrix().map_err(|e| scenario_err("matrices.m2", e.to_string()))?;
            TwoSeasonLinearization::new(m1, m2, self.period).map_err(|e| scenario_err("matrices", e.to_string()))?;
        }
        Ok(())
    }

    /// Command-line overrides; the result is revalidated.
    pub fn with_overrides(&self, theta: Option<f64>, grid: Option<usize>, tol: Option<f64>) -> Result<Self> {
        let mut s = self.clone();
        if let Some(th) = theta {
            s.theta = Some(th);
        }
        if let Some(n) = grid {
            s.theta_grid = Some(ThetaGrid::Count(n));
        }
        if let Some(t) = tol {
            s.tolerances.bisect_tol = t;
        }
        s.validate()?;
        Ok(s)
    }

    pub fn grid(&self) -> Vec<f64> {
        match &self.theta_grid {
            None => uniform_grid(DEFAULT_GRID_POINTS),
            Some(ThetaGrid::Count(n)) => uniform_grid(*n),
            Some(ThetaGrid::List(v)) => v.clone(),
        }
    }

    pub fn require_theta(&self) -> Result<f64> {
        self.theta.ok_or_else(|| Error::Usage("theta".into()))
    }

    pub fn season_matrices(&self) -> Result<(Matrix, Matrix)> {
        if let Some(p) = &self.insect {
            let zero = insect::InsectState::new(0.0, 0.0);
            Ok((insect::jacobian(&p.pi_u, zero), insect::jacobian(&p.pi_f, zero)))
        } else if let Some(m) = &self.matrices {
            Ok((m.m1.to_matrix()?, m.m2.to_matrix()?))
        } else {
            Err(Error::Mode("neither `insect` nor `matrices` is populated".into()))
        }
    }

    pub fn linearization(&self) -> Result<TwoSeasonLinearization> {
        let (m1, m2) = self.season_matrices()?;
        let opts = FloquetOptions { perron_tol: self.tolerances.perron_tol, ..FloquetOptions::default() };
        Ok(TwoSeasonLinearization::new(m1, m2, self.period)?.with_options(opts))
    }

    /// Full (nonlinear in insect mode) two-season system at `theta`.
    pub fn system(&self, theta: f64) -> Result<SeasonalSystem> {
        if let Some(p) = &self.insect {
            insect::as_seasonal_system(&p.pi_u, &p.pi_f, theta, self.period)
        } else {
            let (m1, m2) = self.season_matrices()?;
            SeasonalSystem::linear(SeasonalSchedule::two_season(self.period, theta)?, vec![m1, m2])
        }
    }

    pub fn sim_options(&self) -> SimOptions {
        SimOptions {
            step: self.tolerances.ode_step,
            extinction_threshold: self.tolerances.extinction_threshold,
            divergence_bound: self.tolerances.divergence_bound,
            ..SimOptions::default()
        }
    }

    pub fn orbit_options(&self) -> OrbitOptions {
        OrbitOptions { sim: self.sim_options(), ..OrbitOptions::default() }
    }

    pub fn threshold_options(&self) -> ThresholdOptions {
        ThresholdOptions { tol: self.tolerances.bisect_tol, ..ThresholdOptions::default() }
    }

    pub fn split_options(&self, seed: u64) -> Result<(SplitSpec, SplitOptions)> {
        let sp = self.split.ok_or_else(|| Error::Usage("split".into()))?;
        Ok((sp, SplitOptions { resolution: sp.resolution, seed, ..SplitOptions::default() }))
    }
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    Scenario::from_json(&text)
}
