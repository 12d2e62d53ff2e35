//! Scenario configuration: a versioned JSON document.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::presets::preset;
use crate::chain_sim::Forcing;
use crate::error::{Error, Result};
use crate::profiles::Profile;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Relax,
    Tube,
    ContinuumConvergence,
    EulerResiduals,
    ForceLimit,
    SolutionCrosscheck,
}

impl Experiment {
    pub fn as_str(self) -> &'static str {
        match self {
            Experiment::Relax => "relax",
            Experiment::Tube => "tube",
            Experiment::ContinuumConvergence => "continuum_convergence",
            Experiment::EulerResiduals => "euler_residuals",
            Experiment::ForceLimit => "force_limit",
            Experiment::SolutionCrosscheck => "solution_crosscheck",
        }
    }

    fn is_sweep(self) -> bool {
        matches!(
            self,
            Experiment::ContinuumConvergence | Experiment::ForceLimit
        )
    }

    fn needs_continuum(self) -> bool {
        !matches!(self, Experiment::Relax | Experiment::Tube)
    }
}

/// A preset name or an inline profile object.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProfileSpec {
    Preset(String),
    Inline(Profile),
}

impl Default for ProfileSpec {
    fn default() -> Self {
        ProfileSpec::Preset("uniform".into())
    }
}

/// Optional overrides of the pass/fail thresholds. Unset fields take the
/// experiment defaults listed in the README.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Relax: `max_k |q_k - L/N|` in units of `L/N`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub deviation: Option<f64>,
    /// Relax: `max_k |ẋ_k - w(T)|`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub velocity: Option<f64>,
    /// Relax: also require the velocity error at this time to exceed the
    /// final one by `decay_factor`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decay_from: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decay_factor: Option<f64>,
    /// Tube: spectral versus RK4 gap difference.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<f64>,
    /// Pointwise residual bound (Euler residuals, wave residuals).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    /// Solution cross-check bounds.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bessel: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dalembert: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    pub experiment: Experiment,
    #[serde(default)]
    pub profile: ProfileSpec,
    #[serde(rename = "N_list")]
    pub n_list: Vec<usize>,
    #[serde(default)]
    pub alpha: f64,
    #[serde(default = "one")]
    pub omega0: f64,
    /// Circle length; defaults to the inline profile's length or 1.
    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    pub length: Option<f64>,
    #[serde(default)]
    pub v: f64,
    #[serde(default)]
    pub forcing: Forcing,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(rename = "T")]
    pub horizon: f64,
    #[serde(default = "one")]
    pub dt_factor: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    /// Relax: random gap amplitude (relative) and velocity amplitude (in
    /// units of `ω₀L`) added to the profile start.
    #[serde(default)]
    pub perturbation: f64,
    /// Number of random evaluation points.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    /// Solution cross-check: number of wave-equation residual points.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pde_samples: Option<usize>,
    /// Finite-difference step.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    #[serde(default)]
    pub tolerances: Tolerances,
}

fn one() -> f64 {
    1.0
}

fn default_delta() -> f64 {
    0.6
}

fn bad(field: &str, reason: impl Into<String>) -> Error {
    Error::Config {
        field: field.into(),
        reason: reason.into(),
    }
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn length(&self) -> f64 {
        match (&self.profile, self.length) {
            (_, Some(l)) => l,
            (ProfileSpec::Inline(p), None) => p.length(),
            (ProfileSpec::Preset(_), None) => 1.0,
        }
    }

    pub fn resolve_profile(&self) -> Result<Profile> {
        let l = self.length();
        match &self.profile {
            ProfileSpec::Preset(name) => preset(name, l),
            ProfileSpec::Inline(p) => {
                if (p.length() - l).abs() > 1e-12 * l {
                    return Err(bad(
                        "L",
                        format!("{l} differs from the profile length {}", p.length()),
                    ));
                }
                Ok(p.clone())
            }
        }
    }

    pub fn samples(&self) -> usize {
        self.samples.unwrap_or(match self.experiment {
            Experiment::EulerResiduals => 100,
            Experiment::ForceLimit => 20,
            _ => 50,
        })
    }

    pub fn pde_samples(&self) -> usize {
        self.pde_samples.unwrap_or(100)
    }

    pub fn h(&self) -> f64 {
        self.h.unwrap_or(1e-3)
    }

    /// `dt = dt_factor · 0.25/(ω₀N)`.
    pub fn dt(&self, n: usize) -> f64 {
        let base = if self.omega0 > 0.0 {
            0.25 / (self.omega0 * n as f64)
        } else {
            1e-3
        };
        self.dt_factor * base
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(bad(
                "schema_version",
                format!("expected {SCHEMA_VERSION}, got {}", self.schema_version),
            ));
        }
        if self.n_list.is_empty() {
            return Err(bad("N_list", "must not be empty"));
        }
        if let Some(&n) = self.n_list.iter().find(|&&n| n < 3) {
            return Err(bad("N_list", format!("N = {n} is below the minimum of 3")));
        }
        if self.experiment.is_sweep() {
            if self.n_list.len() < 2 {
                return Err(bad(
                    "N_list",
                    "a convergence sweep needs at least two values",
                ));
            }
            if self.n_list.windows(2).any(|w| w[1] <= w[0]) {
                return Err(bad("N_list", "must be strictly increasing"));
            }
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(bad("alpha", "must be finite and non-negative"));
        }
        if self.experiment == Experiment::Relax && self.alpha == 0.0 {
            return Err(bad("alpha", "relaxation needs positive damping"));
        }
        let omega_ok = if self.experiment.needs_continuum() || self.experiment == Experiment::Tube {
            self.omega0 > 0.0
        } else {
            self.omega0 >= 0.0
        };
        if !(omega_ok && self.omega0.is_finite()) {
            return Err(bad("omega0", "must be positive (non-negative for relax)"));
        }
        if let Some(l) = self.length {
            if !(l > 0.0 && l.is_finite()) {
                return Err(bad("L", "must be positive"));
            }
        }
        if !self.v.is_finite() {
            return Err(bad("v", "must be finite"));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(bad("T", "must be positive"));
        }
        if !(self.dt_factor > 0.0 && self.dt_factor <= 1.0) {
            return Err(bad("dt_factor", "must lie in (0, 1]"));
        }
        if self.experiment == Experiment::Tube && !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(bad("delta", "must lie in (0, 1)"));
        }
        if !(0.0..1.0).contains(&self.perturbation) {
            return Err(bad("perturbation", "must lie in [0, 1)"));
        }
        if self.samples == Some(0) || self.pde_samples == Some(0) {
            return Err(bad("samples", "must be positive"));
        }
        if let Some(h) = self.h {
            if !(h > 0.0 && 4.0 * h < self.horizon) {
                return Err(bad("h", "must be positive and well below T"));
            }
        }
        self.forcing
            .validate()
            .map_err(|e| bad("forcing", e.to_string()))?;
        self.resolve_profile().map_err(|e| match e {
            e @ Error::Config { .. } => e,
            other => bad("profile", other.to_string()),
        })?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str =
        r#"{"schema_version": 1, "experiment": "relax", "N_list": [32], "alpha": 1, "T": 5}"#;

    #[test]
    fn minimal_config_defaults() {
        let c = ScenarioConfig::from_json(MINIMAL).unwrap();
        assert_eq!(c.profile, ProfileSpec::Preset("uniform".into()));
        assert_eq!(
            (c.omega0, c.dt_factor, c.delta, c.length()),
            (1.0, 1.0, 0.6, 1.0)
        );
        assert!((c.dt(32) - 0.25 / 32.0).abs() < 1e-16);
    }

    #[test]
    fn inline_profile_and_forcing() {
        let text = r#"{"schema_version": 1, "experiment": "euler_residuals", "N_list": [8],
            "profile": {"L": 2.0, "x_hat": [[1, 0.01, 0.0]], "v_hat": []},
            "forcing": {"type": "periodic_fourier", "a": [[1, 0.0, -0.5], [-1, 0.0, 0.5]]},
            "alpha": 0.5, "T": 3}"#;
        let c = ScenarioConfig::from_json(text).unwrap();
        assert_eq!(c.length(), 2.0);
        assert!((c.forcing.value(0.3) - 0.3f64.sin()).abs() < 1e-14);
        let back: ScenarioConfig =
            serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
    }

    fn field_of(text: &str) -> String {
        match ScenarioConfig::from_json(text) {
            Err(Error::Config { field, .. }) => field,
            other => panic!("expected a config error, got {other:?}"),
        }
    }

    #[test]
    fn diagnostics_name_the_field() {
        let with = |k: &str, v: &str| MINIMAL.replacen('}', &format!(r#", "{k}": {v}}}"#), 1);
        assert_eq!(
            field_of(&MINIMAL.replace(r#""schema_version": 1"#, r#""schema_version": 2"#)),
            "schema_version"
        );
        assert_eq!(field_of(&MINIMAL.replace("[32]", "[2]")), "N_list");
        assert_eq!(
            field_of(&MINIMAL.replace(r#""alpha": 1"#, r#""alpha": 0"#)),
            "alpha"
        );
        assert_eq!(field_of(&with("dt_factor", "1.5")), "dt_factor");
        assert_eq!(field_of(&with("profile", r#""wobble""#)), "profile");
        assert_eq!(field_of(&with("perturbation", "1.0")), "perturbation");
        let tube = MINIMAL.replace("relax", "tube");
        assert_eq!(
            field_of(&tube.replacen('}', r#", "delta": 1.2}"#, 1)),
            "delta"
        );
        let sweep = MINIMAL
            .replace("relax", "force_limit")
            .replace("[32]", "[64, 32]");
        assert_eq!(field_of(&sweep), "N_list");
        let mismatch = r#"{"schema_version": 1, "experiment": "tube", "N_list": [8], "T": 1, "L": 3,
            "profile": {"L": 2.0}}"#;
        assert_eq!(field_of(mismatch), "L");
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = MINIMAL.replacen('}', r#", "colour": 3}"#, 1);
        assert!(matches!(
            ScenarioConfig::from_json(&text),
            Err(Error::Json(_))
        ));
    }
}
