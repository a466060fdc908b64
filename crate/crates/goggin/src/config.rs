//! File-facing experiment configuration: one schema, readable as TOML or
//! JSON, mapping onto [`crate::harness::ExperimentConfig`].
//!
//! The canonical form of a config is its compact JSON serialization after
//! parsing (field order fixed by the struct), so digests do not depend on
//! the source syntax, key order, or whitespace.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filters::{FilterMode, GainMode};
use crate::harness::{default_burn_in, ExperimentConfig};
use crate::noise::NoiseSpec;
use crate::state_space::Model;

fn default_filters() -> Vec<String> {
    vec![
        "kf".into(),
        "gf".into(),
        "cgf".into(),
        "trivial_mean".into(),
        "trivial_obs".into(),
    ]
}

fn default_gain_mode() -> String {
    "recursive".into()
}

fn gaussian_spec() -> NoiseSpec {
    NoiseSpec::gaussian()
}

/// On-disk experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub n: f64,
    pub s: f64,
    #[serde(default = "gaussian_spec")]
    pub signal_noise: NoiseSpec,
    #[serde(default = "gaussian_spec")]
    pub obs_noise: NoiseSpec,
    pub horizon: usize,
    /// Omitted: `20 * ceil(s * sqrt(N))`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub burn_in: Option<usize>,
    pub replications: usize,
    /// Filter mode names; see [`FilterMode::parse`].
    #[serde(default = "default_filters")]
    pub filters: Vec<String>,
    /// Batch length for `naive_batch`; omitted: `max(round(s), 1)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub naive_tau: Option<usize>,
    pub seed: u64,
    /// Batch length for the reported information bound; omitted: `round(s)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<u64>,
    /// When set, comparisons also run the particle-filter oracle with this
    /// many particles on the same trajectory set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle_particles: Option<usize>,
    /// `"recursive"` or `"stationary"`.
    #[serde(default = "default_gain_mode")]
    pub gain_mode: String,
}

impl RunConfig {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let cfg: Self =
            serde_json::from_str(text).map_err(|e| Error::config(format!("bad JSON config: {e}")))?;
        cfg.reject_non_finite()?;
        Ok(cfg)
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self =
            toml::from_str(text).map_err(|e| Error::config(format!("bad TOML config: {e}")))?;
        cfg.reject_non_finite()?;
        Ok(cfg)
    }

    /// TOML admits `nan`/`inf` float literals; the canonical JSON form cannot
    /// express them, so both parse paths reject them up front.
    fn reject_non_finite(&self) -> Result<()> {
        let spec_values = |spec: &NoiseSpec| {
            spec.dof
                .into_iter()
                .chain(spec.weights.iter().flatten().copied())
                .chain(spec.means.iter().flatten().copied())
                .chain(spec.sigmas.iter().flatten().copied())
                .collect::<Vec<f64>>()
        };
        let values = [self.n, self.s]
            .into_iter()
            .chain(spec_values(&self.signal_noise))
            .chain(spec_values(&self.obs_noise));
        for x in values {
            if !x.is_finite() {
                return Err(Error::config(format!("non-finite numeric value {x} in config")));
            }
        }
        Ok(())
    }

    /// Load by extension: `.json` or `.toml`.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => Self::from_json_str(&text),
            Some("toml") => Self::from_toml_str(&text),
            other => Err(Error::config(format!(
                "config must end in .json or .toml, got {:?} ({})",
                other.unwrap_or(""),
                path.display()
            ))),
        }
    }

    /// Compact JSON with fixed field order — the digest input.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serialization cannot fail")
    }

    /// Default naive-batch length, `max(round(s), 1)` (mirrors the
    /// information-bound default).
    pub fn naive_tau(&self) -> usize {
        self.naive_tau.unwrap_or(self.s.round().max(1.0) as usize)
    }

    pub fn model(&self) -> Result<Model> {
        Model::from_specs(self.n, self.s, &self.signal_noise, &self.obs_noise)
    }

    /// Resolve into a validated [`ExperimentConfig`].
    pub fn to_experiment(&self) -> Result<ExperimentConfig> {
        let model = self.model()?;
        let burn_in = self.burn_in.unwrap_or_else(|| default_burn_in(&model));
        let naive_tau = self.naive_tau();
        let filters = self
            .filters
            .iter()
            .map(|name| FilterMode::parse(name, naive_tau))
            .collect::<Result<Vec<_>>>()?;
        let config = ExperimentConfig {
            model,
            horizon: self.horizon,
            burn_in,
            replications: self.replications,
            filters,
            seed: self.seed,
            tau_override: self.tau.map(|t| t as usize),
            gain_mode: GainMode::parse(&self.gain_mode)?,
        };
        config.validate()?;
        Ok(config)
    }
}
