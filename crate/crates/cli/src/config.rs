//! Experiment configuration: one strict JSON document per run.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rcdstab_core::bounds::{PPolicy, RecipeRegime, StabilityRegime};
use rcdstab_core::data::SyntheticSpec;
use rcdstab_core::losses::LossModel;
use rcdstab_core::optim::{Algorithm, StepSchedule};
use rcdstab_core::stability::PairingPolicy;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    StabilityCurve,
    RcdVsSgd,
    BoundCheck,
    GeneralizationSweep,
    PropertySuite,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dataset: Option<DatasetConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<LossModel>,
    #[serde(default)]
    pub run: RunBlock,
    #[serde(default)]
    pub policy: PairingPolicy,
    #[serde(default = "default_algorithm")]
    pub algorithm: Algorithm,
    /// Held-out probe points for the uniform-stability estimate.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<BoundBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub properties: Option<PropertiesBlock>,
}

fn default_replicates() -> usize {
    100
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

fn default_algorithm() -> Algorithm {
    Algorithm::Rcd
}

/// Exactly one source: `{"synthetic": {...}}` or `{"file": {...}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum DatasetConfig {
    Synthetic(SyntheticSpec),
    File(FileDataset),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileDataset {
    /// LIBSVM file; relative paths resolve against the config file's directory.
    pub path: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    /// Map this label to +1 and every other label to -1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positive_label: Option<f64>,
    #[serde(default)]
    pub normalize: bool,
    /// Fraction moved into the held-out pool (neighbor replacements, probes).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test_fraction: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunBlock {
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    #[serde(default)]
    pub schedule: StepSchedule,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub record_every: Option<usize>,
    #[serde(default)]
    pub margin_cache: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w1: Option<Vec<f64>>,
}

fn default_iterations() -> usize {
    2000
}

impl Default for RunBlock {
    fn default() -> Self {
        Self {
            iterations: default_iterations(),
            schedule: StepSchedule::default(),
            record_every: None,
            margin_cache: false,
            w1: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundBlock {
    /// Defaults depend on the model: every regime whose assumptions it meets.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regimes: Option<Vec<StabilityRegime>>,
    #[serde(default)]
    pub p: PPolicy,
    /// `||w||_inf` bound for least squares; ridge models default to the
    /// sublevel-set radius `sqrt(2 F_S(w_1) / lambda)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain_radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimization: Option<OptimizationBlock>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizationBlock {
    #[serde(default = "default_seeds")]
    pub seeds: usize,
    #[serde(default = "default_reference_iterations")]
    pub reference_iterations: usize,
    #[serde(default = "default_reference_tol")]
    pub reference_tol: f64,
}

fn default_seeds() -> usize {
    200
}

fn default_reference_iterations() -> usize {
    100_000
}

fn default_reference_tol() -> f64 {
    1e-10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepBlock {
    pub ns: Vec<usize>,
    /// Early-stopping recipe for `T(n)`; `convex-lipschitz` unless `horizon` is set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recipe: Option<RecipeRegime>,
    /// Fixed horizon instead of a recipe.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<usize>,
    #[serde(default = "one")]
    pub c: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default = "default_test_size")]
    pub test_size: usize,
    #[serde(default = "default_reference_iterations")]
    pub reference_iterations: usize,
}

fn one() -> f64 {
    1.0
}

fn default_test_size() -> usize {
    5000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropertiesBlock {
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_sample_trials")]
    pub sample_trials: usize,
    #[serde(default = "default_max_dim")]
    pub max_dim: usize,
}

fn default_trials() -> usize {
    10_000
}

fn default_sample_trials() -> usize {
    1_000
}

fn default_max_dim() -> usize {
    8
}

impl Default for PropertiesBlock {
    fn default() -> Self {
        Self {
            trials: default_trials(),
            sample_trials: default_sample_trials(),
            max_dim: default_max_dim(),
        }
    }
}

/// Top-level scalar overrides from the command line.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub replicates: Option<usize>,
    pub out: Option<PathBuf>,
}

/// A validated config plus the directory relative file paths resolve against.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: ExperimentConfig,
    pub base_dir: PathBuf,
}

impl LoadedConfig {
    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let config: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        anyhow::anyhow!("config key `{path}`: {}", e.into_inner())
    })?;
    Ok(config)
}

pub fn load_config(path: &Path, overrides: &Overrides) -> Result<LoadedConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    let mut config = parse_config(&text).with_context(|| format!("in {}", path.display()))?;
    if let Some(seed) = overrides.seed {
        config.seed = seed;
    }
    if let Some(r) = overrides.replicates {
        config.replicates = r;
    }
    if let Some(out) = &overrides.out {
        config.out = out.clone();
    }
    let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let loaded = LoadedConfig { config, base_dir };
    validate(&loaded)?;
    Ok(loaded)
}

fn field<T>(value: &Option<T>, name: &str) -> Result<()> {
    if value.is_none() {
        bail!("config key `{name}`: required for this experiment kind");
    }
    Ok(())
}

pub fn validate(loaded: &LoadedConfig) -> Result<()> {
    let c = &loaded.config;
    if c.replicates == 0 {
        bail!("config key `replicates`: must be at least 1");
    }
    if c.kind == ExperimentKind::PropertySuite {
        let p = c.properties.clone().unwrap_or_default();
        if p.trials == 0 {
            bail!("config key `properties.trials`: must be at least 1");
        }
        if p.sample_trials == 0 {
            bail!("config key `properties.sample_trials`: must be at least 1");
        }
        if p.max_dim < 2 {
            bail!("config key `properties.max_dim`: must be at least 2");
        }
        return Ok(());
    }
    field(&c.dataset, "dataset")?;
    field(&c.model, "model")?;
    let model = c.model.as_ref().expect("checked");
    model.validate().context("config key `model`")?;
    c.run
        .schedule
        .validate()
        .context("config key `run.schedule`")?;
    if c.run.iterations == 0 {
        bail!("config key `run.iterations`: must be at least 1");
    }
    if c.run.record_every == Some(0) {
        bail!("config key `run.record_every`: must be at least 1");
    }
    match c.dataset.as_ref().expect("checked") {
        DatasetConfig::Synthetic(spec) => {
            spec.validate().context("config key `dataset.synthetic`")?
        }
        DatasetConfig::File(f) => {
            let path = loaded.resolve(&f.path);
            if !path.is_file() {
                bail!(
                    "config key `dataset.file.path`: {} does not exist",
                    path.display()
                );
            }
            if let Some(frac) = f.test_fraction {
                if !(frac > 0.0 && frac < 1.0) {
                    bail!("config key `dataset.file.test_fraction`: must lie in (0, 1)");
                }
            }
        }
    }
    let stability = matches!(
        c.kind,
        ExperimentKind::StabilityCurve | ExperimentKind::RcdVsSgd | ExperimentKind::BoundCheck
    );
    if stability && c.replicates < 2 {
        bail!("config key `replicates`: stability estimates need at least 2 replicates");
    }
    if c.kind == ExperimentKind::BoundCheck {
        if let Some(OptimizationBlock { seeds, .. }) =
            c.bounds.as_ref().and_then(|b| b.optimization.as_ref())
        {
            if *seeds < 2 {
                bail!("config key `bounds.optimization.seeds`: must be at least 2");
            }
        }
        if let Some(r) = c.bounds.as_ref().and_then(|b| b.domain_radius) {
            if !(r > 0.0 && r.is_finite()) {
                bail!("config key `bounds.domain_radius`: must be finite and positive");
            }
        }
    }
    if c.kind == ExperimentKind::GeneralizationSweep {
        field(&c.sweep, "sweep")?;
        let s = c.sweep.as_ref().expect("checked");
        if !matches!(c.dataset, Some(DatasetConfig::Synthetic(_))) {
            bail!("config key `dataset`: generalization sweeps draw fresh samples and need a synthetic source");
        }
        if s.ns.is_empty() || s.ns.contains(&0) {
            bail!("config key `sweep.ns`: must list sample sizes of at least 1");
        }
        if s.recipe.is_some() && s.horizon.is_some() {
            bail!("config key `sweep.horizon`: give either a recipe or a horizon, not both");
        }
        if s.horizon == Some(0) {
            bail!("config key `sweep.horizon`: must be at least 1");
        }
        if s.test_size == 0 {
            bail!("config key `sweep.test_size`: must be at least 1");
        }
    }
    if c.probe_size == Some(0) {
        bail!("config key `probe_size`: must be at least 1");
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn loaded(text: &str) -> Result<LoadedConfig> {
        let l = LoadedConfig {
            config: parse_config(text)?,
            base_dir: PathBuf::new(),
        };
        validate(&l)?;
        Ok(l)
    }

    const MINIMAL: &str = r#"{"kind": "stability-curve",
        "dataset": {"synthetic": {"n": 20, "d": 3, "generator": "gaussian-logistic"}},
        "model": {"kind": "logistic"}}"#;

    #[test]
    fn minimal_config_gets_protocol_defaults() {
        let c = loaded(MINIMAL).unwrap().config;
        assert_eq!(c.replicates, 100);
        assert_eq!(c.run.schedule, StepSchedule::Constant { eta: 0.01 });
        assert!(c.policy.couple_randomness);
        assert_eq!(c.algorithm, Algorithm::Rcd);
    }

    #[test]
    fn zero_replicates_named() {
        let text = MINIMAL.replace(
            "\"kind\": \"stability-curve\",",
            "\"kind\": \"stability-curve\", \"replicates\": 0,",
        );
        let err = loaded(&text).unwrap_err().to_string();
        assert!(err.contains("replicates"), "{err}");
    }

    #[test]
    fn unknown_keys_name_their_path() {
        let text = MINIMAL.replace("\"d\": 3", "\"d\": 3, \"dims\": 4");
        let err = format!("{:#}", loaded(&text).unwrap_err());
        assert!(err.contains("dataset.synthetic"), "{err}");
        let text = MINIMAL.replace(
            "{\"kind\": \"logistic\"}",
            "{\"kind\": \"logistic\", \"lambda\": 1}",
        );
        let err = format!("{:#}", loaded(&text).unwrap_err());
        assert!(err.contains("model"), "{err}");
    }

    #[test]
    fn type_errors_name_their_path() {
        let text = MINIMAL.replace("\"n\": 20", "\"n\": \"twenty\"");
        let err = format!("{:#}", loaded(&text).unwrap_err());
        assert!(err.contains("dataset.synthetic.n"), "{err}");
    }

    #[test]
    fn two_dataset_sources_rejected() {
        let text = MINIMAL.replace(
            "\"dataset\": {",
            "\"dataset\": {\"file\": {\"path\": \"x\"}, ",
        );
        assert!(loaded(&text).is_err());
    }

    #[test]
    fn missing_file_rejected() {
        let text = MINIMAL.replace(
            r#"{"synthetic": {"n": 20, "d": 3, "generator": "gaussian-logistic"}}"#,
            r#"{"file": {"path": "/nonexistent/x.libsvm"}}"#,
        );
        let err = format!("{:#}", loaded(&text).unwrap_err());
        assert!(err.contains("dataset.file.path"), "{err}");
    }

    #[test]
    fn round_trip_is_identity() {
        let c = loaded(MINIMAL).unwrap().config;
        let again = parse_config(&serde_json::to_string_pretty(&c).unwrap()).unwrap();
        assert_eq!(c, again);
    }

    #[test]
    fn zero_trial_property_suite_rejected() {
        let err = loaded(r#"{"kind": "property-suite", "properties": {"trials": 0}}"#).unwrap_err();
        assert!(err.to_string().contains("trials"));
    }
}
