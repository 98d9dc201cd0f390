//! Experiment configuration: a model document plus task fields.

use std::fs;
use std::path::{Path, PathBuf};

use hmmem::model::EmissionSpec;
use hmmem::{HiddenMarkovModel, KernelKind, ModelSpec, Observation, ObservationSpace};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Simulate,
    Posterior,
    Risk,
    Bounds,
    KernelRisk,
    ReproduceSimTable,
    IngestCheck,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Simulate => "simulate",
            Task::Posterior => "posterior",
            Task::Risk => "risk",
            Task::Bounds => "bounds",
            Task::KernelRisk => "kernel-risk",
            Task::ReproduceSimTable => "reproduce-sim-table",
            Task::IngestCheck => "ingest-check",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodChoice {
    /// Exact enumeration for discrete emissions, Monte Carlo otherwise.
    #[default]
    Auto,
    Exact,
    MonteCarlo,
}

/// One point of a posterior window: a symbol or a coordinate vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PointSpec {
    Symbol(usize),
    Vector(Vec<f64>),
}

impl PointSpec {
    pub fn to_observation(&self, space: ObservationSpace) -> CliResult<Observation> {
        match (self, space) {
            (PointSpec::Symbol(s), ObservationSpace::Discrete { .. }) => Ok(Observation::Symbol(*s)),
            (PointSpec::Vector(v), ObservationSpace::Continuous { .. }) => Ok(Observation::Vector(v.clone())),
            (PointSpec::Symbol(s), ObservationSpace::Continuous { dim: 1 }) => Ok(Observation::Vector(vec![*s as f64])),
            _ => Err(CliError::Config(format!("window point {self:?} does not fit the observation space"))),
        }
    }
}

fn default_test_windows() -> usize {
    10_000
}

fn default_replicates() -> usize {
    5
}

fn default_kernel() -> KernelKind {
    KernelKind::Gaussian
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub task: Option<Task>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transition: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub emission: Option<EmissionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<Vec<f64>>,
    /// Model document to load instead of the inline fields.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model_path: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    /// Smallest memory.
    #[serde(default)]
    pub l: usize,
    /// Largest memory, inclusive; defaults to `l`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l_max: Option<usize>,
    /// Sequence length for `simulate`, training windows for `kernel-risk`.
    #[serde(default)]
    pub n: Vec<usize>,
    /// Monte Carlo sample count for `risk`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
    #[serde(default)]
    pub method: MethodChoice,
    /// Bandwidth grid.
    #[serde(default)]
    pub h: Vec<f64>,
    #[serde(default = "default_kernel")]
    pub kernel: KernelKind,
    #[serde(default = "default_test_windows")]
    pub test_windows: usize,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<Vec<PointSpec>>,
    /// Labeled-sequence CSV used for training or checking.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test_data: Option<PathBuf>,
    /// Class count and dimension for data files when no model is given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classes: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_samples: Option<u64>,
    /// Output path; not part of the config hash.
    #[serde(default, skip_serializing)]
    pub out: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("empty config deserializes")
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Reads a config file. Relative paths inside it are resolved against
    /// the file's directory.
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut cfg = Self::from_json(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut cfg.model_path, &mut cfg.data, &mut cfg.test_data, &mut cfg.out].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn memories(&self) -> std::ops::RangeInclusive<usize> {
        self.l..=self.l_max.unwrap_or(self.l)
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.task.is_none() {
            return Err(CliError::Config("no task given".into()));
        }
        if self.l_max.is_some_and(|m| m < self.l) {
            return Err(CliError::Config("l_max must be at least l".into()));
        }
        if self.n.contains(&0) {
            return Err(CliError::Config("every n must be at least 1".into()));
        }
        if let Some(h) = self.h.iter().find(|h| !(h.is_finite() && **h > 0.0)) {
            return Err(CliError::Config(format!("bandwidth {h} must be positive")));
        }
        if self.test_windows == 0 || self.replicates == 0 {
            return Err(CliError::Config("test_windows and replicates must be at least 1".into()));
        }
        if self.samples == Some(0) || self.beta_samples == Some(0) {
            return Err(CliError::Config("sample counts must be at least 1".into()));
        }
        if self.model_path.is_some() && (self.transition.is_some() || self.emission.is_some()) {
            return Err(CliError::Config("give either model_path or an inline model, not both".into()));
        }
        for p in [&self.model_path, &self.data, &self.test_data].into_iter().flatten() {
            if !p.is_file() {
                return Err(CliError::Config(format!("file {} does not exist", p.display())));
            }
        }
        Ok(())
    }

    /// The model document, inline or from `model_path`; `None` if neither.
    pub fn model_spec(&self) -> CliResult<Option<ModelSpec>> {
        if let Some(p) = &self.model_path {
            let text = fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
            return Ok(Some(ModelSpec::from_json(&text)?));
        }
        match (&self.transition, &self.emission) {
            (Some(t), Some(e)) => {
                Ok(Some(ModelSpec { transition: t.clone(), emission: e.clone(), initial: self.initial.clone() }))
            }
            (None, None) if self.initial.is_none() => Ok(None),
            _ => Err(CliError::Config("an inline model needs both transition and emission".into())),
        }
    }

    pub fn model(&self) -> CliResult<HiddenMarkovModel> {
        let spec = self.model_spec()?.ok_or_else(|| CliError::Config("this task needs a model".into()))?;
        Ok(spec.build()?)
    }

    /// Hex SHA-256 of the canonical config: model inlined, output path
    /// dropped, data files represented by their contents' digests.
    pub fn hash(&self) -> CliResult<String> {
        let mut canon = self.clone();
        if let Some(spec) = self.model_spec()? {
            canon.transition = Some(spec.transition);
            canon.emission = Some(spec.emission);
            canon.initial = spec.initial;
            canon.model_path = None;
        }
        let mut hasher = Sha256::new();
        hasher.update(serde_json::to_vec(&canon).expect("config serializes"));
        for p in [&self.data, &self.test_data].into_iter().flatten() {
            let bytes = fs::read(p).map_err(|e| CliError::io(p, e))?;
            hasher.update(Sha256::digest(&bytes));
        }
        Ok(hex::encode(hasher.finalize()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MODEL: &str = r#"{"transition":[[0.9,0.1],[0.2,0.8]],"emission":{"type":"discrete","table":[[0.7,0.3],[0.1,0.9]]}}"#;

    #[test]
    fn defaults() {
        let c = ExperimentConfig::default();
        assert_eq!((c.seed, c.l, c.test_windows, c.replicates), (0, 0, 10_000, 5));
        assert_eq!(c.kernel, KernelKind::Gaussian);
        assert_eq!(c.memories(), 0..=0);
    }

    #[test]
    fn inline_model_and_task_fields() {
        let c = ExperimentConfig::from_json(
            r#"{"task":"risk","l":0,"l_max":3,"kernel":"normal","window":[1,0],
                "transition":[[0.9,0.1],[0.2,0.8]],
                "emission":{"type":"discrete","table":[[0.7,0.3],[0.1,0.9]]}}"#,
        )
        .unwrap();
        assert_eq!(c.task, Some(Task::Risk));
        assert_eq!(c.memories(), 0..=3);
        assert_eq!(c.model().unwrap().classes(), 2);
        assert_eq!(c.window.as_ref().unwrap()[0], PointSpec::Symbol(1));
        c.validate().unwrap();
    }

    #[test]
    fn rejects_bad_fields() {
        assert!(ExperimentConfig::from_json(r#"{"task":"risk","bogus":1}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"task":"nope"}"#).is_err());
        let c = ExperimentConfig::from_json(r#"{"task":"risk","n":[0]}"#).unwrap();
        assert!(c.validate().is_err());
        let c = ExperimentConfig::from_json(r#"{"task":"risk","l":3,"l_max":1}"#).unwrap();
        assert!(c.validate().is_err());
        let c = ExperimentConfig::from_json(r#"{"task":"risk","data":"/nonexistent/file.csv"}"#).unwrap();
        assert!(c.validate().is_err());
        let c = ExperimentConfig::from_json(r#"{"task":"risk","transition":[[1.0]]}"#).unwrap();
        assert!(c.model_spec().is_err());
    }

    #[test]
    fn hash_ignores_output_path() {
        let mut a = ExperimentConfig::from_json(r#"{"task":"bounds","seed":4}"#).unwrap();
        let h = a.hash().unwrap();
        a.out = Some("somewhere.csv".into());
        assert_eq!(a.hash().unwrap(), h);
        a.seed = 5;
        assert_ne!(a.hash().unwrap(), h);
        assert_eq!(h.len(), 64);
    }

    #[test]
    fn hash_sees_through_model_path() {
        let tmp = tempfile::tempdir().unwrap();
        let dir = tmp.path();
        let model = dir.join("m.json");
        fs::write(&model, MODEL).unwrap();
        let cfg = dir.join("c.json");
        fs::write(&cfg, r#"{"task":"risk","model_path":"m.json"}"#).unwrap();
        let from_file = ExperimentConfig::load(&cfg).unwrap();
        let inline = ExperimentConfig::from_json(&format!(
            r#"{{"task":"risk",{}}}"#,
            &MODEL[1..MODEL.len() - 1]
        ))
        .unwrap();
        assert_eq!(from_file.hash().unwrap(), inline.hash().unwrap());
    }
}
