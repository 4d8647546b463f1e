//! Run configuration: a TOML file with one table per stage. Any key can be
//! overridden as `table.key=value`, or by its bare name when that name is
//! unique across tables.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::centrality::{CascadeParams, ClosenessForm, PageRankParams};
use crate::error::{Error, Result};
use crate::retrieval::Grid;
use crate::textprep::Weighting;
use crate::topics::ModelKind;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InputConfig {
    /// Record file or canonical JSON-lines export.
    pub corpus: PathBuf,
    /// Directory of expert lists, one file per field.
    pub experts: PathBuf,
    /// Field labels (expert-list file stems) to run.
    pub fields: Vec<String>,
}

impl Default for InputConfig {
    fn default() -> Self {
        InputConfig {
            corpus: PathBuf::from("corpus.txt"),
            experts: PathBuf::from("experts"),
            fields: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub kind: ModelKind,
    pub k: Vec<usize>,
    pub rho: Vec<f64>,
    pub gamma: Vec<f64>,
    pub weighting: Weighting,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            kind: ModelKind::Lsi,
            k: vec![100, 200, 300, 400, 500, 600],
            rho: vec![1e-3, 1e-4],
            gamma: (0..10).map(|i| i as f64 / 10.0).collect(),
            weighting: Weighting::Binary,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RetrievalConfig {
    /// Candidates per field = multiplier × training experts.
    pub multiplier: usize,
}

impl Default for RetrievalConfig {
    fn default() -> Self {
        RetrievalConfig { multiplier: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CascadeConfig {
    pub p: f64,
    pub reps: usize,
    pub seeds: usize,
    pub weight_scaled: bool,
}

impl Default for CascadeConfig {
    fn default() -> Self {
        let d = CascadeParams::default();
        CascadeConfig {
            p: d.p,
            reps: d.reps,
            seeds: d.seeds_k,
            weight_scaled: d.weight_scaled,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CentralityConfig {
    pub damping: f64,
    pub closeness: ClosenessForm,
}

impl Default for CentralityConfig {
    fn default() -> Self {
        CentralityConfig {
            damping: PageRankParams::default().damping,
            closeness: ClosenessForm::Harmonic,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AggregateConfig {
    pub smoothing: f64,
}

impl Default for AggregateConfig {
    fn default() -> Self {
        AggregateConfig {
            smoothing: crate::aggregate::DEFAULT_SMOOTHING,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub cache_dir: PathBuf,
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            cache_dir: PathBuf::from("cache"),
            out_dir: PathBuf::from("out"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub input: InputConfig,
    pub model: ModelConfig,
    pub retrieval: RetrievalConfig,
    pub cascade: CascadeConfig,
    pub centrality: CentralityConfig,
    pub aggregate: AggregateConfig,
    pub run: RunConfig,
}

impl PipelineConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidParameter(format!("config: {e}")))
    }

    /// Reads a config file; relative paths in it are taken relative to the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::parse(&text).map_err(|e| match e {
            Error::InvalidParameter(m) => Error::format("config", path, m),
            e => e,
        })?;
        if let Some(base) = path.parent() {
            cfg.rebase(base);
        }
        Ok(cfg)
    }

    fn rebase(&mut self, base: &Path) {
        for p in [
            &mut self.input.corpus,
            &mut self.input.experts,
            &mut self.run.cache_dir,
            &mut self.run.out_dir,
        ] {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Sets `table.key` (or a bare key unique across tables) from a TOML
    /// literal; text that does not parse as TOML is taken as a string.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let mut doc = toml::Table::try_from(&*self).expect("config serializes");
        let (table, field) = match key.split_once('.') {
            Some((t, f)) => (t.to_string(), f.to_string()),
            None => {
                let owners: Vec<&String> = doc
                    .iter()
                    .filter(|(_, v)| v.as_table().is_some_and(|t| t.contains_key(key)))
                    .map(|(k, _)| k)
                    .collect();
                match owners.as_slice() {
                    [one] => ((*one).clone(), key.to_string()),
                    [] => return Err(Error::InvalidParameter(format!("unknown config key {key:?}"))),
                    _ => return Err(Error::InvalidParameter(format!("ambiguous config key {key:?}"))),
                }
            }
        };
        let parsed = toml::from_str::<toml::Table>(&format!("v = {value}"))
            .ok()
            .and_then(|mut t| t.remove("v"))
            .unwrap_or_else(|| toml::Value::String(value.to_string()));
        let section = doc
            .get_mut(&table)
            .and_then(|v| v.as_table_mut())
            .filter(|t| t.contains_key(&field))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown config key {key:?}")))?;
        section.insert(field, parsed);
        *self = doc
            .try_into()
            .map_err(|e| Error::InvalidParameter(format!("config override {key}={value}: {e}")))?;
        Ok(())
    }

    pub fn grid(&self) -> Grid {
        Grid {
            kind: self.model.kind,
            ks: self.model.k.clone(),
            rhos: self.model.rho.clone(),
            gammas: self.model.gamma.clone(),
        }
    }

    pub fn cascade_params(&self, rng_seed: u64) -> CascadeParams {
        CascadeParams {
            p: self.cascade.p,
            reps: self.cascade.reps,
            seeds_k: self.cascade.seeds,
            rng_seed,
            weight_scaled: self.cascade.weight_scaled,
        }
    }

    pub fn pagerank_params(&self) -> PageRankParams {
        PageRankParams {
            damping: self.centrality.damping,
            ..Default::default()
        }
    }

    /// Checks everything that can be checked before the run starts.
    pub fn validate(&self) -> Result<()> {
        if self.input.fields.is_empty() {
            return Err(Error::InvalidParameter("config lists no fields".into()));
        }
        if !self.input.corpus.is_file() {
            return Err(Error::InvalidParameter(format!(
                "corpus {} does not exist",
                self.input.corpus.display()
            )));
        }
        if !self.input.experts.is_dir() {
            return Err(Error::InvalidParameter(format!(
                "expert directory {} does not exist",
                self.input.experts.display()
            )));
        }
        self.grid().validate()?;
        if self.retrieval.multiplier < 1 {
            return Err(Error::InvalidParameter("multiplier must be at least 1".into()));
        }
        self.cascade_params(0).validate()?;
        if !(0.0..=1.0).contains(&self.centrality.damping) {
            return Err(Error::InvalidParameter(format!(
                "damping {} outside [0, 1]",
                self.centrality.damping
            )));
        }
        if !(0.0..=1.0).contains(&self.aggregate.smoothing) {
            return Err(Error::InvalidParameter(format!(
                "smoothing {} outside [0, 1]",
                self.aggregate.smoothing
            )));
        }
        Ok(())
    }
}
