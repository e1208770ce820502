//! Run configuration file (TOML). Every key is optional; command-line flags
//! override file values. Relative paths resolve against the directory of the
//! config file.
//!
//! ```toml
//! [paths]
//! data_dir = "data"
//! snapshot_dir = "out/snapshot"
//! output_dir = "out"
//! stopwords = "resources/stopwords.txt"   # default: bundled list
//! lemmas = "resources/lemmas.tsv"         # default: bundled table
//!
//! [preprocess]
//! lowercase = true
//! strip_punctuation = true
//!
//! [retrieval]
//! method = "ibm25"                        # ibm25 | bm25 | tfidf
//! n0 = 16
//! growth = 2.0
//! downscale = 0.5
//! k = 200
//! query_mode = "correct_answer_only"      # or "all_choices"
//! k1 = 1.5
//! b = 0.75
//!
//! [eval]
//! gain = "exponential"                    # or "linear"
//!
//! [run]
//! split = "dev"
//! threads = 8                             # default: available parallelism
//! seeds = [0, 1, 2, 3]
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::corpus::{QueryMode, Split};
use crate::error::{Error, Result};
use crate::eval::{EvalConfig, Gain};
use crate::index::Bm25Params;
use crate::retrieve::{IbmParams, Method};
use crate::textpipe::{load_preprocess_config, PreprocessConfig};

/// Environment variable naming a config file when `--config` is absent.
pub const CONFIG_ENV: &str = "HOPRANK_CONFIG";

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathsSection {
    pub data_dir: Option<PathBuf>,
    pub snapshot_dir: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
    pub stopwords: Option<PathBuf>,
    pub lemmas: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PreprocessSection {
    pub lowercase: bool,
    pub strip_punctuation: bool,
}

impl Default for PreprocessSection {
    fn default() -> Self {
        Self {
            lowercase: true,
            strip_punctuation: true,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RetrievalSection {
    pub method: Option<String>,
    pub n0: Option<usize>,
    pub growth: Option<f64>,
    pub downscale: Option<f64>,
    pub k: Option<usize>,
    pub query_mode: Option<QueryMode>,
    pub k1: Option<f64>,
    pub b: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalSection {
    pub gain: Option<Gain>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub split: Option<String>,
    pub threads: Option<usize>,
    #[serde(default)]
    pub seeds: Vec<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub paths: PathsSection,
    #[serde(default)]
    pub preprocess: PreprocessSection,
    #[serde(default)]
    pub retrieval: RetrievalSection,
    #[serde(default)]
    pub eval: EvalSection,
    #[serde(default)]
    pub run: RunSection,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        if !path.is_file() {
            return Err(Error::MissingPath(path.to_path_buf()));
        }
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::parse(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        let p = &mut cfg.paths;
        for slot in [
            &mut p.data_dir,
            &mut p.snapshot_dir,
            &mut p.output_dir,
            &mut p.stopwords,
            &mut p.lemmas,
        ] {
            if let Some(v) = slot.as_mut() {
                if v.is_relative() {
                    *v = base.join(&*v);
                }
            }
        }
        Ok(cfg)
    }

    /// Loads `explicit`, else the file named by [`CONFIG_ENV`], else defaults.
    pub fn resolve(explicit: Option<&Path>) -> Result<Self> {
        if let Some(p) = explicit {
            return Self::load(p);
        }
        match std::env::var_os(CONFIG_ENV) {
            Some(p) if !p.is_empty() => Self::load(Path::new(&p)),
            _ => Ok(Self::default()),
        }
    }

    pub fn ibm_params(&self) -> IbmParams {
        let d = IbmParams::default();
        let r = &self.retrieval;
        IbmParams {
            n0: r.n0.unwrap_or(d.n0),
            growth: r.growth.unwrap_or(d.growth),
            downscale: r.downscale.unwrap_or(d.downscale),
            k: r.k.unwrap_or(d.k),
            query_mode: r.query_mode.unwrap_or(d.query_mode),
            bm25: Bm25Params {
                k1: r.k1.unwrap_or(d.bm25.k1),
                b: r.b.unwrap_or(d.bm25.b),
            },
        }
    }

    pub fn method(&self) -> Result<Method> {
        self.retrieval.method.as_deref().unwrap_or("ibm25").parse()
    }

    pub fn eval_config(&self) -> EvalConfig {
        EvalConfig {
            gain: self.eval.gain.unwrap_or_default(),
        }
    }

    pub fn split(&self) -> Result<Split> {
        self.run.split.as_deref().unwrap_or("dev").parse()
    }

    /// Bundled resources unless the config names files.
    pub fn preprocess_config(&self) -> Result<PreprocessConfig> {
        let p = &self.paths;
        for path in [&p.stopwords, &p.lemmas].into_iter().flatten() {
            if !path.is_file() {
                return Err(Error::MissingPath(path.clone()));
            }
        }
        let mut cfg = if p.stopwords.is_none() && p.lemmas.is_none() {
            PreprocessConfig::shipped()
        } else {
            let shipped = PreprocessConfig::shipped();
            let mut cfg = load_preprocess_config(p.stopwords.as_deref(), p.lemmas.as_deref())?;
            if p.stopwords.is_none() {
                cfg.stopwords = shipped.stopwords;
            }
            if p.lemmas.is_none() {
                cfg.lemma_map = shipped.lemma_map;
            }
            cfg
        };
        cfg.lowercase = self.preprocess.lowercase;
        cfg.strip_punctuation = self.preprocess.strip_punctuation;
        Ok(cfg)
    }
}
