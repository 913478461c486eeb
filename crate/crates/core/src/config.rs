// SPDX-License-Identifier: Apache-2.0

//! Flat `key = value` configuration files.
//!
//! Blank lines and lines starting with `#` are ignored. Later assignments
//! override earlier ones, which is how `--set key=value` flags layer over a
//! config file.
//!
//! Keys understood by [`RunConfig`]:
//!
//! | key | default | meaning |
//! |-----|---------|---------|
//! | `preset` | none | `geotext`, `twitter_us` or `twitter_world`; sets `bucket_size` and `celebrity_threshold` to the tuned values for that corpus |
//! | `dataset` | required | path to the user records |
//! | `format` | `tsv` | `tsv` or `jsonl` |
//! | `bucket_size` | 50 | maximum training users per k-d tree cell |
//! | `celebrity_threshold` | `none` | drop outside handles with more distinct mentioners than this; `none` keeps all |
//! | `mode` | `binary` | edge weights, `binary` or `weighted` |
//! | `mu1`, `mu2` | 1.0, 0.1 | seed-fidelity and smoothness weights |
//! | `tolerance` | 1e-5 | stop when no label score moves more than this in a sweep |
//! | `max_sweeps` | 200 | Gauss–Seidel sweep budget |
//! | `dongle` | `off` | attach text-prior dongle nodes to evaluation users |
//! | `dongle_weight`, `dongle_confidence` | 1.0, 1.0 | dongle edge weight and seed confidence |
//! | `l1_strength` | 1e-4 | text classifier l1 penalty |
//! | `text_max_iter` | 300 | proximal gradient iterations for the text classifier |
//! | `text_min_df` | 1 | minimum document frequency for a vocabulary term |
//! | `eval_split` | `test` | `dev` or `test` |
//! | `out` | `out` | artifact directory |
//! | `seed` | 0 | recorded in the manifest; the pipeline itself is deterministic |
//! | `sweep_t` | `1,2,5,10,15,25,50,100,none` | thresholds visited by `sweep` |
//! | `grid_t`, `grid_bucket_size`, `grid_mu2`, `grid_l1_strength` | current value | comma lists searched by `tune` |
//! | `predictions` | none | prediction file scored by `eval` |
//!
//! Keys understood by [`SynthConfig`](crate::dataset::SynthConfig) are
//! listed on that type.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::{Format, Split};
use crate::error::{Error, Result};
use crate::graph::{EdgeMode, Threshold};
use crate::mad::MadParams;
use crate::textprior::TextParams;

/// Ordered key/value pairs read from a config file and `--set` overrides.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct KeyValues {
    entries: BTreeMap<String, String>,
}

impl KeyValues {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn parse(input: &str) -> Result<Self> {
        let mut kv = KeyValues::new();
        for (i, line) in input.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            kv.set_assignment(line)
                .map_err(|e| Error::Config(format!("line {}: {e}", i + 1)))?;
        }
        Ok(kv)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let input = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&input)
    }

    /// Applies one `key=value` assignment.
    pub fn set_assignment(&mut self, assignment: &str) -> Result<()> {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("expected key=value, got {assignment:?}")))?;
        let key = key.trim();
        if key.is_empty() {
            return Err(Error::Config(format!("empty key in {assignment:?}")));
        }
        self.set(key, value.trim());
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.entries.insert(key.to_string(), value.into());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| Error::Config(format!("{key}={v}: {e}")))
            })
            .transpose()
    }

    pub fn parsed_or<T: FromStr>(&self, key: &str, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        Ok(self.parsed(key)?.unwrap_or(default))
    }

    /// Comma-separated list; `None` when the key is absent.
    pub fn list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>>
    where
        T::Err: std::fmt::Display,
    {
        let Some(raw) = self.get(key) else {
            return Ok(None);
        };
        raw.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<T>().map_err(|e| Error::Config(format!("{key}: {s:?}: {e}"))))
            .collect::<Result<Vec<T>>>()
            .map(Some)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }
}

/// `on`/`off` switch with the usual spellings.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Switch(pub bool);

impl FromStr for Switch {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "on" | "true" | "yes" | "1" => Ok(Switch(true)),
            "off" | "false" | "no" | "0" => Ok(Switch(false)),
            other => Err(format!("expected on/off, got {other:?}")),
        }
    }
}

/// Tuned settings for the three benchmark corpora.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    Geotext,
    TwitterUs,
    TwitterWorld,
}

impl Preset {
    pub fn bucket_size(self) -> usize {
        match self {
            Preset::Geotext => 50,
            Preset::TwitterUs | Preset::TwitterWorld => 2400,
        }
    }

    pub fn celebrity_threshold(self) -> usize {
        match self {
            Preset::Geotext | Preset::TwitterWorld => 5,
            Preset::TwitterUs => 15,
        }
    }
}

impl FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "geotext" => Ok(Preset::Geotext),
            "twitter_us" | "twitterus" => Ok(Preset::TwitterUs),
            "twitter_world" | "twitterworld" => Ok(Preset::TwitterWorld),
            other => Err(format!("unknown preset {other:?}")),
        }
    }
}

/// Everything one pipeline run depends on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub dataset: PathBuf,
    pub format: Format,
    pub bucket_size: usize,
    pub celebrity_threshold: Threshold,
    pub mode: EdgeMode,
    pub mad: MadParams,
    pub dongle: bool,
    pub text: TextParams,
    pub eval_split: Split,
    pub out: PathBuf,
    pub seed: u64,
}

impl RunConfig {
    /// Defaults with the given dataset path.
    pub fn new(dataset: impl Into<PathBuf>) -> Self {
        RunConfig {
            dataset: dataset.into(),
            format: Format::Tsv,
            bucket_size: 50,
            celebrity_threshold: Threshold::None,
            mode: EdgeMode::Binary,
            mad: MadParams::default(),
            dongle: false,
            text: TextParams::default(),
            eval_split: Split::Test,
            out: PathBuf::from("out"),
            seed: 0,
        }
    }

    pub fn from_key_values(kv: &KeyValues) -> Result<Self> {
        let dataset: PathBuf = kv
            .parsed("dataset")?
            .ok_or_else(|| Error::Config("missing required key `dataset`".into()))?;
        let mut cfg = RunConfig::new(dataset);
        if let Some(preset) = kv.parsed::<Preset>("preset")? {
            cfg.bucket_size = preset.bucket_size();
            cfg.celebrity_threshold = Threshold::AtMost(preset.celebrity_threshold());
        }
        cfg.format = kv.parsed_or("format", cfg.format)?;
        cfg.bucket_size = kv.parsed_or("bucket_size", cfg.bucket_size)?;
        cfg.celebrity_threshold = kv.parsed_or("celebrity_threshold", cfg.celebrity_threshold)?;
        cfg.mode = kv.parsed_or("mode", cfg.mode)?;
        cfg.mad.mu1 = kv.parsed_or("mu1", cfg.mad.mu1)?;
        cfg.mad.mu2 = kv.parsed_or("mu2", cfg.mad.mu2)?;
        cfg.mad.tolerance = kv.parsed_or("tolerance", cfg.mad.tolerance)?;
        cfg.mad.max_sweeps = kv.parsed_or("max_sweeps", cfg.mad.max_sweeps)?;
        cfg.mad.dongle_weight = kv.parsed_or("dongle_weight", cfg.mad.dongle_weight)?;
        cfg.mad.dongle_confidence = kv.parsed_or("dongle_confidence", cfg.mad.dongle_confidence)?;
        cfg.dongle = kv.parsed_or("dongle", Switch(cfg.dongle))?.0;
        cfg.text.l1_strength = kv.parsed_or("l1_strength", cfg.text.l1_strength)?;
        cfg.text.max_iter = kv.parsed_or("text_max_iter", cfg.text.max_iter)?;
        cfg.text.min_df = kv.parsed_or("text_min_df", cfg.text.min_df)?;
        cfg.eval_split = kv.parsed_or("eval_split", cfg.eval_split)?;
        cfg.out = kv.parsed_or("out", cfg.out)?;
        cfg.seed = kv.parsed_or("seed", cfg.seed)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.bucket_size == 0 {
            return Err(Error::Config("bucket_size must be at least 1".into()));
        }
        if self.celebrity_threshold == Threshold::AtMost(0) {
            return Err(Error::Config("celebrity_threshold must be at least 1".into()));
        }
        if self.eval_split == Split::Train {
            return Err(Error::Config("eval_split must be dev or test".into()));
        }
        if !(self.text.l1_strength >= 0.0 && self.text.l1_strength.is_finite()) {
            return Err(Error::Config("l1_strength must be a finite value >= 0".into()));
        }
        if self.text.max_iter == 0 {
            return Err(Error::Config("text_max_iter must be positive".into()));
        }
        self.mad.validate().map_err(|e| match e {
            Error::Config(m) => Error::Config(m),
            other => Error::Config(other.to_string()),
        })
    }

    /// Flat key/value rendering, the inverse of [`RunConfig::from_key_values`].
    pub fn to_key_values(&self) -> KeyValues {
        let mut kv = KeyValues::new();
        kv.set("dataset", self.dataset.display().to_string());
        kv.set("format", format!("{:?}", self.format).to_lowercase());
        kv.set("bucket_size", self.bucket_size.to_string());
        kv.set("celebrity_threshold", self.celebrity_threshold.to_string());
        kv.set("mode", self.mode.to_string());
        kv.set("mu1", self.mad.mu1.to_string());
        kv.set("mu2", self.mad.mu2.to_string());
        kv.set("tolerance", self.mad.tolerance.to_string());
        kv.set("max_sweeps", self.mad.max_sweeps.to_string());
        kv.set("dongle", if self.dongle { "on" } else { "off" });
        kv.set("dongle_weight", self.mad.dongle_weight.to_string());
        kv.set("dongle_confidence", self.mad.dongle_confidence.to_string());
        kv.set("l1_strength", self.text.l1_strength.to_string());
        kv.set("text_max_iter", self.text.max_iter.to_string());
        kv.set("text_min_df", self.text.min_df.to_string());
        kv.set("eval_split", self.eval_split.to_string());
        kv.set("out", self.out.display().to_string());
        kv.set("seed", self.seed.to_string());
        kv
    }

    /// Row label in the style of the published results table, e.g.
    /// `MAD-CEL-W-LR`.
    pub fn variant_name(&self) -> String {
        let mut name = String::from("MAD");
        let filtered = self.celebrity_threshold != Threshold::None;
        if filtered {
            name.push_str("-CEL");
        }
        if filtered || self.mode == EdgeMode::Weighted {
            name.push_str(match self.mode {
                EdgeMode::Binary => "-B",
                EdgeMode::Weighted => "-W",
            });
        }
        if self.dongle {
            name.push_str("-LR");
        }
        name
    }
}
