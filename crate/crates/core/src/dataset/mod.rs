// SPDX-License-Identifier: Apache-2.0

//! User records and their on-disk formats.
//!
//! A record is one user: a lowercase handle, the gold home coordinate, all
//! of the user's messages concatenated into one document, and the split the
//! user belongs to.
//!
//! TSV rows are `user_id \t lat \t lon \t split \t text` with no header.
//! JSONL rows are objects with the same five keys.

mod mentions;
pub mod synth;

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use mentions::extract_mentions;
pub use synth::{generate_synthetic, SynthConfig, SynthOutput};

/// A coordinate in degrees.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    pub lat: f64,
    pub lon: f64,
}

impl GeoPoint {
    pub fn new(lat: f64, lon: f64) -> Result<Self> {
        let p = GeoPoint { lat, lon };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.lat.is_finite() || !(-90.0..=90.0).contains(&self.lat) {
            return Err(Error::Validation(format!("latitude {} out of range", self.lat)));
        }
        if !self.lon.is_finite() || !(-180.0..=180.0).contains(&self.lon) {
            return Err(Error::Validation(format!("longitude {} out of range", self.lon)));
        }
        Ok(())
    }
}

impl fmt::Display for GeoPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.lat, self.lon)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Dev,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Dev => "dev",
            Split::Test => "test",
        }
    }
}

impl FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "train" => Ok(Split::Train),
            "dev" => Ok(Split::Dev),
            "test" => Ok(Split::Test),
            other => Err(format!("unknown split {other:?} (expected train, dev or test)")),
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct UserRecord {
    pub user_id: String,
    pub location: GeoPoint,
    pub text: String,
    pub split: Split,
}

impl UserRecord {
    /// The handle is case-folded so that it matches extracted mentions.
    pub fn new(user_id: &str, location: GeoPoint, text: impl Into<String>, split: Split) -> Self {
        UserRecord {
            user_id: user_id.to_lowercase(),
            location,
            text: text.into(),
            split,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct JsonRecord {
    user_id: String,
    lat: f64,
    lon: f64,
    split: Split,
    text: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Tsv,
    Jsonl,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "tsv" => Ok(Format::Tsv),
            "jsonl" => Ok(Format::Jsonl),
            other => Err(format!("unknown dataset format {other:?} (expected tsv or jsonl)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    records: Vec<UserRecord>,
    map_center: GeoPoint,
}

impl Dataset {
    /// Validates the records and derives the map center as the midpoint of
    /// the lat/lon bounding box of every gold location.
    pub fn new(records: Vec<UserRecord>) -> Result<Self> {
        let mut seen = std::collections::HashSet::with_capacity(records.len());
        for r in &records {
            if r.user_id.is_empty() {
                return Err(Error::Validation("empty user_id".into()));
            }
            if r.user_id != r.user_id.to_lowercase() {
                return Err(Error::Validation(format!("user_id {:?} is not lowercase", r.user_id)));
            }
            r.location
                .validate()
                .map_err(|e| Error::Validation(format!("user {}: {e}", r.user_id)))?;
            if !seen.insert(r.user_id.as_str()) {
                return Err(Error::Validation(format!("duplicate user_id {:?}", r.user_id)));
            }
        }
        if !records.iter().any(|r| r.split == Split::Train) {
            return Err(Error::Validation("dataset has no train records".into()));
        }
        let (mut lat_lo, mut lat_hi) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut lon_lo, mut lon_hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for r in &records {
            lat_lo = lat_lo.min(r.location.lat);
            lat_hi = lat_hi.max(r.location.lat);
            lon_lo = lon_lo.min(r.location.lon);
            lon_hi = lon_hi.max(r.location.lon);
        }
        let map_center = GeoPoint {
            lat: lat_lo + (lat_hi - lat_lo) / 2.0,
            lon: lon_lo + (lon_hi - lon_lo) / 2.0,
        };
        Ok(Dataset { records, map_center })
    }

    pub fn records(&self) -> &[UserRecord] {
        &self.records
    }

    pub fn map_center(&self) -> GeoPoint {
        self.map_center
    }

    pub fn split(&self, split: Split) -> impl Iterator<Item = &UserRecord> {
        self.records.iter().filter(move |r| r.split == split)
    }

    pub fn get(&self, user_id: &str) -> Option<&UserRecord> {
        self.records.iter().find(|r| r.user_id == user_id)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn parse(input: &str, format: Format) -> Result<Self> {
        let mut records = Vec::new();
        for (i, line) in input.lines().enumerate() {
            let lineno = i + 1;
            if line.is_empty() {
                continue;
            }
            let record = match format {
                Format::Tsv => parse_tsv_line(line, lineno)?,
                Format::Jsonl => {
                    let raw: JsonRecord = serde_json::from_str(line).map_err(|e| Error::Parse {
                        line: lineno,
                        message: e.to_string(),
                    })?;
                    let location = GeoPoint::new(raw.lat, raw.lon)
                        .map_err(|e| Error::Validation(format!("line {lineno}: {e}")))?;
                    UserRecord::new(&raw.user_id, location, raw.text, raw.split)
                }
            };
            records.push(record);
        }
        Dataset::new(records)
    }

    pub fn to_string(&self, format: Format) -> Result<String> {
        let mut out = String::new();
        for r in &self.records {
            match format {
                Format::Tsv => {
                    if r.text.contains(['\t', '\n', '\r']) || r.user_id.contains(['\t', '\n']) {
                        return Err(Error::Validation(format!(
                            "user {} cannot be written as TSV: tab or newline in a field",
                            r.user_id
                        )));
                    }
                    out.push_str(&format!(
                        "{}\t{}\t{}\t{}\t{}\n",
                        r.user_id, r.location.lat, r.location.lon, r.split, r.text
                    ));
                }
                Format::Jsonl => {
                    let raw = JsonRecord {
                        user_id: r.user_id.clone(),
                        lat: r.location.lat,
                        lon: r.location.lon,
                        split: r.split,
                        text: r.text.clone(),
                    };
                    out.push_str(&serde_json::to_string(&raw)?);
                    out.push('\n');
                }
            }
        }
        Ok(out)
    }
}

fn parse_tsv_line(line: &str, lineno: usize) -> Result<UserRecord> {
    let parse_err = |message: String| Error::Parse { line: lineno, message };
    let fields: Vec<&str> = line.split('\t').collect();
    if fields.len() != 5 {
        return Err(parse_err(format!("expected 5 tab-separated fields, found {}", fields.len())));
    }
    let lat: f64 = fields[1]
        .parse()
        .map_err(|_| parse_err(format!("bad latitude {:?}", fields[1])))?;
    let lon: f64 = fields[2]
        .parse()
        .map_err(|_| parse_err(format!("bad longitude {:?}", fields[2])))?;
    let split: Split = fields[3].parse().map_err(parse_err)?;
    let location = GeoPoint::new(lat, lon).map_err(|e| Error::Validation(format!("line {lineno}: {e}")))?;
    Ok(UserRecord::new(fields[0], location, fields[4], split))
}

pub fn load_dataset(path: &Path, format: Format) -> Result<Dataset> {
    let input = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Dataset::parse(&input, format)
}

pub fn write_dataset(dataset: &Dataset, path: &Path, format: Format) -> Result<()> {
    let body = dataset.to_string(format)?;
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(body.as_bytes()).map_err(|e| Error::io(path, e))
}
