// SPDX-License-Identifier: Apache-2.0

//! End-to-end runs, celebrity-threshold sweeps and grid tuning.
//!
//! A run evaluates one variant on the configured split: training users plus
//! the evaluation split form the graph; every other user is treated like an
//! outside handle. Artifacts go to the output directory together with a
//! `manifest.json` and a `run.cfg` that reproduces the run. The
//! discretizer, graph and text model are reused from an earlier run in the
//! same directory when their inputs are unchanged and their files still
//! hash to the recorded values.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use log::{debug, info};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::dataset::{load_dataset, Dataset, GeoPoint, Split};
use crate::discretizer::Discretizer;
use crate::error::{Error, Result};
use crate::eval::{evaluate, results_table, Metrics};
use crate::graph::{build_collapsed_graph, EdgeMode, GraphStats, MentionGraph, RawMentionTable, Threshold};
use crate::mad::{attach_dongles, predict, run_mad, MadParams, SeedSet, SolveResult};
use crate::textprior::{featurize, train_text_model, TextModel, TextParams};

pub const VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "-", env!("GEOPROP_GIT_DESCRIBE"));

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Writes through a temporary sibling file and a rename.
pub fn write_atomic(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    let tmp = path.with_extension(match path.extension() {
        Some(ext) => format!("{}.tmp", ext.to_string_lossy()),
        None => "tmp".to_string(),
    });
    fs::write(&tmp, contents).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

/// Everything that does not depend on the celebrity threshold, edge mode or
/// solver settings.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub dataset: Dataset,
    pub discretizer: Discretizer,
    pub seeds: SeedSet,
    pub table: RawMentionTable,
    /// Training users followed by evaluation users, in dataset order.
    pub nodes: Vec<String>,
    pub eval_split: Split,
}

impl Prepared {
    pub fn new(dataset: Dataset, bucket_size: usize, eval_split: Split) -> Result<Self> {
        let train: Vec<GeoPoint> = dataset.split(Split::Train).map(|r| r.location).collect();
        let discretizer = Discretizer::build(&train, bucket_size).map_err(|e| e.in_stage("discretizer"))?;
        Self::with_discretizer(dataset, discretizer, eval_split)
    }

    pub fn with_discretizer(dataset: Dataset, discretizer: Discretizer, eval_split: Split) -> Result<Self> {
        if eval_split == Split::Train {
            return Err(Error::Config("eval split must be dev or test".into()));
        }
        let mut seeds = SeedSet::new(discretizer.num_cells());
        for r in dataset.split(Split::Train) {
            seeds.insert_one_hot(&r.user_id, discretizer.assign_cell(&r.location))?;
        }
        let nodes = dataset
            .split(Split::Train)
            .chain(dataset.split(eval_split))
            .map(|r| r.user_id.clone())
            .collect();
        let table = RawMentionTable::from_dataset(&dataset);
        Ok(Prepared {
            dataset,
            discretizer,
            seeds,
            table,
            nodes,
            eval_split,
        })
    }

    pub fn graph(&self, threshold: Threshold, mode: EdgeMode) -> Result<MentionGraph> {
        build_collapsed_graph(&self.table, &self.nodes, threshold, mode).map_err(|e| e.in_stage("graph"))
    }

    pub fn train_text_model(&self, params: &TextParams) -> Result<TextModel> {
        let train: Vec<_> = self.dataset.split(Split::Train).collect();
        let texts: Vec<&str> = train.iter().map(|r| r.text.as_str()).collect();
        let cells: Vec<_> = train.iter().map(|r| self.discretizer.assign_cell(&r.location)).collect();
        let out = train_text_model(&texts, &cells, self.discretizer.num_cells(), params)
            .map_err(|e| e.in_stage("textprior"))?;
        debug!(
            "text model: {} features, {} steps, zero fraction {:.3}",
            out.model.num_features(),
            out.objective_trace.len(),
            out.model.zero_fraction()
        );
        Ok(out.model)
    }

    /// Text prior for every evaluation user.
    pub fn priors(&self, model: &TextModel) -> BTreeMap<String, Vec<f64>> {
        self.dataset
            .split(self.eval_split)
            .map(|r| (r.user_id.clone(), model.predict_prior(&featurize(&r.text, &model.vocabulary))))
            .collect()
    }

    pub fn gold(&self) -> BTreeMap<String, GeoPoint> {
        self.dataset
            .split(self.eval_split)
            .map(|r| (r.user_id.clone(), r.location))
            .collect()
    }

    /// Solves one variant on a prebuilt graph and scores it.
    pub fn solve(
        &self,
        graph: &MentionGraph,
        params: &MadParams,
        priors: Option<&BTreeMap<String, Vec<f64>>>,
    ) -> Result<Outcome> {
        let result = match priors {
            Some(p) => {
                let (g, s) = attach_dongles(graph, &self.seeds, p, params).map_err(|e| e.in_stage("dongles"))?;
                run_mad(&g, &s, params)
            }
            None => run_mad(graph, &self.seeds, params),
        }
        .map_err(|e| e.in_stage("solve"))?;
        let predictions =
            predict(&result, &self.discretizer, &self.dataset, self.eval_split).map_err(|e| e.in_stage("predict"))?;
        let metrics = evaluate(&predictions, &self.gold()).map_err(|e| e.in_stage("eval"))?;
        Ok(Outcome {
            graph_stats: graph.stats(),
            result,
            predictions,
            metrics,
        })
    }
}

#[derive(Clone, Debug)]
pub struct Outcome {
    /// Statistics of the mention graph before any dongles.
    pub graph_stats: GraphStats,
    pub result: SolveResult,
    pub predictions: BTreeMap<String, GeoPoint>,
    pub metrics: Metrics,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
struct StageRecord {
    key: String,
    files: BTreeMap<String, String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub variant: String,
    pub config: BTreeMap<String, String>,
    pub dataset_sha256: String,
    stages: BTreeMap<String, StageRecord>,
}

fn stage_key(parts: &[&str]) -> String {
    sha256_hex(parts.join("\u{1f}").as_bytes())
}

/// Reuses a stage when the previous manifest recorded the same key and the
/// files are intact.
fn cached(previous: Option<&Manifest>, stage: &str, key: &str, dir: &Path) -> bool {
    let Some(record) = previous.and_then(|m| m.stages.get(stage)) else {
        return false;
    };
    record.key == key
        && !record.files.is_empty()
        && record
            .files
            .iter()
            .all(|(name, hash)| fs::read(dir.join(name)).map(|b| sha256_hex(&b) == *hash).unwrap_or(false))
}

fn record_stage(dir: &Path, key: String, names: &[&str]) -> Result<StageRecord> {
    let mut files = BTreeMap::new();
    for name in names {
        let path = dir.join(name);
        let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
        files.insert(name.to_string(), sha256_hex(&bytes));
    }
    Ok(StageRecord { key, files })
}

#[derive(Clone, Debug)]
pub struct RunReport {
    pub variant: String,
    pub metrics: Metrics,
    pub graph_stats: GraphStats,
    pub sweeps_run: usize,
    pub converged: bool,
    /// Evaluation users that fell back to the map centre.
    pub unresolved: usize,
    /// Stages loaded from earlier artifacts instead of recomputed.
    pub reused: Vec<&'static str>,
}

fn predictions_tsv(preds: &BTreeMap<String, GeoPoint>) -> String {
    preds.iter().map(|(u, p)| format!("{u}\t{}\t{}\n", p.lat, p.lon)).collect()
}

/// Reads `user_id \t lat \t lon` lines.
pub fn parse_predictions(input: &str) -> Result<BTreeMap<String, GeoPoint>> {
    let mut out = BTreeMap::new();
    for (i, line) in input.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let parse_err = |message: String| Error::Parse { line: i + 1, message };
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 3 {
            return Err(parse_err(format!("expected 3 fields, found {}", f.len())));
        }
        let lat = f[1].parse().map_err(|_| parse_err(format!("bad latitude {:?}", f[1])))?;
        let lon = f[2].parse().map_err(|_| parse_err(format!("bad longitude {:?}", f[2])))?;
        let p = GeoPoint::new(lat, lon).map_err(|e| parse_err(e.to_string()))?;
        if out.insert(f[0].to_lowercase(), p).is_some() {
            return Err(parse_err(format!("duplicate prediction for {}", f[0])));
        }
    }
    Ok(out)
}

/// Scores a prediction file against the dataset's gold locations for
/// `split`.
pub fn evaluate_predictions(dataset: &Dataset, predictions: &Path, split: Split) -> Result<Metrics> {
    let text = fs::read_to_string(predictions).map_err(|e| Error::io(predictions, e))?;
    let preds = parse_predictions(&text)?;
    let gold: BTreeMap<String, GeoPoint> = dataset.split(split).map(|r| (r.user_id.clone(), r.location)).collect();
    evaluate(&preds, &gold)
}

pub fn run(cfg: &RunConfig) -> Result<RunReport> {
    cfg.validate()?;
    let dir = cfg.out.as_path();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let raw = fs::read(&cfg.dataset).map_err(|e| Error::io(&cfg.dataset, e).in_stage("dataset"))?;
    let dataset_sha = sha256_hex(&raw);
    let dataset = load_dataset(&cfg.dataset, cfg.format).map_err(|e| e.in_stage("dataset"))?;
    info!("loaded {} users from {}", dataset.len(), cfg.dataset.display());

    let previous: Option<Manifest> = fs::read_to_string(dir.join("manifest.json"))
        .ok()
        .and_then(|s| serde_json::from_str(&s).ok());
    let mut stages = BTreeMap::new();
    let mut reused = Vec::new();

    let disc_key = stage_key(&["discretizer", &dataset_sha, &cfg.bucket_size.to_string()]);
    let discretizer = if cached(previous.as_ref(), "discretizer", &disc_key, dir) {
        reused.push("discretizer");
        Discretizer::load(&dir.join("discretizer.json")).map_err(|e| e.in_stage("discretizer"))?
    } else {
        let train: Vec<GeoPoint> = dataset.split(Split::Train).map(|r| r.location).collect();
        let d = Discretizer::build(&train, cfg.bucket_size).map_err(|e| e.in_stage("discretizer"))?;
        write_atomic(&dir.join("discretizer.json"), d.to_json()?)?;
        d
    };
    stages.insert("discretizer".to_string(), record_stage(dir, disc_key, &["discretizer.json"])?);
    info!("{} cells (bucket size {})", discretizer.num_cells(), cfg.bucket_size);

    let prep = Prepared::with_discretizer(dataset, discretizer, cfg.eval_split)?;

    let graph_key = stage_key(&[
        "graph",
        &dataset_sha,
        &cfg.celebrity_threshold.to_string(),
        &cfg.mode.to_string(),
        cfg.eval_split.as_str(),
    ]);
    let graph = if cached(previous.as_ref(), "graph", &graph_key, dir) {
        reused.push("graph");
        let text = fs::read_to_string(dir.join("graph.tsv")).map_err(|e| Error::io(dir.join("graph.tsv"), e))?;
        MentionGraph::from_edge_list(&prep.nodes, cfg.mode, &text).map_err(|e| e.in_stage("graph"))?
    } else {
        let g = prep.graph(cfg.celebrity_threshold, cfg.mode)?;
        write_atomic(&dir.join("graph.tsv"), g.to_edge_list())?;
        g
    };
    write_atomic(&dir.join("graph_stats.json"), serde_json::to_string_pretty(&graph.stats())?)?;
    stages.insert("graph".to_string(), record_stage(dir, graph_key, &["graph.tsv"])?);
    info!("graph: {:?}", graph.stats());

    let priors = if cfg.dongle {
        let text_key = stage_key(&[
            "textprior",
            &dataset_sha,
            &cfg.bucket_size.to_string(),
            &cfg.text.l1_strength.to_string(),
            &cfg.text.max_iter.to_string(),
            &cfg.text.min_df.to_string(),
        ]);
        let model = if cached(previous.as_ref(), "textprior", &text_key, dir) {
            reused.push("textprior");
            TextModel::load(dir, "text_model").map_err(|e| e.in_stage("textprior"))?
        } else {
            let m = prep.train_text_model(&cfg.text)?;
            write_atomic(&dir.join("text_model.json"), serde_json::to_string_pretty(&m)?)?;
            write_atomic(&dir.join("text_model.tsv"), m.to_triplets())?;
            m
        };
        stages.insert(
            "textprior".to_string(),
            record_stage(dir, text_key, &["text_model.json", "text_model.tsv"])?,
        );
        Some(prep.priors(&model))
    } else {
        None
    };

    let outcome = prep.solve(&graph, &cfg.mad, priors.as_ref())?;
    let variant = cfg.variant_name();
    write_atomic(&dir.join("solve.jsonl"), outcome.result.to_jsonl()?)?;
    write_atomic(&dir.join("objective_trace.csv"), outcome.result.objective_csv())?;
    write_atomic(&dir.join("predictions.tsv"), predictions_tsv(&outcome.predictions))?;
    write_atomic(&dir.join("metrics.json"), metrics_json(&variant, &outcome.metrics)?)?;
    write_atomic(&dir.join("metrics.txt"), results_table(&[(variant.clone(), outcome.metrics.clone())]))?;

    let kv = cfg.to_key_values();
    write_atomic(&dir.join("run.cfg"), kv.render())?;
    let manifest = Manifest {
        version: VERSION.to_string(),
        variant: variant.clone(),
        config: kv.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect(),
        dataset_sha256: dataset_sha,
        stages,
    };
    write_atomic(&dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;

    let eval_ids: BTreeSet<&String> = outcome.predictions.keys().collect();
    let unresolved = outcome.result.unresolved.iter().filter(|u| eval_ids.contains(u)).count();
    Ok(RunReport {
        variant,
        graph_stats: outcome.graph_stats,
        sweeps_run: outcome.result.sweeps_run,
        converged: outcome.result.converged,
        unresolved,
        metrics: outcome.metrics,
        reused,
    })
}

/// Summary metrics as JSON; per-user errors are left out.
pub fn metrics_json(variant: &str, m: &Metrics) -> Result<String> {
    let v = serde_json::json!({
        "variant": variant,
        "users": m.users(),
        "acc161": m.acc161,
        "mean_km": m.mean_km,
        "median_km": m.median_km,
    });
    Ok(serde_json::to_string_pretty(&v)?)
}

/// The five table rows: plain MAD, celebrity removal over binary and
/// weighted graphs, and both again with text priors. Celebrity rows use the
/// configured threshold.
pub fn variant_table(cfg: &RunConfig) -> Result<Vec<(String, Metrics)>> {
    cfg.validate()?;
    let threshold = match cfg.celebrity_threshold {
        Threshold::None => return Err(Error::Config("the variant table needs a celebrity_threshold".into())),
        t => t,
    };
    let dataset = load_dataset(&cfg.dataset, cfg.format).map_err(|e| e.in_stage("dataset"))?;
    let prep = Prepared::new(dataset, cfg.bucket_size, cfg.eval_split)?;
    let model = prep.train_text_model(&cfg.text)?;
    let priors = prep.priors(&model);
    let rows = [
        (Threshold::None, EdgeMode::Binary, false),
        (threshold, EdgeMode::Binary, false),
        (threshold, EdgeMode::Weighted, false),
        (threshold, EdgeMode::Binary, true),
        (threshold, EdgeMode::Weighted, true),
    ];
    rows.iter()
        .map(|&(t, mode, dongle)| {
            let mut c = cfg.clone();
            c.celebrity_threshold = t;
            c.mode = mode;
            c.dongle = dongle;
            let g = prep.graph(t, mode)?;
            let out = prep.solve(&g, &cfg.mad, dongle.then_some(&priors))?;
            info!("{}: {:?}", c.variant_name(), g.stats());
            Ok((c.variant_name(), out.metrics))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub threshold: Threshold,
    pub edges: usize,
    pub acc161: f64,
    pub mean_km: f64,
    pub median_km: f64,
}

fn pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("cannot start thread pool: {e}")))
}

/// Full evaluation of the configured variant at each threshold, rows sorted
/// by threshold. `threads == 0` lets the pool pick.
pub fn sweep(cfg: &RunConfig, thresholds: &[Threshold], threads: usize) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    if thresholds.is_empty() {
        return Err(Error::Config("no thresholds to sweep".into()));
    }
    let mut ts = thresholds.to_vec();
    ts.sort();
    ts.dedup();
    let dataset = load_dataset(&cfg.dataset, cfg.format).map_err(|e| e.in_stage("dataset"))?;
    let prep = Prepared::new(dataset, cfg.bucket_size, cfg.eval_split)?;
    let priors = if cfg.dongle {
        Some(prep.priors(&prep.train_text_model(&cfg.text)?))
    } else {
        None
    };
    pool(threads)?.install(|| {
        ts.par_iter()
            .map(|&t| {
                let g = prep.graph(t, cfg.mode)?;
                let out = prep.solve(&g, &cfg.mad, priors.as_ref())?;
                info!("T={t}: {} edges, mean {:.1} km", out.graph_stats.edges, out.metrics.mean_km);
                Ok(SweepRow {
                    threshold: t,
                    edges: out.graph_stats.edges,
                    acc161: out.metrics.acc161,
                    mean_km: out.metrics.mean_km,
                    median_km: out.metrics.median_km,
                })
            })
            .collect()
    })
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("T,edges,acc161,mean_km,median_km\n");
    for r in rows {
        out.push_str(&format!("{},{},{},{},{}\n", r.threshold, r.edges, r.acc161, r.mean_km, r.median_km));
    }
    out
}

/// Axes searched by [`tune`]. Empty axes fall back to the base config's
/// value.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TuneGrid {
    pub thresholds: Vec<Threshold>,
    pub bucket_sizes: Vec<usize>,
    pub mu2: Vec<f64>,
    pub l1_strength: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GridPoint {
    pub threshold: Threshold,
    pub bucket_size: usize,
    pub mu2: f64,
    pub l1_strength: f64,
}

impl TuneGrid {
    /// Cartesian product with duplicates removed, in first-seen order.
    pub fn points(&self, base: &RunConfig) -> Vec<GridPoint> {
        fn or_base<T: Clone>(axis: &[T], base: T) -> Vec<T> {
            if axis.is_empty() { vec![base] } else { axis.to_vec() }
        }
        let ts = or_base(&self.thresholds, base.celebrity_threshold);
        let bs = or_base(&self.bucket_sizes, base.bucket_size);
        let mus = or_base(&self.mu2, base.mad.mu2);
        let l1s = or_base(&self.l1_strength, base.text.l1_strength);
        let mut out: Vec<GridPoint> = Vec::new();
        for &threshold in &ts {
            for &bucket_size in &bs {
                for &mu2 in &mus {
                    for &l1_strength in &l1s {
                        let p = GridPoint { threshold, bucket_size, mu2, l1_strength };
                        if !out.contains(&p) {
                            out.push(p);
                        }
                    }
                }
            }
        }
        out
    }

    pub fn is_empty(&self) -> bool {
        self.thresholds.is_empty() && self.bucket_sizes.is_empty() && self.mu2.is_empty() && self.l1_strength.is_empty()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TuneRow {
    pub point: GridPoint,
    pub edges: usize,
    pub acc161: f64,
    pub mean_km: f64,
    pub median_km: f64,
}

#[derive(Clone, Debug)]
pub struct TuneOutcome {
    /// Best first.
    pub leaderboard: Vec<TuneRow>,
    pub best: RunConfig,
}

/// Exhaustive search on the dev split. Ranking: higher Acc@161, then lower
/// median error, then lower threshold, then grid order.
pub fn tune(cfg: &RunConfig, grid: &TuneGrid, threads: usize) -> Result<TuneOutcome> {
    cfg.validate()?;
    let points = grid.points(cfg);
    if grid.is_empty() {
        return Err(Error::Config("tuning grid is empty".into()));
    }
    let dataset = load_dataset(&cfg.dataset, cfg.format).map_err(|e| e.in_stage("dataset"))?;
    if dataset.split(Split::Dev).next().is_none() {
        return Err(Error::Config("tuning needs a non-empty dev split".into()));
    }

    let mut buckets: Vec<usize> = points.iter().map(|p| p.bucket_size).collect();
    buckets.sort_unstable();
    buckets.dedup();
    let preps: BTreeMap<usize, Prepared> = buckets
        .iter()
        .map(|&b| Ok((b, Prepared::new(dataset.clone(), b, Split::Dev)?)))
        .collect::<Result<_>>()?;
    let any = preps.values().next().expect("at least one bucket size");

    let pool = pool(threads)?;
    let mut thresholds: Vec<Threshold> = points.iter().map(|p| p.threshold).collect();
    thresholds.sort();
    thresholds.dedup();
    let graphs: BTreeMap<Threshold, MentionGraph> = pool.install(|| {
        thresholds
            .par_iter()
            .map(|&t| Ok((t, any.graph(t, cfg.mode)?)))
            .collect::<Result<_>>()
    })?;

    let mut text_keys: Vec<(usize, u64)> = Vec::new();
    if cfg.dongle {
        for p in &points {
            let k = (p.bucket_size, p.l1_strength.to_bits());
            if !text_keys.contains(&k) {
                text_keys.push(k);
            }
        }
    }
    let priors: BTreeMap<(usize, u64), BTreeMap<String, Vec<f64>>> = pool.install(|| {
        text_keys
            .par_iter()
            .map(|&(b, l1)| {
                let params = TextParams { l1_strength: f64::from_bits(l1), ..cfg.text.clone() };
                let prep = &preps[&b];
                Ok(((b, l1), prep.priors(&prep.train_text_model(&params)?)))
            })
            .collect::<Result<_>>()
    })?;

    let rows: Vec<TuneRow> = pool.install(|| {
        points
            .par_iter()
            .map(|p| {
                let prep = &preps[&p.bucket_size];
                let params = MadParams { mu2: p.mu2, ..cfg.mad.clone() };
                let pri = priors.get(&(p.bucket_size, p.l1_strength.to_bits()));
                let out = prep.solve(&graphs[&p.threshold], &params, pri)?;
                Ok(TuneRow {
                    point: *p,
                    edges: out.graph_stats.edges,
                    acc161: out.metrics.acc161,
                    mean_km: out.metrics.mean_km,
                    median_km: out.metrics.median_km,
                })
            })
            .collect::<Result<_>>()
    })?;

    let mut ranked: Vec<(usize, TuneRow)> = rows.into_iter().enumerate().collect();
    ranked.sort_by(|(ia, a), (ib, b)| {
        b.acc161
            .total_cmp(&a.acc161)
            .then(a.median_km.total_cmp(&b.median_km))
            .then(a.point.threshold.cmp(&b.point.threshold))
            .then(ia.cmp(ib))
    });
    let leaderboard: Vec<TuneRow> = ranked.into_iter().map(|(_, r)| r).collect();
    let top = leaderboard[0].point;
    let mut best = cfg.clone();
    best.celebrity_threshold = top.threshold;
    best.bucket_size = top.bucket_size;
    best.mad.mu2 = top.mu2;
    best.text.l1_strength = top.l1_strength;
    best.eval_split = Split::Dev;
    Ok(TuneOutcome { leaderboard, best })
}

pub fn leaderboard_csv(rows: &[TuneRow]) -> String {
    let mut out = String::from("rank,T,bucket_size,mu2,l1_strength,edges,acc161,mean_km,median_km\n");
    for (i, r) in rows.iter().enumerate() {
        let p = r.point;
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            i + 1,
            p.threshold,
            p.bucket_size,
            p.mu2,
            p.l1_strength,
            r.edges,
            r.acc161,
            r.mean_km,
            r.median_km
        ));
    }
    out
}
