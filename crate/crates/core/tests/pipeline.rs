// SPDX-License-Identifier: Apache-2.0

use std::fs;
use std::path::{Path, PathBuf};

use geoprop::config::RunConfig;
use geoprop::dataset::{generate_synthetic, write_dataset, Format, SynthConfig, SynthOutput};
use geoprop::pipeline::{self, parse_predictions, Prepared, TuneGrid};
use geoprop::{EdgeMode, Split, Threshold};

fn write_synth(dir: &Path, cfg: &SynthConfig) -> (PathBuf, SynthOutput) {
    let out = generate_synthetic(cfg).unwrap();
    let path = dir.join("data.tsv");
    write_dataset(&out.dataset, &path, Format::Tsv).unwrap();
    (path, out)
}

fn config(dataset: PathBuf, out: PathBuf) -> RunConfig {
    let mut cfg = RunConfig::new(dataset);
    cfg.bucket_size = 10;
    cfg.out = out;
    cfg
}

#[test]
fn repeated_runs_are_byte_identical_and_reuse_stages() {
    let tmp = tempfile::tempdir().unwrap();
    let (data, _) = write_synth(tmp.path(), &SynthConfig { celebrity_degrees: vec![60], ..SynthConfig::default() });
    let mut cfg = config(data, tmp.path().join("a"));
    cfg.celebrity_threshold = Threshold::AtMost(5);
    cfg.dongle = true;

    let first = pipeline::run(&cfg).unwrap();
    assert!(first.reused.is_empty());
    let preds = fs::read(cfg.out.join("predictions.tsv")).unwrap();
    let second = pipeline::run(&cfg).unwrap();
    assert_eq!(second.reused, vec!["discretizer", "graph", "textprior"]);
    assert_eq!(fs::read(cfg.out.join("predictions.tsv")).unwrap(), preds);
    assert_eq!(first.metrics, second.metrics);

    let mut fresh = cfg.clone();
    fresh.out = tmp.path().join("b");
    pipeline::run(&fresh).unwrap();
    assert_eq!(fs::read(fresh.out.join("predictions.tsv")).unwrap(), preds);

    // changing the threshold invalidates the graph but not the cells
    cfg.celebrity_threshold = Threshold::AtMost(6);
    let third = pipeline::run(&cfg).unwrap();
    assert_eq!(third.reused, vec!["discretizer", "textprior"]);
}

#[test]
fn run_writes_its_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let (data, out) = write_synth(tmp.path(), &SynthConfig::default());
    let cfg = config(data, tmp.path().join("run"));
    let report = pipeline::run(&cfg).unwrap();
    assert_eq!(report.variant, "MAD");
    for name in ["discretizer.json", "graph.tsv", "graph_stats.json", "solve.jsonl", "objective_trace.csv",
                 "predictions.tsv", "metrics.json", "metrics.txt", "run.cfg", "manifest.json"] {
        assert!(cfg.out.join(name).is_file(), "{name} missing");
    }
    let preds = parse_predictions(&fs::read_to_string(cfg.out.join("predictions.tsv")).unwrap()).unwrap();
    assert_eq!(preds.len(), out.dataset.split(Split::Test).count());
    let rescored =
        pipeline::evaluate_predictions(&out.dataset, &cfg.out.join("predictions.tsv"), Split::Test).unwrap();
    assert_eq!(rescored, report.metrics);
    let metrics: serde_json::Value = serde_json::from_str(&fs::read_to_string(cfg.out.join("metrics.json")).unwrap()).unwrap();
    assert_eq!(metrics["variant"], "MAD");
}

#[test]
fn celebrity_removal_shrinks_the_graph() {
    let tmp = tempfile::tempdir().unwrap();
    let (data, _) = write_synth(tmp.path(), &SynthConfig { celebrity_degrees: vec![80, 80], ..SynthConfig::default() });
    let mut cfg = config(data, tmp.path().join("plain"));
    let plain = pipeline::run(&cfg).unwrap();
    cfg.celebrity_threshold = Threshold::AtMost(5);
    cfg.out = tmp.path().join("cel");
    let cel = pipeline::run(&cfg).unwrap();
    assert_eq!(cel.variant, "MAD-CEL-B");
    assert!(cel.graph_stats.edges < plain.graph_stats.edges);
    assert_eq!(cel.graph_stats.nodes, plain.graph_stats.nodes);
}

#[test]
fn text_priors_place_isolated_users() {
    let tmp = tempfile::tempdir().unwrap();
    let (data, out) = write_synth(tmp.path(), &SynthConfig { isolated_test_fraction: 0.25, seed: 3, ..SynthConfig::default() });
    let prep = Prepared::new(out.dataset.clone(), 10, Split::Test).unwrap();
    let model = prep.train_text_model(&Default::default()).unwrap();
    let priors = prep.priors(&model);

    let mut cfg = config(data, tmp.path().join("plain"));
    cfg.celebrity_threshold = Threshold::AtMost(5);
    let plain = pipeline::run(&cfg).unwrap();
    cfg.dongle = true;
    cfg.out = tmp.path().join("lr");
    let lr = pipeline::run(&cfg).unwrap();
    assert_eq!(lr.variant, "MAD-CEL-B-LR");
    assert!(plain.unresolved >= out.isolated.len());
    assert_eq!(lr.unresolved, 0);

    let preds = parse_predictions(&fs::read_to_string(cfg.out.join("predictions.tsv")).unwrap()).unwrap();
    for u in &out.isolated {
        let prior = &priors[u];
        let best = (0..prior.len()).fold(0, |b, c| if prior[c] > prior[b] { c } else { b });
        let want = prep.discretizer.cell_to_point(geoprop::CellId(best)).unwrap();
        assert_eq!(preds[u], want, "{u}");
    }
}

#[test]
fn sweep_without_celebrities_is_flat() {
    let tmp = tempfile::tempdir().unwrap();
    // no dev split either: mentioned dev users would be outside handles
    let (data, _) = write_synth(
        tmp.path(),
        &SynthConfig { p_local_handle: 0.0, dev: 0.0, test: 0.4, ..SynthConfig::default() },
    );
    let cfg = config(data, tmp.path().join("sweep"));
    let ts: Vec<Threshold> = [1, 5, 15].into_iter().map(Threshold::AtMost).collect();
    let rows = pipeline::sweep(&cfg, &ts, 2).unwrap();
    assert_eq!(rows.len(), 3);
    for r in &rows[1..] {
        assert_eq!((r.edges, r.acc161, r.mean_km, r.median_km), (rows[0].edges, rows[0].acc161, rows[0].mean_km, rows[0].median_km));
    }
}

#[test]
fn sweep_is_sorted_and_independent_of_thread_count() {
    let tmp = tempfile::tempdir().unwrap();
    let (data, _) = write_synth(tmp.path(), &SynthConfig { celebrity_degrees: vec![40], ..SynthConfig::default() });
    let mut cfg = config(data, tmp.path().join("sweep"));
    cfg.mode = EdgeMode::Weighted;
    let ts = [Threshold::None, Threshold::AtMost(15), Threshold::AtMost(1), Threshold::AtMost(5)];
    let one = pipeline::sweep(&cfg, &ts, 1).unwrap();
    let four = pipeline::sweep(&cfg, &ts, 4).unwrap();
    assert_eq!(one, four);
    assert_eq!(one.iter().map(|r| r.threshold).collect::<Vec<_>>(), [Threshold::AtMost(1), Threshold::AtMost(5), Threshold::AtMost(15), Threshold::None]);
    assert!(one.windows(2).all(|w| w[0].edges <= w[1].edges));
}

fn tune_dataset(dir: &Path) -> PathBuf {
    // many mid-sized celebrities and no local hub handles
    write_synth(
        dir,
        &SynthConfig {
            celebrity_degrees: vec![10; 20],
            p_local_handle: 0.0,
            mentions_per_user: 2,
            ..SynthConfig::default()
        },
    )
    .0
}

#[test]
fn tune_prefers_removing_celebrities() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(tune_dataset(tmp.path()), tmp.path().join("tune"));
    let grid = TuneGrid { thresholds: vec![Threshold::AtMost(2), Threshold::AtMost(50)], ..TuneGrid::default() };
    let out = pipeline::tune(&cfg, &grid, 0).unwrap();
    assert_eq!(out.leaderboard.len(), 2);
    assert_eq!(out.best.celebrity_threshold, Threshold::AtMost(2));
    assert_eq!(out.best.eval_split, Split::Dev);
    assert!(out.leaderboard[0].acc161 > out.leaderboard[1].acc161);
}

#[test]
fn tune_grid_edge_cases() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(tune_dataset(tmp.path()), tmp.path().join("tune"));

    let single = TuneGrid { thresholds: vec![Threshold::AtMost(7)], ..TuneGrid::default() };
    let out = pipeline::tune(&cfg, &single, 1).unwrap();
    assert_eq!(out.leaderboard.len(), 1);
    assert_eq!(out.best.celebrity_threshold, Threshold::AtMost(7));

    let dup = TuneGrid {
        thresholds: vec![Threshold::AtMost(3), Threshold::AtMost(3), Threshold::None],
        mu2: vec![0.1, 0.1],
        ..TuneGrid::default()
    };
    assert_eq!(dup.points(&cfg).len(), 2);
    assert_eq!(pipeline::tune(&cfg, &dup, 2).unwrap().leaderboard.len(), 2);

    assert!(pipeline::tune(&cfg, &TuneGrid::default(), 1).is_err());
}
