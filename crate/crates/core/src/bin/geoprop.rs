// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::{info, warn};

use geoprop::config::{KeyValues, RunConfig};
use geoprop::dataset::{generate_synthetic, write_dataset, Format, SynthConfig};
use geoprop::eval::results_table;
use geoprop::graph::Threshold;
use geoprop::pipeline::{self, write_atomic, TuneGrid};
use geoprop::{Error, Result};

#[derive(Parser)]
#[command(name = "geoprop", version = pipeline::VERSION, about = "Label-propagation geolocation of social-network users")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one variant end to end (`variants=all` adds the five-row table).
    Run(Common),
    /// Evaluate over a list of celebrity thresholds (`sweep_t`).
    Sweep(Common),
    /// Grid search on the dev split (`grid_t`, `grid_bucket_size`, `grid_mu2`, `grid_l1_strength`).
    Tune(Common),
    /// Generate a synthetic dataset.
    Synth(Common),
    /// Score a prediction file (`predictions`) against a dataset.
    Eval(Common),
}

#[derive(Args)]
struct Common {
    /// Flat key=value config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a config key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for sweep and tune points (0 = all cores).
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

impl Common {
    fn key_values(&self) -> Result<KeyValues> {
        let mut kv = match &self.config {
            Some(path) => KeyValues::load(path)?,
            None => KeyValues::new(),
        };
        for s in &self.set {
            kv.set_assignment(s)?;
        }
        if let Some(out) = &self.out {
            kv.set("out", out.display().to_string());
        }
        Ok(kv)
    }

    fn out_dir(&self, kv: &KeyValues) -> Result<PathBuf> {
        let dir: PathBuf = kv.parsed_or("out", PathBuf::from("out"))?;
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        Ok(dir)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("GEOPROP_LOG", "info")).init();
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(command: Command) -> Result<u8> {
    match command {
        Command::Run(c) => {
            let kv = c.key_values()?;
            let cfg = RunConfig::from_key_values(&kv)?;
            let report = pipeline::run(&cfg)?;
            print!("{}", results_table(&[(report.variant.clone(), report.metrics.clone())]));
            info!(
                "{} edges, {} sweeps, {} unresolved, reused {:?}",
                report.graph_stats.edges, report.sweeps_run, report.unresolved, report.reused
            );
            if kv.get("variants") == Some("all") {
                let rows = pipeline::variant_table(&cfg)?;
                let table = results_table(&rows);
                write_atomic(&cfg.out.join("table.txt"), &table)?;
                let json: Vec<_> = rows
                    .iter()
                    .map(|(v, m)| serde_json::json!({"variant": v, "acc161": m.acc161, "mean_km": m.mean_km, "median_km": m.median_km}))
                    .collect();
                write_atomic(&cfg.out.join("table.json"), serde_json::to_string_pretty(&json)?)?;
                print!("{table}");
            }
            if !report.converged {
                warn!("solver stopped after {} sweeps without reaching the tolerance", report.sweeps_run);
                return Ok(4);
            }
            Ok(0)
        }
        Command::Sweep(c) => {
            let kv = c.key_values()?;
            let cfg = RunConfig::from_key_values(&kv)?;
            let ts: Vec<Threshold> = kv.list("sweep_t")?.unwrap_or_else(|| {
                [1, 2, 5, 10, 15, 25, 50, 100]
                    .map(Threshold::AtMost)
                    .into_iter()
                    .chain([Threshold::None])
                    .collect()
            });
            let rows = pipeline::sweep(&cfg, &ts, c.threads)?;
            let csv = pipeline::sweep_csv(&rows);
            write_atomic(&c.out_dir(&kv)?.join("sweep.csv"), &csv)?;
            print!("{csv}");
            Ok(0)
        }
        Command::Tune(c) => {
            let kv = c.key_values()?;
            let cfg = RunConfig::from_key_values(&kv)?;
            let grid = TuneGrid {
                thresholds: kv.list("grid_t")?.unwrap_or_default(),
                bucket_sizes: kv.list("grid_bucket_size")?.unwrap_or_default(),
                mu2: kv.list("grid_mu2")?.unwrap_or_default(),
                l1_strength: kv.list("grid_l1_strength")?.unwrap_or_default(),
            };
            let outcome = pipeline::tune(&cfg, &grid, c.threads)?;
            let dir = c.out_dir(&kv)?;
            let csv = pipeline::leaderboard_csv(&outcome.leaderboard);
            write_atomic(&dir.join("leaderboard.csv"), &csv)?;
            write_atomic(&dir.join("best.cfg"), outcome.best.to_key_values().render())?;
            print!("{csv}");
            Ok(0)
        }
        Command::Synth(c) => {
            let kv = c.key_values()?;
            let cfg = SynthConfig::from_key_values(&kv)?;
            let format: Format = kv.parsed_or("format", Format::Tsv)?;
            let out = generate_synthetic(&cfg)?;
            let dir = c.out_dir(&kv)?;
            let name = match format {
                Format::Tsv => "dataset.tsv",
                Format::Jsonl => "dataset.jsonl",
            };
            write_dataset(&out.dataset, &dir.join(name), format)?;
            let mentions: String = out.mentions.iter().map(|(u, h)| format!("{u}\t{h}\n")).collect();
            write_atomic(&dir.join("mentions.tsv"), mentions)?;
            let mut clusters: Vec<_> = out.cluster_of.iter().collect();
            clusters.sort();
            let clusters: String = clusters.iter().map(|(u, c)| format!("{u}\t{c}\n")).collect();
            write_atomic(&dir.join("clusters.tsv"), clusters)?;
            println!("{} users written to {}", out.dataset.len(), dir.join(name).display());
            Ok(0)
        }
        Command::Eval(c) => {
            let kv = c.key_values()?;
            let dataset_path: PathBuf = kv
                .parsed("dataset")?
                .ok_or_else(|| Error::Config("missing required key `dataset`".into()))?;
            let predictions: PathBuf = kv
                .parsed("predictions")?
                .ok_or_else(|| Error::Config("missing required key `predictions`".into()))?;
            let format = kv.parsed_or("format", Format::Tsv)?;
            let split = kv.parsed_or("eval_split", geoprop::Split::Test)?;
            let dataset = geoprop::dataset::load_dataset(&dataset_path, format)?;
            let metrics = pipeline::evaluate_predictions(&dataset, &predictions, split)?;
            let name = kv.get("variant").unwrap_or("predictions").to_string();
            if c.out.is_some() || kv.get("out").is_some() {
                let dir = c.out_dir(&kv)?;
                write_atomic(&dir.join("metrics.json"), pipeline::metrics_json(&name, &metrics)?)?;
            }
            print!("{}", results_table(&[(name, metrics)]));
            Ok(0)
        }
    }
}
