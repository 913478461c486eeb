// SPDX-License-Identifier: Apache-2.0

//! Grid search over threshold and smoothness on the dev split.

use geoprop::config::RunConfig;
use geoprop::dataset::{generate_synthetic, write_dataset, Format, SynthConfig};
use geoprop::pipeline::{leaderboard_csv, tune, TuneGrid};
use geoprop::Threshold;

fn main() -> geoprop::Result<()> {
    let synth = generate_synthetic(&SynthConfig {
        celebrity_degrees: vec![10; 20],
        p_local_handle: 0.0,
        mentions_per_user: 2,
        ..SynthConfig::default()
    })?;
    let path = std::env::temp_dir().join("geoprop-tune.tsv");
    write_dataset(&synth.dataset, &path, Format::Tsv)?;

    let mut cfg = RunConfig::new(path);
    cfg.bucket_size = 10;
    let grid = TuneGrid {
        thresholds: vec![Threshold::AtMost(2), Threshold::AtMost(5), Threshold::AtMost(50)],
        mu2: vec![0.01, 0.1, 1.0],
        ..TuneGrid::default()
    };
    let out = tune(&cfg, &grid, 0)?;
    print!("{}", leaderboard_csv(&out.leaderboard));
    println!("best:\n{}", out.best.to_key_values().render());
    Ok(())
}
