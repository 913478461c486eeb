// SPDX-License-Identifier: Apache-2.0

//! Sweeps the celebrity threshold on a synthetic dataset with planted
//! high-degree accounts.

use geoprop::config::RunConfig;
use geoprop::dataset::{generate_synthetic, write_dataset, Format, SynthConfig};
use geoprop::pipeline::{sweep, sweep_csv};
use geoprop::{EdgeMode, Split, Threshold};

fn main() -> geoprop::Result<()> {
    let synth = generate_synthetic(&SynthConfig { celebrity_degrees: vec![50; 5], seed: 5, ..SynthConfig::default() })?;
    let path = std::env::temp_dir().join("geoprop-sweep.tsv");
    write_dataset(&synth.dataset, &path, Format::Tsv)?;

    let mut cfg = RunConfig::new(path);
    cfg.bucket_size = 10;
    cfg.mode = EdgeMode::Weighted;
    cfg.eval_split = Split::Dev;
    let ts: Vec<Threshold> = [1, 2, 5, 10, 25, 60].into_iter().map(Threshold::AtMost).chain([Threshold::None]).collect();
    print!("{}", sweep_csv(&sweep(&cfg, &ts, 0)?));
    Ok(())
}
