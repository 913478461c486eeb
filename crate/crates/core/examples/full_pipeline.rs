// SPDX-License-Identifier: Apache-2.0

//! Runs the five standard variants on a synthetic dataset and prints the
//! results table. Pass a TSV path to use your own data instead.
//!
//!     cargo run --release --example full_pipeline [-- data.tsv]

use geoprop::config::RunConfig;
use geoprop::dataset::{generate_synthetic, write_dataset, Format, SynthConfig};
use geoprop::eval::results_table;
use geoprop::pipeline::{self, variant_table};
use geoprop::Threshold;

fn main() -> geoprop::Result<()> {
    let tmp = std::env::temp_dir().join("geoprop-full-pipeline");
    std::fs::create_dir_all(&tmp).map_err(|e| geoprop::Error::io(&tmp, e))?;
    let data = match std::env::args().nth(1) {
        Some(p) => p.into(),
        None => {
            let synth = generate_synthetic(&SynthConfig {
                celebrity_degrees: vec![60, 90],
                isolated_test_fraction: 0.15,
                ..SynthConfig::default()
            })?;
            let path = tmp.join("dataset.tsv");
            write_dataset(&synth.dataset, &path, Format::Tsv)?;
            path
        }
    };

    let mut cfg = RunConfig::new(data);
    cfg.bucket_size = 10;
    cfg.celebrity_threshold = Threshold::AtMost(5);
    cfg.out = tmp.join("run");
    print!("{}", results_table(&variant_table(&cfg)?));

    let report = pipeline::run(&cfg)?;
    println!("artifacts for {} in {}", report.variant, cfg.out.display());
    Ok(())
}
