// SPDX-License-Identifier: Apache-2.0

//! Generates a small synthetic dataset and prints a few records.
//!
//!     cargo run --example synth_dataset -- /tmp/synth.tsv

use geoprop::dataset::{generate_synthetic, write_dataset, Format, SynthConfig};
use geoprop::Split;

fn main() -> geoprop::Result<()> {
    let cfg = SynthConfig {
        clusters: 4,
        users_per_cluster: 20,
        celebrity_degrees: vec![30],
        ..SynthConfig::default()
    };
    let out = generate_synthetic(&cfg)?;
    for s in [Split::Train, Split::Dev, Split::Test] {
        println!("{s}: {} users", out.dataset.split(s).count());
    }
    for r in out.dataset.records().iter().take(3) {
        println!("{} ({:.2}, {:.2}) {}", r.user_id, r.location.lat, r.location.lon, r.text);
    }
    println!("celebrities: {:?}", out.celebrities);
    if let Some(path) = std::env::args().nth(1) {
        write_dataset(&out.dataset, path.as_ref(), Format::Tsv)?;
        println!("wrote {path}");
    }
    Ok(())
}
