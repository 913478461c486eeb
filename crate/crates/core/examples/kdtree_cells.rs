// SPDX-License-Identifier: Apache-2.0

//! Partitions random points into k-d tree cells and looks up a few queries.

use geoprop::{Discretizer, GeoPoint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> geoprop::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let points: Vec<GeoPoint> = (0..200)
        .map(|_| GeoPoint { lat: rng.random_range(25.0..49.0), lon: rng.random_range(-124.0..-67.0) })
        .collect();
    let d = Discretizer::build(&points, 25)?;
    println!("{} cells", d.num_cells());
    for (i, cell) in d.cells().iter().enumerate() {
        println!(
            "cell {i:>2}: {:>2} members, median ({:.2}, {:.2})",
            cell.members.len(),
            cell.median.lat,
            cell.median.lon
        );
    }
    for q in [GeoPoint { lat: 40.7, lon: -74.0 }, GeoPoint { lat: 34.1, lon: -118.2 }] {
        let c = d.assign_cell(&q);
        println!("({}, {}) -> cell {} at {:?}", q.lat, q.lon, c.0, d.cell_to_point(c)?);
    }
    Ok(())
}
