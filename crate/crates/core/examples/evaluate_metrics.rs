// SPDX-License-Identifier: Apache-2.0

//! Scores hand-made predictions with the distance metrics.

use std::collections::BTreeMap;

use geoprop::eval::results_table;
use geoprop::{evaluate, haversine_km, GeoPoint};

fn main() -> geoprop::Result<()> {
    let nyc = GeoPoint { lat: 40.71, lon: -74.01 };
    let philly = GeoPoint { lat: 39.95, lon: -75.17 };
    let la = GeoPoint { lat: 34.05, lon: -118.24 };
    println!("NYC-Philadelphia {:.1} km, NYC-LA {:.1} km", haversine_km(nyc, philly), haversine_km(nyc, la));

    let gold: BTreeMap<String, GeoPoint> =
        [("a", nyc), ("b", nyc), ("c", la)].into_iter().map(|(k, v)| (k.to_string(), v)).collect();
    let preds: BTreeMap<String, GeoPoint> =
        [("a", nyc), ("b", philly), ("c", nyc)].into_iter().map(|(k, v)| (k.to_string(), v)).collect();
    let m = evaluate(&preds, &gold)?;
    for (u, km) in &m.per_user_km {
        println!("{u}: {km:.1} km");
    }
    print!("{}", results_table(&[("hand-made".to_string(), m)]));
    Ok(())
}
