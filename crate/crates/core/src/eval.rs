// SPDX-License-Identifier: Apache-2.0

//! Distance-based geolocation metrics.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::dataset::GeoPoint;
use crate::error::{Error, Result};

pub const EARTH_RADIUS_KM: f64 = 6371.0;

/// Errors up to this distance count as correct for Acc@161.
pub const ACC_RADIUS_KM: f64 = 161.0;

/// Great-circle distance on a sphere of radius [`EARTH_RADIUS_KM`].
pub fn haversine_km(a: GeoPoint, b: GeoPoint) -> f64 {
    let (phi1, phi2) = (a.lat.to_radians(), b.lat.to_radians());
    let dphi = (b.lat - a.lat).to_radians();
    let dlambda = (b.lon - a.lon).to_radians();
    let h = (dphi / 2.0).sin().powi(2) + phi1.cos() * phi2.cos() * (dlambda / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_KM * h.sqrt().min(1.0).asin()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub acc161: f64,
    pub mean_km: f64,
    pub median_km: f64,
    /// Per-user error, keyed by user id.
    pub per_user_km: BTreeMap<String, f64>,
}

impl Metrics {
    pub fn users(&self) -> usize {
        self.per_user_km.len()
    }
}

/// Lower-middle order statistic; `None` for an empty slice.
pub fn lower_median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Some(sorted[(sorted.len() - 1) / 2])
}

/// Scores predictions against gold locations. Both maps must cover the same
/// users.
pub fn evaluate<'a, P, G>(preds: P, gold: G) -> Result<Metrics>
where
    P: IntoIterator<Item = (&'a String, &'a GeoPoint)>,
    G: IntoIterator<Item = (&'a String, &'a GeoPoint)>,
{
    let preds: BTreeMap<&String, &GeoPoint> = preds.into_iter().collect();
    let gold: BTreeMap<&String, &GeoPoint> = gold.into_iter().collect();
    let missing_pred: Vec<&str> = gold.keys().filter(|k| !preds.contains_key(*k)).map(|k| k.as_str()).collect();
    let missing_gold: Vec<&str> = preds.keys().filter(|k| !gold.contains_key(*k)).map(|k| k.as_str()).collect();
    if !missing_pred.is_empty() || !missing_gold.is_empty() {
        return Err(Error::Validation(format!(
            "prediction/gold mismatch; no prediction for [{}]; no gold for [{}]",
            missing_pred.join(", "),
            missing_gold.join(", ")
        )));
    }
    if gold.is_empty() {
        return Err(Error::Validation("nothing to evaluate".into()));
    }
    let per_user_km: BTreeMap<String, f64> = gold
        .iter()
        .map(|(user, g)| ((*user).clone(), haversine_km(*preds[user], **g)))
        .collect();
    Ok(metrics_from_errors(per_user_km))
}

/// Summary metrics from per-user errors in km.
pub fn metrics_from_errors(per_user_km: BTreeMap<String, f64>) -> Metrics {
    // BTreeMap order makes the summation order independent of input order.
    let errors: Vec<f64> = per_user_km.values().copied().collect();
    let n = errors.len() as f64;
    let hits = errors.iter().filter(|&&e| e <= ACC_RADIUS_KM).count();
    Metrics {
        acc161: if errors.is_empty() { 0.0 } else { hits as f64 / n },
        mean_km: if errors.is_empty() { 0.0 } else { errors.iter().sum::<f64>() / n },
        median_km: lower_median(&errors).unwrap_or(0.0),
        per_user_km,
    }
}

/// Aligned text table with one row per variant:
/// `Acc@161` as a percentage, mean and median error in km.
pub fn results_table(rows: &[(String, Metrics)]) -> String {
    let width = rows.iter().map(|(n, _)| n.len()).max().unwrap_or(0).max("Variant".len());
    let mut out = String::new();
    let _ = writeln!(out, "{:<width$}  {:>7}  {:>8}  {:>8}", "Variant", "Acc@161", "Mean", "Median");
    for (name, m) in rows {
        let _ = writeln!(
            out,
            "{:<width$}  {:>7.1}  {:>8.1}  {:>8.1}",
            name,
            100.0 * m.acc161,
            m.mean_km,
            m.median_km
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(lat: f64, lon: f64) -> GeoPoint {
        GeoPoint { lat, lon }
    }

    fn with_errors(km: &[f64]) -> Metrics {
        // points along the equator, one degree is 6371*pi/180 km
        let per_deg = EARTH_RADIUS_KM * std::f64::consts::PI / 180.0;
        let gold: BTreeMap<String, GeoPoint> = (0..km.len()).map(|i| (format!("u{i}"), p(0.0, 0.0))).collect();
        let preds: BTreeMap<String, GeoPoint> =
            km.iter().enumerate().map(|(i, e)| (format!("u{i}"), p(0.0, e / per_deg))).collect();
        evaluate(&preds, &gold).unwrap()
    }

    #[test]
    fn haversine_goldens() {
        assert_eq!(haversine_km(p(0.0, 0.0), p(0.0, 0.0)), 0.0);
        assert!((haversine_km(p(0.0, 0.0), p(0.0, 180.0)) - 20015.087).abs() < 1e-3);
        assert!((haversine_km(p(0.0, 0.0), p(0.0, 1.0)) - 111.195).abs() < 1e-3);
    }

    #[test]
    fn perfect_predictions() {
        let m = with_errors(&[0.0, 0.0, 0.0]);
        assert_eq!((m.acc161, m.mean_km, m.median_km), (1.0, 0.0, 0.0));
    }

    #[test]
    fn lower_middle_median() {
        let m = with_errors(&[0.0, 322.0]);
        assert_eq!(m.acc161, 0.5);
        assert!((m.mean_km - 161.0).abs() < 1e-9);
        assert_eq!(m.median_km, 0.0);
    }

    #[test]
    fn boundary_is_inclusive() {
        let errors = [("a", 100.0), ("b", 161.0), ("c", 200.0)];
        let m = metrics_from_errors(errors.iter().map(|(u, e)| (u.to_string(), *e)).collect());
        assert_eq!(m.acc161, 2.0 / 3.0);
    }

    #[test]
    fn key_mismatch_names_users() {
        let gold: BTreeMap<String, GeoPoint> = [("a".to_string(), p(0.0, 0.0)), ("b".to_string(), p(0.0, 0.0))].into();
        let preds: BTreeMap<String, GeoPoint> = [("a".to_string(), p(0.0, 0.0))].into();
        let err = evaluate(&preds, &gold).unwrap_err().to_string();
        assert!(err.contains("[b]"), "{err}");
    }

    #[test]
    fn table_shape() {
        let t = results_table(&[("MAD".into(), with_errors(&[0.0, 322.0]))]);
        let lines: Vec<&str> = t.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(lines[0].contains("Acc@161") && lines[0].contains("Median"));
        assert!(lines[1].starts_with("MAD "));
        assert!(lines[1].contains("50.0"));
    }

    fn point() -> impl Strategy<Value = GeoPoint> {
        (-90.0..=90.0f64, -180.0..=180.0f64).prop_map(|(lat, lon)| p(lat, lon))
    }

    proptest! {
        #[test]
        fn metric_axioms(a in point(), b in point(), c in point()) {
            prop_assert_eq!(haversine_km(a, b), haversine_km(b, a));
            prop_assert!(haversine_km(a, b) <= std::f64::consts::PI * EARTH_RADIUS_KM + 1e-9);
            prop_assert!(haversine_km(a, c) <= haversine_km(a, b) + haversine_km(b, c) + 1e-9);
        }
    }
}
