// SPDX-License-Identifier: Apache-2.0

//! k-d tree cells over training coordinates.
//!
//! Each internal node splits its points on the wider side of their bounding
//! box (in raw degrees) at the lower-middle order statistic; points equal to
//! the split value go left. A node becomes a leaf once it holds at most
//! `bucket_size` points or all of its points coincide. Leaves are numbered
//! left to right and those numbers are the class labels used downstream.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::GeoPoint;
use crate::error::{Error, Result};
use crate::eval::lower_median;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CellId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Lat,
    Lon,
}

impl Axis {
    fn of(self, p: &GeoPoint) -> f64 {
        match self {
            Axis::Lat => p.lat,
            Axis::Lon => p.lon,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum Node {
    Split { axis: Axis, value: f64, left: usize, right: usize },
    Leaf { cell: CellId },
}

/// Member bounding box of a cell.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub lat_min: f64,
    pub lat_max: f64,
    pub lon_min: f64,
    pub lon_max: f64,
}

impl BoundingBox {
    fn of<'a>(points: impl Iterator<Item = &'a GeoPoint>) -> Self {
        let mut b = BoundingBox {
            lat_min: f64::INFINITY,
            lat_max: f64::NEG_INFINITY,
            lon_min: f64::INFINITY,
            lon_max: f64::NEG_INFINITY,
        };
        for p in points {
            b.lat_min = b.lat_min.min(p.lat);
            b.lat_max = b.lat_max.max(p.lat);
            b.lon_min = b.lon_min.min(p.lon);
            b.lon_max = b.lon_max.max(p.lon);
        }
        b
    }

    pub fn contains(&self, p: &GeoPoint) -> bool {
        (self.lat_min..=self.lat_max).contains(&p.lat) && (self.lon_min..=self.lon_max).contains(&p.lon)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub bbox: BoundingBox,
    /// Indices into the training points, ascending.
    pub members: Vec<usize>,
    pub median: GeoPoint,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Discretizer {
    bucket_size: usize,
    points: Vec<GeoPoint>,
    nodes: Vec<Node>,
    cells: Vec<Cell>,
}

impl Discretizer {
    pub fn build(points: &[GeoPoint], bucket_size: usize) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Build("cannot build a k-d tree over zero points".into()));
        }
        if bucket_size == 0 {
            return Err(Error::Build("bucket_size must be at least 1".into()));
        }
        let mut d = Discretizer {
            bucket_size,
            points: points.to_vec(),
            nodes: Vec::new(),
            cells: Vec::new(),
        };
        let all: Vec<usize> = (0..points.len()).collect();
        d.grow(all);
        Ok(d)
    }

    fn grow(&mut self, mut idx: Vec<usize>) -> usize {
        let id = self.nodes.len();
        let bbox = BoundingBox::of(idx.iter().map(|&i| &self.points[i]));
        let lat_span = bbox.lat_max - bbox.lat_min;
        let lon_span = bbox.lon_max - bbox.lon_min;
        if idx.len() <= self.bucket_size || (lat_span == 0.0 && lon_span == 0.0) {
            idx.sort_unstable();
            let lats: Vec<f64> = idx.iter().map(|&i| self.points[i].lat).collect();
            let lons: Vec<f64> = idx.iter().map(|&i| self.points[i].lon).collect();
            let median = GeoPoint {
                lat: lower_median(&lats).expect("non-empty leaf"),
                lon: lower_median(&lons).expect("non-empty leaf"),
            };
            let cell = CellId(self.cells.len());
            self.cells.push(Cell { bbox, members: idx, median });
            self.nodes.push(Node::Leaf { cell });
            return id;
        }

        let axis = if lon_span > lat_span { Axis::Lon } else { Axis::Lat };
        let mut values: Vec<f64> = idx.iter().map(|&i| axis.of(&self.points[i])).collect();
        values.sort_by(f64::total_cmp);
        let max = *values.last().unwrap();
        let mut value = values[(values.len() - 1) / 2];
        if value == max {
            // Everything would go left; fall back to the largest value below
            // the maximum so that both children are non-empty.
            value = *values.iter().rev().find(|&&v| v < max).expect("span is positive");
        }
        let (left, right): (Vec<usize>, Vec<usize>) =
            idx.into_iter().partition(|&i| axis.of(&self.points[i]) <= value);

        self.nodes.push(Node::Split { axis, value, left: 0, right: 0 });
        let l = self.grow(left);
        let r = self.grow(right);
        self.nodes[id] = Node::Split { axis, value, left: l, right: r };
        id
    }

    /// Cell reached by descending the split tree. Total over finite points.
    pub fn assign_cell(&self, p: &GeoPoint) -> CellId {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { cell } => return *cell,
                Node::Split { axis, value, left, right } => {
                    at = if axis.of(p) <= *value { *left } else { *right };
                }
            }
        }
    }

    /// Componentwise lower-middle median of the cell's training points.
    pub fn cell_to_point(&self, c: CellId) -> Result<GeoPoint> {
        self.cells
            .get(c.0)
            .map(|cell| cell.median)
            .ok_or_else(|| Error::Validation(format!("cell {} out of range (m = {})", c.0, self.cells.len())))
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn cell(&self, c: CellId) -> Option<&Cell> {
        self.cells.get(c.0)
    }

    pub fn points(&self) -> &[GeoPoint] {
        &self.points
    }

    pub fn bucket_size(&self) -> usize {
        self.bucket_size
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let d: Discretizer = serde_json::from_str(s)?;
        if d.nodes.is_empty() || d.cells.is_empty() {
            return Err(Error::Validation("discretizer file has no cells".into()));
        }
        Ok(d)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(lat: f64, lon: f64) -> GeoPoint {
        GeoPoint { lat, lon }
    }

    #[test]
    fn single_cell_when_bucket_is_large() {
        let pts: Vec<GeoPoint> = (0..100).map(|i| p(i as f64 * 0.1, -(i as f64) * 0.2)).collect();
        let d = Discretizer::build(&pts, 100).unwrap();
        assert_eq!(d.num_cells(), 1);
        assert_eq!(d.cells()[0].members, (0..100).collect::<Vec<_>>());
    }

    #[test]
    fn splits_on_the_wider_axis() {
        let pts = [p(0.0, 0.0), p(0.0, 1.0), p(0.0, 2.0), p(0.0, 3.0)];
        let d = Discretizer::build(&pts, 2).unwrap();
        assert_eq!(d.num_cells(), 2);
        assert_eq!(d.cells()[0].members, [0, 1]);
        assert_eq!(d.cells()[1].members, [2, 3]);
        assert!(matches!(d.nodes[0], Node::Split { axis: Axis::Lon, value, .. } if value == 1.0));
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(matches!(Discretizer::build(&[], 5), Err(Error::Build(_))));
        assert!(Discretizer::build(&[p(0.0, 0.0)], 0).is_err());
    }

    #[test]
    fn coincident_points_stay_together() {
        let pts = vec![p(1.0, 1.0); 10];
        let d = Discretizer::build(&pts, 2).unwrap();
        assert_eq!(d.num_cells(), 1);
    }

    #[test]
    fn top_heavy_duplicates_still_split() {
        // lower median equals the maximum here
        let pts = [p(0.0, 0.0), p(0.0, 1.0), p(0.0, 1.0)];
        let d = Discretizer::build(&pts, 1).unwrap();
        assert_eq!(d.num_cells(), 2);
        assert_eq!(d.cells()[0].members, [0]);
        assert_eq!(d.cells()[1].members, [1, 2]);
    }

    #[test]
    fn medians() {
        let d = Discretizer::build(&[p(0.0, 0.0)], 1).unwrap();
        assert_eq!(d.cell_to_point(CellId(0)).unwrap(), p(0.0, 0.0));
        let d = Discretizer::build(&[p(0.0, 0.0), p(0.0, 2.0), p(4.0, 2.0)], 3).unwrap();
        assert_eq!(d.cell_to_point(CellId(0)).unwrap(), p(0.0, 2.0));
        let d = Discretizer::build(&[p(0.0, 0.0), p(2.0, 2.0)], 2).unwrap();
        assert_eq!(d.cell_to_point(CellId(0)).unwrap(), p(0.0, 0.0));
        assert!(d.cell_to_point(CellId(1)).is_err());
    }

    #[test]
    fn far_away_points_still_get_a_cell() {
        let pts: Vec<GeoPoint> = (0..20).map(|i| p(30.0 + i as f64, -100.0 + (i * 7 % 11) as f64)).collect();
        let d = Discretizer::build(&pts, 3).unwrap();
        for q in [p(-89.0, 179.0), p(89.0, -179.0), p(0.0, 0.0)] {
            assert!(d.assign_cell(&q).0 < d.num_cells());
        }
    }

    #[test]
    fn json_round_trip() {
        let pts: Vec<GeoPoint> = (0..30).map(|i| p((i * 13 % 17) as f64, (i * 5 % 23) as f64)).collect();
        let d = Discretizer::build(&pts, 4).unwrap();
        assert_eq!(Discretizer::from_json(&d.to_json().unwrap()).unwrap(), d);
    }

    fn point_set() -> impl Strategy<Value = Vec<GeoPoint>> {
        // a small coordinate grid makes duplicates common
        prop::collection::vec((-4i32..4, -6i32..6), 1..80)
            .prop_map(|v| v.into_iter().map(|(a, b)| p(a as f64 * 1.5, b as f64)).collect())
    }

    proptest! {
        #[test]
        fn partition_capacity_and_medians(pts in point_set(), bucket in 1usize..10) {
            let d = Discretizer::build(&pts, bucket).unwrap();
            let mut seen = vec![0usize; pts.len()];
            for (c, cell) in d.cells().iter().enumerate() {
                let coincident = cell.members.iter().all(|&i| pts[i] == pts[cell.members[0]]);
                prop_assert!(cell.members.len() <= bucket || coincident);
                for &i in &cell.members {
                    seen[i] += 1;
                    prop_assert_eq!(d.assign_cell(&pts[i]), CellId(c));
                }
                let m = cell.median;
                prop_assert!(cell.bbox.contains(&m));
            }
            prop_assert!(seen.iter().all(|&k| k == 1));
            prop_assert_eq!(Discretizer::build(&pts, bucket).unwrap(), d);
        }
    }
}
