// SPDX-License-Identifier: Apache-2.0

//! Independent reference implementations used as test oracles. None of
//! these call into the code paths they check.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use geoprop::dataset::GeoPoint;

/// Dense solve of `(μ1 S + μ2 L) Ŷ = μ1 S Y` for an undirected weighted
/// graph given as `(u, v, w)` triples. Nodes in components without any
/// positive-confidence seed get all-zero rows (the system is singular
/// there and the iterative solver leaves them at zero).
pub fn dense_mad(
    n: usize,
    edges: &[(usize, usize, f64)],
    labels: &[Vec<f64>],
    confidence: &[f64],
    mu1: f64,
    mu2: f64,
) -> Vec<Vec<f64>> {
    let m = labels.first().map_or(0, Vec::len);
    let mut adj = vec![Vec::new(); n];
    for &(u, v, _) in edges {
        adj[u].push(v);
        adj[v].push(u);
    }
    let mut comp = vec![usize::MAX; n];
    let mut seeded_comp = Vec::new();
    for start in 0..n {
        if comp[start] != usize::MAX {
            continue;
        }
        let id = seeded_comp.len();
        let mut seeded = false;
        let mut queue = VecDeque::from([start]);
        comp[start] = id;
        while let Some(x) = queue.pop_front() {
            seeded |= confidence[x] > 0.0;
            for &y in &adj[x] {
                if comp[y] == usize::MAX {
                    comp[y] = id;
                    queue.push_back(y);
                }
            }
        }
        seeded_comp.push(seeded);
    }
    let active: Vec<usize> = (0..n).filter(|&v| seeded_comp[comp[v]]).collect();
    let pos: BTreeMap<usize, usize> = active.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let k = active.len();
    let mut a = DMatrix::<f64>::zeros(k, k);
    for &v in &active {
        a[(pos[&v], pos[&v])] += mu1 * confidence[v];
    }
    for &(u, v, w) in edges {
        if let (Some(&i), Some(&j)) = (pos.get(&u), pos.get(&v)) {
            a[(i, i)] += mu2 * w;
            a[(j, j)] += mu2 * w;
            a[(i, j)] -= mu2 * w;
            a[(j, i)] -= mu2 * w;
        }
    }
    let mut out = vec![vec![0.0; m]; n];
    if k == 0 {
        return out;
    }
    let lu = a.lu();
    for c in 0..m {
        let b = DVector::from_iterator(k, active.iter().map(|&v| mu1 * confidence[v] * labels[v][c]));
        let x = lu.solve(&b).expect("seeded components give a non-singular system");
        for (i, &v) in active.iter().enumerate() {
            out[v][c] = x[i];
        }
    }
    out
}

/// Collapsed edges by brute force over the raw mention graph. Nodes of the
/// raw graph are the dataset users plus every outside handle that is not a
/// celebrity; a mention is an undirected raw edge. Two distinct users are
/// joined iff they are raw neighbours or share a raw neighbour that is an
/// outside handle. Returns pair → (direct mention count, shared handles).
pub fn brute_collapse(
    users: &[String],
    mentions: &[(String, String)],
    threshold: Option<usize>,
) -> BTreeMap<(String, String), (usize, usize)> {
    let user_set: BTreeSet<&String> = users.iter().collect();
    let mut fans: BTreeMap<&String, BTreeSet<&String>> = BTreeMap::new();
    for (u, h) in mentions {
        if user_set.contains(u) && !user_set.contains(h) {
            fans.entry(h).or_default().insert(u);
        }
    }
    let survives = |h: &String| threshold.is_none_or(|t| fans.get(h).map_or(0, |f| f.len()) <= t);

    let mut raw: BTreeMap<&String, BTreeSet<&String>> = BTreeMap::new();
    let mut direct: BTreeMap<(String, String), usize> = BTreeMap::new();
    for (u, h) in mentions {
        if !user_set.contains(u) || u == h {
            continue;
        }
        if user_set.contains(h) {
            let key = if u < h { (u.clone(), h.clone()) } else { (h.clone(), u.clone()) };
            *direct.entry(key).or_insert(0) += 1;
        } else if !survives(h) {
            continue;
        }
        raw.entry(u).or_default().insert(h);
        raw.entry(h).or_default().insert(u);
    }

    let mut out = BTreeMap::new();
    for (i, u) in users.iter().enumerate() {
        for v in &users[i + 1..] {
            let nu = raw.get(u).cloned().unwrap_or_default();
            let nv = raw.get(v).cloned().unwrap_or_default();
            let adjacent = nu.contains(v);
            let shared = nu.iter().filter(|x| !user_set.contains(*x) && nv.contains(*x)).count();
            if adjacent || shared > 0 {
                let key = if u < v { (u.clone(), v.clone()) } else { (v.clone(), u.clone()) };
                let d = direct.get(&key).copied().unwrap_or(0);
                out.insert(key, (d, shared));
            }
        }
    }
    out
}

/// A leaf of the reference k-d split: half-open constraints per axis
/// (`lo < x <= hi`, with infinite ends) and member indices.
#[derive(Clone, Debug)]
pub struct RefLeaf {
    pub lat: (f64, f64),
    pub lon: (f64, f64),
    pub members: Vec<usize>,
}

impl RefLeaf {
    pub fn contains(&self, p: &GeoPoint) -> bool {
        self.lat.0 < p.lat && p.lat <= self.lat.1 && self.lon.0 < p.lon && p.lon <= self.lon.1
    }
}

/// Recursive reference splitter with the documented rules: wider axis
/// (latitude on ties), lower-middle split value, ties left, and the largest
/// value below the maximum when the median is the maximum.
pub fn reference_split(points: &[GeoPoint], bucket: usize) -> Vec<RefLeaf> {
    let mut leaves = Vec::new();
    let inf = f64::INFINITY;
    split_rec(points, (0..points.len()).collect(), bucket, (-inf, inf), (-inf, inf), &mut leaves);
    leaves
}

fn split_rec(
    pts: &[GeoPoint],
    idx: Vec<usize>,
    bucket: usize,
    lat: (f64, f64),
    lon: (f64, f64),
    out: &mut Vec<RefLeaf>,
) {
    let lats: Vec<f64> = idx.iter().map(|&i| pts[i].lat).collect();
    let lons: Vec<f64> = idx.iter().map(|&i| pts[i].lon).collect();
    let span = |v: &[f64]| {
        let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        hi - lo
    };
    let (slat, slon) = (span(&lats), span(&lons));
    if idx.len() <= bucket || (slat == 0.0 && slon == 0.0) {
        let mut members = idx;
        members.sort();
        out.push(RefLeaf { lat, lon, members });
        return;
    }
    let use_lon = slon > slat;
    let mut vals = if use_lon { lons } else { lats };
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let max = vals[vals.len() - 1];
    let mut s = vals[(vals.len() - 1) / 2];
    if s == max {
        s = vals.iter().cloned().filter(|&v| v < max).fold(f64::NEG_INFINITY, f64::max);
    }
    let coord = |i: usize| if use_lon { pts[i].lon } else { pts[i].lat };
    let left: Vec<usize> = idx.iter().copied().filter(|&i| coord(i) <= s).collect();
    let right: Vec<usize> = idx.iter().copied().filter(|&i| coord(i) > s).collect();
    if use_lon {
        split_rec(pts, left, bucket, lat, (lon.0, s), out);
        split_rec(pts, right, bucket, lat, (s, lon.1), out);
    } else {
        split_rec(pts, left, bucket, (lat.0, s), lon, out);
        split_rec(pts, right, bucket, (s, lat.1), lon, out);
    }
}

/// Random point set, sometimes on a coarse grid so duplicates are common.
pub fn random_points(rng: &mut impl Rng, max_len: usize) -> Vec<GeoPoint> {
    let n = rng.random_range(1..=max_len);
    let coarse = rng.random_bool(0.4);
    (0..n)
        .map(|_| {
            if coarse {
                GeoPoint {
                    lat: rng.random_range(-3i32..=3) as f64 * 2.0,
                    lon: rng.random_range(-4i32..=4) as f64 * 3.0,
                }
            } else {
                GeoPoint {
                    lat: rng.random_range(-60.0..60.0),
                    lon: rng.random_range(-170.0..170.0),
                }
            }
        })
        .collect()
}

/// Random undirected weighted graph as `(u, v, w)` triples with `u < v`.
pub fn random_graph(rng: &mut impl Rng, n: usize, density: f64) -> Vec<(usize, usize, f64)> {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random_bool(density) {
                edges.push((u, v, rng.random_range(0.1..5.0)));
            }
        }
    }
    edges
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
