// SPDX-License-Identifier: Apache-2.0

//! Modified Adsorption with the regularisation term switched off.
//!
//! The solver minimises
//!
//! ```text
//! C(Ŷ) = Σ_v μ1 s_v ‖Y_v − Ŷ_v‖² + μ2 Σ_{u~v} W_uv ‖Ŷ_u − Ŷ_v‖²
//! ```
//!
//! where `Y_v` is the seed label vector of node `v`, `s_v` its seed
//! confidence and the second sum runs over undirected edges, i.e.
//! `μ2 · tr(Ŷᵀ L Ŷ)` with the unnormalised Laplacian `L = D − W`. Setting the
//! gradient to zero gives `(μ1 S + μ2 L) Ŷ = μ1 S Y`.
//!
//! Sweeps are Gauss–Seidel in node index order. Each node update
//!
//! ```text
//! Ŷ_v ← (μ1 s_v Y_v + μ2 Σ_u W_uv Ŷ_u) / (μ1 s_v + μ2 Σ_u W_uv)
//! ```
//!
//! exactly minimises `C` over `Ŷ_v` with everything else held fixed, so the
//! objective never increases from one sweep to the next. Unseeded nodes
//! without neighbours have a zero denominator; they keep an all-zero row and
//! are reported as unresolved, as are all nodes of components without a
//! seed.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, GeoPoint, Split};
use crate::discretizer::{CellId, Discretizer};
use crate::error::{Error, Result};
use crate::graph::{MentionGraph, NodeKind};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MadParams {
    /// Weight of the seed-fidelity term.
    pub mu1: f64,
    /// Weight of the smoothness term.
    pub mu2: f64,
    pub max_sweeps: usize,
    /// Converged once no entry of Ŷ moves by this much or more in a sweep.
    pub tolerance: f64,
    pub dongle_weight: f64,
    pub dongle_confidence: f64,
}

impl Default for MadParams {
    fn default() -> Self {
        MadParams {
            mu1: 1.0,
            mu2: 0.1,
            max_sweeps: 200,
            tolerance: 1e-5,
            dongle_weight: 1.0,
            dongle_confidence: 1.0,
        }
    }
}

impl MadParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.mu1 >= 0.0 && self.mu1.is_finite()) || !(self.mu2 >= 0.0 && self.mu2.is_finite()) {
            return bad(format!("mu1 and mu2 must be finite and >= 0 (got {}, {})", self.mu1, self.mu2));
        }
        if self.mu1 + self.mu2 <= 0.0 {
            return bad("mu1 + mu2 must be positive".into());
        }
        if self.max_sweeps == 0 {
            return bad("max_sweeps must be positive".into());
        }
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return bad(format!("tolerance must be positive, got {}", self.tolerance));
        }
        if !(self.dongle_weight > 0.0 && self.dongle_weight.is_finite()) {
            return bad(format!("dongle_weight must be positive, got {}", self.dongle_weight));
        }
        if !(self.dongle_confidence > 0.0 && self.dongle_confidence <= 1.0) {
            return bad(format!("dongle_confidence must lie in (0, 1], got {}", self.dongle_confidence));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Seed {
    pub label: Vec<f64>,
    pub confidence: f64,
}

/// Seeded nodes by id: the rows of `Y` and the diagonal of `S`. Nodes not
/// listed have confidence zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedSet {
    num_labels: usize,
    seeds: BTreeMap<String, Seed>,
}

impl SeedSet {
    pub fn new(num_labels: usize) -> Self {
        SeedSet {
            num_labels,
            seeds: BTreeMap::new(),
        }
    }

    pub fn num_labels(&self) -> usize {
        self.num_labels
    }

    pub fn insert(&mut self, node: &str, label: Vec<f64>, confidence: f64) -> Result<()> {
        if label.len() != self.num_labels {
            return Err(Error::Validation(format!(
                "seed {node}: label vector has {} entries, expected {}",
                label.len(),
                self.num_labels
            )));
        }
        if label.iter().any(|&x| !(x >= 0.0 && x.is_finite())) {
            return Err(Error::Validation(format!("seed {node}: label entries must be finite and >= 0")));
        }
        if label.iter().sum::<f64>() > 1.0 + 1e-9 {
            return Err(Error::Validation(format!("seed {node}: label vector sums above 1")));
        }
        if !(0.0..=1.0).contains(&confidence) {
            return Err(Error::Validation(format!("seed {node}: confidence {confidence} outside [0, 1]")));
        }
        self.seeds.insert(node.to_string(), Seed { label, confidence });
        Ok(())
    }

    /// One-hot seed at full confidence, the form used for training users.
    pub fn insert_one_hot(&mut self, node: &str, cell: CellId) -> Result<()> {
        if cell.0 >= self.num_labels {
            return Err(Error::Validation(format!("seed {node}: cell {} out of range", cell.0)));
        }
        let mut label = vec![0.0; self.num_labels];
        label[cell.0] = 1.0;
        self.insert(node, label, 1.0)
    }

    pub fn get(&self, node: &str) -> Option<&Seed> {
        self.seeds.get(node)
    }

    pub fn len(&self) -> usize {
        self.seeds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seeds.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Seed)> {
        self.seeds.iter().map(|(k, v)| (k.as_str(), v))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveResult {
    ids: Vec<String>,
    dongle: Vec<bool>,
    num_labels: usize,
    /// Row-major `n × m` label scores.
    scores: Vec<f64>,
    pub initial_objective: f64,
    /// Objective after each sweep.
    pub objective_trace: Vec<f64>,
    pub sweeps_run: usize,
    pub converged: bool,
    /// Nodes whose label scores are all zero.
    pub unresolved: Vec<String>,
}

impl SolveResult {
    pub fn num_labels(&self) -> usize {
        self.num_labels
    }

    pub fn row(&self, v: usize) -> &[f64] {
        &self.scores[v * self.num_labels..(v + 1) * self.num_labels]
    }

    pub fn distribution(&self, id: &str) -> Option<&[f64]> {
        self.ids.iter().position(|x| x == id).map(|v| self.row(v))
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    /// Highest-scoring cell, lowest id on ties; `None` when the row is all
    /// zero.
    pub fn argmax(&self, v: usize) -> Option<CellId> {
        let mut best: Option<(usize, f64)> = None;
        for (c, &x) in self.row(v).iter().enumerate() {
            if x > 0.0 && best.is_none_or(|(_, b)| x > b) {
                best = Some((c, x));
            }
        }
        best.map(|(c, _)| CellId(c))
    }

    /// One JSON object per user node: id, top five `(cell, score)` pairs and
    /// the unresolved flag. Dongle nodes are left out.
    pub fn to_jsonl(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Line<'a> {
            user_id: &'a str,
            top: Vec<(usize, f64)>,
            unresolved: bool,
        }
        let mut out = String::new();
        for v in 0..self.ids.len() {
            if self.dongle[v] {
                continue;
            }
            let mut ranked: Vec<(usize, f64)> =
                self.row(v).iter().copied().enumerate().filter(|&(_, x)| x > 0.0).collect();
            ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
            ranked.truncate(5);
            let line = Line {
                user_id: &self.ids[v],
                unresolved: ranked.is_empty(),
                top: ranked,
            };
            out.push_str(&serde_json::to_string(&line)?);
            out.push('\n');
        }
        Ok(out)
    }

    pub fn objective_csv(&self) -> String {
        let mut out = String::from("sweep,objective\n");
        let _ = writeln!(out, "0,{}", self.initial_objective);
        for (i, c) in self.objective_trace.iter().enumerate() {
            let _ = writeln!(out, "{},{}", i + 1, c);
        }
        out
    }
}

/// Objective value for label scores `yhat` (row-major `n × m`).
pub fn objective(g: &MentionGraph, y: &[f64], s: &[f64], yhat: &[f64], m: usize, params: &MadParams) -> f64 {
    let mut prior = 0.0;
    for (v, &sv) in s.iter().enumerate() {
        if sv > 0.0 {
            let d: f64 = (0..m).map(|c| (y[v * m + c] - yhat[v * m + c]).powi(2)).sum();
            prior += sv * d;
        }
    }
    let mut smooth = 0.0;
    for (u, v, w) in g.edges() {
        let d: f64 = (0..m).map(|c| (yhat[u * m + c] - yhat[v * m + c]).powi(2)).sum();
        smooth += w * d;
    }
    params.mu1 * prior + params.mu2 * smooth
}

pub fn run_mad(g: &MentionGraph, seeds: &SeedSet, params: &MadParams) -> Result<SolveResult> {
    params.validate()?;
    let m = seeds.num_labels();
    if m == 0 {
        return Err(Error::Solver("label set is empty".into()));
    }
    let n = g.node_count();
    if let Some((u, v, w)) = g.edges().find(|e| !e.2.is_finite()) {
        return Err(Error::Solver(format!("non-finite weight {w} on edge {}–{}", g.id(u), g.id(v))));
    }

    let mut y = vec![0.0; n * m];
    let mut s = vec![0.0; n];
    for (id, seed) in seeds.iter() {
        let v = g
            .index_of(id)
            .ok_or_else(|| Error::Solver(format!("seed references unknown node {id:?}")))?;
        s[v] = seed.confidence;
        y[v * m..(v + 1) * m].copy_from_slice(&seed.label);
    }

    let mut yhat: Vec<f64> = (0..n * m).map(|i| s[i / m] * y[i]).collect();
    let degree: Vec<f64> = (0..n).map(|v| g.neighbors(v).iter().map(|&(_, w)| w).sum()).collect();
    let initial_objective = objective(g, &y, &s, &yhat, m, params);

    let mut trace = Vec::new();
    let mut converged = false;
    let mut acc = vec![0.0; m];
    for _ in 0..params.max_sweeps {
        let mut max_change: f64 = 0.0;
        for v in 0..n {
            let prior = params.mu1 * s[v];
            let denom = prior + params.mu2 * degree[v];
            if denom == 0.0 {
                continue;
            }
            for c in 0..m {
                acc[c] = prior * y[v * m + c];
            }
            for &(u, w) in g.neighbors(v) {
                let pull = params.mu2 * w;
                let row = &yhat[u * m..(u + 1) * m];
                for (a, &x) in acc.iter_mut().zip(row) {
                    *a += pull * x;
                }
            }
            for (c, &a) in acc.iter().enumerate() {
                let new = a / denom;
                let slot = &mut yhat[v * m + c];
                max_change = max_change.max((new - *slot).abs());
                *slot = new;
            }
        }
        trace.push(objective(g, &y, &s, &yhat, m, params));
        if max_change < params.tolerance {
            converged = true;
            break;
        }
    }

    let ids = g.ids().to_vec();
    let unresolved = (0..n)
        .filter(|&v| yhat[v * m..(v + 1) * m].iter().all(|&x| x == 0.0))
        .map(|v| ids[v].clone())
        .collect();
    Ok(SolveResult {
        dongle: (0..n).map(|v| matches!(g.kind(v), NodeKind::Dongle { .. })).collect(),
        ids,
        num_labels: m,
        scores: yhat,
        initial_objective,
        sweeps_run: trace.len(),
        objective_trace: trace,
        converged,
        unresolved,
    })
}

/// Hangs a seeded dongle node off every user that has a prior. Each prior
/// must be a probability vector over the seed set's labels.
pub fn attach_dongles(
    g: &MentionGraph,
    seeds: &SeedSet,
    priors: &BTreeMap<String, Vec<f64>>,
    params: &MadParams,
) -> Result<(MentionGraph, SeedSet)> {
    params.validate()?;
    let mut g2 = g.clone();
    let mut seeds2 = seeds.clone();
    for (user, prior) in priors {
        let v = g
            .index_of(user)
            .filter(|&v| g.kind(v) == NodeKind::User)
            .ok_or_else(|| Error::Validation(format!("prior for unknown user {user:?}")))?;
        let total: f64 = prior.iter().sum();
        if (total - 1.0).abs() > 1e-9 || prior.iter().any(|&x| x.is_nan() || x < 0.0) {
            return Err(Error::Validation(format!(
                "prior for {user} is not a probability vector (sum {total})"
            )));
        }
        let d = g2.add_dongle(v, params.dongle_weight)?;
        seeds2.insert(g2.id(d), prior.clone(), params.dongle_confidence)?;
    }
    Ok((g2, seeds2))
}

/// Decoded location for every user of `split`. Users with no label mass
/// fall back to the dataset's map centre.
pub fn predict(
    result: &SolveResult,
    d: &Discretizer,
    dataset: &Dataset,
    split: Split,
) -> Result<BTreeMap<String, GeoPoint>> {
    let position: std::collections::HashMap<&str, usize> =
        result.ids.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    let mut out = BTreeMap::new();
    for r in dataset.split(split) {
        let v = *position
            .get(r.user_id.as_str())
            .ok_or_else(|| Error::Validation(format!("no solution for user {}", r.user_id)))?;
        let p = match result.argmax(v) {
            Some(c) => d.cell_to_point(c)?,
            None => dataset.map_center(),
        };
        out.insert(r.user_id.clone(), p);
    }
    Ok(out)
}
