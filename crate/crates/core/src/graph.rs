// SPDX-License-Identifier: Apache-2.0

//! Collapsed @-mention graph.
//!
//! Mentions always originate at dataset users. A mention of another dataset
//! user becomes a direct edge. Every other handle is an intermediate node
//! that is collapsed away: all distinct users mentioning it are joined
//! pairwise. Handles with more than `T` distinct mentioners are celebrities
//! and contribute nothing. Dataset users themselves are never removed, no
//! matter how often they are mentioned.
//!
//! In weighted mode the weight of `{u, v}` is the number of direct mentions
//! between them in either direction plus the number of distinct surviving
//! handles both of them mention.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::{extract_mentions, Dataset};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeMode {
    #[default]
    Binary,
    Weighted,
}

impl FromStr for EdgeMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "binary" => Ok(EdgeMode::Binary),
            "weighted" => Ok(EdgeMode::Weighted),
            other => Err(format!("unknown edge mode {other:?} (expected binary or weighted)")),
        }
    }
}

impl fmt::Display for EdgeMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EdgeMode::Binary => "binary",
            EdgeMode::Weighted => "weighted",
        })
    }
}

/// Celebrity threshold `T`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Threshold {
    /// No filtering.
    #[default]
    None,
    /// Drop handles with more than this many distinct mentioners.
    AtMost(usize),
}

impl Threshold {
    pub fn is_celebrity(self, distinct_mentioners: usize) -> bool {
        match self {
            Threshold::None => false,
            Threshold::AtMost(t) => distinct_mentioners > t,
        }
    }
}

impl PartialOrd for Threshold {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// `None` sorts after every finite threshold.
impl Ord for Threshold {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        match (self, other) {
            (Threshold::None, Threshold::None) => std::cmp::Ordering::Equal,
            (Threshold::None, _) => std::cmp::Ordering::Greater,
            (_, Threshold::None) => std::cmp::Ordering::Less,
            (Threshold::AtMost(a), Threshold::AtMost(b)) => a.cmp(b),
        }
    }
}

impl FromStr for Threshold {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim() {
            "none" | "inf" | "" => Ok(Threshold::None),
            t => t
                .parse::<usize>()
                .map(Threshold::AtMost)
                .map_err(|_| format!("celebrity threshold must be a count or `none`, got {t:?}")),
        }
    }
}

impl fmt::Display for Threshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Threshold::None => f.write_str("none"),
            Threshold::AtMost(t) => write!(f, "{t}"),
        }
    }
}

impl From<Threshold> for String {
    fn from(t: Threshold) -> String {
        t.to_string()
    }
}

impl TryFrom<String> for Threshold {
    type Error = String;

    fn try_from(s: String) -> std::result::Result<Self, String> {
        s.parse()
    }
}

/// Mentioned handles per dataset user, with multiplicity.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RawMentionTable {
    mentions: BTreeMap<String, Vec<String>>,
}

impl RawMentionTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_dataset(dataset: &Dataset) -> Self {
        let mut table = Self::new();
        for r in dataset.records() {
            table.mentions.insert(r.user_id.clone(), extract_mentions(&r.text));
        }
        table
    }

    pub fn push(&mut self, user: &str, handle: &str) {
        self.mentions.entry(user.to_string()).or_default().push(handle.to_string());
    }

    pub fn mentions_of(&self, user: &str) -> &[String] {
        self.mentions.get(user).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[String])> {
        self.mentions.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }

    /// Distinct mentioners (among `members`) of every handle outside
    /// `members`.
    pub fn external_mentioners(&self, members: &[String]) -> BTreeMap<String, BTreeSet<String>> {
        let inside: std::collections::HashSet<&str> = members.iter().map(String::as_str).collect();
        let mut out: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for u in members {
            for h in self.mentions_of(u) {
                if !inside.contains(h.as_str()) {
                    out.entry(h.clone()).or_default().insert(u.clone());
                }
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NodeKind {
    User,
    /// Prior-carrying node hanging off the user node with this index.
    Dongle { of: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphStats {
    pub nodes: usize,
    pub edges: usize,
    pub mean_degree: f64,
}

/// Undirected weighted graph over dataset users (plus any dongle nodes).
#[derive(Clone, Debug, PartialEq)]
pub struct MentionGraph {
    ids: Vec<String>,
    index: HashMap<String, usize>,
    kinds: Vec<NodeKind>,
    /// Neighbours sorted by index; each edge is stored at both ends.
    adj: Vec<Vec<(usize, f64)>>,
    mode: EdgeMode,
}

impl MentionGraph {
    /// Graph over `nodes` with no edges.
    pub fn empty(nodes: &[String], mode: EdgeMode) -> Result<Self> {
        let mut index = HashMap::with_capacity(nodes.len());
        for (i, id) in nodes.iter().enumerate() {
            if index.insert(id.clone(), i).is_some() {
                return Err(Error::Validation(format!("duplicate graph node {id:?}")));
            }
        }
        Ok(MentionGraph {
            ids: nodes.to_vec(),
            index,
            kinds: vec![NodeKind::User; nodes.len()],
            adj: vec![Vec::new(); nodes.len()],
            mode,
        })
    }

    /// Builds a graph from `(u, v, weight)` triples; repeated pairs add up.
    pub fn from_weighted_edges(
        nodes: &[String],
        mode: EdgeMode,
        edges: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self> {
        let mut g = Self::empty(nodes, mode)?;
        let mut acc: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for (u, v, w) in edges {
            if u >= nodes.len() || v >= nodes.len() {
                return Err(Error::Validation(format!("edge ({u}, {v}) references a missing node")));
            }
            if !w.is_finite() || w <= 0.0 {
                return Err(Error::Validation(format!("edge ({u}, {v}) has invalid weight {w}")));
            }
            if u != v {
                *acc.entry((u.min(v), u.max(v))).or_insert(0.0) += w;
            }
        }
        for ((u, v), w) in acc {
            g.adj[u].push((v, w));
            g.adj[v].push((u, w));
        }
        for list in &mut g.adj {
            list.sort_by_key(|&(n, _)| n);
        }
        Ok(g)
    }

    pub fn node_count(&self) -> usize {
        self.ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn stats(&self) -> GraphStats {
        let n = self.node_count();
        let e = self.edge_count();
        GraphStats {
            nodes: n,
            edges: e,
            mean_degree: if n == 0 { 0.0 } else { 2.0 * e as f64 / n as f64 },
        }
    }

    pub fn mode(&self) -> EdgeMode {
        self.mode
    }

    pub fn id(&self, v: usize) -> &str {
        &self.ids[v]
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn kind(&self, v: usize) -> NodeKind {
        self.kinds[v]
    }

    pub fn neighbors(&self, v: usize) -> &[(usize, f64)] {
        &self.adj[v]
    }

    pub fn weight(&self, u: usize, v: usize) -> Option<f64> {
        self.adj[u]
            .binary_search_by_key(&v, |&(n, _)| n)
            .ok()
            .map(|i| self.adj[u][i].1)
    }

    /// Each undirected edge once, as `(u, v, w)` with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().filter(move |&&(v, _)| v > u).map(move |&(v, w)| (u, v, w)))
    }

    /// Appends a dongle node joined to `of` by a single edge. Returns the new
    /// node's index.
    pub fn add_dongle(&mut self, of: usize, weight: f64) -> Result<usize> {
        if of >= self.node_count() || self.kinds[of] != NodeKind::User {
            return Err(Error::Validation(format!("dongle target {of} is not a user node")));
        }
        if !weight.is_finite() || weight <= 0.0 {
            return Err(Error::Validation(format!("dongle weight must be positive, got {weight}")));
        }
        let id = format!("dongle:{}", self.ids[of]);
        let d = self.ids.len();
        if self.index.insert(id.clone(), d).is_some() {
            return Err(Error::Validation(format!("user {} already has a dongle", self.ids[of])));
        }
        self.ids.push(id);
        self.kinds.push(NodeKind::Dongle { of });
        self.adj.push(vec![(of, weight)]);
        self.adj[of].push((d, weight));
        Ok(d)
    }

    /// Edge list as `u_id \t v_id \t weight`, one line per undirected edge
    /// with `u_id < v_id`, lines sorted.
    pub fn to_edge_list(&self) -> String {
        let mut lines: Vec<(&str, &str, f64)> = self
            .edges()
            .map(|(u, v, w)| {
                let (a, b) = (self.ids[u].as_str(), self.ids[v].as_str());
                if a <= b { (a, b, w) } else { (b, a, w) }
            })
            .collect();
        lines.sort_by(|x, y| (x.0, x.1).cmp(&(y.0, y.1)));
        let mut out = String::new();
        for (a, b, w) in lines {
            out.push_str(&format!("{a}\t{b}\t{w}\n"));
        }
        out
    }

    /// Parses [`MentionGraph::to_edge_list`] output over the given nodes.
    pub fn from_edge_list(nodes: &[String], mode: EdgeMode, input: &str) -> Result<Self> {
        let index: HashMap<&str, usize> = nodes.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
        let mut edges = Vec::new();
        for (i, line) in input.lines().enumerate() {
            if line.is_empty() {
                continue;
            }
            let parse_err = |message: String| Error::Parse { line: i + 1, message };
            let f: Vec<&str> = line.split('\t').collect();
            if f.len() != 3 {
                return Err(parse_err(format!("expected 3 fields, found {}", f.len())));
            }
            let u = *index.get(f[0]).ok_or_else(|| parse_err(format!("unknown node {:?}", f[0])))?;
            let v = *index.get(f[1]).ok_or_else(|| parse_err(format!("unknown node {:?}", f[1])))?;
            let w: f64 = f[2].parse().map_err(|_| parse_err(format!("bad weight {:?}", f[2])))?;
            edges.push((u, v, w));
        }
        Self::from_weighted_edges(nodes, mode, edges)
    }

    pub fn save_edge_list(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_edge_list()).map_err(|e| Error::io(path, e))
    }
}

/// Collapsed graph over `nodes`. Only the mentions of users in `nodes` are
/// read; handles outside `nodes` are intermediates.
pub fn build_collapsed_graph(
    table: &RawMentionTable,
    nodes: &[String],
    threshold: Threshold,
    mode: EdgeMode,
) -> Result<MentionGraph> {
    let empty = MentionGraph::empty(nodes, mode)?;
    let index = &empty.index;
    let mut pair_weight: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut mentioners: BTreeMap<&str, BTreeSet<usize>> = BTreeMap::new();

    for (u, id) in nodes.iter().enumerate() {
        for h in table.mentions_of(id) {
            match index.get(h.as_str()) {
                Some(&v) if v == u => {}
                Some(&v) => *pair_weight.entry((u.min(v), u.max(v))).or_insert(0.0) += 1.0,
                None => {
                    mentioners.entry(h.as_str()).or_default().insert(u);
                }
            }
        }
    }

    for users in mentioners.values() {
        if threshold.is_celebrity(users.len()) {
            continue;
        }
        let users: Vec<usize> = users.iter().copied().collect();
        for (i, &a) in users.iter().enumerate() {
            for &b in &users[i + 1..] {
                *pair_weight.entry((a, b)).or_insert(0.0) += 1.0;
            }
        }
    }

    MentionGraph::from_weighted_edges(
        nodes,
        mode,
        pair_weight.into_iter().map(|((u, v), w)| {
            let w = match mode {
                EdgeMode::Binary => 1.0,
                EdgeMode::Weighted => w,
            };
            (u, v, w)
        }),
    )
}

/// Edge count of the collapsed graph at each threshold, in input order.
pub fn sweep_threshold(
    table: &RawMentionTable,
    nodes: &[String],
    thresholds: &[Threshold],
) -> Result<Vec<(Threshold, usize)>> {
    if thresholds.is_empty() {
        return Err(Error::Config("no thresholds to sweep".into()));
    }
    thresholds
        .iter()
        .map(|&t| Ok((t, build_collapsed_graph(table, nodes, t, EdgeMode::Binary)?.edge_count())))
        .collect()
}
