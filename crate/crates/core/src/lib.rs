// SPDX-License-Identifier: Apache-2.0

//! Geolocation of social-network users by label propagation.
//!
//! Users are nodes of a *collapsed* @-mention graph: two dataset users are
//! joined when one mentions the other or both mention the same outside
//! handle. Handles mentioned by too many distinct users ("celebrities") are
//! dropped before collapsing. Training users seed a Modified Adsorption
//! solve whose labels are k-d tree cells over training coordinates; a
//! predicted cell decodes to the median training coordinate inside it.
//! Test users can additionally carry a text-classifier prior through a
//! seeded "dongle" node hanging off them.
//!
//! The stages map onto modules:
//!
//! - [`dataset`]: user records, TSV/JSONL ingestion, mention extraction and
//!   a synthetic generator with planted geography and celebrities.
//! - [`discretizer`]: k-d tree cells and cell-to-point decoding.
//! - [`graph`]: collapsed mention graph with celebrity filtering.
//! - [`mad`]: the Modified Adsorption solver, dongle attachment and
//!   prediction.
//! - [`textprior`]: l1-regularised multinomial logistic regression over
//!   bag-of-words features.
//! - [`eval`]: haversine distances and Acc@161 / mean / median error.
//! - [`pipeline`]: end-to-end runs, threshold sweeps and grid tuning with
//!   reproducible artifacts.

pub mod config;
pub mod dataset;
pub mod discretizer;
pub mod error;
pub mod eval;
pub mod graph;
pub mod mad;
pub mod pipeline;
pub mod textprior;

pub use dataset::{Dataset, GeoPoint, Split, UserRecord};
pub use discretizer::{CellId, Discretizer};
pub use error::{Error, Result};
pub use eval::{evaluate, haversine_km, Metrics};
pub use graph::{build_collapsed_graph, EdgeMode, MentionGraph, RawMentionTable, Threshold};
pub use mad::{attach_dongles, predict, run_mad, MadParams, SeedSet, SolveResult};
pub use textprior::{TextModel, Vocabulary};
