// SPDX-License-Identifier: Apache-2.0

mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use geoprop::{run_mad, EdgeMode, MadParams, MentionGraph, SeedSet};

fn ids(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("v{i}")).collect()
}

fn tight() -> MadParams {
    MadParams {
        tolerance: 1e-13,
        max_sweeps: 1_000_000,
        ..MadParams::default()
    }
}

fn random_case(seed: u64) -> (MentionGraph, SeedSet, Vec<(usize, usize, f64)>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(3..=30);
    let m = rng.random_range(1..=4);
    let edges = common::random_graph(&mut rng, n, 0.2);
    let g = MentionGraph::from_weighted_edges(&ids(n), EdgeMode::Weighted, edges.iter().copied()).unwrap();
    let mut seeds = SeedSet::new(m);
    for v in 0..n {
        if rng.random_bool(0.3) {
            let mut label = vec![0.0; m];
            label[rng.random_range(0..m)] = 1.0;
            seeds.insert(&format!("v{v}"), label, 1.0).unwrap();
        }
    }
    (g, seeds, edges)
}

#[test]
fn scores_stay_in_the_unit_box() {
    for seed in 0..30 {
        let (g, seeds, _) = random_case(seed);
        let r = run_mad(&g, &seeds, &MadParams::default()).unwrap();
        for v in 0..g.node_count() {
            let row = r.row(v);
            assert!(row.iter().all(|&x| (0.0..=1.0 + 1e-12).contains(&x)), "seed {seed}, node {v}: {row:?}");
            assert!(row.iter().sum::<f64>() <= 1.0 + 1e-9);
        }
    }
}

#[test]
fn dominant_prior_pins_seeds() {
    for seed in 0..20 {
        let (g, seeds, _) = random_case(seed);
        let params = MadParams { mu1: 1e6, mu2: 1.0, ..tight() };
        let r = run_mad(&g, &seeds, &params).unwrap();
        for (id, s) in seeds.iter() {
            let row = r.distribution(id).unwrap();
            assert!(common::max_abs_diff(row, &s.label) <= 1e-4, "seed {seed}, node {id}");
        }
    }
}

#[test]
fn unseeded_components_stay_empty() {
    // 0-1 seeded, 2-3 a separate component
    let g = MentionGraph::from_weighted_edges(&ids(4), EdgeMode::Binary, [(0, 1, 1.0), (2, 3, 1.0)]).unwrap();
    let mut seeds = SeedSet::new(2);
    seeds.insert("v0", vec![1.0, 0.0], 1.0).unwrap();
    let r = run_mad(&g, &seeds, &tight()).unwrap();
    assert!(r.row(1)[0] > 0.0);
    assert_eq!(r.row(2), &[0.0, 0.0]);
    assert_eq!(r.row(3), &[0.0, 0.0]);
    assert_eq!(r.unresolved, vec!["v2".to_string(), "v3".to_string()]);
}

#[test]
fn uniform_weight_scaling_matches_scaled_smoothness() {
    for seed in 0..20 {
        let (g, seeds, edges) = random_case(seed);
        for scale in [0.5, 2.0, 4.0] {
            let scaled =
                MentionGraph::from_weighted_edges(g.ids(), EdgeMode::Weighted, edges.iter().map(|&(u, v, w)| (u, v, w * scale)))
                    .unwrap();
            let base = MadParams { mu2: 0.1 * scale, ..tight() };
            let a = run_mad(&g, &seeds, &base).unwrap();
            let b = run_mad(&scaled, &seeds, &MadParams { mu2: 0.1, ..tight() }).unwrap();
            for v in 0..g.node_count() {
                assert!(common::max_abs_diff(a.row(v), b.row(v)) <= 1e-9, "seed {seed}, scale {scale}, node {v}");
            }
        }
    }
}

#[test]
fn solution_matches_dense_oracle_with_partial_confidence() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let n = 12;
    let edges = common::random_graph(&mut rng, n, 0.3);
    let g = MentionGraph::from_weighted_edges(&ids(n), EdgeMode::Weighted, edges.iter().copied()).unwrap();
    let mut seeds = SeedSet::new(3);
    let mut labels = vec![vec![0.0; 3]; n];
    let mut conf = vec![0.0; n];
    for (v, (l, c)) in [(0, ([0.5, 0.5, 0.0], 0.25)), (5, ([0.0, 0.2, 0.8], 1.0)), (9, ([1.0, 0.0, 0.0], 0.6))] {
        labels[v] = l.to_vec();
        conf[v] = c;
        seeds.insert(&format!("v{v}"), l.to_vec(), c).unwrap();
    }
    let params = MadParams { mu2: 0.7, ..tight() };
    let r = run_mad(&g, &seeds, &params).unwrap();
    let dense = common::dense_mad(n, &edges, &labels, &conf, params.mu1, params.mu2);
    for (v, want) in dense.iter().enumerate() {
        assert!(common::max_abs_diff(r.row(v), want) <= 1e-8);
    }
}
