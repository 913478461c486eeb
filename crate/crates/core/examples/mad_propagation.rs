// SPDX-License-Identifier: Apache-2.0

//! Propagates two labels along a path graph and prints the converged
//! scores and objective trace.

use geoprop::{run_mad, CellId, EdgeMode, MadParams, MentionGraph, SeedSet};

fn main() -> geoprop::Result<()> {
    let ids: Vec<String> = (0..6).map(|i| format!("v{i}")).collect();
    let edges = (0..5).map(|i| (i, i + 1, 1.0));
    let g = MentionGraph::from_weighted_edges(&ids, EdgeMode::Binary, edges)?;

    let mut seeds = SeedSet::new(2);
    seeds.insert_one_hot("v0", CellId(0))?;
    seeds.insert_one_hot("v5", CellId(1))?;

    let r = run_mad(&g, &seeds, &MadParams::default())?;
    println!("converged: {} after {} sweeps", r.converged, r.sweeps_run);
    for v in 0..g.node_count() {
        println!("{}: {:.4?} -> {:?}", g.id(v), r.row(v), r.argmax(v));
    }
    print!("{}", r.objective_csv());
    Ok(())
}
