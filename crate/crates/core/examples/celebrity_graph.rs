// SPDX-License-Identifier: Apache-2.0

//! Builds collapsed mention graphs from a hand-written mention table and
//! shows how the celebrity threshold prunes them.

use geoprop::graph::sweep_threshold;
use geoprop::{build_collapsed_graph, EdgeMode, RawMentionTable, Threshold};

fn main() -> geoprop::Result<()> {
    let users: Vec<String> = ["ann", "bob", "cat", "dan", "eve"].iter().map(|s| s.to_string()).collect();
    let mut table = RawMentionTable::new();
    // everyone mentions a popular account; two pairs share a local venue
    for u in &users {
        table.push(u, "popstar");
    }
    table.push("ann", "corner_cafe");
    table.push("bob", "corner_cafe");
    table.push("dan", "eve");
    table.push("eve", "dan");

    for t in [Threshold::AtMost(2), Threshold::None] {
        let g = build_collapsed_graph(&table, &users, t, EdgeMode::Weighted)?;
        println!("T = {t}: {:?}", g.stats());
        print!("{}", g.to_edge_list());
    }
    let ts: Vec<Threshold> = (1..=6).map(Threshold::AtMost).collect();
    for (t, edges) in sweep_threshold(&table, &users, &ts)? {
        println!("T = {t}: {edges} edges");
    }
    Ok(())
}
