// SPDX-License-Identifier: Apache-2.0

//! Trains the l1-regularised text classifier on a toy corpus and prints the
//! prior for unseen text.

use geoprop::textprior::{train_text_model, TextParams};
use geoprop::CellId;

fn main() -> geoprop::Result<()> {
    let texts = [
        "heading to the bay for clam chowder @friend",
        "fog over the bay again, sourdough for lunch",
        "cable cars and sourdough http://example.com",
        "bbq brisket and tacos tonight",
        "brisket smoke, tacos and live music",
        "live music downtown then tacos",
    ];
    let cells = [CellId(0), CellId(0), CellId(0), CellId(1), CellId(1), CellId(1)];
    let params = TextParams { l1_strength: 1e-3, ..TextParams::default() };
    let out = train_text_model(&texts, &cells, 2, &params)?;
    println!("{} features, {} steps, {:.2} of weights zero", out.model.num_features(), out.objective_trace.len(), out.model.zero_fraction());
    for q in ["sourdough by the bay", "tacos and brisket", "no known words"] {
        println!("{q:?}: {:.3?}", out.model.predict_text(q));
    }
    Ok(())
}
