//! The dual problem over martingale measures and the equivalent-measure gap.

use robusthedge::duality::{dual_sup, dual_sup_equivalent};
use robusthedge::fixtures::fix_b;
use robusthedge::pricing::price_quasi_sure;
use robusthedge::rational::format_rational;

fn main() -> robusthedge::Result<()> {
    let (model, claim) = fix_b(2)?;
    let dual = dual_sup(&model, &claim)?;
    println!("dual value {}", format_rational(&dual.value));
    println!("primal value {}", format_rational(&price_quasi_sure(&model, &claim)?.price));
    for (leaf, w) in &dual.measure.leaf_weights {
        println!("  M({}) = {}", model.key(leaf), format_rational(w));
    }
    let ev = dual_sup_equivalent(&model, &claim, &[1, 10, 100, 1000])?;
    println!("c = {}", format_rational(&ev.constant));
    for row in &ev.rows {
        println!("  n = {:>4}: E[H] = {}, gap = {}", row.n, format_rational(&row.expectation), format_rational(&row.gap));
    }
    Ok(())
}
