//! Super-replicating a digital claim in the one-period binomial market.

use robusthedge::fixtures::fix_a;
use robusthedge::pricing::{price_quasi_sure, superhedge_shortfall};
use robusthedge::rational::{format_point, format_rational};
use robusthedge::supports::reachable;

fn main() -> robusthedge::Result<()> {
    let (model, claim) = fix_a();
    let report = price_quasi_sure(&model, &claim)?;
    println!("price: {}", format_rational(&report.price));
    for (node, h) in &report.strategy.positions {
        println!("hedge at {:?}: {}", model.key(node), format_point(h));
    }
    let leaves = reachable(&model).leaves();
    for leaf in &leaves {
        let wealth = report.strategy.terminal_wealth(&model, leaf).expect("position on every path");
        println!(
            "{:>4}: wealth {} vs payoff {}",
            model.key(leaf),
            format_rational(&wealth),
            format_rational(claim.value(leaf))
        );
    }
    assert!(superhedge_shortfall(&model, &claim, &report.strategy, &leaves).is_none());
    Ok(())
}
