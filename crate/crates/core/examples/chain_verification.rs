//! Checking every price equality on one market and on a random batch.

use robusthedge::fixtures::{fix_d, RandomBounds};
use robusthedge::model::DEFAULT_CAP;
use robusthedge::verify::{verify_chain, verify_random};

fn main() -> robusthedge::Result<()> {
    let (model, claim) = fix_d(1);
    let report = verify_chain(&model, &claim, DEFAULT_CAP)?;
    println!("value {}", report.value);
    for link in &report.links {
        println!("{} {}", if link.pass { "PASS" } else { "FAIL" }, link.name);
    }
    let summary = verify_random(20, 7, &RandomBounds::TINY, DEFAULT_CAP)?;
    println!("random: {} passed, {} failed, {} arbitrage markets skipped",
        summary.passed, summary.failed, summary.rejected_no_arbitrage);
    Ok(())
}
