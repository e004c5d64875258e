//! Best single-prior price over the arbitrage-free members of a family.

use robusthedge::arbitrage::{na_prior, PatternFamily};
use robusthedge::fixtures::fix_b;
use robusthedge::model::{pure_selections, DEFAULT_CAP};
use robusthedge::pricing::{price_lower, price_mono, price_quasi_sure};
use robusthedge::rational::format_rational;

fn main() -> robusthedge::Result<()> {
    let (model, claim) = fix_b(4)?;
    for (k, p) in pure_selections(&model, DEFAULT_CAP)?.iter().enumerate() {
        let holds = na_prior(&model, p)?.holds;
        println!("P_{}: NA {holds}, price {}", k + 1, format_rational(&price_mono(&model, p, &claim)?.price));
    }
    let family = PatternFamily::q_star(&model, DEFAULT_CAP)?;
    let lower = price_lower(&model, &family, &claim)?;
    println!("{} patterns, best member price {}", family.pattern_count(&model), format_rational(&lower.price));
    println!("quasi-sure price {}", format_rational(&price_quasi_sure(&model, &claim)?.price));
    Ok(())
}
