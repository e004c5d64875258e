//! The support-completing prior, the mixed family and the extreme prior on FIX-D.

use robusthedge::arbitrage::{na_prior, PatternFamily};
use robusthedge::constructions::{build_phat, build_ptilde_family, build_ptilde_measure, hull_membership_prior, ptilde_weights};
use robusthedge::fixtures::fix_d;
use robusthedge::model::DEFAULT_CAP;
use robusthedge::pricing::{price_mono, price_quasi_sure};
use robusthedge::rational::{format_rational, ratio};
use robusthedge::supports::{supports_match, SupportFamily};

fn main() -> robusthedge::Result<()> {
    let (model, claim) = fix_d(0);
    for node in model.lattice().non_terminal_nodes() {
        let w: Vec<String> = ptilde_weights(&model, &node).iter().map(format_rational).collect();
        println!("p~ weights at {:?}: {w:?}", model.key(&node));
    }
    let pt = build_ptilde_measure(&model);
    let family = SupportFamily::from_priors(&model, std::slice::from_ref(&pt))?;
    println!("P~ supports match: {}", supports_match(&model, &family, &SupportFamily::QuasiSure).matches);
    println!("P~ arbitrage-free: {}", na_prior(&model, &pt)?.holds);
    println!("P~ in hull: {}", hull_membership_prior(&model, &pt)?.all);

    let mixed = build_ptilde_family(&model, &ratio(1, 3))?;
    println!("qs price, original {} / mixed family {}",
        format_rational(&price_quasi_sure(&model, &claim)?.price),
        format_rational(&price_quasi_sure(&mixed, &claim)?.price));

    let phat = build_phat(&model, &PatternFamily::q_star(&model, DEFAULT_CAP)?, &claim)?;
    for (_, v) in &phat.representatives {
        println!("  representative price {}", format_rational(v));
    }
    println!("P^ price {}", format_rational(&price_mono(&model, &phat.prior, &claim)?.price));
    Ok(())
}
