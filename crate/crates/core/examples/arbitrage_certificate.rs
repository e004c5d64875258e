//! Detecting arbitrage and checking the separating certificate by hand.

use robusthedge::arbitrage::{failure_set_qs, global_na_qs, verify_certificate};
use robusthedge::fixtures::{fix_c, inject_arbitrage, random_instance, seeded_rng, RandomBounds};
use robusthedge::rational::format_point;
use robusthedge::supports::support_qs;

fn main() -> robusthedge::Result<()> {
    let (model, _) = fix_c();
    let verdict = global_na_qs(&model)?;
    let node = verdict.node.clone().expect("arbitrage market");
    let h = verdict.certificate.clone().expect("certificate");
    let points = support_qs(&model, &node).points;
    println!("fails at {:?} with h = {}", model.key(&node), format_point(&h));
    for y in &points {
        println!("  increment {} gains {}", format_point(y), format_point(&[robusthedge::rational::dot(&h, y)]));
    }
    assert!(verify_certificate(&points, &h));

    let mut rng = seeded_rng(3);
    let (clean, _) = random_instance(&mut rng, &RandomBounds::STANDARD);
    let (broken, at) = inject_arbitrage(&mut rng, &clean);
    println!("injected at {:?}", broken.key(&at));
    let failing: Vec<String> = failure_set_qs(&broken)?.iter().map(|n| broken.key(n)).collect();
    println!("nodes failing local NA: {failing:?}");
    Ok(())
}
