//! Prices of the truncated digital market climb towards 1/2 without reaching it.

use robusthedge::fixtures::truncation_report;
use robusthedge::rational::{format_rational, to_f64};

fn main() -> robusthedge::Result<()> {
    println!("{:>4}  {:>8}  {:>8}  {:>8}  {:>8}", "N", "qs", "single", "dual", "float");
    for row in truncation_report(&[1, 2, 5, 10, 20, 50])? {
        println!(
            "{:>4}  {:>8}  {:>8}  {:>8}  {:>8.5}",
            row.n,
            format_rational(&row.quasi_sure),
            format_rational(&row.best_single),
            format_rational(&row.dual),
            to_f64(&row.quasi_sure)
        );
    }
    Ok(())
}
