//! Loading a hand-written market file, pricing it and writing it back.

use robusthedge::io::{load_market_and_claim, market_to_json};
use robusthedge::pricing::price_quasi_sure;
use robusthedge::rational::format_rational;

const MARKET: &str = r#"{
  "horizon": 1,
  "assets": 1,
  "periods": [{"outcomes": ["up", "mid", "down"]}],
  "prices": {"": ["10"], "up": ["12"], "mid": ["10"], "down": ["9"]},
  "root_generators": [
    {"up": "1/2", "mid": "0", "down": "1/2"},
    {"up": "0", "mid": "1", "down": "0"}
  ],
  "claim": {"up": "2", "mid": "0", "down": "0"}
}"#;

fn main() -> robusthedge::Result<()> {
    let (model, claim) = load_market_and_claim(MARKET.as_bytes())?;
    let claim = claim.expect("file carries a claim");
    println!("call price {}", format_rational(&price_quasi_sure(&model, &claim)?.price));
    let text = market_to_json(&model, Some(&claim));
    let (again, _) = load_market_and_claim(text.as_bytes())?;
    assert_eq!(again, model);
    println!("{text}");
    Ok(())
}
