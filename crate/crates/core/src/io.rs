//! Market-file ingestion and emission (UTF-8 JSON).
//!
//! ```json
//! {
//!   "horizon": 1, "assets": 1,
//!   "periods": [{"outcomes": ["u", "d"]}],
//!   "prices": {"": ["1"], "u": ["2"], "d": ["0"]},
//!   "root_generators": [{"u": "1/2", "d": "1/2"}],
//!   "kernels": {},
//!   "claim": {"u": "1", "d": "0"}
//! }
//! ```
//!
//! Outcomes absent from a weight map carry weight zero.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Claim, Disintegration, Kernel, MarketModel, Node, ProductPrior, ScenarioLattice};
use crate::rational::{format_rational, parse_rational, Rational};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PeriodRepr {
    pub outcomes: Vec<String>,
}

type WeightMap = BTreeMap<String, String>;

/// Raw, unvalidated shape of a market file.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MarketFile {
    pub horizon: usize,
    pub assets: usize,
    pub periods: Vec<PeriodRepr>,
    pub prices: BTreeMap<String, Vec<String>>,
    pub root_generators: Vec<WeightMap>,
    #[serde(default)]
    pub kernels: BTreeMap<String, Vec<WeightMap>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub claim: Option<BTreeMap<String, String>>,
}

fn rational_at(path: &str, s: &str) -> Result<Rational> {
    parse_rational(s).map_err(|e| match e {
        Error::Parse(msg) => Error::validation(path, msg),
        other => other,
    })
}

fn node_at(lattice: &ScenarioLattice, path: &str, key: &str) -> Result<Node> {
    lattice
        .parse_key(key)
        .ok_or_else(|| Error::validation(path, format!("unknown node key {key:?}")))
}

fn kernel_from_map(lattice: &ScenarioLattice, node: &Node, path: &str, map: &WeightMap) -> Result<Kernel> {
    let labels = lattice.outcomes(node.depth() + 1);
    for label in map.keys() {
        if !labels.contains(label) {
            return Err(Error::validation(path, format!("unknown outcome {label:?}")));
        }
    }
    let weights = labels
        .iter()
        .map(|l| match map.get(l) {
            Some(s) => rational_at(&format!("{path}.{l}"), s),
            None => Ok(Rational::from_integer(0.into())),
        })
        .collect::<Result<Vec<_>>>()?;
    Kernel::new(weights).map_err(|e| match e {
        Error::Validation { message, .. } => Error::validation(path, message),
        other => other,
    })
}

fn kernel_to_map(lattice: &ScenarioLattice, node: &Node, kernel: &Kernel) -> WeightMap {
    lattice
        .outcomes(node.depth() + 1)
        .iter()
        .zip(kernel.weights())
        .map(|(l, w)| (l.clone(), format_rational(w)))
        .collect()
}

impl MarketFile {
    pub fn parse(bytes: &[u8]) -> Result<Self> {
        serde_json::from_slice(bytes).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn into_model(self) -> Result<(MarketModel, Option<Claim>)> {
        if self.horizon != self.periods.len() {
            return Err(Error::validation(
                "horizon",
                format!("horizon {} but {} periods", self.horizon, self.periods.len()),
            ));
        }
        let lattice = ScenarioLattice::new(self.periods.into_iter().map(|p| p.outcomes).collect())?;

        let mut prices = BTreeMap::new();
        for (key, values) in &self.prices {
            let path = format!("prices[{key:?}]");
            let node = node_at(&lattice, &path, key)?;
            let v = values
                .iter()
                .enumerate()
                .map(|(i, s)| rational_at(&format!("{path}[{i}]"), s))
                .collect::<Result<Vec<_>>>()?;
            prices.insert(node, v);
        }

        let mut generators = BTreeMap::new();
        let root = Node::root();
        let root_gens = self
            .root_generators
            .iter()
            .enumerate()
            .map(|(g, m)| kernel_from_map(&lattice, &root, &format!("root_generators[{g}]"), m))
            .collect::<Result<Vec<_>>>()?;
        generators.insert(root.clone(), root_gens);
        for (key, maps) in &self.kernels {
            let path = format!("kernels[{key:?}]");
            let node = node_at(&lattice, &path, key)?;
            if node.is_root() {
                return Err(Error::validation(path, "root kernels belong in root_generators"));
            }
            if lattice.is_terminal(&node) {
                return Err(Error::validation(path, "terminal nodes carry no kernels"));
            }
            let gens = maps
                .iter()
                .enumerate()
                .map(|(g, m)| kernel_from_map(&lattice, &node, &format!("{path}[{g}]"), m))
                .collect::<Result<Vec<_>>>()?;
            generators.insert(node, gens);
        }

        let model = MarketModel::new(lattice, self.assets, prices, generators)?;

        let claim = match self.claim {
            None => None,
            Some(map) => Some(claim_from_map(&model, &map)?),
        };
        Ok((model, claim))
    }

    pub fn from_model(model: &MarketModel, claim: Option<&Claim>) -> Self {
        let lattice = model.lattice();
        let prices = model
            .prices()
            .values()
            .iter()
            .map(|(n, v)| (lattice.key(n), v.iter().map(format_rational).collect()))
            .collect();
        let mut kernels = BTreeMap::new();
        let mut root_generators = Vec::new();
        for (node, ks) in model.kernel_sets() {
            let maps: Vec<WeightMap> = ks
                .generators
                .iter()
                .map(|k| kernel_to_map(lattice, node, k))
                .collect();
            if node.is_root() {
                root_generators = maps;
            } else {
                kernels.insert(lattice.key(node), maps);
            }
        }
        MarketFile {
            horizon: model.horizon(),
            assets: model.assets(),
            periods: lattice
                .periods()
                .iter()
                .map(|o| PeriodRepr { outcomes: o.clone() })
                .collect(),
            prices,
            root_generators,
            kernels,
            claim: claim.map(|c| claim_to_map(model, c)),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("market file serializes")
    }
}

fn claim_from_map(model: &MarketModel, map: &BTreeMap<String, String>) -> Result<Claim> {
    let mut payoff = BTreeMap::new();
    for (key, s) in map {
        let path = format!("claim[{key:?}]");
        let node = node_at(model.lattice(), &path, key)?;
        payoff.insert(node, rational_at(&path, s)?);
    }
    Claim::new(model.lattice(), payoff)
}

fn claim_to_map(model: &MarketModel, claim: &Claim) -> BTreeMap<String, String> {
    claim
        .payoff()
        .iter()
        .map(|(n, v)| (model.key(n), format_rational(v)))
        .collect()
}

/// Parses and validates a market file, ignoring any claim it carries.
pub fn load_market(bytes: &[u8]) -> Result<MarketModel> {
    Ok(load_market_and_claim(bytes)?.0)
}

pub fn load_market_and_claim(bytes: &[u8]) -> Result<(MarketModel, Option<Claim>)> {
    MarketFile::parse(bytes)?.into_model()
}

pub fn market_to_json(model: &MarketModel, claim: Option<&Claim>) -> String {
    MarketFile::from_model(model, claim).to_json()
}

/// A claim file: JSON map leaf-key → rational string.
pub fn load_claim(model: &MarketModel, bytes: &[u8]) -> Result<Claim> {
    let map: BTreeMap<String, String> =
        serde_json::from_slice(bytes).map_err(|e| Error::Parse(e.to_string()))?;
    claim_from_map(model, &map)
}

pub fn claim_to_json(model: &MarketModel, claim: &Claim) -> serde_json::Value {
    serde_json::to_value(claim_to_map(model, claim)).expect("claim serializes")
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PriorRepr {
    mixtures: BTreeMap<String, Vec<String>>,
}

pub fn prior_to_json(model: &MarketModel, prior: &ProductPrior) -> serde_json::Value {
    let repr = PriorRepr {
        mixtures: prior
            .mixtures
            .iter()
            .map(|(n, w)| (model.key(n), w.iter().map(format_rational).collect()))
            .collect(),
    };
    serde_json::to_value(repr).expect("prior serializes")
}

/// Reads `{"mixtures": {node-key: [weights over generators]}}`.
pub fn prior_from_json(model: &MarketModel, bytes: &[u8]) -> Result<ProductPrior> {
    let repr: PriorRepr = serde_json::from_slice(bytes).map_err(|e| Error::Parse(e.to_string()))?;
    let mut mixtures = BTreeMap::new();
    for (key, ws) in &repr.mixtures {
        let path = format!("mixtures[{key:?}]");
        let node = node_at(model.lattice(), &path, key)?;
        let w = ws
            .iter()
            .enumerate()
            .map(|(i, s)| rational_at(&format!("{path}[{i}]"), s))
            .collect::<Result<Vec<_>>>()?;
        mixtures.insert(node, w);
    }
    let prior = ProductPrior { mixtures };
    prior.validate(model)?;
    Ok(prior)
}

/// The single-generator market whose only prior is `measure`.
pub fn single_prior_model(model: &MarketModel, measure: &Disintegration) -> Result<MarketModel> {
    measure.validate(model)?;
    model.with_generators(
        measure
            .kernels
            .iter()
            .map(|(n, k)| (n.clone(), vec![k.clone()]))
            .collect(),
    )
}

pub fn leaf_weights_to_json(model: &MarketModel, weights: &BTreeMap<Node, Rational>) -> serde_json::Value {
    serde_json::to_value(
        weights
            .iter()
            .map(|(n, w)| (model.key(n), format_rational(w)))
            .collect::<BTreeMap<_, _>>(),
    )
    .expect("weights serialize")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{fix_a, fix_b, fix_d};

    const FIX_A: &str = r#"{
        "horizon": 1, "assets": 1,
        "periods": [{"outcomes": ["u", "d"]}],
        "prices": {"": ["1"], "u": ["2"], "d": ["0"]},
        "root_generators": [{"u": "1/2", "d": "1/2"}],
        "kernels": {},
        "claim": {"u": "1", "d": "0"}
    }"#;

    #[test]
    fn loads_fix_a() {
        let (m, claim) = load_market_and_claim(FIX_A.as_bytes()).unwrap();
        assert_eq!(m.horizon(), 1);
        assert_eq!(m.assets(), 1);
        assert_eq!(m.root_generators().len(), 1);
        let (expected, expected_claim) = fix_a();
        assert_eq!(m, expected);
        assert_eq!(claim.unwrap(), expected_claim);
    }

    #[test]
    fn loads_fix_b2_file() {
        let (b, h) = fix_b(2).unwrap();
        let text = market_to_json(&b, Some(&h));
        let m = load_market(text.as_bytes()).unwrap();
        assert_eq!(m.lattice().outcomes(1).len(), 3);
        assert_eq!(m.root_generators().len(), 2);
    }

    #[test]
    fn rejects_weights_not_summing_to_one() {
        let bad = FIX_A.replace(r#"{"u": "1/2", "d": "1/2"}"#, r#"{"u": "1/2", "d": "1/3"}"#);
        match load_market(bad.as_bytes()) {
            Err(Error::Validation { path, .. }) => assert_eq!(path, "root_generators[0]"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_missing_price() {
        let bad = FIX_A.replace(r#", "d": ["0"]}"#, "}");
        match load_market(bad.as_bytes()) {
            Err(Error::Validation { path, .. }) => assert_eq!(path, r#"prices["d"]"#),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_empty_generators_and_zero_denominator() {
        let empty = FIX_A.replace(r#"[{"u": "1/2", "d": "1/2"}]"#, "[]");
        assert!(matches!(
            load_market(empty.as_bytes()),
            Err(Error::Validation { ref path, .. }) if path == "root_generators"
        ));
        let zero = FIX_A.replace(r#""u": ["2"]"#, r#""u": ["2/0"]"#);
        assert!(matches!(
            load_market(zero.as_bytes()),
            Err(Error::Validation { ref path, .. }) if path == r#"prices["u"][0]"#
        ));
    }

    #[test]
    fn rejects_malformed_json() {
        assert!(matches!(load_market(b"{not json"), Err(Error::Parse(_))));
        assert!(matches!(load_market(b"{\"horizon\": 1}"), Err(Error::Parse(_))));
    }

    #[test]
    fn round_trip_fix_d() {
        let (m, h) = fix_d(3);
        let text = market_to_json(&m, Some(&h));
        let (m2, h2) = load_market_and_claim(text.as_bytes()).unwrap();
        assert_eq!(m, m2);
        assert_eq!(h2.unwrap(), h);
        assert_eq!(market_to_json(&m2, Some(&h)), text);
    }

    #[test]
    fn prior_json_round_trip() {
        let (m, _) = fix_d(0);
        let prior = ProductPrior::uniform(&m);
        let v = prior_to_json(&m, &prior);
        let back = prior_from_json(&m, v.to_string().as_bytes()).unwrap();
        assert_eq!(back, prior);
    }
}
