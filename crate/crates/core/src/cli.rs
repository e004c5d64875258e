//! The `robusthedge` command line.

use std::fs;
use std::io::{Read, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::arbitrage::{global_na_qs, na_prior, NaVerdict, PatternFamily};
use crate::constructions::{build_phat, build_ptilde_family, build_ptilde_measure, na_repair_mixture};
use crate::duality::{dual_sup, dual_sup_equivalent};
use crate::error::{Error, Result};
use crate::fixtures::{make_fixture, FixtureSpec, RandomBounds};
use crate::io::{leaf_weights_to_json, load_claim, load_market_and_claim, market_to_json, prior_from_json, prior_to_json, single_prior_model};
use crate::model::{Claim, MarketModel, Node, ProductPrior, DEFAULT_CAP};
use crate::pricing::{price_lower, price_mono, price_quasi_sure, PriceReport};
use crate::rational::{format_point, format_rational, parse_rational, Rational};
use crate::supports::{prior_tree, reachable, ReachableTree, SupportSet};
use crate::verify::{verify_chain, verify_random};

#[derive(Parser, Debug)]
#[command(name = "robusthedge", version, about = "Exact multi-prior super-replication on scenario lattices")]
pub struct Cli {
    /// Market file; `-` or absent reads standard input.
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// Destination file; `-` or absent writes standard output.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Upper bound for enumerations of selections and patterns.
    #[arg(long, global = true, env = "ROBUSTHEDGE_CAP", default_value_t = DEFAULT_CAP)]
    pub cap: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Table,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Qs,
    Mono,
    Lower,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum FamilyKind {
    /// Every member of the convex hull.
    All,
    /// Members without arbitrage.
    Qstar,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum What {
    Ptilde,
    Phat,
    Family,
    Repair,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Parse and validate a market file.
    Validate,
    /// Super-replication price.
    Price {
        #[arg(long, value_enum, default_value_t = Mode::Qs)]
        mode: Mode,
        /// `uniform`, `pure:<k>`, `ptilde` or a prior JSON file.
        #[arg(long)]
        prior: Option<String>,
        /// `model`, `call:<K>`, `digital:<K>` or a claim JSON file.
        #[arg(long)]
        claim: Option<String>,
        #[arg(long, value_enum, default_value_t = FamilyKind::Qstar)]
        family: FamilyKind,
    },
    /// No-arbitrage verdict with certificate.
    Na {
        #[arg(long)]
        prior: Option<String>,
    },
    /// Conditional supports of the next increment on the reachable tree.
    Supports {
        #[arg(long)]
        prior: Option<String>,
    },
    /// Martingale dual value, optimal measure and perturbation evidence.
    Dual {
        #[arg(long)]
        claim: Option<String>,
    },
    /// Build a prior or a derived market.
    Construct {
        #[arg(long, value_enum)]
        what: What,
        #[arg(long, default_value = "1/2")]
        lambda: String,
        #[arg(long)]
        prior: Option<String>,
        #[arg(long)]
        claim: Option<String>,
        #[arg(long, value_enum, default_value_t = FamilyKind::Qstar)]
        family: FamilyKind,
    },
    /// Write a canonical market file.
    Fixture {
        /// `A`, `B`, `C` or `D` (optionally prefixed `FIX-`).
        #[arg(long)]
        name: String,
        /// `N` for B, seed for D.
        #[arg(long)]
        param: Option<u64>,
    },
    /// Check every price equality on one market.
    VerifyChain {
        #[arg(long)]
        claim: Option<String>,
    },
    /// Check the equalities on seeded random markets.
    VerifyRandom {
        #[arg(long, default_value_t = 200)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        max_horizon: usize,
        #[arg(long, default_value_t = 4)]
        max_outcomes: usize,
        #[arg(long, default_value_t = 2)]
        max_assets: usize,
        #[arg(long, default_value_t = 3)]
        max_generators: usize,
    },
}

/// Rendered result plus exit code.
struct Output {
    json: Value,
    table: String,
    code: i32,
}

impl Output {
    fn ok(json: Value, table: String) -> Self {
        Output { json, table, code: 0 }
    }
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::NoArbitrageViolation { .. } | Error::UnboundedBelow | Error::InfeasiblePolytope | Error::NoPoint => 3,
        Error::ExplosionGuard { .. } | Error::Capacity { .. } => 4,
        _ => 2,
    }
}

fn read_input(path: &Option<PathBuf>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    match path {
        Some(p) if p.as_os_str() != "-" => {
            buf = fs::read(p).map_err(|e| Error::Parse(format!("cannot read {}: {e}", p.display())))?;
        }
        _ => {
            std::io::stdin()
                .read_to_end(&mut buf)
                .map_err(|e| Error::Parse(format!("cannot read standard input: {e}")))?;
        }
    }
    Ok(buf)
}

fn read_file(path: &str) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::Parse(format!("cannot read {path}: {e}")))
}

fn resolve_prior(model: &MarketModel, spec: Option<&str>) -> Result<ProductPrior> {
    match spec.unwrap_or("uniform") {
        "uniform" => Ok(ProductPrior::uniform(model)),
        "ptilde" => Ok(build_ptilde_measure(model)),
        s if s.starts_with("pure:") => {
            let k: usize = s[5..]
                .parse()
                .map_err(|_| Error::Parse(format!("bad generator index in `{s}`")))?;
            if let Some((n, _)) = model.kernel_sets().iter().find(|(_, ks)| k >= ks.generators.len()) {
                return Err(Error::ShapeMismatch(format!(
                    "node {:?} has fewer than {} generators",
                    model.key(n),
                    k + 1
                )));
            }
            Ok(ProductPrior::pure(model, |_| k))
        }
        path => prior_from_json(model, &read_file(path)?),
    }
}

fn resolve_claim(model: &MarketModel, embedded: Option<&Claim>, spec: Option<&str>) -> Result<Claim> {
    let strike = |s: &str| parse_rational(s);
    match spec.unwrap_or("model") {
        "model" => embedded
            .cloned()
            .ok_or_else(|| Error::validation("claim", "the market file has no claim; pass --claim")),
        s if s.starts_with("call:") => {
            let k = strike(&s[5..])?;
            Ok(Claim::from_fn(model, |_, p| (&p[0] - &k).max(Rational::from_integer(0.into()))))
        }
        s if s.starts_with("digital:") => {
            let k = strike(&s[8..])?;
            Ok(Claim::from_fn(model, |_, p| Rational::from_integer(i64::from(p[0] >= k).into())))
        }
        path => load_claim(model, &read_file(path)?),
    }
}

fn node_map(values: impl IntoIterator<Item = (String, Value)>) -> Value {
    Value::Object(values.into_iter().collect())
}

fn report_json(model: &MarketModel, r: &PriceReport) -> Value {
    json!({
        "price": format_rational(&r.price),
        "semantics": r.semantics,
        "strategy": {
            "initial_capital": format_rational(&r.strategy.initial_capital),
            "positions": node_map(r.strategy.positions.iter().map(|(n, h)| {
                (model.key(n), json!(h.iter().map(format_rational).collect::<Vec<_>>()))
            })),
        },
        "node_values": node_map(r.node_values.iter().map(|(n, v)| (model.key(n), json!(format_rational(v))))),
    })
}

fn report_table(model: &MarketModel, r: &PriceReport) -> String {
    let mut s = format!("price\t{}\n", format_rational(&r.price));
    for (n, h) in &r.strategy.positions {
        s += &format!(
            "{:<12}\tvalue {}\thedge {}\n",
            display_key(model, n),
            format_rational(&r.node_values[n]),
            format_point(h)
        );
    }
    s
}

fn display_key(model: &MarketModel, n: &Node) -> String {
    let k = model.key(n);
    if k.is_empty() { "(root)".into() } else { k }
}

fn verdict_output(model: &MarketModel, v: &NaVerdict) -> Output {
    let node = v.node.as_ref().map(|n| model.key(n));
    let cert = v
        .certificate
        .as_ref()
        .map(|h| h.iter().map(format_rational).collect::<Vec<_>>());
    let json = json!({ "holds": v.holds, "node": node, "certificate": cert });
    let table = if v.holds {
        "NA holds\n".to_string()
    } else {
        format!(
            "NA fails at {}\tcertificate {}\n",
            v.node.as_ref().map(|n| display_key(model, n)).unwrap_or_default(),
            v.certificate.as_deref().map(format_point).unwrap_or_default()
        )
    };
    Output {
        json,
        table,
        code: if v.holds { 0 } else { 3 },
    }
}

fn supports_output(model: &MarketModel, tree: &ReachableTree) -> Output {
    let mut obj = serde_json::Map::new();
    let mut table = String::new();
    for node in tree.non_terminal() {
        let s = SupportSet::from_outcomes(model, node, tree.charged(node));
        let labels = model.lattice().outcomes(node.depth() + 1);
        let points: Vec<Vec<String>> = s.points.iter().map(|p| p.iter().map(format_rational).collect()).collect();
        let outcomes: serde_json::Map<String, Value> = s
            .outcome_point
            .iter()
            .map(|(o, p)| (labels[*o].clone(), json!(p)))
            .collect();
        obj.insert(model.key(node), json!({ "points": points, "outcomes": outcomes }));
        let pts: Vec<String> = s.points.iter().map(|p| format_point(p)).collect();
        table += &format!("{:<12}\t{}\n", display_key(model, node), pts.join(" "));
    }
    Output::ok(Value::Object(obj), table)
}

fn family(model: &MarketModel, kind: FamilyKind, cap: u64) -> Result<PatternFamily> {
    match kind {
        FamilyKind::All => PatternFamily::full(model, cap),
        FamilyKind::Qstar => PatternFamily::q_star(model, cap),
    }
}

fn market_output(model: &MarketModel, claim: Option<&Claim>) -> Output {
    let text = market_to_json(model, claim);
    let json: Value = serde_json::from_str(&text).expect("market file is valid JSON");
    Output::ok(json, text)
}

fn execute(cli: &Cli) -> Result<Output> {
    let cap = cli.cap;
    let load = || -> Result<(MarketModel, Option<Claim>)> { load_market_and_claim(&read_input(&cli.input)?) };
    match &cli.command {
        Command::Validate => {
            let (m, c) = load()?;
            let json = json!({
                "valid": true,
                "horizon": m.horizon(),
                "assets": m.assets(),
                "nodes": m.lattice().all_nodes().len(),
                "leaves": m.lattice().leaves().len(),
                "claim": c.is_some(),
            });
            let table = format!(
                "valid\thorizon {}\tassets {}\tleaves {}\n",
                m.horizon(),
                m.assets(),
                m.lattice().leaves().len()
            );
            Ok(Output::ok(json, table))
        }
        Command::Price { mode, prior, claim, family: kind } => {
            let (m, c) = load()?;
            let h = resolve_claim(&m, c.as_ref(), claim.as_deref())?;
            let (report, extra) = match mode {
                Mode::Qs => (price_quasi_sure(&m, &h)?, None),
                Mode::Mono => {
                    let p = resolve_prior(&m, prior.as_deref())?;
                    (price_mono(&m, &p, &h)?, Some(prior_to_json(&m, &p)))
                }
                Mode::Lower => {
                    let l = price_lower(&m, &family(&m, *kind, cap)?, &h)?;
                    let p = prior_to_json(&m, &l.prior);
                    (l.report, Some(p))
                }
            };
            let mut json = report_json(&m, &report);
            if let Some(p) = extra {
                json["prior"] = p;
            }
            Ok(Output::ok(json, report_table(&m, &report)))
        }
        Command::Na { prior } => {
            let (m, _) = load()?;
            let v = match prior {
                None => global_na_qs(&m)?,
                Some(spec) => na_prior(&m, &resolve_prior(&m, Some(spec))?)?,
            };
            Ok(verdict_output(&m, &v))
        }
        Command::Supports { prior } => {
            let (m, _) = load()?;
            let tree = match prior {
                None => reachable(&m),
                Some(spec) => prior_tree(&m, &resolve_prior(&m, Some(spec))?.disintegration(&m)?),
            };
            Ok(supports_output(&m, &tree))
        }
        Command::Dual { claim } => {
            let (m, c) = load()?;
            let h = resolve_claim(&m, c.as_ref(), claim.as_deref())?;
            let d = dual_sup(&m, &h)?;
            let ev = dual_sup_equivalent(&m, &h, &crate::verify::GAP_NS)?;
            let json = json!({
                "value": format_rational(&d.value),
                "measure": leaf_weights_to_json(&m, &d.measure.leaf_weights),
                "evidence": ev,
            });
            let mut table = format!("value\t{}\n", format_rational(&d.value));
            for (l, w) in &d.measure.leaf_weights {
                table += &format!("{:<12}\t{}\n", m.key(l), format_rational(w));
            }
            for r in &ev.rows {
                table += &format!("n = {}\tgap {}\t{}\n", r.n, format_rational(&r.gap), if r.law_holds { "ok" } else { "FAIL" });
            }
            let code = if ev.holds { 0 } else { 3 };
            Ok(Output { json, table, code })
        }
        Command::Construct { what, lambda, prior, claim, family: kind } => {
            let (m, c) = load()?;
            let out = match what {
                What::Ptilde => single_prior_model(&m, &build_ptilde_measure(&m).disintegration(&m)?)?,
                What::Family => build_ptilde_family(&m, &parse_rational(lambda)?)?,
                What::Phat => {
                    let h = resolve_claim(&m, c.as_ref(), claim.as_deref())?;
                    let ph = build_phat(&m, &family(&m, *kind, cap)?, &h)?;
                    single_prior_model(&m, &ph.prior.disintegration(&m)?)?
                }
                What::Repair => {
                    let q = resolve_prior(&m, Some(prior.as_deref().unwrap_or("pure:0")))?;
                    single_prior_model(&m, &na_repair_mixture(&m, &q)?.disintegration(&m)?)?
                }
            };
            Ok(market_output(&out, c.as_ref()))
        }
        Command::Fixture { name, param } => {
            let spec = FixtureSpec::parse(name, *param)?;
            let (m, h) = make_fixture(spec)?;
            Ok(market_output(&m, Some(&h)))
        }
        Command::VerifyChain { claim } => {
            let (m, c) = load()?;
            let h = resolve_claim(&m, c.as_ref(), claim.as_deref())?;
            let r = verify_chain(&m, &h, cap)?;
            let mut table = format!("value\t{}\n", r.value);
            for l in &r.links {
                table += &format!(
                    "{}\t{}\t{} | {}{}\n",
                    if l.pass { "PASS" } else { "FAIL" },
                    l.name,
                    l.left,
                    l.right,
                    l.witness.as_deref().map(|w| format!("\twitness {w}")).unwrap_or_default()
                );
            }
            let code = if r.all_pass { 0 } else { 3 };
            Ok(Output {
                json: serde_json::to_value(&r).expect("report serializes"),
                table,
                code,
            })
        }
        Command::VerifyRandom {
            count,
            seed,
            max_horizon,
            max_outcomes,
            max_assets,
            max_generators,
        } => {
            if *max_horizon == 0 || *max_outcomes == 0 || *max_assets == 0 || *max_generators == 0 {
                return Err(Error::BadParameter("size bounds must be positive".into()));
            }
            let bounds = RandomBounds {
                max_horizon: *max_horizon,
                max_outcomes: *max_outcomes,
                max_assets: *max_assets,
                max_generators: *max_generators,
            };
            let s = verify_random(*count, *seed, &bounds, cap)?;
            let table = format!(
                "instances {}\tgenerated {}\trejected {}\tpassed {}\tfailed {}\n",
                s.requested, s.generated, s.rejected_no_arbitrage, s.passed, s.failed
            );
            let code = if s.failed == 0 { 0 } else { 3 };
            Ok(Output {
                json: serde_json::to_value(&s).expect("summary serializes"),
                table,
                code,
            })
        }
    }
}

fn emit(cli: &Cli, text: &str) -> std::io::Result<()> {
    match &cli.output {
        Some(p) if p.as_os_str() != "-" => fs::write(p, text),
        _ => std::io::stdout().write_all(text.as_bytes()),
    }
}

/// Runs the command line with the given arguments and returns the exit code.
pub fn run_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(out) => {
            let text = match cli.format {
                Format::Json => {
                    let mut s = serde_json::to_string_pretty(&out.json).expect("JSON renders");
                    s.push('\n');
                    s
                }
                Format::Table => out.table,
            };
            if let Err(e) = emit(&cli, &text) {
                eprintln!("error: cannot write output: {e}");
                return 2;
            }
            out.code
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn run() -> i32 {
    run_with(std::env::args_os())
}
