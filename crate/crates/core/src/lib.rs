//! Exact multi-prior super-replication on finite scenario lattices.
//!
//! Prices, martingale duals and no-arbitrage certificates are computed with
//! rational arithmetic throughout.

pub mod arbitrage;
pub mod cli;
pub mod constructions;
pub mod duality;
pub mod error;
pub mod fixtures;
pub mod io;
pub mod lp;
pub mod model;
pub mod pricing;
pub mod rational;
pub mod supports;
pub mod verify;

pub use error::{Error, Result};
pub use model::{Claim, Disintegration, HedgingStrategy, Kernel, MarketModel, Node, ProductPrior, ScenarioLattice};
pub use rational::Rational;
