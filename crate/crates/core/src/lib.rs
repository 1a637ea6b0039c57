//! Network inoculation games on undirected graphs.
//!
//! Every node of a graph either inoculates at cost `C` or stays vulnerable; an
//! attacker then infects one node chosen uniformly at random and the infection
//! spreads through the vulnerable component it lands in, costing `L` to each
//! infected node. This crate implements
//!
//! * the classic game ([`classic`]): per-node and social costs, pure
//!   equilibrium verification and enumeration, brute-force social optimum, and
//!   expected costs of mixed profiles;
//! * the cost-sharing game ([`costshare`]), in which nodes may pay toward the
//!   inoculation of other nodes: induced inoculations, necessary equilibrium
//!   conditions, exact best responses and full equilibrium verification;
//! * cycle constructions ([`constructions`]) where cost sharing supports an
//!   equilibrium whose cost is a `Θ(√n)` factor below the best classic one;
//! * the scaling study, file formats and command line ([`experiments`], [`cli`]).
//!
//! Heavy loops (subset enumeration, Monte Carlo sampling, per-node best
//! response sweeps) run on rayon when the default `parallel` feature is on and
//! sequentially otherwise. Results are identical either way.

pub mod classic;
pub mod cli;
pub mod constructions;
pub mod costshare;
mod error;
pub mod experiments;
pub mod graph;
mod par;
pub mod report;

pub use classic::{GameParams, MixedProfile};
pub use costshare::PaymentMatrix;
pub use error::{Error, Result};
pub use graph::{ComponentStructure, Graph, InoculationSet};
pub use report::{EquilibriumReport, Violation, ViolationKind};

/// Default cap on `n` for exhaustive subset sweeps.
pub const DEFAULT_ENUMERATION_LIMIT: usize = 20;

/// Default cap on `n` for exact enumeration of mixed-profile outcomes.
pub const DEFAULT_EXACT_LIMIT: usize = 16;

/// Default cap on the number of candidate fundees in one best-response search.
pub const DEFAULT_SEARCH_LIMIT: usize = 20;

/// Slack on column sums when deciding whether a node is inoculated.
pub const EPS_PAY: f64 = 1e-9;

/// Slack on cost comparisons between a strategy and its deviations.
pub const EPS_EQ: f64 = 1e-9;

/// Slack on comparisons of component sizes against the threshold `nC/L`.
pub const EPS_THRESHOLD: f64 = 1e-9;
