//! Efficient frontiers for the cardinality- and bounds-constrained Markowitz
//! model, traced by an annealed Hopfield network.
//!
//! The crate is organised bottom-up:
//!
//! * [`data_io`] reads OR-Library portfolio files and reads/writes frontier CSV.
//! * [`model`] holds the problem definition, portfolio statistics and Pareto
//!   dominance.
//! * [`repair`] is the greedy budget/bounds repair applied to every evaluated
//!   portfolio.
//! * [`hopfield`] is the network itself: weights, sigmoid, cycle-free
//!   asynchronous relaxation and neuron pruning.
//! * [`heuristic`] drives the network over a λ grid and keeps the Pareto
//!   archive.
//! * [`exact_frontier`] solves the unconstrained model exactly as a reference.
//! * [`metrics`] compares frontiers: persistence, distances, occupancy, merges.

// `!(x > 0.0)` is used deliberately so that NaN falls on the rejecting side.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod data_io;
pub mod error;
pub mod exact_frontier;
pub mod heuristic;
pub mod hopfield;
pub mod metrics;
pub mod model;
pub mod repair;

pub use data_io::{parse_frontier, parse_orlib, serialize_frontier, AssetUniverse, FrontierRecord};
pub use error::{Error, Result};
pub use exact_frontier::{solve_qp_simplex, trace_standard_frontier, StandardFrontier};
pub use heuristic::{run, HeuristicConfig, ParetoArchive};
pub use hopfield::HopfieldNetwork;
pub use model::{
    dominates, objective, pareto_filter, portfolio_stats, Portfolio, PortfolioProblem,
};
pub use repair::repair;
