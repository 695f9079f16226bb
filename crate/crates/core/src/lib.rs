//! Joint mode selection and channel assignment for cellular networks with
//! underlaying device-to-device (D2D) links.
//!
//! The crate is organised around one immutable problem instance
//! ([`Scenario`]) and one decision unit ([`Assignment`]):
//!
//! * [`model`] holds the SINR, rate and objective arithmetic and the full
//!   feasibility checker.
//! * [`scenario_gen`] draws random instances (clustered D2D pairs, path loss,
//!   log-normal shadowing and Rayleigh fading).
//! * [`dp`] is the exact dynamic program over uplink-channel stages.
//! * [`greedy`] is the matching-seeded greedy heuristic.
//! * [`exhaustive`] enumerates every assignment and serves as ground truth.
//! * [`harness`] runs solver comparisons and parameter sweeps to CSV.

pub mod dp;
pub mod error;
pub mod exhaustive;
pub mod greedy;
pub mod harness;
pub mod model;
pub mod scenario_gen;

pub use error::{Error, Result};
pub use model::{
    check_feasible, co_channel_sets, link_rate, objective, sinr, tx_power, tx_rx_nodes, Assignment, ChannelId,
    CoChannelSets, Constraint, Direction, Feasibility, Link, LinkId, LinkKind, NodeId, Scenario, Score, SolveResult,
    SolveStats, Violation, BASE_STATION,
};
