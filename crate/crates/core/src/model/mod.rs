//! Problem instance, decision variables, and the SINR/rate/feasibility
//! arithmetic every solver shares.

mod assignment;
mod eval;
mod feasibility;
mod ids;
mod result;
mod scenario;

pub use assignment::{co_channel_sets, Assignment, AssignmentRecord, CoChannelSets};
pub use eval::{link_rate, meets_floor, objective, sinr, tx_power, tx_rx_nodes, Score};
pub use feasibility::{check_feasible, Constraint, Feasibility, Violation};
pub use ids::{ChannelId, Direction, LinkId, NodeId, BASE_STATION};
pub use result::{SolveResult, SolveResultFile, SolveStats};
pub use scenario::{db_to_linear, Counts, Link, LinkKind, LinkRecord, Scenario, ScenarioFile};
