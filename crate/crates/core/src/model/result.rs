use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::assignment::{Assignment, AssignmentRecord};
use super::eval::{link_rate, objective};
use super::feasibility::check_feasible;
use super::ids::LinkId;
use super::scenario::Scenario;
use crate::error::Result;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveStats {
    /// Memo entries created (dynamic program) or leaves visited (enumeration).
    pub states_visited: u64,
    pub decisions_enumerated: u64,
    pub wall_time_ms: f64,
    /// Whether `states_visited` respects the dynamic program's state bound.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub within_state_bound: Option<bool>,
    /// Total weight of the cellular matching that seeds the greedy solver.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matching_total: Option<f64>,
}

/// What every solver returns.
#[derive(Clone, Debug, PartialEq)]
pub struct SolveResult {
    pub algo: String,
    pub assignment: Assignment,
    /// Weighted sum-rate; `None` when no feasible assignment was found.
    pub objective: Option<f64>,
    pub per_link_rate: BTreeMap<LinkId, f64>,
    pub feasible: bool,
    pub stats: SolveStats,
}

impl SolveResult {
    /// Scores `assignment` with the shared model and checks it.
    pub fn evaluate(algo: &str, scenario: &Scenario, assignment: Assignment, stats: SolveStats) -> Result<Self> {
        let feasible = check_feasible(scenario, &assignment).is_ok();
        let per_link_rate = scenario
            .link_ids()
            .map(|j| Ok((j, link_rate(scenario, &assignment, j)?)))
            .collect::<Result<BTreeMap<_, _>>>()?;
        let value = objective(scenario, &assignment)?;
        Ok(SolveResult {
            algo: algo.to_string(),
            assignment,
            objective: feasible.then_some(value),
            per_link_rate,
            feasible,
            stats,
        })
    }

    /// The result for an instance without any feasible assignment.
    pub fn infeasible(algo: &str, scenario: &Scenario, stats: SolveStats) -> Self {
        SolveResult {
            algo: algo.to_string(),
            assignment: Assignment::empty(scenario),
            objective: None,
            per_link_rate: BTreeMap::new(),
            feasible: false,
            stats,
        }
    }

    pub fn to_file(&self) -> SolveResultFile {
        let record = self.assignment.to_record();
        SolveResultFile {
            algo: self.algo.clone(),
            feasible: self.feasible,
            objective: self.objective,
            rho: record.rho,
            x: record.x,
            per_link_rate: self.per_link_rate.iter().map(|(l, r)| (l.0, *r)).collect(),
            stats: self.stats.clone(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_file())?)
    }
}

/// On-disk solve result.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveResultFile {
    pub algo: String,
    pub feasible: bool,
    pub objective: Option<f64>,
    pub rho: Vec<(usize, usize)>,
    pub x: Vec<usize>,
    pub per_link_rate: BTreeMap<usize, f64>,
    pub stats: SolveStats,
}

impl SolveResultFile {
    pub fn assignment(&self, scenario: &Scenario) -> Result<Assignment> {
        Assignment::from_record(scenario, &AssignmentRecord { rho: self.rho.clone(), x: self.x.clone() })
    }
}
