//! Matching-seeded greedy heuristic.
//!
//! Cellular links are placed first by a maximum-weight bipartite matching.
//! D2D links are then admitted one at a time, always taking the candidate
//! (mode, channels) with the largest positive priority value, until every
//! D2D link is placed or no candidate improves the weighted sum-rate.

pub mod matching;

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

pub use matching::{cellular_edge_weight, km_match, EdgeWeightTable, Matching};

use crate::error::{Error, Result};
use crate::model::{
    co_channel_sets, meets_floor, sinr, Assignment, ChannelId, Direction, LinkId, Scenario, Score, SolveResult,
    SolveStats,
};

/// Values within this absolute distance count as ties.
const TIE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct GreedyOptions {
    /// Allow at most one D2D link (in either mode) per channel.
    pub restrict_sharing: bool,
    /// Re-evaluate every candidate after each admission instead of only
    /// those touching changed channels.
    pub full_recompute: bool,
}

/// One way of admitting D2D link `j`. The derived order is the tie-break
/// order: D2D mode first, then by link, uplink channel, downlink channel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Candidate {
    /// `false`: D2D mode on exactly one named channel. `true`: cellular mode
    /// on both named channels.
    pub cellular_mode: bool,
    pub j: LinkId,
    pub i_u: Option<ChannelId>,
    pub i_d: Option<ChannelId>,
}

impl Candidate {
    pub fn d2d_mode(j: LinkId, channel: ChannelId, scenario: &Scenario) -> Self {
        match scenario.direction(channel) {
            Direction::Uplink => Candidate { cellular_mode: false, j, i_u: Some(channel), i_d: None },
            Direction::Downlink => Candidate { cellular_mode: false, j, i_u: None, i_d: Some(channel) },
        }
    }

    pub fn cellular_mode(j: LinkId, i_u: ChannelId, i_d: ChannelId) -> Self {
        Candidate { cellular_mode: true, j, i_u: Some(i_u), i_d: Some(i_d) }
    }

    /// Channels the candidate would occupy.
    pub fn channels(&self) -> impl Iterator<Item = ChannelId> {
        self.i_u.into_iter().chain(self.i_d)
    }

    fn validate(&self, scenario: &Scenario) -> Result<()> {
        let count = self.channels().count();
        let shape_ok = if self.cellular_mode { count == 2 } else { count == 1 };
        let dirs_ok = self.i_u.is_none_or(|c| scenario.has_channel(c) && scenario.direction(c) == Direction::Uplink)
            && self.i_d.is_none_or(|c| scenario.has_channel(c) && scenario.direction(c) == Direction::Downlink);
        if !shape_ok || !dirs_ok {
            return Err(Error::Contract(format!("malformed candidate {self:?}")));
        }
        if !scenario.has_link(self.j) || !scenario.link(self.j).is_d2d() {
            return Err(Error::Contract(format!("{} is not a D2D link", self.j)));
        }
        Ok(())
    }

    fn apply(&self, assignment: &mut Assignment) -> Result<()> {
        assignment.set_cellular_mode(self.j, self.cellular_mode)?;
        for ch in self.channels() {
            assignment.assign(ch, self.j)?;
        }
        Ok(())
    }
}

/// SINR of occupant `j` of channel `i`; for a cellular-mode D2D link the
/// smaller of its SINR on `i` and on its other channel in `partial`.
fn occupant_sinr(
    scenario: &Scenario,
    partial: &Assignment,
    i: ChannelId,
    lc: &[LinkId],
    ld: &[LinkId],
    j: LinkId,
) -> Result<f64> {
    let x_j = lc.contains(&j);
    let xi = sinr(scenario, i, lc, ld, j, x_j)?;
    if !(x_j && scenario.link(j).is_d2d()) {
        return Ok(xi);
    }
    let paired = partial.channels_of(j).into_iter().find(|&c| c != i);
    Ok(match paired {
        Some(p) => {
            let sets = co_channel_sets(partial, p);
            xi.min(sinr(scenario, p, &sets.lc, &sets.ld, j, true)?)
        }
        None => xi,
    })
}

/// Weighted rate carried by channel `i` with cellular-side occupants `lc`
/// and D2D-mode occupants `ld`. A cellular-mode D2D occupant counts at the
/// rate of its weaker hop, its other hop looked up in `partial`.
pub fn channel_value(
    scenario: &Scenario,
    partial: &Assignment,
    i: ChannelId,
    lc: &[LinkId],
    ld: &[LinkId],
) -> Result<f64> {
    if lc.len() > 1 {
        return Err(Error::Contract(format!("{i} has {} cellular-side occupants", lc.len())));
    }
    lc.iter()
        .chain(ld)
        .map(|&j| Ok(scenario.link(j).weight * (1.0 + occupant_sinr(scenario, partial, i, lc, ld, j)?).log2()))
        .sum()
}

/// Value of channel `i` under `assignment`, or `None` if an occupant misses
/// its floor.
fn checked_channel_value(scenario: &Scenario, assignment: &Assignment, i: ChannelId) -> Result<Option<f64>> {
    let sets = co_channel_sets(assignment, i);
    let mut total = 0.0;
    for &j in sets.lc.iter().chain(&sets.ld) {
        let xi = occupant_sinr(scenario, assignment, i, &sets.lc, &sets.ld, j)?;
        let link = scenario.link(j);
        if !meets_floor(xi, link.sinr_min) {
            return Ok(None);
        }
        total += link.weight * (1.0 + xi).log2();
    }
    Ok(Some(total))
}

/// Scaling factor applied to cellular-mode candidates, or `None` when no
/// pair of channels can be free of cellular links.
fn mode_scale(scenario: &Scenario, n_unassigned: usize) -> Option<f64> {
    let c = scenario.counts();
    let spare = c.m_u.saturating_sub(c.n_uc).min(c.m_d.saturating_sub(c.n_dc));
    (spare > 0).then(|| (n_unassigned as f64 / spare as f64).min(1.0))
}

fn n_unassigned(scenario: &Scenario, partial: &Assignment) -> usize {
    scenario.d2d_links().filter(|&j| !partial.is_active(j)).count()
}

/// Change in weighted sum-rate from admitting `cand`, before mode scaling.
fn raw_gain(scenario: &Scenario, partial: &Assignment, cand: &Candidate, restrict: bool) -> Result<Score> {
    cand.validate(scenario)?;
    if partial.is_active(cand.j) {
        return Err(Error::Contract(format!("{} is already admitted", cand.j)));
    }
    let n_cellular = scenario.n_cellular();
    for ch in cand.channels() {
        let mask = partial.occupant_mask(ch);
        if cand.cellular_mode && !co_channel_sets(partial, ch).lc.is_empty() {
            return Ok(Score::Infeasible);
        }
        if restrict && mask >> n_cellular != 0 {
            return Ok(Score::Infeasible);
        }
    }
    let mut trial = partial.clone();
    cand.apply(&mut trial)?;
    let mut gain = 0.0;
    for ch in cand.channels() {
        let sets = co_channel_sets(partial, ch);
        let before = channel_value(scenario, partial, ch, &sets.lc, &sets.ld)?;
        let Some(after) = checked_channel_value(scenario, &trial, ch)? else {
            return Ok(Score::Infeasible);
        };
        gain += after - before;
    }
    if cand.cellular_mode {
        // `j` is counted on both of its channels; keep one copy.
        let sets = co_channel_sets(&trial, cand.i_u.unwrap());
        let xi = occupant_sinr(scenario, &trial, cand.i_u.unwrap(), &sets.lc, &sets.ld, cand.j)?;
        gain -= scenario.link(cand.j).weight * (1.0 + xi).log2();
    }
    Ok(Score::Finite(gain))
}

fn scaled(scenario: &Scenario, cand: &Candidate, raw: Score, n_unassigned: usize) -> Score {
    match (cand.cellular_mode, raw) {
        (true, Score::Finite(v)) => {
            mode_scale(scenario, n_unassigned).map_or(Score::Infeasible, |s| Score::Finite(s * v))
        }
        (true, Score::Infeasible) => Score::Infeasible,
        (false, raw) => raw,
    }
}

/// Priority of admitting `cand` into `partial`: the net change in weighted
/// sum-rate over the candidate's channels, scaled for cellular-mode
/// candidates, or `Infeasible` if any occupant of those channels would miss
/// its floor.
pub fn priority_value(scenario: &Scenario, partial: &Assignment, cand: &Candidate, restrict: bool) -> Result<Score> {
    let raw = raw_gain(scenario, partial, cand, restrict)?;
    Ok(scaled(scenario, cand, raw, n_unassigned(scenario, partial)))
}

fn all_candidates(scenario: &Scenario) -> Vec<Candidate> {
    let mut out = Vec::new();
    for j in scenario.d2d_links() {
        for ch in scenario.channels() {
            out.push(Candidate::d2d_mode(j, ch, scenario));
        }
        for u in scenario.uplink_channels() {
            for d in scenario.downlink_channels() {
                out.push(Candidate::cellular_mode(j, u, d));
            }
        }
    }
    out.sort();
    out
}

/// Channels whose candidate values may change after `cand` is admitted:
/// its own channels plus the other hop of every cellular-mode D2D link
/// sharing them.
fn affected_channels(assignment: &Assignment, scenario: &Scenario, cand: &Candidate) -> BTreeSet<ChannelId> {
    let mut out: BTreeSet<ChannelId> = cand.channels().collect();
    for ch in cand.channels() {
        for o in co_channel_sets(assignment, ch).lc {
            if scenario.link(o).is_d2d() {
                out.extend(assignment.channels_of(o));
            }
        }
    }
    out
}

pub fn greedy_solve(scenario: &Scenario) -> Result<SolveResult> {
    greedy_solve_with(scenario, &GreedyOptions::default())
}

pub fn greedy_solve_with(scenario: &Scenario, opts: &GreedyOptions) -> Result<SolveResult> {
    let start = Instant::now();
    let algo = if opts.restrict_sharing { "greedy+restrict-sharing" } else { "greedy" };
    let table = EdgeWeightTable::for_scenario(scenario);
    let Some(matching) = km_match(&table) else {
        let stats = SolveStats { wall_time_ms: start.elapsed().as_secs_f64() * 1e3, ..SolveStats::default() };
        return Ok(SolveResult::infeasible(algo, scenario, stats));
    };

    let mut partial = Assignment::empty(scenario);
    for &(row, col) in &matching.pairs {
        partial.assign(ChannelId::from_index(row), LinkId::from_index(col))?;
    }

    let mut evaluations = 0u64;
    let mut admissions = 0u64;
    let mut cache: BTreeMap<Candidate, Score> = BTreeMap::new();
    for cand in all_candidates(scenario) {
        cache.insert(cand, raw_gain(scenario, &partial, &cand, opts.restrict_sharing)?);
        evaluations += 1;
    }

    loop {
        let remaining = n_unassigned(scenario, &partial);
        let mut best: Option<(Candidate, f64)> = None;
        for (cand, &raw) in &cache {
            let Score::Finite(v) = scaled(scenario, cand, raw, remaining) else { continue };
            if v > 0.0 && best.is_none_or(|(_, b)| v > b + TIE_TOL) {
                best = Some((*cand, v));
            }
        }
        let Some((chosen, _)) = best else { break };

        chosen.apply(&mut partial)?;
        admissions += 1;
        cache.retain(|c, _| c.j != chosen.j);
        let affected = affected_channels(&partial, scenario, &chosen);
        for (cand, value) in cache.iter_mut() {
            if opts.full_recompute || cand.channels().any(|c| affected.contains(&c)) {
                *value = raw_gain(scenario, &partial, cand, opts.restrict_sharing)?;
                evaluations += 1;
            }
        }
    }

    let stats = SolveStats {
        states_visited: admissions,
        decisions_enumerated: evaluations,
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
        matching_total: Some(matching.total),
        ..SolveStats::default()
    };
    let result = SolveResult::evaluate(algo, scenario, partial, stats)?;
    if !result.feasible {
        return Err(Error::Contract("greedy produced an assignment that fails the feasibility check".into()));
    }
    Ok(result)
}
