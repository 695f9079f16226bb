//! Exact dynamic program over uplink-channel stages.
//!
//! Stage `k` has uplink channels `1..=k` left to arrange; a state is the pair
//! (remaining link subset `J`, remaining downlink channel subset `Z`). At a
//! stage the program picks the cellular-side occupant of uplink channel `k`,
//! the D2D-mode links sharing it, and, when the occupant is a D2D link in
//! cellular mode, its downlink channel `d` together with the D2D-mode links
//! sharing `d`. Stage 0 is a channel-assignment-only sub-program over the
//! leftover downlink channels.

use std::collections::HashMap;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::model::{
    meets_floor, sinr, tx_rx_nodes, Assignment, ChannelId, LinkId, Scenario, Score, SolveResult, SolveStats,
};

/// Values within this absolute distance count as ties.
const TIE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DpOptions {
    /// Restrict every D2D link to D2D mode (channel assignment only).
    pub force_d2d_mode_only: bool,
    /// Check the SINR floor of a cellular-mode D2D link on each hop
    /// separately instead of on the smaller of the two hops.
    pub per_hop_qos: bool,
    /// Largest number of memo entries before the solve is abandoned.
    pub state_budget: usize,
}

impl Default for DpOptions {
    fn default() -> Self {
        DpOptions { force_d2d_mode_only: false, per_hop_qos: false, state_budget: 1 << 26 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DpState {
    pub k: usize,
    /// Remaining links, bit `i` is link id `i + 1`.
    pub j_mask: u64,
    /// Remaining downlink channels, bit `i` is channel id `m_u + i + 1`.
    pub z_mask: u64,
}

/// Choices made at one uplink stage. The derived order is the tie-break
/// order: lexicographic on (occupant, uplink sharers, downlink channel with
/// `None` first, downlink sharers).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Decision {
    /// Cellular link or cellular-mode D2D link on uplink channel `k`.
    pub x_cs: Option<LinkId>,
    /// D2D-mode links on uplink channel `k`.
    pub x_dsu: Vec<LinkId>,
    /// Downlink channel of a cellular-mode D2D occupant.
    pub d: Option<ChannelId>,
    /// D2D-mode links on `d`.
    pub x_dsd: Vec<LinkId>,
}

impl Decision {
    pub fn empty() -> Self {
        Decision { x_cs: None, x_dsu: Vec::new(), d: None, x_dsd: Vec::new() }
    }

    fn all_mask(&self) -> u64 {
        self.x_cs.map_or(0, |l| l.bit())
            | self.x_dsu.iter().fold(0, |m, l| m | l.bit())
            | self.x_dsd.iter().fold(0, |m, l| m | l.bit())
    }
}

/// One channel of the stage-0 sub-program.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DownlinkStep {
    pub channel: ChannelId,
    pub cellular: Option<LinkId>,
    pub d2d: Vec<LinkId>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Step {
    Uplink(Decision),
    Downlink(DownlinkStep),
}

#[derive(Clone, Debug, PartialEq)]
pub struct MemoEntry {
    pub value: Score,
    /// Best step out of this state; `None` for base cases and dead states.
    pub step: Option<Step>,
}

/// Memoised optimal values keyed by state.
#[derive(Clone, Debug, Default)]
pub struct DpMemo {
    entries: HashMap<DpState, MemoEntry>,
}

impl DpMemo {
    pub fn get(&self, state: &DpState) -> Option<&MemoEntry> {
        self.entries.get(state)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&DpState, &MemoEntry)> {
        self.entries.iter()
    }
}

/// A SINR-feasible set of D2D-mode links on one channel next to a fixed
/// cellular-side occupant.
#[derive(Clone, Debug)]
struct SharerSet {
    mask: u64,
    members: Vec<LinkId>,
    /// Weighted rate of the D2D-mode members.
    rate: f64,
    /// SINR of the cellular-side occupant, if any.
    occupant_sinr: f64,
}

/// `tables[channel index][slot]`, where slot 0 is "no cellular-side
/// occupant" and slot `i + 1` is link index `i` as the occupant. Empty for
/// occupants that are illegal or hopeless on the channel.
struct SharerTables {
    tables: Vec<Vec<Vec<SharerSet>>>,
}

impl SharerTables {
    fn build(scenario: &Scenario, opts: &DpOptions) -> Result<Self> {
        let d2d: Vec<LinkId> = scenario.d2d_links().collect();
        let mut tables = Vec::with_capacity(scenario.m());
        for ch in scenario.channels() {
            let mut per_slot = vec![Vec::new(); scenario.n_links() + 1];
            per_slot[0] = sharer_sets(scenario, opts, ch, None, &d2d)?;
            for occ in scenario.link_ids() {
                let link = scenario.link(occ);
                if link.is_d2d() && opts.force_d2d_mode_only {
                    continue;
                }
                if tx_rx_nodes(scenario, occ, true, ch).is_err() {
                    continue;
                }
                per_slot[occ.0] = sharer_sets(scenario, opts, ch, Some(occ), &d2d)?;
            }
            tables.push(per_slot);
        }
        Ok(SharerTables { tables })
    }

    fn get(&self, ch: ChannelId, occupant: Option<LinkId>) -> &[SharerSet] {
        &self.tables[ch.index()][occupant.map_or(0, |l| l.0)]
    }
}

/// Enumerates, in lexicographic order of sorted member lists, every set of
/// D2D-mode links that can share `ch` with `occupant` while each member
/// meets its floor. Adding a sharer only lowers everyone's SINR, so an
/// infeasible set prunes all its supersets.
fn sharer_sets(
    scenario: &Scenario,
    opts: &DpOptions,
    ch: ChannelId,
    occupant: Option<LinkId>,
    d2d: &[LinkId],
) -> Result<Vec<SharerSet>> {
    let candidates: Vec<LinkId> = d2d.iter().copied().filter(|&l| Some(l) != occupant).collect();
    let mut out = Vec::new();
    let mut members = Vec::new();
    extend_sets(scenario, opts, ch, occupant, &candidates, 0, &mut members, &mut out)?;
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn extend_sets(
    scenario: &Scenario,
    opts: &DpOptions,
    ch: ChannelId,
    occupant: Option<LinkId>,
    candidates: &[LinkId],
    from: usize,
    members: &mut Vec<LinkId>,
    out: &mut Vec<SharerSet>,
) -> Result<()> {
    let Some(set) = evaluate_set(scenario, opts, ch, occupant, members)? else {
        return Ok(());
    };
    out.push(set);
    for next in from..candidates.len() {
        members.push(candidates[next]);
        extend_sets(scenario, opts, ch, occupant, candidates, next + 1, members, out)?;
        members.pop();
    }
    Ok(())
}

fn evaluate_set(
    scenario: &Scenario,
    opts: &DpOptions,
    ch: ChannelId,
    occupant: Option<LinkId>,
    members: &[LinkId],
) -> Result<Option<SharerSet>> {
    let lc: Vec<LinkId> = occupant.into_iter().collect();
    let mut rate = 0.0;
    let mut mask = 0;
    for &j in members {
        let xi = sinr(scenario, ch, &lc, members, j, false)?;
        let link = scenario.link(j);
        if !meets_floor(xi, link.sinr_min) {
            return Ok(None);
        }
        rate += link.weight * (1.0 + xi).log2();
        mask |= j.bit();
    }
    let mut occupant_sinr = 0.0;
    if let Some(o) = occupant {
        occupant_sinr = sinr(scenario, ch, &lc, members, o, true)?;
        let link = scenario.link(o);
        // A cellular-mode D2D occupant is judged on the smaller of its two
        // hops once the downlink side is known, unless per-hop checks are on.
        let check_here = link.is_cellular() || opts.per_hop_qos;
        if check_here && !meets_floor(occupant_sinr, link.sinr_min) {
            return Ok(None);
        }
    }
    Ok(Some(SharerSet { mask, members: members.to_vec(), rate, occupant_sinr }))
}

/// Indices of a decision into the sharer tables.
#[derive(Clone, Copy, Debug)]
struct DecisionRef {
    occupant: Option<LinkId>,
    up: usize,
    down: Option<(ChannelId, usize)>,
}

/// The dynamic program for one instance.
pub struct DpSolver<'a> {
    scenario: &'a Scenario,
    opts: DpOptions,
    tables: SharerTables,
    memo: DpMemo,
    ulc_mask: u64,
    dlc_mask: u64,
    decisions_enumerated: u64,
}

impl<'a> DpSolver<'a> {
    pub fn new(scenario: &'a Scenario, opts: DpOptions) -> Result<Self> {
        if scenario.n_links() > 63 || scenario.m_d() > 63 {
            return Err(Error::TooLarge(format!(
                "dynamic program supports at most 63 links and 63 downlink channels, got {} and {}",
                scenario.n_links(),
                scenario.m_d()
            )));
        }
        let c = scenario.counts();
        let ulc_mask = (1u64 << c.n_uc) - 1;
        let dlc_mask = ((1u64 << (c.n_uc + c.n_dc)) - 1) & !ulc_mask;
        Ok(DpSolver {
            scenario,
            opts,
            tables: SharerTables::build(scenario, &opts)?,
            memo: DpMemo::default(),
            ulc_mask,
            dlc_mask,
            decisions_enumerated: 0,
        })
    }

    pub fn memo(&self) -> &DpMemo {
        &self.memo
    }

    pub fn root_state(&self) -> DpState {
        DpState {
            k: self.scenario.m_u(),
            j_mask: (1u64 << self.scenario.n_links()) - 1,
            z_mask: (1u64 << self.scenario.m_d()) - 1,
        }
    }

    fn downlink_channel(&self, bit: usize) -> ChannelId {
        ChannelId(self.scenario.m_u() + bit + 1)
    }

    fn z_bit(&self, ch: ChannelId) -> u64 {
        1u64 << (ch.0 - self.scenario.m_u() - 1)
    }

    fn occupant_rate(&self, occupant: LinkId, sinr: f64) -> f64 {
        self.scenario.link(occupant).weight * (1.0 + sinr).log2()
    }

    /// Every admissible decision at `state` (k >= 1) with its utility, in
    /// tie-break order. Decisions with an infeasible utility are skipped.
    fn scan_decisions(&self, state: DpState, mut visit: impl FnMut(DecisionRef, f64)) {
        let scenario = self.scenario;
        let k = ChannelId(state.k);
        let j = state.j_mask;
        let ulc_left = (j & self.ulc_mask).count_ones() as usize;
        let dlc_left = (j & self.dlc_mask).count_ones();
        let must_take_ulc = state.k <= ulc_left;
        let no_d2d_occupant = dlc_left == state.z_mask.count_ones() || self.opts.force_d2d_mode_only;

        let mut occupants: Vec<Option<LinkId>> = Vec::new();
        if !must_take_ulc {
            occupants.push(None);
        }
        for idx in 0..scenario.n_links() {
            let l = LinkId::from_index(idx);
            if j & l.bit() == 0 {
                continue;
            }
            let link = scenario.link(l);
            let ok = if link.is_uplink_cellular() {
                true
            } else if link.is_d2d() {
                !must_take_ulc && !no_d2d_occupant
            } else {
                false
            };
            if ok {
                occupants.push(Some(l));
            }
        }

        for occupant in occupants {
            let up_sets = self.tables.get(k, occupant);
            let occupant_is_d2d = occupant.is_some_and(|o| scenario.link(o).is_d2d());
            for (ui, up) in up_sets.iter().enumerate() {
                if up.mask & !j != 0 {
                    continue;
                }
                if !occupant_is_d2d {
                    let occ_rate = occupant.map_or(0.0, |o| self.occupant_rate(o, up.occupant_sinr));
                    visit(DecisionRef { occupant, up: ui, down: None }, occ_rate + up.rate);
                    continue;
                }
                let o = occupant.expect("d2d occupant");
                let floor = scenario.link(o).sinr_min;
                let rest = j & !up.mask;
                let mut z = state.z_mask;
                while z != 0 {
                    let bit = z.trailing_zeros() as usize;
                    z &= z - 1;
                    let d = self.downlink_channel(bit);
                    for (di, down) in self.tables.get(d, occupant).iter().enumerate() {
                        if down.mask & !rest != 0 {
                            continue;
                        }
                        let hop = up.occupant_sinr.min(down.occupant_sinr);
                        if !meets_floor(hop, floor) {
                            continue;
                        }
                        let utility = up.rate + down.rate + self.occupant_rate(o, hop);
                        visit(DecisionRef { occupant, up: ui, down: Some((d, di)) }, utility);
                    }
                }
            }
        }
    }

    fn materialize(&self, k: ChannelId, r: DecisionRef) -> Decision {
        let up = &self.tables.get(k, r.occupant)[r.up];
        let (d, x_dsd) = match r.down {
            Some((d, di)) => (Some(d), self.tables.get(d, r.occupant)[di].members.clone()),
            None => (None, Vec::new()),
        };
        Decision { x_cs: r.occupant, x_dsu: up.members.clone(), d, x_dsd }
    }

    /// All admissible decisions at `state`, in tie-break order.
    pub fn enumerate_decisions(&self, state: DpState) -> Vec<Decision> {
        if state.k == 0 {
            return Vec::new();
        }
        let mut refs = Vec::new();
        self.scan_decisions(state, |r, _| refs.push(r));
        refs.into_iter().map(|r| self.materialize(ChannelId(state.k), r)).collect()
    }

    fn store(&mut self, state: DpState, entry: MemoEntry) -> Result<Score> {
        if self.memo.entries.len() >= self.opts.state_budget {
            return Err(Error::StateBudgetExceeded { budget: self.opts.state_budget });
        }
        let value = entry.value;
        self.memo.entries.insert(state, entry);
        Ok(value)
    }

    /// Optimal value of `state`, filling the memo lazily.
    pub fn value(&mut self, state: DpState) -> Result<Score> {
        if let Some(entry) = self.memo.entries.get(&state) {
            return Ok(entry.value);
        }
        if state.k == 0 {
            return self.stage0_value(state);
        }
        let ulc_left = (state.j_mask & self.ulc_mask).count_ones() as usize;
        let dlc_left = (state.j_mask & self.dlc_mask).count_ones();
        if ulc_left > state.k || dlc_left > state.z_mask.count_ones() {
            return self.store(state, MemoEntry { value: Score::Infeasible, step: None });
        }

        let mut options = Vec::new();
        self.scan_decisions(state, |r, u| options.push((r, u)));
        self.decisions_enumerated += options.len() as u64;

        let k = ChannelId(state.k);
        let mut best: Option<(f64, DecisionRef)> = None;
        for (r, utility) in options {
            let mut used = r.occupant.map_or(0, |o| o.bit()) | self.tables.get(k, r.occupant)[r.up].mask;
            let mut z = state.z_mask;
            if let Some((d, di)) = r.down {
                used |= self.tables.get(d, r.occupant)[di].mask;
                z &= !self.z_bit(d);
            }
            let next = DpState { k: state.k - 1, j_mask: state.j_mask & !used, z_mask: z };
            if let Score::Finite(rest) = self.value(next)? {
                let total = utility + rest;
                if best.is_none_or(|(b, _)| total > b + TIE_TOL) {
                    best = Some((total, r));
                }
            }
        }
        let entry = match best {
            Some((value, r)) => {
                MemoEntry { value: Score::Finite(value), step: Some(Step::Uplink(self.materialize(k, r))) }
            }
            None => MemoEntry { value: Score::Infeasible, step: None },
        };
        self.store(state, entry)
    }

    /// Stage 0: the leftover downlink channels in `z_mask` are filled from
    /// the highest channel id down, each with at most one downlink cellular
    /// link and any feasible set of D2D-mode links.
    fn stage0_value(&mut self, state: DpState) -> Result<Score> {
        if let Some(entry) = self.memo.entries.get(&state) {
            return Ok(entry.value);
        }
        let j = state.j_mask;
        let dlc_left = (j & self.dlc_mask).count_ones();
        let channels_left = state.z_mask.count_ones();
        if j & self.ulc_mask != 0 || dlc_left > channels_left {
            return self.store(state, MemoEntry { value: Score::Infeasible, step: None });
        }
        if state.z_mask == 0 {
            return self.store(state, MemoEntry { value: Score::Finite(0.0), step: None });
        }

        let top = 63 - state.z_mask.leading_zeros() as usize;
        let ch = self.downlink_channel(top);
        let rest_z = state.z_mask & !(1u64 << top);
        let mut occupants: Vec<Option<LinkId>> = Vec::new();
        if dlc_left < channels_left {
            occupants.push(None);
        }
        let mut dlc = j & self.dlc_mask;
        while dlc != 0 {
            occupants.push(Some(LinkId::from_index(dlc.trailing_zeros() as usize)));
            dlc &= dlc - 1;
        }

        let mut best: Option<(f64, Option<LinkId>, usize)> = None;
        for occupant in occupants {
            let n_sets = self.tables.get(ch, occupant).len();
            for si in 0..n_sets {
                let set = &self.tables.get(ch, occupant)[si];
                if set.mask & !j != 0 {
                    continue;
                }
                self.decisions_enumerated += 1;
                let utility = set.rate + occupant.map_or(0.0, |o| self.occupant_rate(o, set.occupant_sinr));
                let used = set.mask | occupant.map_or(0, |o| o.bit());
                let next = DpState { k: 0, j_mask: j & !used, z_mask: rest_z };
                if let Score::Finite(rest) = self.stage0_value(next)? {
                    let total = utility + rest;
                    if best.is_none_or(|(b, ..)| total > b + TIE_TOL) {
                        best = Some((total, occupant, si));
                    }
                }
            }
        }
        let entry = match best {
            Some((value, cellular, si)) => MemoEntry {
                value: Score::Finite(value),
                step: Some(Step::Downlink(DownlinkStep {
                    channel: ch,
                    cellular,
                    d2d: self.tables.get(ch, cellular)[si].members.clone(),
                })),
            },
            None => MemoEntry { value: Score::Infeasible, step: None },
        };
        self.store(state, entry)
    }

    /// Writes the optimal choices reachable from `state` into `assignment`.
    fn reconstruct(&self, mut state: DpState, assignment: &mut Assignment) -> Result<()> {
        loop {
            let entry =
                self.memo.get(&state).ok_or_else(|| Error::Contract(format!("state {state:?} missing from memo")))?;
            match &entry.step {
                None => return Ok(()),
                Some(Step::Uplink(dec)) => {
                    let k = ChannelId(state.k);
                    let mut z = state.z_mask;
                    if let Some(o) = dec.x_cs {
                        assignment.assign(k, o)?;
                        if let Some(d) = dec.d {
                            assignment.assign(d, o)?;
                            assignment.set_cellular_mode(o, true)?;
                            z &= !self.z_bit(d);
                        }
                    }
                    for &l in &dec.x_dsu {
                        assignment.assign(k, l)?;
                    }
                    if let Some(d) = dec.d {
                        for &l in &dec.x_dsd {
                            assignment.assign(d, l)?;
                        }
                    }
                    state = DpState { k: state.k - 1, j_mask: state.j_mask & !dec.all_mask(), z_mask: z };
                }
                Some(Step::Downlink(step)) => {
                    let mut used = 0;
                    if let Some(c) = step.cellular {
                        assignment.assign(step.channel, c)?;
                        used |= c.bit();
                    }
                    for &l in &step.d2d {
                        assignment.assign(step.channel, l)?;
                        used |= l.bit();
                    }
                    state = DpState {
                        k: 0,
                        j_mask: state.j_mask & !used,
                        z_mask: state.z_mask & !self.z_bit(step.channel),
                    };
                }
            }
        }
    }

    /// Solves from the root state and reconstructs the optimal assignment.
    pub fn solve(&mut self) -> Result<SolveResult> {
        let start = Instant::now();
        let root = self.root_state();
        let value = self.value(root)?;
        let mut stats = SolveStats {
            states_visited: self.memo.len() as u64,
            decisions_enumerated: self.decisions_enumerated,
            ..SolveStats::default()
        };
        stats.within_state_bound = Some(dp_state_count_check(self.scenario, &stats));
        let algo = algo_tag(&self.opts);
        let Score::Finite(dp_value) = value else {
            stats.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
            return Ok(SolveResult::infeasible(&algo, self.scenario, stats));
        };
        let mut assignment = Assignment::empty(self.scenario);
        self.reconstruct(root, &mut assignment)?;
        stats.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
        let result = SolveResult::evaluate(&algo, self.scenario, assignment, stats)?;
        match result.objective {
            Some(v) if (v - dp_value).abs() <= 1e-9 * dp_value.abs().max(1.0) => Ok(result),
            other => Err(Error::Contract(format!(
                "reconstructed assignment scores {other:?}, dynamic program reported {dp_value}"
            ))),
        }
    }
}

fn algo_tag(opts: &DpOptions) -> String {
    let mut tag = String::from("dp");
    if opts.force_d2d_mode_only {
        tag.push_str("+force-d2d-mode");
    }
    if opts.per_hop_qos {
        tag.push_str("+per-hop-qos");
    }
    tag
}

/// Optimal joint mode selection and channel assignment.
pub fn dp_solve(scenario: &Scenario) -> Result<SolveResult> {
    dp_solve_with(scenario, &DpOptions::default())
}

pub fn dp_solve_with(scenario: &Scenario, opts: &DpOptions) -> Result<SolveResult> {
    DpSolver::new(scenario, *opts)?.solve()
}

/// Decisions admissible at `state` under default options.
pub fn enumerate_decisions(scenario: &Scenario, state: DpState) -> Result<Vec<Decision>> {
    Ok(DpSolver::new(scenario, DpOptions::default())?.enumerate_decisions(state))
}

/// Value and channel placements of the stage-0 sub-program: links in
/// `j_mask` share only the downlink channels in `z_mask`, all D2D links in
/// D2D mode.
pub fn stage0_solve(scenario: &Scenario, j_mask: u64, z_mask: u64) -> Result<(Score, Vec<(ChannelId, LinkId)>)> {
    let mut solver = DpSolver::new(scenario, DpOptions::default())?;
    let state = DpState { k: 0, j_mask, z_mask };
    let value = solver.value(state)?;
    let mut fragment = Assignment::empty(scenario);
    if value.is_feasible() {
        solver.reconstruct(state, &mut fragment)?;
    }
    Ok((value, fragment.pairs()))
}

/// Weighted rate of the links placed by `dec` on uplink channel `k` and its
/// downlink channel, or `Infeasible` if any of them misses its floor. A
/// cellular-mode D2D occupant is scored once, on the smaller of its hops.
pub fn share_utility(scenario: &Scenario, k: ChannelId, dec: &Decision) -> Result<Score> {
    let lc: Vec<LinkId> = dec.x_cs.into_iter().collect();
    let mut total = 0.0;
    for &j in &dec.x_dsu {
        let xi = sinr(scenario, k, &lc, &dec.x_dsu, j, false)?;
        if !meets_floor(xi, scenario.link(j).sinr_min) {
            return Ok(Score::Infeasible);
        }
        total += scenario.link(j).weight * (1.0 + xi).log2();
    }
    if let Some(d) = dec.d {
        for &j in &dec.x_dsd {
            let xi = sinr(scenario, d, &lc, &dec.x_dsd, j, false)?;
            if !meets_floor(xi, scenario.link(j).sinr_min) {
                return Ok(Score::Infeasible);
            }
            total += scenario.link(j).weight * (1.0 + xi).log2();
        }
    }
    if let Some(o) = dec.x_cs {
        let mut xi = sinr(scenario, k, &lc, &dec.x_dsu, o, true)?;
        if let Some(d) = dec.d {
            xi = xi.min(sinr(scenario, d, &lc, &dec.x_dsd, o, true)?);
        }
        let link = scenario.link(o);
        if !meets_floor(xi, link.sinr_min) {
            return Ok(Score::Infeasible);
        }
        total += link.weight * (1.0 + xi).log2();
    }
    Ok(Score::Finite(total))
}

/// Loose bound on the number of memo entries: `M_u · 2^N · 2^M_d` stage
/// states plus `2^N · 2^M_d` stage-0 states.
pub fn state_bound(scenario: &Scenario) -> u128 {
    let per_stage = 1u128 << (scenario.n_links() + scenario.m_d());
    scenario.m_u() as u128 * per_stage + per_stage
}

pub fn dp_state_count_check(scenario: &Scenario, stats: &SolveStats) -> bool {
    u128::from(stats.states_visited) <= state_bound(scenario)
}
