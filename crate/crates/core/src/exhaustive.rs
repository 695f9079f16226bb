//! Ground-truth solver: enumerates every assignment that respects the
//! structural constraints and keeps the best one that passes the full
//! feasibility check. Meant for small instances only.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::model::{
    check_feasible, objective, Assignment, ChannelId, Direction, LinkId, Scenario, SolveResult, SolveStats,
};

/// Ties on objective are resolved with this absolute tolerance.
const TIE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EnumOptions {
    /// At most one D2D link (either mode) per channel.
    pub restrict_one_d2d_per_channel: bool,
    /// Every D2D link stays in D2D mode (channel assignment only).
    pub force_d2d_mode_only: bool,
    /// Largest number of leaf assignments the solver may enumerate.
    pub budget: u64,
}

impl Default for EnumOptions {
    fn default() -> Self {
        EnumOptions { restrict_one_d2d_per_channel: false, force_d2d_mode_only: false, budget: 10_000_000 }
    }
}

/// Upper bound on the number of leaf assignments the enumeration visits:
/// every cellular link picks a channel of its direction, every D2D link
/// picks inactive, one channel in D2D mode, or an uplink/downlink pair.
pub fn estimate_assignments(scenario: &Scenario, opts: &EnumOptions) -> u128 {
    let c = scenario.counts();
    let (m_u, m_d) = (c.m_u as u128, c.m_d as u128);
    let per_d2d = 1 + m_u + m_d + if opts.force_d2d_mode_only { 0 } else { m_u * m_d };
    let mut total = m_u.saturating_pow(c.n_uc as u32).saturating_mul(m_d.saturating_pow(c.n_dc as u32));
    total = total.saturating_mul(per_d2d.saturating_pow(c.n_d as u32));
    total
}

/// Objective, record (rho, x) and assignment of the best leaf so far.
type Incumbent = (f64, Vec<(usize, usize)>, Vec<usize>, Assignment);

struct Search<'a> {
    scenario: &'a Scenario,
    opts: EnumOptions,
    current: Assignment,
    cellular_side: Vec<u8>,
    d2d_count: Vec<u8>,
    best: Option<Incumbent>,
    leaves: u64,
    nodes: u64,
}

impl Search<'_> {
    fn place(&mut self, ch: ChannelId, link: LinkId, cellular_side: bool) {
        self.current.assign(ch, link).expect("ids in range");
        if cellular_side {
            self.cellular_side[ch.index()] += 1;
        }
        if self.scenario.link(link).is_d2d() {
            self.d2d_count[ch.index()] += 1;
        }
    }

    fn remove(&mut self, ch: ChannelId, link: LinkId, cellular_side: bool) {
        self.current.unassign(ch, link).expect("ids in range");
        if cellular_side {
            self.cellular_side[ch.index()] -= 1;
        }
        if self.scenario.link(link).is_d2d() {
            self.d2d_count[ch.index()] -= 1;
        }
    }

    fn d2d_allowed(&self, ch: ChannelId) -> bool {
        !self.opts.restrict_one_d2d_per_channel || self.d2d_count[ch.index()] == 0
    }

    fn recurse(&mut self, pos: usize) -> Result<()> {
        self.nodes += 1;
        let scenario = self.scenario;
        if pos == scenario.n_links() {
            self.leaf()?;
            return Ok(());
        }
        let link = LinkId::from_index(pos);
        let l = scenario.link(link);
        if l.is_cellular() {
            let own = if l.is_uplink_cellular() { Direction::Uplink } else { Direction::Downlink };
            for ch in scenario.channels().filter(|&c| scenario.direction(c) == own) {
                if self.cellular_side[ch.index()] > 0 {
                    continue;
                }
                self.place(ch, link, true);
                self.recurse(pos + 1)?;
                self.remove(ch, link, true);
            }
            return Ok(());
        }

        // inactive
        self.recurse(pos + 1)?;
        // D2D mode on a single channel
        for ch in scenario.channels() {
            if !self.d2d_allowed(ch) {
                continue;
            }
            self.place(ch, link, false);
            self.recurse(pos + 1)?;
            self.remove(ch, link, false);
        }
        if self.opts.force_d2d_mode_only {
            return Ok(());
        }
        // cellular mode on an uplink/downlink pair
        self.current.set_cellular_mode(link, true)?;
        for up in scenario.uplink_channels() {
            for down in scenario.downlink_channels() {
                let free = |c: ChannelId| self.cellular_side[c.index()] == 0 && self.d2d_allowed(c);
                if !free(up) || !free(down) {
                    continue;
                }
                self.place(up, link, true);
                self.place(down, link, true);
                self.recurse(pos + 1)?;
                self.remove(down, link, true);
                self.remove(up, link, true);
            }
        }
        self.current.set_cellular_mode(link, false)?;
        Ok(())
    }

    fn leaf(&mut self) -> Result<()> {
        self.leaves += 1;
        if !check_feasible(self.scenario, &self.current).is_ok() {
            return Ok(());
        }
        let value = objective(self.scenario, &self.current)?;
        let better = match &self.best {
            None => true,
            Some((best, ..)) if value > best + TIE_TOL => true,
            Some((best, ..)) if value < best - TIE_TOL => false,
            Some((_, rho, x, _)) => {
                let record = self.current.to_record();
                (record.rho, record.x) < (rho.clone(), x.clone())
            }
        };
        if better {
            let record = self.current.to_record();
            self.best = Some((value, record.rho, record.x, self.current.clone()));
        }
        Ok(())
    }
}

/// Exact optimum by enumeration. Among assignments whose objectives tie,
/// the one with the lexicographically smallest `(rho pairs, x set)` wins.
pub fn exhaustive_solve(scenario: &Scenario, opts: &EnumOptions) -> Result<SolveResult> {
    if opts.budget == 0 {
        return Err(Error::InvalidConfig("enumeration budget must be positive".into()));
    }
    let estimated = estimate_assignments(scenario, opts);
    if estimated > u128::from(opts.budget) {
        return Err(Error::BudgetExceeded { estimated, budget: opts.budget });
    }

    let start = Instant::now();
    let mut search = Search {
        scenario,
        opts: *opts,
        current: Assignment::empty(scenario),
        cellular_side: vec![0; scenario.m()],
        d2d_count: vec![0; scenario.m()],
        best: None,
        leaves: 0,
        nodes: 0,
    };
    search.recurse(0)?;

    let stats = SolveStats {
        states_visited: search.leaves,
        decisions_enumerated: search.nodes,
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
        ..SolveStats::default()
    };
    let algo = algo_tag(opts);
    match search.best {
        Some((.., assignment)) => SolveResult::evaluate(&algo, scenario, assignment, stats),
        None => Ok(SolveResult::infeasible(&algo, scenario, stats)),
    }
}

fn algo_tag(opts: &EnumOptions) -> String {
    let mut tag = String::from("exhaustive");
    if opts.restrict_one_d2d_per_channel {
        tag.push_str("+restrict-sharing");
    }
    if opts.force_d2d_mode_only {
        tag.push_str("+force-d2d-mode");
    }
    tag
}
