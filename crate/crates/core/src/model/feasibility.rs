use std::fmt;

use super::assignment::Assignment;
use super::eval::{effective_sinr, meets_floor, tx_rx_nodes};
use super::ids::{ChannelId, Direction, LinkId};
use super::scenario::Scenario;

/// The constraint families of the joint problem.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Constraint {
    /// Cellular SINR floor.
    CellularQos,
    /// Active D2D SINR floor (min over both hops in cellular mode).
    D2dQos,
    /// At most one `x = 1` occupant per channel.
    OneCellularPerChannel,
    /// Each cellular link holds exactly one channel.
    CellularOneChannel,
    /// A D2D-mode link holds at most one channel.
    D2dModeOneChannel,
    /// A cellular-mode D2D link holds one uplink and one downlink channel.
    CellularModeHops,
    /// Cellular links only use channels of their own direction.
    CellularDirection,
}

impl Constraint {
    pub fn tag(self) -> &'static str {
        match self {
            Constraint::CellularQos => "6a",
            Constraint::D2dQos => "6b",
            Constraint::OneCellularPerChannel => "6c",
            Constraint::CellularOneChannel => "6d",
            Constraint::D2dModeOneChannel => "6e",
            Constraint::CellularModeHops => "6f",
            Constraint::CellularDirection => "6g",
        }
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Violation {
    pub constraint: Constraint,
    pub link: Option<LinkId>,
    pub channel: Option<ChannelId>,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.constraint)?;
        if let Some(l) = self.link {
            write!(f, " {l}")?;
        }
        if let Some(c) = self.channel {
            write!(f, " {c}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Feasibility {
    pub violations: Vec<Violation>,
}

impl Feasibility {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, constraint: Constraint) -> bool {
        self.violations.iter().any(|v| v.constraint == constraint)
    }
}

/// Reports every violated constraint of `assignment`.
///
/// SINR floors are only evaluated for links whose channels all have legal
/// geometry; a cellular link on a wrong-direction channel is reported as a
/// direction violation instead.
pub fn check_feasible(scenario: &Scenario, assignment: &Assignment) -> Feasibility {
    let mut violations = Vec::new();
    let mut push = |constraint, link, channel| violations.push(Violation { constraint, link, channel });

    for j in scenario.link_ids() {
        let link = scenario.link(j);
        let channels = assignment.channels_of(j);
        let n_up = channels.iter().filter(|&&c| scenario.direction(c) == Direction::Uplink).count();
        let n_down = channels.len() - n_up;
        if link.is_cellular() {
            if channels.len() != 1 {
                push(Constraint::CellularOneChannel, Some(j), None);
            }
            let own = if link.is_uplink_cellular() { Direction::Uplink } else { Direction::Downlink };
            for &c in channels.iter().filter(|&&c| scenario.direction(c) != own) {
                push(Constraint::CellularDirection, Some(j), Some(c));
            }
        } else if assignment.cellular_mode(j) {
            if n_up > 1 || n_down > 1 || (channels.len() == 1) {
                push(Constraint::CellularModeHops, Some(j), None);
            }
        } else if channels.len() > 1 {
            push(Constraint::D2dModeOneChannel, Some(j), None);
        }
    }

    for c in scenario.channels() {
        let cellular_side = assignment.occupants(c).into_iter().filter(|&l| assignment.cellular_mode(l)).count();
        if cellular_side > 1 {
            push(Constraint::OneCellularPerChannel, None, Some(c));
        }
    }

    let geometry_ok: Vec<bool> = scenario
        .channels()
        .map(|c| {
            assignment
                .occupants(c)
                .into_iter()
                .all(|l| tx_rx_nodes(scenario, l, assignment.cellular_mode(l), c).is_ok())
        })
        .collect();

    for j in scenario.link_ids() {
        let link = scenario.link(j);
        let channels = assignment.channels_of(j);
        if channels.iter().any(|c| !geometry_ok[c.index()]) {
            continue;
        }
        let sinr = match effective_sinr(scenario, assignment, j) {
            Ok(s) => s,
            Err(_) => continue,
        };
        match (link.is_cellular(), sinr) {
            (true, s) => {
                if !meets_floor(s.unwrap_or(0.0), link.sinr_min) {
                    push(Constraint::CellularQos, Some(j), None);
                }
            }
            (false, Some(s)) => {
                if !meets_floor(s, link.sinr_min) {
                    push(Constraint::D2dQos, Some(j), None);
                }
            }
            (false, None) => {}
        }
    }

    Feasibility { violations }
}
