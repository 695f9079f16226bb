use std::ops::Add;

use super::assignment::{co_channel_sets, Assignment};
use super::ids::{ChannelId, Direction, LinkId, NodeId, BASE_STATION};
use super::scenario::{LinkKind, Scenario};
use crate::error::{Error, Result};

/// A weighted rate, or the marker for an infeasible configuration.
///
/// `Infeasible` orders strictly below every finite value and never enters
/// floating-point arithmetic.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub enum Score {
    Infeasible,
    Finite(f64),
}

impl Score {
    pub fn value(self) -> Option<f64> {
        match self {
            Score::Finite(v) => Some(v),
            Score::Infeasible => None,
        }
    }

    pub fn is_feasible(self) -> bool {
        matches!(self, Score::Finite(_))
    }
}

impl Add for Score {
    type Output = Score;

    fn add(self, rhs: Score) -> Score {
        match (self, rhs) {
            (Score::Finite(a), Score::Finite(b)) => Score::Finite(a + b),
            _ => Score::Infeasible,
        }
    }
}

/// The QoS comparison shared by every solver and the checker.
#[inline]
pub fn meets_floor(sinr: f64, sinr_min: f64) -> bool {
    sinr >= sinr_min
}

/// Transmitting and receiving node of `link` on `channel` in the given mode.
pub fn tx_rx_nodes(
    scenario: &Scenario,
    link: LinkId,
    cellular_mode: bool,
    channel: ChannelId,
) -> Result<(NodeId, NodeId)> {
    let dir = scenario.direction(channel);
    let l = scenario.link(link);
    match (&l.kind, cellular_mode, dir) {
        (LinkKind::UplinkCellular { device }, true, Direction::Uplink) => Ok((*device, BASE_STATION)),
        (LinkKind::DownlinkCellular { device }, true, Direction::Downlink) => Ok((BASE_STATION, *device)),
        (LinkKind::D2d { tx_device, rx_device, .. }, false, _) => Ok((*tx_device, *rx_device)),
        (LinkKind::D2d { tx_device, .. }, true, Direction::Uplink) => Ok((*tx_device, BASE_STATION)),
        (LinkKind::D2d { rx_device, .. }, true, Direction::Downlink) => Ok((BASE_STATION, *rx_device)),
        _ => Err(Error::Contract(format!("{link} cannot use {channel} ({dir:?}) with cellular_mode={cellular_mode}"))),
    }
}

/// Transmit power of `link` on `channel`. Downlink transmissions come from
/// the base station, which splits its power equally over the downlink
/// channels.
pub fn tx_power(scenario: &Scenario, link: LinkId, cellular_mode: bool, channel: ChannelId) -> Result<f64> {
    // Validates the (link, mode, channel) combination.
    tx_rx_nodes(scenario, link, cellular_mode, channel)?;
    let l = scenario.link(link);
    Ok(match (&l.kind, cellular_mode) {
        (LinkKind::D2d { power_d2d_w, .. }, false) => *power_d2d_w,
        _ => match scenario.direction(channel) {
            Direction::Uplink => l.power_cellular_w,
            Direction::Downlink => scenario.bs_total_power_w() / scenario.m_d() as f64,
        },
    })
}

/// Received power at `rx` from `link` transmitting on `channel`.
fn received(scenario: &Scenario, link: LinkId, cellular_mode: bool, channel: ChannelId, rx: NodeId) -> Result<f64> {
    let (tx, _) = tx_rx_nodes(scenario, link, cellular_mode, channel)?;
    Ok(tx_power(scenario, link, cellular_mode, channel)? * scenario.gain(channel, tx, rx))
}

/// SINR of link `j` on `channel` given the channel's occupants.
///
/// `lc` holds the cellular-side occupants (`x = 1`), `ld` the D2D-mode
/// occupants. `j` must appear in `lc` when `x_j` is set and in `ld`
/// otherwise. Interference terms are summed over `lc` then `ld` in slice
/// order.
pub fn sinr(
    scenario: &Scenario,
    channel: ChannelId,
    lc: &[LinkId],
    ld: &[LinkId],
    j: LinkId,
    x_j: bool,
) -> Result<f64> {
    let own_set = if x_j { lc } else { ld };
    if !own_set.contains(&j) {
        return Err(Error::Contract(format!(
            "{j} is not among the {} occupants of {channel}",
            if x_j { "cellular-side" } else { "D2D-mode" }
        )));
    }
    let (_, rx) = tx_rx_nodes(scenario, j, x_j, channel)?;
    let signal = received(scenario, j, x_j, channel, rx)?;
    let mut noise = scenario.noise_w();
    for &z in lc.iter().filter(|&&z| z != j) {
        noise += received(scenario, z, true, channel, rx)?;
    }
    for &z in ld.iter().filter(|&&z| z != j) {
        noise += received(scenario, z, false, channel, rx)?;
    }
    Ok(signal / noise)
}

/// Effective SINR of `j` under `assignment`: the sum over its channels, or
/// for a cellular-mode D2D link the smaller of its uplink and downlink sums.
pub(crate) fn effective_sinr(scenario: &Scenario, assignment: &Assignment, j: LinkId) -> Result<Option<f64>> {
    let channels = assignment.channels_of(j);
    if channels.is_empty() {
        return Ok(None);
    }
    let x_j = assignment.cellular_mode(j);
    let mut up = 0.0;
    let mut down = 0.0;
    for ch in channels {
        let sets = co_channel_sets(assignment, ch);
        let xi = sinr(scenario, ch, &sets.lc, &sets.ld, j, x_j)?;
        match scenario.direction(ch) {
            Direction::Uplink => up += xi,
            Direction::Downlink => down += xi,
        }
    }
    Ok(Some(if x_j && scenario.link(j).is_d2d() { up.min(down) } else { up + down }))
}

/// Unweighted rate of `j` in bit/s/Hz; zero for an inactive D2D link.
pub fn link_rate(scenario: &Scenario, assignment: &Assignment, j: LinkId) -> Result<f64> {
    Ok(effective_sinr(scenario, assignment, j)?.map_or(0.0, |s| (1.0 + s).log2()))
}

/// Weighted sum-rate of `assignment`.
pub fn objective(scenario: &Scenario, assignment: &Assignment) -> Result<f64> {
    scenario.link_ids().map(|j| Ok(scenario.link(j).weight * link_rate(scenario, assignment, j)?)).sum()
}
