use serde::{Deserialize, Serialize};

use super::ids::{ChannelId, LinkId};
use super::scenario::Scenario;
use crate::error::{Error, Result};

/// Decision variables: channel incidence `rho` and per-link mode flag `x`.
///
/// `x = true` marks a cellular link or a D2D link running in cellular mode
/// (relayed through the base station). Both are stored as bitmasks over
/// 0-based link indices, so an instance holds at most 64 links.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Assignment {
    n_links: usize,
    n_cellular: usize,
    rho: Vec<u64>,
    x: u64,
}

impl Assignment {
    /// No channel assigned; cellular links carry `x = 1`, D2D links `x = 0`.
    pub fn empty(scenario: &Scenario) -> Self {
        let n_cellular = scenario.n_cellular();
        Assignment { n_links: scenario.n_links(), n_cellular, rho: vec![0; scenario.m()], x: low_bits(n_cellular) }
    }

    pub fn n_channels(&self) -> usize {
        self.rho.len()
    }

    pub fn n_links(&self) -> usize {
        self.n_links
    }

    fn check(&self, channel: ChannelId, link: LinkId) -> Result<()> {
        if channel.0 == 0 || channel.0 > self.rho.len() {
            return Err(Error::Contract(format!("{channel} out of range")));
        }
        if link.0 == 0 || link.0 > self.n_links {
            return Err(Error::Contract(format!("{link} out of range")));
        }
        Ok(())
    }

    /// Sets `rho[channel][link] = 1`.
    pub fn assign(&mut self, channel: ChannelId, link: LinkId) -> Result<()> {
        self.check(channel, link)?;
        self.rho[channel.index()] |= link.bit();
        Ok(())
    }

    pub fn unassign(&mut self, channel: ChannelId, link: LinkId) -> Result<()> {
        self.check(channel, link)?;
        self.rho[channel.index()] &= !link.bit();
        Ok(())
    }

    /// Sets the mode flag of a D2D link. Cellular links are pinned to `x = 1`.
    pub fn set_cellular_mode(&mut self, link: LinkId, cellular_mode: bool) -> Result<()> {
        if link.0 == 0 || link.0 > self.n_links {
            return Err(Error::Contract(format!("{link} out of range")));
        }
        if link.0 <= self.n_cellular {
            if !cellular_mode {
                return Err(Error::Contract(format!("{link} is cellular and must keep x = 1")));
            }
            return Ok(());
        }
        if cellular_mode {
            self.x |= link.bit();
        } else {
            self.x &= !link.bit();
        }
        Ok(())
    }

    pub fn is_assigned(&self, channel: ChannelId, link: LinkId) -> bool {
        self.rho[channel.index()] & link.bit() != 0
    }

    pub fn cellular_mode(&self, link: LinkId) -> bool {
        self.x & link.bit() != 0
    }

    /// Bitmask of the links occupying `channel`.
    pub fn occupant_mask(&self, channel: ChannelId) -> u64 {
        self.rho[channel.index()]
    }

    pub fn occupants(&self, channel: ChannelId) -> Vec<LinkId> {
        mask_links(self.rho[channel.index()])
    }

    pub fn channels_of(&self, link: LinkId) -> Vec<ChannelId> {
        self.rho
            .iter()
            .enumerate()
            .filter(|(_, &mask)| mask & link.bit() != 0)
            .map(|(i, _)| ChannelId::from_index(i))
            .collect()
    }

    pub fn is_active(&self, link: LinkId) -> bool {
        self.rho.iter().any(|&mask| mask & link.bit() != 0)
    }

    /// All `(channel, link)` pairs with `rho = 1`, sorted.
    pub fn pairs(&self) -> Vec<(ChannelId, LinkId)> {
        self.rho
            .iter()
            .enumerate()
            .flat_map(|(i, &mask)| mask_links(mask).into_iter().map(move |l| (ChannelId::from_index(i), l)))
            .collect()
    }

    /// D2D links with `x = 1`, sorted.
    pub fn cellular_mode_d2d(&self) -> Vec<LinkId> {
        mask_links(self.x & !low_bits(self.n_cellular))
    }

    /// `(cellular-mode, D2D-mode, inactive)` counts over D2D links.
    pub fn mode_counts(&self) -> (usize, usize, usize) {
        let mut counts = (0, 0, 0);
        for idx in self.n_cellular..self.n_links {
            let link = LinkId::from_index(idx);
            if !self.is_active(link) {
                counts.2 += 1;
            } else if self.cellular_mode(link) {
                counts.0 += 1;
            } else {
                counts.1 += 1;
            }
        }
        counts
    }

    pub fn to_record(&self) -> AssignmentRecord {
        AssignmentRecord {
            rho: self.pairs().into_iter().map(|(c, l)| (c.0, l.0)).collect(),
            x: self.cellular_mode_d2d().into_iter().map(|l| l.0).collect(),
        }
    }

    pub fn from_record(scenario: &Scenario, record: &AssignmentRecord) -> Result<Self> {
        let mut out = Assignment::empty(scenario);
        for &(c, l) in &record.rho {
            out.assign(ChannelId(c), LinkId(l))?;
        }
        for &l in &record.x {
            if l <= scenario.n_cellular() {
                return Err(Error::Contract(format!("x lists cellular link {l}; only D2D links belong there")));
            }
            out.set_cellular_mode(LinkId(l), true)?;
        }
        Ok(out)
    }
}

/// On-disk assignment: `rho` as `(channel, link)` pairs and `x` as the ids of
/// D2D links running in cellular mode.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssignmentRecord {
    pub rho: Vec<(usize, usize)>,
    pub x: Vec<usize>,
}

/// Occupants of one channel, split by mode flag. Both lists are sorted.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CoChannelSets {
    /// Cellular links and cellular-mode D2D links (`x = 1`).
    pub lc: Vec<LinkId>,
    /// D2D-mode D2D links (`x = 0`).
    pub ld: Vec<LinkId>,
}

pub fn co_channel_sets(assignment: &Assignment, channel: ChannelId) -> CoChannelSets {
    let mask = assignment.occupant_mask(channel);
    CoChannelSets { lc: mask_links(mask & assignment.x), ld: mask_links(mask & !assignment.x) }
}

pub(crate) fn low_bits(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

pub(crate) fn mask_links(mut mask: u64) -> Vec<LinkId> {
    let mut out = Vec::with_capacity(mask.count_ones() as usize);
    while mask != 0 {
        let idx = mask.trailing_zeros() as usize;
        out.push(LinkId::from_index(idx));
        mask &= mask - 1;
    }
    out
}
