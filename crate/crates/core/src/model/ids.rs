use std::fmt;

use serde::{Deserialize, Serialize};

/// A node of the single-cell network. Index 0 is the base station.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub usize);

pub const BASE_STATION: NodeId = NodeId(0);

impl NodeId {
    pub fn is_base_station(self) -> bool {
        self == BASE_STATION
    }
}

/// 1-based channel index. Channels `1..=m_u` are uplink, the rest downlink.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ChannelId(pub usize);

impl ChannelId {
    /// 0-based position, for indexing dense tables.
    pub fn index(self) -> usize {
        self.0 - 1
    }

    pub fn from_index(index: usize) -> Self {
        ChannelId(index + 1)
    }
}

impl fmt::Display for ChannelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ch{}", self.0)
    }
}

/// 1-based link index. Uplink cellular links come first, then downlink
/// cellular links, then D2D links.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LinkId(pub usize);

impl LinkId {
    pub fn index(self) -> usize {
        self.0 - 1
    }

    pub fn from_index(index: usize) -> Self {
        LinkId(index + 1)
    }

    pub(crate) fn bit(self) -> u64 {
        1u64 << self.index()
    }
}

impl fmt::Display for LinkId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "link{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    Uplink,
    Downlink,
}
