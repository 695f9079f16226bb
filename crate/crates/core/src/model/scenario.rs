use std::path::Path;

use serde::{Deserialize, Serialize};

use super::ids::{ChannelId, Direction, LinkId, NodeId};
use crate::error::{Error, Result};

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[derive(Clone, Debug, PartialEq)]
pub enum LinkKind {
    UplinkCellular { device: NodeId },
    DownlinkCellular { device: NodeId },
    D2d { tx_device: NodeId, rx_device: NodeId, power_d2d_w: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Link {
    pub id: LinkId,
    pub kind: LinkKind,
    /// Transmit power on an uplink channel: the cellular uplink power, or
    /// the uplink hop of a D2D link running in cellular mode.
    pub power_cellular_w: f64,
    pub weight: f64,
    /// Minimum SINR as a linear ratio.
    pub sinr_min: f64,
}

impl Link {
    pub fn is_cellular(&self) -> bool {
        !self.is_d2d()
    }

    pub fn is_d2d(&self) -> bool {
        matches!(self.kind, LinkKind::D2d { .. })
    }

    pub fn is_uplink_cellular(&self) -> bool {
        matches!(self.kind, LinkKind::UplinkCellular { .. })
    }

    pub fn is_downlink_cellular(&self) -> bool {
        matches!(self.kind, LinkKind::DownlinkCellular { .. })
    }
}

/// Population and channel counts of an instance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub n_uc: usize,
    pub n_dc: usize,
    pub n_d: usize,
    pub m_u: usize,
    pub m_d: usize,
}

/// An immutable problem instance.
///
/// Gains are stored as one dense node-pair table per channel: `gain(i, a, b)`
/// is the linear power gain from transmitting node `a` to receiving node `b`
/// on channel `i`. Direct and interference gains of every mode are resolved
/// through this single table.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    links: Vec<Link>,
    counts: Counts,
    n_nodes: usize,
    gains: Vec<f64>,
    noise_w: f64,
    bs_total_power_w: f64,
    positions: Option<Vec<[f64; 2]>>,
}

impl Scenario {
    /// Builds and validates an instance. `gains` is indexed
    /// `[channel index][tx node][rx node]`.
    pub fn new(
        links: Vec<Link>,
        m_u: usize,
        m_d: usize,
        gains: Vec<Vec<Vec<f64>>>,
        noise_w: f64,
        bs_total_power_w: f64,
    ) -> Result<Self> {
        let invalid = |msg: String| Err(Error::InvalidScenario(msg));

        let n_uc = links.iter().filter(|l| l.is_uplink_cellular()).count();
        let n_dc = links.iter().filter(|l| l.is_downlink_cellular()).count();
        let n_d = links.len() - n_uc - n_dc;
        for (pos, link) in links.iter().enumerate() {
            if link.id != LinkId::from_index(pos) {
                return invalid(format!("link at position {pos} has id {}", link.id.0));
            }
            let expected_rank = if pos < n_uc {
                0
            } else if pos < n_uc + n_dc {
                1
            } else {
                2
            };
            let rank = match link.kind {
                LinkKind::UplinkCellular { .. } => 0,
                LinkKind::DownlinkCellular { .. } => 1,
                LinkKind::D2d { .. } => 2,
            };
            if rank != expected_rank {
                return invalid(format!(
                    "{} out of order: uplink cellular, downlink cellular, then D2D links",
                    link.id
                ));
            }
            if !(link.weight >= 0.0 && link.weight.is_finite()) {
                return invalid(format!("{} has weight {}", link.id, link.weight));
            }
            if !(link.sinr_min > 0.0 && link.sinr_min.is_finite()) {
                return invalid(format!("{} has sinr_min {}", link.id, link.sinr_min));
            }
            if !(link.power_cellular_w >= 0.0 && link.power_cellular_w.is_finite()) {
                return invalid(format!("{} has cellular power {}", link.id, link.power_cellular_w));
            }
        }
        if m_u < n_uc || m_d < n_dc {
            return invalid(format!(
                "need m_u >= n_uc and m_d >= n_dc, got m_u={m_u} n_uc={n_uc} m_d={m_d} n_dc={n_dc}"
            ));
        }
        if !(noise_w > 0.0 && noise_w.is_finite()) {
            return invalid(format!("noise_w must be positive, got {noise_w}"));
        }
        if !(bs_total_power_w >= 0.0 && bs_total_power_w.is_finite()) {
            return invalid(format!("bs_total_power_w must be non-negative, got {bs_total_power_w}"));
        }

        let m = m_u + m_d;
        if gains.len() != m {
            return invalid(format!("gain table has {} channels, expected {m}", gains.len()));
        }
        let n_nodes = gains.first().map_or(1, |g| g.len());
        let mut flat = Vec::with_capacity(m * n_nodes * n_nodes);
        for (ch, table) in gains.iter().enumerate() {
            if table.len() != n_nodes {
                return invalid(format!("channel {} gain table has {} rows", ch + 1, table.len()));
            }
            for row in table {
                if row.len() != n_nodes {
                    return invalid(format!("channel {} gain table is not square", ch + 1));
                }
                for &g in row {
                    if !(g >= 0.0 && g.is_finite()) {
                        return invalid(format!("gain {g} on channel {} is not finite and >= 0", ch + 1));
                    }
                    flat.push(g);
                }
            }
        }

        for link in &links {
            let in_range = |n: NodeId| n.0 < n_nodes;
            match link.kind {
                LinkKind::UplinkCellular { device } | LinkKind::DownlinkCellular { device } => {
                    if !in_range(device) || device.is_base_station() {
                        return invalid(format!("{} has invalid device node {}", link.id, device.0));
                    }
                }
                LinkKind::D2d { tx_device, rx_device, power_d2d_w } => {
                    if !in_range(tx_device) || !in_range(rx_device) {
                        return invalid(format!("{} references a node outside the gain table", link.id));
                    }
                    if tx_device == rx_device || tx_device.is_base_station() || rx_device.is_base_station() {
                        return invalid(format!("{} needs two distinct non-BS devices", link.id));
                    }
                    if !(power_d2d_w >= 0.0 && power_d2d_w.is_finite()) {
                        return invalid(format!("{} has D2D power {power_d2d_w}", link.id));
                    }
                }
            }
        }
        if links.len() > 64 {
            return invalid(format!("at most 64 links are supported, got {}", links.len()));
        }

        Ok(Scenario {
            links,
            counts: Counts { n_uc, n_dc, n_d, m_u, m_d },
            n_nodes,
            gains: flat,
            noise_w,
            bs_total_power_w,
            positions: None,
        })
    }

    /// Attaches informational node positions (meters, BS at the origin).
    pub fn with_positions(mut self, positions: Vec<[f64; 2]>) -> Result<Self> {
        if positions.len() != self.n_nodes {
            return Err(Error::InvalidScenario(format!("{} positions for {} nodes", positions.len(), self.n_nodes)));
        }
        self.positions = Some(positions);
        Ok(self)
    }

    /// Returns a copy with one gain entry replaced.
    pub fn with_gain(mut self, channel: ChannelId, tx: NodeId, rx: NodeId, gain: f64) -> Result<Self> {
        if channel.0 == 0 || channel.0 > self.m() || tx.0 >= self.n_nodes || rx.0 >= self.n_nodes {
            return Err(Error::Contract(format!("gain index ({channel}, {}, {}) out of range", tx.0, rx.0)));
        }
        if !(gain >= 0.0 && gain.is_finite()) {
            return Err(Error::InvalidScenario(format!("gain {gain} is not finite and >= 0")));
        }
        let idx = self.gain_index(channel, tx, rx);
        self.gains[idx] = gain;
        Ok(self)
    }

    pub fn with_noise(&self, noise_w: f64) -> Result<Self> {
        if !(noise_w > 0.0 && noise_w.is_finite()) {
            return Err(Error::InvalidScenario(format!("noise_w must be positive, got {noise_w}")));
        }
        let mut out = self.clone();
        out.noise_w = noise_w;
        Ok(out)
    }

    /// Returns a copy with every link passed through `f`. Ids and kinds must
    /// be left alone; everything is re-validated.
    pub fn map_links(&self, mut f: impl FnMut(&mut Link)) -> Result<Self> {
        let mut links = self.links.clone();
        links.iter_mut().for_each(&mut f);
        let mut out = Scenario::new(
            links,
            self.counts.m_u,
            self.counts.m_d,
            self.gain_tables(),
            self.noise_w,
            self.bs_total_power_w,
        )?;
        out.positions = self.positions.clone();
        Ok(out)
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn link(&self, id: LinkId) -> &Link {
        &self.links[id.index()]
    }

    pub fn counts(&self) -> Counts {
        self.counts
    }

    pub fn n_links(&self) -> usize {
        self.links.len()
    }

    pub fn n_cellular(&self) -> usize {
        self.counts.n_uc + self.counts.n_dc
    }

    pub fn m_u(&self) -> usize {
        self.counts.m_u
    }

    pub fn m_d(&self) -> usize {
        self.counts.m_d
    }

    pub fn m(&self) -> usize {
        self.counts.m_u + self.counts.m_d
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn noise_w(&self) -> f64 {
        self.noise_w
    }

    pub fn bs_total_power_w(&self) -> f64 {
        self.bs_total_power_w
    }

    pub fn positions(&self) -> Option<&[[f64; 2]]> {
        self.positions.as_deref()
    }

    pub fn direction(&self, channel: ChannelId) -> Direction {
        if channel.0 <= self.counts.m_u {
            Direction::Uplink
        } else {
            Direction::Downlink
        }
    }

    pub fn has_channel(&self, channel: ChannelId) -> bool {
        channel.0 >= 1 && channel.0 <= self.m()
    }

    pub fn has_link(&self, link: LinkId) -> bool {
        link.0 >= 1 && link.0 <= self.links.len()
    }

    pub fn channels(&self) -> impl Iterator<Item = ChannelId> {
        (1..=self.m()).map(ChannelId)
    }

    pub fn uplink_channels(&self) -> impl Iterator<Item = ChannelId> {
        (1..=self.counts.m_u).map(ChannelId)
    }

    pub fn downlink_channels(&self) -> impl Iterator<Item = ChannelId> {
        (self.counts.m_u + 1..=self.m()).map(ChannelId)
    }

    pub fn link_ids(&self) -> impl Iterator<Item = LinkId> {
        (1..=self.links.len()).map(LinkId)
    }

    pub fn cellular_links(&self) -> impl Iterator<Item = LinkId> {
        (1..=self.n_cellular()).map(LinkId)
    }

    pub fn d2d_links(&self) -> impl Iterator<Item = LinkId> {
        (self.n_cellular() + 1..=self.links.len()).map(LinkId)
    }

    pub fn gain(&self, channel: ChannelId, tx: NodeId, rx: NodeId) -> f64 {
        self.gains[self.gain_index(channel, tx, rx)]
    }

    fn gain_index(&self, channel: ChannelId, tx: NodeId, rx: NodeId) -> usize {
        (channel.index() * self.n_nodes + tx.0) * self.n_nodes + rx.0
    }

    pub fn gain_tables(&self) -> Vec<Vec<Vec<f64>>> {
        let n = self.n_nodes;
        self.gains.chunks(n * n).map(|table| table.chunks(n).map(|row| row.to_vec()).collect()).collect()
    }

    pub fn to_file(&self) -> ScenarioFile {
        ScenarioFile {
            counts: self.counts,
            noise_w: self.noise_w,
            bs_total_power_w: self.bs_total_power_w,
            links: self.links.iter().map(LinkRecord::from).collect(),
            gains: self.gain_tables(),
            positions: self.positions.clone(),
        }
    }

    pub fn from_file(file: ScenarioFile) -> Result<Self> {
        let links = file.links.into_iter().map(Link::try_from).collect::<Result<Vec<_>>>()?;
        let scenario =
            Scenario::new(links, file.counts.m_u, file.counts.m_d, file.gains, file.noise_w, file.bs_total_power_w)?;
        if scenario.counts != file.counts {
            return Err(Error::InvalidScenario(format!(
                "declared counts {:?} do not match the link list {:?}",
                file.counts, scenario.counts
            )));
        }
        match file.positions {
            Some(p) => scenario.with_positions(p),
            None => Ok(scenario),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_file())?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Scenario::from_file(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Scenario::from_json(&std::fs::read_to_string(path)?)
    }
}

/// On-disk scenario layout.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScenarioFile {
    pub counts: Counts,
    pub noise_w: f64,
    pub bs_total_power_w: f64,
    pub links: Vec<LinkRecord>,
    /// `[channel][tx_node][rx_node]`, channel 0 of the array is channel id 1.
    pub gains: Vec<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positions: Option<Vec<[f64; 2]>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkKindTag {
    UplinkCellular,
    DownlinkCellular,
    D2d,
}

/// On-disk link layout. The SINR floor may be given either as a linear
/// ratio (`sinr_min`) or in dB (`sinr_min_db`).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LinkRecord {
    pub id: usize,
    pub kind: LinkKindTag,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub device: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tx_device: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rx_device: Option<usize>,
    pub power_cellular_w: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub power_d2d_w: Option<f64>,
    pub weight: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sinr_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sinr_min_db: Option<f64>,
}

impl From<&Link> for LinkRecord {
    fn from(link: &Link) -> Self {
        let mut record = LinkRecord {
            id: link.id.0,
            kind: LinkKindTag::D2d,
            device: None,
            tx_device: None,
            rx_device: None,
            power_cellular_w: link.power_cellular_w,
            power_d2d_w: None,
            weight: link.weight,
            sinr_min: Some(link.sinr_min),
            sinr_min_db: None,
        };
        match link.kind {
            LinkKind::UplinkCellular { device } => {
                record.kind = LinkKindTag::UplinkCellular;
                record.device = Some(device.0);
            }
            LinkKind::DownlinkCellular { device } => {
                record.kind = LinkKindTag::DownlinkCellular;
                record.device = Some(device.0);
            }
            LinkKind::D2d { tx_device, rx_device, power_d2d_w } => {
                record.tx_device = Some(tx_device.0);
                record.rx_device = Some(rx_device.0);
                record.power_d2d_w = Some(power_d2d_w);
            }
        }
        record
    }
}

impl TryFrom<LinkRecord> for Link {
    type Error = Error;

    fn try_from(r: LinkRecord) -> Result<Self> {
        let missing = |field: &str| Error::InvalidScenario(format!("link {} is missing `{field}`", r.id));
        let sinr_min = match (r.sinr_min, r.sinr_min_db) {
            (Some(lin), None) => lin,
            (None, Some(db)) => db_to_linear(db),
            (Some(_), Some(_)) => {
                return Err(Error::InvalidScenario(format!("link {} gives both sinr_min and sinr_min_db", r.id)))
            }
            (None, None) => return Err(missing("sinr_min")),
        };
        let kind = match r.kind {
            LinkKindTag::UplinkCellular => {
                LinkKind::UplinkCellular { device: NodeId(r.device.ok_or_else(|| missing("device"))?) }
            }
            LinkKindTag::DownlinkCellular => {
                LinkKind::DownlinkCellular { device: NodeId(r.device.ok_or_else(|| missing("device"))?) }
            }
            LinkKindTag::D2d => LinkKind::D2d {
                tx_device: NodeId(r.tx_device.ok_or_else(|| missing("tx_device"))?),
                rx_device: NodeId(r.rx_device.ok_or_else(|| missing("rx_device"))?),
                power_d2d_w: r.power_d2d_w.ok_or_else(|| missing("power_d2d_w"))?,
            },
        };
        if r.id == 0 {
            return Err(Error::InvalidScenario("link ids start at 1".into()));
        }
        Ok(Link { id: LinkId(r.id), kind, power_cellular_w: r.power_cellular_w, weight: r.weight, sinr_min })
    }
}
