//! Random instance generator: uniform cellular users, clustered D2D pairs,
//! and gains `K · β · ζ · d^(−α)` with Rayleigh (unit-mean exponential power)
//! fading per channel and log-normal shadowing per ordered node pair.

use std::f64::consts::PI;
use std::path::Path;

use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::model::{db_to_linear, ChannelId, Counts, Link, LinkId, LinkKind, NodeId, Scenario};

/// Generator parameters. The defaults are an implementation choice, not a
/// published parameter set; every experiment records the full config.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenConfig {
    pub cell_radius_m: f64,
    pub d2d_cluster_radius_m: f64,
    pub d2d_pair_distance_max_m: f64,
    pub d2d_clusters: usize,
    pub counts: Counts,
    /// Path-loss constant `K` (gain at 1 m).
    pub path_loss_constant: f64,
    pub path_loss_exponent: f64,
    pub shadow_sigma_db: f64,
    pub noise_w: f64,
    pub power_cellular_w: f64,
    pub power_d2d_w: f64,
    pub bs_total_power_w: f64,
    pub weight_cellular: f64,
    pub weight_d2d: f64,
    pub sinr_min_cellular_db: f64,
    pub sinr_min_d2d_db: f64,
    pub master_seed: u64,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            cell_radius_m: 500.0,
            d2d_cluster_radius_m: 150.0,
            d2d_pair_distance_max_m: 50.0,
            d2d_clusters: 1,
            counts: Counts { n_uc: 1, n_dc: 1, n_d: 4, m_u: 3, m_d: 3 },
            path_loss_constant: 1e-3,
            path_loss_exponent: 3.5,
            shadow_sigma_db: 8.0,
            // -114 dBm
            noise_w: 10f64.powf(-14.4),
            power_cellular_w: 0.2,
            power_d2d_w: 0.2,
            bs_total_power_w: 40.0,
            weight_cellular: 1.0,
            weight_d2d: 1.0,
            sinr_min_cellular_db: 0.0,
            sinr_min_d2d_db: 0.0,
            master_seed: 0,
        }
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !positive(self.cell_radius_m)
            || !positive(self.d2d_cluster_radius_m)
            || !positive(self.d2d_pair_distance_max_m)
        {
            return bad("radii and distances must be positive");
        }
        if !positive(self.power_cellular_w) || !positive(self.power_d2d_w) || !positive(self.bs_total_power_w) {
            return bad("powers must be positive");
        }
        if !positive(self.path_loss_constant) || !positive(self.path_loss_exponent) {
            return bad("path-loss constant and exponent must be positive");
        }
        if !(self.shadow_sigma_db >= 0.0 && self.shadow_sigma_db.is_finite()) {
            return bad("shadow_sigma_db must be non-negative");
        }
        if !positive(self.noise_w) {
            return bad("noise_w must be positive");
        }
        if !(self.weight_cellular >= 0.0 && self.weight_d2d >= 0.0) {
            return bad("weights must be non-negative");
        }
        if !self.sinr_min_cellular_db.is_finite() || !self.sinr_min_d2d_db.is_finite() {
            return bad("SINR floors must be finite");
        }
        if self.d2d_clusters == 0 {
            return bad("need at least one D2D cluster");
        }
        let c = self.counts;
        if c.m_u < c.n_uc || c.m_d < c.n_dc {
            return bad("need m_u >= n_uc and m_d >= n_dc");
        }
        if c.n_uc + c.n_dc + c.n_d > 64 {
            return bad("at most 64 links are supported");
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let cfg: GenConfig = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn n_nodes(&self) -> usize {
        1 + self.counts.n_uc + self.counts.n_dc + 2 * self.counts.n_d
    }

    /// Transmitter and receiver node of the `k`-th D2D link (0-based).
    pub fn d2d_nodes(&self, k: usize) -> (NodeId, NodeId) {
        let tx = 1 + self.counts.n_uc + self.counts.n_dc + 2 * k;
        (NodeId(tx), NodeId(tx + 1))
    }

    /// Deterministic part of the gain, `K · max(d, 1)^(−α)`.
    pub fn path_loss(&self, distance_m: f64) -> f64 {
        self.path_loss_constant * distance_m.max(1.0).powf(-self.path_loss_exponent)
    }

    /// Full gain for given fading factors.
    pub fn gain_from_factors(&self, distance_m: f64, beta: f64, zeta: f64) -> f64 {
        beta * zeta * self.path_loss(distance_m)
    }
}

/// Named substreams of a [`RandomStream`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Substream {
    Placement,
    Clusters,
    Shadowing,
    Fading,
}

impl Substream {
    pub const ALL: [Substream; 4] =
        [Substream::Placement, Substream::Clusters, Substream::Shadowing, Substream::Fading];

    pub fn name(self) -> &'static str {
        match self {
            Substream::Placement => "placement",
            Substream::Clusters => "clusters",
            Substream::Shadowing => "shadowing",
            Substream::Fading => "fading",
        }
    }
}

/// Counter-based random source: the value at `(master_seed, substream,
/// index)` does not depend on which other draws were made or in what order.
#[derive(Clone, Debug)]
pub struct RandomStream {
    master_seed: u64,
    rngs: [ChaCha8Rng; 4],
}

impl RandomStream {
    pub fn new(master_seed: u64) -> Self {
        RandomStream {
            master_seed,
            rngs: Substream::ALL.map(|s| ChaCha8Rng::from_seed(substream_key(master_seed, s.name()))),
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    /// Uniform draw in the open interval (0, 1).
    pub fn uniform(&mut self, stream: Substream, index: u64) -> f64 {
        let rng = &mut self.rngs[stream as usize];
        rng.set_word_pos(u128::from(index) * 2);
        let bits = rng.next_u64() >> 11;
        (bits as f64 + 0.5) / (1u64 << 53) as f64
    }

    /// Standard normal draw (Box-Muller over uniforms `2i` and `2i + 1`).
    pub fn normal(&mut self, stream: Substream, index: u64) -> f64 {
        let u1 = self.uniform(stream, 2 * index);
        let u2 = self.uniform(stream, 2 * index + 1);
        (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
    }

    /// Unit-mean exponential draw (inverse CDF).
    pub fn exp1(&mut self, stream: Substream, index: u64) -> f64 {
        -self.uniform(stream, index).ln()
    }

    /// Uniform point in a disc of `radius` around `center`.
    fn in_disc(&mut self, stream: Substream, index: u64, center: [f64; 2], radius: f64) -> [f64; 2] {
        let r = radius * self.uniform(stream, 2 * index).sqrt();
        let theta = 2.0 * PI * self.uniform(stream, 2 * index + 1);
        [center[0] + r * theta.cos(), center[1] + r * theta.sin()]
    }
}

fn substream_key(master_seed: u64, name: &str) -> [u8; 32] {
    let mut hasher = Sha256::new();
    hasher.update(b"d2d-substream");
    hasher.update(master_seed.to_le_bytes());
    hasher.update(name.as_bytes());
    hasher.finalize().into()
}

fn pair_index(tx: NodeId, rx: NodeId) -> u64 {
    ((tx.0 as u64) << 20) | rx.0 as u64
}

fn fading_index(channel: ChannelId, tx: NodeId, rx: NodeId) -> u64 {
    ((channel.index() as u64) << 40) | pair_index(tx, rx)
}

/// Node positions in meters with the base station at the origin.
///
/// Node order: base station, uplink cellular devices, downlink cellular
/// devices, then a transmitter/receiver pair per D2D link.
pub fn place_nodes(cfg: &GenConfig, stream: &mut RandomStream) -> Vec<[f64; 2]> {
    let n_cellular = cfg.counts.n_uc + cfg.counts.n_dc;
    let mut positions = vec![[0.0, 0.0]];
    for node in 1..=n_cellular {
        positions.push(stream.in_disc(Substream::Placement, node as u64, [0.0, 0.0], cfg.cell_radius_m));
    }
    let centers: Vec<[f64; 2]> = (0..cfg.d2d_clusters)
        .map(|c| stream.in_disc(Substream::Clusters, c as u64, [0.0, 0.0], cfg.cell_radius_m))
        .collect();
    for k in 0..cfg.counts.n_d {
        let (tx, rx) = cfg.d2d_nodes(k);
        let center = centers[k % cfg.d2d_clusters];
        let tx_pos = stream.in_disc(Substream::Placement, tx.0 as u64, center, cfg.d2d_cluster_radius_m);
        let rx_pos = stream.in_disc(Substream::Placement, rx.0 as u64, tx_pos, cfg.d2d_pair_distance_max_m);
        positions.push(tx_pos);
        positions.push(rx_pos);
    }
    positions
}

/// Gain from `tx` to `rx` on `channel`: shadowing is keyed by the ordered
/// node pair, fading by channel and ordered pair.
pub fn sample_gain(
    cfg: &GenConfig,
    stream: &mut RandomStream,
    channel: ChannelId,
    tx: NodeId,
    rx: NodeId,
    distance_m: f64,
) -> f64 {
    let beta = stream.exp1(Substream::Fading, fading_index(channel, tx, rx));
    let shadow_db = cfg.shadow_sigma_db * stream.normal(Substream::Shadowing, pair_index(tx, rx));
    cfg.gain_from_factors(distance_m, beta, db_to_linear(shadow_db))
}

/// Draws a full instance. Pure in `cfg`.
pub fn generate(cfg: &GenConfig) -> Result<Scenario> {
    cfg.validate()?;
    let mut stream = RandomStream::new(cfg.master_seed);
    let positions = place_nodes(cfg, &mut stream);
    let c = cfg.counts;

    let mut links = Vec::with_capacity(c.n_uc + c.n_dc + c.n_d);
    for node in 1..=c.n_uc + c.n_dc {
        let device = NodeId(node);
        let (kind, weight, floor_db) = if node <= c.n_uc {
            (LinkKind::UplinkCellular { device }, cfg.weight_cellular, cfg.sinr_min_cellular_db)
        } else {
            (LinkKind::DownlinkCellular { device }, cfg.weight_cellular, cfg.sinr_min_cellular_db)
        };
        links.push(Link {
            id: LinkId(node),
            kind,
            power_cellular_w: cfg.power_cellular_w,
            weight,
            sinr_min: db_to_linear(floor_db),
        });
    }
    for k in 0..c.n_d {
        let (tx_device, rx_device) = cfg.d2d_nodes(k);
        links.push(Link {
            id: LinkId(c.n_uc + c.n_dc + k + 1),
            kind: LinkKind::D2d { tx_device, rx_device, power_d2d_w: cfg.power_d2d_w },
            power_cellular_w: cfg.power_cellular_w,
            weight: cfg.weight_d2d,
            sinr_min: db_to_linear(cfg.sinr_min_d2d_db),
        });
    }

    let n = positions.len();
    let gains = (0..c.m_u + c.m_d)
        .map(|ch| {
            let channel = ChannelId::from_index(ch);
            (0..n)
                .map(|a| {
                    (0..n)
                        .map(|b| {
                            let d = distance(positions[a], positions[b]);
                            sample_gain(cfg, &mut stream, channel, NodeId(a), NodeId(b), d)
                        })
                        .collect()
                })
                .collect()
        })
        .collect();

    Scenario::new(links, c.m_u, c.m_d, gains, cfg.noise_w, cfg.bs_total_power_w)?.with_positions(positions)
}

pub fn distance(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}
