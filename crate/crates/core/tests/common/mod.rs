//! Hand-built instances shared by the integration tests.
#![allow(dead_code)]

use d2d_core::model::{Link, LinkId, LinkKind, NodeId, Scenario};

pub fn ulc(id: usize, device: usize) -> Link {
    Link {
        id: LinkId(id),
        kind: LinkKind::UplinkCellular { device: NodeId(device) },
        power_cellular_w: 1.0,
        weight: 1.0,
        sinr_min: 1e-6,
    }
}

pub fn dlc(id: usize, device: usize) -> Link {
    Link {
        id: LinkId(id),
        kind: LinkKind::DownlinkCellular { device: NodeId(device) },
        power_cellular_w: 1.0,
        weight: 1.0,
        sinr_min: 1e-6,
    }
}

pub fn d2d(id: usize, tx: usize, rx: usize) -> Link {
    Link {
        id: LinkId(id),
        kind: LinkKind::D2d { tx_device: NodeId(tx), rx_device: NodeId(rx), power_d2d_w: 1.0 },
        power_cellular_w: 1.0,
        weight: 1.0,
        sinr_min: 1e-6,
    }
}

pub fn with_floor(mut link: Link, sinr_min: f64) -> Link {
    link.sinr_min = sinr_min;
    link
}

pub fn with_weight(mut link: Link, weight: f64) -> Link {
    link.weight = weight;
    link
}

/// Number of nodes implied by the device ids of `links`.
pub fn node_count(links: &[Link]) -> usize {
    links
        .iter()
        .map(|l| match l.kind {
            LinkKind::UplinkCellular { device } | LinkKind::DownlinkCellular { device } => device.0,
            LinkKind::D2d { tx_device, rx_device, .. } => tx_device.0.max(rx_device.0),
        })
        .max()
        .unwrap_or(0)
        + 1
}

/// Instance with every gain set by `gain(channel index, tx, rx)`.
pub fn build(
    links: Vec<Link>,
    m_u: usize,
    m_d: usize,
    noise_w: f64,
    bs_total_power_w: f64,
    gain: impl Fn(usize, usize, usize) -> f64,
) -> Scenario {
    let n = node_count(&links);
    let gains = (0..m_u + m_d).map(|c| (0..n).map(|a| (0..n).map(|b| gain(c, a, b)).collect()).collect()).collect();
    Scenario::new(links, m_u, m_d, gains, noise_w, bs_total_power_w).unwrap()
}

/// Best assignment of every column to a distinct row, scanning row vectors
/// in lexicographic order so the first optimum found is the smallest.
pub fn brute_force_matching(t: &[Vec<Option<f64>>], cols: usize) -> Option<(Vec<usize>, f64)> {
    fn rec(
        t: &[Vec<Option<f64>>],
        col: usize,
        cols: usize,
        used: &mut Vec<bool>,
        cur: &mut Vec<usize>,
        sum: f64,
        best: &mut Option<(Vec<usize>, f64)>,
    ) {
        if col == cols {
            if best.as_ref().is_none_or(|(_, b)| sum > *b + 1e-9) {
                *best = Some((cur.clone(), sum));
            }
            return;
        }
        for row in 0..t.len() {
            if let (false, Some(w)) = (used[row], t[row][col]) {
                used[row] = true;
                cur.push(row);
                rec(t, col + 1, cols, used, cur, sum + w, best);
                cur.pop();
                used[row] = false;
            }
        }
    }
    let mut best = None;
    rec(t, 0, cols, &mut vec![false; t.len()], &mut Vec::new(), 0.0, &mut best);
    best
}
