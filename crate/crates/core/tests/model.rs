mod common;

use common::{build, d2d, dlc, ulc, with_floor, with_weight};
use d2d_core::model::{
    check_feasible, co_channel_sets, link_rate, objective, sinr, tx_power, tx_rx_nodes, Assignment, ChannelId,
    Constraint, LinkId, LinkKind, NodeId, Scenario, BASE_STATION,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}

/// D2D link 1 alone, gains from `g(channel, tx, rx)`, one channel per direction.
fn lone_d2d(power: f64, g: impl Fn(usize, usize, usize) -> f64, noise: f64) -> Scenario {
    let mut link = d2d(1, 1, 2);
    link.kind = LinkKind::D2d { tx_device: NodeId(1), rx_device: NodeId(2), power_d2d_w: power };
    build(vec![link], 1, 1, noise, 1.0, g)
}

#[test]
fn tx_rx_nodes_follow_mode_and_direction() {
    let s = build(vec![ulc(1, 1), dlc(2, 2), d2d(3, 3, 4)], 1, 1, 1.0, 1.0, |_, _, _| 1.0);
    let (up, down) = (ChannelId(1), ChannelId(2));
    assert_eq!(tx_rx_nodes(&s, LinkId(1), true, up).unwrap(), (NodeId(1), BASE_STATION));
    assert_eq!(tx_rx_nodes(&s, LinkId(2), true, down).unwrap(), (BASE_STATION, NodeId(2)));
    assert_eq!(tx_rx_nodes(&s, LinkId(3), false, down).unwrap(), (NodeId(3), NodeId(4)));
    assert_eq!(tx_rx_nodes(&s, LinkId(3), true, up).unwrap(), (NodeId(3), BASE_STATION));
    assert_eq!(tx_rx_nodes(&s, LinkId(3), true, down).unwrap(), (BASE_STATION, NodeId(4)));
    assert!(tx_rx_nodes(&s, LinkId(1), true, down).is_err());
    assert!(tx_rx_nodes(&s, LinkId(2), true, up).is_err());
}

#[test]
fn tx_power_cases() {
    let mut link = d2d(3, 3, 4);
    link.kind = LinkKind::D2d { tx_device: NodeId(3), rx_device: NodeId(4), power_d2d_w: 0.3 };
    link.power_cellular_w = 0.7;
    let s = build(vec![ulc(1, 1), dlc(2, 2), link], 1, 4, 1.0, 40.0, |_, _, _| 1.0);
    assert_eq!(tx_power(&s, LinkId(3), false, ChannelId(1)).unwrap(), 0.3);
    assert_eq!(tx_power(&s, LinkId(3), true, ChannelId(1)).unwrap(), 0.7);
    assert_eq!(tx_power(&s, LinkId(3), true, ChannelId(2)).unwrap(), 10.0);
    assert_eq!(tx_power(&s, LinkId(2), true, ChannelId(5)).unwrap(), 10.0);
    assert_eq!(tx_power(&s, LinkId(1), true, ChannelId(1)).unwrap(), 1.0);
}

#[test]
fn sinr_of_a_lone_link_is_its_snr() {
    let s = lone_d2d(0.2, |_, a, b| if (a, b) == (1, 2) { 1e-3 } else { 0.0 }, 1e-4);
    let xi = sinr(&s, ChannelId(1), &[], &[LinkId(1)], LinkId(1), false).unwrap();
    assert!(close(xi, 2.0), "{xi}");
}

#[test]
fn sinr_of_two_symmetric_d2d_links() {
    let links = vec![d2d(1, 1, 2), d2d(2, 3, 4)];
    let s = build(links, 1, 1, 0.1, 1.0, |_, a, b| match (a, b) {
        (1, 2) | (3, 4) => 1.0,
        (1, 4) | (3, 2) => 0.1,
        _ => 0.0,
    });
    let ld = [LinkId(1), LinkId(2)];
    for j in ld {
        let xi = sinr(&s, ChannelId(1), &[], &ld, j, false).unwrap();
        assert!(close(xi, 5.0), "{j}: {xi}");
    }
}

#[test]
fn sinr_selects_the_direct_term_by_mode() {
    let mut link = ulc(1, 1);
    link.power_cellular_w = 2.0;
    let s = build(vec![link], 1, 0, 1.0, 1.0, |_, a, b| if (a, b) == (1, 0) { 0.5 } else { 0.0 });
    assert!(close(sinr(&s, ChannelId(1), &[LinkId(1)], &[], LinkId(1), true).unwrap(), 1.0));
}

#[test]
fn sinr_requires_membership() {
    let s = lone_d2d(1.0, |_, _, _| 1.0, 1.0);
    assert!(sinr(&s, ChannelId(1), &[], &[], LinkId(1), false).is_err());
    assert!(sinr(&s, ChannelId(1), &[], &[LinkId(1)], LinkId(1), true).is_err());
}

/// Link 1 in cellular mode on channels 1 (uplink SINR 3) and 2 (downlink SINR 1).
fn cellular_mode_instance(weight: f64) -> (Scenario, Assignment) {
    let s = build(vec![with_weight(d2d(1, 1, 2), weight)], 1, 1, 1.0, 1.0, |c, a, b| match (c, a, b) {
        (0, 1, 0) => 3.0,
        (1, 0, 2) => 1.0,
        _ => 0.0,
    });
    let mut asg = Assignment::empty(&s);
    asg.set_cellular_mode(LinkId(1), true).unwrap();
    asg.assign(ChannelId(1), LinkId(1)).unwrap();
    asg.assign(ChannelId(2), LinkId(1)).unwrap();
    (s, asg)
}

#[test]
fn link_rate_cases() {
    let s = lone_d2d(1.0, |_, a, b| if (a, b) == (1, 2) { 1.0 } else { 0.0 }, 1.0);
    let mut asg = Assignment::empty(&s);
    assert_eq!(link_rate(&s, &asg, LinkId(1)).unwrap(), 0.0);
    asg.assign(ChannelId(1), LinkId(1)).unwrap();
    assert!(close(link_rate(&s, &asg, LinkId(1)).unwrap(), 1.0));

    let (s, asg) = cellular_mode_instance(1.0);
    assert!(close(link_rate(&s, &asg, LinkId(1)).unwrap(), 1.0));
}

#[test]
fn objective_cases() {
    let s = build(vec![d2d(1, 1, 2), d2d(2, 3, 4)], 1, 1, 1.0, 1.0, |_, _, _| 1.0);
    assert_eq!(objective(&s, &Assignment::empty(&s)).unwrap(), 0.0);

    let s = lone_d2d(1.0, |_, a, b| if (a, b) == (1, 2) { 1.0 } else { 0.0 }, 1.0);
    let mut asg = Assignment::empty(&s);
    asg.assign(ChannelId(2), LinkId(1)).unwrap();
    assert!(close(objective(&s, &asg).unwrap(), 1.0));

    let (s, asg) = cellular_mode_instance(2.0);
    assert!(close(objective(&s, &asg).unwrap(), 2.0));
}

#[test]
fn check_feasible_reports_missing_channel() {
    let s = build(vec![ulc(1, 1)], 1, 0, 1.0, 1.0, |_, _, _| 1.0);
    let f = check_feasible(&s, &Assignment::empty(&s));
    assert!(f.has(Constraint::CellularOneChannel));
}

#[test]
fn check_feasible_reports_shared_cellular_channel() {
    let s = build(vec![ulc(1, 1), ulc(2, 2)], 2, 0, 1.0, 1.0, |_, _, _| 1.0);
    let mut asg = Assignment::empty(&s);
    asg.assign(ChannelId(1), LinkId(1)).unwrap();
    asg.assign(ChannelId(1), LinkId(2)).unwrap();
    assert!(check_feasible(&s, &asg).has(Constraint::OneCellularPerChannel));
}

#[test]
fn check_feasible_reports_d2d_floor() {
    let s =
        build(vec![with_floor(d2d(1, 1, 2), 1.0)], 1, 1, 2.0, 1.0, |_, a, b| if (a, b) == (1, 2) { 1.0 } else { 0.0 });
    let mut asg = Assignment::empty(&s);
    assert!(check_feasible(&s, &asg).is_ok());
    asg.assign(ChannelId(1), LinkId(1)).unwrap();
    let f = check_feasible(&s, &asg);
    assert!(f.has(Constraint::D2dQos));
    assert_eq!(f.violations.len(), 1);
}

#[test]
fn check_feasible_reports_structure() {
    let s = build(vec![ulc(1, 1), d2d(2, 2, 3), d2d(3, 4, 5)], 2, 2, 1.0, 1.0, |_, _, _| 1.0);
    let mut asg = Assignment::empty(&s);
    asg.assign(ChannelId(3), LinkId(1)).unwrap();
    asg.assign(ChannelId(1), LinkId(2)).unwrap();
    asg.assign(ChannelId(2), LinkId(2)).unwrap();
    asg.set_cellular_mode(LinkId(3), true).unwrap();
    asg.assign(ChannelId(4), LinkId(3)).unwrap();
    let f = check_feasible(&s, &asg);
    assert!(f.has(Constraint::CellularDirection));
    assert!(f.has(Constraint::D2dModeOneChannel));
    assert!(f.has(Constraint::CellularModeHops));
}

#[test]
fn co_channel_sets_split_by_mode() {
    let s = build(vec![ulc(1, 1), d2d(2, 2, 3), d2d(3, 4, 5)], 2, 1, 1.0, 1.0, |_, _, _| 1.0);
    let mut asg = Assignment::empty(&s);
    let empty = co_channel_sets(&asg, ChannelId(1));
    assert!(empty.lc.is_empty() && empty.ld.is_empty());
    asg.assign(ChannelId(1), LinkId(1)).unwrap();
    asg.assign(ChannelId(1), LinkId(2)).unwrap();
    let sets = co_channel_sets(&asg, ChannelId(1));
    assert_eq!((sets.lc, sets.ld), (vec![LinkId(1)], vec![LinkId(2)]));
    asg.set_cellular_mode(LinkId(3), true).unwrap();
    asg.assign(ChannelId(2), LinkId(3)).unwrap();
    asg.assign(ChannelId(3), LinkId(3)).unwrap();
    let sets = co_channel_sets(&asg, ChannelId(2));
    assert_eq!((sets.lc, sets.ld), (vec![LinkId(3)], vec![]));
}

#[test]
fn floors_in_db_are_converted_on_load() {
    let s = build(vec![d2d(1, 1, 2)], 1, 1, 1.0, 1.0, |_, _, _| 0.5);
    let mut file: serde_json::Value = serde_json::from_str(&s.to_json().unwrap()).unwrap();
    let link = &mut file["links"][0];
    link.as_object_mut().unwrap().remove("sinr_min");
    link["sinr_min_db"] = serde_json::json!(10.0);
    let loaded = Scenario::from_json(&file.to_string()).unwrap();
    assert!(close(loaded.link(LinkId(1)).sinr_min, 10.0));
}

#[test]
fn scenario_json_round_trips() {
    let s = build(vec![ulc(1, 1), dlc(2, 2), d2d(3, 3, 4)], 2, 1, 0.3, 7.0, |c, a, b| (1 + c + 3 * a + 7 * b) as f64);
    let back = Scenario::from_json(&s.to_json().unwrap()).unwrap();
    assert_eq!(back, s);
}

#[test]
fn invalid_scenarios_are_rejected() {
    let gains = |n: usize, m: usize| vec![vec![vec![1.0; n]; n]; m];
    // Out of kind order.
    assert!(Scenario::new(vec![d2d(1, 1, 2), ulc(2, 3)], 1, 1, gains(4, 2), 1.0, 1.0).is_err());
    // Fewer uplink channels than uplink cellular links.
    assert!(Scenario::new(vec![ulc(1, 1), ulc(2, 2)], 1, 1, gains(3, 2), 1.0, 1.0).is_err());
    // Negative gain.
    let mut g = gains(3, 2);
    g[0][1][2] = -1.0;
    assert!(Scenario::new(vec![d2d(1, 1, 2)], 1, 1, g, 1.0, 1.0).is_err());
    // Non-positive noise.
    assert!(Scenario::new(vec![d2d(1, 1, 2)], 1, 1, gains(3, 2), 0.0, 1.0).is_err());
}

/// 1 ULC, 1 DLC and 3 D2D links on 2 + 2 channels with random gains and a
/// random structurally valid assignment.
fn random_instance(rng: &mut ChaCha8Rng) -> (Scenario, Assignment) {
    let links = vec![ulc(1, 1), dlc(2, 2), d2d(3, 3, 4), d2d(4, 5, 6), d2d(5, 7, 8)];
    let n = 9;
    let gains: Vec<Vec<Vec<f64>>> =
        (0..4).map(|_| (0..n).map(|_| (0..n).map(|_| rng.gen_range(0.01..2.0)).collect()).collect()).collect();
    let s = Scenario::new(links, 2, 2, gains, rng.gen_range(0.05..1.0), rng.gen_range(0.5..4.0)).unwrap();
    let mut asg = Assignment::empty(&s);
    let up = [ChannelId(1), ChannelId(2)];
    let down = [ChannelId(3), ChannelId(4)];
    asg.assign(up[rng.gen_range(0..2)], LinkId(1)).unwrap();
    asg.assign(down[rng.gen_range(0..2)], LinkId(2)).unwrap();
    for j in 3..=5 {
        let j = LinkId(j);
        match rng.gen_range(0..3) {
            0 => {}
            1 => asg.assign(ChannelId(rng.gen_range(1..=4)), j).unwrap(),
            _ => {
                asg.set_cellular_mode(j, true).unwrap();
                asg.assign(up[rng.gen_range(0..2)], j).unwrap();
                asg.assign(down[rng.gen_range(0..2)], j).unwrap();
            }
        }
    }
    (s, asg)
}

/// Applies a D2D-link permutation and per-direction channel permutations.
fn relabel(
    s: &Scenario,
    asg: &Assignment,
    link_perm: &[usize],
    up_perm: &[usize],
    down_perm: &[usize],
) -> (Scenario, Assignment) {
    let m_u = s.m_u();
    let ch_map = |c: ChannelId| {
        let i = c.index();
        if i < m_u {
            ChannelId::from_index(up_perm[i])
        } else {
            ChannelId::from_index(m_u + down_perm[i - m_u])
        }
    };
    let n_c = s.n_cellular();
    let link_map = |l: LinkId| {
        let i = l.index();
        if i < n_c {
            l
        } else {
            LinkId::from_index(n_c + link_perm[i - n_c])
        }
    };
    let mut links = s.links().to_vec();
    for old in s.links() {
        let new_id = link_map(old.id);
        links[new_id.index()] = old.clone();
        links[new_id.index()].id = new_id;
    }
    let old_gains = s.gain_tables();
    let mut gains = old_gains.clone();
    for c in s.channels() {
        gains[ch_map(c).index()] = old_gains[c.index()].clone();
    }
    let t = Scenario::new(links, s.m_u(), s.m_d(), gains, s.noise_w(), s.bs_total_power_w()).unwrap();
    let mut out = Assignment::empty(&t);
    for (c, l) in asg.pairs() {
        out.assign(ch_map(c), link_map(l)).unwrap();
    }
    for l in asg.cellular_mode_d2d() {
        out.set_cellular_mode(link_map(l), true).unwrap();
    }
    (t, out)
}

/// Straight-line feasibility verdict.
fn oracle_feasible(s: &Scenario, asg: &Assignment) -> bool {
    let m_u = s.m_u();
    let is_up = |c: usize| c < m_u;
    let n = s.n_links();
    let m = s.m();
    let on = |c: usize, j: usize| asg.is_assigned(ChannelId(c + 1), LinkId(j + 1));
    let x = |j: usize| asg.cellular_mode(LinkId(j + 1));
    for j in 0..n {
        let link = s.link(LinkId(j + 1));
        let chans: Vec<usize> = (0..m).filter(|&c| on(c, j)).collect();
        let ups = chans.iter().filter(|&&c| is_up(c)).count();
        let downs = chans.len() - ups;
        match link.kind {
            LinkKind::UplinkCellular { .. } => {
                if chans.len() != 1 || ups != 1 {
                    return false;
                }
            }
            LinkKind::DownlinkCellular { .. } => {
                if chans.len() != 1 || downs != 1 {
                    return false;
                }
            }
            LinkKind::D2d { .. } => {
                if x(j) {
                    if !(chans.is_empty() || (ups == 1 && downs == 1)) {
                        return false;
                    }
                } else if chans.len() > 1 {
                    return false;
                }
            }
        }
    }
    for c in 0..m {
        if (0..n).filter(|&j| on(c, j) && x(j)).count() > 1 {
            return false;
        }
    }
    let ends = |j: usize, c: usize| -> (usize, usize, f64) {
        let link = s.link(LinkId(j + 1));
        let bs_p = s.bs_total_power_w() / s.m_d() as f64;
        match link.kind {
            LinkKind::UplinkCellular { device } => (device.0, 0, link.power_cellular_w),
            LinkKind::DownlinkCellular { device } => (0, device.0, bs_p),
            LinkKind::D2d { tx_device, rx_device, power_d2d_w } => {
                if !x(j) {
                    (tx_device.0, rx_device.0, power_d2d_w)
                } else if is_up(c) {
                    (tx_device.0, 0, link.power_cellular_w)
                } else {
                    (0, rx_device.0, bs_p)
                }
            }
        }
    };
    let sinr_on = |j: usize, c: usize| {
        let (tx, rx, p) = ends(j, c);
        let mut den = s.noise_w();
        for z in (0..n).filter(|&z| z != j && on(c, z)) {
            let (ztx, _, zp) = ends(z, c);
            den += zp * s.gain(ChannelId(c + 1), NodeId(ztx), NodeId(rx));
        }
        p * s.gain(ChannelId(c + 1), NodeId(tx), NodeId(rx)) / den
    };
    for j in 0..n {
        let chans: Vec<usize> = (0..m).filter(|&c| on(c, j)).collect();
        if chans.is_empty() {
            continue;
        }
        let value = chans.iter().map(|&c| sinr_on(j, c)).fold(f64::INFINITY, f64::min);
        if value < s.link(LinkId(j + 1)).sinr_min {
            return false;
        }
    }
    true
}

/// Up to 4 links on 1 + 1 or 2 + 1 channels with an arbitrary assignment.
fn random_small(rng: &mut ChaCha8Rng) -> (Scenario, Assignment) {
    let n_uc = rng.gen_range(0..=1);
    let n_dc = rng.gen_range(0..=1);
    let n_d = rng.gen_range(1..=4 - n_uc - n_dc);
    let mut links = Vec::new();
    let mut node = 1;
    for _ in 0..n_uc {
        links.push(ulc(links.len() + 1, node));
        node += 1;
    }
    for _ in 0..n_dc {
        links.push(dlc(links.len() + 1, node));
        node += 1;
    }
    for _ in 0..n_d {
        links.push(d2d(links.len() + 1, node, node + 1));
        node += 2;
    }
    for l in &mut links {
        l.sinr_min = rng.gen_range(0.05..3.0);
    }
    let m_u = rng.gen_range(1..=2);
    let m_d = 1;
    let gains: Vec<Vec<Vec<f64>>> = (0..m_u + m_d)
        .map(|_| (0..node).map(|_| (0..node).map(|_| rng.gen_range(0.0..2.0)).collect()).collect())
        .collect();
    let s = Scenario::new(links, m_u, m_d, gains, rng.gen_range(0.05..1.0), rng.gen_range(0.5..3.0)).unwrap();
    let mut asg = Assignment::empty(&s);
    for c in s.channels() {
        for j in s.link_ids() {
            if rng.gen_bool(0.35) {
                asg.assign(c, j).unwrap();
            }
        }
    }
    for j in s.d2d_links() {
        asg.set_cellular_mode(j, rng.gen_bool(0.4)).unwrap();
    }
    (s, asg)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn sinr_moves_with_noise_and_gains(
        direct in 0.01f64..5.0,
        cross in 0.01f64..5.0,
        noise in 0.01f64..2.0,
        bump in 1.01f64..3.0,
    ) {
        let g = |d: f64, x: f64| move |_: usize, a: usize, b: usize| match (a, b) {
            (1, 2) | (3, 4) => d,
            (3, 2) | (1, 4) => x,
            _ => 0.0,
        };
        let ld = [LinkId(1), LinkId(2)];
        let xi = |s: &Scenario| sinr(s, ChannelId(1), &[], &ld, LinkId(1), false).unwrap();
        let base = build(vec![d2d(1, 1, 2), d2d(2, 3, 4)], 1, 1, noise, 1.0, g(direct, cross));
        let v = xi(&base);
        prop_assert!(xi(&base.with_noise(noise * bump).unwrap()) < v);
        prop_assert!(xi(&base.clone().with_gain(ChannelId(1), NodeId(3), NodeId(2), cross * bump).unwrap()) < v);
        prop_assert!(xi(&base.clone().with_gain(ChannelId(1), NodeId(1), NodeId(2), direct * bump).unwrap()) > v);
    }

    #[test]
    fn objective_is_invariant_under_relabeling(seed in any::<u64>(), lp in 0usize..6, up in 0usize..2, dp in 0usize..2) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (s, asg) = random_instance(&mut rng);
        let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        let swap = |k: usize| if k == 0 { vec![0, 1] } else { vec![1, 0] };
        let (t, asg2) = relabel(&s, &asg, &perms[lp], &swap(up), &swap(dp));
        let a = objective(&s, &asg).unwrap();
        let b = objective(&t, &asg2).unwrap();
        prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0), "{a} vs {b}");
        prop_assert_eq!(check_feasible(&s, &asg).is_ok(), check_feasible(&t, &asg2).is_ok());
    }

    #[test]
    fn objective_does_not_grow_with_noise(seed in any::<u64>(), factor in 1.0f64..10.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (s, asg) = random_instance(&mut rng);
        let louder = s.with_noise(s.noise_w() * factor).unwrap();
        prop_assert!(objective(&louder, &asg).unwrap() <= objective(&s, &asg).unwrap() + 1e-12);
    }

    #[test]
    fn cellular_mode_rate_is_bounded_by_each_hop(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (s, asg) = random_instance(&mut rng);
        for j in asg.cellular_mode_d2d() {
            let rate = link_rate(&s, &asg, j).unwrap();
            for c in asg.channels_of(j) {
                let sets = co_channel_sets(&asg, c);
                let hop = (1.0 + sinr(&s, c, &sets.lc, &sets.ld, j, true).unwrap()).log2();
                prop_assert!(rate <= hop + 1e-12);
            }
        }
    }

}

#[test]
fn check_feasible_matches_straight_line_oracle() {
    let mut feasible = 0;
    for seed in 0..5000u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (s, asg) = random_small(&mut rng);
        let expected = oracle_feasible(&s, &asg);
        assert_eq!(check_feasible(&s, &asg).is_ok(), expected, "seed {seed}");
        feasible += usize::from(expected);
    }
    assert!(feasible > 50, "only {feasible} feasible cases exercised");
}
