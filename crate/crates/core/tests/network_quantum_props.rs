use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use trslink::channel::*;
use trslink::network::*;
use trslink::quantum_link::*;

fn random_link(rng: &mut impl Rng, gamma: f64) -> (Node, Link) {
    let node = Node::new("a", rng.gen_range(1e-3..2.0), rng.gen_range(1.0..1e5)).unwrap();
    let budget = LinkBudget::new(
        rng.gen_range(1e3..1e7),
        rng.gen_range(1e-6..1.0),
        rng.gen_range(1e-9..1e-3),
        rng.gen_range(0.0..1e-3),
    )
    .unwrap();
    let link = Link::new("a", "b", budget, FadingSpec::rayleigh(1.0).unwrap(), TrsGain::new(gamma).unwrap());
    (node, link)
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

#[test]
fn gamma_laws_hold_per_link() {
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    let mut checked = 0;
    while checked < 1000 {
        let gamma = rng.gen_range(1.0..8.0);
        let (node, link) = random_link(&mut rng, gamma);
        let draw = sample_fading(&link.fading, &mut rng);
        let Ok(m) = link_metrics(&node, &link, draw) else { continue };
        assert!(rel(m.capacity_trs_bps, gamma * m.capacity_bps) <= 1e-12);
        assert!(rel(m.tx_time_trs_s * gamma, m.tx_time_s) <= 1e-12);
        assert!(rel(m.energy_trs_j * gamma, m.energy_j) <= 1e-12);
        assert!(rel(m.latency_trs_s * gamma, m.latency_s) <= 1e-12);
        // TRS never hurts
        assert!(m.capacity_trs_bps >= m.capacity_bps);
        assert!(m.tx_time_trs_s <= m.tx_time_s);
        assert!(m.energy_trs_j <= m.energy_j);
        assert!(m.latency_trs_s <= m.latency_s);
        checked += 1;
    }
}

#[test]
fn faded_link_matches_stepwise_pipeline() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let (node, link) = random_link(&mut rng, 2.5);
    let mut r1 = ChaCha8Rng::seed_from_u64(7);
    let draw = sample_fading(&link.fading, &mut r1);
    let m = link_metrics(&node, &link, draw).unwrap();

    let c = faded_capacity(&link.budget, draw);
    let t = transmission_time(node.packet_length_bits(), c).unwrap();
    let e = node_energy(node.tx_power_w(), t);
    assert_eq!(m.capacity_bps, c);
    assert_eq!(m.tx_time_s, t);
    assert_eq!(m.energy_j, e);
    assert_eq!(m.latency_s, t);
}

#[test]
fn mesh_totals_match_resummation() {
    let mk = |s: &str, d: &str, b: f64, g: f64| {
        Link::new(
            s,
            d,
            LinkBudget::new(b, 0.3, 0.01, 0.002).unwrap(),
            FadingSpec::awgn(),
            TrsGain::new(g).unwrap(),
        )
    };
    let nodes = vec![
        Node::new("a", 0.5, 800.0).unwrap(),
        Node::new("b", 1.0, 1200.0).unwrap(),
        Node::new("c", 0.2, 64.0).unwrap(),
    ];
    let topo = Topology::new(
        TopologyKind::Mesh,
        nodes,
        vec![mk("a", "b", 1e4, 1.5), mk("b", "c", 2e4, 3.0), mk("c", "a", 5e3, 1.0)],
    )
    .unwrap();
    let r = evaluate_topology(&topo, &[FadingDraw::UNITY; 3]).unwrap();
    assert_eq!(r.bottleneck_capacity_bps, None);

    let mut thr = 0.0;
    let mut en = 0.0;
    let mut lat = 0.0;
    for l in topo.links() {
        let n = topo.node(&l.src).unwrap();
        let c = l.budget.bandwidth_hz() * (1.0 + l.budget.sinr()).log2();
        let g = l.gain.gamma();
        thr += g * c;
        en += n.tx_power_w() * n.packet_length_bits() / c / g;
        lat += n.packet_length_bits() / c / g;
    }
    assert!(rel(r.total_throughput_bps, thr) < 1e-9);
    assert!(rel(r.total_energy_j, en) < 1e-9);
    assert!(rel(r.total_latency_s, lat) < 1e-9);
}

#[test]
fn multiuser_total_resummation() {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let users: Vec<f64> = (0..10).map(|_| rng.gen_range(0.0..1e6)).collect();
    let g = TrsGain::new(2.7).unwrap();
    let mut s = 0.0;
    for u in &users {
        s += u;
    }
    assert!(rel(multiuser_total_capacity(&users, g).unwrap(), 2.7 * s) < 1e-12);
}

proptest! {
    #[test]
    fn bottleneck_is_order_invariant(mut hops in prop::collection::vec(0.0f64..1e9, 1..20), seed in any::<u64>()) {
        let min = hops.iter().copied().fold(f64::INFINITY, f64::min);
        prop_assert_eq!(path_capacity(&hops).unwrap(), min);
        hops.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(path_capacity(&hops).unwrap(), min);
    }

    #[test]
    fn path_latency_is_additive(hops in prop::collection::vec(0.0f64..1e3, 1..20), split in 0usize..20) {
        let k = split.min(hops.len() - 1).max(1).min(hops.len());
        let total = path_latency(&hops).unwrap();
        if k < hops.len() {
            let a = path_latency(&hops[..k]).unwrap();
            let b = path_latency(&hops[k..]).unwrap();
            prop_assert!((total - (a + b)).abs() <= 1e-12 * total.max(1.0));
        }
        let seq: f64 = hops.iter().sum();
        prop_assert_eq!(total, seq);
    }

    #[test]
    fn qber_in_unit_interval(total in 1u64..1_000_000, frac in 0.0f64..=1.0, g in 1.0f64..10.0) {
        let errors = ((total as f64) * frac) as u64;
        let q = qber(QberCount::new(errors, total).unwrap());
        prop_assert!((0.0..=1.0).contains(&q));
        let qt = qber_with_trs(q, TrsGain::new(g).unwrap()).unwrap();
        prop_assert!(qt <= q);
    }

    #[test]
    fn qber_scaling_composes(q in 0.0f64..=1.0, g1 in 1.0f64..8.0, g2 in 1.0f64..8.0) {
        let twice = qber_with_trs(qber_with_trs(q, TrsGain::new(g1).unwrap()).unwrap(), TrsGain::new(g2).unwrap()).unwrap();
        let once = qber_with_trs(q, TrsGain::new(g1 * g2).unwrap()).unwrap();
        prop_assert!((twice - once).abs() <= 1e-15 * q.max(1e-300) * 4.0);
    }

    #[test]
    fn received_power_monotone(p in 0.0f64..10.0, a in 0.0f64..1.0, d in 0.0f64..100.0, da in 0.001f64..1.0, dd in 0.1f64..10.0) {
        let base = qkd_received_power(&QkdLinkSpec::new(p, a, d).unwrap());
        prop_assert!(base <= p);
        prop_assert!(qkd_received_power(&QkdLinkSpec::new(p, a + da, d).unwrap()) <= base);
        prop_assert!(qkd_received_power(&QkdLinkSpec::new(p, a, d + dd).unwrap()) <= base);
        prop_assert_eq!(qkd_received_power(&QkdLinkSpec::new(p, a, 0.0).unwrap()), p);
    }

    #[test]
    fn trs_clamp(p in 0.0f64..10.0, a in 0.0f64..1.0, d in 0.0f64..50.0, g in 1.0f64..20.0) {
        let spec = QkdLinkSpec::new(p, a, d).unwrap();
        let gain = TrsGain::new(g).unwrap();
        let rx = qkd_received_power_trs(&spec, gain);
        prop_assert!(rx <= p);
        if g * (-a * d).exp() <= 1.0 {
            prop_assert!((rx - g * qkd_received_power(&spec)).abs() <= 4.0 * f64::EPSILON * p);
        }
    }
}
