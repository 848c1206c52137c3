use trslink_cli::config::load_scenario;
use trslink_cli::driver::{gamma_sweep, run_scenario, sample_draws};
use trslink_cli::error::ScenarioError;
use trslink_cli::report::{to_csv, to_json, CSV_HEADER};
use trslink_oracles as oracle;

const AWGN: &str = r#"
[topology]
kind = "chain"
nodes = [
  { id = "a", tx_power_w = 0.4, packet_length_bits = 1000 },
  { id = "b", tx_power_w = 0.9, packet_length_bits = 2000 },
  { id = "c", tx_power_w = 0.1, packet_length_bits = 10 },
]
links = [
  { src = "a", dst = "b", bandwidth_hz = 1e4, noise_power_w = 0.01, gamma = 1.5 },
  { src = "b", dst = "c", bandwidth_hz = 3e4, noise_power_w = 0.02, interference_power_w = 0.01, gamma = 3.0 },
]
"#;

fn faded(n: usize) -> String {
    format!(
        r#"
[topology]
kind = "star"
nodes = [
  {{ id = "hub", tx_power_w = 1.0, packet_length_bits = 1000 }},
  {{ id = "x", tx_power_w = 0.5, packet_length_bits = 500 }},
  {{ id = "y", tx_power_w = 0.2, packet_length_bits = 800 }},
]
links = [
  {{ src = "hub", dst = "x", bandwidth_hz = 1e5, noise_power_w = 0.1, gamma = 2.0, fading = {{ kind = "rayleigh" }} }},
  {{ src = "hub", dst = "y", bandwidth_hz = 2e5, noise_power_w = 0.3, gamma = 1.25, fading = {{ kind = "rician", k_factor = 2.0, mean_power = 0.5 }} }},
]

[monte_carlo]
n_samples = {n}
seed = 99
"#
    )
}

#[test]
fn awgn_report_is_independent_of_sample_count() {
    let one = load_scenario(AWGN).unwrap();
    let r1 = run_scenario(&one).unwrap();
    for n in [2, 17, 1000] {
        let mut c = one.clone();
        c.set_samples(n).unwrap();
        let r = run_scenario(&c).unwrap();
        assert_eq!(r.links.len(), r1.links.len());
        for (a, b) in r.links.iter().zip(&r1.links) {
            assert_eq!(a.mean, b.mean);
            assert_eq!(a.samples_used + a.outages, n);
        }
        assert_eq!(r.totals, r1.totals);
    }
}

#[test]
fn awgn_matches_single_evaluation() {
    let c = load_scenario(AWGN).unwrap();
    let r = run_scenario(&c).unwrap();
    let direct = trslink::network::evaluate_topology(&c.topology, &[trslink::FadingDraw::UNITY; 2]).unwrap();
    assert_eq!(r.totals.total_throughput_bps, direct.total_throughput_bps);
    assert_eq!(r.totals.total_energy_j, direct.total_energy_j);
    assert_eq!(r.totals.bottleneck_capacity_bps, direct.bottleneck_capacity_bps);
}

#[test]
fn comparison_ratios_equal_gamma() {
    let c = load_scenario(&faded(2000)).unwrap();
    let r = run_scenario(&c).unwrap();
    for (cmp, l) in r.comparison.iter().zip(&r.links) {
        for v in [cmp.capacity_gain, cmp.tx_time_reduction, cmp.energy_reduction, cmp.latency_reduction] {
            assert!((v - l.gamma).abs() <= 1e-12 * l.gamma, "{} {v}", cmp.link_id);
        }
    }
}

#[test]
fn same_seed_same_report_other_seed_differs() {
    let c = load_scenario(&faded(500)).unwrap();
    let a = to_csv(&run_scenario(&c).unwrap());
    let b = to_csv(&run_scenario(&c).unwrap());
    assert_eq!(a, b);
    let mut d = c.clone();
    d.set_seed(100);
    assert_ne!(a, to_csv(&run_scenario(&d).unwrap()));
}

#[test]
fn adding_a_link_keeps_earlier_draws() {
    let c = load_scenario(&faded(100)).unwrap();
    let mut raw = c.raw.clone();
    raw.topology.links.truncate(1);
    let short = trslink_cli::config::validate(raw).unwrap();
    assert_eq!(sample_draws(&short)[0], sample_draws(&c)[0]);
}

#[test]
fn sweep_shares_draws_and_scales_exactly() {
    let c = load_scenario(&faded(300)).unwrap();
    let base = sample_draws(&c);
    for g in [1.0, 1.5, 2.0, 4.0] {
        assert_eq!(sample_draws(&c.with_uniform_gamma(g).unwrap()), base);
    }
    let rows = gamma_sweep(&c, &[1.0, 2.0, 4.0]).unwrap();
    let t1 = &rows[0].1.totals;
    for (g, r) in &rows {
        assert_eq!(r.totals.total_energy_j, t1.total_energy_j / g);
        assert_eq!(r.totals.total_latency_s, t1.total_latency_s / g);
        assert_eq!(r.totals.total_throughput_bps, t1.total_throughput_bps * g);
    }
    let rows = gamma_sweep(&c, &[1.0, 1.5]).unwrap();
    let ratio = rows[1].1.totals.total_throughput_bps / rows[0].1.totals.total_throughput_bps;
    assert!((ratio - 1.5).abs() < 1e-14);
    assert!(matches!(gamma_sweep(&c, &[]), Err(ScenarioError::Validation { .. })));
    assert!(matches!(gamma_sweep(&c, &[0.5]), Err(ScenarioError::Validation { .. })));
}

#[test]
fn totals_row_is_column_sum() {
    let c = load_scenario(&faded(400)).unwrap();
    let r = run_scenario(&c).unwrap();
    let csv = to_csv(&r);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(CSV_HEADER));
    let rows: Vec<Vec<String>> = lines
        .take_while(|l| !l.is_empty())
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect();
    assert_eq!(rows.len(), 3);
    let (data, totals) = rows.split_at(2);
    assert_eq!(totals[0][0], "TOTALS");
    for col in 1..=8 {
        let sum: f64 = data.iter().map(|r| r[col].parse::<f64>().unwrap()).sum();
        let t: f64 = totals[0][col].parse().unwrap();
        assert!((sum - t).abs() <= 1e-9 * t.abs());
    }
    let thr: f64 = totals[0][2].parse().unwrap();
    assert!((thr - r.totals.total_throughput_bps).abs() <= 1e-9 * thr);
}

#[test]
fn one_link_csv_shape() {
    let text = AWGN
        .replace(
            "  { src = \"b\", dst = \"c\", bandwidth_hz = 3e4, noise_power_w = 0.02, interference_power_w = 0.01, gamma = 3.0 },\n",
            "",
        )
        .replace("  { id = \"c\", tx_power_w = 0.1, packet_length_bits = 10 },\n", "");
    let csv = to_csv(&run_scenario(&load_scenario(&text).unwrap()).unwrap());
    let head: Vec<&str> = csv.lines().take_while(|l| !l.is_empty()).collect();
    assert_eq!(head.len(), 3);
    assert!(head[1].starts_with("a->b,"));
    assert!(head[2].starts_with("TOTALS,"));
    assert!(!csv.contains("optimizer"));
}

#[test]
fn json_round_trips_to_17_digits() {
    let c = load_scenario(&faded(200)).unwrap();
    let r = run_scenario(&c).unwrap();
    let v: serde_json::Value = serde_json::from_str(&to_json(&r)).unwrap();
    assert!(v.get("optimizer").is_none());
    assert_eq!(v["seed"], 99);
    for (l, j) in r.links.iter().zip(v["links"].as_array().unwrap()) {
        assert_eq!(j["link_id"], l.link_id.as_str());
        assert_eq!(j["mean"]["capacity_bps"].as_f64().unwrap(), l.mean.capacity_bps);
        assert_eq!(j["mean"]["energy_trs_j"].as_f64().unwrap(), l.mean.energy_trs_j);
        assert_eq!(j["outages"].as_u64().unwrap() as usize, l.outages);
    }
    assert_eq!(v["totals"]["total_energy_j"].as_f64().unwrap(), r.totals.total_energy_j);
    assert_eq!(v["config"]["topology"]["kind"], "star");
}

#[test]
fn outage_accounting() {
    let c = load_scenario(&faded(1000)).unwrap();
    for l in run_scenario(&c).unwrap().links {
        assert_eq!(l.samples_used + l.outages, 1000);
    }
    let dead = AWGN.replace("bandwidth_hz = 1e4, noise_power_w", "bandwidth_hz = 1e4, signal_power_w = 0.0, noise_power_w");
    let err = run_scenario(&load_scenario(&dead).unwrap()).unwrap_err();
    assert!(matches!(&err, ScenarioError::AllSamplesOutage(id) if id == "a->b"));
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn rayleigh_mean_capacity_matches_quadrature() {
    // 10 dB
    let text = r#"
[topology]
kind = "chain"
nodes = [
  { id = "a", tx_power_w = 1.0, packet_length_bits = 1000 },
  { id = "b", tx_power_w = 1.0, packet_length_bits = 1000 },
]
links = [ { src = "a", dst = "b", bandwidth_hz = 1e6, signal_power_w = 1.0, noise_power_w = 0.1, fading = { kind = "rayleigh" } } ]

[monte_carlo]
n_samples = 100000
seed = 5
"#;
    let r = run_scenario(&load_scenario(text).unwrap()).unwrap();
    let want = 1e6 * oracle::rayleigh_ergodic_se_quadrature(10.0, 64);
    let got = r.links[0].mean.capacity_bps;
    assert!(((got - want) / want).abs() < 0.01, "{got} vs {want}");
}

#[test]
fn optimizer_section_attaches_result() {
    let text = format!(
        "{AWGN}\n[optimizer]\np_min_w = 0.01\np_max_w = 2.0\nalpha = 1.0\nbeta = 1.0\nschedule = {{ iterations = 500 }}\n"
    );
    let r = run_scenario(&load_scenario(&text).unwrap()).unwrap();
    let o = r.optimizer.as_ref().unwrap();
    assert!(o.feasible);
    assert_eq!(o.allocation.powers_w().len(), 3);
    assert!(to_csv(&r).contains("optimizer_field,value"));

    let infeasible = text.replace("alpha = 1.0", "r_min_bps = 1e12\nalpha = 1.0");
    let err = run_scenario(&load_scenario(&infeasible).unwrap()).unwrap_err();
    assert!(matches!(err, ScenarioError::NoFeasiblePoint), "{err:?}");
    assert_eq!(err.exit_code(), 2);
}
