//! Browser bindings for the demo page in `www/`.
//!
//! Each export is a thin wrapper over a plain function so the numbers can be
//! checked natively with `cargo test`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use trslink::optimizer::{optimize_sa, FadingTreatment, PowerBounds, PowerProblem, Schedule, Weights};
use trslink::*;
use wasm_bindgen::prelude::*;

fn js(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

/// Histogram of |h|² draws as `[edge_0, density_0, edge_1, density_1, ...]`
/// over `[0, x_max)`; `kind` is "rayleigh", "rician" or "awgn".
#[wasm_bindgen]
pub fn fading_histogram(
    kind: &str,
    k_factor: f64,
    mean_power: f64,
    n: usize,
    bins: usize,
    x_max: f64,
    seed: u64,
) -> Result<Vec<f64>, JsError> {
    histogram(kind, k_factor, mean_power, n, bins, x_max, seed).map_err(js)
}

/// Shannon capacity with and without TRS over an SNR sweep, plus the
/// Monte-Carlo Rayleigh ergodic capacity.
///
/// Rows are `[snr_db, awgn, awgn_trs, rayleigh, rayleigh_trs]`, flattened.
#[wasm_bindgen]
pub fn capacity_curve(
    bandwidth_hz: f64,
    snr_db_min: f64,
    snr_db_max: f64,
    points: usize,
    gamma: f64,
    samples: usize,
    seed: u64,
) -> Result<Vec<f64>, JsError> {
    capacity_rows(bandwidth_hz, snr_db_min, snr_db_max, points, gamma, samples, seed).map_err(js)
}

/// Energy/latency trade-off of a two-node link pair: one annealing run per
/// latency weight β in a log sweep. Rows are `[beta, energy_j, latency_s, p_a, p_b]`.
#[wasm_bindgen]
pub fn tradeoff_curve(gamma: f64, beta_min: f64, beta_max: f64, points: usize, seed: u64) -> Result<Vec<f64>, JsError> {
    tradeoff_rows(gamma, beta_min, beta_max, points, seed).map_err(js)
}

pub fn histogram(
    kind: &str,
    k_factor: f64,
    mean_power: f64,
    n: usize,
    bins: usize,
    x_max: f64,
    seed: u64,
) -> Result<Vec<f64>, String> {
    if n == 0 || bins == 0 || !(x_max > 0.0) {
        return Err("need n > 0, bins > 0 and x_max > 0".into());
    }
    let spec = match kind {
        "rayleigh" => FadingSpec::rayleigh(mean_power),
        "rician" => FadingSpec::rician(k_factor, mean_power),
        "awgn" => Ok(FadingSpec::awgn()),
        other => return Err(format!("unknown fading kind {other:?}")),
    }
    .map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let width = x_max / bins as f64;
    let mut counts = vec![0usize; bins];
    for _ in 0..n {
        let x = sample_fading(&spec, &mut rng).h_squared();
        let b = (x / width) as usize;
        if b < bins {
            counts[b] += 1;
        }
    }
    let scale = 1.0 / (n as f64 * width);
    Ok(counts
        .iter()
        .enumerate()
        .flat_map(|(i, &c)| [i as f64 * width, c as f64 * scale])
        .collect())
}

pub fn capacity_rows(
    bandwidth_hz: f64,
    snr_db_min: f64,
    snr_db_max: f64,
    points: usize,
    gamma: f64,
    samples: usize,
    seed: u64,
) -> Result<Vec<f64>, String> {
    if points < 2 || samples == 0 {
        return Err("need points >= 2 and samples > 0".into());
    }
    let gain = TrsGain::new(gamma).map_err(|e| e.to_string())?;
    let rayleigh = FadingSpec::rayleigh(1.0).unwrap();
    let mut out = Vec::with_capacity(points * 5);
    for i in 0..points {
        let db = snr_db_min + (snr_db_max - snr_db_min) * i as f64 / (points - 1) as f64;
        let budget = LinkBudget::new(bandwidth_hz, 10f64.powf(db / 10.0), 1.0, 0.0).map_err(|e| e.to_string())?;
        let c = shannon_capacity(&budget);
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, i as u64));
        let erg = ergodic_capacity(&budget, &rayleigh, samples, &mut rng).map_err(|e| e.to_string())?;
        out.extend([db, c, apply_trs(c, gain), erg, apply_trs(erg, gain)]);
    }
    Ok(out)
}

fn demo_problem(gamma: f64, beta: f64) -> Result<PowerProblem, String> {
    let gain = TrsGain::new(gamma).map_err(|e| e.to_string())?;
    let nodes = vec![
        Node::new("a", 1.0, 1500.0).map_err(|e| e.to_string())?,
        Node::new("b", 1.0, 800.0).map_err(|e| e.to_string())?,
    ];
    let links = vec![
        Link::new("a", "b", LinkBudget::new(5e3, 1.0, 0.1, 0.02).unwrap(), FadingSpec::awgn(), gain),
        Link::new("b", "a", LinkBudget::new(8e3, 1.0, 0.2, 0.0).unwrap(), FadingSpec::awgn(), gain),
    ];
    let topo = Topology::new(TopologyKind::Mesh, nodes, links).map_err(|e| e.to_string())?;
    PowerProblem::new(
        topo,
        PowerBounds { p_min_w: 0.01, p_max_w: 5.0 },
        0.0,
        f64::INFINITY,
        Weights { alpha: 1.0, beta },
        FadingTreatment::Deterministic,
    )
    .map_err(|e| e.to_string())
}

pub fn tradeoff_rows(gamma: f64, beta_min: f64, beta_max: f64, points: usize, seed: u64) -> Result<Vec<f64>, String> {
    if points < 2 || !(beta_min > 0.0 && beta_max > beta_min) {
        return Err("need points >= 2 and 0 < beta_min < beta_max".into());
    }
    let mut out = Vec::with_capacity(points * 5);
    for i in 0..points {
        let beta = beta_min * (beta_max / beta_min).powf(i as f64 / (points - 1) as f64);
        let p = demo_problem(gamma, beta)?;
        let sched = Schedule { iterations: 4000, ..Schedule::default() };
        let r = optimize_sa(&p, sched, &mut ChaCha8Rng::seed_from_u64(derive_seed(seed, i as u64)))
            .map_err(|e| e.to_string())?;
        let x = r.allocation.powers_w();
        out.extend([beta, r.energy_total_j, r.latency_total_s, x[0], x[1]]);
    }
    Ok(out)
}
