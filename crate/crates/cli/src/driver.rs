//! Monte-Carlo scenario driver, optimizer driver and γ sweeps.
//!
//! Fading draws for link `k` come from a ChaCha8 stream seeded with
//! `derive_seed(seed, k)`, so links are independent of each other and of the
//! thread layout. Per-link work runs on the rayon pool; results are gathered
//! in link order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use trslink::network::{chain_bottleneck, link_metrics, network_totals, LinkMetrics};
use trslink::optimizer::{optimize_sa, OptResult};
use trslink::quantum_link::{
    qber, qber_with_trs, qkd_received_power, qkd_received_power_trs, qkd_received_power_trs_unclamped,
};
use trslink::{derive_seed, sample_fading, FadingDraw, FadingKind, TopologyKind};

use crate::config::{RawConfig, ScenarioConfig};
use crate::error::ScenarioError;

/// Stream index reserved for the annealing chain.
const OPTIMIZER_STREAM: u64 = u64::MAX;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinkSummary {
    pub link_id: String,
    pub gamma: f64,
    /// Means over non-outage samples.
    pub mean: LinkMetrics,
    pub samples_used: usize,
    pub outages: usize,
}

/// Base-over-TRS improvement per link; each entry equals γ.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub link_id: String,
    pub capacity_gain: f64,
    pub tx_time_reduction: f64,
    pub energy_reduction: f64,
    pub latency_reduction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Totals {
    pub total_throughput_bps: f64,
    pub total_energy_j: f64,
    pub total_latency_s: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bottleneck_capacity_bps: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuantumReport {
    pub gamma: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub qber: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub qber_trs: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub qkd_received_power_w: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub qkd_received_power_trs_w: Option<f64>,
    /// γ·P_rx before clamping at the transmit power.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub qkd_received_power_trs_unclamped_w: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hybrid_total_capacity_bps: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub seed: u64,
    pub n_samples: usize,
    pub links: Vec<LinkSummary>,
    pub totals: Totals,
    pub comparison: Vec<Comparison>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quantum: Option<QuantumReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub optimizer: Option<OptResult>,
    pub config: RawConfig,
}

/// Fading draws for every link, `n_samples` each.
///
/// AWGN links get a single unity draw: there is nothing to average.
pub fn sample_draws(config: &ScenarioConfig) -> Vec<Vec<FadingDraw>> {
    config
        .topology
        .links()
        .par_iter()
        .enumerate()
        .map(|(k, link)| {
            if link.fading.kind() == FadingKind::Awgn {
                return vec![FadingDraw::UNITY];
            }
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, k as u64));
            (0..config.n_samples)
                .map(|_| sample_fading(&link.fading, &mut rng))
                .collect()
        })
        .collect()
}

/// Runs the full scenario: sampling, per-link metrics, aggregation and the
/// optional quantum and optimizer sections.
pub fn run_scenario(config: &ScenarioConfig) -> Result<RunReport, ScenarioError> {
    let draws = sample_draws(config);
    run_with_draws(config, &draws)
}

/// Like [`run_scenario`] but on caller-supplied draws (one vector per link).
pub fn run_with_draws(config: &ScenarioConfig, draws: &[Vec<FadingDraw>]) -> Result<RunReport, ScenarioError> {
    let topo = &config.topology;
    assert_eq!(draws.len(), topo.links().len());

    let links: Vec<LinkSummary> = topo
        .links()
        .par_iter()
        .zip(draws.par_iter())
        .map(|(link, link_draws)| {
            let node = topo.node(&link.src).expect("validated topology");
            let mut sum = [0.0f64; 8];
            let mut used = 0usize;
            let mut outages = 0usize;
            for &d in link_draws {
                match link_metrics(node, link, d) {
                    Ok(m) => {
                        for (s, v) in sum.iter_mut().zip(fields(&m)) {
                            *s += v;
                        }
                        used += 1;
                    }
                    Err(_) => outages += 1,
                }
            }
            if used == 0 {
                return Err(ScenarioError::AllSamplesOutage(link.id()));
            }
            let mean = from_fields(sum.map(|s| s / used as f64));
            // a deterministic link stands for every sample
            let used = if link.fading.kind() == FadingKind::Awgn { config.n_samples } else { used };
            Ok(LinkSummary {
                link_id: link.id(),
                gamma: link.gain.gamma(),
                mean,
                samples_used: used,
                outages,
            })
        })
        .collect::<Result<_, _>>()?;

    let per_link: Vec<(String, LinkMetrics)> = links.iter().map(|l| (l.link_id.clone(), l.mean)).collect();
    let mut network = network_totals(per_link).expect("topology has links");
    if topo.kind() == TopologyKind::Chain {
        network.bottleneck_capacity_bps = Some(chain_bottleneck(topo, &network.per_link).expect("validated chain"));
    }

    let comparison = links
        .iter()
        .map(|l| Comparison {
            link_id: l.link_id.clone(),
            capacity_gain: l.mean.capacity_trs_bps / l.mean.capacity_bps,
            tx_time_reduction: l.mean.tx_time_s / l.mean.tx_time_trs_s,
            energy_reduction: ratio_or_gamma(l.mean.energy_j, l.mean.energy_trs_j, l.gamma),
            latency_reduction: l.mean.latency_s / l.mean.latency_trs_s,
        })
        .collect();

    let classical_bps: f64 = links.iter().map(|l| l.mean.capacity_bps).sum();
    let quantum = config.quantum.as_ref().map(|q| {
        let rate = q.counts.map(qber);
        let (rx, rx_trs, rx_raw) = match &q.qkd {
            Some(spec) => (
                Some(qkd_received_power(spec)),
                Some(qkd_received_power_trs(spec, q.gain)),
                Some(qkd_received_power_trs_unclamped(spec, q.gain)),
            ),
            None => (None, None, None),
        };
        QuantumReport {
            gamma: q.gain.gamma(),
            qber: rate,
            qber_trs: rate.map(|r| qber_with_trs(r, q.gain).expect("qber in [0, 1]")),
            qkd_received_power_w: rx,
            qkd_received_power_trs_w: rx_trs,
            qkd_received_power_trs_unclamped_w: rx_raw,
            hybrid_total_capacity_bps: q
                .quantum_capacity_bps
                .map(|cq| trslink::network::hybrid_total_capacity(classical_bps, cq, q.gain)),
        }
    });

    let optimizer = match config.power_problem() {
        Some(problem) => Some(run_optimizer(config, &problem?)?),
        None => None,
    };

    Ok(RunReport {
        seed: config.seed,
        n_samples: config.n_samples,
        totals: Totals {
            total_throughput_bps: network.total_throughput_bps,
            total_energy_j: network.total_energy_j,
            total_latency_s: network.total_latency_s,
            bottleneck_capacity_bps: network.bottleneck_capacity_bps,
        },
        links,
        comparison,
        quantum,
        optimizer,
        config: config.raw.clone(),
    })
}

// zero-power nodes have zero energy on both sides
fn ratio_or_gamma(base: f64, trs: f64, gamma: f64) -> f64 {
    if trs == 0.0 && base == 0.0 {
        gamma
    } else {
        base / trs
    }
}

/// Simulated annealing on the scenario's optimizer section, seeded from the
/// scenario seed.
pub fn run_optimizer(
    config: &ScenarioConfig,
    problem: &trslink::optimizer::PowerProblem,
) -> Result<OptResult, ScenarioError> {
    let setup = config.optimizer.as_ref().expect("optimizer section");
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, OPTIMIZER_STREAM));
    optimize_sa(problem, setup.schedule, &mut rng).map_err(|e| match e {
        trslink::optimizer::OptError::NoFeasiblePoint => ScenarioError::NoFeasiblePoint,
        other => ScenarioError::Optimizer(other),
    })
}

/// One report per γ, every link's γ overridden, all sharing the same draws.
pub fn gamma_sweep(config: &ScenarioConfig, gammas: &[f64]) -> Result<Vec<(f64, RunReport)>, ScenarioError> {
    if gammas.is_empty() {
        return Err(ScenarioError::Validation {
            path: "gamma".into(),
            message: "sweep needs at least one gamma".into(),
        });
    }
    let draws = sample_draws(config);
    gammas
        .iter()
        .map(|&g| {
            let cfg = config.with_uniform_gamma(g)?;
            Ok((g, run_with_draws(&cfg, &draws)?))
        })
        .collect()
}

fn fields(m: &LinkMetrics) -> [f64; 8] {
    [
        m.capacity_bps,
        m.capacity_trs_bps,
        m.tx_time_s,
        m.tx_time_trs_s,
        m.energy_j,
        m.energy_trs_j,
        m.latency_s,
        m.latency_trs_s,
    ]
}

fn from_fields(f: [f64; 8]) -> LinkMetrics {
    LinkMetrics {
        capacity_bps: f[0],
        capacity_trs_bps: f[1],
        tx_time_s: f[2],
        tx_time_trs_s: f[3],
        energy_j: f[4],
        energy_trs_j: f[5],
        latency_s: f[6],
        latency_trs_s: f[7],
    }
}
