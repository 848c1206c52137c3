//! Scenario configuration: TOML schema and validation.
//!
//! Unknown keys are rejected. Validation errors carry the dotted path of the
//! offending field, e.g. `topology.links[0] (a->b).gamma`.

use serde::{Deserialize, Serialize};
use trslink::optimizer::{FadingTreatment, PowerBounds, PowerProblem, Schedule, Weights};
use trslink::quantum_link::{QberCount, QkdLinkSpec};
use trslink::{FadingSpec, Link, LinkBudget, Node, Topology, TopologyKind, TrsGain};

use crate::error::ScenarioError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub topology: RawTopology,
    #[serde(default)]
    pub monte_carlo: RawMonteCarlo,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimizer: Option<RawOptimizer>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quantum: Option<RawQuantum>,
    #[serde(default)]
    pub output: RawOutput,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawTopology {
    pub kind: TopologyKind,
    pub nodes: Vec<RawNode>,
    pub links: Vec<RawLink>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawNode {
    pub id: String,
    pub tx_power_w: f64,
    pub packet_length_bits: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawLink {
    pub src: String,
    pub dst: String,
    pub bandwidth_hz: f64,
    /// Defaults to the source node's `tx_power_w`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signal_power_w: Option<f64>,
    pub noise_power_w: f64,
    #[serde(default)]
    pub interference_power_w: f64,
    #[serde(default = "one")]
    pub gamma: f64,
    #[serde(default)]
    pub fading: RawFading,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawFading {
    pub kind: trslink::FadingKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_power: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_factor: Option<f64>,
}

impl Default for RawFading {
    fn default() -> Self {
        Self {
            kind: trslink::FadingKind::Awgn,
            mean_power: None,
            k_factor: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawMonteCarlo {
    #[serde(default = "one_usize")]
    pub n_samples: usize,
    #[serde(default)]
    pub seed: u64,
}

impl Default for RawMonteCarlo {
    fn default() -> Self {
        Self { n_samples: 1, seed: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerFading {
    Deterministic,
    Ergodic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawOptimizer {
    pub p_min_w: f64,
    pub p_max_w: f64,
    #[serde(default)]
    pub r_min_bps: f64,
    /// Absent means no latency bound.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub latency_max_s: Option<f64>,
    #[serde(default = "one")]
    pub alpha: f64,
    #[serde(default)]
    pub beta: f64,
    #[serde(default = "deterministic")]
    pub fading: OptimizerFading,
    /// Draws per link for `fading = "ergodic"`.
    #[serde(default = "default_ergodic_samples")]
    pub ergodic_samples: usize,
    #[serde(default)]
    pub schedule: RawSchedule,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSchedule {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_initial: Option<f64>,
    #[serde(default = "default_cooling")]
    pub cooling: f64,
    #[serde(default = "default_iterations")]
    pub iterations: usize,
}

impl Default for RawSchedule {
    fn default() -> Self {
        let s = Schedule::default();
        Self {
            t_initial: s.t_initial,
            cooling: s.cooling,
            iterations: s.iterations,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawQuantum {
    #[serde(default = "one")]
    pub gamma: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qber_errors: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qber_total: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quantum_capacity_bps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qkd: Option<RawQkd>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawQkd {
    pub tx_power_w: f64,
    pub loss_coeff_per_km: f64,
    pub distance_km: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct RawOutput {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    #[serde(default)]
    pub format: Format,
}

fn one() -> f64 {
    1.0
}
fn one_usize() -> usize {
    1
}
fn deterministic() -> OptimizerFading {
    OptimizerFading::Deterministic
}
fn default_ergodic_samples() -> usize {
    1000
}
fn default_cooling() -> f64 {
    Schedule::default().cooling
}
fn default_iterations() -> usize {
    Schedule::default().iterations
}

/// A validated scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub raw: RawConfig,
    pub topology: Topology,
    pub n_samples: usize,
    pub seed: u64,
    pub optimizer: Option<OptimizerSetup>,
    pub quantum: Option<QuantumSetup>,
    pub output_path: Option<String>,
    pub format: Format,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerSetup {
    pub bounds: PowerBounds,
    pub r_min_bps: f64,
    pub latency_max_s: f64,
    pub weights: Weights,
    pub fading: OptimizerFading,
    pub ergodic_samples: usize,
    pub schedule: Schedule,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumSetup {
    pub gain: TrsGain,
    pub counts: Option<QberCount>,
    pub qkd: Option<QkdLinkSpec>,
    pub quantum_capacity_bps: Option<f64>,
}

/// Parses and validates a TOML scenario document.
pub fn load_scenario(text: &str) -> Result<ScenarioConfig, ScenarioError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))?;
    validate(raw)
}

fn invalid(path: impl Into<String>, message: impl ToString) -> ScenarioError {
    ScenarioError::Validation {
        path: path.into(),
        message: message.to_string(),
    }
}

pub fn validate(raw: RawConfig) -> Result<ScenarioConfig, ScenarioError> {
    let t = &raw.topology;
    let mut nodes = Vec::with_capacity(t.nodes.len());
    for (i, n) in t.nodes.iter().enumerate() {
        let node = Node::new(&n.id, n.tx_power_w, n.packet_length_bits)
            .map_err(|e| invalid(format!("topology.nodes[{i}]"), e))?;
        nodes.push(node);
    }
    if nodes.is_empty() {
        return Err(invalid("topology.nodes", "at least one node is required"));
    }

    let mut links = Vec::with_capacity(t.links.len());
    for (i, l) in t.links.iter().enumerate() {
        let at = |field: &str| format!("topology.links[{i}] ({}->{}).{field}", l.src, l.dst);
        for end in [&l.src, &l.dst] {
            if !t.nodes.iter().any(|n| &n.id == end) {
                let field = if end == &l.src { "src" } else { "dst" };
                return Err(invalid(at(field), format!("unknown node id {end:?}")));
            }
        }
        let src_power = t.nodes.iter().find(|n| n.id == l.src).map(|n| n.tx_power_w).unwrap_or(0.0);
        let budget = LinkBudget::new(
            l.bandwidth_hz,
            l.signal_power_w.unwrap_or(src_power),
            l.noise_power_w,
            l.interference_power_w,
        )
        .map_err(|e| {
            let field = match e {
                trslink::ChannelError::Bandwidth(_) => "bandwidth_hz",
                trslink::ChannelError::SignalPower(_) => "signal_power_w",
                trslink::ChannelError::NoisePower(_) => "noise_power_w",
                _ => "interference_power_w",
            };
            invalid(at(field), e)
        })?;
        let gain = TrsGain::new(l.gamma).map_err(|e| invalid(at("gamma"), e))?;
        let fading = fading_spec(&l.fading).map_err(|(f, m)| invalid(at(&format!("fading.{f}")), m))?;
        links.push(Link::new(&l.src, &l.dst, budget, fading, gain));
    }

    let topology = Topology::new(t.kind, nodes, links).map_err(|e| invalid("topology", e))?;

    if raw.monte_carlo.n_samples == 0 {
        return Err(invalid("monte_carlo.n_samples", "n_samples must be >= 1"));
    }

    let optimizer = raw.optimizer.as_ref().map(validate_optimizer).transpose()?;
    let quantum = raw.quantum.as_ref().map(validate_quantum).transpose()?;

    Ok(ScenarioConfig {
        topology,
        n_samples: raw.monte_carlo.n_samples,
        seed: raw.monte_carlo.seed,
        optimizer,
        quantum,
        output_path: raw.output.path.clone(),
        format: raw.output.format,
        raw,
    })
}

fn fading_spec(f: &RawFading) -> Result<FadingSpec, (&'static str, String)> {
    use trslink::FadingKind::*;
    if f.k_factor.is_some() && f.kind != Rician {
        return Err(("k_factor", "k_factor is only valid for rician fading".into()));
    }
    if f.mean_power.is_some() && f.kind == Awgn {
        return Err(("mean_power", "mean_power is not used by awgn".into()));
    }
    let omega = f.mean_power.unwrap_or(1.0);
    match f.kind {
        Awgn => Ok(FadingSpec::awgn()),
        Rayleigh => FadingSpec::rayleigh(omega).map_err(|e| ("mean_power", e.to_string())),
        Rician => {
            let k = f.k_factor.ok_or(("k_factor", "rician fading needs k_factor".to_string()))?;
            FadingSpec::rician(k, omega).map_err(|e| match e {
                trslink::ChannelError::KFactor(_) => ("k_factor", e.to_string()),
                _ => ("mean_power", e.to_string()),
            })
        }
    }
}

fn validate_optimizer(o: &RawOptimizer) -> Result<OptimizerSetup, ScenarioError> {
    let p = "optimizer";
    if !(o.p_min_w.is_finite() && o.p_max_w.is_finite() && 0.0 <= o.p_min_w && o.p_min_w < o.p_max_w) {
        return Err(invalid(format!("{p}.p_min_w"), "power bounds must satisfy 0 <= p_min_w < p_max_w"));
    }
    if !(o.r_min_bps.is_finite() && o.r_min_bps >= 0.0) {
        return Err(invalid(format!("{p}.r_min_bps"), "must be >= 0"));
    }
    let latency_max_s = o.latency_max_s.unwrap_or(f64::INFINITY);
    if !(latency_max_s > 0.0) {
        return Err(invalid(format!("{p}.latency_max_s"), "must be > 0"));
    }
    let w_ok = |w: f64| w.is_finite() && w >= 0.0;
    if !(w_ok(o.alpha) && w_ok(o.beta) && (o.alpha > 0.0 || o.beta > 0.0)) {
        return Err(invalid(format!("{p}.alpha"), "alpha and beta must be >= 0 and not both zero"));
    }
    if o.ergodic_samples == 0 {
        return Err(invalid(format!("{p}.ergodic_samples"), "must be >= 1"));
    }
    let s = &o.schedule;
    if s.iterations == 0 {
        return Err(invalid(format!("{p}.schedule.iterations"), "must be >= 1"));
    }
    if !(s.cooling > 0.0 && s.cooling < 1.0) {
        return Err(invalid(format!("{p}.schedule.cooling"), "must be in (0, 1)"));
    }
    if let Some(t) = s.t_initial {
        if !(t.is_finite() && t > 0.0) {
            return Err(invalid(format!("{p}.schedule.t_initial"), "must be > 0"));
        }
    }
    Ok(OptimizerSetup {
        bounds: PowerBounds {
            p_min_w: o.p_min_w,
            p_max_w: o.p_max_w,
        },
        r_min_bps: o.r_min_bps,
        latency_max_s,
        weights: Weights {
            alpha: o.alpha,
            beta: o.beta,
        },
        fading: o.fading,
        ergodic_samples: o.ergodic_samples,
        schedule: Schedule {
            t_initial: s.t_initial,
            cooling: s.cooling,
            iterations: s.iterations,
        },
    })
}

fn validate_quantum(q: &RawQuantum) -> Result<QuantumSetup, ScenarioError> {
    let gain = TrsGain::new(q.gamma).map_err(|e| invalid("quantum.gamma", e))?;
    let counts = match (q.qber_errors, q.qber_total) {
        (None, None) => None,
        (Some(e), Some(t)) => Some(QberCount::new(e, t).map_err(|err| invalid("quantum.qber_errors", err))?),
        _ => {
            return Err(invalid(
                "quantum.qber_total",
                "qber_errors and qber_total must be given together",
            ))
        }
    };
    let qkd = q
        .qkd
        .as_ref()
        .map(|k| QkdLinkSpec::new(k.tx_power_w, k.loss_coeff_per_km, k.distance_km))
        .transpose()
        .map_err(|e| invalid("quantum.qkd", e))?;
    if let Some(c) = q.quantum_capacity_bps {
        if !(c.is_finite() && c >= 0.0) {
            return Err(invalid("quantum.quantum_capacity_bps", "must be >= 0"));
        }
    }
    Ok(QuantumSetup {
        gain,
        counts,
        qkd,
        quantum_capacity_bps: q.quantum_capacity_bps,
    })
}

impl ScenarioConfig {
    /// The optimization instance for this scenario, if it has an optimizer
    /// section. Each node's power becomes its links' signal power.
    pub fn power_problem(&self) -> Option<Result<PowerProblem, ScenarioError>> {
        let o = self.optimizer.as_ref()?;
        let fading = match o.fading {
            OptimizerFading::Deterministic => FadingTreatment::Deterministic,
            OptimizerFading::Ergodic => FadingTreatment::ErgodicMean {
                n_samples: o.ergodic_samples,
                seed: self.seed,
            },
        };
        Some(
            PowerProblem::new(
                self.topology.clone(),
                o.bounds,
                o.r_min_bps,
                o.latency_max_s,
                o.weights,
                fading,
            )
            .map_err(|e| invalid("optimizer", e)),
        )
    }

    /// Copy with every link's γ replaced.
    pub fn with_uniform_gamma(&self, gamma: f64) -> Result<Self, ScenarioError> {
        let mut raw = self.raw.clone();
        for l in &mut raw.topology.links {
            l.gamma = gamma;
        }
        let mut out = validate(raw)?;
        out.n_samples = self.n_samples;
        out.seed = self.seed;
        out.raw.monte_carlo = RawMonteCarlo {
            n_samples: self.n_samples,
            seed: self.seed,
        };
        Ok(out)
    }

    pub fn set_seed(&mut self, seed: u64) {
        self.seed = seed;
        self.raw.monte_carlo.seed = seed;
    }

    pub fn set_samples(&mut self, n: usize) -> Result<(), ScenarioError> {
        if n == 0 {
            return Err(invalid("monte_carlo.n_samples", "n_samples must be >= 1"));
        }
        self.n_samples = n;
        self.raw.monte_carlo.n_samples = n;
        Ok(())
    }
}
