//! Topologies, per-link metrics and network aggregation.
//!
//! Every directed link carries its own budget, fading model and TRS gain.
//! Per-link metrics come in base/TRS pairs; the TRS member is the base
//! value scaled by γ (capacity) or 1/γ (time, energy, latency).

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::{apply_trs, faded_capacity, FadingDraw, FadingSpec, LinkBudget, TrsGain};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NetworkError {
    #[error("link capacity is zero; transmission time is undefined")]
    ZeroCapacity,
    #[error("link {0} is in outage (zero capacity for this fading draw)")]
    OutageOnLink(String),
    #[error("path has no hops")]
    EmptyPath,
    #[error("network has no links")]
    EmptyNetwork,
    #[error("user set is empty")]
    EmptyUserSet,
    #[error("node {id}: {reason}")]
    InvalidNode { id: String, reason: String },
    #[error("duplicate node id {0}")]
    DuplicateNode(String),
    #[error("link {src}->{dst} references unknown node {missing}")]
    UnknownNode {
        src: String,
        dst: String,
        missing: String,
    },
    #[error("link {0}->{0} is a self-loop")]
    SelfLoop(String),
    #[error("duplicate link {src}->{dst}")]
    DuplicateLink { src: String, dst: String },
    #[error("{kind:?} topology: {reason}")]
    Structure { kind: TopologyKind, reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Node {
    id: String,
    tx_power_w: f64,
    packet_length_bits: f64,
}

impl Node {
    pub fn new(
        id: impl Into<String>,
        tx_power_w: f64,
        packet_length_bits: f64,
    ) -> Result<Self, NetworkError> {
        let id = id.into();
        if !(tx_power_w.is_finite() && tx_power_w >= 0.0) {
            return Err(NetworkError::InvalidNode {
                id,
                reason: format!("tx_power_w must be >= 0 (got {tx_power_w})"),
            });
        }
        if !(packet_length_bits.is_finite() && packet_length_bits > 0.0) {
            return Err(NetworkError::InvalidNode {
                id,
                reason: format!("packet_length_bits must be > 0 (got {packet_length_bits})"),
            });
        }
        Ok(Self {
            id,
            tx_power_w,
            packet_length_bits,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn tx_power_w(&self) -> f64 {
        self.tx_power_w
    }

    pub fn packet_length_bits(&self) -> f64 {
        self.packet_length_bits
    }
}

/// A directed link `src -> dst`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Link {
    pub src: String,
    pub dst: String,
    pub budget: LinkBudget,
    pub fading: FadingSpec,
    pub gain: TrsGain,
}

impl Link {
    pub fn new(
        src: impl Into<String>,
        dst: impl Into<String>,
        budget: LinkBudget,
        fading: FadingSpec,
        gain: TrsGain,
    ) -> Self {
        Self {
            src: src.into(),
            dst: dst.into(),
            budget,
            fading,
            gain,
        }
    }

    pub fn id(&self) -> String {
        format!("{}->{}", self.src, self.dst)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TopologyKind {
    Chain,
    Star,
    Mesh,
}

/// Validated node/link graph.
///
/// Chain links must form one directed path through every node. Star links
/// must all touch the hub, which is the first node. Mesh accepts any set of
/// distinct directed links.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Topology {
    kind: TopologyKind,
    nodes: Vec<Node>,
    links: Vec<Link>,
}

impl Topology {
    pub fn new(kind: TopologyKind, nodes: Vec<Node>, links: Vec<Link>) -> Result<Self, NetworkError> {
        let mut ids = HashSet::new();
        for n in &nodes {
            if !ids.insert(n.id.as_str()) {
                return Err(NetworkError::DuplicateNode(n.id.clone()));
            }
        }
        if links.is_empty() {
            return Err(NetworkError::EmptyNetwork);
        }
        let mut pairs = HashSet::new();
        for l in &links {
            for end in [&l.src, &l.dst] {
                if !ids.contains(end.as_str()) {
                    return Err(NetworkError::UnknownNode {
                        src: l.src.clone(),
                        dst: l.dst.clone(),
                        missing: end.clone(),
                    });
                }
            }
            if l.src == l.dst {
                return Err(NetworkError::SelfLoop(l.src.clone()));
            }
            if !pairs.insert((l.src.as_str(), l.dst.as_str())) {
                return Err(NetworkError::DuplicateLink {
                    src: l.src.clone(),
                    dst: l.dst.clone(),
                });
            }
        }

        let topo = Self { kind, nodes, links };
        match kind {
            TopologyKind::Chain => {
                topo.chain_order()?;
            }
            TopologyKind::Star => {
                let hub = topo.nodes[0].id.as_str();
                if let Some(l) = topo.links.iter().find(|l| l.src != hub && l.dst != hub) {
                    return Err(NetworkError::Structure {
                        kind,
                        reason: format!("link {} does not touch hub {hub}", l.id()),
                    });
                }
            }
            TopologyKind::Mesh => {}
        }
        Ok(topo)
    }

    pub fn kind(&self) -> TopologyKind {
        self.kind
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn node(&self, id: &str) -> Option<&Node> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.id == id)
    }

    /// The star hub (first node) for star topologies.
    pub fn hub(&self) -> Option<&Node> {
        match self.kind {
            TopologyKind::Star => self.nodes.first(),
            _ => None,
        }
    }

    /// Link indices from source to sink for a chain.
    pub fn chain_order(&self) -> Result<Vec<usize>, NetworkError> {
        let structure = |reason: String| NetworkError::Structure {
            kind: TopologyKind::Chain,
            reason,
        };
        if self.links.len() + 1 != self.nodes.len() {
            return Err(structure(format!(
                "{} nodes need exactly {} links (got {})",
                self.nodes.len(),
                self.nodes.len().saturating_sub(1),
                self.links.len()
            )));
        }
        let mut out_of: HashMap<&str, usize> = HashMap::new();
        let mut has_in: HashSet<&str> = HashSet::new();
        for (i, l) in self.links.iter().enumerate() {
            if out_of.insert(l.src.as_str(), i).is_some() {
                return Err(structure(format!("node {} has two outgoing links", l.src)));
            }
            if !has_in.insert(l.dst.as_str()) {
                return Err(structure(format!("node {} has two incoming links", l.dst)));
            }
        }
        let head = self
            .nodes
            .iter()
            .find(|n| !has_in.contains(n.id.as_str()))
            .ok_or_else(|| structure("links form a cycle".into()))?;
        let mut order = Vec::with_capacity(self.links.len());
        let mut cur = head.id.as_str();
        while let Some(&i) = out_of.get(cur) {
            order.push(i);
            cur = self.links[i].dst.as_str();
            if order.len() > self.links.len() {
                break;
            }
        }
        if order.len() != self.links.len() {
            return Err(structure("links do not form a single path through every node".into()));
        }
        Ok(order)
    }
}

/// Derived metrics of one link under one fading draw.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinkMetrics {
    pub capacity_bps: f64,
    pub capacity_trs_bps: f64,
    pub tx_time_s: f64,
    pub tx_time_trs_s: f64,
    pub energy_j: f64,
    pub energy_trs_j: f64,
    pub latency_s: f64,
    pub latency_trs_s: f64,
}

/// `L / C`.
pub fn transmission_time(packet_length_bits: f64, capacity_bps: f64) -> Result<f64, NetworkError> {
    if !(capacity_bps > 0.0) {
        return Err(NetworkError::ZeroCapacity);
    }
    Ok(packet_length_bits / capacity_bps)
}

/// `P · T`.
pub fn node_energy(tx_power_w: f64, tx_time_s: f64) -> f64 {
    tx_power_w * tx_time_s
}

/// Capacity, time, energy and latency of `link` sent by `node` under `draw`.
pub fn link_metrics(node: &Node, link: &Link, draw: FadingDraw) -> Result<LinkMetrics, NetworkError> {
    let gamma = link.gain.gamma();
    let capacity = faded_capacity(&link.budget, draw);
    let tx_time = transmission_time(node.packet_length_bits, capacity)
        .map_err(|_| NetworkError::OutageOnLink(link.id()))?;
    let energy = node_energy(node.tx_power_w, tx_time);
    // latency is transmission time only (no queueing)
    let latency = tx_time;
    Ok(LinkMetrics {
        capacity_bps: capacity,
        capacity_trs_bps: apply_trs(capacity, link.gain),
        tx_time_s: tx_time,
        tx_time_trs_s: tx_time / gamma,
        energy_j: energy,
        energy_trs_j: energy / gamma,
        latency_s: latency,
        latency_trs_s: latency / gamma,
    })
}

/// End-to-end capacity of a route: the weakest hop.
pub fn path_capacity(hop_capacities: &[f64]) -> Result<f64, NetworkError> {
    hop_capacities
        .iter()
        .copied()
        .reduce(f64::min)
        .ok_or(NetworkError::EmptyPath)
}

/// Route latency: per-hop latencies accumulate.
pub fn path_latency(hop_latencies: &[f64]) -> Result<f64, NetworkError> {
    if hop_latencies.is_empty() {
        return Err(NetworkError::EmptyPath);
    }
    Ok(hop_latencies.iter().sum())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetworkReport {
    pub total_throughput_bps: f64,
    pub total_energy_j: f64,
    pub total_latency_s: f64,
    pub per_link: Vec<(String, LinkMetrics)>,
    /// Weakest-hop TRS capacity; chains only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bottleneck_capacity_bps: Option<f64>,
}

/// Sums TRS throughput, energy and latency over all links in list order.
pub fn network_totals(per_link: Vec<(String, LinkMetrics)>) -> Result<NetworkReport, NetworkError> {
    if per_link.is_empty() {
        return Err(NetworkError::EmptyNetwork);
    }
    let mut report = NetworkReport {
        total_throughput_bps: 0.0,
        total_energy_j: 0.0,
        total_latency_s: 0.0,
        per_link,
        bottleneck_capacity_bps: None,
    };
    for (_, m) in &report.per_link {
        report.total_throughput_bps += m.capacity_trs_bps;
        report.total_energy_j += m.energy_trs_j;
        report.total_latency_s += m.latency_trs_s;
    }
    Ok(report)
}

/// Evaluates every link of `topo` under one draw per link (same order as
/// `topo.links()`). Chains additionally get their bottleneck capacity.
pub fn evaluate_topology(topo: &Topology, draws: &[FadingDraw]) -> Result<NetworkReport, NetworkError> {
    assert_eq!(draws.len(), topo.links.len(), "one draw per link");
    let per_link = topo
        .links
        .iter()
        .zip(draws)
        .map(|(l, &d)| {
            let node = topo.node(&l.src).expect("validated topology");
            link_metrics(node, l, d).map(|m| (l.id(), m))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut report = network_totals(per_link)?;
    if topo.kind == TopologyKind::Chain {
        report.bottleneck_capacity_bps = Some(chain_bottleneck(topo, &report.per_link)?);
    }
    Ok(report)
}

/// Weakest TRS capacity along a chain's route.
pub fn chain_bottleneck(topo: &Topology, per_link: &[(String, LinkMetrics)]) -> Result<f64, NetworkError> {
    let hops: Vec<f64> = topo
        .chain_order()?
        .into_iter()
        .map(|i| per_link[i].1.capacity_trs_bps)
        .collect();
    path_capacity(&hops)
}

/// `γ · (C_classical + C_quantum)`.
pub fn hybrid_total_capacity(classical_bps: f64, quantum_bps: f64, gain: TrsGain) -> f64 {
    gain.gamma() * (classical_bps + quantum_bps)
}

/// `γ · Σ C_i`.
pub fn multiuser_total_capacity(user_capacities: &[f64], gain: TrsGain) -> Result<f64, NetworkError> {
    if user_capacities.is_empty() {
        return Err(NetworkError::EmptyUserSet);
    }
    Ok(gain.gamma() * user_capacities.iter().sum::<f64>())
}
