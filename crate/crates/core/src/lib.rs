//! Link-level capacity, energy and latency modeling for wireless sensor
//! networks with a time-reversal (TRS) gain, plus quantum-link metrics and a
//! constrained power-allocation solver.
//!
//! - [`channel`]: Shannon capacity, fading draws, TRS gain, ergodic capacity
//! - [`mimo`]: log-det MIMO capacity
//! - [`network`]: topologies, per-link metrics, aggregation
//! - [`quantum_link`]: QBER and QKD loss budget
//! - [`optimizer`]: energy/latency power allocation (SA, grid oracle, KKT)

pub mod channel;
pub mod mimo;
pub mod network;
pub mod optimizer;
pub mod quantum_link;

pub use channel::{
    apply_trs, ergodic_capacity, faded_capacity, sample_fading, shannon_capacity, ChannelError,
    FadingDraw, FadingKind, FadingSpec, LinkBudget, TrsGain,
};
pub use network::{Link, LinkMetrics, NetworkError, NetworkReport, Node, Topology, TopologyKind};

/// Derives an independent 64-bit seed for stream `index` from `seed`
/// (SplitMix64 finalizer over both inputs). Adding streams never perturbs
/// existing ones.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed
        .wrapping_add(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(index.wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
