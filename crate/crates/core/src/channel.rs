//! Scalar channel models.
//!
//! Shannon capacity with noise and interference, fading samplers, the TRS
//! gain and Monte-Carlo (ergodic) capacity. All quantities are linear SI
//! units: Hz, W, bit/s. Nothing in here works in dB.

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChannelError {
    #[error("bandwidth_hz must be > 0 and finite (got {0})")]
    Bandwidth(f64),
    #[error("signal_power_w must be >= 0 and finite (got {0})")]
    SignalPower(f64),
    #[error("noise_power_w must be > 0 and finite (got {0})")]
    NoisePower(f64),
    #[error("interference_power_w must be >= 0 and finite (got {0})")]
    InterferencePower(f64),
    #[error("mean_power must be > 0 and finite for faded channels (got {0})")]
    MeanPower(f64),
    #[error("k_factor must be >= 0 and finite (got {0})")]
    KFactor(f64),
    #[error("h_squared must be >= 0 and finite (got {0})")]
    HSquared(f64),
    #[error("gamma must be >= 1 and finite (got {0})")]
    Gamma(f64),
    #[error("n_samples must be >= 1")]
    NoSamples,
}

/// Bandwidth and powers of one directed link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinkBudget {
    bandwidth_hz: f64,
    signal_power_w: f64,
    noise_power_w: f64,
    interference_power_w: f64,
}

impl LinkBudget {
    pub fn new(
        bandwidth_hz: f64,
        signal_power_w: f64,
        noise_power_w: f64,
        interference_power_w: f64,
    ) -> Result<Self, ChannelError> {
        if !(bandwidth_hz.is_finite() && bandwidth_hz > 0.0) {
            return Err(ChannelError::Bandwidth(bandwidth_hz));
        }
        if !(signal_power_w.is_finite() && signal_power_w >= 0.0) {
            return Err(ChannelError::SignalPower(signal_power_w));
        }
        if !(noise_power_w.is_finite() && noise_power_w > 0.0) {
            return Err(ChannelError::NoisePower(noise_power_w));
        }
        if !(interference_power_w.is_finite() && interference_power_w >= 0.0) {
            return Err(ChannelError::InterferencePower(interference_power_w));
        }
        Ok(Self {
            bandwidth_hz,
            signal_power_w,
            noise_power_w,
            interference_power_w,
        })
    }

    pub fn bandwidth_hz(&self) -> f64 {
        self.bandwidth_hz
    }

    pub fn signal_power_w(&self) -> f64 {
        self.signal_power_w
    }

    pub fn noise_power_w(&self) -> f64 {
        self.noise_power_w
    }

    pub fn interference_power_w(&self) -> f64 {
        self.interference_power_w
    }

    /// Same budget with a different transmit (signal) power.
    pub fn with_signal_power(&self, signal_power_w: f64) -> Result<Self, ChannelError> {
        Self::new(
            self.bandwidth_hz,
            signal_power_w,
            self.noise_power_w,
            self.interference_power_w,
        )
    }

    /// Signal-to-interference-plus-noise ratio (linear).
    pub fn sinr(&self) -> f64 {
        self.signal_power_w / (self.noise_power_w + self.interference_power_w)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FadingKind {
    Awgn,
    Rayleigh,
    Rician,
}

/// Statistical fading model for |h|².
///
/// `mean_power` is Ω = E[|h|²]; it is ignored for AWGN. `k_factor` is the
/// LOS-to-scatter power ratio and only exists for Rician fading.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FadingSpec {
    kind: FadingKind,
    mean_power: f64,
    k_factor: Option<f64>,
}

impl FadingSpec {
    pub fn awgn() -> Self {
        Self {
            kind: FadingKind::Awgn,
            mean_power: 1.0,
            k_factor: None,
        }
    }

    pub fn rayleigh(mean_power: f64) -> Result<Self, ChannelError> {
        check_mean_power(mean_power)?;
        Ok(Self {
            kind: FadingKind::Rayleigh,
            mean_power,
            k_factor: None,
        })
    }

    pub fn rician(k_factor: f64, mean_power: f64) -> Result<Self, ChannelError> {
        check_mean_power(mean_power)?;
        if !(k_factor.is_finite() && k_factor >= 0.0) {
            return Err(ChannelError::KFactor(k_factor));
        }
        Ok(Self {
            kind: FadingKind::Rician,
            mean_power,
            k_factor: Some(k_factor),
        })
    }

    pub fn kind(&self) -> FadingKind {
        self.kind
    }

    pub fn mean_power(&self) -> f64 {
        self.mean_power
    }

    pub fn k_factor(&self) -> Option<f64> {
        self.k_factor
    }
}

impl Default for FadingSpec {
    fn default() -> Self {
        Self::awgn()
    }
}

fn check_mean_power(mean_power: f64) -> Result<(), ChannelError> {
    if mean_power.is_finite() && mean_power > 0.0 {
        Ok(())
    } else {
        Err(ChannelError::MeanPower(mean_power))
    }
}

/// One realized squared fading magnitude |h|².
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct FadingDraw(f64);

impl FadingDraw {
    pub const UNITY: FadingDraw = FadingDraw(1.0);

    pub fn new(h_squared: f64) -> Result<Self, ChannelError> {
        if h_squared.is_finite() && h_squared >= 0.0 {
            Ok(Self(h_squared))
        } else {
            Err(ChannelError::HSquared(h_squared))
        }
    }

    pub fn h_squared(&self) -> f64 {
        self.0
    }
}

/// TRS improvement factor γ ≥ 1. γ = 1 means TRS is off.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct TrsGain(f64);

impl TrsGain {
    pub const OFF: TrsGain = TrsGain(1.0);

    pub fn new(gamma: f64) -> Result<Self, ChannelError> {
        if gamma.is_finite() && gamma >= 1.0 {
            Ok(Self(gamma))
        } else {
            Err(ChannelError::Gamma(gamma))
        }
    }

    pub fn gamma(&self) -> f64 {
        self.0
    }
}

impl Default for TrsGain {
    fn default() -> Self {
        Self::OFF
    }
}

/// log2(1 + x) without the cancellation `(1.0 + x).log2()` suffers for
/// small x.
#[inline]
pub(crate) fn log2_1p(x: f64) -> f64 {
    x.ln_1p() * std::f64::consts::LOG2_E
}

/// `B · log2(1 + S / (N + I))` in bit/s.
pub fn shannon_capacity(link: &LinkBudget) -> f64 {
    link.bandwidth_hz * log2_1p(link.sinr())
}

/// Shannon capacity with the signal power scaled by the fading draw.
pub fn faded_capacity(link: &LinkBudget, draw: FadingDraw) -> f64 {
    let sinr = link.signal_power_w * draw.h_squared()
        / (link.noise_power_w + link.interference_power_w);
    link.bandwidth_hz * log2_1p(sinr)
}

pub fn apply_trs(capacity_bps: f64, gain: TrsGain) -> f64 {
    gain.gamma() * capacity_bps
}

/// Draws one |h|² from `spec`.
///
/// Rayleigh: exponential with mean Ω. Rician: |μ + g|² where
/// μ = sqrt(KΩ/(K+1)) is the LOS amplitude and g is circular complex
/// Gaussian with total variance Ω/(K+1).
pub fn sample_fading<R: Rng + ?Sized>(spec: &FadingSpec, rng: &mut R) -> FadingDraw {
    match spec.kind {
        FadingKind::Awgn => FadingDraw::UNITY,
        FadingKind::Rayleigh => {
            let e: f64 = Exp1.sample(rng);
            FadingDraw(spec.mean_power * e)
        }
        FadingKind::Rician => {
            let k = spec.k_factor.unwrap_or(0.0);
            let omega = spec.mean_power;
            let los = (k * omega / (k + 1.0)).sqrt();
            let sigma = (omega / (2.0 * (k + 1.0))).sqrt();
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            let x = los + sigma * re;
            let y = sigma * im;
            FadingDraw(x * x + y * y)
        }
    }
}

/// Monte-Carlo mean of [`faded_capacity`] over `n_samples` draws.
pub fn ergodic_capacity<R: Rng + ?Sized>(
    link: &LinkBudget,
    spec: &FadingSpec,
    n_samples: usize,
    rng: &mut R,
) -> Result<f64, ChannelError> {
    if n_samples == 0 {
        return Err(ChannelError::NoSamples);
    }
    if spec.kind == FadingKind::Awgn {
        return Ok(shannon_capacity(link));
    }
    let mut sum = 0.0;
    for _ in 0..n_samples {
        sum += faded_capacity(link, sample_fading(spec, rng));
    }
    Ok(sum / n_samples as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn budget(b: f64, s: f64, n: f64, i: f64) -> LinkBudget {
        LinkBudget::new(b, s, n, i).unwrap()
    }

    #[test]
    fn shannon_trivial_values() {
        assert_eq!(shannon_capacity(&budget(1.0, 1.0, 1.0, 0.0)), 1.0);
        assert!((shannon_capacity(&budget(1.0, 3.0, 0.5, 0.5)) - 2.0).abs() < 1e-15);
        assert_eq!(shannon_capacity(&budget(5.0, 0.0, 1.0, 2.0)), 0.0);
    }

    #[test]
    fn shannon_wideband_value() {
        // 2e6 * log2(1001), frozen from a 50-digit evaluation.
        let expected = 19_934_452.517_671_987;
        let got = shannon_capacity(&budget(2e6, 1e-6, 1e-9, 0.0));
        assert!(((got - expected) / expected).abs() < 1e-12, "{got}");
    }

    #[test]
    fn budget_rejects_bad_fields() {
        assert_eq!(
            LinkBudget::new(0.0, 1.0, 1.0, 0.0),
            Err(ChannelError::Bandwidth(0.0))
        );
        assert!(matches!(
            LinkBudget::new(1.0, -1.0, 1.0, 0.0),
            Err(ChannelError::SignalPower(_))
        ));
        assert!(matches!(
            LinkBudget::new(1.0, 1.0, 0.0, 0.0),
            Err(ChannelError::NoisePower(_))
        ));
        assert!(matches!(
            LinkBudget::new(1.0, 1.0, 1.0, -0.1),
            Err(ChannelError::InterferencePower(_))
        ));
        assert!(LinkBudget::new(f64::NAN, 1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn faded_capacity_cases() {
        let l = budget(1.0, 1.0, 1.0, 0.0);
        assert_eq!(faded_capacity(&l, FadingDraw::new(0.0).unwrap()), 0.0);
        assert_eq!(faded_capacity(&l, FadingDraw::UNITY), shannon_capacity(&l));
        assert!((faded_capacity(&l, FadingDraw::new(3.0).unwrap()) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn trs_scaling() {
        assert_eq!(apply_trs(5.0, TrsGain::OFF), 5.0);
        assert_eq!(apply_trs(5.0, TrsGain::new(2.0).unwrap()), 10.0);
        assert_eq!(apply_trs(0.0, TrsGain::new(3.0).unwrap()), 0.0);
        assert!(TrsGain::new(0.5).is_err());
        assert!(TrsGain::new(f64::INFINITY).is_err());
    }

    #[test]
    fn fading_spec_validation() {
        assert!(FadingSpec::rayleigh(0.0).is_err());
        assert!(FadingSpec::rician(-1.0, 1.0).is_err());
        assert!(FadingSpec::rician(1.0, -1.0).is_err());
        assert_eq!(FadingSpec::rician(2.0, 1.0).unwrap().k_factor(), Some(2.0));
        assert_eq!(FadingSpec::rayleigh(1.0).unwrap().k_factor(), None);
        assert!(FadingDraw::new(-1e-300).is_err());
    }

    #[test]
    fn awgn_draw_is_unity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            assert_eq!(sample_fading(&FadingSpec::awgn(), &mut rng).h_squared(), 1.0);
        }
    }

    #[test]
    fn draws_are_deterministic() {
        let spec = FadingSpec::rician(3.0, 2.0).unwrap();
        let mut a = ChaCha8Rng::seed_from_u64(99);
        let mut b = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..100 {
            assert_eq!(sample_fading(&spec, &mut a), sample_fading(&spec, &mut b));
        }
    }

    #[test]
    fn ergodic_edge_cases() {
        let l = budget(1e3, 1.0, 0.1, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        assert_eq!(
            ergodic_capacity(&l, &FadingSpec::awgn(), 7, &mut rng).unwrap(),
            shannon_capacity(&l)
        );
        assert_eq!(
            ergodic_capacity(&l, &FadingSpec::awgn(), 0, &mut rng),
            Err(ChannelError::NoSamples)
        );

        let spec = FadingSpec::rayleigh(1.0).unwrap();
        let mut r1 = ChaCha8Rng::seed_from_u64(17);
        let mut r2 = ChaCha8Rng::seed_from_u64(17);
        let one = ergodic_capacity(&l, &spec, 1, &mut r1).unwrap();
        assert_eq!(one, faded_capacity(&l, sample_fading(&spec, &mut r2)));
    }
}
