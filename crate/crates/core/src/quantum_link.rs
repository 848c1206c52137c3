//! QBER and QKD link-budget metrics.
//!
//! QBER is a measured ratio or a supplied parameter; nothing here simulates
//! photons. The quantum channel capacity reuses
//! [`crate::channel::shannon_capacity`].

use serde::Serialize;
use thiserror::Error;

use crate::channel::TrsGain;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuantumError {
    #[error("total bit count must be >= 1")]
    NoBits,
    #[error("error count {errors} exceeds total {total}")]
    TooManyErrors { errors: u64, total: u64 },
    #[error("qber must be in [0, 1] (got {0})")]
    QberRange(f64),
    #[error("{field} must be >= 0 and finite (got {value})")]
    Negative { field: &'static str, value: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct QberCount {
    errors: u64,
    total: u64,
}

impl QberCount {
    pub fn new(errors: u64, total: u64) -> Result<Self, QuantumError> {
        if total == 0 {
            return Err(QuantumError::NoBits);
        }
        if errors > total {
            return Err(QuantumError::TooManyErrors { errors, total });
        }
        Ok(Self { errors, total })
    }

    pub fn errors(&self) -> u64 {
        self.errors
    }

    pub fn total(&self) -> u64 {
        self.total
    }
}

pub fn qber(counts: QberCount) -> f64 {
    counts.errors as f64 / counts.total as f64
}

/// `QBER / γ`.
pub fn qber_with_trs(qber: f64, gain: TrsGain) -> Result<f64, QuantumError> {
    if !(0.0..=1.0).contains(&qber) {
        return Err(QuantumError::QberRange(qber));
    }
    Ok(qber / gain.gamma())
}

/// Exponential-loss QKD link: transmit power, loss coefficient α (1/km) and
/// distance d (km).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QkdLinkSpec {
    tx_power_w: f64,
    loss_coeff_per_km: f64,
    distance_km: f64,
}

impl QkdLinkSpec {
    pub fn new(tx_power_w: f64, loss_coeff_per_km: f64, distance_km: f64) -> Result<Self, QuantumError> {
        for (field, value) in [
            ("tx_power_w", tx_power_w),
            ("loss_coeff_per_km", loss_coeff_per_km),
            ("distance_km", distance_km),
        ] {
            if !(value.is_finite() && value >= 0.0) {
                return Err(QuantumError::Negative { field, value });
            }
        }
        Ok(Self {
            tx_power_w,
            loss_coeff_per_km,
            distance_km,
        })
    }

    pub fn tx_power_w(&self) -> f64 {
        self.tx_power_w
    }

    pub fn loss_coeff_per_km(&self) -> f64 {
        self.loss_coeff_per_km
    }

    pub fn distance_km(&self) -> f64 {
        self.distance_km
    }
}

/// `P_tx · exp(-α·d)`.
pub fn qkd_received_power(spec: &QkdLinkSpec) -> f64 {
    spec.tx_power_w * (-spec.loss_coeff_per_km * spec.distance_km).exp()
}

/// `γ · P_rx` without the physical clamp. Diagnostic only.
pub fn qkd_received_power_trs_unclamped(spec: &QkdLinkSpec, gain: TrsGain) -> f64 {
    gain.gamma() * qkd_received_power(spec)
}

/// `min(γ · P_rx, P_tx)`: recovery can never deliver more than was sent.
pub fn qkd_received_power_trs(spec: &QkdLinkSpec, gain: TrsGain) -> f64 {
    qkd_received_power_trs_unclamped(spec, gain).min(spec.tx_power_w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qber_ratio() {
        assert_eq!(qber(QberCount::new(5, 100).unwrap()), 0.05);
        assert_eq!(qber(QberCount::new(0, 17).unwrap()), 0.0);
        assert_eq!(qber(QberCount::new(17, 17).unwrap()), 1.0);
        assert_eq!(QberCount::new(3, 2), Err(QuantumError::TooManyErrors { errors: 3, total: 2 }));
        assert_eq!(QberCount::new(0, 0), Err(QuantumError::NoBits));
    }

    #[test]
    fn qber_trs() {
        let g2 = TrsGain::new(2.0).unwrap();
        assert_eq!(qber_with_trs(0.1, g2).unwrap(), 0.05);
        assert_eq!(qber_with_trs(0.1, TrsGain::OFF).unwrap(), 0.1);
        assert_eq!(qber_with_trs(0.0, TrsGain::new(7.0).unwrap()).unwrap(), 0.0);
        assert!(qber_with_trs(1.5, g2).is_err());
        assert!(qber_with_trs(-0.1, g2).is_err());
    }

    #[test]
    fn received_power() {
        let lossless = QkdLinkSpec::new(3.0, 0.0, 123.0).unwrap();
        assert_eq!(qkd_received_power(&lossless), 3.0);

        let half = QkdLinkSpec::new(1.0, std::f64::consts::LN_2, 1.0).unwrap();
        assert!((qkd_received_power(&half) - 0.5).abs() < 1e-16);

        // e^-2 to 40 digits
        let spec = QkdLinkSpec::new(1.0, 0.2, 10.0).unwrap();
        let e_m2 = 0.135_335_283_236_612_691_893_999_494_972_484_403_4;
        assert!((qkd_received_power(&spec) - e_m2).abs() / e_m2 < 1e-12);
    }

    #[test]
    fn received_power_trs_and_clamp() {
        let spec = QkdLinkSpec::new(1.0, 0.2, 10.0).unwrap();
        assert_eq!(qkd_received_power_trs(&spec, TrsGain::OFF), qkd_received_power(&spec));

        let half = QkdLinkSpec::new(1.0, std::f64::consts::LN_2, 1.0).unwrap();
        let g2 = TrsGain::new(2.0).unwrap();
        assert!(qkd_received_power_trs(&half, g2) <= 1.0);
        assert!((qkd_received_power_trs(&half, g2) - 1.0).abs() < 1e-15);
        let g4 = TrsGain::new(4.0).unwrap();
        assert_eq!(qkd_received_power_trs(&half, g4), 1.0);
        assert!(qkd_received_power_trs_unclamped(&half, g4) > 1.9);

        let g3 = TrsGain::new(3.0).unwrap();
        let expect = 0.406_005_849_709_838_075_681_998_484_917_453_210_2;
        assert!((qkd_received_power_trs(&spec, g3) - expect).abs() / expect < 1e-12);
    }

    #[test]
    fn spec_validation() {
        assert!(QkdLinkSpec::new(-1.0, 0.0, 0.0).is_err());
        assert!(QkdLinkSpec::new(1.0, -0.1, 0.0).is_err());
        assert!(matches!(
            QkdLinkSpec::new(1.0, 0.1, -2.0),
            Err(QuantumError::Negative { field: "distance_km", .. })
        ));
    }
}
