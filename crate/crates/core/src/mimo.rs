//! MIMO log-det capacity with equal power split across transmit antennas.
//!
//! Noise is normalized to unit power; absolute noise levels are folded into
//! `H` by the caller.

use num_complex::Complex64;
use thiserror::Error;

use crate::channel::TrsGain;

/// Largest accepted dimension on either axis.
pub const MAX_DIM: usize = 64;

/// Max elementwise |m[i][j] - conj(m[j][i])| tolerated by [`hermitian_logdet`].
pub const HERMITIAN_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MimoError {
    #[error("matrix has {got} entries, expected {rows}x{cols}")]
    ShapeMismatch { rows: usize, cols: usize, got: usize },
    #[error("matrix dimension {rows}x{cols} outside 1..={MAX_DIM}")]
    BadDimension { rows: usize, cols: usize },
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian (max asymmetry {0:e})")]
    NotHermitian(f64),
    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },
    #[error("total_power_w must be >= 0 and finite (got {0})")]
    Power(f64),
    #[error("user set is empty")]
    EmptyUserSet,
}

/// Dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self, MimoError> {
        if rows == 0 || cols == 0 || rows > MAX_DIM || cols > MAX_DIM {
            return Err(MimoError::BadDimension { rows, cols });
        }
        if data.len() != rows * cols {
            return Err(MimoError::ShapeMismatch {
                rows,
                cols,
                got: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self, MimoError> {
        Self::new(rows, cols, data.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![Complex64::new(1.0, 0.0); n])
    }

    pub fn diagonal(diag: &[Complex64]) -> Self {
        let n = diag.len();
        let mut data = vec![Complex64::new(0.0, 0.0); n * n];
        for (i, &d) in diag.iter().enumerate() {
            data[i * n + i] = d;
        }
        Self { rows: n, cols: n, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.cols + c]
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    /// `I + s · A·Aᴴ` (rows × rows).
    fn identity_plus_gram(&self, s: f64) -> Self {
        let n = self.rows;
        let mut out = Self::identity(n);
        for i in 0..n {
            for j in 0..=i {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..self.cols {
                    acc += self.get(i, k) * self.get(j, k).conj();
                }
                out.data[i * n + j] += acc * s;
                if i != j {
                    out.data[j * n + i] = out.data[i * n + j].conj();
                }
            }
        }
        // diagonal of a Gram matrix is real
        for i in 0..n {
            out.data[i * n + i].im = 0.0;
        }
        out
    }

    fn max_hermitian_asymmetry(&self) -> f64 {
        let n = self.rows;
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }
}

/// log2 det(m) of a Hermitian positive-definite matrix via Cholesky.
///
/// det(m) = Π L_ii², so log2 det = 2 Σ log2 L_ii.
pub fn hermitian_logdet(m: &ComplexMatrix) -> Result<f64, MimoError> {
    if m.rows != m.cols {
        return Err(MimoError::NotSquare {
            rows: m.rows,
            cols: m.cols,
        });
    }
    let asym = m.max_hermitian_asymmetry();
    if !(asym <= HERMITIAN_TOL) {
        return Err(MimoError::NotHermitian(asym));
    }

    let n = m.rows;
    // lower triangle of L, row-major
    let mut l = vec![Complex64::new(0.0, 0.0); n * n];
    let mut logdet = 0.0;
    for j in 0..n {
        let mut d = m.get(j, j).re;
        for k in 0..j {
            d -= l[j * n + k].norm_sqr();
        }
        if !(d > 0.0) {
            return Err(MimoError::NotPositiveDefinite { pivot: j, value: d });
        }
        let ljj = d.sqrt();
        l[j * n + j] = Complex64::new(ljj, 0.0);
        logdet += d.log2();
        for i in (j + 1)..n {
            let mut s = m.get(i, j);
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k].conj();
            }
            l[i * n + j] = s / ljj;
        }
    }
    Ok(logdet)
}

/// One MIMO link: channel `H` (N_r × N_t) and total transmit power P.
#[derive(Debug, Clone, PartialEq)]
pub struct MimoChannel {
    h: ComplexMatrix,
    total_power_w: f64,
}

impl MimoChannel {
    pub fn new(h: ComplexMatrix, total_power_w: f64) -> Result<Self, MimoError> {
        if !(total_power_w.is_finite() && total_power_w >= 0.0) {
            return Err(MimoError::Power(total_power_w));
        }
        Ok(Self { h, total_power_w })
    }

    pub fn h(&self) -> &ComplexMatrix {
        &self.h
    }

    pub fn total_power_w(&self) -> f64 {
        self.total_power_w
    }

    pub fn n_tx(&self) -> usize {
        self.h.cols
    }

    pub fn n_rx(&self) -> usize {
        self.h.rows
    }
}

/// `log2 det(I + (P/N_t)·H·Hᴴ)` in bit/s/Hz.
pub fn mimo_capacity(ch: &MimoChannel) -> Result<f64, MimoError> {
    mimo_capacity_trs(ch, TrsGain::OFF)
}

/// `log2 det(I + γ·(P/N_t)·H·Hᴴ)`: γ scales the SNR inside the determinant.
pub fn mimo_capacity_trs(ch: &MimoChannel, gain: TrsGain) -> Result<f64, MimoError> {
    let snr = gain.gamma() * ch.total_power_w / ch.n_tx() as f64;
    hermitian_logdet(&ch.h.identity_plus_gram(snr))
}

/// Sum of per-user TRS MIMO capacities.
pub fn multiuser_mimo_total(channels: &[MimoChannel], gain: TrsGain) -> Result<f64, MimoError> {
    if channels.is_empty() {
        return Err(MimoError::EmptyUserSet);
    }
    channels
        .iter()
        .map(|ch| mimo_capacity_trs(ch, gain))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn logdet_of_scaled_identities() {
        assert_eq!(hermitian_logdet(&ComplexMatrix::identity(3)).unwrap(), 0.0);
        let two = ComplexMatrix::identity(2).scale(2.0);
        assert!((hermitian_logdet(&two).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn logdet_2x2_closed_form() {
        // [[2, 1-i], [1+i, 3]]: det = 6 - 2 = 4
        let m = ComplexMatrix::new(2, 2, vec![c(2.0, 0.0), c(1.0, -1.0), c(1.0, 1.0), c(3.0, 0.0)])
            .unwrap();
        assert!((hermitian_logdet(&m).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn logdet_errors() {
        let m = ComplexMatrix::new(2, 2, vec![c(2.0, 0.0), c(1.0, 1.0), c(1.0, 1.0), c(3.0, 0.0)])
            .unwrap();
        assert!(matches!(hermitian_logdet(&m), Err(MimoError::NotHermitian(_))));

        let indefinite = ComplexMatrix::from_real(2, 2, &[1.0, 2.0, 2.0, 1.0]).unwrap();
        assert!(matches!(
            hermitian_logdet(&indefinite),
            Err(MimoError::NotPositiveDefinite { pivot: 1, .. })
        ));

        let rect = ComplexMatrix::from_real(1, 2, &[1.0, 2.0]).unwrap();
        assert!(matches!(hermitian_logdet(&rect), Err(MimoError::NotSquare { .. })));
    }

    #[test]
    fn matrix_validation() {
        assert!(matches!(
            ComplexMatrix::from_real(2, 2, &[1.0; 3]),
            Err(MimoError::ShapeMismatch { got: 3, .. })
        ));
        assert!(ComplexMatrix::from_real(0, 1, &[]).is_err());
        assert!(ComplexMatrix::from_real(65, 1, &[0.0; 65]).is_err());
        assert!(ComplexMatrix::from_real(64, 1, &[0.0; 64]).is_ok());
        assert!(MimoChannel::new(ComplexMatrix::identity(1), -1.0).is_err());
    }

    #[test]
    fn capacity_trivial_cases() {
        let siso = MimoChannel::new(ComplexMatrix::identity(1), 1.0).unwrap();
        assert!((mimo_capacity(&siso).unwrap() - 1.0).abs() < 1e-15);

        let ch = MimoChannel::new(ComplexMatrix::identity(2), 2.0).unwrap();
        assert!((mimo_capacity(&ch).unwrap() - 2.0).abs() < 1e-15);
        let g3 = TrsGain::new(3.0).unwrap();
        assert!((mimo_capacity_trs(&ch, g3).unwrap() - 4.0).abs() < 1e-14);
        assert_eq!(
            mimo_capacity_trs(&ch, TrsGain::OFF).unwrap(),
            mimo_capacity(&ch).unwrap()
        );
    }

    #[test]
    fn diagonal_channel_closed_form() {
        let (a, b, p) = (0.7_f64, 1.9_f64, 3.0_f64);
        let h = ComplexMatrix::diagonal(&[c(a, 0.0), c(0.0, b)]);
        let ch = MimoChannel::new(h, p).unwrap();
        let expected = (1.0 + p * a * a / 2.0).log2() + (1.0 + p * b * b / 2.0).log2();
        assert!((mimo_capacity(&ch).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn multiuser_sums() {
        let ch = MimoChannel::new(ComplexMatrix::identity(2), 2.0).unwrap();
        let g = TrsGain::new(1.5).unwrap();
        let one = mimo_capacity_trs(&ch, g).unwrap();
        assert_eq!(multiuser_mimo_total(std::slice::from_ref(&ch), g).unwrap(), one);
        assert_eq!(multiuser_mimo_total(&[ch.clone(), ch], g).unwrap(), 2.0 * one);
        assert_eq!(multiuser_mimo_total(&[], g), Err(MimoError::EmptyUserSet));
    }

    #[test]
    fn zero_power_gives_zero_capacity() {
        let h = ComplexMatrix::from_real(3, 2, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let ch = MimoChannel::new(h, 0.0).unwrap();
        assert_eq!(mimo_capacity(&ch).unwrap(), 0.0);
    }
}
