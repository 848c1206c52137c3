//! Reference computations for trslink's tests.
//!
//! Nothing here calls into trslink. Each routine takes a different numerical
//! path from the library code it is used to check.

pub mod dd;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// `B · log2(1 + S/(N+I))` evaluated in double-double arithmetic.
pub fn shannon_capacity_dd(b: f64, s: f64, n: f64, i: f64) -> f64 {
    let x = dd::Dd::from(s) / (dd::Dd::from(n) + dd::Dd::from(i));
    let ln = dd::ln(dd::Dd::ONE + x);
    (ln / dd::Dd::LN_2 * dd::Dd::from(b)).to_f64()
}

/// `exp(x)` in double-double, rounded to f64.
pub fn exp_dd(x: f64) -> f64 {
    dd::exp(dd::Dd::from(x)).to_f64()
}

/// Gauss–Laguerre nodes and weights for ∫₀^∞ f(x) e^{-x} dx.
///
/// Newton iteration on L_n via the three-term recurrence, with the usual
/// asymptotic initial guesses.
pub fn gauss_laguerre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut xs = vec![0.0; n];
    let mut ws = vec![0.0; n];
    let nf = n as f64;
    let mut z = 0.0_f64;
    for i in 0..n {
        z = match i {
            0 => 3.0 / (1.0 + 2.4 * nf),
            1 => z + 15.0 / (1.0 + 2.5 * nf),
            _ => {
                let ai = (i - 1) as f64;
                z + ((1.0 + 2.55 * ai) / (1.9 * ai)) * (z - xs[i - 2])
            }
        };
        let mut pp = 0.0;
        let mut p2 = 0.0;
        for _ in 0..100 {
            let mut p1 = 1.0;
            p2 = 0.0;
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = ((2.0 * jf - 1.0 - z) * p2 - (jf - 1.0) * p3) / jf;
            }
            pp = nf * (p1 - p2) / z;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 * z.abs() {
                break;
            }
        }
        xs[i] = z;
        ws[i] = -1.0 / (pp * nf * p2);
    }
    (xs, ws)
}

/// `E_{|h|²~Exp(1)}[log2(1 + snr·|h|²)]` by n-point Gauss–Laguerre.
pub fn rayleigh_ergodic_se_quadrature(snr: f64, n: usize) -> f64 {
    let (xs, ws) = gauss_laguerre(n);
    xs.iter()
        .zip(&ws)
        .map(|(x, w)| w * (1.0 + snr * x).log2())
        .sum()
}

/// Closed form of the same expectation: `e^{1/ρ} E₁(1/ρ) / ln 2`.
pub fn rayleigh_ergodic_se_closed_form(snr: f64) -> f64 {
    let a = 1.0 / snr;
    a.exp() * exp_integral_e1(a) / std::f64::consts::LN_2
}

/// Exponential integral E₁(x), x > 0 (series below 1, continued fraction above).
pub fn exp_integral_e1(x: f64) -> f64 {
    const EULER: f64 = 0.577_215_664_901_532_9;
    if x < 1.0 {
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..200 {
            term *= -x / k as f64;
            let add = -term / k as f64;
            sum += add;
            if add.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        -EULER - x.ln() + sum
    } else {
        // modified Lentz
        let mut b = x + 1.0;
        let mut c = 1.0 / f64::MIN_POSITIVE;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..500 {
            let an = -((i * i) as f64);
            b += 2.0;
            d = 1.0 / (an * d + b);
            c = b + an / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                break;
            }
        }
        h * (-x).exp()
    }
}

/// Converts row-major complex entries to an nalgebra matrix.
pub fn to_dmatrix(rows: usize, cols: usize, entries: &[Complex64]) -> DMatrix<Complex64> {
    DMatrix::from_row_slice(rows, cols, entries)
}

/// log2 det of a Hermitian matrix from its eigenvalues.
pub fn logdet_by_eigenvalues(rows: usize, entries: &[Complex64]) -> f64 {
    let m = to_dmatrix(rows, rows, entries);
    m.symmetric_eigenvalues().iter().map(|l| l.log2()).sum()
}

/// `log2 det(I + s·H·Hᴴ)` via eigenvalues of the Gram matrix.
pub fn mimo_capacity_by_eigenvalues(rows: usize, cols: usize, h: &[Complex64], s: f64) -> f64 {
    let hm = to_dmatrix(rows, cols, h);
    let gram = &hm * hm.adjoint();
    // eigenvalues of H·Hᴴ are the squared singular values
    let gram = (&gram + gram.adjoint()).scale(0.5);
    gram.symmetric_eigenvalues()
        .iter()
        .map(|l| (1.0 + s * l.max(0.0)).log2())
        .sum()
}

pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> Vec<Complex64> {
    (0..rows * cols)
        .map(|_| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
        })
        .collect()
}

/// `G·Gᴴ + I` for a complex Gaussian G, row-major.
pub fn random_hermitian_pd<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<Complex64> {
    let g = to_dmatrix(n, n, &complex_gaussian(rng, n, n));
    let a = &g * g.adjoint() + DMatrix::<Complex64>::identity(n, n);
    // enforce exact Hermitian symmetry of the stored entries
    let mut out = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..n {
            out[i * n + j] = if i == j {
                Complex64::new(a[(i, i)].re, 0.0)
            } else if i > j {
                a[(i, j)]
            } else {
                a[(j, i)].conj()
            };
        }
    }
    out
}

/// Random unitary from the Q factor of a complex Gaussian matrix, row-major.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<Complex64> {
    let g = to_dmatrix(n, n, &complex_gaussian(rng, n, n));
    let q = g.qr().q();
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            out.push(q[(i, j)]);
        }
    }
    out
}

/// Row-major product of two complex matrices.
pub fn matmul(a: &[Complex64], ar: usize, ac: usize, b: &[Complex64], bc: usize) -> Vec<Complex64> {
    let m = to_dmatrix(ar, ac, a) * to_dmatrix(ac, bc, b);
    let mut out = Vec::with_capacity(ar * bc);
    for i in 0..ar {
        for j in 0..bc {
            out.push(m[(i, j)]);
        }
    }
    out
}

/// One-sample Kolmogorov–Smirnov statistic of `samples` against `cdf`.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            let lo = f - i as f64 / n;
            let hi = (i + 1) as f64 / n - f;
            lo.max(hi)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic KS critical value at the 1% level: 1.6276 / √n.
pub fn ks_critical_1pct(n: usize) -> f64 {
    1.627_6 / (n as f64).sqrt()
}

/// Sample mean and (unbiased) variance.
pub fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var)
}
