//! Length-n discrete Fourier transforms and cyclic convolution over C.
//!
//! q - 1 has arbitrary factorization, so the transforms must handle any
//! length in O(n log n); the planner falls back to chirp-z (Bluestein) for
//! lengths with large prime factors. A naive O(n²) reference implementation
//! is kept alongside as the independent oracle for the fast path.

use num_complex::Complex;
use rustfft::FftPlanner;

use crate::C64;

/// Unnormalized DFT: `out[k] = Σ_m x[m] e(∓mk/n)`, forward taking the minus sign.
pub fn dft(data: &[C64], inverse: bool) -> Vec<C64> {
    let mut planner = FftPlanner::new();
    let fft = if inverse {
        planner.plan_fft_inverse(data.len())
    } else {
        planner.plan_fft_forward(data.len())
    };
    let mut buf = data.to_vec();
    fft.process(&mut buf);
    buf
}

/// Naive O(n²) DFT with the same conventions as [`dft`].
pub fn naive_dft(data: &[C64], inverse: bool) -> Vec<C64> {
    let n = data.len();
    let sign = if inverse { 1.0 } else { -1.0 };
    (0..n)
        .map(|k| {
            let mut acc = Complex::new(0.0, 0.0);
            for (m, &x) in data.iter().enumerate() {
                let t =
                    sign * 2.0 * std::f64::consts::PI * ((m as u64 * k as u64) % n as u64) as f64
                        / n as f64;
                acc += x * Complex::new(t.cos(), t.sin());
            }
            acc
        })
        .collect()
}

/// Cyclic convolution of equal-length sequences: `out[s] = Σ_{m+m'≡s} a[m]b[m']`.
pub fn cyclic_convolve(a: &[C64], b: &[C64]) -> Vec<C64> {
    assert_eq!(a.len(), b.len());
    convolve_spectra(&[a.to_vec(), b.to_vec()])
}

/// Cyclic convolution of several equal-length factors in one pass:
/// one forward transform per factor, a pointwise product, one inverse.
pub fn convolve_spectra(factors: &[Vec<C64>]) -> Vec<C64> {
    let n = factors[0].len();
    let mut planner = FftPlanner::new();
    let fw = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let mut prod = vec![Complex::new(1.0, 0.0); n];
    for f in factors {
        assert_eq!(f.len(), n);
        let mut buf = f.clone();
        fw.process(&mut buf);
        for (p, v) in prod.iter_mut().zip(&buf) {
            *p *= v;
        }
    }
    inv.process(&mut prod);
    let scale = 1.0 / n as f64;
    for v in &mut prod {
        *v *= scale;
    }
    prod
}

/// Cyclic convolution of k copies of one factor (pointwise k-th power).
pub fn convolve_power(factor: &[C64], k: u32) -> Vec<C64> {
    let n = factor.len();
    let mut planner = FftPlanner::new();
    let fw = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let mut buf = factor.to_vec();
    fw.process(&mut buf);
    for v in &mut buf {
        *v = v.powu(k);
    }
    inv.process(&mut buf);
    let scale = 1.0 / n as f64;
    for v in &mut buf {
        *v *= scale;
    }
    buf
}

/// Naive cyclic convolution, the O(n²) reference.
pub fn naive_cyclic_convolve(a: &[C64], b: &[C64]) -> Vec<C64> {
    let n = a.len();
    assert_eq!(n, b.len());
    let mut out = vec![Complex::new(0.0, 0.0); n];
    for (m, &x) in a.iter().enumerate() {
        for (mp, &y) in b.iter().enumerate() {
            out[(m + mp) % n] += x * y;
        }
    }
    out
}
