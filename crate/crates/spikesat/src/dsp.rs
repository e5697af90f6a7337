//! Minimal complex FFT support for the interference and beamforming tasks:
//! iterative radix-2 transform, inverse transform, and an O(N²) direct DFT
//! kept as a cross-check oracle.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Forward DFT X_k = Σ_n x_n·e^{−2πi·kn/N} via iterative radix-2
/// decimation-in-time. The length must be a power of two.
pub fn fft(x: &[Complex64]) -> Result<Vec<Complex64>> {
    let n = x.len();
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::Shape(format!("FFT length {n} is not a power of two")));
    }
    let mut a = x.to_vec();
    // bit-reversal permutation
    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = (i as u64).reverse_bits() as usize >> (64 - bits);
        if i < j {
            a.swap(i, j);
        }
    }
    let mut len = 2;
    while len <= n {
        let ang = -2.0 * PI / len as f64;
        let wlen = Complex64::from_polar(1.0, ang);
        for start in (0..n).step_by(len) {
            let mut w = Complex64::new(1.0, 0.0);
            for k in 0..len / 2 {
                let u = a[start + k];
                let v = a[start + k + len / 2] * w;
                a[start + k] = u + v;
                a[start + k + len / 2] = u - v;
                w *= wlen;
            }
        }
        len <<= 1;
    }
    Ok(a)
}

/// Inverse DFT x_n = (1/N)·Σ_k X_k·e^{+2πi·kn/N}.
pub fn ifft(x: &[Complex64]) -> Result<Vec<Complex64>> {
    let conj: Vec<Complex64> = x.iter().map(|z| z.conj()).collect();
    let mut out = fft(&conj)?;
    let scale = 1.0 / x.len() as f64;
    for z in &mut out {
        *z = z.conj() * scale;
    }
    Ok(out)
}

/// Direct O(N²) DFT used as an independent oracle for the fast transform.
pub fn dft_naive(x: &[Complex64]) -> Vec<Complex64> {
    let n = x.len();
    (0..n)
        .map(|k| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (i, &xi) in x.iter().enumerate() {
                let ang = -2.0 * PI * (k * i % n) as f64 / n as f64;
                acc += xi * Complex64::from_polar(1.0, ang);
            }
            acc
        })
        .collect()
}
