//! Radix-2 Cooley-Tukey FFT over real power traces.
//!
//! Traces are zero-padded to the next power of two (minimum 8) and
//! transformed whole: no windowing, no segmentation. Frequencies are
//! normalized to cycles/sample since traces carry no sample rate.

use alloc::vec::Vec;
use core::f64::consts::PI;
use core::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::math;
use crate::trace::validate_samples;

/// Smallest transform length.
pub const MIN_FFT_LEN: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Complex {
    pub re: f64,
    pub im: f64,
}

impl Complex {
    pub const ZERO: Complex = Complex { re: 0.0, im: 0.0 };

    pub const fn new(re: f64, im: f64) -> Self {
        Self { re, im }
    }

    /// `e^{iθ}`.
    pub fn cis(theta: f64) -> Self {
        Self { re: math::cos(theta), im: math::sin(theta) }
    }

    pub fn conj(self) -> Self {
        Self { re: self.re, im: -self.im }
    }

    pub fn norm_sqr(self) -> f64 {
        self.re * self.re + self.im * self.im
    }

    pub fn abs(self) -> f64 {
        libm::hypot(self.re, self.im)
    }
}

impl Add for Complex {
    type Output = Complex;
    fn add(self, o: Complex) -> Complex {
        Complex::new(self.re + o.re, self.im + o.im)
    }
}

impl Sub for Complex {
    type Output = Complex;
    fn sub(self, o: Complex) -> Complex {
        Complex::new(self.re - o.re, self.im - o.im)
    }
}

impl Mul for Complex {
    type Output = Complex;
    fn mul(self, o: Complex) -> Complex {
        Complex::new(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)
    }
}

impl Mul<f64> for Complex {
    type Output = Complex;
    fn mul(self, s: f64) -> Complex {
        Complex::new(self.re * s, self.im * s)
    }
}

/// Transform length used for `len` samples.
pub fn padded_len(len: usize) -> usize {
    len.max(MIN_FFT_LEN).next_power_of_two()
}

fn bit_reverse_permute(data: &mut [Complex]) {
    let n = data.len();
    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if i < j {
            data.swap(i, j);
        }
    }
}

/// In-place forward transform; `data.len()` must be a power of two.
pub fn fft_in_place(data: &mut [Complex]) {
    let n = data.len();
    assert!(n.is_power_of_two(), "fft length {n} is not a power of two");
    if n < 2 {
        return;
    }
    bit_reverse_permute(data);

    // Twiddles e^{-2πik/n} for k < n/2, computed directly rather than by
    // recurrence to keep rounding error flat across k.
    let twiddles: Vec<Complex> = (0..n / 2).map(|k| Complex::cis(-2.0 * PI * k as f64 / n as f64)).collect();

    let mut size = 2;
    while size <= n {
        let half = size / 2;
        let stride = n / size;
        for start in (0..n).step_by(size) {
            for k in 0..half {
                let w = twiddles[k * stride];
                let a = data[start + k];
                let b = data[start + k + half] * w;
                data[start + k] = a + b;
                data[start + k + half] = a - b;
            }
        }
        size *= 2;
    }
}

/// Frequency-domain view of one trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    bins: Vec<Complex>,
    /// `|X[k]|` for `k = 1..=N/2`.
    magnitudes: Vec<f64>,
}

impl Spectrum {
    /// Wraps raw DFT bins. Length must be a power of two ≥ 8.
    pub fn from_bins(bins: Vec<Complex>) -> Result<Self> {
        let n = bins.len();
        if n < MIN_FFT_LEN || !n.is_power_of_two() {
            return Err(crate::Error::Shape(alloc::format!(
                "spectrum length {n} must be a power of two >= {MIN_FFT_LEN}"
            )));
        }
        let magnitudes = bins[1..=n / 2].iter().map(|c| c.abs()).collect();
        Ok(Self { bins, magnitudes })
    }

    pub fn bins(&self) -> &[Complex] {
        &self.bins
    }

    pub fn n_fft(&self) -> usize {
        self.bins.len()
    }

    /// `k / N` in cycles/sample.
    pub fn bin_freq(&self, k: usize) -> f64 {
        k as f64 / self.bins.len() as f64
    }

    /// Magnitudes of the positive bins `1..=N/2` (DC excluded).
    pub fn magnitudes(&self) -> &[f64] {
        &self.magnitudes
    }

    /// `|X[0]|`.
    pub fn dc_magnitude(&self) -> f64 {
        self.bins[0].abs()
    }

    /// `(k/N, |X[k]|)` for `k = 1..=N/2`.
    pub fn magnitude_spectrum(&self) -> Vec<(f64, f64)> {
        self.magnitudes.iter().enumerate().map(|(i, &m)| (self.bin_freq(i + 1), m)).collect()
    }
}

/// Zero-pads `samples` to the next power of two ≥ max(8, len) and
/// transforms them.
pub fn fft(samples: &[f64]) -> Result<Spectrum> {
    validate_samples(samples, 2)?;
    let n = padded_len(samples.len());
    let mut data: Vec<Complex> = Vec::with_capacity(n);
    data.extend(samples.iter().map(|&x| Complex::new(x, 0.0)));
    data.resize(n, Complex::ZERO);
    fft_in_place(&mut data);
    Spectrum::from_bins(data)
}

/// Free-function form of [`Spectrum::magnitude_spectrum`].
pub fn magnitude_spectrum(spectrum: &Spectrum) -> Vec<(f64, f64)> {
    spectrum.magnitude_spectrum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn close(a: Complex, re: f64, im: f64) -> bool {
        (a.re - re).abs() < 1e-12 && (a.im - im).abs() < 1e-12
    }

    #[test]
    fn unit_impulse_is_flat() {
        let s = fft(&[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(s.bins().iter().all(|&c| close(c, 1.0, 0.0)));
    }

    #[test]
    fn constant_is_dc_only() {
        let s = fft(&[1.0; 8]).unwrap();
        assert!(close(s.bins()[0], 8.0, 0.0));
        assert!(s.bins()[1..].iter().all(|&c| close(c, 0.0, 0.0)));
        assert!(s.magnitudes().iter().all(|&m| m == 0.0));
    }

    #[test]
    fn cosine_lands_on_its_bin() {
        let x: Vec<f64> = (0..8).map(|n| math::cos(2.0 * PI * 2.0 * n as f64 / 8.0)).collect();
        let spec = magnitude_spectrum(&fft(&x).unwrap());
        assert_eq!(spec.len(), 4);
        for (f, m) in spec {
            if f == 0.25 {
                assert!((m - 4.0).abs() < 1e-12);
            } else {
                assert!(m.abs() < 1e-12, "f={f} m={m}");
            }
        }
    }

    #[test]
    fn padding_and_lengths() {
        assert_eq!(padded_len(2), 8);
        assert_eq!(padded_len(9), 16);
        assert_eq!(padded_len(64), 64);
        assert_eq!(fft(&vec![0.5; 64]).unwrap().magnitude_spectrum().len(), 32);
        assert_eq!(fft(&[0.0, 1.0, 0.0, -1.0]).unwrap().n_fft(), 8);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(fft(&[1.0]).is_err());
        assert_eq!(fft(&[1.0, f64::INFINITY]), Err(crate::Error::NonFinite { index: 1 }));
    }
}
