//! FFT checked against the O(N²) DFT sum.

mod oracle;

use htscan_core::dsp::{fft, padded_len, Complex};
use oracle::direct_dft;
use proptest::prelude::*;

fn padded(x: &[f64]) -> Vec<f64> {
    let mut p = x.to_vec();
    p.resize(padded_len(x.len()), 0.0);
    p
}

fn max_dev(bins: &[Complex], oracle: &[(f64, f64)]) -> f64 {
    bins.iter().zip(oracle).map(|(c, &(re, im))| (c.re - re).abs().max((c.im - im).abs())).fold(0.0, f64::max)
}

#[test]
fn padded_sine_matches_direct_sum() {
    let x = [0.0, 1.0, 0.0, -1.0];
    let s = fft(&x).unwrap();
    assert_eq!(s.n_fft(), 8);
    assert!(max_dev(s.bins(), &direct_dft(&padded(&x))) < 1e-12);
}

fn signal(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-100.0f64..100.0, 2..=max_len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn matches_direct_dft(x in signal(64)) {
        let s = fft(&x).unwrap();
        prop_assert!(max_dev(s.bins(), &direct_dft(&padded(&x))) < 1e-10);
    }

    #[test]
    fn parseval(x in signal(256)) {
        let s = fft(&x).unwrap();
        let time: f64 = x.iter().map(|v| v * v).sum();
        let freq: f64 = s.bins().iter().map(|c| c.norm_sqr()).sum::<f64>() / s.n_fft() as f64;
        prop_assert!((time - freq).abs() <= 1e-9 * time.max(f64::MIN_POSITIVE));
    }

    #[test]
    fn conjugate_symmetry(x in signal(128)) {
        let s = fft(&x).unwrap();
        let n = s.n_fft();
        for k in 1..n {
            let a = s.bins()[k];
            let b = s.bins()[n - k].conj();
            prop_assert!((a.re - b.re).abs() < 1e-10 && (a.im - b.im).abs() < 1e-10);
        }
    }

    #[test]
    fn linearity(
        pair in (2usize..=64).prop_flat_map(|n| (
            prop::collection::vec(-10.0f64..10.0, n),
            prop::collection::vec(-10.0f64..10.0, n),
        )),
        a in -5.0f64..5.0,
        b in -5.0f64..5.0,
    ) {
        let (x, y) = pair;
        let combo: Vec<f64> = x.iter().zip(&y).map(|(p, q)| a * p + b * q).collect();
        let (fx, fy, fc) = (fft(&x).unwrap(), fft(&y).unwrap(), fft(&combo).unwrap());
        for k in 0..fc.n_fft() {
            let expect = fx.bins()[k] * a + fy.bins()[k] * b;
            let got = fc.bins()[k];
            prop_assert!((expect.re - got.re).abs() < 1e-9 && (expect.im - got.im).abs() < 1e-9);
        }
    }
}
