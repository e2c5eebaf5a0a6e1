//! Reference implementations written straight from the feature and metric
//! definitions, sharing no code with the library.

#![allow(dead_code)]

use std::f64::consts::PI;

pub fn direct_dft(x: &[f64]) -> Vec<(f64, f64)> {
    let n = x.len();
    (0..n)
        .map(|k| {
            let (mut re, mut im) = (0.0, 0.0);
            for (t, &v) in x.iter().enumerate() {
                let angle = -2.0 * PI * ((k * t) % n) as f64 / n as f64;
                re += v * angle.cos();
                im += v * angle.sin();
            }
            (re, im)
        })
        .collect()
}

pub fn fft_size(len: usize) -> usize {
    len.next_power_of_two().max(8)
}

/// Zero-padded DFT; returns (N, |X[0]|, |X[1..=N/2]|).
pub fn magnitudes(x: &[f64]) -> (usize, f64, Vec<f64>) {
    let n = fft_size(x.len());
    let mut padded = x.to_vec();
    padded.resize(n, 0.0);
    let dft = direct_dft(&padded);
    let mag: Vec<f64> = dft[1..=n / 2].iter().map(|&(r, i)| r.hypot(i)).collect();
    (n, dft[0].0.hypot(dft[0].1), mag)
}

pub fn time_features(x: &[f64]) -> [f64; 12] {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let energy: f64 = x.iter().map(|v| v * v).sum();
    let rms = (energy / n).sqrt();
    let max = x.iter().cloned().fold(f64::MIN, f64::max);
    let min = x.iter().cloned().fold(f64::MAX, f64::min);
    let m2 = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let m3 = x.iter().map(|v| (v - mean).powi(3)).sum::<f64>() / n;
    let m4 = x.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / n;
    let constant = max == min;
    let (skew, kurt) = if constant { (0.0, 0.0) } else { (m3 / m2.powf(1.5), m4 / (m2 * m2)) };
    let entropy = if constant {
        0.0
    } else {
        let mut hist = [0u32; 64];
        for &v in x {
            let b = ((v - min) / (max - min) * 64.0).floor() as usize;
            hist[b.min(63)] += 1;
        }
        hist.iter().filter(|&&c| c > 0).map(|&c| c as f64 / n).map(|p| -p * p.ln()).sum()
    };
    [mean, rms, m2, m2.sqrt(), max, min, max - min, if rms > 0.0 { max / rms } else { 0.0 }, skew, kurt, energy, entropy]
}

pub fn freq_features(x: &[f64]) -> [f64; 13] {
    let (n, dc, m) = magnitudes(x);
    let l = m.len();
    let f: Vec<f64> = (1..=l).map(|k| k as f64 / n as f64).collect();
    let total: f64 = m.iter().sum();
    if total <= 1e-12 * dc {
        return [0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
    }
    let centroid = f.iter().zip(&m).map(|(a, b)| a * b).sum::<f64>() / total;
    let bandwidth = (f.iter().zip(&m).map(|(a, b)| (a - centroid).powi(2) * b).sum::<f64>() / total).sqrt();
    let geo = (m.iter().map(|v| v.max(1e-20).ln()).sum::<f64>() / l as f64).exp();
    let flatness = (geo / (total / l as f64)).min(1.0);
    let mut acc = 0.0;
    let mut rolloff = f[l - 1];
    for k in 0..l {
        acc += m[k];
        if acc >= 0.85 * total {
            rolloff = f[k];
            break;
        }
    }
    let sent: f64 = m.iter().filter(|&&v| v > 0.0).map(|v| v / total).map(|p| -p * p.ln()).sum();
    let mut contrast = 0.0;
    for b in 0..6 {
        let band = &m[b * l / 6..(b + 1) * l / 6];
        if !band.is_empty() {
            contrast += band.iter().cloned().fold(f64::MIN, f64::max) - band.iter().cloned().fold(f64::MAX, f64::min);
        }
    }
    contrast /= 6.0;
    let peak = m.iter().cloned().fold(f64::MIN, f64::max);
    let f0 = m.iter().position(|&v| v == peak).unwrap() + 1;
    let h: Vec<f64> = (1..=5).map(|k| if k * f0 <= l { m[k * f0 - 1] } else { 0.0 }).collect();
    let thd = (h[1..].iter().map(|v| (v / h[0]).powi(2)).sum::<f64>()).sqrt();
    let am = total / l as f64;
    let var = m.iter().map(|v| (v - am).powi(2)).sum::<f64>() / l as f64;
    [centroid, bandwidth, flatness, rolloff, sent, contrast, thd, h[0], h[1], h[2], h[3], h[4], var]
}

pub fn all_features(x: &[f64]) -> Vec<f64> {
    let mut v = time_features(x).to_vec();
    v.extend_from_slice(&freq_features(x));
    v
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

/// AUC as the fraction of (positive, negative) pairs ranked correctly, ties counting half.
pub fn auc_pairs(scores: &[f64], labels: &[bool]) -> f64 {
    let (mut wins, mut pairs) = (0.0, 0.0);
    for (i, &si) in scores.iter().enumerate() {
        if !labels[i] {
            continue;
        }
        for (j, &sj) in scores.iter().enumerate() {
            if labels[j] {
                continue;
            }
            pairs += 1.0;
            if si > sj {
                wins += 1.0;
            } else if si == sj {
                wins += 0.5;
            }
        }
    }
    wins / pairs
}

/// (accuracy, precision, recall, f1) with zero denominators mapped to 0.
pub fn scores_from_counts(tp: u64, fp: u64, tn: u64, fn_: u64) -> [f64; 4] {
    let div = |a: f64, b: f64| if b == 0.0 { 0.0 } else { a / b };
    let (tp, fp, tn, fn_) = (tp as f64, fp as f64, tn as f64, fn_ as f64);
    let p = div(tp, tp + fp);
    let r = div(tp, tp + fn_);
    let f1 = if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };
    [div(tp + tn, tp + fp + tn + fn_), p, r, f1]
}
