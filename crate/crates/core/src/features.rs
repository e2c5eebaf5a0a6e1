//! Time-domain and spectral features of a power trace.
//!
//! A [`FeatureVector`] always holds the 25 values named in
//! [`FEATURE_NAMES`], time-domain block first.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::dsp::{self, Spectrum};
use crate::error::{Error, Result};
use crate::math;
use crate::seed::fnv1a;
use crate::trace::{validate_samples, PowerTrace, TrojanState};

/// Histogram bins used for the amplitude entropy.
pub const ENTROPY_BINS: usize = 64;
/// Cumulative-magnitude fraction defining the rolloff frequency.
pub const ROLLOFF_FRACTION: f64 = 0.85;
/// Equal-width bands for spectral contrast.
pub const CONTRAST_BANDS: usize = 6;
/// Harmonics tracked from the fundamental (inclusive).
pub const HARMONICS: usize = 5;
/// Zero magnitudes are replaced by this before taking logs for flatness.
pub const FLATNESS_FLOOR: f64 = 1e-20;
/// Standard deviations below this are clamped when standardizing.
pub const STD_FLOOR: f64 = 1e-12;

// Spectra whose non-DC mass is this small relative to DC count as empty.
const DEGENERATE_REL: f64 = 1e-12;

pub const TIME_FEATURE_NAMES: [&str; 12] = [
    "mean",
    "rms",
    "variance",
    "std",
    "max",
    "min",
    "p2p",
    "crest_factor",
    "skewness",
    "kurtosis",
    "energy",
    "entropy",
];

pub const FREQ_FEATURE_NAMES: [&str; 13] = [
    "spectral_centroid",
    "spectral_bandwidth",
    "spectral_flatness",
    "spectral_rolloff",
    "spectral_entropy",
    "spectral_contrast",
    "thd",
    "harmonic_strength_1",
    "harmonic_strength_2",
    "harmonic_strength_3",
    "harmonic_strength_4",
    "harmonic_strength_5",
    "spectral_variability",
];

/// Canonical schema, in vector order.
pub const FEATURE_NAMES: [&str; 25] = [
    "mean",
    "rms",
    "variance",
    "std",
    "max",
    "min",
    "p2p",
    "crest_factor",
    "skewness",
    "kurtosis",
    "energy",
    "entropy",
    "spectral_centroid",
    "spectral_bandwidth",
    "spectral_flatness",
    "spectral_rolloff",
    "spectral_entropy",
    "spectral_contrast",
    "thd",
    "harmonic_strength_1",
    "harmonic_strength_2",
    "harmonic_strength_3",
    "harmonic_strength_4",
    "harmonic_strength_5",
    "spectral_variability",
];

pub const N_FEATURES: usize = FEATURE_NAMES.len();

/// Position of `name` in [`FEATURE_NAMES`].
pub fn feature_index(name: &str) -> Result<usize> {
    FEATURE_NAMES
        .iter()
        .position(|&n| n == name)
        .ok_or_else(|| Error::UnknownFeature { name: String::from(name) })
}

/// Fingerprint of a feature schema.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SchemaId(pub u64);

impl SchemaId {
    pub fn from_names<'a>(names: impl IntoIterator<Item = &'a str>) -> Self {
        let mut joined = String::new();
        for n in names {
            joined.push_str(n);
            joined.push('\n');
        }
        SchemaId(fnv1a(joined.as_bytes()))
    }

    /// The 25-feature schema produced by [`extract`].
    pub fn canonical() -> Self {
        Self::from_names(FEATURE_NAMES)
    }

    /// Schema of unnamed `dim`-dimensional vectors.
    pub fn anonymous(dim: usize) -> Self {
        SchemaId(fnv1a(alloc::format!("anonymous:{dim}").as_bytes()))
    }
}

impl core::fmt::Display for SchemaId {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{:016x}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TimeFeatures {
    pub mean: f64,
    pub rms: f64,
    pub variance: f64,
    pub std: f64,
    pub max: f64,
    pub min: f64,
    pub p2p: f64,
    pub crest_factor: f64,
    pub skewness: f64,
    pub kurtosis: f64,
    pub energy: f64,
    pub entropy: f64,
}

impl TimeFeatures {
    pub fn to_array(&self) -> [f64; 12] {
        [
            self.mean,
            self.rms,
            self.variance,
            self.std,
            self.max,
            self.min,
            self.p2p,
            self.crest_factor,
            self.skewness,
            self.kurtosis,
            self.energy,
            self.entropy,
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FreqFeatures {
    pub spectral_centroid: f64,
    pub spectral_bandwidth: f64,
    pub spectral_flatness: f64,
    pub spectral_rolloff: f64,
    pub spectral_entropy: f64,
    pub spectral_contrast: f64,
    pub thd: f64,
    pub harmonic_strength: [f64; HARMONICS],
    pub spectral_variability: f64,
    /// Set when the DC-excluded spectrum carries no energy; every value
    /// is then 0 except flatness, which is 1.
    pub degenerate: bool,
}

impl FreqFeatures {
    fn degenerate() -> Self {
        Self { spectral_flatness: 1.0, degenerate: true, ..Default::default() }
    }

    pub fn to_array(&self) -> [f64; 13] {
        let h = self.harmonic_strength;
        [
            self.spectral_centroid,
            self.spectral_bandwidth,
            self.spectral_flatness,
            self.spectral_rolloff,
            self.spectral_entropy,
            self.spectral_contrast,
            self.thd,
            h[0],
            h[1],
            h[2],
            h[3],
            h[4],
            self.spectral_variability,
        ]
    }
}

/// Table of time-domain statistics with population (1/n) moments.
pub fn time_features_of(samples: &[f64]) -> Result<TimeFeatures> {
    validate_samples(samples, 2)?;
    let n = samples.len() as f64;
    let mut max = f64::NEG_INFINITY;
    let mut min = f64::INFINITY;
    let mut sum = 0.0;
    let mut energy = 0.0;
    for &x in samples {
        max = max.max(x);
        min = min.min(x);
        sum += x;
        energy += x * x;
    }
    let mean = sum / n;
    let rms = math::sqrt(energy / n);
    let p2p = max - min;

    if p2p == 0.0 {
        // Constant trace: moments vanish, skew/kurtosis pinned to 0.
        return Ok(TimeFeatures {
            mean,
            rms,
            variance: 0.0,
            std: 0.0,
            max,
            min,
            p2p: 0.0,
            crest_factor: if rms > 0.0 { 1.0 } else { 0.0 },
            skewness: 0.0,
            kurtosis: 0.0,
            energy,
            entropy: 0.0,
        });
    }

    let variance = samples.iter().map(|&x| (x - mean) * (x - mean)).sum::<f64>() / n;
    let std = math::sqrt(variance);
    let (mut m3, mut m4) = (0.0, 0.0);
    for &x in samples {
        let z = (x - mean) / std;
        let z2 = z * z;
        m3 += z2 * z;
        m4 += z2 * z2;
    }

    Ok(TimeFeatures {
        mean,
        rms,
        variance,
        std,
        max,
        min,
        p2p,
        crest_factor: max / rms,
        skewness: m3 / n,
        kurtosis: m4 / n,
        energy,
        entropy: amplitude_entropy(samples, min, max),
    })
}

/// Histogram bin of `x` among [`ENTROPY_BINS`] equal bins over `[min, max]`.
#[inline]
pub fn entropy_bin(x: f64, min: f64, max: f64) -> usize {
    let b = math::floor((x - min) / (max - min) * ENTROPY_BINS as f64) as usize;
    b.min(ENTROPY_BINS - 1)
}

fn amplitude_entropy(samples: &[f64], min: f64, max: f64) -> f64 {
    let mut counts = [0usize; ENTROPY_BINS];
    for &x in samples {
        counts[entropy_bin(x, min, max)] += 1;
    }
    let n = samples.len() as f64;
    -counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            p * math::ln(p)
        })
        .sum::<f64>()
}

pub fn time_features(trace: &PowerTrace) -> Result<TimeFeatures> {
    time_features_of(&trace.samples)
}

/// Spectral descriptors over the DC-excluded magnitude view.
pub fn freq_features(spectrum: &Spectrum) -> Result<FreqFeatures> {
    let mags = spectrum.magnitudes();
    let bins = mags.len();
    if bins < 4 {
        return Err(Error::TooShort { min: 4, got: bins });
    }
    let freq = |i: usize| spectrum.bin_freq(i + 1);

    let total: f64 = mags.iter().sum();
    if !(total > DEGENERATE_REL * spectrum.dc_magnitude()) {
        return Ok(FreqFeatures::degenerate());
    }

    let centroid = mags.iter().enumerate().map(|(i, &m)| freq(i) * m).sum::<f64>() / total;
    let spread = mags
        .iter()
        .enumerate()
        .map(|(i, &m)| {
            let d = freq(i) - centroid;
            d * d * m
        })
        .sum::<f64>()
        / total;
    let bandwidth = math::sqrt(spread);

    let count = bins as f64;
    let log_mean = mags.iter().map(|&m| math::ln(m.max(FLATNESS_FLOOR))).sum::<f64>() / count;
    let arith_mean = total / count;
    let flatness = (math::exp(log_mean) / arith_mean).min(1.0);

    let threshold = ROLLOFF_FRACTION * total;
    let mut cumulative = 0.0;
    let mut rolloff = freq(bins - 1);
    for (i, &m) in mags.iter().enumerate() {
        cumulative += m;
        if cumulative >= threshold {
            rolloff = freq(i);
            break;
        }
    }

    let spectral_entropy = -mags
        .iter()
        .filter(|&&m| m > 0.0)
        .map(|&m| {
            let p = m / total;
            p * math::ln(p)
        })
        .sum::<f64>();

    let mut contrast = 0.0;
    for band in 0..CONTRAST_BANDS {
        let lo = band * bins / CONTRAST_BANDS;
        let hi = (band + 1) * bins / CONTRAST_BANDS;
        if lo < hi {
            let slice = &mags[lo..hi];
            let bmax = slice.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let bmin = slice.iter().copied().fold(f64::INFINITY, f64::min);
            contrast += bmax - bmin;
        }
    }
    contrast /= CONTRAST_BANDS as f64;

    // Fundamental: first bin holding the largest magnitude.
    let mut fund = 0;
    for (i, &m) in mags.iter().enumerate() {
        if m > mags[fund] {
            fund = i;
        }
    }
    let fund_bin = fund + 1;
    let mut harmonic_strength = [0.0; HARMONICS];
    for (h, slot) in harmonic_strength.iter_mut().enumerate() {
        let bin = (h + 1) * fund_bin;
        if bin <= bins {
            *slot = mags[bin - 1];
        }
    }
    let fundamental = harmonic_strength[0];
    let thd = math::sqrt(
        harmonic_strength[1..]
            .iter()
            .map(|&x| {
                let r = x / fundamental;
                r * r
            })
            .sum::<f64>(),
    );

    let variability = mags
        .iter()
        .map(|&m| {
            let d = m - arith_mean;
            d * d
        })
        .sum::<f64>()
        / count;

    Ok(FreqFeatures {
        spectral_centroid: centroid,
        spectral_bandwidth: bandwidth,
        spectral_flatness: flatness,
        spectral_rolloff: rolloff,
        spectral_entropy,
        spectral_contrast: contrast,
        thd,
        harmonic_strength,
        spectral_variability: variability,
        degenerate: false,
    })
}

/// One trace's features plus its label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub trojan_id: String,
    pub label: TrojanState,
    pub values: Vec<f64>,
    pub schema: SchemaId,
}

impl FeatureVector {
    /// Vector with an anonymous schema of `values.len()` features.
    pub fn new(values: Vec<f64>, label: TrojanState) -> Self {
        let schema = SchemaId::anonymous(values.len());
        Self { trojan_id: String::new(), label, values, schema }
    }

    /// Vector in the canonical 25-feature schema.
    pub fn canonical(values: Vec<f64>, label: TrojanState, trojan_id: impl Into<String>) -> Result<Self> {
        if values.len() != N_FEATURES {
            return Err(Error::Schema(alloc::format!(
                "expected {N_FEATURES} features, got {}",
                values.len()
            )));
        }
        Ok(Self { trojan_id: trojan_id.into(), label, values, schema: SchemaId::canonical() })
    }

    pub fn is_positive(&self) -> bool {
        self.label.is_positive()
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Value of a canonical feature by name.
    pub fn get(&self, name: &str) -> Result<f64> {
        let i = feature_index(name)?;
        self.values
            .get(i)
            .copied()
            .ok_or_else(|| Error::Schema(alloc::format!("vector has {} features", self.values.len())))
    }
}

/// Time features followed by spectral features of the zero-padded FFT.
pub fn extract(trace: &PowerTrace) -> Result<FeatureVector> {
    let time = time_features(trace)?;
    let freq = freq_features(&dsp::fft(&trace.samples)?)?;
    let mut values = Vec::with_capacity(N_FEATURES);
    values.extend_from_slice(&time.to_array());
    values.extend_from_slice(&freq.to_array());
    FeatureVector::canonical(values, trace.state, trace.trojan_id.clone())
}

/// Per-feature z-scoring fitted on a training set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardizer {
    /// Fits population mean and standard deviation (floored at
    /// [`STD_FLOOR`]) of each column.
    pub fn fit(train: &[FeatureVector]) -> Result<Self> {
        let rows: Vec<&[f64]> = train.iter().map(|v| v.values.as_slice()).collect();
        Self::fit_rows(&rows)
    }

    pub fn fit_rows(rows: &[&[f64]]) -> Result<Self> {
        let Some(first) = rows.first() else {
            return Err(Error::EmptyDataset);
        };
        if rows.len() < 2 {
            return Err(Error::TooShort { min: 2, got: rows.len() });
        }
        let d = first.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != d) {
            return Err(Error::Schema(alloc::format!("row of {} features among rows of {d}", bad.len())));
        }
        let n = rows.len() as f64;
        let mut mean = alloc::vec![0.0; d];
        for r in rows {
            for (m, &x) in mean.iter_mut().zip(r.iter()) {
                *m += x;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = alloc::vec![0.0; d];
        for r in rows {
            for ((v, &m), &x) in var.iter_mut().zip(&mean).zip(r.iter()) {
                *v += (x - m) * (x - m);
            }
        }
        let std = var.into_iter().map(|v| math::sqrt(v / n).max(STD_FLOOR)).collect();
        Ok(Self { mean, std })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn transform_values(&self, values: &[f64]) -> Result<Vec<f64>> {
        if values.len() != self.dim() {
            return Err(Error::Schema(alloc::format!(
                "standardizer fitted on {} features, got {}",
                self.dim(),
                values.len()
            )));
        }
        Ok(values.iter().zip(&self.mean).zip(&self.std).map(|((&x, &m), &s)| (x - m) / s).collect())
    }

    /// Standardized copy of `v`.
    pub fn apply(&self, v: &FeatureVector) -> Result<FeatureVector> {
        Ok(FeatureVector { values: self.transform_values(&v.values)?, ..v.clone() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::Complex;
    use alloc::vec;

    fn approx(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn constant_trace() {
        let t = time_features_of(&[5.0; 4]).unwrap();
        assert_eq!(t.mean, 5.0);
        assert_eq!(t.rms, 5.0);
        assert_eq!((t.variance, t.p2p, t.skewness, t.kurtosis, t.entropy), (0.0, 0.0, 0.0, 0.0, 0.0));
        assert_eq!(t.crest_factor, 1.0);
        assert_eq!(t.energy, 100.0);
        assert_eq!(time_features_of(&[0.0; 4]).unwrap().crest_factor, 0.0);
    }

    #[test]
    fn ramp_trace() {
        let t = time_features_of(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert!(approx(t.mean, 2.5, 1e-15));
        assert!(approx(t.variance, 1.25, 1e-15));
        assert!(approx(t.rms, 7.5f64.sqrt(), 1e-15));
        assert!(approx(t.rms, 2.738613, 1e-6));
        assert_eq!((t.max, t.min, t.p2p, t.energy), (4.0, 1.0, 3.0, 30.0));
        assert!(approx(t.crest_factor, 1.460593, 1e-6));
        // four distinct values in four distinct bins
        assert!(approx(t.entropy, 4f64.ln(), 1e-15));
    }

    #[test]
    fn square_wave_moments() {
        let t = time_features_of(&[0.0, 10.0, 0.0, 10.0]).unwrap();
        assert_eq!((t.mean, t.std), (5.0, 5.0));
        assert!(approx(t.skewness, 0.0, 1e-15));
        assert!(approx(t.kurtosis, 1.0, 1e-15));
    }

    fn spectrum_from_magnitudes(mags: &[f64]) -> Spectrum {
        // Real spectrum with the given positive-bin magnitudes and zero DC.
        let n = 2 * mags.len();
        let mut bins = vec![Complex::ZERO; n];
        for (i, &m) in mags.iter().enumerate() {
            bins[i + 1] = Complex::new(m, 0.0);
            if i + 1 != n / 2 {
                bins[n - i - 1] = Complex::new(m, 0.0);
            }
        }
        Spectrum::from_bins(bins).unwrap()
    }

    #[test]
    fn flat_spectrum() {
        let f = freq_features(&spectrum_from_magnitudes(&[2.0; 32])).unwrap();
        assert!(approx(f.spectral_flatness, 1.0, 1e-12));
        assert_eq!(f.spectral_contrast, 0.0);
        assert_eq!(f.spectral_rolloff, 28.0 / 64.0);
        assert!(approx(f.spectral_entropy, 32f64.ln(), 1e-12));
        assert_eq!(f.spectral_variability, 0.0);
    }

    #[test]
    fn point_mass_spectrum() {
        let mut mags = [0.0; 8];
        mags[3] = 5.0; // bin 4 of N=16 → f = 0.25
        let f = freq_features(&spectrum_from_magnitudes(&mags)).unwrap();
        assert_eq!(f.spectral_centroid, 0.25);
        assert_eq!(f.spectral_bandwidth, 0.0);
        assert_eq!(f.spectral_entropy, 0.0);
        assert_eq!(f.spectral_rolloff, 0.25);
        assert_eq!(f.harmonic_strength, [5.0, 5.0 * 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(f.thd, 0.0);
    }

    #[test]
    fn all_zero_spectrum_is_degenerate() {
        let f = freq_features(&spectrum_from_magnitudes(&[0.0; 8])).unwrap();
        assert!(f.degenerate);
        assert_eq!(f.spectral_flatness, 1.0);
        assert_eq!(f.spectral_centroid, 0.0);
    }

    #[test]
    fn harmonic_at_nyquist_and_inside() {
        use core::f64::consts::PI;
        // N = 8: the "half amplitude" tone at k = 4 sits on Nyquist, where a
        // real cosine is not split between ±k, so |X[4]| = 0.5·8 = |X[2]|.
        let x: Vec<f64> = (0..8)
            .map(|n| {
                let n = n as f64;
                (2.0 * PI * 2.0 * n / 8.0).cos() + 0.5 * (2.0 * PI * 4.0 * n / 8.0).cos()
            })
            .collect();
        let f = freq_features(&dsp::fft(&x).unwrap()).unwrap();
        assert!(approx(f.harmonic_strength[0], 4.0, 1e-12));
        assert!(approx(f.harmonic_strength[1], 4.0, 1e-12));
        assert_eq!(&f.harmonic_strength[2..], &[0.0, 0.0, 0.0]);
        assert!(approx(f.thd, 1.0, 1e-12));

        // N = 16 keeps the second harmonic off Nyquist.
        let x: Vec<f64> = (0..16)
            .map(|n| {
                let n = n as f64;
                (2.0 * PI * 2.0 * n / 16.0).cos() + 0.5 * (2.0 * PI * 4.0 * n / 16.0).cos()
            })
            .collect();
        let f = freq_features(&dsp::fft(&x).unwrap()).unwrap();
        assert!(approx(f.harmonic_strength[0], 8.0, 1e-12));
        assert!(approx(f.harmonic_strength[1], 4.0, 1e-12));
        assert!(approx(f.thd, 0.5, 1e-12));
        // k = 5 → bin 10 > 8 is beyond Nyquist
        assert_eq!(f.harmonic_strength[4], 0.0);
    }

    #[test]
    fn extract_schema_and_constant() {
        // power-of-two length: zero padding adds nothing, so only DC survives
        let t = PowerTrace::new(vec![3.0; 16], "T500", TrojanState::Triggered).unwrap();
        let v = extract(&t).unwrap();
        assert_eq!(v.values.len(), 25);
        assert_eq!(v.schema, SchemaId::canonical());
        assert_eq!(v.label, TrojanState::Triggered);
        assert_eq!(v.get("variance").unwrap(), 0.0);
        assert_eq!(v.get("spectral_flatness").unwrap(), 1.0);
        assert_eq!(v.get("spectral_centroid").unwrap(), 0.0);
        assert!(v.get("spectral_flatness").is_ok());
        assert!(matches!(v.get("varianse"), Err(Error::UnknownFeature { .. })));

        // padded constant traces are a step, not a constant
        let t = PowerTrace::new(vec![3.0; 20], "T500", TrojanState::Triggered).unwrap();
        assert!(extract(&t).unwrap().get("spectral_centroid").unwrap() > 0.0);
    }

    #[test]
    fn standardizer_basics() {
        let train = vec![
            FeatureVector::new(vec![0.0, 7.0], TrojanState::Disabled),
            FeatureVector::new(vec![2.0, 7.0], TrojanState::Triggered),
        ];
        let s = Standardizer::fit(&train).unwrap();
        assert_eq!(s.mean, vec![1.0, 7.0]);
        assert_eq!(s.std, vec![1.0, STD_FLOOR]);
        let out = s.apply(&train[1]).unwrap();
        assert_eq!(out.values, vec![1.0, 0.0]);
        assert_eq!(train[1].values, vec![2.0, 7.0]);
        assert!(matches!(Standardizer::fit(&[]), Err(Error::EmptyDataset)));
        assert!(s.apply(&FeatureVector::new(vec![1.0], TrojanState::Disabled)).is_err());
    }
}
