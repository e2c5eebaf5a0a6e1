//! Gaussian kernel density curves of one feature, per class.

use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{feature_index, FeatureVector};
use crate::math;
use crate::trace::TrojanState;

pub const BANDWIDTH_FLOOR: f64 = 1e-12;
/// Grid padding on each side, in bandwidths.
pub const GRID_PAD: f64 = 3.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KdeCurve {
    pub feature: String,
    pub label: TrojanState,
    pub bandwidth: f64,
    /// `(x, density)` pairs on an increasing grid.
    pub points: Vec<[f64; 2]>,
}

impl KdeCurve {
    /// Trapezoidal integral of the density over the grid.
    pub fn integral(&self) -> f64 {
        crate::eval::metrics::trapezoid_area(&self.points)
    }
}

/// Linear-interpolation quantile of sorted data (`q` in [0, 1]).
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = math::floor(pos) as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Silverman's rule of thumb, `0.9 · min(σ, IQR/1.34) · m^(−1/5)`.
///
/// A zero spread estimate is skipped in favour of the other one; the
/// result is floored at [`BANDWIDTH_FLOOR`].
pub fn silverman_bandwidth(values: &[f64]) -> f64 {
    let m = values.len();
    if m < 2 {
        return BANDWIDTH_FLOOR;
    }
    let mean = values.iter().sum::<f64>() / m as f64;
    let sd = math::sqrt(values.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (m - 1) as f64);
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let iqr = (quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25)) / 1.34;
    let spread = match (sd > 0.0, iqr > 0.0) {
        (true, true) => sd.min(iqr),
        (true, false) => sd,
        (false, true) => iqr,
        (false, false) => 0.0,
    };
    (0.9 * spread * math::powf(m as f64, -0.2)).max(BANDWIDTH_FLOOR)
}

/// `(1/(m·h)) · Σ φ((x − xᵢ)/h)`.
pub fn gaussian_density(values: &[f64], h: f64, x: f64) -> f64 {
    let norm = 1.0 / (values.len() as f64 * h * math::sqrt(2.0 * PI));
    norm * values
        .iter()
        .map(|&xi| {
            let u = (x - xi) / h;
            math::exp(-0.5 * u * u)
        })
        .sum::<f64>()
}

/// `count` evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return alloc::vec![lo];
    }
    let step = (hi - lo) / (count - 1) as f64;
    (0..count).map(|i| if i + 1 == count { hi } else { lo + step * i as f64 }).collect()
}

fn curve(values: &[f64], h: f64, grid: &[f64], feature: &str, label: TrojanState) -> KdeCurve {
    KdeCurve {
        feature: String::from(feature),
        label,
        bandwidth: h,
        points: grid.iter().map(|&x| [x, gaussian_density(values, h, x)]).collect(),
    }
}

/// Density curves of `feature` for the disabled and triggered classes.
///
/// Both curves share one grid spanning `[min − 3h, max + 3h]` of each
/// class, so they can be written side by side.
pub fn kde_export(vectors: &[FeatureVector], feature: &str, grid_points: usize) -> Result<(KdeCurve, KdeCurve)> {
    let idx = feature_index(feature)?;
    if grid_points < 2 {
        return Err(Error::Config { field: "grid_points", reason: String::from("must be at least 2") });
    }
    let mut by_class: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
    for v in vectors {
        let x = *v.values.get(idx).ok_or_else(|| {
            Error::Schema(alloc::format!("vector has {} features, `{feature}` is #{idx}", v.values.len()))
        })?;
        by_class[usize::from(v.is_positive())].push(x);
    }
    if by_class.iter().any(|c| c.len() < 2) {
        return Err(Error::ClassCoverage(alloc::format!(
            "need at least 2 vectors per class, got {} disabled / {} triggered",
            by_class[0].len(),
            by_class[1].len()
        )));
    }

    let h = [silverman_bandwidth(&by_class[0]), silverman_bandwidth(&by_class[1])];
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (vals, &hc) in by_class.iter().zip(&h) {
        for &x in vals {
            lo = lo.min(x - GRID_PAD * hc);
            hi = hi.max(x + GRID_PAD * hc);
        }
    }
    let grid = linspace(lo, hi, grid_points);
    Ok((
        curve(&by_class[0], h[0], &grid, feature, TrojanState::Disabled),
        curve(&by_class[1], h[1], &grid, feature, TrojanState::Triggered),
    ))
}

/// `∫ min(f, g)` by trapezoid; curves must share a grid.
pub fn overlap_coefficient(a: &KdeCurve, b: &KdeCurve) -> Result<f64> {
    if a.points.len() != b.points.len() || a.points.iter().zip(&b.points).any(|(p, q)| p[0] != q[0]) {
        return Err(Error::Shape(String::from("curves are on different grids")));
    }
    let mins: Vec<[f64; 2]> = a.points.iter().zip(&b.points).map(|(p, q)| [p[0], p[1].min(q[1])]).collect();
    Ok(crate::eval::metrics::trapezoid_area(&mins))
}
