use htscan_core::features::{extract, time_features_of};
use htscan_core::synth::{generate_synthetic, Effect, SyntheticConfig};

/// Two-sample Kolmogorov-Smirnov statistic and asymptotic p-value.
fn ks_test(a: &[f64], b: &[f64]) -> (f64, f64) {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    let ne = (a.len() * b.len()) as f64 / (a.len() + b.len()) as f64;
    let lambda = (ne.sqrt() + 0.12 + 0.11 / ne.sqrt()) * d;
    if lambda < 0.2 {
        // series has not converged yet; Q(λ) is 1 to double precision here
        return (d, 1.0);
    }
    let p = (1..=100)
        .map(|k| {
            let k = k as f64;
            2.0 * (-1f64).powf(k - 1.0) * (-2.0 * k * k * lambda * lambda).exp()
        })
        .sum::<f64>();
    (d, p.clamp(0.0, 1.0))
}

fn class_means(cfg: &SyntheticConfig) -> (Vec<f64>, Vec<f64>) {
    let data = generate_synthetic(cfg).unwrap();
    let mut out = (Vec::new(), Vec::new());
    for t in data.traces() {
        let m = time_features_of(&t.samples).unwrap().mean;
        if t.state.is_positive() { out.1.push(m) } else { out.0.push(m) }
    }
    out
}

#[test]
fn ks_oracle_sanity() {
    let a: Vec<f64> = (0..100).map(|i| i as f64).collect();
    let b: Vec<f64> = (0..100).map(|i| i as f64 + 50.0).collect();
    let (d, p) = ks_test(&a, &b);
    assert!((d - 0.5).abs() < 1e-12);
    assert!(p < 1e-6);
    let (d, p) = ks_test(&a, &a);
    assert_eq!(d, 0.0);
    assert_eq!(p, 1.0);
}

/// Survival function of χ² with `2n` degrees of freedom.
fn chi2_even_sf(x: f64, n: usize) -> f64 {
    let half = x / 2.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..n {
        term *= half / k as f64;
        sum += term;
    }
    (-half).exp() * sum
}

#[test]
fn zero_separability_is_indistinguishable() {
    for effect in [Effect::SpikeTrain, Effect::HarmonicInjection, Effect::VarianceInflation, Effect::DutyDrain] {
        let pvals: Vec<f64> = (0..20)
            .map(|repeat| {
                let cfg = SyntheticConfig { separability: 0.0, effect, seed: repeat, ..Default::default() };
                let (dis, trig) = class_means(&cfg);
                ks_test(&dis, &trig).1
            })
            .collect();
        let fisher = -2.0 * pvals.iter().map(|p| p.max(1e-300).ln()).sum::<f64>();
        let combined = chi2_even_sf(fisher, pvals.len());
        let rejected = pvals.iter().filter(|&&p| p <= 0.01).count();
        assert!(combined > 0.01, "{effect:?}: combined p {combined}, {pvals:?}");
        assert!(rejected <= 2, "{effect:?}: {rejected} of 20 rejected");
    }
}

#[test]
fn chi2_survival_reference() {
    // χ²(2) is exponential with mean 2
    assert!((chi2_even_sf(3.0, 1) - (-1.5f64).exp()).abs() < 1e-15);
    // χ²(40) upper 1% point is 63.691
    assert!((chi2_even_sf(63.691, 20) - 0.01).abs() < 1e-4);
}

#[test]
fn variance_inflation_raises_variance() {
    let cfg = SyntheticConfig { separability: 1.0, effect: Effect::VarianceInflation, ..Default::default() };
    let data = generate_synthetic(&cfg).unwrap();
    let (mut dis, mut trig) = (Vec::new(), Vec::new());
    for t in data.traces() {
        let v = extract(t).unwrap().get("variance").unwrap();
        if t.state.is_positive() { trig.push(v) } else { dis.push(v) }
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    assert!(mean(&trig) > mean(&dis));
}

#[test]
fn every_effect_shifts_some_feature() {
    for effect in [Effect::SpikeTrain, Effect::HarmonicInjection, Effect::VarianceInflation, Effect::DutyDrain] {
        let cfg = SyntheticConfig { separability: 1.0, effect, n_per_class: 50, ..Default::default() };
        let data = generate_synthetic(&cfg).unwrap();
        let feats: Vec<_> = data.traces().iter().map(|t| extract(t).unwrap()).collect();
        let separated = (0..25).any(|j| {
            let (a, b): (Vec<_>, Vec<_>) = feats.iter().partition(|v| v.is_positive());
            let col = |s: &[&htscan_core::features::FeatureVector]| s.iter().map(|v| v.values[j]).collect::<Vec<_>>();
            ks_test(&col(&a), &col(&b)).1 < 1e-6
        });
        assert!(separated, "{effect:?}");
    }
}
