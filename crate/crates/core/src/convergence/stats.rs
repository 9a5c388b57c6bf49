//! Empirical distribution statistics.

use std::collections::BTreeMap;

use crate::error::{invalid, Result};

/// Two-sample Kolmogorov-Smirnov distance between integer samples.
pub fn ks_distance(a: &[i64], b: &[i64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return invalid("ks_distance needs two nonempty samples");
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_unstable();
    b.sort_unstable();
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    // Step through distinct values; both CDFs jump at the same points.
    while i < a.len() || j < b.len() {
        let v = match (a.get(i), b.get(j)) {
            (Some(&x), Some(&y)) => x.min(y),
            (Some(&x), None) => x,
            (None, Some(&y)) => y,
            (None, None) => unreachable!(),
        };
        while i < a.len() && a[i] == v {
            i += 1;
        }
        while j < b.len() && b[j] == v {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

/// Asymptotic two-sample KS critical value at level `alpha`.
pub fn ks_critical(alpha: f64, n: usize, m: usize) -> f64 {
    let c = (-(alpha / 2.0).ln() / 2.0).sqrt();
    c * ((n + m) as f64 / (n as f64 * m as f64)).sqrt()
}

/// Asymptotic one-sample KS critical value at level `alpha`.
pub fn ks_critical_one_sample(alpha: f64, n: usize) -> f64 {
    (-(alpha / 2.0).ln() / 2.0).sqrt() / (n as f64).sqrt()
}

/// KS distance between samples and an exact law over an ordered key set.
pub fn ks_to_law<K: Ord + Clone>(samples: &[K], law: &BTreeMap<K, f64>) -> Result<f64> {
    if samples.is_empty() {
        return invalid("ks_to_law needs a nonempty sample");
    }
    let mut joint: BTreeMap<K, (f64, f64)> = law.iter().map(|(k, &p)| (k.clone(), (0.0, p))).collect();
    let w = 1.0 / samples.len() as f64;
    for s in samples {
        joint.entry(s.clone()).or_insert((0.0, 0.0)).0 += w;
    }
    let (mut fe, mut fl, mut d) = (0.0f64, 0.0f64, 0.0f64);
    for (e, l) in joint.values() {
        fe += e;
        fl += l;
        d = d.max((fe - fl).abs());
    }
    Ok(d)
}

/// `z` standard errors of a binomial proportion.
pub fn binomial_radius(p: f64, n: usize, z: f64) -> f64 {
    z * (p.clamp(0.0, 1.0) * (1.0 - p.clamp(0.0, 1.0)) / n as f64).sqrt()
}

/// Fraction of samples satisfying `pred`.
pub fn frequency<T>(samples: &[T], pred: impl Fn(&T) -> bool) -> f64 {
    samples.iter().filter(|s| pred(s)).count() as f64 / samples.len() as f64
}

/// Empirical probability mass function.
pub fn empirical_pmf(samples: &[i64]) -> BTreeMap<i64, f64> {
    let mut out = BTreeMap::new();
    let w = 1.0 / samples.len() as f64;
    for &s in samples {
        *out.entry(s).or_insert(0.0) += w;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    #[test]
    fn identical_and_disjoint() {
        let a = [1, 2, 2, 5];
        assert_eq!(ks_distance(&a, &a).unwrap(), 0.0);
        assert_eq!(ks_distance(&[0; 10], &[1; 7]).unwrap(), 1.0);
        assert!(ks_distance(&[], &[1]).is_err());
    }

    #[test]
    fn hand_computed() {
        // CDFs at 1: 1/2 vs 0; at 2: 1 vs 1/2.
        assert!((ks_distance(&[1, 2], &[2, 3]).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn geometric_samples_pass_critical_value() {
        let draw = |seed: u64| -> Vec<i64> {
            let mut r = RngStream::new(seed, 0).rng();
            (0..100_000).map(|_| r.capped_geometric(0.5, None) as i64).collect()
        };
        let d = ks_distance(&draw(1), &draw(2)).unwrap();
        assert!(d < ks_critical(0.01, 100_000, 100_000), "{d}");
    }

    #[test]
    fn one_sample_against_law() {
        let law: BTreeMap<i64, f64> = [(0, 0.25), (1, 0.5), (2, 0.25)].into_iter().collect();
        assert!((ks_to_law(&[0, 1, 1, 2], &law).unwrap()).abs() < 1e-15);
        assert!((ks_to_law(&[2, 2], &law).unwrap() - 0.75).abs() < 1e-15);
        assert!((ks_to_law(&[3], &law).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn critical_values() {
        // c(0.05) = 1.358...
        assert!((ks_critical_one_sample(0.05, 1) - 1.3581).abs() < 1e-3);
        assert!((ks_critical(0.05, 100, 100) - 1.3581 * (0.02f64).sqrt()).abs() < 1e-3);
    }
}
