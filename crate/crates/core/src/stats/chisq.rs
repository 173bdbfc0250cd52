//! Pearson's chi-square test with small-category merging.

use serde::Serialize;
use statrs::function::gamma::gamma_lr;

use crate::error::{contract, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChiSquareReport {
    pub labels: Vec<String>,
    pub observed: Vec<u64>,
    /// Expected counts, rescaled to the observed total.
    pub expected: Vec<f64>,
    /// Original category indices in each merged category.
    pub merged: Vec<Vec<usize>>,
    pub merged_labels: Vec<String>,
    pub merged_observed: Vec<u64>,
    pub merged_expected: Vec<f64>,
    pub degrees_of_freedom: usize,
    pub statistic: f64,
    pub significance: f64,
    pub critical_value: f64,
    pub accepted: bool,
    /// Critical value and verdict at the 0.01 level.
    pub critical_value_01: f64,
    pub accepted_01: bool,
}

/// `P(χ²_df ≤ x)`, the regularized lower incomplete gamma `P(df/2, x/2)`.
pub fn chi_square_cdf(x: f64, df: usize) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        gamma_lr(df as f64 / 2.0, x / 2.0)
    }
}

/// Upper `significance` quantile of `χ²_df`, by bisection on the cdf.
pub fn chi_square_critical(significance: f64, df: usize) -> Result<f64> {
    if !(significance > 0.0 && significance < 1.0) || df == 0 {
        return Err(contract("critical values need 0 < significance < 1 and df ≥ 1"));
    }
    let target = 1.0 - significance;
    let mut hi = df as f64 + 10.0;
    while chi_square_cdf(hi, df) < target {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if chi_square_cdf(mid, df) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-12 * hi.max(1.0) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Merges categories in ascending order of expected count (ties by label)
/// into bins of expected count at least `min_expected`; a short final bin
/// joins the one before it. Expected counts are rescaled to the observed
/// total first.
pub fn chi_square_test(
    labels: &[String],
    observed: &[u64],
    expected: &[f64],
    min_expected: f64,
    significance: f64,
) -> Result<ChiSquareReport> {
    if labels.len() != observed.len() || observed.len() != expected.len() {
        return Err(contract("labels, observed and expected must have the same length"));
    }
    if expected.iter().any(|e| !(e.is_finite() && *e >= 0.0)) {
        return Err(contract("expected counts must be finite and nonnegative"));
    }
    let total: u64 = observed.iter().sum();
    let weight: f64 = expected.iter().sum();
    if total == 0 {
        return Err(Error::Degenerate("no observations".into()));
    }
    if weight <= 0.0 {
        return Err(Error::Degenerate("expected counts are all zero".into()));
    }
    let scale = total as f64 / weight;
    let expected: Vec<f64> = expected.iter().map(|e| e * scale).collect();

    let mut order: Vec<usize> = (0..labels.len()).collect();
    order.sort_by(|&a, &b| expected[a].total_cmp(&expected[b]).then_with(|| labels[a].cmp(&labels[b])));
    let mut merged: Vec<Vec<usize>> = Vec::new();
    let mut bin = Vec::new();
    let mut mass = 0.0;
    for i in order {
        bin.push(i);
        mass += expected[i];
        if mass >= min_expected {
            merged.push(std::mem::take(&mut bin));
            mass = 0.0;
        }
    }
    if !bin.is_empty() {
        match merged.last_mut() {
            Some(last) => last.extend(bin),
            None => merged.push(bin),
        }
    }
    if merged.len() < 2 {
        return Err(Error::Degenerate(format!("{} category after merging", merged.len())));
    }

    let merged_labels: Vec<String> =
        merged.iter().map(|b| b.iter().map(|&i| labels[i].as_str()).collect::<Vec<_>>().join("+")).collect();
    let merged_observed: Vec<u64> = merged.iter().map(|b| b.iter().map(|&i| observed[i]).sum()).collect();
    let merged_expected: Vec<f64> = merged.iter().map(|b| b.iter().map(|&i| expected[i]).sum()).collect();
    let statistic: f64 = merged_observed
        .iter()
        .zip(&merged_expected)
        .map(|(&o, &e)| {
            let d = o as f64 - e;
            d * d / e
        })
        .sum();
    let df = merged.len() - 1;
    let critical_value = chi_square_critical(significance, df)?;
    let critical_value_01 = chi_square_critical(0.01, df)?;
    Ok(ChiSquareReport {
        labels: labels.to_vec(),
        observed: observed.to_vec(),
        expected,
        merged,
        merged_labels,
        merged_observed,
        merged_expected,
        degrees_of_freedom: df,
        statistic,
        significance,
        critical_value,
        accepted: statistic < critical_value,
        critical_value_01,
        accepted_01: statistic < critical_value_01,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("c{i:02}")).collect()
    }

    // Composite Simpson on u ∈ [0, √x] of the density after x = u², with
    // the normalizer integrated the same way; no gamma function involved.
    fn simpson_cdf(x: f64, df: usize) -> f64 {
        let k = df as f64;
        let mode = (k - 1.0).max(0.0).sqrt();
        let log_f = |u: f64| {
            if u == 0.0 {
                if df == 1 {
                    0.0
                } else {
                    f64::NEG_INFINITY
                }
            } else {
                (k - 1.0) * u.ln() - u * u / 2.0
            }
        };
        let peak = if df == 1 { 0.0 } else { log_f(mode) };
        let f = |u: f64| (log_f(u) - peak).exp();
        let integrate = |b: f64| {
            let n = 40_000;
            let h = b / n as f64;
            let mut s = f(0.0) + f(b);
            for i in 1..n {
                s += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
            }
            s * h / 3.0
        };
        let upper = (k + 60.0 * k.sqrt() + 200.0).sqrt();
        integrate(x.sqrt()) / integrate(upper)
    }

    #[test]
    fn critical_values_match_numeric_integration() {
        for df in 1..=120 {
            let c = chi_square_critical(0.05, df).unwrap();
            let p = simpson_cdf(c, df);
            assert!((p - 0.95).abs() < 1e-6, "df={df} crit={c} cdf={p}");
        }
    }

    #[test]
    fn known_quantiles() {
        assert!((chi_square_critical(0.05, 1).unwrap() - 3.841_458_820_694_124).abs() < 1e-9);
        assert!((chi_square_critical(0.05, 20).unwrap() - 31.410_432_844_230_92).abs() < 1e-8);
    }

    #[test]
    fn balanced_pair_is_accepted() {
        let r = chi_square_test(&labels(2), &[5, 5], &[5.0, 5.0], 5.0, 0.05).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.degrees_of_freedom, 1);
        assert!(r.accepted);
    }

    #[test]
    fn lopsided_pair_is_rejected() {
        let r = chi_square_test(&labels(2), &[10, 0], &[5.0, 5.0], 5.0, 0.05).unwrap();
        assert!((r.statistic - 10.0).abs() < 1e-12);
        assert!((r.critical_value - 3.84).abs() < 0.01);
        assert!(!r.accepted);
    }

    #[test]
    fn merging_preserves_totals_and_floor() {
        let obs = [3u64, 0, 1, 40, 7, 2, 30, 17];
        let exp = [2.0, 0.5, 1.0, 38.0, 9.0, 3.0, 29.0, 17.5];
        let r = chi_square_test(&labels(8), &obs, &exp, 5.0, 0.05).unwrap();
        assert!(r.merged_expected.iter().all(|&e| e >= 5.0));
        assert_eq!(r.merged_observed.iter().sum::<u64>(), obs.iter().sum::<u64>());
        let te: f64 = r.merged_expected.iter().sum();
        assert!((te - 100.0).abs() < 1e-9);
        assert_eq!(r.degrees_of_freedom, r.merged.len() - 1);
        let mut all: Vec<usize> = r.merged.concat();
        all.sort();
        assert_eq!(all, (0..8).collect::<Vec<_>>());
    }

    #[test]
    fn degenerate_inputs() {
        assert!(matches!(chi_square_test(&labels(2), &[0, 0], &[1.0, 1.0], 5.0, 0.05), Err(Error::Degenerate(_))));
        assert!(matches!(chi_square_test(&labels(2), &[3, 3], &[1.0, 1.0], 5.0, 0.05), Err(Error::Degenerate(_))));
    }

    #[test]
    fn mcl_centralizers_merge_to_twenty_one() {
        let cent: [(&str, f64); 24] = [
            ("1A", 898_128_000.0), ("2A", 40320.0), ("3A", 29160.0), ("3B", 972.0), ("4A", 96.0), ("5A", 750.0),
            ("5B", 25.0), ("6A", 360.0), ("6B", 36.0), ("7A", 14.0), ("7B", 14.0), ("8A", 8.0), ("9A", 27.0),
            ("9B", 27.0), ("10A", 30.0), ("11A", 11.0), ("11B", 11.0), ("12A", 12.0), ("14A", 14.0), ("14B", 14.0),
            ("15A", 30.0), ("15B", 30.0), ("30A", 30.0), ("30B", 30.0),
        ];
        let total: f64 = cent.iter().map(|(_, c)| 1.0 / c).sum();
        assert!((total - 1.0).abs() < 1e-12);
        let labels: Vec<String> = cent.iter().map(|(l, _)| l.to_string()).collect();
        let expected: Vec<f64> = cent.iter().map(|(_, c)| 10_000.0 / c).collect();
        let observed: Vec<u64> = expected.iter().map(|e| e.round() as u64).collect();
        let r = chi_square_test(&labels, &observed, &expected, 5.0, 0.05).unwrap();
        assert_eq!(r.merged.len(), 21);
        assert_eq!(r.degrees_of_freedom, 20);
        assert!((r.critical_value - 31.4).abs() < 0.05);
    }
}
