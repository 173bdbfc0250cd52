//! Peak sets `(m, A_m)` of a distribution.

use serde::Serialize;

use super::{DistributionVector, IDENTITY_TOL};
use crate::error::{contract, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeakSet {
    /// Smallest level `x` with `Pr(X ∉ {g : Pr(g) > x}) > δ`.
    pub m: f64,
    /// Element indices, ascending.
    pub members: Vec<usize>,
    pub delta: f64,
    /// `Pr(X ∉ A_m)`.
    pub outside_mass: f64,
    /// Every member added on top of `{g : Pr(g) > m}` has probability
    /// exactly `m`.
    pub level_extension: bool,
}

/// A peak set, or the degenerate case where the bounds on `A_m` do not
/// apply (`max Pr > 1 − δ` or `m ≥ δ`).
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "class", rename_all = "kebab-case")]
pub enum PeakClass {
    Regular(PeakSet),
    CaseZero(PeakSet),
}

impl PeakClass {
    pub fn peak(&self) -> &PeakSet {
        match self {
            PeakClass::Regular(p) | PeakClass::CaseZero(p) => p,
        }
    }

    pub fn is_case_zero(&self) -> bool {
        matches!(self, PeakClass::CaseZero(_))
    }
}

/// Greedy peak set: start from `{g : Pr(g) > m}` and add the smallest
/// remaining elements, ties by index, while the mass outside stays `≥ δ`
/// up to rounding.
pub fn peak_set(d: &DistributionVector, delta: f64) -> Result<PeakClass> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(contract(format!("delta must lie in (0, 1), got {delta}")));
    }
    let p = d.probs();
    let mut order: Vec<usize> = (0..p.len()).collect();
    order.sort_by(|&a, &b| p[a].total_cmp(&p[b]).then(a.cmp(&b)));

    // m: first level whose cumulative mass (all of that level included)
    // exceeds δ.
    let mut cum = 0.0;
    let mut m = p[order[order.len() - 1]];
    let mut i = 0;
    while i < order.len() {
        let level = p[order[i]];
        while i < order.len() && p[order[i]] == level {
            cum += level;
            i += 1;
        }
        if cum > delta {
            m = level;
            break;
        }
    }

    let mut inside: Vec<bool> = p.iter().map(|&x| x > m).collect();
    let mut outside: f64 = p.iter().filter(|&&x| x <= m).sum();
    let mut level_extension = true;
    for &g in &order {
        if inside[g] {
            continue;
        }
        if outside - p[g] >= delta - IDENTITY_TOL {
            inside[g] = true;
            outside -= p[g];
            level_extension &= p[g] == m;
        } else {
            break;
        }
    }
    let members: Vec<usize> = (0..p.len()).filter(|&g| inside[g]).collect();
    let peak = PeakSet { m, members, delta, outside_mass: outside, level_extension };
    let max = p.iter().cloned().fold(0.0, f64::max);
    Ok(if max > 1.0 - delta || m >= delta { PeakClass::CaseZero(peak) } else { PeakClass::Regular(peak) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::RandomSource;

    // Exhaustive reference: every subset satisfying the defining conditions.
    fn valid_sets(p: &[f64], delta: f64, m: f64) -> Vec<Vec<usize>> {
        let n = p.len();
        let mut out = Vec::new();
        for mask in 0u32..(1 << n) {
            let set: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
            if p.iter().enumerate().any(|(i, &x)| x > m && mask >> i & 1 == 0) {
                continue;
            }
            let outside: f64 = (0..n).filter(|&i| mask >> i & 1 == 0).map(|i| p[i]).sum();
            if outside < delta - 1e-12 {
                continue;
            }
            let maximal = (0..n).filter(|&i| mask >> i & 1 == 0).all(|i| outside - p[i] < delta - 1e-12);
            if maximal {
                out.push(set);
            }
        }
        out
    }

    fn reference_m(p: &[f64], delta: f64) -> f64 {
        let mut levels: Vec<f64> = p.to_vec();
        levels.sort_by(f64::total_cmp);
        levels
            .into_iter()
            .find(|&x| p.iter().filter(|&&q| q <= x).sum::<f64>() > delta)
            .unwrap()
    }

    #[test]
    fn spec_example_four_points() {
        let d = DistributionVector::new(vec![0.4, 0.2, 0.2, 0.2]).unwrap();
        let c = peak_set(&d, 0.3).unwrap();
        assert!(!c.is_case_zero());
        assert_eq!(c.peak().m, 0.2);
        assert_eq!(c.peak().members, vec![0, 1]);
        assert!(valid_sets(d.probs(), 0.3, 0.2).contains(&c.peak().members));
    }

    #[test]
    fn uniform_halves() {
        for n in [2usize, 4, 6, 8, 12] {
            let d = DistributionVector::uniform(n);
            let c = peak_set(&d, 0.5).unwrap();
            assert_eq!(c.peak().m, 1.0 / n as f64);
            assert_eq!(c.peak().members.len(), n / 2);
            assert!(c.peak().outside_mass >= 0.5 - 1e-12);
        }
    }

    #[test]
    fn point_mass_is_case_zero() {
        let c = peak_set(&DistributionVector::point_mass(4, 2), 0.25).unwrap();
        assert!(c.is_case_zero());
        assert!(peak_set(&DistributionVector::uniform(4), 0.0).is_err());
    }

    #[test]
    fn greedy_matches_definition_on_random_pmfs() {
        let mut src = RandomSource::new(12, "peak");
        for _ in 0..300 {
            let n = 2 + src.below(7);
            // Coarse weights make ties common.
            let w: Vec<f64> = (0..n).map(|_| src.below(4) as f64).collect();
            let Ok(d) = DistributionVector::from_weights(&w) else { continue };
            let delta = 0.05 + 0.9 * src.unit();
            let c = peak_set(&d, delta).unwrap();
            let pk = c.peak();
            assert_eq!(pk.m, reference_m(d.probs(), delta));
            assert!(valid_sets(d.probs(), delta, pk.m).contains(&pk.members), "{:?} δ={delta}", d.probs());
            if !c.is_case_zero() {
                assert!(pk.outside_mass >= delta - 1e-12);
                assert!(pk.outside_mass < delta + pk.m + 1e-12);
                if pk.level_extension {
                    assert!(pk.members.iter().all(|&g| d.prob(g) >= pk.m - 1e-12));
                }
            }
        }
    }
}
