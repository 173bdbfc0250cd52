//! Chi-square experiments over cycle-type partitions.

mod chisq;
mod experiment;
mod partition;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{contract, Result};
use crate::group::{Backend, GroupElement};

pub use chisq::{chi_square_cdf, chi_square_critical, chi_square_test, ChiSquareReport};
pub use experiment::{draw_samples, render_csv, render_table, run_experiment, Algorithm, ExperimentReport, ExperimentSpec};
pub use partition::{element_order, Category, ClassKey, Partition, PartitionSource, MCL_APPENDIX};

/// Cycle lengths in descending order, fixed points included.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CycleType(Vec<usize>);

impl CycleType {
    pub fn new(mut parts: Vec<usize>) -> Result<Self> {
        if parts.is_empty() || parts.contains(&0) {
            return Err(contract("a cycle type needs positive parts"));
        }
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Ok(CycleType(parts))
    }

    pub fn parts(&self) -> &[usize] {
        &self.0
    }

    pub fn degree(&self) -> usize {
        self.0.iter().sum()
    }

    /// Parity as a permutation.
    pub fn is_even(&self) -> bool {
        self.0.iter().map(|l| l - 1).sum::<usize>() % 2 == 0
    }

    /// Element order, the lcm of the parts.
    pub fn order(&self) -> u64 {
        self.0.iter().fold(1u64, |acc, &l| lcm(acc, l as u64))
    }
}

impl fmt::Display for CycleType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|p| p.to_string()).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub(crate) fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

pub fn cycle_type(backend: Backend, p: &GroupElement) -> Result<CycleType> {
    let Backend::Permutation { degree } = backend else {
        return Err(contract("cycle types exist only for permutations"));
    };
    let img = p.payload();
    if img.len() != degree {
        return Err(contract("element does not match the backend degree"));
    }
    let mut seen = vec![false; degree];
    let mut parts = Vec::new();
    for start in 0..degree {
        if seen[start] {
            continue;
        }
        let mut len = 0;
        let mut x = start;
        while !seen[x] {
            seen[x] = true;
            x = img[x] as usize;
            len += 1;
        }
        parts.push(len);
    }
    CycleType::new(parts)
}

/// Size of an `S_n` class and how it behaves in `A_n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassInfo {
    pub size: u128,
    /// `size / n!`.
    pub fraction: f64,
    pub even: bool,
    /// The class splits into two `A_n` classes: all parts odd and distinct.
    pub splits_in_an: bool,
}

fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

/// `n! / Π l^{m_l} m_l!` for the multiplicities `m_l` of each length `l`.
pub fn sn_class_size(ct: &CycleType) -> ClassInfo {
    let n = ct.degree();
    let mut denom: u128 = 1;
    let mut i = 0;
    let parts = ct.parts();
    let mut distinct = true;
    while i < parts.len() {
        let l = parts[i];
        let mut m = 0;
        while i < parts.len() && parts[i] == l {
            m += 1;
            i += 1;
        }
        distinct &= m == 1;
        denom *= (l as u128).pow(m as u32) * factorial(m);
    }
    let size = factorial(n) / denom;
    ClassInfo {
        size,
        fraction: 1.0 / denom as f64,
        even: ct.is_even(),
        splits_in_an: distinct && parts.iter().all(|l| l % 2 == 1),
    }
}

/// Every cycle type of degree `n`, in reverse lexicographic order.
pub fn cycle_types(n: usize) -> Vec<CycleType> {
    fn go(rest: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<CycleType>) {
        if rest == 0 {
            out.push(CycleType(cur.clone()));
            return;
        }
        for l in (1..=rest.min(max)).rev() {
            cur.push(l);
            go(rest - l, l, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(n, n, &mut Vec::new(), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use std::collections::HashMap;

    use super::*;
    use crate::group::builtin::builtin;
    use crate::group::{enumerate_elements, parse_cycles};

    fn ct(c: &str, n: usize) -> CycleType {
        cycle_type(Backend::Permutation { degree: n }, &parse_cycles(c, n).unwrap()).unwrap()
    }

    #[test]
    fn cycle_type_examples() {
        assert_eq!(ct("(1 2 3)(4 5)", 5).parts(), &[3, 2]);
        assert_eq!(ct("()", 4).parts(), &[1, 1, 1, 1]);
        assert_eq!(ct("(1 2)(3 4)", 5).parts(), &[2, 2, 1]);
        let m = Backend::Matrix { dim: 2, prime: 3 };
        assert!(cycle_type(m, &GroupElement::from_payload(vec![1, 0, 0, 1])).is_err());
        assert_eq!(ct("(1 2 3)(4 5)", 5).order(), 6);
    }

    #[test]
    fn class_sizes_match_brute_force() {
        for n in 1..=6usize {
            let (g, s) = if n == 1 {
                (crate::group::BlackBoxGroup::permutation(1), None)
            } else {
                let (g, s) = builtin(&format!("S{n}")).unwrap();
                (g, Some(s))
            };
            let mut counts: HashMap<CycleType, u128> = HashMap::new();
            let els = match s {
                Some(s) => enumerate_elements(&g, &s, 1000).unwrap(),
                None => vec![g.identity()],
            };
            for e in &els {
                *counts.entry(cycle_type(g.backend(), e).unwrap()).or_insert(0) += 1;
            }
            for c in cycle_types(n) {
                assert_eq!(sn_class_size(&c).size, counts.get(&c).copied().unwrap_or(0), "{c} in S{n}");
            }
        }
        let info = sn_class_size(&CycleType::new(vec![3, 1]).unwrap());
        assert_eq!(info.size, 8);
        assert!(info.even && info.splits_in_an);
        assert_eq!(sn_class_size(&CycleType::new(vec![2, 1, 1]).unwrap()).size, 6);
        assert_eq!(sn_class_size(&CycleType::new(vec![1; 7]).unwrap()).size, 1);
        assert!(sn_class_size(&CycleType::new(vec![5, 3, 1]).unwrap()).splits_in_an);
    }

    // An even class splits in A_n exactly when no odd permutation
    // centralizes a representative.
    #[test]
    fn splitting_matches_centralizers() {
        for n in 2..=6usize {
            let (g, s) = builtin(&format!("S{n}")).unwrap();
            let b = g.backend();
            let els = enumerate_elements(&g, &s, 1000).unwrap();
            let mut rep: HashMap<CycleType, GroupElement> = HashMap::new();
            for e in &els {
                rep.entry(cycle_type(b, e).unwrap()).or_insert_with(|| e.clone());
            }
            for (c, r) in &rep {
                if !c.is_even() {
                    continue;
                }
                let odd_centralizer = els.iter().any(|x| {
                    !cycle_type(b, x).unwrap().is_even() && b.mul(x, r) == b.mul(r, x)
                });
                assert_eq!(sn_class_size(c).splits_in_an, !odd_centralizer, "{c} in S{n}");
            }
        }
    }

    #[test]
    fn class_sizes_sum_to_factorials() {
        for n in 1..=8usize {
            let all: u128 = cycle_types(n).iter().map(|c| sn_class_size(c).size).sum();
            assert_eq!(all, factorial(n));
            let even: u128 = cycle_types(n).iter().filter(|c| c.is_even()).map(|c| sn_class_size(c).size).sum();
            if n >= 2 {
                assert_eq!(even, factorial(n) / 2);
            }
            let frac: f64 = cycle_types(n).iter().map(|c| sn_class_size(c).fraction).sum();
            assert!((frac - 1.0).abs() < 1e-12);
        }
        assert_eq!(cycle_types(15).len(), 176);
    }
}
