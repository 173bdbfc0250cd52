use std::collections::HashSet;

use super::{enumerate_elements, Backend, BlackBoxGroup, GeneratingSet, GroupElement};
use crate::cube::random_subproduct;
use crate::error::{contract, Error, Result};
use crate::random::RandomSource;

/// Largest group the reduction verifies by full enumeration.
pub const ENUMERATION_VERIFY_LIMIT: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReductionStatus {
    /// Enumeration confirmed `⟨S'⟩ = ⟨S⟩`.
    Verified,
    /// Only orbit partitions were compared (permutation groups beyond the
    /// enumeration limit).
    Unverified,
    /// The budget ran out; the original set was returned.
    Unchanged,
}

#[derive(Debug, Clone)]
pub struct ReducedGenerators {
    pub generators: GeneratingSet,
    pub status: ReductionStatus,
}

/// Replaces `S` by a short list of random subproducts of `S` generating the
/// same group.
///
/// With an enumeration verifier, a draw is kept only when it enlarges the
/// subgroup generated so far, so at most `log2 |G|` elements survive. Each
/// draw leaves a proper subgroup with probability at least 1/2, and the
/// draw budget is `ceil(4·l_bound·max(1, ln(1/(1−p_succ)))) + 4`.
pub fn reduce_generators(
    group: &BlackBoxGroup,
    gens: &GeneratingSet,
    l_bound: u64,
    p_succ: f64,
    src: &mut RandomSource,
) -> Result<ReducedGenerators> {
    if !(0.0..1.0).contains(&p_succ) {
        return Err(contract("p_succ must lie in [0, 1)"));
    }
    let budget = (4.0 * l_bound.max(1) as f64 * (1.0 / (1.0 - p_succ)).ln().max(1.0)).ceil() as usize + 4;
    match enumerate_elements(group, gens, ENUMERATION_VERIFY_LIMIT) {
        Ok(full) => Ok(reduce_by_enumeration(group, gens, full.len(), budget, src)),
        Err(Error::TooLarge { .. }) => match group.backend() {
            Backend::Permutation { degree } => Ok(reduce_by_orbits(group, gens, degree, budget, src)),
            Backend::Matrix { .. } => Err(Error::Unverifiable(format!(
                "matrix group exceeds {ENUMERATION_VERIFY_LIMIT} elements and has no orbit test"
            ))),
        },
        Err(e) => Err(e),
    }
}

fn closure(group: &BlackBoxGroup, els: &[GroupElement]) -> HashSet<GroupElement> {
    let set = GeneratingSet::new(els.to_vec()).expect("nonempty");
    enumerate_elements(group, &set, ENUMERATION_VERIFY_LIMIT).expect("subgroup of an enumerable group").into_iter().collect()
}

fn reduce_by_enumeration(
    group: &BlackBoxGroup,
    gens: &GeneratingSet,
    order: usize,
    budget: usize,
    src: &mut RandomSource,
) -> ReducedGenerators {
    let mut kept: Vec<GroupElement> = Vec::new();
    let mut sub: HashSet<GroupElement> = HashSet::from([group.identity()]);
    for _ in 0..budget {
        if sub.len() == order {
            break;
        }
        let r = random_subproduct(group, gens, src);
        if sub.contains(&r) {
            continue;
        }
        kept.push(r);
        sub = closure(group, &kept);
    }
    if sub.len() == order && !kept.is_empty() {
        ReducedGenerators { generators: GeneratingSet::new(kept).unwrap(), status: ReductionStatus::Verified }
    } else if order == 1 {
        ReducedGenerators { generators: gens.clone(), status: ReductionStatus::Verified }
    } else {
        ReducedGenerators { generators: gens.clone(), status: ReductionStatus::Unchanged }
    }
}

fn orbits(degree: usize, els: &[GroupElement]) -> Vec<usize> {
    // Union-find over points; returns the smallest point of each orbit.
    let mut parent: Vec<usize> = (0..degree).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut y = x;
        while p[y] != r {
            let next = p[y];
            p[y] = r;
            y = next;
        }
        r
    }
    for g in els {
        for (x, &y) in g.payload().iter().enumerate() {
            let (a, b) = (find(&mut parent, x), find(&mut parent, y as usize));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    (0..degree).map(|x| find(&mut parent, x)).collect()
}

fn reduce_by_orbits(
    group: &BlackBoxGroup,
    gens: &GeneratingSet,
    degree: usize,
    budget: usize,
    src: &mut RandomSource,
) -> ReducedGenerators {
    let target = orbits(degree, gens.elements());
    let mut kept = Vec::new();
    for _ in 0..budget {
        let r = random_subproduct(group, gens, src);
        if group.is_identity(&r) {
            continue;
        }
        kept.push(r);
        if kept.len() >= 2 && orbits(degree, &kept) == target {
            return ReducedGenerators {
                generators: GeneratingSet::new(kept).unwrap(),
                status: ReductionStatus::Unverified,
            };
        }
    }
    ReducedGenerators { generators: gens.clone(), status: ReductionStatus::Unchanged }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{builtin::builtin, parse_cycles};

    fn set(n: usize, cs: &[&str]) -> GeneratingSet {
        GeneratingSet::new(cs.iter().map(|c| parse_cycles(c, n).unwrap()).collect()).unwrap()
    }

    fn same_group(g: &BlackBoxGroup, a: &GeneratingSet, b: &GeneratingSet) -> bool {
        let x: HashSet<_> = enumerate_elements(g, a, 10_000).unwrap().into_iter().collect();
        let y: HashSet<_> = enumerate_elements(g, b, 10_000).unwrap().into_iter().collect();
        x == y
    }

    #[test]
    fn redundant_s3_generators_shrink() {
        let g = BlackBoxGroup::permutation(3);
        let s = set(3, &["(1 2)", "(1 2 3)", "(1 2)", "(1 2 3)", "(1 2)", "(1 2 3)", "(1 2)", "(1 2 3)", "(1 2)", "(1 2 3)", "(1 2)", "(1 2 3)"]);
        for seed in 0..10 {
            let r = reduce_generators(&g, &s, 3, 0.9, &mut RandomSource::new(seed, "reduce")).unwrap();
            assert_eq!(r.status, ReductionStatus::Verified);
            assert!(r.generators.len() <= 4);
            assert!(same_group(&g, &s, &r.generators));
        }
    }

    #[test]
    fn cyclic_stays_cyclic() {
        let g = BlackBoxGroup::permutation(5);
        let s = set(5, &["(1 2 3 4 5)"]);
        let r = reduce_generators(&g, &s, 3, 0.9, &mut RandomSource::new(1, "reduce")).unwrap();
        assert_eq!(r.generators.len(), 1);
        assert!(same_group(&g, &s, &r.generators));
    }

    #[test]
    fn minimal_s4_set() {
        let (g, s) = builtin("S4").unwrap();
        for seed in 0..10 {
            let r = reduce_generators(&g, &s, 5, 0.9, &mut RandomSource::new(seed, "reduce")).unwrap();
            assert!(r.generators.len() <= 4);
            assert!(same_group(&g, &s, &r.generators));
        }
    }

    #[test]
    fn large_matrix_groups_are_unverifiable() {
        let g = BlackBoxGroup::matrix(4, 7);
        let s = GeneratingSet::new(vec![
            GroupElement::from_payload(vec![1, 1, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1]),
            GroupElement::from_payload(vec![0, 0, 0, 1, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0]),
        ])
        .unwrap();
        let err = reduce_generators(&g, &s, 20, 0.9, &mut RandomSource::new(1, "reduce")).unwrap_err();
        assert!(matches!(err, Error::Unverifiable(_)));
    }

    #[test]
    fn large_permutation_groups_fall_back_to_orbits() {
        let (g, s) = builtin("S9").unwrap();
        let r = reduce_generators(&g, &s, 20, 0.9, &mut RandomSource::new(2, "reduce")).unwrap();
        assert_ne!(r.status, ReductionStatus::Verified);
    }
}
