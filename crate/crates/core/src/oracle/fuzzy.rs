//! Fuzzy subgroups and the escape dichotomy.

use serde::Serialize;

use super::{EnumeratedGroup, INEQ_TOL};
use crate::cube::random_subproduct;
use crate::error::{contract, Result};
use crate::group::{BlackBoxGroup, GeneratingSet, GroupElement};
use crate::random::RandomSource;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FuzzyReport {
    /// `max_{g∈A} |Ag∖A| / |A|`.
    pub delta_star: f64,
    pub closure_is_subgroup: bool,
    /// `|AA∖A| / |A|`.
    pub growth: f64,
    pub closure_size: usize,
    /// Whether `δ* < 1/4`, so that `AA` must be a subgroup with
    /// `|AA∖A| ≤ δ*/(1−2δ*)·|A|`.
    pub lemma_applies: bool,
    /// Both conclusions hold, when the lemma applies.
    pub bound_holds: Option<bool>,
}

fn symmetric_mask(eg: &EnumeratedGroup, set: &[usize]) -> Result<Vec<bool>> {
    if set.is_empty() {
        return Err(contract("the set A must be nonempty"));
    }
    let mask = eg.mask(set);
    if let Some(&g) = set.iter().find(|&&g| !mask[eg.inv(g)]) {
        return Err(contract(format!("A is not closed under inverses (element index {g})")));
    }
    Ok(mask)
}

fn members(mask: &[bool]) -> Vec<usize> {
    (0..mask.len()).filter(|&i| mask[i]).collect()
}

fn product_set(eg: &EnumeratedGroup, a: &[usize], b: &[usize]) -> Vec<bool> {
    let mut out = vec![false; eg.order()];
    for &x in a {
        for &y in b {
            out[eg.mul(x, y)] = true;
        }
    }
    out
}

fn is_subgroup(eg: &EnumeratedGroup, mask: &[bool]) -> bool {
    let set = members(mask);
    !set.is_empty()
        && set.iter().all(|&x| mask[eg.inv(x)])
        && set.iter().all(|&x| set.iter().all(|&y| mask[eg.mul(x, y)]))
}

// |Ag∖A| (right) or |gA∖A| (left).
fn moved(eg: &EnumeratedGroup, mask: &[bool], set: &[usize], g: usize, right: bool) -> usize {
    set.iter().filter(|&&a| !mask[if right { eg.mul(a, g) } else { eg.mul(g, a) }]).count()
}

/// Measures how far a symmetric set is from being closed and checks the
/// fuzzy-subgroup conclusions when `δ* < 1/4`.
pub fn fuzzy_subgroup_check(eg: &EnumeratedGroup, set: &[usize]) -> Result<FuzzyReport> {
    let mask = symmetric_mask(eg, set)?;
    let a = members(&mask);
    let size = a.len() as f64;
    let worst = a.iter().map(|&g| moved(eg, &mask, &a, g, true)).max().unwrap_or(0);
    let delta_star = worst as f64 / size;
    let aa = product_set(eg, &a, &a);
    let closure_size = aa.iter().filter(|&&x| x).count();
    let growth = aa.iter().zip(&mask).filter(|(&p, &m)| p && !m).count() as f64 / size;
    let closure_is_subgroup = is_subgroup(eg, &aa);
    let lemma_applies = delta_star < 0.25;
    let bound_holds = lemma_applies
        .then(|| closure_is_subgroup && growth <= delta_star / (1.0 - 2.0 * delta_star) + INEQ_TOL);
    Ok(FuzzyReport { delta_star, closure_is_subgroup, growth, closure_size, lemma_applies, bound_holds })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "branch", rename_all = "kebab-case")]
pub enum EscapeBranch {
    /// `Pr(uv ∉ A) ≥ ε`.
    Escapes,
    /// `Pr(uv ∉ A) < ε`, with the trimmed set `A′` and its checks.
    FuzzySubgroup {
        a_prime: Vec<usize>,
        removed: usize,
        /// `|A∖A′| < 2|A|/k`.
        removal_ok: bool,
        subgroup: bool,
        growth: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EscapeReport {
    pub escape_prob: f64,
    pub k: usize,
    pub eps: f64,
    /// `(2 + k²ε)/(k − 2)`.
    pub delta: f64,
    pub branch: EscapeBranch,
    pub dichotomy_holds: bool,
}

/// Counts pairs `(u, v) ∈ A×A` with `uv ∉ A`. Below `ε`, trims `A` to
/// `A′ = {g ∈ A : |Ag∖A| ≤ kε|A| and |gA∖A| ≤ kε|A|}` and checks that
/// little was removed and `A′A′` is a subgroup.
pub fn escape_analyze(eg: &EnumeratedGroup, set: &[usize], k: usize, eps: f64) -> Result<EscapeReport> {
    if k <= 2 || !(eps > 0.0) {
        return Err(contract("escape analysis needs k > 2 and ε > 0"));
    }
    let delta = (2.0 + (k * k) as f64 * eps) / (k as f64 - 2.0);
    if delta > 0.25 + 1e-12 {
        return Err(contract(format!("(2 + k²ε)/(k − 2) = {delta} exceeds 1/4")));
    }
    let mask = symmetric_mask(eg, set)?;
    let a = members(&mask);
    let size = a.len();
    let mut outside = 0usize;
    for &u in &a {
        for &v in &a {
            if !mask[eg.mul(u, v)] {
                outside += 1;
            }
        }
    }
    let escape_prob = outside as f64 / (size * size) as f64;
    let (branch, dichotomy_holds) = if escape_prob >= eps {
        (EscapeBranch::Escapes, true)
    } else {
        let limit = k as f64 * eps * size as f64;
        let a_prime: Vec<usize> = a
            .iter()
            .copied()
            .filter(|&g| {
                moved(eg, &mask, &a, g, true) as f64 <= limit && moved(eg, &mask, &a, g, false) as f64 <= limit
            })
            .collect();
        let removed = size - a_prime.len();
        let removal_ok = (removed as f64) < 2.0 * size as f64 / k as f64;
        let (subgroup, growth) = if a_prime.is_empty() {
            (false, f64::INFINITY)
        } else {
            let pm = eg.mask(&a_prime);
            let pp = product_set(eg, &a_prime, &a_prime);
            let grown = pp.iter().zip(&pm).filter(|(&p, &m)| p && !m).count();
            (is_subgroup(eg, &pp), grown as f64 / a_prime.len() as f64)
        };
        let ok = removal_ok && subgroup;
        (EscapeBranch::FuzzySubgroup { a_prime, removed, removal_ok, subgroup, growth }, ok)
    };
    Ok(EscapeReport { escape_prob, k, eps, delta, branch, dichotomy_holds })
}

/// `u·v` with probability `p/(p+ε)`, else `u·r` for a random subproduct
/// `r`, where `p = 1/2 − 1/k` and `u, v` are uniform on `A`.
pub fn escape_candidate(
    group: &BlackBoxGroup,
    a: &[GroupElement],
    gens: &GeneratingSet,
    eps: f64,
    k: usize,
    src: &mut RandomSource,
) -> Result<GroupElement> {
    if a.is_empty() || k <= 2 || !(eps > 0.0) {
        return Err(contract("escape_candidate needs a nonempty A, k > 2 and ε > 0"));
    }
    let p = 0.5 - 1.0 / k as f64;
    let u = &a[src.below(a.len())];
    let other = if src.unit() < p / (p + eps) {
        a[src.below(a.len())].clone()
    } else {
        random_subproduct(group, gens, src)
    };
    group.multiply(u, &other)
}

/// Fraction of `draws` escape candidates landing outside `A`.
#[allow(clippy::too_many_arguments)]
pub fn measure_escape(
    eg: &EnumeratedGroup,
    group: &BlackBoxGroup,
    set: &[usize],
    gens: &GeneratingSet,
    eps: f64,
    k: usize,
    draws: usize,
    src: &mut RandomSource,
) -> Result<f64> {
    let mask = symmetric_mask(eg, set)?;
    let a: Vec<GroupElement> = members(&mask).into_iter().map(|i| eg.element(i).clone()).collect();
    let mut out = 0usize;
    for _ in 0..draws {
        let g = escape_candidate(group, &a, gens, eps, k, src)?;
        if !mask[eg.index_of(&g)?] {
            out += 1;
        }
    }
    Ok(out as f64 / draws.max(1) as f64)
}

#[cfg(test)]
mod tests {
    use super::super::tests::eg;
    use super::*;
    use crate::group::builtin::builtin;
    use crate::group::{enumerate_elements, parse_cycles};

    fn subgroup(e: &EnumeratedGroup, cycles: &[&str]) -> Vec<usize> {
        let (g, _) = builtin("S4").unwrap();
        let s = GeneratingSet::new(cycles.iter().map(|c| parse_cycles(c, 4).unwrap()).collect()).unwrap();
        let mut v: Vec<usize> =
            enumerate_elements(&g, &s, 100).unwrap().iter().map(|x| e.index_of(x).unwrap()).collect();
        v.sort();
        v
    }

    #[test]
    fn subgroups_are_exact() {
        let e = eg("S4");
        for h in [subgroup(&e, &["(1 2 3)", "(1 2)(3 4)"]), subgroup(&e, &["(1 2 3 4)"]), (0..24).collect()] {
            let r = fuzzy_subgroup_check(&e, &h).unwrap();
            assert_eq!(r.delta_star, 0.0);
            assert_eq!(r.growth, 0.0);
            assert!(r.closure_is_subgroup);
            assert_eq!(r.closure_size, h.len());
            assert_eq!(r.bound_holds, Some(true));
        }
    }

    #[test]
    fn asymmetric_sets_are_rejected() {
        let e = eg("S4");
        let three = e.index_of(&parse_cycles("(1 2 3)", 4).unwrap()).unwrap();
        assert!(fuzzy_subgroup_check(&e, &[0, three]).is_err());
        assert!(fuzzy_subgroup_check(&e, &[]).is_err());
    }

    #[test]
    fn escape_defaults_and_subgroups() {
        let e = eg("S4");
        let a4 = subgroup(&e, &["(1 2 3)", "(1 2)(3 4)"]);
        let r = escape_analyze(&e, &a4, 20, 1.0 / 160.0).unwrap();
        assert!((r.delta - 0.25).abs() < 1e-12);
        assert_eq!(r.escape_prob, 0.0);
        match &r.branch {
            EscapeBranch::FuzzySubgroup { a_prime, subgroup, .. } => {
                assert_eq!(a_prime, &a4);
                assert!(subgroup);
            }
            b => panic!("{b:?}"),
        }
        assert!(r.dichotomy_holds);
        assert!(escape_analyze(&e, &a4, 10, 1.0 / 160.0).is_err());
    }

    #[test]
    fn coset_representative_escapes() {
        let e = eg("S4");
        let mut a = subgroup(&e, &["(1 2)(3 4)", "(1 3)(2 4)"]);
        a.push(e.index_of(&parse_cycles("(1 2)", 4).unwrap()).unwrap());
        let r = escape_analyze(&e, &a, 20, 1.0 / 160.0).unwrap();
        // Brute force: H = V4, x = (1 2) an involution; uv ∉ A exactly for
        // pairs mixing x with a nontrivial element of H.
        let mask = e.mask(&a);
        let count = a.iter().flat_map(|&u| a.iter().map(move |&v| (u, v))).filter(|&(u, v)| !mask[e.mul(u, v)]).count();
        assert!((r.escape_prob - count as f64 / 25.0).abs() < 1e-15);
        assert!(r.escape_prob > 0.0);
        assert_eq!(r.branch, EscapeBranch::Escapes);
    }

    #[test]
    fn mixing_weight() {
        let p: f64 = 0.5 - 1.0 / 20.0;
        assert!((p - 0.45).abs() < 1e-15);
        let w = p / (p + 1.0 / 160.0);
        assert!((w - 0.45 / 0.45625).abs() < 1e-15);
    }

    #[test]
    fn whole_group_never_escapes() {
        let e = eg("S4");
        let (g, s) = builtin("S4").unwrap();
        let all: Vec<usize> = (0..24).collect();
        let f = measure_escape(&e, &g, &all, &s, 1.0 / 160.0, 20, 2000, &mut RandomSource::new(1, "esc")).unwrap();
        assert_eq!(f, 0.0);
    }
}
