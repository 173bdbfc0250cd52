//! Exact distributions on enumerated small groups.
//!
//! [`EnumeratedGroup`] fixes an indexing of every element (enumeration
//! order, identity first) and [`DistributionVector`] is a pmf over those
//! indices. All arithmetic here goes through the uncounted backend, so the
//! oracle never disturbs operation counts.

mod fuzzy;
mod laws;
mod peak;
pub mod verify;

use std::collections::HashMap;
use std::sync::OnceLock;

use serde::Serialize;

use crate::error::{contract, Error, Result};
use crate::group::{enumerate_elements, Backend, BlackBoxGroup, GeneratingSet, GroupElement};

pub use fuzzy::{
    escape_analyze, escape_candidate, fuzzy_subgroup_check, measure_escape, EscapeBranch, EscapeReport, FuzzyReport,
};
pub use laws::{
    amplified_law, booster_potential, booster_trajectory, cube_law, cube_law_chronological, cube_trajectory,
    dist_of_pipeline, factor_law, pair_law, PmfSampler, TraceStep,
};
pub use peak::{peak_set, PeakClass, PeakSet};

/// Default enumeration cap.
pub const DEFAULT_CAP: usize = 10_000;
/// Largest cap accepted on request.
pub const SOFT_CAP: usize = 100_000;
/// Tolerance for asserted inequalities.
pub const INEQ_TOL: f64 = 1e-9;
/// Tolerance for asserted identities.
pub const IDENTITY_TOL: f64 = 1e-12;

// Groups up to this order get a cached multiplication table.
const TABLE_LIMIT: usize = 6_000;

/// A fully enumerated group with index arithmetic.
#[derive(Debug)]
pub struct EnumeratedGroup {
    backend: Backend,
    elements: Vec<GroupElement>,
    index: HashMap<GroupElement, usize>,
    inverses: Vec<usize>,
    table: OnceLock<Vec<u32>>,
}

impl EnumeratedGroup {
    pub fn new(group: &BlackBoxGroup, gens: &GeneratingSet, cap: usize) -> Result<Self> {
        if cap > SOFT_CAP {
            return Err(contract(format!("enumeration cap {cap} exceeds {SOFT_CAP}")));
        }
        let elements = enumerate_elements(group, gens, cap)?;
        Ok(Self::from_elements(group.backend(), elements))
    }

    fn from_elements(backend: Backend, elements: Vec<GroupElement>) -> Self {
        let index: HashMap<GroupElement, usize> = elements.iter().cloned().enumerate().map(|(i, g)| (g, i)).collect();
        let inverses = elements.iter().map(|g| index[&backend.inv(g)]).collect();
        EnumeratedGroup { backend, elements, index, inverses, table: OnceLock::new() }
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    pub fn elements(&self) -> &[GroupElement] {
        &self.elements
    }

    pub fn element(&self, i: usize) -> &GroupElement {
        &self.elements[i]
    }

    /// Index of the identity; always 0.
    pub fn identity(&self) -> usize {
        0
    }

    pub fn index_of(&self, g: &GroupElement) -> Result<usize> {
        self.index
            .get(g)
            .copied()
            .ok_or_else(|| Error::Structural(format!("element {g:?} is not in the enumerated group")))
    }

    pub fn inv(&self, i: usize) -> usize {
        self.inverses[i]
    }

    fn table(&self) -> Option<&[u32]> {
        let n = self.order();
        if n > TABLE_LIMIT {
            return None;
        }
        Some(self.table.get_or_init(|| {
            let mut t = Vec::with_capacity(n * n);
            let mut buf = Vec::new();
            for a in &self.elements {
                for b in &self.elements {
                    self.backend.mul_into(a, b, &mut buf);
                    t.push(self.index[buf.as_slice()] as u32);
                }
            }
            t
        }))
    }

    /// Index of `g_i · g_j`.
    pub fn mul(&self, i: usize, j: usize) -> usize {
        match self.table() {
            Some(t) => t[i * self.order() + j] as usize,
            None => self.mul_slow(i, j),
        }
    }

    fn mul_slow(&self, i: usize, j: usize) -> usize {
        let mut buf = Vec::new();
        self.backend.mul_into(&self.elements[i], &self.elements[j], &mut buf);
        self.index[buf.as_slice()]
    }

    /// `out[i]` is the index of `g_i · h` (right) or `h · g_i` (left).
    pub fn translation(&self, h: usize, side: crate::cube::Side) -> Vec<usize> {
        use crate::cube::Side;
        (0..self.order())
            .map(|i| match side {
                Side::Right => self.mul(i, h),
                Side::Left => self.mul(h, i),
            })
            .collect()
    }

    /// Membership bitmap for a list of indices.
    pub fn mask(&self, set: &[usize]) -> Vec<bool> {
        let mut m = vec![false; self.order()];
        for &i in set {
            m[i] = true;
        }
        m
    }
}

/// Exact pmf over the elements of an [`EnumeratedGroup`], by index.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistributionVector {
    probs: Vec<f64>,
}

/// Summary statistics of a pmf.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DistStats {
    pub l2: f64,
    pub max_prob: f64,
    pub min_prob: f64,
    pub support: usize,
    pub eps_uniform: f64,
    pub eps_semi: f64,
}

impl DistributionVector {
    /// Validates and clamps tiny negative entries.
    pub fn new(mut probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(contract("a distribution needs at least one element"));
        }
        for p in probs.iter_mut() {
            if !p.is_finite() || *p < -1e-15 {
                return Err(contract(format!("invalid probability {p}")));
            }
            if *p < 0.0 {
                *p = 0.0;
            }
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 * probs.len().max(1) as f64 {
            return Err(contract(format!("probabilities sum to {total}, not 1")));
        }
        Ok(DistributionVector { probs })
    }

    /// Normalizes nonnegative weights.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(contract("weights must be nonnegative with a positive sum"));
        }
        Self::new(weights.iter().map(|w| w / total).collect())
    }

    pub fn point_mass(order: usize, i: usize) -> Self {
        let mut probs = vec![0.0; order];
        probs[i] = 1.0;
        DistributionVector { probs }
    }

    pub fn uniform(order: usize) -> Self {
        DistributionVector { probs: vec![1.0 / order as f64; order] }
    }

    /// Uniform on a nonempty subset.
    pub fn uniform_on(order: usize, set: &[usize]) -> Result<Self> {
        if set.is_empty() {
            return Err(contract("uniform_on needs a nonempty set"));
        }
        let mut probs = vec![0.0; order];
        for &i in set {
            probs[i] = 1.0 / set.len() as f64;
        }
        Ok(DistributionVector { probs })
    }

    pub(crate) fn from_raw(probs: Vec<f64>) -> Self {
        DistributionVector { probs }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn prob(&self, i: usize) -> f64 {
        self.probs[i]
    }

    pub fn l2(&self) -> f64 {
        self.probs.iter().map(|p| p * p).sum::<f64>().sqrt()
    }

    pub fn stats(&self) -> DistStats {
        let n = self.probs.len() as f64;
        let max_prob = self.probs.iter().cloned().fold(0.0, f64::max);
        let min_prob = self.probs.iter().cloned().fold(f64::INFINITY, f64::min);
        DistStats {
            l2: self.l2(),
            max_prob,
            min_prob,
            support: self.probs.iter().filter(|&&p| p > 0.0).count(),
            eps_uniform: n * self.probs.iter().map(|p| (p - 1.0 / n).abs()).fold(0.0, f64::max),
            eps_semi: n * (1.0 / n - min_prob).max(0.0),
        }
    }

    /// Pmf of `X·h` or `h·X` for the translation table of `h`.
    pub fn translate(&self, table: &[usize]) -> Self {
        let mut out = vec![0.0; self.probs.len()];
        for (i, &p) in self.probs.iter().enumerate() {
            out[table[i]] += p;
        }
        DistributionVector { probs: out }
    }
}

fn same_group(eg: &EnumeratedGroup, d: &DistributionVector) -> Result<()> {
    if d.len() == eg.order() {
        Ok(())
    } else {
        Err(Error::Structural(format!(
            "distribution over {} elements used with a group of order {}",
            d.len(),
            eg.order()
        )))
    }
}

/// Law of `X⁻¹`.
pub fn invert_dist(eg: &EnumeratedGroup, d: &DistributionVector) -> Result<DistributionVector> {
    same_group(eg, d)?;
    let mut out = vec![0.0; d.len()];
    for (i, &p) in d.probs.iter().enumerate() {
        out[eg.inv(i)] += p;
    }
    Ok(DistributionVector { probs: out })
}

/// Law of `XY` for independent `X` and `Y`.
pub fn convolve(eg: &EnumeratedGroup, x: &DistributionVector, y: &DistributionVector) -> Result<DistributionVector> {
    same_group(eg, x)?;
    same_group(eg, y)?;
    let mut out = vec![0.0; x.len()];
    for (i, &px) in x.probs.iter().enumerate() {
        if px == 0.0 {
            continue;
        }
        for (j, &py) in y.probs.iter().enumerate() {
            if py != 0.0 {
                out[eg.mul(i, j)] += px * py;
            }
        }
    }
    Ok(DistributionVector { probs: out })
}

/// Summary statistics of a pmf.
pub fn dist_stats(d: &DistributionVector) -> DistStats {
    d.stats()
}

/// Splits `Z` as the mixture `pI·X + (1−pI)·Y` and returns `Y`.
pub fn decompose(z: &DistributionVector, x: &DistributionVector, p_i: f64) -> Result<DistributionVector> {
    if z.len() != x.len() {
        return Err(Error::Structural("decompose needs pmfs over the same group".into()));
    }
    if !(0.0..1.0).contains(&p_i) {
        return Err(contract(format!("pI must lie in [0, 1), got {p_i}")));
    }
    let mut y = Vec::with_capacity(z.len());
    for (g, (&pz, &px)) in z.probs.iter().zip(&x.probs).enumerate() {
        let rest = pz - p_i * px;
        if rest < -IDENTITY_TOL {
            return Err(contract(format!(
                "domination fails at element index {g}: pI·Pr(X) = {} > Pr(Z) = {pz}",
                p_i * px
            )));
        }
        y.push(rest.max(0.0) / (1.0 - p_i));
    }
    Ok(DistributionVector { probs: y })
}

/// Both sides of the expected-norm identity
/// `E_{g∼W} ‖X g^E‖² = (p0² + p1²)‖X‖² + 2 p0 p1 Σ_h Pr(X=h) Pr(XW=h)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormIdentity {
    pub lhs: f64,
    pub rhs: f64,
}

pub fn expected_norm_identity_check(
    eg: &EnumeratedGroup,
    x: &DistributionVector,
    w: &DistributionVector,
    p_e0: f64,
) -> Result<NormIdentity> {
    if !(0.0..=1.0).contains(&p_e0) {
        return Err(contract("Pr(E=0) must lie in [0, 1]"));
    }
    same_group(eg, x)?;
    same_group(eg, w)?;
    let (p0, p1) = (p_e0, 1.0 - p_e0);
    let mut lhs = 0.0;
    for (g, &pw) in w.probs.iter().enumerate() {
        if pw == 0.0 {
            continue;
        }
        // Law of X g^E.
        let shifted = x.translate(&eg.translation(g, crate::cube::Side::Right));
        let norm2: f64 = x.probs.iter().zip(&shifted.probs).map(|(a, b)| (p0 * a + p1 * b).powi(2)).sum();
        lhs += pw * norm2;
    }
    let xw = convolve(eg, x, w)?;
    let x2: f64 = x.probs.iter().map(|p| p * p).sum();
    let cross: f64 = x.probs.iter().zip(&xw.probs).map(|(a, b)| a * b).sum();
    let rhs = (p0 * p0 + p1 * p1) * x2 + 2.0 * p0 * p1 * cross;
    Ok(NormIdentity { lhs, rhs })
}
