//! Exact laws of cubes, boosters and amplifiers.

use std::sync::Arc;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;

use super::{convolve, invert_dist, same_group, DistributionVector, EnumeratedGroup};
use crate::cube::{FibonacciCube, Side};
use crate::error::{contract, Result};
use crate::group::{BlackBoxGroup, GroupElement};
use crate::random::RandomSource;
use crate::uniformizer::{BoostedSampler, Sampler};

/// One step of a pipeline trace, applied to the running law `X`.
#[derive(Debug, Clone)]
pub enum TraceStep {
    /// `X ← X·h^E` (right) or `h^E·X` (left) with a fair bit `E`.
    Factor { element: GroupElement, side: Side },
    /// `X ← X⁻¹`.
    Invert,
    /// `X ← X·Y` (right) or `Y·X` (left) for an independent `Y`.
    Convolve { law: DistributionVector, side: Side },
}

fn half_step(eg: &EnumeratedGroup, d: &DistributionVector, h: usize, side: Side) -> DistributionVector {
    let shifted = d.translate(&eg.translation(h, side));
    DistributionVector::from_raw(d.probs().iter().zip(shifted.probs()).map(|(a, b)| 0.5 * (a + b)).collect())
}

/// Runs a trace from the identity point mass.
pub fn dist_of_pipeline(eg: &EnumeratedGroup, steps: &[TraceStep]) -> Result<DistributionVector> {
    let mut d = DistributionVector::point_mass(eg.order(), eg.identity());
    for step in steps {
        d = match step {
            TraceStep::Factor { element, side } => half_step(eg, &d, eg.index_of(element)?, *side),
            TraceStep::Invert => invert_dist(eg, &d)?,
            TraceStep::Convolve { law, side: Side::Right } => convolve(eg, &d, law)?,
            TraceStep::Convolve { law, side: Side::Left } => convolve(eg, law, &d)?,
        };
    }
    Ok(d)
}

/// Law of `h_1^{E_1}⋯h_t^{E_t}` built by successive placements.
pub fn factor_law<'a>(
    eg: &EnumeratedGroup,
    factors: impl IntoIterator<Item = (&'a GroupElement, Side)>,
) -> Result<DistributionVector> {
    let mut d = DistributionVector::point_mass(eg.order(), eg.identity());
    for (h, side) in factors {
        d = half_step(eg, &d, eg.index_of(h)?, side);
    }
    Ok(d)
}

/// Law of `R_t` from the stored factor order.
pub fn cube_law(eg: &EnumeratedGroup, cube: &FibonacciCube) -> Result<DistributionVector> {
    factor_law(eg, cube.factors().map(|f| (f.element(), Side::Right)))
}

/// Law of `R_t` by replaying the build trace, each factor placed on the
/// side it was inserted at.
pub fn cube_law_chronological(eg: &EnumeratedGroup, cube: &FibonacciCube) -> Result<DistributionVector> {
    factor_law(eg, cube.trace().into_iter().map(|f| (f.element(), f.side())))
}

/// Laws of `R` after each insertion, starting from the identity point mass.
pub fn cube_trajectory(eg: &EnumeratedGroup, cube: &FibonacciCube) -> Result<Vec<DistributionVector>> {
    let mut d = DistributionVector::point_mass(eg.order(), eg.identity());
    let mut out = vec![d.clone()];
    for f in cube.trace() {
        d = half_step(eg, &d, eg.index_of(f.element())?, f.side());
        out.push(d.clone());
    }
    Ok(out)
}

/// Law of `R_t⁻¹ R̄_t`.
pub fn pair_law(eg: &EnumeratedGroup, cube: &FibonacciCube) -> Result<DistributionVector> {
    let idx: Vec<usize> = cube.factors().map(|f| eg.index_of(f.element())).collect::<Result<_>>()?;
    let mut d = DistributionVector::point_mass(eg.order(), eg.identity());
    for &h in idx.iter().rev() {
        d = half_step(eg, &d, eg.inv(h), Side::Right);
    }
    for &h in &idx {
        d = half_step(eg, &d, h, Side::Right);
    }
    Ok(d)
}

/// Laws `P_0..P_t` of the booster's cube `q_1^{E_1}⋯q_i^{E_i}`.
pub fn booster_trajectory<W>(eg: &EnumeratedGroup, booster: &BoostedSampler<W>) -> Result<Vec<DistributionVector>>
where
    W: Sampler,
{
    let mut d = DistributionVector::point_mass(eg.order(), eg.identity());
    let mut out = vec![d.clone()];
    for q in booster.factors() {
        d = half_step(eg, &d, eg.index_of(q)?, Side::Right);
        out.push(d.clone());
    }
    Ok(out)
}

/// `T = Σ (Pr(P=h) − 7/(4|G|))²` over the `h` at or above the threshold.
pub fn booster_potential(d: &DistributionVector) -> f64 {
    let c = 7.0 / (4.0 * d.len() as f64);
    d.probs().iter().filter(|&&p| p >= c).map(|p| (p - c) * (p - c)).sum()
}

/// Law of `k` independent draws from `base` multiplied together.
pub fn amplified_law(eg: &EnumeratedGroup, base: &DistributionVector, k: usize) -> Result<DistributionVector> {
    same_group(eg, base)?;
    if k == 0 {
        return Err(contract("amplifier count k must be at least 1"));
    }
    let mut d = base.clone();
    for _ in 1..k {
        d = convolve(eg, &d, base)?;
    }
    Ok(d)
}

/// Draws from an explicit pmf over an enumerated group.
#[derive(Debug, Clone)]
pub struct PmfSampler {
    group: BlackBoxGroup,
    eg: Arc<EnumeratedGroup>,
    law: DistributionVector,
    index: WeightedIndex<f64>,
}

impl PmfSampler {
    pub fn new(group: BlackBoxGroup, eg: Arc<EnumeratedGroup>, law: DistributionVector) -> Result<Self> {
        same_group(&eg, &law)?;
        let index = WeightedIndex::new(law.probs()).map_err(|e| contract(format!("bad pmf: {e}")))?;
        Ok(PmfSampler { group, eg, law, index })
    }

    pub fn law(&self) -> &DistributionVector {
        &self.law
    }
}

impl Sampler for PmfSampler {
    fn group(&self) -> &BlackBoxGroup {
        &self.group
    }

    fn sample(&self, src: &mut RandomSource) -> GroupElement {
        self.eg.element(self.index.sample(src)).clone()
    }
}
