//! The Fibonacci cube.
//!
//! A cube is a factor list `h_1..h_t`; the random variable it stands for is
//! `R_t = h_1^{E_1}⋯h_t^{E_t}` with independent fair bits `E_j`. Each new
//! factor is either drawn from the cube's own current distribution and
//! placed on the right (case 1) or on the left (case 2), or is a random
//! subproduct of the generators placed on the right (case 3). Left
//! placement is what makes the stored list a reordering of the insertion
//! sequence.
//!
//! The sampler hands out `R_t⁻¹ R̄_t`, for `R̄_t` an independent copy.

use std::collections::VecDeque;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{contract, Error, Result};
use crate::group::{Backend, BlackBoxGroup, GeneratingSet, GroupElement, OpCount, Phase};
use crate::random::RandomSource;

/// Which end of the product a factor was attached to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

/// How a factor came to be in the cube.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Origin {
    /// One of the generators the cube was seeded with.
    Seed,
    /// Drawn from the cube, appended on the right.
    CubeRight,
    /// Drawn from the cube, prepended on the left.
    CubeLeft,
    /// Random subproduct of the generators, appended on the right.
    Subproduct,
}

impl Origin {
    pub fn side(self) -> Side {
        match self {
            Origin::CubeLeft => Side::Left,
            _ => Side::Right,
        }
    }
}

/// A stored factor `h_j` with its insertion record.
#[derive(Debug)]
pub struct Factor {
    element: GroupElement,
    origin: Origin,
    step: usize,
    inverse: OnceLock<GroupElement>,
}

impl Factor {
    fn new(element: GroupElement, origin: Origin, step: usize) -> Self {
        Factor { element, origin, step, inverse: OnceLock::new() }
    }

    pub fn element(&self) -> &GroupElement {
        &self.element
    }

    pub fn origin(&self) -> Origin {
        self.origin
    }

    pub fn side(&self) -> Side {
        self.origin.side()
    }

    /// Insertion step, counting from 0.
    pub fn step(&self) -> usize {
        self.step
    }
}

impl Clone for Factor {
    fn clone(&self) -> Self {
        Factor { element: self.element.clone(), origin: self.origin, step: self.step, inverse: self.inverse.clone() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CubeParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// Target number of factors.
    pub t: usize,
    pub seed_with_generators: bool,
}

impl CubeParams {
    pub fn new(t: usize) -> Self {
        CubeParams { a: 1.0, b: 1.0, c: 1.0, t, seed_with_generators: true }
    }

    /// `max(20, 3·ceil(log2 |G|))` when the order is known, else
    /// `max(20, 3·L)` for encoding length `L`.
    pub fn default_terms(order: Option<u128>, encoding_bits: u64) -> usize {
        let bits = match order {
            Some(n) => ceil_log2_u128(n),
            None => encoding_bits,
        };
        (3 * bits as usize).max(20)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("a", self.a), ("b", self.b), ("c", self.c)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(contract(format!("case weight {name} must be positive, got {v}")));
            }
        }
        if self.t == 0 {
            return Err(contract("t must be at least 1"));
        }
        Ok(())
    }

    /// Case probabilities `1/(ad), 1/(bd), 1/(cd)` with `d = 1/a + 1/b + 1/c`.
    pub fn case_probabilities(&self) -> [f64; 3] {
        let d = 1.0 / self.a + 1.0 / self.b + 1.0 / self.c;
        [1.0 / (self.a * d), 1.0 / (self.b * d), 1.0 / (self.c * d)]
    }
}

pub(crate) fn ceil_log2_u128(n: u128) -> u64 {
    if n <= 1 {
        0
    } else {
        128 - (n - 1).leading_zeros() as u64
    }
}

/// Random subproduct `g_1^{ε_1}⋯g_k^{ε_k}` over the generators in stored
/// order. Uses at most `k − 1` multiplies; an empty selection is the
/// identity and costs nothing.
pub fn random_subproduct(group: &BlackBoxGroup, gens: &GeneratingSet, src: &mut RandomSource) -> GroupElement {
    let chosen: Vec<&GroupElement> = gens.elements().iter().filter(|_| src.fresh_bit()).collect();
    group.product(chosen)
}

#[derive(Debug, Clone)]
pub struct FibonacciCube {
    group: BlackBoxGroup,
    generators: GeneratingSet,
    params: CubeParams,
    factors: VecDeque<Factor>,
    steps: usize,
    build_ops: OpCount,
    fault: bool,
}

impl FibonacciCube {
    /// A fresh cube: the generator list (right-placed, in order) when
    /// seeding is on, otherwise empty, i.e. `R_1` is the identity.
    pub fn new(group: BlackBoxGroup, generators: GeneratingSet, params: CubeParams) -> Result<Self> {
        params.validate()?;
        let mut factors = VecDeque::new();
        if params.seed_with_generators {
            for (i, g) in generators.elements().iter().enumerate() {
                factors.push_back(Factor::new(g.clone(), Origin::Seed, i));
            }
        }
        let steps = factors.len();
        Ok(FibonacciCube { group, generators, params, factors, steps, build_ops: OpCount::default(), fault: false })
    }

    pub fn group(&self) -> &BlackBoxGroup {
        &self.group
    }

    pub fn generators(&self) -> &GeneratingSet {
        &self.generators
    }

    pub fn params(&self) -> &CubeParams {
        &self.params
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    /// Factors in product order `h_1..h_t`.
    pub fn factors(&self) -> impl ExactSizeIterator<Item = &Factor> + '_ {
        self.factors.iter()
    }

    /// Factors in insertion order, i.e. the build trace.
    pub fn trace(&self) -> Vec<&Factor> {
        let mut v: Vec<&Factor> = self.factors.iter().collect();
        v.sort_by_key(|f| f.step);
        v
    }

    /// Group operations spent constructing factors.
    pub fn build_ops(&self) -> OpCount {
        self.build_ops
    }

    /// Adds one factor, choosing the case with probabilities
    /// `1/(ad), 1/(bd), 1/(cd)`. Returns the origin of the new factor.
    pub fn extend(&mut self, src: &mut RandomSource) -> Result<Origin> {
        let prev = self.group.counter().set_phase(Phase::Precompute);
        let before = self.group.counter().snapshot();
        let case = src.choose_weighted(&self.params.case_probabilities())?;
        let (element, origin) = match case {
            0 => (self.draw_r(src), Origin::CubeRight),
            1 => (self.draw_r(src), Origin::CubeLeft),
            _ => (random_subproduct(&self.group, &self.generators, src), Origin::Subproduct),
        };
        let factor = Factor::new(element, origin, self.steps);
        match origin.side() {
            Side::Left => self.factors.push_front(factor),
            Side::Right => self.factors.push_back(factor),
        }
        self.steps += 1;
        self.build_ops = self.build_ops + self.group.counter().snapshot().since(&before);
        self.group.counter().set_phase(prev);
        Ok(origin)
    }

    /// Extends until the cube holds `t` factors.
    pub fn build(&mut self, src: &mut RandomSource) -> Result<()> {
        if self.params.t < self.len() {
            return Err(contract(format!(
                "t = {} is smaller than the current cube length {}",
                self.params.t,
                self.len()
            )));
        }
        while self.len() < self.params.t {
            self.extend(src)?;
        }
        Ok(())
    }

    /// Draws `R_t = h_1^{E_1}⋯h_t^{E_t}` with fresh bits.
    pub fn sample_r(&self, src: &mut RandomSource) -> GroupElement {
        let prev = self.enter_sample_phase();
        let out = self.draw_r(src);
        self.group.counter().set_phase(prev);
        out
    }

    /// `R_t` for the given exponent bits (one per factor, product order).
    pub fn sample_r_with_bits(&self, bits: &[bool]) -> GroupElement {
        let prev = self.enter_sample_phase();
        let out = self.r_with_bits(bits);
        self.group.counter().set_phase(prev);
        out
    }

    // Charged to whatever phase is current.
    fn draw_r(&self, src: &mut RandomSource) -> GroupElement {
        let bits: Vec<bool> = (0..self.len()).map(|_| src.fresh_bit()).collect();
        self.r_with_bits(&bits)
    }

    fn r_with_bits(&self, bits: &[bool]) -> GroupElement {
        assert_eq!(bits.len(), self.len(), "one bit per factor");
        let mut bits = bits.to_vec();
        if self.fault {
            if let Some(b) = bits.first_mut() {
                *b = !*b;
            }
        }
        self.group.product(self.factors.iter().zip(&bits).filter(|(_, &e)| e).map(|(f, _)| &f.element))
    }

    /// Draws `R_t⁻¹ R̄_t` as
    /// `(h_t⁻¹)^{Ē_t}⋯(h_1⁻¹)^{Ē_1} h_1^{E_1}⋯h_t^{E_t}`.
    pub fn sample_pair(&self, src: &mut RandomSource) -> GroupElement {
        let inv_bits: Vec<bool> = (0..self.len()).map(|_| src.fresh_bit()).collect();
        let bits: Vec<bool> = (0..self.len()).map(|_| src.fresh_bit()).collect();
        self.sample_pair_with_bits(&inv_bits, &bits)
    }

    /// `R_t⁻¹ R̄_t` for explicit bits: `inv_bits[j]` selects `h_j⁻¹` in the
    /// left half, `bits[j]` selects `h_j` in the right half. Inverses are
    /// computed on first use and cached on the cube.
    pub fn sample_pair_with_bits(&self, inv_bits: &[bool], bits: &[bool]) -> GroupElement {
        assert_eq!(inv_bits.len(), self.len(), "one bit per factor");
        assert_eq!(bits.len(), self.len(), "one bit per factor");
        let prev = self.enter_sample_phase();
        let left = self
            .factors
            .iter()
            .zip(inv_bits)
            .rev()
            .filter(|(_, &e)| e)
            .map(|(f, _)| f.inverse.get_or_init(|| self.group.inv(&f.element)));
        let right = self.factors.iter().zip(bits).filter(|(_, &e)| e).map(|(f, _)| &f.element);
        let left: Vec<&GroupElement> = left.collect();
        let out = self.group.product(left.into_iter().chain(right));
        self.group.counter().set_phase(prev);
        out
    }

    fn enter_sample_phase(&self) -> Phase {
        self.group.counter().set_phase(Phase::Sample)
    }

    /// Test hook: every later `sample_r` flips its first exponent bit.
    #[doc(hidden)]
    pub fn inject_fault(&mut self) {
        self.fault = true;
    }

    /// Serializable snapshot of the cube together with the stage
    /// descriptor it was built under.
    pub fn to_file(&self, pipeline: PipelineDescriptor) -> CubeFile {
        CubeFile {
            group: serde_json::from_str(&crate::group::to_structured(&self.group, &self.generators))
                .expect("structured form is valid JSON"),
            generator_names: self.generators.names().to_vec(),
            params: self.params,
            steps: self.steps,
            build_ops: self.build_ops,
            factors: self
                .factors
                .iter()
                .map(|f| StoredFactor {
                    element: encode_element(self.group.backend(), &f.element),
                    origin: f.origin,
                    step: f.step,
                })
                .collect(),
            pipeline,
        }
    }

    /// Rebuilds a cube from a saved file; the factors are validated
    /// against the embedded group.
    pub fn from_file(file: &CubeFile) -> Result<Self> {
        let (group, gens) = crate::group::parse_group_spec(&file.group.to_string())?;
        let gens = GeneratingSet::with_names(gens.elements().to_vec(), file.generator_names.clone())?;
        file.params.validate()?;
        let mut factors = VecDeque::new();
        for f in &file.factors {
            let el = decode_element(group.backend(), &f.element)?;
            factors.push_back(Factor::new(el, f.origin, f.step));
        }
        // Left-placed factors must precede everything older than them.
        for (i, f) in factors.iter().enumerate() {
            if f.side() == Side::Left && factors.iter().take(i).any(|g| g.step < f.step) {
                return Err(Error::Structural(format!("factor at step {} is out of order", f.step)));
            }
        }
        Ok(FibonacciCube {
            group,
            generators: gens,
            params: file.params,
            factors,
            steps: file.steps,
            build_ops: file.build_ops,
            fault: false,
        })
    }
}

/// Encodes an element like the structured generator format does:
/// 1-based images for permutations, row-major entries for matrices.
pub fn encode_element(backend: Backend, el: &GroupElement) -> Vec<u32> {
    match backend {
        Backend::Permutation { .. } => el.payload().iter().map(|x| x + 1).collect(),
        Backend::Matrix { .. } => el.payload().to_vec(),
    }
}

pub fn decode_element(backend: Backend, data: &[u32]) -> Result<GroupElement> {
    let el = match backend {
        Backend::Permutation { .. } => {
            if data.contains(&0) {
                return Err(Error::Structural("permutation images are 1-based".into()));
            }
            GroupElement::from_payload(data.iter().map(|x| x - 1).collect())
        }
        Backend::Matrix { .. } => GroupElement::from_payload(data.to_vec()),
    };
    backend.validate(&el)?;
    Ok(el)
}

/// Stages and seeds a saved artifact was produced with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineDescriptor {
    pub stages: Vec<String>,
    pub seed: u64,
    pub labels: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredFactor {
    pub element: Vec<u32>,
    pub origin: Origin,
    pub step: usize,
}

/// On-disk cube: build once, sample in later runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CubeFile {
    pub group: serde_json::Value,
    pub generator_names: Vec<String>,
    pub params: CubeParams,
    pub steps: usize,
    pub build_ops: OpCount,
    pub factors: Vec<StoredFactor>,
    pub pipeline: PipelineDescriptor,
}
