//! Product replacement.
//!
//! The classic heuristic keeps `k` slots and repeatedly replaces a random
//! slot by its product with another. The variant picks a fresh slot `g_i`
//! each step, multiplies every other slot by it on the right, and never
//! picks that slot again; its output is a random slot not yet picked.

use crate::cube::ceil_log2_u128;
use crate::error::{contract, Result};
use crate::group::{BlackBoxGroup, GeneratingSet, GroupElement};
use crate::random::RandomSource;

/// `2·ceil(log2 |G|) + 2`.
pub fn default_slots(order: u128) -> usize {
    2 * ceil_log2_u128(order) as usize + 2
}

/// `ceil(log2 |G|)`.
pub fn default_steps(order: u128) -> usize {
    ceil_log2_u128(order) as usize
}

#[derive(Debug, Clone)]
pub struct ReplacementState {
    group: BlackBoxGroup,
    slots: Vec<GroupElement>,
    chosen: Vec<bool>,
    history: Vec<usize>,
    moves: usize,
}

impl ReplacementState {
    /// Slots are the generators repeated cyclically up to length `k`.
    pub fn new(group: &BlackBoxGroup, gens: &GeneratingSet, k: usize) -> Result<Self> {
        if k < 2 {
            return Err(contract(format!("product replacement needs k ≥ 2, got {k}")));
        }
        let slots = gens.elements().iter().cycle().take(k).cloned().collect();
        Ok(ReplacementState { group: group.clone(), slots, chosen: vec![false; k], history: Vec::new(), moves: 0 })
    }

    pub fn slots(&self) -> &[GroupElement] {
        &self.slots
    }

    pub fn k(&self) -> usize {
        self.slots.len()
    }

    /// Moves (classic) or steps (variant) performed so far.
    pub fn moves(&self) -> usize {
        self.moves
    }

    /// Slots picked by variant steps, in order.
    pub fn history(&self) -> &[usize] {
        &self.history
    }

    /// `x_i ← x_i·x_j` or `x_j·x_i` for random `i ≠ j` and side.
    pub fn classic_move(&mut self, src: &mut RandomSource) {
        let k = self.k();
        let i = src.below(k);
        let j = (i + 1 + src.below(k - 1)) % k;
        let (a, b) = (&self.slots[i], &self.slots[j]);
        let next = if src.fresh_bit() { self.group.mul(a, b) } else { self.group.mul(b, a) };
        self.slots[i] = next;
        self.moves += 1;
    }

    /// `burn_in` classic moves, then a uniformly random slot.
    pub fn pr_classic_sample(&mut self, burn_in: usize, src: &mut RandomSource) -> GroupElement {
        for _ in 0..burn_in {
            self.classic_move(src);
        }
        self.slots[src.below(self.k())].clone()
    }

    fn unchosen(&self) -> Vec<usize> {
        (0..self.k()).filter(|&i| !self.chosen[i]).collect()
    }

    /// Variant step at slot `i`: every other slot `y` becomes `y·x_i`.
    pub fn variant_step_at(&mut self, i: usize) -> Result<()> {
        if i >= self.k() || self.chosen[i] {
            return Err(contract(format!("slot {i} is out of range or already chosen")));
        }
        if self.unchosen().len() <= 1 {
            return Err(contract("no unchosen slot would remain"));
        }
        let g = self.slots[i].clone();
        for j in 0..self.k() {
            if j != i {
                self.slots[j] = self.group.mul(&self.slots[j], &g);
            }
        }
        self.chosen[i] = true;
        self.history.push(i);
        self.moves += 1;
        Ok(())
    }

    /// Variant step at a uniformly random unchosen slot.
    pub fn variant_step(&mut self, src: &mut RandomSource) -> Result<usize> {
        let free = self.unchosen();
        if free.len() <= 1 {
            return Err(contract("no unchosen slot would remain"));
        }
        let i = free[src.below(free.len())];
        self.variant_step_at(i)?;
        Ok(i)
    }

    /// A uniformly random slot not yet chosen.
    pub fn pick_unchosen(&self, src: &mut RandomSource) -> GroupElement {
        let free = self.unchosen();
        self.slots[free[src.below(free.len())]].clone()
    }
}

/// `steps` variant steps from fresh slots, then a random unchosen slot.
pub fn pr_fc_variant_run(
    group: &BlackBoxGroup,
    gens: &GeneratingSet,
    k: usize,
    steps: usize,
    src: &mut RandomSource,
) -> Result<GroupElement> {
    if steps >= k {
        return Err(contract(format!("steps = {steps} must be smaller than k = {k}")));
    }
    let mut state = ReplacementState::new(group, gens, k)?;
    for _ in 0..steps {
        state.variant_step(src)?;
    }
    Ok(state.pick_unchosen(src))
}
