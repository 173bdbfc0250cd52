//! The invariant battery behind `fibcube verify`.

use std::sync::Arc;

use serde::Serialize;
use serde_json::{json, Value};

use super::{
    booster_potential, booster_trajectory, convolve, cube_law, cube_law_chronological, cube_trajectory, decompose,
    escape_analyze, expected_norm_identity_check, fuzzy_subgroup_check, invert_dist, pair_law, peak_set,
    DistributionVector, EnumeratedGroup, PeakClass, PmfSampler, DEFAULT_CAP, IDENTITY_TOL, INEQ_TOL,
};
use crate::cube::{CubeParams, FibonacciCube, Side};
use crate::error::{contract, Result};
use crate::group::{BlackBoxGroup, GeneratingSet, GroupElement};
use crate::random::RandomSource;
use crate::uniformizer::{build_booster, UniformizerConfig};

pub const INVARIANTS: [&str; 12] = [
    "norm-monotone",
    "norm-floor",
    "reorder",
    "sampler-consistency",
    "t-monotone",
    "decomposition",
    "fuzzy-subgroup",
    "escape",
    "expected-norm",
    "amplifier",
    "norm-identities",
    "peak-bounds",
];

pub const DEFAULT_SUITE: [&str; 8] = ["Z12", "D8", "Q8", "S3", "S4", "SL2_3", "A5", "S5"];

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    /// Invariant names to run; empty runs all.
    pub only: Vec<String>,
    pub seed: u64,
    /// Independent repetitions per group and invariant.
    pub seeds: u64,
    /// Cube length; defaults to `max(20, 3·ceil(log2 |G|))`.
    pub t: Option<usize>,
    pub inject_fault: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { only: Vec::new(), seed: 1, seeds: 3, t: None, inject_fault: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvariantOutcome {
    pub invariant: String,
    pub group: String,
    pub checks: u64,
    pub failures: u64,
    /// First failing case.
    pub witness: Option<Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub outcomes: Vec<InvariantOutcome>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.failures == 0)
    }
}

#[derive(Default)]
struct Tally {
    checks: u64,
    failures: u64,
    witness: Option<Value>,
}

impl Tally {
    fn check(&mut self, ok: bool, witness: impl FnOnce() -> Value) {
        self.checks += 1;
        if !ok {
            self.failures += 1;
            if self.witness.is_none() {
                self.witness = Some(witness());
            }
        }
    }
}

struct Ctx<'a> {
    group: &'a BlackBoxGroup,
    gens: &'a GeneratingSet,
    eg: Arc<EnumeratedGroup>,
    t: usize,
    fault: bool,
}

impl Ctx<'_> {
    fn cube(&self, src: &mut RandomSource) -> Result<FibonacciCube> {
        let mut c = FibonacciCube::new(self.group.clone(), self.gens.clone(), CubeParams::new(self.t))?;
        c.build(src)?;
        if self.fault {
            c.inject_fault();
        }
        Ok(c)
    }

    fn n(&self) -> usize {
        self.eg.order()
    }
}

/// Runs the battery over named groups. Every (invariant, group) pair gets
/// its own random stream, so `only` never changes the results it keeps.
pub fn run_verify(groups: &[(String, BlackBoxGroup, GeneratingSet)], opts: &VerifyOptions) -> Result<VerifyReport> {
    for name in &opts.only {
        if !INVARIANTS.contains(&name.as_str()) {
            return Err(contract(format!("unknown invariant {name:?}")));
        }
    }
    let root = RandomSource::new(opts.seed, "verify");
    let mut outcomes = Vec::new();
    for (name, group, gens) in groups {
        let eg = Arc::new(EnumeratedGroup::new(group, gens, DEFAULT_CAP)?);
        let t = opts.t.unwrap_or_else(|| CubeParams::default_terms(Some(eg.order() as u128), group.encoding_bits()));
        let ctx = Ctx { group, gens, eg, t, fault: opts.inject_fault };
        for inv in INVARIANTS {
            if !opts.only.is_empty() && !opts.only.iter().any(|o| o == inv) {
                continue;
            }
            let mut tally = Tally::default();
            for rep in 0..opts.seeds {
                let mut src = root.derive(&format!("{inv}/{name}/{rep}"));
                run_one(inv, &ctx, &mut src, &mut tally)?;
            }
            outcomes.push(InvariantOutcome {
                invariant: inv.to_string(),
                group: name.clone(),
                checks: tally.checks,
                failures: tally.failures,
                witness: tally.witness,
            });
        }
    }
    Ok(VerifyReport { outcomes })
}

fn run_one(inv: &str, ctx: &Ctx, src: &mut RandomSource, tally: &mut Tally) -> Result<()> {
    match inv {
        "norm-monotone" => norm_monotone(ctx, src, tally),
        "norm-floor" => norm_floor(ctx, src, tally),
        "reorder" => reorder(ctx, src, tally),
        "sampler-consistency" => sampler_consistency(ctx, src, tally),
        "t-monotone" => t_monotone(ctx, src, tally),
        "decomposition" => decomposition(ctx, src, tally),
        "fuzzy-subgroup" => fuzzy(ctx, src, tally),
        "escape" => escape(ctx, src, tally),
        "expected-norm" => expected_norm(ctx, src, tally),
        "amplifier" => amplifier(ctx, src, tally),
        "norm-identities" => norm_identities(ctx, src, tally),
        "peak-bounds" => peak_bounds(ctx, src, tally),
        _ => Err(contract(format!("unknown invariant {inv:?}"))),
    }
}

/// A random pmf: a quarter of the entries zero on average.
pub fn random_pmf(n: usize, src: &mut RandomSource) -> DistributionVector {
    let w: Vec<f64> = (0..n).map(|_| if src.below(4) == 0 { 0.0 } else { src.unit() }).collect();
    DistributionVector::from_weights(&w).unwrap_or_else(|_| DistributionVector::point_mass(n, src.below(n)))
}

/// A random pmf mixed with the uniform law, full support unless the
/// mixing weight is 1.
pub fn random_mixed_pmf(n: usize, src: &mut RandomSource) -> DistributionVector {
    let d = random_pmf(n, src);
    let mix = src.unit();
    DistributionVector::from_raw(d.probs().iter().map(|p| mix * p + (1.0 - mix) / n as f64).collect())
}

/// A random symmetric subset: some random subsets, some subgroups with a
/// pair `{x, x⁻¹}` toggled.
pub fn random_symmetric_set(eg: &EnumeratedGroup, src: &mut RandomSource) -> Vec<usize> {
    let n = eg.order();
    let mut mask = vec![false; n];
    if src.fresh_bit() {
        let density = 0.05 + 0.95 * src.unit();
        for g in 0..n {
            if !mask[g] && src.unit() < density {
                mask[g] = true;
                mask[eg.inv(g)] = true;
            }
        }
    } else {
        // Subgroup generated by one or two random elements.
        let mut frontier = vec![0usize];
        mask[0] = true;
        let gens: Vec<usize> = (0..1 + src.below(2)).map(|_| src.below(n)).collect();
        while let Some(x) = frontier.pop() {
            for &g in &gens {
                let y = eg.mul(x, g);
                if !mask[y] {
                    mask[y] = true;
                    frontier.push(y);
                }
            }
        }
        if src.fresh_bit() {
            let x = src.below(n);
            let v = !mask[x];
            mask[x] = v;
            mask[eg.inv(x)] = v;
        }
    }
    let set: Vec<usize> = (0..n).filter(|&g| mask[g]).collect();
    if set.is_empty() {
        vec![0]
    } else {
        set
    }
}

fn norm_monotone(ctx: &Ctx, src: &mut RandomSource, tally: &mut Tally) -> Result<()> {
    let cube = ctx.cube(&mut src.derive("cube"))?;
    let traj = cube_trajectory(&ctx.eg, &cube)?;
    for (i, w) in traj.windows(2).enumerate() {
        let (a, b) = (w[0].l2(), w[1].l2());
        tally.check(b <= a + IDENTITY_TOL, || json!({"step": i + 1, "before": a, "after": b}));
    }
    Ok(())
}

fn norm_floor(ctx: &Ctx, src: &mut RandomSource, tally: &mut Tally) -> Result<()> {
    let cube = ctx.cube(&mut src.derive("cube"))?;
    let floor = 1.0 / (ctx.n() as f64).sqrt();
    for (i, d) in cube_trajectory(&ctx.eg, &cube)?.iter().enumerate() {
        let s = d.stats();
        let l2 = s.l2;
        tally.check(l2 >= floor - IDENTITY_TOL, || json!({"step": i, "l2": l2, "floor": floor}));
        let supp_floor = 1.0 / (s.support as f64).sqrt();
        tally.check(l2 >= supp_floor - IDENTITY_TOL, || json!({"step": i, "l2": l2, "support": s.support}));
    }
    Ok(())
}

fn reorder(ctx: &Ctx, src: &mut RandomSource, tally: &mut Tally) -> Result<()> {
    let cube = ctx.cube(&mut src.derive("cube"))?;
    let stored = cube_law(&ctx.eg, &cube)?;
    let chrono = cube_law_chronological(&ctx.eg, &cube)?;
    let diff = stored.probs().iter().zip(chrono.probs()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    tally.check(diff < IDENTITY_TOL, || json!({"max_difference": diff}));
    Ok(())
}

fn oracle_product(eg: &EnumeratedGroup, idx: impl IntoIterator<Item = usize>) -> usize {
    idx.into_iter().fold(eg.identity(), |acc, h| eg.mul(acc, h))
}

fn sampler_consistency(ctx: &Ctx, src: &mut RandomSource, tally: &mut Tally) -> Result<()> {
    let cube = ctx.cube(&mut src.derive("cube"))?;
    let eg = &ctx.eg;
    let idx: Vec<usize> = cube.factors().map(|f| eg.index_of(f.element())).collect::<Result<_>>()?;
    let perm = |g: &GroupElement| crate::cube::encode_element(ctx.group.backend(), g);
    for _ in 0..32 {
        let bits: Vec<bool> = (0..cube.len()).map(|_| src.fresh_bit()).collect();
        let got = cube.sample_r_with_bits(&bits);
        let want = oracle_product(eg, idx.iter().zip(&bits).filter(|(_, &b)| b).map(|(&h, _)| h));
        tally.check(eg.index_of(&got)? == want, || {
            json!({"bits": bits, "sampled": perm(&got), "expected": perm(eg.element(want))})
        });
        let inv_bits: Vec<bool> = (0..cube.len()).map(|_| src.fresh_bit()).collect();
        let got = cube.sample_pair_with_bits(&inv_bits, &bits);
        let left = idx.iter().zip(&inv_bits).rev().filter(|(_, &b)| b).map(|(&h, _)| eg.inv(h));
        let right = idx.iter().zip(&bits).filter(|(_, &b)| b).map(|(&h, _)| h);
        let want = oracle_product(eg, left.chain(right));
        tally.check(eg.index_of(&got)? == want, || {
            json!({"inverse_bits": inv_bits, "bits": bits, "sampled": perm(&got), "expected": perm(eg.element(want))})
        });
    }
    Ok(())
}

fn t_monotone(ctx: &Ctx, src: &mut RandomSource, tally: &mut Tally) -> Result<()> {
    let cfg = UniformizerConfig { booster_t: Some(ctx.t.max(30)), ..Default::default() };
    let cube = ctx.cube(&mut src.derive("cube"))?;
    let check = |traj: Vec<DistributionVector>, source: &str, tally: &mut Tally| {
        for (i, w) in traj.windows(2).enumerate() {
            let (a, b) = (booster_potential(&w[0]), booster_potential(&w[1]));
            tally.check(b <= a + IDENTITY_TOL, || json!({"source": source, "step": i + 1, "before": a, "after": b}));
        }
    };
    let b = build_booster(&cube, &cfg, None, &mut src.derive("booster"))?;
    check(booster_trajectory(&ctx.eg, &b)?, "cube-pair", tally);
    let lumpy = PmfSampler::new(ctx.group.clone(), ctx.eg.clone(), random_mixed_pmf(ctx.n(), src))?;
    let b = build_booster(&lumpy, &cfg, None, &mut src.derive("booster-pmf"))?;
    check(booster_trajectory(&ctx.eg, &b)?, "pmf", tally);
    Ok(())
}

fn decomposition(ctx: &Ctx, src: &mut RandomSource, tally: &mut Tally) -> Result<()> {
    let n = ctx.n();
    for _ in 0..20 {
        let x = random_pmf(n, src);
        let y = random_pmf(n, src);
        let p = 0.95 * src.unit();
        let z = DistributionVector::from_raw(x.probs().iter().zip(y.probs()).map(|(a, b)| p * a + (1.0 - p) * b).collect());
        let back = decompose(&z, &x, p)?;
        let err = (0..n).map(|g| (p * x.prob(g) + (1.0 - p) * back.prob(g) - z.prob(g)).abs()).fold(0.0, f64::max);
        tally.check(err < IDENTITY_TOL, || json!({"p_i": p, "max_error": err}));
    }
    Ok(())
}

fn fuzzy(ctx: &Ctx, src: &mut RandomSource, tally: &mut Tally) -> Result<()> {
    for _ in 0..50 {
        let set = random_symmetric_set(&ctx.eg, src);
        let r = fuzzy_subgroup_check(&ctx.eg, &set)?;
        if r.lemma_applies {
            tally.check(r.bound_holds == Some(true), || json!({"set": set, "report": r}));
        }
    }
    Ok(())
}

fn escape(ctx: &Ctx, src: &mut RandomSource, tally: &mut Tally) -> Result<()> {
    for _ in 0..20 {
        let set = random_symmetric_set(&ctx.eg, src);
        let r = escape_analyze(&ctx.eg, &set, 20, 1.0 / 160.0)?;
        tally.check(r.dichotomy_holds, || json!({"set": set, "report": r}));
    }
    Ok(())
}

fn expected_norm(ctx: &Ctx, src: &mut RandomSource, tally: &mut Tally) -> Result<()> {
    for _ in 0..10 {
        let x = random_pmf(ctx.n(), src);
        let w = random_pmf(ctx.n(), src);
        let p0 = src.unit();
        let r = expected_norm_identity_check(&ctx.eg, &x, &w, p0)?;
        tally.check((r.lhs - r.rhs).abs() < 1e-10, || json!({"p_e0": p0, "lhs": r.lhs, "rhs": r.rhs}));
    }
    Ok(())
}

fn amplifier(ctx: &Ctx, src: &mut RandomSource, tally: &mut Tally) -> Result<()> {
    for _ in 0..10 {
        let x = random_mixed_pmf(ctx.n(), src);
        let y = random_mixed_pmf(ctx.n(), src);
        let (d, e) = (x.stats().eps_uniform, y.stats().eps_uniform);
        let got = convolve(&ctx.eg, &x, &y)?.stats().eps_uniform;
        tally.check(got <= d * e + IDENTITY_TOL, || json!({"delta": d, "epsilon": e, "product": got}));
    }
    Ok(())
}

fn norm_identities(ctx: &Ctx, src: &mut RandomSource, tally: &mut Tally) -> Result<()> {
    let eg = &ctx.eg;
    for _ in 0..10 {
        let x = random_pmf(ctx.n(), src);
        let n = x.l2();
        let inv = invert_dist(eg, &x)?.l2();
        tally.check((inv - n).abs() < IDENTITY_TOL, || json!({"norm": n, "inverse_norm": inv}));
        let g = src.below(ctx.n());
        for side in [Side::Right, Side::Left] {
            let t = x.translate(&eg.translation(g, side)).l2();
            tally.check((t - n).abs() < IDENTITY_TOL, || json!({"norm": n, "translated_norm": t, "by": g}));
        }
        let y = random_pmf(ctx.n(), src);
        let xy = convolve(eg, &x, &y)?;
        let s = x.stats();
        tally.check(xy.l2() <= n.min(y.l2()) + INEQ_TOL, || json!({"norm_x": n, "norm_y": y.l2(), "norm_xy": xy.l2()}));
        let sandwich = xy.probs().iter().all(|&p| p >= s.min_prob - INEQ_TOL && p <= s.max_prob + INEQ_TOL);
        tally.check(sandwich, || json!({"min_x": s.min_prob, "max_x": s.max_prob}));
        tally.check(n <= s.max_prob.sqrt() + INEQ_TOL, || json!({"norm": n, "max_prob": s.max_prob}));
    }
    Ok(())
}

fn peak_bounds(ctx: &Ctx, src: &mut RandomSource, tally: &mut Tally) -> Result<()> {
    let cube = ctx.cube(&mut src.derive("cube"))?;
    let delta = 0.25;
    let mut laws = cube_trajectory(&ctx.eg, &cube)?;
    laws.push(pair_law(&ctx.eg, &cube)?);
    for (i, d) in laws.iter().enumerate() {
        if let PeakClass::Regular(p) = peak_set(d, delta)? {
            let ok = p.outside_mass >= delta - INEQ_TOL && p.outside_mass < delta + p.m + INEQ_TOL;
            tally.check(ok, || json!({"step": i, "m": p.m, "outside": p.outside_mass}));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::builtin::builtin;

    fn suite(names: &[&str]) -> Vec<(String, BlackBoxGroup, GeneratingSet)> {
        names
            .iter()
            .map(|n| {
                let (g, s) = builtin(n).unwrap();
                (n.to_string(), g, s)
            })
            .collect()
    }

    #[test]
    fn small_suite_passes() {
        let r = run_verify(&suite(&["S3", "D8", "Q8"]), &VerifyOptions { seeds: 1, ..Default::default() }).unwrap();
        assert!(r.passed(), "{:#?}", r.outcomes.iter().filter(|o| o.failures > 0).collect::<Vec<_>>());
        assert_eq!(r.outcomes.len(), 3 * INVARIANTS.len());
        assert!(r.outcomes.iter().all(|o| o.checks > 0 || o.invariant == "fuzzy-subgroup"));
    }

    #[test]
    fn only_selects_one_invariant() {
        let opts = VerifyOptions { only: vec!["norm-monotone".into()], seeds: 1, ..Default::default() };
        let r = run_verify(&suite(&["S4"]), &opts).unwrap();
        assert_eq!(r.outcomes.len(), 1);
        assert!(run_verify(&suite(&["S4"]), &VerifyOptions { only: vec!["nope".into()], ..opts }).is_err());
    }

    #[test]
    fn injected_fault_is_caught() {
        let opts = VerifyOptions {
            only: vec!["sampler-consistency".into()],
            seeds: 1,
            inject_fault: true,
            ..Default::default()
        };
        let r = run_verify(&suite(&["S4"]), &opts).unwrap();
        assert!(!r.passed());
        assert!(r.outcomes[0].witness.is_some());
    }
}
