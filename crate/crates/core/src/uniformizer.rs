//! Semi-uniform to ε-uniform.
//!
//! A [`BoostedSampler`] multiplies each draw `w` of a semi-uniform source by
//! a cube `q_1^{E_1}⋯q_t^{E_t}` whose factors were themselves drawn from the
//! source once, at build time. An [`Amplified`] sampler multiplies `k`
//! independent draws, so a `γ'`-uniform base becomes `γ'^k`-uniform.
//! [`make_epsilon_uniform_generator`] chains cube, booster and amplifier.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::cube::{CubeParams, FibonacciCube};
use crate::error::{contract, Result};
use crate::group::{BlackBoxGroup, GeneratingSet, GroupElement, OpCount};
use crate::random::RandomSource;

/// Anything that hands out random group elements.
pub trait Sampler {
    fn group(&self) -> &BlackBoxGroup;
    fn sample(&self, src: &mut RandomSource) -> GroupElement;
}

impl<S: Sampler + ?Sized> Sampler for &S {
    fn group(&self) -> &BlackBoxGroup {
        (**self).group()
    }
    fn sample(&self, src: &mut RandomSource) -> GroupElement {
        (**self).sample(src)
    }
}

impl<S: Sampler + ?Sized> Sampler for Arc<S> {
    fn group(&self) -> &BlackBoxGroup {
        (**self).group()
    }
    fn sample(&self, src: &mut RandomSource) -> GroupElement {
        (**self).sample(src)
    }
}

impl<S: Sampler + ?Sized> Sampler for Box<S> {
    fn group(&self) -> &BlackBoxGroup {
        (**self).group()
    }
    fn sample(&self, src: &mut RandomSource) -> GroupElement {
        (**self).sample(src)
    }
}

/// A built cube samples `R_t⁻¹ R̄_t`.
impl Sampler for FibonacciCube {
    fn group(&self) -> &BlackBoxGroup {
        FibonacciCube::group(self)
    }
    fn sample(&self, src: &mut RandomSource) -> GroupElement {
        self.sample_pair(src)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformizerConfig {
    /// Assumed semi-uniformity of the booster's source, in `[0, 1)`.
    pub alpha: f64,
    /// Confidence parameter, `> 1`.
    pub lambda: f64,
    /// Target ε-uniformity of the full pipeline, in `(0, 1)`.
    pub epsilon_target: f64,
    /// Explicit booster length.
    pub booster_t: Option<usize>,
    /// Uniformity assumed for one boosted draw when sizing the amplifier.
    pub gamma_assumed: f64,
    /// Cube parameters; `None` picks the default term count.
    pub cube: Option<CubeParams>,
    /// Group order, when known.
    pub group_order: Option<u128>,
}

impl Default for UniformizerConfig {
    fn default() -> Self {
        UniformizerConfig {
            alpha: 0.75,
            lambda: 8.0,
            epsilon_target: 0.1,
            booster_t: None,
            gamma_assumed: 7.0 / 8.0,
            cube: None,
            group_order: None,
        }
    }
}

impl UniformizerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.alpha) {
            return Err(contract(format!("alpha must lie in [0, 1), got {}", self.alpha)));
        }
        if !(self.lambda > 1.0 && self.lambda.is_finite()) {
            return Err(contract(format!("lambda must exceed 1, got {}", self.lambda)));
        }
        if !(self.epsilon_target > 0.0 && self.epsilon_target < 1.0) {
            return Err(contract(format!("epsilon must lie in (0, 1), got {}", self.epsilon_target)));
        }
        if !(self.gamma_assumed > 0.0 && self.gamma_assumed < 1.0) {
            return Err(contract("gamma_assumed must lie in (0, 1)"));
        }
        Ok(())
    }

    /// `γ = 14 / (11 + 3α)`.
    pub fn gamma(&self) -> f64 {
        14.0 / (11.0 + 3.0 * self.alpha)
    }

    /// `ceil(2·log_γ |G| + log_γ(64λ))`, given `ln |G|`.
    pub fn booster_terms(&self, ln_order: f64) -> usize {
        let lg = self.gamma().ln();
        ((2.0 * ln_order + (64.0 * self.lambda).ln()) / lg).ceil().max(0.0) as usize
    }

    /// `k = ceil(ln ε / ln γ_assumed)`, at least 1.
    pub fn amplifier_count(&self) -> usize {
        ((self.epsilon_target.ln() / self.gamma_assumed.ln()).ceil() as usize).max(1)
    }
}

/// `w · q_1^{E_1}⋯q_t^{E_t}` with `w` fresh from the source.
#[derive(Debug, Clone)]
pub struct BoostedSampler<W> {
    source: W,
    factors: Vec<GroupElement>,
}

/// Draws the booster's fixed factors from `source`. The length is
/// `cfg.booster_t` when given, else computed from the group order.
pub fn build_booster<W: Sampler>(
    source: W,
    cfg: &UniformizerConfig,
    order: Option<u128>,
    src: &mut RandomSource,
) -> Result<BoostedSampler<W>> {
    cfg.validate()?;
    let t = match (cfg.booster_t, order) {
        (Some(t), _) => t,
        (None, Some(n)) => cfg.booster_terms((n as f64).ln()),
        (None, None) => return Err(contract("group order unknown: pass an explicit booster length")),
    };
    let factors = {
        let _hold = source.group().counter().hold_precompute();
        (0..t).map(|_| source.sample(src)).collect()
    };
    Ok(BoostedSampler { source, factors })
}

impl<W: Sampler> BoostedSampler<W> {
    /// Wraps explicit factors, for tests and saved pipelines.
    pub fn from_factors(source: W, factors: Vec<GroupElement>) -> Self {
        BoostedSampler { source, factors }
    }

    pub fn source(&self) -> &W {
        &self.source
    }

    pub fn factors(&self) -> &[GroupElement] {
        &self.factors
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }
}

impl<W: Sampler> Sampler for BoostedSampler<W> {
    fn group(&self) -> &BlackBoxGroup {
        self.source.group()
    }

    fn sample(&self, src: &mut RandomSource) -> GroupElement {
        let w = self.source.sample(src);
        let chosen: Vec<&GroupElement> = self.factors.iter().filter(|_| src.fresh_bit()).collect();
        self.group().product(std::iter::once(&w).chain(chosen))
    }
}

/// Product of `k` independent draws from `base`.
#[derive(Debug, Clone)]
pub struct Amplified<S> {
    base: S,
    k: usize,
}

impl<S: Sampler> Amplified<S> {
    pub fn new(base: S, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(contract("amplifier count k must be at least 1"));
        }
        Ok(Amplified { base, k })
    }

    pub fn base(&self) -> &S {
        &self.base
    }

    pub fn k(&self) -> usize {
        self.k
    }
}

impl<S: Sampler> Sampler for Amplified<S> {
    fn group(&self) -> &BlackBoxGroup {
        self.base.group()
    }

    fn sample(&self, src: &mut RandomSource) -> GroupElement {
        amplify_unchecked(&self.base, self.k, src)
    }
}

/// One draw of the product of `k ≥ 1` independent base draws.
pub fn amplify<S: Sampler>(base: &S, k: usize, src: &mut RandomSource) -> Result<GroupElement> {
    if k == 0 {
        return Err(contract("amplifier count k must be at least 1"));
    }
    Ok(amplify_unchecked(base, k, src))
}

fn amplify_unchecked<S: Sampler>(base: &S, k: usize, src: &mut RandomSource) -> GroupElement {
    let draws: Vec<GroupElement> = (0..k).map(|_| base.sample(src)).collect();
    base.group().product(draws.iter())
}

/// Cube → booster → amplifier.
#[derive(Debug, Clone)]
pub struct EpsilonUniformSampler {
    inner: Amplified<BoostedSampler<Arc<FibonacciCube>>>,
    config: UniformizerConfig,
    construction_ops: OpCount,
}

impl EpsilonUniformSampler {
    pub fn cube(&self) -> &FibonacciCube {
        self.inner.base().source()
    }

    pub fn booster(&self) -> &BoostedSampler<Arc<FibonacciCube>> {
        self.inner.base()
    }

    pub fn amplifier_count(&self) -> usize {
        self.inner.k()
    }

    pub fn config(&self) -> &UniformizerConfig {
        &self.config
    }

    /// Operations spent building the cube and the booster.
    pub fn construction_ops(&self) -> OpCount {
        self.construction_ops
    }

    /// A draw together with the operations it used. Counts are exact only
    /// when nothing else uses the group concurrently.
    pub fn sample_counted(&self, src: &mut RandomSource) -> (GroupElement, OpCount) {
        let counter = self.group().counter();
        counter.reset_sample_bucket();
        let before = counter.snapshot();
        let g = self.sample(src);
        (g, counter.snapshot().since(&before))
    }
}

impl Sampler for EpsilonUniformSampler {
    fn group(&self) -> &BlackBoxGroup {
        self.inner.group()
    }

    fn sample(&self, src: &mut RandomSource) -> GroupElement {
        self.inner.sample(src)
    }
}

/// Builds the full pipeline for target `epsilon`. Stages draw from the
/// child streams `cube` and `booster` of `src`. Without a known order the
/// booster is sized from the encoding length, `ln |G| ≤ L·ln 2`.
pub fn make_epsilon_uniform_generator(
    group: &BlackBoxGroup,
    gens: &GeneratingSet,
    epsilon: f64,
    cfg: &UniformizerConfig,
    src: &RandomSource,
) -> Result<EpsilonUniformSampler> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(contract(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    let config = UniformizerConfig { epsilon_target: epsilon, ..*cfg };
    config.validate()?;
    let counter = group.counter();
    let _hold = counter.hold_precompute();
    let before = counter.snapshot();

    let params = config
        .cube
        .unwrap_or_else(|| CubeParams::new(CubeParams::default_terms(config.group_order, group.encoding_bits())));
    let mut cube = FibonacciCube::new(group.clone(), gens.clone(), params)?;
    cube.build(&mut src.derive("cube"))?;

    let booster_cfg = match (config.booster_t, config.group_order) {
        (None, None) => UniformizerConfig {
            booster_t: Some(config.booster_terms(group.encoding_bits() as f64 * std::f64::consts::LN_2)),
            ..config
        },
        _ => config,
    };
    let booster = build_booster(Arc::new(cube), &booster_cfg, config.group_order, &mut src.derive("booster"))?;
    let inner = Amplified::new(booster, config.amplifier_count())?;
    let construction_ops = counter.snapshot().since(&before);
    Ok(EpsilonUniformSampler { inner, config, construction_ops })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::builtin::builtin;
    use crate::group::Phase;

    #[test]
    fn booster_length_formula() {
        let cfg = UniformizerConfig { alpha: 0.25, lambda: 8.0, ..Default::default() };
        let gamma: f64 = 14.0 / 11.75;
        assert!((cfg.gamma() - gamma).abs() < 1e-15);
        // 2·log_γ 60 + log_γ 512 by change of base, each term separately.
        let expect = (2.0 * 60f64.log(gamma) + 512f64.log(gamma)).ceil() as usize;
        assert_eq!(cfg.booster_terms(60f64.ln()), expect);
        assert_eq!(expect, 83);
    }

    #[test]
    fn amplifier_counts() {
        let k = |e: f64| UniformizerConfig { epsilon_target: e, ..Default::default() }.amplifier_count();
        assert_eq!(k(0.1), 18);
        assert_eq!([k(0.5), k(0.25), k(0.125)], [6, 11, 16]);
    }

    #[test]
    fn config_validation() {
        assert!(UniformizerConfig::default().validate().is_ok());
        assert!(UniformizerConfig { alpha: 1.0, ..Default::default() }.validate().is_err());
        assert!(UniformizerConfig { lambda: 1.0, ..Default::default() }.validate().is_err());
    }

    fn cube(name: &str, t: usize) -> FibonacciCube {
        let (g, s) = builtin(name).unwrap();
        let mut c = FibonacciCube::new(g, s, CubeParams::new(t)).unwrap();
        c.build(&mut RandomSource::new(1, "cube")).unwrap();
        c
    }

    #[test]
    fn booster_needs_order_or_length() {
        let c = cube("S4", 20);
        let cfg = UniformizerConfig::default();
        let mut src = RandomSource::new(2, "booster");
        assert!(build_booster(&c, &cfg, None, &mut src).is_err());
        let b = build_booster(&c, &UniformizerConfig { booster_t: Some(7), ..cfg }, None, &mut src).unwrap();
        assert_eq!(b.len(), 7);
        let b = build_booster(&c, &cfg, Some(24), &mut src).unwrap();
        assert_eq!(b.len(), cfg.booster_terms(24f64.ln()));
    }

    #[test]
    fn booster_factors_are_precompute() {
        let c = cube("A5", 20);
        let counter = c.group().counter();
        let pre = counter.bucket(Phase::Precompute);
        let cfg = UniformizerConfig { booster_t: Some(10), ..Default::default() };
        let b = build_booster(&c, &cfg, None, &mut RandomSource::new(3, "booster")).unwrap();
        assert!(counter.bucket(Phase::Precompute).total() > pre.total());
        let before = counter.snapshot();
        let mut src = RandomSource::new(4, "sample");
        b.sample(&mut src);
        let used = counter.snapshot().since(&before).total();
        assert!(used <= 10 + 2 * 20 + 20);
    }

    #[test]
    fn amplify_rejects_zero() {
        let c = cube("S3", 20);
        assert!(Amplified::new(&c, 0).is_err());
        assert!(amplify(&c, 0, &mut RandomSource::new(1, "x")).is_err());
        let mut a = RandomSource::new(1, "x");
        let mut b = RandomSource::new(1, "x");
        assert_eq!(amplify(&c, 1, &mut a).unwrap(), c.sample(&mut b));
    }

    #[test]
    fn pipeline_rejects_degenerate_epsilon() {
        let (g, s) = builtin("S4").unwrap();
        let src = RandomSource::new(1, "pipeline");
        for e in [1.0, 0.0, -0.5] {
            assert!(make_epsilon_uniform_generator(&g, &s, e, &UniformizerConfig::default(), &src).is_err());
        }
    }

    #[test]
    fn pipeline_records_costs_and_is_deterministic() {
        let (g, s) = builtin("A5").unwrap();
        let cfg = UniformizerConfig { group_order: Some(60), ..Default::default() };
        let src = RandomSource::new(9, "pipeline");
        let p = make_epsilon_uniform_generator(&g, &s, 0.25, &cfg, &src).unwrap();
        assert_eq!(p.amplifier_count(), 11);
        assert!(p.construction_ops().total() > 0);
        let (x, ops) = p.sample_counted(&mut RandomSource::new(1, "draw"));
        assert!(ops.total() > 0);
        let q = make_epsilon_uniform_generator(&g, &s, 0.25, &cfg, &src).unwrap();
        assert_eq!(q.sample(&mut RandomSource::new(1, "draw")), x);
    }

    #[test]
    fn unknown_order_sizes_booster_from_encoding() {
        let (g, s) = builtin("S4").unwrap();
        let p = make_epsilon_uniform_generator(&g, &s, 0.5, &UniformizerConfig::default(), &RandomSource::new(1, "p"))
            .unwrap();
        let cfg = UniformizerConfig::default();
        assert_eq!(p.booster().len(), cfg.booster_terms(g.encoding_bits() as f64 * std::f64::consts::LN_2));
    }
}
