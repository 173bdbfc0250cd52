//! Draw, classify, test.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::Serialize;

use super::{chi_square_test, ChiSquareReport, Partition, PartitionSource};
use crate::cube::{CubeParams, FibonacciCube};
use crate::error::{contract, Error, Result};
use crate::group::builtin::Family;
use crate::group::{BlackBoxGroup, GeneratingSet, GroupElement, OpCount};
use crate::prodrepl::{default_slots, default_steps, pr_fc_variant_run, ReplacementState};
use crate::random::RandomSource;
use crate::uniformizer::{make_epsilon_uniform_generator, Sampler, UniformizerConfig};

const ENUMERATION_CAP: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Algorithm {
    #[serde(rename = "fibcube")]
    Fibcube,
    #[serde(rename = "fibcube+boost")]
    FibcubeBoost,
    #[serde(rename = "pr-classic")]
    PrClassic,
    #[serde(rename = "pr-variant")]
    PrVariant,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] =
        [Algorithm::Fibcube, Algorithm::FibcubeBoost, Algorithm::PrClassic, Algorithm::PrVariant];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Fibcube => "fibcube",
            Algorithm::FibcubeBoost => "fibcube+boost",
            Algorithm::PrClassic => "pr-classic",
            Algorithm::PrVariant => "pr-variant",
        }
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| contract(format!("unknown algorithm {s:?}; expected fibcube, fibcube+boost, pr-classic or pr-variant")))
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    /// Label used in reports.
    pub group: String,
    pub algorithm: Algorithm,
    pub cube: CubeParams,
    /// Product-replacement slots.
    pub k: Option<usize>,
    /// Target for `fibcube+boost`.
    pub epsilon: f64,
    pub samples: usize,
    pub seed: u64,
    pub order: Option<u128>,
    pub family: Option<Family>,
    pub partition: PartitionSource,
    /// Classic moves before each product-replacement draw.
    pub burn_in: usize,
    /// Variant steps per draw.
    pub steps: Option<usize>,
    pub min_expected: f64,
    pub significance: f64,
}

impl ExperimentSpec {
    pub fn new(group: impl Into<String>, algorithm: Algorithm, t: usize, samples: usize, seed: u64) -> Self {
        ExperimentSpec {
            group: group.into(),
            algorithm,
            cube: CubeParams::new(t),
            k: None,
            epsilon: 0.1,
            samples,
            seed,
            order: None,
            family: None,
            partition: PartitionSource::Analytic,
            burn_in: 200,
            steps: None,
            min_expected: 5.0,
            significance: 0.05,
        }
    }

    /// Sets name, order and family of a builtin group.
    pub fn for_builtin(name: &str, algorithm: Algorithm, t: usize, samples: usize, seed: u64) -> Result<Self> {
        let family = crate::group::builtin::family(name)?;
        Ok(ExperimentSpec { order: Some(family.order()), family: Some(family), ..Self::new(name, algorithm, t, samples, seed) })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub group: String,
    pub algorithm: Algorithm,
    pub order: Option<u128>,
    pub t: usize,
    pub samples: usize,
    pub seed: u64,
    /// Operations spent before the first draw.
    pub precompute_ops: OpCount,
    /// Operations spent by all draws together.
    pub sample_ops: OpCount,
    pub mean_ops_per_sample: f64,
    /// Categories of the partition before merging.
    pub classes: usize,
    pub chi_square: ChiSquareReport,
}

fn resolve_partition(group: &BlackBoxGroup, gens: &GeneratingSet, spec: &ExperimentSpec) -> Result<Partition> {
    match &spec.partition {
        PartitionSource::Table(p) => Ok(p.clone()),
        PartitionSource::Enumerated => Partition::enumerated(group, gens, ENUMERATION_CAP),
        PartitionSource::Analytic => match spec.family {
            Some(f @ (Family::Symmetric(_) | Family::Alternating(_))) => Partition::analytic(f),
            _ => Err(contract(format!(
                "{} has no analytic class sizes; supply an expected-count file",
                spec.group
            ))),
        },
    }
}

fn default_size(group: &BlackBoxGroup, order: Option<u128>) -> u128 {
    order.unwrap_or_else(|| 1u128 << group.encoding_bits().min(127))
}

/// Draws `spec.samples` elements with the spec's algorithm and hands each
/// to `visit`. Returns precompute and sampling operation counts. Random
/// streams `cube`, `sample`, `pipeline` and `pr` derive from the seed.
pub fn draw_samples(
    group: &BlackBoxGroup,
    gens: &GeneratingSet,
    spec: &ExperimentSpec,
    mut visit: impl FnMut(GroupElement) -> Result<()>,
) -> Result<(OpCount, OpCount)> {
    let root = RandomSource::new(spec.seed, "experiment");
    let counter = group.counter();
    let start = counter.snapshot();
    Ok(match spec.algorithm {
        Algorithm::Fibcube => {
            let mut cube = FibonacciCube::new(group.clone(), gens.clone(), spec.cube)?;
            cube.build(&mut root.derive("cube"))?;
            let built = counter.snapshot();
            let mut src = root.derive("sample");
            for _ in 0..spec.samples {
                visit(cube.sample_pair(&mut src))?;
            }
            (built.since(&start), counter.snapshot().since(&built))
        }
        Algorithm::FibcubeBoost => {
            let cfg = UniformizerConfig { cube: Some(spec.cube), group_order: spec.order, ..Default::default() };
            let pipeline = make_epsilon_uniform_generator(group, gens, spec.epsilon, &cfg, &root.derive("pipeline"))?;
            let built = counter.snapshot();
            let mut src = root.derive("sample");
            for _ in 0..spec.samples {
                visit(pipeline.sample(&mut src))?;
            }
            (built.since(&start), counter.snapshot().since(&built))
        }
        Algorithm::PrClassic => {
            let k = spec.k.unwrap_or_else(|| default_slots(default_size(group, spec.order)));
            let mut src = root.derive("pr");
            for _ in 0..spec.samples {
                let mut state = ReplacementState::new(group, gens, k)?;
                visit(state.pr_classic_sample(spec.burn_in, &mut src))?;
            }
            (OpCount::default(), counter.snapshot().since(&start))
        }
        Algorithm::PrVariant => {
            let size = default_size(group, spec.order);
            let k = spec.k.unwrap_or_else(|| default_slots(size));
            let steps = spec.steps.unwrap_or_else(|| default_steps(size).min(k.saturating_sub(1)));
            let mut src = root.derive("pr");
            for _ in 0..spec.samples {
                visit(pr_fc_variant_run(group, gens, k, steps, &mut src)?)?;
            }
            (OpCount::default(), counter.snapshot().since(&start))
        }
    })
}

/// Draws, classifies and runs the chi-square test.
pub fn run_experiment(group: &BlackBoxGroup, gens: &GeneratingSet, spec: &ExperimentSpec) -> Result<ExperimentReport> {
    if spec.samples == 0 {
        return Err(Error::Degenerate("sample count is zero".into()));
    }
    let partition = resolve_partition(group, gens, spec)?;
    let mut counts = vec![0u64; partition.len()];
    let (precompute_ops, sample_ops) = draw_samples(group, gens, spec, |g| {
        counts[partition.classify(group.backend(), &g)?] += 1;
        Ok(())
    })?;

    let chi_square = chi_square_test(
        &partition.labels(),
        &counts,
        &partition.weights(),
        spec.min_expected,
        spec.significance,
    )?;
    Ok(ExperimentReport {
        group: spec.group.clone(),
        algorithm: spec.algorithm,
        order: spec.order,
        t: spec.cube.t,
        samples: spec.samples,
        seed: spec.seed,
        precompute_ops,
        sample_ops,
        mean_ops_per_sample: sample_ops.total() as f64 / spec.samples as f64,
        classes: partition.len(),
        chi_square,
    })
}

fn verdict(r: &ExperimentReport) -> &'static str {
    match (r.chi_square.accepted, r.chi_square.accepted_01) {
        (true, _) => "accept",
        (false, true) => "accept@0.01",
        (false, false) => "reject",
    }
}

fn order_text(r: &ExperimentReport) -> String {
    r.order.map(|n| n.to_string()).unwrap_or_else(|| "?".into())
}

/// Fixed-width table, one row per report.
pub fn render_table(reports: &[ExperimentReport]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<10} {:>16} {:>12} {:>10} {:>10} {:>10} {:>9} verdict",
        "group", "|G|", "t/precomp", "classes/df", "chi2", "critical", "ops/draw"
    );
    for r in reports {
        let _ = writeln!(
            out,
            "{:<10} {:>16} {:>12} {:>10} {:>10.1} {:>10.1} {:>9.1} {}",
            r.group,
            order_text(r),
            format!("{}/{}", r.t, r.precompute_ops.total()),
            format!("{}/{}", r.classes, r.chi_square.degrees_of_freedom),
            r.chi_square.statistic,
            r.chi_square.critical_value,
            r.mean_ops_per_sample,
            verdict(r),
        );
    }
    out
}

pub fn render_csv(reports: &[ExperimentReport]) -> String {
    let mut out = String::from(
        "group,order,algorithm,t,samples,seed,precompute_ops,sample_ops,mean_ops_per_sample,classes,df,chi2,critical,accepted,critical_01,accepted_01\n",
    );
    for r in reports {
        let c = &r.chi_square;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{:.4},{},{},{:.6},{:.6},{},{:.6},{}",
            r.group,
            order_text(r),
            r.algorithm.name(),
            r.t,
            r.samples,
            r.seed,
            r.precompute_ops.total(),
            r.sample_ops.total(),
            r.mean_ops_per_sample,
            r.classes,
            c.degrees_of_freedom,
            c.statistic,
            c.critical_value,
            c.accepted,
            c.critical_value_01,
            c.accepted_01,
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::builtin::builtin;

    fn run(name: &str, algo: Algorithm, t: usize, samples: usize, seed: u64) -> Result<ExperimentReport> {
        let (g, s) = builtin(name).unwrap();
        run_experiment(&g, &s, &ExperimentSpec::for_builtin(name, algo, t, samples, seed).unwrap())
    }

    #[test]
    fn algorithm_names_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(a.name().parse::<Algorithm>().unwrap(), a);
        }
        assert!("cube".parse::<Algorithm>().is_err());
    }

    #[test]
    fn zero_samples_is_degenerate() {
        assert!(matches!(run("S4", Algorithm::Fibcube, 20, 0, 1), Err(Error::Degenerate(_))));
    }

    #[test]
    fn groups_without_class_sizes_need_a_table() {
        let err = run("Q8", Algorithm::Fibcube, 20, 100, 1).unwrap_err();
        assert!(err.to_string().contains("expected-count file"));
        let (g, s) = builtin("D8").unwrap();
        let spec = ExperimentSpec { partition: PartitionSource::Enumerated, ..ExperimentSpec::new("D8", Algorithm::Fibcube, 20, 10, 1) };
        assert!(run_experiment(&g, &s, &spec).is_err());
    }

    #[test]
    fn s5_runs_for_every_algorithm() {
        for a in Algorithm::ALL {
            let r = run("S5", a, 20, 2000, 3).unwrap();
            assert_eq!(r.chi_square.observed.iter().sum::<u64>(), 2000);
            assert_eq!(r.classes, 7);
            if a != Algorithm::PrVariant {
                assert!(r.chi_square.accepted_01, "{a:?}: {}", r.chi_square.statistic);
            }
            if a == Algorithm::Fibcube {
                assert!(r.precompute_ops.total() > 0);
            }
        }
    }

    #[test]
    fn enumerated_partition_matches_analytic_verdict() {
        let (g, s) = builtin("A5").unwrap();
        let base = ExperimentSpec::for_builtin("A5", Algorithm::Fibcube, 20, 1000, 9).unwrap();
        let a = run_experiment(&g, &s, &base).unwrap();
        let (g, s) = builtin("A5").unwrap();
        let e = run_experiment(&g, &s, &ExperimentSpec { partition: PartitionSource::Enumerated, ..base }).unwrap();
        assert!((a.chi_square.statistic - e.chi_square.statistic).abs() < 1e-9);
    }

    #[test]
    fn rendering() {
        let r = run("S4", Algorithm::Fibcube, 20, 500, 5).unwrap();
        let table = render_table(std::slice::from_ref(&r));
        assert_eq!(table.lines().count(), 2);
        assert!(table.contains("20/"));
        let csv = render_csv(&[r.clone(), r]);
        assert_eq!(csv.lines().count(), 3);
        assert!(csv.lines().nth(1).unwrap().starts_with("S4,24,fibcube,20,500,5,"));
    }

    #[test]
    fn reruns_are_identical() {
        let a = run("S5", Algorithm::FibcubeBoost, 20, 200, 4).unwrap();
        let b = run("S5", Algorithm::FibcubeBoost, 20, 200, 4).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }
}
