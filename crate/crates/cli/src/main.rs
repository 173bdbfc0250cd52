use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use fibcube::cube::{CubeFile, CubeParams, FibonacciCube, PipelineDescriptor};
use fibcube::group::builtin::{builtin, family};
use fibcube::group::{read_group_file, BlackBoxGroup, GeneratingSet, OpCount};
use fibcube::oracle::verify::{run_verify, VerifyOptions, DEFAULT_SUITE};
use fibcube::random::RandomSource;
use fibcube::stats::{
    draw_samples, render_csv, render_table, run_experiment, Algorithm, ExperimentSpec, Partition, PartitionSource,
    MCL_APPENDIX,
};
use fibcube::Error;

#[derive(Parser)]
#[command(name = "fibcube", version, about = "Random elements of black box groups via the Fibonacci cube")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw elements and print them with an op-count footer.
    Sample(SampleArgs),
    /// Chi-square test of a sampler against class sizes.
    Experiment(ExperimentArgs),
    /// Run the exact-distribution invariant battery.
    Verify(VerifyArgs),
    /// Build a cube and save it.
    Build(BuildArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Table,
    Json,
    Csv,
}

#[derive(Args)]
struct GroupArgs {
    /// Builtin name (S7, A15, SL2_3, ...) or a generator file.
    #[arg(long)]
    group: String,
    /// Group order, for generator files.
    #[arg(long)]
    order: Option<u128>,
}

#[derive(Args)]
struct SamplerArgs {
    /// fibcube, fibcube+boost, pr-classic or pr-variant.
    #[arg(long, default_value = "fibcube", value_parser = parse_algo)]
    algo: Algorithm,
    /// Cube length; defaults from the group order.
    #[arg(long)]
    t: Option<usize>,
    /// Case weights a,b,c.
    #[arg(long, default_value = "1,1,1")]
    abc: String,
    /// Product-replacement slots.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    #[arg(long, default_value_t = 200)]
    burn_in: usize,
    /// Product-replacement variant steps.
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args)]
struct SampleArgs {
    #[command(flatten)]
    group: GroupArgs,
    #[command(flatten)]
    sampler: SamplerArgs,
    #[arg(long, default_value_t = 10)]
    n: usize,
    /// Sample from a saved cube instead of building one.
    #[arg(long)]
    cube: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "table")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    #[command(flatten)]
    group: GroupArgs,
    #[command(flatten)]
    sampler: SamplerArgs,
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    /// Runs with consecutive seeds.
    #[arg(long, default_value_t = 1)]
    runs: u64,
    /// Expected-count table, or `mcl` for the bundled McLaughlin table.
    #[arg(long)]
    partition: Option<String>,
    /// Expected counts by enumerating the group.
    #[arg(long, conflicts_with = "partition")]
    enumerate: bool,
    #[arg(long, value_enum, default_value = "table")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Groups to check; defaults to the builtin suite.
    #[arg(long)]
    group: Vec<String>,
    /// Invariants to run, comma separated.
    #[arg(long, value_delimiter = ',')]
    only: Vec<String>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Repetitions per group and invariant.
    #[arg(long, default_value_t = 3)]
    seeds: u64,
    #[arg(long)]
    t: Option<usize>,
    #[arg(long, value_enum, default_value = "table")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, hide = true)]
    inject_fault: bool,
}

#[derive(Args)]
struct BuildArgs {
    #[command(flatten)]
    group: GroupArgs,
    #[arg(long)]
    t: Option<usize>,
    #[arg(long, default_value = "1,1,1")]
    abc: String,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

enum Failure {
    Input(String),
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

struct Loaded {
    label: String,
    group: BlackBoxGroup,
    gens: GeneratingSet,
    spec: ExperimentSpec,
}

fn load_group(args: &GroupArgs) -> Result<Loaded, Failure> {
    let path = Path::new(&args.group);
    let looks_like_file = path.exists() || args.group.contains(['.', '/']);
    let base = |label: &str| ExperimentSpec::new(label, Algorithm::Fibcube, 0, 0, 0);
    if looks_like_file {
        let (group, gens) = read_group_file(path)?;
        let label = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let spec = ExperimentSpec { order: args.order, ..base(&label) };
        Ok(Loaded { label, group, gens, spec })
    } else {
        let f = family(&args.group)?;
        let (group, gens) = builtin(&args.group)?;
        let spec = ExperimentSpec { order: Some(f.order()), family: Some(f), ..base(&args.group) };
        Ok(Loaded { label: args.group.clone(), group, gens, spec })
    }
}

fn parse_algo(s: &str) -> Result<Algorithm, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_abc(text: &str) -> Result<(f64, f64, f64), Failure> {
    let v: Vec<f64> = text
        .split(',')
        .map(|x| x.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| Failure::Input(format!("--abc expects three numbers, got {text:?}")))?;
    match v[..] {
        [a, b, c] => Ok((a, b, c)),
        _ => Err(Failure::Input(format!("--abc expects three numbers, got {text:?}"))),
    }
}

fn cube_params(t: Option<usize>, abc: &str, loaded: &Loaded) -> Result<CubeParams, Failure> {
    let (a, b, c) = parse_abc(abc)?;
    let t = t.unwrap_or_else(|| CubeParams::default_terms(loaded.spec.order, loaded.group.encoding_bits()));
    let p = CubeParams { a, b, c, ..CubeParams::new(t) };
    p.validate()?;
    Ok(p)
}

fn apply_sampler(loaded: &Loaded, s: &SamplerArgs, samples: usize) -> Result<ExperimentSpec, Failure> {
    Ok(ExperimentSpec {
        algorithm: s.algo,
        cube: cube_params(s.t, &s.abc, loaded)?,
        k: s.k,
        epsilon: s.epsilon,
        samples,
        seed: s.seed,
        burn_in: s.burn_in,
        steps: s.steps,
        ..loaded.spec.clone()
    })
}

fn emit(out: &Option<PathBuf>, text: &str) -> Outcome {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Input(format!("{}: {e}", p.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(|e| Failure::Input(e.to_string()))
        }
    }
}

fn mean(ops: OpCount, n: usize) -> f64 {
    if n == 0 {
        0.0
    } else {
        ops.total() as f64 / n as f64
    }
}

fn cmd_sample(args: SampleArgs) -> Outcome {
    let loaded = load_group(&args.group)?;
    let spec = apply_sampler(&loaded, &args.sampler, args.n)?;
    let group = &loaded.group;
    let mut elements = Vec::new();
    let (pre, ops) = match &args.cube {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
            let file: CubeFile = serde_json::from_str(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
            let cube = FibonacciCube::from_file(&file)?;
            let counter = cube.group().counter();
            let before = counter.snapshot();
            let mut src = RandomSource::new(spec.seed, "experiment").derive("sample");
            for _ in 0..spec.samples {
                elements.push(cube.group().format_element(&cube.sample_pair(&mut src)));
            }
            (file.build_ops, counter.snapshot().since(&before))
        }
        None => draw_samples(group, &loaded.gens, &spec, |g| {
            elements.push(group.format_element(&g));
            Ok(())
        })?,
    };
    let text = match args.format {
        Format::Json => {
            let v = json!({
                "group": loaded.label,
                "algorithm": spec.algorithm.name(),
                "seed": spec.seed,
                "elements": elements,
                "precompute_ops": pre,
                "sample_ops": ops,
                "mean_ops_per_sample": mean(ops, spec.samples),
            });
            format!("{}\n", serde_json::to_string_pretty(&v).expect("json"))
        }
        Format::Csv => {
            let mut s = String::from("index,element\n");
            for (i, e) in elements.iter().enumerate() {
                s.push_str(&format!("{i},\"{e}\"\n"));
            }
            s
        }
        Format::Table => {
            let mut s: String = elements.iter().map(|e| format!("{e}\n")).collect();
            s.push_str(&format!(
                "# {} samples, precompute ops {}, mean ops/sample {:.2}\n",
                spec.samples,
                pre.total(),
                mean(ops, spec.samples)
            ));
            s
        }
    };
    emit(&args.out, &text)
}

fn cmd_experiment(args: ExperimentArgs) -> Outcome {
    let loaded = load_group(&args.group)?;
    let mut spec = apply_sampler(&loaded, &args.sampler, args.samples)?;
    spec.partition = match (&args.partition, args.enumerate) {
        (Some(p), _) if p == "mcl" => PartitionSource::Table(Partition::parse_table(MCL_APPENDIX)?),
        (Some(p), _) => {
            let text = fs::read_to_string(p).map_err(|e| Failure::Input(format!("{p}: {e}")))?;
            PartitionSource::Table(Partition::parse_table(&text)?)
        }
        (None, true) => PartitionSource::Enumerated,
        (None, false) => PartitionSource::Analytic,
    };
    let mut reports = Vec::new();
    for r in 0..args.runs.max(1) {
        let run = ExperimentSpec { seed: spec.seed + r, ..spec.clone() };
        reports.push(run_experiment(&loaded.group, &loaded.gens, &run)?);
    }
    let text = match args.format {
        Format::Table => render_table(&reports),
        Format::Csv => render_csv(&reports),
        Format::Json => format!("{}\n", serde_json::to_string_pretty(&reports).expect("json")),
    };
    emit(&args.out, &text)?;
    let rejected = reports.iter().filter(|r| !r.chi_square.accepted).count();
    if rejected > 0 {
        return Err(Failure::Check(format!("{rejected} of {} runs rejected at {}", reports.len(), spec.significance)));
    }
    Ok(())
}

fn cmd_verify(args: VerifyArgs) -> Outcome {
    let names: Vec<String> =
        if args.group.is_empty() { DEFAULT_SUITE.iter().map(|s| s.to_string()).collect() } else { args.group.clone() };
    let mut groups = Vec::new();
    for name in names {
        let loaded = load_group(&GroupArgs { group: name, order: None })?;
        groups.push((loaded.label, loaded.group, loaded.gens));
    }
    let opts = VerifyOptions { only: args.only, seed: args.seed, seeds: args.seeds, t: args.t, inject_fault: args.inject_fault };
    let report = run_verify(&groups, &opts)?;
    let text = match args.format {
        Format::Json => format!("{}\n", serde_json::to_string_pretty(&report).expect("json")),
        Format::Csv => {
            let mut s = String::from("invariant,group,checks,failures\n");
            for o in &report.outcomes {
                s.push_str(&format!("{},{},{},{}\n", o.invariant, o.group, o.checks, o.failures));
            }
            s
        }
        Format::Table => {
            let mut s = format!("{:<20} {:<8} {:>8} {:>8}\n", "invariant", "group", "checks", "failures");
            for o in &report.outcomes {
                s.push_str(&format!("{:<20} {:<8} {:>8} {:>8}\n", o.invariant, o.group, o.checks, o.failures));
                if let Some(w) = &o.witness {
                    s.push_str(&format!("  witness: {w}\n"));
                }
            }
            let passed = report.outcomes.iter().filter(|o| o.failures == 0).count();
            s.push_str(&format!("{passed}/{} passed\n", report.outcomes.len()));
            s
        }
    };
    emit(&args.out, &text)?;
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Check("invariant failures".into()))
    }
}

fn cmd_build(args: BuildArgs) -> Outcome {
    let loaded = load_group(&args.group)?;
    let params = cube_params(args.t, &args.abc, &loaded)?;
    let mut cube = FibonacciCube::new(loaded.group.clone(), loaded.gens.clone(), params)?;
    cube.build(&mut RandomSource::new(args.seed, "experiment").derive("cube"))?;
    let file = cube.to_file(PipelineDescriptor {
        stages: vec!["fibcube".into()],
        seed: args.seed,
        labels: vec!["experiment/cube".into()],
    });
    let text = serde_json::to_string_pretty(&file).expect("json");
    fs::write(&args.out, text + "\n").map_err(|e| Failure::Input(format!("{}: {e}", args.out.display())))?;
    println!("{} terms, {} precompute ops -> {}", cube.len(), cube.build_ops().total(), args.out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Sample(a) => cmd_sample(a),
        Command::Experiment(a) => cmd_experiment(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Build(a) => cmd_build(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(msg)) => {
            eprintln!("fibcube: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("fibcube: {msg}");
            ExitCode::from(2)
        }
    }
}
