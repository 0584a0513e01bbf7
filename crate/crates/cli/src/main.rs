use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use rlqp::bench::{run_grid, summarize, write_csv, BenchCase, GridOptions, NamedPolicy};
use rlqp::nn::save_weights;
use rlqp::policy::parse_policy;
use rlqp::problems::{generate, schedule_default, GeneratorSpec, ProblemClass};
use rlqp::qps::{parse_qps, write_qps};
use rlqp::rl::{train, EnvMode, Td3Config, TrainSpec};
use rlqp::{QpProblem, SolverSettings, Status};

#[derive(Parser)]
#[command(name = "rlqp", version, about = "ADMM QP solver with learned step-size policies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one QP from a QPS file or a generator spec.
    Solve(SolveArgs),
    /// Train a scalar or vector ρ policy with TD3.
    Train(TrainArgs),
    /// Run a benchmark grid and write per-run CSV plus a JSON summary.
    Bench(BenchArgs),
    /// Write a generated problem as QPS, or check that a QPS file loads.
    Convert(ConvertArgs),
}

#[derive(Args)]
struct SolveArgs {
    /// QPS file to solve.
    #[arg(required_unless_present = "gen", conflicts_with = "gen")]
    file: Option<PathBuf>,
    /// Generator spec `class:dim:seed`.
    #[arg(long)]
    gen: Option<String>,
    /// fixed, heuristic, scalar:<weights> or vector:<weights>.
    #[arg(long, default_value = "heuristic")]
    policy: String,
    /// JSON file with `x` and `y` arrays.
    #[arg(long)]
    warm_start: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-3)]
    eps: f64,
    #[arg(long, default_value_t = 200_000)]
    max_iter: usize,
    #[arg(long, default_value_t = 100)]
    adapt_interval: usize,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long, default_value = "vector")]
    mode: String,
    #[arg(long, default_value = "random")]
    class: String,
    /// Inclusive size range `lo..hi`.
    #[arg(long, default_value = "10..50")]
    dims: String,
    #[arg(long, default_value_t = 10)]
    epochs: usize,
    #[arg(long, default_value = "desk")]
    preset: String,
    #[arg(long, env = "RLQP_SEED", default_value_t = 0)]
    seed: u64,
    /// Actor weights are written here.
    #[arg(long)]
    out: PathBuf,
    /// One JSON line per epoch.
    #[arg(long)]
    log: Option<PathBuf>,
    #[arg(long)]
    rollout_workers: Option<usize>,
    /// Override the preset's env steps per epoch.
    #[arg(long)]
    steps_per_epoch: Option<usize>,
    /// Override the preset's validation problem count.
    #[arg(long)]
    test_episodes: Option<usize>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_value = "random,eq")]
    classes: Vec<String>,
    /// Problem sizes; defaults to each class's schedule.
    #[arg(long, value_delimiter = ',')]
    dims: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "fixed,heuristic")]
    policies: Vec<String>,
    #[arg(long, default_value_t = 10)]
    repeats: usize,
    #[arg(long, env = "RLQP_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    summary: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Fill the solve_time column; makes the CSV machine-dependent.
    #[arg(long)]
    record_time: bool,
    #[arg(long, default_value_t = 200_000)]
    max_iter: usize,
}

#[derive(Args)]
struct ConvertArgs {
    #[arg(long, conflicts_with = "check", requires = "out")]
    gen: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Parse and validate a QPS file, printing its size.
    #[arg(long, required_unless_present = "gen")]
    check: Option<PathBuf>,
}

#[derive(Deserialize)]
struct WarmStart {
    x: Vec<f64>,
    y: Vec<f64>,
}

fn load_qps(path: &Path) -> Result<QpProblem> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let doc = parse_qps(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok(doc.to_qp()?)
}

fn generated(spec: &str) -> Result<QpProblem> {
    Ok(generate(&GeneratorSpec::parse(spec)?)?.problem)
}

fn parse_dims(text: &str) -> Result<(usize, usize)> {
    let Some((lo, hi)) = text.split_once("..") else {
        bail!("dimension range must look like 10..50, got {text:?}");
    };
    Ok((lo.trim().parse()?, hi.trim().parse()?))
}

fn cmd_solve(args: SolveArgs) -> Result<ExitCode> {
    let problem = match (&args.file, &args.gen) {
        (Some(path), _) => load_qps(path)?,
        (None, Some(spec)) => generated(spec)?,
        (None, None) => unreachable!("clap requires one of file or --gen"),
    };
    let settings = SolverSettings {
        eps_abs: args.eps,
        eps_rel: args.eps,
        max_iter: args.max_iter,
        adapt_interval: args.adapt_interval,
        ..Default::default()
    };
    settings.validate()?;
    let policy = parse_policy(&args.policy)?;
    let warm = match &args.warm_start {
        Some(path) => {
            let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
            Some(serde_json::from_reader::<_, WarmStart>(file)?)
        }
        None => None,
    };
    let start = Instant::now();
    let result = rlqp::solver::solve(&problem, &settings, policy.as_ref(), warm.as_ref().map(|w| (&w.x[..], &w.y[..])))?;
    let elapsed = start.elapsed().as_secs_f64();
    println!("problem     {} (n={}, m={}, nnz={})", problem.name, problem.n(), problem.m(), problem.nnz());
    println!("policy      {}", policy.name());
    println!("status      {}", result.status);
    println!("iterations  {}", result.iterations);
    println!("time        {elapsed:.6} s");
    println!("objective   {:.10e}", result.objective);
    if let Some(msg) = &result.diagnostic {
        println!("diagnostic  {msg}");
    }
    Ok(if result.status == Status::Solved { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

fn cmd_train(args: TrainArgs) -> Result<ExitCode> {
    let mut config = Td3Config::preset(&args.preset)?;
    if let Some(w) = args.rollout_workers {
        config.rollout_workers = w;
    }
    if let Some(s) = args.steps_per_epoch {
        config.steps_per_epoch = s;
    }
    if let Some(t) = args.test_episodes {
        config.test_episodes = t;
    }
    let spec = TrainSpec {
        mode: args.mode.parse::<EnvMode>()?,
        class: args.class.parse::<ProblemClass>()?,
        dims: parse_dims(&args.dims)?,
        epochs: args.epochs,
        seed: args.seed,
        objective_scale: None,
        settings: SolverSettings::default(),
        config,
    };
    spec.validate()?;
    let mut log = match &args.log {
        Some(path) => Some(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?)),
        None => None,
    };
    let mut write_err = None;
    let outcome = train(&spec, &mut |entry| {
        println!(
            "epoch {:>4}  steps {:>8}  train len {:>6.2}  test len {:>6.2}  test iters {:>8.1}",
            entry.epoch, entry.total_steps, entry.train_ep_len_avg, entry.test_ep_len_avg, entry.test_iters_geomean
        );
        if let Some(w) = log.as_mut() {
            let line = serde_json::to_string(entry).expect("epoch log serializes");
            if let Err(e) = writeln!(w, "{line}").and_then(|_| w.flush()) {
                write_err.get_or_insert(e);
            }
        }
    })?;
    if let Some(e) = write_err {
        return Err(e).context("writing training log");
    }
    save_weights(&outcome.best_actor, &args.out)?;
    println!("weights from epoch {} written to {}", outcome.best_epoch, args.out.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_bench(args: BenchArgs) -> Result<ExitCode> {
    let mut cases = Vec::new();
    for name in &args.classes {
        let class: ProblemClass = name.parse()?;
        let dims = if args.dims.is_empty() { schedule_default(class).dims().to_vec() } else { args.dims.clone() };
        cases.extend(dims.into_iter().map(|dim| BenchCase::Generated { class, dim }));
    }
    let policies = args
        .policies
        .iter()
        .map(|p| Ok(NamedPolicy::new(p.clone(), Arc::from(parse_policy(p)?))))
        .collect::<Result<Vec<_>>>()?;
    let settings = SolverSettings { max_iter: args.max_iter, ..Default::default() };
    let options = GridOptions { repeats: args.repeats, base_seed: args.seed, jobs: args.jobs, record_time: args.record_time };
    let records = run_grid(&cases, &policies, &settings, &options)?;
    write_csv(&records, BufWriter::new(File::create(&args.out)?))?;
    let summary = summarize(&records);
    for p in &summary.policies {
        let g = p.geomean_iterations.map_or("-".to_string(), |g| format!("{g:.1}"));
        println!("{:<24} solved {:>5}/{:<5} geomean iterations {g}", p.policy, p.solved, p.runs);
    }
    if let Some(path) = &args.summary {
        serde_json::to_writer_pretty(BufWriter::new(File::create(path)?), &summary)?;
    }
    println!("{} runs written to {}", records.len(), args.out.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_convert(args: ConvertArgs) -> Result<ExitCode> {
    if let Some(path) = &args.check {
        let problem = load_qps(path)?;
        problem.validate()?;
        println!("{}: n={} m={} nnz={}", problem.name, problem.n(), problem.m(), problem.nnz());
        return Ok(ExitCode::SUCCESS);
    }
    let (Some(spec), Some(out)) = (&args.gen, &args.out) else {
        unreachable!("clap requires --gen with --out");
    };
    let problem = generated(spec)?;
    std::fs::write(out, write_qps(&problem)).with_context(|| format!("writing {}", out.display()))?;
    println!("wrote {} (n={} m={})", out.display(), problem.n(), problem.m());
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Train(a) => cmd_train(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Convert(a) => cmd_convert(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
