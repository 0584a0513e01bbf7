//! Policy × problem benchmark grids, shifted geometric means and speedup ratios.
//!
//! Records are written as CSV and summaries as JSON; both carry `schema_version`.
//! Wall-clock time is only recorded on request so that default output is reproducible
//! byte for byte.

use std::collections::{BTreeMap, HashMap};
use std::io::Write;
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::policy::RhoPolicy;
use crate::problems::{generate, GeneratorSpec, ProblemClass, ProblemError};
use crate::solver::{QpProblem, Solver, SolverError, SolverSettings, Status};

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_SHIFT: f64 = 10.0;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("shifted geometric mean of an empty sequence")]
    Empty,
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("thread pool: {0}")]
    Pool(String),
}

/// `exp(Σᵢ log(max(1, vᵢ + s)) / N) − s`.
pub fn shifted_geomean(values: &[f64], shift: f64) -> Result<f64, BenchError> {
    if values.is_empty() {
        return Err(BenchError::Empty);
    }
    let n = values.len() as f64;
    let mean_log: f64 = values.iter().map(|&v| (v + shift).max(1.0).ln() / n).sum();
    Ok(mean_log.exp() - shift)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub schema_version: u32,
    pub problem: String,
    pub class: String,
    pub n: usize,
    pub m: usize,
    pub nnz: usize,
    pub policy: String,
    pub repeat: usize,
    pub seed: u64,
    pub status: Status,
    pub iterations: usize,
    /// Seconds; empty unless timing was requested.
    pub solve_time: Option<f64>,
    pub adapt_count: usize,
}

/// One row of the grid.
#[derive(Debug, Clone)]
pub enum BenchCase {
    /// A fresh instance per repeat, seeded `base_seed + repeat`.
    Generated { class: ProblemClass, dim: usize },
    /// The same problem for every repeat.
    Fixed { class: String, problem: Arc<QpProblem<f64>> },
}

#[derive(Clone)]
pub struct NamedPolicy {
    pub name: String,
    pub policy: Arc<dyn RhoPolicy<f64>>,
}

impl NamedPolicy {
    pub fn new(name: impl Into<String>, policy: Arc<dyn RhoPolicy<f64>>) -> Self {
        Self { name: name.into(), policy }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridOptions {
    pub repeats: usize,
    pub base_seed: u64,
    /// Worker threads; results are ordered by (case, policy, repeat) regardless.
    pub jobs: usize,
    pub record_time: bool,
}

impl Default for GridOptions {
    fn default() -> Self {
        Self { repeats: 1, base_seed: 0, jobs: 1, record_time: false }
    }
}

fn run_cell(
    case: &BenchCase,
    policy: &NamedPolicy,
    settings: &SolverSettings<f64>,
    repeat: usize,
    options: &GridOptions,
) -> Result<BenchRecord, BenchError> {
    let seed = options.base_seed + repeat as u64;
    let (problem, class) = match case {
        BenchCase::Generated { class, dim } => {
            (Arc::new(generate(&GeneratorSpec::new(*class, *dim, seed))?.problem), class.to_string())
        }
        BenchCase::Fixed { class, problem } => (problem.clone(), class.clone()),
    };
    let start = Instant::now();
    let mut solver = Solver::new((*problem).clone(), settings.clone())?;
    let result = solver.solve(policy.policy.as_ref());
    let elapsed = start.elapsed().as_secs_f64();
    Ok(BenchRecord {
        schema_version: SCHEMA_VERSION,
        problem: problem.name.clone(),
        class,
        n: problem.n(),
        m: problem.m(),
        nnz: problem.nnz(),
        policy: policy.name.clone(),
        repeat,
        seed,
        status: result.status,
        iterations: result.iterations,
        solve_time: options.record_time.then_some(elapsed),
        adapt_count: result.adapt_count,
    })
}

/// Runs every (case, policy, repeat) cell.
pub fn run_grid(
    cases: &[BenchCase],
    policies: &[NamedPolicy],
    settings: &SolverSettings<f64>,
    options: &GridOptions,
) -> Result<Vec<BenchRecord>, BenchError> {
    let mut cells = Vec::with_capacity(cases.len() * policies.len() * options.repeats);
    for case in cases {
        for policy in policies {
            for repeat in 0..options.repeats {
                cells.push((case, policy, repeat));
            }
        }
    }
    if options.jobs <= 1 {
        return cells.into_iter().map(|(c, p, r)| run_cell(c, p, settings, r, options)).collect();
    }
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.jobs)
        .build()
        .map_err(|e| BenchError::Pool(e.to_string()))?;
    pool.install(|| cells.into_par_iter().map(|(c, p, r)| run_cell(c, p, settings, r, options)).collect())
}

pub fn write_csv<W: Write>(records: &[BenchRecord], w: W) -> Result<(), BenchError> {
    let mut writer = csv::Writer::from_writer(w);
    for r in records {
        writer.serialize(r)?;
    }
    writer.flush()?;
    Ok(())
}

pub fn read_csv<R: std::io::Read>(r: R) -> Result<Vec<BenchRecord>, BenchError> {
    let mut reader = csv::Reader::from_reader(r);
    Ok(reader.deserialize().collect::<Result<_, _>>()?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicySummary {
    pub policy: String,
    pub runs: usize,
    pub solved: usize,
    /// Over this policy's solved runs.
    pub geomean_iterations: Option<f64>,
    pub geomean_time: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchSummary {
    pub schema_version: u32,
    pub shift: f64,
    pub policies: Vec<PolicySummary>,
    /// `iteration_ratio[r][c]` = geomean iterations of policy `r` over geomean of policy
    /// `c`, both taken over the runs solved by both. Values above 1 mean `c` is faster.
    pub iteration_ratio: Vec<Vec<Option<f64>>>,
    pub time_ratio: Vec<Vec<Option<f64>>>,
    pub mutually_solved: Vec<Vec<usize>>,
}

fn ratio_over_common(
    a: &HashMap<(String, usize), &BenchRecord>,
    b: &HashMap<(String, usize), &BenchRecord>,
    metric: impl Fn(&BenchRecord) -> Option<f64>,
) -> (Option<f64>, usize) {
    let mut keys: Vec<_> = a.keys().filter(|k| b.contains_key(*k)).collect();
    keys.sort();
    let pairs: Option<Vec<(f64, f64)>> = keys.iter().map(|k| Some((metric(a[*k])?, metric(b[*k])?))).collect();
    let count = keys.len();
    let Some(pairs) = pairs.filter(|p| !p.is_empty()) else {
        return (None, count);
    };
    let (va, vb): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    let ga = shifted_geomean(&va, DEFAULT_SHIFT).expect("nonempty");
    let gb = shifted_geomean(&vb, DEFAULT_SHIFT).expect("nonempty");
    (Some(ga / gb), count)
}

/// Policies appear in order of first occurrence in `records`.
pub fn summarize(records: &[BenchRecord]) -> BenchSummary {
    let mut order: Vec<String> = Vec::new();
    let mut by_policy: BTreeMap<String, Vec<&BenchRecord>> = BTreeMap::new();
    for r in records {
        if !by_policy.contains_key(&r.policy) {
            order.push(r.policy.clone());
        }
        by_policy.entry(r.policy.clone()).or_default().push(r);
    }

    let policies = order
        .iter()
        .map(|name| {
            let runs = &by_policy[name];
            let solved: Vec<&&BenchRecord> = runs.iter().filter(|r| r.status == Status::Solved).collect();
            let iters: Vec<f64> = solved.iter().map(|r| r.iterations as f64).collect();
            let times: Option<Vec<f64>> = solved.iter().map(|r| r.solve_time).collect();
            PolicySummary {
                policy: name.clone(),
                runs: runs.len(),
                solved: solved.len(),
                geomean_iterations: shifted_geomean(&iters, DEFAULT_SHIFT).ok(),
                geomean_time: times.and_then(|t| shifted_geomean(&t, DEFAULT_SHIFT).ok()),
            }
        })
        .collect();

    let solved_maps: Vec<HashMap<(String, usize), &BenchRecord>> = order
        .iter()
        .map(|name| {
            by_policy[name]
                .iter()
                .filter(|r| r.status == Status::Solved)
                .map(|r| ((r.problem.clone(), r.repeat), *r))
                .collect()
        })
        .collect();

    let k = order.len();
    let mut iteration_ratio = vec![vec![None; k]; k];
    let mut time_ratio = vec![vec![None; k]; k];
    let mut mutually_solved = vec![vec![0; k]; k];
    for r in 0..k {
        for c in 0..k {
            let (ir, count) = ratio_over_common(&solved_maps[r], &solved_maps[c], |x| Some(x.iterations as f64));
            let (tr, _) = ratio_over_common(&solved_maps[r], &solved_maps[c], |x| x.solve_time);
            iteration_ratio[r][c] = ir;
            time_ratio[r][c] = tr;
            mutually_solved[r][c] = count;
        }
    }

    BenchSummary { schema_version: SCHEMA_VERSION, shift: DEFAULT_SHIFT, policies, iteration_ratio, time_ratio, mutually_solved }
}
