//! Benchmark orchestration and evaluation metrics: nondominated filtering,
//! purity, spacing and Dolan–Moré performance profiles.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::directions::GammaRule;
use crate::mo_core::{dominates_unchecked, Problem};
use crate::problems::{sample_starts, scale, TestProblem};
use crate::solver::{solve, Method, SolverConfig, SolverTrace, TerminalStatus};

/// Tolerance (∞-norm) under which two objective vectors count as the same
/// front member.
pub const DEFAULT_MATCH_TOL: f64 = 1e-8;

/// A solver configuration under a display label such as `MMG-I1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverEntry {
    pub label: String,
    #[serde(default)]
    pub config: SolverConfig,
}

impl SolverEntry {
    pub fn new(label: impl Into<String>, config: SolverConfig) -> Self {
        Self {
            label: label.into(),
            config,
        }
    }
}

/// The six solvers compared in the benchmark: two memory gradient variants
/// and four baselines, all with unit-start Armijo backtracking.
pub fn default_solvers() -> Vec<SolverEntry> {
    let mut out = vec![mmg_i1(), mmg_i2()];
    for m in [Method::Sd, Method::Fr, Method::Cd, Method::Hs] {
        out.push(SolverEntry::new(m.as_str(), bench_config(m)));
    }
    out
}

/// Memory gradient with `γ = 1` and five stored directions.
pub fn mmg_i1() -> SolverEntry {
    let mut cfg = bench_config(Method::MmgI);
    cfg.mmg.memory = 5;
    cfg.mmg.gamma_rule = GammaRule::Constant;
    SolverEntry::new("MMG-I1", cfg)
}

/// Memory gradient with the spectral `γ` rule and three stored directions.
pub fn mmg_i2() -> SolverEntry {
    let mut cfg = bench_config(Method::MmgI);
    cfg.mmg.memory = 3;
    cfg.mmg.gamma_rule = GammaRule::Bb;
    SolverEntry::new("MMG-I2", cfg)
}

fn bench_config(method: Method) -> SolverConfig {
    SolverConfig {
        record_vectors: false,
        ..SolverConfig::with_method(method)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub problem: String,
    pub method: String,
    pub start: usize,
    pub seed: u64,
    pub status: TerminalStatus,
    pub iters: usize,
    pub f_evals: usize,
    pub jac_evals: usize,
    /// `θ` of the scaled problem at the last iterate.
    pub theta: f64,
    pub walltime_ms: f64,
    /// Unscaled objective values at the last iterate.
    pub f_terminal: Vec<f64>,
}

impl RunRecord {
    pub fn solved(&self) -> bool {
        self.status == TerminalStatus::Critical
    }
}

/// Runs one solver from one start on the problem scaled at that start.
/// Returns the trace alongside the record (`None` if scaling failed).
pub fn run_one(
    problem: &TestProblem,
    entry: &SolverEntry,
    start: usize,
    x0: &[f64],
    seed: u64,
) -> (RunRecord, Option<SolverTrace>) {
    let clock = Instant::now();
    let mut record = RunRecord {
        problem: problem.name().to_string(),
        method: entry.label.clone(),
        start,
        seed,
        status: TerminalStatus::EvalError,
        iters: 0,
        f_evals: 0,
        jac_evals: 0,
        theta: f64::NAN,
        walltime_ms: 0.0,
        f_terminal: Vec::new(),
    };
    let scaled = match scale(problem, x0) {
        Ok(s) => s,
        Err(e) => {
            log::warn!("{} start {start}: {e}", problem.name());
            record.jac_evals = 1;
            record.walltime_ms = clock.elapsed().as_secs_f64() * 1e3;
            return (record, None);
        }
    };
    let trace = match solve(&scaled, x0, &entry.config) {
        Ok(t) => t,
        Err(e) => {
            log::warn!("{} / {}: {e}", problem.name(), entry.label);
            record.walltime_ms = clock.elapsed().as_secs_f64() * 1e3;
            return (record, None);
        }
    };
    record.status = trace.status;
    record.iters = trace.iterations;
    record.f_evals = trace.f_evals;
    // the scaling itself costs one Jacobian at x⁰
    record.jac_evals = trace.jac_evals + 1;
    record.theta = trace.final_theta;
    record.f_terminal = trace
        .final_f
        .iter()
        .zip(scaled.factors())
        .map(|(f, r)| f / r)
        .collect();
    record.walltime_ms = clock.elapsed().as_secs_f64() * 1e3;
    (record, Some(trace))
}

struct Job<'a> {
    problem: &'a TestProblem,
    entry: &'a SolverEntry,
    start: usize,
    x0: &'a [f64],
}

fn jobs<'a>(
    suite: &'a [TestProblem],
    solvers: &'a [SolverEntry],
    starts: &'a [Vec<Vec<f64>>],
) -> Vec<Job<'a>> {
    let mut out = Vec::new();
    for (problem, xs) in suite.iter().zip(starts) {
        for entry in solvers {
            for (start, x0) in xs.iter().enumerate() {
                out.push(Job {
                    problem,
                    entry,
                    start,
                    x0,
                });
            }
        }
    }
    out
}

/// Every `(problem, solver, start)` triple, on the current rayon pool.
/// Starts are drawn once per problem and shared by all solvers; the output
/// order is problem, solver, start regardless of scheduling.
pub fn run_experiment(
    suite: &[TestProblem],
    solvers: &[SolverEntry],
    starts_per_problem: usize,
    seed: u64,
) -> Vec<RunRecord> {
    run_experiment_with(suite, solvers, starts_per_problem, seed, |_, _| {})
}

/// [`run_experiment`] that also hands every finished trace to `inspect`.
pub fn run_experiment_with<F>(
    suite: &[TestProblem],
    solvers: &[SolverEntry],
    starts_per_problem: usize,
    seed: u64,
    inspect: F,
) -> Vec<RunRecord>
where
    F: Fn(&RunRecord, &SolverTrace) + Sync,
{
    let starts: Vec<Vec<Vec<f64>>> = suite
        .iter()
        .map(|p| sample_starts(p.spec(), starts_per_problem, seed))
        .collect();
    jobs(suite, solvers, &starts)
        .par_iter()
        .map(|job| {
            let (record, trace) = run_one(job.problem, job.entry, job.start, job.x0, seed);
            if let Some(t) = &trace {
                inspect(&record, t);
            }
            record
        })
        .collect()
}

/// The points of `points` dominated by no other point, exact duplicates
/// collapsed to their first occurrence.
pub fn pareto_filter(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut unique: Vec<&Vec<f64>> = Vec::with_capacity(points.len());
    for p in points {
        if !unique.contains(&p) {
            unique.push(p);
        }
    }
    unique
        .iter()
        .filter(|p| !unique.iter().any(|q| dominates_unchecked(q, p)))
        .map(|p| (*p).clone())
        .collect()
}

/// Fraction of `pooled` matched (within `match_tol` in ∞-norm) by a member of
/// `front`.
pub fn purity(front: &[Vec<f64>], pooled: &[Vec<f64>], match_tol: f64) -> f64 {
    if pooled.is_empty() {
        return 0.0;
    }
    let hits = pooled
        .iter()
        .filter(|p| {
            front.iter().any(|q| {
                q.len() == p.len() && p.iter().zip(q.iter()).all(|(a, b)| (a - b).abs() <= match_tol)
            })
        })
        .count();
    hits as f64 / pooled.len() as f64
}

/// Standard deviation (denominator `|F| − 1`) of the L1 distances from each
/// point to its nearest other point. `None` for fronts with fewer than two
/// points.
pub fn spacing(front: &[Vec<f64>]) -> Option<f64> {
    let n = front.len();
    if n < 2 {
        return None;
    }
    let l1 = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>();
    let nearest: Vec<f64> = (0..n)
        .map(|l| {
            (0..n)
                .filter(|&k| k != l)
                .map(|k| l1(&front[l], &front[k]))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let mean = nearest.iter().sum::<f64>() / n as f64;
    let ss: f64 = nearest.iter().map(|d| (mean - d).powi(2)).sum();
    Some((ss / (n - 1) as f64).sqrt())
}

/// `ρ_s(τ)` sampled at every distinct finite performance ratio.
#[derive(Debug, Clone, PartialEq)]
pub struct PerformanceProfile {
    pub solvers: Vec<String>,
    /// Sorted distinct ratios.
    pub taus: Vec<f64>,
    /// `rho[s][t]` is `ρ_s(taus[t])`.
    pub rho: Vec<Vec<f64>>,
    /// Problems on which every solver failed; excluded from `n_p`.
    pub dropped: usize,
}

impl PerformanceProfile {
    /// `ρ_s(τ)` at an arbitrary `τ`.
    pub fn rho_at(&self, solver: usize, tau: f64) -> f64 {
        match self.taus.iter().rposition(|&t| t <= tau) {
            Some(i) => self.rho[solver][i],
            None => 0.0,
        }
    }

    pub fn write_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["solver", "tau", "rho"])?;
        for (s, name) in self.solvers.iter().enumerate() {
            for (t, tau) in self.taus.iter().enumerate() {
                out.write_record([name.clone(), tau.to_string(), self.rho[s][t].to_string()])?;
            }
        }
        out.flush()?;
        Ok(())
    }
}

/// Profiles from a problems × solvers matrix of positive measures, `None`
/// marking a failed pair.
pub fn performance_profile(solvers: &[String], measures: &[Vec<Option<f64>>]) -> PerformanceProfile {
    let ns = solvers.len();
    let mut ratios: Vec<Vec<f64>> = vec![Vec::new(); ns];
    let mut dropped = 0;
    let mut counted = 0;
    for row in measures {
        let best = row
            .iter()
            .flatten()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if !best.is_finite() {
            dropped += 1;
            continue;
        }
        counted += 1;
        for (s, o) in row.iter().enumerate().take(ns) {
            if let Some(o) = o {
                ratios[s].push(o / best);
            }
        }
    }
    if dropped > 0 {
        log::warn!("{dropped} problem(s) unsolved by every solver were dropped from the profile");
    }
    let mut taus: Vec<f64> = ratios.iter().flatten().copied().collect();
    taus.sort_by(f64::total_cmp);
    taus.dedup();
    let rho = ratios
        .iter()
        .map(|r| {
            taus.iter()
                .map(|&t| {
                    if counted == 0 {
                        0.0
                    } else {
                        r.iter().filter(|&&z| z <= t).count() as f64 / counted as f64
                    }
                })
                .collect()
        })
        .collect();
    PerformanceProfile {
        solvers: solvers.to_vec(),
        taus,
        rho,
        dropped,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Measure {
    Iterations,
    FEvals,
}

/// How the runs of one (problem, solver) pair collapse into one measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Aggregation {
    /// Median over successful runs.
    #[default]
    Median,
    /// Mean over successful runs.
    Mean,
    /// Every (problem, start) pair is its own profile row.
    PerStart,
}

/// Problems × solvers matrix of a measure.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureTable {
    /// Row labels: problem names, or `problem#start` under per-start rows.
    pub rows: Vec<String>,
    pub solvers: Vec<String>,
    pub values: Vec<Vec<Option<f64>>>,
}

fn ordered_unique<'a>(it: impl Iterator<Item = &'a str>) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for s in it {
        if !out.iter().any(|o| o == s) {
            out.push(s.to_string());
        }
    }
    out
}

pub fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    Some(if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    })
}

/// Collapses records into a measure table. Counts are floored at 1 so that
/// runs starting at a critical point yield finite ratios.
pub fn measure_table(records: &[RunRecord], measure: Measure, agg: Aggregation) -> MeasureTable {
    let problems = ordered_unique(records.iter().map(|r| r.problem.as_str()));
    let solvers = ordered_unique(records.iter().map(|r| r.method.as_str()));
    let value = |r: &RunRecord| match measure {
        Measure::Iterations => r.iters,
        Measure::FEvals => r.f_evals,
    } as f64;
    let col = |name: &str| solvers.iter().position(|s| s == name).unwrap();

    let (rows, values) = match agg {
        Aggregation::Median | Aggregation::Mean => {
            let mut groups: Vec<Vec<Vec<f64>>> = vec![vec![Vec::new(); solvers.len()]; problems.len()];
            for r in records.iter().filter(|r| r.solved()) {
                let p = problems.iter().position(|p| p == &r.problem).unwrap();
                groups[p][col(&r.method)].push(value(r));
            }
            let values = groups
                .into_iter()
                .map(|row| {
                    row.into_iter()
                        .map(|mut g| {
                            let v = if agg == Aggregation::Median {
                                median(&mut g)
                            } else if g.is_empty() {
                                None
                            } else {
                                Some(g.iter().sum::<f64>() / g.len() as f64)
                            };
                            v.map(|v| v.max(1.0))
                        })
                        .collect()
                })
                .collect();
            (problems, values)
        }
        Aggregation::PerStart => {
            let mut keyed: BTreeMap<(usize, usize), Vec<Option<f64>>> = BTreeMap::new();
            for r in records {
                let p = problems.iter().position(|p| p == &r.problem).unwrap();
                let row = keyed.entry((p, r.start)).or_insert_with(|| vec![None; solvers.len()]);
                row[col(&r.method)] = r.solved().then(|| value(r).max(1.0));
            }
            let rows = keyed
                .keys()
                .map(|(p, s)| format!("{}#{}", problems[*p], s))
                .collect();
            (rows, keyed.into_values().collect())
        }
    };
    MeasureTable {
        rows,
        solvers,
        values,
    }
}

/// Per-solver nondominated fronts of the successful runs, keyed by problem.
pub fn solver_fronts(records: &[RunRecord]) -> BTreeMap<String, BTreeMap<String, Vec<Vec<f64>>>> {
    let mut raw: BTreeMap<String, BTreeMap<String, Vec<Vec<f64>>>> = BTreeMap::new();
    for r in records {
        let fronts = raw.entry(r.problem.clone()).or_default();
        let pts = fronts.entry(r.method.clone()).or_default();
        if r.solved() && r.f_terminal.iter().all(|v| v.is_finite()) {
            pts.push(r.f_terminal.clone());
        }
    }
    for fronts in raw.values_mut() {
        for pts in fronts.values_mut() {
            *pts = pareto_filter(pts);
        }
    }
    raw
}

/// One row of the purity table.
#[derive(Debug, Clone, PartialEq)]
pub struct PurityRow {
    pub problem: String,
    pub solver: String,
    pub purity: f64,
    /// `1/purity`, or `None` when the solver contributes nothing.
    pub profile_value: Option<f64>,
}

/// Purity of each solver's front against the nondominated union of all
/// solver fronts of the same problem.
pub fn purity_table(
    fronts: &BTreeMap<String, BTreeMap<String, Vec<Vec<f64>>>>,
    match_tol: f64,
) -> Vec<PurityRow> {
    let mut out = Vec::new();
    for (problem, by_solver) in fronts {
        let union: Vec<Vec<f64>> = by_solver.values().flatten().cloned().collect();
        let pooled = pareto_filter(&union);
        for (solver, front) in by_solver {
            let p = purity(front, &pooled, match_tol);
            out.push(PurityRow {
                problem: problem.clone(),
                solver: solver.clone(),
                purity: p,
                profile_value: (p > 0.0).then(|| 1.0 / p),
            });
        }
    }
    out
}

/// Purity rows reshaped into a profile-ready problems × solvers matrix.
pub fn purity_measures(rows: &[PurityRow], solvers: &[String]) -> MeasureTable {
    let problems = ordered_unique(rows.iter().map(|r| r.problem.as_str()));
    let mut values = vec![vec![None; solvers.len()]; problems.len()];
    for r in rows {
        let p = problems.iter().position(|p| p == &r.problem).unwrap();
        if let Some(s) = solvers.iter().position(|s| s == &r.solver) {
            values[p][s] = r.profile_value;
        }
    }
    MeasureTable {
        rows: problems,
        solvers: solvers.to_vec(),
        values,
    }
}

/// Least-squares fit of `ln gₖ ≈ a + k ln q` over the positive gaps.
/// Returns `(q, R²)`; `None` with fewer than three positive gaps.
pub fn geometric_fit(gaps: &[f64]) -> Option<(f64, f64)> {
    let pts: Vec<(f64, f64)> = gaps
        .iter()
        .enumerate()
        .filter(|(_, g)| **g > 0.0 && g.is_finite())
        .map(|(k, g)| (k as f64, g.ln()))
        .collect();
    if pts.len() < 3 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let ss_res: f64 = pts
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    let r2 = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Some((slope.exp(), r2))
}

const RECORD_HEADER: [&str; 11] = [
    "problem",
    "method",
    "start",
    "seed",
    "status",
    "iters",
    "f_evals",
    "jac_evals",
    "theta",
    "walltime_ms",
    "F_terminal",
];

pub fn write_records_csv<W: Write>(records: &[RunRecord], w: W) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(RECORD_HEADER)?;
    for r in records {
        out.write_record([
            r.problem.clone(),
            r.method.clone(),
            r.start.to_string(),
            r.seed.to_string(),
            r.status.as_str().to_string(),
            r.iters.to_string(),
            r.f_evals.to_string(),
            r.jac_evals.to_string(),
            r.theta.to_string(),
            format!("{:.3}", r.walltime_ms),
            crate::problems::join(&r.f_terminal),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// A malformed row or file, with the 1-based line it was found on.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: u64,
    pub message: String,
}

fn parse_field<T: std::str::FromStr>(row: &csv::StringRecord, idx: usize, line: u64) -> Result<T, ParseError>
where
    T::Err: std::fmt::Display,
{
    let raw = row.get(idx).ok_or_else(|| ParseError {
        line,
        message: format!("missing column `{}`", RECORD_HEADER[idx]),
    })?;
    raw.trim().parse().map_err(|e| ParseError {
        line,
        message: format!("column `{}`: cannot parse `{raw}`: {e}", RECORD_HEADER[idx]),
    })
}

fn parse_reals(raw: &str, line: u64, what: &str) -> Result<Vec<f64>, ParseError> {
    if raw.trim().is_empty() {
        return Ok(Vec::new());
    }
    raw.split(';')
        .map(|t| {
            t.trim().parse::<f64>().map_err(|e| ParseError {
                line,
                message: format!("{what}: cannot parse `{t}`: {e}"),
            })
        })
        .collect()
}

pub fn read_records_csv<R: Read>(r: R) -> Result<Vec<RunRecord>, ParseError> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(r);
    let header = rdr.headers().map_err(|e| ParseError {
        line: 1,
        message: e.to_string(),
    })?;
    if header.iter().collect::<Vec<_>>() != RECORD_HEADER {
        return Err(ParseError {
            line: 1,
            message: format!("expected header `{}`", RECORD_HEADER.join(",")),
        });
    }
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| ParseError {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = row.position().map_or(0, |p| p.line());
        if row.len() != RECORD_HEADER.len() {
            return Err(ParseError {
                line,
                message: format!("expected {} columns, found {}", RECORD_HEADER.len(), row.len()),
            });
        }
        let status_raw = &row[4];
        let status = status_raw.parse().map_err(|_| ParseError {
            line,
            message: format!("unknown status `{status_raw}`"),
        })?;
        out.push(RunRecord {
            problem: row[0].to_string(),
            method: row[1].to_string(),
            start: parse_field(&row, 2, line)?,
            seed: parse_field(&row, 3, line)?,
            status,
            iters: parse_field(&row, 5, line)?,
            f_evals: parse_field(&row, 6, line)?,
            jac_evals: parse_field(&row, 7, line)?,
            theta: parse_field(&row, 8, line)?,
            walltime_ms: parse_field(&row, 9, line)?,
            f_terminal: parse_reals(&row[10], line, "F_terminal")?,
        });
    }
    Ok(out)
}

/// Front file: header `F1,…,Fm`, one objective vector per row.
pub fn write_front_csv<W: Write>(front: &[Vec<f64>], w: W) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let m = front.first().map_or(0, Vec::len);
    out.write_record((1..=m).map(|i| format!("F{i}")))?;
    for p in front {
        out.write_record(p.iter().map(|v| v.to_string()))?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_front_csv<R: Read>(r: R) -> Result<Vec<Vec<f64>>, ParseError> {
    let mut rdr = csv::ReaderBuilder::new().from_reader(r);
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| ParseError {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = row.position().map_or(0, |p| p.line());
        let p = row
            .iter()
            .map(|t| {
                t.trim().parse::<f64>().map_err(|e| ParseError {
                    line,
                    message: format!("cannot parse `{t}`: {e}"),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        out.push(p);
    }
    Ok(out)
}

/// File name of a front dump; `__` separates problem and solver.
pub fn front_file_name(problem: &str, solver: &str) -> String {
    format!("{problem}__{solver}.csv")
}

/// Inverse of [`front_file_name`].
pub fn parse_front_file_name(name: &str) -> Option<(String, String)> {
    let stem = name.strip_suffix(".csv")?;
    let (p, s) = stem.split_once("__")?;
    Some((p.to_string(), s.to_string()))
}

pub fn write_purity_csv<W: Write>(rows: &[PurityRow], w: W) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["problem", "solver", "purity", "profile_value"])?;
    for r in rows {
        out.write_record([
            r.problem.clone(),
            r.solver.clone(),
            r.purity.to_string(),
            r.profile_value.map_or_else(|| "NA".to_string(), |v| v.to_string()),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Problems × solvers spacing table, `NA` where undefined.
pub fn write_spacing_csv<W: Write>(
    problems: &[String],
    solvers: &[String],
    values: &[Vec<Option<f64>>],
    w: W,
) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(std::iter::once("problem".to_string()).chain(solvers.iter().cloned()))?;
    for (p, row) in problems.iter().zip(values) {
        out.write_record(
            std::iter::once(p.clone())
                .chain(row.iter().map(|v| v.map_or_else(|| "NA".to_string(), |x| x.to_string()))),
        )?;
    }
    out.flush()?;
    Ok(())
}
