//! Command-line front end: argument definitions, the experiment config file,
//! and the four commands as library functions returning exit codes.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::bench::{
    self, default_solvers, front_file_name, measure_table, parse_front_file_name, performance_profile,
    purity_measures, purity_table, read_front_csv, read_records_csv, solver_fronts, spacing,
    write_front_csv, write_purity_csv, write_records_csv, write_spacing_csv, Aggregation, Measure,
    RunRecord, SolverEntry, DEFAULT_MATCH_TOL,
};
use crate::directions::GammaRule;
use crate::linesearch::InitMode;
use crate::mo_core::Problem;
use crate::problems::{lookup, registry, sample_starts, scale, write_registry_csv, TestProblem};
use crate::solver::{solve, Method, SolverConfig, SolverTrace, TerminalStatus};

pub const EXIT_OK: i32 = 0;
pub const EXIT_MAX_ITERS: i32 = 2;
pub const EXIT_LINE_SEARCH: i32 = 3;
pub const EXIT_EVAL_ERROR: i32 = 4;
pub const EXIT_NO_SUCCESS: i32 = 5;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_DATA: i32 = 65;
pub const EXIT_NO_INPUT: i32 = 66;
pub const EXIT_IO: i32 = 74;

/// Environment variable that overrides the seed of a config file.
pub const SEED_ENV: &str = "MOMOGRAD_SEED";

pub fn status_exit_code(status: TerminalStatus) -> i32 {
    match status {
        TerminalStatus::Critical => EXIT_OK,
        TerminalStatus::MaxIters => EXIT_MAX_ITERS,
        TerminalStatus::LineSearchFail | TerminalStatus::DescentFailure => EXIT_LINE_SEARCH,
        TerminalStatus::EvalError => EXIT_EVAL_ERROR,
    }
}

#[derive(Debug, Parser)]
#[command(name = "momograd", version, about = "Multiobjective descent solvers and benchmark harness")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one registered problem and write the iteration trace.
    Solve(SolveArgs),
    /// Run a benchmark described by a TOML config file.
    Bench(BenchArgs),
    /// Recompute purity, spacing and profiles from benchmark outputs.
    Metrics(MetricsArgs),
    /// List the registered problems as CSV.
    Problems(ProblemsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Sd,
    Fr,
    Cd,
    Hs,
    /// Memory gradient, Armijo stepsize (same as mmg-i1).
    MmgI,
    /// Memory gradient, γ = 1, N = 5.
    MmgI1,
    /// Memory gradient, spectral γ, N = 3.
    MmgI2,
    /// Memory gradient, Lipschitz stepsize.
    MmgIi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GammaArg {
    Constant,
    Bb,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InitArg {
    TauK,
    Unit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AggregationArg {
    Median,
    Mean,
    PerStart,
}

impl From<AggregationArg> for Aggregation {
    fn from(a: AggregationArg) -> Self {
        match a {
            AggregationArg::Median => Aggregation::Median,
            AggregationArg::Mean => Aggregation::Mean,
            AggregationArg::PerStart => Aggregation::PerStart,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    /// Registered problem name (see `momograd problems`).
    pub problem: String,
    #[arg(long, value_enum, default_value = "mmg-i")]
    pub method: MethodArg,
    /// Start point as comma-separated reals; sampled from the box if absent.
    #[arg(long, allow_hyphen_values = true)]
    pub x0: Option<String>,
    /// Seed for the sampled start (falls back to MOMOGRAD_SEED, then 0).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of stored directions N.
    #[arg(long)]
    pub memory: Option<usize>,
    #[arg(long, value_enum)]
    pub gamma_rule: Option<GammaArg>,
    #[arg(long)]
    pub zeta: Option<f64>,
    /// Armijo constant.
    #[arg(long)]
    pub rho: Option<f64>,
    /// Backtracking factor.
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long, value_enum)]
    pub init_mode: Option<InitArg>,
    #[arg(long)]
    pub eps_theta: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Jacobian Lipschitz constant for mmg-ii (defaults to the registry value).
    #[arg(long)]
    pub lipschitz: Option<f64>,
    /// Scale objectives by their gradient size at the start point.
    #[arg(long)]
    pub scale: bool,
    /// Trace output (JSON lines).
    #[arg(long, default_value = "trace.jsonl")]
    pub trace: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    /// Experiment config (TOML).
    pub config: PathBuf,
    /// Worker threads; 0 uses all available cores.
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    /// Overrides the config's output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overrides the config's starts per problem.
    #[arg(long)]
    pub starts: Option<usize>,
    /// Overrides both the config seed and MOMOGRAD_SEED.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct MetricsArgs {
    /// records.csv written by `bench`.
    #[arg(long)]
    pub records: PathBuf,
    /// Directory of per-solver front files.
    #[arg(long)]
    pub fronts: PathBuf,
    /// Output directory for purity.csv, spacing.csv and profile files.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value = "median")]
    pub aggregation: AggregationArg,
    /// ∞-norm tolerance for front membership in purity.
    #[arg(long, default_value_t = DEFAULT_MATCH_TOL)]
    pub match_tol: f64,
}

#[derive(Debug, Clone, Args)]
pub struct ProblemsArgs {
    /// Write to a file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Benchmark description as stored on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub starts: usize,
    pub output_dir: PathBuf,
    /// Problem names; empty means the whole registry.
    pub suite: Vec<String>,
    pub aggregation: Aggregation,
    pub match_tol: f64,
    pub solvers: Vec<SolverEntry>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            starts: 200,
            output_dir: PathBuf::from("bench-out"),
            suite: Vec::new(),
            aggregation: Aggregation::Median,
            match_tol: DEFAULT_MATCH_TOL,
            solvers: default_solvers(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("experiment config serializes")
    }

    pub fn resolve_suite(&self) -> crate::Result<Vec<TestProblem>> {
        if self.suite.is_empty() {
            return Ok(registry());
        }
        self.suite.iter().map(|n| lookup(n)).collect()
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.starts == 0 {
            return Err("starts must be at least 1".into());
        }
        if self.solvers.is_empty() {
            return Err("no solvers configured".into());
        }
        for (i, s) in self.solvers.iter().enumerate() {
            if self.solvers[..i].iter().any(|o| o.label == s.label) {
                return Err(format!("duplicate solver label `{}`", s.label));
            }
            if s.label.contains("__") || s.label.contains(['/', '\\']) {
                return Err(format!("solver label `{}` may not contain `__` or path separators", s.label));
            }
            s.config.validate().map_err(|e| format!("{}: {e}", s.label))?;
        }
        self.resolve_suite().map_err(|e| e.to_string())?;
        Ok(())
    }
}

fn seed_from_env() -> Result<Option<u64>, String> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| format!("{SEED_ENV} must be an unsigned integer, got `{v}`")),
        Err(_) => Ok(None),
    }
}

fn solver_config(args: &SolveArgs, problem: &TestProblem) -> SolverConfig {
    let mut entry = match args.method {
        MethodArg::MmgI | MethodArg::MmgI1 => bench::mmg_i1(),
        MethodArg::MmgI2 => bench::mmg_i2(),
        MethodArg::MmgIi => {
            let mut e = bench::mmg_i1();
            e.config.method = Method::MmgII;
            e
        }
        MethodArg::Sd => SolverEntry::new("SD", SolverConfig::with_method(Method::Sd)),
        MethodArg::Fr => SolverEntry::new("FR", SolverConfig::with_method(Method::Fr)),
        MethodArg::Cd => SolverEntry::new("CD", SolverConfig::with_method(Method::Cd)),
        MethodArg::Hs => SolverEntry::new("HS", SolverConfig::with_method(Method::Hs)),
    };
    let cfg = &mut entry.config;
    cfg.record_vectors = true;
    if let Some(n) = args.memory {
        cfg.mmg.memory = n;
    }
    if let Some(g) = args.gamma_rule {
        cfg.mmg.gamma_rule = match g {
            GammaArg::Constant => GammaRule::Constant,
            GammaArg::Bb => GammaRule::Bb,
        };
    }
    if let Some(z) = args.zeta {
        cfg.mmg.zeta = z;
    }
    if let Some(r) = args.rho {
        cfg.ls.rho = r;
    }
    if let Some(d) = args.delta {
        cfg.ls.delta = d;
    }
    if let Some(i) = args.init_mode {
        cfg.ls.init_mode = match i {
            InitArg::TauK => InitMode::TauK,
            InitArg::Unit => InitMode::Unit,
        };
    }
    if let Some(e) = args.eps_theta {
        cfg.eps_theta = e;
    }
    if let Some(m) = args.max_iters {
        cfg.max_iters = m;
    }
    cfg.ls.lipschitz = args.lipschitz.or(problem.spec().lipschitz);
    entry.config
}

fn parse_point(raw: &str) -> Result<Vec<f64>, String> {
    raw.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("bad coordinate `{t}`: {e}")))
        .collect()
}

fn usage(msg: impl std::fmt::Display) -> i32 {
    eprintln!("error: {msg}");
    EXIT_USAGE
}

pub fn cmd_solve(args: &SolveArgs) -> i32 {
    let problem = match lookup(&args.problem) {
        Ok(p) => p,
        Err(e) => return usage(e),
    };
    let x0 = match &args.x0 {
        Some(raw) => match parse_point(raw) {
            Ok(x) => x,
            Err(e) => return usage(e),
        },
        None => {
            let seed = match args.seed.map_or_else(seed_from_env, |s| Ok(Some(s))) {
                Ok(s) => s.unwrap_or(0),
                Err(e) => return usage(e),
            };
            sample_starts(problem.spec(), 1, seed).remove(0)
        }
    };
    if x0.len() != problem.dim() {
        return usage(format!("{} expects {} coordinates, got {}", problem.name(), problem.dim(), x0.len()));
    }
    let mut cfg = solver_config(args, &problem);

    let result = if args.scale {
        match scale(&problem, &x0) {
            Ok(scaled) => {
                let top = scaled.factors().iter().copied().fold(0.0, f64::max);
                if args.lipschitz.is_none() {
                    cfg.ls.lipschitz = cfg.ls.lipschitz.map(|l| l * top);
                }
                solve(&scaled, &x0, &cfg)
            }
            Err(e) => {
                eprintln!("error: {e}");
                return EXIT_EVAL_ERROR;
            }
        }
    } else {
        solve(&problem, &x0, &cfg)
    };
    let trace = match result {
        Ok(t) => t,
        Err(e) => return usage(e),
    };
    if let Err(e) = write_trace(&trace, &args.trace) {
        eprintln!("error: writing {}: {e}", args.trace.display());
        return EXIT_IO;
    }
    let mut out = io::stdout().lock();
    let _ = writeln!(out, "status: {}", trace.status.as_str());
    let _ = writeln!(out, "iterations: {}", trace.iterations);
    let _ = writeln!(out, "theta: {:e}", trace.final_theta);
    let _ = writeln!(out, "x: {}", fmt_vec(&trace.final_x));
    let _ = writeln!(out, "F: {}", fmt_vec(&trace.final_f));
    if let Some(e) = &trace.error {
        eprintln!("{e}");
    }
    status_exit_code(trace.status)
}

fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.10e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn write_trace(trace: &SolverTrace, path: &Path) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    trace.write_jsonl(&mut w)?;
    w.flush()
}

fn build_pool(jobs: usize) -> Result<rayon::ThreadPool, String> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| e.to_string())
}

pub fn cmd_bench(args: &BenchArgs) -> i32 {
    let text = match fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: reading {}: {e}", args.config.display());
            return EXIT_NO_INPUT;
        }
    };
    let mut config = match ExperimentConfig::from_toml(&text) {
        Ok(c) => c,
        Err(e) => return usage(format!("{}: {e}", args.config.display())),
    };
    match seed_from_env() {
        Ok(Some(s)) => config.seed = s,
        Ok(None) => {}
        Err(e) => return usage(e),
    }
    if let Some(s) = args.seed {
        config.seed = s;
    }
    if let Some(n) = args.starts {
        config.starts = n;
    }
    if let Some(o) = &args.out {
        config.output_dir = o.clone();
    }
    if let Err(e) = config.validate() {
        return usage(e);
    }
    let suite = config.resolve_suite().expect("validated suite");
    let pool = match build_pool(args.jobs) {
        Ok(p) => p,
        Err(e) => return usage(e),
    };
    log::info!(
        "running {} problems x {} solvers x {} starts on {} threads",
        suite.len(),
        config.solvers.len(),
        config.starts,
        pool.current_num_threads()
    );
    let records = pool.install(|| bench::run_experiment(&suite, &config.solvers, config.starts, config.seed));

    if let Err(e) = write_bench_outputs(&config, &records) {
        eprintln!("error: writing outputs to {}: {e}", config.output_dir.display());
        return EXIT_IO;
    }
    let solved = records.iter().filter(|r| r.solved()).count();
    println!(
        "{} runs, {} reached the criticality test; outputs in {}",
        records.len(),
        solved,
        config.output_dir.display()
    );
    if solved == 0 {
        EXIT_NO_SUCCESS
    } else {
        EXIT_OK
    }
}

fn create(path: &Path) -> io::Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn write_bench_outputs(config: &ExperimentConfig, records: &[RunRecord]) -> io::Result<()> {
    let out = &config.output_dir;
    let fronts_dir = out.join("fronts");
    fs::create_dir_all(&fronts_dir)?;
    write_records_csv(records, create(&out.join("records.csv"))?)?;
    let fronts = solver_fronts(records);
    for (problem, by_solver) in &fronts {
        for (solver, front) in by_solver {
            if !front.is_empty() {
                write_front_csv(front, create(&fronts_dir.join(front_file_name(problem, solver)))?)?;
            }
        }
    }
    let solvers: Vec<String> = config.solvers.iter().map(|s| s.label.clone()).collect();
    write_metrics(records, &fronts, &solvers, config.aggregation, config.match_tol, out)
}

type Fronts = std::collections::BTreeMap<String, std::collections::BTreeMap<String, Vec<Vec<f64>>>>;

fn write_metrics(
    records: &[RunRecord],
    fronts: &Fronts,
    solvers: &[String],
    aggregation: Aggregation,
    match_tol: f64,
    out: &Path,
) -> io::Result<()> {
    fs::create_dir_all(out)?;
    let iters = measure_table(records, Measure::Iterations, aggregation);
    performance_profile(&iters.solvers, &iters.values).write_csv(create(&out.join("profiles.csv"))?)?;
    let fev = measure_table(records, Measure::FEvals, aggregation);
    performance_profile(&fev.solvers, &fev.values).write_csv(create(&out.join("profiles_f_evals.csv"))?)?;

    let purity_rows = purity_table(fronts, match_tol);
    write_purity_csv(&purity_rows, create(&out.join("purity.csv"))?)?;
    let pm = purity_measures(&purity_rows, solvers);
    performance_profile(&pm.solvers, &pm.values).write_csv(create(&out.join("profiles_purity.csv"))?)?;

    let problems: Vec<String> = {
        let mut p: Vec<String> = Vec::new();
        for r in records {
            if !p.contains(&r.problem) {
                p.push(r.problem.clone());
            }
        }
        p
    };
    let table: Vec<Vec<Option<f64>>> = problems
        .iter()
        .map(|p| {
            solvers
                .iter()
                .map(|s| fronts.get(p).and_then(|f| f.get(s)).and_then(|f| spacing(f)))
                .collect()
        })
        .collect();
    write_spacing_csv(&problems, solvers, &table, create(&out.join("spacing.csv"))?)?;
    Ok(())
}

fn read_fronts_dir(dir: &Path) -> Result<Fronts, String> {
    let mut fronts = Fronts::new();
    let mut entries: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| format!("{}: {e}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .collect();
    entries.sort();
    for path in entries {
        let Some((problem, solver)) = path
            .file_name()
            .and_then(|n| n.to_str())
            .and_then(parse_front_file_name)
        else {
            continue;
        };
        let file = File::open(&path).map_err(|e| format!("{}: {e}", path.display()))?;
        let front = read_front_csv(file).map_err(|e| format!("{}: {e}", path.display()))?;
        fronts.entry(problem).or_default().insert(solver, front);
    }
    Ok(fronts)
}

pub fn cmd_metrics(args: &MetricsArgs) -> i32 {
    let file = match File::open(&args.records) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("error: {}: {e}", args.records.display());
            return EXIT_NO_INPUT;
        }
    };
    let records = match read_records_csv(file) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {}: {e}", args.records.display());
            return EXIT_DATA;
        }
    };
    if !args.fronts.is_dir() {
        eprintln!("error: {} is not a directory", args.fronts.display());
        return EXIT_NO_INPUT;
    }
    let fronts = match read_fronts_dir(&args.fronts) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_DATA;
        }
    };
    let mut solvers: Vec<String> = Vec::new();
    for r in &records {
        if !solvers.contains(&r.method) {
            solvers.push(r.method.clone());
        }
    }
    match write_metrics(&records, &fronts, &solvers, args.aggregation.into(), args.match_tol, &args.out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: writing to {}: {e}", args.out.display());
            EXIT_IO
        }
    }
}

pub fn cmd_problems(args: &ProblemsArgs) -> i32 {
    let result = match &args.out {
        Some(path) => File::create(path).map_err(csv::Error::from).and_then(write_registry_csv),
        None => write_registry_csv(io::stdout().lock()),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_IO
        }
    }
}

/// Parses `argv` and runs the selected command.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match &cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Metrics(a) => cmd_metrics(a),
        Command::Problems(a) => cmd_problems(a),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn config_round_trips() {
        let mut cfg = ExperimentConfig {
            seed: 42,
            starts: 7,
            suite: vec!["AP-EX".into(), "BK1".into()],
            aggregation: Aggregation::PerStart,
            ..Default::default()
        };
        cfg.solvers[0].config.ls.lipschitz = Some(0.04);
        cfg.solvers[1].config.mmg.zeta = 3.5e-5;
        let text = cfg.to_toml();
        assert_eq!(ExperimentConfig::from_toml(&text).unwrap(), cfg);
    }

    #[test]
    fn sparse_config_takes_defaults() {
        let cfg = ExperimentConfig::from_toml(
            "starts = 5\nsuite = [\"BK1\"]\n[[solvers]]\nlabel = \"mine\"\n[solvers.config]\nmethod = \"SD\"\n",
        )
        .unwrap();
        assert_eq!(cfg.solvers.len(), 1);
        assert_eq!(cfg.solvers[0].config.method, Method::Sd);
        assert_eq!(cfg.solvers[0].config.max_iters, 10_000);
        assert!(cfg.validate().is_ok());
        assert!(ExperimentConfig::from_toml("bogus = 1").is_err());
    }

    #[test]
    fn config_validation() {
        let mut cfg = ExperimentConfig {
            suite: vec!["nope".into()],
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
        cfg.suite.clear();
        assert!(cfg.validate().is_ok());
        cfg.solvers.push(cfg.solvers[0].clone());
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn default_config_has_six_solvers() {
        let labels: Vec<String> = ExperimentConfig::default().solvers.into_iter().map(|s| s.label).collect();
        assert_eq!(labels, ["MMG-I1", "MMG-I2", "SD", "FR", "CD", "HS"]);
    }

    #[test]
    fn clap_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn exit_codes() {
        assert_eq!(status_exit_code(TerminalStatus::Critical), 0);
        assert_eq!(status_exit_code(TerminalStatus::MaxIters), 2);
        assert_eq!(status_exit_code(TerminalStatus::LineSearchFail), 3);
        assert_eq!(status_exit_code(TerminalStatus::EvalError), 4);
        assert_eq!(run(["momograd", "solve", "NOPE"]), EXIT_USAGE);
        assert_eq!(run(["momograd", "solve", "BK1", "--method", "zz"]), EXIT_USAGE);
        assert_eq!(run(["momograd", "solve", "BK1", "--x0", "1"]), EXIT_USAGE);
    }
}
