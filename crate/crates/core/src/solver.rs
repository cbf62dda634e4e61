//! The outer descent loop shared by the memory gradient method and its
//! baselines, with full per-iteration traces.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::directions::{
    baseline_direction, memory_direction, BaselineKind, DirectionState, MmgParams,
};
use crate::error::{check_len, Error, Result};
use crate::linesearch::{armijo_backtrack, lipschitz_step, LineSearchConfig};
use crate::mo_core::{dot, eval_checked, jacobian_checked, Jacobian, Problem};
use crate::subproblem::{is_critical, solve_dual, SubproblemSolution, DEFAULT_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    /// Memory gradient direction with Armijo backtracking.
    #[serde(rename = "MMG-I")]
    MmgI,
    /// Memory gradient direction with the Lipschitz stepsize.
    #[serde(rename = "MMG-II")]
    MmgII,
    #[serde(rename = "SD")]
    Sd,
    #[serde(rename = "FR")]
    Fr,
    #[serde(rename = "CD")]
    Cd,
    #[serde(rename = "HS")]
    Hs,
}

impl Method {
    fn baseline(self) -> Option<BaselineKind> {
        match self {
            Method::MmgI | Method::MmgII => None,
            Method::Sd => Some(BaselineKind::SteepestDescent),
            Method::Fr => Some(BaselineKind::FletcherReeves),
            Method::Cd => Some(BaselineKind::ConjugateDescent),
            Method::Hs => Some(BaselineKind::HestenesStiefel),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Method::MmgI => "MMG-I",
            Method::MmgII => "MMG-II",
            Method::Sd => "SD",
            Method::Fr => "FR",
            Method::Cd => "CD",
            Method::Hs => "HS",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "MMG-I" | "MMGI" => Ok(Method::MmgI),
            "MMG-II" | "MMGII" => Ok(Method::MmgII),
            "SD" => Ok(Method::Sd),
            "FR" => Ok(Method::Fr),
            "CD" => Ok(Method::Cd),
            "HS" => Ok(Method::Hs),
            _ => Err(Error::InvalidConfig(format!("unknown method `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub method: Method,
    pub mmg: MmgParams,
    pub ls: LineSearchConfig,
    /// Stop once `|θ(xᵏ)| ≤ eps_theta`.
    pub eps_theta: f64,
    pub max_iters: usize,
    /// KKT tolerance of the dual subproblem.
    pub dual_tol: f64,
    /// Keep `x`, `v` and `d` in every iteration record.
    pub record_vectors: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            method: Method::MmgI,
            mmg: MmgParams::default(),
            ls: LineSearchConfig::default(),
            eps_theta: 1e-6,
            max_iters: 10_000,
            dual_tol: DEFAULT_TOL,
            record_vectors: true,
        }
    }
}

impl SolverConfig {
    pub fn with_method(method: Method) -> Self {
        Self {
            method,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.ls.validate()?;
        if matches!(self.method, Method::MmgI | Method::MmgII) {
            self.mmg.validate()?;
        }
        if self.method == Method::MmgII && self.ls.lipschitz.is_none() {
            return Err(Error::InvalidConfig("MMG-II requires a Lipschitz constant".into()));
        }
        if !(self.eps_theta > 0.0) || !(self.dual_tol > 0.0) {
            return Err(Error::InvalidConfig("eps_theta and dual_tol must be positive".into()));
        }
        Ok(())
    }

    fn memory_capacity(&self) -> usize {
        match self.method {
            Method::MmgI | Method::MmgII => self.mmg.memory,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TerminalStatus {
    Critical,
    MaxIters,
    LineSearchFail,
    EvalError,
    /// A computed direction had `ψ(xᵏ, dᵏ) ≥ 0`.
    DescentFailure,
}

impl TerminalStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            TerminalStatus::Critical => "Critical",
            TerminalStatus::MaxIters => "MaxIters",
            TerminalStatus::LineSearchFail => "LineSearchFail",
            TerminalStatus::EvalError => "EvalError",
            TerminalStatus::DescentFailure => "DescentFailure",
        }
    }

    fn from_error(err: &Error) -> Self {
        match err {
            Error::LineSearchFailure { .. } => TerminalStatus::LineSearchFail,
            Error::NotDescent { .. } => TerminalStatus::DescentFailure,
            _ => TerminalStatus::EvalError,
        }
    }
}

impl std::str::FromStr for TerminalStatus {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            TerminalStatus::Critical,
            TerminalStatus::MaxIters,
            TerminalStatus::LineSearchFail,
            TerminalStatus::EvalError,
            TerminalStatus::DescentFailure,
        ]
        .into_iter()
        .find(|t| t.as_str() == s)
        .ok_or_else(|| Error::InvalidConfig(format!("unknown status `{s}`")))
    }
}

/// Everything about iteration k, from `xᵏ` to `xᵏ⁺¹`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub k: usize,
    /// `xᵏ` (empty unless vectors are recorded).
    pub x: Vec<f64>,
    pub f: Vec<f64>,
    /// `v(xᵏ)` (empty unless vectors are recorded).
    pub v: Vec<f64>,
    pub v_norm: f64,
    pub theta: f64,
    /// `dᵏ` (empty unless vectors are recorded).
    pub d: Vec<f64>,
    pub d_norm_sq: f64,
    pub gamma: f64,
    pub betas: Vec<f64>,
    pub psi_v: f64,
    pub psi_d: f64,
    pub alpha: f64,
    /// `F(xᵏ⁺¹)`
    pub f_next: Vec<f64>,
    /// Cumulative objective evaluations after this step.
    pub f_evals: usize,
    /// Cumulative Jacobian evaluations after this step.
    pub jac_evals: usize,
    /// A conjugate-gradient direction was replaced by `v(xᵏ)`.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub restarted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverTrace {
    pub records: Vec<IterationRecord>,
    pub status: TerminalStatus,
    pub iterations: usize,
    pub f_evals: usize,
    pub jac_evals: usize,
    pub final_x: Vec<f64>,
    pub final_f: Vec<f64>,
    pub final_theta: f64,
    pub final_v_norm: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl SolverTrace {
    /// `F(x⁰), F(x¹), …` including the final iterate.
    pub fn f_sequence(&self) -> Vec<&[f64]> {
        let mut out: Vec<&[f64]> = self.records.iter().map(|r| r.f.as_slice()).collect();
        if !self.final_f.is_empty() {
            out.push(&self.final_f);
        }
        out
    }

    /// `‖v(x⁰)‖, ‖v(x¹)‖, …` including the final iterate.
    pub fn v_norms(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self.records.iter().map(|r| r.v_norm).collect();
        out.push(self.final_v_norm);
        out
    }

    /// One JSON object per iteration followed by a summary object.
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for r in &self.records {
            serde_json::to_writer(&mut w, r)?;
            w.write_all(b"\n")?;
        }
        let summary = serde_json::json!({
            "summary": {
                "status": self.status,
                "iterations": self.iterations,
                "f_evals": self.f_evals,
                "jac_evals": self.jac_evals,
                "final_x": self.final_x,
                "final_f": self.final_f,
                "final_theta": self.final_theta,
                "final_v_norm": self.final_v_norm,
                "error": self.error,
            }
        });
        serde_json::to_writer(&mut w, &summary)?;
        w.write_all(b"\n")
    }
}

/// Mutable state of one run.
#[derive(Debug, Clone)]
pub struct SolverState {
    pub x: Vec<f64>,
    pub f: Vec<f64>,
    pub jac: Jacobian,
    pub sol: SubproblemSolution,
    pub directions: DirectionState,
    pub k: usize,
    pub f_evals: usize,
    pub jac_evals: usize,
}

impl SolverState {
    /// Evaluates `F`, `JF` and the subproblem at `x0`.
    pub fn new<P: Problem + ?Sized>(problem: &P, x0: &[f64], cfg: &SolverConfig) -> Result<Self> {
        let f = eval_checked(problem, x0)?;
        let jac = jacobian_checked(problem, x0)?;
        let sol = solve_dual(&jac, cfg.dual_tol)?;
        Ok(Self {
            x: x0.to_vec(),
            f,
            jac,
            sol,
            directions: DirectionState::new(cfg.memory_capacity()),
            k: 0,
            f_evals: 1,
            jac_evals: 1,
        })
    }

    pub fn is_critical(&self, cfg: &SolverConfig) -> bool {
        is_critical(&self.sol, cfg.eps_theta)
    }
}

/// One iteration: direction, stepsize, update, subproblem at the new point.
///
/// On error the state is left at `xᵏ`.
pub fn step<P: Problem + ?Sized>(
    problem: &P,
    state: &mut SolverState,
    cfg: &SolverConfig,
) -> Result<IterationRecord> {
    let (d, gamma, betas, psi_d, restarted) = match cfg.method.baseline() {
        None => {
            let md = memory_direction(&state.sol, &state.x, &state.jac, &state.directions, &cfg.mmg)?;
            (md.d, md.gamma, md.betas, md.psi_d, false)
        }
        Some(kind) => {
            let bd = baseline_direction(kind, &state.sol, &state.jac, &state.directions)?;
            (bd.d, 1.0, vec![bd.beta], bd.psi_d, bd.restarted)
        }
    };
    let d_norm_sq = dot(&d, &d);

    let (alpha, x_new, f_new, evals) = if cfg.method == Method::MmgII {
        let lipschitz = cfg
            .ls
            .lipschitz
            .ok_or_else(|| Error::InvalidConfig("MMG-II requires a Lipschitz constant".into()))?;
        let alpha = lipschitz_step(psi_d, d_norm_sq, lipschitz);
        let x_new: Vec<f64> = state.x.iter().zip(&d).map(|(x, di)| x + alpha * di).collect();
        let f_new = eval_checked(problem, &x_new)?;
        (alpha, x_new, f_new, 1)
    } else {
        let out = armijo_backtrack(problem, &state.x, &state.f, &d, psi_d, &cfg.ls)?;
        (out.alpha, out.x_new, out.f_new, out.f_evals)
    };
    // counted before the Jacobian, so a failing Jacobian still shows the evaluations spent
    state.f_evals += evals;
    let jac_new = jacobian_checked(problem, &x_new)?;
    state.jac_evals += 1;
    let sol_new = solve_dual(&jac_new, cfg.dual_tol)?;

    let vectors = cfg.record_vectors;
    let record = IterationRecord {
        k: state.k,
        x: if vectors { state.x.clone() } else { Vec::new() },
        f: state.f.clone(),
        v: if vectors { state.sol.v.clone() } else { Vec::new() },
        v_norm: state.sol.v_norm(),
        theta: state.sol.theta,
        d: if vectors { d.clone() } else { Vec::new() },
        d_norm_sq,
        gamma,
        betas,
        psi_v: state.sol.psi_v,
        psi_d,
        alpha,
        f_next: f_new.clone(),
        f_evals: state.f_evals,
        jac_evals: state.jac_evals,
        restarted,
    };

    let old_jac = std::mem::replace(&mut state.jac, jac_new);
    let old_sol = std::mem::replace(&mut state.sol, sol_new);
    state.directions.push(&state.x, &old_jac, &old_sol, d, psi_d);
    state.x = x_new;
    state.f = f_new;
    state.k += 1;
    Ok(record)
}

/// Runs the method from `x0` until `|θ| ≤ eps_theta`, the iteration cap, or
/// a failure. Evaluation and line-search failures end the run with the
/// corresponding status and the partial trace; only invalid input is an `Err`.
pub fn solve<P: Problem + ?Sized>(problem: &P, x0: &[f64], cfg: &SolverConfig) -> Result<SolverTrace> {
    cfg.validate()?;
    check_len(problem.dim(), x0.len())?;
    let mut state = match SolverState::new(problem, x0, cfg) {
        Ok(s) => s,
        Err(e) => {
            return Ok(SolverTrace {
                records: Vec::new(),
                status: TerminalStatus::EvalError,
                iterations: 0,
                f_evals: 1,
                jac_evals: 0,
                final_x: x0.to_vec(),
                final_f: Vec::new(),
                final_theta: f64::NAN,
                final_v_norm: f64::NAN,
                error: Some(e.to_string()),
            })
        }
    };
    let mut records = Vec::new();
    let mut error = None;
    let status = loop {
        if state.is_critical(cfg) {
            break TerminalStatus::Critical;
        }
        if state.k >= cfg.max_iters {
            break TerminalStatus::MaxIters;
        }
        match step(problem, &mut state, cfg) {
            Ok(r) => records.push(r),
            Err(e) => {
                let status = TerminalStatus::from_error(&e);
                error = Some(e.to_string());
                break status;
            }
        }
    };
    Ok(SolverTrace {
        records,
        status,
        iterations: state.k,
        f_evals: state.f_evals,
        jac_evals: state.jac_evals,
        final_theta: state.sol.theta,
        final_v_norm: state.sol.v_norm(),
        final_x: state.x,
        final_f: state.f,
        error,
    })
}

/// Bound on `‖v(x)‖` at any point with `|θ(x)| ≤ eps_theta`.
pub fn terminal_v_bound(eps_theta: f64) -> f64 {
    2.0 * eps_theta.sqrt()
}

/// `ψ²(xᵏ, dᵏ)/‖dᵏ‖²` for each record.
pub fn decrease_measure(trace: &SolverTrace) -> Vec<f64> {
    trace
        .records
        .iter()
        .map(|r| r.psi_d * r.psi_d / r.d_norm_sq)
        .collect()
}
