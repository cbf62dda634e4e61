//! Stepsize rules along a descent direction: componentwise Armijo
//! backtracking and the fixed rule driven by a known Jacobian Lipschitz
//! constant.

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::mo_core::{dot, Problem};

/// Where backtracking starts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitMode {
    /// `τₖ = −ψ(xᵏ, dᵏ)/‖dᵏ‖²`
    TauK,
    /// `1`
    Unit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LineSearchConfig {
    pub rho: f64,
    pub delta: f64,
    pub init_mode: InitMode,
    pub max_backtracks: usize,
    /// Jacobian Lipschitz constant; required by the fixed stepsize rule.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lipschitz: Option<f64>,
}

impl Default for LineSearchConfig {
    fn default() -> Self {
        Self {
            rho: 1e-4,
            delta: 0.5,
            init_mode: InitMode::Unit,
            max_backtracks: 60,
            lipschitz: None,
        }
    }
}

impl LineSearchConfig {
    pub fn validate(&self) -> Result<()> {
        let open_unit = |v: f64| v > 0.0 && v < 1.0;
        if !open_unit(self.rho) || !open_unit(self.delta) {
            return Err(Error::InvalidConfig(format!(
                "rho and delta must lie in (0, 1), got rho={} delta={}",
                self.rho, self.delta
            )));
        }
        if self.max_backtracks == 0 {
            return Err(Error::InvalidConfig("max_backtracks must be positive".into()));
        }
        if let Some(l) = self.lipschitz {
            if !(l > 0.0) {
                return Err(Error::InvalidConfig(format!("lipschitz constant must be positive, got {l}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub alpha: f64,
    /// Objective-vector evaluations consumed.
    pub f_evals: usize,
    pub x_new: Vec<f64>,
    pub f_new: Vec<f64>,
}

/// `F(x + αd) ⪯ F(x) + ρ α ψ(x, d) e`. Non-finite trial values never pass.
pub fn armijo_accepts(f_x: &[f64], f_trial: &[f64], alpha: f64, psi_xd: f64, rho: f64) -> bool {
    let slope = rho * alpha * psi_xd;
    f_x.len() == f_trial.len()
        && f_x
            .iter()
            .zip(f_trial)
            .all(|(&a, &b)| b.is_finite() && b <= a + slope)
}

/// Largest `α ∈ {α₀ δⁱ}` passing [`armijo_accepts`], where `α₀` is `τₖ` or 1
/// according to `cfg.init_mode`.
pub fn armijo_backtrack<P: Problem + ?Sized>(
    problem: &P,
    x: &[f64],
    f_x: &[f64],
    d: &[f64],
    psi_xd: f64,
    cfg: &LineSearchConfig,
) -> Result<StepOutcome> {
    check_len(x.len(), d.len())?;
    let d_sq = dot(d, d);
    if !(psi_xd < 0.0) || d_sq == 0.0 {
        return Err(Error::NotDescent { psi_d: psi_xd });
    }
    let mut alpha = match cfg.init_mode {
        InitMode::TauK => -psi_xd / d_sq,
        InitMode::Unit => 1.0,
    };
    let mut x_new = vec![0.0; x.len()];
    for evals in 1..=cfg.max_backtracks {
        for ((xn, xi), di) in x_new.iter_mut().zip(x).zip(d) {
            *xn = xi + alpha * di;
        }
        let f_new = problem.values(&x_new);
        if armijo_accepts(f_x, &f_new, alpha, psi_xd, cfg.rho) {
            return Ok(StepOutcome {
                alpha,
                f_evals: evals,
                x_new,
                f_new,
            });
        }
        alpha *= cfg.delta;
    }
    Err(Error::LineSearchFailure {
        backtracks: cfg.max_backtracks,
        alpha,
    })
}

/// `α = −ψ(x, d) / (2 L ‖d‖²)`
pub fn lipschitz_step(psi_xd: f64, d_norm_sq: f64, lipschitz: f64) -> f64 {
    -psi_xd / (2.0 * lipschitz * d_norm_sq)
}
