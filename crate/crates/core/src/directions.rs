//! Search directions: the memory gradient direction that blends `v(xᵏ)` with
//! the last `N` directions, and the steepest-descent / conjugate-gradient
//! baselines it is compared against.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::mo_core::{axpy, chi_plus, norm, psi, row_max_norm, Jacobian};
use crate::subproblem::SubproblemSolution;

/// How `γₖ` is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GammaRule {
    /// `γₖ = 1` for every k.
    Constant,
    /// `γₖ = ‖xᵏ − xᵏ⁻¹‖ / ‖v(xᵏ) − v(xᵏ⁻¹)‖`, reset to 1 below `γ*`.
    Bb,
}

/// Whether the memory terms are active. `Disabled` forces every `φₖⱼ` to 0,
/// hence every `βₖⱼ` to 0, which turns the method into steepest descent
/// scaled by `γₖ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum MemoryWeights {
    #[default]
    Adaptive,
    Disabled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MmgParams {
    /// Memory depth `N`.
    pub memory: usize,
    pub gamma_rule: GammaRule,
    /// Lower safeguard `γ*`.
    pub gamma_star: f64,
    /// Offset `ζ` in `φₖⱼ`.
    pub zeta: f64,
    /// Upper cap on the `Bb` rule.
    pub gamma_max: f64,
    pub weights: MemoryWeights,
}

impl Default for MmgParams {
    fn default() -> Self {
        Self {
            memory: 5,
            gamma_rule: GammaRule::Constant,
            gamma_star: 1e-10,
            zeta: 1e-4,
            gamma_max: 1e6,
            weights: MemoryWeights::Adaptive,
        }
    }
}

impl MmgParams {
    pub fn validate(&self) -> Result<()> {
        if self.memory == 0 {
            return Err(Error::InvalidConfig("memory depth N must be at least 1".into()));
        }
        if !(self.gamma_star > 0.0) || !(self.zeta > 0.0) {
            return Err(Error::InvalidConfig("gamma_star and zeta must be positive".into()));
        }
        if !(self.gamma_max >= self.gamma_star) {
            return Err(Error::InvalidConfig("gamma_max must be at least gamma_star".into()));
        }
        Ok(())
    }
}

/// Conjugate-gradient style baselines sharing the `v + β d` shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BaselineKind {
    #[serde(rename = "SD")]
    SteepestDescent,
    #[serde(rename = "FR")]
    FletcherReeves,
    #[serde(rename = "CD")]
    ConjugateDescent,
    #[serde(rename = "HS")]
    HestenesStiefel,
}

/// What an iteration leaves behind for the next direction computation.
#[derive(Debug, Clone)]
pub struct DirectionState {
    /// `dᵏ⁻¹, dᵏ⁻², …`, newest first.
    history: VecDeque<Vec<f64>>,
    capacity: usize,
    prev_x: Vec<f64>,
    prev_v: Vec<f64>,
    prev_psi_v: f64,
    prev_psi_d: f64,
    prev_jac: Option<Jacobian>,
    k: usize,
}

impl DirectionState {
    pub fn new(capacity: usize) -> Self {
        Self {
            history: VecDeque::with_capacity(capacity),
            capacity: capacity.max(1),
            prev_x: Vec::new(),
            prev_v: Vec::new(),
            prev_psi_v: 0.0,
            prev_psi_d: 0.0,
            prev_jac: None,
            k: 0,
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// `Nₖ = min{k, N}`.
    pub fn memory_len(&self) -> usize {
        self.history.len()
    }

    pub fn history(&self) -> impl Iterator<Item = &[f64]> {
        self.history.iter().map(Vec::as_slice)
    }

    pub fn prev_psi_v(&self) -> f64 {
        self.prev_psi_v
    }

    pub fn prev_psi_d(&self) -> f64 {
        self.prev_psi_d
    }

    /// Records iteration k's data after `dᵏ` has been chosen.
    pub fn push(&mut self, x: &[f64], jac: &Jacobian, sol: &SubproblemSolution, d: Vec<f64>, psi_d: f64) {
        if self.history.len() == self.capacity {
            self.history.pop_back();
        }
        self.history.push_front(d);
        self.prev_x = x.to_vec();
        self.prev_v = sol.v.clone();
        self.prev_psi_v = sol.psi_v;
        self.prev_psi_d = psi_d;
        self.prev_jac = Some(jac.clone());
        self.k += 1;
    }

    fn last_direction(&self) -> Option<&[f64]> {
        self.history.front().map(Vec::as_slice)
    }
}

pub fn compute_gamma(state: &DirectionState, x: &[f64], v: &[f64], params: &MmgParams) -> f64 {
    if state.k == 0 || params.gamma_rule == GammaRule::Constant {
        return 1.0;
    }
    let q: f64 = x
        .iter()
        .zip(&state.prev_x)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    let h: f64 = v
        .iter()
        .zip(&state.prev_v)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    if h == 0.0 {
        return 1.0;
    }
    let ratio = q / h;
    if !ratio.is_finite() || ratio < params.gamma_star {
        1.0
    } else {
        ratio.min(params.gamma_max)
    }
}

/// `φₖⱼ = (ψ(xᵏ, dᵏ⁻ʲ) + ‖JF(xᵏ)‖‖dᵏ⁻ʲ‖ + ζ) / γₖ`
pub fn compute_phi(psi_d_prev: f64, jf_norm: f64, d_prev_norm: f64, gamma: f64, zeta: f64) -> f64 {
    (psi_d_prev + jf_norm * d_prev_norm + zeta) / gamma
}

/// `βₖⱼ = −(1/Nₖ) ψ(xᵏ, v(xᵏ)) φₖⱼ⁺`
pub fn compute_beta(psi_v: f64, memory_len: usize, phi: f64) -> f64 {
    -psi_v * chi_plus(phi) / memory_len as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct MemoryDirection {
    pub d: Vec<f64>,
    pub gamma: f64,
    pub betas: Vec<f64>,
    /// `ψ(xᵏ, dᵏ)` at the current Jacobian.
    pub psi_d: f64,
}

/// `dᵏ = γₖ v(xᵏ) + Σⱼ βₖⱼ dᵏ⁻ʲ` with `j` over the stored history.
///
/// `ψ(xᵏ, dᵏ⁻ʲ)` is evaluated against the current Jacobian. Returns
/// [`Error::NotDescent`] if the result is not a descent direction, which the
/// parameter rules exclude whenever `v(xᵏ) ≠ 0`.
pub fn memory_direction(
    cur: &SubproblemSolution,
    x: &[f64],
    jac: &Jacobian,
    state: &DirectionState,
    params: &MmgParams,
) -> Result<MemoryDirection> {
    check_len(jac.dim(), cur.v.len())?;
    check_len(jac.dim(), x.len())?;
    let gamma = compute_gamma(state, x, &cur.v, params);
    let mut d: Vec<f64> = cur.v.iter().map(|c| gamma * c).collect();
    let mut betas = Vec::with_capacity(state.memory_len());
    if state.k > 0 && state.memory_len() > 0 {
        let jf_norm = row_max_norm(jac);
        let n_k = state.memory_len();
        for prev in state.history() {
            let phi = match params.weights {
                MemoryWeights::Adaptive => {
                    compute_phi(psi(jac, prev)?, jf_norm, norm(prev), gamma, params.zeta)
                }
                MemoryWeights::Disabled => 0.0,
            };
            let beta = compute_beta(cur.psi_v, n_k, phi);
            if beta != 0.0 {
                axpy(beta, prev, &mut d);
            }
            betas.push(beta);
        }
    }
    let psi_d = psi(jac, &d)?;
    if !(psi_d < 0.0) {
        return Err(Error::NotDescent { psi_d });
    }
    Ok(MemoryDirection {
        d,
        gamma,
        betas,
        psi_d,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineDirection {
    pub d: Vec<f64>,
    pub beta: f64,
    pub psi_d: f64,
    /// The conjugate direction was not descent and `v(xᵏ)` was used instead.
    pub restarted: bool,
}

/// `dᵏ = v(xᵏ) + βₖ dᵏ⁻¹` for the CG family, `v(xᵏ)` for SD and at k = 0.
///
/// * FR: `βₖ = ψ(xᵏ, vᵏ) / ψ(xᵏ⁻¹, vᵏ⁻¹)`
/// * CD: `βₖ = ψ(xᵏ, vᵏ) / ψ(xᵏ⁻¹, dᵏ⁻¹)`
/// * HS: `βₖ = max{0, (ψ(xᵏ⁻¹, vᵏ) − ψ(xᵏ, vᵏ)) / (ψ(xᵏ, dᵏ⁻¹) − ψ(xᵏ⁻¹, dᵏ⁻¹))}`,
///   0 when the denominator vanishes.
///
/// A conjugate direction that fails `ψ(xᵏ, dᵏ) < 0` is replaced by `v(xᵏ)`.
pub fn baseline_direction(
    kind: BaselineKind,
    cur: &SubproblemSolution,
    jac: &Jacobian,
    state: &DirectionState,
) -> Result<BaselineDirection> {
    check_len(jac.dim(), cur.v.len())?;
    let prev_d = match (kind, state.last_direction()) {
        (BaselineKind::SteepestDescent, _) | (_, None) => {
            return Ok(BaselineDirection {
                d: cur.v.clone(),
                beta: 0.0,
                psi_d: cur.psi_v,
                restarted: false,
            })
        }
        (_, Some(prev)) => prev,
    };
    let beta = match kind {
        BaselineKind::SteepestDescent => 0.0,
        BaselineKind::FletcherReeves => ratio_or_zero(cur.psi_v, state.prev_psi_v),
        BaselineKind::ConjugateDescent => ratio_or_zero(cur.psi_v, state.prev_psi_d),
        BaselineKind::HestenesStiefel => {
            let prev_jac = state.prev_jac.as_ref().expect("history implies a stored Jacobian");
            let num = psi(prev_jac, &cur.v)? - cur.psi_v;
            let den = psi(jac, prev_d)? - state.prev_psi_d;
            ratio_or_zero(num, den).max(0.0)
        }
    };
    let mut d = cur.v.clone();
    axpy(beta, prev_d, &mut d);
    let psi_d = psi(jac, &d)?;
    if psi_d < 0.0 {
        Ok(BaselineDirection {
            d,
            beta,
            psi_d,
            restarted: false,
        })
    } else {
        Ok(BaselineDirection {
            d: cur.v.clone(),
            beta: 0.0,
            psi_d: cur.psi_v,
            restarted: true,
        })
    }
}

fn ratio_or_zero(num: f64, den: f64) -> f64 {
    let r = num / den;
    if den == 0.0 || !r.is_finite() {
        0.0
    } else {
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subproblem::{solve_dual, DEFAULT_TOL};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn jac(rows: &[&[f64]]) -> Jacobian {
        Jacobian::from_rows(rows).unwrap()
    }

    fn bb() -> MmgParams {
        MmgParams {
            gamma_rule: GammaRule::Bb,
            ..MmgParams::default()
        }
    }

    fn state_after(x: &[f64], v: &[f64], d: &[f64]) -> DirectionState {
        let j = Jacobian::from_rows(&[vec![1.0; x.len()]]).unwrap();
        let sol = SubproblemSolution {
            v: v.to_vec(),
            theta: 0.0,
            lambda: vec![1.0],
            kkt_residual: 0.0,
            psi_v: psi(&j, v).unwrap(),
        };
        let mut s = DirectionState::new(1);
        s.push(x, &j, &sol, d.to_vec(), psi(&j, d).unwrap());
        s
    }

    #[test]
    fn gamma_constant_rule() {
        let s = state_after(&[0.0], &[1.0], &[1.0]);
        assert_eq!(compute_gamma(&s, &[5.0], &[3.0], &MmgParams::default()), 1.0);
        assert_eq!(compute_gamma(&DirectionState::new(3), &[5.0], &[3.0], &bb()), 1.0);
    }

    #[test]
    fn gamma_bb_rule() {
        let s = state_after(&[0.0, 0.0], &[0.0, 0.0], &[1.0, 0.0]);
        assert_eq!(compute_gamma(&s, &[2.0, 0.0], &[1.0, 0.0], &bb()), 2.0);
        // ratio 1e-12 below γ* = 1e-10
        assert_eq!(compute_gamma(&s, &[1e-12, 0.0], &[1.0, 0.0], &bb()), 1.0);
        // h = 0
        assert_eq!(compute_gamma(&s, &[1.0, 0.0], &[0.0, 0.0], &bb()), 1.0);
        // cap
        assert_eq!(compute_gamma(&s, &[1e9, 0.0], &[1.0, 0.0], &bb()), 1e6);
    }

    #[test]
    fn phi_examples() {
        assert_eq!(compute_phi(-4.0, 2.0, 1.0, 1.0, 1.0), -1.0);
        assert_eq!(compute_phi(0.0, 0.0, 0.0, 1.0, 1.0), 1.0);
        assert_eq!(compute_phi(3.0, 5.0, 2.0, 2.0, 1.0), 7.0);
    }

    #[test]
    fn beta_examples() {
        assert_eq!(compute_beta(-4.0, 2, 8.0), 0.25);
        assert_eq!(compute_beta(-4.0, 2, 0.0), 0.0);
        assert_eq!(compute_beta(-1.0, 1, 1.0), 1.0);
    }

    #[test]
    fn first_direction_is_scaled_v() {
        let j = jac(&[&[3.0, -1.0]]);
        let sol = solve_dual(&j, DEFAULT_TOL).unwrap();
        let out = memory_direction(&sol, &[0.0, 0.0], &j, &DirectionState::new(3), &MmgParams::default())
            .unwrap();
        assert_eq!(out.d, vec![-3.0, 1.0]);
        assert_eq!(out.gamma, 1.0);
        assert!(out.betas.is_empty());
    }

    #[test]
    fn disabled_weights_reduce_to_v() {
        let j = jac(&[&[4.0], &[2.0]]);
        let sol = solve_dual(&j, DEFAULT_TOL).unwrap();
        let s = state_after(&[3.0], &[-4.0], &[-4.0]);
        let params = MmgParams {
            memory: 1,
            weights: MemoryWeights::Disabled,
            ..MmgParams::default()
        };
        let out = memory_direction(&sol, &[2.0], &j, &s, &params).unwrap();
        assert_eq!(out.betas, vec![0.0]);
        assert_eq!(out.d, sol.v);
    }

    #[test]
    fn hand_computed_step_on_example_problem() {
        // F = (x² − 4, (x − 1)²); previous direction d⁰ = −2, current x¹ = 2.
        let j = jac(&[&[4.0], &[2.0]]);
        let sol = solve_dual(&j, DEFAULT_TOL).unwrap();
        let s = state_after(&[3.0], &[-4.0], &[-2.0]);
        let params = MmgParams {
            memory: 1,
            ..MmgParams::default()
        };
        let out = memory_direction(&sol, &[2.0], &j, &s, &params).unwrap();

        // ψ(x¹, d⁰) = max(4·−2, 2·−2) = −4, ‖JF‖ = 4, ‖d⁰‖ = 2, γ = 1
        let phi = (-4.0 + 4.0 * 2.0 + 1e-4) / 1.0;
        // ψ(x¹, v) = max(4·−2, 2·−2) = −4, N₁ = 1
        let beta = 4.0 / phi;
        assert_abs_diff_eq!(out.betas[0], beta, epsilon = 1e-15);
        assert_abs_diff_eq!(out.d[0], -2.0 + beta * -2.0, epsilon = 1e-15);
        assert!(out.psi_d <= 0.5e-10 * sol.psi_v);
    }

    #[test]
    fn fletcher_reeves_ratio() {
        let j = jac(&[&[2.0]]);
        let sol = solve_dual(&j, DEFAULT_TOL).unwrap(); // v = −2, ψ = −4
        let s = state_after(&[0.0], &[-8.0], &[-1.0]); // prev ψ(v) = −8
        let out = baseline_direction(BaselineKind::FletcherReeves, &sol, &j, &s).unwrap();
        assert_eq!(out.beta, 0.5);
        assert_eq!(out.d, vec![-2.5]);
    }

    #[test]
    fn steepest_descent_is_v() {
        let j = jac(&[&[2.0, 1.0], &[-1.0, 3.0]]);
        let sol = solve_dual(&j, DEFAULT_TOL).unwrap();
        let s = state_after(&[0.0, 0.0], &[-1.0, 0.0], &[-1.0, 0.0]);
        let out = baseline_direction(BaselineKind::SteepestDescent, &sol, &j, &s).unwrap();
        assert_eq!(out.d, sol.v);
    }

    #[test]
    fn hestenes_stiefel_zero_denominator() {
        // ψ(xᵏ, dᵏ⁻¹) = ψ(xᵏ⁻¹, dᵏ⁻¹) = −1 while the numerator is 25.
        let prev_jac = jac(&[&[1.0, 0.0]]);
        let prev_sol = solve_dual(&prev_jac, DEFAULT_TOL).unwrap();
        let mut s = DirectionState::new(1);
        s.push(&[0.0, 0.0], &prev_jac, &prev_sol, vec![-1.0, 0.0], -1.0);

        let j = jac(&[&[1.0, 5.0]]);
        let sol = solve_dual(&j, DEFAULT_TOL).unwrap();
        assert!(psi(&prev_jac, &sol.v).unwrap() - sol.psi_v > 0.0);
        let out = baseline_direction(BaselineKind::HestenesStiefel, &sol, &j, &s).unwrap();
        assert_eq!(out.beta, 0.0);
        assert_eq!(out.d, sol.v);
    }

    proptest! {
        #[test]
        fn memory_direction_has_sufficient_descent(
            rows in prop::collection::vec(prop::collection::vec(-5.0..5.0f64, 3), 2..4),
            hist in prop::collection::vec(prop::collection::vec(-5.0..5.0f64, 3), 1..6),
            x_prev in prop::collection::vec(-5.0..5.0f64, 3),
            bb_rule in any::<bool>(),
        ) {
            let j = Jacobian::from_rows(&rows).unwrap();
            let sol = solve_dual(&j, DEFAULT_TOL).unwrap();
            prop_assume!(sol.v_norm() > 1e-6);
            let params = MmgParams {
                memory: hist.len(),
                gamma_rule: if bb_rule { GammaRule::Bb } else { GammaRule::Constant },
                ..MmgParams::default()
            };
            let mut s = DirectionState::new(params.memory);
            let jp = Jacobian::from_rows(&[vec![1.0, 0.0, 0.0]]).unwrap();
            let psol = solve_dual(&jp, DEFAULT_TOL).unwrap();
            for h in &hist {
                s.push(&x_prev, &jp, &psol, h.clone(), -1.0);
            }
            let out = memory_direction(&sol, &[0.0, 0.0, 0.0], &j, &s, &params).unwrap();
            prop_assert!(out.gamma >= params.gamma_star);
            prop_assert!(out.betas.iter().all(|&b| b > 0.0));
            prop_assert!(out.psi_d <= 0.5 * params.gamma_star * sol.psi_v + 1e-12);
            prop_assert!(out.psi_d <= 0.5 * out.gamma * sol.psi_v + 1e-12);
        }
    }
}
