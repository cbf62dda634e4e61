//! The steepest-descent subproblem `min_d ψ(x, d) + ‖d‖²/2`, solved through
//! its dual: minimize `‖Σ λᵢ ∇Fᵢ(x)‖²` over the unit simplex, then recover
//! `v = −Σ λᵢ ∇Fᵢ(x)`.

use crate::error::{Error, Result};
use crate::mo_core::{norm, psi, Jacobian};

/// Default tolerance on the dual KKT residual.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Inner iteration budget of the projected-gradient dual solver.
pub const MAX_INNER_ITERS: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct SubproblemSolution {
    /// Steepest-descent direction `v(x)`.
    pub v: Vec<f64>,
    /// Optimal value `θ(x) = ψ(x, v) + ‖v‖²/2`.
    pub theta: f64,
    /// Dual weights on the unit simplex.
    pub lambda: Vec<f64>,
    /// `‖λ − P(λ − ∇q(λ))‖∞` for the dual objective `q`.
    pub kkt_residual: f64,
    /// `ψ(x, v)`, kept because every direction rule needs it.
    pub psi_v: f64,
}

impl SubproblemSolution {
    pub fn v_norm(&self) -> f64 {
        norm(&self.v)
    }
}

/// Solves the dual subproblem for `jac` to KKT residual `tol`.
///
/// One objective returns `v = −∇F₁`; two objectives use the closed-form
/// minimizer of the 1-D quadratic; larger `m` runs projected gradient on the
/// simplex from the uniform weights.
pub fn solve_dual(jac: &Jacobian, tol: f64) -> Result<SubproblemSolution> {
    if !(tol > 0.0) {
        return Err(Error::InvalidConfig(format!("dual tolerance must be positive, got {tol}")));
    }
    if !jac.is_finite() {
        return Err(Error::NonFinite { what: "Jacobian" });
    }
    let m = jac.num_objectives();
    if m == 0 {
        return Err(Error::InvalidConfig("problem has no objectives".into()));
    }
    let gram = jac.gram();
    let lambda = match m {
        1 => vec![1.0],
        2 => two_objective_weights(&gram),
        _ => projected_gradient(&gram, m, tol, MAX_INNER_ITERS, |_| {}),
    };
    finish(jac, &gram, lambda)
}

/// `λ₁ = clamp(⟨g₂, g₂ − g₁⟩ / ‖g₁ − g₂‖², 0, 1)`, written in Gram entries.
fn two_objective_weights(gram: &[f64]) -> Vec<f64> {
    let (g11, g12, g22) = (gram[0], gram[1], gram[3]);
    let denom = g11 - 2.0 * g12 + g22;
    if denom <= 0.0 {
        return vec![0.5, 0.5];
    }
    let l1 = ((g22 - g12) / denom).clamp(0.0, 1.0);
    vec![l1, 1.0 - l1]
}

fn finish(jac: &Jacobian, gram: &[f64], lambda: Vec<f64>) -> Result<SubproblemSolution> {
    let mut v = jac.weighted_sum(&lambda);
    v.iter_mut().for_each(|c| *c = -*c);
    let mut psi_v = psi(jac, &v)?;
    let vn = norm(&v);
    let mut theta = psi_v + 0.5 * vn * vn;
    // Inexact weights near a critical point can give a primal value above
    // that of d = 0; fall back to it.
    if theta > 0.0 {
        v.iter_mut().for_each(|c| *c = 0.0);
        psi_v = 0.0;
        theta = 0.0;
    }
    let kkt_residual = kkt_residual(gram, lambda.len(), &lambda);
    Ok(SubproblemSolution {
        v,
        theta,
        lambda,
        kkt_residual,
        psi_v,
    })
}

fn dual_gradient(gram: &[f64], m: usize, lambda: &[f64]) -> Vec<f64> {
    (0..m)
        .map(|i| 2.0 * (0..m).map(|j| gram[i * m + j] * lambda[j]).sum::<f64>())
        .collect()
}

fn dual_value(gram: &[f64], m: usize, lambda: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..m {
        for j in 0..m {
            s += lambda[i] * gram[i * m + j] * lambda[j];
        }
    }
    s
}

fn kkt_residual(gram: &[f64], m: usize, lambda: &[f64]) -> f64 {
    let grad = dual_gradient(gram, m, lambda);
    let trial: Vec<f64> = lambda.iter().zip(&grad).map(|(l, g)| l - g).collect();
    let proj = project_simplex(&trial);
    lambda
        .iter()
        .zip(&proj)
        .fold(0.0, |acc, (a, b)| acc.max((a - b).abs()))
}

/// Projected gradient on the simplex with fixed step `1/(2‖G‖_F)`, where
/// `G` is the Gram matrix (`2‖G‖_F` bounds the Lipschitz constant of the
/// dual gradient). `observe` receives the dual objective after every step.
pub(crate) fn projected_gradient(
    gram: &[f64],
    m: usize,
    tol: f64,
    max_iters: usize,
    mut observe: impl FnMut(f64),
) -> Vec<f64> {
    let mut lambda = vec![1.0 / m as f64; m];
    let frob = gram.iter().map(|g| g * g).sum::<f64>().sqrt();
    if frob == 0.0 {
        return lambda;
    }
    let step = 1.0 / (2.0 * frob);
    for _ in 0..max_iters {
        if kkt_residual(gram, m, &lambda) <= tol {
            break;
        }
        let grad = dual_gradient(gram, m, &lambda);
        let trial: Vec<f64> = lambda.iter().zip(&grad).map(|(l, g)| l - step * g).collect();
        let next = project_simplex(&trial);
        if next == lambda {
            break;
        }
        lambda = next;
        observe(dual_value(gram, m, &lambda));
    }
    lambda
}

/// Euclidean projection onto `{λ ≥ 0, Σλ = 1}` by the sort-and-threshold rule.
pub fn project_simplex(y: &[f64]) -> Vec<f64> {
    let mut sorted = y.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut shift = 0.0;
    for (k, &u) in sorted.iter().enumerate() {
        cumsum += u;
        let t = (cumsum - 1.0) / (k + 1) as f64;
        if u - t > 0.0 {
            shift = t;
        }
    }
    y.iter().map(|v| (v - shift).max(0.0)).collect()
}

/// `|θ| ≤ eps_theta`, the practical Pareto-criticality test.
pub fn is_critical(sol: &SubproblemSolution, eps_theta: f64) -> bool {
    sol.theta.abs() <= eps_theta
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn jac(rows: &[&[f64]]) -> Jacobian {
        Jacobian::from_rows(rows).unwrap()
    }

    #[test]
    fn single_objective_is_negative_gradient() {
        let s = solve_dual(&jac(&[&[3.0]]), DEFAULT_TOL).unwrap();
        assert_eq!(s.lambda, vec![1.0]);
        assert_eq!(s.v, vec![-3.0]);
        assert_eq!(s.theta, -4.5);
    }

    #[test]
    fn example_problem_critical_at_zero() {
        // F = (x² − 4, (x − 1)²) at x = 0
        let s = solve_dual(&jac(&[&[0.0], &[-2.0]]), DEFAULT_TOL).unwrap();
        assert_eq!(s.lambda, vec![1.0, 0.0]);
        assert_eq!(s.v[0].abs(), 0.0);
        assert_eq!(s.theta, 0.0);
        assert!(is_critical(&s, 1e-6));
    }

    #[test]
    fn example_problem_at_two() {
        let s = solve_dual(&jac(&[&[4.0], &[2.0]]), DEFAULT_TOL).unwrap();
        assert_eq!(s.lambda, vec![0.0, 1.0]);
        assert_eq!(s.v, vec![-2.0]);
        assert_eq!(s.theta, -2.0);
        assert!(!is_critical(&s, 1e-6));

        // grid over λ₁ ∈ [0, 1] with step 1e-4
        let best = (0..=10_000)
            .map(|i| i as f64 * 1e-4)
            .map(|l| (l, (4.0 * l + 2.0 * (1.0 - l)).powi(2)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        assert_abs_diff_eq!(best.0, s.lambda[0], epsilon = 1e-12);
    }

    #[test]
    fn identical_gradients_give_uniform_weights() {
        let s = solve_dual(&jac(&[&[1.0, 2.0], &[1.0, 2.0]]), DEFAULT_TOL).unwrap();
        assert_eq!(s.lambda, vec![0.5, 0.5]);
        let s3 = solve_dual(&jac(&[&[1.0], &[1.0], &[1.0]]), DEFAULT_TOL).unwrap();
        for l in &s3.lambda {
            assert_abs_diff_eq!(*l, 1.0 / 3.0, epsilon = 1e-15);
        }
        assert_abs_diff_eq!(s3.v[0], -1.0, epsilon = 1e-15);
    }

    #[test]
    fn criticality_threshold() {
        let mut s = solve_dual(&jac(&[&[0.0]]), DEFAULT_TOL).unwrap();
        assert!(is_critical(&s, 1e-6));
        s.theta = -2.0;
        assert!(!is_critical(&s, 1e-6));
        s.theta = -5e-7;
        assert!(is_critical(&s, 1e-6));
    }

    #[test]
    fn non_finite_jacobian_rejected() {
        let j = jac(&[&[f64::NAN, 0.0], &[1.0, 0.0]]);
        assert!(matches!(solve_dual(&j, 1e-10), Err(Error::NonFinite { .. })));
    }

    #[test]
    fn projection_examples() {
        assert_eq!(project_simplex(&[0.2, 0.3, 0.5]), vec![0.2, 0.3, 0.5]);
        assert_eq!(project_simplex(&[2.0, 0.0]), vec![1.0, 0.0]);
        let p = project_simplex(&[0.0, 0.0, 0.0]);
        for v in p {
            assert_abs_diff_eq!(v, 1.0 / 3.0, epsilon = 1e-15);
        }
    }

    fn random_jac(m: usize) -> impl Strategy<Value = Jacobian> {
        (1usize..6).prop_flat_map(move |n| {
            prop::collection::vec(-10.0..10.0f64, m * n).prop_map(move |d| {
                let rows: Vec<Vec<f64>> = d.chunks(n).map(|c| c.to_vec()).collect();
                Jacobian::from_rows(&rows).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn solution_invariants(j in (2usize..5).prop_flat_map(random_jac)) {
            let s = solve_dual(&j, DEFAULT_TOL).unwrap();
            let sum: f64 = s.lambda.iter().sum();
            prop_assert!((sum - 1.0).abs() <= 1e-10);
            prop_assert!(s.lambda.iter().all(|&l| l >= -1e-10));
            let scale = crate::mo_core::row_max_norm(&j);
            prop_assert!(s.theta <= 0.0);
            let vn = s.v_norm();
            prop_assert!(vn <= 2.0 * scale + 1e-12);
            if vn > 1e-8 {
                prop_assert!(s.theta < 0.0);
                prop_assert!(s.psi_v < -vn * vn / 2.0 + 1e-9 * vn * vn);
            }
        }

        #[test]
        fn dual_objective_never_increases(j in (3usize..5).prop_flat_map(random_jac)) {
            let m = j.num_objectives();
            let gram = j.gram();
            let mut prev = dual_value(&gram, m, &vec![1.0 / m as f64; m]);
            let mut ok = true;
            projected_gradient(&gram, m, 1e-12, 2_000, |val| {
                ok &= val <= prev + 1e-12 * prev.abs().max(1.0);
                prev = val;
            });
            prop_assert!(ok);
        }

        #[test]
        fn projection_lands_on_simplex(y in prop::collection::vec(-5.0..5.0f64, 1..6)) {
            let p = project_simplex(&y);
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!(p.iter().all(|&v| v >= 0.0));
        }
    }
}
