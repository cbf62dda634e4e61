//! Shared types for smooth multiobjective problems and the scalar tools built
//! on them: the max-linearization `psi`, the row-max matrix norm, the `χ⁺`
//! pseudo-inverse and componentwise Pareto dominance.

use crate::error::{check_len, Error, Result};

/// Dense `m × n` Jacobian stored row-major, one row per objective gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct Jacobian {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Jacobian {
    pub fn zeros(m: usize, n: usize) -> Self {
        Self {
            rows: m,
            cols: n,
            data: vec![0.0; m * n],
        }
    }

    /// Builds a Jacobian from its gradient rows. All rows must share a length.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut data = Vec::with_capacity(rows.len() * n);
        for r in rows {
            check_len(n, r.as_ref().len())?;
            data.extend_from_slice(r.as_ref());
        }
        Ok(Self {
            rows: rows.len(),
            cols: n,
            data,
        })
    }

    pub fn num_objectives(&self) -> usize {
        self.rows
    }

    pub fn dim(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.cols.max(1)).take(self.rows)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// `J d`, the vector of directional derivatives of each objective.
    pub fn apply(&self, d: &[f64]) -> Result<Vec<f64>> {
        check_len(self.cols, d.len())?;
        Ok(self.rows().map(|g| dot(g, d)).collect())
    }

    /// Gram matrix `J Jᵀ` (m × m, row-major).
    pub fn gram(&self) -> Vec<f64> {
        let m = self.rows;
        let mut g = vec![0.0; m * m];
        for i in 0..m {
            for j in i..m {
                let v = dot(self.row(i), self.row(j));
                g[i * m + j] = v;
                g[j * m + i] = v;
            }
        }
        g
    }

    /// `Σ wᵢ ∇Fᵢ`.
    pub fn weighted_sum(&self, weights: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for (g, &w) in self.rows().zip(weights) {
            axpy(w, g, &mut out);
        }
        out
    }

    /// Multiplies row `i` by `factors[i]`.
    pub fn scale_rows(&mut self, factors: &[f64]) {
        for (i, &r) in factors.iter().enumerate().take(self.rows) {
            self.row_mut(i).iter_mut().for_each(|v| *v *= r);
        }
    }
}

/// A smooth vector-valued objective `F: ℝⁿ → ℝᵐ` with an analytic Jacobian.
///
/// Implementations must be pure: the same `x` always yields the same output.
pub trait Problem: Send + Sync {
    fn name(&self) -> &str;
    fn dim(&self) -> usize;
    fn num_objectives(&self) -> usize;
    fn values(&self, x: &[f64]) -> Vec<f64>;
    fn jacobian(&self, x: &[f64]) -> Jacobian;
}

impl<P: Problem + ?Sized> Problem for &P {
    fn name(&self) -> &str {
        (**self).name()
    }
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn num_objectives(&self) -> usize {
        (**self).num_objectives()
    }
    fn values(&self, x: &[f64]) -> Vec<f64> {
        (**self).values(x)
    }
    fn jacobian(&self, x: &[f64]) -> Jacobian {
        (**self).jacobian(x)
    }
}

/// Evaluates `F(x)`, rejecting NaN or infinite components.
pub fn eval_checked<P: Problem + ?Sized>(problem: &P, x: &[f64]) -> Result<Vec<f64>> {
    check_len(problem.dim(), x.len())?;
    let f = problem.values(x);
    check_len(problem.num_objectives(), f.len())?;
    if f.iter().all(|v| v.is_finite()) {
        Ok(f)
    } else {
        Err(Error::NonFinite {
            what: "objective value",
        })
    }
}

/// Evaluates `JF(x)`, rejecting NaN or infinite entries.
pub fn jacobian_checked<P: Problem + ?Sized>(problem: &P, x: &[f64]) -> Result<Jacobian> {
    check_len(problem.dim(), x.len())?;
    let j = problem.jacobian(x);
    check_len(problem.num_objectives(), j.num_objectives())?;
    check_len(problem.dim(), j.dim())?;
    if j.is_finite() {
        Ok(j)
    } else {
        Err(Error::NonFinite { what: "Jacobian" })
    }
}

/// `ψ(x, d) = maxᵢ ⟨∇Fᵢ(x), d⟩`. Negative exactly when `d` is a descent
/// direction for every objective.
pub fn psi(jac: &Jacobian, d: &[f64]) -> Result<f64> {
    check_len(jac.dim(), d.len())?;
    Ok(jac
        .rows()
        .map(|g| dot(g, d))
        .fold(f64::NEG_INFINITY, f64::max))
}

/// Largest Euclidean row norm; the operator norm from `(ℝⁿ, ‖·‖₂)` to
/// `(ℝᵐ, ‖·‖∞)`.
pub fn row_max_norm(jac: &Jacobian) -> f64 {
    jac.rows().map(norm).fold(0.0, f64::max)
}

/// `χ⁺ = 1/χ` for `χ ≠ 0` and `0` otherwise.
pub fn chi_plus(chi: f64) -> f64 {
    if chi == 0.0 {
        0.0
    } else {
        1.0 / chi
    }
}

/// `a ⪯ b` componentwise and `a ≠ b`.
pub fn dominates(a: &[f64], b: &[f64]) -> Result<bool> {
    check_len(a.len(), b.len())?;
    Ok(dominates_unchecked(a, b))
}

pub(crate) fn dominates_unchecked(a: &[f64], b: &[f64]) -> bool {
    let mut strict = false;
    for (&x, &y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            strict = true;
        }
    }
    strict
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |acc, v| acc.max(v.abs()))
}

/// `y ← y + alpha·x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn jac(rows: &[&[f64]]) -> Jacobian {
        Jacobian::from_rows(rows).unwrap()
    }

    #[test]
    fn psi_examples() {
        let j = jac(&[&[1.0, 0.0], &[0.0, 1.0]]);
        assert_eq!(psi(&j, &[1.0, 1.0]).unwrap(), 1.0);
        assert_eq!(psi(&j, &[0.0, 0.0]).unwrap(), 0.0);
        let single = jac(&[&[2.0, -3.0]]);
        assert_eq!(psi(&single, &[0.5, 1.0]).unwrap(), 2.0 * 0.5 - 3.0);
    }

    #[test]
    fn psi_rejects_bad_length() {
        let j = jac(&[&[1.0, 0.0]]);
        assert!(matches!(
            psi(&j, &[1.0]),
            Err(Error::DimensionMismatch { expected: 2, actual: 1 })
        ));
    }

    #[test]
    fn row_max_norm_examples() {
        assert_eq!(row_max_norm(&jac(&[&[3.0, 4.0], &[1.0, 0.0]])), 5.0);
        assert_eq!(row_max_norm(&Jacobian::zeros(3, 4)), 0.0);
        assert_eq!(row_max_norm(&jac(&[&[1.0, 1.0, 1.0, 1.0]])), 2.0);
    }

    #[test]
    fn chi_plus_examples() {
        assert_eq!(chi_plus(0.0), 0.0);
        assert_eq!(chi_plus(2.0), 0.5);
        assert_eq!(chi_plus(-4.0), -0.25);
    }

    #[test]
    fn dominance_examples() {
        assert!(dominates(&[1.0, 2.0], &[2.0, 2.0]).unwrap());
        assert!(!dominates(&[1.0, 2.0], &[1.0, 2.0]).unwrap());
        assert!(!dominates(&[1.0, 3.0], &[2.0, 2.0]).unwrap());
        assert!(dominates(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn ragged_rows_rejected() {
        assert!(Jacobian::from_rows(&[vec![1.0, 2.0], vec![1.0]]).is_err());
    }

    fn jac_strategy() -> impl Strategy<Value = (Jacobian, Vec<f64>, Vec<f64>)> {
        (1usize..5, 1usize..6).prop_flat_map(|(m, n)| {
            (
                prop::collection::vec(-10.0..10.0f64, m * n),
                prop::collection::vec(-10.0..10.0f64, n),
                prop::collection::vec(-10.0..10.0f64, n),
            )
                .prop_map(move |(data, a, b)| {
                    let rows: Vec<Vec<f64>> = data.chunks(n).map(|c| c.to_vec()).collect();
                    (Jacobian::from_rows(&rows).unwrap(), a, b)
                })
        })
    }

    proptest! {
        #[test]
        fn chi_plus_product_bounded(chi in -1e6..1e6f64) {
            let p = chi * chi_plus(chi);
            prop_assert!(p <= 1.0 + 1e-15);
            if chi != 0.0 {
                prop_assert!((p - 1.0).abs() < 1e-15);
            } else {
                prop_assert_eq!(p, 0.0);
            }
        }

        #[test]
        fn psi_homogeneous((j, a, _b) in jac_strategy(), rho in 1e-3..1e3f64) {
            let lhs = psi(&j, &a.iter().map(|v| v * rho).collect::<Vec<_>>()).unwrap();
            let rhs = rho * psi(&j, &a).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs().max(1.0));
        }

        #[test]
        fn psi_subadditive((j, a, b) in jac_strategy()) {
            let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
            let lhs = psi(&j, &sum).unwrap();
            let rhs = psi(&j, &a).unwrap() + psi(&j, &b).unwrap();
            prop_assert!(lhs <= rhs + 1e-12 * rhs.abs().max(1.0));
        }

        #[test]
        fn dominance_is_a_strict_order(
            a in prop::collection::vec(0..4i32, 3),
            b in prop::collection::vec(0..4i32, 3),
            c in prop::collection::vec(0..4i32, 3),
        ) {
            let f = |v: &Vec<i32>| v.iter().map(|&x| x as f64).collect::<Vec<_>>();
            let (a, b, c) = (f(&a), f(&b), f(&c));
            prop_assert!(!dominates_unchecked(&a, &a));
            if dominates_unchecked(&a, &b) {
                prop_assert!(!dominates_unchecked(&b, &a));
                if dominates_unchecked(&b, &c) {
                    prop_assert!(dominates_unchecked(&a, &c));
                }
            }
        }
    }
}
