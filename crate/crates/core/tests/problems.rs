use momograd::mo_core::{psi, Problem};
use momograd::problems::{registry, sample_starts, scale};
use momograd::subproblem::{solve_dual, DEFAULT_TOL};

#[test]
fn values_and_jacobians_are_finite_in_the_box() {
    for p in registry() {
        for x in sample_starts(p.spec(), 10_000, 11) {
            let f = p.values(&x);
            assert_eq!(f.len(), 2);
            assert!(f.iter().all(|v| v.is_finite()), "{} F({x:?}) = {f:?}", p.name());
            let j = p.jacobian(&x);
            assert_eq!((j.num_objectives(), j.dim()), (2, p.dim()));
            assert!(j.is_finite(), "{} JF({x:?}) not finite", p.name());
        }
    }
}

#[test]
fn jacobians_match_central_differences() {
    let h = 1e-6;
    for p in registry() {
        for x in sample_starts(p.spec(), 100, 12) {
            let jac = p.jacobian(&x);
            let f = p.values(&x);
            let mut xp = x.clone();
            for k in 0..p.dim() {
                xp[k] = x[k] + h;
                let fp = p.values(&xp);
                xp[k] = x[k] - h;
                let fm = p.values(&xp);
                xp[k] = x[k];
                for i in 0..2 {
                    let fd = (fp[i] - fm[i]) / (2.0 * h);
                    let an = jac.row(i)[k];
                    let row_scale = jac.row(i).iter().fold(0.0f64, |a, v| a.max(v.abs()));
                    // relative to the gradient's size, plus the cancellation
                    // error of differencing F itself
                    let tol = 1e-4 * an.abs().max(row_scale) + 1e-9 * (1.0 + f[i].abs());
                    assert!(
                        (fd - an).abs() <= tol,
                        "{} dF{}/dx{k} at {x:?}: analytic {an}, fd {fd}",
                        p.name(),
                        i + 1
                    );
                }
            }
        }
    }
}

#[test]
fn scaling_preserves_criticality() {
    for p in registry() {
        let anchors = sample_starts(p.spec(), 5, 13);
        let points = sample_starts(p.spec(), 40, 14);
        for x0 in &anchors {
            let scaled = scale(&p, x0).unwrap();
            assert!(scaled.factors().iter().all(|&r| r > 0.0 && r <= 1.0));
            for x in &points {
                let base = solve_dual(&p.jacobian(x), DEFAULT_TOL).unwrap();
                let sc = solve_dual(&scaled.jacobian(x), DEFAULT_TOL).unwrap();
                assert_eq!(base.theta < 0.0, sc.theta < 0.0, "{} at {x:?}", p.name());
                if sc.v.iter().any(|&v| v != 0.0) {
                    assert!(psi(&p.jacobian(x), &sc.v).unwrap() < 0.0, "{} at {x:?}", p.name());
                }
            }
        }
    }
}

#[test]
fn scaled_values_are_base_values_times_factors() {
    for p in registry() {
        let x0 = sample_starts(p.spec(), 1, 15).remove(0);
        let s = scale(&p, &x0).unwrap();
        let x = sample_starts(p.spec(), 1, 16).remove(0);
        let (fb, fs) = (p.values(&x), s.values(&x));
        for i in 0..2 {
            assert_eq!(fs[i], fb[i] * s.factors()[i]);
        }
        let grad_inf = p.jacobian(&x0).rows().map(|g| g.iter().fold(0.0f64, |a, v| a.max(v.abs()))).collect::<Vec<_>>();
        for (r, g) in s.factors().iter().zip(grad_inf) {
            assert_eq!(*r, 1.0 / g.max(1.0));
        }
    }
}
