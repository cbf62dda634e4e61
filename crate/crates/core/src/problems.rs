//! Registered test problems with analytic Jacobians, uniform start sampling
//! in their boxes, and the gradient-based objective scaling used by the
//! benchmark protocol.

use std::f64::consts::SQRT_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{check_len, Error, Result};
use crate::mo_core::{jacobian_checked, norm_inf, Jacobian, Problem};

/// Static description of a registered problem.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProblemSpec {
    pub name: String,
    /// Where the analytic form comes from.
    pub source: &'static str,
    pub n: usize,
    pub m: usize,
    pub convex: bool,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Global Lipschitz constant of the Jacobian (row-max norm), when known.
    pub lipschitz: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    ApEx,
    Jos1,
    Bk1,
    Mop2,
    Sd,
    Toi4,
    Dgo1,
    Dgo2,
    Far1,
    Sk2,
    Pnr,
    Mmr3,
    Ff1,
}

/// A registered problem: its metadata plus the analytic objective.
#[derive(Debug, Clone, PartialEq)]
pub struct TestProblem {
    spec: ProblemSpec,
    kind: Kind,
}

struct Entry {
    name: &'static str,
    kind: Kind,
    source: &'static str,
    n: usize,
    convex: bool,
    lower: fn(usize) -> Vec<f64>,
    upper: fn(usize) -> Vec<f64>,
    lipschitz: fn(usize) -> Option<f64>,
}

macro_rules! boxed {
    ($v:expr) => {
        |n| vec![$v; n]
    };
}

const ENTRIES: &[Entry] = &[
    Entry { name: "AP-EX", kind: Kind::ApEx, source: "Ansary & Panda 2015, one-dimensional example", n: 1, convex: true, lower: boxed!(-5.0), upper: boxed!(5.0), lipschitz: |_| Some(2.0) },
    Entry { name: "JOS1a", kind: Kind::Jos1, source: "Jin, Olhofer & Sendhoff 2001", n: 50, convex: true, lower: boxed!(-100.0), upper: boxed!(100.0), lipschitz: |n| Some(2.0 / n as f64) },
    Entry { name: "JOS1b", kind: Kind::Jos1, source: "Jin, Olhofer & Sendhoff 2001", n: 100, convex: true, lower: boxed!(-100.0), upper: boxed!(100.0), lipschitz: |n| Some(2.0 / n as f64) },
    Entry { name: "JOS1c", kind: Kind::Jos1, source: "Jin, Olhofer & Sendhoff 2001", n: 200, convex: true, lower: boxed!(-100.0), upper: boxed!(100.0), lipschitz: |n| Some(2.0 / n as f64) },
    Entry { name: "JOS1d", kind: Kind::Jos1, source: "Jin, Olhofer & Sendhoff 2001", n: 500, convex: true, lower: boxed!(-100.0), upper: boxed!(100.0), lipschitz: |n| Some(2.0 / n as f64) },
    Entry { name: "BK1", kind: Kind::Bk1, source: "Huband et al. 2006", n: 2, convex: true, lower: boxed!(-5.0), upper: boxed!(10.0), lipschitz: |_| Some(2.0) },
    Entry { name: "MOP2", kind: Kind::Mop2, source: "Huband et al. 2006 (Fonseca-Fleming)", n: 2, convex: false, lower: boxed!(-4.0), upper: boxed!(4.0), lipschitz: |_| None },
    Entry { name: "SD", kind: Kind::Sd, source: "Stadler & Dauer 1993, convex four-bar truss", n: 4, convex: true, lower: |_| vec![1.0, SQRT_2, SQRT_2, 1.0], upper: boxed!(3.0), lipschitz: |_| None },
    Entry { name: "Toi4", kind: Kind::Toi4, source: "Toint 1983, two-objective extension", n: 4, convex: true, lower: boxed!(-2.0), upper: boxed!(5.0), lipschitz: |_| Some(2.0) },
    Entry { name: "DGO1", kind: Kind::Dgo1, source: "Huband et al. 2006", n: 1, convex: false, lower: boxed!(-10.0), upper: boxed!(13.0), lipschitz: |_| Some(1.0) },
    Entry { name: "DGO2", kind: Kind::Dgo2, source: "Huband et al. 2006", n: 1, convex: true, lower: boxed!(-9.0), upper: boxed!(9.0), lipschitz: |_| None },
    Entry { name: "Far1", kind: Kind::Far1, source: "Huband et al. 2006", n: 2, convex: false, lower: boxed!(-1.0), upper: boxed!(1.0), lipschitz: |_| None },
    Entry { name: "SK2", kind: Kind::Sk2, source: "Huband et al. 2006, as minimization", n: 4, convex: false, lower: boxed!(-10.0), upper: boxed!(10.0), lipschitz: |_| None },
    Entry { name: "PNR", kind: Kind::Pnr, source: "Preuss, Naujoks & Rudolph 2006", n: 2, convex: true, lower: boxed!(-1.0), upper: boxed!(1.0), lipschitz: |_| None },
    Entry { name: "MMR3", kind: Kind::Mmr3, source: "Miglierina, Molho & Recchioni 2008", n: 2, convex: false, lower: boxed!(-1.0), upper: boxed!(1.0), lipschitz: |_| None },
    Entry { name: "FF1", kind: Kind::Ff1, source: "Huband et al. 2006 (Fonseca-Fleming)", n: 2, convex: false, lower: boxed!(-1.0), upper: boxed!(1.0), lipschitz: |_| None },
];

/// Every registered problem, in registry order.
pub fn registry() -> Vec<TestProblem> {
    ENTRIES.iter().map(TestProblem::from_entry).collect()
}

/// Metadata of every registered problem.
pub fn registry_specs() -> Vec<ProblemSpec> {
    registry().into_iter().map(|p| p.spec).collect()
}

/// Case-insensitive lookup by name.
pub fn lookup(name: &str) -> Result<TestProblem> {
    ENTRIES
        .iter()
        .find(|e| e.name.eq_ignore_ascii_case(name))
        .map(TestProblem::from_entry)
        .ok_or_else(|| Error::UnknownProblem(name.to_string()))
}

impl TestProblem {
    fn from_entry(e: &Entry) -> Self {
        Self {
            spec: ProblemSpec {
                name: e.name.to_string(),
                source: e.source,
                n: e.n,
                m: 2,
                convex: e.convex,
                lower: (e.lower)(e.n),
                upper: (e.upper)(e.n),
                lipschitz: (e.lipschitz)(e.n),
            },
            kind: e.kind,
        }
    }

    pub fn spec(&self) -> &ProblemSpec {
        &self.spec
    }
}

impl Problem for TestProblem {
    fn name(&self) -> &str {
        &self.spec.name
    }

    fn dim(&self) -> usize {
        self.spec.n
    }

    fn num_objectives(&self) -> usize {
        self.spec.m
    }

    fn values(&self, x: &[f64]) -> Vec<f64> {
        let n = x.len() as f64;
        match self.kind {
            Kind::ApEx => vec![x[0] * x[0] - 4.0, (x[0] - 1.0).powi(2)],
            Kind::Jos1 => vec![
                x.iter().map(|v| v * v).sum::<f64>() / n,
                x.iter().map(|v| (v - 2.0).powi(2)).sum::<f64>() / n,
            ],
            Kind::Bk1 => vec![
                x[0] * x[0] + x[1] * x[1],
                (x[0] - 5.0).powi(2) + (x[1] - 5.0).powi(2),
            ],
            Kind::Mop2 => {
                let s = 1.0 / n.sqrt();
                let a: f64 = x.iter().map(|v| (v - s).powi(2)).sum();
                let b: f64 = x.iter().map(|v| (v + s).powi(2)).sum();
                vec![1.0 - (-a).exp(), 1.0 - (-b).exp()]
            }
            Kind::Sd => {
                if x.iter().any(|&v| v <= 0.0) {
                    return vec![f64::INFINITY; 2];
                }
                vec![
                    2.0 * x[0] + SQRT_2 * x[1] + SQRT_2 * x[2] + x[3],
                    2.0 / x[0] + 2.0 * SQRT_2 / x[1] + 2.0 * SQRT_2 / x[2] + 2.0 / x[3],
                ]
            }
            Kind::Toi4 => vec![
                x[0] * x[0] + x[1] * x[1] + 1.0,
                0.5 * ((x[0] - x[1]).powi(2) + (x[2] - x[3]).powi(2)) + 1.0,
            ],
            Kind::Dgo1 => vec![x[0].sin(), (x[0] + 0.7).sin()],
            Kind::Dgo2 => vec![x[0] * x[0], 9.0 - (81.0 - x[0] * x[0]).sqrt()],
            Kind::Far1 => {
                let (f1, f2) = (FAR1_F1, FAR1_F2);
                vec![
                    f1.iter().map(|b| b.value(x)).sum(),
                    f2.iter().map(|b| b.value(x)).sum(),
                ]
            }
            Kind::Sk2 => {
                let f1: f64 = x.iter().zip(SK2_CENTER).map(|(v, c)| (v - c).powi(2)).sum::<f64>() - 5.0;
                let s: f64 = x.iter().map(|v| v.sin()).sum();
                let den = 1.0 + x.iter().map(|v| v * v).sum::<f64>() / 100.0;
                vec![f1, -s / den]
            }
            Kind::Pnr => {
                let (a, b) = (x[0], x[1]);
                vec![
                    a.powi(4) + b.powi(4) - a * a + b * b - 10.0 * a * b + 20.0,
                    a * a + b * b,
                ]
            }
            Kind::Mmr3 => vec![x[0].powi(3), (x[1] - x[0]).powi(3)],
            Kind::Ff1 => vec![
                1.0 - (-(x[0] - 1.0).powi(2) - (x[1] + 1.0).powi(2)).exp(),
                1.0 - (-(x[0] + 1.0).powi(2) - (x[1] - 1.0).powi(2)).exp(),
            ],
        }
    }

    fn jacobian(&self, x: &[f64]) -> Jacobian {
        let n = x.len();
        let nf = n as f64;
        let mut j = Jacobian::zeros(2, n);
        match self.kind {
            Kind::ApEx => {
                j.row_mut(0)[0] = 2.0 * x[0];
                j.row_mut(1)[0] = 2.0 * (x[0] - 1.0);
            }
            Kind::Jos1 => {
                for i in 0..n {
                    j.row_mut(0)[i] = 2.0 * x[i] / nf;
                    j.row_mut(1)[i] = 2.0 * (x[i] - 2.0) / nf;
                }
            }
            Kind::Bk1 => {
                for i in 0..2 {
                    j.row_mut(0)[i] = 2.0 * x[i];
                    j.row_mut(1)[i] = 2.0 * (x[i] - 5.0);
                }
            }
            Kind::Mop2 => {
                let s = 1.0 / nf.sqrt();
                let ea = (-x.iter().map(|v| (v - s).powi(2)).sum::<f64>()).exp();
                let eb = (-x.iter().map(|v| (v + s).powi(2)).sum::<f64>()).exp();
                for i in 0..n {
                    j.row_mut(0)[i] = 2.0 * (x[i] - s) * ea;
                    j.row_mut(1)[i] = 2.0 * (x[i] + s) * eb;
                }
            }
            Kind::Sd => {
                if x.iter().any(|&v| v <= 0.0) {
                    return nan_jacobian(n);
                }
                j.row_mut(0).copy_from_slice(&[2.0, SQRT_2, SQRT_2, 1.0]);
                let c = [2.0, 2.0 * SQRT_2, 2.0 * SQRT_2, 2.0];
                for i in 0..4 {
                    j.row_mut(1)[i] = -c[i] / (x[i] * x[i]);
                }
            }
            Kind::Toi4 => {
                j.row_mut(0)[0] = 2.0 * x[0];
                j.row_mut(0)[1] = 2.0 * x[1];
                let (a, b) = (x[0] - x[1], x[2] - x[3]);
                j.row_mut(1).copy_from_slice(&[a, -a, b, -b]);
            }
            Kind::Dgo1 => {
                j.row_mut(0)[0] = x[0].cos();
                j.row_mut(1)[0] = (x[0] + 0.7).cos();
            }
            Kind::Dgo2 => {
                j.row_mut(0)[0] = 2.0 * x[0];
                j.row_mut(1)[0] = x[0] / (81.0 - x[0] * x[0]).sqrt();
            }
            Kind::Far1 => {
                for (row, bumps) in [(0, FAR1_F1), (1, FAR1_F2)] {
                    for b in bumps {
                        let (g0, g1) = b.gradient(x);
                        j.row_mut(row)[0] += g0;
                        j.row_mut(row)[1] += g1;
                    }
                }
            }
            Kind::Sk2 => {
                let s: f64 = x.iter().map(|v| v.sin()).sum();
                let den = 1.0 + x.iter().map(|v| v * v).sum::<f64>() / 100.0;
                for i in 0..4 {
                    j.row_mut(0)[i] = 2.0 * (x[i] - SK2_CENTER[i]);
                    j.row_mut(1)[i] = -(x[i].cos() * den - s * x[i] / 50.0) / (den * den);
                }
            }
            Kind::Pnr => {
                let (a, b) = (x[0], x[1]);
                j.row_mut(0).copy_from_slice(&[
                    4.0 * a.powi(3) - 2.0 * a - 10.0 * b,
                    4.0 * b.powi(3) + 2.0 * b - 10.0 * a,
                ]);
                j.row_mut(1).copy_from_slice(&[2.0 * a, 2.0 * b]);
            }
            Kind::Mmr3 => {
                let t = 3.0 * (x[1] - x[0]).powi(2);
                j.row_mut(0)[0] = 3.0 * x[0] * x[0];
                j.row_mut(1).copy_from_slice(&[-t, t]);
            }
            Kind::Ff1 => {
                let e1 = (-(x[0] - 1.0).powi(2) - (x[1] + 1.0).powi(2)).exp();
                let e2 = (-(x[0] + 1.0).powi(2) - (x[1] - 1.0).powi(2)).exp();
                j.row_mut(0).copy_from_slice(&[2.0 * (x[0] - 1.0) * e1, 2.0 * (x[1] + 1.0) * e1]);
                j.row_mut(1).copy_from_slice(&[2.0 * (x[0] + 1.0) * e2, 2.0 * (x[1] - 1.0) * e2]);
            }
        }
        j
    }
}

fn nan_jacobian(n: usize) -> Jacobian {
    let mut j = Jacobian::zeros(2, n);
    for i in 0..2 {
        j.row_mut(i).iter_mut().for_each(|v| *v = f64::NAN);
    }
    j
}

const SK2_CENTER: [f64; 4] = [2.0, -3.0, 5.0, 4.0];

/// `coef · exp(width · (−(x₁ − a)² − (x₂ − b)²))`
#[derive(Debug, Clone, Copy)]
struct Bump {
    coef: f64,
    width: f64,
    a: f64,
    b: f64,
}

impl Bump {
    const fn new(coef: f64, width: f64, a: f64, b: f64) -> Self {
        Self { coef, width, a, b }
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.coef * (self.width * (-(x[0] - self.a).powi(2) - (x[1] - self.b).powi(2))).exp()
    }

    fn gradient(&self, x: &[f64]) -> (f64, f64) {
        let v = self.value(x);
        (
            -2.0 * self.width * (x[0] - self.a) * v,
            -2.0 * self.width * (x[1] - self.b) * v,
        )
    }
}

const FAR1_F1: &[Bump] = &[
    Bump::new(-2.0, 15.0, 0.1, 0.0),
    Bump::new(-1.0, 20.0, 0.6, 0.6),
    Bump::new(1.0, 20.0, -0.6, 0.6),
    Bump::new(1.0, 20.0, 0.6, -0.6),
    Bump::new(1.0, 20.0, -0.6, -0.6),
];

const FAR1_F2: &[Bump] = &[
    Bump::new(2.0, 20.0, 0.0, 0.0),
    Bump::new(1.0, 20.0, 0.4, 0.6),
    Bump::new(-1.0, 20.0, -0.5, 0.7),
    Bump::new(-1.0, 20.0, 0.5, -0.7),
    Bump::new(1.0, 20.0, -0.4, -0.8),
];

/// Stable 64-bit FNV-1a, used to give every problem its own random stream.
fn stream_id(name: &str) -> u64 {
    name.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// `count` points uniform in `[lower, upper]`, determined by `(seed, name)`.
pub fn sample_starts(spec: &ProblemSpec, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id(&spec.name));
    (0..count)
        .map(|_| {
            spec.lower
                .iter()
                .zip(&spec.upper)
                .map(|(&lo, &hi)| {
                    let u: f64 = rng.gen();
                    (lo + (hi - lo) * u).clamp(lo, hi)
                })
                .collect()
        })
        .collect()
}

/// `F` with objective i multiplied by `rᵢ = 1/max{1, ‖∇Fᵢ(x⁰)‖∞}`.
#[derive(Debug, Clone)]
pub struct ScaledProblem<P> {
    base: P,
    factors: Vec<f64>,
}

impl<P: Problem> ScaledProblem<P> {
    pub fn new(base: P, factors: Vec<f64>) -> Result<Self> {
        check_len(base.num_objectives(), factors.len())?;
        if factors.iter().any(|&r| !(r > 0.0)) {
            return Err(Error::InvalidConfig("scaling factors must be positive".into()));
        }
        Ok(Self { base, factors })
    }

    pub fn factors(&self) -> &[f64] {
        &self.factors
    }

    pub fn base(&self) -> &P {
        &self.base
    }
}

/// Builds the scaled problem from the gradients at the start `x0`.
pub fn scale<P: Problem>(problem: P, x0: &[f64]) -> Result<ScaledProblem<P>> {
    let jac = jacobian_checked(&problem, x0)?;
    let factors = jac.rows().map(|g| 1.0 / norm_inf(g).max(1.0)).collect();
    ScaledProblem::new(problem, factors)
}

impl<P: Problem> Problem for ScaledProblem<P> {
    fn name(&self) -> &str {
        self.base.name()
    }

    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn num_objectives(&self) -> usize {
        self.base.num_objectives()
    }

    fn values(&self, x: &[f64]) -> Vec<f64> {
        let mut f = self.base.values(x);
        f.iter_mut().zip(&self.factors).for_each(|(v, r)| *v *= r);
        f
    }

    fn jacobian(&self, x: &[f64]) -> Jacobian {
        let mut j = self.base.jacobian(x);
        j.scale_rows(&self.factors);
        j
    }
}

/// Writes the registry as CSV: `name,source,n,m,convex,x_L,x_U`, with the
/// bound vectors joined by `;`.
pub fn write_registry_csv<W: std::io::Write>(w: W) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["name", "source", "n", "m", "convex", "x_L", "x_U"])?;
    for spec in registry_specs() {
        out.write_record([
            spec.name.clone(),
            spec.source.to_string(),
            spec.n.to_string(),
            spec.m.to_string(),
            if spec.convex { "Y" } else { "N" }.to_string(),
            join(&spec.lower),
            join(&spec.upper),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub(crate) fn join(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";")
}
