//! Built-in test problems with analytic derivatives.
//!
//! Every entry carries a known KKT pair. Problems with inequality
//! constraints are stated as `g(x) <= 0` and converted with
//! [`reformulate_inequalities`], so their variables are `(x, s)`.

use std::collections::BTreeSet;
use std::fmt;

use nalgebra::{dmatrix, dvector, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{reformulate_inequalities, NlpProblem, DEFAULT_SLACK_UPPER};

/// Properties of the stored solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tag {
    /// Constraint gradients and active bound normals are independent.
    Licq,
    /// Every active bound has a nonzero Lagrangian gradient component.
    StrictComplementarity,
    /// The Lagrangian Hessian is positive definite on the critical cone.
    Ssosc,
    /// Some bound is active with a zero Lagrangian gradient component.
    Degenerate,
    /// Convex quadratic with linear equalities and no bound active at the
    /// solution.
    ConvexEqualityQp,
    /// Built from inequality constraints with slack variables.
    FromInequalities,
}

impl Tag {
    pub fn as_str(self) -> &'static str {
        match self {
            Tag::Licq => "licq",
            Tag::StrictComplementarity => "strict_complementarity",
            Tag::Ssosc => "ssosc",
            Tag::Degenerate => "degenerate",
            Tag::ConvexEqualityQp => "convex_equality_qp",
            Tag::FromInequalities => "from_inequalities",
        }
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone)]
pub struct CorpusEntry {
    pub name: &'static str,
    pub problem: NlpProblem,
    pub tags: BTreeSet<Tag>,
}

impl CorpusEntry {
    pub fn has(&self, tag: Tag) -> bool {
        self.tags.contains(&tag)
    }

    /// LICQ, strict complementarity and SSOSC all hold.
    pub fn is_regular(&self) -> bool {
        self.has(Tag::Licq) && self.has(Tag::StrictComplementarity) && self.has(Tag::Ssosc)
    }
}

const REGULAR: &[Tag] = &[Tag::Licq, Tag::StrictComplementarity, Tag::Ssosc];

fn entry(name: &'static str, problem: Result<NlpProblem>, tags: &[Tag]) -> CorpusEntry {
    let problem = problem.unwrap_or_else(|e| panic!("corpus entry {name} is malformed: {e}"));
    CorpusEntry {
        name,
        problem,
        tags: tags.iter().copied().collect(),
    }
}

fn with(base: &[Tag], extra: &[Tag]) -> Vec<Tag> {
    base.iter().chain(extra).copied().collect()
}

fn boxed(n: usize, bound: f64) -> (DVector<f64>, DVector<f64>) {
    (DVector::from_element(n, -bound), DVector::from_element(n, bound))
}

/// `1/2 |x|^2` s.t. `x1 + x2 = 1`.
fn eq_quadratic_2d() -> Result<NlpProblem> {
    let (l, u) = boxed(2, 10.0);
    NlpProblem::new(l, u, dvector![0.0, 0.0])?
        .with_objective(|x| 0.5 * x.norm_squared(), |x| x.clone())
        .with_constraints(
            1,
            |x| dvector![x[0] + x[1] - 1.0],
            |_| DMatrix::from_element(2, 1, 1.0),
        )
        .with_hessian(|_, _| DMatrix::identity(2, 2))
        .with_known_solution(dvector![0.5, 0.5], dvector![-0.5])
}

/// `x1 + x2` on the circle of radius `sqrt 2` in `[0, 2]^2`; the minimizer
/// sits on a coordinate axis with `x2` at its lower bound.
fn circle_corner() -> Result<NlpProblem> {
    let s2 = 2.0_f64.sqrt();
    NlpProblem::new(dvector![0.0, 0.0], dvector![2.0, 2.0], dvector![1.5, 0.5])?
        .with_objective(|x| x[0] + x[1], |_| dvector![1.0, 1.0])
        .with_constraints(
            1,
            |x| dvector![x.norm_squared() - 2.0],
            |x| DMatrix::from_column_slice(2, 1, &[2.0 * x[0], 2.0 * x[1]]),
        )
        .with_hessian(|_, mu| DMatrix::identity(2, 2) * (2.0 * mu[0]))
        .with_known_solution(dvector![s2, 0.0], dvector![-1.0 / (2.0 * s2)])
}

/// `-x1 - 2 x2` on the unit circle with `x2 <= 0.8` active.
fn circle_upper() -> Result<NlpProblem> {
    NlpProblem::new(dvector![-1.0, -1.0], dvector![0.8, 0.8], dvector![0.5, 0.5])?
        .with_objective(|x| -x[0] - 2.0 * x[1], |_| dvector![-1.0, -2.0])
        .with_constraints(
            1,
            |x| dvector![x.norm_squared() - 1.0],
            |x| DMatrix::from_column_slice(2, 1, &[2.0 * x[0], 2.0 * x[1]]),
        )
        .with_hessian(|_, mu| DMatrix::identity(2, 2) * (2.0 * mu[0]))
        .with_known_solution(dvector![0.6, 0.8], dvector![5.0 / 6.0])
}

/// `(x1 + x2)^2 + (x2 + x3)^2` s.t. `x1 + 2 x2 + 3 x3 = 1`.
fn hs28() -> Result<NlpProblem> {
    let (l, u) = boxed(3, 10.0);
    NlpProblem::new(l, u, dvector![-4.0, 1.0, 1.0])?
        .with_objective(
            |x| (x[0] + x[1]).powi(2) + (x[1] + x[2]).powi(2),
            |x| {
                let (a, b) = (x[0] + x[1], x[1] + x[2]);
                dvector![2.0 * a, 2.0 * a + 2.0 * b, 2.0 * b]
            },
        )
        .with_constraints(
            1,
            |x| dvector![x[0] + 2.0 * x[1] + 3.0 * x[2] - 1.0],
            |_| DMatrix::from_column_slice(3, 1, &[1.0, 2.0, 3.0]),
        )
        .with_hessian(|_, _| dmatrix![2.0, 2.0, 0.0; 2.0, 4.0, 2.0; 0.0, 2.0, 2.0])
        .with_known_solution(dvector![0.5, -0.5, 0.5], dvector![0.0])
}

fn hs48() -> Result<NlpProblem> {
    let (l, u) = boxed(5, 10.0);
    NlpProblem::new(l, u, dvector![3.0, 5.0, -3.0, 2.0, -2.0])?
        .with_objective(
            |x| (x[0] - 1.0).powi(2) + (x[1] - x[2]).powi(2) + (x[3] - x[4]).powi(2),
            |x| {
                let (a, b) = (x[1] - x[2], x[3] - x[4]);
                dvector![2.0 * (x[0] - 1.0), 2.0 * a, -2.0 * a, 2.0 * b, -2.0 * b]
            },
        )
        .with_constraints(
            2,
            |x| {
                dvector![
                    x.sum() - 5.0,
                    x[2] - 2.0 * (x[3] + x[4]) + 3.0
                ]
            },
            |_| {
                dmatrix![
                    1.0, 0.0;
                    1.0, 0.0;
                    1.0, 1.0;
                    1.0, -2.0;
                    1.0, -2.0
                ]
            },
        )
        .with_hessian(|_, _| {
            dmatrix![
                2.0, 0.0, 0.0, 0.0, 0.0;
                0.0, 2.0, -2.0, 0.0, 0.0;
                0.0, -2.0, 2.0, 0.0, 0.0;
                0.0, 0.0, 0.0, 2.0, -2.0;
                0.0, 0.0, 0.0, -2.0, 2.0
            ]
        })
        .with_known_solution(DVector::from_element(5, 1.0), dvector![0.0, 0.0])
}

/// Separable quadratic with three dense linear equalities, generated from a
/// chosen KKT pair.
fn eq_quadratic_100() -> Result<NlpProblem> {
    const N: usize = 100;
    let c = DVector::from_fn(N, |i, _| 1.0 + 0.5 * (i % 5) as f64);
    let a_mat = DMatrix::from_fn(3, N, |r, i| match r {
        0 => 1.0,
        1 => {
            let s = if i % 2 == 0 { 1.0 } else { -1.0 };
            s * (1.0 + i as f64 / 100.0)
        }
        _ => ((i * 7) % 11) as f64 / 10.0 - 0.5,
    });
    let x_star = DVector::from_fn(N, |i, _| ((i * 37) % 19) as f64 / 19.0 - 0.5);
    let mu_star = dvector![0.3, -0.7, 1.1];
    let target = &x_star + (a_mat.transpose() * &mu_star).component_div(&c);
    let b = &a_mat * &x_star;

    let (l, u) = boxed(N, 5.0);
    let (c1, c2, c3) = (c.clone(), c.clone(), c);
    let (t1, t2) = (target.clone(), target);
    let (a1, a2) = (a_mat.clone(), a_mat);
    NlpProblem::new(l, u, DVector::zeros(N))?
        .with_objective(
            move |x| 0.5 * (x - &t1).component_mul(&(x - &t1)).dot(&c1),
            move |x| c2.component_mul(&(x - &t2)),
        )
        .with_constraints(3, move |x| &a1 * x - &b, move |_| a2.transpose())
        .with_hessian(move |_, _| DMatrix::from_diagonal(&c3))
        .with_known_solution(x_star, mu_star)
}

fn hs6() -> Result<NlpProblem> {
    let (l, u) = boxed(2, 10.0);
    NlpProblem::new(l, u, dvector![-1.2, 1.0])?
        .with_objective(|x| (1.0 - x[0]).powi(2), |x| dvector![-2.0 * (1.0 - x[0]), 0.0])
        .with_constraints(
            1,
            |x| dvector![10.0 * (x[1] - x[0] * x[0])],
            |x| DMatrix::from_column_slice(2, 1, &[-20.0 * x[0], 10.0]),
        )
        .with_hessian(|_, mu| dmatrix![2.0 - 20.0 * mu[0], 0.0; 0.0, 0.0])
        .with_known_solution(dvector![1.0, 1.0], dvector![0.0])
}

fn hs7() -> Result<NlpProblem> {
    let (l, u) = boxed(2, 10.0);
    let s3 = 3.0_f64.sqrt();
    NlpProblem::new(l, u, dvector![2.0, 2.0])?
        .with_objective(
            |x| (1.0 + x[0] * x[0]).ln() - x[1],
            |x| dvector![2.0 * x[0] / (1.0 + x[0] * x[0]), -1.0],
        )
        .with_constraints(
            1,
            |x| dvector![(1.0 + x[0] * x[0]).powi(2) + x[1] * x[1] - 4.0],
            |x| {
                DMatrix::from_column_slice(2, 1, &[4.0 * x[0] * (1.0 + x[0] * x[0]), 2.0 * x[1]])
            },
        )
        .with_hessian(|x, mu| {
            let q = 1.0 + x[0] * x[0];
            let f11 = (2.0 - 2.0 * x[0] * x[0]) / (q * q);
            let h11 = 4.0 + 12.0 * x[0] * x[0];
            dmatrix![f11 + mu[0] * h11, 0.0; 0.0, 2.0 * mu[0]]
        })
        .with_known_solution(dvector![0.0, s3], dvector![1.0 / (2.0 * s3)])
}

fn hs27() -> Result<NlpProblem> {
    let (l, u) = boxed(3, 10.0);
    NlpProblem::new(l, u, dvector![2.0, 2.0, 2.0])?
        .with_objective(
            |x| 0.01 * (x[0] - 1.0).powi(2) + (x[1] - x[0] * x[0]).powi(2),
            |x| {
                let r = x[1] - x[0] * x[0];
                dvector![0.02 * (x[0] - 1.0) - 4.0 * x[0] * r, 2.0 * r, 0.0]
            },
        )
        .with_constraints(
            1,
            |x| dvector![x[0] + x[2] * x[2] + 1.0],
            |x| DMatrix::from_column_slice(3, 1, &[1.0, 0.0, 2.0 * x[2]]),
        )
        .with_hessian(|x, mu| {
            let f11 = 0.02 - 4.0 * x[1] + 12.0 * x[0] * x[0];
            let f12 = -4.0 * x[0];
            dmatrix![
                f11, f12, 0.0;
                f12, 2.0, 0.0;
                0.0, 0.0, 2.0 * mu[0]
            ]
        })
        .with_known_solution(dvector![-1.0, 1.0, 0.0], dvector![0.04])
}

fn hs39() -> Result<NlpProblem> {
    let (l, u) = boxed(4, 10.0);
    NlpProblem::new(l, u, DVector::from_element(4, 2.0))?
        .with_objective(|x| -x[0], |_| dvector![-1.0, 0.0, 0.0, 0.0])
        .with_constraints(
            2,
            |x| {
                dvector![
                    x[1] - x[0].powi(3) - x[2] * x[2],
                    x[0] * x[0] - x[1] - x[3] * x[3]
                ]
            },
            |x| {
                dmatrix![
                    -3.0 * x[0] * x[0], 2.0 * x[0];
                    1.0, -1.0;
                    -2.0 * x[2], 0.0;
                    0.0, -2.0 * x[3]
                ]
            },
        )
        .with_hessian(|x, mu| {
            let mut hm = DMatrix::zeros(4, 4);
            hm[(0, 0)] = -6.0 * x[0] * mu[0] + 2.0 * mu[1];
            hm[(2, 2)] = -2.0 * mu[0];
            hm[(3, 3)] = -2.0 * mu[1];
            hm
        })
        .with_known_solution(dvector![1.0, 1.0, 0.0, 0.0], dvector![-1.0, -1.0])
}

/// Least-squares multipliers `argmin |grad f + J mu|` at `x`.
fn fitted_multipliers(problem: &NlpProblem, x: &DVector<f64>) -> DVector<f64> {
    let j = problem.jac_h(x);
    let g = problem.grad_f(x);
    let jtj = j.transpose() * &j;
    let rhs = -(j.transpose() * g);
    jtj.lu().solve(&rhs).expect("constraint gradients are independent at the solution")
}

fn hs40() -> Result<NlpProblem> {
    let (l, u) = boxed(4, 10.0);
    let p = NlpProblem::new(l, u, DVector::from_element(4, 0.8))?
        .with_objective(
            |x| -x.product(),
            |x| DVector::from_fn(4, |i, _| -(0..4).filter(|&k| k != i).map(|k| x[k]).product::<f64>()),
        )
        .with_constraints(
            3,
            |x| {
                dvector![
                    x[0].powi(3) + x[1] * x[1] - 1.0,
                    x[0] * x[0] * x[3] - x[2],
                    x[3] * x[3] - x[1]
                ]
            },
            |x| {
                dmatrix![
                    3.0 * x[0] * x[0], 2.0 * x[0] * x[3], 0.0;
                    2.0 * x[1], 0.0, -1.0;
                    0.0, -1.0, 0.0;
                    0.0, x[0] * x[0], 2.0 * x[3]
                ]
            },
        )
        .with_hessian(|x, mu| {
            let mut hm = DMatrix::from_fn(4, 4, |i, j| {
                if i == j {
                    0.0
                } else {
                    -(0..4).filter(|&k| k != i && k != j).map(|k| x[k]).product::<f64>()
                }
            });
            hm[(0, 0)] += 6.0 * x[0] * mu[0] + 2.0 * x[3] * mu[1];
            hm[(1, 1)] += 2.0 * mu[0];
            hm[(0, 3)] += 2.0 * x[0] * mu[1];
            hm[(3, 0)] += 2.0 * x[0] * mu[1];
            hm[(3, 3)] += 2.0 * mu[2];
            hm
        });
    let x_star = dvector![
        2.0_f64.powf(-1.0 / 3.0),
        2.0_f64.powf(-0.5),
        2.0_f64.powf(-11.0 / 12.0),
        2.0_f64.powf(-0.25)
    ];
    let mu_star = fitted_multipliers(&p, &x_star);
    p.with_known_solution(x_star, mu_star)
}

fn hs42() -> Result<NlpProblem> {
    let (l, u) = boxed(4, 10.0);
    let s2 = 2.0_f64.sqrt();
    let x3 = 0.6 * s2;
    NlpProblem::new(l, u, DVector::from_element(4, 1.0))?
        .with_objective(
            |x| (0..4).map(|i| (x[i] - (i + 1) as f64).powi(2)).sum(),
            |x| DVector::from_fn(4, |i, _| 2.0 * (x[i] - (i + 1) as f64)),
        )
        .with_constraints(
            2,
            |x| dvector![x[0] - 2.0, x[2] * x[2] + x[3] * x[3] - 2.0],
            |x| {
                dmatrix![
                    1.0, 0.0;
                    0.0, 0.0;
                    0.0, 2.0 * x[2];
                    0.0, 2.0 * x[3]
                ]
            },
        )
        .with_hessian(|_, mu| {
            let mut hm = DMatrix::identity(4, 4) * 2.0;
            hm[(2, 2)] += 2.0 * mu[1];
            hm[(3, 3)] += 2.0 * mu[1];
            hm
        })
        .with_known_solution(dvector![2.0, 2.0, x3, 0.8 * s2], dvector![-2.0, (3.0 - x3) / x3])
}

fn hs50() -> Result<NlpProblem> {
    let (l, u) = boxed(5, 100.0);
    NlpProblem::new(l, u, dvector![35.0, -31.0, 11.0, 5.0, -5.0])?
        .with_objective(
            |x| {
                (x[0] - x[1]).powi(2) + (x[1] - x[2]).powi(2) + (x[2] - x[3]).powi(4) + (x[3] - x[4]).powi(2)
            },
            |x| {
                let (a, b, c, d) = (x[0] - x[1], x[1] - x[2], x[2] - x[3], x[3] - x[4]);
                let c3 = 4.0 * c.powi(3);
                dvector![2.0 * a, -2.0 * a + 2.0 * b, -2.0 * b + c3, -c3 + 2.0 * d, -2.0 * d]
            },
        )
        .with_constraints(
            3,
            |x| {
                dvector![
                    x[0] + 2.0 * x[1] + 3.0 * x[2] - 6.0,
                    x[1] + 2.0 * x[2] + 3.0 * x[3] - 6.0,
                    x[2] + 2.0 * x[3] + 3.0 * x[4] - 6.0
                ]
            },
            |_| {
                dmatrix![
                    1.0, 0.0, 0.0;
                    2.0, 1.0, 0.0;
                    3.0, 2.0, 1.0;
                    0.0, 3.0, 2.0;
                    0.0, 0.0, 3.0
                ]
            },
        )
        .with_hessian(|x, _| {
            let mut hm = DMatrix::zeros(5, 5);
            let mut pair = |i: usize, j: usize, w: f64| {
                hm[(i, i)] += w;
                hm[(j, j)] += w;
                hm[(i, j)] -= w;
                hm[(j, i)] -= w;
            };
            pair(0, 1, 2.0);
            pair(1, 2, 2.0);
            pair(2, 3, 12.0 * (x[2] - x[3]).powi(2));
            pair(3, 4, 2.0);
            hm
        })
        .with_known_solution(DVector::from_element(5, 1.0), dvector![0.0, 0.0, 0.0])
}

fn hs51() -> Result<NlpProblem> {
    let (l, u) = boxed(5, 10.0);
    NlpProblem::new(l, u, dvector![2.5, 0.5, 2.0, -1.0, 0.5])?
        .with_objective(
            |x| {
                (x[0] - x[1]).powi(2) + (x[1] + x[2] - 2.0).powi(2) + (x[3] - 1.0).powi(2) + (x[4] - 1.0).powi(2)
            },
            |x| {
                let (a, b) = (x[0] - x[1], x[1] + x[2] - 2.0);
                dvector![2.0 * a, -2.0 * a + 2.0 * b, 2.0 * b, 2.0 * (x[3] - 1.0), 2.0 * (x[4] - 1.0)]
            },
        )
        .with_constraints(
            3,
            |x| dvector![x[0] + 3.0 * x[1] - 4.0, x[2] + x[3] - 2.0 * x[4], x[1] - x[4]],
            |_| {
                dmatrix![
                    1.0, 0.0, 0.0;
                    3.0, 0.0, 1.0;
                    0.0, 1.0, 0.0;
                    0.0, 1.0, 0.0;
                    0.0, -2.0, -1.0
                ]
            },
        )
        .with_hessian(|_, _| {
            dmatrix![
                2.0, -2.0, 0.0, 0.0, 0.0;
                -2.0, 4.0, 2.0, 0.0, 0.0;
                0.0, 2.0, 2.0, 0.0, 0.0;
                0.0, 0.0, 0.0, 2.0, 0.0;
                0.0, 0.0, 0.0, 0.0, 2.0
            ]
        })
        .with_known_solution(DVector::from_element(5, 1.0), dvector![0.0, 0.0, 0.0])
}

/// Rosenbrock with `x1 <= 1/2` active.
fn rosenbrock_box() -> Result<NlpProblem> {
    NlpProblem::new(dvector![-2.0, -2.0], dvector![0.5, 2.0], dvector![-1.2, 1.0])?
        .with_objective(
            |x| 100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2),
            |x| {
                let r = x[1] - x[0] * x[0];
                dvector![-400.0 * x[0] * r - 2.0 * (1.0 - x[0]), 200.0 * r]
            },
        )
        .with_hessian(|x, _| {
            dmatrix![
                1200.0 * x[0] * x[0] - 400.0 * x[1] + 2.0, -400.0 * x[0];
                -400.0 * x[0], 200.0
            ]
        })
        .with_known_solution(dvector![0.5, 0.25], dvector![])
}

/// `1/2 |x - a|^2` over the probability simplex.
fn simplex_target(
    a: DVector<f64>,
    total: f64,
    x0: DVector<f64>,
    x_star: DVector<f64>,
    mu_star: f64,
) -> Result<NlpProblem> {
    let n = a.len();
    let a2 = a.clone();
    NlpProblem::new(DVector::zeros(n), DVector::from_element(n, 1.0), x0)?
        .with_objective(move |x| 0.5 * (x - &a).norm_squared(), move |x| x - &a2)
        .with_constraints(
            1,
            move |x| dvector![x.sum() - total],
            move |_| DMatrix::from_element(n, 1, 1.0),
        )
        .with_hessian(move |_, _| DMatrix::identity(n, n))
        .with_known_solution(x_star, dvector![mu_star])
}

fn simplex_projection() -> Result<NlpProblem> {
    simplex_target(
        dvector![0.8, 0.6, 0.4, 0.1, -0.2, 0.0],
        1.0,
        DVector::from_element(6, 1.0 / 6.0),
        dvector![8.0 / 15.0, 5.0 / 15.0, 2.0 / 15.0, 0.0, 0.0, 0.0],
        4.0 / 15.0,
    )
}

/// One variable at its upper bound, two at their lower bound.
fn mixed_bounds_qp() -> Result<NlpProblem> {
    simplex_target(
        dvector![1.5, 1.0, 0.1, -0.3],
        1.6,
        DVector::from_element(4, 0.4),
        dvector![1.0, 0.6, 0.0, 0.0],
        0.4,
    )
}

/// No equalities; every variable ends on a bound.
fn all_bounds_active() -> Result<NlpProblem> {
    let c = dvector![1.0, -2.0, 0.5, -1.0, 3.0];
    let c2 = c.clone();
    NlpProblem::new(DVector::zeros(5), DVector::from_element(5, 1.0), DVector::from_element(5, 0.5))?
        .with_objective(
            move |x| c.dot(x) + 0.05 * x.norm_squared(),
            move |x| &c2 + x * 0.1,
        )
        .with_hessian(|_, _| DMatrix::identity(5, 5) * 0.1)
        .with_known_solution(dvector![0.0, 1.0, 0.0, 1.0, 0.0], dvector![])
}

/// `x1` sits on its lower bound with a zero Lagrangian gradient.
fn degenerate_corner() -> Result<NlpProblem> {
    NlpProblem::new(dvector![0.0, 0.0], dvector![4.0, 4.0], dvector![1.0, 3.0])?
        .with_objective(
            |x| 0.5 * x[0] * x[0] + 0.5 * (x[1] - 2.0).powi(2),
            |x| dvector![x[0], x[1] - 2.0],
        )
        .with_constraints(
            1,
            |x| dvector![x[0] + x[1] - 2.0],
            |_| DMatrix::from_element(2, 1, 1.0),
        )
        .with_hessian(|_, _| DMatrix::identity(2, 2))
        .with_known_solution(dvector![0.0, 2.0], dvector![0.0])
}

fn from_inequalities(base: NlpProblem, x_star: DVector<f64>, mu_star: DVector<f64>) -> Result<NlpProblem> {
    reformulate_inequalities(&base, DEFAULT_SLACK_UPPER)?.with_known_solution(x_star, mu_star)
}

/// `min x` s.t. `x >= 1/2` on `[0, 2]`.
fn ineq_halfline() -> Result<NlpProblem> {
    let base = NlpProblem::new(dvector![0.0], dvector![2.0], dvector![1.5])?
        .with_objective(|x| x[0], |_| dvector![1.0])
        .with_constraints(1, |x| dvector![0.5 - x[0]], |_| DMatrix::from_element(1, 1, -1.0));
    from_inequalities(base, dvector![0.5, 0.0], dvector![1.0])
}

/// Closest point of the unit disk to `(2, 1)`.
fn ineq_disk() -> Result<NlpProblem> {
    let (l, u) = boxed(2, 3.0);
    let r5 = 5.0_f64.sqrt();
    let base = NlpProblem::new(l, u, dvector![0.0, 0.0])?
        .with_objective(
            |x| (x[0] - 2.0).powi(2) + (x[1] - 1.0).powi(2),
            |x| dvector![2.0 * (x[0] - 2.0), 2.0 * (x[1] - 1.0)],
        )
        .with_constraints(
            1,
            |x| dvector![x.norm_squared() - 1.0],
            |x| DMatrix::from_column_slice(2, 1, &[2.0 * x[0], 2.0 * x[1]]),
        )
        .with_hessian(|_, lam| DMatrix::identity(2, 2) * (2.0 + 2.0 * lam[0]));
    from_inequalities(base, dvector![2.0 / r5, 1.0 / r5, 0.0], dvector![r5 - 1.0])
}

/// The inequality is slack at the solution.
fn ineq_inactive() -> Result<NlpProblem> {
    let base = NlpProblem::new(dvector![0.0, 0.0], dvector![3.0, 3.0], dvector![2.0, 2.0])?
        .with_objective(
            |x| (x[0] - 0.5).powi(2) + (x[1] - 0.5).powi(2),
            |x| dvector![2.0 * (x[0] - 0.5), 2.0 * (x[1] - 0.5)],
        )
        .with_constraints(
            1,
            |x| dvector![x[0] + x[1] - 2.0],
            |_| DMatrix::from_element(2, 1, 1.0),
        )
        .with_hessian(|_, _| DMatrix::identity(2, 2) * 2.0);
    from_inequalities(base, dvector![0.5, 0.5, 1.0], dvector![0.0])
}

fn hs21() -> Result<NlpProblem> {
    let base = NlpProblem::new(dvector![2.0, -50.0], dvector![50.0, 50.0], dvector![10.0, -1.0])?
        .with_objective(
            |x| 0.01 * x[0] * x[0] + x[1] * x[1] - 100.0,
            |x| dvector![0.02 * x[0], 2.0 * x[1]],
        )
        .with_constraints(
            1,
            |x| dvector![10.0 - 10.0 * x[0] + x[1]],
            |_| DMatrix::from_column_slice(2, 1, &[-10.0, 1.0]),
        )
        .with_hessian(|_, _| dmatrix![0.02, 0.0; 0.0, 2.0]);
    from_inequalities(base, dvector![2.0, 0.0, 10.0], dvector![0.0])
}

/// Linear objective on the unit sphere in 50 dimensions.
fn sphere_linear_50() -> Result<NlpProblem> {
    const N: usize = 50;
    let c = DVector::from_fn(N, |i, _| ((i * 13) % 7) as f64 - 3.0);
    let norm = c.norm();
    let x_star = -&c / norm;
    let (l, u) = boxed(N, 2.0);
    let (c1, c2) = (c.clone(), c);
    NlpProblem::new(l, u, DVector::from_element(N, 0.1))?
        .with_objective(move |x| c1.dot(x), move |_| c2.clone())
        .with_constraints(
            1,
            |x| dvector![x.norm_squared() - 1.0],
            |x| DMatrix::from_column_slice(x.len(), 1, (x * 2.0).as_slice()),
        )
        .with_hessian(|x, mu| DMatrix::identity(x.len(), x.len()) * (2.0 * mu[0]))
        .with_known_solution(x_star, dvector![norm / 2.0])
}

/// All built-in problems, in a fixed order.
pub fn corpus() -> Vec<CorpusEntry> {
    use Tag::*;
    let ineq = |extra: &[Tag]| with(&with(REGULAR, extra), &[FromInequalities]);
    vec![
        entry("eq_quadratic_2d", eq_quadratic_2d(), &with(REGULAR, &[ConvexEqualityQp])),
        entry("eq_quadratic_3d", hs28(), &with(REGULAR, &[ConvexEqualityQp])),
        entry("hs48", hs48(), &with(REGULAR, &[ConvexEqualityQp])),
        entry("eq_quadratic_100", eq_quadratic_100(), &with(REGULAR, &[ConvexEqualityQp])),
        entry("circle_corner", circle_corner(), REGULAR),
        entry("circle_upper", circle_upper(), REGULAR),
        entry("hs6", hs6(), REGULAR),
        entry("hs7", hs7(), REGULAR),
        entry("hs27", hs27(), REGULAR),
        entry("hs39", hs39(), REGULAR),
        entry("hs40", hs40(), REGULAR),
        entry("hs42", hs42(), REGULAR),
        entry("hs50", hs50(), REGULAR),
        entry("hs51", hs51(), &with(REGULAR, &[ConvexEqualityQp])),
        entry("rosenbrock_box", rosenbrock_box(), REGULAR),
        entry("simplex_projection", simplex_projection(), REGULAR),
        entry("mixed_bounds_qp", mixed_bounds_qp(), REGULAR),
        entry("all_bounds_active", all_bounds_active(), REGULAR),
        entry("degenerate_corner", degenerate_corner(), &[Licq, Ssosc, Degenerate]),
        entry("ineq_halfline", ineq_halfline(), &ineq(&[])),
        entry("ineq_disk", ineq_disk(), &ineq(&[])),
        entry("ineq_inactive", ineq_inactive(), &ineq(&[])),
        entry("hs21_ineq", hs21(), &ineq(&[])),
        entry("sphere_linear_50", sphere_linear_50(), REGULAR),
    ]
}

pub fn names() -> Vec<&'static str> {
    corpus().into_iter().map(|e| e.name).collect()
}

pub fn find(name: &str) -> Option<CorpusEntry> {
    corpus().into_iter().find(|e| e.name == name)
}
