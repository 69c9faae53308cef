//! Primal-dual augmented Lagrangian method (P-D ALM) for
//!
//! ```text
//!     min f(x)   s.t.   h(x) = 0,   l <= x <= u
//! ```
//!
//! Each outer iteration estimates the variables active at their bounds,
//! tries a Newton step on the reduced KKT system of the remaining ones, and
//! falls back to approximately minimizing the augmented Lagrangian over the
//! box when the Newton step is unavailable or rejected. A plain augmented
//! Lagrangian mode (no Newton branch) is provided for comparison.
//!
//! ```
//! use nalgebra::{dmatrix, dvector, DMatrix};
//! use pdalm::{solve, NlpProblem, SolverConfig, Status};
//!
//! // min x1 + x2  s.t.  x1^2 + x2^2 = 2,  0 <= x <= 2
//! let problem = NlpProblem::new(dvector![0.0, 0.0], dvector![2.0, 2.0], dvector![1.5, 0.5])?
//!     .with_objective(|x| x[0] + x[1], |_| dvector![1.0, 1.0])
//!     .with_constraints(
//!         1,
//!         |x| dvector![x[0] * x[0] + x[1] * x[1] - 2.0],
//!         |x| dmatrix![2.0 * x[0]; 2.0 * x[1]],
//!     )
//!     .with_hessian(|_, mu| DMatrix::identity(2, 2) * (2.0 * mu[0]));
//!
//! let report = solve(&problem, &SolverConfig::default())?;
//! assert_eq!(report.status, Status::KktSatisfied);
//! assert!((report.final_iterate.x[0] - 2f64.sqrt()).abs() < 1e-5);
//! # Ok::<(), pdalm::Error>(())
//! ```

pub mod corpus;
pub mod driver;
pub mod error;
pub mod inner;
pub mod kkt;
pub mod linalg;
pub mod model;
pub mod newton;

pub use driver::{solve, Mode, SolveReport, SolverConfig, Status, StepKind};
pub use error::{Error, Result};
pub use model::NlpProblem;
