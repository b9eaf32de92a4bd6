//! Primal-dual hybrid gradient (Chambolle-Pock) iteration for
//! `min_x f(x) + g(Lx)` with relaxation `0 < theta <= 1`, together with a
//! certificate engine that evaluates the Lyapunov descent inequality, its
//! lower bound, and the `O(1/k)` ergodic gap bound along a run.
//!
//! ```
//! use chambolle_pock::hilbert::{LinearOperator, PPoint, Vector};
//! use chambolle_pock::problems::make_quadratic;
//! use chambolle_pock::solver::{run, RunOptions, SolverParams};
//! use chambolle_pock::certificates::{certify_trajectory, DEFAULT_CERTIFICATE_TOL};
//!
//! let problem = make_quadratic(LinearOperator::identity(1)?, Vector::from([1.0]), Vector::from([0.0]))?;
//! let params = SolverParams::at_safety(0.5, 1.0, 0.9, 1.0)?;
//! let traj = run(&problem, &params, &PPoint::zeros(1, 1), &RunOptions::fixed(50))?;
//! let kkt = problem.kkt.as_ref().unwrap();
//! let log = certify_trajectory(&traj, kkt, &problem, DEFAULT_CERTIFICATE_TOL)?;
//! assert!(log.all_pass());
//! # Ok::<(), chambolle_pock::Error>(())
//! ```

pub mod certificates;
mod error;
pub mod hilbert;
pub mod problems;
pub mod prox;
pub mod solver;

pub use error::{Error, Result};
