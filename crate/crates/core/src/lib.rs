//! Numerical laboratory for linear and nonlinear convolution Volterra
//! summation equations with unbounded forcing.
//!
//! The crate is organised bottom-up:
//!
//! * [`solver`]: exact finite-horizon solvers, the resolvent, the
//!   variation-of-constants representation and forcing recovery;
//! * [`spectral`]: summability of the resolvent and the growth multiplier;
//! * [`asymptotics`]: growth-rate and fluctuation diagnostics on finite
//!   trajectories;
//! * [`stochastic`]: seeded random forcings, Borel-Cantelli envelope sums,
//!   tail classification and Monte-Carlo ensembles.

pub mod asymptotics;
pub mod error;
pub mod kernel;
pub mod nonlinearity;
pub mod solver;
pub mod spectral;
pub mod stochastic;
pub mod trajectory;

pub use error::{Error, Result};
pub use kernel::{Kernel, KernelSpec};
pub use nonlinearity::{Nonlinearity, Production};
pub use solver::{
    recover_forcing, recover_forcing_nonlinear, resolvent, resolvent_log, solve_by_representation,
    solve_linear, solve_linear_log, solve_nonlinear, solve_with_resolvent,
};
pub use trajectory::{LogTrajectory, LogValue, Trajectory};
