//! Numerical kernels used throughout the crate.

pub mod lambert;
pub mod ode;
pub mod optimize;
pub mod quadrature;
pub mod roots;

pub use lambert::{lambert_w, WBranch};
pub use ode::{integrate, integrate_lenient, Crossing, Event, OdeOptions, OdeTrajectory};
pub use optimize::{optimize_scalar, Extremum};
pub use quadrature::{integrate_adaptive, integrate_singular, integrate_singular_with, QuadOptions, SingularEnds};
pub use roots::{find_root, march_to_root};
