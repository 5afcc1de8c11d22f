//! Guaranteed smoothness and breaking bounds for electrostatic cold-plasma
//! oscillations, with a characteristic-ODE oracle to check them against.

pub mod error;
pub mod numerics;

pub use error::{Error, Result};
pub mod dynamics;
pub mod bounds;
pub mod pulse;
pub mod spiral;
pub mod oracle;
