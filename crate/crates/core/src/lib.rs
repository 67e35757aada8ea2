//! Energy-optimal control synthesis for dX/dt = (A + uB)X on SU(1,1).

pub mod algebra;
pub mod cli;
pub mod controllability;
pub mod elliptic;
pub mod error;
pub mod poly;
pub mod problem;
pub mod propagate;
pub mod shoot;
pub mod synthesis;

pub use error::{Error, Result};
