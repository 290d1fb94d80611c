//! Mixture selection over the simplex, optimal signaling via linear
//! programming, and the application solvers, instance generators and
//! brute-force checkers built on top of them.

pub mod applications;
pub mod cli;
pub mod error;
pub mod experiments;
pub mod fourier;
pub mod games;
pub mod hardgen;
pub mod linalg;
pub mod lp;
pub mod matrix;
pub mod mixsel;
pub mod objectives;
pub mod oracles;
pub mod rng;
pub mod signaling;
pub mod simplex;

pub use error::{Error, Result};
pub use matrix::{BoundedMatrix, Domain};
pub use objectives::{Lipschitz, Objective};
pub use rng::SeededRng;
pub use simplex::{SUniformVector, SimplexVector};
