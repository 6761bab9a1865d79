//! Quasi-normal modes of massless Dirac fields outside a de Sitter-Reissner-Nordstrom
//! black hole: geometry, barrier-top asymptotics, direct and complex-scaled
//! resonance solvers, time-domain evolution and cutoff-resolvent probes.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod barrier;
pub mod error;
pub mod evolution;
pub mod linalg;
pub mod ode;
pub mod probe;
pub mod solver;
pub mod spacetime;

pub use error::{QnmError, Result};
