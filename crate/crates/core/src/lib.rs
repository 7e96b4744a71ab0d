//! Mumford-type integrable systems: phase spaces, vector fields, Lax/NY maps,
//! verification, cohomology and special-function solutions.

pub mod algebra;
pub mod cohomology;
pub mod error;
pub mod flows;
pub mod integrator;
pub mod laxny;
pub mod parallel;
pub mod phase;
pub mod special;
pub mod verification;

pub use error::{Error, Result};
