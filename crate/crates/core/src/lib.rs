//! Exact evaluation and constructions for continuous first-order logic over
//! finite pseudo-metric structures.

pub mod algebra;
pub mod defcat;
pub mod definability;
pub mod eqcons;
pub mod error;
pub mod fixtures;
pub mod gen;
pub mod rational;
pub mod report;
pub mod semantics;
pub mod syntax;

pub use error::{Error, Result};
pub use rational::Rational;
