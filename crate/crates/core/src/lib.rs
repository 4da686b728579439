//! Brieskorn–Pham link toolkit.
//!
//! Enumerates exponent tuples whose links are homotopy spheres carrying
//! Sasakian-Einstein metrics, computes the Milnor fiber signature by three
//! interchangeable evaluators, and partitions tuples into oriented
//! diffeomorphism classes in bP₄ₖ.

pub mod enumerate;
pub mod error;
pub mod io;
pub mod numeric;
pub mod orchestrate;
pub mod signature;
pub mod topology;

pub use error::{Error, Result};
pub use topology::ExponentTuple;
