//! Canonical heights, reduction data and torsion of elliptic curves over Q,
//! with numeric checks of explicit lower bounds for canonical heights.

pub mod bounds;
pub mod error;
pub mod harness;
pub mod exactnum;
pub mod heights;
pub mod localdata;
pub mod torsion;
pub mod weierstrass;

pub use error::{Error, Result};
