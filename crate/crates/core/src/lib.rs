//! Numerical laboratory for Fueter maps from 3-manifolds into hyperkähler targets.

pub mod bubbles;
pub mod domains;
pub mod error;
pub mod fueter;
pub mod hk;
pub mod measures;
pub mod quaternion;
pub mod regularity;

pub use error::{Error, Result};
pub use quaternion::{quat_mul, Quaternion};
