pub mod analysis;
pub mod dd;
pub mod error;
pub mod fixedpoint;
pub mod harness;
pub mod linalg;
pub mod objective;
pub mod tol;
pub mod worstcase;

pub use error::{Error, Result};
