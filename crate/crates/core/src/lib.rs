pub mod error;
pub mod feshbach;
pub mod fock;
pub mod harness;
pub mod harmonics;
pub mod kernels;
pub mod linalg;
pub mod pipeline;
pub mod quadrature;
pub mod so3;
pub mod transversal;

pub use error::{Error, Result};
