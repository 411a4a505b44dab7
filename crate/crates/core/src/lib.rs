pub mod error;
pub mod harness;
pub mod kkt;
pub mod linalg;
pub mod method;
pub mod order;
pub mod problems;
pub mod stability;

pub use error::{Error, Result};
