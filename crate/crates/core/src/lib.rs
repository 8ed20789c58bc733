pub mod engine;
pub mod error;
pub mod experiments;
pub mod lattice;
pub mod statevector;

pub use error::{QlbmError, Result};
