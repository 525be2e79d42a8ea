pub mod config;
pub mod error;
pub mod linalg;
pub mod propagators;
pub mod spin;
pub mod squeezing;
pub mod sweep;
pub mod thermo;
pub mod validate;

pub use error::{Error, Result};
