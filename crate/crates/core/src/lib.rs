pub mod analytic;
pub mod channels;
pub mod equiv;
pub mod error;
pub mod fock;
pub mod quad;
pub mod scenario;
pub mod tolerance;

pub use error::{Error, Result};
