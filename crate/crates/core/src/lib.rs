pub mod algebra;
pub mod cli;
pub mod error;
pub mod float17;
pub mod mfe;
pub mod ode;
pub mod pde;
pub mod verify;

pub use error::{Error, Result};
