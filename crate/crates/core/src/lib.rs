pub mod error;
pub mod integrals;
pub mod laxkit;
pub mod poisson;
pub mod report;
pub mod rootsys;
pub mod symbolic;
pub mod verify;

pub use error::{Error, Result};
