pub mod error;
pub mod counting;
pub mod histories;
pub mod models;
pub mod qcore;
pub mod runner;
pub mod statmech;

pub use error::{Error, Result};
