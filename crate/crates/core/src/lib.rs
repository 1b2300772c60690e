pub mod analytic;
pub mod biofet;
pub mod control;
pub mod detector;
pub mod error;
pub mod harness;
pub mod link;
pub mod particles;
pub mod registry;

pub use error::{Error, Result};
