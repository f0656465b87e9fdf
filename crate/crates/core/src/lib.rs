pub mod channel;
pub mod eccore;
pub mod error;
pub mod mcoracle;
pub mod rateopt;
pub mod registry;
pub mod rng;
pub mod specfun;

pub use error::{Error, Result};
