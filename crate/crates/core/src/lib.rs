pub mod error;
pub mod moebius;
pub mod pfsa;
pub mod sampler;
pub mod solver;
pub mod stats;
pub mod sync;
pub mod text;
pub mod trace;

pub use error::{Error, Result};
