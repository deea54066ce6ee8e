pub mod document;
pub mod error;
pub mod fixtures;
pub mod geometry;
pub mod manipulation;
pub mod metrics;
pub mod scale;
pub mod svg;

pub use error::{Error, Result};
