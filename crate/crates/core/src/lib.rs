pub mod corpus;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod experiment;
pub mod java;
pub mod learn;
pub mod metrics;
pub mod pipeline;
pub mod provenance;
pub mod rng;
pub mod sampling;

pub use error::{Error, Result};
