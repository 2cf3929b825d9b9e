pub mod constraints;
pub mod crf_model;
pub mod error;
pub mod experiment;
pub mod factor_graph;
pub mod learner;
pub mod snake_data;

pub use error::{Error, Result};
