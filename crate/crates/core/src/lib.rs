//! Continual text classification of dish names.
//!
//! The crate covers the full pipeline: corpus ingestion and heuristic
//! labeling, TF-IDF features with a frozen vocabulary, SMOTE balancing, a
//! small feedforward network trained with Adam, four comparison baselines,
//! evaluation metrics, and incremental updates with experience replay.

pub mod balance;
pub mod baselines;
pub mod codec;
pub mod continual;
pub mod corpus;
pub mod error;
pub mod metrics;
pub mod nnet;
pub mod pipeline;
pub mod seed;
pub mod sparse;
pub mod vectorizer;

pub use error::{Error, Result};
pub use sparse::SparseVector;
