//! Technology landscape exploration: topic models refined by expert aspect
//! keywords, with a tabular Q-learning agent choosing which topics to review.
//!
//! The pipeline runs bottom-up through the modules:
//!
//! - [`corpus`]: load exported records, screen them with boolean queries, tokenize.
//! - [`aspect`]: tf-idf aspect keywords from expert-curated texts.
//! - [`topics`]: LDA baseline, subtopic splitting, aspect reweighting.
//! - [`metrics`]: magnitude, cosine, entropy, ADNS and the model comparison bundle.
//! - [`agent`]: rewards, Q-updates, document validation, topic selection, sweeps.
//! - [`session`]: the iteration state machine and its on-disk layout.
//! - [`reports`]: tabular exports behind heatmaps, word clouds and Q charts.
//!
//! [`config`] holds the JSON run configuration and [`replay`] drives a session
//! from published rewards instead of documents.

pub mod agent;
pub mod aspect;
pub mod config;
pub mod corpus;
pub mod error;
pub mod metrics;
pub mod replay;
pub mod reports;
pub mod session;
pub mod topics;

pub use error::{Error, Result};
