//! Spam campaign detection from the way clusters of near-duplicate messages
//! spread through topic-labelled structural communities.
//!
//! The pipeline runs per neighborhood: build the follow graph, take its
//! k-core, find communities, fit a topic model over per-user documents,
//! cluster near-duplicate messages by shared four-grams, and describe each
//! cluster by the topics of the communities it reached. Those descriptions
//! feed a binary spam classifier.

pub mod classify;
pub mod error;
pub mod evalmetrics;
pub mod graph;
pub mod grouping;
pub mod ingest;
pub mod pipeline;
pub mod poi;
pub mod seed;
pub mod simulate;
pub mod synth;
pub mod topics;

pub use error::{Error, Result};
