//! Learned semantic networks and random-walk simulation of the semantic
//! fluency task.
//!
//! The pipeline: a probabilistic cross-situational learner turns
//! utterance–scene corpora into per-word meaning distributions
//! ([`learner`]); thresholded cosine similarity over those vectors (or any
//! externally supplied vector table) yields a semantic network
//! ([`network`]); seeded random walks over the network simulate fluency
//! responses ([`walker`]); inter-item retrieval times are analyzed against
//! the optimal-foraging patch signature ([`fluency`]); network structure is
//! scored with small-world and category-cluster metrics ([`metrics`]); and
//! [`sweep`] runs the whole thing over a tau x walk-length grid.

pub mod corpus;
pub mod error;
pub mod fluency;
pub mod learner;
pub mod metrics;
pub mod network;
pub mod sweep;
pub mod walker;

pub use error::{Error, Result};
