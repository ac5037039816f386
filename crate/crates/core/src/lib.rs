//! Core of a conversation-practice engine.
//!
//! The crate is organised around the pieces of one practice session:
//!
//! - [`types`]: utterances, transcripts, and feedback reports
//! - [`metrics`]: the five conversation-skill metrics
//! - [`dialogue`]: the scripted topic flow, persona, feedback, and survey
//! - [`nlu`]: turning user text into an [`nlu::Interpretation`]
//! - [`speech`]: speech-recognition and synthesis ports plus WAV bookkeeping
//! - [`persistence`]: the on-disk user registry and session archive

pub mod dialogue;
pub mod metrics;
pub mod nlu;
pub mod persistence;
#[cfg(feature = "remote")]
pub mod remote;
pub mod speech;
pub mod types;

pub use metrics::{Thresholds, WordLists};
pub use types::{FeedbackReport, MetricVerdict, Speaker, Transcript, Utterance, Verdict};
