//! Session service and command line for the conversation-practice engine.
//!
//! - [`session`]: one conversation with its transcript and virtual clock
//! - [`api`]: HTTP routes over the session map
//! - [`cli`]: `analyze`, `chat` and `serve`
//! - [`config`]: TOML configuration
//! - [`providers`]: stub or live NLU, ASR and TTS

pub mod api;
pub mod cli;
pub mod config;
pub mod providers;
pub mod session;
