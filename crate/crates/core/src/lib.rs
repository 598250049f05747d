//! Desk-scale EEG-to-text toolkit.
//!
//! ```text
//! EDF / raw .f32 ──► io ──► signal (band-pass → notch → 200 Hz → 10 s windows)
//!                               │
//!                 ┌─────────────┼──────────────┐
//!                 ▼             ▼              ▼
//!             features       topomap        align (dual-stream sigmoid
//!          (bands, tiers,   (median-sample   contrastive training)
//!            template)        IDW image)        │
//!                 │             │              ▼
//!                 └──► narrate ◄┘          retrieval
//!                         │
//!                         ▼
//!                     text_eval ──► corpus store
//! ```

pub mod align;
pub mod corpus;
pub mod error;
pub mod features;
pub mod http;
pub mod io;
pub mod narrate;
pub mod pipeline;
pub mod retrieval;
pub mod signal;
pub mod synth;
pub mod text_eval;
pub mod topomap;
pub mod util;

pub use error::{Error, Result};
