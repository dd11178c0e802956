//! Respiratory rate estimation from two-channel in-ear microphone audio.
//!
//! Two estimators share a DSP core:
//!
//! * [`rsa`] recovers the breathing rhythm from heartbeat timing (respiratory
//!   sinus arrhythmia) while the wearer is sedentary, searching for the
//!   breathing band adaptively instead of using a fixed one.
//! * [`lrc`] recovers it from breathing sounds while the wearer walks or
//!   runs, using footstep cadence and the locomotor-respiratory coupling
//!   range to discard components that cannot be breathing.
//!
//! [`selector`] decides per window which estimator applies, [`synth`]
//! generates audio with known ground truth, and [`io`] ties everything to
//! WAV files, configuration and CSV/JSONL output.

pub mod error;
pub mod io;
pub mod lrc;
pub mod rsa;
pub mod selector;
pub mod signal;
pub mod synth;
pub mod types;

pub use error::{Error, Result};
pub use types::{ActivityClass, AudioWindow, Channel, PipelineKind, RrEstimate};
