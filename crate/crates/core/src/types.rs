//! Domain types shared across the pipelines.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::signal::Signal;

/// Which ear a window was recorded from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Channel {
    Left,
    Right,
    Mono,
}

/// A fixed-duration, single-channel buffer: the unit of all processing.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioWindow {
    pub signal: Signal,
    pub channel: Channel,
    /// Offset of the first sample within the recording, in seconds.
    pub start_s: f64,
}

impl AudioWindow {
    pub fn new(signal: Signal, channel: Channel) -> Self {
        Self {
            signal,
            channel,
            start_s: 0.0,
        }
    }

    pub fn duration(&self) -> f64 {
        self.signal.duration()
    }

    pub fn sample_rate(&self) -> f64 {
        self.signal.sample_rate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActivityClass {
    Sedentary,
    ActiveLow,
    ActiveHigh,
    Undetermined,
}

impl ActivityClass {
    pub fn is_active(self) -> bool {
        matches!(self, ActivityClass::ActiveLow | ActivityClass::ActiveHigh)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ActivityClass::Sedentary => "sedentary",
            ActivityClass::ActiveLow => "active_low",
            ActivityClass::ActiveHigh => "active_high",
            ActivityClass::Undetermined => "undetermined",
        }
    }
}

impl fmt::Display for ActivityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ActivityClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sedentary" => Ok(ActivityClass::Sedentary),
            "active_low" => Ok(ActivityClass::ActiveLow),
            "active_high" => Ok(ActivityClass::ActiveHigh),
            "undetermined" => Ok(ActivityClass::Undetermined),
            other => Err(format!("unknown activity class '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PipelineKind {
    #[serde(rename = "RSA")]
    Rsa,
    #[serde(rename = "LRC")]
    Lrc,
}

impl PipelineKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PipelineKind::Rsa => "RSA",
            PipelineKind::Lrc => "LRC",
        }
    }
}

impl fmt::Display for PipelineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PipelineKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "RSA" => Ok(PipelineKind::Rsa),
            "LRC" => Ok(PipelineKind::Lrc),
            other => Err(format!("unknown pipeline '{other}'")),
        }
    }
}

/// One respiratory-rate value for one estimation window.
///
/// `rr` is `None` whenever `valid` is false; invalid windows never carry a value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RrEstimate {
    pub window_start: f64,
    pub window_end: f64,
    /// `None` when the selector could not settle on a pipeline.
    pub pipeline: Option<PipelineKind>,
    pub activity: ActivityClass,
    pub rr: Option<f64>,
    pub valid: bool,
    /// Per-channel RR in BPM (left, right) where the pipeline produced one.
    #[serde(skip)]
    pub channel_detail: [Option<f64>; 2],
}

impl RrEstimate {
    pub fn invalid(pipeline: PipelineKind, activity: ActivityClass) -> Self {
        Self {
            pipeline: Some(pipeline),
            activity,
            ..Self::undetermined()
        }
    }

    /// A window no pipeline was run on.
    pub fn undetermined() -> Self {
        Self {
            window_start: 0.0,
            window_end: 0.0,
            pipeline: None,
            activity: ActivityClass::Undetermined,
            rr: None,
            valid: false,
            channel_detail: [None, None],
        }
    }

    pub fn valid(pipeline: PipelineKind, activity: ActivityClass, rr: f64) -> Self {
        Self {
            rr: Some(rr),
            valid: true,
            ..Self::invalid(pipeline, activity)
        }
    }

    pub(crate) fn with_span(mut self, start: f64, end: f64) -> Self {
        self.window_start = start;
        self.window_end = end;
        self
    }
}

/// Lowest plausible human breathing rate, BPM.
pub const RR_MIN_BPM: f64 = 7.5;
/// Highest plausible human breathing rate, BPM.
pub const RR_MAX_BPM: f64 = 42.5;
