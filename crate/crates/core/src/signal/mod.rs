//! DSP primitives shared by both estimation pipelines.

mod envelope;
pub(crate) mod filter;
mod peaks;
mod spectral;
mod ssa;
mod stats;

pub use envelope::hilbert_envelope;
pub use filter::{bandpass, band_gain, decimate, lowpass};
pub use peaks::{adaptive_peak_detect, EnvelopeMode, PeakLocation, PeakParams};
pub use spectral::{dominant_frequency, periodogram, zero_crossing_rr, PowerSpectrum};
pub use ssa::{ssa_decompose, SsaDecomposition};
pub use stats::{cosine_similarity, detrend, mean, Detrend, minmax_normalize, moving_average, std_dev};

use crate::error::{Error, Result};

/// Real-valued samples at a fixed sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    samples: Vec<f64>,
    sample_rate: f64,
}

impl Signal {
    pub fn new(samples: Vec<f64>, sample_rate: f64) -> Result<Self> {
        if !(sample_rate > 0.0) || !sample_rate.is_finite() {
            return Err(Error::param(format!("sample rate must be positive, got {sample_rate}")));
        }
        if let Some(i) = samples.iter().position(|x| !x.is_finite()) {
            return Err(Error::param(format!("non-finite sample at index {i}")));
        }
        Ok(Self {
            samples,
            sample_rate,
        })
    }

    /// Builds a signal from samples known to be finite.
    pub(crate) fn from_parts(samples: Vec<f64>, sample_rate: f64) -> Self {
        debug_assert!(sample_rate > 0.0);
        debug_assert!(samples.iter().all(|x| x.is_finite()));
        Self {
            samples,
            sample_rate,
        }
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate
    }

    /// Same sample rate, new samples.
    pub(crate) fn with_samples(&self, samples: Vec<f64>) -> Self {
        Self::from_parts(samples, self.sample_rate)
    }

    /// Copy of `[start, end)` in samples, clamped to the signal.
    pub fn slice(&self, start: usize, end: usize) -> Self {
        let end = end.min(self.len());
        let start = start.min(end);
        self.with_samples(self.samples[start..end].to_vec())
    }

    pub fn scaled(&self, gain: f64) -> Self {
        self.with_samples(self.samples.iter().map(|x| x * gain).collect())
    }

    pub fn power(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        self.samples.iter().map(|x| x * x).sum::<f64>() / self.samples.len() as f64
    }
}

/// Detected event positions within a signal.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PeakSet {
    pub indices: Vec<usize>,
    pub times: Vec<f64>,
}

impl PeakSet {
    pub fn from_indices(indices: Vec<usize>, sample_rate: f64) -> Self {
        debug_assert!(indices.windows(2).all(|w| w[0] < w[1]));
        let times = indices.iter().map(|&i| i as f64 / sample_rate).collect();
        Self { indices, times }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}
