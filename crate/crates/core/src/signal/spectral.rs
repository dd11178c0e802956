use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use super::Signal;
use crate::error::{Error, Result};

/// One-sided power spectrum; `power` sums to the mean-square of the frame.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSpectrum {
    pub freqs: Vec<f64>,
    pub power: Vec<f64>,
}

impl PowerSpectrum {
    pub fn total(&self) -> f64 {
        self.power.iter().sum()
    }

    /// Power in bins whose centre lies inside `[low, high]`.
    pub fn band_power(&self, low: f64, high: f64) -> f64 {
        self.freqs
            .iter()
            .zip(&self.power)
            .filter(|(f, _)| **f >= low && **f <= high)
            .map(|(_, p)| p)
            .sum()
    }
}

pub fn periodogram(frame: &Signal) -> PowerSpectrum {
    let n = frame.len();
    if n == 0 {
        return PowerSpectrum {
            freqs: Vec::new(),
            power: Vec::new(),
        };
    }
    let mut buf: Vec<Complex<f64>> = frame
        .samples()
        .iter()
        .map(|&v| Complex::new(v, 0.0))
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let norm = 1.0 / (n as f64 * n as f64);
    let half = n / 2;
    let df = frame.sample_rate() / n as f64;
    let mut freqs = Vec::with_capacity(half + 1);
    let mut power = Vec::with_capacity(half + 1);
    for (k, c) in buf.iter().enumerate().take(half + 1) {
        let mirrored = k != 0 && !(n % 2 == 0 && k == half);
        let p = c.norm_sqr() * norm * if mirrored { 2.0 } else { 1.0 };
        freqs.push(k as f64 * df);
        power.push(p);
    }
    PowerSpectrum { freqs, power }
}

/// FFT length for `dominant_frequency`: at least 16x the input, kept below
/// 2^22 points for audio-rate inputs as long as 0.005 Hz resolution holds.
fn padded_len(n: usize, sample_rate: f64) -> usize {
    const CAP: usize = 1 << 22;
    let wanted = (16 * n).next_power_of_two();
    if wanted <= CAP {
        return wanted;
    }
    let for_resolution = (sample_rate / 0.005).ceil() as usize;
    n.max(for_resolution).next_power_of_two()
}

/// Frequency (Hz) of the largest zero-padded FFT bin inside `band`.
pub fn dominant_frequency(s: &Signal, band: (f64, f64)) -> Result<f64> {
    let (lo, hi) = band;
    let nyquist = s.sample_rate() / 2.0;
    if !(lo >= 0.0 && lo <= hi && hi <= nyquist) {
        return Err(Error::param(format!(
            "band [{lo}, {hi}] Hz outside [0, {nyquist}] Hz"
        )));
    }
    if s.is_empty() {
        return Err(Error::param("dominant frequency of an empty signal"));
    }
    let m = padded_len(s.len(), s.sample_rate());
    let mut buf = vec![Complex::new(0.0, 0.0); m];
    for (b, &v) in buf.iter_mut().zip(s.samples()) {
        b.re = v;
    }
    FftPlanner::new().plan_fft_forward(m).process(&mut buf);
    let df = s.sample_rate() / m as f64;
    let k_lo = (lo / df).ceil() as usize;
    let k_hi = ((hi / df).floor() as usize).min(m / 2);
    if k_lo > k_hi {
        return Err(Error::param(format!(
            "band [{lo}, {hi}] Hz contains no frequency bin"
        )));
    }
    let mut best = k_lo;
    let mut best_mag = f64::NEG_INFINITY;
    for (k, c) in buf.iter().enumerate().take(k_hi + 1).skip(k_lo) {
        let mag = c.norm_sqr();
        if mag > best_mag {
            best_mag = mag;
            best = k;
        }
    }
    Ok(best as f64 * df)
}

/// Breaths per minute from the number of sign changes, two per cycle.
pub fn zero_crossing_rr(s: &Signal) -> f64 {
    let x = s.samples();
    if x.len() < 2 {
        return 0.0;
    }
    let crossings = x.windows(2).filter(|w| (w[0] < 0.0) != (w[1] < 0.0)).count();
    let minutes = s.duration() / 60.0;
    crossings as f64 / 2.0 / minutes
}
