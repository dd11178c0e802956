//! Zero-phase frequency-domain filtering.
//!
//! The signal is padded on both sides by mirror reflection, transformed,
//! multiplied by a real non-negative gain, and transformed back. A real gain has no phase, so peak timing is preserved
//! exactly and the operation is linear.
//!
//! The gain is unity inside `[low, high]` and falls to zero over one octave
//! on each side with a raised-cosine skirt: `low/2 .. low` and `high .. 2*high`.
//! Everything beyond the skirts is removed entirely.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use super::Signal;
use crate::error::{Error, Result};

/// Gain of the `[low, high]` band at frequency `f` (Hz). `low == 0` gives a low-pass.
pub fn band_gain(f: f64, low: f64, high: f64) -> f64 {
    let f = f.abs();
    if f > high {
        if f >= 2.0 * high {
            return 0.0;
        }
        return 0.5 * (1.0 + (std::f64::consts::PI * (f - high) / high).cos());
    }
    if low > 0.0 && f < low {
        let edge = 0.5 * low;
        if f <= edge {
            return 0.0;
        }
        return 0.5 * (1.0 - (std::f64::consts::PI * (f - edge) / edge).cos());
    }
    1.0
}

pub(crate) fn apply_gain<G: Fn(f64) -> f64>(x: &[f64], sample_rate: f64, gain: G) -> Vec<f64> {
    let n = x.len();
    if n == 0 {
        return Vec::new();
    }
    // mirror about each endpoint, fading to zero so the circular wrap is continuous
    let pad = n - 1;
    let m = (n + 2 * pad).next_power_of_two();
    let mut buf = vec![Complex::new(0.0, 0.0); m];
    for (b, &v) in buf.iter_mut().zip(x) {
        b.re = v;
    }
    for j in 1..=pad {
        let fade = 0.5 * (1.0 + (std::f64::consts::PI * (j - 1) as f64 / pad as f64).cos());
        buf[n - 1 + j].re = fade * x[n - 1 - j];
        buf[m - j].re = fade * x[j];
    }
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(m).process(&mut buf);
    let df = sample_rate / m as f64;
    for (k, c) in buf.iter_mut().enumerate() {
        let bin = k.min(m - k);
        *c *= gain(bin as f64 * df);
    }
    planner.plan_fft_inverse(m).process(&mut buf);
    let scale = 1.0 / m as f64;
    buf[..n].iter().map(|c| c.re * scale).collect()
}

/// Zero-phase band-pass keeping `[low, high]` Hz.
pub fn bandpass(s: &Signal, low: f64, high: f64) -> Result<Signal> {
    let nyquist = s.sample_rate() / 2.0;
    if !(low >= 0.0 && low < high && high <= nyquist) {
        return Err(Error::param(format!(
            "band [{low}, {high}] Hz invalid for Nyquist {nyquist} Hz"
        )));
    }
    Ok(s.with_samples(apply_gain(s.samples(), s.sample_rate(), |f| {
        band_gain(f, low, high)
    })))
}

/// Zero-phase low-pass with the given cutoff.
pub fn lowpass(s: &Signal, cutoff: f64) -> Result<Signal> {
    let nyquist = s.sample_rate() / 2.0;
    if !(cutoff > 0.0 && cutoff < nyquist) {
        return Err(Error::param(format!(
            "cutoff {cutoff} Hz must lie in (0, {nyquist}) Hz"
        )));
    }
    Ok(s.with_samples(apply_gain(s.samples(), s.sample_rate(), |f| {
        band_gain(f, 0.0, cutoff)
    })))
}

/// Keeps every `factor`-th sample. The caller must have band-limited the
/// signal below the new Nyquist rate.
pub fn decimate(s: &Signal, factor: usize) -> Signal {
    if factor <= 1 {
        return s.clone();
    }
    Signal::from_parts(
        s.samples().iter().step_by(factor).copied().collect(),
        s.sample_rate() / factor as f64,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn tone(freq: f64, amp: f64, fs: f64, secs: f64) -> Vec<f64> {
        let n = (fs * secs) as usize;
        (0..n)
            .map(|i| amp * (2.0 * PI * freq * i as f64 / fs).sin())
            .collect()
    }

    fn interior_peak(x: &[f64]) -> f64 {
        let q = x.len() / 10;
        x[q..x.len() - q].iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    fn correlation(a: &[f64], b: &[f64]) -> f64 {
        let ma = a.iter().sum::<f64>() / a.len() as f64;
        let mb = b.iter().sum::<f64>() / b.len() as f64;
        let mut num = 0.0;
        let mut da = 0.0;
        let mut db = 0.0;
        for (x, y) in a.iter().zip(b) {
            num += (x - ma) * (y - mb);
            da += (x - ma) * (x - ma);
            db += (y - mb) * (y - mb);
        }
        num / (da * db).sqrt()
    }

    #[test]
    fn passband_tone_retained() {
        let s = Signal::new(tone(0.25, 1.0, 100.0, 60.0), 100.0).unwrap();
        let out = bandpass(&s, 0.15, 0.35).unwrap();
        assert!((interior_peak(out.samples()) - 1.0).abs() < 0.05);
    }

    #[test]
    fn stopband_tone_rejected() {
        let s = Signal::new(tone(5.0, 1.0, 100.0, 60.0), 100.0).unwrap();
        let out = bandpass(&s, 0.15, 0.35).unwrap();
        assert!(interior_peak(out.samples()) < 0.01);
    }

    #[test]
    fn mixture_keeps_slow_component() {
        let slow = tone(0.25, 1.0, 100.0, 60.0);
        let fast = tone(5.0, 1.0, 100.0, 60.0);
        let mix: Vec<f64> = slow.iter().zip(&fast).map(|(a, b)| a + b).collect();
        let out = bandpass(&Signal::new(mix, 100.0).unwrap(), 0.15, 0.35).unwrap();
        assert!(correlation(out.samples(), &slow) > 0.99);
    }

    #[test]
    fn lowpass_keeps_dc_and_rejects_high() {
        let s = Signal::new(vec![0.7; 4000], 1000.0).unwrap();
        let out = lowpass(&s, 30.0).unwrap();
        let worst = out.samples().iter().fold(0.0f64, |m, v| m.max((v - 0.7).abs()));
        assert!(worst < 1e-6, "{worst}");

        let s = Signal::new(tone(100.0, 1.0, 1000.0, 4.0), 1000.0).unwrap();
        let out = lowpass(&s, 30.0).unwrap();
        assert!(interior_peak(out.samples()) < 0.01);
    }

    #[test]
    fn invalid_cutoffs() {
        let s = Signal::new(vec![0.0; 100], 100.0).unwrap();
        assert!(bandpass(&s, 0.35, 0.15).is_err());
        assert!(bandpass(&s, 1.0, 60.0).is_err());
        assert!(lowpass(&s, 50.0).is_err());
        assert!(lowpass(&s, 0.0).is_err());
    }

    #[test]
    fn stopband_attenuation_at_least_40_db() {
        // gain is exactly zero outside the skirts; leakage stays far below -40 dB
        let s = Signal::new(tone(3.0, 1.0, 50.0, 30.0), 50.0).unwrap();
        let out = bandpass(&s, 0.5, 1.0).unwrap();
        let peak = interior_peak(out.samples());
        assert!(20.0 * peak.log10() < -40.0);
    }

    #[test]
    fn band_gain_shape() {
        assert_eq!(band_gain(0.25, 0.15, 0.35), 1.0);
        assert_eq!(band_gain(0.7, 0.15, 0.35), 0.0);
        assert_eq!(band_gain(0.07, 0.15, 0.35), 0.0);
        assert!((band_gain(0.525, 0.15, 0.35) - 0.5).abs() < 1e-12);
        assert_eq!(band_gain(0.0, 0.0, 30.0), 1.0);
    }
}
