use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use super::{moving_average, Signal};
use crate::error::{Error, Result};

/// Magnitude of the analytic signal, smoothed by a centered moving average of
/// `smooth_window` seconds (0 disables smoothing).
pub fn hilbert_envelope(s: &Signal, smooth_window: f64) -> Result<Signal> {
    if s.is_empty() {
        return Err(Error::param("envelope of an empty signal"));
    }
    if !(smooth_window >= 0.0) {
        return Err(Error::param(format!(
            "smoothing window must be non-negative, got {smooth_window}"
        )));
    }
    let n = s.len();
    let mut buf: Vec<Complex<f64>> = s.samples().iter().map(|&v| Complex::new(v, 0.0)).collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(n).process(&mut buf);
    // analytic signal: double positive frequencies, drop negative ones
    let half = n / 2;
    for (k, c) in buf.iter_mut().enumerate() {
        if k == 0 || (n % 2 == 0 && k == half) {
            continue;
        }
        if k <= (n - 1) / 2 {
            *c *= 2.0;
        } else {
            *c = Complex::new(0.0, 0.0);
        }
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    let scale = 1.0 / n as f64;
    let mag: Vec<f64> = buf.iter().map(|c| c.norm() * scale).collect();
    let w = (smooth_window * s.sample_rate()).round() as usize;
    let env = if w > 1 { moving_average(&mag, w) } else { mag };
    Ok(s.with_samples(env))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn sinusoid_envelope_is_amplitude() {
        let fs = 1000.0;
        let x: Vec<f64> = (0..10_000)
            .map(|i| (2.0 * PI * 13.0 * i as f64 / fs + 0.3).sin())
            .collect();
        let env = hilbert_envelope(&Signal::new(x, fs).unwrap(), 0.05).unwrap();
        let e = env.samples();
        for v in &e[1000..9000] {
            assert!((v - 1.0).abs() < 0.02, "{v}");
        }
    }

    #[test]
    fn am_envelope_tracks_modulator() {
        let fs = 500.0;
        let n = 10_000;
        let modulator: Vec<f64> = (0..n)
            .map(|i| 1.0 + 0.5 * (2.0 * PI * 1.0 * i as f64 / fs).sin())
            .collect();
        let x: Vec<f64> = modulator
            .iter()
            .enumerate()
            .map(|(i, m)| m * (2.0 * PI * 20.0 * i as f64 / fs).sin())
            .collect();
        let env = hilbert_envelope(&Signal::new(x, fs).unwrap(), 0.0).unwrap();
        let e = &env.samples()[500..n - 500];
        let m = &modulator[500..n - 500];
        let me = e.iter().sum::<f64>() / e.len() as f64;
        let mm = m.iter().sum::<f64>() / m.len() as f64;
        let (mut num, mut de, mut dm) = (0.0, 0.0, 0.0);
        for (a, b) in e.iter().zip(m) {
            num += (a - me) * (b - mm);
            de += (a - me).powi(2);
            dm += (b - mm).powi(2);
        }
        assert!(num / (de * dm).sqrt() > 0.98);
    }

    #[test]
    fn zero_signal_zero_envelope() {
        let env = hilbert_envelope(&Signal::new(vec![0.0; 64], 10.0).unwrap(), 0.2).unwrap();
        assert!(env.samples().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn empty_signal_rejected() {
        assert!(hilbert_envelope(&Signal::new(vec![], 10.0).unwrap(), 0.0).is_err());
    }
}
