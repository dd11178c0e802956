use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::signal::Signal;

pub fn white_noise(len: usize, rng: &mut impl Rng) -> Vec<f64> {
    (0..len).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

/// Gaussian noise coloured by `gain(f)` and scaled to unit RMS.
pub(crate) fn shaped_noise<G: Fn(f64) -> f64>(
    len: usize,
    fs: f64,
    rng: &mut impl Rng,
    gain: G,
) -> Vec<f64> {
    if len == 0 {
        return Vec::new();
    }
    let mut buf: Vec<Complex<f64>> = white_noise(len, rng)
        .into_iter()
        .map(|v| Complex::new(v, 0.0))
        .collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(len).process(&mut buf);
    let df = fs / len as f64;
    for (k, c) in buf.iter_mut().enumerate() {
        let bin = k.min(len - k);
        *c *= gain(bin as f64 * df);
    }
    planner.plan_fft_inverse(len).process(&mut buf);
    let out: Vec<f64> = buf.iter().map(|c| c.re).collect();
    let rms = (out.iter().map(|v| v * v).sum::<f64>() / len as f64).sqrt();
    if rms > 0.0 {
        out.into_iter().map(|v| v / rms).collect()
    } else {
        out
    }
}

/// Unit-RMS Gaussian noise confined to `band` (Hz).
pub fn band_noise(len: usize, fs: f64, band: (f64, f64), rng: &mut impl Rng) -> Vec<f64> {
    shaped_noise(len, fs, rng, |f| if f >= band.0 && f <= band.1 { 1.0 } else { 0.0 })
}

/// Adds white Gaussian noise so that signal power over noise power equals
/// `snr_db` exactly. An infinite SNR returns the input unchanged.
pub fn add_noise(w: &Signal, snr_db: f64, seed: u64) -> Result<Signal> {
    if snr_db == f64::INFINITY {
        return Ok(w.clone());
    }
    if snr_db.is_nan() {
        return Err(Error::param("SNR is NaN"));
    }
    let p_signal = w.power();
    if !(p_signal > 0.0) {
        return Err(Error::param("cannot set an SNR against a zero-power signal"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = white_noise(w.len(), &mut rng);
    let p_raw = noise.iter().map(|v| v * v).sum::<f64>() / noise.len() as f64;
    let target = p_signal / 10f64.powf(snr_db / 10.0);
    let scale = (target / p_raw).sqrt();
    Ok(w.with_samples(
        w.samples()
            .iter()
            .zip(&noise)
            .map(|(x, n)| x + scale * n)
            .collect(),
    ))
}
