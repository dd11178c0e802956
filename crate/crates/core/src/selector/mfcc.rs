//! Mel-frequency cepstral coefficients averaged over a segment.

use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::signal::Signal;

pub const N_MFCC: usize = 13;
pub const N_MEL: usize = 26;
pub const MFCC_FRAME_S: f64 = 0.025;
pub const MFCC_HOP_S: f64 = 0.010;

/// Segment descriptor used by the selector.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentFeatures {
    pub mfcc: [f64; N_MFCC],
}

fn hz_to_mel(f: f64) -> f64 {
    2595.0 * (1.0 + f / 700.0).log10()
}

fn mel_to_hz(m: f64) -> f64 {
    700.0 * (10f64.powf(m / 2595.0) - 1.0)
}

/// Triangular filters spaced evenly on the mel scale from 0 to Nyquist,
/// as weights over the one-sided FFT bins.
fn mel_filterbank(nfft: usize, fs: f64) -> Vec<Vec<f64>> {
    let top = hz_to_mel(fs / 2.0);
    let edges: Vec<f64> = (0..N_MEL + 2)
        .map(|i| mel_to_hz(top * i as f64 / (N_MEL + 1) as f64))
        .collect();
    let df = fs / nfft as f64;
    (0..N_MEL)
        .map(|m| {
            let (lo, mid, hi) = (edges[m], edges[m + 1], edges[m + 2]);
            (0..=nfft / 2)
                .map(|k| {
                    let f = k as f64 * df;
                    if f <= lo || f >= hi {
                        0.0
                    } else if f <= mid {
                        (f - lo) / (mid - lo)
                    } else {
                        (hi - f) / (hi - mid)
                    }
                })
                .collect()
        })
        .collect()
}

pub fn mfcc_features(seg: &Signal) -> Result<SegmentFeatures> {
    let fs = seg.sample_rate();
    let flen = (MFCC_FRAME_S * fs).round() as usize;
    let hop = ((MFCC_HOP_S * fs).round() as usize).max(1);
    if flen < 2 || seg.len() < flen {
        return Err(Error::param(format!(
            "segment of {} samples shorter than one {} ms frame",
            seg.len(),
            MFCC_FRAME_S * 1e3
        )));
    }
    let nfft = flen.next_power_of_two();
    let fft = FftPlanner::new().plan_fft_forward(nfft);
    let bank = mel_filterbank(nfft, fs);
    let hamming: Vec<f64> = (0..flen)
        .map(|i| 0.54 - 0.46 * (2.0 * PI * i as f64 / (flen - 1) as f64).cos())
        .collect();
    let dct: Vec<Vec<f64>> = (0..N_MFCC)
        .map(|c| {
            let scale = if c == 0 {
                (1.0 / N_MEL as f64).sqrt()
            } else {
                (2.0 / N_MEL as f64).sqrt()
            };
            (0..N_MEL)
                .map(|m| scale * (PI * c as f64 * (m as f64 + 0.5) / N_MEL as f64).cos())
                .collect()
        })
        .collect();

    let x = seg.samples();
    let n_frames = (x.len() - flen) / hop + 1;
    let mut acc = [0.0; N_MFCC];
    let mut buf = vec![Complex::new(0.0, 0.0); nfft];
    let mut power = vec![0.0; nfft / 2 + 1];
    let mut logmel = [0.0; N_MEL];
    for fr in 0..n_frames {
        let frame = &x[fr * hop..fr * hop + flen];
        for (i, b) in buf.iter_mut().enumerate() {
            *b = Complex::new(if i < flen { frame[i] * hamming[i] } else { 0.0 }, 0.0);
        }
        fft.process(&mut buf);
        for (p, c) in power.iter_mut().zip(&buf) {
            *p = c.norm_sqr() / nfft as f64;
        }
        for (lm, filt) in logmel.iter_mut().zip(&bank) {
            let e: f64 = filt.iter().zip(&power).map(|(w, p)| w * p).sum();
            // the floor only matters for digital silence
            *lm = e.max(f64::MIN_POSITIVE).ln();
        }
        for (a, row) in acc.iter_mut().zip(&dct) {
            *a += row.iter().zip(&logmel).map(|(d, l)| d * l).sum::<f64>();
        }
    }
    Ok(SegmentFeatures {
        mfcc: acc.map(|v| v / n_frames as f64),
    })
}
