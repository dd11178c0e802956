//! Spectral breathing templates and the per-frame similarity curve.

use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::signal::{cosine_similarity, Signal};

pub const N_BINS: usize = 15;
pub const FRAME_S: f64 = 0.040;
pub const HOP_S: f64 = 0.020;

/// Average breathing spectrum over `band`, split into 15 equal sub-bands.
#[derive(Debug, Clone, PartialEq)]
pub struct BreathingTemplate {
    pub features: [f64; N_BINS],
    pub band: (f64, f64),
}

impl BreathingTemplate {
    pub fn new(features: [f64; N_BINS], band: (f64, f64)) -> Result<Self> {
        if !(band.0 >= 0.0 && band.0 < band.1 && band.1.is_finite()) {
            return Err(Error::Template(format!("invalid band [{}, {}]", band.0, band.1)));
        }
        if features.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Template("features must be finite and nonnegative".into()));
        }
        let norm = features.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::Template("template has no energy".into()));
        }
        Ok(Self {
            features: features.map(|v| v / norm),
            band,
        })
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("band {} {}\n", self.band.0, self.band.1);
        let values: Vec<String> = self.features.iter().map(|v| format!("{v}")).collect();
        let _ = writeln!(s, "{}", values.join(" "));
        s
    }

    /// Parses the text form. Values are taken as stored, so a saved
    /// template loads back bit for bit.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines
            .next()
            .ok_or_else(|| Error::Template("empty template".into()))?;
        let parts: Vec<&str> = header.split_whitespace().collect();
        let band = match parts.as_slice() {
            ["band", lo, hi] => (parse_num(lo)?, parse_num(hi)?),
            _ => return Err(Error::Template(format!("bad header line '{header}'"))),
        };
        let values = lines
            .flat_map(str::split_whitespace)
            .map(parse_num)
            .collect::<Result<Vec<f64>>>()?;
        let features: [f64; N_BINS] = values.as_slice().try_into().map_err(|_| {
            Error::Template(format!("expected {N_BINS} values, found {}", values.len()))
        })?;
        if band.0 >= band.1 || features.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Template("invalid template values".into()));
        }
        Ok(Self { features, band })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }
}

fn parse_num(s: &str) -> Result<f64> {
    s.parse::<f64>()
        .map_err(|_| Error::Template(format!("'{s}' is not a number")))
}

/// Reusable FFT plan and bin mapping for one frame length, rate and band.
pub(crate) struct FrameFeatures {
    fft: Arc<dyn Fft<f64>>,
    n: usize,
    /// Sub-band index of each one-sided FFT bin, if inside the band.
    bin_of: Vec<Option<usize>>,
}

impl FrameFeatures {
    pub(crate) fn new(n: usize, fs: f64, band: (f64, f64)) -> Self {
        let width = (band.1 - band.0) / N_BINS as f64;
        let df = fs / n as f64;
        let bin_of = (0..=n / 2)
            .map(|k| {
                let f = k as f64 * df;
                if f < band.0 || f > band.1 {
                    None
                } else {
                    Some((((f - band.0) / width) as usize).min(N_BINS - 1))
                }
            })
            .collect();
        Self {
            fft: FftPlanner::new().plan_fft_forward(n),
            n,
            bin_of,
        }
    }

    /// One-sided periodogram power summed per sub-band.
    pub(crate) fn compute(&self, frame: &[f64], buf: &mut Vec<Complex<f64>>) -> [f64; N_BINS] {
        debug_assert_eq!(frame.len(), self.n);
        buf.clear();
        buf.extend(frame.iter().map(|&v| Complex::new(v, 0.0)));
        self.fft.process(buf);
        let norm = 1.0 / (self.n as f64 * self.n as f64);
        let mut out = [0.0; N_BINS];
        for (k, b) in self.bin_of.iter().enumerate() {
            if let Some(b) = b {
                let mirrored = k != 0 && !(self.n % 2 == 0 && k == self.n / 2);
                out[*b] += buf[k].norm_sqr() * norm * if mirrored { 2.0 } else { 1.0 };
            }
        }
        out
    }
}

pub fn fft_features(frame: &Signal, band: (f64, f64)) -> [f64; N_BINS] {
    if frame.is_empty() {
        return [0.0; N_BINS];
    }
    let ff = FrameFeatures::new(frame.len(), frame.sample_rate(), band);
    ff.compute(frame.samples(), &mut Vec::new())
}

pub(crate) fn frame_geometry(fs: f64) -> (usize, usize) {
    (
        ((FRAME_S * fs).round() as usize).max(1),
        ((HOP_S * fs).round() as usize).max(1),
    )
}

/// Feature vectors of consecutive 40 ms frames with a 20 ms hop.
pub(crate) fn frame_features(s: &Signal, band: (f64, f64)) -> Vec<[f64; N_BINS]> {
    let (flen, hop) = frame_geometry(s.sample_rate());
    if s.len() < flen {
        return Vec::new();
    }
    let ff = FrameFeatures::new(flen, s.sample_rate(), band);
    let mut buf = Vec::with_capacity(flen);
    let x = s.samples();
    (0..=(x.len() - flen) / hop)
        .map(|i| ff.compute(&x[i * hop..i * hop + flen], &mut buf))
        .collect()
}

pub fn build_breathing_template(reference: &Signal, band: (f64, f64)) -> Result<BreathingTemplate> {
    let frames = frame_features(reference, band);
    if frames.is_empty() {
        return Err(Error::Template("reference shorter than one frame".into()));
    }
    let mut acc = [0.0; N_BINS];
    for f in &frames {
        for (a, v) in acc.iter_mut().zip(f) {
            *a += v;
        }
    }
    let acc = acc.map(|v| v / frames.len() as f64);
    BreathingTemplate::new(acc, band)
}

/// Per-frame breathing probability.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityCurve {
    pub values: Vec<f64>,
    pub frame_hop: f64,
    pub frame_len: f64,
}

impl ProbabilityCurve {
    pub fn as_signal(&self) -> Signal {
        Signal::from_parts(self.values.clone(), 1.0 / self.frame_hop)
    }
}

/// `(S - T) / (1 - T)` above the threshold, zero otherwise.
pub fn probability(similarity: f64, threshold: f64) -> f64 {
    if similarity > threshold {
        ((similarity - threshold) / (1.0 - threshold)).clamp(0.0, 1.0)
    } else {
        0.0
    }
}

pub fn probability_curve(s: &Signal, tmpl: &BreathingTemplate, threshold: f64) -> Result<ProbabilityCurve> {
    if !(0.0..1.0).contains(&threshold) {
        return Err(Error::param(format!("threshold {threshold} outside [0, 1)")));
    }
    let (flen, hop) = frame_geometry(s.sample_rate());
    let values = frame_features(s, tmpl.band)
        .iter()
        .map(|f| match cosine_similarity(f, &tmpl.features) {
            Ok(sim) => probability(sim, threshold),
            // a silent frame resembles nothing
            Err(_) => 0.0,
        })
        .collect();
    Ok(ProbabilityCurve {
        values,
        frame_hop: hop as f64 / s.sample_rate(),
        frame_len: flen as f64 / s.sample_rate(),
    })
}
