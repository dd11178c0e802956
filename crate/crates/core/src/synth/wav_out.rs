use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::GroundTruth;
use crate::error::{Error, Result};
use crate::signal::Signal;

/// Writes two channels as 32-bit float stereo WAV.
pub fn write_wav_stereo(path: &Path, left: &Signal, right: &Signal) -> Result<()> {
    if left.len() != right.len() || left.sample_rate() != right.sample_rate() {
        return Err(Error::param("channels differ in length or sample rate"));
    }
    let spec = hound::WavSpec {
        channels: 2,
        sample_rate: left.sample_rate().round() as u32,
        bits_per_sample: 32,
        sample_format: hound::SampleFormat::Float,
    };
    let to_err = |e: hound::Error| Error::io(path, std::io::Error::other(e.to_string()));
    let mut w = hound::WavWriter::create(path, spec).map_err(to_err)?;
    for (l, r) in left.samples().iter().zip(right.samples()) {
        w.write_sample(*l as f32).map_err(to_err)?;
        w.write_sample(*r as f32).map_err(to_err)?;
    }
    w.finalize().map_err(to_err)
}

/// Sidecar listing one labelled event per line (`beat`, `step`, `breath`).
pub fn write_ground_truth(path: &Path, truth: &GroundTruth) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let mut write = || -> std::io::Result<()> {
        writeln!(out, "# rr_bpm {}", truth.rr)?;
        if let Some(s) = truth.stride {
            writeln!(out, "# stride_hz {s}")?;
        }
        for t in &truth.beat_times {
            writeln!(out, "beat {t}")?;
        }
        for t in &truth.step_times {
            writeln!(out, "step {t}")?;
        }
        for t in &truth.breath_times {
            writeln!(out, "breath {t}")?;
        }
        out.flush()
    };
    write().map_err(|e| Error::io(path, e))
}
