//! Peak picking against an adaptive (moving-average) threshold.

use super::{hilbert_envelope, moving_average, PeakSet, Signal};
use crate::error::{Error, Result};
use crate::types::RR_MAX_BPM;

/// What the threshold is compared against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EnvelopeMode {
    /// Smoothed Hilbert envelope; `smooth_s` is the smoothing window in seconds.
    Hilbert { smooth_s: f64 },
    /// The signal itself, for slow oscillations whose Hilbert envelope is flat.
    Raw,
}

/// Which sample of a region of interest marks the peak.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PeakLocation {
    Maximum,
    /// Centre of mass of the excess over the threshold; stable on flat tops.
    Centroid,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakParams {
    pub envelope: EnvelopeMode,
    pub location: PeakLocation,
    /// Length of the centered moving average used as the threshold, seconds.
    pub ma_window_s: f64,
    pub min_separation_s: f64,
}

impl PeakParams {
    pub fn heartbeat() -> Self {
        Self {
            envelope: EnvelopeMode::Hilbert { smooth_s: 0.05 },
            location: PeakLocation::Maximum,
            ma_window_s: 2.0,
            min_separation_s: 0.25,
        }
    }

    pub fn footstep() -> Self {
        Self {
            envelope: EnvelopeMode::Hilbert { smooth_s: 0.05 },
            location: PeakLocation::Maximum,
            ma_window_s: 1.5,
            min_separation_s: 0.2,
        }
    }

    /// Settings for breathing-probability curves and their components.
    pub fn curve() -> Self {
        Self {
            envelope: EnvelopeMode::Raw,
            location: PeakLocation::Centroid,
            ma_window_s: 8.0,
            min_separation_s: 60.0 / RR_MAX_BPM,
        }
    }
}

/// Finds one peak per region where the envelope rises above its own moving
/// average.
///
/// A region of interest runs between an upward and the following downward
/// crossing of the threshold. The region's maximum is kept when it exceeds the
/// threshold at both crossings. Regions cut off by the signal boundaries are
/// ignored. Peaks closer than `min_separation_s` are thinned, keeping the
/// larger one (earlier on ties).
pub fn adaptive_peak_detect(s: &Signal, params: &PeakParams) -> Result<PeakSet> {
    if !(params.ma_window_s > 0.0) || !(params.min_separation_s >= 0.0) {
        return Err(Error::param("peak detector windows must be positive"));
    }
    if s.duration() < params.ma_window_s {
        return Err(Error::param(format!(
            "signal of {:.3} s shorter than threshold window {:.3} s",
            s.duration(),
            params.ma_window_s
        )));
    }
    let fs = s.sample_rate();
    let env = match params.envelope {
        EnvelopeMode::Hilbert { smooth_s } => hilbert_envelope(s, smooth_s)?.into_samples(),
        EnvelopeMode::Raw => s.samples().to_vec(),
    };
    let thr = moving_average(&env, ((params.ma_window_s * fs).round() as usize).max(1));

    let scale = env.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let eps = 1e-9 * scale;
    let above: Vec<bool> = env.iter().zip(&thr).map(|(e, t)| e - t > eps).collect();

    let mut candidates: Vec<(usize, f64)> = Vec::new();
    let mut i = 1;
    let n = env.len();
    while i < n {
        if above[i] && !above[i - 1] {
            let start = i;
            let mut end = i;
            while end < n && above[end] {
                end += 1;
            }
            if end == n {
                break;
            }
            let (peak, amp) = (start..end)
                .map(|k| (k, env[k]))
                .fold((start, f64::NEG_INFINITY), |best, c| if c.1 > best.1 { c } else { best });
            if amp > thr[start] && amp > thr[end] {
                let at = match params.location {
                    PeakLocation::Maximum => peak,
                    PeakLocation::Centroid => {
                        let (mut w, mut wk) = (0.0, 0.0);
                        for k in start..end {
                            let excess = env[k] - thr[k];
                            w += excess;
                            wk += excess * k as f64;
                        }
                        (wk / w).round() as usize
                    }
                };
                candidates.push((at, amp));
            }
            i = end;
        }
        i += 1;
    }

    let min_sep = (params.min_separation_s * fs).round() as usize;
    let kept = if min_sep > 0 {
        thin_by_separation(candidates, min_sep)
    } else {
        candidates.into_iter().map(|(k, _)| k).collect()
    };
    Ok(PeakSet::from_indices(kept, fs))
}

fn thin_by_separation(mut candidates: Vec<(usize, f64)>, min_sep: usize) -> Vec<usize> {
    candidates.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let mut kept: Vec<usize> = Vec::with_capacity(candidates.len());
    for (idx, _) in candidates {
        let pos = kept.partition_point(|&k| k < idx);
        let clash_left = pos > 0 && idx - kept[pos - 1] < min_sep;
        let clash_right = pos < kept.len() && kept[pos] - idx < min_sep;
        if !clash_left && !clash_right {
            kept.insert(pos, idx);
        }
    }
    kept
}
