//! Detection and adaptive filtering of motion artifacts in sedentary audio.

use crate::error::{Error, Result};
use crate::signal::{std_dev, Signal};

pub const SEGMENT_S: f64 = 3.0;

#[derive(Debug, Clone, PartialEq)]
pub struct InterferenceMap {
    pub segment_length: f64,
    /// Sample length of one segment; the last segment may be shorter.
    pub segment_samples: usize,
    pub flagged: Vec<bool>,
    pub std_per_segment: Vec<f64>,
    pub threshold: f64,
}

impl InterferenceMap {
    pub fn any_flagged(&self) -> bool {
        self.flagged.iter().any(|&f| f)
    }

    /// Flagged segments as `(start, end)` times in seconds.
    pub fn flagged_spans(&self) -> Vec<(f64, f64)> {
        (0..self.flagged.len())
            .filter(|&i| self.flagged[i])
            .map(|i| (i as f64 * self.segment_length, (i + 1) as f64 * self.segment_length))
            .collect()
    }

    fn bounds(&self, seg: usize, len: usize) -> (usize, usize) {
        let a = seg * self.segment_samples;
        (a, (a + self.segment_samples).min(len))
    }
}

/// Flags 3 s segments whose STD exceeds `threshold_factor` times the median
/// segment STD of the window.
pub fn detect_interference(w: &Signal, threshold_factor: f64) -> Result<InterferenceMap> {
    let seg = (SEGMENT_S * w.sample_rate()).round() as usize;
    if seg == 0 || w.len() < 2 * seg {
        return Err(Error::param(format!(
            "interference detection needs at least two {SEGMENT_S} s segments"
        )));
    }
    let stds: Vec<f64> = w.samples().chunks(seg).map(std_dev).collect();
    let mut sorted = stds.clone();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    let median = if sorted.len() % 2 == 0 {
        0.5 * (sorted[mid - 1] + sorted[mid])
    } else {
        sorted[mid]
    };
    let threshold = threshold_factor * median;
    Ok(InterferenceMap {
        segment_length: SEGMENT_S,
        segment_samples: seg,
        flagged: stds.iter().map(|&s| s > threshold).collect(),
        std_per_segment: stds,
        threshold,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RlsParams {
    pub order: usize,
    pub forgetting: f64,
    /// Initial inverse-correlation matrix is `delta * I`.
    pub delta: f64,
}

impl Default for RlsParams {
    fn default() -> Self {
        Self {
            order: 8,
            forgetting: 0.995,
            delta: 100.0,
        }
    }
}

/// Recursive-least-squares adaptive filter driven by the interfered
/// `segment` and trained towards the clean `reference`.
///
/// Each output sample is the filter's a-priori response to the segment, so
/// spectral regions the reference does not share (the artifact) are pulled
/// down while content common to both passes. A silent reference carries no
/// information and leaves the segment unchanged.
pub fn rls_filter(segment: &Signal, reference: &Signal, params: &RlsParams) -> Result<Signal> {
    if segment.len() != reference.len() {
        return Err(Error::param(format!(
            "segment ({}) and reference ({}) lengths differ",
            segment.len(),
            reference.len()
        )));
    }
    if params.order == 0 || !(params.forgetting > 0.0 && params.forgetting <= 1.0) {
        return Err(Error::param("RLS order must be positive and forgetting in (0, 1]"));
    }
    if reference.samples().iter().all(|&v| v == 0.0) {
        return Ok(segment.clone());
    }
    let p = params.order;
    let lambda = params.forgetting;
    // work at unit reference power so the regularisation from `delta` means
    // the same thing at any signal level
    let scale = reference.power().sqrt();
    let x: Vec<f64> = segment.samples().iter().map(|v| v / scale).collect();
    let d: Vec<f64> = reference.samples().iter().map(|v| v / scale).collect();

    let mut w = vec![0.0; p];
    let mut pm = vec![0.0; p * p];
    for i in 0..p {
        pm[i * p + i] = params.delta;
    }
    let mut u = vec![0.0; p];
    let mut pu = vec![0.0; p];
    let mut out = Vec::with_capacity(x.len());

    for n in 0..x.len() {
        u.rotate_right(1);
        u[0] = x[n];
        for i in 0..p {
            pu[i] = (0..p).map(|j| pm[i * p + j] * u[j]).sum();
        }
        let denom = lambda + u.iter().zip(&pu).map(|(a, b)| a * b).sum::<f64>();
        let y: f64 = w.iter().zip(&u).map(|(a, b)| a * b).sum();
        out.push(y * scale);
        let e = d[n] - y;
        for i in 0..p {
            w[i] += pu[i] / denom * e;
        }
        // P <- (P - k uᵀP) / λ with k = Pu / denom; P stays symmetric
        for i in 0..p {
            for j in 0..p {
                pm[i * p + j] = (pm[i * p + j] - pu[i] * pu[j] / denom) / lambda;
            }
        }
    }
    Ok(segment.with_samples(out))
}

/// Replaces every flagged segment with its RLS-filtered version, using the
/// nearest unflagged segment (earlier one on ties) as the reference.
pub fn filter_interference(w: &Signal, map: &InterferenceMap, params: &RlsParams) -> Result<Signal> {
    if !map.any_flagged() {
        return Ok(w.clone());
    }
    let clean: Vec<usize> = (0..map.flagged.len()).filter(|&i| !map.flagged[i]).collect();
    if clean.is_empty() {
        return Ok(w.clone());
    }
    let mut out = w.samples().to_vec();
    for seg in (0..map.flagged.len()).filter(|&i| map.flagged[i]) {
        let nearest = *clean
            .iter()
            .min_by_key(|&&c| (c as isize - seg as isize).unsigned_abs())
            .expect("non-empty");
        let (a, b) = map.bounds(seg, w.len());
        let (ra, rb) = map.bounds(nearest, w.len());
        let len = (b - a).min(rb - ra);
        let filtered = rls_filter(&w.slice(a, a + len), &w.slice(ra, ra + len), params)?;
        out[a..a + len].copy_from_slice(filtered.samples());
    }
    Ok(w.with_samples(out))
}
