//! Adaptive breathing-band search over the heart-rate-variability series.
//!
//! Candidates are sampled around a coarse centre estimate. Each candidate
//! sets a band `[0.65, 1.35] x candidate`; the breathing rate re-estimated
//! through that band is compared with the candidate itself, in the frequency
//! domain (largest spectral peak) and in the time domain (zero crossings).
//! The best candidate is the one whose own band reproduces it most closely.

use super::IbiSeries;
use crate::error::Result;
use crate::signal::{
    bandpass, dominant_frequency, minmax_normalize, moving_average, zero_crossing_rr, Signal,
};
use crate::types::{RR_MAX_BPM, RR_MIN_BPM};

pub const CANDIDATE_STEP: f64 = 0.5;
pub const CENTRE_BAND: (f64, f64) = (0.15, 0.35);
const BAND_LOW_RATIO: f64 = 0.65;
const BAND_HIGH_RATIO: f64 = 1.35;
const T_SMOOTHING: usize = 5;
const MINIMA_KEPT: usize = 3;
const SILENT_BAND: f64 = 1e-12;
const SCORE_TIE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct RrCandidateList {
    /// Ascending, 0.5 BPM apart, within [7.5, 42.5].
    pub candidates: Vec<f64>,
    pub center: f64,
    pub width: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DifferenceLists {
    pub f_diff: Vec<f64>,
    pub t_diff: Vec<f64>,
}

/// Band (Hz) used to extract the breathing signal for a candidate rate.
pub fn candidate_band(candidate_bpm: f64) -> (f64, f64) {
    (
        BAND_LOW_RATIO * candidate_bpm / 60.0,
        BAND_HIGH_RATIO * candidate_bpm / 60.0,
    )
}

fn spectral_rr(s: &Signal) -> Result<f64> {
    Ok(dominant_frequency(s, (0.0, s.sample_rate() / 2.0))? * 60.0)
}

/// Candidates `centre ± k * 0.5` BPM inside `[max(7.5, c - w/2), min(42.5, c + w/2)]`.
pub fn candidates_around(center: f64, width: f64) -> RrCandidateList {
    let lo = RR_MIN_BPM.max(center - width / 2.0);
    let hi = RR_MAX_BPM.min(center + width / 2.0);
    let eps = 1e-9;
    let k_lo = ((lo - center) / CANDIDATE_STEP - eps).ceil() as i64;
    let k_hi = ((hi - center) / CANDIDATE_STEP + eps).floor() as i64;
    let candidates = (k_lo..=k_hi)
        .map(|k| center + k as f64 * CANDIDATE_STEP)
        .filter(|c| *c >= RR_MIN_BPM - eps && *c <= RR_MAX_BPM + eps)
        .map(|c| c.clamp(RR_MIN_BPM, RR_MAX_BPM))
        .collect();
    RrCandidateList {
        candidates,
        center,
        width,
    }
}

pub fn sample_rr_candidates(hrv: &IbiSeries, width: f64) -> Result<RrCandidateList> {
    let filtered = bandpass(&hrv.centered(), CENTRE_BAND.0, CENTRE_BAND.1)?;
    let center = spectral_rr(&filtered)?;
    Ok(candidates_around(center, width))
}

/// Per-candidate breathing signal and its frequency- and time-domain rates.
///
/// A band with no variability at all has no rate; the candidate is then
/// taken as its own estimate so the list stays flat.
fn candidate_estimates(hrv: &IbiSeries, cands: &RrCandidateList) -> Result<Vec<(f64, f64)>> {
    let centered = hrv.centered();
    let level = crate::signal::mean(hrv.resampled.samples()).powi(2);
    cands
        .candidates
        .iter()
        .map(|&c| {
            let (lo, hi) = candidate_band(c);
            let breath = bandpass(&centered, lo, hi)?;
            if breath.power() <= SILENT_BAND * level {
                return Ok((c, c));
            }
            Ok((spectral_rr(&breath)?, zero_crossing_rr(&breath)))
        })
        .collect()
}

fn normalised_diffs(cands: &RrCandidateList, estimates: impl Iterator<Item = f64>) -> Vec<f64> {
    let diffs: Vec<f64> = cands
        .candidates
        .iter()
        .zip(estimates)
        .map(|(c, e)| (e - c).abs())
        .collect();
    minmax_normalize(&diffs)
}

pub fn f_difference_list(hrv: &IbiSeries, cands: &RrCandidateList) -> Result<Vec<f64>> {
    let est = candidate_estimates(hrv, cands)?;
    Ok(normalised_diffs(cands, est.iter().map(|e| e.0)))
}

pub fn t_difference_list(hrv: &IbiSeries, cands: &RrCandidateList) -> Result<Vec<f64>> {
    let est = candidate_estimates(hrv, cands)?;
    Ok(normalised_diffs(cands, est.iter().map(|e| e.1)))
}

/// Both lists from one pass of per-candidate filtering.
pub fn difference_lists(hrv: &IbiSeries, cands: &RrCandidateList) -> Result<DifferenceLists> {
    let est = candidate_estimates(hrv, cands)?;
    Ok(DifferenceLists {
        f_diff: normalised_diffs(cands, est.iter().map(|e| e.0)),
        t_diff: normalised_diffs(cands, est.iter().map(|e| e.1)),
    })
}

/// Indices strictly below both neighbours; an endpoint needs only be below
/// its one neighbour.
fn local_minima(v: &[f64]) -> Vec<usize> {
    let n = v.len();
    if n == 1 {
        return vec![0];
    }
    (0..n)
        .filter(|&i| {
            let left_ok = i == 0 || v[i] < v[i - 1];
            let right_ok = i + 1 == n || v[i] < v[i + 1];
            left_ok && right_ok
        })
        .collect()
}

/// Picks the final rate from the three deepest frequency-domain minima,
/// scored by their f-difference plus the smoothed t-difference.
pub fn calibrate_and_select(lists: &DifferenceLists, cands: &RrCandidateList) -> f64 {
    let f = &lists.f_diff;
    let c = &cands.candidates;
    debug_assert_eq!(f.len(), c.len());
    debug_assert_eq!(lists.t_diff.len(), c.len());
    if c.is_empty() {
        return f64::NAN;
    }
    let mut minima = local_minima(f);
    if minima.is_empty() {
        // a flat list has no strict minimum; fall back to the first argmin
        let best = (0..f.len())
            .min_by(|&a, &b| f[a].total_cmp(&f[b]).then(a.cmp(&b)))
            .expect("non-empty");
        return c[best];
    }
    minima.sort_by(|&a, &b| f[a].total_cmp(&f[b]).then(a.cmp(&b)));
    minima.truncate(MINIMA_KEPT);
    if minima.len() == 1 {
        return c[minima[0]];
    }
    let smoothed = moving_average(&lists.t_diff, T_SMOOTHING);
    let score = |i: usize| f[i] + smoothed[i];
    let best_score = minima.iter().map(|&i| score(i)).fold(f64::INFINITY, f64::min);
    minima
        .iter()
        .filter(|&&i| score(i) <= best_score + SCORE_TIE)
        .map(|&i| c[i])
        .fold(f64::INFINITY, f64::min)
}

/// The full search: candidates, both difference lists, calibrated choice.
pub fn adaptive_rr(hrv: &IbiSeries, width: f64) -> Result<(f64, RrCandidateList, DifferenceLists)> {
    let cands = sample_rr_candidates(hrv, width)?;
    let lists = difference_lists(hrv, &cands)?;
    let rr = calibrate_and_select(&lists, &cands);
    Ok((rr, cands, lists))
}

/// Reference estimator with a fixed breathing band: zero-crossing rate of the
/// band-passed series.
pub fn fixed_band_rr(hrv: &IbiSeries, band: (f64, f64)) -> Result<f64> {
    let breath = bandpass(&hrv.centered(), band.0, band.1)?;
    Ok(zero_crossing_rr(&breath))
}
