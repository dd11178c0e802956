//! Respiratory rate from respiratory sinus arrhythmia in heartbeat audio.
//!
//! Heartbeats are picked from the low-passed in-ear signal, their intervals
//! form the heart-rate-variability series, and the breathing rate is searched
//! for in that series (see [`search`]).

mod interference;
mod search;

pub use interference::{
    detect_interference, filter_interference, rls_filter, InterferenceMap, RlsParams, SEGMENT_S,
};
pub use search::{
    adaptive_rr, calibrate_and_select, candidate_band, candidates_around, difference_lists,
    f_difference_list, fixed_band_rr, sample_rr_candidates, t_difference_list, DifferenceLists,
    RrCandidateList, CENTRE_BAND,
};

use crate::error::{Error, Result};
use crate::signal::{
    adaptive_peak_detect, decimate, detrend, lowpass, std_dev, Detrend, PeakParams, PeakSet, Signal,
};
use crate::types::{ActivityClass, Channel, PipelineKind, RrEstimate};

pub const HEARTBEAT_CUTOFF_HZ: f64 = 30.0;
pub const MIN_BEATS: usize = 8;
pub const MIN_INTERVAL_S: f64 = 0.25;
pub const MAX_INTERVAL_S: f64 = 2.0;
pub const MAX_REMOVED_FRACTION: f64 = 0.3;
/// Largest relative distance of an interval from its local median.
pub const OUTLIER_FRACTION: f64 = 0.3;
/// Tolerance for bridged gaps and for intervals near interference.
pub const BRIDGE_FRACTION: f64 = 0.15;
/// Longest stretch of unusable beats that is bridged.
pub const MAX_BRIDGE_S: f64 = 8.0;
const LOCAL_INTERVALS: usize = 5;
const HEARTBEAT_BAND_RATE: f64 = 1000.0;

/// Inter-beat intervals and their uniformly resampled form.
#[derive(Debug, Clone, PartialEq)]
pub struct IbiSeries {
    pub beat_times: Vec<f64>,
    /// `intervals[i] = beat_times[i + 1] - beat_times[i]`.
    pub intervals: Vec<f64>,
    pub resampled: Signal,
    /// Fraction of raw intervals dropped by the plausibility check.
    pub removed_fraction: f64,
}

impl IbiSeries {
    /// Times the intervals are attributed to: the later beat of each pair.
    pub fn interval_times(&self) -> &[f64] {
        &self.beat_times[1..]
    }

    pub fn interval_std(&self) -> f64 {
        std_dev(&self.intervals)
    }

    /// The resampled series with its mean removed.
    pub fn centered(&self) -> Signal {
        let m = crate::signal::mean(self.resampled.samples());
        self.resampled
            .with_samples(self.resampled.samples().iter().map(|v| v - m).collect())
    }

    /// Copy whose resampled series has its least-squares line removed.
    pub fn linearly_detrended(&self) -> IbiSeries {
        IbiSeries {
            resampled: self
                .resampled
                .with_samples(detrend(self.resampled.samples(), Detrend::Linear)),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RsaConfig {
    /// Width of the candidate list, BPM.
    pub width_bpm: f64,
    /// Whether interference is detected, filtered and kept out of the beat
    /// interval medians.
    pub filter_interference: bool,
    pub threshold_factor: f64,
    pub rls: RlsParams,
    pub resample_rate: f64,
    pub detrend: Detrend,
}

impl Default for RsaConfig {
    fn default() -> Self {
        Self {
            width_bpm: 20.0,
            filter_interference: true,
            threshold_factor: 3.0,
            rls: RlsParams::default(),
            resample_rate: 4.0,
            detrend: Detrend::Mean,
        }
    }
}

/// 30 Hz low-pass, decimated to roughly 1 kHz when the input rate allows.
pub fn heartbeat_band(w: &Signal) -> Result<Signal> {
    let lp = lowpass(w, HEARTBEAT_CUTOFF_HZ)?;
    let factor = (w.sample_rate() / HEARTBEAT_BAND_RATE).floor() as usize;
    Ok(if factor >= 2 { decimate(&lp, factor) } else { lp })
}

fn check_window(w: &Signal) -> Result<()> {
    if w.sample_rate() < 100.0 {
        return Err(Error::param(format!(
            "sample rate {} Hz below 100 Hz",
            w.sample_rate()
        )));
    }
    if w.duration() < 10.0 {
        return Err(Error::param(format!(
            "window of {:.2} s shorter than 10 s",
            w.duration()
        )));
    }
    Ok(())
}

/// Peaks in an already band-limited signal, reported at `original_rate`.
fn beats_in_band(band: &Signal, original_rate: f64) -> Result<PeakSet> {
    let peaks = adaptive_peak_detect(band, &PeakParams::heartbeat())?;
    if peaks.len() < MIN_BEATS {
        return Err(Error::low_quality(format!(
            "{} heartbeat peaks found, need {MIN_BEATS}",
            peaks.len()
        )));
    }
    let ratio = original_rate / band.sample_rate();
    let indices = peaks
        .indices
        .iter()
        .map(|&i| (i as f64 * ratio).round() as usize)
        .collect();
    Ok(PeakSet::from_indices(indices, original_rate))
}

/// Candidate heartbeat locations in a window.
pub fn detect_heartbeats(w: &Signal) -> Result<PeakSet> {
    check_window(w)?;
    beats_in_band(&heartbeat_band(w)?, w.sample_rate())
}

/// Intervals between successive beats, cleaned and resampled to `rate` Hz.
///
/// A beat closer than 0.25 s to the previously kept beat is dropped. The
/// kept sequence is the chain of beats with the most intervals within 30% of
/// the local median interval. The chain may skip beats, and may cross a gap
/// of up to 8 s by inserting evenly spaced beats when the gap holds a whole
/// number of intervals within 15% of the local median. Among chains with as
/// many such intervals, the one closest to the local medians wins.
pub fn compute_hrv_at(peaks: &PeakSet, rate: f64) -> Result<IbiSeries> {
    compute_hrv_excluding(peaks, rate, &[])
}

/// As [`compute_hrv_at`], for beats found while `(start, end)` spans of
/// `suspect` carried interference. Intervals touching a suspect span are
/// left out of the local medians and must match them within 15%.
pub fn compute_hrv_excluding(peaks: &PeakSet, rate: f64, suspect: &[(f64, f64)]) -> Result<IbiSeries> {
    let times = &peaks.times;
    if times.len() < MIN_BEATS {
        return Err(Error::low_quality(format!(
            "{} beats, need {MIN_BEATS}",
            times.len()
        )));
    }
    if !(rate > 0.0) {
        return Err(Error::param("resample rate must be positive"));
    }
    let raw_intervals = times.len() - 1;

    let mut beats = vec![times[0]];
    for &t in &times[1..] {
        if t - beats[beats.len() - 1] >= MIN_INTERVAL_S {
            beats.push(t);
        }
    }
    let n = beats.len();
    let trusted: Vec<bool> = beats
        .iter()
        .map(|&t| !suspect.iter().any(|&(a, b)| t >= a && t <= b))
        .collect();
    let d: Vec<f64> = beats.windows(2).map(|p| p[1] - p[0]).collect();
    let clean: Vec<usize> = (0..d.len())
        .filter(|&k| trusted[k] && trusted[k + 1] && d[k] <= MAX_INTERVAL_S)
        .collect();
    let pool: Vec<usize> = if clean.is_empty() { (0..d.len()).collect() } else { clean };
    let reference: Vec<f64> = (0..n)
        .map(|i| {
            let at = pool.partition_point(|&k| k < i);
            let hi = (at + LOCAL_INTERVALS + 1).min(pool.len());
            let lo = hi.saturating_sub(2 * LOCAL_INTERVALS + 1);
            let hi = (lo + 2 * LOCAL_INTERVALS + 1).min(pool.len());
            median(&pool[lo..hi].iter().map(|&k| d[k]).collect::<Vec<_>>())
        })
        .collect();

    // best[j]: (genuine intervals, summed relative deviation) of the best chain ending at j
    let better = |a: (usize, f64), b: (usize, f64)| a.0 > b.0 || (a.0 == b.0 && a.1 < b.1);
    let mut best: Vec<(usize, f64)> = vec![(0, 0.0); n];
    let mut from: Vec<Option<(usize, usize)>> = vec![None; n];
    for j in 1..n {
        for i in (0..j).rev() {
            let gap = beats[j] - beats[i];
            if gap > MAX_BRIDGE_S {
                break;
            }
            let r = reference[i];
            let k = (gap / r).round().max(1.0) as usize;
            let step = gap / k as f64;
            let tol = if k == 1 && trusted[i] && trusted[j] {
                OUTLIER_FRACTION
            } else {
                BRIDGE_FRACTION
            };
            if (step - r).abs() > tol * r || !(MIN_INTERVAL_S..=MAX_INTERVAL_S).contains(&step) {
                continue;
            }
            let cost = best[i].1 + k as f64 * (step - r).abs() / r;
            let score = (best[i].0 + usize::from(k == 1), cost);
            if better(score, best[j]) {
                best[j] = score;
                from[j] = Some((i, k));
            }
        }
    }
    let mut end = 0;
    for j in 1..n {
        if better(best[j], best[end]) {
            end = j;
        }
    }
    let mut chain = vec![beats[end]];
    let mut at = end;
    while let Some((i, k)) = from[at] {
        let step = (beats[at] - beats[i]) / k as f64;
        chain.extend((1..k).rev().map(|m| beats[i] + m as f64 * step));
        chain.push(beats[i]);
        at = i;
    }
    chain.reverse();
    let beats = chain;

    let removed_fraction = 1.0 - best[end].0 as f64 / raw_intervals as f64;
    if removed_fraction > MAX_REMOVED_FRACTION || beats.len() < MIN_BEATS {
        return Err(Error::low_quality(format!(
            "{:.0}% of heartbeat intervals implausible",
            100.0 * removed_fraction
        )));
    }
    let intervals: Vec<f64> = beats.windows(2).map(|p| p[1] - p[0]).collect();
    let resampled = Signal::new(resample_linear(&beats[1..], &intervals, rate), rate)?;
    Ok(IbiSeries {
        beat_times: beats,
        intervals,
        resampled,
        removed_fraction,
    })
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let mid = s.len() / 2;
    if s.len() % 2 == 0 {
        0.5 * (s[mid - 1] + s[mid])
    } else {
        s[mid]
    }
}

pub fn compute_hrv(peaks: &PeakSet) -> Result<IbiSeries> {
    compute_hrv_at(peaks, RsaConfig::default().resample_rate)
}

/// Samples the piecewise-linear function through `(t, y)` every `1 / rate`
/// seconds from `t[0]` to `t[last]`.
fn resample_linear(t: &[f64], y: &[f64], rate: f64) -> Vec<f64> {
    let n = ((t[t.len() - 1] - t[0]) * rate).floor() as usize + 1;
    let mut out = Vec::with_capacity(n);
    let mut k = 0;
    for i in 0..n {
        let x = t[0] + i as f64 / rate;
        while k + 2 < t.len() && t[k + 1] < x {
            k += 1;
        }
        let (x0, x1) = (t[k], t[(k + 1).min(t.len() - 1)]);
        let v = if x1 > x0 {
            let a = ((x - x0) / (x1 - x0)).clamp(0.0, 1.0);
            y[k] + a * (y[(k + 1).min(y.len() - 1)] - y[k])
        } else {
            y[k]
        };
        out.push(v);
    }
    out
}

/// The series with the steadier raw intervals; left wins ties.
pub fn select_channel<'a>(
    left: Option<&'a IbiSeries>,
    right: Option<&'a IbiSeries>,
) -> Option<(Channel, &'a IbiSeries)> {
    match (left, right) {
        (Some(l), Some(r)) => {
            if r.interval_std() < l.interval_std() {
                Some((Channel::Right, r))
            } else {
                Some((Channel::Left, l))
            }
        }
        (Some(l), None) => Some((Channel::Left, l)),
        (None, Some(r)) => Some((Channel::Right, r)),
        (None, None) => None,
    }
}

/// Everything one channel went through on its way to an HRV series.
#[derive(Debug, Clone)]
pub struct RsaChannelTrace {
    pub heartbeat_band: Signal,
    pub interference: Option<InterferenceMap>,
    pub peaks: PeakSet,
    pub hrv: IbiSeries,
    /// This channel's own breathing-rate estimate.
    pub rr: f64,
}

#[derive(Debug, Clone)]
pub struct RsaSearchTrace {
    pub channel: Channel,
    pub candidates: RrCandidateList,
    pub lists: DifferenceLists,
    pub rr: f64,
}

#[derive(Debug, Clone)]
pub struct RsaTrace {
    pub left: Option<Result<RsaChannelTrace, String>>,
    pub right: Option<Result<RsaChannelTrace, String>>,
    pub search: Option<RsaSearchTrace>,
}

fn channel_trace(w: &Signal, cfg: &RsaConfig) -> Result<(RsaChannelTrace, RsaSearchTrace)> {
    check_window(w)?;
    let band = heartbeat_band(w)?;
    let map = cfg
        .filter_interference
        .then(|| detect_interference(&band, cfg.threshold_factor).ok())
        .flatten();
    let (band, interference) = match map {
        Some(map) => (filter_interference(&band, &map, &cfg.rls)?, Some(map)),
        None => (band, None),
    };
    let peaks = beats_in_band(&band, w.sample_rate())?;
    let suspect = interference.as_ref().map(InterferenceMap::flagged_spans).unwrap_or_default();
    let mut hrv = compute_hrv_excluding(&peaks, cfg.resample_rate, &suspect)?;
    if cfg.detrend == Detrend::Linear {
        hrv = hrv.linearly_detrended();
    }
    let (rr, candidates, lists) = adaptive_rr(&hrv, cfg.width_bpm)?;
    let search = RsaSearchTrace {
        channel: Channel::Mono,
        candidates,
        lists,
        rr,
    };
    Ok((
        RsaChannelTrace {
            heartbeat_band: band,
            interference,
            peaks,
            hrv,
            rr,
        },
        search,
    ))
}

/// Runs the pipeline on up to two channels, keeping intermediate results.
pub fn rsa_trace(left: Option<&Signal>, right: Option<&Signal>, cfg: &RsaConfig) -> Result<RsaTrace> {
    if let (Some(l), Some(r)) = (left, right) {
        if l.len() != r.len() || l.sample_rate() != r.sample_rate() {
            return Err(Error::param("left and right windows differ in length or rate"));
        }
    }
    let run = |w: Option<&Signal>| w.map(|s| channel_trace(s, cfg));
    let (l, r) = (run(left), run(right));
    let ok = |x: &Option<Result<(RsaChannelTrace, RsaSearchTrace)>>| match x {
        Some(Ok((c, _))) => Some(c.hrv.clone()),
        _ => None,
    };
    let (lh, rh) = (ok(&l), ok(&r));
    let search = select_channel(lh.as_ref(), rh.as_ref()).map(|(ch, _)| {
        let src = if ch == Channel::Left { &l } else { &r };
        let Some(Ok((_, s))) = src else { unreachable!() };
        RsaSearchTrace {
            channel: ch,
            ..s.clone()
        }
    });
    let split = |x: Option<Result<(RsaChannelTrace, RsaSearchTrace)>>| {
        x.map(|res| res.map(|(c, _)| c).map_err(|e| e.to_string()))
    };
    Ok(RsaTrace {
        left: split(l),
        right: split(r),
        search,
    })
}

/// Breathing rate of a sedentary window. Invalid when neither channel yields
/// a usable heartbeat series.
pub fn estimate_rr_rsa(left: Option<&Signal>, right: Option<&Signal>, cfg: &RsaConfig) -> RrEstimate {
    let invalid = RrEstimate::invalid(PipelineKind::Rsa, ActivityClass::Sedentary);
    let Ok(trace) = rsa_trace(left, right, cfg) else {
        return invalid;
    };
    let detail = |c: &Option<Result<RsaChannelTrace, String>>| match c {
        Some(Ok(t)) => Some(t.rr),
        _ => None,
    };
    let channel_detail = [detail(&trace.left), detail(&trace.right)];
    match trace.search {
        Some(s) => RrEstimate {
            channel_detail,
            ..RrEstimate::valid(PipelineKind::Rsa, ActivityClass::Sedentary, s.rr)
        },
        None => invalid,
    }
}
