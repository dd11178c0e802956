//! Respiratory rate during walking and running from breathing sounds that
//! lock onto the step rhythm.
//!
//! Footsteps give the stride frequency. Frames of the breathing band are
//! scored against a spectral template, the resulting probability curve is
//! split by singular spectrum analysis, and only components whose peak count
//! fits the plausible locomotor-respiratory coupling range are kept.

mod template;

pub use template::{
    build_breathing_template, fft_features, probability, probability_curve, BreathingTemplate,
    ProbabilityCurve, FRAME_S, HOP_S, N_BINS,
};

use crate::error::{Error, Result};
use crate::signal::{
    adaptive_peak_detect, bandpass, detrend, lowpass, ssa_decompose, Detrend, PeakParams, PeakSet,
    Signal, SsaDecomposition,
};
use crate::synth::rate_from_events;
use crate::types::{ActivityClass, PipelineKind, RrEstimate, RR_MAX_BPM, RR_MIN_BPM};

pub const FOOTSTEP_CUTOFF_HZ: f64 = 50.0;
pub const MIN_FOOTSTEPS: usize = 10;
pub const BAND_LOW: (f64, f64) = (300.0, 1800.0);
pub const BAND_HIGH: (f64, f64) = (2000.0, 9000.0);
/// Below this rate high-intensity windows fall back to the low band.
pub const HIGH_BAND_MIN_RATE: f64 = 18_000.0;

/// Steps-per-breath range for one intensity class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LrcParams {
    pub lrc_min: f64,
    pub lrc_max: f64,
    pub breathing_band: (f64, f64),
}

impl LrcParams {
    pub fn low() -> Self {
        Self {
            lrc_min: 1.9,
            lrc_max: 4.9,
            breathing_band: BAND_LOW,
        }
    }

    pub fn high() -> Self {
        Self {
            lrc_min: 1.8,
            lrc_max: 5.6,
            breathing_band: BAND_HIGH,
        }
    }

    pub fn for_class(cls: ActivityClass) -> Result<Self> {
        match cls {
            ActivityClass::ActiveLow => Ok(Self::low()),
            ActivityClass::ActiveHigh => Ok(Self::high()),
            other => Err(Error::param(format!("no LRC parameters for class {other}"))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(1.0 < self.lrc_min && self.lrc_min < self.lrc_max && self.lrc_max < 10.0) {
            return Err(Error::param(format!(
                "LRC range ({}, {}) must satisfy 1 < min < max < 10",
                self.lrc_min, self.lrc_max
            )));
        }
        Ok(())
    }
}

/// Plausible breath counts for one window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RrBounds {
    /// Breaths per window.
    pub rr_min: f64,
    pub rr_max: f64,
    pub window_s: f64,
}

impl RrBounds {
    pub fn bpm(&self) -> (f64, f64) {
        let k = 60.0 / self.window_s;
        (self.rr_min * k, self.rr_max * k)
    }

    pub fn contains(&self, count: usize) -> bool {
        let c = count as f64;
        c >= self.rr_min && c <= self.rr_max
    }
}

/// The class template pair used by [`estimate_rr_lrc`].
#[derive(Debug, Clone, PartialEq)]
pub struct TemplateSet {
    pub low: BreathingTemplate,
    pub high: BreathingTemplate,
}

impl TemplateSet {
    /// Templates built from the synthetic breath model.
    pub fn builtin() -> Self {
        let parse = |s: &str| BreathingTemplate::parse(s).expect("bundled template is valid");
        Self {
            low: parse(include_str!("../../data/template_low.txt")),
            high: parse(include_str!("../../data/template_high.txt")),
        }
    }

    pub fn for_class(&self, cls: ActivityClass) -> &BreathingTemplate {
        if cls == ActivityClass::ActiveHigh {
            &self.high
        } else {
            &self.low
        }
    }
}

impl Default for TemplateSet {
    fn default() -> Self {
        Self::builtin()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LrcConfig {
    /// Similarity threshold `T`.
    pub threshold: f64,
    /// SSA window is the curve length divided by this.
    pub ssa_divisor: usize,
    pub max_components: usize,
    pub curve_detrend: Detrend,
    pub low: LrcParams,
    pub high: LrcParams,
}

impl Default for LrcConfig {
    fn default() -> Self {
        Self {
            threshold: 0.6,
            ssa_divisor: 4,
            max_components: 15,
            curve_detrend: Detrend::Mean,
            low: LrcParams::low(),
            high: LrcParams::high(),
        }
    }
}

pub fn detect_footsteps(w: &Signal) -> Result<PeakSet> {
    if w.duration() < 10.0 {
        return Err(Error::param(format!(
            "window of {:.2} s shorter than 10 s",
            w.duration()
        )));
    }
    let peaks = adaptive_peak_detect(&lowpass(w, FOOTSTEP_CUTOFF_HZ)?, &PeakParams::footstep())?;
    if peaks.len() < MIN_FOOTSTEPS {
        return Err(Error::low_quality(format!(
            "{} footsteps found, need {MIN_FOOTSTEPS}",
            peaks.len()
        )));
    }
    Ok(peaks)
}

/// Steps per second.
pub fn stride_frequency(peaks: &PeakSet, duration: f64) -> f64 {
    peaks.len() as f64 / duration
}

pub fn breathing_band_filter(w: &Signal, cls: ActivityClass) -> Result<Signal> {
    let band = LrcParams::for_class(cls)?.breathing_band;
    band_filter(w, band)
}

fn band_filter(w: &Signal, band: (f64, f64)) -> Result<Signal> {
    if w.sample_rate() < 2.0 * band.1 {
        return Err(Error::param(format!(
            "sample rate {} Hz too low for a {} Hz band edge",
            w.sample_rate(),
            band.1
        )));
    }
    bandpass(w, band.0, band.1)
}

/// Breath-count bounds per window, clipped to the human breathing range.
pub fn lrc_rr_bounds(sf: f64, n_samples: usize, fs: f64, params: &LrcParams) -> Result<RrBounds> {
    if !(sf > 0.0) || !(fs > 0.0) || n_samples == 0 {
        return Err(Error::param("stride, rate and length must be positive"));
    }
    params.validate()?;
    let window_s = n_samples as f64 / fs;
    let steps = sf * window_s;
    let human = (RR_MIN_BPM * window_s / 60.0, RR_MAX_BPM * window_s / 60.0);
    let rr_min = (steps / params.lrc_max).max(human.0);
    let rr_max = (steps / params.lrc_min).min(human.1);
    if rr_min >= rr_max {
        return Err(Error::low_quality(format!(
            "stride {sf:.2} steps/s leaves no plausible breathing rate"
        )));
    }
    Ok(RrBounds {
        rr_min,
        rr_max,
        window_s,
    })
}

/// Peak count of every eigen-component; the residual, if present, is not
/// a candidate.
pub fn component_peak_counts(decomp: &SsaDecomposition, rate: f64) -> Result<Vec<usize>> {
    decomp
        .components
        .iter()
        .take(decomp.singular_values.len())
        .map(|c| {
            let s = Signal::new(c.clone(), rate)?;
            Ok(adaptive_peak_detect(&s, &PeakParams::curve())?.len())
        })
        .collect()
}

/// Indices of the counts that lie within the bounds.
pub fn kept_components(counts: &[usize], bounds: &RrBounds) -> Vec<usize> {
    (0..counts.len()).filter(|&i| bounds.contains(counts[i])).collect()
}

/// Sum of the components whose peak count lies within the bounds.
pub fn aggregate_components(decomp: &SsaDecomposition, bounds: &RrBounds, rate: f64) -> Result<Signal> {
    let counts = component_peak_counts(decomp, rate)?;
    aggregate_with_counts(decomp, &counts, bounds, rate).map(|(s, _)| s)
}

fn aggregate_with_counts(
    decomp: &SsaDecomposition,
    counts: &[usize],
    bounds: &RrBounds,
    rate: f64,
) -> Result<(Signal, Vec<usize>)> {
    let kept = kept_components(counts, bounds);
    if kept.is_empty() {
        return Err(Error::low_quality("no breathing-related component"));
    }
    let n = decomp.components[0].len();
    let mut sum = vec![0.0; n];
    for &i in &kept {
        for (s, v) in sum.iter_mut().zip(&decomp.components[i]) {
            *s += v;
        }
    }
    Ok((Signal::new(sum, rate)?, kept))
}

/// Intermediate results of one channel.
#[derive(Debug, Clone)]
pub struct LrcChannelTrace {
    pub footsteps: PeakSet,
    pub stride: f64,
    pub band: (f64, f64),
    pub curve: ProbabilityCurve,
    pub bounds: RrBounds,
    pub peak_counts: Vec<usize>,
    pub kept: Vec<usize>,
    pub breathing: Signal,
    pub breaths: PeakSet,
    pub rr: f64,
}

#[derive(Debug, Clone)]
pub struct LrcTrace {
    pub class: ActivityClass,
    pub left: Option<Result<LrcChannelTrace, String>>,
    pub right: Option<Result<LrcChannelTrace, String>>,
}

/// Class actually processed: high-intensity input below 18 kHz uses the low band.
pub fn effective_class(cls: ActivityClass, fs: f64) -> ActivityClass {
    if cls == ActivityClass::ActiveHigh && fs < HIGH_BAND_MIN_RATE {
        log::warn!("sample rate {fs} Hz too low for the high breathing band, using the low band");
        ActivityClass::ActiveLow
    } else {
        cls
    }
}

fn channel_trace(
    w: &Signal,
    params: &LrcParams,
    tmpl: &BreathingTemplate,
    cfg: &LrcConfig,
) -> Result<LrcChannelTrace> {
    if tmpl.band != params.breathing_band {
        return Err(Error::Template(format!(
            "template band [{}, {}] does not match processing band [{}, {}]",
            tmpl.band.0, tmpl.band.1, params.breathing_band.0, params.breathing_band.1
        )));
    }
    let footsteps = detect_footsteps(w)?;
    let stride = stride_frequency(&footsteps, w.duration());
    let bounds = lrc_rr_bounds(stride, w.len(), w.sample_rate(), params)?;
    let band = band_filter(w, params.breathing_band)?;
    let curve = probability_curve(&band, tmpl, cfg.threshold)?;
    let rate = 1.0 / curve.frame_hop;
    let series = detrend(&curve.values, cfg.curve_detrend);
    let l = series.len() / cfg.ssa_divisor.max(1);
    let decomp = ssa_decompose(&series, l, cfg.max_components.min(l.max(1)))?;
    let peak_counts = component_peak_counts(&decomp, rate)?;
    let (breathing, kept) = aggregate_with_counts(&decomp, &peak_counts, &bounds, rate)?;
    let breaths = adaptive_peak_detect(&breathing, &PeakParams::curve())?;
    if breaths.len() < 2 {
        return Err(Error::low_quality("fewer than two breaths"));
    }
    let rr = rate_from_events(&breaths.times);
    Ok(LrcChannelTrace {
        footsteps,
        stride,
        band: params.breathing_band,
        curve,
        bounds,
        peak_counts,
        kept,
        breathing,
        breaths,
        rr,
    })
}

pub fn lrc_trace(
    left: Option<&Signal>,
    right: Option<&Signal>,
    cls: ActivityClass,
    templates: &TemplateSet,
    cfg: &LrcConfig,
) -> Result<LrcTrace> {
    if !cls.is_active() {
        return Err(Error::param(format!("LRC pipeline needs an active class, got {cls}")));
    }
    let fs = match (left, right) {
        (Some(l), Some(r)) => {
            if l.len() != r.len() || l.sample_rate() != r.sample_rate() {
                return Err(Error::param("left and right windows differ in length or rate"));
            }
            l.sample_rate()
        }
        (Some(s), None) | (None, Some(s)) => s.sample_rate(),
        (None, None) => return Err(Error::param("no channel given")),
    };
    let class = effective_class(cls, fs);
    let params = if class == ActivityClass::ActiveHigh { cfg.high } else { cfg.low };
    let tmpl = templates.for_class(class);
    let run = |w: Option<&Signal>| {
        w.map(|s| channel_trace(s, &params, tmpl, cfg).map_err(|e| e.to_string()))
    };
    Ok(LrcTrace {
        class,
        left: run(left),
        right: run(right),
    })
}

/// Breathing rate of an active window: mean of the valid channel estimates.
pub fn estimate_rr_lrc(
    left: Option<&Signal>,
    right: Option<&Signal>,
    cls: ActivityClass,
    templates: &TemplateSet,
    cfg: &LrcConfig,
) -> RrEstimate {
    let invalid = RrEstimate::invalid(PipelineKind::Lrc, cls);
    let Ok(trace) = lrc_trace(left, right, cls, templates, cfg) else {
        return invalid;
    };
    let rr_of = |c: &Option<Result<LrcChannelTrace, String>>| match c {
        Some(Ok(t)) if (RR_MIN_BPM..=RR_MAX_BPM).contains(&t.rr) => Some(t.rr),
        _ => None,
    };
    let detail = [rr_of(&trace.left), rr_of(&trace.right)];
    let valid: Vec<f64> = detail.iter().flatten().copied().collect();
    if valid.is_empty() {
        return RrEstimate {
            channel_detail: detail,
            ..invalid
        };
    }
    let rr = valid.iter().sum::<f64>() / valid.len() as f64;
    RrEstimate {
        channel_detail: detail,
        ..RrEstimate::valid(PipelineKind::Lrc, cls, rr)
    }
}
