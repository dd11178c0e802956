//! Deterministic synthetic in-ear audio with known ground truth.
//!
//! Sedentary audio is a train of damped low-frequency heartbeat pulses whose
//! spacing is modulated by breathing. Active audio is a train of strong
//! footstep pulses with a breath burst (spectrally tilted band-limited noise)
//! on every k-th step, k being the current steps-per-breath ratio. Both
//! channels share the event times and carry independent noise.

mod noise;
mod wav_out;

pub use noise::{add_noise, band_noise, white_noise};
pub use wav_out::{write_ground_truth, write_wav_stereo};

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::signal::filter::apply_gain;
use crate::signal::{band_gain, Signal};
use crate::types::{AudioWindow, Channel, RR_MAX_BPM, RR_MIN_BPM};

pub const DEFAULT_SAMPLE_RATE: f64 = 22_050.0;

/// Exponentially damped sinusoid used for heartbeats and footsteps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseShape {
    pub freq: f64,
    pub decay_s: f64,
    pub length_s: f64,
    pub amplitude: f64,
}

impl PulseShape {
    pub fn heartbeat() -> Self {
        Self {
            freq: 15.0,
            decay_s: 0.03,
            length_s: 0.12,
            amplitude: 0.05,
        }
    }

    pub fn footstep() -> Self {
        Self {
            freq: 10.0,
            decay_s: 0.04,
            length_s: 0.15,
            amplitude: 0.5,
        }
    }

    /// Samples of the pulse and the number of lead-in samples before its
    /// onset. The pulse is band-limited to a few times its own frequency so it
    /// leaves nothing in the breathing bands.
    fn render(&self, fs: f64) -> (Vec<f64>, usize) {
        let n = (self.length_s * fs).round() as usize;
        let lead = (0.05 * fs).round() as usize;
        let taper = (0.2 * n as f64).max(1.0);
        let mut raw = vec![0.0; lead + n + lead];
        for k in 0..n {
            let t = k as f64 / fs;
            // short cosine fade at the tail so truncation adds no click
            let tail = (n - k) as f64;
            let fade = if tail < taper {
                0.5 * (1.0 - (PI * tail / taper).cos())
            } else {
                1.0
            };
            raw[lead + k] =
                self.amplitude * (-t / self.decay_s).exp() * (2.0 * PI * self.freq * t).sin() * fade;
        }
        let edge = 4.0 * self.freq;
        let smooth = apply_gain(&raw, fs, |f| band_gain(f, 0.0, edge.min(fs / 4.0)));
        (smooth, lead)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArtifactBurst {
    pub start_s: f64,
    pub duration_s: f64,
    /// RMS of the burst relative to the RMS of the clean heartbeat audio.
    pub gain: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SedentaryScenario {
    pub mean_hr: f64,
    pub rr: f64,
    /// Peak deviation of the inter-beat interval, seconds.
    pub rsa_depth: f64,
    pub pulse: PulseShape,
    pub artifacts: Vec<ArtifactBurst>,
    /// `None` or `+inf` adds no noise.
    pub noise_snr_db: Option<f64>,
    pub duration_s: f64,
    pub sample_rate: f64,
    pub seed: u64,
}

impl SedentaryScenario {
    pub fn new(mean_hr: f64, rr: f64, rsa_depth: f64, seed: u64) -> Self {
        Self {
            mean_hr,
            rr,
            rsa_depth,
            pulse: PulseShape::heartbeat(),
            artifacts: Vec::new(),
            noise_snr_db: Some(30.0),
            duration_s: 60.0,
            sample_rate: DEFAULT_SAMPLE_RATE,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(RR_MIN_BPM..=RR_MAX_BPM).contains(&self.rr) {
            return Err(Error::param(format!("rr {} outside [7.5, 42.5] BPM", self.rr)));
        }
        if !(40.0..=180.0).contains(&self.mean_hr) {
            return Err(Error::param(format!("heart rate {} outside [40, 180] BPM", self.mean_hr)));
        }
        if !(self.rsa_depth >= 0.0 && self.rsa_depth < 0.5 * 60.0 / self.mean_hr) {
            return Err(Error::param(format!(
                "RSA depth {} s must be below half the mean interval",
                self.rsa_depth
            )));
        }
        validate_common(self.duration_s, self.sample_rate)
    }

    /// Beat times from IBI(t) = 60/HR + depth * sin(2π rr/60 t).
    pub fn beat_times(&self) -> Vec<f64> {
        let mean_ibi = 60.0 / self.mean_hr;
        let mut t = 0.25 * mean_ibi;
        let mut beats = Vec::new();
        while t < self.duration_s {
            beats.push(t);
            t += mean_ibi + self.rsa_depth * (2.0 * PI * self.rr / 60.0 * t).sin();
        }
        beats
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActiveScenario {
    /// Steps per second.
    pub stride: f64,
    /// `(start_s, steps_per_breath)`, sorted by start; the first entry starts at 0.
    pub lrc_schedule: Vec<(f64, f64)>,
    pub breath_band: (f64, f64),
    /// RMS of a breath burst relative to the footstep peak amplitude.
    pub breath_gain: f64,
    /// Amplitude drop across the breath band, dB.
    pub breath_tilt_db: f64,
    /// Fraction of each breath interval filled by breathing sound.
    pub breath_duty: f64,
    pub footstep: PulseShape,
    pub noise_snr_db: Option<f64>,
    pub duration_s: f64,
    pub sample_rate: f64,
    pub seed: u64,
}

pub const BREATH_BAND_LOW: (f64, f64) = (300.0, 1800.0);
pub const BREATH_BAND_HIGH: (f64, f64) = (2000.0, 9000.0);
pub const BREATH_BURST_S: f64 = 0.3;

impl ActiveScenario {
    pub fn new(stride: f64, lrc: f64, seed: u64) -> Self {
        Self {
            stride,
            lrc_schedule: vec![(0.0, lrc)],
            breath_band: BREATH_BAND_LOW,
            breath_gain: 0.1,
            breath_tilt_db: 26.0,
            breath_duty: 0.5,
            footstep: PulseShape::footstep(),
            noise_snr_db: Some(30.0),
            duration_s: 60.0,
            sample_rate: DEFAULT_SAMPLE_RATE,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(1.0..=3.5).contains(&self.stride) {
            return Err(Error::param(format!("stride {} outside [1.0, 3.5] steps/s", self.stride)));
        }
        if self.lrc_schedule.is_empty() || self.lrc_schedule[0].0 != 0.0 {
            return Err(Error::param("LRC schedule must start at 0 s"));
        }
        if self.lrc_schedule.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::param("LRC schedule must be strictly increasing in time"));
        }
        if let Some((_, r)) = self.lrc_schedule.iter().find(|(_, r)| !(1.8..=5.6).contains(r)) {
            return Err(Error::param(format!("LRC ratio {r} outside [1.8, 5.6]")));
        }
        if !(self.breath_duty > 0.0 && self.breath_duty <= 1.0) {
            return Err(Error::param(format!("breath duty {} outside (0, 1]", self.breath_duty)));
        }
        let (lo, hi) = self.breath_band;
        if !(lo > 0.0 && lo < hi && hi < self.sample_rate / 2.0) {
            return Err(Error::param(format!("breath band [{lo}, {hi}] Hz invalid")));
        }
        validate_common(self.duration_s, self.sample_rate)
    }

    pub fn step_times(&self) -> Vec<f64> {
        let count = (self.stride * self.duration_s).round() as usize;
        (0..count)
            .map(|j| (j as f64 + 0.25) / self.stride)
            .collect()
    }

    /// Steps per breath in force at time `t`.
    pub fn ratio_at(&self, t: f64) -> f64 {
        self.lrc_schedule
            .iter()
            .rev()
            .find(|(start, _)| *start <= t)
            .map_or(self.lrc_schedule[0].1, |e| e.1)
    }

    /// A breath starts on step j of a regime whenever j reaches the next
    /// multiple of the regime's ratio (j = 0, k, 2k, ... for integer k).
    pub fn breath_times(&self) -> Vec<f64> {
        let steps = self.step_times();
        let mut breaths = Vec::new();
        for (idx, &(start, ratio)) in self.lrc_schedule.iter().enumerate() {
            let end = self
                .lrc_schedule
                .get(idx + 1)
                .map_or(f64::INFINITY, |next| next.0);
            let regime: Vec<f64> = steps
                .iter()
                .copied()
                .filter(|&t| t >= start && t < end)
                .collect();
            let mut next = 0.0f64;
            for (j, &t) in regime.iter().enumerate() {
                if j as f64 >= next - 1e-9 {
                    breaths.push(t);
                    next += ratio;
                }
            }
        }
        breaths
    }
}

fn validate_common(duration_s: f64, sample_rate: f64) -> Result<()> {
    if !(duration_s > 0.0) {
        return Err(Error::param("duration must be positive"));
    }
    if !(sample_rate >= 100.0) {
        return Err(Error::param("sample rate must be at least 100 Hz"));
    }
    Ok(())
}

/// Events behind a generated recording.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GroundTruth {
    pub beat_times: Vec<f64>,
    pub step_times: Vec<f64>,
    pub breath_times: Vec<f64>,
    /// Breaths per minute.
    pub rr: f64,
    pub stride: Option<f64>,
}

impl GroundTruth {
    /// Successive beat intervals, stamped at the later beat.
    pub fn intervals(&self) -> Vec<(f64, f64)> {
        self.beat_times
            .windows(2)
            .map(|w| (w[1], w[1] - w[0]))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthOutput {
    pub left: AudioWindow,
    pub right: AudioWindow,
    pub truth: GroundTruth,
}

fn channel_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn place(target: &mut [f64], pulse: &[f64], t: f64, fs: f64) {
    place_with_lead(target, pulse, 0, t, fs);
}

/// Adds `pulse` so that its sample `lead` lands at time `t`.
fn place_with_lead(target: &mut [f64], pulse: &[f64], lead: usize, t: f64, fs: f64) {
    let origin = (t * fs).round() as i64 - lead as i64;
    let skip = (-origin).max(0) as usize;
    let start = origin.max(0) as usize;
    for (k, v) in pulse.iter().skip(skip).enumerate() {
        match target.get_mut(start + k) {
            Some(x) => *x += v,
            None => break,
        }
    }
}

fn finish_channel(clean: Vec<f64>, fs: f64, snr_db: Option<f64>, rng: &mut ChaCha8Rng) -> Result<Signal> {
    let sig = Signal::from_parts(clean, fs);
    match snr_db {
        Some(snr) if snr.is_finite() => add_noise(&sig, snr, rng.gen()),
        _ => Ok(sig),
    }
}

pub fn synth_sedentary(sc: &SedentaryScenario) -> Result<SynthOutput> {
    sc.validate()?;
    let fs = sc.sample_rate;
    let n = (sc.duration_s * fs).round() as usize;
    let beats = sc.beat_times();
    let (pulse, lead) = sc.pulse.render(fs);
    let mut clean = vec![0.0; n];
    for &t in &beats {
        place_with_lead(&mut clean, &pulse, lead, t, fs);
    }
    let clean_rms = Signal::from_parts(clean.clone(), fs).power().sqrt();

    let mut artifact = vec![0.0; n];
    let mut art_rng = channel_rng(sc.seed, 3);
    for burst in &sc.artifacts {
        let a = (burst.start_s * fs).round() as usize;
        let len = ((burst.duration_s * fs).round() as usize).min(n.saturating_sub(a));
        if len < 2 {
            continue;
        }
        let raw = band_noise(len, fs, (1.0, 20.0), &mut art_rng);
        let edge = ((0.05 * fs) as usize).min(len / 2).max(1);
        for (k, v) in raw.iter().enumerate() {
            artifact[a + k] += burst.gain * clean_rms * v * edge_window(k, len, edge);
        }
    }

    let mut channels = Vec::with_capacity(2);
    for (stream, tag) in [(1u64, Channel::Left), (2, Channel::Right)] {
        let mut rng = channel_rng(sc.seed, stream);
        let mut sig = finish_channel(clean.clone(), fs, sc.noise_snr_db, &mut rng)?.into_samples();
        sig.iter_mut().zip(&artifact).for_each(|(x, a)| *x += a);
        channels.push(AudioWindow::new(Signal::from_parts(sig, fs), tag));
    }
    let right = channels.pop().unwrap();
    let left = channels.pop().unwrap();
    Ok(SynthOutput {
        left,
        right,
        truth: GroundTruth {
            beat_times: beats,
            rr: sc.rr,
            ..Default::default()
        },
    })
}

fn edge_window(k: usize, len: usize, edge: usize) -> f64 {
    let d = k.min(len - 1 - k);
    if d >= edge {
        1.0
    } else {
        0.5 * (1.0 - (PI * d as f64 / edge as f64).cos())
    }
}

/// One breath burst: tilted band-limited noise with raised-cosine edges,
/// scaled to unit RMS before the edges are applied.
pub fn breath_burst(
    fs: f64,
    band: (f64, f64),
    tilt_db: f64,
    duration_s: f64,
    rng: &mut impl Rng,
) -> Vec<f64> {
    let len = ((duration_s * fs).round() as usize).max(2);
    let span = band.1 - band.0;
    let slope = tilt_db / 20.0 * std::f64::consts::LN_10;
    let shaped = noise::shaped_noise(len, fs, rng, |f| {
        if f < band.0 || f > band.1 {
            0.0
        } else {
            (-slope * (f - band.0) / span).exp()
        }
    });
    let edge = ((0.05 * fs) as usize).min(len / 2).max(1);
    shaped
        .iter()
        .enumerate()
        .map(|(k, v)| v * edge_window(k, len, edge))
        .collect()
}

/// Breath bursts every 2 s in silence, as a template reference recording.
pub fn synth_breath_reference(
    band: (f64, f64),
    tilt_db: f64,
    fs: f64,
    duration_s: f64,
    seed: u64,
) -> Result<Signal> {
    validate_common(duration_s, fs)?;
    if !(band.0 > 0.0 && band.0 < band.1 && band.1 < fs / 2.0) {
        return Err(Error::param(format!("breath band [{}, {}] Hz invalid", band.0, band.1)));
    }
    let n = (duration_s * fs).round() as usize;
    let mut out = vec![0.0; n];
    let mut rng = channel_rng(seed, 4);
    let mut t = 0.5;
    while t + BREATH_BURST_S <= duration_s {
        place(&mut out, &breath_burst(fs, band, tilt_db, BREATH_BURST_S, &mut rng), t, fs);
        t += 2.0;
    }
    Ok(Signal::from_parts(out, fs))
}

pub fn synth_active(sc: &ActiveScenario) -> Result<SynthOutput> {
    sc.validate()?;
    let fs = sc.sample_rate;
    let n = (sc.duration_s * fs).round() as usize;
    let steps = sc.step_times();
    let breaths = sc.breath_times();
    let (pulse, lead) = sc.footstep.render(fs);
    let mut base = vec![0.0; n];
    for &t in &steps {
        place_with_lead(&mut base, &pulse, lead, t, fs);
    }

    let mut channels = Vec::with_capacity(2);
    for (stream, tag) in [(1u64, Channel::Left), (2, Channel::Right)] {
        let mut rng = channel_rng(sc.seed, stream);
        let mut sig = base.clone();
        let gain = sc.breath_gain * sc.footstep.amplitude;
        for &t in &breaths {
            let len = sc.breath_duty * sc.ratio_at(t) / sc.stride;
            let burst: Vec<f64> = breath_burst(fs, sc.breath_band, sc.breath_tilt_db, len, &mut rng)
                .into_iter()
                .map(|v| v * gain)
                .collect();
            place(&mut sig, &burst, t, fs);
        }
        let sig = finish_channel(sig, fs, sc.noise_snr_db, &mut rng)?;
        channels.push(AudioWindow::new(sig, tag));
    }
    let right = channels.pop().unwrap();
    let left = channels.pop().unwrap();
    let rr = rate_from_events(&breaths);
    Ok(SynthOutput {
        left,
        right,
        truth: GroundTruth {
            step_times: steps,
            breath_times: breaths,
            rr,
            stride: Some(sc.stride),
            ..Default::default()
        },
    })
}

/// Events per minute from the mean spacing of the first and last event.
pub fn rate_from_events(times: &[f64]) -> f64 {
    match times {
        [first, .., last] if last > first => 60.0 * (times.len() - 1) as f64 / (last - first),
        _ => 0.0,
    }
}

/// A piece of a longer recording.
#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioPart {
    Sedentary(SedentaryScenario),
    Active(ActiveScenario),
}

/// Concatenates parts into one two-channel recording. Event times in the
/// returned truth are shifted to recording time; `rr` is left at zero.
pub fn synth_sequence(parts: &[ScenarioPart]) -> Result<SynthOutput> {
    let mut left = Vec::new();
    let mut right = Vec::new();
    let mut truth = GroundTruth::default();
    let mut offset = 0.0;
    let mut fs = None;
    for part in parts {
        let (out, dur) = match part {
            ScenarioPart::Sedentary(sc) => (synth_sedentary(sc)?, sc.duration_s),
            ScenarioPart::Active(sc) => (synth_active(sc)?, sc.duration_s),
        };
        let rate = out.left.sample_rate();
        if fs.is_some_and(|f| f != rate) {
            return Err(Error::param("all parts must share one sample rate"));
        }
        fs = Some(rate);
        left.extend_from_slice(out.left.signal.samples());
        right.extend_from_slice(out.right.signal.samples());
        let shift = |v: &[f64]| v.iter().map(|t| t + offset).collect::<Vec<_>>();
        truth.beat_times.extend(shift(&out.truth.beat_times));
        truth.step_times.extend(shift(&out.truth.step_times));
        truth.breath_times.extend(shift(&out.truth.breath_times));
        offset += dur;
    }
    let fs = fs.ok_or_else(|| Error::param("empty scenario sequence"))?;
    Ok(SynthOutput {
        left: AudioWindow::new(Signal::from_parts(left, fs), Channel::Left),
        right: AudioWindow::new(Signal::from_parts(right, fs), Channel::Right),
        truth,
    })
}

#[cfg(test)]
mod tests;
