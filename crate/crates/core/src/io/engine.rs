use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::config::{ForcePipeline, PipelineConfig};
use super::wav::read_wav;
use crate::error::{Error, Result};
use crate::lrc::{
    estimate_rr_lrc, lrc_trace, BreathingTemplate, LrcConfig, LrcTrace, TemplateSet, BAND_HIGH,
    BAND_LOW, HIGH_BAND_MIN_RATE,
};
use crate::rsa::{estimate_rr_rsa, rsa_trace, RsaConfig, RsaTrace};
use crate::selector::{select_pipeline, SelectorModel};
use crate::signal::Signal;
use crate::types::{ActivityClass, RrEstimate};

/// `(start, end)` of every whole window, stepping by `window_s - overlap_s`.
pub fn segment_windows(duration: f64, window_s: f64, overlap_s: f64) -> Result<Vec<(f64, f64)>> {
    if !(window_s > 0.0 && window_s.is_finite()) || !(overlap_s >= 0.0 && overlap_s < window_s) {
        return Err(Error::Config(format!(
            "need 0 <= overlap < window, got window {window_s} s, overlap {overlap_s} s"
        )));
    }
    if !(duration >= 0.0) {
        return Err(Error::param(format!("duration {duration} s is negative")));
    }
    let step = window_s - overlap_s;
    let tol = 1e-9 * window_s.max(duration);
    let mut spans = Vec::new();
    let mut k = 0u64;
    loop {
        let start = k as f64 * step;
        if start + window_s > duration + tol {
            return Ok(spans);
        }
        spans.push((start, start + window_s));
        k += 1;
    }
}

/// Intermediate series of one window, for plotting.
#[derive(Debug, Clone)]
pub enum WindowTrace {
    Rsa(RsaTrace),
    Lrc(LrcTrace),
    Skipped(String),
}

/// A validated configuration with its model and templates loaded.
pub struct Engine {
    config: PipelineConfig,
    model: SelectorModel,
    templates: TemplateSet,
    rsa: RsaConfig,
    lrc: LrcConfig,
}

fn startup_file<T>(key: &str, path: &Path, load: impl Fn(&Path) -> Result<T>) -> Result<T> {
    load(path).map_err(|e| match e {
        Error::Io { source, .. } => Error::Config(format!("{key} {}: {source}", path.display())),
        other => other,
    })
}

impl Engine {
    /// Validates `config` and loads the files it names; unset paths use the
    /// bundled model and templates.
    pub fn new(config: PipelineConfig) -> Result<Self> {
        config.validate()?;
        let model = match &config.model_path {
            Some(p) => startup_file("model_path", p, SelectorModel::load)?,
            None => SelectorModel::builtin(),
        };
        let builtin = TemplateSet::builtin();
        let low = match &config.template_low_path {
            Some(p) => startup_file("template_low_path", p, BreathingTemplate::load)?,
            None => builtin.low,
        };
        let high = match &config.template_high_path {
            Some(p) => startup_file("template_high_path", p, BreathingTemplate::load)?,
            None => builtin.high,
        };
        Self::with_parts(config, model, TemplateSet { low, high })
    }

    pub fn with_parts(config: PipelineConfig, model: SelectorModel, templates: TemplateSet) -> Result<Self> {
        config.validate()?;
        for (name, t, band) in [("low", &templates.low, BAND_LOW), ("high", &templates.high, BAND_HIGH)] {
            if t.band != band {
                return Err(Error::Template(format!(
                    "{name} template covers [{}, {}] Hz, expected [{}, {}] Hz",
                    t.band.0, t.band.1, band.0, band.1
                )));
            }
        }
        Ok(Self {
            rsa: config.rsa_config(),
            lrc: config.lrc_config(),
            config,
            model,
            templates,
        })
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    /// Activity the window is processed as: forced, or the selector's vote.
    pub fn activity(&self, left: Option<&Signal>, right: Option<&Signal>) -> ActivityClass {
        match self.config.force_pipeline {
            ForcePipeline::Rsa => ActivityClass::Sedentary,
            ForcePipeline::LrcLow => ActivityClass::ActiveLow,
            ForcePipeline::LrcHigh => ActivityClass::ActiveHigh,
            ForcePipeline::Auto => select_pipeline(left, right, &self.model)
                .map_or(ActivityClass::Undetermined, |v| v.winner),
        }
    }

    /// Estimate for one window; the span is left at zero.
    pub fn estimate_window(&self, left: Option<&Signal>, right: Option<&Signal>) -> RrEstimate {
        match self.activity(left, right) {
            ActivityClass::Sedentary => estimate_rr_rsa(left, right, &self.rsa),
            cls @ (ActivityClass::ActiveLow | ActivityClass::ActiveHigh) => {
                estimate_rr_lrc(left, right, cls, &self.templates, &self.lrc)
            }
            ActivityClass::Undetermined => RrEstimate::undetermined(),
        }
    }

    pub fn trace_window(&self, left: Option<&Signal>, right: Option<&Signal>) -> WindowTrace {
        let traced = match self.activity(left, right) {
            ActivityClass::Sedentary => rsa_trace(left, right, &self.rsa).map(WindowTrace::Rsa),
            cls @ (ActivityClass::ActiveLow | ActivityClass::ActiveHigh) => {
                lrc_trace(left, right, cls, &self.templates, &self.lrc).map(WindowTrace::Lrc)
            }
            ActivityClass::Undetermined => Ok(WindowTrace::Skipped("activity undetermined".into())),
        };
        traced.unwrap_or_else(|e| WindowTrace::Skipped(e.to_string()))
    }

    fn for_each_window<T: Send>(
        &self,
        channels: &[Signal],
        f: impl Fn(Option<&Signal>, Option<&Signal>) -> T + Sync,
    ) -> Result<Vec<((f64, f64), T)>> {
        let first = match channels {
            [a] | [a, _] => a,
            _ => {
                return Err(Error::input(
                    None,
                    format!("{} channels, expected 1 or 2", channels.len()),
                ))
            }
        };
        if channels.iter().any(|c| c.len() != first.len() || c.sample_rate() != first.sample_rate()) {
            return Err(Error::input(None, "channels differ in length or sample rate"));
        }
        let fs = first.sample_rate();
        if fs < HIGH_BAND_MIN_RATE {
            log::warn!("sample rate {fs} Hz is below {HIGH_BAND_MIN_RATE} Hz; high-intensity windows use the low breathing band");
        }
        let spans = segment_windows(first.duration(), self.config.window_s, self.config.overlap_s)?;
        let len = ((self.config.window_s * fs).round() as usize).min(first.len());
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.config.workers)
            .build()
            .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
        Ok(pool.install(|| {
            spans
                .par_iter()
                .map(|&(start, end)| {
                    let a = ((start * fs).round() as usize).min(first.len() - len);
                    let cut: Vec<Signal> = channels.iter().map(|c| c.slice(a, a + len)).collect();
                    ((start, end), f(cut.first(), cut.get(1)))
                })
                .collect()
        }))
    }

    /// One estimate per window, in window order.
    pub fn estimate_channels(&self, channels: &[Signal]) -> Result<Vec<RrEstimate>> {
        Ok(self
            .for_each_window(channels, |l, r| self.estimate_window(l, r))?
            .into_iter()
            .map(|((s, e), est)| est.with_span(s, e))
            .collect())
    }

    pub fn trace_channels(&self, channels: &[Signal]) -> Result<Vec<((f64, f64), WindowTrace)>> {
        self.for_each_window(channels, |l, r| self.trace_window(l, r))
    }
}

/// Reads `input` and estimates every window with `config`.
pub fn run(config: &PipelineConfig, input: &Path) -> Result<Vec<RrEstimate>> {
    let engine = Engine::new(config.clone())?;
    engine.estimate_channels(&read_wav(input)?)
}

fn write_columns(path: &Path, header: &str, rows: impl Iterator<Item = (f64, f64)>) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let write = || -> std::io::Result<()> {
        writeln!(out, "# {header}")?;
        for (a, b) in rows {
            writeln!(out, "{a} {b}")?;
        }
        out.flush()
    };
    write().map_err(|e| Error::io(path, e))
}

/// Writes the series of one traced window into `dir` as two-column text
/// files, times in recording seconds. Returns the files written.
pub fn write_plot_data(dir: &Path, index: usize, start: f64, trace: &WindowTrace) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let name = |chan: &str, what: &str| dir.join(format!("window_{index:04}_{chan}_{what}.txt"));
    match trace {
        WindowTrace::Rsa(t) => {
            for (chan, c) in [("left", &t.left), ("right", &t.right)] {
                let Some(Ok(c)) = c else { continue };
                let p = name(chan, "hrv");
                write_columns(
                    &p,
                    "time_s interval_s",
                    c.hrv.interval_times().iter().zip(&c.hrv.intervals).map(|(t, v)| (start + t, *v)),
                )?;
                written.push(p);
                let p = name(chan, "hrv_resampled");
                let rs = &c.hrv.resampled;
                let t0 = c.hrv.interval_times().first().copied().unwrap_or(0.0);
                write_columns(
                    &p,
                    "time_s interval_s",
                    rs.samples()
                        .iter()
                        .enumerate()
                        .map(|(k, v)| (start + t0 + k as f64 / rs.sample_rate(), *v)),
                )?;
                written.push(p);
            }
        }
        WindowTrace::Lrc(t) => {
            for (chan, c) in [("left", &t.left), ("right", &t.right)] {
                let Some(Ok(c)) = c else { continue };
                let hop = c.curve.frame_hop;
                let centre = 0.5 * c.curve.frame_len;
                let p = name(chan, "probability");
                write_columns(
                    &p,
                    "time_s probability",
                    c.curve.values.iter().enumerate().map(|(k, v)| (start + centre + k as f64 * hop, *v)),
                )?;
                written.push(p);
                let p = name(chan, "breathing");
                write_columns(
                    &p,
                    "time_s amplitude",
                    c.breathing
                        .samples()
                        .iter()
                        .enumerate()
                        .map(|(k, v)| (start + centre + k as f64 * hop, *v)),
                )?;
                written.push(p);
            }
        }
        WindowTrace::Skipped(_) => {}
    }
    Ok(written)
}
