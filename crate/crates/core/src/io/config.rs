use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::lrc::{LrcConfig, LrcParams};
use crate::rsa::{RlsParams, RsaConfig};
use crate::signal::Detrend;

/// Pipeline choice that bypasses the selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ForcePipeline {
    #[default]
    Auto,
    Rsa,
    LrcLow,
    LrcHigh,
}

impl ForcePipeline {
    pub fn as_str(self) -> &'static str {
        match self {
            ForcePipeline::Auto => "auto",
            ForcePipeline::Rsa => "rsa",
            ForcePipeline::LrcLow => "lrc-low",
            ForcePipeline::LrcHigh => "lrc-high",
        }
    }
}

impl fmt::Display for ForcePipeline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ForcePipeline {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(ForcePipeline::Auto),
            "rsa" => Ok(ForcePipeline::Rsa),
            "lrc-low" => Ok(ForcePipeline::LrcLow),
            "lrc-high" => Ok(ForcePipeline::LrcHigh),
            other => Err(Error::Config(format!(
                "unknown pipeline '{other}', expected auto, rsa, lrc-low or lrc-high"
            ))),
        }
    }
}

fn parse_detrend(s: &str) -> Result<Detrend> {
    match s {
        "mean" => Ok(Detrend::Mean),
        "linear" => Ok(Detrend::Linear),
        other => Err(Error::Config(format!("unknown detrend '{other}', expected mean or linear"))),
    }
}

fn detrend_name(d: Detrend) -> &'static str {
    match d {
        Detrend::Mean => "mean",
        Detrend::Linear => "linear",
    }
}

/// Every tunable of a run. Field names double as configuration keys.
#[allow(non_snake_case)]
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub window_s: f64,
    pub overlap_s: f64,
    /// Candidate list width, BPM.
    pub w: f64,
    /// Breathing similarity threshold.
    pub T: f64,
    pub threshold_factor: f64,
    pub filter_interference: bool,
    pub lrc_low_min: f64,
    pub lrc_low_max: f64,
    pub lrc_high_min: f64,
    pub lrc_high_max: f64,
    pub ssa_divisor: usize,
    pub ssa_max_components: usize,
    pub rls_order: usize,
    pub rls_forgetting: f64,
    pub rls_delta: f64,
    pub hrv_rate: f64,
    pub hrv_detrend: Detrend,
    pub curve_detrend: Detrend,
    pub template_low_path: Option<PathBuf>,
    pub template_high_path: Option<PathBuf>,
    pub model_path: Option<PathBuf>,
    pub force_pipeline: ForcePipeline,
    /// Worker threads; 0 picks one per core.
    pub workers: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let rsa = RsaConfig::default();
        let lrc = LrcConfig::default();
        Self {
            window_s: 60.0,
            overlap_s: 30.0,
            w: rsa.width_bpm,
            T: lrc.threshold,
            threshold_factor: rsa.threshold_factor,
            filter_interference: rsa.filter_interference,
            lrc_low_min: lrc.low.lrc_min,
            lrc_low_max: lrc.low.lrc_max,
            lrc_high_min: lrc.high.lrc_min,
            lrc_high_max: lrc.high.lrc_max,
            ssa_divisor: lrc.ssa_divisor,
            ssa_max_components: lrc.max_components,
            rls_order: rsa.rls.order,
            rls_forgetting: rsa.rls.forgetting,
            rls_delta: rsa.rls.delta,
            hrv_rate: rsa.resample_rate,
            hrv_detrend: rsa.detrend,
            curve_detrend: lrc.curve_detrend,
            template_low_path: None,
            template_high_path: None,
            model_path: None,
            force_pipeline: ForcePipeline::Auto,
            workers: 0,
        }
    }
}

fn num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse '{value}'")))
}

impl PipelineConfig {
    /// Assigns one key. `width` and `threshold` are accepted for `w` and `T`.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key {
            "window_s" => self.window_s = num(key, value)?,
            "overlap_s" => self.overlap_s = num(key, value)?,
            "w" | "width" => self.w = num(key, value)?,
            "T" | "threshold" => self.T = num(key, value)?,
            "threshold_factor" => self.threshold_factor = num(key, value)?,
            "filter_interference" => self.filter_interference = num(key, value)?,
            "lrc_low_min" => self.lrc_low_min = num(key, value)?,
            "lrc_low_max" => self.lrc_low_max = num(key, value)?,
            "lrc_high_min" => self.lrc_high_min = num(key, value)?,
            "lrc_high_max" => self.lrc_high_max = num(key, value)?,
            "ssa_divisor" => self.ssa_divisor = num(key, value)?,
            "ssa_max_components" => self.ssa_max_components = num(key, value)?,
            "rls_order" => self.rls_order = num(key, value)?,
            "rls_forgetting" => self.rls_forgetting = num(key, value)?,
            "rls_delta" => self.rls_delta = num(key, value)?,
            "hrv_rate" => self.hrv_rate = num(key, value)?,
            "hrv_detrend" => self.hrv_detrend = parse_detrend(value)?,
            "curve_detrend" => self.curve_detrend = parse_detrend(value)?,
            "template_low_path" => self.template_low_path = optional_path(value),
            "template_high_path" => self.template_high_path = optional_path(value),
            "model_path" => self.model_path = optional_path(value),
            "force_pipeline" => self.force_pipeline = value.parse()?,
            "workers" => self.workers = num(key, value)?,
            other => return Err(Error::Config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    /// Applies `key = value` lines; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", n + 1)))?;
            self.set(key.trim(), value).map_err(|e| match e {
                Error::Config(m) => Error::Config(format!("line {}: {m}", n + 1)),
                other => other,
            })?;
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_text(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// The configuration as text that [`PipelineConfig::parse`] reads back.
    pub fn to_text(&self) -> String {
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
        [
            format!("window_s = {}", self.window_s),
            format!("overlap_s = {}", self.overlap_s),
            format!("w = {}", self.w),
            format!("T = {}", self.T),
            format!("threshold_factor = {}", self.threshold_factor),
            format!("filter_interference = {}", self.filter_interference),
            format!("lrc_low_min = {}", self.lrc_low_min),
            format!("lrc_low_max = {}", self.lrc_low_max),
            format!("lrc_high_min = {}", self.lrc_high_min),
            format!("lrc_high_max = {}", self.lrc_high_max),
            format!("ssa_divisor = {}", self.ssa_divisor),
            format!("ssa_max_components = {}", self.ssa_max_components),
            format!("rls_order = {}", self.rls_order),
            format!("rls_forgetting = {}", self.rls_forgetting),
            format!("rls_delta = {}", self.rls_delta),
            format!("hrv_rate = {}", self.hrv_rate),
            format!("hrv_detrend = {}", detrend_name(self.hrv_detrend)),
            format!("curve_detrend = {}", detrend_name(self.curve_detrend)),
            format!("template_low_path = {}", path(&self.template_low_path)),
            format!("template_high_path = {}", path(&self.template_high_path)),
            format!("model_path = {}", path(&self.model_path)),
            format!("force_pipeline = {}", self.force_pipeline),
            format!("workers = {}", self.workers),
        ]
        .join("\n")
            + "\n"
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if !(self.window_s > 0.0 && self.window_s.is_finite()) {
            return fail(format!("window_s must be positive, got {}", self.window_s));
        }
        if !(self.overlap_s >= 0.0 && self.overlap_s < self.window_s) {
            return fail(format!(
                "overlap_s must lie in [0, window_s), got {} with window_s {}",
                self.overlap_s, self.window_s
            ));
        }
        if !(self.w > 0.0 && self.w.is_finite()) {
            return fail(format!("w must be positive, got {}", self.w));
        }
        if !(0.0..1.0).contains(&self.T) {
            return fail(format!("T must lie in [0, 1), got {}", self.T));
        }
        if !(self.threshold_factor > 0.0 && self.threshold_factor.is_finite()) {
            return fail(format!("threshold_factor must be positive, got {}", self.threshold_factor));
        }
        let lrc = self.lrc_config();
        for (name, p) in [("lrc_low", lrc.low), ("lrc_high", lrc.high)] {
            p.validate().map_err(|e| Error::Config(format!("{name}: {e}")))?;
        }
        if self.ssa_divisor < 1 || self.ssa_max_components < 1 {
            return fail("ssa_divisor and ssa_max_components must be at least 1".into());
        }
        if self.rls_order < 1 {
            return fail("rls_order must be at least 1".into());
        }
        if !(self.rls_forgetting > 0.0 && self.rls_forgetting <= 1.0) {
            return fail(format!("rls_forgetting must lie in (0, 1], got {}", self.rls_forgetting));
        }
        if !(self.rls_delta > 0.0 && self.rls_delta.is_finite()) {
            return fail(format!("rls_delta must be positive, got {}", self.rls_delta));
        }
        if !(self.hrv_rate > 0.0 && self.hrv_rate.is_finite()) {
            return fail(format!("hrv_rate must be positive, got {}", self.hrv_rate));
        }
        Ok(())
    }

    pub fn rsa_config(&self) -> RsaConfig {
        RsaConfig {
            width_bpm: self.w,
            filter_interference: self.filter_interference,
            threshold_factor: self.threshold_factor,
            rls: RlsParams {
                order: self.rls_order,
                forgetting: self.rls_forgetting,
                delta: self.rls_delta,
            },
            resample_rate: self.hrv_rate,
            detrend: self.hrv_detrend,
        }
    }

    pub fn lrc_config(&self) -> LrcConfig {
        let d = LrcConfig::default();
        LrcConfig {
            threshold: self.T,
            ssa_divisor: self.ssa_divisor,
            max_components: self.ssa_max_components,
            curve_detrend: self.curve_detrend,
            low: LrcParams {
                lrc_min: self.lrc_low_min,
                lrc_max: self.lrc_low_max,
                ..d.low
            },
            high: LrcParams {
                lrc_min: self.lrc_high_min,
                lrc_max: self.lrc_high_max,
                ..d.high
            },
        }
    }
}

fn optional_path(value: &str) -> Option<PathBuf> {
    (!value.is_empty()).then(|| PathBuf::from(value))
}
