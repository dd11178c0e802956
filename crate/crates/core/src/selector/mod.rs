//! Per-window choice between the sedentary and active pipelines.
//!
//! Each 5 s segment of the channel-mean signal is described by averaged
//! MFCCs and classified by two linear SVMs: sedentary vs active, then low vs
//! high intensity. A window is assigned the class of more than 75% of its
//! segments, otherwise it is left undetermined.

mod mfcc;
mod svm;

pub use mfcc::{mfcc_features, SegmentFeatures, MFCC_FRAME_S, MFCC_HOP_S, N_MEL, N_MFCC};
pub use svm::{train_linear_svm, LinearBoundary, SvmParams};

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::signal::Signal;
use crate::synth::{
    synth_active, synth_sedentary, ActiveScenario, SedentaryScenario, BREATH_BAND_HIGH,
    BREATH_BAND_LOW,
};
use crate::types::ActivityClass;

pub const SEGMENT_S: f64 = 5.0;
pub const VOTE_THRESHOLD: f64 = 0.75;
const MODEL_MAGIC: &str = "inear-rr-selector";
const MODEL_VERSION: u32 = 1;

/// Anything that can label a segment; lets the SVM be swapped out.
pub trait SegmentClassifier: Sync {
    fn classify(&self, f: &SegmentFeatures) -> ActivityClass;
}

/// Two linear stages over standardised features.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectorModel {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    /// Positive side is active.
    pub stage1: LinearBoundary,
    /// Positive side is high intensity.
    pub stage2: LinearBoundary,
}

impl SelectorModel {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn standardize(&self, f: &SegmentFeatures) -> Vec<f64> {
        f.mfcc
            .iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }

    /// Model trained on the synthetic corpus, shipped with the crate.
    pub fn builtin() -> Self {
        Self::parse(include_str!("../../data/selector_model.txt")).expect("bundled model is valid")
    }

    pub fn to_text(&self) -> String {
        let join = |v: &[f64]| v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(" ");
        format!(
            "{MODEL_MAGIC} {MODEL_VERSION}\ndim {}\nmean {}\nstd {}\nstage1 {} {}\nstage2 {} {}\n",
            self.dim(),
            join(&self.mean),
            join(&self.std),
            self.stage1.bias,
            join(&self.stage1.weights),
            self.stage2.bias,
            join(&self.stage2.weights),
        )
    }

    pub fn parse(text: &str) -> Result<Self> {
        let bad = |m: String| Error::Model(m);
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        let mut next = |key: &str| -> Result<Vec<f64>> {
            let line = lines.next().ok_or_else(|| bad(format!("missing '{key}' line")))?;
            let mut parts = line.split_whitespace();
            if parts.next() != Some(key) {
                return Err(bad(format!("expected '{key}' line, found '{line}'")));
            }
            parts
                .map(|p| p.parse::<f64>().map_err(|_| bad(format!("'{p}' is not a number"))))
                .collect()
        };
        let version = next(MODEL_MAGIC)?;
        if version != [MODEL_VERSION as f64] {
            return Err(bad(format!("unsupported model version {version:?}")));
        }
        let dim = match next("dim")?.as_slice() {
            [d] if *d >= 1.0 && d.fract() == 0.0 => *d as usize,
            other => return Err(bad(format!("bad dimension {other:?}"))),
        };
        if dim != N_MFCC {
            return Err(bad(format!("model dimension {dim} does not match {N_MFCC} features")));
        }
        let vec_of = |v: Vec<f64>, what: &str| -> Result<Vec<f64>> {
            if v.len() != dim {
                return Err(bad(format!("{what} has {} entries, expected {dim}", v.len())));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(bad(format!("{what} is not finite")));
            }
            Ok(v)
        };
        let mean = vec_of(next("mean")?, "mean")?;
        let std = vec_of(next("std")?, "std")?;
        if std.iter().any(|&s| s <= 0.0) {
            return Err(bad("std entries must be positive".into()));
        }
        let mut stage = |key: &str| -> Result<LinearBoundary> {
            let v = next(key)?;
            if v.len() != dim + 1 {
                return Err(bad(format!("{key} has {} entries, expected {}", v.len(), dim + 1)));
            }
            Ok(LinearBoundary {
                bias: v[0],
                weights: vec_of(v[1..].to_vec(), key)?,
            })
        };
        let stage1 = stage("stage1")?;
        let stage2 = stage("stage2")?;
        Ok(Self {
            mean,
            std,
            stage1,
            stage2,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }
}

impl SegmentClassifier for SelectorModel {
    fn classify(&self, f: &SegmentFeatures) -> ActivityClass {
        classify_segment(f, self)
    }
}

pub fn classify_segment(f: &SegmentFeatures, m: &SelectorModel) -> ActivityClass {
    let z = m.standardize(f);
    if m.stage1.decision(&z) <= 0.0 {
        ActivityClass::Sedentary
    } else if m.stage2.decision(&z) <= 0.0 {
        ActivityClass::ActiveLow
    } else {
        ActivityClass::ActiveHigh
    }
}

fn label(cls: ActivityClass, positive: ActivityClass) -> f64 {
    if cls == positive {
        1.0
    } else {
        -1.0
    }
}

pub fn train_selector(
    labeled: &[(SegmentFeatures, ActivityClass)],
    params: &SvmParams,
) -> Result<SelectorModel> {
    if labeled.iter().any(|(_, c)| *c == ActivityClass::Undetermined) {
        return Err(Error::Training("undetermined is not a training label".into()));
    }
    if labeled.is_empty() {
        return Err(Error::Training("no training data".into()));
    }
    let n = labeled.len() as f64;
    let mut mean = vec![0.0; N_MFCC];
    for (f, _) in labeled {
        for (m, v) in mean.iter_mut().zip(&f.mfcc) {
            *m += v / n;
        }
    }
    let mut std = vec![0.0; N_MFCC];
    for (f, _) in labeled {
        for ((s, v), m) in std.iter_mut().zip(&f.mfcc).zip(&mean) {
            *s += (v - m).powi(2) / n;
        }
    }
    // a constant feature carries nothing; unit scale keeps it at zero
    let std: Vec<f64> = std.into_iter().map(|v| if v > 0.0 { v.sqrt() } else { 1.0 }).collect();
    let mut model = SelectorModel {
        mean,
        std,
        stage1: LinearBoundary {
            weights: vec![0.0; N_MFCC],
            bias: 0.0,
        },
        stage2: LinearBoundary {
            weights: vec![0.0; N_MFCC],
            bias: 0.0,
        },
    };
    let z: Vec<Vec<f64>> = labeled.iter().map(|(f, _)| model.standardize(f)).collect();
    let y1: Vec<f64> = labeled
        .iter()
        .map(|(_, c)| if c.is_active() { 1.0 } else { -1.0 })
        .collect();
    model.stage1 = train_linear_svm(&z, &y1, params)?;
    let (z2, y2): (Vec<Vec<f64>>, Vec<f64>) = labeled
        .iter()
        .zip(&z)
        .filter(|((_, c), _)| c.is_active())
        .map(|((_, c), row)| (row.clone(), label(*c, ActivityClass::ActiveHigh)))
        .unzip();
    if z2.is_empty() {
        return Err(Error::Training("no active segments for the second stage".into()));
    }
    model.stage2 = train_linear_svm(&z2, &y2, params)?;
    Ok(model)
}

/// Outcome of the per-window vote.
#[derive(Debug, Clone, PartialEq)]
pub struct VoteResult {
    pub per_segment: Vec<ActivityClass>,
    pub winner: ActivityClass,
    pub agreement: f64,
}

/// Majority vote with a strict 75% quorum.
pub fn vote(per_segment: Vec<ActivityClass>) -> VoteResult {
    if per_segment.is_empty() {
        return VoteResult {
            per_segment,
            winner: ActivityClass::Undetermined,
            agreement: 0.0,
        };
    }
    let classes = [
        ActivityClass::Sedentary,
        ActivityClass::ActiveLow,
        ActivityClass::ActiveHigh,
    ];
    let (best, count) = classes
        .iter()
        .map(|c| (*c, per_segment.iter().filter(|s| *s == c).count()))
        .fold((ActivityClass::Undetermined, 0), |acc, x| if x.1 > acc.1 { x } else { acc });
    let agreement = count as f64 / per_segment.len() as f64;
    let winner = if agreement > VOTE_THRESHOLD {
        best
    } else {
        ActivityClass::Undetermined
    };
    VoteResult {
        per_segment,
        winner,
        agreement,
    }
}

/// Channel mean of whatever channels are present.
pub fn mixdown(left: Option<&Signal>, right: Option<&Signal>) -> Result<Signal> {
    match (left, right) {
        (Some(l), Some(r)) => {
            if l.len() != r.len() || l.sample_rate() != r.sample_rate() {
                return Err(Error::param("left and right windows differ in length or rate"));
            }
            Signal::new(
                l.samples().iter().zip(r.samples()).map(|(a, b)| 0.5 * (a + b)).collect(),
                l.sample_rate(),
            )
        }
        (Some(s), None) | (None, Some(s)) => Ok(s.clone()),
        (None, None) => Err(Error::param("no channel given")),
    }
}

/// Classifies every whole 5 s segment of the window and votes.
pub fn select_pipeline(
    left: Option<&Signal>,
    right: Option<&Signal>,
    model: &dyn SegmentClassifier,
) -> Result<VoteResult> {
    let mono = mixdown(left, right)?;
    let seg = (SEGMENT_S * mono.sample_rate()).round() as usize;
    let count = if seg == 0 { 0 } else { mono.len() / seg };
    let labels = (0..count)
        .map(|i| Ok(model.classify(&mfcc_features(&mono.slice(i * seg, (i + 1) * seg))?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(vote(labels))
}

/// A 5 s mono segment drawn from the synthetic generator for `cls`, with a
/// random overall gain of ±10 dB.
pub fn synthetic_segment(cls: ActivityClass, fs: f64, rng: &mut impl Rng) -> Result<Signal> {
    let seed = rng.gen();
    let snr = rng.gen_range(15.0..35.0);
    let out = match cls {
        ActivityClass::Sedentary => {
            let hr = rng.gen_range(55.0..100.0);
            let sc = SedentaryScenario {
                noise_snr_db: Some(snr),
                duration_s: SEGMENT_S,
                sample_rate: fs,
                ..SedentaryScenario::new(hr, rng.gen_range(8.0..35.0), rng.gen_range(0.02..0.06), seed)
            };
            synth_sedentary(&sc)?
        }
        ActivityClass::ActiveLow | ActivityClass::ActiveHigh => {
            let high = cls == ActivityClass::ActiveHigh;
            let (stride, lrc) = if high {
                (rng.gen_range(2.2..3.0), rng.gen_range(3.5..5.5))
            } else {
                (rng.gen_range(1.5..2.1), rng.gen_range(3.0..4.5))
            };
            let sc = ActiveScenario {
                breath_band: if high { BREATH_BAND_HIGH } else { BREATH_BAND_LOW },
                noise_snr_db: Some(snr),
                duration_s: SEGMENT_S,
                sample_rate: fs,
                ..ActiveScenario::new(stride, lrc, seed)
            };
            synth_active(&sc)?
        }
        ActivityClass::Undetermined => {
            return Err(Error::param("cannot synthesise an undetermined segment"))
        }
    };
    let gain = 10f64.powf(rng.gen_range(-10.0..10.0) / 20.0);
    Ok(mixdown(Some(&out.left.signal), Some(&out.right.signal))?.scaled(gain))
}

/// Labelled features for `per_class` segments of each of the three classes.
pub fn synthetic_corpus(per_class: usize, fs: f64, seed: u64) -> Result<Vec<(SegmentFeatures, ActivityClass)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(3 * per_class);
    for _ in 0..per_class {
        for cls in [
            ActivityClass::Sedentary,
            ActivityClass::ActiveLow,
            ActivityClass::ActiveHigh,
        ] {
            let seg = synthetic_segment(cls, fs, &mut rng)?;
            out.push((mfcc_features(&seg)?, cls));
        }
    }
    Ok(out)
}
