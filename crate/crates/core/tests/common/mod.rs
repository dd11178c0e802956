//! Property checks shared by the property suite and the acceptance target.
#![allow(dead_code)]

use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed, TestCaseError, TestRunner};

use inear_rr::io::{emit_results, segment_windows, Engine, ForcePipeline, OutputFormat, PipelineConfig};
use inear_rr::lrc::{estimate_rr_lrc, probability, probability_curve, LrcConfig, TemplateSet};
use inear_rr::rsa::{estimate_rr_rsa, RsaConfig};
use inear_rr::signal::{periodogram, ssa_decompose, Signal};
use inear_rr::synth::{synth_active, synth_sedentary, ActiveScenario, SedentaryScenario};
use inear_rr::{ActivityClass, RrEstimate};

pub const CASES: u32 = 100;

/// Seeded so reruns see the same cases.
pub fn config(cases: u32) -> Config {
    Config {
        cases,
        rng_seed: RngSeed::Fixed(0x5eed_1ea5),
        failure_persistence: None,
        ..Config::default()
    }
}

pub fn runner() -> TestRunner {
    TestRunner::new(config(CASES))
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), TestCaseError> {
    if cond {
        Ok(())
    } else {
        Err(TestCaseError::fail(msg()))
    }
}

fn lib<T>(r: inear_rr::Result<T>) -> Result<T, TestCaseError> {
    r.map_err(|e| TestCaseError::fail(e.to_string()))
}

// SSA completeness

pub fn ssa_input() -> impl Strategy<Value = (Vec<f64>, usize, usize)> {
    (20usize..400)
        .prop_flat_map(|n| (prop::collection::vec(-100.0..100.0f64, n), 2..=n / 2))
        .prop_flat_map(|(x, l)| (Just(x), Just(l), 1..=l.min(20)))
}

pub fn check_ssa_completeness((x, l, k): (Vec<f64>, usize, usize)) -> Result<(), TestCaseError> {
    let d = lib(ssa_decompose(&x, l, k))?;
    let scale = x.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let sum = d.reconstruct();
    for (i, (a, b)) in sum.iter().zip(&x).enumerate() {
        ensure((a - b).abs() <= 1e-9 * scale, || format!("sample {i}: {a} vs {b}, L={l} k={k}"))?;
    }
    Ok(())
}

// Parseval

pub fn frame_input() -> impl Strategy<Value = (Vec<f64>, f64)> {
    (prop::collection::vec(-1.0..1.0f64, 1..2048), 1.0..48_000.0f64)
}

pub fn check_parseval((x, fs): (Vec<f64>, f64)) -> Result<(), TestCaseError> {
    let n = x.len() as f64;
    let mean_square = x.iter().map(|v| v * v).sum::<f64>() / n;
    let total = periodogram(&lib(Signal::new(x, fs))?).total();
    ensure((total - mean_square).abs() <= 1e-6 * mean_square.max(1e-300), || {
        format!("spectrum total {total} vs mean square {mean_square}")
    })
}

// Breathing probability rule

pub fn probability_input() -> impl Strategy<Value = (f64, f64, f64, u64)> {
    (-1.0..=1.0f64, -1.0..=1.0f64, 0.0..0.99f64, any::<u64>())
}

pub fn check_probability((s1, s2, t, seed): (f64, f64, f64, u64)) -> Result<(), TestCaseError> {
    let (lo, hi) = if s1 <= s2 { (s1, s2) } else { (s2, s1) };
    let (p_lo, p_hi) = (probability(lo, t), probability(hi, t));
    ensure((0.0..=1.0).contains(&p_lo) && (0.0..=1.0).contains(&p_hi), || {
        format!("P out of [0, 1]: {p_lo}, {p_hi}")
    })?;
    ensure(p_lo <= p_hi, || format!("P({lo}) = {p_lo} > P({hi}) = {p_hi} at T = {t}"))?;
    if lo <= t {
        ensure(p_lo == 0.0, || format!("P({lo}) = {p_lo} at or below T = {t}"))?;
    }
    ensure(probability(1.0, t) == 1.0, || "P(1) != 1".into())?;

    // whole curves on random noise stay in range too
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
    let x: Vec<f64> = (0..4000).map(|_| rand::Rng::gen_range(&mut rng, -1.0..1.0)).collect();
    let tmpl = TemplateSet::builtin();
    let curve = lib(probability_curve(&lib(Signal::new(x, 8000.0))?, &tmpl.low, t))?;
    ensure(curve.values.iter().all(|p| (0.0..=1.0).contains(p)), || "curve value outside [0, 1]".into())
}

// Amplitude invariance and determinism of both pipelines

#[derive(Debug, Clone)]
pub struct SedentaryCase {
    pub hr: f64,
    pub rr: f64,
    pub depth: f64,
    pub seed: u64,
}

pub fn sedentary_case() -> impl Strategy<Value = SedentaryCase> {
    (55.0..100.0f64, 8.0..35.0f64, 0.02..0.06f64, any::<u64>())
        .prop_filter("heart rate at least 2.5 times breathing rate", |(hr, rr, _, _)| hr / rr >= 2.5)
        .prop_map(|(hr, rr, depth, seed)| SedentaryCase { hr, rr, depth, seed })
}

/// A short, low-rate window keeps a hundred pipeline runs cheap.
pub fn small_sedentary(c: &SedentaryCase) -> inear_rr::Result<(Signal, Signal)> {
    let mut sc = SedentaryScenario::new(c.hr, c.rr, c.depth, c.seed);
    sc.sample_rate = 500.0;
    sc.duration_s = 20.0;
    sc.noise_snr_db = Some(20.0);
    let out = synth_sedentary(&sc)?;
    Ok((out.left.signal, out.right.signal))
}

#[derive(Debug, Clone)]
pub struct ActiveCase {
    pub stride: f64,
    pub lrc: f64,
    pub seed: u64,
}

pub fn active_case() -> impl Strategy<Value = ActiveCase> {
    (1.5..3.0f64, 3.0..5.0f64, any::<u64>())
        .prop_filter("breathing rate within the human range", |(s, l, _)| s * 60.0 / l <= 42.5)
        .prop_map(|(stride, lrc, seed)| ActiveCase { stride, lrc, seed })
}

pub fn small_active(c: &ActiveCase) -> inear_rr::Result<(Signal, Signal)> {
    let mut sc = ActiveScenario::new(c.stride, c.lrc, c.seed);
    sc.sample_rate = 4000.0;
    sc.duration_s = 15.0;
    sc.noise_snr_db = Some(20.0);
    let out = synth_active(&sc)?;
    Ok((out.left.signal, out.right.signal))
}

fn same_estimate(a: &RrEstimate, b: &RrEstimate, tol: f64) -> bool {
    a.valid == b.valid
        && a.pipeline == b.pipeline
        && match (a.rr, b.rr) {
            (Some(x), Some(y)) => (x - y).abs() <= tol * x.abs().max(1.0),
            (None, None) => true,
            _ => false,
        }
}

pub fn gain() -> impl Strategy<Value = f64> {
    (-2.0..2.0f64).prop_map(|e| 10f64.powf(e))
}

pub fn check_rsa_amplitude((c, g): (SedentaryCase, f64)) -> Result<(), TestCaseError> {
    let (l, r) = lib(small_sedentary(&c))?;
    let cfg = RsaConfig::default();
    let a = estimate_rr_rsa(Some(&l), Some(&r), &cfg);
    let b = estimate_rr_rsa(Some(&l.scaled(g)), Some(&r.scaled(g)), &cfg);
    ensure(same_estimate(&a, &b, 1e-9), || format!("gain {g}: {a:?} vs {b:?}"))
}

pub fn check_lrc_amplitude((c, g): (ActiveCase, f64)) -> Result<(), TestCaseError> {
    let (l, r) = lib(small_active(&c))?;
    let (t, cfg) = (TemplateSet::builtin(), LrcConfig::default());
    let a = estimate_rr_lrc(Some(&l), Some(&r), ActivityClass::ActiveLow, &t, &cfg);
    let b = estimate_rr_lrc(Some(&l.scaled(g)), Some(&r.scaled(g)), ActivityClass::ActiveLow, &t, &cfg);
    ensure(same_estimate(&a, &b, 1e-9), || format!("gain {g}: {a:?} vs {b:?}"))
}

fn bits(e: &RrEstimate) -> (bool, Option<u64>, [Option<u64>; 2]) {
    (
        e.valid,
        e.rr.map(f64::to_bits),
        e.channel_detail.map(|c| c.map(f64::to_bits)),
    )
}

pub fn check_determinism((s, a, workers): (SedentaryCase, ActiveCase, usize)) -> Result<(), TestCaseError> {
    let (l, r) = lib(small_sedentary(&s))?;
    let cfg = RsaConfig::default();
    let x = estimate_rr_rsa(Some(&l), Some(&r), &cfg);
    let y = estimate_rr_rsa(Some(&l), Some(&r), &cfg);
    ensure(bits(&x) == bits(&y), || format!("RSA reruns differ: {x:?} vs {y:?}"))?;

    let (al, ar) = lib(small_active(&a))?;
    let (t, lcfg) = (TemplateSet::builtin(), LrcConfig::default());
    let x = estimate_rr_lrc(Some(&al), Some(&ar), ActivityClass::ActiveLow, &t, &lcfg);
    let y = estimate_rr_lrc(Some(&al), Some(&ar), ActivityClass::ActiveLow, &t, &lcfg);
    ensure(bits(&x) == bits(&y), || format!("LRC reruns differ: {x:?} vs {y:?}"))?;

    let csv = |workers: usize| -> Result<Vec<u8>, TestCaseError> {
        let mut pc = PipelineConfig::default();
        pc.window_s = 10.0;
        pc.overlap_s = 5.0;
        pc.force_pipeline = ForcePipeline::Rsa;
        pc.workers = workers;
        let est = lib(lib(Engine::new(pc))?.estimate_channels(&[l.clone(), r.clone()]))?;
        let mut out = Vec::new();
        lib(emit_results(&est, OutputFormat::Csv, &mut out))?;
        Ok(out)
    };
    let (one, many) = (csv(1)?, csv(workers)?);
    ensure(one == many, || format!("CSV differs between 1 and {workers} workers"))
}

pub fn determinism_input() -> impl Strategy<Value = (SedentaryCase, ActiveCase, usize)> {
    (sedentary_case(), active_case(), 2usize..5)
}

// Window-count arithmetic, in eighths of a second so the oracle is exact

pub fn window_input() -> impl Strategy<Value = (u32, u32, u32)> {
    (4u32..1600)
        .prop_flat_map(|w| (Just(w), 1..=w, 0u32..8000))
}

pub fn check_window_count((w8, step8, d8): (u32, u32, u32)) -> Result<(), TestCaseError> {
    let (w, step, d) = (w8 as f64 / 8.0, step8 as f64 / 8.0, d8 as f64 / 8.0);
    let spans = lib(segment_windows(d, w, w - step))?;
    let expected = if d8 < w8 { 0 } else { ((d8 - w8) / step8 + 1) as usize };
    ensure(spans.len() == expected, || format!("{} windows, expected {expected}", spans.len()))?;
    for (k, (s, e)) in spans.iter().enumerate() {
        ensure(*s == k as f64 * step && *e - *s == w && *e <= d, || {
            format!("window {k} = ({s}, {e}) with step {step}, length {w}, duration {d}")
        })?;
    }
    Ok(())
}
