mod common;

use std::f64::consts::PI;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;
use inear_rr::io::{Engine, ForcePipeline, PipelineConfig};
use inear_rr::lrc::{kept_components, lrc_rr_bounds, LrcParams, RrBounds};
use inear_rr::rsa::{candidates_around, compute_hrv_at, f_difference_list, select_channel};
use inear_rr::selector::{
    classify_segment, mfcc_features, synthetic_corpus, synthetic_segment, train_selector, vote,
    SegmentFeatures, SelectorModel, SvmParams, VOTE_THRESHOLD,
};
use inear_rr::signal::{
    adaptive_peak_detect, bandpass, cosine_similarity, EnvelopeMode, PeakParams, PeakSet, Signal,
};
use inear_rr::synth::{synth_active, ActiveScenario};
use inear_rr::ActivityClass;

proptest! {
    #![proptest_config(config(CASES))]

    #[test]
    fn ssa_components_sum_to_input(input in ssa_input()) {
        check_ssa_completeness(input)?;
    }

    #[test]
    fn periodogram_keeps_power(input in frame_input()) {
        check_parseval(input)?;
    }

    #[test]
    fn probability_bounded_and_monotone(input in probability_input()) {
        check_probability(input)?;
    }

    #[test]
    fn window_count_arithmetic(input in window_input()) {
        check_window_count(input)?;
    }

    #[test]
    fn filter_is_linear(
        (x, y) in (64usize..1024).prop_flat_map(|n| (
            prop::collection::vec(-1.0..1.0f64, n),
            prop::collection::vec(-1.0..1.0f64, n),
        )),
        a in -10.0..10.0f64,
        b in -10.0..10.0f64,
    ) {
        let fs = 1000.0;
        let f = |v: Vec<f64>| bandpass(&Signal::new(v, fs).unwrap(), 20.0, 120.0).unwrap().into_samples();
        let mixed: Vec<f64> = x.iter().zip(&y).map(|(p, q)| a * p + b * q).collect();
        let lhs = f(mixed);
        let (fx, fy) = (f(x), f(y));
        let scale = lhs.iter().fold(1e-12f64, |m, v| m.max(v.abs()));
        for i in 0..lhs.len() {
            let rhs = a * fx[i] + b * fy[i];
            prop_assert!((lhs[i] - rhs).abs() <= 1e-9 * scale, "{i}: {} vs {rhs}", lhs[i]);
        }
    }

    #[test]
    fn filter_adds_no_lag(period in 40usize..200, width in 2usize..10, offset in 0usize..40) {
        let fs = 1000.0;
        let n = 4000;
        let mut x = vec![0.0; n];
        for start in (offset..n).step_by(period) {
            for k in 0..width.min(n - start) {
                x[start + k] = (PI * k as f64 / width as f64).sin();
            }
        }
        let y = bandpass(&Signal::new(x.clone(), fs).unwrap(), 5.0, 200.0).unwrap();
        let xc = |lag: i64| -> f64 {
            (0..n as i64)
                .filter_map(|i| {
                    let j = i + lag;
                    (0..n as i64).contains(&j).then(|| x[i as usize] * y.samples()[j as usize])
                })
                .sum()
        };
        let best = (-20i64..=20).max_by(|a, b| xc(*a).total_cmp(&xc(*b))).unwrap();
        prop_assert_eq!(best, 0);
    }

    #[test]
    fn pulse_train_intervals_equal_period(period_s in 0.4..1.5f64, phase in 0.0..0.3f64) {
        let fs = 1000.0;
        let n = (30.0 * fs) as usize;
        let mut x = vec![0.0; n];
        let mut t = phase;
        while t < 30.0 {
            let i0 = (t * fs).round() as usize;
            for k in 0..60.min(n - i0) {
                let tk = k as f64 / fs;
                x[i0 + k] += (2.0 * PI * 15.0 * tk).sin() * (-tk / 0.02).exp();
            }
            t += period_s;
        }
        let peaks = adaptive_peak_detect(&Signal::new(x, fs).unwrap(), &PeakParams::heartbeat()).unwrap();
        prop_assert!(peaks.len() >= 15);
        let EnvelopeMode::Hilbert { smooth_s: smooth } = PeakParams::heartbeat().envelope else {
            unreachable!("heartbeat peaks use the Hilbert envelope")
        };
        for w in peaks.times.windows(2) {
            prop_assert!(((w[1] - w[0]) - period_s).abs() <= smooth, "{} vs {period_s}", w[1] - w[0]);
        }
    }

    #[test]
    fn cosine_of_scaled_copy(a in prop::collection::vec(-1.0..1.0f64, 1..64), c in 0.01..100.0f64, neg in any::<bool>()) {
        prop_assume!(a.iter().any(|v| v.abs() > 1e-6));
        let c = if neg { -c } else { c };
        let b: Vec<f64> = a.iter().map(|v| c * v).collect();
        let s = cosine_similarity(&a, &b).unwrap();
        prop_assert!((s - c.signum()).abs() <= 1e-12, "{s}");
    }

    #[test]
    fn f_difference_minimum_at_modulation(k in 18u32..=72, centre_shift in -8i32..=8) {
        let target = k as f64 * 0.5;
        let f = target / 60.0;
        let (hr, depth) = (100.0, 0.03);
        let mut beats = Vec::new();
        let mut t = 0.2;
        while t < 60.0 {
            beats.push((t * 1000.0f64).round() as usize);
            t += 60.0 / hr + depth * (2.0 * PI * f * t).sin();
        }
        let hrv = compute_hrv_at(&PeakSet::from_indices(beats, 1000.0), 4.0).unwrap();
        let cands = candidates_around(target + centre_shift as f64 * 0.5, 20.0);
        prop_assume!(cands.candidates.iter().any(|c| *c == target));
        let diffs = f_difference_list(&hrv, &cands).unwrap();
        let best = (0..diffs.len()).min_by(|a, b| diffs[*a].total_cmp(&diffs[*b])).unwrap();
        prop_assert_eq!(cands.candidates[best], target);
    }

    #[test]
    fn cleaned_intervals_plausible(gaps in prop::collection::vec(0.05..3.0f64, 12..80)) {
        let mut t = 0.0;
        let mut idx = Vec::new();
        for g in gaps {
            t += g;
            idx.push((t * 1000.0f64).round() as usize);
        }
        idx.dedup();
        if let Ok(hrv) = compute_hrv_at(&PeakSet::from_indices(idx, 1000.0), 4.0) {
            prop_assert!(hrv.intervals.iter().all(|v| (0.25..=2.0).contains(v)), "{:?}", hrv.intervals);
        }
    }

    #[test]
    fn selected_channel_is_steadiest(j1 in 0.0..0.1f64, j2 in 0.0..0.1f64, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut series = |jitter: f64| {
            let mut t = 0.0;
            let idx: Vec<usize> = (0..60)
                .map(|_| {
                    t += 0.8 + rng.gen_range(-jitter..=jitter);
                    (t * 1000.0f64).round() as usize
                })
                .collect();
            compute_hrv_at(&PeakSet::from_indices(idx, 1000.0), 4.0).ok()
        };
        let (a, b) = (series(j1), series(j2));
        if let Some((_, s)) = select_channel(a.as_ref(), b.as_ref()) {
            let min = [a.as_ref(), b.as_ref()]
                .into_iter()
                .flatten()
                .map(|x| x.interval_std())
                .fold(f64::INFINITY, f64::min);
            prop_assert!(s.interval_std() <= min + 1e-12);
        } else {
            prop_assert!(a.is_none() && b.is_none());
        }
    }

    #[test]
    fn widening_bounds_keeps_components(
        counts in prop::collection::vec(0usize..80, 1..16),
        lo in 0.0..40.0f64,
        width in 0.0..40.0f64,
        widen_lo in 0.0..10.0f64,
        widen_hi in 0.0..10.0f64,
    ) {
        let narrow = RrBounds { rr_min: lo, rr_max: lo + width, window_s: 60.0 };
        let wide = RrBounds { rr_min: lo - widen_lo, rr_max: lo + width + widen_hi, window_s: 60.0 };
        let kn = kept_components(&counts, &narrow);
        let kw = kept_components(&counts, &wide);
        prop_assert!(kn.iter().all(|i| kw.contains(i)), "{kn:?} not within {kw:?}");
    }

    #[test]
    fn bounds_scale_with_stride(sf in 0.3..6.0f64, secs in 20.0..120.0f64, high in any::<bool>()) {
        let fs = 1000.0;
        let n = (secs * fs) as usize;
        let p = if high { LrcParams::high() } else { LrcParams::low() };
        let window_s = n as f64 / fs;
        let human = (7.5 * window_s / 60.0, 42.5 * window_s / 60.0);
        let (one, two) = (lrc_rr_bounds(sf, n, fs, &p), lrc_rr_bounds(2.0 * sf, n, fs, &p));
        let unclipped = |s: f64| (s * window_s / p.lrc_max, s * window_s / p.lrc_min);
        let (u1, u2) = (unclipped(sf), unclipped(2.0 * sf));
        prop_assert!((u2.0 - 2.0 * u1.0).abs() <= 1e-12 * u2.0 && (u2.1 - 2.0 * u1.1).abs() <= 1e-12 * u2.1);
        for (b, u) in [(one, u1), (two, u2)] {
            match b {
                Ok(b) => {
                    prop_assert!((b.rr_min - u.0.max(human.0)).abs() <= 1e-12 * b.rr_min);
                    prop_assert!((b.rr_max - u.1.min(human.1)).abs() <= 1e-12 * b.rr_max);
                }
                Err(_) => prop_assert!(u.0.max(human.0) >= u.1.min(human.1)),
            }
        }
    }

    #[test]
    fn quorum_is_strict(labels in prop::collection::vec(0u8..3, 1..30)) {
        let classes = [ActivityClass::Sedentary, ActivityClass::ActiveLow, ActivityClass::ActiveHigh];
        let seq: Vec<ActivityClass> = labels.iter().map(|&i| classes[i as usize]).collect();
        let best = classes
            .iter()
            .map(|c| seq.iter().filter(|s| *s == c).count())
            .max()
            .unwrap();
        let agreement = best as f64 / seq.len() as f64;
        let r = vote(seq);
        prop_assert_eq!(r.winner == ActivityClass::Undetermined, agreement <= VOTE_THRESHOLD);
    }

    #[test]
    fn step_counts_match_arithmetic(stride in 1.0..3.5f64, duration in 5.0..300.0f64, lrc in 1.8..5.6f64) {
        let mut sc = ActiveScenario::new(stride, lrc, 1);
        sc.duration_s = duration;
        prop_assert_eq!(sc.step_times().len(), (stride * duration).round() as usize);
        let steps = sc.step_times();
        prop_assert!(sc.breath_times().iter().all(|t| steps.contains(t)));
    }

    #[test]
    fn engine_emits_every_window_without_fabrication(
        secs in 10.0..120.0f64,
        window in 10.0..40.0f64,
        overlap_frac in 0.0..0.9f64,
        seed in any::<u64>(),
    ) {
        let fs = 200.0;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<f64> = (0..(secs * fs) as usize).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut c = PipelineConfig::default();
        c.window_s = window;
        c.overlap_s = window * overlap_frac;
        c.force_pipeline = ForcePipeline::Rsa;
        c.workers = 2;
        let sig = Signal::new(x, fs).unwrap();
        let est = Engine::new(c.clone()).unwrap().estimate_channels(&[sig.clone()]).unwrap();
        let spans = inear_rr::io::segment_windows(sig.duration(), c.window_s, c.overlap_s).unwrap();
        prop_assert_eq!(est.len(), spans.len());
        for (e, s) in est.iter().zip(&spans) {
            prop_assert_eq!((e.window_start, e.window_end), *s);
            prop_assert!(e.valid || e.rr.is_none());
            prop_assert!(!e.valid || (7.5..=42.5).contains(&e.rr.unwrap()));
        }
    }
}

proptest! {
    #![proptest_config(config(CASES))]

    #[test]
    fn rsa_ignores_amplitude(input in (sedentary_case(), gain())) {
        check_rsa_amplitude(input)?;
    }

    #[test]
    fn lrc_ignores_amplitude(input in (active_case(), gain())) {
        check_lrc_amplitude(input)?;
    }

    #[test]
    fn pipelines_are_deterministic(input in determinism_input()) {
        check_determinism(input)?;
    }

    #[test]
    fn active_generator_is_seeded(stride in 1.0..3.5f64, lrc in 1.8..5.6f64, seed in any::<u64>()) {
        let mut sc = ActiveScenario::new(stride, lrc, seed);
        sc.sample_rate = 1000.0;
        sc.duration_s = 5.0;
        sc.breath_band = (100.0, 400.0);
        let (a, b) = (synth_active(&sc).unwrap(), synth_active(&sc).unwrap());
        prop_assert_eq!(a, b);
    }

    #[test]
    fn training_is_reproducible(
        rows in prop::collection::vec((prop::array::uniform13(-3.0..3.0f64), 0u8..3), 6..30),
    ) {
        let classes = [ActivityClass::Sedentary, ActivityClass::ActiveLow, ActivityClass::ActiveHigh];
        let data: Vec<(SegmentFeatures, ActivityClass)> = rows
            .iter()
            .map(|(m, c)| (SegmentFeatures { mfcc: *m }, classes[*c as usize]))
            .collect();
        let params = SvmParams { max_epochs: 50, ..SvmParams::default() };
        match (train_selector(&data, &params), train_selector(&data, &params)) {
            (Ok(a), Ok(b)) => prop_assert_eq!(a, b),
            (Err(_), Err(_)) => {}
            _ => prop_assert!(false, "one run failed"),
        }
    }
}

#[test]
fn decisions_survive_six_db_gain() {
    let model = SelectorModel::builtin();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let classes = [ActivityClass::Sedentary, ActivityClass::ActiveLow, ActivityClass::ActiveHigh];
    let (mut kept, mut total) = (0, 0);
    for k in 0..60 {
        let seg = synthetic_segment(classes[k % 3], 22050.0, &mut rng).unwrap();
        let base = classify_segment(&mfcc_features(&seg).unwrap(), &model);
        for db in [-6.0f64, 6.0] {
            let g = 10f64.powf(db / 20.0);
            let c = classify_segment(&mfcc_features(&seg.scaled(g)).unwrap(), &model);
            kept += usize::from(c == base);
            total += 1;
        }
    }
    assert!(kept as f64 >= 0.95 * total as f64, "{kept}/{total} decisions kept");
}

#[test]
fn retraining_gives_identical_model_text() {
    let corpus = synthetic_corpus(5, 22050.0, 3).unwrap();
    let a = train_selector(&corpus, &SvmParams::default()).unwrap();
    let b = train_selector(&corpus, &SvmParams::default()).unwrap();
    assert_eq!(a.to_text(), b.to_text());
}
