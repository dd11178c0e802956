use super::*;
use crate::signal::{periodogram, Signal};

fn short_sedentary(seed: u64) -> SedentaryScenario {
    let mut sc = SedentaryScenario::new(70.0, 15.0, 0.04, seed);
    sc.sample_rate = 1000.0;
    sc
}

#[test]
fn zero_depth_gives_constant_intervals() {
    let mut sc = short_sedentary(1);
    sc.rsa_depth = 0.0;
    let beats = sc.beat_times();
    for w in beats.windows(2) {
        assert!(((w[1] - w[0]) - 60.0 / 70.0).abs() < 1e-12);
    }
}

#[test]
fn ground_truth_ibi_oscillates_at_breathing_rate() {
    let out = synth_sedentary(&short_sedentary(2)).unwrap();
    // resample the interval function on a 4 Hz grid
    let iv = out.truth.intervals();
    let t0 = iv[0].0;
    let t1 = iv.last().unwrap().0;
    let mut grid = Vec::new();
    let mut t = t0;
    let mut j = 0;
    while t <= t1 {
        while iv[j + 1].0 < t {
            j += 1;
        }
        let (ta, va) = iv[j];
        let (tb, vb) = iv[j + 1];
        grid.push(va + (vb - va) * (t - ta) / (tb - ta));
        t += 0.25;
    }
    let m = grid.iter().sum::<f64>() / grid.len() as f64;
    let centred: Vec<f64> = grid.iter().map(|v| v - m).collect();
    let f = crate::signal::dominant_frequency(&Signal::new(centred, 4.0).unwrap(), (0.05, 1.0)).unwrap();
    assert!((f - 0.25).abs() < 0.01, "{f}");
}

#[test]
fn generators_are_deterministic() {
    let a = synth_sedentary(&short_sedentary(9)).unwrap();
    let b = synth_sedentary(&short_sedentary(9)).unwrap();
    assert_eq!(a, b);
    let mut sc = ActiveScenario::new(2.0, 4.0, 5);
    sc.duration_s = 10.0;
    assert_eq!(synth_active(&sc).unwrap(), synth_active(&sc).unwrap());
    let c = synth_sedentary(&short_sedentary(10)).unwrap();
    assert_ne!(a.left, c.left);
}

#[test]
fn active_event_counts() {
    let sc = ActiveScenario::new(2.0, 4.0, 1);
    assert_eq!(sc.step_times().len(), 120);
    assert_eq!(sc.breath_times().len(), 30);
    assert!((rate_from_events(&sc.breath_times()) - 30.0).abs() < 1e-9);

    let mut sw = ActiveScenario::new(2.0, 3.0, 1);
    sw.lrc_schedule = vec![(0.0, 3.0), (30.0, 4.0)];
    assert_eq!(sw.breath_times().len(), 35);
}

#[test]
fn invalid_scenarios_rejected() {
    assert!(synth_sedentary(&SedentaryScenario::new(70.0, 50.0, 0.04, 1)).is_err());
    assert!(synth_sedentary(&SedentaryScenario::new(30.0, 15.0, 0.04, 1)).is_err());
    assert!(synth_sedentary(&SedentaryScenario::new(70.0, 15.0, 0.5, 1)).is_err());
    assert!(synth_active(&ActiveScenario::new(4.0, 3.0, 1)).is_err());
    assert!(synth_active(&ActiveScenario::new(2.0, 7.0, 1)).is_err());
}

#[test]
fn add_noise_hits_requested_snr() {
    let x: Vec<f64> = (0..5000).map(|i| (i as f64 * 0.01).sin()).collect();
    let s = Signal::new(x, 100.0).unwrap();
    for seed in 0..10 {
        for snr in [0.0, 10.0, 25.0] {
            let noisy = add_noise(&s, snr, seed).unwrap();
            let pn = noisy
                .samples()
                .iter()
                .zip(s.samples())
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                / s.len() as f64;
            let measured = 10.0 * (s.power() / pn).log10();
            assert!((measured - snr).abs() < 0.1, "{measured} vs {snr}");
        }
    }
    assert_eq!(add_noise(&s, f64::INFINITY, 1).unwrap(), s);
    assert!(add_noise(&Signal::new(vec![0.0; 10], 10.0).unwrap(), 10.0, 1).is_err());
}

#[test]
fn sedentary_energy_is_low_frequency() {
    let mut sc = short_sedentary(4);
    sc.noise_snr_db = None;
    sc.sample_rate = 4000.0;
    let out = synth_sedentary(&sc).unwrap();
    let p = periodogram(&out.left.signal);
    assert!(p.band_power(0.0, 30.0) / p.total() >= 0.9);
}

#[test]
fn breath_bursts_stay_in_band() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let fs = 22_050.0;
    for band in [BREATH_BAND_LOW, BREATH_BAND_HIGH] {
        let burst = breath_burst(fs, band, 26.0, BREATH_BURST_S, &mut rng);
        let p = periodogram(&Signal::new(burst, fs).unwrap());
        assert!(p.band_power(band.0, band.1) / p.total() >= 0.95);
    }
}

#[test]
fn sequence_concatenates() {
    let mut a = short_sedentary(1);
    a.duration_s = 20.0;
    a.sample_rate = 2000.0;
    let mut b = ActiveScenario::new(2.0, 4.0, 2);
    b.duration_s = 20.0;
    b.sample_rate = 2000.0;
    b.breath_band = (300.0, 900.0);
    let out = synth_sequence(&[ScenarioPart::Sedentary(a), ScenarioPart::Active(b)]).unwrap();
    assert_eq!(out.left.signal.len(), 80_000);
    assert!(out.truth.step_times.iter().all(|&t| t >= 20.0));
}
