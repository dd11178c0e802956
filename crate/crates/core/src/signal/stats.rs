use crate::error::{Error, Result};

pub fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    v.iter().sum::<f64>() / v.len() as f64
}

/// Population standard deviation.
pub fn std_dev(v: &[f64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    let m = mean(v);
    (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / v.len() as f64).sqrt()
}

pub fn cosine_similarity(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Similarity(format!(
            "length mismatch: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return Err(Error::Similarity("zero vector".into()));
    }
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    Ok((dot / (na * nb)).clamp(-1.0, 1.0))
}

/// Centered moving mean; windows are truncated at the edges so the output has the input's length.
pub fn moving_average(v: &[f64], window: usize) -> Vec<f64> {
    let n = v.len();
    if n == 0 {
        return Vec::new();
    }
    let window = window.clamp(1, n);
    let left = (window - 1) / 2;
    let right = window - 1 - left;
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0);
    let mut acc = 0.0;
    for x in v {
        acc += x;
        prefix.push(acc);
    }
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(left);
            let hi = (i + right + 1).min(n);
            (prefix[hi] - prefix[lo]) / (hi - lo) as f64
        })
        .collect()
}

/// Maps min to 0 and max to 1. A constant input maps to all zeros.
pub fn minmax_normalize(v: &[f64]) -> Vec<f64> {
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    if !(span > 0.0) {
        return vec![0.0; v.len()];
    }
    v.iter().map(|x| (x - lo) / span).collect()
}

/// How a series is detrended before spectral or subspace analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Detrend {
    #[default]
    Mean,
    Linear,
}

pub fn detrend(v: &[f64], mode: Detrend) -> Vec<f64> {
    let m = mean(v);
    match mode {
        Detrend::Mean => v.iter().map(|x| x - m).collect(),
        Detrend::Linear => {
            let xm = (v.len() as f64 - 1.0) / 2.0;
            let (mut sxy, mut sxx) = (0.0, 0.0);
            for (i, y) in v.iter().enumerate() {
                let dx = i as f64 - xm;
                sxy += dx * (y - m);
                sxx += dx * dx;
            }
            let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
            v.iter()
                .enumerate()
                .map(|(i, y)| y - m - slope * (i as f64 - xm))
                .collect()
        }
    }
}
