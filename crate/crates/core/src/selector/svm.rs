//! Linear support vector machine (hinge loss, L2 penalty) trained by dual
//! coordinate descent.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct LinearBoundary {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LinearBoundary {
    pub fn decision(&self, x: &[f64]) -> f64 {
        self.bias + self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvmParams {
    /// Penalty on hinge violations.
    pub c: f64,
    pub max_epochs: usize,
    /// Stop when the projected-gradient spread falls below this.
    pub tol: f64,
    pub seed: u64,
}

impl Default for SvmParams {
    fn default() -> Self {
        Self {
            c: 1.0,
            max_epochs: 1000,
            tol: 1e-6,
            seed: 0x5eed,
        }
    }
}

/// Trains on rows `x` with labels `y` in {-1, +1}. The bias is learned as
/// the weight of a constant extra feature.
pub fn train_linear_svm(x: &[Vec<f64>], y: &[f64], params: &SvmParams) -> Result<LinearBoundary> {
    if x.is_empty() || x.len() != y.len() {
        return Err(Error::Training("empty or misaligned training set".into()));
    }
    if !y.iter().any(|&v| v > 0.0) || !y.iter().any(|&v| v < 0.0) {
        return Err(Error::Training("training set holds a single class".into()));
    }
    let d = x[0].len();
    if x.iter().any(|r| r.len() != d) {
        return Err(Error::Training("rows differ in dimension".into()));
    }
    let n = x.len();
    let qii: Vec<f64> = x.iter().map(|r| r.iter().map(|v| v * v).sum::<f64>() + 1.0).collect();
    let mut alpha = vec![0.0; n];
    let mut w = vec![0.0; d + 1];
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);

    for _ in 0..params.max_epochs {
        order.shuffle(&mut rng);
        let (mut pg_max, mut pg_min) = (f64::NEG_INFINITY, f64::INFINITY);
        for &i in &order {
            let xi = &x[i];
            let wx = w[d] + xi.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>();
            let g = y[i] * wx - 1.0;
            let pg = if alpha[i] == 0.0 {
                g.min(0.0)
            } else if alpha[i] == params.c {
                g.max(0.0)
            } else {
                g
            };
            pg_max = pg_max.max(pg);
            pg_min = pg_min.min(pg);
            if pg.abs() > 1e-12 {
                let old = alpha[i];
                alpha[i] = (old - g / qii[i]).clamp(0.0, params.c);
                let delta = (alpha[i] - old) * y[i];
                for (wj, v) in w.iter_mut().zip(xi) {
                    *wj += delta * v;
                }
                w[d] += delta;
            }
        }
        if pg_max - pg_min < params.tol {
            break;
        }
    }
    let bias = w.pop().expect("bias slot");
    Ok(LinearBoundary { weights: w, bias })
}
