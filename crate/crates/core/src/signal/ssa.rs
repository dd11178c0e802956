//! Singular spectrum analysis.
//!
//! The trajectory (Hankel) matrix `X` is never materialised. Its left
//! singular vectors are the eigenvectors of the lag-covariance `X Xᵀ`, which
//! is built directly from the series. Small embeddings use a dense symmetric
//! eigensolver; large ones use Lanczos with full reorthogonalisation since
//! only the leading few eigentriples are needed.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

const DENSE_LIMIT: usize = 160;

#[derive(Debug, Clone, PartialEq)]
pub struct SsaDecomposition {
    /// Reconstructed components, each as long as the input, ordered by
    /// decreasing singular value. When the leading eigentriples do not span
    /// the whole embedding, the last entry is the residual.
    pub components: Vec<Vec<f64>>,
    pub singular_values: Vec<f64>,
    pub window_length: usize,
}

impl SsaDecomposition {
    pub fn reconstruct(&self) -> Vec<f64> {
        let n = self.components.first().map_or(0, Vec::len);
        let mut out = vec![0.0; n];
        for c in &self.components {
            for (o, v) in out.iter_mut().zip(c) {
                *o += v;
            }
        }
        out
    }
}

pub fn ssa_decompose(
    series: &[f64],
    window_length: usize,
    max_components: usize,
) -> Result<SsaDecomposition> {
    let n = series.len();
    if window_length < 2 || window_length > n / 2 {
        return Err(Error::param(format!(
            "SSA window {window_length} needs 2 <= L <= {} for a series of {n}",
            n / 2
        )));
    }
    if max_components == 0 || max_components > window_length {
        return Err(Error::param(format!(
            "SSA component count {max_components} must lie in [1, {window_length}]"
        )));
    }
    let l = window_length;
    let k = n - l + 1;
    let cov = lag_covariance(series, l);

    let (values, vectors) = if l <= DENSE_LIMIT || max_components == l {
        dense_eigen(cov, max_components)
    } else {
        lanczos_eigen(&cov, max_components)
    };

    let mut components = Vec::with_capacity(values.len() + 1);
    let mut singular_values = Vec::with_capacity(values.len());
    let counts: Vec<f64> = (0..n)
        .map(|t| {
            let lo = t.saturating_sub(k - 1);
            let hi = t.min(l - 1);
            (hi - lo + 1) as f64
        })
        .collect();
    for (lambda, u) in values.iter().zip(&vectors) {
        // projection onto u, then diagonal averaging of the rank-one term u wᵀ
        let w: Vec<f64> = (0..k)
            .map(|j| u.iter().enumerate().map(|(i, ui)| ui * series[i + j]).sum())
            .collect();
        let mut comp = vec![0.0; n];
        for (i, ui) in u.iter().enumerate() {
            for (j, wj) in w.iter().enumerate() {
                comp[i + j] += ui * wj;
            }
        }
        for (c, cnt) in comp.iter_mut().zip(&counts) {
            *c /= cnt;
        }
        components.push(comp);
        singular_values.push(lambda.max(0.0).sqrt());
    }

    if values.len() < l {
        let mut residual = series.to_vec();
        for c in &components {
            for (r, v) in residual.iter_mut().zip(c) {
                *r -= v;
            }
        }
        components.push(residual);
    }

    Ok(SsaDecomposition {
        components,
        singular_values,
        window_length: l,
    })
}

fn lag_covariance(x: &[f64], l: usize) -> DMatrix<f64> {
    let k = x.len() - l + 1;
    let mut c = DMatrix::<f64>::zeros(l, l);
    for j in 0..l {
        let v: f64 = (0..k).map(|t| x[t] * x[j + t]).sum();
        c[(0, j)] = v;
        c[(j, 0)] = v;
    }
    for i in 1..l {
        for j in i..l {
            let v = c[(i - 1, j - 1)] - x[i - 1] * x[j - 1] + x[i - 1 + k] * x[j - 1 + k];
            c[(i, j)] = v;
            c[(j, i)] = v;
        }
    }
    c
}

/// Leading `count` eigenpairs, largest first.
fn dense_eigen(cov: DMatrix<f64>, count: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    order.truncate(count);
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = order
        .iter()
        .map(|&i| eig.eigenvectors.column(i).iter().copied().collect())
        .collect();
    (values, vectors)
}

fn lanczos_eigen(cov: &DMatrix<f64>, count: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let l = cov.nrows();
    let steps = (4 * count + 40).min(l);
    let scale = cov.diagonal().iter().fold(0.0f64, |m, v| m.max(v.abs()));

    let mut q: Vec<f64> = (0..l)
        .map(|i| 1.0 + 0.5 * (1.7 * i as f64 + 0.3).sin())
        .collect();
    normalise(&mut q);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(steps);
    let mut alpha = Vec::with_capacity(steps);
    let mut beta: Vec<f64> = Vec::with_capacity(steps);

    for _ in 0..steps {
        let mut w: Vec<f64> = (0..l)
            .map(|r| cov.row(r).iter().zip(&q).map(|(a, b)| a * b).sum())
            .collect();
        let a: f64 = w.iter().zip(&q).map(|(x, y)| x * y).sum();
        basis.push(q);
        alpha.push(a);
        for _ in 0..2 {
            for b in &basis {
                let d: f64 = w.iter().zip(b).map(|(x, y)| x * y).sum();
                w.iter_mut().zip(b).for_each(|(x, y)| *x -= d * y);
            }
        }
        let nb = w.iter().map(|v| v * v).sum::<f64>().sqrt();
        if basis.len() == steps || nb <= 1e-12 * scale.max(f64::MIN_POSITIVE) {
            break;
        }
        beta.push(nb);
        q = w.into_iter().map(|v| v / nb).collect();
    }

    let m = basis.len();
    let mut t = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alpha[i];
        if i + 1 < m {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let (values, small) = dense_eigen(t, count.min(m));
    let vectors = small
        .iter()
        .map(|s| {
            let mut v = vec![0.0; l];
            for (coef, b) in s.iter().zip(&basis) {
                v.iter_mut().zip(b).for_each(|(x, y)| *x += coef * y);
            }
            normalise(&mut v);
            v
        })
        .collect();
    (values, vectors)
}

fn normalise(v: &mut [f64]) {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn corr(a: &[f64], b: &[f64]) -> f64 {
        let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
        let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
        dot / (na * nb)
    }

    #[test]
    fn constant_series_goes_to_first_component() {
        let x = vec![2.5; 80];
        let d = ssa_decompose(&x, 20, 5).unwrap();
        assert!(d.components[0].iter().all(|v| (v - 2.5).abs() < 1e-9));
        for c in &d.components[1..] {
            assert!(c.iter().all(|v| v.abs() < 1e-9));
        }
    }

    #[test]
    fn separates_two_sinusoids() {
        let fs = 5.0;
        let n = 600;
        let slow: Vec<f64> = (0..n).map(|i| (2.0 * PI * 0.05 * i as f64 / fs).sin()).collect();
        let fast: Vec<f64> = (0..n)
            .map(|i| 0.6 * (2.0 * PI * 0.4 * i as f64 / fs).sin())
            .collect();
        let x: Vec<f64> = slow.iter().zip(&fast).map(|(a, b)| a + b).collect();
        for l in [100, 150, 300] {
            let d = ssa_decompose(&x, l, 6).unwrap();
            for target in [&slow, &fast] {
                let best = (0..d.components.len() - 1)
                    .map(|i| {
                        let single = corr(&d.components[i], target);
                        let pair: Vec<f64> = d.components[i]
                            .iter()
                            .zip(&d.components[i + 1])
                            .map(|(a, b)| a + b)
                            .collect();
                        single.max(corr(&pair, target))
                    })
                    .fold(f64::NEG_INFINITY, f64::max);
                assert!(best > 0.95, "L={l} best={best}");
            }
        }
    }

    #[test]
    fn completeness_dense_and_lanczos() {
        let x: Vec<f64> = (0..1200)
            .map(|i| ((i * 7919 % 113) as f64 / 113.0 - 0.5) + (i as f64 * 0.01).sin())
            .collect();
        for l in [40, 300] {
            let d = ssa_decompose(&x, l, 15).unwrap();
            assert_eq!(d.components.len(), 16);
            let r = d.reconstruct();
            let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            let err = x.iter().zip(&r).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            assert!(err / norm < 1e-9);
        }
    }

    #[test]
    fn lanczos_matches_dense_leading_values() {
        let x: Vec<f64> = (0..900)
            .map(|i| (i as f64 * 0.05).sin() + 0.3 * (i as f64 * 0.31).cos() + ((i * 31 % 17) as f64) * 0.01)
            .collect();
        let cov = lag_covariance(&x, 200);
        let (dv, _) = dense_eigen(cov.clone(), 6);
        let (lv, _) = lanczos_eigen(&cov, 6);
        for (a, b) in dv.iter().zip(&lv) {
            assert!((a - b).abs() <= 1e-6 * dv[0], "{a} vs {b}");
        }
    }

    #[test]
    fn rejects_bad_window() {
        assert!(ssa_decompose(&[1.0; 10], 1, 1).is_err());
        assert!(ssa_decompose(&[1.0; 10], 6, 1).is_err());
        assert!(ssa_decompose(&[1.0; 10], 4, 5).is_err());
    }
}
