//! Delay embedding of a scalar observable and the (tau, m) heuristics.

use crate::dynamics::Axis;
use crate::error::{Error, Result};
use crate::io::fmt_f64;
use serde::{Deserialize, Serialize};

pub const MI_BINS: usize = 32;
pub const MI_PLATEAU_REL: f64 = 0.01;
pub const FNN_RATIO: f64 = 15.0;
pub const FNN_ATTRACTOR_TOL: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingConfig {
    pub tau: usize,
    pub m: usize,
    pub observable: Axis,
    pub normalize: bool,
}

/// Row-major N x dim point set with the Euclidean metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    pub dim: usize,
    pub data: Vec<f64>,
}

impl PointCloud {
    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 || data.len() % dim != 0 {
            return Err(Error::Shape(format!("{} values do not fill rows of width {dim}", data.len())));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invalid("point cloud has non-finite entries".into()));
        }
        Ok(Self { dim, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map(|r| r.len()).unwrap_or(0);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::Shape("ragged rows".into()));
        }
        Self::new(dim, rows.concat())
    }

    pub fn len(&self) -> usize {
        if self.dim == 0 { 0 } else { self.data.len() / self.dim }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn dist(&self, i: usize, j: usize) -> f64 {
        crate::linalg::euclid(self.point(i), self.point(j))
    }

    pub fn subset(&self, idx: &[usize]) -> PointCloud {
        let mut data = Vec::with_capacity(idx.len() * self.dim);
        for &i in idx {
            data.extend_from_slice(self.point(i));
        }
        PointCloud { dim: self.dim, data }
    }

    /// Full pairwise distance matrix, row-major.
    pub fn distance_matrix(&self) -> Vec<f64> {
        let n = self.len();
        let mut d = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let v = self.dist(i, j);
                d[i * n + j] = v;
                d[j * n + i] = v;
            }
        }
        d
    }

    pub fn diameter(&self) -> f64 {
        let n = self.len();
        let mut best = 0.0f64;
        for i in 0..n {
            for j in i + 1..n {
                best = best.max(self.dist(i, j));
            }
        }
        best
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for i in 0..self.len() {
            let row: Vec<String> = self.point(i).iter().map(|v| fmt_f64(*v)).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

pub fn delay_embed(series: &[f64], cfg: &EmbeddingConfig) -> Result<PointCloud> {
    if cfg.tau < 1 || cfg.m < 2 {
        return Err(Error::Invalid(format!("need tau >= 1 and m >= 2 (tau={}, m={})", cfg.tau, cfg.m)));
    }
    let span = (cfg.m - 1) * cfg.tau;
    if series.len() <= span {
        return Err(Error::InsufficientData { needed: span + 1, got: series.len() });
    }
    let rows = series.len() - span;
    let mut data = Vec::with_capacity(rows * cfg.m);
    for k in 0..rows {
        for j in 0..cfg.m {
            data.push(series[k + j * cfg.tau]);
        }
    }
    let mut cloud = PointCloud::new(cfg.m, data)?;
    if cfg.normalize {
        for c in 0..cfg.m {
            let mean = (0..rows).map(|r| cloud.data[r * cfg.m + c]).sum::<f64>() / rows as f64;
            let var = (0..rows).map(|r| (cloud.data[r * cfg.m + c] - mean).powi(2)).sum::<f64>() / rows as f64;
            let sd = var.sqrt();
            if !(sd > 1e-12 * mean.abs().max(1.0)) {
                return Err(Error::ZeroVariance(c));
            }
            for r in 0..rows {
                cloud.data[r * cfg.m + c] /= sd;
            }
        }
    }
    Ok(cloud)
}

fn bin_index(v: f64, lo: f64, width: f64, bins: usize) -> usize {
    if width <= 0.0 {
        return 0;
    }
    (((v - lo) / width) as usize).min(bins - 1)
}

/// Histogram estimate of I(s_t; s_{t+lag}) with equal-width bins over the series range.
pub fn mutual_information(series: &[f64], lag: usize, bins: usize) -> f64 {
    let n = series.len().saturating_sub(lag);
    if n == 0 {
        return 0.0;
    }
    let lo = series.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = series.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = (hi - lo) / bins as f64;
    let mut joint = vec![0usize; bins * bins];
    let mut pa = vec![0usize; bins];
    let mut pb = vec![0usize; bins];
    for k in 0..n {
        let a = bin_index(series[k], lo, width, bins);
        let b = bin_index(series[k + lag], lo, width, bins);
        joint[a * bins + b] += 1;
        pa[a] += 1;
        pb[b] += 1;
    }
    let nf = n as f64;
    let mut mi = 0.0;
    for a in 0..bins {
        for b in 0..bins {
            let c = joint[a * bins + b];
            if c > 0 {
                let pab = c as f64 / nf;
                mi += pab * (pab / ((pa[a] as f64 / nf) * (pb[b] as f64 / nf))).ln();
            }
        }
    }
    mi
}

pub fn autocorrelation(series: &[f64], lag: usize) -> f64 {
    let n = series.len();
    if lag >= n {
        return 0.0;
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let var: f64 = series.iter().map(|v| (v - mean).powi(2)).sum();
    if var == 0.0 {
        return 1.0;
    }
    let cov: f64 = (0..n - lag).map(|k| (series[k] - mean) * (series[k + lag] - mean)).sum();
    cov / var
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TauSource {
    MutualInformation,
    Autocorrelation,
    MaxLagFallback,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TauChoice {
    pub tau: usize,
    pub source: TauSource,
}

impl TauChoice {
    pub fn warning(&self) -> bool {
        self.source == TauSource::MaxLagFallback
    }
}

/// First strict local minimum of the binned mutual information, moved to
/// the middle of the plateau of lags within `MI_PLATEAU_REL` of it. A lag
/// whose value is already within twice the estimator's finite-sample bias
/// (B-1)^2 / 2N of zero counts as a minimum, so structureless series stop
/// at lag 1.
pub fn choose_tau(series: &[f64], max_lag: usize) -> TauChoice {
    let max_lag = max_lag.max(1);
    let mi: Vec<f64> = (0..=max_lag + 1).map(|lag| mutual_information(series, lag, MI_BINS)).collect();
    let n_pairs = series.len().saturating_sub(max_lag).max(1) as f64;
    let bias = ((MI_BINS - 1) * (MI_BINS - 1)) as f64 / (2.0 * n_pairs);
    for tau in 1..=max_lag {
        if mi[tau] <= 2.0 * bias {
            return TauChoice { tau, source: TauSource::MutualInformation };
        }
        if mi[tau] < mi[tau - 1] && mi[tau] <= mi[tau + 1] {
            let flat = mi[tau] * (1.0 + MI_PLATEAU_REL);
            let lo = (1..=tau).rev().take_while(|&l| mi[l] <= flat).last().unwrap_or(tau);
            let hi = (tau..=max_lag).take_while(|&l| mi[l] <= flat).last().unwrap_or(tau);
            return TauChoice { tau: (lo + hi) / 2, source: TauSource::MutualInformation };
        }
    }
    let threshold = (-1.0f64).exp();
    for tau in 1..=max_lag {
        if autocorrelation(series, tau) < threshold {
            return TauChoice { tau, source: TauSource::Autocorrelation };
        }
    }
    log::warn!("autocorrelation never drops below 1/e within {max_lag} lags");
    TauChoice { tau: max_lag, source: TauSource::MaxLagFallback }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimChoice {
    pub m: usize,
    pub fnn_fraction: f64,
    pub warning: bool,
}

/// Fraction of false nearest neighbours when going from dimension `m` to
/// `m + 1` (Kennel criteria: distance ratio and attractor-size test).
pub fn fnn_fraction(series: &[f64], tau: usize, m: usize) -> f64 {
    if series.len() <= m * tau + 1 {
        return 1.0;
    }
    let n = series.len() - m * tau;
    let mean = series.iter().sum::<f64>() / series.len() as f64;
    let r_a = (series.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / series.len() as f64).sqrt();
    let coord = |i: usize, j: usize| series[i + j * tau];
    let mut false_count = 0usize;
    let mut counted = 0usize;
    for i in 0..n {
        let mut best = f64::INFINITY;
        let mut best_j = usize::MAX;
        for j in 0..n {
            if j == i {
                continue;
            }
            let mut d2 = 0.0;
            for c in 0..m {
                let diff = coord(i, c) - coord(j, c);
                d2 += diff * diff;
                if d2 >= best {
                    break;
                }
            }
            if d2 < best {
                best = d2;
                best_j = j;
            }
        }
        if best_j == usize::MAX {
            continue;
        }
        counted += 1;
        let extra = (coord(i, m) - coord(best_j, m)).abs();
        let r_m = best.sqrt();
        let r_next = (best + extra * extra).sqrt();
        let ratio_test = if r_m > 0.0 { extra / r_m > FNN_RATIO } else { extra > 0.0 };
        let size_test = r_a > 0.0 && r_next / r_a > FNN_ATTRACTOR_TOL;
        if ratio_test || size_test {
            false_count += 1;
        }
    }
    if counted == 0 { 1.0 } else { false_count as f64 / counted as f64 }
}

pub fn choose_m(series: &[f64], tau: usize, m_max: usize, fnn_threshold: f64) -> DimChoice {
    let m_max = m_max.max(2);
    let mut last = 1.0;
    for m in 1..=m_max {
        let f = fnn_fraction(series, tau, m);
        last = f;
        if f < fnn_threshold {
            return DimChoice { m: m.max(2), fnn_fraction: f, warning: false };
        }
    }
    log::warn!("false-nearest-neighbour fraction never fell below {fnn_threshold}");
    DimChoice { m: m_max, fnn_fraction: last, warning: true }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sliding_window_rows() {
        let s: Vec<f64> = (0..6).map(|v| v as f64).collect();
        let cfg = EmbeddingConfig { tau: 1, m: 3, observable: Axis::X, normalize: false };
        let pc = delay_embed(&s, &cfg).unwrap();
        assert_eq!(pc.len(), 4);
        assert_eq!(pc.point(0), &[0.0, 1.0, 2.0]);
        assert_eq!(pc.point(3), &[3.0, 4.0, 5.0]);
    }

    #[test]
    fn constant_series() {
        let s = vec![2.5; 40];
        let mut cfg = EmbeddingConfig { tau: 5, m: 3, observable: Axis::X, normalize: false };
        let pc = delay_embed(&s, &cfg).unwrap();
        assert!(pc.data.iter().all(|&v| v == 2.5));
        cfg.normalize = true;
        assert!(matches!(delay_embed(&s, &cfg), Err(Error::ZeroVariance(0))));
    }

    #[test]
    fn too_short() {
        let cfg = EmbeddingConfig { tau: 4, m: 3, observable: Axis::X, normalize: false };
        match delay_embed(&[1.0; 8], &cfg) {
            Err(Error::InsufficientData { needed, .. }) => assert_eq!(needed, 9),
            other => panic!("{other:?}"),
        }
    }
}
