//! Representative points: a topological stage that spreads points around
//! the dominant loop and a global stage that adds dense but distant points.

use crate::embedding::PointCloud;
use crate::error::{Error, Result};
use crate::linalg::quantile;
use crate::persistence::{circular_coordinates, PersistenceDiagram};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::TAU;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionConfig {
    pub k: usize,
    pub r: f64,
    pub alpha: f64,
    pub knn_k: usize,
    pub bins: usize,
    /// (angular entropy, geodesic spacing, density entropy, collision penalty).
    pub lambdas: (f64, f64, f64, f64),
    pub seed: u64,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        Self { k: 7, r: 0.6, alpha: 2.0, knn_k: 10, bins: 12, lambdas: (1.0, 1.0, 0.5, 2.0), seed: 0 }
    }
}

impl SelectionConfig {
    pub fn k_topo(&self) -> usize {
        (self.k as f64 * self.r).floor() as usize
    }

    pub fn validate(&self) -> Result<()> {
        let kt = self.k_topo();
        if !(self.r > 0.0 && self.r < 1.0) || kt < 1 || kt > self.k {
            return Err(Error::Invalid(format!("k = {} and r = {} give {kt} topological points", self.k, self.r)));
        }
        if self.bins < 4 {
            return Err(Error::Invalid("at least 4 angular bins are required".into()));
        }
        if self.alpha < 1.0 || self.knn_k == 0 {
            return Err(Error::Invalid("alpha must be >= 1 and knn_k positive".into()));
        }
        let (a, b, c, d) = self.lambdas;
        if [a, b, c, d].iter().any(|x| *x < 0.0) {
            return Err(Error::Invalid("selection weights must be nonnegative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Topo,
    Global,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepresentativeSet {
    pub indices: Vec<usize>,
    pub provenance: Vec<Provenance>,
    pub weights: Vec<f64>,
    pub angles: Vec<f64>,
    pub no_loop: bool,
}

impl RepresentativeSet {
    pub fn topo_positions(&self) -> Vec<usize> {
        (0..self.indices.len()).filter(|&k| self.provenance[k] == Provenance::Topo).collect()
    }
}

/// Gaussian-kernel density raised to alpha - 1 and normalized; the
/// bandwidth is the 10th percentile of pairwise distances.
pub fn density(cloud: &PointCloud) -> Result<(Vec<f64>, f64)> {
    let n = cloud.len();
    if n < 2 {
        return Err(Error::InsufficientData { needed: 2, got: n });
    }
    let d = cloud.distance_matrix();
    let mut pairs = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            pairs.push(d[i * n + j]);
        }
    }
    let h = quantile(&pairs, 0.1);
    if !(h > 0.0) {
        return Err(Error::DegenerateBandwidth);
    }
    let norm = n as f64 * h.powi(cloud.dim as i32);
    let rho = (0..n)
        .map(|i| (0..n).map(|j| (-d[i * n + j].powi(2) / (2.0 * h * h)).exp()).sum::<f64>() / norm)
        .collect();
    Ok((rho, h))
}

pub fn density_weights(cloud: &PointCloud, alpha: f64) -> Result<Vec<f64>> {
    let (rho, _) = density(cloud)?;
    let w: Vec<f64> = rho.iter().map(|r| r.powf(alpha - 1.0)).collect();
    let s: f64 = w.iter().sum();
    Ok(w.iter().map(|x| x / s).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Candidates {
    pub indices: Vec<usize>,
    pub no_loop: bool,
    pub r_mid: Option<f64>,
}

/// Points whose neighbour count at the mid-life radius of the dominant
/// loop lies strictly between N_min = floor(0.02 N) and
/// N_max = max(N_min + 5, floor(0.10 N)).
pub fn candidate_set(cloud: &PointCloud, diag: &PersistenceDiagram) -> Result<Candidates> {
    let n = cloud.len();
    let best = diag.most_persistent(1).filter(|p| p.is_finite());
    let Some(pair) = best else {
        return Ok(Candidates { indices: (0..n).collect(), no_loop: true, r_mid: None });
    };
    let r_mid = 0.5 * (pair.birth + pair.death);
    let n_min = (0.02 * n as f64).floor() as usize;
    let n_max = (n_min + 5).max((0.10 * n as f64).floor() as usize);
    let d = cloud.distance_matrix();
    let indices: Vec<usize> = (0..n)
        .filter(|&i| {
            let nu = (0..n).filter(|&j| d[i * n + j] < r_mid).count();
            nu > n_min && nu < n_max
        })
        .collect();
    if indices.is_empty() {
        return Err(Error::SelectionInfeasible(format!(
            "no point has between {n_min} and {n_max} neighbours at r_mid = {r_mid:.4}; relax the thresholds"
        )));
    }
    Ok(Candidates { indices, no_loop: false, r_mid: Some(r_mid) })
}

#[derive(PartialEq)]
struct Entry(f64, usize);

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Symmetrized k-nearest-neighbour graph with Euclidean edge lengths.
pub fn knn_graph(cloud: &PointCloud, k: usize) -> Vec<Vec<(usize, f64)>> {
    let n = cloud.len();
    let d = cloud.distance_matrix();
    let mut adj = vec![Vec::new(); n];
    for i in 0..n {
        let mut order: Vec<usize> = (0..n).filter(|&j| j != i).collect();
        order.sort_by(|&a, &b| d[i * n + a].total_cmp(&d[i * n + b]).then(a.cmp(&b)));
        for &j in order.iter().take(k) {
            adj[i].push((j, d[i * n + j]));
            adj[j].push((i, d[i * n + j]));
        }
    }
    for a in &mut adj {
        a.sort_by(|x, y| x.0.cmp(&y.0));
        a.dedup_by_key(|x| x.0);
    }
    adj
}

/// Shortest-path distances from `src`; unreachable vertices get +inf.
pub fn dijkstra(adj: &[Vec<(usize, f64)>], src: usize) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; adj.len()];
    dist[src] = 0.0;
    let mut heap = BinaryHeap::new();
    heap.push(Entry(0.0, src));
    while let Some(Entry(d, u)) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        for &(v, w) in &adj[u] {
            let nd = d + w;
            if nd < dist[v] {
                dist[v] = nd;
                heap.push(Entry(nd, v));
            }
        }
    }
    dist
}

/// Renyi entropy of order `alpha` (Shannon at alpha = 1) of a nonnegative vector.
pub fn renyi_entropy(p: &[f64], alpha: f64) -> f64 {
    let s: f64 = p.iter().sum();
    if s <= 0.0 {
        return 0.0;
    }
    if (alpha - 1.0).abs() < 1e-12 {
        -p.iter().map(|x| x / s).filter(|&q| q > 0.0).map(|q| q * q.ln()).sum::<f64>()
    } else {
        p.iter().map(|x| (x / s).powf(alpha)).sum::<f64>().ln() / (1.0 - alpha)
    }
}

fn angle_bin(theta: f64, bins: usize) -> usize {
    ((theta.rem_euclid(TAU) / TAU * bins as f64) as usize).min(bins - 1)
}

fn circ_dist(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

fn argmax(scores: impl Iterator<Item = (usize, f64)>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, s) in scores {
        match best {
            Some((_, b)) if !(s > b) => {}
            _ => best = Some((i, s)),
        }
    }
    best.map(|b| b.0)
}

/// Greedy maximization of the composite gain over `candidates`; `q` are
/// normalized density values used by the density-entropy term.
pub fn select_topological(
    cloud: &PointCloud,
    candidates: &[usize],
    weights: &[f64],
    q: &[f64],
    angles: &[f64],
    cfg: &SelectionConfig,
) -> Result<Vec<usize>> {
    if candidates.is_empty() {
        return Err(Error::SelectionInfeasible("empty candidate set".into()));
    }
    let kt = cfg.k_topo().min(candidates.len());
    let (lt, ld, lq, lc) = cfg.lambdas;
    let first = argmax(candidates.iter().map(|&i| (i, weights[i]))).expect("non-empty");
    let mut selected = vec![first];
    let adj = knn_graph(cloud, cfg.knn_k);
    let mut geo = dijkstra(&adj, first);
    let mut hist = vec![0.0; cfg.bins];
    hist[angle_bin(angles[first], cfg.bins)] += 1.0;
    let min_sep = TAU / (1.35 * cfg.k_topo() as f64);
    while selected.len() < kt {
        let h0 = renyi_entropy(&hist, cfg.alpha);
        let pick = argmax(candidates.iter().filter(|i| !selected.contains(i)).map(|&j| {
            let mut h = hist.clone();
            h[angle_bin(angles[j], cfg.bins)] += 1.0;
            let gain_theta = renyi_entropy(&h, cfg.alpha) - h0;
            let mut qs: Vec<f64> = selected.iter().map(|&i| q[i]).collect();
            qs.push(q[j]);
            let h_q = renyi_entropy(&qs, cfg.alpha);
            let collisions = selected.iter().filter(|&&i| circ_dist(angles[i], angles[j]) < min_sep).count() as f64;
            let mut score = lt * gain_theta + lq * h_q - lc * collisions;
            if ld > 0.0 {
                score += ld * geo[j];
            }
            (j, score)
        }));
        let Some(j) = pick else { break };
        selected.push(j);
        hist[angle_bin(angles[j], cfg.bins)] += 1.0;
        for (g, d) in geo.iter_mut().zip(dijkstra(&adj, j)) {
            *g = g.min(d);
        }
    }
    Ok(selected)
}

/// Repeatedly add argmax of w_j (1 + d_min(x_j)) over unselected points.
pub fn select_global(cloud: &PointCloud, weights: &[f64], already: &[usize], k_global: usize) -> Vec<usize> {
    let n = cloud.len();
    let mut chosen: Vec<usize> = already.to_vec();
    let mut dmin: Vec<f64> = (0..n)
        .map(|j| chosen.iter().map(|&i| cloud.dist(i, j)).fold(f64::INFINITY, f64::min))
        .collect();
    let mut out = Vec::new();
    for _ in 0..k_global {
        let pick = argmax((0..n).filter(|j| !chosen.contains(j)).map(|j| {
            let d = if dmin[j].is_finite() { dmin[j] } else { 0.0 };
            (j, weights[j] * (1.0 + d))
        }));
        let Some(j) = pick else { break };
        chosen.push(j);
        out.push(j);
        for (m, dm) in dmin.iter_mut().enumerate() {
            *dm = dm.min(cloud.dist(j, m));
        }
    }
    out
}

pub fn select(cloud: &PointCloud, diag: &PersistenceDiagram, cfg: &SelectionConfig) -> Result<RepresentativeSet> {
    cfg.validate()?;
    if cloud.len() < cfg.k {
        return Err(Error::InsufficientData { needed: cfg.k, got: cloud.len() });
    }
    let (rho, _) = density(cloud)?;
    let weights = density_weights(cloud, cfg.alpha)?;
    let rs: f64 = rho.iter().sum();
    let q: Vec<f64> = rho.iter().map(|r| r / rs).collect();
    let cands = candidate_set(cloud, diag)?;
    let angles = circular_coordinates(cloud)?;
    let topo = select_topological(cloud, &cands.indices, &weights, &q, &angles, cfg)?;
    let global = select_global(cloud, &weights, &topo, cfg.k - topo.len());
    let mut indices = topo.clone();
    indices.extend(&global);
    if indices.len() != cfg.k {
        return Err(Error::SelectionInfeasible(format!("selected {} of {} points", indices.len(), cfg.k)));
    }
    let provenance = (0..indices.len()).map(|k| if k < topo.len() { Provenance::Topo } else { Provenance::Global }).collect();
    Ok(RepresentativeSet {
        weights: indices.iter().map(|&i| weights[i]).collect(),
        angles: indices.iter().map(|&i| angles[i]).collect(),
        indices,
        provenance,
        no_loop: cands.no_loop,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_one_is_uniform() {
        let pc = PointCloud::from_rows(&[vec![0.0], vec![0.1], vec![0.2], vec![5.0]]).unwrap();
        let w = density_weights(&pc, 1.0).unwrap();
        for x in w {
            assert!((x - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn identical_points_have_no_bandwidth() {
        let pc = PointCloud::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert!(matches!(density_weights(&pc, 2.0), Err(Error::DegenerateBandwidth)));
    }

    #[test]
    fn global_with_zero_budget_is_empty() {
        let pc = PointCloud::from_rows(&[vec![0.0], vec![1.0]]).unwrap();
        assert!(select_global(&pc, &[0.5, 0.5], &[0], 0).is_empty());
    }

    #[test]
    fn renyi_of_uniform_is_log_n() {
        assert!((renyi_entropy(&[1.0; 8], 2.0) - 8f64.ln()).abs() < 1e-12);
        assert!((renyi_entropy(&[1.0; 8], 1.0) - 8f64.ln()).abs() < 1e-12);
    }
}
