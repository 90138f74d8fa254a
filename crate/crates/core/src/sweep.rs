//! Rho sweep: the full point-cloud-to-spectrum pipeline per grid point and
//! the diagnostics compared across the grid.

use crate::complex::Complex;
use crate::dynamics::{integrate, lyapunov_max, Axis, LorenzParams};
use crate::embedding::{choose_m, choose_tau, delay_embed, EmbeddingConfig};
use crate::error::{Error, Result};
use crate::hodge::complex_laplacian;
use crate::io::fmt_f64;
use crate::linalg::{rank, sym_eigen};
use crate::persistence::{compute_persistence, enclosing_radius, max_h1_persistence, rips_filtration};
use crate::selection::{select, SelectionConfig};
use crate::probe::{apply_register_phases, dephase_average, edge_register_state, random_phases};
use crate::qcompile::EvolutionConfig;
use crate::spectro::{
    correlator_exact, correlator_hadamard, estimate, periodogram, spectrum_entropy, CorrelatorSeries, Ensemble, EstimateConfig,
    HadamardConfig,
};
use crate::susy::susy_hamiltonian;
use crate::topograph::{EdgeConfig, TopoGraph, TriangleMode};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Shannon entropy of the normalized Hann periodogram of a correlator.
pub fn spectral_entropy(series: &CorrelatorSeries) -> Result<f64> {
    spectrum_entropy(&periodogram(series)?)
}

/// Central second difference; endpoints are absent.
pub fn curvature(e0: &[f64], d_rho: f64) -> Vec<Option<f64>> {
    let n = e0.len();
    (0..n)
        .map(|k| {
            if k == 0 || k + 1 >= n {
                None
            } else {
                Some((e0[k + 1] - 2.0 * e0[k] + e0[k - 1]) / (d_rho * d_rho))
            }
        })
        .collect()
}

/// |<v0|v1>| for unit vectors; taking the modulus is the phase alignment
/// that maximizes the real part of the overlap.
pub fn fidelity(v0: &[f64], v1: &[f64]) -> Result<f64> {
    if v0.len() != v1.len() {
        return Err(Error::Shape(format!("vectors of length {} and {}", v0.len(), v1.len())));
    }
    let dot: f64 = v0.iter().zip(v1).map(|(a, b)| a * b).sum();
    Ok(dot.abs().min(1.0))
}

/// Cosine of the smallest principal angle between two subspaces given by
/// orthonormal columns.
pub fn subspace_fidelity(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<f64> {
    if a.nrows() != b.nrows() {
        return Err(Error::Shape("subspaces live in different spaces".into()));
    }
    if a.ncols() == 0 || b.ncols() == 0 {
        return Ok(0.0);
    }
    let m = a.transpose() * b;
    Ok(m.singular_values().iter().cloned().fold(0.0, f64::max).min(1.0))
}

/// Savitzky-Golay smoothing with a 5-point window and quadratic fit; the
/// two samples at each end use the fit of the nearest full window.
pub fn savgol5(y: &[f64]) -> Vec<f64> {
    let n = y.len();
    if n < 5 {
        return y.to_vec();
    }
    let fit_at = |start: usize, x: f64| -> f64 {
        // Least-squares quadratic over offsets -2..=2 evaluated at x.
        let ys: Vec<f64> = (0..5).map(|k| y[start + k]).collect();
        let xs = [-2.0, -1.0, 0.0, 1.0, 2.0];
        let s0: f64 = ys.iter().sum();
        let s1: f64 = xs.iter().zip(&ys).map(|(a, b)| a * b).sum();
        let s2: f64 = xs.iter().zip(&ys).map(|(a, b)| a * a * b).sum();
        // Normal equations for c0 + c1 x + c2 x^2 with sum x^2 = 10, sum x^4 = 34.
        let c2 = (5.0 * s2 - 10.0 * s0) / (5.0 * 34.0 - 100.0);
        let c0 = (s0 - 10.0 * c2) / 5.0;
        let c1 = s1 / 10.0;
        c0 + c1 * x + c2 * x * x
    };
    (0..n)
        .map(|k| {
            if k < 2 {
                fit_at(0, k as f64 - 2.0)
            } else if k + 2 >= n {
                fit_at(n - 5, k as f64 - (n - 3) as f64)
            } else {
                (-3.0 * y[k - 2] + 12.0 * y[k - 1] + 17.0 * y[k] + 12.0 * y[k + 1] - 3.0 * y[k + 2]) / 35.0
            }
        })
        .collect()
}

pub fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len();
    if n < 2 || b.len() != n {
        return None;
    }
    let (ma, mb) = (a.iter().sum::<f64>() / n as f64, b.iter().sum::<f64>() / n as f64);
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    if va <= 0.0 || vb <= 0.0 {
        return None;
    }
    Some(cov / (va * vb).sqrt())
}

/// Average ranks (ties share the mean rank).
pub fn ranks(a: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..a.len()).collect();
    idx.sort_by(|&i, &j| a[i].total_cmp(&a[j]));
    let mut r = vec![0.0; a.len()];
    let mut k = 0;
    while k < idx.len() {
        let mut e = k;
        while e + 1 < idx.len() && a[idx[e + 1]] == a[idx[k]] {
            e += 1;
        }
        let avg = (k + e) as f64 / 2.0 + 1.0;
        for &i in &idx[k..=e] {
            r[i] = avg;
        }
        k = e + 1;
    }
    r
}

pub fn spearman(a: &[f64], b: &[f64]) -> Option<f64> {
    pearson(&ranks(a), &ranks(b))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    pub n: usize,
    pub pearson: Option<f64>,
    pub spearman: Option<f64>,
    pub pearson_p: Option<f64>,
    pub spearman_p: Option<f64>,
    pub pearson_ci: Option<(f64, f64)>,
    pub spearman_ci: Option<(f64, f64)>,
}

/// Correlations with two-sided permutation p-values and pair-bootstrap
/// percentile intervals.
pub fn correlate(a: &[f64], b: &[f64], resamples: usize, seed: u64) -> Correlation {
    let n = a.len();
    let pr = pearson(a, b);
    let sr = spearman(a, b);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let perm_p = |stat: &dyn Fn(&[f64], &[f64]) -> Option<f64>, obs: Option<f64>, rng: &mut ChaCha8Rng| -> Option<f64> {
        let obs = obs?;
        let mut hits = 0usize;
        let mut perm = b.to_vec();
        for _ in 0..resamples {
            for i in (1..n).rev() {
                let j = rng.gen_range(0..=i);
                perm.swap(i, j);
            }
            if stat(a, &perm).map_or(false, |r| r.abs() >= obs.abs() - 1e-12) {
                hits += 1;
            }
        }
        Some((hits as f64 + 1.0) / (resamples as f64 + 1.0))
    };
    let pearson_p = perm_p(&pearson, pr, &mut rng);
    let spearman_p = perm_p(&spearman, sr, &mut rng);
    let mut boot_p = Vec::new();
    let mut boot_s = Vec::new();
    for _ in 0..resamples {
        let idx: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
        let (xa, xb): (Vec<f64>, Vec<f64>) = idx.iter().map(|&i| (a[i], b[i])).unzip();
        if let Some(r) = pearson(&xa, &xb) {
            boot_p.push(r);
        }
        if let Some(r) = spearman(&xa, &xb) {
            boot_s.push(r);
        }
    }
    let ci = |v: &[f64]| {
        if v.len() < 2 {
            None
        } else {
            Some((crate::linalg::quantile(v, 0.025), crate::linalg::quantile(v, 0.975)))
        }
    };
    Correlation {
        n,
        pearson: pr,
        spearman: sr,
        pearson_p,
        spearman_p,
        pearson_ci: pr.and(ci(&boot_p)),
        spearman_ci: sr.and(ci(&boot_s)),
    }
}

/// How correlators are produced: exact diagonal-ensemble evaluation of L1,
/// or the simulated Hadamard test on the compiled SUSY evolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Exact,
    Hadamard,
}

impl Mode {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "exact" => Some(Self::Exact),
            "hadamard" => Some(Self::Hadamard),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Exact => "exact",
            Self::Hadamard => "hadamard",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub mode: Mode,
    /// Shots per basis in Hadamard mode; 0 reads exact expectations.
    pub shots: usize,
    pub trotter: EvolutionConfig,
    /// Random-phase probe copies averaged in Hadamard mode.
    pub dephase_samples: usize,
    pub sigma: f64,
    pub beta: f64,
    pub x0: [f64; 3],
    pub dt: f64,
    pub t_trans: f64,
    /// Length of the recorded segment after the transient.
    pub t_len: f64,
    pub observable: Axis,
    /// Fixed delay and dimension; `None` selects them from the series.
    pub tau: Option<usize>,
    pub m: Option<usize>,
    pub max_lag: usize,
    pub m_max: usize,
    pub fnn_threshold: f64,
    pub normalize: bool,
    /// Keep every `stride`-th embedded point.
    pub stride: usize,
    pub selection: SelectionConfig,
    pub edges: EdgeConfig,
    pub corr_samples: usize,
    pub corr_dt: f64,
    pub alpha: f64,
    pub estimate: EstimateConfig,
    pub lyap_t_total: f64,
    pub lyap_renorm_every: usize,
    pub seed: u64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Exact,
            shots: 0,
            trotter: EvolutionConfig { order: 2, steps: 2, alpha: 1.0 },
            dephase_samples: 16,
            sigma: 10.0,
            beta: 8.0 / 3.0,
            x0: [1.0, 1.0, 1.0],
            dt: 0.01,
            t_trans: 20.0,
            t_len: 50.0,
            observable: Axis::X,
            tau: None,
            m: None,
            max_lag: 100,
            m_max: 6,
            fnn_threshold: 0.01,
            normalize: true,
            stride: 20,
            selection: SelectionConfig::default(),
            edges: EdgeConfig::default(),
            corr_samples: 256,
            corr_dt: 0.25,
            alpha: 1.0,
            estimate: EstimateConfig { bootstrap: 50, ..EstimateConfig::default() },
            lyap_t_total: 200.0,
            lyap_renorm_every: 10,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub rho: f64,
    pub failed_stage: Option<String>,
    pub tau: Option<usize>,
    pub m: Option<usize>,
    pub n_points: Option<usize>,
    pub lambda_max: Option<f64>,
    pub ell_max_h1: Option<f64>,
    pub n_edges: Option<usize>,
    pub n_triangles: Option<usize>,
    pub beta1: Option<usize>,
    pub beta1_hat: Option<usize>,
    pub delta1_classical: Option<f64>,
    pub delta1_susy_sim: Option<f64>,
    pub h_spec: Option<f64>,
    pub e0: Option<f64>,
    pub gamma: Option<f64>,
    pub f_curvature: Option<f64>,
    pub fidelity_to_next: Option<f64>,
    /// Ground space of H in the space of representative pairs.
    pub ground: Option<DMatrix<f64>>,
}

impl SweepRecord {
    fn empty(rho: f64) -> Self {
        Self {
            rho,
            failed_stage: None,
            tau: None,
            m: None,
            n_points: None,
            lambda_max: None,
            ell_max_h1: None,
            n_edges: None,
            n_triangles: None,
            beta1: None,
            beta1_hat: None,
            delta1_classical: None,
            delta1_susy_sim: None,
            h_spec: None,
            e0: None,
            gamma: None,
            f_curvature: None,
            fidelity_to_next: None,
            ground: None,
        }
    }
}

fn stage<T>(rec: &mut SweepRecord, name: &str, r: Result<T>) -> Option<T> {
    match r {
        Ok(v) => Some(v),
        Err(e) => {
            log::warn!("rho = {}: stage {name} failed: {e}", rec.rho);
            rec.failed_stage = Some(format!("{name}: {e}"));
            None
        }
    }
}

/// Index of pair (i, j), i < j, among the C(k, 2) pairs of k labels.
pub fn pair_index(i: usize, j: usize, k: usize) -> usize {
    i * (2 * k - i - 1) / 2 + (j - i - 1)
}

/// Embed edge-space vectors into the fixed pair space of k representative labels.
fn embed_edges(c: &Complex, k: usize, v: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(k * (k - 1) / 2, v.ncols());
    for (e, edge) in c.edges.iter().enumerate() {
        let p = pair_index(edge[0], edge[1], k);
        for col in 0..v.ncols() {
            out[(p, col)] = v[(e, col)];
        }
    }
    out
}

/// One grid point of the pipeline; failures are recorded, not raised.
pub fn run_point(rho: f64, cfg: &SweepConfig) -> SweepRecord {
    let mut rec = SweepRecord::empty(rho);
    let Some(params) = stage(&mut rec, "lorenz", LorenzParams::new(cfg.sigma, rho, cfg.beta)) else { return rec };
    if let Some(l) = stage(&mut rec, "lyapunov", lyapunov_max(&params, cfg.x0, cfg.dt, cfg.lyap_t_total, cfg.lyap_renorm_every)) {
        rec.lambda_max = Some(l.lambda_max);
    }
    let Some(traj) = stage(&mut rec, "integrate", integrate(&params, cfg.x0, cfg.dt, cfg.t_trans, cfg.t_trans + cfg.t_len)) else {
        return rec;
    };
    let series = traj.observable(cfg.observable);
    let tau = cfg.tau.unwrap_or_else(|| choose_tau(&series, cfg.max_lag).tau);
    let m = cfg.m.unwrap_or_else(|| choose_m(&series, tau, cfg.m_max, cfg.fnn_threshold).m);
    rec.tau = Some(tau);
    rec.m = Some(m);
    let ecfg = EmbeddingConfig { tau, m, observable: cfg.observable, normalize: cfg.normalize };
    let Some(full) = stage(&mut rec, "embed", delay_embed(&series, &ecfg)) else { return rec };
    let idx: Vec<usize> = (0..full.len()).step_by(cfg.stride.max(1)).collect();
    let cloud = full.subset(&idx);
    rec.n_points = Some(cloud.len());
    let Some(filt) = stage(&mut rec, "persistence", rips_filtration(&cloud, enclosing_radius(&cloud), 2)) else { return rec };
    let diag = compute_persistence(&filt);
    rec.ell_max_h1 = Some(max_h1_persistence(&diag));
    let mut scfg = cfg.selection.clone();
    scfg.seed = cfg.seed;
    let Some(rep) = stage(&mut rec, "select", select(&cloud, &diag, &scfg)) else { return rec };
    let pts = cloud.subset(&rep.indices);
    let mut ecfg = cfg.edges.clone();
    if ecfg.use_ring && ecfg.ring_vertices.is_none() {
        ecfg.ring_vertices = Some(rep.topo_positions());
    }
    let Some(graph) = stage(&mut rec, "graph", TopoGraph::build(&pts, Some(&rep.angles), &ecfg, TriangleMode::All3Cliques)) else {
        return rec;
    };
    let c = &graph.complex;
    rec.n_edges = Some(c.edges.len());
    rec.n_triangles = Some(c.triangles.len());
    let l1 = complex_laplacian(c, 1);
    let (vals, vecs) = sym_eigen(&l1);
    let scale = vals.last().copied().unwrap_or(0.0).max(1.0);
    let tol = 1e-8 * scale;
    let beta1 = vals.iter().filter(|&&v| v.abs() <= tol).count();
    rec.beta1 = Some(beta1);
    rec.delta1_classical = vals.iter().copied().find(|&v| v > tol);
    let e0 = vals.first().copied().unwrap_or(0.0);
    rec.e0 = Some(e0);
    rec.gamma = vals.iter().copied().find(|&v| v > e0 + tol).map(|e1| e1 - e0).or(Some(0.0));
    let ground_cols: Vec<usize> = (0..vals.len()).filter(|&k| vals[k] <= e0 + tol).collect();
    let g = DMatrix::from_fn(vals.len(), ground_cols.len(), |r, cidx| vecs[(r, ground_cols[cidx])]);
    rec.ground = Some(embed_edges(c, pts.len(), &g));
    let Some(corr) = stage(&mut rec, "correlator", correlator(c, &l1, cfg)) else { return rec };
    rec.h_spec = stage(&mut rec, "entropy", spectral_entropy(&corr));
    let mut est_cfg = cfg.estimate.clone();
    est_cfg.count_dim = Some(c.edges.len());
    est_cfg.seed = cfg.seed;
    if let Some(est) = stage(&mut rec, "estimate", estimate(&corr, None, &est_cfg)) {
        rec.beta1_hat = Some(est.beta1_hat);
        rec.delta1_susy_sim = est.gap_hat;
    }
    rec
}

fn correlator(c: &Complex, l1: &DMatrix<f64>, cfg: &SweepConfig) -> Result<CorrelatorSeries> {
    match cfg.mode {
        Mode::Exact => {
            let pops = vec![1.0 / c.edges.len() as f64; c.edges.len()];
            correlator_exact(l1, Ensemble::Diagonal(&pops), cfg.corr_samples, cfg.corr_dt, cfg.alpha)
        }
        Mode::Hadamard => {
            let h = susy_hamiltonian(&c.adjacency())?;
            let probe = edge_register_state(c.n_vertices, &c.edges)?;
            // Enough Trotter steps to keep every per-step phase below pi.
            let need = (h.norm_bound() * cfg.corr_dt / (cfg.alpha * std::f64::consts::PI)).floor() as usize + 1;
            let evolution = EvolutionConfig { alpha: cfg.alpha, steps: cfg.trotter.steps.max(need), ..cfg.trotter };
            let hcfg = HadamardConfig { evolution, shots: cfg.shots };
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let mut runs = Vec::new();
            for _ in 0..cfg.dephase_samples.max(1) {
                let phases = random_phases(c.n_vertices, &mut rng);
                let psi = apply_register_phases(&probe, &phases);
                runs.push(correlator_hadamard(&h, &psi, cfg.corr_samples, cfg.corr_dt, &hcfg, &mut rng)?.values);
            }
            Ok(CorrelatorSeries { dt: cfg.corr_dt, values: dephase_average(&runs)?, shots: cfg.shots, alpha: cfg.alpha })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub records: Vec<SweepRecord>,
    pub correlation: Correlation,
    pub argmax_ell: Option<f64>,
    pub argmax_gap: Option<f64>,
}

fn argmax_rho(records: &[SweepRecord], f: impl Fn(&SweepRecord) -> Option<f64>) -> Option<f64> {
    let mut best: Option<(f64, f64)> = None;
    for r in records {
        if let Some(v) = f(r) {
            if best.map_or(true, |b| v > b.1) {
                best = Some((r.rho, v));
            }
        }
    }
    best.map(|b| b.0)
}

pub fn run_sweep(grid: &[f64], cfg: &SweepConfig) -> Result<SweepResult> {
    resume_sweep(grid, cfg, &[])
}

/// Like [`run_sweep`], reusing completed records whose rho is on the grid.
/// Cross-grid columns are always recomputed.
pub fn resume_sweep(grid: &[f64], cfg: &SweepConfig, done: &[SweepRecord]) -> Result<SweepResult> {
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Invalid("rho grid must be strictly increasing".into()));
    }
    if grid.is_empty() {
        log::warn!("empty rho grid");
    }
    let mut records: Vec<SweepRecord> = grid
        .par_iter()
        .map(|&rho| match done.iter().find(|r| r.rho == rho && r.failed_stage.is_none()) {
            Some(r) => SweepRecord { f_curvature: None, fidelity_to_next: None, ..r.clone() },
            None => run_point(rho, cfg),
        })
        .collect();
    let n = records.len();
    let uniform = n >= 3 && grid.windows(2).all(|w| ((w[1] - w[0]) - (grid[1] - grid[0])).abs() < 1e-9);
    if uniform {
        let d = grid[1] - grid[0];
        for k in 1..n.saturating_sub(1) {
            if let (Some(a), Some(b), Some(c)) = (records[k - 1].e0, records[k].e0, records[k + 1].e0) {
                records[k].f_curvature = curvature(&[a, b, c], d)[1];
            }
        }
    }
    for k in 0..n.saturating_sub(1) {
        let f = match (&records[k].ground, &records[k + 1].ground) {
            (Some(a), Some(b)) => subspace_fidelity(a, b).ok(),
            _ => None,
        };
        records[k].fidelity_to_next = f;
    }
    let (ell, gap): (Vec<f64>, Vec<f64>) = records
        .iter()
        .filter_map(|r| Some((r.ell_max_h1?, r.delta1_susy_sim?)))
        .unzip();
    let correlation = correlate(&ell, &gap, 1000, cfg.seed);
    Ok(SweepResult {
        argmax_ell: argmax_rho(&records, |r| r.ell_max_h1),
        argmax_gap: argmax_rho(&records, |r| r.delta1_susy_sim),
        records,
        correlation,
    })
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

fn opt_u(v: Option<usize>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub const SWEEP_COLUMNS: [&str; 20] = [
    "rho",
    "status",
    "tau",
    "m",
    "n_points",
    "lambda_max",
    "ell_max_h1",
    "n_edges",
    "n_triangles",
    "beta1",
    "beta1_hat",
    "delta1_classical",
    "delta1_susy_sim",
    "h_spec",
    "e0",
    "gamma",
    "f_curvature",
    "fidelity_to_next",
    "ell_max_h1_smooth",
    "delta1_susy_sim_smooth",
];

pub fn records_csv(records: &[SweepRecord]) -> String {
    let smooth = |f: &dyn Fn(&SweepRecord) -> Option<f64>| -> Vec<Option<f64>> {
        let vals: Vec<Option<f64>> = records.iter().map(f).collect();
        if vals.iter().all(Option::is_some) {
            savgol5(&vals.iter().map(|v| v.unwrap()).collect::<Vec<_>>()).into_iter().map(Some).collect()
        } else {
            vec![None; vals.len()]
        }
    };
    let s_ell = smooth(&|r| r.ell_max_h1);
    let s_gap = smooth(&|r| r.delta1_susy_sim);
    let rows: Vec<Vec<String>> = records
        .iter()
        .enumerate()
        .map(|(k, r)| {
            vec![
                fmt_f64(r.rho),
                r.failed_stage.as_deref().map(|s| format!("failed:{}", s.replace(',', ";"))).unwrap_or_else(|| "ok".into()),
                opt_u(r.tau),
                opt_u(r.m),
                opt_u(r.n_points),
                opt(r.lambda_max),
                opt(r.ell_max_h1),
                opt_u(r.n_edges),
                opt_u(r.n_triangles),
                opt_u(r.beta1),
                opt_u(r.beta1_hat),
                opt(r.delta1_classical),
                opt(r.delta1_susy_sim),
                opt(r.h_spec),
                opt(r.e0),
                opt(r.gamma),
                opt(r.f_curvature),
                opt(r.fidelity_to_next),
                opt(s_ell[k]),
                opt(s_gap[k]),
            ]
        })
        .collect();
    crate::io::csv(&SWEEP_COLUMNS, &rows)
}

/// Ground-space rank check used by tests: the kernel of a Laplacian has the
/// dimension of its zero eigenvalues.
pub fn kernel_dim(l: &DMatrix<f64>) -> usize {
    l.nrows() - rank(l, 1e-10)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curvature_of_linear_is_zero_and_quadratic_is_two() {
        let lin: Vec<f64> = (0..6).map(|k| 3.0 * k as f64 + 1.0).collect();
        for c in curvature(&lin, 1.0).into_iter().flatten() {
            assert_eq!(c, 0.0);
        }
        let quad: Vec<f64> = (0..6).map(|k| (k as f64 * 0.5).powi(2)).collect();
        for c in curvature(&quad, 0.5).into_iter().flatten() {
            assert!((c - 2.0).abs() < 1e-12);
        }
        let c = curvature(&[1.0, 0.5, 0.0], 1.0);
        assert_eq!(c[0], None);
        assert_eq!(c[2], None);
    }

    #[test]
    fn kink_spikes() {
        let e: Vec<f64> = (0..5).map(|k| (k as f64 * 0.5 - 1.0).abs()).collect();
        let c = curvature(&e, 0.5);
        assert!((c[2].unwrap() - 2.0 / 0.5).abs() < 1e-12);
        assert_eq!(c[1].unwrap(), 0.0);
    }

    #[test]
    fn fidelity_basics() {
        assert_eq!(fidelity(&[1.0, 0.0], &[1.0, 0.0]).unwrap(), 1.0);
        assert_eq!(fidelity(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        assert_eq!(fidelity(&[0.6, 0.8], &[-0.6, -0.8]).unwrap(), 1.0);
    }

    #[test]
    fn constant_series_has_no_correlation() {
        let c = correlate(&[1.0, 1.0, 1.0], &[0.1, 0.5, 0.2], 50, 0);
        assert!(c.pearson.is_none() && c.spearman.is_none() && c.pearson_p.is_none());
    }

    #[test]
    fn savgol_preserves_quadratics() {
        let y: Vec<f64> = (0..9).map(|k| 0.3 * (k as f64).powi(2) - k as f64 + 2.0).collect();
        for (a, b) in savgol5(&y).iter().zip(&y) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn pair_indices_are_dense() {
        let mut seen = vec![false; 21];
        for i in 0..7 {
            for j in i + 1..7 {
                seen[pair_index(i, j, 7)] = true;
            }
        }
        assert!(seen.iter().all(|&s| s));
    }
}
