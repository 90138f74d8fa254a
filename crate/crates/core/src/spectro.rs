//! Correlator time series and their spectral analysis: exact and
//! Hadamard-test correlators, Hann periodograms with quadratic peak
//! refinement, matrix-pencil line recovery, zero-mode detection and the
//! combined gap estimate.

use crate::error::{Error, Result};
use crate::io::{csv, fmt_f64};
use crate::linalg::{median, quantile, sym_eigen};
use crate::qcompile::{controlled_evolution, EvolutionConfig, Gate, GateKind, StateVector};
use crate::susy::PauliHamiltonian;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelatorSeries {
    pub dt: f64,
    pub values: Vec<Complex64>,
    /// Shots per point; 0 means exact expectations.
    pub shots: usize,
    pub alpha: f64,
}

impl CorrelatorSeries {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let rows: Vec<Vec<String>> = self
            .values
            .iter()
            .enumerate()
            .map(|(k, c)| vec![fmt_f64(k as f64 * self.dt), fmt_f64(c.re), fmt_f64(c.im)])
            .collect();
        csv(&["t", "re", "im"], &rows)
    }
}

#[derive(Debug, Clone, Copy)]
pub enum Ensemble<'a> {
    Pure(&'a [Complex64]),
    /// Diagonal density matrix given by its populations.
    Diagonal(&'a [f64]),
}

/// Eigenvalues of H and the weights a_j with C(t) = sum_j a_j exp(-i lambda_j t).
pub fn line_weights(h: &DMatrix<f64>, ens: Ensemble<'_>) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = h.nrows();
    if h.ncols() != n {
        return Err(Error::Shape(format!("{}x{} matrix is not square", n, h.ncols())));
    }
    let scale = h.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    if (h - h.transpose()).iter().any(|v| v.abs() > 1e-10 * scale) {
        return Err(Error::Invalid("correlator Hamiltonian is not symmetric".into()));
    }
    let (vals, vecs) = sym_eigen(h);
    let weights = match ens {
        Ensemble::Pure(psi) => {
            if psi.len() != n {
                return Err(Error::Shape(format!("probe of length {} for dimension {n}", psi.len())));
            }
            (0..n)
                .map(|j| (0..n).map(|b| psi[b] * vecs[(b, j)]).sum::<Complex64>().norm_sqr())
                .collect()
        }
        Ensemble::Diagonal(p) => {
            if p.len() != n {
                return Err(Error::Shape(format!("{} populations for dimension {n}", p.len())));
            }
            (0..n).map(|j| (0..n).map(|b| p[b] * vecs[(b, j)].powi(2)).sum()).collect()
        }
    };
    Ok((vals, weights))
}

/// C(t_k) = sum_j a_j exp(-i lambda_j k dt / alpha), k = 0..m.
pub fn correlator_exact(h: &DMatrix<f64>, ens: Ensemble<'_>, m: usize, dt: f64, alpha: f64) -> Result<CorrelatorSeries> {
    if !(dt > 0.0 && alpha > 0.0) {
        return Err(Error::Invalid("dt and alpha must be positive".into()));
    }
    let (vals, weights) = line_weights(h, ens)?;
    let radius = vals.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let ratio = radius * dt / alpha;
    if ratio >= PI {
        return Err(Error::Aliasing { ratio, min_alpha: radius * dt / PI });
    }
    let values = (0..m)
        .map(|k| {
            let t = k as f64 * dt / alpha;
            vals.iter().zip(&weights).map(|(l, a)| Complex64::from_polar(*a, -l * t)).sum()
        })
        .collect();
    Ok(CorrelatorSeries { dt, values, shots: 0, alpha })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HadamardConfig {
    /// Trotter configuration for one time step dt.
    pub evolution: EvolutionConfig,
    pub shots: usize,
}

fn ancilla_expectation<R: Rng>(sv: &StateVector, anc: usize, y_basis: bool, shots: usize, rng: &mut R) -> Result<f64> {
    let mut s = sv.clone();
    if y_basis {
        s.apply(&Gate::single(GateKind::Sdg, anc));
    }
    s.apply(&Gate::h(anc));
    let p0 = s.prob_zero(anc).clamp(0.0, 1.0);
    if shots == 0 {
        return Ok(2.0 * p0 - 1.0);
    }
    let dist = rand_distr::Binomial::new(shots as u64, p0).map_err(|e| Error::Internal(e.to_string()))?;
    let k = rng.sample(dist) as f64;
    Ok(2.0 * k / shots as f64 - 1.0)
}

/// Hadamard test on the compiled controlled evolution. The ancilla starts
/// in |+>, the controlled step for dt is applied k times for t_k = k dt,
/// and C = <X> + i <Y> is read from the X basis and the S^dagger-then-X
/// basis.
pub fn correlator_hadamard<R: Rng>(
    h: &PauliHamiltonian,
    probe: &[Complex64],
    m: usize,
    dt: f64,
    cfg: &HadamardConfig,
    rng: &mut R,
) -> Result<CorrelatorSeries> {
    let n = h.n;
    if n + 2 > 16 {
        return Err(Error::Resource(format!("Hadamard test needs {} qubits, limit is 16", n + 2)));
    }
    if probe.len() != 1 << n {
        return Err(Error::Shape(format!("probe of length {} for {n} qubits", probe.len())));
    }
    let (circ, _) = controlled_evolution(h, dt, &cfg.evolution)?;
    let anc = n;
    let mut amps = vec![Complex64::new(0.0, 0.0); 1 << (n + 2)];
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for (b, &a) in probe.iter().enumerate() {
        amps[b] = a * s;
        amps[b | (1 << anc)] = a * s;
    }
    let mut sv = StateVector::from_amps(n + 2, amps)?;
    let mut values = Vec::with_capacity(m);
    for k in 0..m {
        if k > 0 {
            sv.run(&circ)?;
        }
        let x = ancilla_expectation(&sv, anc, false, cfg.shots, rng)?;
        let y = ancilla_expectation(&sv, anc, true, cfg.shots, rng)?;
        values.push(Complex64::new(x, y));
    }
    Ok(CorrelatorSeries { dt, values, shots: cfg.shots, alpha: cfg.evolution.alpha })
}

/// Per-component standard error of a shot-estimated correlator point.
pub fn shot_noise_se(c_abs: f64, shots: usize) -> f64 {
    ((1.0 - c_abs * c_abs).max(0.0) / shots as f64).sqrt()
}

pub fn hann(m: usize) -> Vec<f64> {
    if m == 1 {
        return vec![1.0];
    }
    (0..m).map(|k| 0.5 * (1.0 - (2.0 * PI * k as f64 / (m as f64 - 1.0)).cos())).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub dt: f64,
    /// Signed angular frequencies in FFT order.
    pub omega: Vec<f64>,
    pub power: Vec<f64>,
    pub window_sum: f64,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.power.len()
    }

    pub fn is_empty(&self) -> bool {
        self.power.is_empty()
    }

    pub fn d_omega(&self) -> f64 {
        2.0 * PI / (self.len() as f64 * self.dt)
    }

    pub fn nyquist(&self) -> f64 {
        PI / self.dt
    }

    pub fn to_csv(&self) -> String {
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.sort_by(|&a, &b| self.omega[a].total_cmp(&self.omega[b]));
        let rows: Vec<Vec<String>> = idx.iter().map(|&k| vec![fmt_f64(self.omega[k]), fmt_f64(self.power[k])]).collect();
        csv(&["omega", "power"], &rows)
    }
}

/// P(omega_l) = |sum_m w_m C(t_m) exp(+i omega_l t_m)|^2 with Hann weights,
/// omega_l = 2 pi l / (M dt) folded to (-Nyquist, Nyquist].
pub fn periodogram(series: &CorrelatorSeries) -> Result<Spectrum> {
    let m = series.len();
    if m < 8 {
        return Err(Error::InsufficientData { needed: 8, got: m });
    }
    let w = hann(m);
    let mut buf: Vec<Complex64> = series.values.iter().zip(&w).map(|(c, w)| c * w).collect();
    let mut planner = rustfft::FftPlanner::new();
    planner.plan_fft_inverse(m).process(&mut buf);
    let d = 2.0 * PI / (m as f64 * series.dt);
    let omega = (0..m).map(|l| if 2 * l <= m { l as f64 * d } else { (l as f64 - m as f64) * d }).collect();
    Ok(Spectrum { dt: series.dt, omega, power: buf.iter().map(|z| z.norm_sqr()).collect(), window_sum: w.iter().sum() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Fft,
    Prony,
    Consensus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Line {
    /// Phase frequency (per unit of t).
    pub omega: f64,
    pub power: f64,
    /// Line weight estimate sqrt(power) / sum(window).
    pub amplitude: f64,
    pub method: Method,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakConfig {
    pub k_sigma: f64,
    /// Search band as fractions of Nyquist.
    pub band: (f64, f64),
    /// Peaks must also exceed this fraction of the strongest in-band power.
    pub rel_floor: f64,
    pub harmonic_guard: bool,
}

impl Default for PeakConfig {
    fn default() -> Self {
        Self { k_sigma: 3.0, band: (0.0, 0.8), rel_floor: 1e-2, harmonic_guard: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakReport {
    pub lines: Vec<Line>,
    pub threshold: f64,
    pub flat_fallback: bool,
    pub strongest_fallback: bool,
}

/// Offset in bins of the vertex of the parabola through (-1, a), (0, b), (1, c).
pub fn quadratic_offset(a: f64, b: f64, c: f64) -> f64 {
    let den = a - 2.0 * b + c;
    if den == 0.0 {
        0.0
    } else {
        (0.5 * (a - c) / den).clamp(-0.5, 0.5)
    }
}

/// Local maxima above the robust threshold inside the band, refined by a
/// three-point parabola on log power.
pub fn refine_peaks(spec: &Spectrum, cfg: &PeakConfig) -> PeakReport {
    let m = spec.len();
    let p = &spec.power;
    let med = median(p);
    let dev: Vec<f64> = p.iter().map(|x| (x - med).abs()).collect();
    let mad = median(&dev);
    let (mut threshold, flat) = if mad > 0.0 {
        (med + 1.4826 * cfg.k_sigma * mad, false)
    } else {
        let mean = p.iter().sum::<f64>() / m as f64;
        let sd = (p.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / m as f64).sqrt();
        (mean + 3.0 * sd, true)
    };
    let (lo, hi) = (cfg.band.0 * spec.nyquist(), cfg.band.1 * spec.nyquist());
    let in_band: Vec<usize> = (0..m).filter(|&l| spec.omega[l] >= lo - 1e-12 && spec.omega[l] <= hi + 1e-12).collect();
    let pmax = in_band.iter().map(|&l| p[l]).fold(0.0, f64::max);
    threshold = threshold.max(cfg.rel_floor * pmax);
    let maxima: Vec<usize> = in_band
        .iter()
        .copied()
        .filter(|&l| {
            let (a, c) = (p[(l + m - 1) % m], p[(l + 1) % m]);
            p[l] > a && p[l] >= c && p[l] > 0.0
        })
        .collect();
    let mut chosen: Vec<usize> = maxima.iter().copied().filter(|&l| p[l] >= threshold).collect();
    let mut strongest = false;
    if chosen.is_empty() {
        if let Some(&best) = maxima.iter().max_by(|&&a, &&b| p[a].total_cmp(&p[b])) {
            chosen.push(best);
            strongest = true;
        }
    }
    let d = spec.d_omega();
    let tiny = f64::MIN_POSITIVE;
    let mut lines: Vec<Line> = chosen
        .iter()
        .map(|&l| {
            let (a, b, c) = (p[(l + m - 1) % m].max(tiny).ln(), p[l].max(tiny).ln(), p[(l + 1) % m].max(tiny).ln());
            let delta = quadratic_offset(a, b, c);
            let peak = (b - 0.25 * (a - c) * delta).exp();
            let omega = spec.omega[l] + delta * d;
            Line { omega, power: peak, amplitude: peak.sqrt() / spec.window_sum, method: Method::Fft }
        })
        .collect();
    lines.sort_by(|a, b| a.omega.total_cmp(&b.omega));
    if cfg.harmonic_guard {
        let snapshot = lines.clone();
        lines.retain(|x| {
            !snapshot.iter().any(|y| {
                y.omega > 1.5 * d && y.power > x.power && (2..=4).any(|h| (x.omega - h as f64 * y.omega).abs() <= d)
            })
        });
    }
    PeakReport { lines, threshold, flat_fallback: flat, strongest_fallback: strongest }
}

/// In-band power within |omega| <= omega_z against half the power in the
/// shoulder omega_z < |omega| <= 2 omega_z.
pub fn zero_mode_ratio(spec: &Spectrum, omega_z: f64) -> f64 {
    let mut p0 = 0.0;
    let mut sb = 0.0;
    for (w, p) in spec.omega.iter().zip(&spec.power) {
        let a = w.abs();
        if a <= omega_z + 1e-12 {
            p0 += p;
        } else if a <= 2.0 * omega_z + 1e-12 {
            sb += p;
        }
    }
    sb *= 0.5;
    if sb == 0.0 {
        if p0 > 0.0 {
            f64::INFINITY
        } else {
            0.0
        }
    } else {
        p0 / sb
    }
}

pub fn zero_mode_test(spec: &Spectrum, omega_z: f64, threshold: f64) -> (f64, bool) {
    let r = zero_mode_ratio(spec, omega_z);
    (r, r > threshold)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PronyConfig {
    /// Relative singular-value threshold for the model order.
    pub rel_tol: f64,
    pub max_rank: usize,
    /// Extra ranks tried above the selected order.
    pub rank_extra: usize,
    /// Frequency tolerance for the stability intersection.
    pub stability_tol: f64,
    /// Accepted deviation of |z| from 1.
    pub unit_tol: f64,
    /// Roots whose fitted weight is below this fraction of the largest are dropped.
    pub amp_floor: f64,
}

impl Default for PronyConfig {
    fn default() -> Self {
        Self { rel_tol: 1e-8, max_rank: 16, rank_extra: 2, stability_tol: 1e-6, unit_tol: 1e-3, amp_floor: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PronyResult {
    /// Phase frequencies -arg(z)/dt, ascending.
    pub frequencies: Vec<f64>,
    pub weights: Vec<f64>,
    pub rank: usize,
    pub ranks_tried: Vec<usize>,
    pub diagnostic: Option<String>,
}

fn pencil_roots(u: &DMatrix<Complex64>, r: usize) -> Option<Vec<Complex64>> {
    let l = u.nrows();
    let ur = u.columns(0, r);
    let u1 = ur.rows(0, l - 1).into_owned();
    let u2 = ur.rows(1, l - 1).into_owned();
    let svd = u1.svd(true, true);
    let phi = svd.solve(&u2, 1e-14).ok()?;
    let schur = nalgebra::Schur::try_new(phi, 1e-15, 10_000)?;
    let (_, t) = schur.unpack();
    Some((0..r).map(|k| t[(k, k)]).collect())
}

/// Shift-invariance (matrix pencil / ESPRIT) on the Hankel matrix of the
/// series, with a rank sweep and a stability intersection across ranks.
pub fn prony_esprit(series: &CorrelatorSeries, cfg: &PronyConfig) -> Result<PronyResult> {
    let m = series.len();
    if m < 2 * cfg.max_rank + 2 {
        return Err(Error::InsufficientData { needed: 2 * cfg.max_rank + 2, got: m });
    }
    let l = m / 2;
    let k = m - l + 1;
    let y = DMatrix::from_fn(l, k, |i, j| series.values[i + j]);
    let svd = y.svd(true, false);
    let sv = &svd.singular_values;
    let u = svd.u.as_ref().expect("left vectors requested");
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return Ok(PronyResult { frequencies: vec![], weights: vec![], rank: 0, ranks_tried: vec![], diagnostic: Some("zero signal".into()) });
    }
    let r0 = sv.iter().filter(|&&s| s > cfg.rel_tol * smax).count().clamp(1, cfg.max_rank);
    let top = (r0 + cfg.rank_extra).min(cfg.max_rank).min(l - 1);
    let ranks: Vec<usize> = (r0..=top).collect();
    let mut root_sets: Vec<Vec<f64>> = Vec::new();
    for &r in &ranks {
        let roots = pencil_roots(u, r).unwrap_or_default();
        let freqs: Vec<f64> = roots
            .iter()
            .filter(|z| (z.norm() - 1.0).abs() <= cfg.unit_tol)
            .map(|z| -z.arg() / series.dt)
            .collect();
        root_sets.push(freqs);
    }
    let base = &root_sets[0];
    let stable: Vec<f64> = base
        .iter()
        .copied()
        .filter(|f| root_sets[1..].iter().all(|set| set.iter().any(|g| (f - g).abs() <= cfg.stability_tol)))
        .collect();
    if stable.is_empty() {
        return Ok(PronyResult {
            frequencies: vec![],
            weights: vec![],
            rank: r0,
            ranks_tried: ranks,
            diagnostic: Some("no root stable across ranks".into()),
        });
    }
    // Least-squares weights on the Vandermonde basis.
    let v = DMatrix::from_fn(m, stable.len(), |t, j| Complex64::from_polar(1.0, -stable[j] * series.dt * t as f64));
    let rhs = DMatrix::from_fn(m, 1, |t, _| series.values[t]);
    let a = v.svd(true, true).solve(&rhs, 1e-12).map_err(|e| Error::Internal(e.to_string()))?;
    let amps: Vec<f64> = (0..stable.len()).map(|j| a[(j, 0)].norm()).collect();
    let amax = amps.iter().cloned().fold(0.0, f64::max);
    let mut pairs: Vec<(f64, f64)> = stable.into_iter().zip(amps).filter(|(_, w)| *w >= cfg.amp_floor * amax).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(PronyResult {
        frequencies: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
        rank: r0,
        ranks_tried: ranks,
        diagnostic: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PeakPolicy {
    NearestToEstimate,
    MinSignificant,
    LowestNonzero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateConfig {
    /// Guard and zero-mode half width in units of the bin spacing.
    pub kappa: f64,
    pub zero_threshold: f64,
    pub peaks: PeakConfig,
    pub policy: PeakPolicy,
    /// Energy-space hint for the nearest-to-estimate policy; the Prony gap is
    /// used when absent.
    pub hint: Option<f64>,
    pub prony: Option<PronyConfig>,
    /// Dimension of a maximally mixed probe; the zero-line weight times this
    /// gives the kernel multiplicity.
    pub count_dim: Option<usize>,
    pub bootstrap: usize,
    pub seed: u64,
}

impl Default for EstimateConfig {
    fn default() -> Self {
        Self {
            kappa: 2.0,
            zero_threshold: 10.0,
            peaks: PeakConfig::default(),
            policy: PeakPolicy::NearestToEstimate,
            hint: None,
            prony: Some(PronyConfig::default()),
            count_dim: None,
            bootstrap: 200,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatedLine {
    pub omega: f64,
    pub energy: f64,
    pub amplitude: f64,
    pub method: Method,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralEstimate {
    pub lines: Vec<EstimatedLine>,
    pub beta1_hat: usize,
    pub gap_hat: Option<f64>,
    pub gap_fft: Option<f64>,
    pub gap_prony: Option<f64>,
    pub gap_ci: Option<(f64, f64)>,
    pub entropy: f64,
    pub zero_mode_ratio: f64,
    pub zero_mode: bool,
    pub d_omega: f64,
    pub alpha: f64,
    pub notes: Vec<String>,
}

fn pick_gap(lines: &[Line], guard: f64, policy: PeakPolicy, hint: Option<f64>) -> Option<f64> {
    let nonzero: Vec<&Line> = lines.iter().filter(|l| l.omega > guard).collect();
    let lowest = nonzero.iter().map(|l| l.omega).min_by(|a, b| a.total_cmp(b));
    match policy {
        PeakPolicy::LowestNonzero => lowest,
        PeakPolicy::MinSignificant => {
            let amax = nonzero.iter().map(|l| l.amplitude).fold(0.0, f64::max);
            nonzero.iter().filter(|l| l.amplitude >= 0.1 * amax).map(|l| l.omega).min_by(|a, b| a.total_cmp(b))
        }
        PeakPolicy::NearestToEstimate => match hint {
            Some(h) => nonzero.iter().map(|l| l.omega).min_by(|a, b| (a - h).abs().total_cmp(&(b - h).abs())),
            None => lowest,
        },
    }
}

/// Lines of the primary series that have an unaliased image consistent
/// with some line of a secondary series sampled at a different step.
pub fn alias_consistent(primary: &[Line], dt1: f64, secondary: &[Line], dt2: f64, tol: f64, k_max: i32) -> Vec<Line> {
    let mut out = Vec::new();
    for l in primary {
        let mut best: Option<f64> = None;
        'search: for k1 in 0..=k_max {
            let c1 = l.omega + 2.0 * PI * k1 as f64 / dt1;
            for s in secondary {
                for k2 in 0..=k_max {
                    let c2 = s.omega + 2.0 * PI * k2 as f64 / dt2;
                    if (c1 - c2).abs() <= tol {
                        best = Some(c1);
                        break 'search;
                    }
                }
            }
        }
        if let Some(w) = best {
            out.push(Line { omega: w, ..l.clone() });
        }
    }
    out
}

fn block_bootstrap_gaps(series: &CorrelatorSeries, cfg: &EstimateConfig, guard: f64, hint: Option<f64>) -> Vec<f64> {
    let m = series.len();
    let block = (m / 4).max(2);
    (0..cfg.bootstrap)
        .into_par_iter()
        .filter_map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(i as u64));
            let mut values = Vec::with_capacity(m);
            while values.len() < m {
                let start = rng.gen_range(0..=m - block);
                values.extend_from_slice(&series.values[start..start + block]);
            }
            values.truncate(m);
            let s = CorrelatorSeries { values, ..series.clone() };
            let spec = periodogram(&s).ok()?;
            pick_gap(&refine_peaks(&spec, &cfg.peaks).lines, guard, cfg.policy, hint)
        })
        .collect()
}

/// Combined spectral estimate; energies are alpha times phase frequencies.
pub fn estimate(series: &CorrelatorSeries, secondary: Option<&CorrelatorSeries>, cfg: &EstimateConfig) -> Result<SpectralEstimate> {
    let spec = periodogram(series)?;
    let d = spec.d_omega();
    let guard = cfg.kappa * d;
    let alpha = series.alpha;
    let mut notes = Vec::new();
    let report = refine_peaks(&spec, &cfg.peaks);
    if report.flat_fallback {
        notes.push("flat spectrum: threshold fell back to mean + 3 sd".into());
    }
    if report.strongest_fallback {
        notes.push("no peak above threshold: strongest in-band maximum used".into());
    }
    let mut fft_lines = report.lines;
    if let Some(sec) = secondary {
        let spec2 = periodogram(sec)?;
        let lines2 = refine_peaks(&spec2, &cfg.peaks).lines;
        let before = fft_lines.len();
        fft_lines = alias_consistent(&fft_lines, series.dt, &lines2, sec.dt, d + spec2.d_omega(), 3);
        if fft_lines.len() < before {
            notes.push(format!("alias guard removed {} line(s)", before - fft_lines.len()));
        }
    }
    let (ratio, zero) = zero_mode_test(&spec, guard, cfg.zero_threshold);
    let beta1_hat = if !zero {
        0
    } else {
        let a0 = spec.power[0].sqrt() / spec.window_sum;
        match cfg.count_dim {
            Some(dim) => ((a0 * dim as f64).round() as usize).max(1),
            None => {
                notes.push("kernel multiplicity unavailable without a mixed-probe dimension".into());
                1
            }
        }
    };
    let prony = match &cfg.prony {
        Some(pc) if series.len() >= 2 * pc.max_rank + 2 => Some(prony_esprit(series, pc)?),
        _ => None,
    };
    if let Some(diag) = prony.as_ref().and_then(|p| p.diagnostic.clone()) {
        notes.push(format!("prony: {diag}"));
    }
    let gap_prony = prony.as_ref().and_then(|p| p.frequencies.iter().copied().filter(|&f| f > guard).min_by(|a, b| a.total_cmp(b)));
    let hint = cfg.hint.map(|h| h / alpha).or(gap_prony);
    let gap_fft = pick_gap(&fft_lines, guard, cfg.policy, hint);
    let picks: Vec<f64> = [gap_fft, gap_prony].into_iter().flatten().collect();
    let gap = if picks.is_empty() { None } else { Some(median(&picks)) };
    let gap_ci = match gap {
        Some(g) if cfg.bootstrap > 0 => {
            let boots = block_bootstrap_gaps(series, cfg, guard, Some(g));
            if boots.len() >= 2 {
                Some((alpha * quantile(&boots, 0.025), alpha * quantile(&boots, 0.975)))
            } else {
                None
            }
        }
        _ => None,
    };
    let mut lines: Vec<EstimatedLine> = fft_lines
        .iter()
        .map(|l| {
            let matched = prony.as_ref().map_or(false, |p| p.frequencies.iter().any(|f| (f - l.omega).abs() <= d));
            EstimatedLine {
                omega: l.omega,
                energy: alpha * l.omega,
                amplitude: l.amplitude,
                method: if matched { Method::Consensus } else { Method::Fft },
            }
        })
        .collect();
    if let Some(p) = &prony {
        for (f, w) in p.frequencies.iter().zip(&p.weights) {
            if !fft_lines.iter().any(|l| (l.omega - f).abs() <= d) {
                lines.push(EstimatedLine { omega: *f, energy: alpha * f, amplitude: *w, method: Method::Prony });
            }
        }
    }
    lines.sort_by(|a, b| a.omega.total_cmp(&b.omega));
    let total: f64 = fft_lines.iter().map(|l| l.amplitude).sum();
    let entropy = if total > 0.0 {
        -fft_lines.iter().map(|l| l.amplitude / total).filter(|&p| p > 0.0).map(|p| p * p.ln()).sum::<f64>()
    } else {
        0.0
    };
    Ok(SpectralEstimate {
        lines,
        beta1_hat,
        gap_hat: gap.map(|g| alpha * g),
        gap_fft: gap_fft.map(|g| alpha * g),
        gap_prony: gap_prony.map(|g| alpha * g),
        gap_ci,
        entropy,
        zero_mode_ratio: ratio,
        zero_mode: zero,
        d_omega: d,
        alpha,
        notes,
    })
}

/// Shannon entropy of the normalized periodogram.
pub fn spectrum_entropy(spec: &Spectrum) -> Result<f64> {
    let total: f64 = spec.power.iter().sum();
    if !(total > 0.0) {
        return Err(Error::Undefined("spectral entropy of a zero-power spectrum".into()));
    }
    Ok(-spec.power.iter().map(|p| p / total).filter(|&p| p > 0.0).map(|p| p * p.ln()).sum::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synth(freqs: &[f64], amps: &[f64], m: usize, dt: f64) -> CorrelatorSeries {
        let values = (0..m)
            .map(|k| freqs.iter().zip(amps).map(|(f, a)| Complex64::from_polar(*a, -f * dt * k as f64)).sum())
            .collect();
        CorrelatorSeries { dt, values, shots: 0, alpha: 1.0 }
    }

    #[test]
    fn symmetric_neighbours_have_zero_offset() {
        assert_eq!(quadratic_offset(1.0, 3.0, 1.0), 0.0);
    }

    #[test]
    fn on_grid_line_peaks_on_its_bin() {
        let m = 64;
        let dt = 0.1;
        let d = 2.0 * PI / (m as f64 * dt);
        let s = synth(&[5.0 * d], &[1.0], m, dt);
        let spec = periodogram(&s).unwrap();
        let best = (0..m).max_by(|&a, &b| spec.power[a].total_cmp(&spec.power[b])).unwrap();
        assert_eq!(best, 5);
        let r = refine_peaks(&spec, &PeakConfig::default());
        assert!((r.lines[0].omega - 5.0 * d).abs() < 1e-12);
    }

    #[test]
    fn parseval() {
        let s = synth(&[1.0, 2.3], &[0.6, 0.4], 100, 0.2);
        let spec = periodogram(&s).unwrap();
        let w = hann(100);
        let energy: f64 = s.values.iter().zip(&w).map(|(c, w)| (c * w).norm_sqr()).sum();
        let total: f64 = spec.power.iter().sum();
        assert!((total / (100.0 * energy) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn constant_signal_single_root_at_zero() {
        let s = synth(&[0.0], &[1.0], 64, 0.1);
        let p = prony_esprit(&s, &PronyConfig::default()).unwrap();
        assert_eq!(p.frequencies.len(), 1);
        assert!(p.frequencies[0].abs() < 1e-9);
    }

    #[test]
    fn entropy_of_zero_spectrum_is_undefined() {
        let s = CorrelatorSeries { dt: 0.1, values: vec![Complex64::new(0.0, 0.0); 16], shots: 0, alpha: 1.0 };
        assert!(spectrum_entropy(&periodogram(&s).unwrap()).is_err());
    }
}
