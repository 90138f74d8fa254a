//! Run configuration: a flat `section.key = value` document. Unknown keys
//! are rejected and the digest is taken over the fully resolved key list,
//! so defaults and overrides hash identically.

use crate::error::{Error, Result};
use crate::io::sha256_hex;
use crate::probe::{ProbeKind, ProbeSpec};
use crate::sweep::{Mode, SweepConfig};
use std::path::PathBuf;

/// Committed compile-report instance: seven vertices, seven edges, one
/// four-cycle with a pendant path.
pub const DEFAULT_INSTANCE_EDGES: [[usize; 2]; 7] = [[0, 1], [1, 2], [2, 3], [0, 3], [3, 4], [4, 5], [5, 6]];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub out: PathBuf,
    pub sweep: SweepConfig,
    /// Single-point commands use this rho.
    pub rho: f64,
    pub rho_min: f64,
    pub rho_max: f64,
    pub rho_step: f64,
    pub probe: ProbeSpec,
    pub eta: f64,
    pub bound_clouds: usize,
    pub bound_points: usize,
    pub phase_bits: u32,
    pub compile_time: f64,
    pub instance_edges: Vec<[usize; 2]>,
    pub instance_vertices: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            out: PathBuf::from("out"),
            sweep: SweepConfig::default(),
            rho: 28.0,
            rho_min: 36.0,
            rho_max: 42.0,
            rho_step: 1.0,
            probe: ProbeSpec::default(),
            eta: 0.05,
            bound_clouds: 200,
            bound_points: 8,
            phase_bits: 6,
            compile_time: 0.25,
            instance_edges: DEFAULT_INSTANCE_EDGES.to_vec(),
            instance_vertices: 7,
        }
    }
}

fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::Config(format!("{key}: cannot parse {v:?}")))
}

fn boolean(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(Error::Config(format!("{key}: expected a boolean, got {v:?}"))),
    }
}

fn list(key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',').map(|x| num(key, x.trim())).collect()
}

fn edges(key: &str, v: &str) -> Result<Vec<[usize; 2]>> {
    v.split(';')
        .filter(|s| !s.trim().is_empty())
        .map(|e| {
            let p: Vec<usize> = e.split('-').map(|x| num(key, x.trim())).collect::<Result<_>>()?;
            if p.len() != 2 {
                return Err(Error::Config(format!("{key}: edge {e:?} is not of the form i-j")));
            }
            Ok([p[0].min(p[1]), p[0].max(p[1])])
        })
        .collect()
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn probe_name(p: ProbeKind) -> &'static str {
    match p {
        ProbeKind::UniformEdge => "uniform_edge",
        ProbeKind::WState => "w_state",
        ProbeKind::DickeWeighted => "dicke_weighted",
    }
}

impl RunConfig {
    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        let s = &mut self.sweep;
        match key {
            "seed" => self.seed = num(key, v)?,
            "out" => self.out = PathBuf::from(v),
            "mode" => s.mode = Mode::parse(v).ok_or_else(|| Error::Config(format!("mode: unknown value {v:?}")))?,
            "shots" => s.shots = num(key, v)?,
            "lorenz.sigma" => s.sigma = num(key, v)?,
            "lorenz.beta" => s.beta = num(key, v)?,
            "lorenz.rho" => self.rho = num(key, v)?,
            "lorenz.x0" => {
                let x = list(key, v)?;
                if x.len() != 3 {
                    return Err(Error::Config("lorenz.x0 needs three components".into()));
                }
                s.x0 = [x[0], x[1], x[2]];
            }
            "lorenz.dt" => s.dt = num(key, v)?,
            "lorenz.t_trans" => s.t_trans = num(key, v)?,
            "lorenz.t_len" => s.t_len = num(key, v)?,
            "lyapunov.t_total" => s.lyap_t_total = num(key, v)?,
            "lyapunov.renorm_every" => s.lyap_renorm_every = num(key, v)?,
            "embed.observable" => {
                s.observable = crate::dynamics::Axis::parse(v).ok_or_else(|| Error::Config(format!("embed.observable: {v:?}")))?
            }
            "embed.max_lag" => s.max_lag = num(key, v)?,
            "embed.m_max" => s.m_max = num(key, v)?,
            "embed.fnn_threshold" => s.fnn_threshold = num(key, v)?,
            "embed.normalize" => s.normalize = boolean(key, v)?,
            "embed.stride" => s.stride = num(key, v)?,
            "embed.tau" => s.tau = Some(num(key, v)?).filter(|&t: &usize| t > 0),
            "embed.m" => s.m = Some(num(key, v)?).filter(|&t: &usize| t > 0),
            "select.k" => s.selection.k = num(key, v)?,
            "select.r" => s.selection.r = num(key, v)?,
            "select.alpha" => s.selection.alpha = num(key, v)?,
            "select.knn_k" => s.selection.knn_k = num(key, v)?,
            "select.bins" => s.selection.bins = num(key, v)?,
            "select.lambdas" => {
                let l = list(key, v)?;
                if l.len() != 4 {
                    return Err(Error::Config("select.lambdas needs four weights".into()));
                }
                s.selection.lambdas = (l[0], l[1], l[2], l[3]);
            }
            "graph.eps_quantile" => s.edges.eps_quantile = num(key, v)?,
            "graph.use_ring" => s.edges.use_ring = boolean(key, v)?,
            "spectro.samples" => s.corr_samples = num(key, v)?,
            "spectro.dt" => s.corr_dt = num(key, v)?,
            "spectro.alpha" => s.alpha = num(key, v)?,
            "spectro.kappa" => s.estimate.kappa = num(key, v)?,
            "spectro.zero_threshold" => s.estimate.zero_threshold = num(key, v)?,
            "spectro.k_sigma" => s.estimate.peaks.k_sigma = num(key, v)?,
            "spectro.bootstrap" => s.estimate.bootstrap = num(key, v)?,
            "spectro.dephase_samples" => s.dephase_samples = num(key, v)?,
            "probe.kind" => {
                self.probe.kind = ProbeKind::parse(v).ok_or_else(|| Error::Config(format!("probe.kind: unknown value {v:?}")))?
            }
            "probe.alpha_bias" => self.probe.alpha_bias = num(key, v)?,
            "probe.beta_bias" => self.probe.beta_bias = num(key, v)?,
            "probe.eta" => self.probe.eta = num(key, v)?,
            "trotter.order" => s.trotter.order = num(key, v)?,
            "trotter.steps" => s.trotter.steps = num(key, v)?,
            "sweep.rho_min" => self.rho_min = num(key, v)?,
            "sweep.rho_max" => self.rho_max = num(key, v)?,
            "sweep.rho_step" => self.rho_step = num(key, v)?,
            "fivepoint.eta" => self.eta = num(key, v)?,
            "bound.clouds" => self.bound_clouds = num(key, v)?,
            "bound.points" => self.bound_points = num(key, v)?,
            "compile.phase_bits" => self.phase_bits = num(key, v)?,
            "compile.time" => self.compile_time = num(key, v)?,
            "compile.vertices" => self.instance_vertices = num(key, v)?,
            "compile.edges" => self.instance_edges = edges(key, v)?,
            _ => return Err(Error::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    /// Every key with its resolved value, in a fixed order.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let s = &self.sweep;
        let (a, b, c, d) = s.selection.lambdas;
        vec![
            ("seed", self.seed.to_string()),
            ("out", self.out.display().to_string()),
            ("mode", s.mode.as_str().into()),
            ("shots", s.shots.to_string()),
            ("lorenz.sigma", s.sigma.to_string()),
            ("lorenz.beta", s.beta.to_string()),
            ("lorenz.rho", self.rho.to_string()),
            ("lorenz.x0", join(&s.x0)),
            ("lorenz.dt", s.dt.to_string()),
            ("lorenz.t_trans", s.t_trans.to_string()),
            ("lorenz.t_len", s.t_len.to_string()),
            ("lyapunov.t_total", s.lyap_t_total.to_string()),
            ("lyapunov.renorm_every", s.lyap_renorm_every.to_string()),
            ("embed.observable", format!("{:?}", s.observable).to_lowercase()),
            ("embed.max_lag", s.max_lag.to_string()),
            ("embed.m_max", s.m_max.to_string()),
            ("embed.fnn_threshold", s.fnn_threshold.to_string()),
            ("embed.normalize", s.normalize.to_string()),
            ("embed.stride", s.stride.to_string()),
            ("embed.tau", s.tau.unwrap_or(0).to_string()),
            ("embed.m", s.m.unwrap_or(0).to_string()),
            ("select.k", s.selection.k.to_string()),
            ("select.r", s.selection.r.to_string()),
            ("select.alpha", s.selection.alpha.to_string()),
            ("select.knn_k", s.selection.knn_k.to_string()),
            ("select.bins", s.selection.bins.to_string()),
            ("select.lambdas", join(&[a, b, c, d])),
            ("graph.eps_quantile", s.edges.eps_quantile.to_string()),
            ("graph.use_ring", s.edges.use_ring.to_string()),
            ("spectro.samples", s.corr_samples.to_string()),
            ("spectro.dt", s.corr_dt.to_string()),
            ("spectro.alpha", s.alpha.to_string()),
            ("spectro.kappa", s.estimate.kappa.to_string()),
            ("spectro.zero_threshold", s.estimate.zero_threshold.to_string()),
            ("spectro.k_sigma", s.estimate.peaks.k_sigma.to_string()),
            ("spectro.bootstrap", s.estimate.bootstrap.to_string()),
            ("spectro.dephase_samples", s.dephase_samples.to_string()),
            ("probe.kind", probe_name(self.probe.kind).into()),
            ("probe.alpha_bias", self.probe.alpha_bias.to_string()),
            ("probe.beta_bias", self.probe.beta_bias.to_string()),
            ("probe.eta", self.probe.eta.to_string()),
            ("trotter.order", s.trotter.order.to_string()),
            ("trotter.steps", s.trotter.steps.to_string()),
            ("sweep.rho_min", self.rho_min.to_string()),
            ("sweep.rho_max", self.rho_max.to_string()),
            ("sweep.rho_step", self.rho_step.to_string()),
            ("fivepoint.eta", self.eta.to_string()),
            ("bound.clouds", self.bound_clouds.to_string()),
            ("bound.points", self.bound_points.to_string()),
            ("compile.phase_bits", self.phase_bits.to_string()),
            ("compile.time", self.compile_time.to_string()),
            ("compile.vertices", self.instance_vertices.to_string()),
            (
                "compile.edges",
                self.instance_edges.iter().map(|e| format!("{}-{}", e[0], e[1])).collect::<Vec<_>>().join(";"),
            ),
        ]
    }

    /// Parse `key = value` lines; `#` starts a comment. Keys may repeat, the
    /// last value wins.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", n + 1)))?;
            cfg.set(k.trim(), v.trim())?;
        }
        cfg.finish()?;
        Ok(cfg)
    }

    /// Propagate shared values into the sub-configs and validate.
    pub fn finish(&mut self) -> Result<()> {
        self.sweep.seed = self.seed;
        self.sweep.selection.seed = self.seed;
        self.probe.dephase_samples = self.sweep.dephase_samples;
        self.validate()
    }

    pub fn validate(&self) -> Result<()> {
        let s = &self.sweep;
        if self.probe.alpha_bias < 0.0 || self.probe.beta_bias < 0.0 || self.probe.eta < 0.0 {
            return Err(Error::Config("probe bias coefficients must be nonnegative".into()));
        }
        s.selection.validate().map_err(|e| Error::Config(e.to_string()))?;
        if !(s.dt > 0.0 && s.corr_dt > 0.0 && s.alpha > 0.0 && s.t_len > 0.0) {
            return Err(Error::Config("time steps, segment length and alpha must be positive".into()));
        }
        if !(self.rho_step > 0.0) || self.rho_max < self.rho_min {
            return Err(Error::Config("sweep grid needs rho_step > 0 and rho_max >= rho_min".into()));
        }
        if !(self.eta >= 0.0) || self.phase_bits == 0 || self.bound_points > 12 {
            return Err(Error::Config("need eta >= 0, phase_bits >= 1 and bound.points <= 12".into()));
        }
        if self.instance_edges.iter().any(|e| e[0] == e[1] || e[1] >= self.instance_vertices) {
            return Err(Error::Config("compile.edges refer to vertices outside compile.vertices".into()));
        }
        Ok(())
    }

    pub fn canonical(&self) -> String {
        self.entries().into_iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    pub fn digest(&self) -> String {
        sha256_hex(self.canonical().as_bytes())
    }

    pub fn grid(&self) -> Vec<f64> {
        let n = ((self.rho_max - self.rho_min) / self.rho_step + 1e-9).floor() as usize;
        (0..=n).map(|k| self.rho_min + k as f64 * self.rho_step).collect()
    }
}

/// First line of every emitted CSV.
pub fn header_comment(digest: &str) -> String {
    format!("# toposcope {} config_sha256={digest}\n", env!("CARGO_PKG_VERSION"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_round_trips() {
        let mut c = RunConfig::default();
        c.set("seed", "7").unwrap();
        c.set("compile.edges", "0-1;2-1").unwrap();
        c.set("compile.vertices", "3").unwrap();
        let back = RunConfig::parse(&c.canonical()).unwrap();
        assert_eq!(back.digest(), c.digest());
        assert_eq!(back.instance_edges, vec![[0, 1], [1, 2]]);
    }

    #[test]
    fn unknown_key_rejected() {
        assert!(matches!(RunConfig::parse("nope = 1"), Err(Error::Config(_))));
        assert!(matches!(RunConfig::parse("seed 1"), Err(Error::Config(_))));
    }

    #[test]
    fn default_grid() {
        assert_eq!(RunConfig::default().grid(), vec![36.0, 37.0, 38.0, 39.0, 40.0, 41.0, 42.0]);
    }

    #[test]
    fn digest_tracks_values() {
        let a = RunConfig::parse("").unwrap();
        let b = RunConfig::parse("spectro.dt = 0.2").unwrap();
        assert_ne!(a.digest(), b.digest());
        assert_eq!(a.digest(), RunConfig::parse("# comment only\n").unwrap().digest());
    }
}
