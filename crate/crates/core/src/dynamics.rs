//! Lorenz flow: fixed-step RK4 integration and the Benettin estimate of the
//! maximal Lyapunov exponent.

use crate::error::{Error, Result};
use crate::io::fmt_f64;
use serde::{Deserialize, Serialize};

pub type State = [f64; 3];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LorenzParams {
    pub sigma: f64,
    pub rho: f64,
    pub beta: f64,
}

impl LorenzParams {
    pub fn new(sigma: f64, rho: f64, beta: f64) -> Result<Self> {
        if !(sigma > 0.0 && rho > 0.0 && beta > 0.0) {
            return Err(Error::Invalid(format!(
                "Lorenz parameters must be positive (sigma={sigma}, rho={rho}, beta={beta})"
            )));
        }
        Ok(Self { sigma, rho, beta })
    }

    /// sigma = 10, beta = 8/3 with the given rho.
    pub fn classic(rho: f64) -> Self {
        Self { sigma: 10.0, rho, beta: 8.0 / 3.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub dt: f64,
    pub t0: f64,
    pub states: Vec<State>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "x" => Some(Axis::X),
            "y" => Some(Axis::Y),
            "z" => Some(Axis::Z),
            _ => None,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }

    pub fn observable(&self, axis: Axis) -> Vec<f64> {
        self.states.iter().map(|s| s[axis.index()]).collect()
    }

    /// Keep every `stride`-th state; the sampling step becomes `stride * dt`.
    pub fn downsample(&self, stride: usize) -> Trajectory {
        let stride = stride.max(1);
        Trajectory {
            dt: self.dt * stride as f64,
            t0: self.t0,
            states: self.states.iter().step_by(stride).copied().collect(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,x,y,z\n");
        for (k, s) in self.states.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{},{}\n",
                fmt_f64(self.time(k)),
                fmt_f64(s[0]),
                fmt_f64(s[1]),
                fmt_f64(s[2])
            ));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyapunovResult {
    pub lambda_max: f64,
    pub renorm_interval: f64,
    pub total_time: f64,
}

pub fn vector_field(p: &LorenzParams, s: &State) -> State {
    let [x, y, z] = *s;
    [p.sigma * (y - x), x * (p.rho - z) - y, x * y - p.beta * z]
}

pub fn jacobian(p: &LorenzParams, s: &State) -> [[f64; 3]; 3] {
    let [x, y, z] = *s;
    [[-p.sigma, p.sigma, 0.0], [p.rho - z, -1.0, -x], [y, x, -p.beta]]
}

fn axpy(a: &State, h: f64, k: &State) -> State {
    [a[0] + h * k[0], a[1] + h * k[1], a[2] + h * k[2]]
}

pub fn rk4_step(p: &LorenzParams, s: &State, dt: f64) -> State {
    let k1 = vector_field(p, s);
    let k2 = vector_field(p, &axpy(s, 0.5 * dt, &k1));
    let k3 = vector_field(p, &axpy(s, 0.5 * dt, &k2));
    let k4 = vector_field(p, &axpy(s, dt, &k3));
    let mut out = *s;
    for i in 0..3 {
        out[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

fn finite(s: &State) -> bool {
    s.iter().all(|v| v.is_finite())
}

/// Integrate from t=0, discard the transient and return states on (t_trans, t_total].
pub fn integrate(
    params: &LorenzParams,
    x0: State,
    dt: f64,
    t_trans: f64,
    t_total: f64,
) -> Result<Trajectory> {
    if !(dt > 0.0) || !(t_trans >= 0.0) || !(t_total > t_trans) {
        return Err(Error::Invalid(format!(
            "need dt > 0 and t_total > t_trans >= 0 (dt={dt}, t_trans={t_trans}, t_total={t_total})"
        )));
    }
    let n_total = (t_total / dt).round() as usize;
    let n_trans = (t_trans / dt).round() as usize;
    if n_total < n_trans + 2 {
        return Err(Error::InsufficientData { needed: 2, got: n_total.saturating_sub(n_trans) });
    }
    let mut s = x0;
    if !finite(&s) {
        return Err(Error::Diverged { step: 0 });
    }
    let mut states = Vec::with_capacity(n_total - n_trans);
    for step in 1..=n_total {
        s = rk4_step(params, &s, dt);
        if !finite(&s) {
            return Err(Error::Diverged { step });
        }
        if step > n_trans {
            states.push(s);
        }
    }
    Ok(Trajectory { dt, t0: (n_trans + 1) as f64 * dt, states })
}

fn tangent_rhs(p: &LorenzParams, s: &State, v: &State) -> (State, State) {
    let j = jacobian(p, s);
    let dv = [
        j[0][0] * v[0] + j[0][1] * v[1] + j[0][2] * v[2],
        j[1][0] * v[0] + j[1][1] * v[1] + j[1][2] * v[2],
        j[2][0] * v[0] + j[2][1] * v[1] + j[2][2] * v[2],
    ];
    (vector_field(p, s), dv)
}

fn rk4_tangent_step(p: &LorenzParams, s: &State, v: &State, dt: f64) -> (State, State) {
    let (a1, b1) = tangent_rhs(p, s, v);
    let (a2, b2) = tangent_rhs(p, &axpy(s, 0.5 * dt, &a1), &axpy(v, 0.5 * dt, &b1));
    let (a3, b3) = tangent_rhs(p, &axpy(s, 0.5 * dt, &a2), &axpy(v, 0.5 * dt, &b2));
    let (a4, b4) = tangent_rhs(p, &axpy(s, dt, &a3), &axpy(v, dt, &b3));
    let mut so = *s;
    let mut vo = *v;
    for i in 0..3 {
        so[i] += dt / 6.0 * (a1[i] + 2.0 * a2[i] + 2.0 * a3[i] + a4[i]);
        vo[i] += dt / 6.0 * (b1[i] + 2.0 * b2[i] + 2.0 * b3[i] + b4[i]);
    }
    (so, vo)
}

/// Benettin estimate: the tangent vector starts at (1,0,0) and is rescaled
/// to unit norm every `renorm_every` steps.
pub fn lyapunov_max(
    params: &LorenzParams,
    x0: State,
    dt: f64,
    t_total: f64,
    renorm_every: usize,
) -> Result<LyapunovResult> {
    if !(dt > 0.0) || renorm_every == 0 {
        return Err(Error::Invalid("need dt > 0 and renorm_every >= 1".into()));
    }
    let n_steps = (t_total / dt).round() as usize;
    let n_renorm = n_steps / renorm_every;
    if n_renorm < 100 {
        return Err(Error::Invalid(format!(
            "t_total={t_total} gives only {n_renorm} renormalizations; at least 100 are required"
        )));
    }
    let mut s = x0;
    let mut v: State = [1.0, 0.0, 0.0];
    let mut acc = 0.0;
    for step in 1..=n_renorm * renorm_every {
        let (s2, v2) = rk4_tangent_step(params, &s, &v, dt);
        s = s2;
        v = v2;
        if !finite(&s) || !finite(&v) {
            return Err(Error::Diverged { step });
        }
        if step % renorm_every == 0 {
            let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            if norm == 0.0 {
                return Err(Error::DegeneratePerturbation);
            }
            acc += norm.ln();
            v = [v[0] / norm, v[1] / norm, v[2] / norm];
        }
    }
    let total_time = (n_renorm * renorm_every) as f64 * dt;
    Ok(LyapunovResult {
        lambda_max: acc / total_time,
        renorm_interval: renorm_every as f64 * dt,
        total_time,
    })
}

/// Largest exponent over a rho grid and the first bracket where it changes
/// sign from negative to positive.
pub fn lyapunov_onset(
    grid: &[f64],
    x0: State,
    dt: f64,
    t_total: f64,
    renorm_every: usize,
) -> Result<(Vec<f64>, Option<(f64, f64)>)> {
    let lams: Vec<f64> = grid
        .iter()
        .map(|&rho| lyapunov_max(&LorenzParams::classic(rho), x0, dt, t_total, renorm_every).map(|l| l.lambda_max))
        .collect::<Result<_>>()?;
    let bracket = (1..grid.len()).find(|&k| lams[k - 1] < 0.0 && lams[k] > 0.0).map(|k| (grid[k - 1], grid[k]));
    Ok((lams, bracket))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_point_is_stationary() {
        let p = LorenzParams::classic(28.0);
        let c = 72f64.sqrt();
        let tr = integrate(&p, [c, c, 27.0], 0.01, 0.0, 5.0).unwrap();
        for s in &tr.states {
            assert!((s[0] - c).abs() < 1e-9 && (s[1] - c).abs() < 1e-9 && (s[2] - 27.0).abs() < 1e-9);
        }
    }

    #[test]
    fn subcritical_rho_decays() {
        let p = LorenzParams::new(10.0, 0.5, 8.0 / 3.0).unwrap();
        let x0 = [3.0, -2.0, 4.0];
        let tr = integrate(&p, x0, 0.01, 0.0, 10.0).unwrap();
        let n0 = x0.iter().map(|v| v * v).sum::<f64>().sqrt();
        let last = tr.states.last().unwrap();
        assert!(last.iter().map(|v| v * v).sum::<f64>().sqrt() < n0);
    }

    #[test]
    fn sampling_window_matches_contract() {
        let p = LorenzParams::classic(28.0);
        let tr = integrate(&p, [1.0, 1.0, 1.0], 0.01, 1.0, 2.0).unwrap();
        assert_eq!(tr.len(), 100);
        assert!((tr.t0 - 1.01).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_params() {
        assert!(LorenzParams::new(0.0, 28.0, 1.0).is_err());
        assert!(integrate(&LorenzParams::classic(28.0), [1.0; 3], 0.01, 5.0, 5.0).is_err());
    }

    #[test]
    fn divergence_reports_step() {
        let p = LorenzParams::classic(28.0);
        match integrate(&p, [1e200, 1e200, 1e200], 0.01, 0.0, 1.0) {
            Err(Error::Diverged { step }) => assert!(step >= 1),
            other => panic!("expected divergence, got {other:?}"),
        }
    }
}
