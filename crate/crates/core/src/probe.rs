//! Probe states: uniform edge superposition, W and Dicke states, the
//! topology-weighted Dicke superposition, and random-phase dephasing.

use crate::error::{Error, Result};
use crate::qcompile::{Circuit, Control, Gate, GateKind};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeKind {
    UniformEdge,
    WState,
    DickeWeighted,
}

impl ProbeKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "uniform_edge" => Some(Self::UniformEdge),
            "w_state" => Some(Self::WState),
            "dicke_weighted" => Some(Self::DickeWeighted),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeSpec {
    pub kind: ProbeKind,
    pub weights: Option<Vec<f64>>,
    pub alpha_bias: f64,
    pub beta_bias: f64,
    pub eta: f64,
    pub dephase_samples: usize,
}

impl Default for ProbeSpec {
    fn default() -> Self {
        Self { kind: ProbeKind::UniformEdge, weights: None, alpha_bias: 0.0, beta_bias: 0.0, eta: 0.0, dephase_samples: 0 }
    }
}

fn cz(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// 1/sqrt(E) on each of E edge-basis states.
pub fn uniform_edge_state(e: usize) -> Result<Vec<Complex64>> {
    if e == 0 {
        return Err(Error::EmptyComplex);
    }
    Ok(vec![cz(1.0 / (e as f64).sqrt()); e])
}

/// The same superposition written on the vertex register, one qubit per
/// vertex: amplitude 1/sqrt(E) on |e_i e_j> for every edge.
pub fn edge_register_state(n: usize, edges: &[[usize; 2]]) -> Result<Vec<Complex64>> {
    if edges.is_empty() {
        return Err(Error::EmptyComplex);
    }
    if n > crate::qcompile::sim::MAX_SIM_QUBITS {
        return Err(Error::Resource(format!("{n} vertices exceed the simulator limit")));
    }
    let mut amps = vec![cz(0.0); 1 << n];
    let a = 1.0 / (edges.len() as f64).sqrt();
    for e in edges {
        if e[0] >= n || e[1] >= n || e[0] == e[1] {
            return Err(Error::Invalid(format!("edge {:?} outside {n} vertices", e)));
        }
        amps[(1 << e[0]) | (1 << e[1])] = cz(a);
    }
    Ok(amps)
}

/// Uniform superposition of all n-bit strings of Hamming weight k.
pub fn dicke_state(n: usize, k: usize) -> Result<Vec<Complex64>> {
    if k > n || n > crate::qcompile::sim::MAX_SIM_QUBITS {
        return Err(Error::Invalid(format!("Dicke state D_{k} on {n} qubits")));
    }
    let count = (0..1usize << n).filter(|b| b.count_ones() as usize == k).count();
    let a = 1.0 / (count as f64).sqrt();
    Ok((0..1usize << n).map(|b| if b.count_ones() as usize == k { cz(a) } else { cz(0.0) }).collect())
}

/// Linear cascade from |10...0>: CRY(q_k -> q_{k+1}) splits off amplitude
/// 1/sqrt(n-k), and CNOT(q_{k+1} -> q_k) moves the excitation along.
pub fn w_state_circuit(n: usize) -> Result<Circuit> {
    if n == 0 {
        return Err(Error::Invalid("W state needs at least one qubit".into()));
    }
    let mut c = Circuit::new(n);
    c.push(Gate::x(0));
    for k in 0..n - 1 {
        let theta = 2.0 * (1.0 / ((n - k) as f64)).sqrt().acos();
        c.push(Gate { kind: GateKind::Cry(theta), target: k + 1, controls: vec![Control::on(k)] });
        c.push(Gate::cnot(k + 1, k));
    }
    Ok(c)
}

/// Sector weights w_k, k = 0..=n: start at 1, add alpha_bias for every
/// ring-edge endpoint labelled k and beta_bias for every vertex of degree
/// k, scale by (1 + eta * lambda), then normalize to unit 2-norm.
pub fn dicke_weights(
    n: usize,
    ring_edges: &[[usize; 2]],
    degrees: &[usize],
    alpha_bias: f64,
    beta_bias: f64,
    eta: f64,
    lambda: f64,
) -> Result<Vec<f64>> {
    if alpha_bias < 0.0 || beta_bias < 0.0 || eta < 0.0 {
        return Err(Error::Invalid("bias coefficients must be nonnegative".into()));
    }
    let mut w = vec![1.0; n + 1];
    for e in ring_edges {
        for &u in e {
            if u <= n {
                w[u] += alpha_bias;
            }
        }
    }
    for &d in degrees {
        if d <= n {
            w[d] += beta_bias;
        }
    }
    let gain = 1.0 + eta * lambda;
    for x in &mut w {
        *x *= gain;
    }
    normalize_weights(&w)
}

pub fn normalize_weights(w: &[f64]) -> Result<Vec<f64>> {
    if w.iter().any(|&x| x < 0.0 || !x.is_finite()) {
        return Err(Error::Invalid("weights must be finite and nonnegative".into()));
    }
    let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::Invalid("weights are all zero".into()));
    }
    Ok(w.iter().map(|x| x / norm).collect())
}

/// sum_k w~_k |D_k>, loaded directly as amplitudes.
pub fn dicke_superposition(n: usize, weights: &[f64]) -> Result<Vec<Complex64>> {
    if weights.len() != n + 1 {
        return Err(Error::Shape(format!("{} weights for {} sectors", weights.len(), n + 1)));
    }
    let w = normalize_weights(weights)?;
    let mut amps = vec![cz(0.0); 1 << n];
    for (k, &wk) in w.iter().enumerate() {
        if wk == 0.0 {
            continue;
        }
        for (b, a) in dicke_state(n, k)?.into_iter().enumerate() {
            amps[b] += a * wk;
        }
    }
    Ok(amps)
}

pub fn norm(state: &[Complex64]) -> f64 {
    state.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

/// Independent uniform Z phases on each of n qubits.
pub fn random_phases<R: Rng>(n: usize, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| rng.gen::<f64>() * std::f64::consts::TAU).collect()
}

/// exp(i sum_q phi_q n_q) applied to a register state.
pub fn apply_register_phases(state: &[Complex64], phases: &[f64]) -> Vec<Complex64> {
    state
        .iter()
        .enumerate()
        .map(|(b, &a)| {
            let phi: f64 = phases.iter().enumerate().filter(|(q, _)| (b >> q) & 1 == 1).map(|(_, p)| p).sum();
            a * Complex64::from_polar(1.0, phi)
        })
        .collect()
}

/// Edge-basis image of register phases: edge (i, j) picks up phi_i + phi_j.
pub fn apply_edge_phases(state: &[Complex64], edges: &[[usize; 2]], phases: &[f64]) -> Vec<Complex64> {
    state.iter().zip(edges).map(|(&a, e)| a * Complex64::from_polar(1.0, phases[e[0]] + phases[e[1]])).collect()
}

/// Pointwise mean of correlator samples of equal length.
pub fn dephase_average(series: &[Vec<Complex64>]) -> Result<Vec<Complex64>> {
    let first = series.first().ok_or_else(|| Error::Invalid("dephasing needs at least one sample".into()))?;
    let m = first.len();
    if series.iter().any(|s| s.len() != m) {
        return Err(Error::Shape("correlator samples differ in length".into()));
    }
    let k = series.len() as f64;
    Ok((0..m).map(|t| series.iter().map(|s| s[t]).sum::<Complex64>() / k).collect())
}

/// Populations |psi_b|^2 of the fully dephased ensemble.
pub fn diagonal_populations(state: &[Complex64]) -> Vec<f64> {
    state.iter().map(|a| a.norm_sqr()).collect()
}

pub fn amplitudes_csv(state: &[Complex64]) -> String {
    let rows: Vec<Vec<String>> = state
        .iter()
        .enumerate()
        .map(|(b, a)| vec![b.to_string(), crate::io::fmt_f64(a.re), crate::io::fmt_f64(a.im)])
        .collect();
    crate::io::csv(&["index", "re", "im"], &rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcompile::StateVector;

    #[test]
    fn single_edge_is_basis_state() {
        let s = uniform_edge_state(1).unwrap();
        assert_eq!(s, vec![cz(1.0)]);
        assert!(matches!(uniform_edge_state(0), Err(Error::EmptyComplex)));
    }

    #[test]
    fn w_state_two_and_one() {
        let c = w_state_circuit(1).unwrap();
        assert_eq!(c.gates.len(), 1);
        let mut sv = StateVector::zero(2).unwrap();
        sv.run(&w_state_circuit(2).unwrap()).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((sv.amps[1].re - s).abs() < 1e-12 && (sv.amps[2].re - s).abs() < 1e-12);
    }

    #[test]
    fn zero_bias_gives_uniform_weights() {
        let w = dicke_weights(3, &[], &[1, 2, 1], 0.0, 0.0, 0.0, 0.7).unwrap();
        for x in &w {
            assert!((x - 0.5).abs() < 1e-15);
        }
    }
}
