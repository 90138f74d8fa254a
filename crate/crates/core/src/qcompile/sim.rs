//! Dense statevector simulator; qubit q is bit q of the basis index.

use super::ir::{Circuit, Control, Gate, GateKind};
use crate::error::{Error, Result};
use nalgebra::DMatrix;
use num_complex::Complex64;

pub const MAX_SIM_QUBITS: usize = 22;

type Mat2 = [[Complex64; 2]; 2];

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn matrix(kind: GateKind) -> Mat2 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let z = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    match kind {
        GateKind::H => [[c(s, 0.0), c(s, 0.0)], [c(s, 0.0), c(-s, 0.0)]],
        GateKind::X | GateKind::Cnot | GateKind::Mcx => [[z, one], [one, z]],
        GateKind::Sdg => [[one, z], [z, c(0.0, -1.0)]],
        GateKind::Rx(t) => {
            let (sn, cs) = (t / 2.0).sin_cos();
            [[c(cs, 0.0), c(0.0, -sn)], [c(0.0, -sn), c(cs, 0.0)]]
        }
        GateKind::Ry(t) | GateKind::Cry(t) => {
            let (sn, cs) = (t / 2.0).sin_cos();
            [[c(cs, 0.0), c(-sn, 0.0)], [c(sn, 0.0), c(cs, 0.0)]]
        }
        GateKind::Rz(t) | GateKind::Crz(t) => [[Complex64::from_polar(1.0, -t / 2.0), z], [z, Complex64::from_polar(1.0, t / 2.0)]],
    }
}

fn control_masks(controls: &[Control]) -> (usize, usize) {
    let mut mask = 0;
    let mut want = 0;
    for ctl in controls {
        mask |= 1 << ctl.qubit;
        if ctl.on {
            want |= 1 << ctl.qubit;
        }
    }
    (mask, want)
}

pub fn apply_gate(state: &mut [Complex64], g: &Gate) {
    let u = matrix(g.kind);
    let (mask, want) = control_masks(&g.controls);
    let tbit = 1usize << g.target;
    for i in 0..state.len() {
        if i & tbit != 0 || i & mask != want {
            continue;
        }
        let j = i | tbit;
        let (a, b) = (state[i], state[j]);
        state[i] = u[0][0] * a + u[0][1] * b;
        state[j] = u[1][0] * a + u[1][1] * b;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub n_qubits: usize,
    pub amps: Vec<Complex64>,
}

impl StateVector {
    pub fn zero(n_qubits: usize) -> Result<Self> {
        if n_qubits > MAX_SIM_QUBITS {
            return Err(Error::Resource(format!("{n_qubits} qubits exceed the simulator limit {MAX_SIM_QUBITS}")));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(Self { n_qubits, amps })
    }

    pub fn from_amps(n_qubits: usize, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != 1 << n_qubits {
            return Err(Error::Shape(format!("{} amplitudes for {n_qubits} qubits", amps.len())));
        }
        Ok(Self { n_qubits, amps })
    }

    pub fn apply(&mut self, g: &Gate) {
        apply_gate(&mut self.amps, g);
    }

    pub fn run(&mut self, circ: &Circuit) -> Result<()> {
        if circ.n_qubits != self.n_qubits {
            return Err(Error::Shape(format!("circuit has {} qubits, state has {}", circ.n_qubits, self.n_qubits)));
        }
        for g in &circ.gates {
            apply_gate(&mut self.amps, g);
        }
        if circ.meta.global_phase != 0.0 {
            let ph = Complex64::from_polar(1.0, circ.meta.global_phase);
            for a in &mut self.amps {
                *a *= ph;
            }
        }
        Ok(())
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Probability of measuring `qubit` in |0>.
    pub fn prob_zero(&self, qubit: usize) -> f64 {
        let bit = 1usize << qubit;
        self.amps.iter().enumerate().filter(|(i, _)| i & bit == 0).map(|(_, a)| a.norm_sqr()).sum()
    }

    pub fn inner(&self, other: &Self) -> Complex64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }
}

/// Unitary of a circuit by simulating every basis state (column k = U|k>).
pub fn unitary(circ: &Circuit) -> Result<DMatrix<Complex64>> {
    if circ.n_qubits > 12 {
        return Err(Error::Resource(format!("unitary of {} qubits exceeds the desk-scale budget", circ.n_qubits)));
    }
    let dim = 1usize << circ.n_qubits;
    let mut u = DMatrix::zeros(dim, dim);
    for k in 0..dim {
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[k] = Complex64::new(1.0, 0.0);
        let mut sv = StateVector { n_qubits: circ.n_qubits, amps };
        sv.run(circ)?;
        for (r, a) in sv.amps.into_iter().enumerate() {
            u[(r, k)] = a;
        }
    }
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bell_pair() {
        let mut c = Circuit::new(2);
        c.push(Gate::h(0));
        c.push(Gate::cnot(0, 1));
        let mut sv = StateVector::zero(2).unwrap();
        sv.run(&c).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((sv.amps[0].re - s).abs() < 1e-15);
        assert!((sv.amps[3].re - s).abs() < 1e-15);
        assert!(sv.amps[1].norm() < 1e-15 && sv.amps[2].norm() < 1e-15);
    }

    #[test]
    fn negative_control_fires_on_zero() {
        let g = Gate { kind: GateKind::X, target: 1, controls: vec![Control { qubit: 0, on: false }] };
        let mut sv = StateVector::zero(2).unwrap();
        sv.apply(&g);
        assert!((sv.amps[2].re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn unitary_is_unitary() {
        let mut c = Circuit::new(3);
        c.push(Gate::h(0));
        c.push(Gate::crz(0.7, &[0, 2], 1));
        c.push(Gate::single(GateKind::Ry(0.3), 2));
        c.push(Gate::single(GateKind::Sdg, 0));
        let u = unitary(&c).unwrap();
        let id = u.adjoint() * &u;
        for i in 0..8 {
            for j in 0..8 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((id[(i, j)] - Complex64::new(want, 0.0)).norm() < 1e-12);
            }
        }
    }
}
