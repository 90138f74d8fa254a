use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "theta")]
pub enum GateKind {
    H,
    X,
    Sdg,
    Rx(f64),
    Ry(f64),
    Rz(f64),
    Cnot,
    Mcx,
    Crz(f64),
    Cry(f64),
}

impl GateKind {
    pub fn name(&self) -> &'static str {
        match self {
            GateKind::H => "H",
            GateKind::X => "X",
            GateKind::Sdg => "SDG",
            GateKind::Rx(_) => "RX",
            GateKind::Ry(_) => "RY",
            GateKind::Rz(_) => "RZ",
            GateKind::Cnot => "CNOT",
            GateKind::Mcx => "MCX",
            GateKind::Crz(_) => "CRZ",
            GateKind::Cry(_) => "CRY",
        }
    }

    pub fn angle(&self) -> Option<f64> {
        match *self {
            GateKind::Rx(t) | GateKind::Ry(t) | GateKind::Rz(t) | GateKind::Crz(t) | GateKind::Cry(t) => Some(t),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Control {
    pub qubit: usize,
    /// true: fires on |1>, false: fires on |0>.
    pub on: bool,
}

impl Control {
    pub fn on(qubit: usize) -> Self {
        Self { qubit, on: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    #[serde(flatten)]
    pub kind: GateKind,
    pub target: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub controls: Vec<Control>,
}

impl Gate {
    pub fn single(kind: GateKind, target: usize) -> Self {
        Self { kind, target, controls: Vec::new() }
    }

    pub fn h(q: usize) -> Self {
        Self::single(GateKind::H, q)
    }

    pub fn x(q: usize) -> Self {
        Self::single(GateKind::X, q)
    }

    pub fn cnot(c: usize, t: usize) -> Self {
        Self { kind: GateKind::Cnot, target: t, controls: vec![Control::on(c)] }
    }

    pub fn mcx(controls: &[usize], t: usize) -> Self {
        Self { kind: GateKind::Mcx, target: t, controls: controls.iter().map(|&c| Control::on(c)).collect() }
    }

    pub fn crz(theta: f64, controls: &[usize], t: usize) -> Self {
        Self { kind: GateKind::Crz(theta), target: t, controls: controls.iter().map(|&c| Control::on(c)).collect() }
    }

    pub fn qubits(&self) -> impl Iterator<Item = usize> + '_ {
        std::iter::once(self.target).chain(self.controls.iter().map(|c| c.qubit))
    }

    /// Gates that are their own inverse.
    pub fn is_involution(&self) -> bool {
        matches!(self.kind, GateKind::H | GateKind::X | GateKind::Cnot | GateKind::Mcx)
    }

    /// Two-qubit gate cost: CNOT = 1; a rotation with c controls = 2c;
    /// an MCX with c controls = 1 (c = 1), 6 (Toffoli) or 6 (2c - 3)
    /// through a V-chain of Toffolis.
    pub fn two_qubit_cost(&self) -> usize {
        let c = self.controls.len();
        match self.kind {
            GateKind::Cnot => 1,
            GateKind::Mcx => match c {
                0 => 0,
                1 => 1,
                _ => 6 * (2 * c - 3),
            },
            GateKind::Crz(_) | GateKind::Cry(_) => 2 * c,
            _ => {
                if c > 0 {
                    2 * c
                } else {
                    0
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CircuitMeta {
    pub order: usize,
    pub steps: usize,
    pub alpha: f64,
    pub time: f64,
    /// Phase e^{i * global_phase} multiplying the gate product.
    pub global_phase: f64,
    pub system_qubits: usize,
    pub ancilla: Option<usize>,
    pub work: Option<usize>,
    pub control_toggles: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    pub n_qubits: usize,
    pub gates: Vec<Gate>,
    pub meta: CircuitMeta,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Self { n_qubits, gates: Vec::new(), meta: CircuitMeta { system_qubits: n_qubits, ..Default::default() } }
    }

    pub fn push(&mut self, g: Gate) {
        self.gates.push(g);
    }

    pub fn validate(&self) -> Result<()> {
        for (k, g) in self.gates.iter().enumerate() {
            let mut seen = Vec::new();
            for q in g.qubits() {
                if q >= self.n_qubits {
                    return Err(Error::Invalid(format!("gate {k} touches qubit {q} of {}", self.n_qubits)));
                }
                if seen.contains(&q) {
                    return Err(Error::Invalid(format!("gate {k} repeats qubit {q}")));
                }
                seen.push(q);
            }
            if let Some(t) = g.kind.angle() {
                if !t.is_finite() {
                    return Err(Error::Invalid(format!("gate {k} has a non-finite angle")));
                }
            }
        }
        Ok(())
    }

    pub fn two_qubit_count(&self) -> usize {
        self.gates.iter().map(Gate::two_qubit_cost).sum()
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for g in &self.gates {
            out.push_str(&serde_json::to_string(g).expect("gates serialize"));
            out.push('\n');
        }
        out
    }

    /// Cancel adjacent involution pairs and merge adjacent rotations about
    /// the same axis on the same target with identical controls.
    pub fn peephole(&mut self) {
        let mut out: Vec<Gate> = Vec::with_capacity(self.gates.len());
        for g in self.gates.drain(..) {
            if let Some(last) = out.last_mut() {
                if g.is_involution() && *last == g {
                    out.pop();
                    continue;
                }
                if last.target == g.target && last.controls == g.controls {
                    let merged = match (last.kind, g.kind) {
                        (GateKind::Rz(a), GateKind::Rz(b)) => Some(GateKind::Rz(a + b)),
                        (GateKind::Crz(a), GateKind::Crz(b)) => Some(GateKind::Crz(a + b)),
                        (GateKind::Rx(a), GateKind::Rx(b)) => Some(GateKind::Rx(a + b)),
                        _ => None,
                    };
                    if let Some(k) = merged {
                        last.kind = k;
                        continue;
                    }
                }
            }
            out.push(g);
        }
        self.gates = out;
    }
}
