//! Controlled Trotter evolution for letter-product Hamiltonians.
//!
//! Each term is conjugated to a single Z rotation: exchange terms by a
//! CNOT that turns X_a X_b (I - Z_a Z_b)/2 into X_a o_b, X letters by H,
//! and a CNOT ladder that collects the Z parity on the highest active qubit.
//! Projector letters become controls; z-controls are realized by X
//! toggles. The ancilla together with all controls is computed into a work
//! qubit, which then controls the rotation.

use super::ir::{Circuit, Gate, GateKind};
use crate::error::{Error, Result};
use crate::susy::{Letter, PauliHamiltonian, PauliTerm};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layout {
    pub system: usize,
    pub ancilla: usize,
    pub work: usize,
}

impl Layout {
    pub fn new(system: usize) -> Self {
        Self { system, ancilla: system, work: system + 1 }
    }

    pub fn n_qubits(&self) -> usize {
        self.system + 2
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionConfig {
    pub order: usize,
    pub steps: usize,
    pub alpha: f64,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        Self { order: 2, steps: 1, alpha: 1.0 }
    }
}

/// Smallest scale with ||H - c_I|| dt / alpha <= margin * pi, using the
/// coefficient-sum bound on the norm.
pub fn choose_alpha(h: &PauliHamiltonian, dt: f64, margin: f64) -> f64 {
    let bound = h.norm_bound() * dt.abs();
    (bound / (margin * std::f64::consts::PI)).max(1.0)
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct GroupKey {
    active: Vec<(usize, Letter)>,
    exchange: bool,
    control_qubits: Vec<usize>,
}

#[derive(Debug, Clone)]
struct Prepared {
    key: GroupKey,
    pre: Vec<Gate>,
    target: Option<usize>,
    /// Control polarity per control qubit (true: fires on |1>).
    polarity: Vec<bool>,
    coeff: f64,
}

fn prepare(term: &PauliTerm) -> Prepared {
    let mut eff = term.letters.clone();
    let mut pre = Vec::new();
    if term.exchange {
        let xs = term.x_qubits();
        pre.push(Gate::cnot(xs[0], xs[1]));
        eff[xs[1]] = Letter::P1;
    }
    for (q, l) in eff.iter_mut().enumerate() {
        if *l == Letter::X {
            pre.push(Gate::h(q));
            *l = Letter::Z;
        }
    }
    let active: Vec<usize> = (0..eff.len()).filter(|&q| eff[q] == Letter::Z).collect();
    let target = active.last().copied();
    if let Some(r) = target {
        for &q in &active[..active.len() - 1] {
            pre.push(Gate::cnot(q, r));
        }
    }
    let control_qubits: Vec<usize> = (0..eff.len()).filter(|&q| eff[q].is_control()).collect();
    let polarity = control_qubits.iter().map(|&q| eff[q] == Letter::P1).collect();
    let key = GroupKey {
        active: term.letters.iter().enumerate().filter(|(_, l)| l.is_active()).map(|(q, &l)| (q, l)).collect(),
        exchange: term.exchange,
        control_qubits,
    };
    Prepared { key, pre, target, polarity, coeff: term.coeff }
}

fn mask_of(p: &[bool]) -> u64 {
    p.iter().enumerate().fold(0, |m, (k, &b)| if b { m | (1 << k) } else { m })
}

/// Visiting order for control masks: the reflected Gray code when the
/// masks cover the full hypercube, otherwise greedy nearest neighbour in
/// Hamming distance starting from the lowest mask (lowest mask on ties).
pub fn gray_order(masks: &[u64], bits: usize) -> Vec<usize> {
    let n = masks.len();
    if n == 0 {
        return Vec::new();
    }
    if bits < 63 && n == 1usize << bits {
        let pos: std::collections::HashMap<u64, usize> = masks.iter().enumerate().map(|(k, &m)| (m, k)).collect();
        if pos.len() == n {
            return (0..n as u64).map(|k| pos[&(k ^ (k >> 1))]).collect();
        }
    }
    let mut left: Vec<usize> = (0..n).collect();
    left.sort_by_key(|&k| masks[k]);
    let mut order = vec![left.remove(0)];
    while !left.is_empty() {
        let cur = masks[*order.last().unwrap()];
        let (best, _) = left
            .iter()
            .enumerate()
            .min_by_key(|(_, &k)| ((masks[k] ^ cur).count_ones(), masks[k]))
            .expect("non-empty");
        order.push(left.remove(best));
    }
    order
}

#[derive(Debug, Clone)]
struct Group {
    pre: Vec<Gate>,
    target: Option<usize>,
    controls: Vec<usize>,
    members: Vec<(Vec<bool>, f64)>,
}

fn group_terms(h: &PauliHamiltonian) -> Vec<Group> {
    let mut groups: Vec<(GroupKey, Group)> = Vec::new();
    for t in &h.terms {
        let p = prepare(t);
        match groups.iter_mut().find(|(k, _)| *k == p.key) {
            Some((_, g)) => g.members.push((p.polarity, p.coeff)),
            None => {
                let g = Group {
                    pre: p.pre,
                    target: p.target,
                    controls: p.key.control_qubits.clone(),
                    members: vec![(p.polarity, p.coeff)],
                };
                groups.push((p.key, g));
            }
        }
    }
    groups
        .into_iter()
        .map(|(_, mut g)| {
            let masks: Vec<u64> = g.members.iter().map(|m| mask_of(&m.0)).collect();
            let order = gray_order(&masks, g.controls.len());
            g.members = order.into_iter().map(|k| g.members[k].clone()).collect();
            g
        })
        .collect()
}

struct Emitter<'a> {
    circ: &'a mut Circuit,
    layout: Layout,
    toggles: usize,
}

impl Emitter<'_> {
    fn toggle(&mut self, q: usize) {
        self.circ.push(Gate::x(q));
        self.toggles += 1;
    }

    /// exp(-i tau * sum_k c_k P_k) for the members of one group, controlled
    /// by the ancilla. `reverse` walks the members backwards.
    fn group(&mut self, g: &Group, tau: f64, reverse: bool) {
        let (anc, work) = (self.layout.ancilla, self.layout.work);
        for gate in &g.pre {
            self.circ.push(gate.clone());
        }
        let members: Vec<&(Vec<bool>, f64)> =
            if reverse { g.members.iter().rev().collect() } else { g.members.iter().collect() };
        let mut current = vec![true; g.controls.len()];
        let mut ctl = vec![anc];
        ctl.extend(&g.controls);
        for (pol, coeff) in members {
            for (k, (&want, have)) in pol.iter().zip(current.iter_mut()).enumerate() {
                if want != *have {
                    self.toggle(g.controls[k]);
                    *have = want;
                }
            }
            let theta = coeff * tau;
            match g.target {
                Some(r) if g.controls.is_empty() => self.circ.push(Gate::crz(2.0 * theta, &[anc], r)),
                Some(r) => {
                    self.circ.push(Gate::mcx(&ctl, work));
                    self.circ.push(Gate::crz(2.0 * theta, &[work], r));
                    self.circ.push(Gate::mcx(&ctl, work));
                }
                None => {
                    self.circ.push(Gate::mcx(&ctl, work));
                    self.circ.push(Gate::single(GateKind::Rz(-theta), work));
                    self.circ.push(Gate::mcx(&ctl, work));
                    self.circ.meta.global_phase -= theta / 2.0;
                }
            }
        }
        for (k, &have) in current.iter().enumerate() {
            if !have {
                self.toggle(g.controls[k]);
            }
        }
        for gate in g.pre.iter().rev() {
            self.circ.push(gate.clone());
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompileStats {
    pub n_terms: usize,
    pub n_groups: usize,
    pub two_qubit_count: usize,
    pub control_toggles: usize,
    pub max_controls: usize,
}

/// Circuit for |0><0| (x) I + |1><1| (x) exp(-i (H / alpha) t) on
/// system + ancilla + work qubits (work returned to |0>).
pub fn controlled_evolution(h: &PauliHamiltonian, time: f64, cfg: &EvolutionConfig) -> Result<(Circuit, CompileStats)> {
    if !(cfg.order == 1 || cfg.order == 2) {
        return Err(Error::Invalid(format!("Trotter order must be 1 or 2, got {}", cfg.order)));
    }
    if cfg.steps == 0 {
        return Err(Error::Invalid("Trotter steps must be positive".into()));
    }
    if !(cfg.alpha > 0.0 && cfg.alpha.is_finite()) || !time.is_finite() {
        return Err(Error::Invalid("alpha must be positive and time finite".into()));
    }
    let layout = Layout::new(h.n);
    if layout.n_qubits() > super::sim::MAX_SIM_QUBITS {
        return Err(Error::Resource(format!("{} qubits exceed the simulator limit", layout.n_qubits())));
    }
    let dt = time / cfg.steps as f64;
    let phase = h.norm_bound() * dt.abs() / cfg.alpha;
    if phase > std::f64::consts::PI {
        let suggested = (h.norm_bound() * time.abs() / (cfg.alpha * std::f64::consts::PI)).ceil() as usize;
        return Err(Error::StepBudget { phase, suggested_steps: suggested.max(cfg.steps + 1) });
    }
    for t in &h.terms {
        if t.is_identity() {
            log::warn!("identity term outside the offset is ignored");
        }
    }
    let groups = group_terms(h);
    let mut circ = Circuit::new(layout.n_qubits());
    circ.meta.order = cfg.order;
    circ.meta.steps = cfg.steps;
    circ.meta.alpha = cfg.alpha;
    circ.meta.time = time;
    circ.meta.system_qubits = h.n;
    circ.meta.ancilla = Some(layout.ancilla);
    circ.meta.work = Some(layout.work);
    let tau = dt / cfg.alpha;
    let mut em = Emitter { circ: &mut circ, layout, toggles: 0 };
    for _ in 0..cfg.steps {
        if cfg.order == 1 {
            for g in &groups {
                em.group(g, tau, false);
            }
        } else {
            for g in &groups {
                em.group(g, tau / 2.0, false);
            }
            for g in groups.iter().rev() {
                em.group(g, tau / 2.0, true);
            }
        }
    }
    let toggles = em.toggles;
    if h.identity_offset != 0.0 {
        let phi = -h.identity_offset * time / cfg.alpha;
        circ.push(Gate::single(GateKind::Rz(phi), layout.ancilla));
        circ.meta.global_phase += phi / 2.0;
    }
    let before = circ.gates.iter().filter(|g| g.kind == GateKind::X && g.controls.is_empty()).count();
    circ.peephole();
    let after = circ.gates.iter().filter(|g| g.kind == GateKind::X && g.controls.is_empty()).count();
    circ.meta.control_toggles = toggles.saturating_sub(before - after);
    circ.validate()?;
    let stats = CompileStats {
        n_terms: h.terms.len(),
        n_groups: groups.len(),
        two_qubit_count: circ.two_qubit_count(),
        control_toggles: circ.meta.control_toggles,
        max_controls: circ.gates.iter().map(|g| g.controls.len()).max().unwrap_or(0),
    };
    Ok((circ, stats))
}

/// Two-qubit cost of textbook phase estimation with `bits` readout bits:
/// 2^j repetitions of the controlled step for j < bits, plus the inverse
/// QFT's bits(bits-1)/2 controlled phases at 2 CNOTs each.
pub fn baseline_qpe_cost(per_step_cost: usize, bits: u32) -> usize {
    ((1usize << bits) - 1) * per_step_cost + (bits as usize * (bits as usize).saturating_sub(1) / 2) * 2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompileReport {
    pub stats: CompileStats,
    pub phase_bits: u32,
    pub compiled_two_qubit: usize,
    pub baseline_two_qubit: usize,
    pub ratio: f64,
}

/// Compiled one-ancilla controlled evolution against textbook phase
/// estimation built from the same controlled step.
pub fn compile_report(h: &PauliHamiltonian, time: f64, cfg: &EvolutionConfig, phase_bits: u32) -> Result<(Circuit, CompileReport)> {
    if phase_bits == 0 || phase_bits > 30 {
        return Err(Error::Invalid(format!("phase_bits must be in 1..=30, got {phase_bits}")));
    }
    let (circ, stats) = controlled_evolution(h, time, cfg)?;
    let compiled = stats.two_qubit_count;
    let baseline = baseline_qpe_cost(compiled, phase_bits);
    let ratio = if compiled == 0 { f64::INFINITY } else { baseline as f64 / compiled as f64 };
    Ok((circ, CompileReport { stats, phase_bits, compiled_two_qubit: compiled, baseline_two_qubit: baseline, ratio }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gray_full_cube() {
        let masks = vec![0, 1, 2, 3];
        let order = gray_order(&masks, 2);
        let seq: Vec<u64> = order.iter().map(|&k| masks[k]).collect();
        assert_eq!(seq, vec![0, 1, 3, 2]);
    }

    #[test]
    fn gray_partial_greedy() {
        let masks = vec![7, 0, 3];
        let order = gray_order(&masks, 3);
        let seq: Vec<u64> = order.iter().map(|&k| masks[k]).collect();
        assert_eq!(seq, vec![0, 3, 7]);
    }

    #[test]
    fn baseline_formula() {
        assert_eq!(baseline_qpe_cost(10, 1), 10);
        assert_eq!(baseline_qpe_cost(10, 3), 7 * 10 + 6);
    }

    #[test]
    fn step_budget_is_enforced() {
        let h = PauliHamiltonian::from_terms(1, vec![PauliTerm::new(4.0, vec![Letter::Z])]).unwrap();
        let cfg = EvolutionConfig { order: 1, steps: 1, alpha: 1.0 };
        assert!(matches!(controlled_evolution(&h, 1.0, &cfg), Err(Error::StepBudget { .. })));
    }
}
