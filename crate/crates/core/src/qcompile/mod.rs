//! Gate-level compilation of letter-product Hamiltonians and a statevector
//! simulator to run the result.

pub mod compile;
pub mod ir;
pub mod sim;

pub use compile::{baseline_qpe_cost, choose_alpha, compile_report, CompileReport, controlled_evolution, gray_order, CompileStats, EvolutionConfig, Layout};
pub use ir::{Circuit, CircuitMeta, Control, Gate, GateKind};
pub use sim::{unitary, StateVector};
