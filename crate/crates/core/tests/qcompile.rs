use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use toposcope::linalg::expm_i_sym;
use toposcope::qcompile::{controlled_evolution, unitary, EvolutionConfig, StateVector};
use toposcope::susy::{parse_letters, susy_hamiltonian, PauliHamiltonian, PauliTerm};

fn adjacency(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<bool>> {
    let mut a = vec![vec![false; n]; n];
    for &(i, j) in edges {
        a[i][j] = true;
        a[j][i] = true;
    }
    a
}

/// Deviation of the compiled unitary from |0><0| x I + |1><1| x exp(-i H t / alpha)
/// with the work qubit starting in |0>.
fn controlled_error(h: &PauliHamiltonian, t: f64, cfg: &EvolutionConfig) -> f64 {
    let (circ, _) = controlled_evolution(h, t, cfg).unwrap();
    let u = unitary(&circ).unwrap();
    let hd = h.dense().unwrap() / cfg.alpha;
    let exact = expm_i_sym(&hd, t);
    let n = h.n;
    let dim = 1usize << n;
    let mut err = 0.0f64;
    for anc in 0..2usize {
        for s in 0..dim {
            let col = s | (anc << n);
            for s2 in 0..dim {
                for anc2 in 0..2usize {
                    for work in 0..2usize {
                        let row = s2 | (anc2 << n) | (work << (n + 1));
                        let want = if work == 1 || anc2 != anc {
                            Complex64::new(0.0, 0.0)
                        } else if anc == 0 {
                            Complex64::new(if s == s2 { 1.0 } else { 0.0 }, 0.0)
                        } else {
                            exact[(s2, s)]
                        };
                        err = err.max((u[(row, col)] - want).norm());
                    }
                }
            }
        }
    }
    err
}

#[test]
fn single_letter_products_are_exact() {
    for s in ["Z", "X", "zX", "XoZ", "ZIZ", "zzz", "oz"] {
        let letters = parse_letters(s).unwrap();
        let n = letters.len();
        let h = PauliHamiltonian::from_terms(n, vec![PauliTerm::new(0.7, letters)]).unwrap();
        let err = controlled_error(&h, 1.3, &EvolutionConfig { order: 1, steps: 1, alpha: 1.0 });
        assert!(err < 1e-12, "{s}: {err}");
    }
}

#[test]
fn exchange_term_is_exact() {
    let letters = parse_letters("XZXz").unwrap();
    let h = PauliHamiltonian::from_terms(4, vec![PauliTerm { coeff: -0.9, letters, exchange: true }]).unwrap();
    let err = controlled_error(&h, 0.8, &EvolutionConfig { order: 1, steps: 1, alpha: 1.0 });
    assert!(err < 1e-12, "{err}");
}

#[test]
fn identity_offset_becomes_controlled_phase() {
    let h = PauliHamiltonian::from_terms(
        2,
        vec![PauliTerm::new(2.5, parse_letters("II").unwrap()), PauliTerm::new(0.3, parse_letters("ZI").unwrap())],
    )
    .unwrap();
    let err = controlled_error(&h, 0.9, &EvolutionConfig { order: 1, steps: 1, alpha: 1.0 });
    assert!(err < 1e-12, "{err}");
}

#[test]
fn commuting_projector_groups_are_exact_in_one_step() {
    // Diagonal terms commute, so a single first-order step is exact.
    let h = PauliHamiltonian::from_terms(
        3,
        vec![
            PauliTerm::new(0.4, parse_letters("zzZ").unwrap()),
            PauliTerm::new(-0.2, parse_letters("ozZ").unwrap()),
            PauliTerm::new(0.9, parse_letters("ooZ").unwrap()),
            PauliTerm::new(0.1, parse_letters("zoZ").unwrap()),
        ],
    )
    .unwrap();
    let err = controlled_error(&h, 1.1, &EvolutionConfig { order: 1, steps: 1, alpha: 1.0 });
    assert!(err < 1e-12, "{err}");
}

#[test]
fn susy_path_graph_converges_with_steps() {
    let adj = adjacency(3, &[(0, 1), (1, 2)]);
    let h = susy_hamiltonian(&adj).unwrap();
    let e1 = controlled_error(&h, 1.0, &EvolutionConfig { order: 2, steps: 4, alpha: 2.0 });
    let e2 = controlled_error(&h, 1.0, &EvolutionConfig { order: 2, steps: 8, alpha: 2.0 });
    assert!(e2 < e1 / 3.0, "{e1} {e2}");
    assert!(e2 < 1e-2, "{e2}");
}

fn trotter_slope(order: usize) -> f64 {
    let adj = adjacency(4, &[(0, 1), (1, 2), (2, 3)]);
    let h = susy_hamiltonian(&adj).unwrap();
    let steps = [4usize, 8, 16];
    let errs: Vec<f64> = steps
        .iter()
        .map(|&s| controlled_error(&h, 1.0, &EvolutionConfig { order, steps: s, alpha: 2.0 }))
        .collect();
    let xs: Vec<f64> = steps.iter().map(|&s| (1.0 / s as f64).ln()).collect();
    let ys: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / 3.0, ys.iter().sum::<f64>() / 3.0);
    let num: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    num / den
}

#[test]
fn trotter_error_exponents() {
    let s1 = trotter_slope(1);
    let s2 = trotter_slope(2);
    assert!((s1 - 1.0).abs() < 0.25, "first order slope {s1}");
    assert!((s2 - 2.0).abs() < 0.3, "second order slope {s2}");
}

#[test]
fn work_qubit_returns_to_zero() {
    let adj = adjacency(4, &[(0, 1), (1, 2), (2, 3), (0, 3), (0, 2)]);
    let h = susy_hamiltonian(&adj).unwrap();
    let (circ, _) = controlled_evolution(&h, 0.5, &EvolutionConfig { order: 2, steps: 2, alpha: 4.0 }).unwrap();
    let mut sv = StateVector::zero(circ.n_qubits).unwrap();
    for q in 0..=4 {
        sv.apply(&toposcope::qcompile::Gate::h(q));
    }
    sv.run(&circ).unwrap();
    assert!((sv.prob_zero(5) - 1.0).abs() < 1e-12);
    assert!((sv.norm_sqr() - 1.0).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn random_diagonal_hamiltonians_compile_exactly(
        spec in prop::collection::vec((prop::sample::select(vec!['I', 'Z', 'z', 'o']), -1.0f64..1.0), 9),
    ) {
        let mut terms = Vec::new();
        for chunk in spec.chunks(3) {
            let s: String = chunk.iter().map(|c| c.0).collect();
            terms.push(PauliTerm::new(chunk[0].1, parse_letters(&s).unwrap()));
        }
        let h = PauliHamiltonian::from_terms(3, terms).unwrap();
        let err = controlled_error(&h, 0.7, &EvolutionConfig { order: 1, steps: 1, alpha: 1.0 });
        prop_assert!(err < 1e-12);
    }
}

#[test]
fn dense_helper_matches_exponential_of_zero() {
    let z = DMatrix::<f64>::zeros(2, 2);
    let e = expm_i_sym(&z, 3.0);
    assert!((e[(0, 0)] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
}
