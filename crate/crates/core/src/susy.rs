//! Supercharge and SUSY Hamiltonian on one qubit per vertex.
//!
//! Qubit q is bit q of a basis index; an excited set that forms a clique
//! with j vertices is a (j-1)-simplex of the clique complex. The raising
//! part of Q_i inserts vertex i with the Jordan-Wigner sign and is gated by
//! `z` predicates on every non-neighbour of i. The vacuum is excluded from
//! the domain of Q so that the complex is not augmented, which makes the
//! j-excitation block equal to L_(j-1) for every j >= 1.

use crate::complex::cliques;
use crate::error::{Error, Result};
use crate::io::fmt_f64;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Letter {
    I,
    X,
    Z,
    /// Projector onto |0>: (I + Z)/2.
    P0,
    /// Projector onto |1>: (I - Z)/2.
    P1,
}

impl Letter {
    pub fn as_char(self) -> char {
        match self {
            Letter::I => 'I',
            Letter::X => 'X',
            Letter::Z => 'Z',
            Letter::P0 => 'z',
            Letter::P1 => 'o',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        Some(match c {
            'I' => Letter::I,
            'X' => Letter::X,
            'Z' => Letter::Z,
            'z' => Letter::P0,
            'o' => Letter::P1,
            _ => return None,
        })
    }

    pub fn is_control(self) -> bool {
        matches!(self, Letter::P0 | Letter::P1)
    }

    pub fn is_active(self) -> bool {
        matches!(self, Letter::X | Letter::Z)
    }
}

pub fn letters_to_string(letters: &[Letter]) -> String {
    letters.iter().map(|l| l.as_char()).collect()
}

pub fn parse_letters(s: &str) -> Result<Vec<Letter>> {
    s.chars()
        .map(|c| Letter::from_char(c).ok_or_else(|| Error::Invalid(format!("unknown letter {c:?}"))))
        .collect()
}

/// coeff * (tensor product of letters). With `exchange`, the term carries
/// exactly two X letters and is multiplied by the projector onto the
/// subspace where those two qubits differ, i.e. X_a X_b (I - Z_a Z_b)/2,
/// which is the Hermitian hop |01><10| + |10><01|.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliTerm {
    pub coeff: f64,
    #[serde(with = "letters_serde")]
    pub letters: Vec<Letter>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub exchange: bool,
}

mod letters_serde {
    use super::{letters_to_string, parse_letters, Letter};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(l: &[Letter], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&letters_to_string(l))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Letter>, D::Error> {
        let s = String::deserialize(d)?;
        parse_letters(&s).map_err(serde::de::Error::custom)
    }
}

impl PauliTerm {
    pub fn new(coeff: f64, letters: Vec<Letter>) -> Self {
        Self { coeff, letters, exchange: false }
    }

    pub fn is_identity(&self) -> bool {
        !self.exchange && self.letters.iter().all(|&l| l == Letter::I)
    }

    pub fn x_qubits(&self) -> Vec<usize> {
        self.letters.iter().enumerate().filter(|(_, &l)| l == Letter::X).map(|(q, _)| q).collect()
    }

    /// Image of basis state `b` and the amplitude, or None if annihilated.
    pub fn apply(&self, b: usize) -> Option<(usize, f64)> {
        let mut out = b;
        let mut amp = self.coeff;
        for (q, &l) in self.letters.iter().enumerate() {
            let bit = (b >> q) & 1;
            match l {
                Letter::I => {}
                Letter::X => out ^= 1 << q,
                Letter::Z => {
                    if bit == 1 {
                        amp = -amp;
                    }
                }
                Letter::P0 => {
                    if bit == 1 {
                        return None;
                    }
                }
                Letter::P1 => {
                    if bit == 0 {
                        return None;
                    }
                }
            }
        }
        if self.exchange {
            let xs = self.x_qubits();
            if xs.len() != 2 || ((b >> xs[0]) & 1) == ((b >> xs[1]) & 1) {
                return None;
            }
        }
        Some((out, amp))
    }
}

impl fmt::Display for PauliTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}{}", fmt_f64(self.coeff), letters_to_string(&self.letters), if self.exchange { " exchange" } else { "" })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliHamiltonian {
    pub n: usize,
    pub identity_offset: f64,
    pub terms: Vec<PauliTerm>,
}

impl PauliHamiltonian {
    /// Merge like terms, move identity terms into the offset and drop zeros.
    pub fn from_terms(n: usize, raw: Vec<PauliTerm>) -> Result<Self> {
        let mut merged: BTreeMap<(Vec<Letter>, bool), f64> = BTreeMap::new();
        let mut offset = 0.0;
        for t in raw {
            if t.letters.len() != n {
                return Err(Error::Shape(format!("term has {} letters for {} qubits", t.letters.len(), n)));
            }
            if !t.coeff.is_finite() {
                return Err(Error::Invalid("non-finite term coefficient".into()));
            }
            if t.exchange && t.x_qubits().len() != 2 {
                return Err(Error::Invalid("exchange terms need exactly two X letters".into()));
            }
            if t.is_identity() {
                offset += t.coeff;
            } else {
                *merged.entry((t.letters, t.exchange)).or_default() += t.coeff;
            }
        }
        let terms = merged
            .into_iter()
            .filter(|(_, c)| c.abs() > 1e-15)
            .map(|((letters, exchange), coeff)| PauliTerm { coeff, letters, exchange })
            .collect();
        Ok(Self { n, identity_offset: offset, terms })
    }

    /// Sparse action on a state of 2^n real or complex amplitudes.
    pub fn apply_real(&self, v: &[f64]) -> Vec<f64> {
        let mut out: Vec<f64> = v.iter().map(|x| x * self.identity_offset).collect();
        for (b, &x) in v.iter().enumerate() {
            if x == 0.0 {
                continue;
            }
            for t in &self.terms {
                if let Some((b2, a)) = t.apply(b) {
                    out[b2] += a * x;
                }
            }
        }
        out
    }

    pub fn dense(&self) -> Result<DMatrix<f64>> {
        if self.n > 12 {
            return Err(Error::Resource(format!("dense {}-qubit operator exceeds the desk-scale budget", self.n)));
        }
        let dim = 1usize << self.n;
        let mut m = DMatrix::identity(dim, dim) * self.identity_offset;
        for b in 0..dim {
            for t in &self.terms {
                if let Some((b2, a)) = t.apply(b) {
                    m[(b2, b)] += a;
                }
            }
        }
        Ok(m)
    }

    /// Sum of |coefficients| of non-identity terms; bounds the spectral
    /// radius of H - c_I since every letter product has norm at most 1.
    pub fn norm_bound(&self) -> f64 {
        self.terms.iter().map(|t| t.coeff.abs()).sum()
    }

    /// Block of H on the given basis states (row/column order as given).
    pub fn block(&self, basis: &[usize]) -> DMatrix<f64> {
        let index: HashMap<usize, usize> = basis.iter().enumerate().map(|(k, &b)| (b, k)).collect();
        let mut m = DMatrix::identity(basis.len(), basis.len()) * self.identity_offset;
        for (col, &b) in basis.iter().enumerate() {
            for t in &self.terms {
                if let Some((b2, a)) = t.apply(b) {
                    if let Some(&row) = index.get(&b2) {
                        m[(row, col)] += a;
                    }
                }
            }
        }
        m
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = serde_json::json!({"n": self.n, "c_I": self.identity_offset}).to_string();
        out.push('\n');
        for t in &self.terms {
            out.push_str(&serde_json::to_string(t).expect("terms serialize"));
            out.push('\n');
        }
        out
    }
}

/// One raising piece: Z on qubits below `pivot`, the raising operator
/// |1><0| on `pivot` (written as X in `letters`) and z on every
/// non-neighbour of the pivot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChargeTerm {
    pub pivot: usize,
    #[serde(with = "letters_serde")]
    pub letters: Vec<Letter>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Supercharge {
    pub n: usize,
    pub terms: Vec<ChargeTerm>,
    /// Q acts as zero on the vacuum (no augmentation map).
    pub vacuum_excluded: bool,
}

impl Supercharge {
    pub fn apply_basis(&self, b: usize) -> Vec<(usize, f64)> {
        let mut out = Vec::new();
        if self.vacuum_excluded && b == 0 {
            return out;
        }
        'terms: for t in &self.terms {
            if (b >> t.pivot) & 1 == 1 {
                continue;
            }
            let mut sign = 1.0;
            for (q, &l) in t.letters.iter().enumerate() {
                let bit = (b >> q) & 1;
                match l {
                    Letter::Z if bit == 1 => sign = -sign,
                    Letter::P0 if bit == 1 => continue 'terms,
                    Letter::P1 if bit == 0 => continue 'terms,
                    _ => {}
                }
            }
            out.push((b | (1 << t.pivot), sign));
        }
        out
    }

    pub fn dense(&self) -> Result<DMatrix<f64>> {
        if self.n > 12 {
            return Err(Error::Resource(format!("dense {}-qubit supercharge exceeds the desk-scale budget", self.n)));
        }
        let dim = 1usize << self.n;
        let mut q = DMatrix::zeros(dim, dim);
        for b in 0..dim {
            for (b2, s) in self.apply_basis(b) {
                q[(b2, b)] += s;
            }
        }
        Ok(q)
    }
}

fn neighbours(n: usize, adj: &[Vec<bool>], i: usize) -> Vec<bool> {
    (0..n).map(|j| j == i || adj[i][j]).collect()
}

pub const MAX_QUBITS: usize = 14;

pub fn supercharge(adj: &[Vec<bool>]) -> Result<Supercharge> {
    let n = adj.len();
    if n == 0 || n > MAX_QUBITS {
        return Err(Error::Resource(format!("supercharge supports 1..={MAX_QUBITS} vertices, got {n}")));
    }
    let mut terms = Vec::with_capacity(n);
    for i in 0..n {
        let nb = neighbours(n, adj, i);
        let letters = (0..n)
            .map(|q| {
                if q == i {
                    Letter::X
                } else if !nb[q] {
                    Letter::P0
                } else if q < i {
                    Letter::Z
                } else {
                    Letter::I
                }
            })
            .collect();
        terms.push(ChargeTerm { pivot: i, letters });
    }
    let q = Supercharge { n, terms, vacuum_excluded: true };
    if n <= 10 {
        let m = q.dense()?;
        let sq = &m * &m;
        let res = sq.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if res > 1e-10 {
            return Err(Error::Internal(format!("Q^2 is nonzero (max entry {res:e})")));
        }
    }
    Ok(q)
}

/// H = {Q, Q^dagger} written out term by term.
///
/// With c_i the Jordan-Wigner raising operators and P_i the non-neighbour
/// projectors, the anticommutator of sum_i c_i^+ P_i is
///   sum_i P_i + sum_{i<j non-adjacent} (c_i^+ c_j + h.c.) P'_ij,
/// where P'_ij projects every other non-neighbour of i or j to |0>.
/// Removing the vacuum from the domain subtracts |u><u| + n|0><0| with
/// |u> the uniform single-excitation vector.
pub fn susy_hamiltonian(adj: &[Vec<bool>]) -> Result<PauliHamiltonian> {
    let n = adj.len();
    if n == 0 || n > MAX_QUBITS {
        return Err(Error::Resource(format!("SUSY Hamiltonian supports 1..={MAX_QUBITS} vertices, got {n}")));
    }
    let mut raw = Vec::new();
    for i in 0..n {
        let nb = neighbours(n, adj, i);
        let letters = (0..n).map(|q| if nb[q] { Letter::I } else { Letter::P0 }).collect();
        raw.push(PauliTerm::new(1.0, letters));
    }
    for i in 0..n {
        for j in i + 1..n {
            if adj[i][j] {
                continue;
            }
            let (ni, nj) = (neighbours(n, adj, i), neighbours(n, adj, j));
            let letters = (0..n)
                .map(|q| {
                    if q == i || q == j {
                        Letter::X
                    } else if !ni[q] || !nj[q] {
                        Letter::P0
                    } else if q > i && q < j {
                        Letter::Z
                    } else {
                        Letter::I
                    }
                })
                .collect();
            raw.push(PauliTerm { coeff: 1.0, letters, exchange: true });
        }
    }
    for i in 0..n {
        let letters = (0..n).map(|q| if q == i { Letter::P1 } else { Letter::P0 }).collect();
        raw.push(PauliTerm::new(-1.0, letters));
        for j in i + 1..n {
            let letters = (0..n).map(|q| if q == i || q == j { Letter::X } else { Letter::P0 }).collect();
            raw.push(PauliTerm { coeff: -1.0, letters, exchange: true });
        }
    }
    raw.push(PauliTerm::new(-(n as f64), vec![Letter::P0; n]));
    let h = PauliHamiltonian::from_terms(n, raw)?;
    if n <= 10 {
        let m = h.dense()?;
        let herm = (&m - m.transpose()).iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if herm > 1e-10 {
            return Err(Error::Internal(format!("H is not Hermitian (residual {herm:e})")));
        }
    }
    Ok(h)
}

/// Total excitation number N = sum_q (I - Z_q)/2 as a dense diagonal.
pub fn number_operator(n: usize) -> DMatrix<f64> {
    let dim = 1usize << n;
    DMatrix::from_diagonal(&nalgebra::DVector::from_fn(dim, |b, _| b.count_ones() as f64))
}

/// Basis states whose excited sets are the k-vertex cliques, in
/// lexicographic clique order.
pub fn sector_basis(adj: &[Vec<bool>], k: usize) -> Vec<usize> {
    cliques(adj, k).into_iter().map(|c| c.iter().fold(0usize, |b, &v| b | (1 << v))).collect()
}

pub fn sector_block(h: &PauliHamiltonian, k: usize, adj: &[Vec<bool>]) -> Result<DMatrix<f64>> {
    if k > h.n {
        return Err(Error::Invalid(format!("sector {k} exceeds {} qubits", h.n)));
    }
    Ok(h.block(&sector_basis(adj, k)))
}

/// Oriented coboundary from (p)-cliques to (p+1)-cliques, both in lexicographic order
/// (p counts vertices).
fn clique_coboundary(adj: &[Vec<bool>], p: usize) -> DMatrix<f64> {
    let lower = cliques(adj, p);
    let upper = cliques(adj, p + 1);
    let index: HashMap<Vec<usize>, usize> = lower.iter().enumerate().map(|(k, c)| (c.clone(), k)).collect();
    let mut d = DMatrix::zeros(upper.len(), lower.len());
    for (r, s) in upper.iter().enumerate() {
        for skip in 0..s.len() {
            let face: Vec<usize> = s.iter().enumerate().filter(|(k, _)| *k != skip).map(|(_, v)| *v).collect();
            if let Some(&c) = index.get(&face) {
                d[(r, c)] = if skip % 2 == 0 { 1.0 } else { -1.0 };
            }
        }
    }
    d
}

/// Hodge Laplacian of the clique complex on (deg)-simplices, i.e. cliques
/// with deg+1 vertices; no augmentation below degree 0.
pub fn clique_laplacian(adj: &[Vec<bool>], deg: usize) -> DMatrix<f64> {
    let size = cliques(adj, deg + 1).len();
    let mut l = DMatrix::zeros(size, size);
    if deg >= 1 {
        let down = clique_coboundary(adj, deg);
        l += &down * down.transpose();
    }
    let up = clique_coboundary(adj, deg + 1);
    l += up.transpose() * &up;
    l
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorCheck {
    pub k: usize,
    pub dim: usize,
    pub max_deviation: f64,
    pub kernel_dim: usize,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockReport {
    pub sectors: Vec<SectorCheck>,
    pub vacuum_energy: f64,
    pub off_sector_leakage: f64,
}

impl BlockReport {
    pub fn pass(&self) -> bool {
        self.sectors.iter().all(|s| s.pass) && self.vacuum_energy.abs() <= 1e-9 && self.off_sector_leakage <= 1e-9
    }
}

/// Compare sorted sector spectra with the clique-complex Laplacians L_(k-1), k = 1..=k_max.
pub fn verify_block_equivalence(adj: &[Vec<bool>], k_max: usize) -> Result<BlockReport> {
    let n = adj.len();
    if n > 10 {
        return Err(Error::Resource(format!("block verification is limited to 10 vertices, got {n}")));
    }
    let h = susy_hamiltonian(adj)?;
    let mut sectors = Vec::new();
    for k in 1..=k_max.min(n) {
        let block = sector_block(&h, k, adj)?;
        let lap = clique_laplacian(adj, k - 1);
        let a = crate::linalg::sym_eigenvalues(&block);
        let b = crate::linalg::sym_eigenvalues(&lap);
        let dev = if a.len() != b.len() {
            f64::INFINITY
        } else {
            a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
        };
        let scale = b.last().copied().unwrap_or(0.0).max(1.0);
        let kernel_dim = a.iter().filter(|&&v| v <= 1e-8 * scale).count();
        sectors.push(SectorCheck { k, dim: a.len(), max_deviation: dev, kernel_dim, pass: dev <= 1e-9 });
    }
    let vacuum_energy = h.block(&[0])[(0, 0)];
    // Clique states must not couple to non-clique states.
    let mut valid = vec![false; 1 << n];
    for k in 0..=n {
        for b in sector_basis(adj, k) {
            valid[b] = true;
        }
    }
    let mut leak = 0.0f64;
    for b in 0..(1usize << n) {
        if !valid[b] {
            continue;
        }
        for t in &h.terms {
            if let Some((b2, a)) = t.apply(b) {
                if !valid[b2] {
                    leak = leak.max(a.abs());
                }
            }
        }
    }
    Ok(BlockReport { sectors, vacuum_energy, off_sector_leakage: leak })
}
