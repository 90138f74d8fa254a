//! Hodge Laplacians, spectra, Hodge-decomposition projectors, persistent
//! Laplacians and the gap-persistence bound checker.

use crate::complex::Complex;
use crate::embedding::PointCloud;
use crate::error::{Error, Result};
use crate::io::fmt_f64;
use crate::linalg::{max_abs, pinv_sym, sym_eigen, sym_eigenvalues, sym_norm2};
use crate::persistence::{compute_persistence, rips_filtration};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

pub const DEFAULT_TAU0_REL: f64 = 1e-8;
const PINV_REL_TOL: f64 = 1e-10;

/// L_k = B_k^T B_k + B_{k+1} B_{k+1}^T; either map may be absent at the ends of the complex.
pub fn laplacian_k(b_k: Option<&DMatrix<f64>>, b_k1: Option<&DMatrix<f64>>) -> Result<DMatrix<f64>> {
    let size = match (b_k, b_k1) {
        (Some(a), Some(b)) => {
            if a.ncols() != b.nrows() {
                return Err(Error::Shape(format!(
                    "B_k has {} columns but B_(k+1) has {} rows",
                    a.ncols(),
                    b.nrows()
                )));
            }
            a.ncols()
        }
        (Some(a), None) => a.ncols(),
        (None, Some(b)) => b.nrows(),
        (None, None) => return Err(Error::Shape("at least one boundary map is required".into())),
    };
    let mut l = DMatrix::zeros(size, size);
    if let Some(a) = b_k {
        l += a.transpose() * a;
    }
    if let Some(b) = b_k1 {
        l += b * b.transpose();
    }
    Ok(l)
}

/// Hodge Laplacian of degree p (0, 1 or 2) of a complex.
pub fn complex_laplacian(c: &Complex, p: usize) -> DMatrix<f64> {
    let n = c.count(p);
    let mut l = DMatrix::zeros(n, n);
    if p >= 1 {
        if let Some(b) = c.boundary(p) {
            l += b.transpose() * &b;
        }
    }
    if let Some(b) = c.boundary(p + 1) {
        l += &b * b.transpose();
    }
    l
}

pub fn up_laplacian(c: &Complex, p: usize) -> DMatrix<f64> {
    let n = c.count(p);
    match c.boundary(p + 1) {
        Some(b) => &b * b.transpose(),
        None => DMatrix::zeros(n, n),
    }
}

pub fn down_laplacian(c: &Complex, p: usize) -> DMatrix<f64> {
    let n = c.count(p);
    match (p >= 1).then(|| c.boundary(p)).flatten() {
        Some(b) => b.transpose() * b,
        None => DMatrix::zeros(n, n),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HodgeSpectrum {
    pub eigenvalues: Vec<f64>,
    pub tau0: f64,
    pub beta: usize,
    pub gap: Option<f64>,
}

impl HodgeSpectrum {
    /// (beta+1)-th smallest eigenvalue: the first one above the kernel.
    pub fn first_nonzero(&self) -> Option<f64> {
        self.gap
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,eigenvalue\n");
        for (k, v) in self.eigenvalues.iter().enumerate() {
            out.push_str(&format!("{},{}\n", k, fmt_f64(*v)));
        }
        out
    }
}

pub fn spectrum(l: &DMatrix<f64>, tau0_rel: f64) -> Result<HodgeSpectrum> {
    if l.nrows() != l.ncols() {
        return Err(Error::Shape("spectrum needs a square matrix".into()));
    }
    let asym = max_abs(&(l - l.transpose()));
    if asym > 1e-9 * max_abs(l).max(1.0) {
        return Err(Error::Invalid(format!("matrix is not symmetric (residual {asym:e})")));
    }
    let eigenvalues = sym_eigenvalues(l);
    let top = eigenvalues.last().copied().unwrap_or(0.0).max(0.0);
    let tau0 = tau0_rel * top;
    let beta = eigenvalues.iter().filter(|&&v| v <= tau0).count();
    let gap = eigenvalues.iter().copied().find(|&v| v > tau0);
    Ok(HodgeSpectrum { eigenvalues, tau0, beta, gap })
}

/// Betti numbers (beta_0, beta_1, beta_2) from Laplacian kernels.
pub fn betti_numbers(c: &Complex) -> [usize; 3] {
    let mut out = [0; 3];
    for (p, slot) in out.iter_mut().enumerate() {
        let l = complex_laplacian(c, p);
        *slot = if l.nrows() == 0 { 0 } else { spectrum(&l, DEFAULT_TAU0_REL).map(|s| s.beta).unwrap_or(0) };
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct HodgeProjectors {
    pub grad: DMatrix<f64>,
    pub harm: DMatrix<f64>,
    pub curl: DMatrix<f64>,
}

/// Orthogonal projector onto the range of a PSD Gram matrix, built from its
/// eigenvectors so that it is idempotent to rounding.
fn range_projector(gram: &DMatrix<f64>) -> DMatrix<f64> {
    let (vals, vecs) = sym_eigen(gram);
    let scale = vals.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let cut = PINV_REL_TOL * scale.max(f64::MIN_POSITIVE);
    let keep: Vec<usize> = (0..vals.len()).filter(|&k| vals[k] > cut).collect();
    let u = vecs.select_columns(&keep);
    &u * u.transpose()
}

pub fn hodge_projectors(b_k: Option<&DMatrix<f64>>, b_k1: Option<&DMatrix<f64>>) -> Result<HodgeProjectors> {
    let size = laplacian_k(b_k, b_k1)?.nrows();
    let grad = match b_k {
        Some(b) => range_projector(&(b.transpose() * b)),
        None => DMatrix::zeros(size, size),
    };
    let curl = match b_k1 {
        Some(b) if b.ncols() > 0 => range_projector(&(b * b.transpose())),
        _ => DMatrix::zeros(size, size),
    };
    let harm = DMatrix::identity(size, size) - &grad - &curl;
    Ok(HodgeProjectors { grad, harm, curl })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PersistentLaplacian {
    pub s: f64,
    pub t: f64,
    pub p: usize,
    pub matrix: DMatrix<f64>,
}

fn simplices(c: &Complex, p: usize) -> Vec<Vec<usize>> {
    match p {
        0 => (0..c.n_vertices).map(|v| vec![v]).collect(),
        1 => c.edges.iter().map(|e| e.to_vec()).collect(),
        2 => c.triangles.iter().map(|t| t.to_vec()).collect(),
        _ => Vec::new(),
    }
}

/// Persistent Laplacian of K_s inside K_t: the K_t up-Laplacian is reduced
/// onto the K_s p-chains by a Schur complement (pseudoinverse on the
/// eliminated block), then the K_s down-Laplacian is added.
pub fn persistent_laplacian(ks: &Complex, kt: &Complex, p: usize, s: f64, t: f64) -> Result<PersistentLaplacian> {
    if ks.n_vertices != kt.n_vertices {
        return Err(Error::Invalid("nested complexes must share the vertex set".into()));
    }
    let small = simplices(ks, p);
    let big = simplices(kt, p);
    let pos: HashMap<&Vec<usize>, usize> = big.iter().enumerate().map(|(k, v)| (v, k)).collect();
    let mut keep = Vec::with_capacity(small.len());
    for sgm in &small {
        match pos.get(sgm) {
            Some(&k) => keep.push(k),
            None => return Err(Error::Invalid(format!("simplex {sgm:?} of K_s is missing from K_t"))),
        }
    }
    for q in 0..=2usize.min(p + 1) {
        let bt: std::collections::HashSet<Vec<usize>> = simplices(kt, q).into_iter().collect();
        if simplices(ks, q).iter().any(|x| !bt.contains(x)) {
            return Err(Error::Invalid(format!("K_s is not a subcomplex of K_t in degree {q}")));
        }
    }
    let in_keep: std::collections::HashSet<usize> = keep.iter().copied().collect();
    let elim: Vec<usize> = (0..big.len()).filter(|k| !in_keep.contains(k)).collect();
    let up = up_laplacian(kt, p);
    let a = up.select_rows(&keep).select_columns(&keep);
    let mut matrix = a;
    if !elim.is_empty() {
        let b = up.select_rows(&keep).select_columns(&elim);
        let cc = up.select_rows(&elim).select_columns(&elim);
        matrix -= &b * pinv_sym(&cc, PINV_REL_TOL) * b.transpose();
    }
    matrix += down_laplacian(ks, p);
    matrix = (&matrix + matrix.transpose()) * 0.5;
    let min = sym_eigenvalues(&matrix).first().copied().unwrap_or(0.0);
    if min < -1e-8 * max_abs(&matrix).max(1.0) {
        return Err(Error::Internal(format!("persistent Laplacian is not PSD (min eigenvalue {min:e})")));
    }
    Ok(PersistentLaplacian { s, t, p, matrix })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRecord {
    pub birth: f64,
    pub death: f64,
    pub lipschitz: f64,
    pub d_max_faces_per_simplex: usize,
    pub d_max_cofaces_per_face: usize,
    pub d_max: usize,
    pub beta_at_birth: usize,
    /// First eigenvalue above the kernel of the degree-p Laplacian at the birth radius.
    pub lambda_at_birth: Option<f64>,
    pub lhs: f64,
    pub slack: Option<f64>,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub p: usize,
    pub records: Vec<BoundRecord>,
}

impl BoundReport {
    pub fn all_hold(&self) -> bool {
        self.records.iter().all(|r| r.holds)
    }
}

/// Embed a Laplacian on C_p(K_small) into C_p(K_big) by zero padding.
fn padded(l_small: &DMatrix<f64>, small: &[Vec<usize>], big: &[Vec<usize>]) -> DMatrix<f64> {
    let pos: HashMap<&Vec<usize>, usize> = big.iter().enumerate().map(|(k, v)| (v, k)).collect();
    let map: Vec<usize> = small.iter().map(|s| pos[s]).collect();
    let mut out = DMatrix::zeros(big.len(), big.len());
    for (a, &ia) in map.iter().enumerate() {
        for (b, &ib) in map.iter().enumerate() {
            out[(ia, ib)] = l_small[(a, b)];
        }
    }
    out
}

fn max_cofaces_per_face(c: &Complex, p: usize) -> usize {
    let mut count: HashMap<Vec<usize>, usize> = HashMap::new();
    for s in simplices(c, p) {
        for skip in 0..s.len() {
            let face: Vec<usize> = s.iter().enumerate().filter(|(k, _)| *k != skip).map(|(_, v)| *v).collect();
            *count.entry(face).or_default() += 1;
        }
    }
    count.values().copied().max().unwrap_or(0)
}

/// Check L~ (d - b) + (p + 1) d_max >= lambda_(beta+1)(Delta_p(K_b)) for every finite H_p pair.
pub fn verify_gap_persistence_bound(cloud: &PointCloud, p: usize) -> Result<BoundReport> {
    if p == 0 || p > 1 {
        return Err(Error::Invalid("the bound checker supports p = 1".into()));
    }
    if cloud.len() > 12 {
        return Err(Error::Resource(format!("bound checker is limited to 12 points, got {}", cloud.len())));
    }
    if cloud.len() < 2 {
        return Ok(BoundReport { p, records: Vec::new() });
    }
    let filt = rips_filtration(cloud, cloud.diameter() * (1.0 + 1e-12) + 1e-300, 2)?;
    let diag = compute_persistence(&filt);
    let radii = filt.critical_radii();
    let complexes: Vec<Complex> = radii.iter().map(|&r| filt.complex_at(r)).collect();
    let laps: Vec<DMatrix<f64>> = complexes.iter().map(|c| complex_laplacian(c, p)).collect();
    let mut lipschitz = 0.0f64;
    for k in 1..radii.len() {
        let small = simplices(&complexes[k - 1], p);
        let big = simplices(&complexes[k], p);
        let diff = &laps[k] - padded(&laps[k - 1], &small, &big);
        let dt = radii[k] - radii[k - 1];
        if dt > 0.0 && diff.nrows() > 0 {
            lipschitz = lipschitz.max(sym_norm2(&diff) / dt);
        }
    }
    let index_of = |r: f64| radii.iter().position(|&x| x == r).expect("pair radii are critical radii");
    let mut records = Vec::new();
    for pair in diag.pairs.iter().filter(|q| q.dim == p && q.is_finite()) {
        let kd = &complexes[index_of(pair.death)];
        let spec = spectrum(&laps[index_of(pair.birth)], DEFAULT_TAU0_REL)?;
        let faces = p + 1;
        let cofaces = max_cofaces_per_face(kd, p);
        let d_max = faces.max(cofaces);
        let lhs = lipschitz * (pair.death - pair.birth) + (p + 1) as f64 * d_max as f64;
        let lambda = spec.first_nonzero();
        let slack = lambda.map(|l| lhs - l);
        records.push(BoundRecord {
            birth: pair.birth,
            death: pair.death,
            lipschitz,
            d_max_faces_per_simplex: faces,
            d_max_cofaces_per_face: cofaces,
            d_max,
            beta_at_birth: spec.beta,
            lambda_at_birth: lambda,
            lhs,
            slack,
            holds: slack.map_or(true, |s| s >= -1e-9),
        });
    }
    Ok(BoundReport { p, records })
}

/// Bound check over `n_clouds` uniform clouds of `n_points` points in the unit square.
pub fn random_bound_check(n_clouds: usize, n_points: usize, seed: u64) -> Result<Vec<BoundReport>> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..n_clouds)
        .map(|_| {
            let data: Vec<f64> = (0..2 * n_points).map(|_| rng.gen::<f64>()).collect();
            verify_gap_persistence_bound(&PointCloud::new(2, data)?, 1)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c4() -> Complex {
        Complex::new(4, vec![[0, 1], [0, 3], [1, 2], [2, 3]], vec![]).unwrap()
    }

    #[test]
    fn c4_spectrum() {
        let s = spectrum(&complex_laplacian(&c4(), 1), DEFAULT_TAU0_REL).unwrap();
        let expect = [0.0, 2.0, 2.0, 4.0];
        for (a, b) in s.eigenvalues.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(s.beta, 1);
        assert!((s.gap.unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn zero_matrix_spectrum() {
        let s = spectrum(&DMatrix::zeros(3, 3), DEFAULT_TAU0_REL).unwrap();
        assert_eq!(s.beta, 3);
        assert!(s.gap.is_none());
    }

    #[test]
    fn rejects_asymmetric() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert!(spectrum(&m, DEFAULT_TAU0_REL).is_err());
    }

    #[test]
    fn shape_mismatch() {
        let a = DMatrix::<f64>::zeros(2, 3);
        let b = DMatrix::<f64>::zeros(2, 1);
        assert!(matches!(laplacian_k(Some(&a), Some(&b)), Err(Error::Shape(_))));
    }
}
