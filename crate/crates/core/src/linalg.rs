//! Small dense linear-algebra helpers shared by the spectral modules.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Symmetric eigendecomposition with ascending eigenvalues.
///
/// Eigenvector signs are fixed so that the entry of largest magnitude is
/// positive, which keeps downstream outputs deterministic.
pub fn sym_eigen(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), DMatrix::zeros(0, 0));
    }
    let sym = (m + m.transpose()) * 0.5;
    let eig = checked_eigen(&sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));
    let vals: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = DMatrix::zeros(n, n);
    for (c, &i) in order.iter().enumerate() {
        let mut col: DVector<f64> = eig.eigenvectors.column(i).into_owned();
        let mut best = 0usize;
        for r in 0..n {
            if col[r].abs() > col[best].abs() + 1e-12 {
                best = r;
            }
        }
        if col[best] < 0.0 {
            col = -col;
        }
        vecs.set_column(c, &col);
    }
    (vals, vecs)
}

fn eigen_residual(a: &DMatrix<f64>, e: &SymmetricEigen<f64, nalgebra::Dyn>) -> f64 {
    let av = a * &e.eigenvectors;
    let vl = &e.eigenvectors * DMatrix::from_diagonal(&e.eigenvalues);
    (av - vl).abs().max()
}

/// `SymmetricEigen::new` can return mismatched eigenpairs on some matrices
/// with decoupled blocks, so every result is checked against A V = V L and
/// retried with other convergence thresholds, then with cyclic Jacobi.
fn checked_eigen(a: &DMatrix<f64>) -> SymmetricEigen<f64, nalgebra::Dyn> {
    let tol = 1e-11 * (a.nrows() as f64).sqrt() * a.abs().max().max(1.0);
    for eps in [f64::EPSILON, 1e-15, 1e-14] {
        if let Some(e) = SymmetricEigen::try_new(a.clone(), eps, 0) {
            if eigen_residual(a, &e) <= tol {
                return e;
            }
        }
    }
    log::debug!("falling back to Jacobi for a {}x{} matrix", a.nrows(), a.ncols());
    jacobi_eigen(a)
}

fn jacobi_eigen(a: &DMatrix<f64>) -> SymmetricEigen<f64, nalgebra::Dyn> {
    let n = a.nrows();
    let mut m = a.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    for _ in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| m[(i, j)].powi(2)).sum();
        if off.sqrt() <= 1e-15 * m.abs().max().max(1e-300) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if m[(p, q)].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * m[(p, q)]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[(k, p)], m[(k, q)]);
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[(p, k)], m[(q, k)]);
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    SymmetricEigen { eigenvalues: DVector::from_fn(n, |i, _| m[(i, i)]), eigenvectors: v }
}

pub fn sym_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    sym_eigen(m).0
}

/// Moore-Penrose pseudoinverse of a symmetric matrix; eigenvalues below
/// `rel_tol` times the largest magnitude are treated as zero.
pub fn pinv_sym(m: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let n = m.nrows();
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    let (vals, vecs) = sym_eigen(m);
    let scale = vals.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let cut = rel_tol * scale.max(f64::MIN_POSITIVE);
    let mut out = DMatrix::zeros(n, n);
    for (k, &v) in vals.iter().enumerate() {
        if v.abs() > cut {
            let c = vecs.column(k);
            out += (c * c.transpose()) / v;
        }
    }
    out
}

/// Spectral norm of a symmetric matrix.
pub fn sym_norm2(m: &DMatrix<f64>) -> f64 {
    sym_eigenvalues(m).iter().fold(0.0f64, |a, v| a.max(v.abs()))
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0f64, |a, v| a.max(v.abs()))
}

/// Gershgorin bound on the spectral radius: max absolute row sum.
pub fn gershgorin_bound(m: &DMatrix<f64>) -> f64 {
    (0..m.nrows())
        .map(|r| m.row(r).iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Numerical rank from singular values above `rel_tol * s_max`.
pub fn rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.clone().singular_values();
    let smax = sv.iter().fold(0.0f64, |a, v| a.max(*v));
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * smax).count()
}

/// Percentile with linear interpolation between order statistics, q in [0,1].
pub fn quantile(values: &[f64], q: f64) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    v[lo] * (1.0 - frac) + v[hi] * frac
}

pub fn median(values: &[f64]) -> f64 {
    quantile(values, 0.5)
}

pub fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// exp(-i t M) for a real symmetric M.
pub fn expm_i_sym(m: &DMatrix<f64>, t: f64) -> DMatrix<num_complex::Complex64> {
    let (vals, vecs) = sym_eigen(m);
    let n = vals.len();
    let mut out = DMatrix::zeros(n, n);
    for (k, &lam) in vals.iter().enumerate() {
        let ph = num_complex::Complex64::from_polar(1.0, -lam * t);
        for i in 0..n {
            let vi = vecs[(i, k)] * ph;
            for j in 0..n {
                out[(i, j)] += vi * vecs[(j, k)];
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decoupled_blocks_reconstruct() {
        let mut h = DMatrix::<f64>::zeros(8, 8);
        for (i, d) in [0.011, -0.777, 0.633, 0.644, 0.011, -0.777, 0.633, 0.910].iter().enumerate() {
            h[(i, i)] = *d;
        }
        for (i, j) in [(1, 5), (3, 7)] {
            h[(i, j)] = 0.219;
            h[(j, i)] = 0.219;
        }
        let (vals, vecs) = sym_eigen(&h);
        let rec = &vecs * DMatrix::from_diagonal(&DVector::from_vec(vals)) * vecs.transpose();
        assert!((rec - &h).abs().max() < 1e-12);
    }

    #[test]
    fn jacobi_on_small_symmetric() {
        let a = DMatrix::from_fn(6, 6, |i, j| ((i * 7 + j * 3) % 5) as f64 + ((j * 7 + i * 3) % 5) as f64);
        let e = jacobi_eigen(&a);
        assert!(eigen_residual(&a, &e) < 1e-10);
    }
}
