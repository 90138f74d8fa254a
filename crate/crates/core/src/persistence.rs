//! Vietoris-Rips filtrations up to triangles and Z/2 persistent homology in
//! degrees 0 and 1.

use crate::complex::Complex;
use crate::embedding::PointCloud;
use crate::error::{Error, Result};
use crate::io::fmt_f64;
use crate::linalg::sym_eigen;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Simplex {
    /// Sorted vertex ids; entries past `dim` are unused.
    pub verts: [u32; 3],
    pub dim: u8,
    pub radius: f64,
}

impl Simplex {
    pub fn vertices(&self) -> &[u32] {
        &self.verts[..self.dim as usize + 1]
    }

    fn order(&self, other: &Self) -> Ordering {
        self.radius
            .total_cmp(&other.radius)
            .then(self.dim.cmp(&other.dim))
            .then_with(|| self.vertices().cmp(other.vertices()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Filtration {
    pub n_vertices: usize,
    pub simplices: Vec<Simplex>,
    pub max_dim: usize,
}

impl Filtration {
    /// Simplices with radius <= eps as a complex.
    pub fn complex_at(&self, eps: f64) -> Complex {
        let mut edges = Vec::new();
        let mut triangles = Vec::new();
        for s in &self.simplices {
            if s.radius > eps {
                break;
            }
            match s.dim {
                1 => edges.push([s.verts[0] as usize, s.verts[1] as usize]),
                2 => triangles.push([s.verts[0] as usize, s.verts[1] as usize, s.verts[2] as usize]),
                _ => {}
            }
        }
        Complex::new(self.n_vertices, edges, triangles).expect("filtration faces are closed")
    }

    /// Distinct simplex radii in increasing order.
    pub fn critical_radii(&self) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for s in &self.simplices {
            if out.last().map_or(true, |&l| s.radius > l) {
                out.push(s.radius);
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PersistencePair {
    pub dim: usize,
    pub birth: f64,
    pub death: f64,
}

impl PersistencePair {
    pub fn persistence(&self) -> f64 {
        self.death - self.birth
    }

    pub fn is_finite(&self) -> bool {
        self.death.is_finite()
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PersistenceDiagram {
    pub pairs: Vec<PersistencePair>,
}

impl PersistenceDiagram {
    pub fn betti_at(&self, dim: usize, eps: f64) -> usize {
        self.pairs.iter().filter(|p| p.dim == dim && p.birth <= eps && eps < p.death).count()
    }

    /// Finite pair of the given degree with the largest death - birth
    /// (earliest in diagram order on ties).
    pub fn most_persistent(&self, dim: usize) -> Option<PersistencePair> {
        let mut best: Option<PersistencePair> = None;
        for p in self.pairs.iter().filter(|p| p.dim == dim && p.is_finite()) {
            if best.map_or(true, |b| p.persistence() > b.persistence()) {
                best = Some(*p);
            }
        }
        best
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("dim,birth,death\n");
        for p in &self.pairs {
            out.push_str(&format!("{},{},{}\n", p.dim, fmt_f64(p.birth), fmt_f64(p.death)));
        }
        out
    }
}

/// Smallest radius at which some vertex is within reach of all others;
/// beyond it the Rips complex is a cone and carries no homology.
pub fn enclosing_radius(cloud: &PointCloud) -> f64 {
    let n = cloud.len();
    (0..n)
        .map(|i| (0..n).map(|j| cloud.dist(i, j)).fold(0.0, f64::max))
        .fold(f64::INFINITY, f64::min)
}

pub fn rips_filtration(cloud: &PointCloud, eps_max: f64, max_dim: usize) -> Result<Filtration> {
    if !(eps_max > 0.0) {
        return Err(Error::Invalid(format!("eps_max must be positive, got {eps_max}")));
    }
    if max_dim > 2 {
        return Err(Error::Invalid("max_dim above 2 is not supported".into()));
    }
    let n = cloud.len();
    let d = cloud.distance_matrix();
    let mut simplices = Vec::new();
    for i in 0..n {
        simplices.push(Simplex { verts: [i as u32, 0, 0], dim: 0, radius: 0.0 });
    }
    if max_dim >= 1 {
        for i in 0..n {
            for j in i + 1..n {
                let r = d[i * n + j];
                if r <= eps_max {
                    simplices.push(Simplex { verts: [i as u32, j as u32, 0], dim: 1, radius: r });
                }
            }
        }
    }
    if max_dim >= 2 {
        for i in 0..n {
            for j in i + 1..n {
                let rij = d[i * n + j];
                if rij > eps_max {
                    continue;
                }
                for k in j + 1..n {
                    let r = rij.max(d[i * n + k]).max(d[j * n + k]);
                    if r <= eps_max {
                        simplices.push(Simplex { verts: [i as u32, j as u32, k as u32], dim: 2, radius: r });
                    }
                }
            }
        }
    }
    simplices.sort_by(|a, b| a.order(b));
    Ok(Filtration { n_vertices: n, simplices, max_dim })
}

/// Symmetric difference of two ascending index lists.
fn xor_sorted(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Column reduction over Z/2. Triangles are reduced first; every edge that
/// becomes a triangle pivot is cleared before the edge columns are reduced.
pub fn compute_persistence(filt: &Filtration) -> PersistenceDiagram {
    let n = filt.n_vertices;
    // Position of each edge among the edges, by filtration order.
    let mut edge_pos = vec![u32::MAX; n * n];
    let mut edges: Vec<&Simplex> = Vec::new();
    let mut triangles: Vec<&Simplex> = Vec::new();
    for s in &filt.simplices {
        match s.dim {
            1 => {
                let (a, b) = (s.verts[0] as usize, s.verts[1] as usize);
                edge_pos[a * n + b] = edges.len() as u32;
                edges.push(s);
            }
            2 => triangles.push(s),
            _ => {}
        }
    }

    let mut pairs = Vec::new();
    let mut cleared = vec![false; edges.len()];
    let mut reduced_by_pivot: Vec<Option<Vec<u32>>> = vec![None; edges.len()];
    for t in &triangles {
        let [a, b, c] = [t.verts[0] as usize, t.verts[1] as usize, t.verts[2] as usize];
        let mut col = vec![edge_pos[a * n + b], edge_pos[a * n + c], edge_pos[b * n + c]];
        col.sort_unstable();
        while let Some(&low) = col.last() {
            match &reduced_by_pivot[low as usize] {
                Some(other) => col = xor_sorted(&col, other),
                None => break,
            }
        }
        if let Some(&low) = col.last() {
            let e = edges[low as usize];
            pairs.push(PersistencePair { dim: 1, birth: e.radius, death: t.radius });
            cleared[low as usize] = true;
            reduced_by_pivot[low as usize] = Some(col);
        }
    }

    // Edge boundaries live in vertex space; pivots are vertex ids.
    let mut vertex_pivot: Vec<Option<Vec<u32>>> = vec![None; n];
    for (k, e) in edges.iter().enumerate() {
        if cleared[k] {
            continue;
        }
        let mut col = vec![e.verts[0], e.verts[1]];
        while let Some(&low) = col.last() {
            match &vertex_pivot[low as usize] {
                Some(other) => col = xor_sorted(&col, other),
                None => break,
            }
        }
        match col.last() {
            Some(&low) => {
                pairs.push(PersistencePair { dim: 0, birth: 0.0, death: e.radius });
                vertex_pivot[low as usize] = Some(col);
            }
            None => pairs.push(PersistencePair { dim: 1, birth: e.radius, death: f64::INFINITY }),
        }
    }
    for v in vertex_pivot.iter() {
        if v.is_none() {
            pairs.push(PersistencePair { dim: 0, birth: 0.0, death: f64::INFINITY });
        }
    }
    pairs.sort_by(|a, b| {
        a.dim.cmp(&b.dim).then(a.birth.total_cmp(&b.birth)).then(a.death.total_cmp(&b.death))
    });
    PersistenceDiagram { pairs }
}

/// Largest death - birth over finite degree-1 pairs, 0 when there are none.
pub fn max_h1_persistence(diag: &PersistenceDiagram) -> f64 {
    diag.most_persistent(1).map_or(0.0, |p| p.persistence())
}

/// Angle of each point in the plane of the two leading principal components.
pub fn circular_coordinates(cloud: &PointCloud) -> Result<Vec<f64>> {
    let n = cloud.len();
    if n < 3 {
        return Err(Error::DegenerateGeometry(format!("need at least 3 points, got {n}")));
    }
    let dim = cloud.dim;
    if dim < 2 {
        return Err(Error::DegenerateGeometry("one-dimensional cloud has no plane".into()));
    }
    let mut mean = vec![0.0; dim];
    for i in 0..n {
        for (c, v) in cloud.point(i).iter().enumerate() {
            mean[c] += v / n as f64;
        }
    }
    let mut cov = DMatrix::zeros(dim, dim);
    for i in 0..n {
        let p = cloud.point(i);
        for a in 0..dim {
            for b in 0..dim {
                cov[(a, b)] += (p[a] - mean[a]) * (p[b] - mean[b]) / n as f64;
            }
        }
    }
    let (vals, vecs) = sym_eigen(&cov);
    let l1 = vals[dim - 1];
    let l2 = vals[dim - 2];
    if !(l1 > 0.0) || l2 <= 1e-12 * l1 {
        return Err(Error::DegenerateGeometry("points are collinear".into()));
    }
    let pc1 = vecs.column(dim - 1);
    let pc2 = vecs.column(dim - 2);
    let tau = std::f64::consts::TAU;
    Ok((0..n)
        .map(|i| {
            let p = cloud.point(i);
            let (mut u, mut v) = (0.0, 0.0);
            for c in 0..dim {
                u += (p[c] - mean[c]) * pc1[c];
                v += (p[c] - mean[c]) * pc2[c];
            }
            v.atan2(u).rem_euclid(tau)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cloud(rows: &[[f64; 2]]) -> PointCloud {
        PointCloud::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn two_points() {
        let f = rips_filtration(&cloud(&[[0.0, 0.0], [1.0, 0.0]]), 2.0, 2).unwrap();
        assert_eq!(f.simplices.len(), 3);
        assert_eq!(f.simplices[2].dim, 1);
        assert_eq!(f.simplices[2].radius, 1.0);
    }

    #[test]
    fn equilateral_zero_persistence() {
        let s = 1.0;
        let pts = cloud(&[[0.0, 0.0], [s, 0.0], [0.5 * s, 0.5 * 3f64.sqrt() * s]]);
        let d = compute_persistence(&rips_filtration(&pts, 2.0, 2).unwrap());
        let h1: Vec<_> = d.pairs.iter().filter(|p| p.dim == 1).collect();
        assert_eq!(h1.len(), 1);
        assert!((h1[0].birth - h1[0].death).abs() < 1e-12);
        assert_eq!(d.betti_at(1, 1.5), 0);
    }

    #[test]
    fn max_h1_of_empty_and_single() {
        assert_eq!(max_h1_persistence(&PersistenceDiagram::default()), 0.0);
        let d = PersistenceDiagram { pairs: vec![PersistencePair { dim: 1, birth: 2.0, death: 5.0 }] };
        assert_eq!(max_h1_persistence(&d), 3.0);
    }

    #[test]
    fn collinear_is_degenerate() {
        let pts = cloud(&[[0.0, 0.0], [1.0, 1.0], [2.0, 2.0], [3.0, 3.0]]);
        assert!(matches!(circular_coordinates(&pts), Err(Error::DegenerateGeometry(_))));
    }
}
