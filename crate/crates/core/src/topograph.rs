//! Graph construction on representative points: MST, epsilon layer, ring
//! closure and connectivity patches, followed by optional 3-clique filling.

use crate::complex::{Complex, UnionFind};
use crate::embedding::PointCloud;
use crate::error::{Error, Result};
use crate::linalg::quantile;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeTag {
    Mst,
    Eps,
    Ring,
    Patch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TriangleMode {
    None,
    All3Cliques,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeConfig {
    pub use_ring: bool,
    pub eps_quantile: f64,
    /// Vertices threaded by the ring layer; `None` means every vertex.
    pub ring_vertices: Option<Vec<usize>>,
}

impl Default for EdgeConfig {
    fn default() -> Self {
        Self { use_ring: true, eps_quantile: 0.3, ring_vertices: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaggedEdge {
    pub i: usize,
    pub j: usize,
    pub tag: EdgeTag,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopoGraph {
    pub coords: PointCloud,
    pub edges: Vec<TaggedEdge>,
    pub complex: Complex,
}

fn sorted_pairs(coords: &PointCloud) -> Vec<(f64, usize, usize)> {
    let n = coords.len();
    let mut pairs = Vec::with_capacity(n * (n.saturating_sub(1)) / 2);
    for i in 0..n {
        for j in i + 1..n {
            pairs.push((coords.dist(i, j), i, j));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    pairs
}

pub fn mst_edges(coords: &PointCloud) -> Vec<[usize; 2]> {
    let mut uf = UnionFind::new(coords.len());
    sorted_pairs(coords)
        .into_iter()
        .filter(|&(_, i, j)| uf.union(i, j))
        .map(|(_, i, j)| [i, j])
        .collect()
}

pub fn eps_edges(coords: &PointCloud, eps_quantile: f64) -> Vec<[usize; 2]> {
    let pairs = sorted_pairs(coords);
    if pairs.is_empty() {
        return Vec::new();
    }
    let dists: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let eps = quantile(&dists, eps_quantile);
    pairs.into_iter().filter(|p| p.0 < eps).map(|p| [p.1, p.2]).collect()
}

/// Consecutive vertices in angular order, closed into a cycle.
pub fn ring_edges(angles: &[f64], subset: &[usize]) -> Vec<[usize; 2]> {
    if subset.len() < 3 {
        return Vec::new();
    }
    let mut order = subset.to_vec();
    order.sort_by(|&a, &b| angles[a].total_cmp(&angles[b]).then(a.cmp(&b)));
    let m = order.len();
    (0..m)
        .map(|k| {
            let (a, b) = (order[k], order[(k + 1) % m]);
            [a.min(b), a.max(b)]
        })
        .filter(|e| e[0] != e[1])
        .collect()
}

pub fn build_edges(coords: &PointCloud, angles: Option<&[f64]>, cfg: &EdgeConfig) -> Result<Vec<TaggedEdge>> {
    let n = coords.len();
    if n < 3 {
        return Err(Error::Invalid(format!("graph construction needs at least 3 points, got {n}")));
    }
    let mut tagged: BTreeMap<[usize; 2], EdgeTag> = BTreeMap::new();
    for e in mst_edges(coords) {
        tagged.entry(e).or_insert(EdgeTag::Mst);
    }
    for e in eps_edges(coords, cfg.eps_quantile) {
        tagged.entry(e).or_insert(EdgeTag::Eps);
    }
    if cfg.use_ring {
        if let Some(angles) = angles {
            if angles.len() != n {
                return Err(Error::Shape(format!("{} angles for {} points", angles.len(), n)));
            }
            let all: Vec<usize> = (0..n).collect();
            let subset = cfg.ring_vertices.as_deref().unwrap_or(&all);
            for e in ring_edges(angles, subset) {
                tagged.entry(e).or_insert(EdgeTag::Ring);
            }
        }
    }
    let mut uf = UnionFind::new(n);
    for e in tagged.keys() {
        uf.union(e[0], e[1]);
    }
    if uf.count() > 1 {
        for (_, i, j) in sorted_pairs(coords) {
            if uf.union(i, j) {
                tagged.insert([i, j], EdgeTag::Patch);
            }
            if uf.count() == 1 {
                break;
            }
        }
    }
    Ok(tagged.into_iter().map(|(e, tag)| TaggedEdge { i: e[0], j: e[1], tag }).collect())
}

pub fn enumerate_triangles(n: usize, edges: &[[usize; 2]], mode: TriangleMode) -> Vec<[usize; 3]> {
    match mode {
        TriangleMode::None => Vec::new(),
        TriangleMode::All3Cliques => Complex { n_vertices: n, edges: edges.to_vec(), triangles: vec![] }
            .clique_closure()
            .triangles,
    }
}

/// Oriented incidence matrices; fails if the boundary of a boundary is nonzero.
pub fn incidence_matrices(complex: &Complex) -> Result<(DMatrix<i32>, DMatrix<i32>)> {
    let b1 = complex.boundary1_int();
    let b2 = complex.boundary2_int();
    if b2.ncols() > 0 && (&b1 * &b2).iter().any(|&v| v != 0) {
        return Err(Error::Internal("B1 * B2 is nonzero".into()));
    }
    Ok((b1, b2))
}

impl TopoGraph {
    pub fn build(coords: &PointCloud, angles: Option<&[f64]>, cfg: &EdgeConfig, mode: TriangleMode) -> Result<Self> {
        let edges = build_edges(coords, angles, cfg)?;
        Self::from_edges(coords.clone(), edges, mode)
    }

    pub fn from_edges(coords: PointCloud, edges: Vec<TaggedEdge>, mode: TriangleMode) -> Result<Self> {
        let n = coords.len();
        let plain: Vec<[usize; 2]> = edges.iter().map(|e| [e.i, e.j]).collect();
        let triangles = enumerate_triangles(n, &plain, mode);
        let complex = Complex::new(n, plain, triangles)?;
        incidence_matrices(&complex)?;
        Ok(Self { coords, edges, complex })
    }

    pub fn n_vertices(&self) -> usize {
        self.complex.n_vertices
    }

    /// Cycle rank |E| - |V| + C of the 1-skeleton.
    pub fn cycle_rank(&self) -> usize {
        (self.complex.edges.len() + self.complex.components()).saturating_sub(self.complex.n_vertices)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let coords: Vec<Vec<f64>> = (0..self.coords.len()).map(|i| self.coords.point(i).to_vec()).collect();
        serde_json::json!({
            "coords": coords,
            "edges": self.edges,
            "triangles": self.complex.triangles,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_close_points_form_triangle() {
        let pc = PointCloud::from_rows(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.5, 0.8]]).unwrap();
        let cfg = EdgeConfig { use_ring: false, eps_quantile: 1.0, ring_vertices: None };
        let g = TopoGraph::build(&pc, None, &cfg, TriangleMode::All3Cliques).unwrap();
        // MST has 2 edges; the strict epsilon cut at the maximum distance adds
        // the two shorter pairs, which the MST already holds.
        assert_eq!(g.complex.edges.len(), 2);
        let cfg = EdgeConfig { use_ring: true, eps_quantile: 0.3, ring_vertices: None };
        let g = TopoGraph::build(&pc, Some(&[0.0, 1.0, 2.0]), &cfg, TriangleMode::All3Cliques).unwrap();
        assert_eq!(g.complex.edges.len(), 3);
        assert_eq!(g.complex.triangles.len(), 1);
    }

    #[test]
    fn four_cycle_has_no_triangles() {
        let edges = vec![[0, 1], [1, 2], [2, 3], [0, 3]];
        assert!(enumerate_triangles(4, &edges, TriangleMode::All3Cliques).is_empty());
        assert!(enumerate_triangles(4, &edges, TriangleMode::None).is_empty());
    }
}
