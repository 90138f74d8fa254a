//! Finite simplicial complexes up to dimension 2 with oriented boundary maps.

use crate::error::{Error, Result};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Complex {
    pub n_vertices: usize,
    /// Each edge is (i, j) with i < j.
    pub edges: Vec<[usize; 2]>,
    /// Each triangle is (a, b, c) with a < b < c.
    pub triangles: Vec<[usize; 3]>,
}

impl Complex {
    pub fn new(n_vertices: usize, edges: Vec<[usize; 2]>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        let mut seen = HashMap::new();
        for (k, e) in edges.iter().enumerate() {
            if e[0] >= e[1] || e[1] >= n_vertices {
                return Err(Error::Invalid(format!("edge {e:?} is not an ordered pair of vertices")));
            }
            if seen.insert(*e, k).is_some() {
                return Err(Error::Invalid(format!("duplicate edge {e:?}")));
            }
        }
        for t in &triangles {
            if !(t[0] < t[1] && t[1] < t[2]) {
                return Err(Error::Invalid(format!("triangle {t:?} is not sorted")));
            }
            for f in [[t[0], t[1]], [t[0], t[2]], [t[1], t[2]]] {
                if !seen.contains_key(&f) {
                    return Err(Error::Invalid(format!("triangle {t:?} lacks edge {f:?}")));
                }
            }
        }
        Ok(Self { n_vertices, edges, triangles })
    }

    pub fn edge_index(&self) -> HashMap<[usize; 2], usize> {
        self.edges.iter().enumerate().map(|(k, e)| (*e, k)).collect()
    }

    /// Number of simplices of dimension p.
    pub fn count(&self, p: usize) -> usize {
        match p {
            0 => self.n_vertices,
            1 => self.edges.len(),
            2 => self.triangles.len(),
            _ => 0,
        }
    }

    /// Vertex-edge incidence: -1 at the smaller endpoint, +1 at the larger.
    pub fn boundary1_int(&self) -> DMatrix<i32> {
        let mut b = DMatrix::zeros(self.n_vertices, self.edges.len());
        for (k, e) in self.edges.iter().enumerate() {
            b[(e[0], k)] = -1;
            b[(e[1], k)] = 1;
        }
        b
    }

    /// Edge-triangle incidence: (a,b) -> +1, (a,c) -> -1, (b,c) -> +1.
    pub fn boundary2_int(&self) -> DMatrix<i32> {
        let idx = self.edge_index();
        let mut b = DMatrix::zeros(self.edges.len(), self.triangles.len());
        for (k, t) in self.triangles.iter().enumerate() {
            b[(idx[&[t[0], t[1]]], k)] = 1;
            b[(idx[&[t[0], t[2]]], k)] = -1;
            b[(idx[&[t[1], t[2]]], k)] = 1;
        }
        b
    }

    pub fn boundary1(&self) -> DMatrix<f64> {
        self.boundary1_int().map(|v| v as f64)
    }

    pub fn boundary2(&self) -> DMatrix<f64> {
        self.boundary2_int().map(|v| v as f64)
    }

    /// Boundary map from p-chains to (p-1)-chains; `None` for p = 0 or p > 2.
    pub fn boundary(&self, p: usize) -> Option<DMatrix<f64>> {
        match p {
            1 => Some(self.boundary1()),
            2 => Some(self.boundary2()),
            _ => None,
        }
    }

    pub fn components(&self) -> usize {
        let mut uf = UnionFind::new(self.n_vertices);
        for e in &self.edges {
            uf.union(e[0], e[1]);
        }
        uf.count()
    }

    /// (V, E, T, C): vertex, edge, triangle and component counts.
    pub fn counts(&self) -> (usize, usize, usize, usize) {
        (self.n_vertices, self.edges.len(), self.triangles.len(), self.components())
    }

    pub fn adjacency(&self) -> Vec<Vec<bool>> {
        let mut adj = vec![vec![false; self.n_vertices]; self.n_vertices];
        for e in &self.edges {
            adj[e[0]][e[1]] = true;
            adj[e[1]][e[0]] = true;
        }
        adj
    }

    /// Clique complex of the 1-skeleton: same edges, every 3-clique as a triangle.
    pub fn clique_closure(&self) -> Complex {
        let adj = self.adjacency();
        let mut tris = Vec::new();
        for a in 0..self.n_vertices {
            for b in a + 1..self.n_vertices {
                if !adj[a][b] {
                    continue;
                }
                for c in b + 1..self.n_vertices {
                    if adj[a][c] && adj[b][c] {
                        tris.push([a, b, c]);
                    }
                }
            }
        }
        Complex { n_vertices: self.n_vertices, edges: self.edges.clone(), triangles: tris }
    }
}

/// All cliques of exactly `size` vertices, each sorted, in lexicographic order.
pub fn cliques(adj: &[Vec<bool>], size: usize) -> Vec<Vec<usize>> {
    let n = adj.len();
    let mut out = Vec::new();
    if size == 0 {
        out.push(Vec::new());
        return out;
    }
    let mut stack = Vec::new();
    fn rec(adj: &[Vec<bool>], n: usize, size: usize, start: usize, stack: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if stack.len() == size {
            out.push(stack.clone());
            return;
        }
        for v in start..n {
            if stack.iter().all(|&u| adj[u][v]) {
                stack.push(v);
                rec(adj, n, size, v + 1, stack, out);
                stack.pop();
            }
        }
    }
    rec(adj, n, size, 0, &mut stack, &mut out);
    out
}

#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
    sets: usize,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self { parent: (0..n).collect(), rank: vec![0; n], sets: n }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns true if the two sets were distinct.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        self.sets -= 1;
        true
    }

    pub fn count(&self) -> usize {
        self.sets
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_edge_column() {
        let c = Complex::new(2, vec![[0, 1]], vec![]).unwrap();
        let b = c.boundary1_int();
        assert_eq!((b[(0, 0)], b[(1, 0)]), (-1, 1));
    }

    #[test]
    fn triangle_boundary_signs() {
        let c = Complex::new(3, vec![[0, 1], [0, 2], [1, 2]], vec![[0, 1, 2]]).unwrap();
        let b2 = c.boundary2_int();
        assert_eq!(b2.column(0).iter().copied().collect::<Vec<_>>(), vec![1, -1, 1]);
        let prod = c.boundary1_int() * b2;
        assert!(prod.iter().all(|&v| v == 0));
    }

    #[test]
    fn rejects_missing_face() {
        assert!(Complex::new(3, vec![[0, 1], [1, 2]], vec![[0, 1, 2]]).is_err());
    }

    #[test]
    fn k4_cliques() {
        let mut edges = Vec::new();
        for a in 0..4 {
            for b in a + 1..4 {
                edges.push([a, b]);
            }
        }
        let c = Complex::new(4, edges, vec![]).unwrap().clique_closure();
        assert_eq!(c.triangles.len(), 4);
        assert_eq!(cliques(&c.adjacency(), 4).len(), 1);
    }
}
