use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;
use toposcope::embedding::PointCloud;
use toposcope::persistence::{circular_coordinates, compute_persistence, enclosing_radius, rips_filtration, PersistenceDiagram};
use toposcope::selection::{
    candidate_set, density, density_weights, dijkstra, knn_graph, select, select_global, select_topological, Provenance,
    SelectionConfig,
};

fn ring(n: usize, radius: f64) -> Vec<Vec<f64>> {
    (0..n).map(|k| {
        let t = TAU * k as f64 / n as f64;
        vec![radius * t.cos(), radius * t.sin()]
    }).collect()
}

/// 80 points packed on a 30 degree arc, 20 spread over the rest; a
/// uniform ring saturates every neighbourhood at the loop's mid-life radius.
fn lopsided_ring() -> Vec<Vec<f64>> {
    let dense = (0..80).map(|k| TAU / 12.0 * k as f64 / 80.0);
    let sparse = (0..20).map(|k| TAU / 12.0 + TAU * 11.0 / 12.0 * (k as f64 + 0.5) / 20.0);
    dense.chain(sparse).map(|t| vec![t.cos(), t.sin()]).collect()
}

fn diagram(cloud: &PointCloud) -> PersistenceDiagram {
    compute_persistence(&rips_filtration(cloud, enclosing_radius(cloud), 2).unwrap())
}

fn circ_dist(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

#[test]
fn symmetric_clusters_share_weight_equally() {
    let mut rows = Vec::new();
    for k in 0..10 {
        let t = k as f64 * 0.3;
        rows.push(vec![-5.0 + 0.2 * t.cos(), 0.2 * t.sin()]);
        rows.push(vec![5.0 - 0.2 * t.cos(), 0.2 * t.sin()]);
    }
    let w = density_weights(&PointCloud::from_rows(&rows).unwrap(), 2.0).unwrap();
    let left: f64 = rows.iter().zip(&w).filter(|(r, _)| r[0] < 0.0).map(|(_, x)| x).sum();
    let right: f64 = rows.iter().zip(&w).filter(|(r, _)| r[0] > 0.0).map(|(_, x)| x).sum();
    assert!((left - right).abs() < 1e-12);
}

#[test]
fn dense_blob_dominates_weight() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut rows: Vec<Vec<f64>> = (0..90).map(|_| vec![rng.gen::<f64>() * 0.05, rng.gen::<f64>() * 0.05]).collect();
    rows.extend((0..10).map(|_| vec![1.0 + rng.gen::<f64>() * 10.0, 1.0 + rng.gen::<f64>() * 10.0]));
    let cloud = PointCloud::from_rows(&rows).unwrap();
    let w = density_weights(&cloud, 2.0).unwrap();
    let blob: f64 = w[..90].iter().sum();
    assert!(blob > 0.9, "{blob}");
    // the KDE oracle, written out
    let (rho, h) = density(&cloud).unwrap();
    let direct: f64 = (0..100).map(|j| (-cloud.dist(0, j).powi(2) / (2.0 * h * h)).exp()).sum::<f64>() / (100.0 * h * h);
    assert!((rho[0] - direct).abs() < 1e-12 * direct);
}

#[test]
fn outliers_are_not_candidates() {
    let uniform = PointCloud::from_rows(&ring(100, 1.0)).unwrap();
    assert!(candidate_set(&uniform, &diagram(&uniform)).is_err());
    let mut rows = lopsided_ring();
    for k in 0..5 {
        rows.push(vec![20.0 + 7.0 * k as f64, -30.0]);
    }
    let cloud = PointCloud::from_rows(&rows).unwrap();
    let c = candidate_set(&cloud, &diagram(&cloud)).unwrap();
    assert!(!c.no_loop);
    assert!(!c.indices.is_empty());
    assert!(c.indices.iter().all(|&i| i < 100));
}

#[test]
fn saturated_neighbourhoods_are_infeasible() {
    let mut rows = ring(60, 1.0);
    rows.extend(ring(60, 1.0005));
    let cloud = PointCloud::from_rows(&rows).unwrap();
    let mut diag = diagram(&cloud);
    for p in diag.pairs.iter_mut().filter(|p| p.dim == 1) {
        p.birth = 10.0;
        p.death = 20.0;
    }
    assert!(candidate_set(&cloud, &diag).is_err());
}

#[test]
fn no_loop_falls_back_to_every_point() {
    let cloud = PointCloud::from_rows(&[vec![0.0], vec![1.0], vec![2.5]]).unwrap();
    let c = candidate_set(&cloud, &PersistenceDiagram::default()).unwrap();
    assert!(c.no_loop && c.indices == vec![0, 1, 2]);
}

#[test]
fn spacing_only_is_geodesic_farthest_point() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let rows: Vec<Vec<f64>> = ring(80, 1.0).into_iter().map(|r| vec![r[0] + 0.02 * rng.gen::<f64>(), r[1]]).collect();
    let cloud = PointCloud::from_rows(&rows).unwrap();
    let n = cloud.len();
    let weights = density_weights(&cloud, 2.0).unwrap();
    let q = vec![1.0 / n as f64; n];
    let angles = circular_coordinates(&cloud).unwrap();
    let cfg = SelectionConfig { k: 10, r: 0.6, lambdas: (0.0, 1.0, 0.0, 0.0), ..SelectionConfig::default() };
    let cands: Vec<usize> = (0..n).collect();
    let got = select_topological(&cloud, &cands, &weights, &q, &angles, &cfg).unwrap();

    let adj = knn_graph(&cloud, cfg.knn_k);
    let first = (0..n).max_by(|&a, &b| weights[a].total_cmp(&weights[b]).then(b.cmp(&a))).unwrap();
    let mut want = vec![first];
    let mut geo = dijkstra(&adj, first);
    while want.len() < cfg.k_topo() {
        let j = (0..n).filter(|j| !want.contains(j)).max_by(|&a, &b| geo[a].total_cmp(&geo[b]).then(b.cmp(&a))).unwrap();
        want.push(j);
        for (g, d) in geo.iter_mut().zip(dijkstra(&adj, j)) {
            *g = g.min(d);
        }
    }
    assert_eq!(got, want);
}

#[test]
fn single_topological_point_is_the_heaviest_candidate() {
    let cloud = PointCloud::from_rows(&ring(30, 1.0)).unwrap();
    let weights: Vec<f64> = (0..30).map(|k| 1.0 + (k as f64 * 0.7).sin()).collect();
    let q = vec![1.0 / 30.0; 30];
    let angles = circular_coordinates(&cloud).unwrap();
    let cfg = SelectionConfig { k: 3, r: 0.4, ..SelectionConfig::default() };
    assert_eq!(cfg.k_topo(), 1);
    let cands = [3, 7, 12, 20];
    let got = select_topological(&cloud, &cands, &weights, &q, &angles, &cfg).unwrap();
    let best = *cands.iter().max_by(|&&a, &&b| weights[a].total_cmp(&weights[b])).unwrap();
    assert_eq!(got, vec![best]);
}

#[test]
fn ring_representatives_are_angularly_separated() {
    let cloud = PointCloud::from_rows(&ring(120, 1.0)).unwrap();
    let cfg = SelectionConfig::default();
    let weights = density_weights(&cloud, cfg.alpha).unwrap();
    let q = vec![1.0 / 120.0; 120];
    let angles = circular_coordinates(&cloud).unwrap();
    let cands: Vec<usize> = (0..120).collect();
    let topo = select_topological(&cloud, &cands, &weights, &q, &angles, &cfg).unwrap();
    assert_eq!(topo.len(), 4);
    let min_sep = TAU / (1.35 * 4.0);
    for a in 0..topo.len() {
        for b in a + 1..topo.len() {
            assert!(circ_dist(angles[topo[a]], angles[topo[b]]) >= min_sep);
        }
    }
}

#[test]
fn full_selection_on_a_lopsided_ring() {
    let cloud = PointCloud::from_rows(&lopsided_ring()).unwrap();
    let set = select(&cloud, &diagram(&cloud), &SelectionConfig::default()).unwrap();
    assert_eq!(set.indices.len(), 7);
    assert_eq!(set.topo_positions().len(), 4);
    assert_eq!(set.provenance.iter().filter(|p| **p == Provenance::Global).count(), 3);
    let mut unique = set.indices.clone();
    unique.sort();
    unique.dedup();
    assert_eq!(unique.len(), 7);
}

#[test]
fn global_selection_crosses_to_the_other_cluster() {
    let mut rows = Vec::new();
    for k in 0..8 {
        rows.push(vec![0.01 * k as f64, 0.0]);
        rows.push(vec![10.0 + 0.01 * k as f64, 0.0]);
    }
    let cloud = PointCloud::from_rows(&rows).unwrap();
    let w = vec![1.0 / 16.0; 16];
    assert!(select_global(&cloud, &w, &[0], 0).is_empty());
    let next = select_global(&cloud, &w, &[0], 1);
    assert!(rows[next[0]][0] > 5.0);
}

#[test]
fn invalid_configs_are_rejected() {
    for cfg in [
        SelectionConfig { r: 1.0, ..SelectionConfig::default() },
        SelectionConfig { k: 1, r: 0.5, ..SelectionConfig::default() },
        SelectionConfig { alpha: 0.5, ..SelectionConfig::default() },
        SelectionConfig { bins: 3, ..SelectionConfig::default() },
        SelectionConfig { lambdas: (1.0, -1.0, 0.0, 0.0), ..SelectionConfig::default() },
    ] {
        assert!(cfg.validate().is_err(), "{cfg:?}");
    }
}
