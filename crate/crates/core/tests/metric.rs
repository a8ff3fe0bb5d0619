mod common;

use common::{length_oracle, random_metric, random_tour};
use gadgetforge::metric::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn graph(size: usize, directed: bool, edges: &[(usize, usize, u8)]) -> WeightedGraph {
    WeightedGraph {
        size,
        directed,
        edges: edges.to_vec(),
    }
}

/// Floyd–Warshall with the cap applied at the end.
fn closure_oracle(g: &WeightedGraph, bound: u8) -> Vec<Vec<u32>> {
    let n = g.size;
    let inf = u32::MAX / 4;
    let mut d = vec![vec![inf; n]; n];
    for v in 0..n {
        d[v][v] = 0;
    }
    for &(u, v, w) in &g.edges {
        d[u][v] = d[u][v].min(w as u32);
        if !g.directed {
            d[v][u] = d[v][u].min(w as u32);
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                d[i][j] = d[i][j].min(d[i][k] + d[k][j]);
            }
        }
    }
    for (i, row) in d.iter_mut().enumerate() {
        for (j, x) in row.iter_mut().enumerate() {
            if i != j {
                *x = (*x).min(bound as u32);
            }
        }
    }
    d
}

#[test]
fn tour_length_of_unit_cycle() {
    let m = BoundedMetric::from_unit_arcs(4, 2, false, &[(0, 1), (1, 2), (2, 3), (3, 0)]);
    assert_eq!(tour_length(&m, &Tour::new(vec![0, 1, 2, 3])).unwrap(), 4);
    // only 3 -> 0 is a unit arc
    assert_eq!(tour_length(&m, &Tour::new(vec![0, 2, 1, 3])).unwrap(), 7);
}

#[test]
fn invalid_tours_are_rejected() {
    let m = BoundedMetric::from_unit_arcs(3, 2, true, &[]);
    assert_eq!(
        tour_length(&m, &Tour::new(vec![0, 1, 1])),
        Err(MetricError::Duplicate(1))
    );
    assert!(matches!(
        tour_length(&m, &Tour::new(vec![0, 1])),
        Err(MetricError::SizeMismatch { expected: 3, got: 2 })
    ));
    assert_eq!(tour_length(&m, &Tour::new(vec![0, 1, 5])), Err(MetricError::OutOfRange(5)));
}

#[test]
fn tour_length_matches_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..200 {
        let n = rng.gen_range(2..12);
        let sym = rng.gen();
        let m = random_metric(&mut rng, n, 4, sym);
        let t = random_tour(&mut rng, n);
        assert_eq!(tour_length(&m, &t).unwrap(), length_oracle(&m, &t));
    }
}

#[test]
fn rotation_and_reversal_keep_length() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..100 {
        let n = rng.gen_range(3..10);
        let m = random_metric(&mut rng, n, 4, true);
        let t = random_tour(&mut rng, n);
        let l = tour_length(&m, &t).unwrap();
        let r = t.rotated_to(rng.gen_range(0..n));
        assert_eq!(tour_length(&m, &r).unwrap(), l);
        assert_eq!(tour_length(&m, &t.reversed()).unwrap(), l);
    }
}

#[test]
fn triangle_check() {
    let ones = BoundedMetric::from_fn(5, 4, false, |_, _| 1);
    assert!(check_triangle(&ones).is_ok());
    let bad = BoundedMetric::from_fn(3, 4, false, |u, v| if (u, v) == (0, 2) { 4 } else { 1 });
    assert_eq!(check_triangle(&bad), Err(MetricError::Triangle(0, 1, 2)));
}

#[test]
fn closure_of_path_graph() {
    let g = graph(4, false, &[(0, 1, 1), (1, 2, 1), (2, 3, 1)]);
    let m = metric_closure(&g, 4);
    assert_eq!(m.d(0, 3), 3);
    assert_eq!(m.d(3, 0), 3);
    let capped = metric_closure(&g, 2);
    assert_eq!(capped.d(0, 3), 2);
    let dir = metric_closure(&graph(3, true, &[(0, 1, 1), (1, 2, 1)]), 4);
    assert_eq!((dir.d(0, 2), dir.d(2, 0)), (2, 4));
}

#[test]
fn closure_matches_floyd_warshall() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..200 {
        let n = rng.gen_range(2..14);
        let directed = rng.gen();
        let bound = [2u8, 4, 8][rng.gen_range(0..3)];
        let edges: Vec<(usize, usize, u8)> = (0..rng.gen_range(0..3 * n))
            .map(|_| {
                let u = rng.gen_range(0..n);
                let v = (u + rng.gen_range(1..n)) % n;
                (u, v, rng.gen_range(1..=bound))
            })
            .collect();
        let g = graph(n, directed, &edges);
        let m = metric_closure(&g, bound);
        let want = closure_oracle(&g, bound);
        for u in 0..n {
            for v in 0..n {
                if u != v {
                    assert_eq!(m.d(u, v) as u32, want[u][v]);
                }
            }
        }
        assert!(check_triangle(&m).is_ok());
        assert!(m.check_range().is_ok());
    }
}

#[test]
fn closure_is_idempotent() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..100 {
        let n = rng.gen_range(2..12);
        let edges: Vec<(usize, usize, u8)> = (0..2 * n)
            .map(|_| (rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(1..=4)))
            .filter(|e| e.0 != e.1)
            .collect();
        let m = metric_closure(&graph(n, true, &edges), 4);
        let mut again = Vec::new();
        for u in 0..n {
            for v in 0..n {
                if u != v {
                    again.push((u, v, m.d(u, v)));
                }
            }
        }
        assert_eq!(metric_closure(&graph(n, true, &again), 4), m);
    }
}

#[test]
fn unit_arcs_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100 {
        let n = rng.gen_range(2..15);
        let mut arcs: Vec<(usize, usize)> = (0..n)
            .flat_map(|u| (0..n).map(move |v| (u, v)))
            .filter(|&(u, v)| u != v && rng.gen_bool(0.3))
            .collect();
        arcs.sort_unstable();
        let m = BoundedMetric::from_unit_arcs(n, 2, false, &arcs);
        assert_eq!(m.unit_arcs(), arcs);
        for u in 0..n {
            for v in 0..n {
                if u != v {
                    assert_eq!(m.d(u, v), if arcs.contains(&(u, v)) { 1 } else { 2 });
                }
            }
        }
    }
}

#[test]
fn max01_identity_on_random_tours() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..50 {
        let n = rng.gen_range(2..20);
        let m = random_metric(&mut rng, n, 2, false);
        let w = to_max01(&m).unwrap();
        for _ in 0..20 {
            let t = random_tour(&mut rng, n);
            assert_eq!(w.tour_weight(&t).unwrap() + tour_length(&m, &t).unwrap(), 2 * n as u64);
        }
    }
}

#[test]
fn max01_edge_cases() {
    let all_ones = BoundedMetric::from_fn(6, 2, false, |_, _| 1);
    let w = to_max01(&all_ones).unwrap();
    let t = Tour::new((0..6).collect());
    assert_eq!(w.tour_weight(&t).unwrap(), 6);
    let one_long = BoundedMetric::from_fn(6, 2, false, |u, v| if (u, v) == (5, 0) { 2 } else { 1 });
    assert_eq!(to_max01(&one_long).unwrap().tour_weight(&t).unwrap(), 5);
    let four = BoundedMetric::from_fn(3, 4, false, |_, _| 1);
    assert_eq!(to_max01(&four), Err(MetricError::WrongRegime));
}

#[test]
fn tsplib_export_has_full_matrix() {
    let m = BoundedMetric::from_fn(3, 4, false, |u, v| (u + 2 * v) as u8 % 4 + 1);
    let s = m.to_tsplib("x");
    assert!(s.contains("TYPE: ATSP"));
    assert!(s.contains("EDGE_WEIGHT_TYPE: EXPLICIT"));
    assert!(s.contains("EDGE_WEIGHT_FORMAT: FULL_MATRIX"));
    assert!(s.contains("DIMENSION: 3"));
    assert!(s.trim_end().ends_with("EOF"));
    let sym = BoundedMetric::from_unit_arcs(3, 2, true, &[(0, 1)]);
    assert!(sym.to_tsplib("y").contains("TYPE: TSP"));
}
