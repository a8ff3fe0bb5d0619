//! Bounded metrics, tours and the MAX-(0,1)-ATSP view of a (1,2) instance.

use serde::{Deserialize, Serialize};
use std::collections::BinaryHeap;
use std::cmp::Reverse;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MetricError {
    #[error("tour has {got} entries, metric has {expected} vertices")]
    SizeMismatch { expected: usize, got: usize },
    #[error("vertex {0} is out of range")]
    OutOfRange(usize),
    #[error("vertex {0} is visited more than once")]
    Duplicate(usize),
    #[error("vertex {0} is never visited")]
    Missing(usize),
    #[error("triangle inequality fails: d({0},{2}) > d({0},{1}) + d({1},{2})")]
    Triangle(usize, usize, usize),
    #[error("distance d({0},{1}) = {2} is outside [1, {3}]")]
    Range(usize, usize, u8, u8),
    #[error("expected a directed (1,2) metric")]
    WrongRegime,
}

/// Complete distance table with off-diagonal values in `1..=bound`.
/// The diagonal is stored as 0 and never read.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundedMetric {
    size: usize,
    symmetric: bool,
    bound: u8,
    dist: Vec<u8>,
}

impl BoundedMetric {
    /// All pairs at distance `bound` except the listed weight-1 pairs.
    pub fn from_unit_arcs(size: usize, bound: u8, symmetric: bool, arcs: &[(usize, usize)]) -> Self {
        let mut dist = vec![bound; size * size];
        for v in 0..size {
            dist[v * size + v] = 0;
        }
        for &(u, v) in arcs {
            dist[u * size + v] = 1;
            if symmetric {
                dist[v * size + u] = 1;
            }
        }
        BoundedMetric {
            size,
            symmetric,
            bound,
            dist,
        }
    }

    pub fn from_fn(size: usize, bound: u8, symmetric: bool, f: impl Fn(usize, usize) -> u8) -> Self {
        let mut dist = vec![0; size * size];
        for u in 0..size {
            for v in 0..size {
                if u != v {
                    dist[u * size + v] = f(u, v);
                }
            }
        }
        BoundedMetric {
            size,
            symmetric,
            bound,
            dist,
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn bound(&self) -> u8 {
        self.bound
    }

    #[inline]
    pub fn d(&self, u: usize, v: usize) -> u8 {
        self.dist[u * self.size + v]
    }

    /// Off-diagonal values within `1..=bound` and symmetry when flagged.
    pub fn check_range(&self) -> Result<(), MetricError> {
        for u in 0..self.size {
            for v in 0..self.size {
                if u == v {
                    continue;
                }
                let d = self.d(u, v);
                if d < 1 || d > self.bound {
                    return Err(MetricError::Range(u, v, d, self.bound));
                }
                if self.symmetric && d != self.d(v, u) {
                    return Err(MetricError::Range(u, v, d, self.bound));
                }
            }
        }
        Ok(())
    }

    /// Weight-1 pairs, each unordered pair once when symmetric.
    pub fn unit_arcs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for u in 0..self.size {
            for v in 0..self.size {
                if u != v && self.d(u, v) == 1 && (!self.symmetric || u < v) {
                    out.push((u, v));
                }
            }
        }
        out
    }

    /// TSPLIB text with an explicit full matrix.
    pub fn to_tsplib(&self, name: &str) -> String {
        let mut s = String::new();
        s.push_str(&format!("NAME: {name}\n"));
        s.push_str(&format!("TYPE: {}\n", if self.symmetric { "TSP" } else { "ATSP" }));
        s.push_str(&format!("DIMENSION: {}\n", self.size));
        s.push_str("EDGE_WEIGHT_TYPE: EXPLICIT\nEDGE_WEIGHT_FORMAT: FULL_MATRIX\nEDGE_WEIGHT_SECTION\n");
        for u in 0..self.size {
            let row: Vec<String> = (0..self.size).map(|v| self.d(u, v).to_string()).collect();
            s.push_str(&row.join(" "));
            s.push('\n');
        }
        s.push_str("EOF\n");
        s
    }
}

/// Cyclic vertex order; `order[k] -> order[k+1]` and the wrap-around arc.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Tour {
    pub order: Vec<usize>,
}

impl Tour {
    pub fn new(order: Vec<usize>) -> Self {
        Tour { order }
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn arcs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.order.len();
        (0..n).map(move |k| (self.order[k], self.order[(k + 1) % n]))
    }

    /// Same cycle, rotated so that vertex `v` comes first.
    pub fn rotated_to(&self, v: usize) -> Tour {
        let k = self.order.iter().position(|&x| x == v).unwrap_or(0);
        let mut order = self.order[k..].to_vec();
        order.extend_from_slice(&self.order[..k]);
        Tour { order }
    }

    pub fn reversed(&self) -> Tour {
        let mut order = self.order.clone();
        order.reverse();
        Tour { order }
    }
}

pub fn validate_tour(size: usize, t: &Tour) -> Result<(), MetricError> {
    if t.order.len() != size {
        return Err(MetricError::SizeMismatch {
            expected: size,
            got: t.order.len(),
        });
    }
    let mut seen = vec![false; size];
    for &v in &t.order {
        if v >= size {
            return Err(MetricError::OutOfRange(v));
        }
        if seen[v] {
            return Err(MetricError::Duplicate(v));
        }
        seen[v] = true;
    }
    match seen.iter().position(|s| !s) {
        Some(v) => Err(MetricError::Missing(v)),
        None => Ok(()),
    }
}

pub fn tour_length(m: &BoundedMetric, t: &Tour) -> Result<u64, MetricError> {
    validate_tour(m.size(), t)?;
    Ok(t.arcs().map(|(u, v)| m.d(u, v) as u64).sum())
}

pub fn check_triangle(m: &BoundedMetric) -> Result<(), MetricError> {
    let n = m.size();
    for y in 0..n {
        for x in 0..n {
            if x == y {
                continue;
            }
            let dxy = m.d(x, y);
            for z in 0..n {
                if z == x || z == y {
                    continue;
                }
                if m.d(x, z) > dxy + m.d(y, z) {
                    return Err(MetricError::Triangle(x, y, z));
                }
            }
        }
    }
    Ok(())
}

/// Sparse weighted graph, weights ≥ 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightedGraph {
    pub size: usize,
    pub directed: bool,
    pub edges: Vec<(usize, usize, u8)>,
}

/// All-pairs shortest paths capped at `bound`. Each source runs a Dijkstra
/// that stops at the cap, so cost stays proportional to the local ball.
pub fn metric_closure(g: &WeightedGraph, bound: u8) -> BoundedMetric {
    let n = g.size;
    let mut adj: Vec<Vec<(usize, u8)>> = vec![Vec::new(); n];
    for &(u, v, w) in &g.edges {
        adj[u].push((v, w));
        if !g.directed {
            adj[v].push((u, w));
        }
    }
    let mut dist = vec![bound; n * n];
    let mut best = vec![u8::MAX; n];
    let mut touched = Vec::new();
    for s in 0..n {
        let mut heap = BinaryHeap::new();
        best[s] = 0;
        touched.push(s);
        heap.push(Reverse((0u8, s)));
        while let Some(Reverse((d, u))) = heap.pop() {
            if d > best[u] {
                continue;
            }
            for &(v, w) in &adj[u] {
                let nd = d.saturating_add(w);
                if nd < bound && nd < best[v] {
                    if best[v] == u8::MAX {
                        touched.push(v);
                    }
                    best[v] = nd;
                    heap.push(Reverse((nd, v)));
                }
            }
        }
        for &v in &touched {
            dist[s * n + v] = best[v];
            best[v] = u8::MAX;
        }
        touched.clear();
        dist[s * n + s] = 0;
    }
    BoundedMetric {
        size: n,
        symmetric: !g.directed,
        bound,
        dist,
    }
}

/// Complete digraph with 0/1 weights: 1 exactly on the (1,2) unit arcs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Max01Instance {
    size: usize,
    weight: Vec<u8>,
}

impl Max01Instance {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn w(&self, u: usize, v: usize) -> u8 {
        self.weight[u * self.size + v]
    }

    pub fn tour_weight(&self, t: &Tour) -> Result<u64, MetricError> {
        validate_tour(self.size, t)?;
        Ok(t.arcs().map(|(u, v)| self.w(u, v) as u64).sum())
    }
}

pub fn to_max01(m: &BoundedMetric) -> Result<Max01Instance, MetricError> {
    if m.bound() != 2 {
        return Err(MetricError::WrongRegime);
    }
    let n = m.size();
    let mut weight = vec![0; n * n];
    for u in 0..n {
        for v in 0..n {
            if u != v && m.d(u, v) == 1 {
                weight[u * n + v] = 1;
            }
        }
    }
    Ok(Max01Instance { size: n, weight })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closure_caps_long_paths() {
        let g = WeightedGraph {
            size: 4,
            directed: true,
            edges: vec![(0, 1, 2), (1, 2, 2), (2, 3, 1)],
        };
        let m = metric_closure(&g, 4);
        assert_eq!(m.d(0, 1), 2);
        assert_eq!(m.d(0, 2), 4);
        assert_eq!(m.d(1, 3), 3);
        assert_eq!(m.d(3, 0), 4);
    }
}
