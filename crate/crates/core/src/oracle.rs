//! Exact desk-scale solvers: Held–Karp for tours, exhaustive permutation
//! search as its cross-check, and Hamiltonian path enumeration.

use crate::metric::{BoundedMetric, Tour};
use std::time::{Duration, Instant};
use thiserror::Error;

pub const DEFAULT_DP_VERTICES: usize = 20;
pub const DEFAULT_ENUM_VERTICES: usize = 16;
pub const EXHAUSTIVE_VERTICES: usize = 9;
pub const BUDGET_ENV: &str = "GADGETFORGE_BUDGET";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("{size} vertices exceed the budget of {limit}")]
    Budget { size: usize, limit: usize },
    #[error("time ceiling of {0:?} exceeded")]
    Timeout(Duration),
    #[error("vertex {0} is out of range")]
    OutOfRange(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolveBudget {
    pub max_vertices: usize,
    pub time_ceiling: Option<Duration>,
}

impl SolveBudget {
    pub fn new(max_vertices: usize) -> Self {
        SolveBudget {
            max_vertices,
            time_ceiling: None,
        }
    }

    pub fn dp() -> Self {
        Self::new(DEFAULT_DP_VERTICES)
    }

    pub fn enumeration() -> Self {
        Self::new(DEFAULT_ENUM_VERTICES)
    }

    /// `GADGETFORGE_BUDGET` overrides the vertex cap when it parses.
    pub fn dp_from_env() -> Self {
        match std::env::var(BUDGET_ENV).ok().and_then(|s| s.trim().parse().ok()) {
            Some(v) if v > 0 => Self::new(v),
            _ => Self::dp(),
        }
    }

    pub fn with_time(mut self, limit: Duration) -> Self {
        self.time_ceiling = Some(limit);
        self
    }

    fn check(&self, size: usize) -> Result<(), OracleError> {
        if size > self.max_vertices {
            Err(OracleError::Budget {
                size,
                limit: self.max_vertices,
            })
        } else {
            Ok(())
        }
    }
}

struct Clock {
    start: Instant,
    limit: Option<Duration>,
}

impl Clock {
    fn new(limit: Option<Duration>) -> Self {
        Clock {
            start: Instant::now(),
            limit,
        }
    }

    fn check(&self) -> Result<(), OracleError> {
        match self.limit {
            Some(l) if self.start.elapsed() > l => Err(OracleError::Timeout(l)),
            _ => Ok(()),
        }
    }
}

pub fn exact_opt(m: &BoundedMetric, budget: SolveBudget) -> Result<(u64, Tour), OracleError> {
    let (len, tour) = exact_opt_by(m.size(), |u, v| m.d(u, v) as i64, budget)?;
    Ok((len as u64, tour))
}

/// Held–Karp over an arbitrary cost function. The table is filled backward
/// (cost to finish from a state), so walking forward and always taking the
/// smallest optimal successor yields the lexicographically smallest optimal
/// tour starting at vertex 0.
pub fn exact_opt_by(
    size: usize,
    cost: impl Fn(usize, usize) -> i64,
    budget: SolveBudget,
) -> Result<(i64, Tour), OracleError> {
    budget.check(size)?;
    let clock = Clock::new(budget.time_ceiling);
    match size {
        0 => return Ok((0, Tour::new(vec![]))),
        1 => return Ok((0, Tour::new(vec![0]))),
        _ => {}
    }
    let k = size - 1;
    let full = (1usize << k) - 1;
    let c: Vec<i64> = (0..size * size).map(|x| cost(x / size, x % size)).collect();
    let cc = |u: usize, v: usize| c[u * size + v];
    let mut g = vec![i64::MAX; (full + 1) * k];
    for v in 0..k {
        g[full * k + v] = cc(v + 1, 0);
    }
    for mask in (1..full).rev() {
        if mask & 0xfff == 0 {
            clock.check()?;
        }
        for v in 0..k {
            if mask >> v & 1 == 0 {
                continue;
            }
            let mut best = i64::MAX;
            let mut rest = full & !mask;
            while rest != 0 {
                let w = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                let val = cc(v + 1, w + 1) + g[(mask | 1 << w) * k + w];
                if val < best {
                    best = val;
                }
            }
            g[mask * k + v] = best;
        }
    }
    let opt = (0..k).map(|v| cc(0, v + 1) + g[(1 << v) * k + v]).min().unwrap();
    let mut order = vec![0];
    let mut cur = (0..k).find(|&v| cc(0, v + 1) + g[(1 << v) * k + v] == opt).unwrap();
    let mut mask = 1 << cur;
    order.push(cur + 1);
    while mask != full {
        let here = g[mask * k + cur];
        let next = (0..k)
            .find(|&w| mask >> w & 1 == 0 && cc(cur + 1, w + 1) + g[(mask | 1 << w) * k + w] == here)
            .unwrap();
        mask |= 1 << next;
        order.push(next + 1);
        cur = next;
    }
    Ok((opt, Tour::new(order)))
}

/// Every permutation with vertex 0 fixed first, in lexicographic order; the
/// first optimum found is kept.
pub fn exhaustive_opt(m: &BoundedMetric, budget: SolveBudget) -> Result<(u64, Tour), OracleError> {
    let limit = budget.max_vertices.min(EXHAUSTIVE_VERTICES);
    SolveBudget::new(limit).check(m.size())?;
    let n = m.size();
    if n <= 1 {
        return Ok((0, Tour::new((0..n).collect())));
    }
    let mut perm: Vec<usize> = (1..n).collect();
    let length = |p: &[usize]| {
        let mut s = m.d(0, p[0]) as u64 + m.d(p[p.len() - 1], 0) as u64;
        for w in p.windows(2) {
            s += m.d(w[0], w[1]) as u64;
        }
        s
    };
    let mut best = (length(&perm), perm.clone());
    while next_permutation(&mut perm) {
        let l = length(&perm);
        if l < best.0 {
            best = (l, perm.clone());
        }
    }
    let mut order = vec![0];
    order.extend(best.1);
    Ok((best.0, Tour::new(order)))
}

fn next_permutation(p: &mut [usize]) -> bool {
    if p.len() < 2 {
        return false;
    }
    let mut i = p.len() - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = p.len() - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// All Hamiltonian paths from `s` to `t`, each listed once, in DFS order
/// with neighbors taken ascending. Undirected paths are oriented s→t.
pub fn hamiltonian_paths(
    size: usize,
    arcs: &[(usize, usize)],
    directed: bool,
    s: usize,
    t: usize,
    budget: SolveBudget,
) -> Result<Vec<Vec<usize>>, OracleError> {
    budget.check(size)?;
    for &v in [s, t].iter() {
        if v >= size {
            return Err(OracleError::OutOfRange(v));
        }
    }
    let mut adj = vec![Vec::new(); size];
    for &(u, v) in arcs {
        if u >= size || v >= size {
            return Err(OracleError::OutOfRange(u.max(v)));
        }
        adj[u].push(v);
        if !directed {
            adj[v].push(u);
        }
    }
    for a in adj.iter_mut() {
        a.sort_unstable();
        a.dedup();
    }
    let clock = Clock::new(budget.time_ceiling);
    let mut out = Vec::new();
    let mut path = vec![s];
    let mut used = vec![false; size];
    used[s] = true;
    let mut steps = 0u64;
    extend(&adj, t, &mut path, &mut used, &mut out, &clock, &mut steps)?;
    Ok(out)
}

fn extend(
    adj: &[Vec<usize>],
    t: usize,
    path: &mut Vec<usize>,
    used: &mut Vec<bool>,
    out: &mut Vec<Vec<usize>>,
    clock: &Clock,
    steps: &mut u64,
) -> Result<(), OracleError> {
    *steps += 1;
    if *steps & 0xffff == 0 {
        clock.check()?;
    }
    let u = *path.last().unwrap();
    if path.len() == adj.len() {
        if u == t {
            out.push(path.clone());
        }
        return Ok(());
    }
    if u == t {
        return Ok(());
    }
    for &v in &adj[u] {
        if !used[v] {
            used[v] = true;
            path.push(v);
            extend(adj, t, path, used, out, clock, steps)?;
            path.pop();
            used[v] = false;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn permutation_step_is_lexicographic() {
        let mut p = vec![1, 2, 3];
        let mut seen = vec![p.clone()];
        while next_permutation(&mut p) {
            seen.push(p.clone());
        }
        assert_eq!(seen.len(), 6);
        assert!(seen.windows(2).all(|w| w[0] < w[1]));
    }
}
