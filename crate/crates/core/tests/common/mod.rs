//! Shared fixtures and second implementations used as test oracles.
#![allow(dead_code)]

pub mod checks;

use gadgetforge::hybrid::{
    generate_mini, Assignment, Circle, HybridInstance, MatchingMode, MiniSpec, ThreeEq, ThreeEqWiring, VarRef,
};
use gadgetforge::metric::{BoundedMetric, Tour};
use gadgetforge::reduce::{ReducedInstance, Regime};
use rand::seq::SliceRandom;
use rand::Rng;

/// Violated equations counted straight from the circle/equation lists.
pub fn unsat_oracle(h: &HybridInstance, phi: &Assignment) -> usize {
    let x = |l: usize, p: usize| phi.values[l][p - 1];
    let mut u = 0;
    for (l, c) in h.circles().iter().enumerate() {
        let n = c.length;
        u += (1..n).filter(|&i| x(l, i) != x(l, i + 1)).count();
        u += (x(l, 1) != x(l, n)) as usize;
        u += c.matching.iter().filter(|&&(i, j)| x(l, i) != x(l, j)).count();
    }
    for q in h.three_eqs() {
        let mut acc = q.rhs;
        for s in 0..3 {
            acc ^= (x(q.vars[s].circle, q.vars[s].position) ^ q.neg[s]) as u8;
        }
        u += (acc & 1) as usize;
    }
    u
}

pub fn length_oracle(m: &BoundedMetric, t: &Tour) -> u64 {
    let n = t.order.len();
    let mut s = 0u64;
    for k in 0..n {
        s += m.d(t.order[k], t.order[(k + 1) % n]) as u64;
    }
    s
}

/// Minimum tour length over all permutations fixing vertex 0, by recursion.
pub fn brute_tsp(m: &BoundedMetric) -> u64 {
    fn go(m: &BoundedMetric, last: usize, used: &mut Vec<bool>, left: usize, acc: u64, best: &mut u64) {
        if acc >= *best {
            return;
        }
        if left == 0 {
            *best = (*best).min(acc + m.d(last, 0) as u64);
            return;
        }
        for v in 1..used.len() {
            if !used[v] {
                used[v] = true;
                go(m, v, used, left - 1, acc + m.d(last, v) as u64, best);
                used[v] = false;
            }
        }
    }
    let n = m.size();
    if n <= 1 {
        return 0;
    }
    let mut best = u64::MAX;
    let mut used = vec![false; n];
    used[0] = true;
    go(m, 0, &mut used, n - 1, 0, &mut best);
    best
}

/// Number of Hamiltonian s-t paths, by backtracking over an adjacency matrix.
pub fn count_paths(n: usize, adj: &[Vec<bool>], s: usize, t: usize) -> usize {
    fn go(adj: &[Vec<bool>], v: usize, t: usize, seen: &mut Vec<bool>, depth: usize) -> usize {
        if depth == seen.len() {
            return (v == t) as usize;
        }
        if v == t {
            return 0;
        }
        let mut c = 0;
        for w in 0..seen.len() {
            if adj[v][w] && !seen[w] {
                seen[w] = true;
                c += go(adj, w, t, seen, depth + 1);
                seen[w] = false;
            }
        }
        c
    }
    let mut seen = vec![false; n];
    seen[s] = true;
    go(adj, s, t, &mut seen, 1)
}

pub fn random_metric<R: Rng>(rng: &mut R, n: usize, bound: u8, symmetric: bool) -> BoundedMetric {
    let mut table = vec![vec![0u8; n]; n];
    for u in 0..n {
        for v in 0..n {
            if u != v && (!symmetric || u < v) {
                table[u][v] = rng.gen_range(1..=bound);
                if symmetric {
                    table[v][u] = table[u][v];
                }
            }
        }
    }
    BoundedMetric::from_fn(n, bound, symmetric, |u, v| table[u][v])
}

pub fn random_tour<R: Rng>(rng: &mut R, n: usize) -> Tour {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    Tour::new(order)
}

/// Vertex count read off the construction: one parity graph per variable,
/// matching pair and used contact, plus border units and the start/check
/// vertices of the three-equation cores.
pub fn vertex_count(h: &HybridInstance, r: Regime) -> usize {
    let vars = h.var_count();
    let pairs: usize = h.circles().iter().map(|c| c.matching.len()).sum();
    let contacts = 3 * h.m3();
    let (parity, border, checks) = match r {
        Regime::Atsp12 | Regime::Atsp14 => (3, 1, 3),
        Regime::Tsp12 => (8, 3, 2),
        Regime::Tsp14 => (9, 3, 2),
    };
    parity * (vars + pairs + contacts) + border * h.n() + (checks + 1) * h.m3() + 1
}

pub fn circle(length: usize, matching: &[(usize, usize)]) -> Circle {
    Circle {
        length,
        matching: matching.to_vec(),
    }
}

pub fn eq(vars: [(usize, usize); 3], neg: [bool; 3], rhs: u8) -> ThreeEq {
    ThreeEq::new(vars.map(VarRef::from), neg, rhs)
}

/// The ≥100-instance corpus of seeded mini instances used by the forward
/// formula checks.
pub fn mini_corpus() -> Vec<HybridInstance> {
    let shapes: Vec<(Vec<usize>, MatchingMode, usize)> = vec![
        (vec![1], MatchingMode::None, 0),
        (vec![2], MatchingMode::None, 0),
        (vec![3], MatchingMode::Deterministic, 0),
        (vec![5], MatchingMode::Random, 0),
        (vec![2, 3], MatchingMode::None, 0),
        (vec![3, 5], MatchingMode::Random, 0),
        (vec![7], MatchingMode::Deterministic, 0),
        (vec![7, 7, 7], MatchingMode::None, 1),
        (vec![7, 7, 7], MatchingMode::Deterministic, 1),
        (vec![7, 7, 7], MatchingMode::Random, 1),
        (vec![14, 7, 7], MatchingMode::Random, 1),
        (vec![7, 7, 7, 7], MatchingMode::Random, 1),
        (vec![14, 14, 7, 7], MatchingMode::Random, 2),
        (vec![14, 14, 14], MatchingMode::Deterministic, 2),
    ];
    let mut out = Vec::new();
    for (k, (lengths, matching, eqs)) in shapes.into_iter().enumerate() {
        for seed in 0..8u64 {
            let spec = MiniSpec {
                circle_lengths: lengths.clone(),
                matching,
                three_eqs: ThreeEqWiring::Random(eqs),
            };
            out.push(generate_mini(&spec, 1000 * k as u64 + seed).expect("corpus spec is consistent"));
        }
    }
    out
}

/// Mini instances small enough that every target stays within `limit`
/// vertices for at least the directed regimes.
pub fn tiny_instances() -> Vec<HybridInstance> {
    let specs: Vec<Vec<Circle>> = vec![
        vec![circle(1, &[])],
        vec![circle(2, &[])],
        vec![circle(3, &[])],
        vec![circle(4, &[])],
        vec![circle(5, &[])],
        vec![circle(6, &[])],
        vec![circle(1, &[]), circle(1, &[])],
        vec![circle(2, &[]), circle(1, &[])],
        vec![circle(1, &[]), circle(1, &[]), circle(1, &[])],
        vec![circle(2, &[]), circle(2, &[])],
        vec![circle(3, &[]), circle(2, &[])],
        vec![circle(4, &[]), circle(1, &[])],
        vec![circle(3, &[(1, 2)])],
        vec![circle(4, &[(1, 3)])],
        vec![circle(4, &[(2, 3)])],
        vec![circle(4, &[(1, 2)])],
        vec![circle(3, &[(1, 2)]), circle(1, &[])],
    ];
    specs
        .into_iter()
        .map(|c| HybridInstance::new(c, vec![]).expect("valid tiny instance"))
        .collect()
}

pub fn build(h: &HybridInstance, r: Regime) -> ReducedInstance {
    gadgetforge::reduce::build(h, r).expect("valid instance")
}
