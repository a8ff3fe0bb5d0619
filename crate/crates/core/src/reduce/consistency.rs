//! Consistency of tours and assignment extraction.
//!
//! A tour is consistent when each parity graph is visited in one block
//! along one of its two traversals. `make_consistent` first tries to
//! rebuild the tour from an assignment read off the given tour, then from
//! an optimal assignment when one can be enumerated, and finally repairs
//! parity graphs one at a time by reinsertion. The last step never makes
//! the tour longer but is not guaranteed to reach consistency.

use super::{audit_ledger, tour_from_assignment, LengthLedger, Pg, ReduceError, ReducedInstance};
use crate::gadgets::Traversal;
use crate::hybrid::{Assignment, HybridInstance};
use crate::metric::{validate_tour, Tour};
use std::collections::HashSet;

/// Traversal used on each parity graph, `None` where the tour is not
/// consistent with either.
pub fn traversal_modes(inst: &ReducedInstance, t: &Tour) -> Vec<Option<Traversal>> {
    let n = t.len();
    let mut pos = vec![0usize; inst.size()];
    for (k, &v) in t.order.iter().enumerate() {
        pos[v] = k;
    }
    let directed = inst.regime().directed();
    inst.pgs()
        .iter()
        .map(|pg| {
            [Traversal::Zero, Traversal::One].into_iter().find(|&tr| {
                let path = pg.path(tr);
                let p0 = pos[path[0]];
                let fwd = path.iter().enumerate().all(|(i, &v)| pos[v] == (p0 + i) % n);
                let bwd = !directed && path.iter().enumerate().all(|(i, &v)| pos[v] == (p0 + n - i) % n);
                fwd || bwd
            })
        })
        .collect()
}

pub fn is_consistent(inst: &ReducedInstance, t: &Tour) -> bool {
    traversal_modes(inst, t).iter().all(Option::is_some)
}

/// Assignment read from the variable parity graphs: the traversal where
/// one exists, otherwise whichever traversal shares more internal arcs
/// with the tour (0 on ties).
fn read_assignment(inst: &ReducedInstance, t: &Tour) -> Assignment {
    let modes = traversal_modes(inst, t);
    let directed = inst.regime().directed();
    let key = |u: usize, v: usize| if directed || u < v { (u, v) } else { (v, u) };
    let arcs: HashSet<(usize, usize)> = t.arcs().map(|(u, v)| key(u, v)).collect();
    let mut phi = Assignment::zeros(inst.hybrid());
    for (k, pg) in inst.pgs().iter().enumerate() {
        let Pg::Var { circle, position } = pg.id else {
            continue;
        };
        let bit = match modes[k] {
            Some(tr) => tr.bit(),
            None => {
                let score = |tr: Traversal| {
                    pg.path(tr)
                        .windows(2)
                        .filter(|w| arcs.contains(&key(w[0], w[1])))
                        .count()
                };
                score(Traversal::One) > score(Traversal::Zero)
            }
        };
        phi.set((circle, position).into(), bit);
    }
    phi
}

/// Single flips and whole-circle resets while they lower the number of
/// violated equations.
pub fn improve_assignment(h: &HybridInstance, phi: &Assignment) -> Assignment {
    let mut cur = phi.clone();
    let mut score = h.unsat_count(&cur).expect("assignment fits");
    loop {
        let before = score;
        for (l, c) in h.circles().iter().enumerate() {
            for bit in [false, true] {
                let mut next = cur.clone();
                for p in 1..=c.length {
                    next.set((l, p).into(), bit);
                }
                let s = h.unsat_count(&next).expect("assignment fits");
                if s < score {
                    cur = next;
                    score = s;
                }
            }
            for p in 1..=c.length {
                let v = (l, p).into();
                cur.set(v, !cur.get(v));
                let s = h.unsat_count(&cur).expect("assignment fits");
                if s < score {
                    score = s;
                } else {
                    cur.set(v, !cur.get(v));
                }
            }
        }
        if score == before {
            return cur;
        }
    }
}

pub fn make_consistent(inst: &ReducedInstance, t: &Tour) -> Result<Tour, ReduceError> {
    validate_tour(inst.size(), t)?;
    if is_consistent(inst, t) {
        return Ok(t.clone());
    }
    let len = inst.tour_length(t)?;
    let psi = improve_assignment(inst.hybrid(), &read_assignment(inst, t));
    let candidate = tour_from_assignment(inst, &psi)?;
    if inst.tour_length(&candidate)? <= len {
        return Ok(candidate);
    }
    if let Some(best) = inst.best_assignment() {
        let candidate = tour_from_assignment(inst, best)?;
        if inst.tour_length(&candidate)? <= len {
            return Ok(candidate);
        }
    }
    Ok(reinsert(inst, t))
}

/// Cut each inconsistent parity graph out and put it back as a traversal at
/// its cheapest position, keeping the move only when the tour gets no
/// longer.
fn reinsert(inst: &ReducedInstance, t: &Tour) -> Tour {
    let m = inst.metric();
    let d = |u: usize, v: usize| m.d(u, v) as i64;
    let mut cur = t.clone();
    let mut len = inst.tour_length(&cur).expect("valid tour") as i64;
    loop {
        let modes = traversal_modes(inst, &cur);
        let mut moved = false;
        for (k, pg) in inst.pgs().iter().enumerate() {
            if modes[k].is_some() {
                continue;
            }
            let own: HashSet<usize> = pg.vertices.iter().copied().collect();
            let rest: Vec<usize> = cur.order.iter().copied().filter(|v| !own.contains(v)).collect();
            let rest_len: i64 = (0..rest.len()).map(|i| d(rest[i], rest[(i + 1) % rest.len()])).sum();
            let mut options: Vec<Vec<usize>> = Vec::new();
            for tr in [Traversal::Zero, Traversal::One] {
                options.push(pg.path(tr).to_vec());
                if !inst.regime().directed() {
                    options.push(pg.path(tr).iter().rev().copied().collect());
                }
            }
            let mut best: Option<(i64, usize, usize)> = None;
            for i in 0..rest.len() {
                let (a, b) = (rest[i], rest[(i + 1) % rest.len()]);
                if let (Some(x), Some(y)) = (inst.pg_of(a), inst.pg_of(b)) {
                    if x == y && modes[x].is_some() {
                        continue;
                    }
                }
                for (o, path) in options.iter().enumerate() {
                    let inner: i64 = path.windows(2).map(|w| d(w[0], w[1])).sum();
                    let cost = rest_len - d(a, b) + d(a, path[0]) + inner + d(*path.last().unwrap(), b);
                    if best.map_or(true, |bb| cost < bb.0) {
                        best = Some((cost, i, o));
                    }
                }
            }
            if let Some((cost, i, o)) = best {
                if cost <= len {
                    let mut order = rest[..=i].to_vec();
                    order.extend_from_slice(&options[o]);
                    order.extend_from_slice(&rest[i + 1..]);
                    cur = Tour::new(order).rotated_to(0);
                    len = cost;
                    moved = true;
                    break;
                }
            }
        }
        if !moved {
            return cur;
        }
    }
}

/// Result of reading an assignment off a tour.
#[derive(Debug, Clone)]
pub struct Extraction {
    pub assignment: Assignment,
    /// Consistent tour the assignment was read from.
    pub tour: Tour,
    pub unsat: usize,
    pub ledger: LengthLedger,
}

pub fn assignment_from_tour(inst: &ReducedInstance, t: &Tour) -> Result<Extraction, ReduceError> {
    let tour = make_consistent(inst, t)?;
    let assignment = improve_assignment(inst.hybrid(), &read_assignment(inst, &tour));
    let unsat = inst.hybrid().unsat_count(&assignment)?;
    let ledger = audit_ledger(inst, &tour)?;
    Ok(Extraction {
        assignment,
        tour,
        unsat,
        ledger,
    })
}
