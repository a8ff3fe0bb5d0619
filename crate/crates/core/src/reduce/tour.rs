//! The tour `σ_φ` of an assignment.
//!
//! Every unit gets a fixed internal path: variables from `φ`, contact
//! parity graphs from their equation's route, border units straight
//! through. Each circle block then keeps as many of its wiring arcs as the
//! path endpoints allow, and the pieces left over are concatenated.

use super::{Block, ReduceError, ReducedInstance};
use crate::gadgets::{Port, RouteItem, ThreeEqCore, Traversal};
use crate::hybrid::Assignment;
use crate::metric::Tour;

const NONE: usize = usize::MAX;

struct Uf(Vec<usize>);

impl Uf {
    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut y = x;
        while self.0[y] != r {
            let next = self.0[y];
            self.0[y] = r;
            y = next;
        }
        r
    }
}

pub(crate) struct Plan<'a> {
    inst: &'a ReducedInstance,
    entry: Vec<usize>,
    exit: Vec<usize>,
    succ: Vec<usize>,
    pred: Vec<usize>,
    /// Units passed by the outer loop; circle wiring may not touch them.
    locked: Vec<bool>,
    uf: Uf,
}

impl<'a> Plan<'a> {
    fn new(inst: &'a ReducedInstance) -> Self {
        let n = inst.size();
        let mut p = Plan {
            inst,
            entry: vec![NONE; inst.unit_count],
            exit: vec![NONE; inst.unit_count],
            succ: vec![NONE; n],
            pred: vec![NONE; n],
            locked: vec![false; inst.unit_count],
            uf: Uf((0..inst.unit_count).collect()),
        };
        for v in 0..n {
            if inst.pg_of[v].is_none() {
                let u = inst.unit_of[v];
                if p.entry[u] == NONE {
                    p.entry[u] = v;
                }
                p.exit[u] = v;
            }
        }
        for b in &inst.borders {
            let mut v = b.entry;
            while v != b.exit {
                p.link(v, v + 1);
                v += 1;
            }
        }
        p
    }

    fn link(&mut self, u: usize, v: usize) {
        self.succ[u] = v;
        self.pred[v] = u;
    }

    /// Fix the internal path of parity graph `k`.
    fn set_path(&mut self, k: usize, t: Traversal, reversed: bool) {
        let mut path = self.inst.pgs[k].path(t).to_vec();
        if reversed {
            path.reverse();
        }
        for w in path.windows(2) {
            self.link(w[0], w[1]);
        }
        self.entry[k] = path[0];
        self.exit[k] = *path.last().unwrap();
    }

    fn clear_path(&mut self, k: usize) {
        for &v in &self.inst.pgs[k].vertices {
            self.succ[v] = NONE;
            self.pred[v] = NONE;
        }
    }

    /// Join `u → v` across units, or refuse when an endpoint is taken or
    /// the join would close a cycle.
    fn join(&mut self, u: usize, v: usize) -> bool {
        let (a, b) = (self.inst.unit_of[u], self.inst.unit_of[v]);
        if self.exit[a] != u || self.entry[b] != v || self.succ[u] != NONE || self.pred[v] != NONE {
            return false;
        }
        let (ra, rb) = (self.uf.find(a), self.uf.find(b));
        if ra == rb {
            return false;
        }
        self.uf.0[ra] = rb;
        self.link(u, v);
        true
    }

    /// Largest subset of `arcs` that can be joined together.
    fn best_subset(&mut self, arcs: &[(usize, usize)]) -> Vec<usize> {
        let m = arcs.len();
        let usable: Vec<bool> = arcs
            .iter()
            .map(|&(u, v)| {
                let (a, b) = (self.inst.unit_of[u], self.inst.unit_of[v]);
                !self.locked[a]
                    && !self.locked[b]
                    && self.exit[a] == u
                    && self.entry[b] == v
                    && self.succ[u] == NONE
                    && self.pred[v] == NONE
            })
            .collect();
        let roots: Vec<(usize, usize)> = arcs
            .iter()
            .map(|&(u, v)| {
                let a = self.inst.unit_of[u];
                let b = self.inst.unit_of[v];
                (self.uf.find(a), self.uf.find(b))
            })
            .collect();
        let mut best: (usize, usize) = (0, 0);
        for mask in 1usize..1 << m {
            let count = mask.count_ones() as usize;
            if count <= best.0 {
                continue;
            }
            let chosen: Vec<usize> = (0..m).filter(|k| mask >> k & 1 == 1).collect();
            if chosen.iter().any(|&k| !usable[k]) {
                continue;
            }
            let mut tails: Vec<usize> = chosen.iter().map(|&k| arcs[k].0).collect();
            let mut heads: Vec<usize> = chosen.iter().map(|&k| arcs[k].1).collect();
            tails.sort_unstable();
            heads.sort_unstable();
            if tails.windows(2).any(|w| w[0] == w[1]) || heads.windows(2).any(|w| w[0] == w[1]) {
                continue;
            }
            let mut local: Vec<(usize, usize)> = Vec::new();
            let mut acyclic = true;
            for &k in &chosen {
                let (ra, rb) = roots[k];
                let fa = local_find(&local, ra);
                let fb = local_find(&local, rb);
                if fa == fb {
                    acyclic = false;
                    break;
                }
                local.push((fa, fb));
            }
            if acyclic {
                best = (count, mask);
            }
        }
        (0..m).filter(|k| best.1 >> k & 1 == 1).collect()
    }

    fn into_tour(self) -> Tour {
        let inst = self.inst;
        let first = inst.borders[0].entry;
        let last = inst.starts[inst.starts.len() - 1];
        let mut starts: Vec<usize> = (0..inst.size()).filter(|&v| self.pred[v] == NONE).collect();
        let walk = |s: usize| {
            let mut piece = vec![s];
            let mut v = s;
            while self.succ[v] != NONE {
                v = self.succ[v];
                piece.push(v);
            }
            piece
        };
        starts.retain(|&s| s != first);
        let mut pieces = vec![walk(first)];
        let mut tail_piece = None;
        for s in starts {
            let p = walk(s);
            if *p.last().unwrap() == last {
                tail_piece = Some(p);
            } else {
                pieces.push(p);
            }
        }
        pieces.extend(tail_piece);
        Tour::new(pieces.concat()).rotated_to(0)
    }
}

fn local_find(pairs: &[(usize, usize)], mut x: usize) -> usize {
    loop {
        match pairs.iter().find(|p| p.0 == x) {
            Some(&(_, y)) => x = y,
            None => return x,
        }
    }
}

fn pass_of(entry: Port, exit: Port) -> (Traversal, bool) {
    match (entry, exit) {
        (Port::OneIn, Port::OneOut) => (Traversal::One, false),
        (Port::ZeroIn, Port::ZeroOut) => (Traversal::Zero, false),
        (Port::OneOut, Port::OneIn) => (Traversal::One, true),
        _ => (Traversal::Zero, true),
    }
}

pub fn tour_from_assignment(inst: &ReducedInstance, phi: &Assignment) -> Result<Tour, ReduceError> {
    let h = &inst.hybrid;
    if !h.fits(phi) {
        return Err(ReduceError::AssignmentShape);
    }
    let mut plan = Plan::new(inst);
    for (v, &k) in &inst.var_pg {
        plan.set_path(k, Traversal::from_bit(phi.get(*v)), false);
    }
    let core = ThreeEqCore::get(inst.regime.directed());
    for (c, q) in h.three_eqs().iter().enumerate() {
        let mut outer = 0;
        for s in 0..3 {
            let neg = s == 0 && q.negated();
            let k = inst.contact_pg[&q.vars[s]];
            if phi.get(q.vars[s]) ^ neg {
                outer |= 1 << s;
            } else {
                plan.set_path(k, Traversal::from_bit(neg), false);
            }
        }
        let route = &core.routes[outer];
        let mut ends = Vec::with_capacity(route.items.len());
        for item in &route.items {
            ends.push(match *item {
                RouteItem::Core(k) if k == core.s_in => (inst.starts[c], inst.starts[c]),
                RouteItem::Core(k) if k == core.s_out => (inst.starts[c + 1], inst.starts[c + 1]),
                RouteItem::Core(k) => (inst.cores[c][k], inst.cores[c][k]),
                RouteItem::Slot { slot, entry, exit } => {
                    let k = inst.contact_pg[&q.vars[slot]];
                    let (t, rev) = pass_of(entry, exit);
                    plan.set_path(k, t, rev);
                    (plan.entry[k], plan.exit[k])
                }
            });
        }
        for (w, &linked) in ends.windows(2).zip(&route.linked) {
            if linked {
                let ok = plan.join(w[0].1, w[1].0);
                debug_assert!(ok, "route link must join");
            }
        }
        for s in (0..3).filter(|s| outer >> s & 1 == 1) {
            plan.locked[inst.contact_pg[&q.vars[s]]] = true;
        }
    }
    for (block, arcs) in &inst.groups {
        let arcs: Vec<(usize, usize)> = arcs.iter().map(|&k| (inst.arcs[k].from, inst.arcs[k].to)).collect();
        let matching = match block {
            Block::Matching { circle, i, .. } => Some(inst.match_pg[&(*circle, *i)]),
            _ => None,
        };
        let chosen = match matching {
            None => plan.best_subset(&arcs),
            Some(m) => {
                let mut best: Option<(Traversal, Vec<usize>)> = None;
                for t in [Traversal::Zero, Traversal::One] {
                    plan.set_path(m, t, false);
                    let pick = plan.best_subset(&arcs);
                    if best.as_ref().map_or(true, |b| pick.len() > b.1.len()) {
                        best = Some((t, pick));
                    }
                    plan.clear_path(m);
                }
                let (t, pick) = best.unwrap();
                plan.set_path(m, t, false);
                pick
            }
        };
        for k in chosen {
            let ok = plan.join(arcs[k].0, arcs[k].1);
            debug_assert!(ok);
        }
    }
    Ok(plan.into_tour())
}
