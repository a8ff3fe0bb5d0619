//! Hybrid-problem instances: circles of copies of each variable, linked by
//! XOR-0 equations, plus three-variable equations on the contact positions.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

/// Widest bit vector `max_sat_bruteforce` will enumerate: the used contacts
/// jointly, or the free positions of one circle.
pub const BRUTEFORCE_LIMIT: usize = 24;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HybridError {
    #[error("circle {0} has length 0")]
    EmptyCircle(usize),
    #[error("variable ({0},{1}) is out of range")]
    OutOfRange(usize, usize),
    #[error("matching pair ({1},{2}) on circle {0} is invalid: {3}")]
    BadPair(usize, usize, usize, &'static str),
    #[error("three-variable equation {0} is invalid: {1}")]
    BadThreeEq(usize, String),
    #[error("contact ({0},{1}) is used by more than one three-variable equation")]
    ContactReused(usize, usize),
    #[error("variable {0:?} never occurs")]
    UnusedVariable(String),
    #[error("equation {0} does not have three distinct variables")]
    RepeatedVariable(usize),
    #[error("circle {0} has an odd number of matchable checkers ({1})")]
    OddCheckers(usize, usize),
    #[error("assignment does not match the instance shape")]
    PartialAssignment,
    #[error("brute force needs {0} free bits, capped at {1}")]
    TooLarge(usize, usize),
    #[error("mini spec is inconsistent: {0}")]
    BadSpec(String),
}

/// A variable `x^circle_position`; circles are 0-based, positions 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(from = "(usize, usize)", into = "(usize, usize)")]
pub struct VarRef {
    pub circle: usize,
    pub position: usize,
}

impl VarRef {
    pub fn new(circle: usize, position: usize) -> Self {
        VarRef { circle, position }
    }
}

impl From<(usize, usize)> for VarRef {
    fn from((circle, position): (usize, usize)) -> Self {
        VarRef { circle, position }
    }
}

impl From<VarRef> for (usize, usize) {
    fn from(v: VarRef) -> Self {
        (v.circle, v.position)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Contact,
    Checker,
}

pub fn var_kind(position: usize) -> VarKind {
    if position % 7 == 0 {
        VarKind::Contact
    } else {
        VarKind::Checker
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Circle {
    pub length: usize,
    pub matching: Vec<(usize, usize)>,
}

impl Circle {
    pub fn contacts(&self) -> impl Iterator<Item = usize> + '_ {
        (7..=self.length).step_by(7)
    }

    /// Checkers that may take part in a matching. The last position is
    /// excluded: its successor edge is the border equation.
    pub fn matchable(&self) -> Vec<usize> {
        (1..self.length)
            .filter(|&p| var_kind(p) == VarKind::Checker)
            .collect()
    }

    pub fn partner(&self, position: usize) -> Option<usize> {
        self.matching.iter().find_map(|&(i, j)| {
            if i == position {
                Some(j)
            } else if j == position {
                Some(i)
            } else {
                None
            }
        })
    }
}

/// `(x0^n0) xor (x1^n1) xor (x2^n2) = rhs`, stored normalized: rhs 0 and at
/// most the first slot negated.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThreeEq {
    pub neg: [bool; 3],
    pub rhs: u8,
    pub vars: [VarRef; 3],
}

impl ThreeEq {
    pub fn new(vars: [VarRef; 3], neg: [bool; 3], rhs: u8) -> Self {
        let parity = (rhs & 1) ^ neg.iter().filter(|&&b| b).count() as u8 % 2;
        ThreeEq {
            vars,
            neg: [parity == 1, false, false],
            rhs: 0,
        }
    }

    pub fn negated(&self) -> bool {
        self.neg[0]
    }

    pub fn satisfied(&self, phi: &Assignment) -> bool {
        let mut acc = self.rhs & 1;
        for s in 0..3 {
            acc ^= phi.get(self.vars[s]) as u8 ^ self.neg[s] as u8;
        }
        acc == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    /// Every invariant of the reduction theorems holds.
    Theorem,
    /// Desk-scale instance: short circles, unused contacts or partial matching.
    Relaxed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Equation {
    Cycle(VarRef, VarRef),
    Border(VarRef, VarRef),
    Matching(VarRef, VarRef),
    Three(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawHybrid", into = "RawHybrid")]
pub struct HybridInstance {
    circles: Vec<Circle>,
    three_eqs: Vec<ThreeEq>,
    #[serde(skip)]
    contact_slot: BTreeMap<VarRef, (usize, usize)>,
}

#[derive(Serialize, Deserialize)]
struct RawHybrid {
    circles: Vec<Circle>,
    three_eqs: Vec<ThreeEq>,
}

impl TryFrom<RawHybrid> for HybridInstance {
    type Error = HybridError;
    fn try_from(r: RawHybrid) -> Result<Self, HybridError> {
        HybridInstance::new(r.circles, r.three_eqs)
    }
}

impl From<HybridInstance> for RawHybrid {
    fn from(h: HybridInstance) -> Self {
        RawHybrid {
            circles: h.circles,
            three_eqs: h.three_eqs,
        }
    }
}

impl HybridInstance {
    pub fn new(mut circles: Vec<Circle>, three_eqs: Vec<ThreeEq>) -> Result<Self, HybridError> {
        for (l, c) in circles.iter_mut().enumerate() {
            if c.length == 0 {
                return Err(HybridError::EmptyCircle(l));
            }
            let mut seen = BTreeSet::new();
            for pair in c.matching.iter_mut() {
                let (i, j) = (pair.0.min(pair.1), pair.0.max(pair.1));
                *pair = (i, j);
                let bad = |why| Err(HybridError::BadPair(l, i, j, why));
                if i == 0 || j > c.length {
                    return bad("position out of range");
                }
                if i == j {
                    return bad("pairs a position with itself");
                }
                if var_kind(i) == VarKind::Contact || var_kind(j) == VarKind::Contact {
                    return bad("contains a contact position");
                }
                if j == c.length {
                    return bad("contains the last position");
                }
                if !seen.insert(i) || !seen.insert(j) {
                    return bad("position matched twice");
                }
            }
            c.matching.sort();
        }
        let mut contact_slot = BTreeMap::new();
        let mut eqs = Vec::with_capacity(three_eqs.len());
        for (e, q) in three_eqs.into_iter().enumerate() {
            let q = ThreeEq::new(q.vars, q.neg, q.rhs);
            for (s, v) in q.vars.iter().enumerate() {
                let c = circles
                    .get(v.circle)
                    .ok_or(HybridError::OutOfRange(v.circle, v.position))?;
                if v.position == 0 || v.position > c.length {
                    return Err(HybridError::OutOfRange(v.circle, v.position));
                }
                if var_kind(v.position) != VarKind::Contact {
                    return Err(HybridError::BadThreeEq(
                        e,
                        format!("({},{}) is not a contact", v.circle, v.position),
                    ));
                }
                if contact_slot.insert(*v, (e, s)).is_some() {
                    return Err(HybridError::ContactReused(v.circle, v.position));
                }
            }
            eqs.push(q);
        }
        Ok(HybridInstance {
            circles,
            three_eqs: eqs,
            contact_slot,
        })
    }

    pub fn circles(&self) -> &[Circle] {
        &self.circles
    }

    pub fn three_eqs(&self) -> &[ThreeEq] {
        &self.three_eqs
    }

    pub fn n(&self) -> usize {
        self.circles.len()
    }

    pub fn m2(&self) -> usize {
        self.circles.iter().map(|c| c.length + c.matching.len()).sum()
    }

    pub fn m3(&self) -> usize {
        self.three_eqs.len()
    }

    pub fn var_count(&self) -> usize {
        self.circles.iter().map(|c| c.length).sum()
    }

    /// Equation and slot of a contact, if some three-variable equation uses it.
    pub fn contact_slot(&self, v: VarRef) -> Option<(usize, usize)> {
        self.contact_slot.get(&v).copied()
    }

    pub fn shape(&self) -> Shape {
        let circles_ok = self.circles.iter().all(|c| {
            c.length % 7 == 0 && 2 * c.matching.len() == c.length - c.length / 7
        });
        let contacts: usize = self.circles.iter().map(|c| c.length / 7).sum();
        if circles_ok && self.contact_slot.len() == contacts {
            Shape::Theorem
        } else {
            Shape::Relaxed
        }
    }

    pub fn equations(&self) -> Vec<Equation> {
        let mut out = Vec::with_capacity(self.m2() + self.m3());
        for (l, c) in self.circles.iter().enumerate() {
            for i in 1..c.length {
                out.push(Equation::Cycle(VarRef::new(l, i), VarRef::new(l, i + 1)));
            }
            out.push(Equation::Border(VarRef::new(l, 1), VarRef::new(l, c.length)));
            for &(i, j) in &c.matching {
                out.push(Equation::Matching(VarRef::new(l, i), VarRef::new(l, j)));
            }
        }
        out.extend((0..self.three_eqs.len()).map(Equation::Three));
        out
    }

    pub fn is_satisfied(&self, eq: Equation, phi: &Assignment) -> bool {
        match eq {
            Equation::Cycle(a, b) | Equation::Border(a, b) | Equation::Matching(a, b) => {
                phi.get(a) == phi.get(b)
            }
            Equation::Three(e) => self.three_eqs[e].satisfied(phi),
        }
    }

    pub fn fits(&self, phi: &Assignment) -> bool {
        phi.values.len() == self.circles.len()
            && phi
                .values
                .iter()
                .zip(&self.circles)
                .all(|(v, c)| v.len() == c.length)
    }

    pub fn unsat_count(&self, phi: &Assignment) -> Result<usize, HybridError> {
        if !self.fits(phi) {
            return Err(HybridError::PartialAssignment);
        }
        Ok(self
            .equations()
            .into_iter()
            .filter(|&e| !self.is_satisfied(e, phi))
            .count())
    }

    /// Exact optimum by enumeration. Circles only interact through their
    /// contacts, so the search runs over contact bits and caches each
    /// circle's best completion.
    pub fn max_sat_bruteforce(&self) -> Result<(Assignment, usize), HybridError> {
        let used: Vec<VarRef> = self.contact_slot.keys().copied().collect();
        let widest = self.circles.iter().map(|c| c.length).max().unwrap_or(0);
        let v = used.len().max(widest);
        if v > BRUTEFORCE_LIMIT {
            return Err(HybridError::TooLarge(v, BRUTEFORCE_LIMIT));
        }
        let mut cache: BTreeMap<(usize, u32), (usize, u32)> = BTreeMap::new();
        let mut best: Option<(usize, Vec<u32>)> = None;
        for bits in 0u32..(1u32 << used.len()) {
            let mut phi = Assignment::zeros(self);
            for (k, r) in used.iter().enumerate() {
                phi.set(*r, bits >> k & 1 == 1);
            }
            let mut u = self
                .three_eqs
                .iter()
                .filter(|q| !q.satisfied(&phi))
                .count();
            let mut words = Vec::with_capacity(self.n());
            for (l, c) in self.circles.iter().enumerate() {
                let mut fixed_mask = 0u32;
                let mut fixed_val = 0u32;
                for (k, r) in used.iter().enumerate() {
                    if r.circle == l {
                        fixed_mask |= 1 << (r.position - 1);
                        fixed_val |= (bits >> k & 1) << (r.position - 1);
                    }
                }
                let entry = *cache
                    .entry((l, fixed_val))
                    .or_insert_with(|| circle_best(c, fixed_mask, fixed_val));
                u += entry.0;
                words.push(entry.1);
            }
            if best.as_ref().map_or(true, |b| u < b.0) {
                best = Some((u, words));
            }
        }
        let (u, words) = best.expect("at least one assignment");
        let values = self
            .circles
            .iter()
            .zip(words)
            .map(|(c, w)| (0..c.length).map(|p| w >> p & 1 == 1).collect())
            .collect();
        Ok((Assignment { values }, u))
    }
}

fn circle_unsat(c: &Circle, x: u32) -> usize {
    let l = c.length;
    let mut u = 0;
    for p in 0..l - 1 {
        u += ((x >> p ^ x >> (p + 1)) & 1) as usize;
    }
    u += ((x ^ x >> (l - 1)) & 1) as usize;
    for &(i, j) in &c.matching {
        u += ((x >> (i - 1) ^ x >> (j - 1)) & 1) as usize;
    }
    u
}

// Lowest unsat count of one circle with some bits fixed; the first optimum in
// increasing word order is returned.
fn circle_best(c: &Circle, fixed_mask: u32, fixed_val: u32) -> (usize, u32) {
    let free: Vec<usize> = (0..c.length).filter(|p| fixed_mask >> p & 1 == 0).collect();
    let mut best = (usize::MAX, 0);
    for bits in 0u32..(1u32 << free.len()) {
        let mut x = fixed_val;
        for (k, p) in free.iter().enumerate() {
            x |= (bits >> k & 1) << p;
        }
        let u = circle_unsat(c, x);
        if u < best.0 {
            best = (u, x);
        }
    }
    best
}

/// Total assignment, one bit vector per circle (index = position - 1).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Assignment {
    pub values: Vec<Vec<bool>>,
}

impl Assignment {
    pub fn zeros(h: &HybridInstance) -> Self {
        Assignment {
            values: h.circles.iter().map(|c| vec![false; c.length]).collect(),
        }
    }

    pub fn constant(h: &HybridInstance, bit: bool) -> Self {
        Assignment {
            values: h.circles.iter().map(|c| vec![bit; c.length]).collect(),
        }
    }

    pub fn random<R: Rng>(h: &HybridInstance, rng: &mut R) -> Self {
        Assignment {
            values: h
                .circles
                .iter()
                .map(|c| (0..c.length).map(|_| rng.gen()).collect())
                .collect(),
        }
    }

    /// The `index`-th assignment in enumeration order (bit k = k-th variable).
    pub fn from_index(h: &HybridInstance, index: u64) -> Self {
        let mut k = 0;
        let values = h
            .circles
            .iter()
            .map(|c| {
                (0..c.length)
                    .map(|_| {
                        let b = index >> k & 1 == 1;
                        k += 1;
                        b
                    })
                    .collect()
            })
            .collect();
        Assignment { values }
    }

    pub fn get(&self, v: VarRef) -> bool {
        self.values[v.circle][v.position - 1]
    }

    pub fn set(&mut self, v: VarRef, bit: bool) {
        self.values[v.circle][v.position - 1] = bit;
    }

    pub fn complement(&self) -> Self {
        Assignment {
            values: self
                .values
                .iter()
                .map(|c| c.iter().map(|b| !b).collect())
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct E3Equation {
    pub vars: [String; 3],
    pub rhs: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaxE3LinInstance {
    pub equations: Vec<E3Equation>,
}

impl MaxE3LinInstance {
    /// Variables in order of first appearance with their occurrence counts.
    pub fn occurrences(&self) -> Vec<(String, usize)> {
        let mut order: Vec<(String, usize)> = Vec::new();
        for q in &self.equations {
            for v in &q.vars {
                match order.iter_mut().find(|(n, _)| n == v) {
                    Some(e) => e.1 += 1,
                    None => order.push((v.clone(), 1)),
                }
            }
        }
        order
    }

    pub fn random<R: Rng>(vars: usize, equations: usize, rng: &mut R) -> Self {
        let names: Vec<String> = (0..vars).map(|i| format!("x{i}")).collect();
        let equations = (0..equations)
            .map(|_| {
                let pick: Vec<&String> = names.choose_multiple(rng, 3).collect();
                E3Equation {
                    vars: [pick[0].clone(), pick[1].clone(), pick[2].clone()],
                    rhs: rng.gen_range(0..2),
                }
            })
            .collect();
        MaxE3LinInstance { equations }
    }
}

/// Builds one circle of length `7 t` per variable. Contacts take the
/// variable's occurrences in input order; the k-th checker is matched with
/// the (3t+k)-th.
pub fn expand(e3: &MaxE3LinInstance) -> Result<HybridInstance, HybridError> {
    for (e, q) in e3.equations.iter().enumerate() {
        if q.vars[0] == q.vars[1] || q.vars[0] == q.vars[2] || q.vars[1] == q.vars[2] {
            return Err(HybridError::RepeatedVariable(e));
        }
    }
    let occ = e3.occurrences();
    let mut next_contact: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    let mut circles = Vec::with_capacity(occ.len());
    for (l, (name, t)) in occ.iter().enumerate() {
        if *t == 0 {
            return Err(HybridError::UnusedVariable(name.clone()));
        }
        circles.push(theorem_circle(*t));
        next_contact.insert(name.as_str(), (l, 7));
    }
    let mut eqs = Vec::with_capacity(e3.equations.len());
    for q in &e3.equations {
        let mut vars = [VarRef::new(0, 0); 3];
        for (s, name) in q.vars.iter().enumerate() {
            let slot = next_contact.get_mut(name.as_str()).expect("counted above");
            vars[s] = VarRef::new(slot.0, slot.1);
            slot.1 += 7;
        }
        eqs.push(ThreeEq::new(vars, [false; 3], q.rhs));
    }
    HybridInstance::new(circles, eqs)
}

pub fn theorem_circle(t: usize) -> Circle {
    let length = 7 * t;
    let ch: Vec<usize> = (1..=length).filter(|p| p % 7 != 0).collect();
    let matching = (0..3 * t).map(|k| (ch[k], ch[3 * t + k])).collect();
    Circle { length, matching }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatchingMode {
    /// k-th matchable checker with the (h+k)-th, h = half their number.
    Deterministic,
    /// Seeded random perfect matching.
    Random,
    /// No matching equations at all.
    None,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ThreeEqWiring {
    Explicit(Vec<ThreeEq>),
    /// That many equations on distinct circles, random contacts and rhs.
    Random(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MiniSpec {
    pub circle_lengths: Vec<usize>,
    pub matching: MatchingMode,
    pub three_eqs: ThreeEqWiring,
}

pub fn generate_mini(spec: &MiniSpec, seed: u64) -> Result<HybridInstance, HybridError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut circles = Vec::with_capacity(spec.circle_lengths.len());
    for (l, &length) in spec.circle_lengths.iter().enumerate() {
        if length == 0 {
            return Err(HybridError::EmptyCircle(l));
        }
        let mut c = Circle {
            length,
            matching: Vec::new(),
        };
        let mut pool = c.matchable();
        match spec.matching {
            MatchingMode::None => {}
            MatchingMode::Deterministic | MatchingMode::Random => {
                if pool.len() % 2 == 1 {
                    return Err(HybridError::OddCheckers(l, pool.len()));
                }
                if spec.matching == MatchingMode::Random {
                    pool.shuffle(&mut rng);
                }
                let h = pool.len() / 2;
                c.matching = (0..h).map(|k| (pool[k], pool[h + k])).collect();
            }
        }
        circles.push(c);
    }
    let eqs = match &spec.three_eqs {
        ThreeEqWiring::Explicit(eqs) => eqs.clone(),
        ThreeEqWiring::Random(count) => {
            let mut free: Vec<Vec<usize>> = circles
                .iter()
                .map(|c| c.contacts().collect::<Vec<_>>())
                .collect();
            let mut eqs = Vec::with_capacity(*count);
            for _ in 0..*count {
                let open: Vec<usize> = (0..free.len()).filter(|&l| !free[l].is_empty()).collect();
                if open.len() < 3 {
                    return Err(HybridError::BadSpec(format!(
                        "not enough free contacts for {count} equations"
                    )));
                }
                // fullest circles first so later equations still find three
                let mut open = open;
                open.shuffle(&mut rng);
                open.sort_by_key(|&l| std::cmp::Reverse(free[l].len()));
                let pick: Vec<usize> = open[..3].to_vec();
                let mut vars = [VarRef::new(0, 0); 3];
                for (s, &l) in pick.iter().enumerate() {
                    let k = rng.gen_range(0..free[l].len());
                    vars[s] = VarRef::new(l, free[l].remove(k));
                }
                eqs.push(ThreeEq::new(vars, [false; 3], rng.gen_range(0..2)));
            }
            eqs
        }
    };
    HybridInstance::new(circles, eqs)
}
