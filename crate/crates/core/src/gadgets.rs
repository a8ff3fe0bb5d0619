//! Gadget graphs as checked-in data plus exhaustive verifiers.
//!
//! Parity graphs have two admissible complete passes: the 1-traversal enters
//! at `one_in` and leaves at `one_out`, the 0-traversal uses `zero_in` and
//! `zero_out`. Three-equation gadgets consist of a core (`s_in`, check
//! vertices, `s_out`) and three parity-graph slots `A`, `B`, `C`.

use crate::oracle::{self, OracleError, SolveBudget};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;
use thiserror::Error;

const PARITY_ATSP12: &str = include_str!("../gadgets/parity_atsp12.json");
const PARITY_ATSP14: &str = include_str!("../gadgets/parity_atsp14.json");
const PARITY_TSP12: &str = include_str!("../gadgets/parity_tsp12.json");
const PARITY_TSP14: &str = include_str!("../gadgets/parity_tsp14.json");
const THREE_EQ_DIRECTED: &str = include_str!("../gadgets/three_eq_directed.json");
const THREE_EQ_UNDIRECTED: &str = include_str!("../gadgets/three_eq_undirected.json");

/// Largest contracted three-equation gadget the verifier will enumerate.
pub const CONTRACTED_LIMIT: usize = 18;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GadgetError {
    #[error("gadget data is malformed: {0}")]
    Malformed(String),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Atsp12,
    Atsp14,
    Tsp12,
    Tsp14,
}

impl Regime {
    pub const ALL: [Regime; 4] = [Regime::Atsp12, Regime::Atsp14, Regime::Tsp12, Regime::Tsp14];

    pub fn name(&self) -> &'static str {
        match self {
            Regime::Atsp12 => "atsp12",
            Regime::Atsp14 => "atsp14",
            Regime::Tsp12 => "tsp12",
            Regime::Tsp14 => "tsp14",
        }
    }

    pub fn directed(&self) -> bool {
        matches!(self, Regime::Atsp12 | Regime::Atsp14)
    }

    /// Metric bound B: 2 for (1,2) targets, 4 for (1,4) targets.
    pub fn bound(&self) -> u8 {
        match self {
            Regime::Atsp12 | Regime::Tsp12 => 2,
            Regime::Atsp14 | Regime::Tsp14 => 4,
        }
    }

    /// Weight of every connection outside a parity graph.
    pub fn external_weight(&self) -> u8 {
        self.bound() / 2
    }

    /// Extra length of one unsatisfied equation.
    pub fn slack(&self) -> u8 {
        self.bound() / 2
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Regime {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Regime::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| format!("unknown regime {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Port {
    OneIn,
    OneOut,
    ZeroIn,
    ZeroOut,
}

impl Port {
    pub const ALL: [Port; 4] = [Port::OneIn, Port::OneOut, Port::ZeroIn, Port::ZeroOut];

    pub fn name(&self) -> &'static str {
        match self {
            Port::OneIn => "one_in",
            Port::OneOut => "one_out",
            Port::ZeroIn => "zero_in",
            Port::ZeroOut => "zero_out",
        }
    }

    fn parse(s: &str) -> Option<Port> {
        Port::ALL.into_iter().find(|p| p.name() == s)
    }
}

/// The two admissible passes through a parity graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Traversal {
    Zero,
    One,
}

impl Traversal {
    pub fn from_bit(b: bool) -> Self {
        if b {
            Traversal::One
        } else {
            Traversal::Zero
        }
    }

    pub fn bit(&self) -> bool {
        *self == Traversal::One
    }

    pub fn entry(&self) -> Port {
        match self {
            Traversal::One => Port::OneIn,
            Traversal::Zero => Port::ZeroIn,
        }
    }

    pub fn exit(&self) -> Port {
        match self {
            Traversal::One => Port::OneOut,
            Traversal::Zero => Port::ZeroOut,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GadgetArc(pub String, pub String, pub u8);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GadgetGraph {
    pub name: String,
    pub directed: bool,
    #[serde(default = "default_bound")]
    pub bound: u8,
    pub vertices: Vec<String>,
    pub arcs: Vec<GadgetArc>,
    pub ports: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub slots: Vec<String>,
    /// Connections to the surrounding circle, per slot. Endpoints outside the
    /// gadget are written `X/one.tail`, `X/one.head`, `X/zero.tail`,
    /// `X/zero.head` for slot `X`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub attachments: Vec<GadgetArc>,
}

fn default_bound() -> u8 {
    2
}

impl GadgetGraph {
    pub fn index(&self, name: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v == name)
    }

    fn indexed_arcs(&self) -> Result<Vec<(usize, usize, u8)>, GadgetError> {
        self.arcs
            .iter()
            .map(|GadgetArc(u, v, w)| {
                match (self.index(u), self.index(v)) {
                    (Some(a), Some(b)) => Ok((a, b, *w)),
                    _ => Err(GadgetError::Malformed(format!("arc {u} -> {v} leaves the gadget"))),
                }
            })
            .collect()
    }

    pub fn has_arc(&self, u: &str, v: &str) -> bool {
        self.arcs
            .iter()
            .any(|GadgetArc(a, b, _)| (a == u && b == v) || (!self.directed && a == v && b == u))
    }
}

#[derive(Deserialize)]
struct ThreeEqFile {
    name: String,
    directed: bool,
    vertices: Vec<String>,
    arcs: Vec<GadgetArc>,
    ports: BTreeMap<String, String>,
    slots: Vec<String>,
    contact: ContactFile,
}

#[derive(Deserialize)]
struct ContactFile {
    plain: Vec<GadgetArc>,
    negated: Vec<GadgetArc>,
}

fn parity_source(regime: Regime) -> &'static str {
    match regime {
        Regime::Atsp12 => PARITY_ATSP12,
        Regime::Atsp14 => PARITY_ATSP14,
        Regime::Tsp12 => PARITY_TSP12,
        Regime::Tsp14 => PARITY_TSP14,
    }
}

fn three_eq_source(directed: bool) -> ThreeEqFile {
    let src = if directed { THREE_EQ_DIRECTED } else { THREE_EQ_UNDIRECTED };
    serde_json::from_str(src).expect("embedded gadget data parses")
}

pub fn make_parity_gadget(regime: Regime) -> GadgetGraph {
    let mut g: GadgetGraph = serde_json::from_str(parity_source(regime)).expect("embedded gadget data parses");
    g.bound = regime.bound();
    g
}

/// Core, three embedded parity graphs (vertices prefixed `A.`, `B.`, `C.`)
/// and the circle attachments of each slot. With `negated`, slot `A` uses
/// the negated attachment.
pub fn make_three_eq_gadget(regime: Regime, negated: bool) -> GadgetGraph {
    let file = three_eq_source(regime.directed());
    let parity = make_parity_gadget(regime);
    let ext = regime.external_weight();
    let resolve = |sym: &str| -> String {
        match sym.split_once('.') {
            Some((slot, port)) if file.slots.iter().any(|s| s == slot) => {
                format!("{slot}.{}", parity.ports[port])
            }
            _ => sym.to_string(),
        }
    };
    let mut vertices = file.vertices.clone();
    let mut arcs: Vec<GadgetArc> = file
        .arcs
        .iter()
        .map(|GadgetArc(u, v, _)| GadgetArc(resolve(u), resolve(v), ext))
        .collect();
    let mut ports = file.ports.clone();
    let mut attachments = Vec::new();
    for (k, slot) in file.slots.iter().enumerate() {
        for v in &parity.vertices {
            vertices.push(format!("{slot}.{v}"));
        }
        for GadgetArc(u, v, w) in &parity.arcs {
            arcs.push(GadgetArc(format!("{slot}.{u}"), format!("{slot}.{v}"), *w));
        }
        for (p, v) in &parity.ports {
            ports.insert(format!("{slot}.{p}"), format!("{slot}.{v}"));
        }
        let wiring = if negated && k == 0 {
            &file.contact.negated
        } else {
            &file.contact.plain
        };
        for GadgetArc(u, v, _) in wiring {
            let fix = |s: &str| match s.strip_prefix("Q.") {
                Some(port) => format!("{slot}.{}", parity.ports[port]),
                None => format!("{slot}/{s}"),
            };
            attachments.push(GadgetArc(fix(u), fix(v), ext));
        }
    }
    GadgetGraph {
        name: format!("{}-{}{}", file.name, regime.name(), if negated { "-negated" } else { "" }),
        directed: file.directed,
        bound: regime.bound(),
        vertices,
        arcs,
        ports,
        slots: file.slots.clone(),
        attachments,
    }
}

pub fn enumerate_hamiltonian_paths(
    g: &GadgetGraph,
    s: &str,
    t: &str,
    budget: SolveBudget,
) -> Result<Vec<Vec<String>>, GadgetError> {
    let arcs: Vec<(usize, usize)> = g.indexed_arcs()?.into_iter().map(|(u, v, _)| (u, v)).collect();
    let (si, ti) = match (g.index(s), g.index(t)) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(GadgetError::Malformed(format!("unknown endpoint {s} or {t}"))),
    };
    let paths = oracle::hamiltonian_paths(g.vertices.len(), &arcs, g.directed, si, ti, budget)?;
    Ok(paths
        .into_iter()
        .map(|p| p.into_iter().map(|v| g.vertices[v].clone()).collect())
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraversalRecord {
    pub kind: Traversal,
    pub path: Vec<String>,
    pub length: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SubsetRecord {
    /// Slots whose parity graph the inner loop already consumed.
    pub consumed: Vec<String>,
    /// Number of break-free Hamiltonian `s_in → s_out` paths.
    pub hamiltonian_paths: usize,
    /// Local length of the best pass, breaks included.
    pub local_length: u32,
    pub route: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub gadget: String,
    pub passed: bool,
    pub traversals: Vec<TraversalRecord>,
    /// Cheapest complete pass that is not one of the two traversals.
    pub min_nonconforming: Option<u32>,
    pub subsets: Vec<SubsetRecord>,
    /// (satisfied, unsatisfied) local lengths of a three-equation gadget.
    pub constants: Option<(u32, u32)>,
    pub failures: Vec<String>,
}

impl VerificationReport {
    fn new(g: &GadgetGraph) -> Self {
        VerificationReport {
            gadget: g.name.clone(),
            passed: false,
            traversals: Vec::new(),
            min_nonconforming: None,
            subsets: Vec::new(),
            constants: None,
            failures: Vec::new(),
        }
    }
}

fn path_weight(g: &GadgetGraph, path: &[String]) -> u32 {
    path.windows(2)
        .map(|w| {
            g.arcs
                .iter()
                .filter(|GadgetArc(a, b, _)| {
                    (a == &w[0] && b == &w[1]) || (!g.directed && a == &w[1] && b == &w[0])
                })
                .map(|GadgetArc(_, _, x)| *x as u32)
                .min()
                .unwrap_or(g.bound as u32)
        })
        .sum()
}

/// Cheapest order visiting every vertex from `s` to `t`, where a missing
/// connection costs the break weight `bound`.
fn cheapest_cover(n: usize, cost: &[Vec<u32>], s: usize, t: usize) -> u32 {
    let mids: Vec<usize> = (0..n).filter(|&v| v != s && v != t).collect();
    let k = mids.len();
    let full = (1usize << k) - 1;
    let mut dp = vec![vec![u32::MAX; k]; full + 1];
    if k == 0 {
        return cost[s][t];
    }
    for (i, &v) in mids.iter().enumerate() {
        dp[1 << i][i] = cost[s][v];
    }
    for mask in 1..=full {
        for i in 0..k {
            let here = dp[mask][i];
            if here == u32::MAX || mask >> i & 1 == 0 {
                continue;
            }
            for j in 0..k {
                if mask >> j & 1 == 0 {
                    let m2 = mask | 1 << j;
                    let val = here + cost[mids[i]][mids[j]];
                    if val < dp[m2][j] {
                        dp[m2][j] = val;
                    }
                }
            }
        }
    }
    (0..k).map(|i| dp[full][i] + cost[mids[i]][t]).min().unwrap()
}

pub fn verify_parity_gadget(g: &GadgetGraph) -> Result<VerificationReport, GadgetError> {
    let budget = SolveBudget::enumeration();
    if g.vertices.len() > budget.max_vertices {
        return Err(OracleError::Budget {
            size: g.vertices.len(),
            limit: budget.max_vertices,
        }
        .into());
    }
    let mut rep = VerificationReport::new(g);
    let arcs = g.indexed_arcs()?;
    if let Some((u, v, w)) = arcs.iter().find(|a| a.2 != 1) {
        rep.failures.push(format!(
            "internal arc {} -> {} has weight {w}, expected 1",
            g.vertices[*u], g.vertices[*v]
        ));
    }
    let port_names: Vec<String> = Port::ALL
        .iter()
        .map(|p| g.ports.get(p.name()).cloned())
        .collect::<Option<_>>()
        .ok_or_else(|| GadgetError::Malformed("missing traversal port".into()))?;
    let traversal_pair = |s: &str, t: &str| -> Option<Traversal> {
        let hit = |a: &str, b: &str| (s == a && t == b) || (!g.directed && s == b && t == a);
        if hit(&port_names[0], &port_names[1]) {
            Some(Traversal::One)
        } else if hit(&port_names[2], &port_names[3]) {
            Some(Traversal::Zero)
        } else {
            None
        }
    };
    for kind in [Traversal::One, Traversal::Zero] {
        let s = &g.ports[kind.entry().name()];
        let t = &g.ports[kind.exit().name()];
        let paths = enumerate_hamiltonian_paths(g, s, t, budget)?;
        match paths.len() {
            0 => rep.failures.push(format!("missing {kind:?}-traversal {s} -> {t}")),
            1 => {
                let length = path_weight(g, &paths[0]);
                rep.traversals.push(TraversalRecord {
                    kind,
                    path: paths[0].clone(),
                    length,
                });
            }
            k => rep.failures.push(format!("{k} distinct {kind:?}-traversals {s} -> {t}")),
        }
    }
    let mut distinct: Vec<&String> = port_names.iter().collect();
    distinct.sort();
    distinct.dedup();
    for s in &distinct {
        for t in &distinct {
            if s == t || traversal_pair(s, t).is_some() {
                continue;
            }
            let paths = enumerate_hamiltonian_paths(g, s, t, budget)?;
            if let Some(p) = paths.first() {
                rep.failures.push(format!("stray pass between ports: {}", p.join(" ")));
            }
        }
    }
    let n = g.vertices.len();
    let mut cost = vec![vec![g.bound as u32; n]; n];
    for &(u, v, w) in &arcs {
        cost[u][v] = cost[u][v].min(w as u32);
        if !g.directed {
            cost[v][u] = cost[v][u].min(w as u32);
        }
    }
    let mut worst = None::<u32>;
    for s in 0..n {
        for t in 0..n {
            if s == t || traversal_pair(&g.vertices[s], &g.vertices[t]).is_some() {
                continue;
            }
            let c = cheapest_cover(n, &cost, s, t);
            worst = Some(worst.map_or(c, |w| w.min(c)));
        }
    }
    rep.min_nonconforming = worst;
    if rep.traversals.len() == 2 {
        let base = rep.traversals.iter().map(|t| t.length).max().unwrap();
        if rep.traversals[0].length != rep.traversals[1].length {
            rep.failures.push("traversals have different lengths".into());
        }
        if let Some(w) = worst {
            if w < base {
                rep.failures.push(format!("non-conforming pass of length {w} beats traversal length {base}"));
            }
        }
    }
    rep.passed = rep.failures.is_empty();
    Ok(rep)
}

/// One item of a pass through a three-equation core.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RouteItem {
    Core(usize),
    /// Slot entered at `entry` and left at `exit`.
    Slot { slot: usize, entry: Port, exit: Port },
}

/// Best pass for one set of slots left to the outer loop. `linked[k]` tells
/// whether items `k` and `k+1` are joined by a gadget connection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Route {
    pub items: Vec<RouteItem>,
    pub linked: Vec<bool>,
}

impl Route {
    pub fn breaks(&self) -> usize {
        self.linked.iter().filter(|l| !**l).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Endpoint {
    Core(usize),
    Slot(usize, Port),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Term {
    OneTail,
    OneHead,
    ZeroTail,
    ZeroHead,
    Q(Port),
}

/// Parsed three-equation core used by the reductions.
#[derive(Debug, Clone)]
pub struct ThreeEqCore {
    pub directed: bool,
    pub vertices: Vec<String>,
    pub s_in: usize,
    pub s_out: usize,
    pub links: Vec<(Endpoint, Endpoint)>,
    pub plain: Vec<(Term, Term)>,
    pub negated: Vec<(Term, Term)>,
    /// Indexed by the bitmask of slots left to the outer loop.
    pub routes: Vec<Route>,
}

impl ThreeEqCore {
    pub fn get(directed: bool) -> &'static ThreeEqCore {
        static D: OnceLock<ThreeEqCore> = OnceLock::new();
        static U: OnceLock<ThreeEqCore> = OnceLock::new();
        let cell = if directed { &D } else { &U };
        cell.get_or_init(|| ThreeEqCore::parse(three_eq_source(directed)).expect("embedded gadget data is valid"))
    }

    fn parse(f: ThreeEqFile) -> Result<ThreeEqCore, GadgetError> {
        let core_index = |s: &str| f.vertices.iter().position(|v| v == s);
        let endpoint = |s: &str| -> Result<Endpoint, GadgetError> {
            if let Some(i) = core_index(s) {
                return Ok(Endpoint::Core(i));
            }
            let bad = || GadgetError::Malformed(format!("unknown endpoint {s}"));
            let (slot, port) = s.split_once('.').ok_or_else(bad)?;
            let k = f.slots.iter().position(|x| x == slot).ok_or_else(bad)?;
            Ok(Endpoint::Slot(k, Port::parse(port).ok_or_else(bad)?))
        };
        let term = |s: &str| -> Result<Term, GadgetError> {
            Ok(match s {
                "one.tail" => Term::OneTail,
                "one.head" => Term::OneHead,
                "zero.tail" => Term::ZeroTail,
                "zero.head" => Term::ZeroHead,
                _ => Term::Q(
                    s.strip_prefix("Q.")
                        .and_then(Port::parse)
                        .ok_or_else(|| GadgetError::Malformed(format!("unknown term {s}")))?,
                ),
            })
        };
        let links = f
            .arcs
            .iter()
            .map(|GadgetArc(u, v, _)| Ok((endpoint(u)?, endpoint(v)?)))
            .collect::<Result<Vec<_>, GadgetError>>()?;
        let wiring = |arcs: &[GadgetArc]| {
            arcs.iter()
                .map(|GadgetArc(u, v, _)| Ok((term(u)?, term(v)?)))
                .collect::<Result<Vec<_>, GadgetError>>()
        };
        let s_in = core_index(&f.ports["s_in"]).ok_or_else(|| GadgetError::Malformed("s_in".into()))?;
        let s_out = core_index(&f.ports["s_out"]).ok_or_else(|| GadgetError::Malformed("s_out".into()))?;
        let mut core = ThreeEqCore {
            directed: f.directed,
            vertices: f.vertices.clone(),
            s_in,
            s_out,
            links,
            plain: wiring(&f.contact.plain)?,
            negated: wiring(&f.contact.negated)?,
            routes: Vec::new(),
        };
        core.routes = (0..8).map(|r| core.best_route(r)).collect();
        Ok(core)
    }

    pub fn linked(&self, a: Endpoint, b: Endpoint) -> bool {
        self.links
            .iter()
            .any(|&(u, v)| (u == a && v == b) || (!self.directed && u == b && v == a))
    }

    fn slot_passes(&self) -> Vec<(Port, Port)> {
        let mut out = vec![(Port::OneIn, Port::OneOut), (Port::ZeroIn, Port::ZeroOut)];
        if !self.directed {
            out.push((Port::OneOut, Port::OneIn));
            out.push((Port::ZeroOut, Port::ZeroIn));
        }
        out
    }

    fn exit_of(item: RouteItem) -> Endpoint {
        match item {
            RouteItem::Core(c) => Endpoint::Core(c),
            RouteItem::Slot { slot, exit, .. } => Endpoint::Slot(slot, exit),
        }
    }

    fn entry_of(item: RouteItem) -> Endpoint {
        match item {
            RouteItem::Core(c) => Endpoint::Core(c),
            RouteItem::Slot { slot, entry, .. } => Endpoint::Slot(slot, entry),
        }
    }

    /// Fewest breaks over every order of the middle core vertices and the
    /// outer-loop slots, smallest item sequence on ties.
    fn best_route(&self, outer: usize) -> Route {
        let mids: Vec<usize> = (0..self.vertices.len()).filter(|&v| v != self.s_in && v != self.s_out).collect();
        let slots: Vec<usize> = (0..3).filter(|s| outer >> s & 1 == 1).collect();
        let passes = self.slot_passes();
        let mut best: Option<(usize, Vec<RouteItem>)> = None;
        let count = mids.len() + slots.len();
        let mut order: Vec<usize> = (0..count).collect();
        loop {
            let combos = passes.len().pow(slots.len() as u32);
            for combo in 0..combos {
                let mut items = vec![RouteItem::Core(self.s_in)];
                let mut c = combo;
                let mut choice = vec![0; slots.len()];
                for ch in choice.iter_mut() {
                    *ch = c % passes.len();
                    c /= passes.len();
                }
                for &k in &order {
                    if k < mids.len() {
                        items.push(RouteItem::Core(mids[k]));
                    } else {
                        let s = k - mids.len();
                        let (entry, exit) = passes[choice[s]];
                        items.push(RouteItem::Slot {
                            slot: slots[s],
                            entry,
                            exit,
                        });
                    }
                }
                items.push(RouteItem::Core(self.s_out));
                let breaks = items
                    .windows(2)
                    .filter(|w| !self.linked(Self::exit_of(w[0]), Self::entry_of(w[1])))
                    .count();
                let better = match &best {
                    None => true,
                    Some((b, it)) => breaks < *b || (breaks == *b && items < *it),
                };
                if better {
                    best = Some((breaks, items));
                }
            }
            if !next_perm(&mut order) {
                break;
            }
        }
        let items = best.expect("at least one order").1;
        let linked = items
            .windows(2)
            .map(|w| self.linked(Self::exit_of(w[0]), Self::entry_of(w[1])))
            .collect();
        Route { items, linked }
    }
}

fn next_perm(p: &mut [usize]) -> bool {
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

/// Contracts each parity slot to its entry and exit port, then checks for
/// all eight sets of slots consumed by the inner loop that a break-free
/// `s_in → s_out` pass exists exactly when an even number of slots is left
/// to the outer loop, and that the best pass otherwise needs one break.
pub fn verify_three_eq_gadget(g: &GadgetGraph, directed: bool) -> Result<VerificationReport, GadgetError> {
    let mut rep = VerificationReport::new(g);
    if g.directed != directed {
        rep.failures.push(format!("gadget directedness is {}, expected {directed}", g.directed));
    }
    if g.slots.len() != 3 {
        return Err(GadgetError::Malformed("three-equation gadget needs three slots".into()));
    }
    let core: Vec<String> = g.vertices.iter().filter(|v| !v.contains('.')).cloned().collect();
    let s_in = g.ports.get("s_in").cloned().ok_or_else(|| GadgetError::Malformed("s_in".into()))?;
    let s_out = g.ports.get("s_out").cloned().ok_or_else(|| GadgetError::Malformed("s_out".into()))?;
    let ext = g
        .arcs
        .iter()
        .find(|GadgetArc(u, v, _)| !u.contains('.') && !v.contains('.'))
        .map(|a| a.2 as u32)
        .ok_or_else(|| GadgetError::Malformed("core has no arcs".into()))?;
    let brk = g.bound as u32;
    let budget = SolveBudget::enumeration();

    // Each slot on its own: one traversal per kind and its internal length.
    let mut internal = 0;
    for slot in &g.slots {
        let prefix = format!("{slot}.");
        let sub = GadgetGraph {
            name: format!("{}:{slot}", g.name),
            directed: g.directed,
            bound: g.bound,
            vertices: g.vertices.iter().filter(|v| v.starts_with(&prefix)).cloned().collect(),
            arcs: g
                .arcs
                .iter()
                .filter(|GadgetArc(u, v, _)| u.starts_with(&prefix) && v.starts_with(&prefix))
                .cloned()
                .collect(),
            ports: Port::ALL
                .iter()
                .filter_map(|p| g.ports.get(&format!("{slot}.{}", p.name())).map(|v| (p.name().to_string(), v.clone())))
                .collect(),
            slots: Vec::new(),
            attachments: Vec::new(),
        };
        let r = verify_parity_gadget(&sub)?;
        for f in r.failures {
            rep.failures.push(format!("slot {slot}: {f}"));
        }
        if let Some(t) = r.traversals.first() {
            internal = t.length;
        }
    }

    for consumed in 0u8..8 {
        let outer: Vec<usize> = (0..3).filter(|s| consumed >> s & 1 == 0).collect();
        // Contracted graph: core vertices plus entry/exit ports per outer slot.
        let mut names: Vec<String> = core.clone();
        let mut slot_nodes = Vec::new();
        for &s in &outer {
            let mut ps: Vec<String> = Port::ALL
                .iter()
                .map(|p| g.ports[&format!("{}.{}", g.slots[s], p.name())].clone())
                .collect();
            ps.sort();
            ps.dedup();
            names.extend(ps);
            slot_nodes.push(s);
        }
        if names.len() > CONTRACTED_LIMIT {
            return Err(OracleError::Budget {
                size: names.len(),
                limit: CONTRACTED_LIMIT,
            }
            .into());
        }
        let idx = |n: &str| names.iter().position(|x| x == n);
        let mut external = Vec::new();
        for GadgetArc(u, v, _) in &g.arcs {
            let same_slot = u.split_once('.').map(|x| x.0) == v.split_once('.').map(|x| x.0) && u.contains('.');
            if same_slot {
                continue;
            }
            if let (Some(a), Some(b)) = (idx(u), idx(v)) {
                external.push((a, b));
            }
        }
        // Enumerate passes for every traversal choice of the outer slots.
        let mut ham = 0usize;
        let choices = 1usize << outer.len();
        for choice in 0..choices {
            let mut arcs = external.clone();
            let mut forced = Vec::new();
            for (k, s) in slot_nodes.iter().enumerate() {
                let kind = if choice >> k & 1 == 1 { Traversal::Zero } else { Traversal::One };
                let e = idx(&g.ports[&format!("{}.{}", g.slots[*s], kind.entry().name())]).unwrap();
                let x = idx(&g.ports[&format!("{}.{}", g.slots[*s], kind.exit().name())]).unwrap();
                arcs.push((e, x));
                forced.push((e, x));
            }
            // Ports off the chosen traversal lie inside it and are dropped.
            let keep: Vec<bool> = (0..names.len())
                .map(|v| {
                    v < core.len()
                        || forced.iter().any(|&(e, x)| e == v || x == v)
                })
                .collect();
            let remap: Vec<Option<usize>> = {
                let mut next = 0;
                keep.iter()
                    .map(|&k| {
                        if k {
                            next += 1;
                            Some(next - 1)
                        } else {
                            None
                        }
                    })
                    .collect()
            };
            let size = keep.iter().filter(|k| **k).count();
            let arcs_c: Vec<(usize, usize)> = arcs
                .iter()
                .filter_map(|&(a, b)| Some((remap[a]?, remap[b]?)))
                .collect();
            let forced_c: Vec<(usize, usize)> =
                forced.iter().map(|&(a, b)| (remap[a].unwrap(), remap[b].unwrap())).collect();
            let paths = oracle::hamiltonian_paths(
                size,
                &arcs_c,
                directed,
                remap[idx(&s_in).unwrap()].unwrap(),
                remap[idx(&s_out).unwrap()].unwrap(),
                budget,
            )?;
            ham += paths
                .iter()
                .filter(|p| {
                    forced_c.iter().all(|&(e, x)| {
                        p.windows(2)
                            .any(|w| (w[0] == e && w[1] == x) || (!directed && w[0] == x && w[1] == e))
                    })
                })
                .count();
        }
        // Cheapest pass with breaks, using the same data as the reductions.
        let (route, breaks) = route_for(g, &core, &outer);
        let links = (route.len() - 1) as u32;
        let slot_cost = outer.len() as u32 * internal;
        let consumed_cost = (3 - outer.len()) as u32 * (internal + ext);
        let local = (links - breaks) * ext + breaks * brk + slot_cost + consumed_cost;
        let even = outer.len() % 2 == 0;
        if even != (ham > 0) {
            rep.failures.push(format!(
                "{} outer slots but {ham} break-free passes",
                outer.len()
            ));
        }
        if even != (breaks == 0) {
            rep.failures.push(format!("{} outer slots but best pass has {breaks} breaks", outer.len()));
        }
        if !even && breaks != 1 {
            rep.failures.push(format!("odd case needs {breaks} breaks, expected 1"));
        }
        rep.subsets.push(SubsetRecord {
            consumed: (0..3).filter(|s| consumed >> s & 1 == 1).map(|s| g.slots[s].clone()).collect(),
            hamiltonian_paths: ham,
            local_length: local,
            route,
        });
    }
    let sat: Vec<u32> = rep
        .subsets
        .iter()
        .filter(|s| s.consumed.len() % 2 == 1)
        .map(|s| s.local_length)
        .collect();
    let unsat: Vec<u32> = rep
        .subsets
        .iter()
        .filter(|s| s.consumed.len() % 2 == 0)
        .map(|s| s.local_length)
        .collect();
    if sat.iter().any(|&x| x != sat[0]) || unsat.iter().any(|&x| x != unsat[0]) {
        rep.failures.push("local length differs between subsets of equal parity".into());
    }
    rep.constants = Some((sat[0], unsat[0]));
    check_attachments(g, &mut rep);
    rep.passed = rep.failures.is_empty();
    Ok(rep)
}

// Best route for the contracted gadget `g`, as vertex names with slot
// passes written `X[entry>exit]`, and its number of breaks.
fn route_for(g: &GadgetGraph, core: &[String], outer: &[usize]) -> (Vec<String>, u32) {
    let connected = |a: &str, b: &str| g.has_arc(a, b);
    let s_in = &g.ports["s_in"];
    let s_out = &g.ports["s_out"];
    let mids: Vec<&String> = core.iter().filter(|v| *v != s_in && *v != s_out).collect();
    let mut passes = vec![(Port::OneIn, Port::OneOut), (Port::ZeroIn, Port::ZeroOut)];
    if !g.directed {
        passes.push((Port::OneOut, Port::OneIn));
        passes.push((Port::ZeroOut, Port::ZeroIn));
    }
    let count = mids.len() + outer.len();
    let mut order: Vec<usize> = (0..count).collect();
    let mut best: Option<(u32, Vec<String>)> = None;
    loop {
        for combo in 0..passes.len().pow(outer.len() as u32) {
            let mut c = combo;
            let mut seq: Vec<(String, String, String)> = vec![(s_in.clone(), s_in.clone(), s_in.clone())];
            for &k in &order {
                if k < mids.len() {
                    seq.push((mids[k].clone(), mids[k].clone(), mids[k].clone()));
                } else {
                    let slot = &g.slots[outer[k - mids.len()]];
                    let (e, x) = passes[c % passes.len()];
                    c /= passes.len();
                    let en = g.ports[&format!("{slot}.{}", e.name())].clone();
                    let ex = g.ports[&format!("{slot}.{}", x.name())].clone();
                    seq.push((format!("{slot}[{}>{}]", e.name(), x.name()), en, ex));
                }
            }
            seq.push((s_out.clone(), s_out.clone(), s_out.clone()));
            let breaks = seq.windows(2).filter(|w| !connected(&w[0].2, &w[1].1)).count() as u32;
            let labels: Vec<String> = seq.into_iter().map(|x| x.0).collect();
            if best.as_ref().map_or(true, |(b, l)| breaks < *b || (breaks == *b && labels < *l)) {
                best = Some((breaks, labels));
            }
        }
        if !next_perm(&mut order) {
            break;
        }
    }
    let (b, l) = best.unwrap();
    (l, b)
}

// The slot wiring must thread the slot's parity graph through exactly one
// of the two circle links, with the traversal matching that link.
fn check_attachments(g: &GadgetGraph, rep: &mut VerificationReport) {
    for slot in &g.slots {
        let arcs: Vec<&GadgetArc> = g
            .attachments
            .iter()
            .filter(|GadgetArc(u, v, _)| u.starts_with(&format!("{slot}")) || v.starts_with(&format!("{slot}")))
            .filter(|GadgetArc(u, v, _)| {
                let own = |s: &str| s.starts_with(&format!("{slot}.")) || s.starts_with(&format!("{slot}/"));
                own(u) && own(v)
            })
            .collect();
        if arcs.len() != 3 {
            rep.failures.push(format!("slot {slot}: {} attachment arcs, expected 3", arcs.len()));
            continue;
        }
        let port = |p: Port| g.ports.get(&format!("{slot}.{}", p.name())).cloned().unwrap_or_default();
        let ext = |s: &str| format!("{slot}/{s}");
        let mut threaded = 0;
        for (link, kind) in [("one", Traversal::One), ("zero", Traversal::Zero)] {
            let tail = ext(&format!("{link}.tail"));
            let head = ext(&format!("{link}.head"));
            let direct = arcs.iter().any(|GadgetArc(u, v, _)| *u == tail && *v == head);
            let through = arcs.iter().any(|GadgetArc(u, v, _)| *u == tail && *v == port(kind.entry()))
                && arcs.iter().any(|GadgetArc(u, v, _)| *u == port(kind.exit()) && *v == head);
            match (direct, through) {
                (true, false) => {}
                (false, true) => threaded += 1,
                _ => rep.failures.push(format!("slot {slot}: {link} link is neither direct nor threaded")),
            }
        }
        if threaded != 1 {
            rep.failures.push(format!("slot {slot}: parity graph threaded through {threaded} links"));
        }
    }
}
