//! Compiling Hybrid instances into (1,2)/(1,4) ATSP and TSP instances.
//!
//! Every target shares one wiring skeleton. Each variable, matching pair and
//! used contact gets a parity graph; each circle a border unit; each
//! three-variable equation a core between `start:c` and `start:c+1`. The
//! directed targets use the parity graph as is, the undirected ones a
//! version whose ports are split apart.

pub mod atsp;
mod consistency;
mod ledger;
mod tour;
pub mod tsp;

pub use crate::gadgets::Regime;
pub use consistency::{
    assignment_from_tour, improve_assignment, is_consistent, make_consistent, traversal_modes, Extraction,
};
pub use ledger::{audit_ledger, LedgerEntry, LengthLedger};
pub use tour::tour_from_assignment;

use crate::bounds::GadgetCostProfile;
use crate::gadgets::{
    enumerate_hamiltonian_paths, make_parity_gadget, Endpoint, Port, Term, ThreeEqCore, Traversal,
};
use crate::hybrid::{Assignment, HybridError, HybridInstance, VarRef};
use crate::metric::{metric_closure, BoundedMetric, MetricError, Tour, WeightedGraph};
use crate::oracle::SolveBudget;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReduceError {
    #[error(transparent)]
    Hybrid(#[from] HybridError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error("instance has no circles")]
    Empty,
    #[error("assignment does not fit the instance")]
    AssignmentShape,
    #[error("instance data does not match a rebuild: {0}")]
    Mismatch(String),
    #[error("unknown vertex tag {0:?}")]
    Tag(String),
}

/// A parity graph of the skeleton.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pg {
    Var { circle: usize, position: usize },
    Match { circle: usize, i: usize, j: usize },
    Contact { circle: usize, position: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VertexTag {
    /// Vertex `vertex` of the parity graph of variable `(circle, position)`.
    Var { circle: usize, position: usize, vertex: String },
    Match { circle: usize, i: usize, j: usize, vertex: String },
    Contact { circle: usize, position: usize, vertex: String },
    /// Border unit `b_l`; `part` is 0 for the single directed vertex and
    /// 1..=3 along the undirected path.
    Border { circle: usize, part: u8 },
    /// `s_c`; `start:0` doubles as the border after the last circle.
    Start(usize),
    Check { eq: usize, name: String },
}

impl fmt::Display for VertexTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VertexTag::Var { circle, position, vertex } => write!(f, "var:{circle}:{position}:{vertex}"),
            VertexTag::Match { circle, i, j, vertex } => write!(f, "match:{circle}:{i}:{j}:{vertex}"),
            VertexTag::Contact { circle, position, vertex } => write!(f, "contact:{circle}:{position}:{vertex}"),
            VertexTag::Border { circle, part: 0 } => write!(f, "border:{circle}"),
            VertexTag::Border { circle, part } => write!(f, "border:{circle}:{part}"),
            VertexTag::Start(c) => write!(f, "start:{c}"),
            VertexTag::Check { eq, name } => write!(f, "check:{eq}:{name}"),
        }
    }
}

impl FromStr for VertexTag {
    type Err = ReduceError;
    fn from_str(s: &str) -> Result<Self, ReduceError> {
        let bad = || ReduceError::Tag(s.to_string());
        let parts: Vec<&str> = s.split(':').collect();
        let num = |k: usize| parts.get(k).and_then(|x| x.parse::<usize>().ok()).ok_or_else(bad);
        let text = |k: usize| parts.get(k).map(|x| x.to_string()).ok_or_else(bad);
        let tag = match (parts[0], parts.len()) {
            ("var", 4) => VertexTag::Var {
                circle: num(1)?,
                position: num(2)?,
                vertex: text(3)?,
            },
            ("match", 5) => VertexTag::Match {
                circle: num(1)?,
                i: num(2)?,
                j: num(3)?,
                vertex: text(4)?,
            },
            ("contact", 4) => VertexTag::Contact {
                circle: num(1)?,
                position: num(2)?,
                vertex: text(3)?,
            },
            ("border", 2) => VertexTag::Border { circle: num(1)?, part: 0 },
            ("border", 3) => VertexTag::Border {
                circle: num(1)?,
                part: num(2)? as u8,
            },
            ("start", 2) => VertexTag::Start(num(1)?),
            ("check", 3) => VertexTag::Check { eq: num(1)?, name: text(2)? },
            _ => return Err(bad()),
        };
        Ok(tag)
    }
}

/// Accounting unit of the length ledger.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Block {
    /// Internal arcs of a variable's parity graph.
    VarParity { circle: usize, position: usize },
    /// Circle edge `(p, p+1)` with nothing threaded into it.
    Plain { circle: usize, position: usize },
    /// Circle edge after a contact that feeds a three-variable equation.
    Contact { circle: usize, position: usize },
    /// Both circle edges of a matching pair plus its parity graph.
    Matching { circle: usize, i: usize, j: usize },
    /// Border unit and the closing edge `(L, 1)`.
    Border { circle: usize },
    ThreeEq { eq: usize },
    /// Arc from the last start vertex back to the first border.
    Splice,
}

impl fmt::Display for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Block::VarParity { circle, position } => write!(f, "var-parity:{circle}:{position}"),
            Block::Plain { circle, position } => write!(f, "plain:{circle}:{position}"),
            Block::Contact { circle, position } => write!(f, "contact:{circle}:{position}"),
            Block::Matching { circle, i, j } => write!(f, "matching:{circle}:{i}:{j}"),
            Block::Border { circle } => write!(f, "border:{circle}"),
            Block::ThreeEq { eq } => write!(f, "three-eq:{eq}"),
            Block::Splice => write!(f, "splice"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BaseArc {
    pub from: usize,
    pub to: usize,
    pub weight: u8,
    pub host: Block,
}

/// One parity graph placed in the instance.
#[derive(Debug, Clone)]
pub struct PgInfo {
    pub id: Pg,
    pub vertices: Vec<usize>,
    /// Indexed by `Port as usize`.
    pub ports: [usize; 4],
    /// Vertex order of the 0- and 1-traversal.
    pub paths: [Vec<usize>; 2],
}

impl PgInfo {
    pub fn port(&self, p: Port) -> usize {
        self.ports[p as usize]
    }

    pub fn path(&self, t: Traversal) -> &[usize] {
        &self.paths[t.bit() as usize]
    }
}

/// Border unit vertices: entry and exit, equal in directed targets.
#[derive(Debug, Clone, Copy)]
struct BorderUnit {
    entry: usize,
    exit: usize,
}

#[derive(Debug)]
pub struct ReducedInstance {
    regime: Regime,
    hybrid: HybridInstance,
    tags: Vec<VertexTag>,
    arcs: Vec<BaseArc>,
    arc_index: HashMap<(usize, usize), usize>,
    metric: BoundedMetric,
    pgs: Vec<PgInfo>,
    pg_of: Vec<Option<usize>>,
    var_pg: HashMap<VarRef, usize>,
    contact_pg: HashMap<VarRef, usize>,
    match_pg: HashMap<(usize, usize), usize>,
    borders: Vec<BorderUnit>,
    starts: Vec<usize>,
    cores: Vec<Vec<usize>>,
    in_owner: Vec<Block>,
    out_owner: Vec<Block>,
    /// Wiring arcs by the circle block whose links they realize.
    groups: BTreeMap<Block, Vec<usize>>,
    /// Parity graphs, border units and single vertices, for path joining.
    unit_of: Vec<usize>,
    unit_count: usize,
    tag_index: OnceLock<HashMap<VertexTag, usize>>,
    best_assignment: OnceLock<Option<Assignment>>,
}

impl Clone for ReducedInstance {
    fn clone(&self) -> Self {
        build(&self.hybrid, self.regime).expect("rebuild of a valid instance")
    }
}

impl ReducedInstance {
    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn hybrid(&self) -> &HybridInstance {
        &self.hybrid
    }

    pub fn size(&self) -> usize {
        self.tags.len()
    }

    pub fn tags(&self) -> &[VertexTag] {
        &self.tags
    }

    pub fn arcs(&self) -> &[BaseArc] {
        &self.arcs
    }

    pub fn metric(&self) -> &BoundedMetric {
        &self.metric
    }

    pub fn pgs(&self) -> &[PgInfo] {
        &self.pgs
    }

    pub fn pg_of(&self, v: usize) -> Option<usize> {
        self.pg_of[v]
    }

    pub fn var_pg(&self, v: VarRef) -> usize {
        self.var_pg[&v]
    }

    pub fn profile(&self) -> GadgetCostProfile {
        GadgetCostProfile::of(self.regime)
    }

    /// `base` of the length formula for this instance.
    pub fn base(&self) -> i64 {
        let h = &self.hybrid;
        self.profile().base(h.m2(), h.m3(), h.n())
    }

    pub fn slack(&self) -> i64 {
        self.profile().slack
    }

    pub fn base_arc(&self, u: usize, v: usize) -> Option<&BaseArc> {
        self.arc_index.get(&(u, v)).map(|&k| &self.arcs[k])
    }

    pub fn vertex(&self, tag: &VertexTag) -> Option<usize> {
        self.tag_index
            .get_or_init(|| self.tags.iter().cloned().enumerate().map(|(i, t)| (t, i)).collect())
            .get(tag)
            .copied()
    }

    pub fn tour_length(&self, t: &Tour) -> Result<u64, ReduceError> {
        Ok(crate::metric::tour_length(&self.metric, t)?)
    }

    pub fn in_owner(&self, v: usize) -> Block {
        self.in_owner[v]
    }

    pub fn out_owner(&self, v: usize) -> Block {
        self.out_owner[v]
    }

    /// Optimal assignment by enumeration, cached; `None` beyond the budget.
    pub fn best_assignment(&self) -> Option<&Assignment> {
        self.best_assignment
            .get_or_init(|| self.hybrid.max_sat_bruteforce().ok().map(|(a, _)| a))
            .as_ref()
    }

    /// Local length of every block when no equation is violated.
    pub fn block_constant(&self, b: Block) -> i64 {
        let ext = self.regime.external_weight() as i64;
        let internal = (self.pgs[0].paths[0].len() - 1) as i64;
        match b {
            Block::VarParity { .. } => internal,
            Block::Matching { .. } => internal + 3 * ext,
            Block::Plain { .. } | Block::Contact { .. } | Block::Splice => ext,
            Block::Border { .. } => {
                let path = if self.regime.directed() { 0 } else { 2 * ext };
                path + 2 * ext
            }
            Block::ThreeEq { .. } => {
                let core = ThreeEqCore::get(self.regime.directed());
                let links = (core.routes[0].items.len() - 1) as i64;
                links * ext + 3 * (internal + ext)
            }
        }
    }

    /// Every block of the instance, in ledger order.
    pub fn blocks(&self) -> Vec<Block> {
        let mut out = Vec::new();
        let h = &self.hybrid;
        for (l, c) in h.circles().iter().enumerate() {
            for p in 1..=c.length {
                out.push(Block::VarParity { circle: l, position: p });
                out.push(edge_block(h, l, p));
            }
        }
        out.extend((0..h.m3()).map(|eq| Block::ThreeEq { eq }));
        out.push(Block::Splice);
        out.sort();
        out.dedup();
        out
    }

    /// Assignment encoded by the traversal of each variable's parity graph.
    pub fn assignment_of_modes(&self, modes: &[Option<Traversal>]) -> Assignment {
        let mut phi = Assignment::zeros(&self.hybrid);
        for (v, &k) in &self.var_pg {
            phi.set(*v, modes[k] == Some(Traversal::One));
        }
        phi
    }

    pub fn tour_to_tags(&self, t: &Tour) -> Vec<String> {
        t.order.iter().map(|&v| self.tags[v].to_string()).collect()
    }

    pub fn tour_from_tags(&self, tags: &[String]) -> Result<Tour, ReduceError> {
        tags.iter()
            .map(|s| {
                let tag: VertexTag = s.parse()?;
                self.vertex(&tag).ok_or_else(|| ReduceError::Tag(s.clone()))
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Tour::new)
    }

    pub fn to_file(&self) -> InstanceFile {
        InstanceFile {
            regime: self.regime,
            hybrid: self.hybrid.clone(),
            vertices: self.tags.iter().map(|t| t.to_string()).collect(),
            arcs: self.arcs.iter().map(|a| (a.from, a.to, a.weight)).collect(),
        }
    }

    pub fn from_file(f: &InstanceFile) -> Result<Self, ReduceError> {
        let inst = build(&f.hybrid, f.regime)?;
        let vertices: Vec<String> = inst.tags.iter().map(|t| t.to_string()).collect();
        if vertices != f.vertices {
            return Err(ReduceError::Mismatch("vertex list differs".into()));
        }
        let arcs: Vec<(usize, usize, u8)> = inst.arcs.iter().map(|a| (a.from, a.to, a.weight)).collect();
        if arcs != f.arcs {
            return Err(ReduceError::Mismatch("arc list differs".into()));
        }
        Ok(inst)
    }

    /// Distances for the exact solver, with a guard on the vertex budget.
    pub fn solve_exact(&self, budget: SolveBudget) -> Result<(u64, Tour), crate::oracle::OracleError> {
        crate::oracle::exact_opt(&self.metric, budget)
    }
}

/// Serialized instance: the hybrid source plus the compiled graph, so a
/// reader can rebuild and compare.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub arcs: Vec<(usize, usize, u8)>,
    pub hybrid: HybridInstance,
    pub regime: Regime,
    pub vertices: Vec<String>,
}

pub(crate) fn edge_block(h: &HybridInstance, l: usize, p: usize) -> Block {
    let c = &h.circles()[l];
    if p == c.length {
        return Block::Border { circle: l };
    }
    if let Some(q) = c.partner(p) {
        let (i, j) = (p.min(q), p.max(q));
        return Block::Matching { circle: l, i, j };
    }
    if h.contact_slot(VarRef::new(l, p)).is_some() {
        return Block::Contact { circle: l, position: p };
    }
    Block::Plain { circle: l, position: p }
}

/// Skeleton endpoint before it is resolved to a concrete vertex.
#[derive(Debug, Clone, Copy)]
enum At {
    Pg(usize, Port),
    BorderIn(usize),
    BorderOut(usize),
    Start(usize),
    Core(usize, usize),
}

struct Builder {
    regime: Regime,
    tags: Vec<VertexTag>,
    arcs: Vec<BaseArc>,
    arc_index: HashMap<(usize, usize), usize>,
    pgs: Vec<PgInfo>,
    pg_of: Vec<Option<usize>>,
    var_pg: HashMap<VarRef, usize>,
    contact_pg: HashMap<VarRef, usize>,
    match_pg: HashMap<(usize, usize), usize>,
    borders: Vec<BorderUnit>,
    starts: Vec<usize>,
    cores: Vec<Vec<usize>>,
    owner: Vec<Block>,
    in_owner: Vec<Block>,
    out_owner: Vec<Block>,
    group: Option<Block>,
    groups: BTreeMap<Block, Vec<usize>>,
}

struct ParityTemplate {
    vertices: Vec<String>,
    arcs: Vec<(usize, usize, u8)>,
    ports: [usize; 4],
    paths: [Vec<usize>; 2],
}

fn parity_template(regime: Regime) -> &'static ParityTemplate {
    static CELLS: [OnceLock<ParityTemplate>; 4] = [OnceLock::new(), OnceLock::new(), OnceLock::new(), OnceLock::new()];
    let k = Regime::ALL.iter().position(|r| *r == regime).unwrap();
    CELLS[k].get_or_init(|| {
        let g = make_parity_gadget(regime);
        let idx = |s: &str| g.index(s).expect("port names a vertex");
        let ports = Port::ALL.map(|p| idx(&g.ports[p.name()]));
        let path = |t: Traversal| -> Vec<usize> {
            let s = &g.ports[t.entry().name()];
            let e = &g.ports[t.exit().name()];
            let paths = enumerate_hamiltonian_paths(&g, s, e, SolveBudget::enumeration()).expect("small gadget");
            paths[0].iter().map(|v| idx(v)).collect()
        };
        ParityTemplate {
            vertices: g.vertices.clone(),
            arcs: g
                .arcs
                .iter()
                .map(|a| (idx(&a.0), idx(&a.1), a.2))
                .collect(),
            ports,
            paths: [path(Traversal::Zero), path(Traversal::One)],
        }
    })
}

impl Builder {
    fn vertex(&mut self, tag: VertexTag, owner: Block) -> usize {
        self.tags.push(tag);
        self.pg_of.push(None);
        self.owner.push(owner);
        self.in_owner.push(owner);
        self.out_owner.push(owner);
        self.tags.len() - 1
    }

    fn parity(&mut self, id: Pg, block_of: impl Fn(&str) -> Block) -> usize {
        let t = parity_template(self.regime);
        let k = self.pgs.len();
        let mut vertices = Vec::with_capacity(t.vertices.len());
        for name in &t.vertices {
            let vertex = name.clone();
            let tag = match id {
                Pg::Var { circle, position } => VertexTag::Var { circle, position, vertex },
                Pg::Match { circle, i, j } => VertexTag::Match { circle, i, j, vertex },
                Pg::Contact { circle, position } => VertexTag::Contact { circle, position, vertex },
            };
            let v = self.vertex(tag, block_of(name));
            self.pg_of[v] = Some(k);
            vertices.push(v);
        }
        let host = block_of("vbot");
        for &(a, b, w) in &t.arcs {
            self.arc(vertices[a], vertices[b], w, host);
        }
        self.pgs.push(PgInfo {
            id,
            ports: t.ports.map(|p| vertices[p]),
            paths: [
                t.paths[0].iter().map(|&p| vertices[p]).collect(),
                t.paths[1].iter().map(|&p| vertices[p]).collect(),
            ],
            vertices,
        });
        k
    }

    fn arc(&mut self, from: usize, to: usize, weight: u8, host: Block) {
        if self.arc_index.contains_key(&(from, to)) {
            return;
        }
        let k = self.arcs.len();
        self.arcs.push(BaseArc { from, to, weight, host });
        if let Some(g) = self.group {
            self.groups.entry(g).or_default().push(k);
        }
        self.arc_index.insert((from, to), k);
        if !self.regime.directed() {
            self.arc_index.insert((to, from), k);
        }
    }

    fn at(&self, a: At) -> usize {
        match a {
            At::Pg(k, p) => self.pgs[k].port(p),
            At::BorderIn(l) => {
                if l < self.borders.len() {
                    self.borders[l].entry
                } else {
                    self.starts[0]
                }
            }
            At::BorderOut(l) => self.borders[l].exit,
            At::Start(c) => self.starts[c],
            At::Core(c, k) => self.cores[c][k],
        }
    }

    fn wire(&mut self, from: At, to: At) {
        let (u, v) = (self.at(from), self.at(to));
        let host = self.out_owner[u];
        self.arc(u, v, self.regime.external_weight(), host);
    }
}

pub fn build(h: &HybridInstance, regime: Regime) -> Result<ReducedInstance, ReduceError> {
    if h.n() == 0 {
        return Err(ReduceError::Empty);
    }
    let mut b = Builder {
        regime,
        tags: Vec::new(),
        arcs: Vec::new(),
        arc_index: HashMap::new(),
        pgs: Vec::new(),
        pg_of: Vec::new(),
        var_pg: HashMap::new(),
        contact_pg: HashMap::new(),
        match_pg: HashMap::new(),
        borders: Vec::new(),
        starts: Vec::new(),
        cores: Vec::new(),
        owner: Vec::new(),
        in_owner: Vec::new(),
        out_owner: Vec::new(),
        group: None,
        groups: BTreeMap::new(),
    };
    let ext = regime.external_weight();
    let core = ThreeEqCore::get(regime.directed());

    for (l, c) in h.circles().iter().enumerate() {
        for i in 1..=c.length {
            let before = if i == 1 { Block::Border { circle: l } } else { edge_block(h, l, i - 1) };
            let after = edge_block(h, l, i);
            let k = b.parity(Pg::Var { circle: l, position: i }, |name| {
                match name.split('_').next().unwrap_or(name) {
                    "v0" => before,
                    "v1" => after,
                    _ => Block::VarParity { circle: l, position: i },
                }
            });
            b.var_pg.insert(VarRef::new(l, i), k);
        }
        for &(i, j) in &c.matching {
            let block = Block::Matching { circle: l, i, j };
            let k = b.parity(Pg::Match { circle: l, i, j }, |_| block);
            b.match_pg.insert((l, i), k);
            b.match_pg.insert((l, j), k);
        }
        for k in c.contacts() {
            if let Some((eq, _)) = h.contact_slot(VarRef::new(l, k)) {
                let pg = b.parity(Pg::Contact { circle: l, position: k }, |_| Block::ThreeEq { eq });
                b.contact_pg.insert(VarRef::new(l, k), pg);
            }
        }
        let own = Block::Border { circle: l };
        let unit = if regime.directed() {
            let v = b.vertex(VertexTag::Border { circle: l, part: 0 }, own);
            BorderUnit { entry: v, exit: v }
        } else {
            let v1 = b.vertex(VertexTag::Border { circle: l, part: 1 }, own);
            let v2 = b.vertex(VertexTag::Border { circle: l, part: 2 }, own);
            let v3 = b.vertex(VertexTag::Border { circle: l, part: 3 }, own);
            b.arc(v1, v2, ext, own);
            b.arc(v2, v3, ext, own);
            BorderUnit { entry: v1, exit: v3 }
        };
        b.in_owner[unit.entry] = if l == 0 { Block::Splice } else { Block::Border { circle: l - 1 } };
        b.borders.push(unit);
    }
    let m3 = h.m3();
    let mids: Vec<usize> = (0..core.vertices.len())
        .filter(|&v| v != core.s_in && v != core.s_out)
        .collect();
    for c in 0..=m3 {
        let own = if c < m3 { Block::ThreeEq { eq: c } } else { Block::Splice };
        let s = b.vertex(VertexTag::Start(c), own);
        b.in_owner[s] = if c == 0 {
            Block::Border { circle: h.n() - 1 }
        } else {
            Block::ThreeEq { eq: c - 1 }
        };
        b.starts.push(s);
        if c < m3 {
            let mut row = vec![usize::MAX; core.vertices.len()];
            for &k in &mids {
                row[k] = b.vertex(
                    VertexTag::Check {
                        eq: c,
                        name: core.vertices[k].clone(),
                    },
                    own,
                );
            }
            b.cores.push(row);
        }
    }

    // Circle wiring: each edge has a 1-link (forward) and a 0-link
    // (backward); matching and contact parity graphs are threaded into one
    // of them.
    for (l, c) in h.circles().iter().enumerate() {
        let len = c.length;
        let pg = |b: &Builder, i: usize| b.var_pg[&VarRef::new(l, i)];
        let (first, last) = (pg(&b, 1), pg(&b, len));
        b.group = Some(Block::Border { circle: l });
        b.wire(At::BorderOut(l), At::Pg(first, Port::OneIn));
        b.wire(At::BorderOut(l), At::Pg(last, Port::ZeroIn));
        for p in 1..=len {
            let here = pg(&b, p);
            b.group = Some(edge_block(h, l, p));
            let (one_tail, one_head, zero_tail, zero_head) = if p < len {
                let next = pg(&b, p + 1);
                (
                    At::Pg(here, Port::OneOut),
                    At::Pg(next, Port::OneIn),
                    At::Pg(next, Port::ZeroOut),
                    At::Pg(here, Port::ZeroIn),
                )
            } else {
                (
                    At::Pg(here, Port::OneOut),
                    At::BorderIn(l + 1),
                    At::Pg(first, Port::ZeroOut),
                    At::BorderIn(l + 1),
                )
            };
            let terms = |t: Term, q: usize| match t {
                Term::OneTail => one_tail,
                Term::OneHead => one_head,
                Term::ZeroTail => zero_tail,
                Term::ZeroHead => zero_head,
                Term::Q(port) => At::Pg(q, port),
            };
            if let Some(q) = c.partner(p) {
                let m = b.match_pg[&(l, p)];
                if p < q {
                    b.wire(one_tail, one_head);
                    b.wire(zero_tail, At::Pg(m, Port::ZeroIn));
                    b.wire(At::Pg(m, Port::ZeroOut), zero_head);
                } else {
                    b.wire(one_tail, At::Pg(m, Port::OneIn));
                    b.wire(At::Pg(m, Port::OneOut), one_head);
                    b.wire(zero_tail, zero_head);
                }
            } else if let Some(&q) = b.contact_pg.get(&VarRef::new(l, p)) {
                let (eq, slot) = h.contact_slot(VarRef::new(l, p)).unwrap();
                let negated = slot == 0 && h.three_eqs()[eq].negated();
                let wiring = if negated { &core.negated } else { &core.plain };
                for &(s, t) in wiring {
                    b.wire(terms(s, q), terms(t, q));
                }
            } else {
                b.wire(one_tail, one_head);
                b.wire(zero_tail, zero_head);
            }
        }
    }
    b.group = None;
    for (c, q) in h.three_eqs().iter().enumerate() {
        let at = |e: Endpoint, b: &Builder| match e {
            Endpoint::Core(k) if k == core.s_in => At::Start(c),
            Endpoint::Core(k) if k == core.s_out => At::Start(c + 1),
            Endpoint::Core(k) => At::Core(c, k),
            Endpoint::Slot(s, port) => At::Pg(b.contact_pg[&q.vars[s]], port),
        };
        for &(u, v) in &core.links {
            let (u, v) = (at(u, &b), at(v, &b));
            let (u, v) = (b.at(u), b.at(v));
            b.arc(u, v, ext, Block::ThreeEq { eq: c });
        }
    }
    let (last, first) = (b.starts[m3], b.borders[0].entry);
    b.arc(last, first, ext, Block::Splice);

    let n = b.tags.len();
    let mut unit_of = vec![usize::MAX; n];
    let mut unit_count = b.pgs.len();
    for v in 0..n {
        if let Some(k) = b.pg_of[v] {
            unit_of[v] = k;
        }
    }
    for u in &b.borders {
        unit_of[u.entry] = unit_count;
        unit_of[u.exit] = unit_count;
        if let Some(mid) = (u.entry + 1..u.exit).next() {
            unit_of[mid] = unit_count;
        }
        unit_count += 1;
    }
    for slot in unit_of.iter_mut().filter(|s| **s == usize::MAX) {
        *slot = unit_count;
        unit_count += 1;
    }
    let metric = if regime.bound() == 2 {
        let unit: Vec<(usize, usize)> = b.arcs.iter().map(|a| (a.from, a.to)).collect();
        BoundedMetric::from_unit_arcs(n, 2, !regime.directed(), &unit)
    } else {
        metric_closure(
            &WeightedGraph {
                size: n,
                directed: regime.directed(),
                edges: b.arcs.iter().map(|a| (a.from, a.to, a.weight)).collect(),
            },
            4,
        )
    };
    Ok(ReducedInstance {
        regime,
        hybrid: h.clone(),
        tags: b.tags,
        arcs: b.arcs,
        arc_index: b.arc_index,
        metric,
        pgs: b.pgs,
        pg_of: b.pg_of,
        var_pg: b.var_pg,
        contact_pg: b.contact_pg,
        match_pg: b.match_pg,
        borders: b.borders,
        starts: b.starts,
        cores: b.cores,
        in_owner: b.in_owner,
        out_owner: b.out_owner,
        groups: b.groups,
        unit_of,
        unit_count,
        tag_index: OnceLock::new(),
        best_assignment: OnceLock::new(),
    })
}
