//! CDS instances as edge-labeled graphs.
//!
//! Vertices are the signals each party may send; an edge `{v, u}` says the
//! pair of inputs behind `v` and `u` is in the function's domain. A qualified
//! edge means the referee must recover the secret from the two signals, an
//! unqualified edge means the two signals must reveal nothing about it.
//!
//! Vertex ids follow natural name order (`A2 < A10 < B1`), so every listing
//! derived from ids is already sorted.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use crate::error::{CdsError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    A,
    B,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EdgeKind {
    Qualified,
    Unqualified,
}

impl EdgeKind {
    pub fn tag(self) -> &'static str {
        match self {
            EdgeKind::Qualified => "q",
            EdgeKind::Unqualified => "u",
        }
    }
}

impl fmt::Display for EdgeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EdgeKind::Qualified => write!(f, "qualified"),
            EdgeKind::Unqualified => write!(f, "unqualified"),
        }
    }
}

/// An edge with `a < b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Edge {
    pub a: VertexId,
    pub b: VertexId,
    pub kind: EdgeKind,
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Vertex {
    name: String,
    side: Option<Side>,
}

/// Compares names by alphabetic prefix, then numeric suffix, then the raw string.
pub fn natural_cmp(x: &str, y: &str) -> Ordering {
    fn split(s: &str) -> (&str, Option<u64>) {
        let cut = s.trim_end_matches(|c: char| c.is_ascii_digit()).len();
        let (head, tail) = s.split_at(cut);
        (head, tail.parse().ok())
    }
    let (hx, nx) = split(x);
    let (hy, ny) = split(y);
    hx.cmp(hy).then(nx.cmp(&ny)).then(x.cmp(y))
}

fn bipartite_side(name: &str) -> Option<Side> {
    let mut chars = name.chars();
    let side = match chars.next()? {
        'A' => Side::A,
        'B' => Side::B,
        _ => return None,
    };
    let rest = chars.as_str();
    if rest.is_empty() || !rest.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    Some(side)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CdsInstance {
    general: bool,
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
    adj: Vec<Vec<(VertexId, EdgeKind)>>,
}

/// Disjoint vertex blocks, each sorted, blocks ordered by their first vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    pub blocks: Vec<Vec<VertexId>>,
}

impl Partition {
    fn from_labels(vertices: &[VertexId], label: impl Fn(VertexId) -> usize) -> Self {
        let mut by_label: HashMap<usize, Vec<VertexId>> = HashMap::new();
        for &v in vertices {
            by_label.entry(label(v)).or_default().push(v);
        }
        let mut blocks: Vec<Vec<VertexId>> = by_label.into_values().collect();
        for b in &mut blocks {
            b.sort();
        }
        blocks.sort();
        Partition { blocks }
    }

    pub fn block_of(&self, v: VertexId) -> Option<usize> {
        self.blocks.iter().position(|b| b.binary_search(&v).is_ok())
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }
}

/// A path given by its vertex sequence; every step uses an edge of `kind`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathWitness {
    pub vertices: Vec<VertexId>,
    pub kind: EdgeKind,
}

impl PathWitness {
    /// Number of edges on the path.
    pub fn len(&self) -> usize {
        self.vertices.len().saturating_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Feasibility {
    Feasible,
    /// `edge` is a qualified edge whose endpoints are joined by `path`, an
    /// unqualified path inside their qualified component. `path` runs from
    /// `edge.0` to `edge.1`.
    Infeasible { edge: (VertexId, VertexId), path: PathWitness },
}

impl Feasibility {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::Feasible)
    }
}

impl CdsInstance {
    /// Builds an instance from labeled edges. Vertices are implied by edges.
    pub fn from_edges<S: AsRef<str>>(general: bool, edges: &[(EdgeKind, S, S)]) -> Result<Self> {
        let mut names: Vec<String> = Vec::new();
        for (_, v, u) in edges {
            for n in [v.as_ref(), u.as_ref()] {
                if !names.iter().any(|x| x == n) {
                    names.push(n.to_string());
                }
            }
        }
        names.sort_by(|x, y| natural_cmp(x, y));
        let mut vertices = Vec::with_capacity(names.len());
        for n in &names {
            let side = if general {
                None
            } else {
                Some(bipartite_side(n).ok_or_else(|| CdsError::UnknownSide(n.clone()))?)
            };
            vertices.push(Vertex { name: n.clone(), side });
        }
        let index: HashMap<&str, usize> =
            names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();

        let mut seen = BTreeSet::new();
        let mut list = Vec::with_capacity(edges.len());
        for (kind, v, u) in edges {
            let (v, u) = (v.as_ref(), u.as_ref());
            if v == u {
                return Err(CdsError::SelfLoop(v.to_string()));
            }
            let (i, j) = (index[v], index[u]);
            if !general && vertices[i].side == vertices[j].side {
                return Err(CdsError::NotBipartite(v.to_string(), u.to_string()));
            }
            let (a, b) = if i < j { (i, j) } else { (j, i) };
            if !seen.insert((a, b)) {
                return Err(CdsError::DuplicateEdge(v.to_string(), u.to_string()));
            }
            list.push(Edge { a: VertexId(a), b: VertexId(b), kind: *kind });
        }
        list.sort_by_key(|e| (e.a, e.b));

        let mut adj = vec![Vec::new(); vertices.len()];
        for e in &list {
            adj[e.a.0].push((e.b, e.kind));
            adj[e.b.0].push((e.a, e.kind));
        }
        for a in &mut adj {
            a.sort();
        }
        Ok(CdsInstance { general, vertices, edges: list, adj })
    }

    pub fn is_general(&self) -> bool {
        self.general
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertex_ids(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.vertices.len()).map(VertexId)
    }

    pub fn name(&self, v: VertexId) -> &str {
        &self.vertices[v.0].name
    }

    pub fn side(&self, v: VertexId) -> Option<Side> {
        self.vertices[v.0].side
    }

    pub fn id(&self, name: &str) -> Option<VertexId> {
        self.vertices.iter().position(|v| v.name == name).map(VertexId)
    }

    pub fn require_id(&self, name: &str) -> Result<VertexId> {
        self.id(name).ok_or_else(|| CdsError::UnknownVertex(name.to_string()))
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edges_of_kind(&self, kind: EdgeKind) -> impl Iterator<Item = &Edge> + '_ {
        self.edges.iter().filter(move |e| e.kind == kind)
    }

    pub fn edge_kind(&self, v: VertexId, u: VertexId) -> Option<EdgeKind> {
        self.adj[v.0].iter().find(|(w, _)| *w == u).map(|(_, k)| *k)
    }

    /// Neighbors of `v` through edges of `kind`, in name order.
    pub fn neighbors(&self, v: VertexId, kind: EdgeKind) -> impl Iterator<Item = VertexId> + '_ {
        self.adj[v.0].iter().filter(move |(_, k)| *k == kind).map(|(w, _)| *w)
    }

    pub fn names(&self, vs: &[VertexId]) -> Vec<String> {
        vs.iter().map(|&v| self.name(v).to_string()).collect()
    }

    /// The sub-instance induced by `keep`.
    pub fn induced(&self, keep: &[VertexId]) -> CdsInstance {
        let keep: BTreeSet<VertexId> = keep.iter().copied().collect();
        let edges: Vec<(EdgeKind, &str, &str)> = self
            .edges
            .iter()
            .filter(|e| keep.contains(&e.a) && keep.contains(&e.b))
            .map(|e| (e.kind, self.name(e.a), self.name(e.b)))
            .collect();
        CdsInstance::from_edges(self.general, &edges).expect("sub-instance of a valid instance")
    }

    /// Renders the instance in the line-based file format.
    pub fn to_file_string(&self) -> String {
        let mut out = String::from("cds-instance v1");
        if self.general {
            out.push_str(" general");
        }
        out.push('\n');
        for e in &self.edges {
            out.push_str(&format!("{} {} {}\n", e.kind.tag(), self.name(e.a), self.name(e.b)));
        }
        out
    }

    /// Vertices that have no unqualified edge.
    pub fn degenerate_vertices(&self) -> Vec<VertexId> {
        self.vertex_ids()
            .filter(|&v| self.neighbors(v, EdgeKind::Unqualified).next().is_none())
            .collect()
    }

    pub fn is_non_degenerate(&self) -> (bool, Vec<VertexId>) {
        let bad = self.degenerate_vertices();
        (bad.is_empty(), bad)
    }

    /// Removes vertices whose edges are all qualified, repeating until none
    /// remain. The removed vertices can simply send the secret itself.
    pub fn normalize_degenerate(&self) -> (CdsInstance, Vec<String>) {
        let mut current = self.clone();
        let mut eliminated = Vec::new();
        loop {
            let bad = current.degenerate_vertices();
            if bad.is_empty() {
                return (current, eliminated);
            }
            eliminated.extend(current.names(&bad));
            let keep: Vec<VertexId> = current.vertex_ids().filter(|v| !bad.contains(v)).collect();
            current = current.induced(&keep);
        }
    }

    fn components(&self, within: &[VertexId], kind: EdgeKind) -> Partition {
        let inside: BTreeSet<VertexId> = within.iter().copied().collect();
        let mut label = vec![usize::MAX; self.vertices.len()];
        for &start in within {
            if label[start.0] != usize::MAX {
                continue;
            }
            label[start.0] = start.0;
            let mut queue = VecDeque::from([start]);
            while let Some(v) = queue.pop_front() {
                for w in self.neighbors(v, kind) {
                    if inside.contains(&w) && label[w.0] == usize::MAX {
                        label[w.0] = start.0;
                        queue.push_back(w);
                    }
                }
            }
        }
        Partition::from_labels(within, |v| label[v.0])
    }

    /// Connected components of the qualified-edge subgraph.
    pub fn qualified_components(&self) -> Partition {
        let all: Vec<VertexId> = self.vertex_ids().collect();
        self.components(&all, EdgeKind::Qualified)
    }

    /// Components of `block` under unqualified edges with both ends in `block`.
    pub fn unqualified_components_within(&self, block: &[VertexId]) -> Result<Partition> {
        let mut sorted = block.to_vec();
        sorted.sort();
        if !self.qualified_components().blocks.contains(&sorted) {
            return Err(CdsError::NotQualifiedComponent);
        }
        Ok(self.components(&sorted, EdgeKind::Unqualified))
    }

    /// Shortest unqualified path from `s` to `t` using only vertices of
    /// `block`. Neighbors are explored in name order, so ties resolve to the
    /// path that prefers earlier names.
    pub fn unqualified_path(&self, block: &[VertexId], s: VertexId, t: VertexId) -> Result<PathWitness> {
        let inside: BTreeSet<VertexId> = block.iter().copied().collect();
        let no_path = || CdsError::NoPath(self.name(s).to_string(), self.name(t).to_string());
        if !inside.contains(&s) || !inside.contains(&t) {
            return Err(no_path());
        }
        let mut parent: HashMap<VertexId, VertexId> = HashMap::new();
        let mut queue = VecDeque::from([s]);
        parent.insert(s, s);
        while let Some(v) = queue.pop_front() {
            if v == t {
                break;
            }
            for w in self.neighbors(v, EdgeKind::Unqualified) {
                if inside.contains(&w) && !parent.contains_key(&w) {
                    parent.insert(w, v);
                    queue.push_back(w);
                }
            }
        }
        if !parent.contains_key(&t) {
            return Err(no_path());
        }
        let mut path = vec![t];
        let mut cur = t;
        while cur != s {
            cur = parent[&cur];
            path.push(cur);
        }
        path.reverse();
        Ok(PathWitness { vertices: path, kind: EdgeKind::Unqualified })
    }

    /// Decides whether capacity 1/2 is attainable: no qualified edge may join
    /// two vertices of one unqualified component inside a qualified component.
    ///
    /// On failure the first offending qualified edge (in edge order) is
    /// reported, oriented from its later-named endpoint, together with the
    /// shortest unqualified path between its endpoints.
    pub fn half_rate_feasible(&self) -> Result<Feasibility> {
        let (ok, bad) = self.is_non_degenerate();
        if !ok {
            return Err(CdsError::Degenerate(self.names(&bad)));
        }
        for block in &self.qualified_components().blocks {
            let inner = self.components(block, EdgeKind::Unqualified);
            for e in self.edges_of_kind(EdgeKind::Qualified) {
                if block.binary_search(&e.a).is_err() {
                    continue;
                }
                if inner.block_of(e.a) == inner.block_of(e.b) {
                    let (s, t) = (e.b, e.a);
                    let path = self.unqualified_path(block, s, t)?;
                    return Ok(Feasibility::Infeasible { edge: (s, t), path });
                }
            }
        }
        Ok(Feasibility::Feasible)
    }
}

/// Parses the line-based instance format.
///
/// ```text
/// # comment
/// cds-instance v1 [general]
/// q A1 B1
/// u A1 B2
/// ```
pub fn parse_instance(text: &str) -> Result<CdsInstance> {
    let mut general = None;
    let mut edges: Vec<(EdgeKind, String, String)> = Vec::new();
    let mut lines_of: Vec<usize> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        let syntax = |msg: &str| CdsError::Syntax { line: line_no, msg: msg.to_string() };
        if general.is_none() {
            general = Some(match toks.as_slice() {
                ["cds-instance", "v1"] => false,
                ["cds-instance", "v1", "general"] => true,
                _ => return Err(syntax("expected header `cds-instance v1 [general]`")),
            });
            continue;
        }
        let kind = match toks.first() {
            Some(&"q") => EdgeKind::Qualified,
            Some(&"u") => EdgeKind::Unqualified,
            _ => return Err(syntax("expected an edge line `q <v> <u>` or `u <v> <u>`")),
        };
        if toks.len() != 3 {
            return Err(syntax("an edge line takes exactly two vertex names"));
        }
        let is_ident = |s: &str| s.chars().all(|c| c.is_alphanumeric() || c == '_');
        if !is_ident(toks[1]) || !is_ident(toks[2]) {
            return Err(syntax("vertex names must be alphanumeric identifiers"));
        }
        edges.push((kind, toks[1].to_string(), toks[2].to_string()));
        lines_of.push(line_no);
    }
    let Some(general) = general else {
        return Err(CdsError::Syntax { line: 0, msg: "missing header `cds-instance v1`".into() });
    };
    // Report the offending line for edge-level errors.
    let mut partial: Vec<(EdgeKind, String, String)> = Vec::with_capacity(edges.len());
    for (e, line) in edges.iter().zip(&lines_of) {
        partial.push(e.clone());
        if let Err(err) = CdsInstance::from_edges(general, &partial) {
            return Err(CdsError::Syntax { line: *line, msg: err.to_string() });
        }
    }
    CdsInstance::from_edges(general, &edges)
}
