//! Undirected multigraphs with stable vertex identities.
//!
//! [`UGraph`] is the substrate for trees, networks, display graphs and minors.
//! The minor and homeomorphism operations ([`UGraph::delete_edge`],
//! [`UGraph::contract_edge`], [`UGraph::subdivide_edge`],
//! [`UGraph::suppress_degree2`]) return new graphs and leave the receiver
//! untouched, so callers can keep before/after snapshots. Parallel edges are
//! allowed, self-loops never are.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Opaque vertex identifier. Identifiers are never reused within one graph.
pub type VertexId = usize;

/// An unordered vertex pair, stored with the smaller id first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge(VertexId, VertexId);

impl Edge {
    pub fn new(u: VertexId, v: VertexId) -> Self {
        if u <= v {
            Edge(u, v)
        } else {
            Edge(v, u)
        }
    }

    pub fn a(&self) -> VertexId {
        self.0
    }

    pub fn b(&self) -> VertexId {
        self.1
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.0 == v || self.1 == v
    }

    /// The endpoint opposite to `v`. `v` must be an endpoint.
    pub fn other(&self, v: VertexId) -> VertexId {
        if self.0 == v {
            self.1
        } else {
            self.0
        }
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{},{}}}", self.0, self.1)
    }
}

impl From<(VertexId, VertexId)> for Edge {
    fn from((u, v): (VertexId, VertexId)) -> Self {
        Edge::new(u, v)
    }
}

/// A set of vertex ids (separators, branch sets, bags).
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexSet(BTreeSet<VertexId>);

impl VertexSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, v: VertexId) -> bool {
        self.0.insert(v)
    }

    pub fn remove(&mut self, v: VertexId) -> bool {
        self.0.remove(&v)
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.0.contains(&v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.0.iter().copied()
    }

    pub fn is_subset(&self, other: &VertexSet) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn is_disjoint(&self, other: &VertexSet) -> bool {
        self.0.is_disjoint(&other.0)
    }

    pub fn as_set(&self) -> &BTreeSet<VertexId> {
        &self.0
    }
}

impl FromIterator<VertexId> for VertexSet {
    fn from_iter<I: IntoIterator<Item = VertexId>>(iter: I) -> Self {
        VertexSet(iter.into_iter().collect())
    }
}

impl<'a> IntoIterator for &'a VertexSet {
    type Item = &'a VertexId;
    type IntoIter = std::collections::btree_set::Iter<'a, VertexId>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

/// Undirected multigraph with optional, injective taxon labels.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct UGraph {
    // neighbour -> multiplicity
    adj: BTreeMap<VertexId, BTreeMap<VertexId, usize>>,
    labels: BTreeMap<VertexId, String>,
    by_label: BTreeMap<String, VertexId>,
    next_id: VertexId,
}

impl UGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Graph on vertices `0..n` with no edges.
    pub fn with_vertices(n: usize) -> Self {
        let mut g = Self::new();
        for _ in 0..n {
            g.add_vertex();
        }
        g
    }

    /// Graph on `0..n` with the given edges.
    pub fn from_edges(n: usize, edges: &[(VertexId, VertexId)]) -> Result<Self> {
        let mut g = Self::with_vertices(n);
        for &(u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    pub fn add_vertex(&mut self) -> VertexId {
        let id = self.next_id;
        self.next_id += 1;
        self.adj.insert(id, BTreeMap::new());
        id
    }

    /// Inserts a vertex with a caller-chosen id (used by importers).
    pub fn add_vertex_with_id(&mut self, id: VertexId) -> Result<()> {
        if self.adj.contains_key(&id) {
            return Err(Error::Invalid(format!("duplicate vertex id {id}")));
        }
        self.adj.insert(id, BTreeMap::new());
        self.next_id = self.next_id.max(id + 1);
        Ok(())
    }

    pub fn add_labelled_vertex(&mut self, label: &str) -> Result<VertexId> {
        if self.by_label.contains_key(label) {
            return Err(Error::DuplicateLabel(label.to_string()));
        }
        let v = self.add_vertex();
        self.labels.insert(v, label.to_string());
        self.by_label.insert(label.to_string(), v);
        Ok(v)
    }

    pub fn set_label(&mut self, v: VertexId, label: &str) -> Result<()> {
        self.check_vertex(v)?;
        if let Some(&w) = self.by_label.get(label) {
            if w != v {
                return Err(Error::DuplicateLabel(label.to_string()));
            }
            return Ok(());
        }
        if let Some(old) = self.labels.insert(v, label.to_string()) {
            self.by_label.remove(&old);
        }
        self.by_label.insert(label.to_string(), v);
        Ok(())
    }

    pub fn clear_label(&mut self, v: VertexId) -> Option<String> {
        let old = self.labels.remove(&v)?;
        self.by_label.remove(&old);
        Some(old)
    }

    pub fn add_edge(&mut self, u: VertexId, v: VertexId) -> Result<()> {
        if u == v {
            return Err(Error::SelfLoop(u));
        }
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        *self.adj.get_mut(&u).unwrap().entry(v).or_insert(0) += 1;
        *self.adj.get_mut(&v).unwrap().entry(u).or_insert(0) += 1;
        Ok(())
    }

    /// Removes one occurrence of `e`.
    pub fn remove_edge(&mut self, e: Edge) -> Result<()> {
        let (u, v) = (e.a(), e.b());
        if self.multiplicity(u, v) == 0 {
            return Err(Error::EdgeNotPresent(e));
        }
        for (x, y) in [(u, v), (v, u)] {
            let nb = self.adj.get_mut(&x).unwrap();
            let m = nb.get_mut(&y).unwrap();
            *m -= 1;
            if *m == 0 {
                nb.remove(&y);
            }
        }
        Ok(())
    }

    /// Removes a vertex with all incident edges.
    pub fn remove_vertex(&mut self, v: VertexId) -> Result<()> {
        let nb = self.adj.remove(&v).ok_or(Error::UnknownVertex(v))?;
        for w in nb.keys() {
            self.adj.get_mut(w).unwrap().remove(&v);
        }
        self.clear_label(v);
        Ok(())
    }

    fn check_vertex(&self, v: VertexId) -> Result<()> {
        if self.adj.contains_key(&v) {
            Ok(())
        } else {
            Err(Error::UnknownVertex(v))
        }
    }

    pub fn has_vertex(&self, v: VertexId) -> bool {
        self.adj.contains_key(&v)
    }

    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        self.multiplicity(u, v) > 0
    }

    pub fn multiplicity(&self, u: VertexId, v: VertexId) -> usize {
        self.adj
            .get(&u)
            .and_then(|nb| nb.get(&v))
            .copied()
            .unwrap_or(0)
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.adj.keys().copied()
    }

    pub fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    /// Number of edges counted with multiplicity.
    pub fn edge_count(&self) -> usize {
        self.adj.values().flat_map(|nb| nb.values()).sum::<usize>() / 2
    }

    /// Every edge occurrence, sorted; parallel edges appear repeatedly.
    pub fn edges(&self) -> Vec<Edge> {
        let mut out = Vec::new();
        for (&u, nb) in &self.adj {
            for (&v, &m) in nb {
                if u < v {
                    out.extend(std::iter::repeat_n(Edge(u, v), m));
                }
            }
        }
        out
    }

    /// Distinct adjacent pairs, sorted.
    pub fn simple_edges(&self) -> Vec<Edge> {
        let mut out = Vec::new();
        for (&u, nb) in &self.adj {
            for &v in nb.keys() {
                if u < v {
                    out.push(Edge(u, v));
                }
            }
        }
        out
    }

    /// Distinct neighbours in increasing id order.
    pub fn neighbours(&self, v: VertexId) -> impl Iterator<Item = VertexId> + '_ {
        self.adj
            .get(&v)
            .into_iter()
            .flat_map(|nb| nb.keys().copied())
    }

    /// Degree counted with multiplicity.
    pub fn degree(&self, v: VertexId) -> usize {
        self.adj.get(&v).map(|nb| nb.values().sum()).unwrap_or(0)
    }

    pub fn label(&self, v: VertexId) -> Option<&str> {
        self.labels.get(&v).map(String::as_str)
    }

    pub fn vertex_by_label(&self, label: &str) -> Option<VertexId> {
        self.by_label.get(label).copied()
    }

    pub fn labels(&self) -> &BTreeMap<VertexId, String> {
        &self.labels
    }

    pub fn is_labelled(&self, v: VertexId) -> bool {
        self.labels.contains_key(&v)
    }

    pub fn max_degree(&self) -> usize {
        self.vertices().map(|v| self.degree(v)).max().unwrap_or(0)
    }

    pub fn is_simple(&self) -> bool {
        self.adj.values().all(|nb| nb.values().all(|&m| m == 1))
    }

    /// Largest id handed out so far plus one.
    pub fn id_bound(&self) -> VertexId {
        self.next_id
    }

    // ---- minor and homeomorphism operations (pure) ----

    /// Returns the graph minus one occurrence of `e`.
    pub fn delete_edge(&self, e: Edge) -> Result<UGraph> {
        let mut g = self.clone();
        g.remove_edge(e)?;
        Ok(g)
    }

    /// Returns the graph minus `v` and its incident edges.
    pub fn delete_vertex(&self, v: VertexId) -> Result<UGraph> {
        let mut g = self.clone();
        g.remove_vertex(v)?;
        Ok(g)
    }

    /// Identifies the endpoints of `e`. Self-loops that would arise are dropped,
    /// parallel edges are kept. The merged vertex keeps the smaller id unless only
    /// the other endpoint is labelled, in which case it keeps that endpoint (and
    /// its label). Contracting two labelled vertices is an error.
    pub fn contract_edge(&self, e: Edge) -> Result<UGraph> {
        let mut g = self.clone();
        g.contract_in_place(e)?;
        Ok(g)
    }

    pub(crate) fn contract_in_place(&mut self, e: Edge) -> Result<VertexId> {
        if !self.has_edge(e.a(), e.b()) {
            return Err(Error::EdgeNotPresent(e));
        }
        let (keep, gone) = match (self.is_labelled(e.a()), self.is_labelled(e.b())) {
            (true, true) => return Err(Error::BothLabelled(e)),
            (false, true) => (e.b(), e.a()),
            _ => (e.a(), e.b()),
        };
        let nb = self.adj.remove(&gone).unwrap();
        for (&w, &m) in &nb {
            self.adj.get_mut(&w).unwrap().remove(&gone);
            if w == keep {
                continue;
            }
            *self.adj.get_mut(&keep).unwrap().entry(w).or_insert(0) += m;
            *self.adj.get_mut(&w).unwrap().entry(keep).or_insert(0) += m;
        }
        Ok(keep)
    }

    /// Replaces `e` by a path through a fresh vertex, which is returned.
    pub fn subdivide_edge(&self, e: Edge) -> Result<(UGraph, VertexId)> {
        let mut g = self.clone();
        let w = g.subdivide_in_place(e)?;
        Ok((g, w))
    }

    pub(crate) fn subdivide_in_place(&mut self, e: Edge) -> Result<VertexId> {
        self.remove_edge(e)?;
        let w = self.add_vertex();
        self.add_edge(e.a(), w)?;
        self.add_edge(w, e.b())?;
        Ok(w)
    }

    /// Removes the unlabelled degree-2 vertex `v` and joins its two neighbours.
    pub fn suppress_degree2(&self, v: VertexId) -> Result<UGraph> {
        if self.is_labelled(v) {
            return Err(Error::LabelledVertex(v));
        }
        let mut g = self.clone();
        g.suppress_in_place(v)?;
        Ok(g)
    }

    /// Like [`UGraph::suppress_degree2`] but also accepts a labelled vertex,
    /// whose label is dropped. Callers must know the suppression is safe.
    pub fn suppress_any_degree2(&self, v: VertexId) -> Result<UGraph> {
        let mut g = self.clone();
        g.suppress_in_place(v)?;
        Ok(g)
    }

    pub(crate) fn suppress_in_place(&mut self, v: VertexId) -> Result<Edge> {
        self.check_vertex(v)?;
        let deg = self.degree(v);
        if deg != 2 {
            return Err(Error::NotDegreeTwo {
                vertex: v,
                degree: deg,
            });
        }
        let ends: Vec<VertexId> = self.adj[&v]
            .iter()
            .flat_map(|(&w, &m)| std::iter::repeat_n(w, m))
            .collect();
        if ends[0] == ends[1] {
            // both edges go to the same neighbour: joining would form a loop
            return Err(Error::SelfLoop(ends[0]));
        }
        self.remove_vertex(v)?;
        self.add_edge(ends[0], ends[1])?;
        Ok(Edge::new(ends[0], ends[1]))
    }

    /// Collapses parallel edges.
    pub fn simplify(&self) -> UGraph {
        let mut g = self.clone();
        for nb in g.adj.values_mut() {
            for m in nb.values_mut() {
                *m = 1;
            }
        }
        g
    }

    /// Subgraph induced by `keep` (labels carried over).
    pub fn induced_subgraph(&self, keep: &VertexSet) -> UGraph {
        let mut g = self.clone();
        let drop: Vec<VertexId> = self.vertices().filter(|v| !keep.contains(*v)).collect();
        for v in drop {
            g.remove_vertex(v).unwrap();
        }
        g
    }

    /// Disjoint union; the vertices of `other` are renumbered. Returns the map
    /// from `other`'s ids to the new ids. Labels must stay injective.
    pub fn disjoint_union(&mut self, other: &UGraph) -> Result<BTreeMap<VertexId, VertexId>> {
        let mut map = BTreeMap::new();
        for v in other.vertices() {
            let w = match other.label(v) {
                Some(l) => self.add_labelled_vertex(l)?,
                None => self.add_vertex(),
            };
            map.insert(v, w);
        }
        for e in other.edges() {
            self.add_edge(map[&e.a()], map[&e.b()])?;
        }
        Ok(map)
    }

    // ---- connectivity ----

    pub fn connected_components(&self) -> Vec<VertexSet> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for s in self.vertices() {
            if seen.contains(&s) {
                continue;
            }
            let mut comp = VertexSet::new();
            let mut queue = VecDeque::from([s]);
            seen.insert(s);
            while let Some(v) = queue.pop_front() {
                comp.insert(v);
                for w in self.neighbours(v) {
                    if seen.insert(w) {
                        queue.push_back(w);
                    }
                }
            }
            out.push(comp);
        }
        out
    }

    pub fn component_count(&self) -> usize {
        self.connected_components().len()
    }

    /// The empty graph counts as connected.
    pub fn is_connected(&self) -> bool {
        self.component_count() <= 1
    }

    /// `|E| - |V| + #components`, the number of independent cycles.
    pub fn cyclomatic_number(&self) -> usize {
        (self.edge_count() + self.component_count()).saturating_sub(self.vertex_count())
    }

    /// True iff deleting `s` (with incident edges) increases the number of
    /// connected components.
    pub fn is_separator(&self, s: &VertexSet) -> Result<bool> {
        for v in s.iter() {
            self.check_vertex(v)?;
        }
        let before = self.component_count();
        let mut g = self.clone();
        for v in s.iter() {
            g.remove_vertex(v)?;
        }
        Ok(g.component_count() > before)
    }

    /// Exactly one cycle, of length 3, with at least one degree-2 vertex on it.
    pub fn is_unique_triangle_graph(&self) -> bool {
        if self.cyclomatic_number() != 1 {
            return false;
        }
        // strip pendant vertices; with one independent cycle what remains is the cycle
        let mut core = self.clone();
        loop {
            let pendant: Vec<VertexId> = core.vertices().filter(|&v| core.degree(v) <= 1).collect();
            if pendant.is_empty() {
                break;
            }
            for v in pendant {
                core.remove_vertex(v).unwrap();
            }
        }
        core.vertex_count() == 3 && core.vertices().any(|v| self.degree(v) == 2)
    }

    /// Blocks (maximal biconnected subgraphs). Bridges are their own blocks,
    /// isolated vertices form single-vertex blocks.
    pub fn biconnected_components(&self) -> Vec<UGraph> {
        let edges = self.edges();
        let ids: Vec<VertexId> = self.vertices().collect();
        let index: BTreeMap<VertexId, usize> =
            ids.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let n = ids.len();
        let mut inc: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
        for (k, e) in edges.iter().enumerate() {
            let (a, b) = (index[&e.a()], index[&e.b()]);
            inc[a].push((b, k));
            inc[b].push((a, k));
        }
        const NONE: usize = usize::MAX;
        let mut disc = vec![NONE; n];
        let mut low = vec![0; n];
        let mut timer = 0;
        let mut estack: Vec<usize> = Vec::new();
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        let mut singles = Vec::new();

        for root in 0..n {
            if disc[root] != NONE {
                continue;
            }
            if inc[root].is_empty() {
                disc[root] = timer;
                timer += 1;
                singles.push(root);
                continue;
            }
            disc[root] = timer;
            low[root] = timer;
            timer += 1;
            // (vertex, edge used to enter, next incidence index)
            let mut stack: Vec<(usize, usize, usize)> = vec![(root, NONE, 0)];
            while let Some(frame) = stack.last_mut() {
                let (v, pe) = (frame.0, frame.1);
                if frame.2 < inc[v].len() {
                    let (w, k) = inc[v][frame.2];
                    frame.2 += 1;
                    if k == pe {
                        continue;
                    }
                    if disc[w] == NONE {
                        estack.push(k);
                        disc[w] = timer;
                        low[w] = timer;
                        timer += 1;
                        stack.push((w, k, 0));
                    } else if disc[w] < disc[v] {
                        estack.push(k);
                        low[v] = low[v].min(disc[w]);
                    }
                } else {
                    stack.pop();
                    if let Some(parent) = stack.last() {
                        let p = parent.0;
                        low[p] = low[p].min(low[v]);
                        if low[v] >= disc[p] {
                            let mut block = Vec::new();
                            while let Some(k) = estack.pop() {
                                block.push(k);
                                if k == pe {
                                    break;
                                }
                            }
                            blocks.push(block);
                        }
                    }
                }
            }
        }

        let mut out = Vec::new();
        for block in blocks {
            let mut g = UGraph::new();
            let mut verts = BTreeSet::new();
            for &k in &block {
                verts.insert(edges[k].a());
                verts.insert(edges[k].b());
            }
            for &v in &verts {
                g.add_vertex_with_id(v).unwrap();
                if let Some(l) = self.label(v) {
                    g.set_label(v, l).unwrap();
                }
            }
            for &k in &block {
                g.add_edge(edges[k].a(), edges[k].b()).unwrap();
            }
            out.push(g);
        }
        for i in singles {
            let mut g = UGraph::new();
            g.add_vertex_with_id(ids[i]).unwrap();
            if let Some(l) = self.label(ids[i]) {
                g.set_label(ids[i], l).unwrap();
            }
            out.push(g);
        }
        out
    }

    // ---- isomorphism (small graphs) ----

    /// Canonical form for graphs with at most 10 vertices, ignoring labels and
    /// vertex ids but respecting edge multiplicities. Two graphs are isomorphic
    /// iff their canonical forms are equal.
    pub fn canonical_form(&self) -> Result<Vec<u8>> {
        let n = self.vertex_count();
        if n > 10 {
            return Err(Error::SizeLimit {
                what: "canonical form vertices",
                limit: 10,
                actual: n,
            });
        }
        let ids: Vec<VertexId> = self.vertices().collect();
        let mat: Vec<Vec<u8>> = ids
            .iter()
            .map(|&u| ids.iter().map(|&v| self.multiplicity(u, v) as u8).collect())
            .collect();

        // colour refinement, colours are isomorphism invariant signatures
        let mut colour: Vec<usize> = (0..n)
            .map(|i| mat[i].iter().map(|&m| m as usize).sum())
            .collect();
        loop {
            let sigs: Vec<(usize, Vec<(usize, u8)>)> = (0..n)
                .map(|i| {
                    let mut s: Vec<(usize, u8)> = (0..n)
                        .filter(|&j| mat[i][j] > 0)
                        .map(|j| (colour[j], mat[i][j]))
                        .collect();
                    s.sort();
                    (colour[i], s)
                })
                .collect();
            let mut distinct: Vec<&(usize, Vec<(usize, u8)>)> = sigs.iter().collect();
            distinct.sort();
            distinct.dedup();
            let next: Vec<usize> = sigs
                .iter()
                .map(|s| distinct.binary_search(&s).unwrap())
                .collect();
            let classes_before = {
                let mut c = colour.clone();
                c.sort();
                c.dedup();
                c.len()
            };
            colour = next;
            if distinct.len() == classes_before {
                break;
            }
        }

        let mut classes: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (i, &c) in colour.iter().enumerate() {
            classes.entry(c).or_default().push(i);
        }
        let classes: Vec<Vec<usize>> = classes.into_values().collect();

        let mut best: Option<Vec<u8>> = None;
        let mut order = Vec::with_capacity(n);
        canon_search(&classes, 0, &mut order, &mat, &mut best);
        let mut out = vec![n as u8];
        out.extend(best.unwrap_or_default());
        Ok(out)
    }

    /// Unlabelled isomorphism test for small graphs.
    pub fn is_isomorphic(&self, other: &UGraph) -> Result<bool> {
        Ok(self.canonical_form()? == other.canonical_form()?)
    }

    // ---- serialization ----

    pub fn to_json_value(&self) -> GraphJson {
        GraphJson {
            vertices: self
                .vertices()
                .map(|v| VertexJson {
                    id: v,
                    label: self.label(v).map(str::to_string),
                })
                .collect(),
            edges: self.edges().iter().map(|e| [e.a(), e.b()]).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_json_value()).expect("graph serializes")
    }

    pub fn from_json_value(doc: &GraphJson) -> Result<UGraph> {
        let mut g = UGraph::new();
        for v in &doc.vertices {
            g.add_vertex_with_id(v.id)?;
            if let Some(l) = &v.label {
                g.set_label(v.id, l)?;
            }
        }
        for &[a, b] in &doc.edges {
            g.add_edge(a, b)?;
        }
        Ok(g)
    }

    pub fn from_json(text: &str) -> Result<UGraph> {
        let doc: GraphJson = serde_json::from_str(text)?;
        Self::from_json_value(&doc)
    }

    /// Graphviz rendering. Labelled vertices are drawn as boxes; `colour`
    /// may assign a fill colour per vertex.
    pub fn to_dot(&self, colour: &dyn Fn(VertexId) -> Option<&'static str>) -> String {
        let mut s =
            String::from("graph G {\n  node [shape=circle, style=filled, fillcolor=white];\n");
        for v in self.vertices() {
            let fill = colour(v).unwrap_or("white");
            match self.label(v) {
                Some(l) => s.push_str(&format!(
                    "  {v} [shape=box, label=\"{}\", fillcolor={fill}];\n",
                    l.replace('"', "\\\"")
                )),
                None => s.push_str(&format!(
                    "  {v} [label=\"\", width=0.15, fillcolor={fill}];\n"
                )),
            }
        }
        for e in self.edges() {
            s.push_str(&format!("  {} -- {};\n", e.a(), e.b()));
        }
        s.push_str("}\n");
        s
    }
}

fn canon_search(
    classes: &[Vec<usize>],
    ci: usize,
    order: &mut Vec<usize>,
    mat: &[Vec<u8>],
    best: &mut Option<Vec<u8>>,
) {
    if ci == classes.len() {
        let n = order.len();
        let mut code = Vec::with_capacity(n * (n - 1) / 2);
        for i in 0..n {
            for j in i + 1..n {
                code.push(mat[order[i]][order[j]]);
            }
        }
        if best.as_ref().is_none_or(|b| code > *b) {
            *best = Some(code);
        }
        return;
    }
    permute_class(classes, ci, &mut classes[ci].clone(), 0, order, mat, best);
}

fn permute_class(
    classes: &[Vec<usize>],
    ci: usize,
    items: &mut Vec<usize>,
    k: usize,
    order: &mut Vec<usize>,
    mat: &[Vec<u8>],
    best: &mut Option<Vec<u8>>,
) {
    if k == items.len() {
        let base = order.len();
        order.extend_from_slice(items);
        canon_search(classes, ci + 1, order, mat, best);
        order.truncate(base);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permute_class(classes, ci, items, k + 1, order, mat, best);
        items.swap(k, i);
    }
}

/// JSON graph document: `{"vertices": [{"id", "label"}], "edges": [[u, v]]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphJson {
    pub vertices: Vec<VertexJson>,
    pub edges: Vec<[VertexId; 2]>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexJson {
    pub id: VertexId,
    pub label: Option<String>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> UGraph {
        UGraph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap()
    }

    fn path(n: usize) -> UGraph {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        UGraph::from_edges(n, &edges).unwrap()
    }

    fn cycle(n: usize) -> UGraph {
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        UGraph::from_edges(n, &edges).unwrap()
    }

    fn complete(n: usize) -> UGraph {
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                edges.push((i, j));
            }
        }
        UGraph::from_edges(n, &edges).unwrap()
    }

    #[test]
    fn delete_edge_cases() {
        let p = triangle().delete_edge(Edge::new(0, 2)).unwrap();
        assert!(p.is_isomorphic(&path(3)).unwrap());

        let mut doubled = UGraph::from_edges(2, &[(0, 1), (0, 1)]).unwrap();
        doubled = doubled.delete_edge(Edge::new(0, 1)).unwrap();
        assert_eq!(doubled.multiplicity(0, 1), 1);

        let two_triangles =
            UGraph::from_edges(6, &[(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (2, 3)])
                .unwrap();
        let split = two_triangles.delete_edge(Edge::new(2, 3)).unwrap();
        assert_eq!(split.component_count(), 2);

        assert!(matches!(
            path(3).delete_edge(Edge::new(0, 2)),
            Err(Error::EdgeNotPresent(_))
        ));
    }

    #[test]
    fn contract_edge_cases() {
        let c = triangle().contract_edge(Edge::new(0, 1)).unwrap();
        assert_eq!(c.vertex_count(), 2);
        assert_eq!(c.edge_count(), 2);
        assert_eq!(c.multiplicity(0, 2), 2);

        let k4 = complete(4).contract_edge(Edge::new(0, 1)).unwrap();
        // K3 on {0,2,3} plus one parallel edge per former common neighbour pair
        assert_eq!(k4.vertex_count(), 3);
        assert_eq!(k4.edge_count(), 5);
        assert_eq!(k4.multiplicity(0, 2), 2);
        assert_eq!(k4.multiplicity(0, 3), 2);
        assert_eq!(k4.multiplicity(2, 3), 1);

        let pendant = path(3).contract_edge(Edge::new(1, 2)).unwrap();
        assert!(pendant.is_isomorphic(&path(2)).unwrap());
    }

    #[test]
    fn contract_keeps_label() {
        let mut g = path(2);
        g.set_label(1, "a").unwrap();
        let c = g.contract_edge(Edge::new(0, 1)).unwrap();
        assert_eq!(c.vertex_by_label("a"), Some(1));
        g.set_label(0, "b").unwrap();
        assert!(matches!(
            g.contract_edge(Edge::new(0, 1)),
            Err(Error::BothLabelled(_))
        ));
    }

    #[test]
    fn suppress_and_subdivide() {
        let s = path(3).suppress_degree2(1).unwrap();
        assert!(s.has_edge(0, 2));
        assert_eq!(s.vertex_count(), 2);

        let c4 = cycle(5).suppress_degree2(2).unwrap();
        assert!(c4.is_isomorphic(&cycle(4)).unwrap());

        assert!(matches!(
            complete(4).suppress_degree2(0),
            Err(Error::NotDegreeTwo { degree: 3, .. })
        ));

        let (p3, w) = path(2).subdivide_edge(Edge::new(0, 1)).unwrap();
        assert_eq!(p3.degree(w), 2);
        assert!(p3.is_isomorphic(&path(3)).unwrap());

        let (c, _) = triangle().subdivide_edge(Edge::new(0, 1)).unwrap();
        assert!(c.is_isomorphic(&cycle(4)).unwrap());
    }

    #[test]
    fn labelled_suppression_is_refused() {
        let mut g = path(3);
        g.set_label(1, "x").unwrap();
        assert!(matches!(
            g.suppress_degree2(1),
            Err(Error::LabelledVertex(1))
        ));
        let s = g.suppress_any_degree2(1).unwrap();
        assert_eq!(s.vertex_by_label("x"), None);
    }

    #[test]
    fn connectivity() {
        assert!(UGraph::new().is_connected());
        assert_eq!(UGraph::new().component_count(), 0);
        let two = UGraph::from_edges(6, &[(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]).unwrap();
        assert_eq!(two.connected_components().len(), 2);
        let mut iso = UGraph::with_vertices(3);
        iso.add_edge(0, 1).unwrap();
        assert_eq!(iso.component_count(), 2);
    }

    #[test]
    fn separators() {
        let p = path(3);
        assert!(p.is_separator(&[1].into_iter().collect()).unwrap());
        let c = cycle(5);
        for v in 0..5 {
            assert!(!c.is_separator(&[v].into_iter().collect()).unwrap());
        }
        assert!(c.is_separator(&[9].into_iter().collect()).is_err());
    }

    #[test]
    fn unique_triangle() {
        let mut g = triangle();
        let x = g.add_vertex();
        g.add_edge(0, x).unwrap();
        assert!(g.is_unique_triangle_graph());
        assert!(!complete(4).is_unique_triangle_graph());
        assert!(!cycle(4).is_unique_triangle_graph());
        // a triangle whose corners all have degree 3
        let mut t = triangle();
        for v in 0..3 {
            let w = t.add_vertex();
            t.add_edge(v, w).unwrap();
        }
        assert!(!t.is_unique_triangle_graph());
    }

    #[test]
    fn blocks() {
        let bow = UGraph::from_edges(5, &[(0, 1), (1, 2), (0, 2), (2, 3), (3, 4), (2, 4)]).unwrap();
        assert_eq!(bow.biconnected_components().len(), 2);
        let tree = path(5);
        let blocks = tree.biconnected_components();
        assert_eq!(blocks.len(), 4);
        assert!(blocks.iter().all(|b| b.edge_count() == 1));
        let par = UGraph::from_edges(3, &[(0, 1), (0, 1), (1, 2)]).unwrap();
        let mut sizes: Vec<usize> = par
            .biconnected_components()
            .iter()
            .map(|b| b.edge_count())
            .collect();
        sizes.sort();
        assert_eq!(sizes, vec![1, 2]);
    }

    #[test]
    fn canonical_forms() {
        let a = UGraph::from_edges(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let b = UGraph::from_edges(4, &[(2, 0), (0, 3), (3, 1)]).unwrap();
        assert!(a.is_isomorphic(&b).unwrap());
        let star = UGraph::from_edges(4, &[(0, 1), (0, 2), (0, 3)]).unwrap();
        assert!(!a.is_isomorphic(&star).unwrap());
        assert!(!cycle(6)
            .is_isomorphic(
                &UGraph::from_edges(6, &[(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)]).unwrap()
            )
            .unwrap());
    }

    #[test]
    fn json_round_trip() {
        let mut g = cycle(4);
        g.set_label(2, "t").unwrap();
        g.add_edge(0, 1).unwrap();
        let back = UGraph::from_json(&g.to_json()).unwrap();
        assert_eq!(back.edges(), g.edges());
        assert_eq!(back.vertex_by_label("t"), Some(2));
    }
}
