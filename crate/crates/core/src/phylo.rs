//! Unrooted binary phylogenetic trees and networks.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Edge, UGraph, VertexId, VertexSet};

pub type TaxonSet = BTreeSet<String>;

/// Anything built on a leaf-labelled graph: trees and networks.
pub trait Phylogeny {
    fn graph(&self) -> &UGraph;
    fn taxa(&self) -> &TaxonSet;

    fn leaf(&self, label: &str) -> Option<VertexId> {
        self.graph().vertex_by_label(label)
    }
}

/// Unrooted binary phylogenetic tree. Optionally admits unlabelled degree-2
/// "root" vertices, which some constructions need.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PhyloTree {
    graph: UGraph,
    taxa: TaxonSet,
}

impl Phylogeny for PhyloTree {
    fn graph(&self) -> &UGraph {
        &self.graph
    }

    fn taxa(&self) -> &TaxonSet {
        &self.taxa
    }
}

fn audit_leaves(g: &UGraph, allow_deg2: bool, what: fn(String) -> Error) -> Result<TaxonSet> {
    if g.vertex_count() == 0 {
        return Err(what("empty graph".into()));
    }
    if !g.is_connected() {
        return Err(what("disconnected".into()));
    }
    if !g.is_simple() {
        return Err(what("parallel edges".into()));
    }
    let single = g.vertex_count() == 1;
    for v in g.vertices() {
        let d = g.degree(v);
        match g.label(v) {
            Some(l) => {
                if l.is_empty() {
                    return Err(what("empty taxon label".into()));
                }
                if d != 1 && !single {
                    return Err(what(format!("taxon {l:?} has degree {d}")));
                }
            }
            None => {
                if single || !(d == 3 || allow_deg2 && d == 2) {
                    return Err(what(format!("unlabelled vertex {v} has degree {d}")));
                }
            }
        }
    }
    Ok(g.labels().values().cloned().collect())
}

impl PhyloTree {
    /// Validates a strict unrooted binary tree.
    pub fn new(graph: UGraph) -> Result<Self> {
        Self::validate(graph, false)
    }

    /// Like [`PhyloTree::new`], but unlabelled degree-2 vertices are allowed.
    pub fn with_roots(graph: UGraph) -> Result<Self> {
        Self::validate(graph, true)
    }

    fn validate(graph: UGraph, allow_roots: bool) -> Result<Self> {
        let taxa = audit_leaves(&graph, allow_roots, Error::InvalidTree)?;
        if graph.edge_count() + 1 != graph.vertex_count() {
            return Err(Error::InvalidTree("contains a cycle".into()));
        }
        Ok(PhyloTree { graph, taxa })
    }

    pub fn from_newick(text: &str) -> Result<Self> {
        crate::newick::parse_tree(text)
    }

    pub fn to_newick(&self) -> String {
        crate::newick::write_tree(self)
    }

    pub fn into_graph(self) -> UGraph {
        self.graph
    }

    /// The unique neighbour of a leaf.
    pub fn parent(&self, label: &str) -> Option<VertexId> {
        let v = self.leaf(label)?;
        self.graph.neighbours(v).next()
    }

    /// Unlabelled degree-2 vertices.
    pub fn roots(&self) -> Vec<VertexId> {
        self.graph
            .vertices()
            .filter(|&v| !self.graph.is_labelled(v) && self.graph.degree(v) == 2)
            .collect()
    }

    pub fn is_strict(&self) -> bool {
        self.roots().is_empty()
    }

    /// Suppresses all degree-2 roots.
    pub fn suppress_roots(&self) -> PhyloTree {
        let mut g = self.graph.clone();
        for r in self.roots() {
            g.suppress_in_place(r).expect("root has degree 2");
        }
        PhyloTree::new(g).expect("suppression keeps a valid tree")
    }

    /// Internal vertices.
    pub fn internal(&self) -> Vec<VertexId> {
        self.graph
            .vertices()
            .filter(|&v| !self.graph.is_labelled(v))
            .collect()
    }
}

impl fmt::Display for PhyloTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_newick())
    }
}

/// Unrooted binary phylogenetic network: simple, connected, labelled leaves of
/// degree 1, unlabelled internal vertices of degree 3.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PhyloNetwork {
    graph: UGraph,
    taxa: TaxonSet,
}

impl Phylogeny for PhyloNetwork {
    fn graph(&self) -> &UGraph {
        &self.graph
    }

    fn taxa(&self) -> &TaxonSet {
        &self.taxa
    }
}

impl PhyloNetwork {
    pub fn new(graph: UGraph) -> Result<Self> {
        let taxa = audit_leaves(&graph, false, Error::InvalidNetwork)?;
        Ok(PhyloNetwork { graph, taxa })
    }

    pub fn from_tree(t: &PhyloTree) -> Self {
        PhyloNetwork {
            graph: t.suppress_roots().graph,
            taxa: t.taxa.clone(),
        }
    }

    /// `r(N) = |E| - (|V| - 1)`.
    pub fn reticulation_number(&self) -> usize {
        self.graph.edge_count() + 1 - self.graph.vertex_count()
    }

    /// Maximum reticulation number over biconnected components.
    pub fn level(&self) -> usize {
        self.graph
            .biconnected_components()
            .iter()
            .map(|b| (b.edge_count() + 1).saturating_sub(b.vertex_count()))
            .max()
            .unwrap_or(0)
    }
}

pub(crate) fn check_same_taxa(a: &TaxonSet, b: &TaxonSet) -> Result<()> {
    if a == b {
        return Ok(());
    }
    Err(Error::TaxaMismatch {
        only_first: a.difference(b).cloned().collect(),
        only_second: b.difference(a).cloned().collect(),
    })
}

/// Deletes unlabelled vertices of degree at most 1 until none remain.
pub(crate) fn prune_unlabelled_leaves(g: &mut UGraph) {
    let mut queue: Vec<VertexId> = g.vertices().collect();
    while let Some(v) = queue.pop() {
        if !g.has_vertex(v) || g.is_labelled(v) || g.degree(v) > 1 || g.vertex_count() == 1 {
            continue;
        }
        let nbrs: Vec<VertexId> = g.neighbours(v).collect();
        g.remove_vertex(v).unwrap();
        queue.extend(nbrs);
    }
}

/// Suppresses unlabelled degree-2 vertices until none remain.
pub(crate) fn suppress_all_unlabelled(g: &mut UGraph) {
    let cands: Vec<VertexId> = g.vertices().collect();
    for v in cands {
        if g.has_vertex(v) && !g.is_labelled(v) && g.degree(v) == 2 {
            // a failure means both edges go to one neighbour; leave it
            let _ = g.suppress_in_place(v);
        }
    }
}

/// `T|Y`: the minimal subtree spanning `y`, degree-2 vertices suppressed.
pub fn restrict(t: &PhyloTree, y: &TaxonSet) -> Result<PhyloTree> {
    if y.is_empty() {
        return Err(Error::Invalid(
            "cannot restrict to an empty taxon set".into(),
        ));
    }
    if let Some(bad) = y.iter().find(|l| !t.taxa.contains(*l)) {
        return Err(Error::Invalid(format!("taxon {bad:?} is not in the tree")));
    }
    let mut g = t.graph.clone();
    let drop: Vec<VertexId> = g
        .labels()
        .iter()
        .filter(|(_, l)| !y.contains(*l))
        .map(|(&v, _)| v)
        .collect();
    for v in drop {
        g.clear_label(v);
    }
    prune_unlabelled_leaves(&mut g);
    suppress_all_unlabelled(&mut g);
    PhyloTree::new(g)
}

/// Canonical code of the subtree below `v` when entered from `parent`.
/// Labels are quoted so codes never collide across label choices.
pub(crate) fn subtree_code(g: &UGraph, v: VertexId, parent: Option<VertexId>) -> String {
    if let Some(l) = g.label(v) {
        if parent.is_some() || g.degree(v) == 0 {
            return crate::newick::quote_label(l);
        }
    }
    let mut parts: Vec<String> = g
        .neighbours(v)
        .filter(|&w| Some(w) != parent)
        .map(|w| subtree_code(g, w, Some(v)))
        .collect();
    parts.sort();
    match g.label(v) {
        Some(l) => format!("{}({})", crate::newick::quote_label(l), parts.join(",")),
        None => format!("({})", parts.join(",")),
    }
}

/// Label-anchored canonical string: equal iff label-preserving isomorphic.
pub fn canonical_string(t: &PhyloTree) -> String {
    let anchor = t.leaf(t.taxa.iter().next().unwrap()).unwrap();
    subtree_code(&t.graph, anchor, None)
}

/// True iff the trees are label-preserving isomorphic.
pub fn is_compatible(t1: &PhyloTree, t2: &PhyloTree) -> Result<bool> {
    check_same_taxa(&t1.taxa, &t2.taxa)?;
    Ok(canonical_string(t1) == canonical_string(t2))
}

/// A label-preserving isomorphism from `t1` to `t2`, if one exists.
pub fn tree_isomorphism(t1: &PhyloTree, t2: &PhyloTree) -> Option<BTreeMap<VertexId, VertexId>> {
    if t1.taxa != t2.taxa {
        return None;
    }
    let first = t1.taxa.iter().next()?;
    let (a, b) = (t1.leaf(first)?, t2.leaf(first)?);
    if subtree_code(&t1.graph, a, None) != subtree_code(&t2.graph, b, None) {
        return None;
    }
    let mut map = BTreeMap::new();
    let mut stack = vec![(a, None, b, None)];
    while let Some((v, pv, w, pw)) = stack.pop() {
        map.insert(v, w);
        let mut cv: Vec<(String, VertexId)> = t1
            .graph
            .neighbours(v)
            .filter(|&x| Some(x) != pv)
            .map(|x| (subtree_code(&t1.graph, x, Some(v)), x))
            .collect();
        let mut cw: Vec<(String, VertexId)> = t2
            .graph
            .neighbours(w)
            .filter(|&x| Some(x) != pw)
            .map(|x| (subtree_code(&t2.graph, x, Some(w)), x))
            .collect();
        cv.sort();
        cw.sort();
        for ((_, x), (_, y)) in cv.into_iter().zip(cw) {
            stack.push((x, Some(v), y, Some(w)));
        }
    }
    Some(map)
}

/// Quartet topology `ab|cd`, normalized within and between pairs.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Quartet {
    pub pair1: [String; 2],
    pub pair2: [String; 2],
}

impl Quartet {
    pub fn new(a: &str, b: &str, c: &str, d: &str) -> Self {
        let mut p1 = [a.to_string(), b.to_string()];
        let mut p2 = [c.to_string(), d.to_string()];
        p1.sort();
        p2.sort();
        if p2 < p1 {
            std::mem::swap(&mut p1, &mut p2);
        }
        Quartet {
            pair1: p1,
            pair2: p2,
        }
    }
}

impl fmt::Display for Quartet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{},{}|{},{}",
            self.pair1[0], self.pair1[1], self.pair2[0], self.pair2[1]
        )
    }
}

fn bfs_distances(g: &UGraph, s: VertexId) -> BTreeMap<VertexId, usize> {
    let mut dist = BTreeMap::from([(s, 0)]);
    let mut queue = VecDeque::from([s]);
    while let Some(v) = queue.pop_front() {
        let d = dist[&v];
        for w in g.neighbours(v) {
            if let std::collections::btree_map::Entry::Vacant(slot) = dist.entry(w) {
                slot.insert(d + 1);
                queue.push_back(w);
            }
        }
    }
    dist
}

/// Quartet topologies induced on every 4-subset of taxa (four-point condition
/// on leaf-to-leaf path lengths).
pub fn quartets(t: &PhyloTree) -> Result<BTreeSet<Quartet>> {
    let n = t.taxa.len();
    if n < 4 {
        return Err(Error::TooFewTaxa {
            needed: 4,
            found: n,
        });
    }
    let labels: Vec<&String> = t.taxa.iter().collect();
    let leaves: Vec<VertexId> = labels.iter().map(|l| t.leaf(l).unwrap()).collect();
    let dist: Vec<Vec<usize>> = leaves
        .iter()
        .map(|&s| {
            let d = bfs_distances(&t.graph, s);
            leaves.iter().map(|v| d[v]).collect()
        })
        .collect();
    let mut out = BTreeSet::new();
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                for d in c + 1..n {
                    let options = [
                        (dist[a][b] + dist[c][d], (a, b, c, d)),
                        (dist[a][c] + dist[b][d], (a, c, b, d)),
                        (dist[a][d] + dist[b][c], (a, d, b, c)),
                    ];
                    let (_, (w, x, y, z)) = options.iter().min_by_key(|o| o.0).unwrap();
                    out.insert(Quartet::new(labels[*w], labels[*x], labels[*y], labels[*z]));
                }
            }
        }
    }
    Ok(out)
}

/// Bipartition of the taxa; `left` always holds the smallest label.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Split {
    pub left: TaxonSet,
    pub right: TaxonSet,
}

impl Split {
    pub fn new(a: TaxonSet, b: TaxonSet) -> Result<Self> {
        if a.is_empty() || b.is_empty() || !a.is_disjoint(&b) {
            return Err(Error::NotAPartition(
                "split sides must be non-empty and disjoint".into(),
            ));
        }
        if a.iter().next() < b.iter().next() {
            Ok(Split { left: a, right: b })
        } else {
            Ok(Split { left: b, right: a })
        }
    }

    /// Parses `"a,b|c,d"`.
    pub fn parse(text: &str) -> Result<Self> {
        let (l, r) = text
            .split_once('|')
            .ok_or_else(|| Error::Invalid(format!("split {text:?} lacks '|'")))?;
        let side = |s: &str| -> TaxonSet {
            s.split(',')
                .map(str::trim)
                .filter(|x| !x.is_empty())
                .map(String::from)
                .collect()
        };
        Split::new(side(l), side(r))
    }

    pub fn is_trivial(&self) -> bool {
        self.left.len() < 2 || self.right.len() < 2
    }

    pub fn all_taxa(&self) -> TaxonSet {
        self.left.union(&self.right).cloned().collect()
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let l: Vec<&str> = self.left.iter().map(String::as_str).collect();
        let r: Vec<&str> = self.right.iter().map(String::as_str).collect();
        write!(f, "{}|{}", l.join(","), r.join(","))
    }
}

/// Taxa on the side of `e` containing `side`, after deleting `e`.
pub fn taxa_beyond(t: &PhyloTree, e: Edge, side: VertexId) -> TaxonSet {
    let mut seen = BTreeSet::from([side, e.other(side)]);
    let mut stack = vec![side];
    let mut out = TaxonSet::new();
    while let Some(v) = stack.pop() {
        if let Some(l) = t.graph.label(v) {
            out.insert(l.to_string());
        }
        for w in t.graph.neighbours(v) {
            if seen.insert(w) {
                stack.push(w);
            }
        }
    }
    out
}

/// Every edge-induced split of `t` (trivial ones included) with its edge.
pub fn tree_splits(t: &PhyloTree) -> Vec<(Split, Edge)> {
    t.graph
        .simple_edges()
        .into_iter()
        .filter_map(|e| {
            let a = taxa_beyond(t, e, e.a());
            let b = taxa_beyond(t, e, e.b());
            Split::new(a, b).ok().map(|s| (s, e))
        })
        .collect()
}

/// A non-trivial split realised by edge `e1` in the first tree and `e2` in
/// the second.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommonSplit {
    pub split: Split,
    pub e1: Edge,
    pub e2: Edge,
}

pub fn common_splits(t1: &PhyloTree, t2: &PhyloTree) -> Result<Vec<CommonSplit>> {
    check_same_taxa(&t1.taxa, &t2.taxa)?;
    let second: BTreeMap<Split, Edge> = tree_splits(t2)
        .into_iter()
        .filter(|(s, _)| !s.is_trivial())
        .collect();
    let mut out: Vec<CommonSplit> = tree_splits(t1)
        .into_iter()
        .filter(|(s, _)| !s.is_trivial())
        .filter_map(|(s, e1)| second.get(&s).map(|&e2| CommonSplit { split: s, e1, e2 }))
        .collect();
    out.sort_by(|a, b| a.split.cmp(&b.split));
    out.dedup_by(|a, b| a.split == b.split);
    Ok(out)
}

/// Common chain: taxa `x1..xt` whose parents are pairwise distinct and form a
/// path, in this order, in both trees.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chain {
    pub taxa: Vec<String>,
    pub parents1: Vec<VertexId>,
    pub parents2: Vec<VertexId>,
}

impl Chain {
    pub fn len(&self) -> usize {
        self.taxa.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taxa.is_empty()
    }

    /// Re-derives the parents from the trees and checks the chain conditions.
    pub fn from_taxa(t1: &PhyloTree, t2: &PhyloTree, taxa: &[String]) -> Result<Chain> {
        let parents = |t: &PhyloTree| -> Result<Vec<VertexId>> {
            let ps: Vec<VertexId> = taxa
                .iter()
                .map(|x| {
                    t.parent(x)
                        .ok_or_else(|| Error::NotCommonChain(format!("unknown taxon {x:?}")))
                })
                .collect::<Result<_>>()?;
            if ps.iter().collect::<BTreeSet<_>>().len() != ps.len() {
                return Err(Error::NotCommonChain("parents are not distinct".into()));
            }
            if ps.windows(2).any(|w| !t.graph.has_edge(w[0], w[1])) {
                return Err(Error::NotCommonChain("parents do not form a path".into()));
            }
            Ok(ps)
        };
        Ok(Chain {
            taxa: taxa.to_vec(),
            parents1: parents(t1)?,
            parents2: parents(t2)?,
        })
    }
}

impl fmt::Display for Chain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.taxa.join(","))
    }
}

/// Taxa whose parent is adjacent to no other leaf, i.e. not part of a cherry.
fn chain_eligible(t: &PhyloTree) -> BTreeSet<String> {
    t.taxa
        .iter()
        .filter(|x| {
            let p = t.parent(x).unwrap();
            !t.graph.is_labelled(p)
                && t.graph
                    .neighbours(p)
                    .filter(|&w| t.graph.is_labelled(w))
                    .count()
                    == 1
        })
        .cloned()
        .collect()
}

/// All maximal common chains with at least three taxa. Chain taxa never sit
/// in a cherry of either tree.
pub fn find_common_chains(t1: &PhyloTree, t2: &PhyloTree) -> Result<Vec<Chain>> {
    check_same_taxa(&t1.taxa, &t2.taxa)?;
    let eligible: BTreeSet<String> = chain_eligible(t1)
        .intersection(&chain_eligible(t2))
        .cloned()
        .collect();
    let adjacent = |t: &PhyloTree, x: &str, y: &str| {
        t.graph.has_edge(t.parent(x).unwrap(), t.parent(y).unwrap())
    };
    let mut nbrs: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for x in &eligible {
        for y in &eligible {
            if x != y && adjacent(t1, x, y) && adjacent(t2, x, y) {
                nbrs.entry(x.as_str()).or_default().push(y.as_str());
            }
        }
    }
    // each parent has one leaf, so the common adjacency has degree <= 2 and,
    // inside a tree, no cycles: components are paths
    let mut seen: BTreeSet<&str> = BTreeSet::new();
    let mut out = Vec::new();
    for x in &eligible {
        let x = x.as_str();
        if seen.contains(x) || nbrs.get(x).map_or(0, Vec::len) > 1 {
            continue;
        }
        let mut path = vec![x];
        seen.insert(x);
        let mut cur = x;
        while let Some(&next) = nbrs
            .get(cur)
            .and_then(|ns| ns.iter().find(|n| !seen.contains(*n)))
        {
            seen.insert(next);
            path.push(next);
            cur = next;
        }
        if path.len() >= 3 {
            if path.last() < path.first() {
                path.reverse();
            }
            let taxa: Vec<String> = path.into_iter().map(String::from).collect();
            out.push(Chain::from_taxa(t1, t2, &taxa)?);
        }
    }
    out.sort_by(|a, b| a.taxa.cmp(&b.taxa));
    Ok(out)
}

/// Subdivides `e` (an edge of the original tree, possibly merged into `merged`
/// after suppressing `gone`) and returns the new vertex.
fn resolve_attach(
    g: &mut UGraph,
    attach: Edge,
    gone: VertexId,
    merged: Option<Edge>,
) -> Result<VertexId> {
    let target = if attach.contains(gone) {
        merged.ok_or(Error::EdgeNotPresent(attach))?
    } else {
        attach
    };
    g.subdivide_in_place(target)
}

/// One TBR move. `cut` is deleted; `attach1` names an edge of the side that
/// contains `cut.a()`, `attach2` an edge of the side containing `cut.b()`.
/// Edges incident to a cut endpoint stand for the edge created when that
/// endpoint is suppressed. A side that is a single leaf takes `None` and is
/// reattached at the leaf itself.
pub fn tbr_move(
    t: &PhyloTree,
    cut: Edge,
    attach1: Option<Edge>,
    attach2: Option<Edge>,
) -> Result<PhyloTree> {
    let g0 = &t.suppress_roots().graph;
    if !g0.has_edge(cut.a(), cut.b()) {
        return Err(Error::EdgeNotPresent(cut));
    }
    let mut g = g0.delete_edge(cut)?;
    let comps = g.connected_components();
    let side = |v: VertexId| comps.iter().position(|c| c.contains(v)).unwrap();
    let mut ends = Vec::new();
    for (p, attach) in [(cut.a(), attach1), (cut.b(), attach2)] {
        let is_leaf = g.is_labelled(p);
        match (is_leaf, attach) {
            (true, None) => ends.push(p),
            (true, Some(e)) => {
                return Err(Error::Invalid(format!(
                    "side of {p} is a single leaf; cannot attach at {e}"
                )))
            }
            (false, None) => {
                return Err(Error::Invalid(format!(
                    "side of {p} needs an attachment edge"
                )))
            }
            (false, Some(e)) => {
                if !g0.has_edge(e.a(), e.b()) || e == cut {
                    return Err(Error::EdgeNotPresent(e));
                }
                if side(e.a()) != side(p) {
                    return Err(Error::Invalid(format!(
                        "attachment edge {e} is on the wrong side of the cut"
                    )));
                }
                let merged = g.suppress_in_place(p)?;
                ends.push(resolve_attach(&mut g, e, p, Some(merged))?);
            }
        }
    }
    g.add_edge(ends[0], ends[1])?;
    PhyloTree::new(g)
}

/// Original-tree edges on the side of `cut` containing `p`, one per distinct
/// attachment point after suppressing `p`.
fn attach_candidates(g: &UGraph, cut: Edge, p: VertexId) -> Vec<Option<Edge>> {
    if g.is_labelled(p) {
        return vec![None];
    }
    let h = g.delete_edge(cut).expect("cut is an edge");
    let comp = h
        .connected_components()
        .into_iter()
        .find(|c| c.contains(p))
        .unwrap();
    // the two edges at p merge into one when p is suppressed
    let twin = h.neighbours(p).nth(1).map(|w| Edge::new(p, w));
    h.simple_edges()
        .into_iter()
        .filter(|e| comp.contains(e.a()) && Some(*e) != twin)
        .map(Some)
        .collect()
}

/// All trees one TBR move away from `t`, excluding `t`, up to label-preserving
/// isomorphism, sorted by canonical string.
pub fn tbr_unit_ball(t: &PhyloTree) -> Result<Vec<PhyloTree>> {
    let n = t.taxa.len();
    if n < 4 {
        return Err(Error::TooFewTaxa {
            needed: 4,
            found: n,
        });
    }
    let base = t.suppress_roots();
    let own = canonical_string(&base);
    let mut found: BTreeMap<String, PhyloTree> = BTreeMap::new();
    for cut in base.graph.simple_edges() {
        let a1 = attach_candidates(&base.graph, cut, cut.a());
        let a2 = attach_candidates(&base.graph, cut, cut.b());
        for &x in &a1 {
            for &y in &a2 {
                let u = tbr_move(&base, cut, x, y)?;
                let code = canonical_string(&u);
                if code != own {
                    found.entry(code).or_insert(u);
                }
            }
        }
    }
    Ok(found.into_values().collect())
}

/// Default taxon names `x1..xn`.
pub fn taxon_names(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("x{i}")).collect()
}

/// Random tree by sequential attachment: each new leaf subdivides a uniformly
/// chosen edge.
pub fn random_tree_with<R: Rng>(taxa: &[String], rng: &mut R) -> Result<PhyloTree> {
    if taxa.len() < 2 {
        return Err(Error::TooFewTaxa {
            needed: 2,
            found: taxa.len(),
        });
    }
    let mut g = UGraph::new();
    let a = g.add_labelled_vertex(&taxa[0])?;
    let b = g.add_labelled_vertex(&taxa[1])?;
    g.add_edge(a, b)?;
    for x in &taxa[2..] {
        let edges = g.edges();
        let e = edges[rng.gen_range(0..edges.len())];
        let w = g.subdivide_in_place(e)?;
        let leaf = g.add_labelled_vertex(x)?;
        g.add_edge(w, leaf)?;
    }
    PhyloTree::new(g)
}

pub fn random_tree(taxa: &[String], seed: u64) -> Result<PhyloTree> {
    random_tree_with(taxa, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Random tree plus `r` extra edges, each joining subdivisions of two
/// distinct current edges.
pub fn random_network_with<R: Rng>(taxa: &[String], r: usize, rng: &mut R) -> Result<PhyloNetwork> {
    let mut g = random_tree_with(taxa, rng)?.graph;
    for _ in 0..r {
        let edges = g.edges();
        let mut pick: Vec<&Edge> = edges.choose_multiple(rng, 2).collect();
        pick.sort();
        let s1 = g.subdivide_in_place(*pick[0])?;
        let s2 = g.subdivide_in_place(*pick[1])?;
        g.add_edge(s1, s2)?;
    }
    PhyloNetwork::new(g)
}

pub fn random_network(taxa: &[String], r: usize, seed: u64) -> Result<PhyloNetwork> {
    random_network_with(taxa, r, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Every unrooted binary topology on `taxa` ((2n-5)!! of them), by inserting
/// leaves one at a time into every edge.
pub fn all_topologies(taxa: &[String]) -> Result<Vec<PhyloTree>> {
    if taxa.len() < 3 {
        return Err(Error::TooFewTaxa {
            needed: 3,
            found: taxa.len(),
        });
    }
    if taxa.len() > 9 {
        return Err(Error::SizeLimit {
            what: "topology enumeration taxa",
            limit: 9,
            actual: taxa.len(),
        });
    }
    let mut g = UGraph::new();
    let c = g.add_vertex();
    for x in &taxa[..3] {
        let v = g.add_labelled_vertex(x)?;
        g.add_edge(c, v)?;
    }
    let mut level = vec![g];
    for x in &taxa[3..] {
        let mut next = Vec::new();
        for g in &level {
            for e in g.edges() {
                let mut h = g.clone();
                let w = h.subdivide_in_place(e)?;
                let leaf = h.add_labelled_vertex(x)?;
                h.add_edge(w, leaf)?;
                next.push(h);
            }
        }
        level = next;
    }
    level.into_iter().map(PhyloTree::new).collect()
}

/// Caterpillar on `taxa` in order: `((x1,x2),x3,...,(x_{n-1},x_n))`.
pub fn caterpillar(taxa: &[String]) -> Result<PhyloTree> {
    let n = taxa.len();
    if n < 2 {
        return Err(Error::TooFewTaxa {
            needed: 2,
            found: n,
        });
    }
    let mut g = UGraph::new();
    let leaves: Vec<VertexId> = taxa
        .iter()
        .map(|x| g.add_labelled_vertex(x))
        .collect::<Result<_>>()?;
    if n == 2 {
        g.add_edge(leaves[0], leaves[1])?;
        return PhyloTree::new(g);
    }
    let spine: Vec<VertexId> = (0..n - 2).map(|_| g.add_vertex()).collect();
    for w in spine.windows(2) {
        g.add_edge(w[0], w[1])?;
    }
    g.add_edge(spine[0], leaves[0])?;
    for i in 1..n - 1 {
        g.add_edge(spine[i - 1], leaves[i])?;
    }
    g.add_edge(spine[n - 3], leaves[n - 1])?;
    PhyloTree::new(g)
}

/// Vertex set of the minimal subtree of `t` spanning the taxa `y`.
pub fn spanning_subtree(t: &PhyloTree, y: &TaxonSet) -> VertexSet {
    let mut g = t.graph.clone();
    let drop: Vec<VertexId> = g
        .labels()
        .iter()
        .filter(|(_, l)| !y.contains(*l))
        .map(|(&v, _)| v)
        .collect();
    for v in drop {
        g.clear_label(v);
    }
    prune_unlabelled_leaves(&mut g);
    g.vertices().collect()
}
