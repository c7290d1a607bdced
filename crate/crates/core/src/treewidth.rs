//! Treewidth: exact computation with certificates, bounds, recognisers for
//! small widths and decomposition validation.
//!
//! The engine first applies the simplicial and almost-simplicial elimination
//! rules (which subsume the islet, twig, series and triangle rules), then
//! handles each remaining component with lower bounds (degeneracy, minor-min-width
//! style contraction bounds), greedy upper bounds (min-fill, min-degree) and,
//! when they differ, a subset dynamic program over elimination orderings or a
//! branch-and-bound search over elimination prefixes.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::time::{Duration, Instant};

use fixedbitset::FixedBitSet;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Edge, UGraph, VertexId, VertexSet};

/// Bags plus a tree on bag indices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeDecomposition {
    pub bags: Vec<VertexSet>,
    pub tree: Vec<[usize; 2]>,
    pub width: usize,
}

/// First violated decomposition property, with a witness.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    NotATree,
    UnknownVertex(VertexId),
    /// (tw1)
    MissingVertex(VertexId),
    /// (tw2)
    UncoveredEdge(Edge),
    /// (tw3)
    Disconnected(VertexId),
    WrongWidth {
        claimed: usize,
        actual: usize,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NotATree => write!(f, "bag graph is not a tree"),
            Violation::UnknownVertex(v) => {
                write!(f, "bag contains vertex {v} which is not in the graph")
            }
            Violation::MissingVertex(v) => write!(f, "(tw1) vertex {v} is in no bag"),
            Violation::UncoveredEdge(e) => write!(f, "(tw2) edge {e} is in no bag"),
            Violation::Disconnected(v) => write!(f, "(tw3) bags containing {v} are not connected"),
            Violation::WrongWidth { claimed, actual } => {
                write!(f, "width is {actual}, not {claimed}")
            }
        }
    }
}

fn width_of(bags: &[VertexSet]) -> usize {
    bags.iter()
        .map(|b| b.len())
        .max()
        .unwrap_or(1)
        .saturating_sub(1)
}

fn find(parent: &mut [usize], x: usize) -> usize {
    let mut r = x;
    while parent[r] != r {
        r = parent[r];
    }
    let mut y = x;
    while parent[y] != r {
        let next = parent[y];
        parent[y] = r;
        y = next;
    }
    r
}

impl TreeDecomposition {
    pub fn new(bags: Vec<VertexSet>, tree: Vec<[usize; 2]>) -> Self {
        let width = width_of(&bags);
        TreeDecomposition { bags, tree, width }
    }

    /// One bag holding every vertex.
    pub fn trivial(g: &UGraph) -> Self {
        if g.vertex_count() == 0 {
            return Self::new(Vec::new(), Vec::new());
        }
        Self::new(vec![g.vertices().collect()], Vec::new())
    }

    /// Decomposition induced by eliminating vertices in `order`: bag of `v` is
    /// `v` plus its later neighbours in the filled graph, attached to the bag of
    /// the earliest-eliminated of those neighbours.
    pub fn from_elimination_order(g: &UGraph, order: &[VertexId]) -> Result<Self> {
        let n = g.vertex_count();
        let pos: BTreeMap<VertexId, usize> =
            order.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        if order.len() != n || pos.len() != n || order.iter().any(|&v| !g.has_vertex(v)) {
            return Err(Error::Invalid(
                "elimination order is not a permutation of the vertices".into(),
            ));
        }
        let mut adj: BTreeMap<VertexId, BTreeSet<VertexId>> = g
            .vertices()
            .map(|v| (v, g.neighbours(v).collect()))
            .collect();
        let mut bags = Vec::with_capacity(n);
        let mut parent: Vec<Option<usize>> = Vec::with_capacity(n);
        for &v in order {
            let later: Vec<VertexId> = adj[&v]
                .iter()
                .copied()
                .filter(|w| pos[w] > pos[&v])
                .collect();
            for (i, &a) in later.iter().enumerate() {
                for &b in &later[i + 1..] {
                    adj.get_mut(&a).unwrap().insert(b);
                    adj.get_mut(&b).unwrap().insert(a);
                }
            }
            parent.push(later.iter().map(|w| pos[w]).min());
            let mut bag: VertexSet = later.into_iter().collect();
            bag.insert(v);
            bags.push(bag);
        }
        let mut tree = Vec::new();
        let mut last_root: Option<usize> = None;
        for (i, p) in parent.iter().enumerate() {
            match p {
                Some(p) => tree.push([i, *p]),
                None => {
                    if let Some(r) = last_root {
                        tree.push([r, i]);
                    }
                    last_root = Some(i);
                }
            }
        }
        Ok(Self::new(bags, tree))
    }

    /// Contracts tree edges whose bags are nested until no bag is a subset
    /// of another adjacent bag (and hence of any other bag).
    pub fn make_small(&self) -> Self {
        let mut bags: Vec<Option<VertexSet>> = self.bags.iter().cloned().map(Some).collect();
        let mut nbrs: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); bags.len()];
        for &[a, b] in &self.tree {
            nbrs[a].insert(b);
            nbrs[b].insert(a);
        }
        loop {
            let mut merged = false;
            for i in 0..bags.len() {
                let Some(bi) = bags[i].clone() else { continue };
                let target = nbrs[i]
                    .iter()
                    .copied()
                    .find(|&j| bags[j].as_ref().is_some_and(|bj| bi.is_subset(bj)));
                if let Some(j) = target {
                    // fold i into j
                    let moved: Vec<usize> = nbrs[i].iter().copied().filter(|&k| k != j).collect();
                    for k in moved {
                        nbrs[k].remove(&i);
                        nbrs[k].insert(j);
                        nbrs[j].insert(k);
                    }
                    nbrs[j].remove(&i);
                    nbrs[i].clear();
                    bags[i] = None;
                    merged = true;
                }
            }
            if !merged {
                break;
            }
        }
        let keep: Vec<usize> = (0..bags.len()).filter(|&i| bags[i].is_some()).collect();
        let index: BTreeMap<usize, usize> = keep.iter().enumerate().map(|(k, &i)| (i, k)).collect();
        let mut tree = Vec::new();
        for &i in &keep {
            for &j in &nbrs[i] {
                if i < j {
                    tree.push([index[&i], index[&j]]);
                }
            }
        }
        let bags: Vec<VertexSet> = keep.into_iter().map(|i| bags[i].take().unwrap()).collect();
        Self::new(bags, tree)
    }

    /// True iff no bag is a subset of another.
    pub fn is_small(&self) -> bool {
        for (i, a) in self.bags.iter().enumerate() {
            for (j, b) in self.bags.iter().enumerate() {
                if i != j && a.is_subset(b) {
                    return false;
                }
            }
        }
        true
    }

    /// Renames vertices; bags keep their structure.
    pub fn map_vertices(&self, f: impl Fn(VertexId) -> VertexId) -> Self {
        let bags = self
            .bags
            .iter()
            .map(|b| b.iter().map(&f).collect())
            .collect();
        Self::new(bags, self.tree.clone())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("decomposition serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Checks (tw1)-(tw3), that the bag graph is a tree and the stated width.
pub fn validate(d: &TreeDecomposition, g: &UGraph) -> std::result::Result<(), Violation> {
    let k = d.bags.len();
    if k == 0 {
        return match g.vertices().next() {
            Some(v) => Err(Violation::MissingVertex(v)),
            None => Ok(()),
        };
    }
    if d.tree.len() + 1 != k || d.tree.iter().any(|&[a, b]| a >= k || b >= k || a == b) {
        return Err(Violation::NotATree);
    }
    let mut uf: Vec<usize> = (0..k).collect();
    for &[a, b] in &d.tree {
        let (ra, rb) = (find(&mut uf, a), find(&mut uf, b));
        if ra == rb {
            return Err(Violation::NotATree);
        }
        uf[ra] = rb;
    }
    let mut holders: BTreeMap<VertexId, Vec<usize>> = BTreeMap::new();
    for (i, bag) in d.bags.iter().enumerate() {
        for v in bag.iter() {
            if !g.has_vertex(v) {
                return Err(Violation::UnknownVertex(v));
            }
            holders.entry(v).or_default().push(i);
        }
    }
    for v in g.vertices() {
        if !holders.contains_key(&v) {
            return Err(Violation::MissingVertex(v));
        }
    }
    for e in g.simple_edges() {
        if !d
            .bags
            .iter()
            .any(|b| b.contains(e.a()) && b.contains(e.b()))
        {
            return Err(Violation::UncoveredEdge(e));
        }
    }
    for (&v, hs) in &holders {
        let inside = d
            .tree
            .iter()
            .filter(|&&[a, b]| d.bags[a].contains(v) && d.bags[b].contains(v))
            .count();
        if inside + 1 != hs.len() {
            return Err(Violation::Disconnected(v));
        }
    }
    let actual = width_of(&d.bags);
    if actual != d.width {
        return Err(Violation::WrongWidth {
            claimed: d.width,
            actual,
        });
    }
    Ok(())
}

pub fn is_valid(d: &TreeDecomposition, g: &UGraph) -> bool {
    validate(d, g).is_ok()
}

/// Outcome of a treewidth computation.
#[derive(Clone, Debug, Serialize)]
pub struct TwResult {
    pub lower: usize,
    pub upper: usize,
    pub exact: bool,
    pub decomposition: TreeDecomposition,
}

impl TwResult {
    /// The treewidth if the bounds met.
    pub fn value(&self) -> Result<usize> {
        if self.exact {
            Ok(self.upper)
        } else {
            Err(Error::Inexact {
                lower: self.lower,
                upper: self.upper,
            })
        }
    }
}

pub const DEFAULT_EXACT_LIMIT: usize = 24;

/// Knobs for [`bounded_treewidth`].
#[derive(Clone, Debug)]
pub struct TwOptions {
    /// Largest reduced component handled by the subset dynamic program.
    pub exact_limit: usize,
    /// Branch-and-bound node budget per component.
    pub node_budget: u64,
    pub time_budget: Option<Duration>,
    /// Candidate decomposition; validated before use.
    pub hint: Option<TreeDecomposition>,
    /// A lower bound known to the caller.
    pub known_lower: usize,
}

impl Default for TwOptions {
    fn default() -> Self {
        TwOptions {
            exact_limit: DEFAULT_EXACT_LIMIT,
            node_budget: 200_000,
            time_budget: None,
            hint: None,
            known_lower: 0,
        }
    }
}

// ---- dense working graph ----

#[derive(Clone)]
struct Work {
    adj: Vec<FixedBitSet>,
    alive: FixedBitSet,
}

impl Work {
    fn from_graph(g: &UGraph) -> (Work, Vec<VertexId>) {
        let ids: Vec<VertexId> = g.vertices().collect();
        let index: HashMap<VertexId, usize> =
            ids.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let n = ids.len();
        let mut adj = vec![FixedBitSet::with_capacity(n); n];
        for e in g.simple_edges() {
            let (a, b) = (index[&e.a()], index[&e.b()]);
            adj[a].insert(b);
            adj[b].insert(a);
        }
        let mut alive = FixedBitSet::with_capacity(n);
        alive.insert_range(..);
        (Work { adj, alive }, ids)
    }

    fn restricted(&self, keep: &FixedBitSet) -> Work {
        let mut w = self.clone();
        w.alive = keep.clone();
        for v in 0..w.adj.len() {
            if keep.contains(v) {
                w.adj[v].intersect_with(keep);
            } else {
                w.adj[v].clear();
            }
        }
        w
    }

    fn alive_count(&self) -> usize {
        self.alive.count_ones(..)
    }

    fn degree(&self, v: usize) -> usize {
        self.adj[v].count_ones(..)
    }

    fn fill_in(&self, v: usize) -> usize {
        let nb: Vec<usize> = self.adj[v].ones().collect();
        let mut missing = 0;
        for (i, &a) in nb.iter().enumerate() {
            for &b in &nb[i + 1..] {
                if !self.adj[a].contains(b) {
                    missing += 1;
                }
            }
        }
        missing
    }

    fn is_clique_without(&self, v: usize, skip: Option<usize>) -> bool {
        let nb: Vec<usize> = self.adj[v].ones().filter(|&x| Some(x) != skip).collect();
        for (i, &a) in nb.iter().enumerate() {
            for &b in &nb[i + 1..] {
                if !self.adj[a].contains(b) {
                    return false;
                }
            }
        }
        true
    }

    fn is_simplicial(&self, v: usize) -> bool {
        self.is_clique_without(v, None)
    }

    fn is_almost_simplicial(&self, v: usize) -> bool {
        self.adj[v]
            .ones()
            .any(|u| self.is_clique_without(v, Some(u)))
    }

    fn eliminate(&mut self, v: usize) {
        let nb = self.adj[v].clone();
        for a in nb.ones() {
            self.adj[a].union_with(&nb);
            self.adj[a].set(a, false);
            self.adj[a].set(v, false);
        }
        self.adj[v].clear();
        self.alive.set(v, false);
    }

    fn remove(&mut self, v: usize) {
        for a in self.adj[v].clone().ones() {
            self.adj[a].set(v, false);
        }
        self.adj[v].clear();
        self.alive.set(v, false);
    }

    /// Contracts `v` into `u`.
    fn contract(&mut self, v: usize, u: usize) {
        let nb = self.adj[v].clone();
        for w in nb.ones() {
            self.adj[w].set(v, false);
            if w != u {
                self.adj[w].insert(u);
                self.adj[u].insert(w);
            }
        }
        self.adj[v].clear();
        self.alive.set(v, false);
    }

    fn min_degree_vertex(&self) -> Option<usize> {
        self.alive.ones().min_by_key(|&v| (self.degree(v), v))
    }

    fn components(&self) -> Vec<FixedBitSet> {
        let n = self.adj.len();
        let mut seen = FixedBitSet::with_capacity(n);
        let mut out = Vec::new();
        for s in self.alive.ones() {
            if seen.contains(s) {
                continue;
            }
            let mut comp = FixedBitSet::with_capacity(n);
            let mut stack = vec![s];
            seen.insert(s);
            while let Some(v) = stack.pop() {
                comp.insert(v);
                for w in self.adj[v].ones() {
                    if !seen.contains(w) {
                        seen.insert(w);
                        stack.push(w);
                    }
                }
            }
            out.push(comp);
        }
        out
    }
}

fn degeneracy_of(w: &Work) -> usize {
    let mut w = w.clone();
    let mut best = 0;
    while let Some(v) = w.min_degree_vertex() {
        best = best.max(w.degree(v));
        w.remove(v);
    }
    best
}

/// Contraction lower bound: repeatedly contract a minimum-degree vertex into a
/// neighbour chosen by `pick`; the largest minimum degree seen is a lower bound.
fn contraction_bound(w: &Work, least_common: bool) -> usize {
    let mut w = w.clone();
    let mut best = 0;
    while let Some(v) = w.min_degree_vertex() {
        let d = w.degree(v);
        best = best.max(d);
        if d == 0 {
            w.remove(v);
            continue;
        }
        let u = w.adj[v]
            .ones()
            .min_by_key(|&u| {
                let key = if least_common {
                    let mut common = w.adj[u].clone();
                    common.intersect_with(&w.adj[v]);
                    common.count_ones(..)
                } else {
                    w.degree(u)
                };
                (key, u)
            })
            .unwrap();
        w.contract(v, u);
    }
    best
}

fn lower_bound_work(w: &Work) -> usize {
    degeneracy_of(w)
        .max(contraction_bound(w, false))
        .max(contraction_bound(w, true))
}

#[derive(Clone, Copy)]
enum Greedy {
    MinDegree,
    MinFill,
}

fn greedy_order(w: &Work, rule: Greedy) -> (usize, Vec<usize>) {
    let mut w = w.clone();
    let mut order = Vec::new();
    let mut width = 0;
    while w.alive.count_ones(..) > 0 {
        let v = match rule {
            Greedy::MinDegree => w.min_degree_vertex().unwrap(),
            Greedy::MinFill => w
                .alive
                .ones()
                .min_by_key(|&v| (w.fill_in(v), w.degree(v), v))
                .unwrap(),
        };
        width = width.max(w.degree(v));
        w.eliminate(v);
        order.push(v);
    }
    (width, order)
}

fn upper_bound_work(w: &Work) -> (usize, Vec<usize>) {
    let a = greedy_order(w, Greedy::MinFill);
    let b = greedy_order(w, Greedy::MinDegree);
    if b.0 < a.0 {
        b
    } else {
        a
    }
}

/// Degeneracy lower bound.
pub fn degeneracy(g: &UGraph) -> usize {
    degeneracy_of(&Work::from_graph(g).0)
}

/// Best of the degeneracy and the two contraction lower bounds.
pub fn lower_bound(g: &UGraph) -> usize {
    lower_bound_work(&Work::from_graph(g).0)
}

/// Best of min-fill and min-degree elimination: width and ordering.
pub fn upper_bound(g: &UGraph) -> (usize, Vec<VertexId>) {
    let (w, ids) = Work::from_graph(g);
    let (width, order) = upper_bound_work(&w);
    (width, order.into_iter().map(|i| ids[i]).collect())
}

// ---- subset dynamic program ----

/// Vertices outside `s` reachable from `v` through `s`: the degree `v` has when
/// eliminated right after the set `s`.
fn q_size(adj: &[u64], s: u64, v: usize) -> u32 {
    let mut visited = 1u64 << v;
    let mut frontier = 1u64 << v;
    let mut out = 0u64;
    while frontier != 0 {
        let x = frontier.trailing_zeros() as usize;
        frontier &= frontier - 1;
        let nb = adj[x] & !visited;
        visited |= nb;
        out |= nb & !s;
        frontier |= nb & s;
    }
    out.count_ones()
}

/// Elimination ordering of width at most `k`, if one exists.
fn dp_decide(adj: &[u64], k: usize) -> Option<Vec<usize>> {
    let n = adj.len();
    let finish = |s: u64, parent: &HashMap<u64, u8>| -> Vec<usize> {
        let mut order = Vec::new();
        let mut cur = s;
        while cur != 0 {
            let v = parent[&cur] as usize;
            order.push(v);
            cur &= !(1u64 << v);
        }
        order.reverse();
        order.extend((0..n).filter(|&v| s & (1u64 << v) == 0));
        order
    };
    let mut parent: HashMap<u64, u8> = HashMap::new();
    if n <= k + 1 {
        return Some(finish(0, &parent));
    }
    let mut layer = vec![0u64];
    for _ in 0..n {
        let mut next = Vec::new();
        for &s in &layer {
            for v in 0..n {
                if s & (1u64 << v) != 0 {
                    continue;
                }
                let t = s | (1u64 << v);
                if parent.contains_key(&t) {
                    continue;
                }
                if q_size(adj, s, v) as usize <= k {
                    parent.insert(t, v as u8);
                    if n - t.count_ones() as usize <= k + 1 {
                        return Some(finish(t, &parent));
                    }
                    next.push(t);
                }
            }
        }
        if next.is_empty() {
            return None;
        }
        layer = next;
    }
    None
}

/// Exact treewidth of one component by the subset DP: ordering and width.
fn dp_component(w: &Work, comp: &FixedBitSet, lb: usize, ub: usize) -> Option<(usize, Vec<usize>)> {
    let verts: Vec<usize> = comp.ones().collect();
    if verts.len() > 64 {
        return None;
    }
    let local: HashMap<usize, usize> = verts.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let adj: Vec<u64> = verts
        .iter()
        .map(|&v| w.adj[v].ones().fold(0u64, |m, u| m | (1u64 << local[&u])))
        .collect();
    for k in lb..ub {
        if let Some(order) = dp_decide(&adj, k) {
            return Some((k, order.into_iter().map(|i| verts[i]).collect()));
        }
    }
    None
}

// ---- branch and bound ----

struct Search {
    best: usize,
    best_order: Vec<usize>,
    nodes: u64,
    node_budget: u64,
    deadline: Option<Instant>,
    seen: HashMap<FixedBitSet, usize>,
    complete: bool,
}

impl Search {
    fn out_of_budget(&mut self) -> bool {
        if self.nodes >= self.node_budget || self.deadline.is_some_and(|d| Instant::now() >= d) {
            self.complete = false;
            true
        } else {
            false
        }
    }

    fn dfs(&mut self, w: &Work, g: usize, order: &mut Vec<usize>, floor: usize) {
        if self.best <= floor || self.out_of_budget() {
            return;
        }
        self.nodes += 1;
        let rem = w.alive_count();
        if rem <= g + 1 {
            let width = g.max(rem.saturating_sub(1));
            if width < self.best {
                self.best = width;
                self.best_order = order.clone();
                self.best_order.extend(w.alive.ones());
            }
            return;
        }
        if g.max(lower_bound_work(w)) >= self.best {
            return;
        }
        match self.seen.get(&w.alive) {
            Some(&h) if h <= g => return,
            _ => {
                self.seen.insert(w.alive.clone(), g);
            }
        }
        let forced = w.alive.ones().find(|&v| {
            w.is_simplicial(v) || (w.degree(v) <= g.max(floor) && w.is_almost_simplicial(v))
        });
        let candidates: Vec<usize> = match forced {
            Some(v) => vec![v],
            None => {
                let mut c: Vec<usize> = w.alive.ones().collect();
                c.sort_by_key(|&v| (w.degree(v), w.fill_in(v), v));
                c
            }
        };
        for v in candidates {
            let d = w.degree(v);
            if g.max(d) >= self.best {
                continue;
            }
            let mut next = w.clone();
            next.eliminate(v);
            order.push(v);
            self.dfs(&next, g.max(d), order, floor);
            order.pop();
            if self.best <= floor {
                return;
            }
        }
    }
}

fn branch_and_bound(
    w: &Work,
    lb: usize,
    ub: usize,
    ub_order: Vec<usize>,
    opts: &TwOptions,
    start: Instant,
) -> (usize, usize, Vec<usize>) {
    let mut s = Search {
        best: ub,
        best_order: ub_order,
        nodes: 0,
        node_budget: opts.node_budget,
        deadline: opts.time_budget.map(|t| start + t),
        seen: HashMap::new(),
        complete: true,
    };
    let mut order = Vec::new();
    s.dfs(w, 0, &mut order, lb);
    let lower = if s.complete || s.best <= lb {
        s.best
    } else {
        lb
    };
    (lower, s.best, s.best_order)
}

// ---- driver ----

struct Solved {
    lower: usize,
    order: Vec<usize>,
}

fn solve_component(
    w: &Work,
    comp: &FixedBitSet,
    low: usize,
    opts: &TwOptions,
    exact_required: bool,
    start: Instant,
) -> Result<Solved> {
    let sub = w.restricted(comp);
    let size = comp.count_ones(..);
    let lb = low.max(lower_bound_work(&sub));
    let (ub, ub_order) = upper_bound_work(&sub);
    if lb >= ub {
        return Ok(Solved {
            lower: ub.max(low),
            order: ub_order,
        });
    }
    if size <= opts.exact_limit.min(64) {
        if let Some((k, order)) = dp_component(&sub, comp, lb, ub) {
            return Ok(Solved { lower: k, order });
        }
        return Ok(Solved {
            lower: ub,
            order: ub_order,
        });
    }
    if exact_required {
        return Err(Error::SizeLimit {
            what: "exact treewidth component (use bounded_treewidth)",
            limit: opts.exact_limit,
            actual: size,
        });
    }
    let (lower, _, order) = branch_and_bound(&sub, lb, ub, ub_order, opts, start);
    Ok(Solved { lower, order })
}

fn solve(g: &UGraph, opts: &TwOptions, exact_required: bool) -> Result<TwResult> {
    let start = Instant::now();
    let simple = g.simplify();
    if simple.vertex_count() == 0 {
        return Ok(TwResult {
            lower: 0,
            upper: 0,
            exact: true,
            decomposition: TreeDecomposition::trivial(&simple),
        });
    }
    let (mut w, ids) = Work::from_graph(&simple);
    let mut low = opts.known_lower.max(lower_bound_work(&w));
    let mut order: Vec<usize> = Vec::new();
    loop {
        let mut changed = false;
        let alive: Vec<usize> = w.alive.ones().collect();
        for v in alive {
            let d = w.degree(v);
            if w.is_simplicial(v) {
                low = low.max(d);
            } else if !(d <= low && w.is_almost_simplicial(v)) {
                continue;
            }
            w.eliminate(v);
            order.push(v);
            changed = true;
        }
        if !changed {
            break;
        }
    }
    let comps = w.components();
    let solved: Vec<Result<Solved>> = comps
        .par_iter()
        .map(|c| solve_component(&w, c, low, opts, exact_required, start))
        .collect();
    let mut lower = low;
    for s in solved {
        let s = s?;
        lower = lower.max(s.lower);
        order.extend(s.order);
    }
    let full: Vec<VertexId> = order.iter().map(|&i| ids[i]).collect();
    let mut decomposition = TreeDecomposition::from_elimination_order(&simple, &full)?.make_small();
    if let Some(hint) = &opts.hint {
        validate(hint, &simple)
            .map_err(|v| Error::Invalid(format!("decomposition hint rejected: {v}")))?;
        if hint.width < decomposition.width {
            decomposition = hint.make_small();
        }
    }
    let upper = decomposition.width;
    let lower = lower.min(upper);
    if exact_required && lower != upper {
        return Err(Error::Inexact { lower, upper });
    }
    Ok(TwResult {
        lower,
        upper,
        exact: lower == upper,
        decomposition,
    })
}

/// Exact treewidth with the default limit of 24 vertices per reduced component.
pub fn exact_treewidth(g: &UGraph) -> Result<TwResult> {
    exact_treewidth_with_limit(g, DEFAULT_EXACT_LIMIT)
}

pub fn exact_treewidth_with_limit(g: &UGraph, limit: usize) -> Result<TwResult> {
    let opts = TwOptions {
        exact_limit: limit.min(64),
        ..TwOptions::default()
    };
    solve(g, &opts, true)
}

/// Treewidth value, exact.
pub fn treewidth(g: &UGraph) -> Result<usize> {
    Ok(exact_treewidth(g)?.upper)
}

/// Lower/upper sandwich refined by branch and bound within the budget.
pub fn bounded_treewidth(g: &UGraph, opts: &TwOptions) -> Result<TwResult> {
    solve(g, opts, false)
}

// ---- recognisers for small treewidth ----

type Adj = BTreeMap<usize, BTreeSet<usize>>;

fn simple_adj(g: &UGraph) -> Adj {
    g.vertices()
        .map(|v| (v, g.neighbours(v).collect()))
        .collect()
}

fn drop_vertex(adj: &mut Adj, v: usize) {
    if let Some(nb) = adj.remove(&v) {
        for w in nb {
            adj.get_mut(&w).unwrap().remove(&v);
        }
    }
}

fn join(adj: &mut Adj, a: usize, b: usize) {
    adj.get_mut(&a).unwrap().insert(b);
    adj.get_mut(&b).unwrap().insert(a);
}

/// One reduction step for width at most `k`; false if none applies.
fn reduce_step(adj: &mut Adj, k: usize) -> bool {
    let verts: Vec<usize> = adj.keys().copied().collect();
    for &v in &verts {
        let nb: Vec<usize> = adj[&v].iter().copied().collect();
        match nb.len() {
            0 | 1 => {
                drop_vertex(adj, v);
                return true;
            }
            2 if k >= 2 => {
                drop_vertex(adj, v);
                join(adj, nb[0], nb[1]);
                return true;
            }
            _ => {}
        }
    }
    if k < 3 {
        return false;
    }
    for &v in &verts {
        let nb: Vec<usize> = adj[&v].iter().copied().collect();
        if nb.len() != 3 {
            continue;
        }
        // triangle rule
        for i in 0..3 {
            let (a, b, c) = (nb[i], nb[(i + 1) % 3], nb[(i + 2) % 3]);
            if adj[&a].contains(&b) {
                drop_vertex(adj, v);
                join(adj, a, c);
                join(adj, b, c);
                return true;
            }
        }
        // buddy rule
        let set: BTreeSet<usize> = nb.iter().copied().collect();
        if let Some(&u) = verts
            .iter()
            .find(|&&u| u != v && adj.get(&u).is_some_and(|s| *s == set))
        {
            drop_vertex(adj, v);
            drop_vertex(adj, u);
            join(adj, nb[0], nb[1]);
            join(adj, nb[1], nb[2]);
            join(adj, nb[0], nb[2]);
            return true;
        }
    }
    // cube rule: a with degree-3 neighbours b, c, d; b~v,w  c~v,x  d~w,x
    for &a in &verts {
        let nb: Vec<usize> = adj[&a].iter().copied().collect();
        if nb.len() != 3 || nb.iter().any(|x| adj[x].len() != 3) {
            continue;
        }
        let outer: Vec<Vec<usize>> = nb
            .iter()
            .map(|x| adj[x].iter().copied().filter(|&y| y != a).collect())
            .collect();
        if outer.iter().flatten().any(|y| nb.contains(y)) {
            continue;
        }
        let all: BTreeSet<usize> = outer.iter().flatten().copied().collect();
        if all.len() != 3 {
            continue;
        }
        let ok = all
            .iter()
            .all(|y| outer.iter().filter(|o| o.contains(y)).count() == 2);
        if !ok {
            continue;
        }
        let t: Vec<usize> = all.into_iter().collect();
        for &x in &nb {
            drop_vertex(adj, x);
        }
        drop_vertex(adj, a);
        join(adj, t[0], t[1]);
        join(adj, t[1], t[2]);
        join(adj, t[0], t[2]);
        return true;
    }
    false
}

/// Decides `tw(g) <= k` for `k` in 1..=3 by reduction rules.
pub fn treewidth_at_most(g: &UGraph, k: usize) -> Result<bool> {
    if !(1..=3).contains(&k) {
        return Err(Error::OutOfRange(format!(
            "treewidth_at_most supports k in 1..=3, got {k}"
        )));
    }
    let mut adj = simple_adj(g);
    if k == 1 {
        let s = g.simplify();
        return Ok(s.edge_count() + s.component_count() == s.vertex_count());
    }
    while !adj.is_empty() {
        if !reduce_step(&mut adj, k) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Minimum over all vertex orderings of the maximum back-degree; for use as an
/// independent oracle on graphs with at most 10 vertices.
pub fn brute_force_oracle(g: &UGraph) -> Result<usize> {
    let n = g.vertex_count();
    if n > 10 {
        return Err(Error::SizeLimit {
            what: "brute-force treewidth vertices",
            limit: 10,
            actual: n,
        });
    }
    let ids: Vec<VertexId> = g.vertices().collect();
    let mut adj = vec![0u16; n];
    for (i, &u) in ids.iter().enumerate() {
        for (j, &v) in ids.iter().enumerate() {
            if g.has_edge(u, v) {
                adj[i] |= 1 << j;
            }
        }
    }
    fn rec(adj: &[u16], alive: u16, width: usize, best: &mut usize) {
        if alive == 0 {
            *best = (*best).min(width);
            return;
        }
        if width >= *best {
            return;
        }
        for v in 0..adj.len() {
            if alive & (1 << v) == 0 {
                continue;
            }
            let nb = adj[v] & alive;
            let d = nb.count_ones() as usize;
            let mut next = adj.to_vec();
            for (u, row) in next.iter_mut().enumerate() {
                if nb & (1 << u) != 0 {
                    *row |= nb & !(1 << u);
                }
            }
            rec(&next, alive & !(1 << v), width.max(d), best);
        }
    }
    let mut best = n.saturating_sub(1);
    rec(&adj, ((1u32 << n) - 1) as u16, 0, &mut best);
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn complete(n: usize) -> UGraph {
        let mut e = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                e.push((i, j));
            }
        }
        UGraph::from_edges(n, &e).unwrap()
    }

    fn cycle(n: usize) -> UGraph {
        let e: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        UGraph::from_edges(n, &e).unwrap()
    }

    fn grid(k: usize) -> UGraph {
        let mut e = Vec::new();
        for r in 0..k {
            for c in 0..k {
                if c + 1 < k {
                    e.push((r * k + c, r * k + c + 1));
                }
                if r + 1 < k {
                    e.push((r * k + c, (r + 1) * k + c));
                }
            }
        }
        UGraph::from_edges(k * k, &e).unwrap()
    }

    fn octahedron() -> UGraph {
        let mut e = Vec::new();
        for i in 0..6 {
            for j in i + 1..6 {
                if j != i + 3 {
                    e.push((i, j));
                }
            }
        }
        UGraph::from_edges(6, &e).unwrap()
    }

    #[test]
    fn basic_values() {
        let path = UGraph::from_edges(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        assert_eq!(treewidth(&path).unwrap(), 1);
        for n in 3..9 {
            assert_eq!(treewidth(&cycle(n)).unwrap(), 2);
            assert_eq!(treewidth(&complete(n)).unwrap(), n - 1);
        }
        assert_eq!(treewidth(&UGraph::with_vertices(3)).unwrap(), 0);
        assert_eq!(treewidth(&octahedron()).unwrap(), 4);
        for k in 2..6 {
            assert_eq!(treewidth(&grid(k)).unwrap(), k);
        }
    }

    #[test]
    fn decompositions_validate() {
        for g in [complete(5), cycle(7), grid(4), octahedron()] {
            let r = exact_treewidth(&g).unwrap();
            validate(&r.decomposition, &g).unwrap();
            assert_eq!(r.decomposition.width, r.upper);
            assert!(r.decomposition.is_small());
        }
    }

    #[test]
    fn validate_reports() {
        let g = cycle(4);
        let d = TreeDecomposition::trivial(&g);
        assert!(is_valid(&d, &g));
        assert_eq!(d.width, 3);
        let two = TreeDecomposition::new(
            vec![
                [0, 1, 2].into_iter().collect(),
                [0, 2, 3].into_iter().collect(),
            ],
            vec![[0, 1]],
        );
        assert!(is_valid(&two, &g));
        let missing = TreeDecomposition::new(vec![[0, 1, 2].into_iter().collect()], vec![]);
        assert_eq!(validate(&missing, &g), Err(Violation::MissingVertex(3)));
        let uncovered = TreeDecomposition::new(
            vec![
                [0, 1, 2].into_iter().collect(),
                [2, 3].into_iter().collect(),
            ],
            vec![[0, 1]],
        );
        assert_eq!(
            validate(&uncovered, &g),
            Err(Violation::UncoveredEdge(Edge::new(0, 3)))
        );
        let broken = TreeDecomposition::new(
            vec![
                [0, 1].into_iter().collect(),
                [1, 2, 3].into_iter().collect(),
                [0, 3].into_iter().collect(),
                [0, 2].into_iter().collect(),
            ],
            vec![[0, 1], [1, 2], [1, 3]],
        );
        assert!(matches!(
            validate(&broken, &g),
            Err(Violation::Disconnected(0))
        ));
    }

    #[test]
    fn recognisers() {
        assert!(treewidth_at_most(&complete(4), 3).unwrap());
        assert!(!treewidth_at_most(&complete(4), 2).unwrap());
        assert!(!treewidth_at_most(&complete(5), 3).unwrap());
        assert!(!treewidth_at_most(&octahedron(), 3).unwrap());
        assert!(treewidth_at_most(&cycle(6), 2).unwrap());
        assert!(!treewidth_at_most(&cycle(6), 1).unwrap());
        assert!(treewidth_at_most(&grid(3), 3).unwrap());
        assert!(!treewidth_at_most(&grid(4), 3).unwrap());
        assert!(treewidth_at_most(&grid(3), 0).is_err());
    }

    #[test]
    fn brute_force_small() {
        assert_eq!(brute_force_oracle(&cycle(4)).unwrap(), 2);
        assert_eq!(brute_force_oracle(&complete(6)).unwrap(), 5);
        assert_eq!(brute_force_oracle(&grid(3)).unwrap(), 3);
        assert!(brute_force_oracle(&UGraph::with_vertices(11)).is_err());
    }

    #[test]
    fn bounded_with_hint() {
        let g = grid(4);
        let exact = exact_treewidth(&g).unwrap();
        let r = bounded_treewidth(
            &g,
            &TwOptions {
                exact_limit: 0,
                hint: Some(exact.decomposition.clone()),
                known_lower: 4,
                ..TwOptions::default()
            },
        )
        .unwrap();
        assert!(r.exact);
        assert_eq!(r.upper, 4);
        let bad = TreeDecomposition::new(vec![[0].into_iter().collect()], vec![]);
        assert!(bounded_treewidth(
            &g,
            &TwOptions {
                hint: Some(bad),
                ..TwOptions::default()
            }
        )
        .is_err());
    }

    #[test]
    fn branch_and_bound_closes_grids() {
        let g = grid(5);
        let r = bounded_treewidth(
            &g,
            &TwOptions {
                exact_limit: 0,
                ..TwOptions::default()
            },
        )
        .unwrap();
        validate(&r.decomposition, &g).unwrap();
        assert!(r.lower <= 5 && r.upper >= 5);
    }

    #[test]
    fn size_limit_error() {
        let g = grid(7);
        let e = exact_treewidth_with_limit(&g, 10).unwrap_err();
        assert!(e.is_size_limit());
    }
}
