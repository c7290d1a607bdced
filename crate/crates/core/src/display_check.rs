//! Does an unrooted binary network display a tree? Decided by deleting
//! `r(N)` non-bridge edges and comparing the pruned spanning tree with `T`.
//!
//! The monadic second-order formulation of the same question maps onto the
//! steps here as follows: choosing the deleted edge set is the existential
//! edge-set quantifier, the connectivity test on the remainder is the
//! spanning-tree predicate, pruning and suppression realise the subdivision
//! relation, and the final isomorphism test plays the role of the quartet
//! agreement predicates. Nothing here evaluates formulas.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::Serialize;

use crate::display;
use crate::error::{Error, Result};
use crate::graph::{Edge, UGraph, VertexId, VertexSet};
use crate::phylo::{
    check_same_taxa, is_compatible, prune_unlabelled_leaves, quartets, suppress_all_unlabelled,
    tree_isomorphism, PhyloNetwork, PhyloTree, Phylogeny,
};
use crate::treewidth::treewidth;

pub const DEFAULT_MAX_R: usize = 12;

/// Witness that `N` displays `T`.
#[derive(Clone, Debug, Serialize)]
pub struct DisplayCertificate {
    /// `E'`, with `|E'| = r(N)`.
    pub deleted_edges: Vec<Edge>,
    /// `N - E'`.
    #[serde(serialize_with = "ser_graph")]
    pub spanning_tree: UGraph,
    /// The spanning tree with unlabelled pendant parts removed: a
    /// subdivision of `T`.
    #[serde(serialize_with = "ser_graph")]
    pub subdivision: UGraph,
}

fn ser_graph<S: serde::Serializer>(g: &UGraph, s: S) -> std::result::Result<S::Ok, S::Error> {
    serde::Serialize::serialize(&g.to_json_value(), s)
}

fn bridges(g: &UGraph) -> BTreeSet<Edge> {
    g.biconnected_components()
        .into_iter()
        .filter(|b| b.vertex_count() == 2 && b.edge_count() == 1)
        .map(|b| b.edges()[0])
        .collect()
}

/// Prunes and suppresses a spanning tree; `None` if the result is not a tree.
fn reduce_spanning(st: &UGraph) -> Option<(UGraph, PhyloTree)> {
    let mut sub = st.clone();
    prune_unlabelled_leaves(&mut sub);
    let mut sup = sub.clone();
    suppress_all_unlabelled(&mut sup);
    let tree = PhyloTree::new(sup).ok()?;
    Some((sub, tree))
}

/// Searches for `E'` in lexicographic order of the non-bridge edge list and
/// returns the first that works.
pub fn displays(
    n: &PhyloNetwork,
    t: &PhyloTree,
    max_r: usize,
) -> Result<Option<DisplayCertificate>> {
    check_same_taxa(n.taxa(), t.taxa())?;
    let r = n.reticulation_number();
    if r > max_r {
        return Err(Error::SizeLimit {
            what: "reticulation number",
            limit: max_r,
            actual: r,
        });
    }
    let t = t.suppress_roots();
    let g = n.graph();
    let fixed = bridges(g);
    let free: Vec<Edge> = g
        .edges()
        .into_iter()
        .filter(|e| !fixed.contains(e))
        .collect();
    let combos = combinations(free.len(), r);
    let hit = combos.par_iter().find_first(|idx| {
        let mut st = g.clone();
        for &i in idx.iter() {
            st.remove_edge(free[i]).unwrap();
        }
        if !st.is_connected() {
            return false;
        }
        match reduce_spanning(&st) {
            Some((_, tree)) => is_compatible(&tree, &t).unwrap_or(false),
            None => false,
        }
    });
    Ok(hit.map(|idx| {
        let deleted: Vec<Edge> = idx.iter().map(|&i| free[i]).collect();
        let mut st = g.clone();
        for e in &deleted {
            st.remove_edge(*e).unwrap();
        }
        let (sub, _) = reduce_spanning(&st).unwrap();
        DisplayCertificate {
            deleted_edges: deleted,
            spanning_tree: st,
            subdivision: sub,
        }
    }))
}

/// All `k`-subsets of `0..n` in lexicographic order.
fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        let Some(i) = (0..k).rev().find(|&i| idx[i] != i + n - k) else {
            return out;
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Re-checks a certificate from scratch, including quartet agreement.
pub fn validate_certificate(n: &PhyloNetwork, t: &PhyloTree, cert: &DisplayCertificate) -> bool {
    let mut st = n.graph().clone();
    for e in &cert.deleted_edges {
        if st.remove_edge(*e).is_err() {
            return false;
        }
    }
    if cert.deleted_edges.len() != n.reticulation_number()
        || st != cert.spanning_tree
        || !st.is_connected()
        || st.edge_count() + 1 != st.vertex_count()
    {
        return false;
    }
    let Some((sub, tree)) = reduce_spanning(&st) else {
        return false;
    };
    let t = t.suppress_roots();
    if sub != cert.subdivision || !is_compatible(&tree, &t).unwrap_or(false) {
        return false;
    }
    if t.taxa().len() >= 4 {
        return matches!((quartets(&tree), quartets(&t)), (Ok(a), Ok(b)) if a == b);
    }
    true
}

/// The map from the subdivision `N'` onto `T` with its property audit.
#[derive(Clone, Debug, Serialize)]
pub struct EmbeddingReport {
    pub f: BTreeMap<VertexId, VertexId>,
    /// Labelled vertices map to the equally labelled leaf.
    pub fixes_taxa: bool,
    /// Preimages are non-empty, connected and cover `N'`.
    pub connected_preimages: bool,
    /// Each edge of `T` has exactly one edge of `N'` between its preimages.
    pub unique_edges: bool,
}

impl EmbeddingReport {
    pub fn holds(&self) -> bool {
        self.fixes_taxa && self.connected_preimages && self.unique_edges
    }
}

/// Degree-2 path vertices go to the nearer end of their path, ties to the
/// end with the smaller id.
pub fn extract_embedding(cert: &DisplayCertificate, t: &PhyloTree) -> Result<EmbeddingReport> {
    let t = t.suppress_roots();
    let sub = &cert.subdivision;
    let mut sup = sub.clone();
    suppress_all_unlabelled(&mut sup);
    let reduced = PhyloTree::new(sup)
        .map_err(|_| Error::InvalidCertificate("subdivision does not reduce to a tree".into()))?;
    let iso = tree_isomorphism(&reduced, &t).ok_or_else(|| {
        Error::InvalidCertificate("subdivision is not a subdivision of the tree".into())
    })?;
    let mut f: BTreeMap<VertexId, VertexId> = iso.clone();
    for v in sub.vertices() {
        if f.contains_key(&v) {
            continue;
        }
        // walk both ways to the nearest branch vertices
        let mut ends = Vec::new();
        for start in sub.neighbours(v).collect::<Vec<_>>() {
            let (mut prev, mut cur, mut steps) = (v, start, 1);
            while !iso.contains_key(&cur) {
                let next = sub.neighbours(cur).find(|&w| w != prev).unwrap();
                prev = cur;
                cur = next;
                steps += 1;
            }
            ends.push((steps, cur));
        }
        let (_, end) = ends.into_iter().min().unwrap();
        f.insert(v, iso[&end]);
    }
    let fixes_taxa = sub.labels().iter().all(|(v, l)| t.leaf(l) == Some(f[v]));
    let mut pre: BTreeMap<VertexId, VertexSet> = BTreeMap::new();
    for (&v, &w) in &f {
        pre.entry(w).or_default().insert(v);
    }
    let connected_preimages = t.graph().vertices().all(|w| pre.contains_key(&w))
        && pre.values().all(|s| sub.induced_subgraph(s).is_connected());
    let mut crossing: BTreeMap<Edge, usize> = BTreeMap::new();
    for e in sub.edges() {
        let (x, y) = (f[&e.a()], f[&e.b()]);
        if x != y {
            *crossing.entry(Edge::new(x, y)).or_default() += 1;
        }
    }
    let tree_edges: Vec<Edge> = t.graph().edges();
    let unique_edges = crossing.len() == tree_edges.len()
        && tree_edges.iter().all(|e| crossing.get(e) == Some(&1));
    Ok(EmbeddingReport {
        f,
        fixes_taxa,
        connected_preimages,
        unique_edges,
    })
}

/// `tw(D(N,T))` against `r(N) + 2` and `2 tw(N) + 1`.
#[derive(Clone, Debug, Serialize)]
pub struct DisplayBounds {
    pub tw_display: usize,
    pub tw_network: usize,
    pub r: usize,
    pub by_reticulation: usize,
    pub by_network_tw: usize,
}

impl DisplayBounds {
    pub fn holds(&self) -> bool {
        self.tw_display <= self.by_reticulation && self.tw_display <= self.by_network_tw
    }

    /// Room left under the smaller bound.
    pub fn slack(&self) -> usize {
        self.by_reticulation
            .min(self.by_network_tw)
            .saturating_sub(self.tw_display)
    }
}

/// Only meaningful when `N` displays `T`; errors otherwise.
pub fn check_display_bounds(n: &PhyloNetwork, t: &PhyloTree) -> Result<DisplayBounds> {
    if displays(n, t, DEFAULT_MAX_R)?.is_none() {
        return Err(Error::NotDisplayed);
    }
    let tw_display = treewidth(&display::build(n, t)?.graph)?;
    let tw_network = treewidth(n.graph())?;
    let r = n.reticulation_number();
    Ok(DisplayBounds {
        tw_display,
        tw_network,
        r,
        by_reticulation: r + 2,
        by_network_tw: 2 * tw_network + 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::newick::parse_tree;

    fn t(s: &str) -> PhyloTree {
        parse_tree(s).unwrap()
    }

    /// Adds an edge between subdivisions of `e1` and `e2`.
    fn add_reticulation(g: &UGraph, e1: Edge, e2: Edge) -> PhyloNetwork {
        let mut g = g.clone();
        let a = g.subdivide_in_place(e1).unwrap();
        let b = g.subdivide_in_place(e2).unwrap();
        g.add_edge(a, b).unwrap();
        PhyloNetwork::new(g).unwrap()
    }

    #[test]
    fn combinations_in_order() {
        assert_eq!(combinations(4, 2).len(), 6);
        assert_eq!(combinations(3, 0), vec![Vec::<usize>::new()]);
        assert_eq!(combinations(3, 3), vec![vec![0, 1, 2]]);
        assert_eq!(combinations(4, 2)[0], vec![0, 1]);
        assert_eq!(combinations(4, 2)[5], vec![2, 3]);
        assert!(combinations(2, 3).is_empty());
    }

    #[test]
    fn tree_displays_itself() {
        let a = t("((a,b),(c,d));");
        let n = PhyloNetwork::from_tree(&a);
        let cert = displays(&n, &a, DEFAULT_MAX_R).unwrap().unwrap();
        assert!(cert.deleted_edges.is_empty());
        assert!(validate_certificate(&n, &a, &cert));
        let rep = extract_embedding(&cert, &a).unwrap();
        assert!(rep.holds());
        assert!(rep.f.iter().all(|(k, v)| k == v));
        let b = check_display_bounds(&n, &a).unwrap();
        assert_eq!(b.tw_display, 2);
        assert_eq!(b.by_reticulation, 2);
    }

    #[test]
    fn one_reticulation_on_one_side() {
        let a = t("((a,b),(c,d));");
        let g = a.graph();
        let (la, lb) = (a.leaf("a").unwrap(), a.leaf("b").unwrap());
        let n = add_reticulation(
            g,
            Edge::new(la, a.parent("a").unwrap()),
            Edge::new(lb, a.parent("b").unwrap()),
        );
        assert_eq!(n.reticulation_number(), 1);
        let cert = displays(&n, &a, DEFAULT_MAX_R).unwrap().unwrap();
        assert!(validate_certificate(&n, &a, &cert));
        assert!(extract_embedding(&cert, &a).unwrap().holds());
        assert!(displays(&n, &t("((a,c),(b,d));"), DEFAULT_MAX_R)
            .unwrap()
            .is_none());
        assert!(matches!(
            check_display_bounds(&n, &t("((a,c),(b,d));")),
            Err(Error::NotDisplayed)
        ));
        assert!(check_display_bounds(&n, &a).unwrap().holds());
        assert!(matches!(displays(&n, &a, 0), Err(Error::SizeLimit { .. })));
    }
}
