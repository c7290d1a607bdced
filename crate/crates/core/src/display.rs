//! Display graphs: two phylogenies glued at their shared taxa.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Edge, UGraph, VertexId};
use crate::phylo::{check_same_taxa, is_compatible, PhyloTree, Phylogeny, TaxonSet};

/// Which input a display-graph vertex came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    First,
    Second,
    Shared,
}

#[derive(Clone, Debug)]
pub struct DisplayGraph {
    pub graph: UGraph,
    pub side_of: BTreeMap<VertexId, Side>,
    pub taxa: TaxonSet,
    /// Vertex of the first input -> vertex of the display graph.
    pub first_map: BTreeMap<VertexId, VertexId>,
    /// Vertex of the second input -> vertex of the display graph.
    pub second_map: BTreeMap<VertexId, VertexId>,
    /// Known for tree/tree inputs, `None` when a network is involved.
    pub compatible: Option<bool>,
    /// Edges created by suppressing a taxon during normalization.
    pub shared_edges: BTreeSet<Edge>,
}

/// Lets [`build`] recognise tree inputs.
pub trait DisplayInput: Phylogeny {
    fn as_tree(&self) -> Option<&PhyloTree> {
        None
    }
}

impl DisplayInput for PhyloTree {
    fn as_tree(&self) -> Option<&PhyloTree> {
        Some(self)
    }
}

impl DisplayInput for crate::phylo::PhyloNetwork {}

/// Disjoint union of `a` and `b` with equally labelled leaves identified.
pub fn build<A: DisplayInput + ?Sized, B: DisplayInput + ?Sized>(
    a: &A,
    b: &B,
) -> Result<DisplayGraph> {
    check_same_taxa(a.taxa(), b.taxa())?;
    let mut g = UGraph::new();
    let mut side_of = BTreeMap::new();
    let mut first_map = BTreeMap::new();
    let mut second_map = BTreeMap::new();
    for v in a.graph().vertices() {
        let w = match a.graph().label(v) {
            Some(l) => {
                let w = g.add_labelled_vertex(l)?;
                side_of.insert(w, Side::Shared);
                w
            }
            None => {
                let w = g.add_vertex();
                side_of.insert(w, Side::First);
                w
            }
        };
        first_map.insert(v, w);
    }
    for v in b.graph().vertices() {
        let w = match b.graph().label(v) {
            Some(l) => g.vertex_by_label(l).expect("taxa are shared"),
            None => {
                let w = g.add_vertex();
                side_of.insert(w, Side::Second);
                w
            }
        };
        second_map.insert(v, w);
    }
    for e in a.graph().edges() {
        g.add_edge(first_map[&e.a()], first_map[&e.b()])?;
    }
    for e in b.graph().edges() {
        g.add_edge(second_map[&e.a()], second_map[&e.b()])?;
    }
    let compatible = match (a.as_tree(), b.as_tree()) {
        (Some(t1), Some(t2)) => Some(is_compatible(&t1.suppress_roots(), &t2.suppress_roots())?),
        _ => None,
    };
    Ok(DisplayGraph {
        graph: g,
        side_of,
        taxa: a.taxa().clone(),
        first_map,
        second_map,
        compatible,
        shared_edges: BTreeSet::new(),
    })
}

/// Suppresses every degree-2 vertex (taxa included) and collapses parallel
/// edges until neither applies. Unique-triangle graphs are left alone.
pub fn normalize(d: &DisplayGraph) -> Result<DisplayGraph> {
    if d.compatible == Some(true) {
        return Err(Error::Compatible);
    }
    let mut out = d.clone();
    loop {
        out.graph = out.graph.simplify();
        if out.graph.is_unique_triangle_graph() {
            break;
        }
        let next = out
            .graph
            .vertices()
            .find(|&v| out.graph.degree(v) == 2 && out.graph.neighbours(v).count() == 2);
        let Some(v) = next else { break };
        let was_taxon = out.graph.is_labelled(v);
        let e = out.graph.suppress_in_place(v)?;
        out.side_of.remove(&v);
        out.shared_edges.retain(|s| !s.contains(v));
        if was_taxon {
            out.shared_edges.insert(e);
        }
    }
    out.first_map.retain(|_, w| out.side_of.contains_key(w));
    out.second_map.retain(|_, w| out.side_of.contains_key(w));
    Ok(out)
}

impl DisplayGraph {
    /// Display graph of two trees.
    pub fn of_trees(t1: &PhyloTree, t2: &PhyloTree) -> Result<Self> {
        build(t1, t2)
    }

    pub fn vertex_count(&self) -> usize {
        self.graph.vertex_count()
    }

    pub fn to_dot(&self) -> String {
        let sides = &self.side_of;
        self.graph.to_dot(&|v| match sides.get(&v) {
            Some(Side::First) => Some("lightblue"),
            Some(Side::Second) => Some("lightpink"),
            _ => None,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::newick::parse_tree;

    #[test]
    fn quartet_pair() {
        let t1 = parse_tree("((a,b),(c,d));").unwrap();
        let t2 = parse_tree("((a,c),(b,d));").unwrap();
        let d = build(&t1, &t2).unwrap();
        assert_eq!(d.vertex_count(), 8);
        assert_eq!(d.compatible, Some(false));
        for v in d.graph.vertices() {
            if d.graph.is_labelled(v) {
                assert_eq!(d.graph.degree(v), 2);
            }
        }
        let n = normalize(&d).unwrap();
        assert_eq!(n.vertex_count(), 4);
        assert!(n.graph.vertices().all(|v| n.graph.degree(v) == 3));
        let again = normalize(&n).unwrap();
        assert_eq!(again.graph, n.graph);
    }

    #[test]
    fn identical_quartets() {
        let t = parse_tree("((a,b),(c,d));").unwrap();
        let d = build(&t, &t).unwrap();
        assert_eq!(d.vertex_count(), 8);
        assert!(matches!(normalize(&d), Err(Error::Compatible)));
    }

    #[test]
    fn with_roots_fig8_shape() {
        // quartets with a subdivided middle edge: 10 vertices in total
        let g = parse_tree("((a,b),(c,d));").unwrap().into_graph();
        let mid = g
            .simple_edges()
            .into_iter()
            .find(|e| !g.is_labelled(e.a()) && !g.is_labelled(e.b()))
            .unwrap();
        let (g, _) = g.subdivide_edge(mid).unwrap();
        let t1 = PhyloTree::with_roots(g).unwrap();
        let mut h = parse_tree("((a,c),(b,d));").unwrap().into_graph();
        let mid = h
            .simple_edges()
            .into_iter()
            .find(|e| !h.is_labelled(e.a()) && !h.is_labelled(e.b()))
            .unwrap();
        let (h2, _) = h.subdivide_edge(mid).unwrap();
        h = h2;
        let t2 = PhyloTree::with_roots(h).unwrap();
        let d = build(&t1, &t2).unwrap();
        assert_eq!(d.vertex_count(), 10);
        assert_eq!(d.graph.edge_count(), 12);
    }

    #[test]
    fn mismatch() {
        let t1 = parse_tree("((a,b),(c,d));").unwrap();
        let t2 = parse_tree("((a,b),(c,e));").unwrap();
        match build(&t1, &t2) {
            Err(Error::TaxaMismatch {
                only_first,
                only_second,
            }) => {
                assert_eq!(only_first, vec!["d".to_string()]);
                assert_eq!(only_second, vec!["e".to_string()]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
