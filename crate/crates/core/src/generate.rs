//! Seeded instance generators with a prescribed shared structure.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{Edge, UGraph, VertexId};
use crate::phylo::{
    random_tree_with, taxon_names, PhyloNetwork, PhyloTree, Phylogeny, Split, TaxonSet,
};

fn names(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}

/// Random tree on `taxa` with one extra leaf removed again: returns the graph
/// and the degree-2 (or leaf, for one taxon) vertex where it hung.
fn rooted_random<R: Rng>(taxa: &[String], rng: &mut R) -> Result<(UGraph, VertexId)> {
    let mut all = taxa.to_vec();
    all.push("#".into());
    let mut g = random_tree_with(&all, rng)?.into_graph();
    let hook = g.vertex_by_label("#").unwrap();
    let root = g.neighbours(hook).next().unwrap();
    g.remove_vertex(hook)?;
    Ok((g, root))
}

/// Turns leaf `x` into a cherry `{x, y}`.
fn grow_cherry(t: &PhyloTree, x: &str, y: &str) -> Result<PhyloTree> {
    let mut g = t.graph().clone();
    let v = g.vertex_by_label(x).unwrap();
    let p = g.neighbours(v).next().unwrap();
    let w = g.subdivide_in_place(Edge::new(v, p))?;
    let leaf = g.add_labelled_vertex(y)?;
    g.add_edge(w, leaf)?;
    PhyloTree::new(g)
}

/// Two random trees on `x1..xn` sharing the cherry `{x(n-1), xn}`.
pub fn pair_with_common_cherry<R: Rng>(n: usize, rng: &mut R) -> Result<(PhyloTree, PhyloTree)> {
    if n < 4 {
        return Err(Error::TooFewTaxa {
            needed: 4,
            found: n,
        });
    }
    let taxa = taxon_names(n);
    let base = &taxa[..n - 1];
    let a = random_tree_with(base, rng)?;
    let b = random_tree_with(base, rng)?;
    let (x, y) = (&taxa[n - 2], &taxa[n - 1]);
    Ok((grow_cherry(&a, x, y)?, grow_cherry(&b, x, y)?))
}

/// Replaces a random edge between internal vertices by a path whose vertices
/// carry the chain taxa in order.
fn insert_chain<R: Rng>(t: &PhyloTree, chain: &[String], rng: &mut R) -> Result<PhyloTree> {
    let mut g = t.graph().clone();
    let inner: Vec<Edge> = g
        .edges()
        .into_iter()
        .filter(|e| !g.is_labelled(e.a()) && !g.is_labelled(e.b()))
        .collect();
    let e = *inner
        .choose(rng)
        .ok_or_else(|| Error::Invalid("tree has no internal edge".into()))?;
    g.remove_edge(e)?;
    let mut prev = e.a();
    for x in chain {
        let p = g.add_vertex();
        g.add_edge(prev, p)?;
        let leaf = g.add_labelled_vertex(x)?;
        g.add_edge(p, leaf)?;
        prev = p;
    }
    g.add_edge(prev, e.b())?;
    PhyloTree::new(g)
}

/// Random trees on `x1..xm` with the chain `c1..ct` inserted at a random
/// internal edge of each. Needs `m >= 4`.
pub fn chain_pair<R: Rng>(
    m: usize,
    t: usize,
    rng: &mut R,
) -> Result<(PhyloTree, PhyloTree, Vec<String>)> {
    if m < 4 {
        return Err(Error::TooFewTaxa {
            needed: 4,
            found: m,
        });
    }
    let others = taxon_names(m);
    let chain = names("c", t);
    let a = insert_chain(&random_tree_with(&others, rng)?, &chain, rng)?;
    let b = insert_chain(&random_tree_with(&others, rng)?, &chain, rng)?;
    Ok((a, b, chain))
}

fn glue(
    left: (UGraph, VertexId),
    middle: &[String],
    right: (UGraph, VertexId),
) -> Result<PhyloTree> {
    let (mut g, lroot) = left;
    let map = g.disjoint_union(&right.0)?;
    let rroot = map[&right.1];
    let mut prev = lroot;
    for x in middle {
        let p = g.add_vertex();
        g.add_edge(prev, p)?;
        let leaf = g.add_labelled_vertex(x)?;
        g.add_edge(p, leaf)?;
        prev = p;
    }
    g.add_edge(prev, rroot)?;
    PhyloTree::new(g)
}

/// Trees of the shape `L - c1 - ... - ct - R` where the taxa of `L` (`l1..`)
/// and of `R` (`r1..`) are the same in both trees, so the chain separates
/// them. Side sizes must be at least 2.
pub fn separator_chain_pair<R: Rng>(
    l: usize,
    r: usize,
    t: usize,
    rng: &mut R,
) -> Result<(PhyloTree, PhyloTree, Vec<String>)> {
    if l < 2 || r < 2 {
        return Err(Error::TooFewTaxa {
            needed: 2,
            found: l.min(r),
        });
    }
    let (ls, rs, chain) = (names("l", l), names("r", r), names("c", t));
    let a = glue(rooted_random(&ls, rng)?, &chain, rooted_random(&rs, rng)?)?;
    let b = glue(rooted_random(&ls, rng)?, &chain, rooted_random(&rs, rng)?)?;
    Ok((a, b, chain))
}

/// Random trees on `y1..` and `z1..` that both contain the split `Y|Z`.
pub fn split_pair<R: Rng>(
    ny: usize,
    nz: usize,
    rng: &mut R,
) -> Result<(PhyloTree, PhyloTree, Split)> {
    if ny < 1 || nz < 1 {
        return Err(Error::TooFewTaxa {
            needed: 1,
            found: 0,
        });
    }
    let (ys, zs) = (names("y", ny), names("z", nz));
    let a = glue(rooted_random(&ys, rng)?, &[], rooted_random(&zs, rng)?)?;
    let b = glue(rooted_random(&ys, rng)?, &[], rooted_random(&zs, rng)?)?;
    let split = Split::new(
        ys.into_iter().collect::<TaxonSet>(),
        zs.into_iter().collect(),
    )?;
    Ok((a, b, split))
}

/// `t` plus `r` edges, each between subdivisions of two distinct current
/// edges. The result displays `t`.
pub fn network_over<R: Rng>(t: &PhyloTree, r: usize, rng: &mut R) -> Result<PhyloNetwork> {
    let mut g = t.suppress_roots().into_graph();
    for _ in 0..r {
        let edges = g.simple_edges();
        let mut pick: Vec<Edge> = edges.choose_multiple(rng, 2).copied().collect();
        pick.sort();
        let a = g.subdivide_in_place(pick[0])?;
        let b = g.subdivide_in_place(pick[1])?;
        g.add_edge(a, b)?;
    }
    PhyloNetwork::new(g)
}
