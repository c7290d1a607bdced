//! Common pendant subtree, common chain and cluster reductions, with the
//! treewidth quantities their bounds are stated in.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::display::{self, DisplayGraph};
use crate::error::{Error, Result};
use crate::graph::{Edge, UGraph, VertexId, VertexSet};
use crate::phylo::{
    check_same_taxa, common_splits, is_compatible, restrict, subtree_code, Chain, PhyloTree,
    Phylogeny, Split, TaxonSet,
};
use crate::treewidth::treewidth;

/// A common pendant subtree: the side of edge `{root, attach}` holding `root`
/// spans `taxa` in each tree, and the two rooted subtrees agree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PendantSubtree {
    pub taxa: TaxonSet,
    pub root1: VertexId,
    pub attach1: VertexId,
    pub root2: VertexId,
    pub attach2: VertexId,
}

fn pendant_sides(t: &PhyloTree) -> BTreeMap<String, (TaxonSet, VertexId, VertexId)> {
    let g = t.graph();
    let mut out = BTreeMap::new();
    for e in g.simple_edges() {
        for (root, attach) in [(e.a(), e.b()), (e.b(), e.a())] {
            let taxa = crate::phylo::taxa_beyond(t, e, root);
            if taxa.len() >= 2 {
                out.insert(subtree_code(g, root, Some(attach)), (taxa, root, attach));
            }
        }
    }
    out
}

/// All maximal common pendant subtrees with at least two taxa. Agreement is
/// checked on the rooted subtrees, so a taxon set whose unrooted restrictions
/// agree but whose attachment points differ is not reported.
pub fn find_common_pendant_subtrees(t1: &PhyloTree, t2: &PhyloTree) -> Result<Vec<PendantSubtree>> {
    check_same_taxa(t1.taxa(), t2.taxa())?;
    let (a, b) = (t1.suppress_roots(), t2.suppress_roots());
    let first = pendant_sides(&a);
    let second = pendant_sides(&b);
    let common: Vec<PendantSubtree> = first
        .iter()
        .filter_map(|(code, (taxa, r1, a1))| {
            second.get(code).map(|(_, r2, a2)| PendantSubtree {
                taxa: taxa.clone(),
                root1: *r1,
                attach1: *a1,
                root2: *r2,
                attach2: *a2,
            })
        })
        .collect();
    let mut out: Vec<PendantSubtree> = common
        .iter()
        .filter(|p| {
            !common
                .iter()
                .any(|q| q.taxa.len() > p.taxa.len() && p.taxa.is_subset(&q.taxa))
        })
        .cloned()
        .collect();
    out.sort_by(|x, y| x.taxa.cmp(&y.taxa));
    Ok(out)
}

/// Result of collapsing one common pendant subtree.
#[derive(Clone, Debug, Serialize)]
pub struct CpsReport {
    #[serde(serialize_with = "ser_tree")]
    pub t1: PhyloTree,
    #[serde(serialize_with = "ser_tree")]
    pub t2: PhyloTree,
    pub replaced: TaxonSet,
    pub fresh: String,
    pub tw_before: Option<usize>,
    pub tw_after: Option<usize>,
}

pub(crate) fn ser_tree<S: serde::Serializer>(
    t: &PhyloTree,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&t.to_newick())
}

fn fresh_label(taxa: &TaxonSet, avoid: &TaxonSet) -> String {
    let mut label = taxa.iter().cloned().collect::<Vec<_>>().join("+");
    while avoid.contains(&label) {
        label.push('\'');
    }
    label
}

/// Replaces the cherry `{x, y}` by a single leaf labelled `new`.
fn collapse_cherry(t: &PhyloTree, x: &str, y: &str, new: &str) -> Result<PhyloTree> {
    let mut g = t.graph().clone();
    let vx = g.vertex_by_label(x).unwrap();
    let vy = g.vertex_by_label(y).unwrap();
    let p = g.neighbours(vx).next().unwrap();
    g.remove_vertex(vx)?;
    g.remove_vertex(vy)?;
    g.set_label(p, new)?;
    PhyloTree::new(g)
}

/// A cherry `{x, y}` present in both trees with both taxa in `within`.
fn common_cherry(t1: &PhyloTree, t2: &PhyloTree, within: &TaxonSet) -> Option<(String, String)> {
    for x in within {
        for y in within {
            if x < y && t1.parent(x) == t1.parent(y) && t2.parent(x) == t2.parent(y) {
                return Some((x.clone(), y.clone()));
            }
        }
    }
    None
}

/// Collapses the first maximal common pendant subtree to one fresh taxon,
/// one common cherry at a time.
pub fn apply_cps(t1: &PhyloTree, t2: &PhyloTree) -> Result<CpsReport> {
    if is_compatible(t1, t2)? {
        return Err(Error::Compatible);
    }
    let found = find_common_pendant_subtrees(t1, t2)?;
    let target = found.into_iter().next().ok_or(Error::NothingToReduce)?.taxa;
    let fresh = fresh_label(&target, t1.taxa());
    let (mut a, mut b) = (t1.suppress_roots(), t2.suppress_roots());
    let mut pending = target.clone();
    let mut step = 0;
    while pending.len() > 1 {
        let (x, y) = common_cherry(&a, &b, &pending).ok_or_else(|| {
            Error::Invalid("common pendant subtree without a common cherry".into())
        })?;
        let merged = if pending.len() == 2 {
            fresh.clone()
        } else {
            step += 1;
            let mut tmp = format!("{fresh}#{step}");
            while a.taxa().contains(&tmp) {
                tmp.push('\'');
            }
            tmp
        };
        a = collapse_cherry(&a, &x, &y, &merged)?;
        b = collapse_cherry(&b, &x, &y, &merged)?;
        pending.remove(&x);
        pending.remove(&y);
        pending.insert(merged);
    }
    Ok(CpsReport {
        t1: a,
        t2: b,
        replaced: target,
        fresh,
        tw_before: None,
        tw_after: None,
    })
}

/// [`apply_cps`] plus the display-graph treewidth before and after.
pub fn apply_cps_measured(t1: &PhyloTree, t2: &PhyloTree) -> Result<CpsReport> {
    let mut r = apply_cps(t1, t2)?;
    r.tw_before = Some(treewidth(&display::build(t1, t2)?.graph)?);
    r.tw_after = Some(treewidth(&display::build(&r.t1, &r.t2)?.graph)?);
    Ok(r)
}

/// Applies [`apply_cps`] until no common pendant subtree with two or more taxa
/// remains.
pub fn cps_fixpoint(
    t1: &PhyloTree,
    t2: &PhyloTree,
) -> Result<(PhyloTree, PhyloTree, Vec<CpsReport>)> {
    let (mut a, mut b) = (t1.clone(), t2.clone());
    let mut reports = Vec::new();
    loop {
        match apply_cps(&a, &b) {
            Ok(r) => {
                a = r.t1.clone();
                b = r.t2.clone();
                reports.push(r);
            }
            Err(Error::NothingToReduce) => return Ok((a, b, reports)),
            Err(e) => return Err(e),
        }
    }
}

/// The d-cc rule: keep the first `ceil(d/2)` and last `floor(d/2)` chain taxa,
/// delete the rest, suppress degree-2 vertices.
pub fn clip_chain(
    t1: &PhyloTree,
    t2: &PhyloTree,
    c: &Chain,
    d: usize,
) -> Result<(PhyloTree, PhyloTree)> {
    check_same_taxa(t1.taxa(), t2.taxa())?;
    let chain = Chain::from_taxa(t1, t2, &c.taxa)?;
    let t = chain.len();
    if t < 3 {
        return Err(Error::NotCommonChain(format!(
            "chain {chain} has fewer than 3 taxa"
        )));
    }
    if d < 2 || d > t - 1 {
        return Err(Error::OutOfRange(format!(
            "d = {d} must lie in 2..={}",
            t - 1
        )));
    }
    if is_compatible(t1, t2)? {
        return Err(Error::Compatible);
    }
    let head = d.div_ceil(2);
    let tail = d / 2;
    let dropped: BTreeSet<&String> = chain.taxa[head..t - tail].iter().collect();
    let keep: TaxonSet = t1
        .taxa()
        .iter()
        .filter(|x| !dropped.contains(x))
        .cloned()
        .collect();
    let a = restrict(t1, &keep)?;
    let b = restrict(t2, &keep)?;
    let (left, right) = (&chain.taxa[head - 1], &chain.taxa[t - tail]);
    for tree in [&a, &b] {
        let (p, q) = (tree.parent(left).unwrap(), tree.parent(right).unwrap());
        if !tree.graph().has_edge(p, q) {
            return Err(Error::Invalid(format!(
                "clipped chain parents of {left} and {right} are not adjacent"
            )));
        }
    }
    Ok((a, b))
}

/// Treewidth of the display graph after clipping `c` to every length from
/// `len - 1` down to 2.
pub fn clip_experiment(t1: &PhyloTree, t2: &PhyloTree, c: &Chain) -> Result<Vec<(usize, usize)>> {
    let mut out = Vec::new();
    for d in (2..c.len()).rev() {
        let (a, b) = clip_chain(t1, t2, c, d)?;
        out.push((d, treewidth(&display::build(&a, &b)?.graph)?));
    }
    Ok(out)
}

/// The 2 x t grid `g(C)`: images in `dg` of the chain parents of both trees.
pub fn chain_grid(dg: &DisplayGraph, c: &Chain) -> Result<VertexSet> {
    let mut out = VertexSet::new();
    for (map, parents) in [(&dg.first_map, &c.parents1), (&dg.second_map, &c.parents2)] {
        for p in parents {
            let v = map
                .get(p)
                .copied()
                .filter(|v| dg.graph.has_vertex(*v))
                .ok_or_else(|| Error::ChainNotFound(c.to_string()))?;
            out.insert(v);
        }
    }
    Ok(out)
}

/// Pieces of the display graph around a common split.
#[derive(Clone, Debug)]
pub struct ClusterParts {
    pub split: Split,
    pub display: UGraph,
    pub g_star: UGraph,
    pub g_starstar: UGraph,
    pub bracket_star: UGraph,
    pub bracket_starstar: UGraph,
    pub u1: VertexId,
    pub u2: VertexId,
    pub v1: VertexId,
    pub v2: VertexId,
    pub p: usize,
    pub q: usize,
}

/// Treewidths of all cluster pieces and what the bounds predict.
#[derive(Clone, Debug, Serialize)]
pub struct ClusterAnalysis {
    pub p: usize,
    pub q: usize,
    pub tw_display: usize,
    pub tw_g_star: usize,
    pub tw_g_starstar: usize,
    pub tw_bracket_star: usize,
    pub tw_bracket_starstar: usize,
    /// `max(p,q) <= tw(D) <= max(p,q) + 1`.
    pub bounds_hold: bool,
    /// `tw([G]) <= tw(D)` for both bracketed pieces.
    pub sandwich_holds: bool,
    /// The bracket-equality conditions, oriented so that `p <= q`.
    pub predicts_tight: bool,
    /// `tw(D) == max(p,q)`.
    pub tight: bool,
}

fn with_edge(g: &UGraph, a: VertexId, b: VertexId) -> UGraph {
    let mut h = g.clone();
    if a != b {
        h.add_edge(a, b).expect("both endpoints exist");
    }
    h
}

/// Splits the display graph at a common split. `p` and `q` are the treewidths
/// of the display graphs of the two restricted pairs.
pub fn cluster_decompose(t1: &PhyloTree, t2: &PhyloTree, s: &Split) -> Result<ClusterParts> {
    let (t1, t2) = (&t1.suppress_roots(), &t2.suppress_roots());
    let cs = common_splits(t1, t2)?
        .into_iter()
        .find(|c| c.split == *s)
        .ok_or_else(|| Error::NotCommonSplit(s.to_string()))?;
    if is_compatible(t1, t2)? {
        return Err(Error::Compatible);
    }
    let dg = display::build(t1, t2)?;
    let e1 = Edge::new(dg.first_map[&cs.e1.a()], dg.first_map[&cs.e1.b()]);
    let e2 = Edge::new(dg.second_map[&cs.e2.a()], dg.second_map[&cs.e2.b()]);
    let cut = dg.graph.delete_edge(e1)?.delete_edge(e2)?;
    let comps = cut.connected_components();
    let anchor = dg
        .graph
        .vertex_by_label(s.left.iter().next().unwrap())
        .unwrap();
    let star = comps.iter().find(|c| c.contains(anchor)).unwrap().clone();
    let starstar: VertexSet = cut.vertices().filter(|v| !star.contains(*v)).collect();
    let side = |e: Edge, inside: &VertexSet| if inside.contains(e.a()) { e.a() } else { e.b() };
    let (u1, u2) = (side(e1, &star), side(e2, &star));
    let (v1, v2) = (side(e1, &starstar), side(e2, &starstar));
    let g_star = cut.induced_subgraph(&star);
    let g_starstar = cut.induced_subgraph(&starstar);
    let bracket_star = with_edge(&g_star, u1, u2);
    let bracket_starstar = with_edge(&g_starstar, v1, v2);
    let restricted_tw = |y: &TaxonSet| -> Result<usize> {
        let d = display::build(&restrict(t1, y)?, &restrict(t2, y)?)?;
        treewidth(&d.graph)
    };
    let (p, q) = rayon::join(|| restricted_tw(&s.left), || restricted_tw(&s.right));
    Ok(ClusterParts {
        split: s.clone(),
        display: dg.graph,
        g_star,
        g_starstar,
        bracket_star,
        bracket_starstar,
        u1,
        u2,
        v1,
        v2,
        p: p?,
        q: q?,
    })
}

impl ClusterParts {
    /// Computes every treewidth involved and evaluates the bounds.
    pub fn analyse(&self) -> Result<ClusterAnalysis> {
        let graphs = [
            &self.display,
            &self.g_star,
            &self.g_starstar,
            &self.bracket_star,
            &self.bracket_starstar,
        ];
        let tws: Vec<Result<usize>> = {
            use rayon::prelude::*;
            graphs.par_iter().map(|g| treewidth(g)).collect()
        };
        let tws: Vec<usize> = tws.into_iter().collect::<Result<_>>()?;
        let (d, gs, gss, bs, bss) = (tws[0], tws[1], tws[2], tws[3], tws[4]);
        let (p, q) = (self.p, self.q);
        let m = p.max(q);
        // orient so the smaller side is "star"
        let (small_eq, large_eq) = if p <= q {
            (bs == gs, bss == gss)
        } else {
            (bss == gss, bs == gs)
        };
        let predicts_tight = if p == q {
            small_eq && large_eq
        } else {
            large_eq
        };
        Ok(ClusterAnalysis {
            p,
            q,
            tw_display: d,
            tw_g_star: gs,
            tw_g_starstar: gss,
            tw_bracket_star: bs,
            tw_bracket_starstar: bss,
            bounds_hold: m <= d && d <= m + 1,
            sandwich_holds: gs <= bs && bs <= d && gss <= bss && bss <= d,
            predicts_tight,
            tight: d == m,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::newick::parse_tree;
    use crate::phylo::find_common_chains;

    fn t(s: &str) -> PhyloTree {
        parse_tree(s).unwrap()
    }

    fn set(xs: &[&str]) -> TaxonSet {
        xs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn pendant_pitfall() {
        let t1 = t("((((a,b),(c,d)),g),(e,f),h);");
        let t2 = t("(((a,(b,(c,d))),h),(e,f),g);");
        let found: Vec<TaxonSet> = find_common_pendant_subtrees(&t1, &t2)
            .unwrap()
            .into_iter()
            .map(|p| p.taxa)
            .collect();
        assert_eq!(found, vec![set(&["c", "d"]), set(&["e", "f"])]);
        // the unrooted restrictions to {a,b,c,d} agree nonetheless
        let y = set(&["a", "b", "c", "d"]);
        assert!(is_compatible(&restrict(&t1, &y).unwrap(), &restrict(&t2, &y).unwrap()).unwrap());
    }

    #[test]
    fn cps_on_quartets() {
        let a = t("((a,b),(c,d));");
        let b = t("((a,c),(b,d));");
        assert!(find_common_pendant_subtrees(&a, &b).unwrap().is_empty());
        assert!(matches!(apply_cps(&a, &b), Err(Error::NothingToReduce)));
        assert!(matches!(apply_cps(&a, &a), Err(Error::Compatible)));
    }

    #[test]
    fn cps_collapses_cherry() {
        let a = t("(((x,y),a),b,(c,d));");
        let b = t("(((x,y),a),c,(b,d));");
        let r = apply_cps_measured(&a, &b).unwrap();
        assert!(r.replaced.contains("x"));
        assert!(r.t1.taxa().contains(&r.fresh));
        assert_eq!(r.t1.taxa(), r.t2.taxa());
        assert_eq!(r.tw_before, r.tw_after);
    }

    #[test]
    fn identical_trees_pendants() {
        let a = t("((a,b),c,(d,e));");
        let found = find_common_pendant_subtrees(&a, &a).unwrap();
        assert_eq!(found.len(), 5);
        assert!(found.iter().all(|p| p.taxa.len() == 4));
    }

    #[test]
    fn chain_clipping() {
        let t1 = t("((a,b),(x1,(x2,(x3,(x4,(c,d))))));");
        let t2 = t("((a,c),(x1,(x2,(x3,(x4,(b,d))))));");
        let chains = find_common_chains(&t1, &t2).unwrap();
        assert_eq!(chains.len(), 1);
        let c = &chains[0];
        assert_eq!(c.len(), 4);
        for d in 2..4 {
            let (a, b) = clip_chain(&t1, &t2, c, d).unwrap();
            assert_eq!(a.taxa().len(), 8 - (4 - d));
            assert_eq!(a.taxa(), b.taxa());
        }
        assert!(clip_chain(&t1, &t2, c, 4).is_err());
        assert!(clip_chain(&t1, &t2, c, 1).is_err());
        let dg = display::build(&t1, &t2).unwrap();
        assert_eq!(chain_grid(&dg, c).unwrap().len(), 8);
        let n = display::normalize(&dg).unwrap();
        let grid = chain_grid(&n, c).unwrap();
        // the cherries swap sides between the trees
        assert!(!n.graph.is_separator(&grid).unwrap());
        let exp = clip_experiment(&t1, &t2, c).unwrap();
        assert_eq!(exp.len(), 2);
    }

    #[test]
    fn separating_chain() {
        let t1 = t("((a,(b,c)),(x1,(x2,(x3,((d,e),f)))));");
        let t2 = t("(((a,b),c),(x1,(x2,(x3,(d,(e,f))))));");
        let chains = find_common_chains(&t1, &t2).unwrap();
        assert_eq!(chains.len(), 1);
        let n = display::normalize(&display::build(&t1, &t2).unwrap()).unwrap();
        let grid = chain_grid(&n, &chains[0]).unwrap();
        assert_eq!(grid.len(), 6);
        assert!(n.graph.is_separator(&grid).unwrap());
    }

    #[test]
    fn cluster_quartet_halves() {
        let t1 = t("(((a,b),(c,d)),((e,f),(g,h)));");
        let t2 = t("(((a,c),(b,d)),((e,g),(f,h)));");
        let s = Split::parse("a,b,c,d|e,f,g,h").unwrap();
        let parts = cluster_decompose(&t1, &t2, &s).unwrap();
        assert_eq!((parts.p, parts.q), (3, 3));
        let a = parts.analyse().unwrap();
        assert!(a.bounds_hold);
        assert!(a.sandwich_holds);
        assert_eq!(a.predicts_tight, a.tight);
        assert!(cluster_decompose(&t1, &t2, &Split::parse("a,e|b,c,d,f,g,h").unwrap()).is_err());
    }
}
