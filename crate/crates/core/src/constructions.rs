//! Tree pairs with prescribed display-graph structure: the doubling family,
//! minor embeddings of arbitrary graphs and of grids, and minor models.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::display::{self, DisplayGraph};
use crate::distances::Character;
use crate::error::{Error, Result};
use crate::graph::{Edge, UGraph, VertexId, VertexSet};
use crate::phylo::{caterpillar, taxon_names, PhyloTree, Phylogeny, TaxonSet};
use crate::treewidth::TreeDecomposition;

/// Certificate that `pattern` is a minor of `host`.
#[derive(Clone, Debug, Serialize)]
pub struct MinorModel {
    #[serde(serialize_with = "ser_graph")]
    pub pattern: UGraph,
    #[serde(serialize_with = "ser_graph")]
    pub host: UGraph,
    pub branch_sets: BTreeMap<VertexId, VertexSet>,
    /// One host edge per pattern edge, parallel pattern edges included.
    pub edge_witness: Vec<(Edge, Edge)>,
}

fn ser_graph<S: serde::Serializer>(g: &UGraph, s: S) -> std::result::Result<S::Ok, S::Error> {
    serde::Serialize::serialize(&g.to_json_value(), s)
}

/// Checks disjointness and connectivity of the branch sets and that every
/// witness is a host edge joining the right branch sets.
pub fn verify_minor_model(m: &MinorModel) -> bool {
    let mut owner: BTreeMap<VertexId, VertexId> = BTreeMap::new();
    for h in m.pattern.vertices() {
        let Some(set) = m.branch_sets.get(&h) else {
            return false;
        };
        if set.is_empty() || !set.iter().all(|v| m.host.has_vertex(v)) {
            return false;
        }
        if !m.host.induced_subgraph(set).is_connected() {
            return false;
        }
        for v in set.iter() {
            if owner.insert(v, h).is_some() {
                return false;
            }
        }
    }
    if m.branch_sets.len() != m.pattern.vertex_count() {
        return false;
    }
    let mut wanted: Vec<Edge> = m.pattern.edges();
    let mut given: Vec<Edge> = m.edge_witness.iter().map(|(p, _)| *p).collect();
    wanted.sort();
    given.sort();
    if wanted != given {
        return false;
    }
    let mut used: BTreeMap<Edge, usize> = BTreeMap::new();
    for (p, w) in &m.edge_witness {
        let n = used.entry(*w).or_default();
        *n += 1;
        if *n > m.host.multiplicity(w.a(), w.b()) {
            return false;
        }
        let (oa, ob) = (owner.get(&w.a()), owner.get(&w.b()));
        let ok = matches!((oa, ob), (Some(&x), Some(&y)) if Edge::new(x, y) == *p && x != y);
        if !ok {
            return false;
        }
    }
    true
}

/// Picks a witness for every pattern edge given the branch sets.
fn witnesses(
    pattern: &UGraph,
    host: &UGraph,
    sets: &BTreeMap<VertexId, VertexSet>,
) -> Option<Vec<(Edge, Edge)>> {
    let mut owner: BTreeMap<VertexId, VertexId> = BTreeMap::new();
    for (h, s) in sets {
        for v in s.iter() {
            owner.insert(v, *h);
        }
    }
    let mut available: BTreeMap<Edge, Vec<Edge>> = BTreeMap::new();
    for w in host.edges() {
        if let (Some(&x), Some(&y)) = (owner.get(&w.a()), owner.get(&w.b())) {
            if x != y {
                available.entry(Edge::new(x, y)).or_default().push(w);
            }
        }
    }
    let mut out = Vec::new();
    for p in pattern.edges() {
        let w = available.get_mut(&p)?.pop()?;
        out.push((p, w));
    }
    out.sort();
    Some(out)
}

/// Exhaustive minor search for `|V(h)| <= 6` and `|V(g)| <= 16`. Branch sets
/// are tried smallest first, so `h` inside itself yields singletons.
pub fn find_minor(h: &UGraph, g: &UGraph) -> Result<Option<MinorModel>> {
    if h.vertex_count() > 6 {
        return Err(Error::SizeLimit {
            what: "pattern vertices for minor search",
            limit: 6,
            actual: h.vertex_count(),
        });
    }
    if g.vertex_count() > 16 {
        return Err(Error::SizeLimit {
            what: "host vertices for minor search",
            limit: 16,
            actual: g.vertex_count(),
        });
    }
    if !h.is_simple() {
        return Err(Error::Invalid("minor search needs a simple pattern".into()));
    }
    let hv: Vec<VertexId> = {
        let mut v: Vec<VertexId> = h.vertices().collect();
        v.sort_by_key(|&x| std::cmp::Reverse(h.degree(x)));
        v
    };
    let gv: Vec<VertexId> = g.vertices().collect();
    let slot: BTreeMap<VertexId, usize> = gv.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let nbr: Vec<u32> = gv
        .iter()
        .map(|&v| g.neighbours(v).fold(0u32, |m, w| m | 1 << slot[&w]))
        .collect();
    let around = |mask: u32| -> u32 {
        let mut out = 0;
        let mut m = mask;
        while m != 0 {
            let i = m.trailing_zeros() as usize;
            out |= nbr[i];
            m &= m - 1;
        }
        out & !mask
    };
    let connected = |mask: u32| -> bool {
        let start = mask & mask.wrapping_neg();
        let mut seen = start;
        loop {
            let next = (seen | around(seen)) & mask;
            if next == seen {
                return seen == mask;
            }
            seen = next;
        }
    };
    let full: u32 = if gv.len() == 32 {
        u32::MAX
    } else {
        (1u32 << gv.len()) - 1
    };
    let mut candidates: Vec<u32> = (1..=full).filter(|&m| connected(m)).collect();
    candidates.sort_by_key(|m| (m.count_ones(), *m));

    struct Ctx<'a> {
        h: &'a UGraph,
        hv: &'a [VertexId],
        candidates: &'a [u32],
        around: &'a dyn Fn(u32) -> u32,
        chosen: Vec<u32>,
    }
    fn search(c: &mut Ctx, used: u32, total: u32) -> bool {
        let i = c.chosen.len();
        if i == c.hv.len() {
            return true;
        }
        let left = (c.hv.len() - i) as u32;
        let need = c.h.degree(c.hv[i]) as u32;
        for &m in c.candidates {
            if m & used != 0 || (total & !used).count_ones() < m.count_ones() + left - 1 {
                continue;
            }
            let boundary = (c.around)(m);
            if boundary.count_ones() < need.min(1) {
                continue;
            }
            let fits =
                (0..i).all(|j| !c.h.has_edge(c.hv[i], c.hv[j]) || boundary & c.chosen[j] != 0);
            if !fits {
                continue;
            }
            c.chosen.push(m);
            if search(c, used | m, total) {
                return true;
            }
            c.chosen.pop();
        }
        false
    }
    let mut ctx = Ctx {
        h,
        hv: &hv,
        candidates: &candidates,
        around: &around,
        chosen: Vec::new(),
    };
    if !search(&mut ctx, 0, full) {
        return Ok(None);
    }
    let mut sets = BTreeMap::new();
    for (k, &m) in ctx.chosen.iter().enumerate() {
        let set: VertexSet = (0..gv.len())
            .filter(|i| (m >> i) & 1 == 1)
            .map(|i| gv[i])
            .collect();
        sets.insert(hv[k], set);
    }
    let edge_witness = witnesses(h, g, &sets).expect("search checked adjacency");
    Ok(Some(MinorModel {
        pattern: h.clone(),
        host: g.clone(),
        branch_sets: sets,
        edge_witness,
    }))
}

fn relabelled(g: &UGraph, suffix: &str) -> Result<UGraph> {
    let mut out = g.clone();
    let labels: Vec<(VertexId, String)> = g.labels().iter().map(|(v, l)| (*v, l.clone())).collect();
    for (v, _) in &labels {
        out.clear_label(*v);
    }
    for (v, l) in labels {
        out.set_label(v, &format!("{l}_{suffix}"))?;
    }
    Ok(out)
}

fn unique_root(t: &PhyloTree) -> Result<VertexId> {
    match t.roots().as_slice() {
        [r] => Ok(*r),
        other => Err(Error::InvalidTree(format!(
            "doubling needs exactly one degree-2 vertex, found {}",
            other.len()
        ))),
    }
}

/// Joins `t` and a copy whose labels carry the suffix `_{tag}` through a new
/// degree-2 vertex. Returns the tree, the copy map and the new vertex.
fn double_raw(
    t: &PhyloTree,
    tag: &str,
) -> Result<(PhyloTree, BTreeMap<VertexId, VertexId>, VertexId)> {
    let r = unique_root(t)?;
    let mut g = t.graph().clone();
    let map = g.disjoint_union(&relabelled(t.graph(), tag)?)?;
    let s = g.add_vertex();
    g.add_edge(s, r)?;
    g.add_edge(s, map[&r])?;
    Ok((PhyloTree::with_roots(g)?, map, s))
}

/// The doubling `(T,T)`; the copy's labels get the suffix `_{tag}`.
pub fn double_tree(t: &PhyloTree, tag: &str) -> Result<PhyloTree> {
    Ok(double_raw(t, tag)?.0)
}

/// Doubling stage `i` with the width-3 decomposition of its display graph.
#[derive(Clone, Debug)]
pub struct DoublingPair {
    pub stage: usize,
    pub t1: PhyloTree,
    pub t2: PhyloTree,
    /// Decomposition of `display::build(&t1, &t2)`, whose vertex ids are
    /// deterministic.
    pub decomposition: TreeDecomposition,
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Key {
    /// Vertex of the first tree, taxa included.
    A(VertexId),
    /// Unlabelled vertex of the second tree.
    B(VertexId),
}

fn quartet_with_middle(pairs: [[&str; 2]; 2]) -> Result<(PhyloTree, [VertexId; 3])> {
    let mut g = UGraph::new();
    let mid = g.add_vertex();
    let mut cherries = [0; 2];
    for (k, pair) in pairs.iter().enumerate() {
        let p = g.add_vertex();
        g.add_edge(mid, p)?;
        for l in pair {
            let x = g.add_labelled_vertex(l)?;
            g.add_edge(p, x)?;
        }
        cherries[k] = p;
    }
    Ok((PhyloTree::with_roots(g)?, [mid, cherries[0], cherries[1]]))
}

/// `(T^i_1, T^i_2)` starting from `ab|cd` and `ac|bd`, each with a degree-2
/// middle vertex, doubled `i` times.
pub fn doubling_pair(i: usize) -> Result<DoublingPair> {
    let (mut t1, [mut u, p1, q1]) = quartet_with_middle([["a", "b"], ["c", "d"]])?;
    let (mut t2, [mut v, p2, q2]) = quartet_with_middle([["a", "c"], ["b", "d"]])?;
    let leaf = |t: &PhyloTree, l: &str| Key::A(t.leaf(l).unwrap());
    let (a, b, c, d) = (
        leaf(&t1, "a"),
        leaf(&t1, "b"),
        leaf(&t1, "c"),
        leaf(&t1, "d"),
    );
    let (p1, q1, p2, q2) = (Key::A(p1), Key::A(q1), Key::B(p2), Key::B(q2));
    let mut bags: Vec<Vec<Key>> = vec![
        vec![Key::A(u), Key::B(v), p1, q1],
        vec![Key::B(v), p1, q1, p2],
        vec![Key::B(v), p1, q1, q2],
        vec![a, p1, p2],
        vec![c, q1, p2],
        vec![b, p1, q2],
        vec![d, q1, q2],
    ];
    let mut tree: Vec<[usize; 2]> = vec![[0, 1], [0, 2], [1, 3], [1, 4], [2, 5], [2, 6]];
    let mut with_uv = 0;
    for stage in 1..=i {
        let tag = stage.to_string();
        let (n1, map1, us) = double_raw(&t1, &tag)?;
        let (n2, map2, vs) = double_raw(&t2, &tag)?;
        let offset = bags.len();
        let copied: Vec<Vec<Key>> = bags
            .iter()
            .map(|bag| {
                bag.iter()
                    .map(|k| match *k {
                        Key::A(x) => Key::A(map1[&x]),
                        Key::B(y) => Key::B(map2[&y]),
                    })
                    .collect()
            })
            .collect();
        let copied_tree: Vec<[usize; 2]> =
            tree.iter().map(|[x, y]| [x + offset, y + offset]).collect();
        bags.extend(copied);
        tree.extend(copied_tree);
        let (u1, v1, u2, v2) = (Key::A(u), Key::B(v), Key::A(map1[&u]), Key::B(map2[&v]));
        let (ustar, vstar) = (Key::A(us), Key::B(vs));
        let chain = [
            vec![ustar, u1, v1],
            vec![ustar, vstar, v1],
            vec![ustar, vstar, v2],
            vec![ustar, u2, v2],
        ];
        let first = bags.len();
        bags.extend(chain);
        tree.push([with_uv, first]);
        tree.extend((first..first + 3).map(|k| [k, k + 1]));
        tree.push([first + 3, with_uv + offset]);
        with_uv = first + 1;
        t1 = n1;
        t2 = n2;
        u = us;
        v = vs;
    }
    let dg = display::build(&t1, &t2)?;
    let to_display = |k: &Key| match *k {
        Key::A(x) => dg.first_map[&x],
        Key::B(y) => dg.second_map[&y],
    };
    let bags: Vec<VertexSet> = bags
        .iter()
        .map(|bag| bag.iter().map(to_display).collect())
        .collect();
    Ok(DoublingPair {
        stage: i,
        t1,
        t2,
        decomposition: TreeDecomposition::new(bags, tree),
    })
}

/// State 1 on every copy of `c` and `d`, state 0 on every copy of `a` and `b`.
pub fn doubling_character(taxa: &TaxonSet) -> Character {
    let ones: TaxonSet = taxa
        .iter()
        .filter(|x| x.starts_with('c') || x.starts_with('d'))
        .cloned()
        .collect();
    Character::binary(taxa, &ones)
}

/// Counts checked against the bounds of the embedding construction.
#[derive(Clone, Debug, Serialize)]
pub struct EmbedAudit {
    pub n: usize,
    pub d: usize,
    pub taxa: usize,
    pub taxa_bound: usize,
    pub internal: usize,
    pub internal_bound: usize,
    pub tree_edges: usize,
    pub tree_edges_bound: usize,
    pub display_nodes: usize,
    pub display_nodes_bound: usize,
    pub display_edges: usize,
    pub display_edges_bound: usize,
}

impl EmbedAudit {
    pub fn holds(&self) -> bool {
        self.taxa <= self.taxa_bound
            && self.internal <= self.internal_bound
            && self.tree_edges <= self.tree_edges_bound
            && self.display_nodes <= self.display_nodes_bound
            && self.display_edges <= self.display_edges_bound
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Embedding {
    #[serde(serialize_with = "crate::reductions::ser_tree")]
    pub t1: PhyloTree,
    #[serde(serialize_with = "crate::reductions::ser_tree")]
    pub t2: PhyloTree,
    pub model: MinorModel,
    pub audit: EmbedAudit,
}

/// Splits every vertex of degree above 3 into a path `u_1..u_t`, `t = deg - 2`:
/// the first two edges go to `u_1`, the last two to `u_t`, one each between.
/// Returns, per original vertex, the path vertices.
fn split_high_degree(
    g: &mut UGraph,
    vertices: &[VertexId],
) -> Result<BTreeMap<VertexId, Vec<VertexId>>> {
    let mut out = BTreeMap::new();
    for &u in vertices {
        let nbrs: Vec<VertexId> = g.neighbours(u).collect();
        let deg = nbrs.len();
        if deg <= 3 {
            out.insert(u, vec![u]);
            continue;
        }
        let t = deg - 2;
        let mut path = vec![u];
        for _ in 1..t {
            path.push(g.add_vertex());
        }
        for w in path.windows(2) {
            g.add_edge(w[0], w[1])?;
        }
        for (k, &w) in nbrs.iter().enumerate() {
            let host = if k < 2 {
                0
            } else if k >= deg - 2 {
                t - 1
            } else {
                k - 1
            };
            if host != 0 {
                g.remove_edge(Edge::new(u, w))?;
                g.add_edge(path[host], w)?;
            }
        }
        out.insert(u, path);
    }
    Ok(out)
}

/// Two trees whose display graph has `g` as a minor. `g` must be connected
/// with maximum degree at least 2.
pub fn embed_graph_as_display_minor(g: &UGraph) -> Result<Embedding> {
    let n = g.vertex_count();
    let d = g.max_degree();
    if n < 2 || !g.is_connected() {
        return Err(Error::Invalid(
            "embedding needs a connected graph with two or more vertices".into(),
        ));
    }
    if d < 2 {
        return Err(Error::OutOfRange(format!("maximum degree {d} is below 2")));
    }
    let base = caterpillar(&taxon_names(n + 2))?;
    let spine: Vec<VertexId> = {
        // walk the caterpillar spine from the end next to x1
        let bg = base.graph();
        let mut order = vec![base.parent("x1").unwrap()];
        while order.len() < n {
            let last = *order.last().unwrap();
            let next = bg
                .neighbours(last)
                .find(|&w| !bg.is_labelled(w) && !order.contains(&w))
                .unwrap();
            order.push(next);
        }
        order
    };
    let gv: Vec<VertexId> = g.vertices().collect();
    let host_of: BTreeMap<VertexId, VertexId> =
        gv.iter().copied().zip(spine.iter().copied()).collect();
    let mut g1 = base.graph().clone();
    let mut g2 = base.graph().clone();
    let mut spine_used: BTreeSet<Edge> = BTreeSet::new();
    // gadget (x1, z, x2) per non-tree edge, in T1 / T2 ids
    let mut gadgets: Vec<(Edge, VertexId, VertexId, VertexId)> = Vec::new();
    let mut round = 0usize;
    for (k, e) in g.edges().into_iter().enumerate() {
        let (hu, hv) = (host_of[&e.a()], host_of[&e.b()]);
        let spine_edge = Edge::new(hu, hv);
        if g1.has_edge(hu, hv) && spine_used.insert(spine_edge) {
            continue;
        }
        let edges2 = g2.edges();
        let target = edges2[round % edges2.len()];
        round += 1;
        let y = g2.subdivide_in_place(target)?;
        let (l1, l2) = (format!("e{k}a"), format!("e{k}b"));
        let x1 = g2.add_labelled_vertex(&l1)?;
        let x2 = g2.add_labelled_vertex(&l2)?;
        let z = g2.add_vertex();
        g2.add_edge(x1, z)?;
        g2.add_edge(z, y)?;
        g2.add_edge(z, x2)?;
        let a1 = g1.add_labelled_vertex(&l1)?;
        let a2 = g1.add_labelled_vertex(&l2)?;
        g1.add_edge(hu, a1)?;
        g1.add_edge(a2, hv)?;
        gadgets.push((e, a1, z, a2));
    }
    let paths = split_high_degree(&mut g1, &spine)?;
    let t1 = PhyloTree::new(g1)?;
    let t2 = PhyloTree::new(g2)?;
    let dg = display::build(&t1, &t2)?;
    let mut sets: BTreeMap<VertexId, VertexSet> = gv
        .iter()
        .map(|&v| {
            (
                v,
                paths[&host_of[&v]]
                    .iter()
                    .map(|p| dg.first_map[p])
                    .collect(),
            )
        })
        .collect();
    for (e, a1, z, a2) in &gadgets {
        let s = sets.get_mut(&e.a()).unwrap();
        s.insert(dg.first_map[a1]);
        s.insert(dg.second_map[z]);
        sets.get_mut(&e.b()).unwrap().insert(dg.first_map[a2]);
    }
    let edge_witness = witnesses(g, &dg.graph, &sets)
        .ok_or_else(|| Error::Invalid("embedding lost an edge".into()))?;
    let audit = EmbedAudit {
        n,
        d,
        taxa: t1.taxa().len(),
        taxa_bound: n + 2 + n * d,
        internal: t1.internal().len().max(t2.internal().len()),
        internal_bound: n * (d + 1),
        tree_edges: t1.graph().edge_count().max(t2.graph().edge_count()),
        tree_edges_bound: 2 * n + 1 + 2 * n * d,
        display_nodes: dg.graph.vertex_count(),
        display_nodes_bound: 2 * n * (d + 1) + n + 2 + n * d,
        display_edges: dg.graph.edge_count(),
        display_edges_bound: 4 * n + 2 + 4 * n * d,
    };
    Ok(Embedding {
        t1,
        t2,
        model: MinorModel {
            pattern: g.clone(),
            host: dg.graph,
            branch_sets: sets,
            edge_witness,
        },
        audit,
    })
}

/// The `k x k` grid; vertex `(r, c)` has id `r * k + c`.
pub fn grid_graph(k: usize) -> UGraph {
    let mut g = UGraph::with_vertices(k * k);
    for r in 0..k {
        for c in 0..k {
            if c + 1 < k {
                g.add_edge(r * k + c, r * k + c + 1).unwrap();
            }
            if r + 1 < k {
                g.add_edge(r * k + c, (r + 1) * k + c).unwrap();
            }
        }
    }
    g
}

#[derive(Clone, Debug, Serialize)]
pub struct GridPair {
    pub k: usize,
    #[serde(serialize_with = "crate::reductions::ser_tree")]
    pub t1: PhyloTree,
    #[serde(serialize_with = "crate::reductions::ser_tree")]
    pub t2: PhyloTree,
    pub model: MinorModel,
}

impl GridPair {
    pub fn display(&self) -> Result<DisplayGraph> {
        display::build(&self.t1, &self.t2)
    }
}

/// Tree pair on `(k-1)^2 + 3` taxa whose display graph has the `k x k` grid
/// as a minor. A curve starts at corner (0,0), snakes row by row through the
/// cells and ends at the opposite corner of the last cell. Each grid edge it
/// crosses becomes a taxon, the two corners it touches are taxa, and the
/// remaining two corners get one extra taxon each.
pub fn grid_display_pair(k: usize) -> Result<GridPair> {
    if k < 3 {
        return Err(Error::OutOfRange(format!("grid side {k} is below 3")));
    }
    let id = |r: usize, c: usize| r * k + c;
    let grid = grid_graph(k);
    let cells: Vec<(usize, usize)> = (0..k - 1)
        .flat_map(|r| {
            let cols: Vec<usize> = if r % 2 == 0 {
                (0..k - 1).collect()
            } else {
                (0..k - 1).rev().collect()
            };
            cols.into_iter().map(move |c| (r, c))
        })
        .collect();
    let mut crossed: Vec<Edge> = Vec::new();
    for w in cells.windows(2) {
        let ((r0, c0), (r1, c1)) = (w[0], w[1]);
        crossed.push(if r0 == r1 {
            let c = c0.max(c1);
            Edge::new(id(r0, c), id(r0 + 1, c))
        } else {
            Edge::new(id(r1, c0), id(r1, c0 + 1))
        });
    }
    let (lr, lc) = *cells.last().unwrap();
    let start = id(0, 0);
    let end = if lc == k - 2 {
        id(lr + 1, lc + 1)
    } else {
        id(lr + 1, lc)
    };
    let corners = [id(0, 0), id(0, k - 1), id(k - 1, 0), id(k - 1, k - 1)];
    let inner: VertexSet = grid
        .vertices()
        .filter(|&v| v != start && v != end)
        .collect();
    let mut rest = grid.induced_subgraph(&inner);
    for e in &crossed {
        rest.remove_edge(*e)?;
    }
    let sides = rest.connected_components();
    if sides.len() != 2 {
        return Err(Error::Invalid(format!("curve left {} sides", sides.len())));
    }
    let side_of = |v: VertexId| usize::from(!sides[0].contains(v));

    // taxon names along the curve
    let mut taxon_at: BTreeMap<Edge, String> = BTreeMap::new();
    for (i, e) in crossed.iter().enumerate() {
        taxon_at.insert(*e, format!("s{}", i + 1));
    }
    let corner_name = |v: VertexId| {
        if v == start {
            "s0".to_string()
        } else {
            format!("s{}", crossed.len() + 1)
        }
    };

    let mut trees: [UGraph; 2] = [UGraph::new(), UGraph::new()];
    let mut image: [BTreeMap<VertexId, VertexId>; 2] = [BTreeMap::new(), BTreeMap::new()];
    for v in inner.iter() {
        let s = side_of(v);
        image[s].insert(v, trees[s].add_vertex());
    }
    // taxa that join a grid vertex's branch set: (grid vertex, label)
    let mut absorbed: Vec<(VertexId, String)> = Vec::new();
    for e in grid.simple_edges() {
        let (a, b) = (e.a(), e.b());
        if let Some(label) = taxon_at.get(&e) {
            let (sa, sb) = (side_of(a), side_of(b));
            if sa == sb {
                return Err(Error::Invalid(format!(
                    "crossed edge {e} does not separate"
                )));
            }
            for (v, s) in [(a, sa), (b, sb)] {
                let x = trees[s].add_labelled_vertex(label)?;
                trees[s].add_edge(image[s][&v], x)?;
            }
            absorbed.push((if sa == 0 { a } else { b }, label.clone()));
        } else if a == start || a == end || b == start || b == end {
            let (corner, other) = if a == start || a == end {
                (a, b)
            } else {
                (b, a)
            };
            let s = side_of(other);
            let label = corner_name(corner);
            let x = match trees[s].vertex_by_label(&label) {
                Some(x) => x,
                None => trees[s].add_labelled_vertex(&label)?,
            };
            trees[s].add_edge(image[s][&other], x)?;
        } else {
            let s = side_of(a);
            trees[s].add_edge(image[s][&a], image[s][&b])?;
        }
    }
    let mut reds = 0;
    // vertices created by the red taxa in the opposite tree: (side, vertex, owner)
    let mut subdivisions: Vec<(usize, VertexId, VertexId)> = Vec::new();
    for &c in &corners {
        if c == start || c == end {
            continue;
        }
        reds += 1;
        let label = format!("r{reds}");
        let s = side_of(c);
        let x = trees[s].add_labelled_vertex(&label)?;
        trees[s].add_edge(image[s][&c], x)?;
        let o = 1 - s;
        let target = trees[o].edges()[0];
        let end = if trees[o].is_labelled(target.a()) {
            target.b()
        } else {
            target.a()
        };
        let owner = *image[o].iter().find(|(_, &w)| w == end).unwrap().0;
        let y = trees[o].subdivide_in_place(target)?;
        let x = trees[o].add_labelled_vertex(&label)?;
        trees[o].add_edge(y, x)?;
        subdivisions.push((o, y, owner));
    }
    let mut parts: [BTreeMap<VertexId, Vec<VertexId>>; 2] = [BTreeMap::new(), BTreeMap::new()];
    for s in 0..2 {
        let vs: Vec<VertexId> = image[s].values().copied().collect();
        parts[s] = split_high_degree(&mut trees[s], &vs)?;
    }
    let [g1, g2] = trees;
    let t1 = PhyloTree::new(g1)?;
    let t2 = PhyloTree::new(g2)?;
    let dg = display::build(&t1, &t2)?;
    let maps = [&dg.first_map, &dg.second_map];
    let mut sets: BTreeMap<VertexId, VertexSet> = BTreeMap::new();
    for v in grid.vertices() {
        let set: VertexSet = if v == start || v == end {
            [dg.graph.vertex_by_label(&corner_name(v)).unwrap()]
                .into_iter()
                .collect()
        } else {
            let s = side_of(v);
            parts[s][&image[s][&v]].iter().map(|p| maps[s][p]).collect()
        };
        sets.insert(v, set);
    }
    for (s, y, owner) in subdivisions {
        sets.get_mut(&owner).unwrap().insert(maps[s][&y]);
    }
    for (v, label) in absorbed {
        sets.get_mut(&v)
            .unwrap()
            .insert(dg.graph.vertex_by_label(&label).unwrap());
    }
    let edge_witness = witnesses(&grid, &dg.graph, &sets)
        .ok_or_else(|| Error::Invalid("grid edge without a witness".into()))?;
    Ok(GridPair {
        k,
        t1,
        t2,
        model: MinorModel {
            pattern: grid,
            host: dg.graph,
            branch_sets: sets,
            edge_witness,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::treewidth::{is_valid, treewidth};

    fn complete(n: usize) -> UGraph {
        let mut g = UGraph::with_vertices(n);
        for i in 0..n {
            for j in i + 1..n {
                g.add_edge(i, j).unwrap();
            }
        }
        g
    }

    #[test]
    fn trivial_models() {
        let h = UGraph::from_edges(2, &[(0, 1)]).unwrap();
        let sets: BTreeMap<VertexId, VertexSet> = [
            (0, [0].into_iter().collect()),
            (1, [1].into_iter().collect()),
        ]
        .into_iter()
        .collect();
        let m = MinorModel {
            pattern: h.clone(),
            host: h.clone(),
            branch_sets: sets.clone(),
            edge_witness: vec![(Edge::new(0, 1), Edge::new(0, 1))],
        };
        assert!(verify_minor_model(&m));
        let mut bad = m.clone();
        bad.branch_sets.insert(1, [0, 1].into_iter().collect());
        assert!(!verify_minor_model(&bad));
        let found = find_minor(&complete(4), &complete(4)).unwrap().unwrap();
        assert!(found.branch_sets.values().all(|s| s.len() == 1));
        assert!(verify_minor_model(&found));
    }

    #[test]
    fn k5_not_in_six_cubic() {
        // triangular prism
        let prism = UGraph::from_edges(
            6,
            &[
                (0, 1),
                (1, 2),
                (2, 0),
                (3, 4),
                (4, 5),
                (5, 3),
                (0, 3),
                (1, 4),
                (2, 5),
            ],
        )
        .unwrap();
        assert!(find_minor(&complete(5), &prism).unwrap().is_none());
        assert!(find_minor(&complete(4), &prism).unwrap().is_some());
    }

    #[test]
    fn doubling_labels() {
        let p = doubling_pair(1).unwrap();
        assert_eq!(p.t1.taxa().len(), 8);
        assert!(p.t1.taxa().contains("a_1"));
        assert_eq!(p.t1.roots().len(), 1);
        assert_eq!(p.t1.taxa(), p.t2.taxa());
        let twice = double_tree(&p.t1, "2").unwrap();
        assert_eq!(twice.taxa().len(), 16);
        assert!(twice.taxa().contains("a_1_2"));
        assert!(double_tree(&p.t1.suppress_roots(), "x").is_err());
    }

    #[test]
    fn doubling_decompositions() {
        for i in 0..=3 {
            let p = doubling_pair(i).unwrap();
            let dg = display::build(&p.t1, &p.t2).unwrap();
            assert!(is_valid(&p.decomposition, &dg.graph), "stage {i}");
            assert_eq!(p.decomposition.width, 3);
            assert_eq!(p.t1.taxa().len(), 4 << i);
        }
        let p = doubling_pair(0).unwrap();
        assert_eq!(display::build(&p.t1, &p.t2).unwrap().vertex_count(), 10);
    }

    #[test]
    fn embed_k4_and_cycle() {
        for g in [
            complete(4),
            UGraph::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]).unwrap(),
        ] {
            let e = embed_graph_as_display_minor(&g).unwrap();
            assert!(verify_minor_model(&e.model));
            assert!(e.audit.holds(), "{:?}", e.audit);
        }
        let two = UGraph::from_edges(3, &[(0, 1)]).unwrap();
        assert!(embed_graph_as_display_minor(&two).is_err());
    }

    #[test]
    fn multigraph_embedding() {
        let g = UGraph::from_edges(3, &[(0, 1), (0, 1), (1, 2), (2, 0)]).unwrap();
        let e = embed_graph_as_display_minor(&g).unwrap();
        assert!(verify_minor_model(&e.model));
        assert_eq!(e.model.edge_witness.len(), 4);
    }

    #[test]
    fn grid_counts() {
        for k in 3..=6 {
            let p = grid_display_pair(k).unwrap();
            let m = (k - 1) * (k - 1) + 3;
            assert_eq!(p.t1.taxa().len(), m);
            assert_eq!(
                p.display().unwrap().vertex_count(),
                3 * (k - 1) * (k - 1) + 5
            );
            assert!(verify_minor_model(&p.model), "k = {k}");
        }
        assert!(grid_display_pair(2).is_err());
        let p = grid_display_pair(3).unwrap();
        assert!(treewidth(&p.display().unwrap().graph).unwrap() >= 3);
    }
}
