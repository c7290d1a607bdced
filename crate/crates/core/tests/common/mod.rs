//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use phylotw::phylo::{canonical_string, restrict, tbr_unit_ball};
use phylotw::{Edge, PhyloNetwork, PhyloTree, Phylogeny, Quartet, TaxonSet, UGraph};

fn adjacency_masks(g: &UGraph) -> (Vec<usize>, Vec<u32>) {
    let ids: Vec<usize> = g.vertices().collect();
    let index: BTreeMap<usize, usize> = ids.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut adj = vec![0u32; ids.len()];
    for e in g.edges() {
        let (a, b) = (index[&e.a()], index[&e.b()]);
        if a != b {
            adj[a] |= 1 << b;
            adj[b] |= 1 << a;
        }
    }
    (ids, adj)
}

/// Treewidth by the subset recurrence over elimination prefixes:
/// tw(S) = min over v in S of max(tw(S - v), |Q(S - v, v)|), where Q(S, v)
/// is the set of vertices outside S + v reachable from v through S.
pub fn tw_subset_dp(g: &UGraph) -> usize {
    let (ids, adj) = adjacency_masks(g);
    let n = ids.len();
    assert!(n <= 16, "oracle is for tiny graphs");
    if n == 0 {
        return 0;
    }
    let full: u32 = if n == 32 { u32::MAX } else { (1 << n) - 1 };
    let q = |s: u32, v: usize| -> u32 {
        let mut seen = 1u32 << v;
        let mut frontier = 1u32 << v;
        let mut out = 0u32;
        while frontier != 0 {
            let w = frontier.trailing_zeros() as usize;
            frontier &= frontier - 1;
            let nb = adj[w] & !seen;
            seen |= nb;
            out |= nb & !s;
            frontier |= nb & s;
        }
        out
    };
    let mut best = vec![usize::MAX; 1 << n];
    best[0] = 0;
    for s in 1..=full {
        let mut bits = s;
        while bits != 0 {
            let v = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            let rest = s & !(1 << v);
            let cand = best[rest as usize].max(q(rest, v).count_ones() as usize);
            best[s as usize] = best[s as usize].min(cand);
        }
    }
    best[full as usize]
}

/// Canonical code: lexicographically smallest upper-triangle bit string over
/// all vertex permutations.
fn canonical_code(n: usize, adj: &[u32]) -> u64 {
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = u64::MAX;
    loop {
        let mut code = 0u64;
        for i in 0..n {
            for j in i + 1..n {
                code <<= 1;
                if adj[perm[i]] >> perm[j] & 1 == 1 {
                    code |= 1;
                }
            }
        }
        best = best.min(code);
        // next permutation
        let Some(i) = (0..n.saturating_sub(1))
            .rev()
            .find(|&i| perm[i] < perm[i + 1])
        else {
            return best;
        };
        let j = (i + 1..n).rev().find(|&j| perm[j] > perm[i]).unwrap();
        perm.swap(i, j);
        perm[i + 1..].reverse();
    }
}

/// Every connected simple graph with 1 to `max_n` vertices, one per
/// isomorphism class. Built by attaching a new vertex to a nonempty subset of
/// an existing class; every connected graph has a non-cut vertex, so nothing
/// is missed.
pub fn connected_catalog(max_n: usize) -> Vec<UGraph> {
    let mut layers: Vec<Vec<Vec<u32>>> = vec![vec![vec![0]]];
    for n in 2..=max_n {
        let mut seen = BTreeSet::new();
        let mut layer = Vec::new();
        for g in &layers[n - 2] {
            for sub in 1u32..(1 << (n - 1)) {
                let mut adj = g.clone();
                adj.push(sub);
                for (v, row) in adj.iter_mut().enumerate().take(n - 1) {
                    if sub >> v & 1 == 1 {
                        *row |= 1 << (n - 1);
                    }
                }
                if seen.insert(canonical_code(n, &adj)) {
                    layer.push(adj);
                }
            }
        }
        layers.push(layer);
    }
    layers
        .into_iter()
        .flatten()
        .map(|adj| {
            let mut edges = Vec::new();
            for (i, row) in adj.iter().enumerate() {
                for j in i + 1..adj.len() {
                    if row >> j & 1 == 1 {
                        edges.push((i, j));
                    }
                }
            }
            UGraph::from_edges(adj.len(), &edges).unwrap()
        })
        .collect()
}

/// Quartet topologies read off the restriction of `t` to each 4-subset.
pub fn quartets_by_restriction(t: &PhyloTree) -> BTreeSet<Quartet> {
    let taxa: Vec<&String> = t.taxa().iter().collect();
    let mut out = BTreeSet::new();
    let n = taxa.len();
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                for d in c + 1..n {
                    let four = [taxa[a], taxa[b], taxa[c], taxa[d]];
                    let keep: TaxonSet = four.iter().map(|s| s.to_string()).collect();
                    let r = restrict(t, &keep).unwrap();
                    let g = r.graph();
                    let p = |x: &str| r.parent(x).unwrap();
                    let partner = four[1..]
                        .iter()
                        .find(|y| p(four[0]) == p(y))
                        .expect("a quartet tree has two cherries");
                    let rest: Vec<&&String> = four[1..].iter().filter(|y| *y != partner).collect();
                    assert!(!g.is_labelled(p(four[0])));
                    out.insert(Quartet::new(four[0], partner, rest[0], rest[1]));
                }
            }
        }
    }
    out
}

/// TBR distance by breadth-first search over the tree space.
pub fn tbr_bfs_distance(a: &PhyloTree, b: &PhyloTree) -> usize {
    let target = canonical_string(b);
    let start = canonical_string(a);
    if start == target {
        return 0;
    }
    let mut seen = BTreeSet::from([start]);
    let mut queue = VecDeque::from([(a.clone(), 0usize)]);
    while let Some((t, d)) = queue.pop_front() {
        for u in tbr_unit_ball(&t).unwrap() {
            let key = canonical_string(&u);
            if key == target {
                return d + 1;
            }
            if seen.insert(key) {
                queue.push_back((u, d + 1));
            }
        }
    }
    unreachable!("tree space is connected under TBR")
}

/// Whether some spanning tree of `n`, pruned of unlabelled leaves and with
/// degree-2 vertices suppressed, has the quartets of `t`.
pub fn displays_by_spanning_trees(n: &PhyloNetwork, t: &PhyloTree) -> bool {
    let g = n.graph();
    let edges: Vec<Edge> = g.edges();
    let r = g.edge_count() + 1 - g.vertex_count();
    let want = quartets_by_restriction(t);
    let mut pick: Vec<usize> = (0..r).collect();
    loop {
        let mut h = g.clone();
        for &i in &pick {
            h.remove_edge(edges[i]).unwrap();
        }
        if h.is_connected() {
            if let Some(tree) = prune(h) {
                if tree.taxa() == t.taxa() && quartets_by_restriction(&tree) == want {
                    return true;
                }
            }
        }
        // next r-combination of the edge indices
        let m = edges.len();
        let Some(i) = (0..r).rev().find(|&i| pick[i] < m - r + i) else {
            return false;
        };
        pick[i] += 1;
        for j in i + 1..r {
            pick[j] = pick[j - 1] + 1;
        }
    }
}

fn prune(mut h: UGraph) -> Option<PhyloTree> {
    loop {
        let dead: Vec<usize> = h
            .vertices()
            .filter(|&v| h.degree(v) <= 1 && !h.is_labelled(v))
            .collect();
        if dead.is_empty() {
            break;
        }
        for v in dead {
            h.remove_vertex(v).ok()?;
        }
    }
    loop {
        let next = h
            .vertices()
            .find(|&v| h.degree(v) == 2 && !h.is_labelled(v));
        let Some(v) = next else { break };
        h = h.suppress_degree2(v).ok()?;
    }
    PhyloTree::new(h).ok()
}
