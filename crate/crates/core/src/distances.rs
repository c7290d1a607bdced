//! Treewidth, TBR and two-state parsimony distances between trees.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::Serialize;

use crate::display;
use crate::error::{Error, Result};
use crate::graph::{UGraph, VertexId};
use crate::phylo::{check_same_taxa, is_compatible, PhyloTree, Phylogeny, TaxonSet};
use crate::treewidth::{bounded_treewidth, TwOptions, TwResult};

/// Largest taxon set the agreement forest search accepts.
pub const MAF_LIMIT: usize = 10;
/// Largest taxon set for the two-state character enumeration.
pub const MP2_LIMIT: usize = 20;

/// `d_tw` with the treewidth result it was read from. For incompatible pairs
/// the decomposition refers to the normalized display graph.
#[derive(Clone, Debug, Serialize)]
pub struct DtwResult {
    pub value: usize,
    pub tw: TwResult,
}

pub fn d_tw(t1: &PhyloTree, t2: &PhyloTree) -> Result<DtwResult> {
    d_tw_with(t1, t2, &TwOptions::default())
}

pub fn d_tw_with(t1: &PhyloTree, t2: &PhyloTree, opts: &TwOptions) -> Result<DtwResult> {
    check_same_taxa(t1.taxa(), t2.taxa())?;
    if t1.taxa().len() < 3 {
        return Err(Error::TooFewTaxa {
            needed: 3,
            found: t1.taxa().len(),
        });
    }
    let raw = display::build(t1, t2)?;
    let tw = if raw.compatible == Some(true) {
        bounded_treewidth(&raw.graph, opts)?
    } else {
        let n = display::normalize(&raw)?;
        let opts = TwOptions {
            known_lower: opts.known_lower.max(3),
            ..opts.clone()
        };
        bounded_treewidth(&n.graph, &opts)?
    };
    let value = tw.value()?;
    Ok(DtwResult {
        value: value - 2,
        tw,
    })
}

/// A total assignment of states to taxa.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Character {
    pub assignment: BTreeMap<String, u32>,
}

impl Character {
    pub fn new(assignment: BTreeMap<String, u32>) -> Self {
        Character { assignment }
    }

    /// Two-state character: taxa in `ones` get state 1, the rest state 0.
    pub fn binary(taxa: &TaxonSet, ones: &TaxonSet) -> Self {
        Character {
            assignment: taxa
                .iter()
                .map(|x| (x.clone(), ones.contains(x) as u32))
                .collect(),
        }
    }

    /// Number of distinct states used.
    pub fn arity(&self) -> usize {
        self.assignment.values().collect::<BTreeSet<_>>().len()
    }
}

/// Fitch parsimony score of `f` on `t`.
pub fn fitch_score(t: &PhyloTree, f: &Character) -> Result<usize> {
    for x in t.taxa() {
        if !f.assignment.contains_key(x) {
            return Err(Error::InvalidCharacter(format!("no state for taxon {x}")));
        }
    }
    let states: BTreeMap<u32, usize> = f
        .assignment
        .values()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .enumerate()
        .map(|(i, s)| (*s, i))
        .collect();
    if states.len() > 128 {
        return Err(Error::InvalidCharacter("more than 128 states".into()));
    }
    let g = t.graph();
    let leaf_set = |v: VertexId| -> u128 { 1u128 << states[&f.assignment[g.label(v).unwrap()]] };
    let root = t.leaf(t.taxa().iter().next().unwrap()).unwrap();
    let Some(top) = g.neighbours(root).next() else {
        return Ok(0);
    };
    let (set, score) = fitch_down(g, top, root, &leaf_set);
    let own = leaf_set(root);
    Ok(score + usize::from(set & own == 0))
}

fn fitch_down(
    g: &UGraph,
    v: VertexId,
    parent: VertexId,
    leaf_set: &dyn Fn(VertexId) -> u128,
) -> (u128, usize) {
    if g.is_labelled(v) {
        return (leaf_set(v), 0);
    }
    let mut acc: Option<u128> = None;
    let mut score = 0;
    for w in g.neighbours(v).filter(|&w| w != parent) {
        let (s, c) = fitch_down(g, w, v, leaf_set);
        score += c;
        acc = Some(match acc {
            None => s,
            Some(a) if a & s != 0 => a & s,
            Some(a) => {
                score += 1;
                a | s
            }
        });
    }
    (acc.unwrap_or(0), score)
}

/// Post-order schedule for fast two-state scoring over taxon bitmasks.
struct BinaryFitch {
    /// (vertex slot, children slots) in post-order; leaves carry taxon index.
    order: Vec<Node>,
    root_taxon: usize,
}

enum Node {
    Leaf(usize),
    Inner(usize, usize),
}

impl BinaryFitch {
    fn new(t: &PhyloTree, index: &BTreeMap<&str, usize>) -> Self {
        let g = t.graph();
        let first = t.taxa().iter().next().unwrap();
        let root = t.leaf(first).unwrap();
        let top = g.neighbours(root).next().unwrap();
        let mut order = Vec::new();
        Self::visit(g, top, root, index, &mut order);
        BinaryFitch {
            order,
            root_taxon: index[first.as_str()],
        }
    }

    fn visit(
        g: &UGraph,
        v: VertexId,
        parent: VertexId,
        index: &BTreeMap<&str, usize>,
        out: &mut Vec<Node>,
    ) -> usize {
        if let Some(l) = g.label(v) {
            out.push(Node::Leaf(index[l]));
            return out.len() - 1;
        }
        let kids: Vec<usize> = g
            .neighbours(v)
            .filter(|&w| w != parent)
            .collect::<Vec<_>>()
            .into_iter()
            .map(|w| Self::visit(g, w, v, index, out))
            .collect();
        out.push(Node::Inner(kids[0], kids[1]));
        out.len() - 1
    }

    /// Score of the character that puts state 1 on the taxa in `mask`.
    fn score(&self, mask: u64, buf: &mut Vec<u8>) -> usize {
        buf.clear();
        let mut score = 0;
        for n in &self.order {
            let s = match *n {
                Node::Leaf(i) => 1u8 << ((mask >> i) & 1),
                Node::Inner(a, b) => {
                    let (x, y) = (buf[a], buf[b]);
                    if x & y != 0 {
                        x & y
                    } else {
                        score += 1;
                        x | y
                    }
                }
            };
            buf.push(s);
        }
        let own = 1u8 << ((mask >> self.root_taxon) & 1);
        score + usize::from(buf.last().unwrap() & own == 0)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Mp2Result {
    pub value: usize,
    pub witness: Character,
}

/// Maximum of `|l_f(T1) - l_f(T2)|` over all two-state characters. A lower
/// bound on the parsimony distance.
pub fn d_mp_2state(t1: &PhyloTree, t2: &PhyloTree) -> Result<Mp2Result> {
    check_same_taxa(t1.taxa(), t2.taxa())?;
    let n = t1.taxa().len();
    if n > MP2_LIMIT {
        return Err(Error::SizeLimit {
            what: "taxa for two-state parsimony",
            limit: MP2_LIMIT,
            actual: n,
        });
    }
    if n < 2 {
        return Err(Error::TooFewTaxa {
            needed: 2,
            found: n,
        });
    }
    let names: Vec<&str> = t1.taxa().iter().map(|s| s.as_str()).collect();
    let index: BTreeMap<&str, usize> = names.iter().enumerate().map(|(i, s)| (*s, i)).collect();
    let (a, b) = (t1.suppress_roots(), t2.suppress_roots());
    let (fa, fb) = (BinaryFitch::new(&a, &index), BinaryFitch::new(&b, &index));
    // taxon 0 is pinned to state 0; every other mask is a surjective character
    let total: u64 = 1 << (n - 1);
    let (value, mask) = (1..total)
        .into_par_iter()
        .map_init(Vec::new, |buf, m| {
            let mask = m << 1;
            let d = fa.score(mask, buf).abs_diff(fb.score(mask, buf));
            (d, std::cmp::Reverse(mask))
        })
        .max()
        .map(|(d, r)| (d, r.0))
        .unwrap();
    let ones: TaxonSet = names
        .iter()
        .enumerate()
        .filter(|(i, _)| (mask >> i) & 1 == 1)
        .map(|(_, s)| s.to_string())
        .collect();
    Ok(Mp2Result {
        value,
        witness: Character::binary(t1.taxa(), &ones),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AgreementForest {
    pub blocks: Vec<TaxonSet>,
}

/// Leaf distances, quartet topologies and leaf-to-leaf paths of one tree,
/// indexed by taxon position.
struct TreeTables {
    dist: Vec<Vec<usize>>,
    paths: Vec<Vec<u64>>,
}

impl TreeTables {
    fn new(t: &PhyloTree, names: &[&str]) -> Result<Self> {
        let g = t.graph();
        let slots: BTreeMap<VertexId, usize> =
            g.vertices().enumerate().map(|(i, v)| (v, i)).collect();
        if slots.len() > 64 {
            return Err(Error::SizeLimit {
                what: "tree vertices for agreement forests",
                limit: 64,
                actual: slots.len(),
            });
        }
        let n = names.len();
        let mut dist = vec![vec![0; n]; n];
        let mut paths = vec![vec![0u64; n]; n];
        for (i, x) in names.iter().enumerate() {
            let src = t.leaf(x).unwrap();
            let mut parent: BTreeMap<VertexId, VertexId> = BTreeMap::new();
            let mut depth: BTreeMap<VertexId, usize> = BTreeMap::from([(src, 0)]);
            let mut queue = std::collections::VecDeque::from([src]);
            while let Some(v) = queue.pop_front() {
                for w in g.neighbours(v) {
                    if !depth.contains_key(&w) {
                        depth.insert(w, depth[&v] + 1);
                        parent.insert(w, v);
                        queue.push_back(w);
                    }
                }
            }
            for (j, y) in names.iter().enumerate() {
                let mut v = t.leaf(y).unwrap();
                dist[i][j] = depth[&v];
                let mut bits = 1u64 << slots[&v];
                while v != src {
                    v = parent[&v];
                    bits |= 1 << slots[&v];
                }
                paths[i][j] = bits;
            }
        }
        Ok(TreeTables { dist, paths })
    }

    /// Which of the three pairings of `{a,b,c,d}` the tree induces.
    fn quartet(&self, a: usize, b: usize, c: usize, d: usize) -> u8 {
        let s = [
            self.dist[a][b] + self.dist[c][d],
            self.dist[a][c] + self.dist[b][d],
            self.dist[a][d] + self.dist[b][c],
        ];
        (0..3).min_by_key(|&i| s[i]).unwrap() as u8
    }
}

struct MafSearch {
    n: usize,
    tables: [TreeTables; 2],
    blocks: Vec<Vec<usize>>,
    spans: Vec<[u64; 2]>,
    best: Option<Vec<Vec<usize>>>,
}

impl MafSearch {
    fn agrees_with(&self, block: &[usize], x: usize) -> bool {
        let k = block.len();
        for i in 0..k {
            for j in i + 1..k {
                for l in j + 1..k {
                    let (a, b, c) = (block[i], block[j], block[l]);
                    if self.tables[0].quartet(a, b, c, x) != self.tables[1].quartet(a, b, c, x) {
                        return false;
                    }
                }
            }
        }
        true
    }

    fn span_with(&self, bi: usize, x: usize) -> [u64; 2] {
        let root = self.blocks[bi][0];
        [
            self.spans[bi][0] | self.tables[0].paths[root][x],
            self.spans[bi][1] | self.tables[1].paths[root][x],
        ]
    }

    fn disjoint_from_others(&self, skip: usize, span: [u64; 2]) -> bool {
        self.spans
            .iter()
            .enumerate()
            .all(|(i, s)| i == skip || (s[0] & span[0] == 0 && s[1] & span[1] == 0))
    }

    fn run(&mut self, x: usize) {
        let limit = self.best.as_ref().map_or(usize::MAX, |b| b.len());
        if self.blocks.len() >= limit {
            return;
        }
        if x == self.n {
            self.best = Some(self.blocks.clone());
            return;
        }
        for bi in 0..self.blocks.len() {
            if !self.agrees_with(&self.blocks[bi], x) {
                continue;
            }
            let span = self.span_with(bi, x);
            if !self.disjoint_from_others(bi, span) {
                continue;
            }
            let old = self.spans[bi];
            self.spans[bi] = span;
            self.blocks[bi].push(x);
            self.run(x + 1);
            self.blocks[bi].pop();
            self.spans[bi] = old;
        }
        if self.blocks.len() + 1 < limit {
            let span = [self.tables[0].paths[x][x], self.tables[1].paths[x][x]];
            if self.disjoint_from_others(usize::MAX, span) {
                self.blocks.push(vec![x]);
                self.spans.push(span);
                self.run(x + 1);
                self.spans.pop();
                self.blocks.pop();
            }
        }
    }
}

fn names_of(t: &PhyloTree) -> Vec<&str> {
    t.taxa().iter().map(|s| s.as_str()).collect()
}

/// Exact maximum agreement forest by branch and bound over set partitions.
pub fn maximum_agreement_forest(t1: &PhyloTree, t2: &PhyloTree) -> Result<AgreementForest> {
    check_same_taxa(t1.taxa(), t2.taxa())?;
    let n = t1.taxa().len();
    if n > MAF_LIMIT {
        return Err(Error::SizeLimit {
            what: "taxa for exact agreement forests",
            limit: MAF_LIMIT,
            actual: n,
        });
    }
    let names = names_of(t1);
    let (a, b) = (t1.suppress_roots(), t2.suppress_roots());
    let mut search = MafSearch {
        n,
        tables: [TreeTables::new(&a, &names)?, TreeTables::new(&b, &names)?],
        blocks: Vec::new(),
        spans: Vec::new(),
        best: None,
    };
    search.run(0);
    let blocks = search
        .best
        .unwrap_or_default()
        .into_iter()
        .map(|blk| blk.into_iter().map(|i| names[i].to_string()).collect())
        .collect();
    Ok(AgreementForest { blocks })
}

pub fn d_maf(t1: &PhyloTree, t2: &PhyloTree) -> Result<usize> {
    Ok(maximum_agreement_forest(t1, t2)?.blocks.len())
}

pub fn d_tbr(t1: &PhyloTree, t2: &PhyloTree) -> Result<usize> {
    Ok(d_maf(t1, t2)?.saturating_sub(1))
}

/// Checks both agreement forest conditions for `blocks`.
pub fn is_agreement_forest(t1: &PhyloTree, t2: &PhyloTree, blocks: &[TaxonSet]) -> Result<bool> {
    check_same_taxa(t1.taxa(), t2.taxa())?;
    let mut seen = TaxonSet::new();
    for blk in blocks {
        if blk.is_empty() {
            return Err(Error::NotAPartition("empty block".into()));
        }
        for x in blk {
            if !t1.taxa().contains(x) {
                return Err(Error::NotAPartition(format!("unknown taxon {x}")));
            }
            if !seen.insert(x.clone()) {
                return Err(Error::NotAPartition(format!("taxon {x} in two blocks")));
            }
        }
    }
    if seen.len() != t1.taxa().len() {
        return Err(Error::NotAPartition("blocks do not cover the taxa".into()));
    }
    for blk in blocks {
        if !is_compatible(
            &crate::phylo::restrict(t1, blk)?,
            &crate::phylo::restrict(t2, blk)?,
        )? {
            return Ok(false);
        }
    }
    for t in [t1, t2] {
        let spans: Vec<_> = blocks
            .iter()
            .map(|b| crate::phylo::spanning_subtree(t, b))
            .collect();
        for i in 0..spans.len() {
            for j in i + 1..spans.len() {
                if !spans[i].is_disjoint(&spans[j]) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Upper bound on the TBR diameter of trees with `n` taxa.
pub fn tbr_diameter_upper(n: usize) -> Result<usize> {
    if n < 4 {
        return Err(Error::TooFewTaxa {
            needed: 4,
            found: n,
        });
    }
    let s = (n - 2).isqrt();
    Ok(n - 3 - (s - 1) / 2)
}
