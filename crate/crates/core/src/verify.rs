//! Replays the desk-scale theorems as named, seeded claim suites.

use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::constructions::{
    doubling_character, doubling_pair, embed_graph_as_display_minor, grid_display_pair, grid_graph,
    verify_minor_model,
};
use crate::display;
use crate::display_check::{check_display_bounds, displays, validate_certificate, DEFAULT_MAX_R};
use crate::distances::{d_maf, d_mp_2state, d_tbr, d_tw, fitch_score, tbr_diameter_upper};
use crate::error::{Error, Result};
use crate::generate;
use crate::graph::UGraph;
use crate::phylo::{
    all_topologies, is_compatible, random_tree_with, taxon_names, tbr_unit_ball, Chain, PhyloTree,
    Phylogeny,
};
use crate::reductions::{apply_cps, chain_grid, clip_chain, cluster_decompose};
use crate::treewidth::{is_valid, treewidth};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    Smoke,
    Desk,
    Extended,
}

impl FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "smoke" => Ok(Profile::Smoke),
            "desk" => Ok(Profile::Desk),
            "extended" => Ok(Profile::Extended),
            other => Err(Error::OutOfRange(format!("unknown profile {other:?}"))),
        }
    }
}

/// Instance sizes per profile.
#[derive(Clone, Copy, Debug)]
struct Scale {
    max_taxa: usize,
    maf_taxa: usize,
    samples: usize,
    exhaustive_taxa: usize,
    doubling: usize,
    grid: usize,
    max_r: usize,
}

impl Profile {
    fn scale(self) -> Scale {
        match self {
            Profile::Smoke => Scale {
                max_taxa: 5,
                maf_taxa: 5,
                samples: 6,
                exhaustive_taxa: 5,
                doubling: 1,
                grid: 3,
                max_r: 2,
            },
            Profile::Desk => Scale {
                max_taxa: 9,
                maf_taxa: 7,
                samples: 40,
                exhaustive_taxa: 6,
                doubling: 3,
                grid: 5,
                max_r: 4,
            },
            Profile::Extended => Scale {
                max_taxa: 10,
                maf_taxa: 8,
                samples: 120,
                exhaustive_taxa: 6,
                doubling: 4,
                grid: 6,
                max_r: 5,
            },
        }
    }
}

/// Deliberate defects for negative controls.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fault {
    /// Applies one TBR move to the first reduced tree after each CPS step.
    CorruptCps,
}

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub seed: u64,
    pub profile: Profile,
    pub fault: Option<Fault>,
    /// Claim ids to run; all when empty.
    pub only: Vec<String>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            seed: 1,
            profile: Profile::Smoke,
            fault: None,
            only: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ClaimReport {
    pub id: &'static str,
    pub operation: &'static str,
    pub anchor: &'static str,
    pub instances: usize,
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
    /// First failing instance, with everything needed to re-check it.
    pub counterexample: Option<Value>,
    /// Positive results of search-only claims.
    pub findings: Vec<Value>,
    pub wall_ms: u128,
}

impl ClaimReport {
    pub fn ok(&self) -> bool {
        self.failed == 0
    }
}

enum Outcome {
    Pass,
    Fail(Value),
    Skip,
}

impl Outcome {
    fn check(cond: bool, payload: impl FnOnce() -> Value) -> Outcome {
        if cond {
            Outcome::Pass
        } else {
            Outcome::Fail(payload())
        }
    }
}

fn from_result(r: Result<Outcome>) -> Outcome {
    r.unwrap_or_else(|e| Outcome::Fail(json!({ "error": e.to_string() })))
}

#[derive(Default)]
struct Run {
    outcomes: Vec<Outcome>,
    findings: Vec<Value>,
}

impl Run {
    fn push(&mut self, o: Result<Outcome>) {
        self.outcomes.push(from_result(o));
    }
}

struct Ctx {
    scale: Scale,
    fault: Option<Fault>,
}

type ClaimFn = fn(&Ctx, &mut ChaCha8Rng) -> Run;

/// id, operation, anchor, suite
type Claim = (&'static str, &'static str, &'static str, ClaimFn);

const CLAIMS: &[Claim] = &[
    (
        "obs2-invariance",
        "display::normalize",
        "observation: suppressing degree-2 vertices and subdividing edges keep treewidth",
        obs2_invariance,
    ),
    (
        "compat-iff-tw2",
        "treewidth::treewidth on display::build",
        "theorem: compatible iff the display graph has treewidth 2",
        compat_iff_tw2,
    ),
    (
        "cps-invariance",
        "reductions::apply_cps",
        "theorem: the common pendant subtree reduction preserves d_tw",
        cps_invariance,
    ),
    (
        "chain-clip-bounds",
        "reductions::clip_chain",
        "lemmas: clipping a chain to length 2 costs at most one, nothing if it separates",
        chain_clip_bounds,
    ),
    (
        "cluster-bounds",
        "reductions::cluster_decompose",
        "lemma: max(p,q) <= tw(D) <= max(p,q)+1",
        cluster_bounds,
    ),
    (
        "cluster-nec-suff",
        "reductions::ClusterParts::analyse",
        "theorem: bracket equalities decide whether tw(D) = max(p,q)",
        cluster_nec_suff,
    ),
    (
        "unitball-tbr",
        "phylo::tbr_unit_ball, distances::d_tw",
        "theorem: TBR distance 1 implies d_tw = 1",
        unitball_tbr,
    ),
    (
        "unitball-mp2",
        "distances::d_mp_2state, distances::d_tw",
        "theorem: parsimony distance 1 implies d_tw = 1",
        unitball_mp2,
    ),
    (
        "doubling-tw3",
        "constructions::doubling_pair",
        "claim: doubled quartet pairs keep treewidth 3",
        doubling_tw3,
    ),
    (
        "doubling-maf-growth",
        "distances::d_maf",
        "lemma: doubling takes d_MAF = p to at least 2p-1",
        doubling_maf_growth,
    ),
    (
        "doubling-mp-growth",
        "distances::fitch_score",
        "theorem: the doubling character has parsimony gap at least 2^i",
        doubling_mp_growth,
    ),
    (
        "embed-minor",
        "constructions::embed_graph_as_display_minor",
        "theorem: any graph is a minor of a display graph of size O(nd)",
        embed_minor,
    ),
    (
        "grid-minor",
        "constructions::grid_display_pair",
        "grid packing with (k-1)^2+3 taxa and 3(k-1)^2+5 display vertices",
        grid_minor,
    ),
    (
        "display-bounds",
        "display_check::check_display_bounds",
        "corollary: tw(D(N,T)) <= min(2tw(N)+1, r(N)+2)",
        display_bounds,
    ),
    (
        "tbr-diameter",
        "distances::tbr_diameter_upper",
        "corollary: TBR diameter upper bound",
        tbr_diameter,
    ),
    (
        "dtw-le-dtbr",
        "distances::d_tw, distances::d_tbr",
        "theorem: d_tw <= d_TBR",
        dtw_le_dtbr,
    ),
    (
        "triangle-violation-search",
        "distances::d_tw",
        "remark: d_tw is not a metric (search only)",
        triangle_search,
    ),
];

/// Every claim id, in report order.
pub fn claim_ids() -> Vec<&'static str> {
    CLAIMS.iter().map(|c| c.0).collect()
}

fn claim_seed(master: u64, index: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index as u64 + 1);
    rng.gen()
}

/// Runs the selected claims concurrently. Deterministic per seed and profile.
pub fn verify_all(opts: &VerifyOptions) -> Result<Vec<ClaimReport>> {
    for id in &opts.only {
        if !CLAIMS.iter().any(|c| c.0 == id) {
            return Err(Error::OutOfRange(format!("unknown claim {id:?}")));
        }
    }
    let ctx = Ctx {
        scale: opts.profile.scale(),
        fault: opts.fault,
    };
    let picked: Vec<(usize, &Claim)> = CLAIMS
        .iter()
        .enumerate()
        .filter(|(_, c)| opts.only.is_empty() || opts.only.iter().any(|o| o == c.0))
        .collect();
    Ok(picked
        .par_iter()
        .map(|(i, (id, op, anchor, f))| {
            let start = Instant::now();
            let mut rng = ChaCha8Rng::seed_from_u64(claim_seed(opts.seed, *i));
            let run = f(&ctx, &mut rng);
            let mut report = ClaimReport {
                id,
                operation: op,
                anchor,
                instances: 0,
                passed: 0,
                failed: 0,
                skipped: 0,
                counterexample: None,
                findings: run.findings,
                wall_ms: 0,
            };
            for o in run.outcomes {
                match o {
                    Outcome::Pass => report.passed += 1,
                    Outcome::Skip => report.skipped += 1,
                    Outcome::Fail(v) => {
                        report.failed += 1;
                        report.counterexample.get_or_insert(v);
                    }
                }
            }
            report.instances = report.passed + report.failed;
            report.wall_ms = start.elapsed().as_millis();
            report
        })
        .collect())
}

/// Fixed-width table of the reports.
pub fn format_table(reports: &[ClaimReport]) -> String {
    let mut out = format!(
        "{:<27} {:>6} {:>6} {:>6} {:>8}  {:<6} {}\n",
        "claim", "pass", "fail", "skip", "ms", "status", "operation"
    );
    for r in reports {
        out.push_str(&format!(
            "{:<27} {:>6} {:>6} {:>6} {:>8}  {:<6} {}\n",
            r.id,
            r.passed,
            r.failed,
            r.skipped,
            r.wall_ms,
            if r.ok() { "PASS" } else { "FAIL" },
            r.operation
        ));
    }
    out
}

fn nwk(t: &PhyloTree) -> String {
    t.to_newick()
}

fn random_pair(n: usize, rng: &mut ChaCha8Rng) -> Result<(PhyloTree, PhyloTree)> {
    let taxa = taxon_names(n);
    Ok((random_tree_with(&taxa, rng)?, random_tree_with(&taxa, rng)?))
}

fn tw_of(t1: &PhyloTree, t2: &PhyloTree) -> Result<usize> {
    treewidth(&display::build(t1, t2)?.graph)
}

fn obs2_invariance(c: &Ctx, rng: &mut ChaCha8Rng) -> Run {
    let mut run = Run::default();
    for _ in 0..c.scale.samples {
        let n = rng.gen_range(4..=c.scale.max_taxa);
        let pick: usize = rng.gen();
        run.push((|| {
            let (a, b) = random_pair(n, rng)?;
            let d = display::build(&a, &b)?;
            if d.compatible == Some(true) {
                return Ok(Outcome::Skip);
            }
            let raw = treewidth(&d.graph)?;
            let norm = treewidth(&display::normalize(&d)?.graph)?;
            let edges = d.graph.edges();
            let (sub, _) = d.graph.subdivide_edge(edges[pick % edges.len()])?;
            let subdivided = treewidth(&sub)?;
            Ok(Outcome::check(raw == norm && raw == subdivided, || {
                json!({"t1": nwk(&a), "t2": nwk(&b), "raw": raw, "normalized": norm, "subdivided": subdivided})
            }))
        })());
    }
    run
}

fn compat_iff_tw2(c: &Ctx, _rng: &mut ChaCha8Rng) -> Run {
    let mut run = Run::default();
    for n in 4..=c.scale.exhaustive_taxa {
        let trees = all_topologies(&taxon_names(n)).unwrap();
        let results: Vec<Outcome> = trees
            .par_iter()
            .enumerate()
            .flat_map_iter(|(i, a)| {
                trees[i..].iter().map(move |b| {
                    from_result((|| {
                        let tw = tw_of(a, b)?;
                        let same = is_compatible(a, b)?;
                        Ok(Outcome::check(
                            (tw == 2) == same,
                            || json!({"t1": nwk(a), "t2": nwk(b), "tw": tw, "compatible": same}),
                        ))
                    })())
                })
            })
            .collect();
        run.outcomes.extend(results);
    }
    run
}

fn cps_invariance(c: &Ctx, rng: &mut ChaCha8Rng) -> Run {
    let mut run = Run::default();
    let mut tries = 0;
    while run.outcomes.len() < c.scale.samples * 2 && tries < c.scale.samples * 20 {
        tries += 1;
        let n = rng.gen_range(5..=c.scale.max_taxa);
        let pair = generate::pair_with_common_cherry(n, rng);
        let Ok((a, b)) = pair else { continue };
        if is_compatible(&a, &b).unwrap_or(true) {
            continue;
        }
        run.push((|| {
            let mut r = apply_cps(&a, &b)?;
            if c.fault == Some(Fault::CorruptCps) {
                if let Some(moved) = tbr_unit_ball(&r.t1)?.into_iter().next() {
                    r.t1 = moved;
                }
            }
            let before = d_tw(&a, &b)?.value;
            let after = d_tw(&r.t1, &r.t2)?.value;
            Ok(Outcome::check(before == after, || {
                json!({"t1": nwk(&a), "t2": nwk(&b), "reduced1": nwk(&r.t1), "reduced2": nwk(&r.t2),
                       "before": before, "after": after})
            }))
        })());
    }
    run
}

fn chain_clip_bounds(c: &Ctx, rng: &mut ChaCha8Rng) -> Run {
    let mut run = Run::default();
    for k in 0..c.scale.samples {
        let separating = k % 2 == 1;
        run.push((|| {
            let budget = c.scale.max_taxa.max(9);
            let (a, b, taxa) = if separating {
                let t = 3;
                let l = rng.gen_range(3..=((budget - t) / 2).max(3));
                let r = rng.gen_range(3..=(budget - t - l).max(3));
                generate::separator_chain_pair(l, r, t, rng)?
            } else {
                let t = rng.gen_range(3..=4);
                let m = rng.gen_range(4..=(budget - t).max(4));
                generate::chain_pair(m, t, rng)?
            };
            if is_compatible(&a, &b)? {
                return Ok(Outcome::Skip);
            }
            let chain = Chain::from_taxa(&a, &b, &taxa)?;
            let d = display::build(&a, &b)?;
            let tw = treewidth(&d.graph)?;
            let is_sep = if separating {
                // shared structure next to the chain can collapse it under normalization
                let normal = display::normalize(&d)?;
                match chain_grid(&normal, &chain) {
                    Ok(grid) => normal.graph.is_separator(&grid)?,
                    Err(Error::ChainNotFound(_)) => return Ok(Outcome::Skip),
                    Err(e) => return Err(e),
                }
            } else {
                false
            };
            let mut ok = true;
            let mut seen = Vec::new();
            let mut last = tw;
            for dd in (2..chain.len()).rev() {
                let (x, y) = clip_chain(&a, &b, &chain, dd)?;
                let twd = tw_of(&x, &y)?;
                seen.push((dd, twd));
                ok &= twd <= last;
                last = twd;
            }
            let tw2 = last;
            ok &= tw2 <= tw && tw <= tw2 + 1;
            if separating {
                ok &= is_sep && tw2 == tw;
            }
            Ok(Outcome::check(ok, || {
                json!({"t1": nwk(&a), "t2": nwk(&b), "chain": taxa, "tw": tw, "clipped": seen, "separator": is_sep})
            }))
        })());
    }
    run
}

fn split_instances(
    c: &Ctx,
    rng: &mut ChaCha8Rng,
) -> Vec<Result<(PhyloTree, PhyloTree, crate::phylo::Split)>> {
    let mut out = Vec::new();
    let mut tries = 0;
    while out.len() < c.scale.samples && tries < c.scale.samples * 20 {
        tries += 1;
        let n = rng.gen_range(5..=c.scale.max_taxa);
        let ny = rng.gen_range(2..=n - 2);
        match generate::split_pair(ny, n - ny, rng) {
            Ok((a, b, s)) if !is_compatible(&a, &b).unwrap_or(true) => out.push(Ok((a, b, s))),
            Ok(_) => {}
            Err(e) => out.push(Err(e)),
        }
    }
    out
}

fn cluster_bounds(c: &Ctx, rng: &mut ChaCha8Rng) -> Run {
    let mut run = Run::default();
    for inst in split_instances(c, rng) {
        run.push((|| {
            let (a, b, s) = inst?;
            let parts = cluster_decompose(&a, &b, &s)?;
            let an = parts.analyse()?;
            Ok(Outcome::check(
                an.bounds_hold && an.sandwich_holds,
                || json!({"t1": nwk(&a), "t2": nwk(&b), "split": s.to_string(), "analysis": an}),
            ))
        })());
    }
    run
}

fn cluster_nec_suff(c: &Ctx, rng: &mut ChaCha8Rng) -> Run {
    let mut run = Run::default();
    for inst in split_instances(c, rng) {
        run.push((|| {
            let (a, b, s) = inst?;
            let an = cluster_decompose(&a, &b, &s)?.analyse()?;
            Ok(Outcome::check(
                an.predicts_tight == an.tight,
                || json!({"t1": nwk(&a), "t2": nwk(&b), "split": s.to_string(), "analysis": an}),
            ))
        })());
    }
    run
}

fn unitball_tbr(c: &Ctx, rng: &mut ChaCha8Rng) -> Run {
    let mut run = Run::default();
    let top = c.scale.max_taxa.min(7);
    let trees = (c.scale.samples / 4).max(3);
    for _ in 0..trees {
        let n = rng.gen_range(4..=top);
        let t = random_tree_with(&taxon_names(n), rng).unwrap();
        let ball = match tbr_unit_ball(&t) {
            Ok(b) => b,
            Err(e) => {
                run.push(Err(e));
                continue;
            }
        };
        let outcomes: Vec<Outcome> = ball
            .par_iter()
            .map(|u| {
                from_result((|| {
                    let v = d_tw(&t, u)?.value;
                    Ok(Outcome::check(
                        v == 1,
                        || json!({"t": nwk(&t), "neighbour": nwk(u), "d_tw": v}),
                    ))
                })())
            })
            .collect();
        run.outcomes.extend(outcomes);
    }
    run
}

fn unitball_mp2(c: &Ctx, rng: &mut ChaCha8Rng) -> Run {
    // near pairs come from the TBR ball, since d_MP <= d_TBR
    let mut run = Run::default();
    for _ in 0..c.scale.samples {
        let n = rng.gen_range(4..=c.scale.maf_taxa);
        let t = random_tree_with(&taxon_names(n), rng).unwrap();
        let ball = tbr_unit_ball(&t).unwrap_or_default();
        let far = random_tree_with(&taxon_names(n), rng).unwrap();
        let near = if ball.is_empty() {
            None
        } else {
            Some(ball[rng.gen_range(0..ball.len())].clone())
        };
        for u in near.into_iter().chain(std::iter::once(far)) {
            run.push((|| {
                if is_compatible(&t, &u)? || d_mp_2state(&t, &u)?.value != 1 {
                    return Ok(Outcome::Skip);
                }
                let v = d_tw(&t, &u)?.value;
                Ok(Outcome::check(
                    v == 1,
                    || json!({"t": nwk(&t), "u": nwk(&u), "d_tw": v, "d_mp2": 1}),
                ))
            })());
        }
    }
    run
}

fn doubling_tw3(c: &Ctx, _rng: &mut ChaCha8Rng) -> Run {
    let mut run = Run::default();
    for i in 0..=c.scale.doubling {
        run.push((|| {
            let p = doubling_pair(i)?;
            let d = display::build(&p.t1, &p.t2)?;
            let valid = is_valid(&p.decomposition, &d.graph);
            let incompatible = d.compatible == Some(false);
            Ok(Outcome::check(valid && p.decomposition.width == 3 && incompatible, || {
                json!({"stage": i, "valid": valid, "width": p.decomposition.width, "incompatible": incompatible})
            }))
        })());
    }
    run
}

fn doubling_maf_growth(c: &Ctx, _rng: &mut ChaCha8Rng) -> Run {
    let mut run = Run::default();
    let mut prev: Option<usize> = None;
    for i in 0..=c.scale.doubling.min(1) {
        run.push((|| {
            let p = doubling_pair(i)?;
            let m = d_maf(&p.t1, &p.t2)?;
            let ok = match prev {
                None => m == 2,
                Some(q) => m + 1 >= 2 * q,
            };
            let q = prev;
            prev = Some(m);
            Ok(Outcome::check(
                ok,
                || json!({"stage": i, "d_maf": m, "previous": q}),
            ))
        })());
    }
    run
}

fn doubling_mp_growth(c: &Ctx, _rng: &mut ChaCha8Rng) -> Run {
    let mut run = Run::default();
    for i in 0..=c.scale.doubling {
        run.push((|| {
            let p = doubling_pair(i)?;
            let f = doubling_character(p.t1.taxa());
            let (s1, s2) = (fitch_score(&p.t1, &f)?, fitch_score(&p.t2, &f)?);
            Ok(Outcome::check(
                s2 >= s1 + (1 << i),
                || json!({"stage": i, "score1": s1, "score2": s2}),
            ))
        })());
    }
    run
}

pub fn petersen() -> UGraph {
    let mut edges = Vec::new();
    for i in 0..5 {
        edges.push((i, (i + 1) % 5));
        edges.push((i, i + 5));
        edges.push((5 + i, 5 + (i + 2) % 5));
    }
    UGraph::from_edges(10, &edges).unwrap()
}

fn complete(n: usize) -> UGraph {
    let mut g = UGraph::with_vertices(n);
    for i in 0..n {
        for j in i + 1..n {
            g.add_edge(i, j).unwrap();
        }
    }
    g
}

fn cycle(n: usize) -> UGraph {
    let edges: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    UGraph::from_edges(n, &edges).unwrap()
}

fn random_connected(n: usize, extra: usize, rng: &mut ChaCha8Rng) -> UGraph {
    let mut g = UGraph::with_vertices(n);
    for v in 1..n {
        g.add_edge(v, rng.gen_range(0..v)).unwrap();
    }
    for _ in 0..extra {
        let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if a != b {
            g.add_edge(a, b).unwrap();
        }
    }
    g
}

fn embed_minor(c: &Ctx, rng: &mut ChaCha8Rng) -> Run {
    let mut run = Run::default();
    let mut graphs = vec![complete(4), cycle(5), petersen()];
    for _ in 0..c.scale.samples / 4 {
        let n = rng.gen_range(3..=8);
        let extra = rng.gen_range(1..=n);
        let g = random_connected(n, extra, rng);
        if g.max_degree() >= 2 {
            graphs.push(g);
        }
    }
    for g in graphs {
        run.push((|| {
            let e = embed_graph_as_display_minor(&g)?;
            let ok = verify_minor_model(&e.model) && e.audit.holds();
            Ok(Outcome::check(
                ok,
                || json!({"graph": g.to_json_value(), "audit": e.audit}),
            ))
        })());
    }
    run
}

fn grid_minor(c: &Ctx, _rng: &mut ChaCha8Rng) -> Run {
    let mut run = Run::default();
    for k in 3..=c.scale.grid {
        run.push((|| {
            let p = grid_display_pair(k)?;
            let taxa = p.t1.taxa().len();
            let nodes = p.display()?.vertex_count();
            let grid_tw = treewidth(&grid_graph(k))?;
            let ok = taxa == (k - 1) * (k - 1) + 3
                && nodes == 3 * (k - 1) * (k - 1) + 5
                && verify_minor_model(&p.model)
                && grid_tw == k;
            Ok(Outcome::check(
                ok,
                || json!({"k": k, "taxa": taxa, "nodes": nodes, "grid_tw": grid_tw}),
            ))
        })());
    }
    run
}

fn display_bounds(c: &Ctx, rng: &mut ChaCha8Rng) -> Run {
    let mut run = Run::default();
    for k in 0..c.scale.samples {
        let n = rng.gen_range(4..=c.scale.max_taxa.min(7));
        let r = if k == 0 {
            0
        } else {
            rng.gen_range(1..=c.scale.max_r)
        };
        let taxa = taxon_names(n);
        let t = random_tree_with(&taxa, rng).unwrap();
        let other = random_tree_with(&taxa, rng).unwrap();
        let net = generate::network_over(&t, r, rng);
        let mut finding = None;
        run.push((|| {
            let net = net?;
            let cert = displays(&net, &t, DEFAULT_MAX_R)?.ok_or(Error::NotDisplayed)?;
            let valid = validate_certificate(&net, &t, &cert);
            let b = check_display_bounds(&net, &t)?;
            let sharp = r > 0 || b.tw_display == 2;
            if displays(&net, &other, DEFAULT_MAX_R)?.is_none() {
                let twd = treewidth(&display::build(&net, &other)?.graph)?;
                if twd == b.tw_network {
                    finding = Some(json!({"network": net.graph().to_json_value(), "tree": nwk(&other),
                                          "tw": twd, "kind": "not displayed, treewidth not increased"}));
                }
            }
            Ok(Outcome::check(valid && b.holds() && sharp, || {
                json!({"network": net.graph().to_json_value(), "tree": nwk(&t), "bounds": b, "certificate_valid": valid})
            }))
        })());
        run.findings.extend(finding);
    }
    run
}

fn tbr_diameter(c: &Ctx, _rng: &mut ChaCha8Rng) -> Run {
    let mut run = Run::default();
    let top = if c.scale.exhaustive_taxa >= 6 { 6 } else { 5 };
    for n in 4..=top {
        run.push((|| {
            let trees = all_topologies(&taxon_names(n))?;
            let worst = trees
                .par_iter()
                .enumerate()
                .map(|(i, a)| {
                    trees[i + 1..]
                        .iter()
                        .map(|b| d_tbr(a, b))
                        .try_fold(0, |m, d| d.map(|d| m.max(d)))
                })
                .try_reduce(|| 0, |x, y| Ok(x.max(y)))?;
            let bound = tbr_diameter_upper(n)?;
            Ok(Outcome::check(
                worst <= bound,
                || json!({"n": n, "max_d_tbr": worst, "bound": bound}),
            ))
        })());
    }
    run
}

fn dtw_le_dtbr(c: &Ctx, rng: &mut ChaCha8Rng) -> Run {
    let mut run = Run::default();
    for _ in 0..c.scale.samples * 2 {
        let n = rng.gen_range(4..=c.scale.maf_taxa);
        let pair = random_pair(n, rng);
        run.push((|| {
            let (a, b) = pair?;
            let tw = d_tw(&a, &b)?.value;
            let tbr = d_tbr(&a, &b)?;
            Ok(Outcome::check(
                tw <= tbr,
                || json!({"t1": nwk(&a), "t2": nwk(&b), "d_tw": tw, "d_tbr": tbr}),
            ))
        })());
    }
    run
}

fn triangle_search(c: &Ctx, rng: &mut ChaCha8Rng) -> Run {
    let mut run = Run::default();
    for _ in 0..c.scale.samples * 2 {
        let n = rng.gen_range(5..=c.scale.max_taxa.min(8));
        let taxa = taxon_names(n);
        let trees: Vec<PhyloTree> = (0..3)
            .map(|_| random_tree_with(&taxa, rng).unwrap())
            .collect();
        let mut found = None;
        run.push((|| {
            let d = |i: usize, j: usize| d_tw(&trees[i], &trees[j]).map(|r| r.value);
            let (ab, bc, ac) = (d(0, 1)?, d(1, 2)?, d(0, 2)?);
            for (x, y, z) in [(ab, bc, ac), (ab, ac, bc), (ac, bc, ab)] {
                if z > x + y {
                    found = Some(json!({"trees": trees.iter().map(nwk).collect::<Vec<_>>(), "d": [ab, bc, ac]}));
                }
            }
            Ok(Outcome::Pass)
        })());
        run.findings.extend(found);
    }
    run
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smoke_passes_and_is_deterministic() {
        let opts = VerifyOptions {
            only: vec![
                "cps-invariance".into(),
                "doubling-tw3".into(),
                "grid-minor".into(),
            ],
            ..VerifyOptions::default()
        };
        let a = verify_all(&opts).unwrap();
        assert!(a.iter().all(|r| r.ok()), "{}", format_table(&a));
        let b = verify_all(&opts).unwrap();
        let strip = |rs: &[ClaimReport]| {
            rs.iter()
                .map(|r| (r.id, r.passed, r.failed, r.skipped))
                .collect::<Vec<_>>()
        };
        assert_eq!(strip(&a), strip(&b));
    }

    #[test]
    fn corrupted_cps_is_caught() {
        let opts = VerifyOptions {
            only: vec!["cps-invariance".into()],
            fault: Some(Fault::CorruptCps),
            ..VerifyOptions::default()
        };
        let r = verify_all(&opts).unwrap();
        assert!(!r[0].ok());
        let ce = r[0].counterexample.as_ref().unwrap();
        let t1 = PhyloTree::from_newick(ce["t1"].as_str().unwrap()).unwrap();
        let t2 = PhyloTree::from_newick(ce["t2"].as_str().unwrap()).unwrap();
        let r1 = PhyloTree::from_newick(ce["reduced1"].as_str().unwrap()).unwrap();
        let r2 = PhyloTree::from_newick(ce["reduced2"].as_str().unwrap()).unwrap();
        assert_ne!(d_tw(&t1, &t2).unwrap().value, d_tw(&r1, &r2).unwrap().value);
    }

    #[test]
    fn unknown_inputs() {
        assert!("huge".parse::<Profile>().is_err());
        let opts = VerifyOptions {
            only: vec!["nope".into()],
            ..VerifyOptions::default()
        };
        assert!(verify_all(&opts).is_err());
        assert_eq!(claim_ids().len(), 17);
    }
}
