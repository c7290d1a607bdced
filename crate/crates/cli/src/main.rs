use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use phylotw::constructions::{
    doubling_pair, embed_graph_as_display_minor, grid_display_pair, MinorModel,
};
use phylotw::display_check::{displays, validate_certificate, DEFAULT_MAX_R};
use phylotw::distances::{d_mp_2state, d_tw, maximum_agreement_forest};
use phylotw::newick::{parse_network, parse_tree};
use phylotw::phylo::{common_splits, find_common_chains, quartets};
use phylotw::reductions::{apply_cps_measured, clip_chain, cluster_decompose};
use phylotw::treewidth::{bounded_treewidth, TwOptions};
use phylotw::verify::{format_table, verify_all, Profile, VerifyOptions};
use phylotw::{display, Error, PhyloTree, Phylogeny, Split, UGraph};

#[derive(Parser)]
#[command(
    name = "phylo",
    version,
    about = "Treewidth of phylogenetic display graphs"
)]
struct Cli {
    /// Master seed for anything randomized.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Machine-readable output.
    #[arg(long, global = true)]
    json: bool,
    /// Suppress everything except errors; the exit status still reports.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Newick to JSON graph or back, by file extension.
    Convert {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Quartet topologies of a tree.
    Quartets { tree: PathBuf },
    /// Maximal common chains of two trees.
    Chains { t1: PathBuf, t2: PathBuf },
    /// Nontrivial common splits of two trees.
    Splits { t1: PathBuf, t2: PathBuf },
    /// Display graph of two trees.
    Display {
        t1: PathBuf,
        t2: PathBuf,
        #[arg(long)]
        normalize: bool,
        /// `.json` or `.dot`; stdout (JSON) when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Treewidth of a JSON graph.
    Tw {
        graph: PathBuf,
        #[arg(long, default_value_t = phylotw::treewidth::DEFAULT_EXACT_LIMIT)]
        exact_limit: usize,
        /// Wall-clock budget for branch and bound.
        #[arg(long)]
        budget: Option<f64>,
        #[arg(long)]
        emit_decomposition: Option<PathBuf>,
    },
    /// Distance between two trees.
    Dist {
        kind: DistKind,
        t1: PathBuf,
        t2: PathBuf,
    },
    /// Apply one reduction rule and report treewidth before and after.
    Reduce {
        rule: Rule,
        t1: PathBuf,
        t2: PathBuf,
        #[arg(long, default_value_t = 0)]
        chain_index: usize,
        #[arg(long, default_value_t = 2)]
        d: usize,
        /// Common split such as "a,b|c,d"; the first found when absent.
        #[arg(long)]
        split: Option<String>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Build one of the lower-bound constructions.
    Construct {
        #[command(subcommand)]
        what: Construct,
    },
    /// Whether a network displays a tree.
    Displays {
        network: PathBuf,
        tree: PathBuf,
        #[arg(long, default_value_t = DEFAULT_MAX_R)]
        max_r: usize,
        #[arg(long)]
        certificate: Option<PathBuf>,
    },
    /// Replay the claim suites.
    Verify {
        #[arg(long, default_value = "smoke", value_parser = ["smoke", "desk", "extended"])]
        profile: String,
        /// Run only this claim; repeatable.
        #[arg(long = "claim")]
        claims: Vec<String>,
    },
}

#[derive(Subcommand)]
enum Construct {
    /// Doubled quartet pair at stage I.
    Double {
        #[arg(long)]
        i: usize,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Tree pair whose display graph has the given graph as a minor.
    Embed {
        graph: PathBuf,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Tree pair whose display graph has a K x K grid minor.
    Grid {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum DistKind {
    Tw,
    Tbr,
    Mp2,
}

#[derive(Clone, Copy, ValueEnum)]
enum Rule {
    Cps,
    Chain,
    Cluster,
}

struct Out {
    json: bool,
    quiet: bool,
}

impl Out {
    /// JSON when asked for, otherwise the human line.
    fn emit(&self, value: &Value, human: impl FnOnce() -> String) {
        if self.quiet {
            return;
        }
        if self.json {
            println!("{}", serde_json::to_string_pretty(value).unwrap());
        } else {
            println!("{}", human());
        }
    }

    fn emit_json(&self, value: &Value) {
        if !self.quiet {
            println!("{}", serde_json::to_string_pretty(value).unwrap());
        }
    }
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, text: &str) -> anyhow::Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn tree(path: &Path) -> anyhow::Result<PhyloTree> {
    parse_tree(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn graph(path: &Path) -> anyhow::Result<UGraph> {
    UGraph::from_json(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

/// Newick of the tree with degree-2 construction vertices suppressed.
fn newick(t: &PhyloTree) -> String {
    t.suppress_roots().to_newick()
}

fn is_json(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "json")
}

fn emit_pair(
    out: &Out,
    dir: Option<&Path>,
    t1: &PhyloTree,
    t2: &PhyloTree,
    model: &MinorModel,
    extra: Value,
) -> anyhow::Result<()> {
    if let Some(dir) = dir {
        fs::create_dir_all(dir)?;
        write(&dir.join("t1.nwk"), &format!("{}\n", newick(t1)))?;
        write(&dir.join("t2.nwk"), &format!("{}\n", newick(t2)))?;
        write(
            &dir.join("model.json"),
            &serde_json::to_string_pretty(model)?,
        )?;
    }
    let mut doc = json!({"t1": newick(t1), "t2": newick(t2), "model": model});
    if let (Value::Object(d), Value::Object(e)) = (&mut doc, extra) {
        d.extend(e);
    }
    out.emit(&doc, || format!("{}\n{}", newick(t1), newick(t2)));
    Ok(())
}

/// Returns false when the command ran but its check failed.
fn run(cli: Cli) -> anyhow::Result<bool> {
    let out = Out {
        json: cli.json,
        quiet: cli.quiet,
    };
    match cli.cmd {
        Cmd::Convert { input, out: dest } => {
            let text = read(&input)?;
            if is_json(&input) {
                let t = PhyloTree::new(UGraph::from_json(&text)?)?;
                write(&dest, &format!("{}\n", t.to_newick()))?;
            } else {
                write(&dest, &parse_tree(&text)?.graph().to_json())?;
            }
        }
        Cmd::Quartets { tree: p } => {
            let qs: Vec<String> = quartets(&tree(&p)?)?
                .iter()
                .map(|q| q.to_string())
                .collect();
            out.emit_json(&json!(qs));
        }
        Cmd::Chains { t1, t2 } => {
            let cs: Vec<Vec<String>> = find_common_chains(&tree(&t1)?, &tree(&t2)?)?
                .into_iter()
                .map(|c| c.taxa)
                .collect();
            out.emit_json(&json!(cs));
        }
        Cmd::Splits { t1, t2 } => {
            let ss: Vec<String> = common_splits(&tree(&t1)?, &tree(&t2)?)?
                .iter()
                .map(|c| c.split.to_string())
                .collect();
            out.emit_json(&json!(ss));
        }
        Cmd::Display {
            t1,
            t2,
            normalize,
            out: dest,
        } => {
            let mut d = display::build(&tree(&t1)?, &tree(&t2)?)?;
            if normalize {
                d = display::normalize(&d)?;
            }
            match dest {
                Some(p) if p.extension().is_some_and(|e| e == "dot") => write(&p, &d.to_dot())?,
                Some(p) => write(&p, &d.graph.to_json())?,
                None => out.emit_json(&serde_json::to_value(d.graph.to_json_value())?),
            }
        }
        Cmd::Tw {
            graph: p,
            exact_limit,
            budget,
            emit_decomposition,
        } => {
            let g = graph(&p)?;
            let opts = TwOptions {
                exact_limit,
                time_budget: budget.map(Duration::from_secs_f64),
                ..TwOptions::default()
            };
            let r = bounded_treewidth(&g, &opts)?;
            if let Some(path) = emit_decomposition {
                write(&path, &r.decomposition.to_json())?;
            }
            out.emit(
                &json!({"lower": r.lower, "upper": r.upper, "exact": r.exact}),
                || {
                    if r.exact {
                        format!("tw = {}", r.upper)
                    } else {
                        format!("{} <= tw <= {}", r.lower, r.upper)
                    }
                },
            );
            if !r.exact {
                return Err(Error::Inexact {
                    lower: r.lower,
                    upper: r.upper,
                }
                .into());
            }
        }
        Cmd::Dist { kind, t1, t2 } => {
            let (a, b) = (tree(&t1)?, tree(&t2)?);
            let (value, certificate) = match kind {
                DistKind::Tw => {
                    let r = d_tw(&a, &b)?;
                    (r.value, serde_json::to_value(&r.tw.decomposition)?)
                }
                DistKind::Tbr => {
                    let f = maximum_agreement_forest(&a, &b)?;
                    (f.blocks.len() - 1, serde_json::to_value(&f.blocks)?)
                }
                DistKind::Mp2 => {
                    let r = d_mp_2state(&a, &b)?;
                    (r.value, serde_json::to_value(&r.witness)?)
                }
            };
            out.emit(&json!({"value": value, "certificate": certificate}), || {
                value.to_string()
            });
        }
        Cmd::Reduce {
            rule,
            t1,
            t2,
            chain_index,
            d,
            split,
            report,
        } => {
            let (a, b) = (tree(&t1)?, tree(&t2)?);
            let doc = match rule {
                Rule::Cps => serde_json::to_value(apply_cps_measured(&a, &b)?)?,
                Rule::Chain => {
                    let chains = find_common_chains(&a, &b)?;
                    let Some(c) = chains.get(chain_index) else {
                        bail!(Error::OutOfRange(format!(
                            "chain index {chain_index}, {} common chains",
                            chains.len()
                        )));
                    };
                    let before = phylotw::treewidth::treewidth(&display::build(&a, &b)?.graph)?;
                    let (x, y) = clip_chain(&a, &b, c, d)?;
                    let after = phylotw::treewidth::treewidth(&display::build(&x, &y)?.graph)?;
                    json!({"chain": c.taxa, "d": d, "t1": x.to_newick(), "t2": y.to_newick(),
                           "tw_before": before, "tw_after": after})
                }
                Rule::Cluster => {
                    let s = match split {
                        Some(s) => Split::parse(&s)?,
                        None => {
                            common_splits(&a, &b)?
                                .into_iter()
                                .next()
                                .ok_or_else(|| {
                                    Error::NotCommonSplit("trees share no nontrivial split".into())
                                })?
                                .split
                        }
                    };
                    let parts = cluster_decompose(&a, &b, &s)?;
                    json!({"split": s.to_string(), "analysis": parts.analyse()?})
                }
            };
            if let Some(p) = report {
                write(&p, &serde_json::to_string_pretty(&doc)?)?;
            }
            out.emit_json(&doc);
        }
        Cmd::Construct { what } => match what {
            // the decomposition refers to the display graph of the unsuppressed pair
            Construct::Double { i, out_dir } => {
                let p = doubling_pair(i)?;
                let doc = json!({"stage": i, "t1": newick(&p.t1), "t2": newick(&p.t2), "decomposition": p.decomposition});
                if let Some(dir) = out_dir {
                    fs::create_dir_all(&dir)?;
                    write(&dir.join("t1.nwk"), &format!("{}\n", newick(&p.t1)))?;
                    write(&dir.join("t2.nwk"), &format!("{}\n", newick(&p.t2)))?;
                    write(&dir.join("decomposition.json"), &p.decomposition.to_json())?;
                }
                out.emit(&doc, || format!("{}\n{}", newick(&p.t1), newick(&p.t2)));
            }
            Construct::Embed { graph: g, out_dir } => {
                let e = embed_graph_as_display_minor(&graph(&g)?)?;
                emit_pair(
                    &out,
                    out_dir.as_deref(),
                    &e.t1,
                    &e.t2,
                    &e.model,
                    json!({"audit": e.audit}),
                )?;
            }
            Construct::Grid { k, out_dir } => {
                let p = grid_display_pair(k)?;
                emit_pair(
                    &out,
                    out_dir.as_deref(),
                    &p.t1,
                    &p.t2,
                    &p.model,
                    json!({"k": k}),
                )?;
            }
        },
        Cmd::Displays {
            network,
            tree: t,
            max_r,
            certificate,
        } => {
            let n = parse_network(&read(&network)?)
                .with_context(|| format!("parsing {}", network.display()))?;
            let t = tree(&t)?;
            let cert = displays(&n, &t, max_r)?;
            let valid = cert
                .as_ref()
                .is_none_or(|c| validate_certificate(&n, &t, c));
            if let (Some(c), Some(p)) = (&cert, certificate) {
                write(&p, &serde_json::to_string_pretty(c)?)?;
            }
            out.emit(
                &json!({"displays": cert.is_some(), "certificate_valid": valid}),
                || {
                    if cert.is_some() {
                        "displayed"
                    } else {
                        "not displayed"
                    }
                    .to_string()
                },
            );
            return Ok(valid);
        }
        Cmd::Verify { profile, claims } => {
            let profile: Profile = profile.parse()?;
            let reports = verify_all(&VerifyOptions {
                seed: cli.seed,
                profile,
                fault: None,
                only: claims,
            })?;
            let ok = reports.iter().all(|r| r.ok());
            out.emit(&serde_json::to_value(&reports)?, || {
                format_table(&reports).trim_end().to_string()
            });
            return Ok(ok);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            let limit = e
                .chain()
                .any(|c| c.downcast_ref::<Error>().is_some_and(Error::is_size_limit));
            ExitCode::from(if limit { 3 } else { 1 })
        }
    }
}
