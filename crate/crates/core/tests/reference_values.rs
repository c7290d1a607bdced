//! Fixed reference values.

use phylotw::constructions::{doubling_pair, grid_display_pair};
use phylotw::distances::{d_maf, d_tw, tbr_diameter_upper};
use phylotw::reductions::{chain_grid, clip_chain};
use phylotw::treewidth::treewidth;
use phylotw::{display, Chain, PhyloTree, Phylogeny};

fn tree(s: &str) -> PhyloTree {
    PhyloTree::from_newick(s).unwrap()
}

#[test]
fn quartet_pair_distance_one() {
    let (a, b) = (tree("((a,b),(c,d));"), tree("((a,c),(b,d));"));
    let r = d_tw(&a, &b).unwrap();
    assert_eq!(r.tw.value().unwrap(), 3);
    assert_eq!(r.value, 1);
}

#[test]
fn identical_trees_have_treewidth_two() {
    let t = tree("((a,b),(c,(d,(e,f))));");
    assert_eq!(
        treewidth(&display::build(&t, &t).unwrap().graph).unwrap(),
        2
    );
}

#[test]
fn doubling_base_has_maf_distance_two() {
    let p = doubling_pair(0).unwrap();
    assert_eq!(d_maf(&p.t1, &p.t2).unwrap(), 2);
}

#[test]
fn grid_packing_counts() {
    for k in 3..=5 {
        let p = grid_display_pair(k).unwrap();
        assert_eq!(p.t1.taxa().len(), (k - 1) * (k - 1) + 3);
        assert_eq!(
            p.display().unwrap().vertex_count(),
            3 * (k - 1) * (k - 1) + 5
        );
    }
}

#[test]
fn diameter_formula() {
    // n - 3 - floor((sqrt(n - 2) - 1) / 2)
    assert_eq!(tbr_diameter_upper(4).unwrap(), 1);
    assert_eq!(tbr_diameter_upper(11).unwrap(), 7);
    assert_eq!(tbr_diameter_upper(27).unwrap(), 22);
}

#[test]
fn non_separator_chain_loses_one_under_clipping() {
    let a = tree("(((((x2,x5),x6),x7),x3),x1,x4);");
    let b = tree("(((((x3,x5),x6),x7),x2),x1,x4);");
    let c = Chain::from_taxa(&a, &b, &["x5".into(), "x6".into(), "x7".into()]).unwrap();
    let d = display::build(&a, &b).unwrap();
    let n = display::normalize(&d).unwrap();
    assert_eq!(treewidth(&n.graph).unwrap(), 4);
    assert!(!n.graph.is_separator(&chain_grid(&n, &c).unwrap()).unwrap());
    let (x, y) = clip_chain(&a, &b, &c, 2).unwrap();
    assert_eq!(
        treewidth(&display::build(&x, &y).unwrap().graph).unwrap(),
        3
    );
}
