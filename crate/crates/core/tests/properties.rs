mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use phylotw::distances::{d_tbr, d_tw, fitch_score, Character};
use phylotw::phylo::{
    canonical_string, is_compatible, quartets, random_tree, restrict, taxon_names,
};
use phylotw::reductions::apply_cps;
use phylotw::treewidth::{exact_treewidth, is_valid, treewidth};
use phylotw::{display, generate, PhyloTree, Phylogeny, TaxonSet, UGraph};

fn small_graph() -> impl Strategy<Value = UGraph> {
    (1usize..=9).prop_flat_map(|n| {
        proptest::collection::vec(any::<bool>(), n * (n - 1) / 2).prop_map(move |bits| {
            let mut edges = Vec::new();
            let mut k = 0;
            for i in 0..n {
                for j in i + 1..n {
                    if bits[k] {
                        edges.push((i, j));
                    }
                    k += 1;
                }
            }
            UGraph::from_edges(n, &edges).unwrap()
        })
    })
}

fn tree_pair(lo: usize, hi: usize) -> impl Strategy<Value = (PhyloTree, PhyloTree)> {
    (lo..=hi, any::<u64>(), any::<u64>()).prop_map(|(n, s1, s2)| {
        let taxa = taxon_names(n);
        (
            random_tree(&taxa, s1).unwrap(),
            random_tree(&taxa, s2).unwrap(),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exact_engine_matches_subset_dp(g in small_graph()) {
        let r = exact_treewidth(&g).unwrap();
        prop_assert!(r.exact);
        prop_assert_eq!(r.upper, common::tw_subset_dp(&g));
        prop_assert!(is_valid(&r.decomposition, &g));
        prop_assert_eq!(r.decomposition.width, r.upper);
    }

    #[test]
    fn subdividing_display_edges_keeps_treewidth((a, b) in tree_pair(4, 8), pick in any::<usize>()) {
        let d = display::build(&a, &b).unwrap();
        let edges = d.graph.edges();
        let (sub, _) = d.graph.subdivide_edge(edges[pick % edges.len()]).unwrap();
        prop_assert_eq!(treewidth(&sub).unwrap(), treewidth(&d.graph).unwrap());
    }

    #[test]
    fn d_tw_is_symmetric_and_below_tbr((a, b) in tree_pair(4, 7)) {
        let ab = d_tw(&a, &b).unwrap().value;
        prop_assert_eq!(ab, d_tw(&b, &a).unwrap().value);
        prop_assert_eq!(ab == 0, is_compatible(&a, &b).unwrap());
        prop_assert!(ab <= d_tbr(&a, &b).unwrap());
    }

    #[test]
    fn quartets_match_restriction((a, _) in tree_pair(4, 8)) {
        prop_assert_eq!(quartets(&a).unwrap(), common::quartets_by_restriction(&a));
    }

    #[test]
    fn newick_round_trip((a, _) in tree_pair(3, 12)) {
        let back = PhyloTree::from_newick(&a.to_newick()).unwrap();
        prop_assert_eq!(canonical_string(&back), canonical_string(&a));
    }

    #[test]
    fn restriction_keeps_quartets((a, _) in tree_pair(5, 9), mask in any::<u16>()) {
        let keep: TaxonSet = a.taxa().iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, x)| x.clone()).collect();
        prop_assume!(keep.len() >= 4);
        let r = restrict(&a, &keep).unwrap();
        prop_assert!(quartets(&r).unwrap().is_subset(&quartets(&a).unwrap()));
    }

    #[test]
    fn fitch_is_bounded_by_minority_state((a, _) in tree_pair(3, 10), mask in any::<u16>()) {
        let ones: TaxonSet = a.taxa().iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, x)| x.clone()).collect();
        prop_assume!(!ones.is_empty() && ones.len() < a.taxa().len());
        let score = fitch_score(&a, &Character::binary(a.taxa(), &ones)).unwrap();
        prop_assert!(score >= 1);
        prop_assert!(score <= ones.len().min(a.taxa().len() - ones.len()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn maf_distance_matches_tbr_search((a, b) in tree_pair(4, 6)) {
        prop_assert_eq!(d_tbr(&a, &b).unwrap(), common::tbr_bfs_distance(&a, &b));
    }

    #[test]
    fn cps_keeps_d_tw(n in 5usize..=8, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b) = generate::pair_with_common_cherry(n, &mut rng).unwrap();
        prop_assume!(!is_compatible(&a, &b).unwrap());
        let r = apply_cps(&a, &b).unwrap();
        prop_assert_eq!(d_tw(&a, &b).unwrap().value, d_tw(&r.t1, &r.t2).unwrap().value);
        prop_assert!(r.t1.taxa().len() < a.taxa().len());
    }

    #[test]
    fn generated_networks_display_their_tree(n in 4usize..=6, r in 1usize..=2, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_tree(&taxon_names(n), seed).unwrap();
        let net = generate::network_over(&t, r, &mut rng).unwrap();
        prop_assert!(common::displays_by_spanning_trees(&net, &t));
        prop_assert!(phylotw::display_check::displays(&net, &t, 4).unwrap().is_some());
    }
}
