//! Treewidth of display graphs of phylogenetic trees and networks.

pub mod constructions;
pub mod display;
pub mod display_check;
pub mod distances;
pub mod error;
pub mod generate;
pub mod graph;
pub mod newick;
pub mod phylo;
pub mod reductions;
pub mod treewidth;
pub mod verify;

pub use display::{DisplayGraph, Side};
pub use error::{Error, Result};
pub use graph::{Edge, UGraph, VertexId, VertexSet};
pub use phylo::{Chain, PhyloNetwork, PhyloTree, Phylogeny, Quartet, Split, TaxonSet};
pub use treewidth::{TreeDecomposition, TwOptions, TwResult};
