//! Shared fixtures for the criterion benchmarks.

use posetball::{Poset, RootedPoset};

/// Complete binary in-tree with `levels` levels (`2^levels − 1` elements):
/// node `i` precedes its parent `(i − 1) / 2`, so element 0 is the unique
/// maximum and the poset is already rooted.
pub fn binary_tree_poset(levels: u32) -> Poset {
    let n = (1usize << levels) - 1;
    let relations: Vec<(usize, usize)> = (1..n).map(|i| (i, (i - 1) / 2)).collect();
    Poset::from_relations(n, &relations).expect("tree is acyclic")
}

/// A root adjoined over a `d`-element chain; ball dimension `d + 1`.
pub fn rooted_chain(d: usize) -> RootedPoset {
    RootedPoset::augment(&Poset::chain(d))
}

/// A root adjoined over `d` incomparable elements; ball dimension `d + 1`.
pub fn rooted_antichain(d: usize) -> RootedPoset {
    RootedPoset::augment(&Poset::antichain(d))
}
