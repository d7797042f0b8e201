//! Random partial orders via a Markov chain on labeled DAGs.
//!
//! The chain toggles arcs: each move draws an ordered vertex pair
//! uniformly, removes the arc if present, adds it if that keeps the
//! digraph acyclic, and otherwise stays put. Toggle moves are symmetric
//! and the stay moves make the chain aperiodic, so the stationary
//! distribution is uniform over labeled DAGs. The poset is the
//! reachability order of the final DAG.
//!
//! Arc sets are stored as one `u64` row mask per vertex (bit `j` of row
//! `i` is the arc `i → j`), which caps the chain at 64 vertices but keeps
//! the per-move cycle check down to a handful of word operations — a
//! default run makes `10·d⁴` moves.

use rand::Rng;

use crate::error::{Error, Result};
use crate::poset::Poset;

/// Largest supported vertex count (one `u64` row mask per vertex).
pub const MAX_DAG_VERTICES: usize = 64;

/// Markov chain state: an acyclic digraph on `d` labeled vertices.
#[derive(Debug, Clone)]
pub struct DagChain {
    d: usize,
    /// `arcs[i]` bit `j` set means arc `i → j` ("i below j" as a poset).
    arcs: Vec<u64>,
    steps: u64,
}

impl DagChain {
    /// Starts from the empty digraph on `d ≤ 64` vertices.
    pub fn new(d: usize) -> Result<Self> {
        if d > MAX_DAG_VERTICES {
            return Err(Error::CapExceeded { d, cap: MAX_DAG_VERTICES });
        }
        Ok(DagChain { d, arcs: vec![0; d], steps: 0 })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn steps_taken(&self) -> u64 {
        self.steps
    }

    /// Row masks of the current arc set.
    pub fn arcs(&self) -> &[u64] {
        &self.arcs
    }

    /// True when some directed path leads from `from` to `to`.
    fn reachable(&self, from: usize, to: usize) -> bool {
        let target = 1u64 << to;
        let mut reach = self.arcs[from];
        if reach & target != 0 {
            return true;
        }
        let mut frontier = reach;
        while frontier != 0 {
            let v = frontier.trailing_zeros() as usize;
            frontier &= frontier - 1;
            let fresh = self.arcs[v] & !reach;
            if fresh & target != 0 {
                return true;
            }
            reach |= fresh;
            frontier |= fresh;
        }
        false
    }

    /// One toggle move. With fewer than two vertices there are no ordered
    /// pairs and the move is a no-op.
    pub fn step<R: Rng>(&mut self, rng: &mut R) {
        self.steps += 1;
        if self.d < 2 {
            return;
        }
        let i = rng.gen_range(0..self.d);
        let mut j = rng.gen_range(0..self.d - 1);
        if j >= i {
            j += 1;
        }
        let bit = 1u64 << j;
        if self.arcs[i] & bit != 0 {
            self.arcs[i] &= !bit;
        } else if !self.reachable(j, i) {
            // Adding i → j is safe exactly when j cannot already reach i.
            self.arcs[i] |= bit;
        }
    }

    pub fn run<R: Rng>(&mut self, steps: u64, rng: &mut R) {
        for _ in 0..steps {
            self.step(rng);
        }
    }

    /// Compact arc-set fingerprint for histogramming small state spaces.
    pub fn key(&self) -> u64 {
        assert!(self.d * self.d <= 64, "key only supports d*d <= 64 arcs");
        let mut k = 0u64;
        for (i, &row) in self.arcs.iter().enumerate() {
            k |= row << (i * self.d);
        }
        k
    }
}

/// Default chain length: `10·d⁴` moves (at least one).
pub fn default_steps(d: usize) -> u64 {
    (10 * d.pow(4) as u64).max(1)
}

/// Runs a fresh chain for `steps` moves and returns its arc row masks.
pub fn random_dag<R: Rng>(d: usize, steps: u64, rng: &mut R) -> Result<Vec<u64>> {
    let mut chain = DagChain::new(d)?;
    chain.run(steps, rng);
    Ok(chain.arcs)
}

/// Reachability order of an acyclic digraph given as row masks
/// (bit `j` of `arcs[i]` is the arc `i → j`, meaning `i ≼ j`).
pub fn dag_to_poset(arcs: &[u64]) -> Result<Poset> {
    let d = arcs.len();
    let mut relations = Vec::new();
    for (i, &row) in arcs.iter().enumerate() {
        let mut rest = row;
        while rest != 0 {
            let j = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            if j >= d {
                return Err(Error::IndexOutOfRange { index: j, d });
            }
            relations.push((i, j));
        }
    }
    Poset::from_relations(d, &relations)
}

/// Uniform-ish random poset on `d` labeled elements: default-length DAG
/// chain followed by transitive closure. Uniform over labeled DAGs, which
/// over-weights posets with many DAG representations.
pub fn random_poset<R: Rng>(d: usize, rng: &mut R) -> Result<Poset> {
    let arcs = random_dag(d, default_steps(d), rng)?;
    dag_to_poset(&arcs)
}
