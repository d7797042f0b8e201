//! Finite partial orders over an indexed ground set.
//!
//! A poset on `d` elements is stored as its reflexive transitive closure: bit
//! matrix rows `up[i] = { j : p_i ≤ p_j }` and the transposed `down[j]`.
//! Construction from an arbitrary relation list closes it with a Warshall
//! sweep over bit rows (`O(d^3 / w)` for word size `w`) and rejects cycles.
//!
//! Rooted posets place a maximum element at index 0; they arise by augmenting
//! a data poset with a synthetic root and are the geometric home of the norm
//! ball sampled elsewhere in this crate.

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poset {
    d: usize,
    up: Vec<FixedBitSet>,
    down: Vec<FixedBitSet>,
    labels: Option<Vec<String>>,
}

/// Depth and size of the transitive reduction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PosetMetrics {
    /// Number of edges on a longest chain of the reduction.
    pub depth: usize,
    /// Number of covering relations.
    pub reduced_edges: usize,
}

#[derive(Serialize, Deserialize)]
struct PosetFile {
    d: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
    #[serde(default)]
    relations: Vec<(usize, usize)>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    notes: Option<String>,
}

impl Poset {
    /// Builds the poset generated by `relations`, where `(i, j)` declares
    /// `p_i ≤ p_j`. The list need not be transitively closed.
    pub fn from_relations(d: usize, relations: &[(usize, usize)]) -> Result<Self> {
        Self::from_relations_labeled(d, relations, None)
    }

    pub fn from_relations_labeled(
        d: usize,
        relations: &[(usize, usize)],
        labels: Option<Vec<String>>,
    ) -> Result<Self> {
        if let Some(ref ls) = labels {
            if ls.len() != d {
                return Err(Error::LabelCount { expected: d, found: ls.len() });
            }
            let mut seen = std::collections::HashSet::new();
            for l in ls {
                if !seen.insert(l.as_str()) {
                    return Err(Error::DuplicateLabel { label: l.clone() });
                }
            }
        }
        let mut up = vec![FixedBitSet::with_capacity(d); d];
        for (i, row) in up.iter_mut().enumerate() {
            row.insert(i);
        }
        for &(i, j) in relations {
            for index in [i, j] {
                if index >= d {
                    return Err(Error::IndexOutOfRange { index, d });
                }
            }
            up[i].insert(j);
        }
        // Warshall closure over bit rows.
        for k in 0..d {
            let row_k = up[k].clone();
            for i in 0..d {
                if i != k && up[i].contains(k) {
                    up[i].union_with(&row_k);
                }
            }
        }
        for i in 0..d {
            for j in up[i].ones() {
                if j != i && up[j].contains(i) {
                    return Err(Error::Cycle { i: i.min(j), j: i.max(j) });
                }
            }
        }
        Ok(Self::from_closed_rows(up, labels))
    }

    /// A total order `p_0 ≤ p_1 ≤ … ≤ p_{n-1}`.
    pub fn chain(n: usize) -> Self {
        let mut up = vec![FixedBitSet::with_capacity(n); n];
        for (i, row) in up.iter_mut().enumerate() {
            row.insert_range(i..n);
        }
        Self::from_closed_rows(up, None)
    }

    /// `n` pairwise incomparable elements.
    pub fn antichain(n: usize) -> Self {
        let mut up = vec![FixedBitSet::with_capacity(n); n];
        for (i, row) in up.iter_mut().enumerate() {
            row.insert(i);
        }
        Self::from_closed_rows(up, None)
    }

    fn from_closed_rows(up: Vec<FixedBitSet>, labels: Option<Vec<String>>) -> Self {
        let d = up.len();
        let mut down = vec![FixedBitSet::with_capacity(d); d];
        for (i, row) in up.iter().enumerate() {
            for j in row.ones() {
                down[j].insert(i);
            }
        }
        Poset { d, up, down, labels }
    }

    /// Parses the poset file format: a JSON object with fields `d`,
    /// `relations` (pairs `[i, j]` meaning `p_i ≤ p_j`), optional `labels`,
    /// and an optional free-form `notes` string.
    pub fn parse(text: &str) -> Result<Self> {
        let file: PosetFile =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::from_relations_labeled(file.d, &file.relations, file.labels)
    }

    /// Serializes to the poset file format, emitting the transitive reduction
    /// as the relation list.
    pub fn to_file_string(&self) -> String {
        self.to_file_string_with_notes(None)
    }

    /// [`Poset::to_file_string`] with a free-form `notes` field attached.
    pub fn to_file_string_with_notes(&self, notes: Option<String>) -> String {
        let file = PosetFile {
            d: self.d,
            labels: self.labels.clone(),
            relations: self.covers(),
            notes,
        };
        let mut out = serde_json::to_string_pretty(&file).expect("poset serializes");
        out.push('\n');
        out
    }

    pub fn len(&self) -> usize {
        self.d
    }

    pub fn is_empty(&self) -> bool {
        self.d == 0
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// `p_i ≤ p_j` in the closure (reflexive).
    pub fn le(&self, i: usize, j: usize) -> bool {
        self.up[i].contains(j)
    }

    pub fn lt(&self, i: usize, j: usize) -> bool {
        i != j && self.up[i].contains(j)
    }

    /// `{ j : p_i ≤ p_j }`, including `i`.
    pub fn up_set(&self, i: usize) -> &FixedBitSet {
        &self.up[i]
    }

    /// `{ j : p_j ≤ p_i }`, including `i`.
    pub fn down_set(&self, i: usize) -> &FixedBitSet {
        &self.down[i]
    }

    pub fn maximal_elements(&self) -> Vec<usize> {
        (0..self.d).filter(|&i| self.up[i].count_ones(..) == 1).collect()
    }

    pub fn minimal_elements(&self) -> Vec<usize> {
        (0..self.d).filter(|&i| self.down[i].count_ones(..) == 1).collect()
    }

    /// Upward closure of a set of elements.
    pub fn up_closure(&self, elements: impl IntoIterator<Item = usize>) -> FixedBitSet {
        let mut out = FixedBitSet::with_capacity(self.d);
        for e in elements {
            out.union_with(&self.up[e]);
        }
        out
    }

    /// Minimal elements of `set` under the induced order.
    pub fn min_of_set(&self, set: &FixedBitSet) -> FixedBitSet {
        let mut out = FixedBitSet::with_capacity(self.d);
        for i in set.ones() {
            let mut below = self.down[i].clone();
            below.intersect_with(set);
            if below.count_ones(..) == 1 {
                out.insert(i);
            }
        }
        out
    }

    /// Whether the binary vector respects the order: `p_i ≤ p_j` implies
    /// `x_i ≤ x_j` (equivalently, the support is upward closed).
    pub fn respects_order(&self, x: &[u8]) -> Result<bool> {
        if x.len() != self.d {
            return Err(Error::LengthMismatch { expected: self.d, found: x.len() });
        }
        if let Some(&bad) = x.iter().find(|&&b| b > 1) {
            return Err(Error::InvalidParameter(format!(
                "record entries must be 0 or 1, got {bad}"
            )));
        }
        for i in 0..self.d {
            if x[i] == 1 {
                for j in self.up[i].ones() {
                    if x[j] == 0 {
                        return Ok(false);
                    }
                }
            }
        }
        Ok(true)
    }

    /// Covering relations `(child, parent)` of the transitive reduction.
    pub fn covers(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.d {
            for j in self.up[i].ones() {
                if j == i {
                    continue;
                }
                let mut between = self.up[i].clone();
                between.intersect_with(&self.down[j]);
                if between.count_ones(..) == 2 {
                    out.push((i, j));
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Depth and reduced edge count. Both antichains and the empty poset have
    /// depth 0.
    pub fn metrics(&self) -> PosetMetrics {
        let mut order: Vec<usize> = (0..self.d).collect();
        order.sort_unstable_by_key(|&i| self.down[i].count_ones(..));
        let mut height = vec![0usize; self.d];
        let mut depth = 0;
        for &i in &order {
            let mut h = 0;
            for c in self.down[i].ones() {
                if c != i {
                    h = h.max(height[c] + 1);
                }
            }
            height[i] = h;
            depth = depth.max(h);
        }
        PosetMetrics { depth, reduced_edges: self.covers().len() }
    }

    /// Order-preserving content hash (labels excluded): hex prefix of a
    /// SHA-256 digest over the closure matrix.
    pub fn hash_hex(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(b"poset:v1:");
        hasher.update(self.d.to_le_bytes());
        for row in &self.up {
            for block in row.as_slice() {
                hasher.update(block.to_le_bytes());
            }
        }
        let digest = hasher.finalize();
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Elements sorted so that every element appears after all elements below
    /// it (a linear extension of the whole poset).
    pub fn topological_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.d).collect();
        order.sort_by_key(|&i| (self.down[i].count_ones(..), i));
        order
    }
}

/// A poset with a unique maximum at index 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootedPoset {
    inner: Poset,
}

impl RootedPoset {
    /// Adds a synthetic root above every element of `base`; base element `i`
    /// becomes index `i + 1`. The empty poset is legal input and yields the
    /// one-element rooted poset.
    pub fn augment(base: &Poset) -> Self {
        let d = base.d + 1;
        let mut up = vec![FixedBitSet::with_capacity(d); d];
        up[0].insert(0);
        for i in 0..base.d {
            up[i + 1].insert(0);
            for j in base.up[i].ones() {
                up[i + 1].insert(j + 1);
            }
        }
        let labels = base.labels.as_ref().map(|ls| {
            let mut root = String::from("root");
            while ls.contains(&root) {
                root.insert(0, '_');
            }
            std::iter::once(root).chain(ls.iter().cloned()).collect()
        });
        RootedPoset { inner: Poset::from_closed_rows(up, labels) }
    }

    /// Wraps a poset that already has its unique maximum at index 0.
    pub fn from_poset(poset: Poset) -> Result<Self> {
        if poset.is_empty() {
            return Err(Error::EmptyPoset);
        }
        let rooted = (0..poset.d).all(|i| poset.le(i, 0)) && poset.up[0].count_ones(..) == 1;
        if !rooted {
            return Err(Error::NotRooted);
        }
        Ok(RootedPoset { inner: poset })
    }

    /// Total number of elements including the root.
    pub fn dimension(&self) -> usize {
        self.inner.d
    }

    pub fn poset(&self) -> &Poset {
        &self.inner
    }

    /// The poset with the root removed; element `i + 1` becomes index `i`.
    pub fn root_stripped(&self) -> Poset {
        let n = self.inner.d - 1;
        let mut up = vec![FixedBitSet::with_capacity(n); n];
        for i in 0..n {
            for j in self.inner.up[i + 1].ones() {
                if j > 0 {
                    up[i].insert(j - 1);
                }
            }
        }
        let labels = self
            .inner
            .labels
            .as_ref()
            .map(|ls| ls.iter().skip(1).cloned().collect());
        Poset::from_closed_rows(up, labels)
    }
}
