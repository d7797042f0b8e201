//! Extended bipartitions of a poset.
//!
//! An extended bipartition splits the ground set into two disjoint blocks and
//! equips each block with a linear extension of its induced subposet. These
//! objects index the triangulation of the poset norm ball: each bipartition
//! corresponds to one simplex, so uniform sampling of the ball reduces to
//! sampling bipartitions proportionally to (equal) simplex volumes.
//!
//! Two routes are provided:
//! - [`enumerate_ebs`]: exhaustive enumeration for small posets, used as the
//!   exact reference throughout the test suite;
//! - [`EbSampler`]: the recursive sampler that removes a maximal element,
//!   recurses, and re-inserts it at a uniformly chosen valid placement. Its
//!   distribution can depend on which maximal element each step removes, so
//!   the selection rule is an explicit [`MaximalPolicy`].

use std::collections::BTreeMap;

use fixedbitset::FixedBitSet;
use rand::Rng;

use crate::error::{Error, Result};
use crate::poset::Poset;

/// Largest dimension for which [`MaximalPolicy::ExactSmall`] is available.
pub const EXACT_SMALL_MAX: usize = 10;

/// Default cap for exhaustive enumeration.
pub const ENUMERATION_CAP: usize = 12;

/// Two disjoint ordered blocks covering the ground set; each order is a
/// linear extension of the subposet induced on its block.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExtendedBipartition {
    order_a: Vec<usize>,
    order_b: Vec<usize>,
}

impl ExtendedBipartition {
    pub fn new(order_a: Vec<usize>, order_b: Vec<usize>, poset: &Poset) -> Result<Self> {
        let eb = ExtendedBipartition { order_a, order_b };
        eb.validate(poset)?;
        Ok(eb)
    }

    pub fn order_a(&self) -> &[usize] {
        &self.order_a
    }

    pub fn order_b(&self) -> &[usize] {
        &self.order_b
    }

    /// Checks the partition property and both linear extensions against the
    /// full ground set of `poset`.
    pub fn validate(&self, poset: &Poset) -> Result<()> {
        self.validate_on(poset, None)
    }

    /// As [`validate`](Self::validate), but against the subposet induced on
    /// `ground` when given.
    fn validate_on(&self, poset: &Poset, ground: Option<&FixedBitSet>) -> Result<()> {
        let d = poset.len();
        let mut seen = FixedBitSet::with_capacity(d);
        let expected = ground.map_or(d, |g| g.count_ones(..));
        if self.order_a.len() + self.order_b.len() != expected {
            return Err(Error::NotAPartition);
        }
        for &e in self.order_a.iter().chain(&self.order_b) {
            if e >= d || seen.contains(e) || ground.is_some_and(|g| !g.contains(e)) {
                return Err(Error::NotAPartition);
            }
            seen.insert(e);
        }
        for (order, side) in [(&self.order_a, 'A'), (&self.order_b, 'B')] {
            for k in 0..order.len() {
                for l in k + 1..order.len() {
                    if poset.lt(order[l], order[k]) {
                        return Err(Error::NotLinearExtension { side });
                    }
                }
            }
        }
        Ok(())
    }
}

/// Rule for choosing which maximal element the sampler removes at each step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MaximalPolicy {
    /// [`ExactSmall`](Self::ExactSmall) up to [`EXACT_SMALL_MAX`] elements,
    /// [`ChildlessPreferred`](Self::ChildlessPreferred) beyond.
    Auto,
    /// Walk up from the lowest-index element to the first maximal one.
    FirstFound,
    /// A maximal element without children when one exists, else as
    /// [`FirstFound`](Self::FirstFound) by lowest index.
    ChildlessPreferred,
    /// Uniformly random among the current maximal elements.
    RandomMaximal,
    /// Exactly uniform over all bipartitions via counting tables; small
    /// posets only.
    ExactSmall,
}

impl MaximalPolicy {
    fn resolve(self, d: usize) -> MaximalPolicy {
        match self {
            MaximalPolicy::Auto => {
                if d <= EXACT_SMALL_MAX {
                    MaximalPolicy::ExactSmall
                } else {
                    MaximalPolicy::ChildlessPreferred
                }
            }
            other => other,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            MaximalPolicy::Auto => "auto",
            MaximalPolicy::FirstFound => "first-found",
            MaximalPolicy::ChildlessPreferred => "childless-preferred",
            MaximalPolicy::RandomMaximal => "random-maximal",
            MaximalPolicy::ExactSmall => "exact-small",
        }
    }
}

impl std::str::FromStr for MaximalPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(MaximalPolicy::Auto),
            "first-found" => Ok(MaximalPolicy::FirstFound),
            "childless-preferred" => Ok(MaximalPolicy::ChildlessPreferred),
            "random-maximal" => Ok(MaximalPolicy::RandomMaximal),
            "exact-small" => Ok(MaximalPolicy::ExactSmall),
            other => Err(Error::InvalidParameter(format!("unknown policy {other:?}"))),
        }
    }
}

impl std::fmt::Display for MaximalPolicy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    A,
    B,
}

/// An insertion point for a new maximal element: `tail_offset` existing
/// elements of the chosen block end up after it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Placement {
    pub side: Side,
    pub tail_offset: usize,
}

impl Placement {
    /// Inserts `v` into `eb` at this placement.
    pub fn apply(&self, eb: &ExtendedBipartition, v: usize) -> ExtendedBipartition {
        let mut out = eb.clone();
        let order = match self.side {
            Side::A => &mut out.order_a,
            Side::B => &mut out.order_b,
        };
        let at = order.len() - self.tail_offset;
        order.insert(at, v);
        out
    }
}

/// All placements of the maximal element `v` that extend a bipartition of
/// the poset with `v` removed to one of the full poset.
///
/// Within a block, `v` may go anywhere strictly after its last child in that
/// block's order, or anywhere at all if the block contains no child of `v`.
pub fn valid_placements(
    poset: &Poset,
    eb: &ExtendedBipartition,
    v: usize,
) -> Result<Vec<Placement>> {
    let d = poset.len();
    if v >= d {
        return Err(Error::IndexOutOfRange { index: v, d });
    }
    if poset.up_set(v).count_ones(..) != 1 {
        return Err(Error::NotMaximal { v });
    }
    let mut ground = FixedBitSet::with_capacity(d);
    ground.insert_range(..);
    ground.remove(v);
    eb.validate_on(poset, Some(&ground))?;
    let mut out = Vec::new();
    for (order, side) in [(&eb.order_a, Side::A), (&eb.order_b, Side::B)] {
        let slots = free_tail_slots(poset, order, v);
        out.extend((0..slots).map(|tail_offset| Placement { side, tail_offset }));
    }
    Ok(out)
}

/// Number of valid tail offsets in `order`: one more than the count of
/// trailing non-children of `v`.
fn free_tail_slots(poset: &Poset, order: &[usize], v: usize) -> usize {
    let trailing = order.iter().rev().take_while(|&&w| !poset.lt(w, v)).count();
    trailing + 1
}

fn down_masks(poset: &Poset) -> Vec<u32> {
    (0..poset.len())
        .map(|i| {
            let mut m = 0u32;
            for j in poset.down_set(i).ones() {
                if j != i {
                    m |= 1 << j;
                }
            }
            m
        })
        .collect()
}

/// `counts[mask]` = number of linear extensions of the subposet induced on
/// `mask`.
fn extension_counts(down: &[u32], d: usize) -> Vec<u64> {
    let mut counts = vec![0u64; 1 << d];
    counts[0] = 1;
    for mask in 1u32..(1 << d) {
        let mut total = 0u64;
        let mut rest = mask;
        while rest != 0 {
            let e = rest.trailing_zeros();
            rest &= rest - 1;
            if down[e as usize] & mask == 0 {
                total += counts[(mask ^ (1 << e)) as usize];
            }
        }
        counts[mask as usize] = total;
    }
    counts
}

fn enumerate_extensions(down: &[u32], mask: u32) -> Vec<Vec<usize>> {
    fn rec(down: &[u32], mask: u32, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if mask == 0 {
            out.push(prefix.clone());
            return;
        }
        let mut rest = mask;
        while rest != 0 {
            let e = rest.trailing_zeros();
            rest &= rest - 1;
            if down[e as usize] & mask == 0 {
                prefix.push(e as usize);
                rec(down, mask ^ (1 << e), prefix, out);
                prefix.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(down, mask, &mut Vec::new(), &mut out);
    out
}

/// Exhaustively lists every extended bipartition of `poset`; the exact
/// reference for the samplers. Errors once `poset.len()` exceeds `cap`.
pub fn enumerate_ebs_with_cap(poset: &Poset, cap: usize) -> Result<Vec<ExtendedBipartition>> {
    let d = poset.len();
    if cap > 20 {
        return Err(Error::InvalidParameter(format!("enumeration cap {cap} above hard limit 20")));
    }
    if d > cap {
        return Err(Error::CapExceeded { d, cap });
    }
    let ground = ((1u64 << d) - 1) as u32;
    enumerate_ebs_masked(poset, ground)
}

/// As [`enumerate_ebs_with_cap`] with the default cap of [`ENUMERATION_CAP`].
pub fn enumerate_ebs(poset: &Poset) -> Result<Vec<ExtendedBipartition>> {
    enumerate_ebs_with_cap(poset, ENUMERATION_CAP)
}

/// Enumerates the bipartitions of the subposet induced on the bit mask
/// `ground` (bit `i` = element `i`); orders keep original element indices.
pub fn enumerate_ebs_masked(poset: &Poset, ground: u32) -> Result<Vec<ExtendedBipartition>> {
    let d = poset.len();
    if d > 20 {
        return Err(Error::CapExceeded { d, cap: 20 });
    }
    if u64::from(ground) > (1u64 << d) - 1 {
        return Err(Error::InvalidParameter(format!(
            "ground mask {ground:#b} has bits outside dimension {d}"
        )));
    }
    let down = down_masks(poset);
    let mut out = Vec::new();
    // Iterate subsets of `ground` as block A, complement within `ground` as B.
    let mut a = ground;
    loop {
        let b = ground & !a;
        for ext_a in enumerate_extensions(&down, a) {
            for ext_b in enumerate_extensions(&down, b) {
                out.push(ExtendedBipartition { order_a: ext_a.clone(), order_b: ext_b });
            }
        }
        if a == 0 {
            break;
        }
        a = (a - 1) & ground;
    }
    out.reverse();
    Ok(out)
}

/// Number of extended bipartitions, via the subset-sum of products of linear
/// extension counts. Independent of [`enumerate_ebs`]; the two are checked
/// against each other in tests.
pub fn count_ebs(poset: &Poset) -> Result<u128> {
    let d = poset.len();
    if d > 20 {
        return Err(Error::CapExceeded { d, cap: 20 });
    }
    let down = down_masks(poset);
    let counts = extension_counts(&down, d);
    let full = (1usize << d) - 1;
    let mut total = 0u128;
    for a in 0..=full {
        total += u128::from(counts[a]) * u128::from(counts[full & !a]);
    }
    Ok(total)
}

struct ExactTables {
    down: Vec<u32>,
    ext_counts: Vec<u64>,
    /// `cumulative[m + 1] - cumulative[m]` = weight of block-A mask `m`.
    cumulative: Vec<u128>,
}

/// Reusable sampling engine bound to one poset and policy.
pub struct EbSampler {
    poset: Poset,
    policy: MaximalPolicy,
    childless: FixedBitSet,
    exact: Option<ExactTables>,
}

impl EbSampler {
    pub fn new(poset: &Poset, policy: MaximalPolicy) -> Result<Self> {
        let d = poset.len();
        if d == 0 {
            return Err(Error::EmptyPoset);
        }
        let policy = policy.resolve(d);
        if policy == MaximalPolicy::ExactSmall && d > EXACT_SMALL_MAX {
            return Err(Error::CapExceeded { d, cap: EXACT_SMALL_MAX });
        }
        let mut childless = FixedBitSet::with_capacity(d);
        for i in 0..d {
            if poset.down_set(i).count_ones(..) == 1 {
                childless.insert(i);
            }
        }
        let exact = if policy == MaximalPolicy::ExactSmall {
            let down = down_masks(poset);
            let ext_counts = extension_counts(&down, d);
            let full = (1usize << d) - 1;
            let mut cumulative = Vec::with_capacity(full + 2);
            cumulative.push(0u128);
            for a in 0..=full {
                let w = u128::from(ext_counts[a]) * u128::from(ext_counts[full & !a]);
                cumulative.push(cumulative[a] + w);
            }
            Some(ExactTables { down, ext_counts, cumulative })
        } else {
            None
        };
        Ok(EbSampler { poset: poset.clone(), policy, childless, exact })
    }

    pub fn policy(&self) -> MaximalPolicy {
        self.policy
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> ExtendedBipartition {
        match self.policy {
            MaximalPolicy::ExactSmall => self.sample_exact(rng),
            _ => self.sample_recursive(rng),
        }
    }

    fn sample_exact<R: Rng>(&self, rng: &mut R) -> ExtendedBipartition {
        let tables = self.exact.as_ref().expect("exact tables present");
        let total = *tables.cumulative.last().unwrap();
        let u = rng.gen_range(0..total);
        let a = tables.cumulative.partition_point(|&c| c <= u) - 1;
        let full = (1usize << self.poset.len()) - 1;
        let order_a = sample_extension(&tables.down, &tables.ext_counts, a as u32, rng);
        let order_b = sample_extension(&tables.down, &tables.ext_counts, (full & !a) as u32, rng);
        ExtendedBipartition { order_a, order_b }
    }

    /// Removes a policy-chosen maximal element, recurses, and re-inserts it
    /// at a uniform valid placement; implemented as an explicit elimination
    /// pass followed by a reversed insertion pass, `O(d)` per element.
    fn sample_recursive<R: Rng>(&self, rng: &mut R) -> ExtendedBipartition {
        let d = self.poset.len();
        let poset = &self.poset;
        let mut alive = FixedBitSet::with_capacity(d);
        alive.insert_range(..);
        let mut maximal = FixedBitSet::with_capacity(d);
        let mut parents_left = vec![0usize; d];
        for i in 0..d {
            parents_left[i] = poset.up_set(i).count_ones(..) - 1;
            if parents_left[i] == 0 {
                maximal.insert(i);
            }
        }
        let mut elimination = Vec::with_capacity(d);
        for _ in 0..d {
            let v = match self.policy {
                MaximalPolicy::FirstFound => first_found(poset, &alive),
                MaximalPolicy::ChildlessPreferred => {
                    let mut candidates = maximal.clone();
                    candidates.intersect_with(&self.childless);
                    candidates
                        .ones()
                        .next()
                        .unwrap_or_else(|| first_found(poset, &alive))
                }
                MaximalPolicy::RandomMaximal => {
                    let live_max: Vec<usize> = maximal.ones().collect();
                    live_max[rng.gen_range(0..live_max.len())]
                }
                MaximalPolicy::Auto | MaximalPolicy::ExactSmall => unreachable!(),
            };
            elimination.push(v);
            alive.remove(v);
            maximal.remove(v);
            for x in poset.down_set(v).ones() {
                if x != v && alive.contains(x) {
                    parents_left[x] -= 1;
                    if parents_left[x] == 0 {
                        maximal.insert(x);
                    }
                }
            }
        }
        let mut order_a: Vec<usize> = Vec::with_capacity(d);
        let mut order_b: Vec<usize> = Vec::with_capacity(d);
        for &v in elimination.iter().rev() {
            let slots_a = free_tail_slots(poset, &order_a, v);
            let slots_b = free_tail_slots(poset, &order_b, v);
            let u = rng.gen_range(0..slots_a + slots_b);
            if u < slots_a {
                let at = order_a.len() - u;
                order_a.insert(at, v);
            } else {
                let at = order_b.len() - (u - slots_a);
                order_b.insert(at, v);
            }
        }
        ExtendedBipartition { order_a, order_b }
    }

    /// Exact output distribution of [`EbSampler::sample`], computed by
    /// exhausting every random choice the sampler can make (maximal-element
    /// picks and placement slots). Small posets only; pairs sorted by
    /// bipartition content with probabilities summing to 1.
    pub fn exact_distribution(&self) -> Result<Vec<(ExtendedBipartition, f64)>> {
        let d = self.poset.len();
        if d > EXACT_SMALL_MAX {
            return Err(Error::CapExceeded { d, cap: EXACT_SMALL_MAX });
        }
        if self.policy == MaximalPolicy::ExactSmall {
            // Weighted two-phase sampling is uniform by construction; the
            // uniformity of its building blocks is tested separately.
            let ebs = enumerate_ebs(&self.poset)?;
            let mass = 1.0 / ebs.len() as f64;
            return Ok(ebs.into_iter().map(|eb| (eb, mass)).collect());
        }
        let mut sequences = Vec::new();
        let mut alive = FixedBitSet::with_capacity(d);
        alive.insert_range(..);
        self.all_eliminations(&mut alive, &mut Vec::with_capacity(d), 1.0, &mut sequences);
        let mut acc: BTreeMap<(Vec<usize>, Vec<usize>), f64> = BTreeMap::new();
        for (sequence, weight) in &sequences {
            all_placements(
                &self.poset,
                sequence,
                sequence.len(),
                &mut Vec::new(),
                &mut Vec::new(),
                *weight,
                &mut acc,
            );
        }
        Ok(acc
            .into_iter()
            .map(|((order_a, order_b), p)| (ExtendedBipartition { order_a, order_b }, p))
            .collect())
    }

    fn live_maximal(&self, alive: &FixedBitSet) -> Vec<usize> {
        alive
            .ones()
            .filter(|&x| self.poset.up_set(x).ones().all(|j| j == x || !alive.contains(j)))
            .collect()
    }

    /// Enumerates every elimination sequence the forward pass can produce,
    /// with its probability (deterministic policies yield one sequence).
    fn all_eliminations(
        &self,
        alive: &mut FixedBitSet,
        prefix: &mut Vec<usize>,
        weight: f64,
        out: &mut Vec<(Vec<usize>, f64)>,
    ) {
        if prefix.len() == self.poset.len() {
            out.push((prefix.clone(), weight));
            return;
        }
        let choices: Vec<(usize, f64)> = match self.policy {
            MaximalPolicy::FirstFound => vec![(first_found(&self.poset, alive), 1.0)],
            MaximalPolicy::ChildlessPreferred => {
                let v = self
                    .live_maximal(alive)
                    .into_iter()
                    .find(|&m| self.childless.contains(m))
                    .unwrap_or_else(|| first_found(&self.poset, alive));
                vec![(v, 1.0)]
            }
            MaximalPolicy::RandomMaximal => {
                let live = self.live_maximal(alive);
                let p = 1.0 / live.len() as f64;
                live.into_iter().map(|m| (m, p)).collect()
            }
            MaximalPolicy::Auto | MaximalPolicy::ExactSmall => unreachable!(),
        };
        for (v, p) in choices {
            alive.remove(v);
            prefix.push(v);
            self.all_eliminations(alive, prefix, weight * p, out);
            prefix.pop();
            alive.insert(v);
        }
    }
}

/// Enumerates every insertion outcome of the backward pass for one
/// elimination sequence, mirroring the slot arithmetic of `sample_recursive`.
fn all_placements(
    poset: &Poset,
    sequence: &[usize],
    k: usize,
    order_a: &mut Vec<usize>,
    order_b: &mut Vec<usize>,
    weight: f64,
    acc: &mut BTreeMap<(Vec<usize>, Vec<usize>), f64>,
) {
    if k == 0 {
        *acc.entry((order_a.clone(), order_b.clone())).or_insert(0.0) += weight;
        return;
    }
    let v = sequence[k - 1];
    let slots_a = free_tail_slots(poset, order_a, v);
    let slots_b = free_tail_slots(poset, order_b, v);
    let p = weight / (slots_a + slots_b) as f64;
    for u in 0..slots_a {
        let at = order_a.len() - u;
        order_a.insert(at, v);
        all_placements(poset, sequence, k - 1, order_a, order_b, p, acc);
        order_a.remove(at);
    }
    for u in 0..slots_b {
        let at = order_b.len() - u;
        order_b.insert(at, v);
        all_placements(poset, sequence, k - 1, order_a, order_b, p, acc);
        order_b.remove(at);
    }
}

/// Walks parent pointers from the lowest-index live element to a maximal one.
fn first_found(poset: &Poset, alive: &FixedBitSet) -> usize {
    let mut x = alive.ones().next().expect("poset not empty");
    'walk: loop {
        for j in poset.up_set(x).ones() {
            if j != x && alive.contains(j) {
                x = j;
                continue 'walk;
            }
        }
        return x;
    }
}

/// Uniform linear extension of the subposet on `mask` by probabilistic
/// peeling of minimal elements, weighted by extension counts.
fn sample_extension<R: Rng>(
    down: &[u32],
    counts: &[u64],
    mask: u32,
    rng: &mut R,
) -> Vec<usize> {
    let mut order = Vec::with_capacity(mask.count_ones() as usize);
    let mut remaining = mask;
    while remaining != 0 {
        let mut u = rng.gen_range(0..counts[remaining as usize]);
        let mut rest = remaining;
        while rest != 0 {
            let e = rest.trailing_zeros();
            rest &= rest - 1;
            if down[e as usize] & remaining == 0 {
                let w = counts[(remaining ^ (1 << e)) as usize];
                if u < w {
                    order.push(e as usize);
                    remaining ^= 1 << e;
                    break;
                }
                u -= w;
            }
        }
    }
    order
}

/// Draws one extended bipartition of `poset` under `policy`.
pub fn sample_eb<R: Rng>(
    poset: &Poset,
    rng: &mut R,
    policy: MaximalPolicy,
) -> Result<ExtendedBipartition> {
    Ok(EbSampler::new(poset, policy)?.sample(rng))
}
