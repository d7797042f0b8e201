//! Filter chains and the triangulation they index.
//!
//! A filter of a poset is an upward closed subset. Every extended
//! bipartition maps to a pair of filter chains, one per block: walk the
//! block's order right to left and take upward closures of the growing
//! suffix, starting from the empty filter. The two chains never share
//! minimal elements ("non-interfering"), their lengths sum to `n + 2` on an
//! `n`-element poset, and the map is a bijection.
//!
//! Each pair yields one simplex of the norm ball of the rooted poset: plus
//! chain filters become vertices with root coordinate `+1` and ones on the
//! filter, minus chain filters the negated counterparts. Together these
//! simplices triangulate the ball; every one has the same volume, which is
//! what makes uniform ball sampling a uniform choice of bipartition.

use fixedbitset::FixedBitSet;

use crate::eb::ExtendedBipartition;
use crate::error::{Error, Result};
use crate::poset::{Poset, RootedPoset};
use crate::simplex::Simplex;

/// Strictly increasing filters starting from the empty set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FilterChain {
    filters: Vec<FixedBitSet>,
}

impl FilterChain {
    pub fn new(filters: Vec<FixedBitSet>) -> Self {
        FilterChain { filters }
    }

    /// Convenience constructor from element-index sets over `n` elements.
    pub fn from_index_sets(n: usize, sets: &[&[usize]]) -> Self {
        let filters = sets
            .iter()
            .map(|set| {
                let mut f = FixedBitSet::with_capacity(n);
                for &e in *set {
                    f.insert(e);
                }
                f
            })
            .collect();
        FilterChain { filters }
    }

    pub fn filters(&self) -> &[FixedBitSet] {
        &self.filters
    }

    pub fn len(&self) -> usize {
        self.filters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.filters.is_empty()
    }

    fn validate(&self, poset: &Poset) -> Result<Vec<FixedBitSet>> {
        let n = poset.len();
        if self.filters.is_empty() {
            return Err(Error::FirstFilterNotEmpty);
        }
        for (position, filter) in self.filters.iter().enumerate() {
            if filter.len() != n {
                return Err(Error::LengthMismatch { expected: n, found: filter.len() });
            }
            for e in filter.ones() {
                if !poset.up_set(e).is_subset(filter) {
                    return Err(Error::FilterNotUpwardClosed { position });
                }
            }
        }
        if self.filters[0].count_ones(..) != 0 {
            return Err(Error::FirstFilterNotEmpty);
        }
        for position in 0..self.filters.len() - 1 {
            let (a, b) = (&self.filters[position], &self.filters[position + 1]);
            if !a.is_subset(b) || a.count_ones(..) == b.count_ones(..) {
                return Err(Error::ChainNotIncreasing { position });
            }
        }
        let mins: Vec<FixedBitSet> =
            self.filters.iter().map(|f| poset.min_of_set(f)).collect();
        for position in 0..mins.len() - 1 {
            let mut diff = mins[position + 1].clone();
            diff.difference_with(&mins[position]);
            let size = diff.count_ones(..);
            if size != 1 {
                return Err(Error::MinDiffNotSingleton { position, size });
            }
        }
        Ok(mins)
    }
}

/// The pair of chains indexing one simplex of the triangulation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FilterChainPair {
    pub plus: FilterChain,
    pub minus: FilterChain,
}

impl FilterChainPair {
    /// Validates both chains against `poset` (the poset without the root),
    /// the length constraint, and non-interference of minimal elements.
    pub fn validate(&self, poset: &Poset) -> Result<()> {
        self.validated_mins(poset).map(|_| ())
    }

    fn validated_mins(&self, poset: &Poset) -> Result<(Vec<FixedBitSet>, Vec<FixedBitSet>)> {
        let mins_plus = self.plus.validate(poset)?;
        let mins_minus = self.minus.validate(poset)?;
        let expected = poset.len() + 2;
        let found = self.plus.len() + self.minus.len();
        if found != expected {
            return Err(Error::ChainLengthMismatch { expected, found });
        }
        let mut union_plus = FixedBitSet::with_capacity(poset.len());
        for m in &mins_plus {
            union_plus.union_with(m);
        }
        for m in &mins_minus {
            let mut overlap = m.clone();
            overlap.intersect_with(&union_plus);
            if let Some(element) = overlap.ones().next() {
                return Err(Error::InterferingChains { element });
            }
        }
        Ok((mins_plus, mins_minus))
    }
}

fn chain_from_order(poset: &Poset, order: &[usize]) -> FilterChain {
    let n = poset.len();
    let mut filters = Vec::with_capacity(order.len() + 1);
    let mut current = FixedBitSet::with_capacity(n);
    filters.push(current.clone());
    for &e in order.iter().rev() {
        current.union_with(poset.up_set(e));
        filters.push(current.clone());
    }
    FilterChain { filters }
}

/// Maps an extended bipartition to its filter-chain pair: each chain is the
/// empty filter followed by upward closures of right-to-left suffixes of the
/// block's order.
pub fn eb_to_chains(poset: &Poset, eb: &ExtendedBipartition) -> Result<FilterChainPair> {
    eb.validate(poset)?;
    Ok(FilterChainPair {
        plus: chain_from_order(poset, eb.order_a()),
        minus: chain_from_order(poset, eb.order_b()),
    })
}

/// Inverse of [`eb_to_chains`]: successive differences of minimal-element
/// sets along each chain, read last to first, rebuild the two orders.
pub fn chains_to_eb(poset: &Poset, pair: &FilterChainPair) -> Result<ExtendedBipartition> {
    let (mins_plus, mins_minus) = pair.validated_mins(poset)?;
    let mut orders = Vec::with_capacity(2);
    for mins in [&mins_plus, &mins_minus] {
        let mut order = Vec::with_capacity(mins.len() - 1);
        for position in (0..mins.len() - 1).rev() {
            let mut diff = mins[position + 1].clone();
            diff.difference_with(&mins[position]);
            order.push(diff.ones().next().expect("validated singleton"));
        }
        orders.push(order);
    }
    let order_b = orders.pop().unwrap();
    let order_a = orders.pop().unwrap();
    ExtendedBipartition::new(order_a, order_b, poset)
}

/// Builds the simplex for a chain pair over an `n`-element poset without
/// validation; `dim = n + 1` with the root coordinate at index 0.
pub(crate) fn build_simplex(n: usize, pair: &FilterChainPair) -> Simplex {
    let dim = n + 1;
    let mut verts = Vec::with_capacity((pair.plus.len() + pair.minus.len()) * dim);
    for (chain, sign) in [(&pair.plus, 1i8), (&pair.minus, -1i8)] {
        for filter in chain.filters() {
            let base = verts.len();
            verts.resize(base + dim, 0i8);
            verts[base] = sign;
            for e in filter.ones() {
                verts[base + 1 + e] = sign;
            }
        }
    }
    Simplex::from_flat(dim, verts).expect("chain pair yields dim+1 vertices")
}

/// Vertex matrix of the simplex indexed by `pair` inside the norm ball of
/// `rooted`.
pub fn chains_to_simplex(rooted: &RootedPoset, pair: &FilterChainPair) -> Result<Simplex> {
    let stripped = rooted.root_stripped();
    pair.validate(&stripped)?;
    Ok(build_simplex(stripped.len(), pair))
}

/// The full triangulation of the norm ball of `rooted`, one entry per
/// extended bipartition of the root-stripped poset. Enumeration is capped at
/// `cap` non-root elements.
pub fn triangulation(
    rooted: &RootedPoset,
    cap: usize,
) -> Result<Vec<(ExtendedBipartition, Simplex)>> {
    let stripped = rooted.root_stripped();
    let ebs = crate::eb::enumerate_ebs_with_cap(&stripped, cap)?;
    ebs.into_iter()
        .map(|eb| {
            let pair = eb_to_chains(&stripped, &eb)?;
            let simplex = build_simplex(stripped.len(), &pair);
            Ok((eb, simplex))
        })
        .collect()
}
