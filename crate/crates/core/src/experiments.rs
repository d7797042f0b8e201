//! Seeded batch experiments comparing poset-ball noise against cube noise.
//!
//! The central quantity is the *ratio*: the mean squared ℓ2 norm of a
//! root-dropped uniform poset-ball sample divided by the same moment for
//! the cube `B_∞^d`. Smaller is better — at matched privacy both noise
//! distributions differ only by this geometric factor. Experiments derive
//! every random stream from an explicit seed, so reruns are bit-for-bit
//! reproducible.

use std::collections::BTreeMap;

use rand::Rng;
use serde::Serialize;

use crate::analysis::scaled_expected_sq_norm;
use crate::eb::MaximalPolicy;
use crate::error::{Error, Result};
use crate::poset::{Poset, RootedPoset};
use crate::randposet::random_poset;
use crate::rng::stream_rng;
use crate::sampling::{sample_lp_ball, LpBall, PosetBallSampler};

/// Outcome of one poset-vs-cube noise comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioRecord {
    pub poset_hash: String,
    pub d: usize,
    pub depth: usize,
    pub reduced_edges: usize,
    pub trials: u64,
    /// Mean squared ℓ2 norm of root-dropped poset-ball samples.
    pub poset_ball_mean_sq: f64,
    /// Mean squared ℓ2 norm of `B_∞^d` samples (or the exact `d/3`).
    pub linf_mean_sq: f64,
    pub ratio: f64,
}

/// How the cube moment in the denominator is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Denominator {
    /// Fresh cube samples, matched trial count.
    MonteCarlo,
    /// The exact value `d/3`.
    Analytic,
}

/// Monte Carlo ratio for one poset with the default sampler policy and a
/// Monte Carlo denominator.
pub fn ratio_experiment<R: Rng>(poset: &Poset, trials: u64, rng: &mut R) -> Result<RatioRecord> {
    ratio_experiment_with(poset, trials, MaximalPolicy::Auto, Denominator::MonteCarlo, rng)
}

pub fn ratio_experiment_with<R: Rng>(
    poset: &Poset,
    trials: u64,
    policy: MaximalPolicy,
    denominator: Denominator,
    rng: &mut R,
) -> Result<RatioRecord> {
    let d = poset.len();
    if d == 0 {
        return Err(Error::EmptyPoset);
    }
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    let rooted = RootedPoset::augment(poset);
    let sampler = PosetBallSampler::new(&rooted, policy)?;
    let mut numerator = 0.0;
    for _ in 0..trials {
        let y = sampler.sample(rng);
        numerator += y[1..].iter().map(|v| v * v).sum::<f64>();
    }
    let poset_ball_mean_sq = numerator / trials as f64;
    let linf_mean_sq = match denominator {
        Denominator::Analytic => d as f64 / 3.0,
        Denominator::MonteCarlo => {
            let ball = LpBall::unit(d, f64::INFINITY)?;
            let mut total = 0.0;
            for _ in 0..trials {
                total += sample_lp_ball(&ball, rng).iter().map(|v| v * v).sum::<f64>();
            }
            total / trials as f64
        }
    };
    let metrics = poset.metrics();
    Ok(RatioRecord {
        poset_hash: poset.hash_hex(),
        d,
        depth: metrics.depth,
        reduced_edges: metrics.reduced_edges,
        trials,
        poset_ball_mean_sq,
        linf_mean_sq,
        ratio: poset_ball_mean_sq / linf_mean_sq,
    })
}

/// Per-dimension summary of a sweep over random posets.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub d: usize,
    pub mean_ratio: f64,
    pub stderr: f64,
    pub n_posets: usize,
}

fn poset_stream(d: usize, index: usize) -> u64 {
    ((d as u64) << 32) | index as u64
}

/// Mean ratio over `posets_per_d` random posets for each dimension in
/// `ds`. Each poset gets its own random stream derived from `seed`, so
/// results do not depend on evaluation order.
pub fn random_ratio_sweep_grid(
    ds: &[usize],
    posets_per_d: usize,
    trials_per_poset: u64,
    seed: u64,
) -> Result<Vec<SweepRow>> {
    if posets_per_d == 0 {
        return Err(Error::InvalidParameter("need at least one poset per dimension".into()));
    }
    let mut rows = Vec::with_capacity(ds.len());
    for &d in ds {
        let mut ratios = Vec::with_capacity(posets_per_d);
        for index in 0..posets_per_d {
            let mut rng = stream_rng(seed, poset_stream(d, index));
            let poset = random_poset(d, &mut rng)?;
            let record = ratio_experiment(&poset, trials_per_poset, &mut rng)?;
            ratios.push(record.ratio);
        }
        let (mean_ratio, stderr) = if ratios.len() >= 2 {
            crate::analysis::mean_and_stderr(&ratios)
        } else {
            (ratios[0], 0.0)
        };
        rows.push(SweepRow { d, mean_ratio, stderr, n_posets: posets_per_d });
    }
    Ok(rows)
}

/// [`random_ratio_sweep_grid`] over every dimension in `d_min..=d_max`.
pub fn random_ratio_sweep(
    d_min: usize,
    d_max: usize,
    posets_per_d: usize,
    trials_per_poset: u64,
    seed: u64,
) -> Result<Vec<SweepRow>> {
    if d_min == 0 || d_min > d_max {
        return Err(Error::InvalidParameter(format!("bad dimension range {d_min}..={d_max}")));
    }
    let ds: Vec<usize> = (d_min..=d_max).collect();
    random_ratio_sweep_grid(&ds, posets_per_d, trials_per_poset, seed)
}

/// One structural-metric bucket of a fixed-dimension sweep.
#[derive(Debug, Clone, Serialize)]
pub struct BucketRow {
    /// `"depth"` or `"reduced_edges"`.
    pub metric: &'static str,
    pub bucket: usize,
    pub mean_ratio: f64,
    pub n: usize,
}

/// Ratio of one random poset along with its structural metrics.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct StructureSample {
    pub depth: usize,
    pub reduced_edges: usize,
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct StructureSweep {
    pub d: usize,
    pub total_posets: usize,
    /// Buckets holding fewer posets than this were dropped.
    pub min_bucket: usize,
    pub depth_buckets: Vec<BucketRow>,
    pub edge_buckets: Vec<BucketRow>,
    pub samples: Vec<StructureSample>,
}

/// Ratios of `total_posets` random posets at fixed dimension `d`,
/// bucketed by depth and by transitive-reduction edge count. Buckets with
/// fewer than `min_bucket` posets are dropped from the summaries (the
/// samples themselves are all retained).
pub fn structure_sweep(
    d: usize,
    total_posets: usize,
    trials_per_poset: u64,
    min_bucket: usize,
    seed: u64,
) -> Result<StructureSweep> {
    if total_posets == 0 {
        return Err(Error::InvalidParameter("need at least one poset".into()));
    }
    let mut samples = Vec::with_capacity(total_posets);
    for index in 0..total_posets {
        let mut rng = stream_rng(seed, poset_stream(d, index));
        let poset = random_poset(d, &mut rng)?;
        let record = ratio_experiment(&poset, trials_per_poset, &mut rng)?;
        samples.push(StructureSample {
            depth: record.depth,
            reduced_edges: record.reduced_edges,
            ratio: record.ratio,
        });
    }
    let bucketize = |metric: &'static str, key: fn(&StructureSample) -> usize| {
        let mut groups: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
        for s in &samples {
            let entry = groups.entry(key(s)).or_insert((0.0, 0));
            entry.0 += s.ratio;
            entry.1 += 1;
        }
        groups
            .into_iter()
            .filter(|&(_, (_, n))| n >= min_bucket)
            .map(|(bucket, (sum, n))| BucketRow { metric, bucket, mean_ratio: sum / n as f64, n })
            .collect::<Vec<_>>()
    };
    Ok(StructureSweep {
        d,
        total_posets,
        min_bucket,
        depth_buckets: bucketize("depth", |s| s.depth),
        edge_buckets: bucketize("reduced_edges", |s| s.reduced_edges),
        samples,
    })
}

/// Bundled question-dependency posets for one, two, or three sections of
/// a health-interview questionnaire (dimensions 4, 8, and 15).
pub fn nhis_poset(sections: u8) -> Result<Poset> {
    let text = match sections {
        1 => include_str!("../data/nhis_section1.json"),
        2 => include_str!("../data/nhis_section12.json"),
        3 => include_str!("../data/nhis_section123.json"),
        other => return Err(Error::UnknownSections(format!("{other} (expected 1, 2, or 3)"))),
    };
    Poset::parse(text)
}

/// Ratio experiment on the bundled questionnaire poset with `sections`
/// sections combined.
pub fn nhis_experiment<R: Rng>(sections: u8, trials: u64, rng: &mut R) -> Result<RatioRecord> {
    let poset = nhis_poset(sections)?;
    ratio_experiment(&poset, trials, rng)
}

/// One point of the scaled ℓp-ball moment curve.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LpCurveRow {
    pub d: usize,
    pub p: f64,
    pub scaled_expected: f64,
}

/// Expected squared norms of cube-enclosing ℓp balls over a `(d, p)` grid.
pub fn lp_curve(ds: &[usize], ps: &[f64]) -> Result<Vec<LpCurveRow>> {
    let mut rows = Vec::with_capacity(ds.len() * ps.len());
    for &d in ds {
        for &p in ps {
            rows.push(LpCurveRow { d, p, scaled_expected: scaled_expected_sq_norm(d, p)? });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_element_ratio_is_one_half() {
        // Exact value: the rooted one-element ball has non-root second
        // moment 1/6 against the interval's 1/3.
        let mut rng = stream_rng(40, 0);
        let poset = Poset::antichain(1);
        let r = ratio_experiment_with(
            &poset,
            20_000,
            MaximalPolicy::Auto,
            Denominator::Analytic,
            &mut rng,
        )
        .unwrap();
        assert!((r.ratio - 0.5).abs() < 0.02, "{r:?}");
        assert_eq!(r.d, 1);
        assert_eq!(r.depth, 0);
    }

    #[test]
    fn degenerate_inputs_are_rejected() {
        let mut rng = stream_rng(40, 1);
        let empty = Poset::antichain(0);
        assert!(ratio_experiment(&empty, 10, &mut rng).is_err());
        assert!(ratio_experiment(&Poset::antichain(2), 0, &mut rng).is_err());
        assert!(random_ratio_sweep(0, 3, 1, 10, 1).is_err());
        assert!(random_ratio_sweep(3, 2, 1, 10, 1).is_err());
    }

    #[test]
    fn ratio_records_are_bitwise_reproducible() {
        let poset = nhis_poset(1).unwrap();
        let a = ratio_experiment(&poset, 500, &mut stream_rng(40, 2)).unwrap();
        let b = ratio_experiment(&poset, 500, &mut stream_rng(40, 2)).unwrap();
        assert_eq!(a.ratio.to_bits(), b.ratio.to_bits());
        assert_eq!(a, b);
    }

    #[test]
    fn bundled_questionnaire_posets_have_the_documented_shapes() {
        let one = nhis_poset(1).unwrap();
        assert_eq!(one.len(), 4);
        assert_eq!(one.metrics().depth, 2);
        let two = nhis_poset(2).unwrap();
        assert_eq!(two.len(), 8);
        let three = nhis_poset(3).unwrap();
        assert_eq!(three.len(), 15);
        assert!(three.labels().is_some());
        assert!(nhis_poset(0).is_err());
        assert!(nhis_poset(4).is_err());
    }

    #[test]
    fn sweep_smoke_run_produces_sane_rows() {
        let rows = random_ratio_sweep_grid(&[2], 3, 50, 40).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].n_posets, 3);
        assert!(rows[0].mean_ratio > 0.0 && rows[0].mean_ratio < 1.2, "{rows:?}");
        // Same seed, same numbers.
        let again = random_ratio_sweep_grid(&[2], 3, 50, 40).unwrap();
        assert_eq!(rows[0].mean_ratio.to_bits(), again[0].mean_ratio.to_bits());
    }

    #[test]
    fn structure_sweep_smoke_run_buckets_correctly() {
        let sweep = structure_sweep(4, 40, 30, 5, 41).unwrap();
        assert_eq!(sweep.samples.len(), 40);
        let counted: usize = sweep.depth_buckets.iter().map(|b| b.n).sum();
        assert!(counted <= 40);
        for b in &sweep.depth_buckets {
            assert!(b.n >= 5);
            assert!(b.mean_ratio > 0.0);
        }
    }

    #[test]
    fn lp_curve_matches_the_closed_forms() {
        let rows = lp_curve(&[2, 10], &[1.0, 2.0, f64::INFINITY]).unwrap();
        assert_eq!(rows.len(), 6);
        let infinity_d2 = rows.iter().find(|r| r.d == 2 && r.p.is_infinite()).unwrap();
        assert!((infinity_d2.scaled_expected - 2.0 / 3.0).abs() < 1e-12);
        let l1_d2 = rows.iter().find(|r| r.d == 2 && r.p == 1.0).unwrap();
        assert!((l1_d2.scaled_expected - 4.0 / 3.0).abs() < 1e-12);
    }
}
