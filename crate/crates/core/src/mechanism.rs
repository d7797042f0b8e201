//! Additive-noise release of count vectors under ε-differential privacy.
//!
//! The headline mechanism draws noise whose density is proportional to
//! `exp(-ε‖y‖/Δ)` in the norm induced by the poset ball: a uniform ball
//! sample scaled by an independent Gamma radius. Cube (ℓ∞) and Laplace
//! (ℓ1) baselines use the same radial construction with their own balls
//! and sensitivities, so all three mechanisms couple pathwise under a
//! shared random stream.

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::eb::MaximalPolicy;
use crate::error::{Error, Result};
use crate::poset::{Poset, RootedPoset};
use crate::rng::DEFAULT_SEED;
use crate::sampling::{sample_lp_ball, LpBall, PosetBallSampler};

/// Parameters shared by every mechanism in this module.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MechanismConfig {
    /// Privacy parameter ε.
    pub epsilon: f64,
    /// Sensitivity Δ of the released statistic in the mechanism's norm.
    /// Defaults to 1: one record moves the augmented count vector by a
    /// vertex of the poset ball, and binary records have ℓ∞ norm at most 1.
    /// The Laplace baseline multiplies this by `d` internally (the ℓ1 norm
    /// of a record can reach `d`).
    pub sensitivity: f64,
    /// How the ball sampler picks maximal elements.
    pub policy: MaximalPolicy,
    /// Base seed recorded with released output; callers derive streams.
    pub seed: u64,
}

impl MechanismConfig {
    pub fn new(epsilon: f64) -> Result<Self> {
        let config = MechanismConfig {
            epsilon,
            sensitivity: 1.0,
            policy: MaximalPolicy::Auto,
            seed: DEFAULT_SEED,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn with_sensitivity(mut self, sensitivity: f64) -> Result<Self> {
        self.sensitivity = sensitivity;
        self.validate()?;
        Ok(self)
    }

    pub fn with_policy(mut self, policy: MaximalPolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidEpsilon { value: self.epsilon });
        }
        if !(self.sensitivity > 0.0 && self.sensitivity.is_finite()) {
            return Err(Error::InvalidSensitivity { value: self.sensitivity });
        }
        Ok(())
    }

    /// Noise scale Δ/ε.
    pub fn scale(&self) -> f64 {
        self.sensitivity / self.epsilon
    }
}

/// Per-item counts together with the number of contributing records.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountVector {
    pub counts: Vec<u64>,
    pub record_count: u64,
}

impl CountVector {
    /// Builds and validates against `poset`.
    pub fn new(poset: &Poset, counts: Vec<u64>, record_count: u64) -> Result<Self> {
        let cv = CountVector { counts, record_count };
        cv.validate(poset)?;
        Ok(cv)
    }

    /// Counts must be bounded by the record count and monotone along the
    /// order: if `i ≼ j` then everyone who affirmed item `i` also affirmed
    /// item `j`, so `counts[i] ≤ counts[j]`.
    pub fn validate(&self, poset: &Poset) -> Result<()> {
        if self.counts.len() != poset.len() {
            return Err(Error::LengthMismatch { expected: poset.len(), found: self.counts.len() });
        }
        for (i, &c) in self.counts.iter().enumerate() {
            if c > self.record_count {
                return Err(Error::NonMonotoneCounts { i, j: i });
            }
            for j in poset.up_set(i).ones() {
                if self.counts[i] > self.counts[j] {
                    return Err(Error::NonMonotoneCounts { i, j });
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }
}

/// Sums binary records into a [`CountVector`], rejecting any record that
/// is the wrong length, contains non-binary entries, or has a support
/// that is not upward closed in `poset`.
pub fn aggregate(poset: &Poset, records: &[Vec<u8>]) -> Result<CountVector> {
    let d = poset.len();
    let mut counts = vec![0u64; d];
    for (index, record) in records.iter().enumerate() {
        let ok = record.len() == d && poset.respects_order(record).unwrap_or(false);
        if !ok {
            return Err(Error::InvalidRecord { index });
        }
        for (c, &bit) in counts.iter_mut().zip(record) {
            *c += u64::from(bit);
        }
    }
    CountVector::new(poset, counts, records.len() as u64)
}

/// Draws `r · z` where `z` comes from `ball_sampler` (uniform over a unit
/// norm ball in `R^dimension`) and `r ~ Gamma(dimension + 1, Δ/ε)`.
///
/// The radius is drawn first from a Gamma with unit scale and multiplied
/// by Δ/ε afterwards, so runs with different ε but equal seeds consume
/// the stream identically and produce pathwise-proportional noise.
pub fn knorm_noise<R: Rng, F: FnMut(&mut R) -> Vec<f64>>(
    dimension: usize,
    mut ball_sampler: F,
    config: &MechanismConfig,
    rng: &mut R,
) -> Vec<f64> {
    let shape = (dimension + 1) as f64;
    let radius = Gamma::new(shape, 1.0).expect("valid gamma shape").sample(rng) * config.scale();
    let mut z = ball_sampler(rng);
    debug_assert_eq!(z.len(), dimension);
    for v in z.iter_mut() {
        *v *= radius;
    }
    z
}

/// Releases `counts` under ε-differential privacy using poset-ball noise.
///
/// The poset is augmented with a root, the root coordinate carries the
/// record count, `(d+1)`-dimensional noise is drawn from the rooted ball,
/// and only the `d` non-root coordinates are returned.
pub fn private_count<R: Rng>(
    poset: &Poset,
    data: &CountVector,
    config: &MechanismConfig,
    rng: &mut R,
) -> Result<Vec<f64>> {
    config.validate()?;
    data.validate(poset)?;
    let rooted = RootedPoset::augment(poset);
    let sampler = PosetBallSampler::new(&rooted, config.policy)?;
    let noise = knorm_noise(rooted.dimension(), |r| sampler.sample(r), config, rng);
    Ok(data
        .counts
        .iter()
        .zip(&noise[1..])
        .map(|(&c, &n)| c as f64 + n)
        .collect())
}

fn lp_baseline<R: Rng>(
    counts: &[f64],
    p: f64,
    sensitivity: f64,
    config: &MechanismConfig,
    rng: &mut R,
) -> Result<Vec<f64>> {
    config.validate()?;
    let d = counts.len();
    if d == 0 {
        return Err(Error::EmptyPoset);
    }
    let ball = LpBall::unit(d, p)?;
    let scaled = MechanismConfig { sensitivity, ..*config };
    let noise = knorm_noise(d, |r| sample_lp_ball(&ball, r), &scaled, rng);
    Ok(counts.iter().zip(&noise).map(|(c, n)| c + n).collect())
}

/// Cube-noise baseline: density ∝ exp(−ε‖y‖∞/Δ) with Δ = `config.sensitivity`
/// (binary records have ℓ∞ norm at most 1).
pub fn linf_mechanism<R: Rng>(
    counts: &[f64],
    config: &MechanismConfig,
    rng: &mut R,
) -> Result<Vec<f64>> {
    lp_baseline(counts, f64::INFINITY, config.sensitivity, config, rng)
}

/// Laplace baseline: density ∝ exp(−ε‖y‖₁/Δd), i.e. independent Laplace
/// noise with scale `d·Δ/ε` per coordinate (a single binary record can
/// change the ℓ1 norm of the counts by up to `d`).
pub fn laplace_mechanism<R: Rng>(
    counts: &[f64],
    config: &MechanismConfig,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let d = counts.len() as f64;
    lp_baseline(counts, 1.0, config.sensitivity * d, config, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;

    fn chain2() -> Poset {
        // 0 ≼ 1.
        Poset::from_relations(2, &[(0, 1)]).unwrap()
    }

    #[test]
    fn aggregate_of_zero_records_is_zero() {
        let cv = aggregate(&chain2(), &[]).unwrap();
        assert_eq!(cv.counts, vec![0, 0]);
        assert_eq!(cv.record_count, 0);
    }

    #[test]
    fn aggregate_sums_valid_records() {
        let cv = aggregate(&chain2(), &[vec![1, 1], vec![0, 1]]).unwrap();
        assert_eq!(cv.counts, vec![1, 2]);
        assert_eq!(cv.record_count, 2);
    }

    #[test]
    fn aggregate_rejects_order_violations_with_index() {
        let err = aggregate(&chain2(), &[vec![0, 1], vec![1, 0]]).unwrap_err();
        assert!(matches!(err, Error::InvalidRecord { index: 1 }), "{err}");
        let err = aggregate(&chain2(), &[vec![1, 0]]).unwrap_err();
        assert!(matches!(err, Error::InvalidRecord { index: 0 }), "{err}");
        // Wrong length and non-binary entries are rejected the same way.
        assert!(aggregate(&chain2(), &[vec![1]]).is_err());
        assert!(aggregate(&chain2(), &[vec![2, 1]]).is_err());
    }

    #[test]
    fn count_vector_invariants_are_enforced() {
        let p = chain2();
        assert!(CountVector::new(&p, vec![1, 2], 2).is_ok());
        // More affirmatives than records.
        assert!(CountVector::new(&p, vec![3, 3], 2).is_err());
        // Monotonicity: 0 ≼ 1 forces counts[0] ≤ counts[1].
        let err = CountVector::new(&p, vec![2, 1], 2).unwrap_err();
        assert!(matches!(err, Error::NonMonotoneCounts { i: 0, j: 1 }), "{err}");
        assert!(CountVector::new(&p, vec![1], 2).is_err());
    }

    #[test]
    fn config_rejects_bad_parameters() {
        assert!(MechanismConfig::new(0.0).is_err());
        assert!(MechanismConfig::new(-1.0).is_err());
        assert!(MechanismConfig::new(f64::NAN).is_err());
        assert!(MechanismConfig::new(1.0).unwrap().with_sensitivity(0.0).is_err());
        let c = MechanismConfig::new(2.0).unwrap().with_sensitivity(0.5).unwrap();
        assert!((c.scale() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn huge_epsilon_recovers_exact_counts() {
        let p = chain2();
        let data = CountVector::new(&p, vec![3, 7], 9).unwrap();
        let config = MechanismConfig::new(1e6).unwrap();
        let mut worst = 0f64;
        for run in 0..100 {
            let mut rng = stream_rng(7, run);
            let out = private_count(&p, &data, &config, &mut rng).unwrap();
            worst = worst.max((out[0] - 3.0).abs()).max((out[1] - 7.0).abs());
        }
        assert!(worst < 1e-3, "worst deviation {worst}");
    }

    #[test]
    fn mechanisms_are_deterministic_under_a_fixed_seed() {
        let p = chain2();
        let data = CountVector::new(&p, vec![1, 2], 2).unwrap();
        let config = MechanismConfig::new(0.5).unwrap();
        let a = private_count(&p, &data, &config, &mut stream_rng(11, 0)).unwrap();
        let b = private_count(&p, &data, &config, &mut stream_rng(11, 0)).unwrap();
        assert_eq!(a, b);
        let c = linf_mechanism(&[1.0, 2.0], &config, &mut stream_rng(11, 1)).unwrap();
        let d = linf_mechanism(&[1.0, 2.0], &config, &mut stream_rng(11, 1)).unwrap();
        assert_eq!(c, d);
    }

    #[test]
    fn doubling_epsilon_halves_noise_pathwise() {
        let p = chain2();
        let data = CountVector::new(&p, vec![0, 0], 0).unwrap();
        let c1 = MechanismConfig::new(1.0).unwrap();
        let c2 = MechanismConfig::new(2.0).unwrap();
        let y1 = private_count(&p, &data, &c1, &mut stream_rng(13, 0)).unwrap();
        let y2 = private_count(&p, &data, &c2, &mut stream_rng(13, 0)).unwrap();
        for (a, b) in y1.iter().zip(&y2) {
            assert!((a - 2.0 * b).abs() < 1e-12 * a.abs().max(1.0), "{a} vs {b}");
        }
        let z1 = laplace_mechanism(&[0.0; 3], &c1, &mut stream_rng(13, 1)).unwrap();
        let z2 = laplace_mechanism(&[0.0; 3], &c2, &mut stream_rng(13, 1)).unwrap();
        for (a, b) in z1.iter().zip(&z2) {
            assert!((a - 2.0 * b).abs() < 1e-12 * a.abs().max(1.0));
        }
    }

    #[test]
    fn baselines_have_matching_lengths_and_reject_empty_input() {
        let config = MechanismConfig::new(1.0).unwrap();
        let mut rng = stream_rng(17, 0);
        assert_eq!(linf_mechanism(&[0.0; 5], &config, &mut rng).unwrap().len(), 5);
        assert_eq!(laplace_mechanism(&[0.0; 5], &config, &mut rng).unwrap().len(), 5);
        assert!(linf_mechanism(&[], &config, &mut rng).is_err());
    }
}
