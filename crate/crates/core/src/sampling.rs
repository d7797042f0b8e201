//! Uniform samplers for simplices, ℓp balls, and poset norm balls.
//!
//! The poset ball sampler composes the pieces built elsewhere: draw an
//! extended bipartition, convert it to its filter-chain pair, materialize the
//! simplex, and place a uniform point inside via sorted-spacing barycentric
//! weights. Every stage is `O(d^2)` or better, so one ball sample costs
//! `O(d^2)` end to end.

use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma};

use crate::chains::{build_simplex, eb_to_chains};
use crate::eb::{EbSampler, MaximalPolicy};
use crate::error::{Error, Result};
use crate::poset::{Poset, RootedPoset};
use crate::simplex::Simplex;

/// Barycentric weights of a uniform point in a simplex with `vertex_count`
/// vertices: the spacings of `vertex_count - 1` sorted uniforms in `[0, 1]`.
pub fn unit_simplex_weights<R: Rng>(vertex_count: usize, rng: &mut R) -> Vec<f64> {
    assert!(vertex_count >= 1);
    let mut cuts: Vec<f64> = (0..vertex_count - 1).map(|_| rng.gen::<f64>()).collect();
    cuts.sort_unstable_by(f64::total_cmp);
    let mut weights = Vec::with_capacity(vertex_count);
    let mut prev = 0.0;
    for &c in &cuts {
        weights.push(c - prev);
        prev = c;
    }
    weights.push(1.0 - prev);
    weights
}

/// Uniform point inside `simplex`.
pub fn sample_simplex<R: Rng>(simplex: &Simplex, rng: &mut R) -> Vec<f64> {
    let weights = unit_simplex_weights(simplex.vertex_count(), rng);
    let mut point = vec![0f64; simplex.dim()];
    for (w, vertex) in weights.iter().zip(simplex.vertices()) {
        for (x, &v) in point.iter_mut().zip(vertex) {
            *x += w * f64::from(v);
        }
    }
    point
}

/// The ℓp ball of given radius in `R^d`; `p` may be `f64::INFINITY`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LpBall {
    d: usize,
    p: f64,
    radius: f64,
}

impl LpBall {
    pub fn new(d: usize, p: f64, radius: f64) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidParameter("ℓp ball needs d >= 1".into()));
        }
        if !(p >= 1.0) {
            return Err(Error::InvalidParameter(format!("p must be in [1, ∞], got {p}")));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "radius must be positive and finite, got {radius}"
            )));
        }
        Ok(LpBall { d, p, radius })
    }

    pub fn unit(d: usize, p: f64) -> Result<Self> {
        LpBall::new(d, p, 1.0)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }
}

/// Uniform sample from an ℓp ball. The cube (`p = ∞`) uses independent
/// uniform coordinates; finite `p` normalizes signed `exp(-|t|^p)` draws by
/// the `p`-sum plus an independent exponential.
pub fn sample_lp_ball<R: Rng>(ball: &LpBall, rng: &mut R) -> Vec<f64> {
    let LpBall { d, p, radius } = *ball;
    if p.is_infinite() {
        return (0..d).map(|_| (2.0 * rng.gen::<f64>() - 1.0) * radius).collect();
    }
    let gamma = Gamma::new(1.0 / p, 1.0).expect("valid shape");
    let mut pow_sum = 0.0;
    let signed: Vec<f64> = (0..d)
        .map(|_| {
            let s = gamma.sample(rng);
            pow_sum += s;
            let magnitude = s.powf(1.0 / p);
            if rng.gen::<bool>() {
                magnitude
            } else {
                -magnitude
            }
        })
        .collect();
    let extra: f64 = Exp1.sample(rng);
    let scale = radius / (pow_sum + extra).powf(1.0 / p);
    signed.into_iter().map(|g| g * scale).collect()
}

/// Reusable uniform sampler for the norm ball of a rooted poset.
pub struct PosetBallSampler {
    dim: usize,
    stripped: Poset,
    eb: Option<EbSampler>,
}

impl PosetBallSampler {
    pub fn new(rooted: &RootedPoset, policy: MaximalPolicy) -> Result<Self> {
        let stripped = rooted.root_stripped();
        let eb = if stripped.is_empty() {
            None
        } else {
            Some(EbSampler::new(&stripped, policy)?)
        };
        Ok(PosetBallSampler { dim: rooted.dimension(), stripped, eb })
    }

    /// Ambient dimension (root coordinate included).
    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn policy(&self) -> MaximalPolicy {
        self.eb.as_ref().map_or(MaximalPolicy::ExactSmall, EbSampler::policy)
    }

    /// Uniform point in the ball together with its generating simplex.
    pub fn sample_traced<R: Rng>(&self, rng: &mut R) -> (Vec<f64>, Simplex) {
        let pair = match &self.eb {
            Some(sampler) => {
                let eb = sampler.sample(rng);
                eb_to_chains(&self.stripped, &eb).expect("sampled bipartition is valid")
            }
            None => eb_to_chains(
                &self.stripped,
                &crate::eb::ExtendedBipartition::new(vec![], vec![], &self.stripped)
                    .expect("empty bipartition"),
            )
            .expect("empty chain pair"),
        };
        let simplex = build_simplex(self.stripped.len(), &pair);
        let point = sample_simplex(&simplex, rng);
        (point, simplex)
    }

    /// Uniform point in the ball, root coordinate at index 0.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        self.sample_traced(rng).0
    }
}

/// One-shot uniform sample from the norm ball of `rooted`.
pub fn sample_poset_ball<R: Rng>(
    rooted: &RootedPoset,
    rng: &mut R,
    policy: MaximalPolicy,
) -> Result<Vec<f64>> {
    Ok(PosetBallSampler::new(rooted, policy)?.sample(rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;

    #[test]
    fn weights_form_a_probability_vector() {
        let mut rng = stream_rng(10, 0);
        for m in [1, 2, 5, 40] {
            let w = unit_simplex_weights(m, &mut rng);
            assert_eq!(w.len(), m);
            assert!(w.iter().all(|&x| (0.0..=1.0).contains(&x)));
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn simplex_samples_stay_inside() {
        let s = Simplex::from_rows(&[vec![1, 0], vec![1, 1], vec![-1, 0]]).unwrap();
        let mut rng = stream_rng(10, 1);
        for _ in 0..500 {
            let x = sample_simplex(&s, &mut rng);
            let bary = s.barycentric(&x).unwrap();
            assert!(bary.iter().all(|&b| b >= -1e-9));
            assert!((bary.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn lp_samples_respect_the_norm_bound() {
        let mut rng = stream_rng(10, 2);
        for &p in &[1.0, 1.5, 2.0, 3.0, f64::INFINITY] {
            let ball = LpBall::new(4, p, 2.5).unwrap();
            for _ in 0..500 {
                let x = sample_lp_ball(&ball, &mut rng);
                let norm = if p.is_infinite() {
                    x.iter().fold(0f64, |m, v| m.max(v.abs()))
                } else {
                    x.iter().map(|v| v.abs().powf(p)).sum::<f64>().powf(1.0 / p)
                };
                assert!(norm <= 2.5 + 1e-9, "p={p} norm={norm}");
            }
        }
    }

    #[test]
    fn lp_ball_rejects_bad_parameters() {
        assert!(LpBall::new(0, 2.0, 1.0).is_err());
        assert!(LpBall::new(3, 0.5, 1.0).is_err());
        assert!(LpBall::new(3, f64::NAN, 1.0).is_err());
        assert!(LpBall::new(3, 2.0, 0.0).is_err());
        assert!(LpBall::new(3, 2.0, f64::INFINITY).is_err());
    }

    #[test]
    fn poset_ball_points_lie_in_their_simplex() {
        let base = Poset::from_relations(3, &[(0, 1)]).unwrap();
        let rooted = RootedPoset::augment(&base);
        let sampler = PosetBallSampler::new(&rooted, MaximalPolicy::Auto).unwrap();
        let mut rng = stream_rng(10, 3);
        for _ in 0..300 {
            let (point, simplex) = sampler.sample_traced(&mut rng);
            assert_eq!(point.len(), 4);
            let bary = simplex.barycentric(&point).unwrap();
            assert!(bary.iter().all(|&b| b >= -1e-9));
            assert!((bary.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn one_element_rooted_ball_is_the_interval() {
        let rooted = RootedPoset::augment(&Poset::from_relations(0, &[]).unwrap());
        let mut rng = stream_rng(10, 4);
        let mut spread = 0f64;
        for _ in 0..200 {
            let x = sample_poset_ball(&rooted, &mut rng, MaximalPolicy::Auto).unwrap();
            assert_eq!(x.len(), 1);
            assert!(x[0].abs() <= 1.0);
            spread = spread.max(x[0].abs());
        }
        assert!(spread > 0.9);
    }
}
