//! Closed-form norms, membership oracles, and exact moments.
//!
//! Everything here exists to check the samplers and mechanisms against
//! independent ground truth: analytic expected squared norms of ℓp balls,
//! explicit membership tests for the two poset families whose norm balls
//! have elementary descriptions, volume identities through bipartition
//! counts, and exact second moments via the triangulation.

pub mod stats;

use rand::Rng;
use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::chains::triangulation;
use crate::eb::count_ebs;
use crate::error::{Error, Result};
use crate::poset::{Poset, RootedPoset};

fn check_lp_params(d: usize, p: f64) -> Result<()> {
    if d == 0 {
        return Err(Error::InvalidParameter("dimension must be positive".into()));
    }
    if !(p >= 1.0) {
        return Err(Error::InvalidParameter(format!("p must be in [1, ∞], got {p}")));
    }
    Ok(())
}

/// Expected squared Euclidean norm of a uniform sample from the unit ℓp
/// ball in `R^d`: `d^2/(d+2) · Γ(d/p)Γ(3/p) / (Γ(1/p)Γ((d+2)/p))`, with the
/// cube limit `d/3` at `p = ∞`.
pub fn expected_sq_norm_lp(d: usize, p: f64) -> Result<f64> {
    check_lp_params(d, p)?;
    let df = d as f64;
    if p.is_infinite() {
        return Ok(df / 3.0);
    }
    let ln_value = 2.0 * df.ln() - (df + 2.0).ln() + ln_gamma(df / p) + ln_gamma(3.0 / p)
        - ln_gamma(1.0 / p)
        - ln_gamma((df + 2.0) / p);
    Ok(ln_value.exp())
}

/// Radius of the smallest ℓp ball containing the binary cube `{0,1}^d`
/// (`d^{1/p}`, so `1` at `p = ∞`).
pub fn min_enclosing_radius(d: usize, p: f64) -> Result<f64> {
    check_lp_params(d, p)?;
    if p.is_infinite() {
        return Ok(1.0)
    }
    Ok((d as f64).powf(1.0 / p))
}

/// Expected squared norm of the ℓp ball scaled to enclose the binary cube:
/// `d^{2/p} · expected_sq_norm_lp(d, p)`.
pub fn scaled_expected_sq_norm(d: usize, p: f64) -> Result<f64> {
    let r = min_enclosing_radius(d, p)?;
    Ok(r * r * expected_sq_norm_lp(d, p)?)
}

/// Rooted posets whose norm balls admit closed-form membership tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BallFamily {
    /// Root above `d - 1` pairwise incomparable elements.
    RootedAntichain,
    /// A total order with the root on top.
    TotalOrder,
}

impl BallFamily {
    /// The rooted poset of total dimension `d` (root included).
    pub fn rooted(self, d: usize) -> Result<RootedPoset> {
        if d == 0 {
            return Err(Error::EmptyPoset);
        }
        let base = match self {
            BallFamily::RootedAntichain => Poset::antichain(d - 1),
            BallFamily::TotalOrder => Poset::chain(d - 1),
        };
        Ok(RootedPoset::augment(&base))
    }

    /// Norm of `y` in the family's ball; membership is `norm ≤ 1`.
    ///
    /// Rooted antichain: `max(|y_0|, max_i |2 y_i - y_0|)`. Total order:
    /// the ℓ1 norm of successive differences walked bottom to top, ending
    /// at the root (coordinates `1, …, d-1, 0` by construction).
    pub fn norm(self, y: &[f64]) -> f64 {
        assert!(!y.is_empty(), "rooted dimension is at least 1");
        match self {
            BallFamily::RootedAntichain => {
                let mut m = y[0].abs();
                for &yi in &y[1..] {
                    m = m.max((2.0 * yi - y[0]).abs());
                }
                m
            }
            BallFamily::TotalOrder => {
                let mut total = 0.0;
                let mut prev = 0.0;
                for &yi in y[1..].iter().chain([&y[0]]) {
                    total += (yi - prev).abs();
                    prev = yi;
                }
                total
            }
        }
    }

    pub fn contains(self, y: &[f64]) -> bool {
        self.norm(y) <= 1.0
    }

    /// Ball volume over the enclosing cube volume `2^d`: the acceptance
    /// rate of rejection sampling from `[-1, 1]^d`.
    pub fn acceptance_rate(self, d: usize) -> f64 {
        match self {
            // Volume 2 regardless of dimension.
            BallFamily::RootedAntichain => 2.0 / 2f64.powi(d as i32),
            // Volume 2^d / d!.
            BallFamily::TotalOrder => 1.0 / factorial_f64(d),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BallFamily::RootedAntichain => "rooted-antichain",
            BallFamily::TotalOrder => "total-order",
        }
    }
}

fn factorial_f64(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// Result of firing uniform cube proposals at a closed-form ball.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RejectionReport {
    pub family: BallFamily,
    pub d: usize,
    pub budget: u64,
    pub hits: u64,
    pub rate: f64,
    pub expected_rate: f64,
    /// Binomial standard deviation of `rate` under the expected rate.
    pub sigma: f64,
}

/// Samples `budget` uniform points from `[-1, 1]^d` and counts membership.
pub fn rejection_experiment<R: Rng>(
    family: BallFamily,
    d: usize,
    budget: u64,
    rng: &mut R,
) -> Result<RejectionReport> {
    if d == 0 {
        return Err(Error::EmptyPoset);
    }
    let mut point = vec![0f64; d];
    let mut hits = 0u64;
    for _ in 0..budget {
        for x in point.iter_mut() {
            *x = 2.0 * rng.gen::<f64>() - 1.0;
        }
        if family.contains(&point) {
            hits += 1;
        }
    }
    let expected_rate = family.acceptance_rate(d);
    let sigma = (expected_rate * (1.0 - expected_rate) / budget as f64).sqrt();
    Ok(RejectionReport {
        family,
        d,
        budget,
        hits,
        rate: hits as f64 / budget as f64,
        expected_rate,
        sigma,
    })
}

/// Volume of the norm ball of the rooted extension of `poset` via the
/// bipartition count: every simplex of the triangulation has volume
/// `2 / d!` in rooted dimension `d = n + 1`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct VolumeIdentity {
    pub eb_count: u128,
    pub total_volume: f64,
    /// Independent closed form when the poset is an antichain (volume 2) or
    /// a total order (volume `2^d / d!`).
    pub closed_form: Option<f64>,
}

pub fn eb_volume_identity(poset: &Poset) -> Result<VolumeIdentity> {
    let n = poset.len();
    let d = n + 1;
    let eb_count = count_ebs(poset)?;
    let total_volume = 2.0 * eb_count as f64 / factorial_f64(d);
    let is_antichain = poset.covers().is_empty();
    let is_chain = n == 0 || poset.metrics().depth == n - 1;
    let closed_form = if is_antichain {
        Some(2.0)
    } else if is_chain {
        Some(2f64.powi(d as i32) / factorial_f64(d))
    } else {
        None
    };
    Ok(VolumeIdentity { eb_count, total_volume, closed_form })
}

/// Exact expected squared Euclidean norm of a uniform ball sample, and of
/// the sample with the root coordinate dropped, via the triangulation
/// (enumeration capped at `cap` non-root elements).
pub fn exact_mean_sq_norms(rooted: &RootedPoset, cap: usize) -> Result<(f64, f64)> {
    let tri = triangulation(rooted, cap)?;
    let d = rooted.dimension();
    let m = (d + 1) as f64;
    let denom = m * (m + 1.0);
    let mut full = 0.0;
    let mut nonroot = 0.0;
    for (_, simplex) in &tri {
        for k in 0..d {
            let mut sum = 0f64;
            let mut sum_sq = 0f64;
            for vertex in simplex.vertices() {
                let v = f64::from(vertex[k]);
                sum += v;
                sum_sq += v * v;
            }
            let contribution = (sum_sq + sum * sum) / denom;
            full += contribution;
            if k > 0 {
                nonroot += contribution;
            }
        }
    }
    let count = tri.len() as f64;
    Ok((full / count, nonroot / count))
}

/// Monte Carlo check that expected squared norms add over direct sums of
/// independent ℓp ball samples.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct AdditivityReport {
    pub d1: usize,
    pub d2: usize,
    pub p: f64,
    pub trials: u64,
    pub analytic: f64,
    pub empirical: f64,
    pub stderr: f64,
    pub pass: bool,
}

pub fn direct_sum_additivity_check<R: Rng>(
    d1: usize,
    d2: usize,
    p: f64,
    trials: u64,
    rng: &mut R,
) -> Result<AdditivityReport> {
    use crate::sampling::{sample_lp_ball, LpBall};
    let ball1 = LpBall::unit(d1, p)?;
    let ball2 = LpBall::unit(d2, p)?;
    let mut samples = Vec::with_capacity(trials as usize);
    for _ in 0..trials {
        let x1 = sample_lp_ball(&ball1, rng);
        let x2 = sample_lp_ball(&ball2, rng);
        let sq = x1.iter().chain(&x2).map(|v| v * v).sum::<f64>();
        samples.push(sq);
    }
    let (empirical, stderr) = mean_and_stderr(&samples);
    let analytic = expected_sq_norm_lp(d1, p)? + expected_sq_norm_lp(d2, p)?;
    Ok(AdditivityReport {
        d1,
        d2,
        p,
        trials,
        analytic,
        empirical,
        stderr,
        pass: (empirical - analytic).abs() <= 3.0 * stderr,
    })
}

/// Sample mean and its standard error.
pub fn mean_and_stderr(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    assert!(n >= 2.0, "need at least two samples");
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;

    #[test]
    fn p2_closed_form_is_d_over_d_plus_2() {
        for d in 1..=50 {
            let got = expected_sq_norm_lp(d, 2.0).unwrap();
            let want = d as f64 / (d as f64 + 2.0);
            assert!((got - want).abs() < 1e-12, "d={d}: {got} vs {want}");
        }
        assert!((expected_sq_norm_lp(3, 2.0).unwrap() - 0.6).abs() < 1e-12);
    }

    #[test]
    fn p1_closed_form_matches() {
        // 2d / ((d+1)(d+2)).
        for d in 1..=50 {
            let df = d as f64;
            let got = expected_sq_norm_lp(d, 1.0).unwrap();
            let want = 2.0 * df / ((df + 1.0) * (df + 2.0));
            assert!((got - want).abs() < 1e-12, "d={d}");
        }
    }

    #[test]
    fn large_p_approaches_the_cube() {
        for d in [1, 3, 10, 50] {
            let got = expected_sq_norm_lp(d, 1e6).unwrap();
            let want = d as f64 / 3.0;
            assert!((got / want - 1.0).abs() < 1e-6, "d={d}");
        }
        assert_eq!(expected_sq_norm_lp(9, f64::INFINITY).unwrap(), 3.0);
    }

    #[test]
    fn scaled_ratio_between_l1_and_linf() {
        // 6 d^2 / ((d+1)(d+2)): exactly 2 at d = 2, about 5.66 at d = 50.
        let ratio = |d: usize| {
            scaled_expected_sq_norm(d, 1.0).unwrap()
                / scaled_expected_sq_norm(d, f64::INFINITY).unwrap()
        };
        assert!((ratio(2) - 2.0).abs() < 1e-12);
        let want50 = 6.0 * 2500.0 / (51.0 * 52.0);
        assert!((ratio(50) - want50).abs() < 1e-9);
    }

    #[test]
    fn radius_covers_the_binary_cube() {
        assert_eq!(min_enclosing_radius(4, 1.0).unwrap(), 4.0);
        assert!((min_enclosing_radius(4, 2.0).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(min_enclosing_radius(4, f64::INFINITY).unwrap(), 1.0);
    }

    #[test]
    fn invalid_lp_parameters_are_rejected() {
        assert!(expected_sq_norm_lp(0, 2.0).is_err());
        assert!(expected_sq_norm_lp(3, 0.99).is_err());
        assert!(expected_sq_norm_lp(3, f64::NAN).is_err());
    }

    #[test]
    fn antichain_membership_matches_hand_points() {
        let f = BallFamily::RootedAntichain;
        assert!(f.contains(&[1.0, 1.0]));
        assert!(!f.contains(&[1.0, -0.01]));
        assert!(f.contains(&[0.0, 0.5]));
        assert!(f.contains(&[-1.0, -1.0]));
        assert!(!f.contains(&[1.1, 0.0]));
    }

    #[test]
    fn total_order_membership_matches_hand_points() {
        let f = BallFamily::TotalOrder;
        assert!(f.contains(&[1.0, 1.0]));
        assert!(!f.contains(&[1.0, -0.5]));
        assert!((f.norm(&[1.0, 1.0]) - 1.0).abs() < 1e-15);
        // Vertices of the rooted d = 3 ball have norm exactly 1.
        assert!((f.norm(&[1.0, 1.0, 1.0]) - 1.0).abs() < 1e-15);
        assert!((f.norm(&[1.0, 0.0, 1.0]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn family_posets_have_the_right_shape() {
        let anti = BallFamily::RootedAntichain.rooted(4).unwrap();
        assert_eq!(anti.poset().metrics().depth, 1);
        let chain = BallFamily::TotalOrder.rooted(4).unwrap();
        assert_eq!(chain.poset().metrics().depth, 3);
    }

    #[test]
    fn one_dimensional_rejection_always_accepts() {
        let mut rng = stream_rng(20, 0);
        let r = rejection_experiment(BallFamily::RootedAntichain, 1, 500, &mut rng).unwrap();
        assert_eq!(r.hits, 500);
        assert_eq!(r.expected_rate, 1.0);
    }

    #[test]
    fn volume_identities_for_the_closed_form_families() {
        // Rooted antichain(3): 24 bipartitions, volume 2·24/4! = 2.
        let v = eb_volume_identity(&Poset::antichain(3)).unwrap();
        assert_eq!(v.eb_count, 24);
        assert!((v.total_volume - 2.0).abs() < 1e-12);
        assert_eq!(v.closed_form, Some(2.0));
        // Total order d = 3: 4 bipartitions, volume 2·4/3! = 2^3/3!.
        let v = eb_volume_identity(&Poset::chain(2)).unwrap();
        assert_eq!(v.eb_count, 4);
        assert!((v.total_volume - 4.0 / 3.0).abs() < 1e-12);
        assert_eq!(v.closed_form, Some(8.0 / 6.0));
        // A vee is neither.
        let vee = Poset::from_relations(3, &[(0, 1)]).unwrap();
        assert_eq!(eb_volume_identity(&vee).unwrap().closed_form, None);
    }

    #[test]
    fn exact_moment_for_the_one_element_poset() {
        // Rooted single element: parallelogram with E[y_1^2] = 1/6, so the
        // root-dropped ratio against the cube's 1/3 is 1/2.
        let rooted = RootedPoset::augment(&Poset::antichain(1));
        let (_, nonroot) = exact_mean_sq_norms(&rooted, 12).unwrap();
        assert!((nonroot - 1.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn antichain_moments_are_dimension_free() {
        // The rooted antichain ball has E[y_i^2] = 1/6 in every non-root
        // coordinate, hence a ratio of exactly 1/2 against the cube.
        for n in [2, 4] {
            let rooted = RootedPoset::augment(&Poset::antichain(n));
            let (_, nonroot) = exact_mean_sq_norms(&rooted, 12).unwrap();
            assert!((nonroot - n as f64 / 6.0).abs() < 1e-12, "n={n}");
        }
    }

    #[test]
    fn additivity_check_passes_for_the_example_sums() {
        let mut rng = stream_rng(20, 1);
        let r = direct_sum_additivity_check(2, 3, f64::INFINITY, 20_000, &mut rng).unwrap();
        assert!(r.pass, "linf: {r:?}");
        assert!((r.analytic - 5.0 / 3.0).abs() < 1e-12);
        let r = direct_sum_additivity_check(2, 2, 2.0, 20_000, &mut rng).unwrap();
        assert!(r.pass, "l2: {r:?}");
        assert!((r.analytic - 1.0).abs() < 1e-12);
    }
}
