//! Deterministic self-check suites with serializable reports.
//!
//! Each suite exercises one slice of the library against an independent
//! ground truth — exhaustive choice-tree distributions, closed-form
//! volumes and moments, exact determinants, or reference distributions —
//! and reports a pass flag plus the measured numbers. Reports carry no
//! timestamps or environment data: rerunning a suite with the same seed
//! and trial count yields byte-identical output.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use serde_json::json;

use crate::analysis::stats::{
    chi_square_gof, gamma_cdf, ks_critical_value, ks_statistic, laplace_cdf,
};
use crate::analysis::{
    eb_volume_identity, exact_mean_sq_norms, expected_sq_norm_lp, mean_and_stderr,
    rejection_experiment, scaled_expected_sq_norm, BallFamily,
};
use crate::chains::triangulation;
use crate::eb::{count_ebs, EbSampler, MaximalPolicy};
use crate::error::{Error, Result};
use crate::mechanism::{knorm_noise, linf_mechanism, private_count, CountVector, MechanismConfig};
use crate::poset::{Poset, RootedPoset};
use crate::rng::stream_rng;
use crate::sampling::{sample_lp_ball, LpBall, PosetBallSampler};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Named self-check suites runnable from the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum VerifySuite {
    /// Bipartition sampler frequencies against exhaustive choice-tree
    /// distributions, per policy.
    Uniformity,
    /// Ball volumes via bipartition counts, closed forms, and rejection
    /// acceptance rates.
    Volume,
    /// Monte Carlo ℓp-ball moments against the closed forms.
    Lp,
    /// Triangulation determinants, counts, and membership of sampled points.
    Simplex,
    /// Noise mechanisms: reference distributions, coupling, symmetry.
    Mechanism,
}

impl VerifySuite {
    pub fn all() -> [VerifySuite; 5] {
        [
            VerifySuite::Uniformity,
            VerifySuite::Volume,
            VerifySuite::Lp,
            VerifySuite::Simplex,
            VerifySuite::Mechanism,
        ]
    }

    pub fn name(self) -> &'static str {
        match self {
            VerifySuite::Uniformity => "uniformity",
            VerifySuite::Volume => "volume",
            VerifySuite::Lp => "lp",
            VerifySuite::Simplex => "simplex",
            VerifySuite::Mechanism => "mechanism",
        }
    }
}

impl fmt::Display for VerifySuite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for VerifySuite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniformity" => Ok(VerifySuite::Uniformity),
            "volume" => Ok(VerifySuite::Volume),
            "lp" => Ok(VerifySuite::Lp),
            "simplex" => Ok(VerifySuite::Simplex),
            "mechanism" => Ok(VerifySuite::Mechanism),
            other => Err(Error::InvalidParameter(format!(
                "unknown suite '{other}' (expected uniformity|volume|lp|simplex|mechanism)"
            ))),
        }
    }
}

/// One named check inside a suite.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: serde_json::Value,
}

/// Full result of one suite run.
#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub schema_version: u32,
    pub suite: VerifySuite,
    pub seed: u64,
    pub trials: u64,
    pub passed: bool,
    pub checks: Vec<Check>,
}

/// Small posets exercised by the suites.
pub fn corpus() -> Vec<(&'static str, Poset)> {
    vec![
        ("chain2", Poset::chain(2)),
        ("chain4", Poset::chain(4)),
        ("antichain3", Poset::antichain(3)),
        ("vee", Poset::from_relations(3, &[(0, 1)]).unwrap()),
        ("fork", Poset::from_relations(3, &[(0, 1), (0, 2)]).unwrap()),
        ("diamond", Poset::from_relations(4, &[(0, 1), (0, 2), (1, 3), (2, 3)]).unwrap()),
    ]
}

/// Runs one suite deterministically from `(seed, trials)`.
pub fn run_suite(suite: VerifySuite, seed: u64, trials: u64) -> Result<SuiteReport> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    let checks = match suite {
        VerifySuite::Uniformity => uniformity_checks(seed, trials)?,
        VerifySuite::Volume => volume_checks(seed, trials)?,
        VerifySuite::Lp => lp_checks(seed, trials)?,
        VerifySuite::Simplex => simplex_checks(seed, trials)?,
        VerifySuite::Mechanism => mechanism_checks(seed, trials)?,
    };
    let passed = checks.iter().all(|c| c.passed);
    Ok(SuiteReport { schema_version: REPORT_SCHEMA_VERSION, suite, seed, trials, passed, checks })
}

/// Policies exercised by the uniformity suite.
const POLICIES: [MaximalPolicy; 4] = [
    MaximalPolicy::FirstFound,
    MaximalPolicy::ChildlessPreferred,
    MaximalPolicy::RandomMaximal,
    MaximalPolicy::ExactSmall,
];

fn uniformity_checks(seed: u64, trials: u64) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let mut stream = 0;
    for (poset_name, poset) in corpus() {
        for policy in POLICIES {
            let sampler = EbSampler::new(&poset, policy)?;
            let dist = sampler.exact_distribution()?;
            let expected: Vec<f64> = dist.iter().map(|(_, p)| *p).collect();
            // Index draws against the oracle's support.
            let index: BTreeMap<_, _> =
                dist.iter().enumerate().map(|(i, (eb, _))| (eb.clone(), i)).collect();
            // Enough draws that the rarest category clears the chi-square
            // floor of 5 expected observations.
            let min_mass = expected.iter().cloned().fold(f64::INFINITY, f64::min);
            let draws = trials.max((8.0 / min_mass).ceil() as u64);
            let mut rng = stream_rng(seed, 100 + stream);
            stream += 1;
            let mut observed = vec![0u64; dist.len()];
            let mut stray = 0u64;
            for _ in 0..draws {
                match index.get(&sampler.sample(&mut rng)) {
                    Some(&i) => observed[i] += 1,
                    None => stray += 1,
                }
            }
            let gof = chi_square_gof(&observed, &expected)?;
            let uniform_mass = 1.0 / dist.len() as f64;
            let is_uniform_policy = expected
                .iter()
                .all(|p| (p - uniform_mass).abs() < 1e-12);
            checks.push(Check {
                name: format!("{poset_name}/{policy}"),
                passed: stray == 0 && gof.p_value > 0.001,
                detail: json!({
                    "poset": poset_name,
                    "policy": policy.name(),
                    "eb_count": dist.len(),
                    "draws": draws,
                    "draws_outside_support": stray,
                    "gof_vs_exact_p": gof.p_value,
                    "exact_distribution_uniform": is_uniform_policy,
                    "min_mass": min_mass,
                    "max_mass": expected.iter().cloned().fold(0.0, f64::max),
                }),
            });
        }
    }
    Ok(checks)
}

fn volume_checks(seed: u64, trials: u64) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for n in 1..=6 {
        let v = eb_volume_identity(&Poset::antichain(n))?;
        checks.push(Check {
            name: format!("antichain{n}-volume"),
            passed: (v.total_volume - 2.0).abs() < 1e-9,
            detail: json!({
                "eb_count": v.eb_count.to_string(),
                "total_volume": v.total_volume,
                "closed_form": 2.0,
            }),
        });
    }
    for n in 1..=8 {
        let v = eb_volume_identity(&Poset::chain(n))?;
        let closed = v.closed_form.expect("chains have a closed form");
        checks.push(Check {
            name: format!("chain{n}-volume"),
            passed: (v.total_volume - closed).abs() < 1e-9,
            detail: json!({
                "eb_count": v.eb_count.to_string(),
                "total_volume": v.total_volume,
                "closed_form": closed,
            }),
        });
    }
    // Acceptance rates of cube rejection sampling against the exact
    // volume ratio, within 3 binomial standard deviations.
    let mut stream = 0;
    for (family, d) in [
        (BallFamily::RootedAntichain, 3),
        (BallFamily::RootedAntichain, 6),
        (BallFamily::TotalOrder, 4),
    ] {
        let mut rng = stream_rng(seed, 200 + stream);
        stream += 1;
        let budget = trials.max(20_000);
        let r = rejection_experiment(family, d, budget, &mut rng)?;
        let deviation = (r.rate - r.expected_rate).abs();
        checks.push(Check {
            name: format!("{}-d{d}-rejection", family.name()),
            passed: deviation <= 3.0 * r.sigma,
            detail: json!({
                "budget": r.budget,
                "hits": r.hits,
                "rate": r.rate,
                "expected_rate": r.expected_rate,
                "sigma": r.sigma,
            }),
        });
    }
    Ok(checks)
}

fn lp_checks(seed: u64, trials: u64) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let ps = [1.0, 1.5, 2.0, 3.0, f64::INFINITY];
    let mut stream = 0;
    for d in [1usize, 2, 3, 5, 10, 20] {
        for p in ps {
            let ball = LpBall::unit(d, p)?;
            let mut rng = stream_rng(seed, 300 + stream);
            stream += 1;
            let n = trials.max(20_000);
            let mut sq = Vec::with_capacity(n as usize);
            for _ in 0..n {
                let x = sample_lp_ball(&ball, &mut rng);
                sq.push(x.iter().map(|v| v * v).sum::<f64>());
            }
            let (mean, stderr) = mean_and_stderr(&sq);
            let analytic = expected_sq_norm_lp(d, p)?;
            let z = (mean - analytic) / stderr;
            checks.push(Check {
                name: format!("moment-d{d}-p{p}"),
                passed: z.abs() <= 3.0,
                detail: json!({
                    "d": d, "p": p, "trials": n,
                    "monte_carlo": mean, "analytic": analytic, "z": z,
                }),
            });
        }
    }
    // The cube minimizes the scaled expected squared norm over p for every
    // dimension in 2..=50.
    let grid = [1.0, 1.5, 2.0, 2.5, 3.0, 4.0, 6.0, 8.0, 16.0, 64.0, f64::INFINITY];
    let mut argmin_always_inf = true;
    for d in 2..=50 {
        let best = grid
            .iter()
            .cloned()
            .min_by(|&a, &b| {
                scaled_expected_sq_norm(d, a)
                    .unwrap()
                    .total_cmp(&scaled_expected_sq_norm(d, b).unwrap())
            })
            .unwrap();
        if best.is_finite() {
            argmin_always_inf = false;
        }
    }
    checks.push(Check {
        name: "scaled-argmin-is-cube".into(),
        passed: argmin_always_inf,
        detail: json!({ "d_range": [2, 50], "p_grid_size": grid.len() }),
    });
    Ok(checks)
}

fn simplex_checks(seed: u64, trials: u64) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let mut stream = 0;
    for (poset_name, poset) in corpus() {
        let rooted = RootedPoset::augment(&poset);
        let d = rooted.dimension();
        let tri = triangulation(&rooted, 12)?;
        let eb_count = count_ebs(&poset)?;
        let mut all_dets_two = true;
        for (_, simplex) in &tri {
            if simplex.volume_determinant()?.unsigned_abs() != 2 {
                all_dets_two = false;
            }
        }
        // Uniform ball samples must land in the simplex that generated
        // them, with barycentric coordinates forming a probability vector.
        let sampler = PosetBallSampler::new(&rooted, MaximalPolicy::Auto)?;
        let mut rng = stream_rng(seed, 400 + stream);
        stream += 1;
        let draws = trials.min(2000).max(200);
        let mut contained = true;
        for _ in 0..draws {
            let (point, simplex) = sampler.sample_traced(&mut rng);
            let weights = simplex.barycentric(&point)?;
            let sum: f64 = weights.iter().sum();
            if weights.iter().any(|&w| w < -1e-9) || (sum - 1.0).abs() > 1e-9 {
                contained = false;
            }
        }
        let (full_moment, _) = exact_mean_sq_norms(&rooted, 12)?;
        checks.push(Check {
            name: format!("{poset_name}-triangulation"),
            passed: all_dets_two && tri.len() as u128 == eb_count && contained,
            detail: json!({
                "rooted_dimension": d,
                "simplices": tri.len(),
                "eb_count": eb_count.to_string(),
                "all_determinants_two": all_dets_two,
                "sampled_points_contained": contained,
                "draws": draws,
                "exact_mean_sq_norm": full_moment,
            }),
        });
    }
    Ok(checks)
}

fn mechanism_checks(seed: u64, trials: u64) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let config = MechanismConfig::new(1.0)?;

    // In one dimension the cube mechanism is exactly Laplace(1/ε).
    let n = trials.max(100_000);
    let mut rng = stream_rng(seed, 500);
    let mut draws = Vec::with_capacity(n as usize);
    for _ in 0..n {
        draws.push(linf_mechanism(&[0.0], &config, &mut rng)?[0]);
    }
    let stat = ks_statistic(&mut draws, |x| laplace_cdf(x, config.scale()));
    let critical = ks_critical_value(0.01, n as usize);
    checks.push(Check {
        name: "one-dim-noise-is-laplace".into(),
        passed: stat <= critical,
        detail: json!({ "draws": n, "ks_statistic": stat, "ks_critical_0_01": critical }),
    });

    // The ball norm of the noise follows a Gamma distribution with shape
    // equal to the ambient dimension; the rooted-antichain norm has a
    // closed form, making the law directly observable.
    let rooted = BallFamily::RootedAntichain.rooted(3)?;
    let sampler = PosetBallSampler::new(&rooted, MaximalPolicy::Auto)?;
    let mut rng = stream_rng(seed, 501);
    let m = trials.max(50_000);
    let mut norms = Vec::with_capacity(m as usize);
    for _ in 0..m {
        let noise = knorm_noise(3, |r| sampler.sample(r), &config, &mut rng);
        norms.push(BallFamily::RootedAntichain.norm(&noise));
    }
    let stat = ks_statistic(&mut norms, |x| gamma_cdf(3.0, config.scale(), x));
    let critical = ks_critical_value(0.01, m as usize);
    checks.push(Check {
        name: "noise-norm-is-gamma".into(),
        passed: stat <= critical,
        detail: json!({
            "dimension": 3, "draws": m,
            "ks_statistic": stat, "ks_critical_0_01": critical,
        }),
    });

    // Pathwise coupling: doubling ε halves every coordinate exactly.
    let poset = Poset::from_relations(3, &[(0, 1)])?;
    let data = CountVector::new(&poset, vec![0, 0, 0], 0)?;
    let double = MechanismConfig::new(2.0)?;
    let a = private_count(&poset, &data, &config, &mut stream_rng(seed, 502))?;
    let b = private_count(&poset, &data, &double, &mut stream_rng(seed, 502))?;
    let coupled = a
        .iter()
        .zip(&b)
        .all(|(x, y)| (x - 2.0 * y).abs() <= 1e-12 * x.abs().max(1.0));
    checks.push(Check {
        name: "epsilon-coupling-pathwise".into(),
        passed: coupled,
        detail: json!({ "epsilon_pair": [1.0, 2.0], "coordinates": a.len() }),
    });

    // Symmetry: the noise has mean zero coordinate-wise.
    let mut rng = stream_rng(seed, 503);
    let k = trials.max(200_000);
    let dim = poset.len();
    let mut sums = vec![0.0f64; dim];
    let mut sq_sums = vec![0.0f64; dim];
    for _ in 0..k {
        let y = private_count(&poset, &data, &config, &mut rng)?;
        for (i, v) in y.iter().enumerate() {
            sums[i] += v;
            sq_sums[i] += v * v;
        }
    }
    let mut symmetric = true;
    let mut worst_z = 0.0f64;
    for i in 0..dim {
        let mean = sums[i] / k as f64;
        let var = sq_sums[i] / k as f64 - mean * mean;
        let z = mean / (var / k as f64).sqrt();
        worst_z = worst_z.max(z.abs());
        if z.abs() > 3.0 {
            symmetric = false;
        }
    }
    checks.push(Check {
        name: "noise-mean-zero".into(),
        passed: symmetric,
        detail: json!({ "draws": k, "coordinates": dim, "worst_z": worst_z }),
    });

    Ok(checks)
}
