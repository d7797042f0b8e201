//! Statistical test utilities used by the verification suites.

use statrs::function::gamma::gamma_ur;

use crate::error::{Error, Result};

/// Outcome of a chi-square test.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

fn chi_square_p(statistic: f64, dof: usize) -> f64 {
    // Q(a, 0) = 1 exactly, but the implementation only accepts x > 0.
    if dof == 0 || statistic <= 0.0 {
        return 1.0;
    }
    gamma_ur(dof as f64 / 2.0, statistic / 2.0)
}

/// Goodness of fit of `observed` category counts against the uniform
/// distribution. Errors when any expected count falls below 5.
pub fn chi_square_uniformity(observed: &[u64]) -> Result<ChiSquare> {
    let k = observed.len();
    if k < 2 {
        return Err(Error::InvalidParameter("need at least two categories".into()));
    }
    let total: u64 = observed.iter().sum();
    let expected = total as f64 / k as f64;
    if expected < 5.0 {
        return Err(Error::Undersampled { category: 0, expected });
    }
    let statistic = observed
        .iter()
        .map(|&o| {
            let diff = o as f64 - expected;
            diff * diff / expected
        })
        .sum();
    let dof = k - 1;
    Ok(ChiSquare { statistic, dof, p_value: chi_square_p(statistic, dof) })
}

/// Goodness of fit of `observed` category counts against arbitrary
/// category probabilities (which must be positive and sum to 1). Errors
/// when any expected count falls below 5.
pub fn chi_square_gof(observed: &[u64], expected_probs: &[f64]) -> Result<ChiSquare> {
    let k = observed.len();
    if k != expected_probs.len() {
        return Err(Error::LengthMismatch { expected: k, found: expected_probs.len() });
    }
    if k < 2 {
        return Err(Error::InvalidParameter("need at least two categories".into()));
    }
    let prob_total: f64 = expected_probs.iter().sum();
    if (prob_total - 1.0).abs() > 1e-9 || expected_probs.iter().any(|&p| p <= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "expected probabilities must be positive and sum to 1, got total {prob_total}"
        )));
    }
    let total: u64 = observed.iter().sum();
    let mut statistic = 0.0;
    for (category, (&o, &p)) in observed.iter().zip(expected_probs).enumerate() {
        let expected = p * total as f64;
        if expected < 5.0 {
            return Err(Error::Undersampled { category, expected });
        }
        let diff = o as f64 - expected;
        statistic += diff * diff / expected;
    }
    let dof = k - 1;
    Ok(ChiSquare { statistic, dof, p_value: chi_square_p(statistic, dof) })
}

/// Two-sample chi-square homogeneity test over a shared partition. Cells
/// empty in both samples are skipped; the smaller sample's expected count
/// must reach 5 in every remaining cell (pool cells beforehand otherwise).
pub fn chi_square_two_sample(a: &[u64], b: &[u64]) -> Result<ChiSquare> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch { expected: a.len(), found: b.len() });
    }
    let n1: u64 = a.iter().sum();
    let n2: u64 = b.iter().sum();
    if n1 == 0 || n2 == 0 {
        return Err(Error::InvalidParameter("both samples must be non-empty".into()));
    }
    let (n1, n2) = (n1 as f64, n2 as f64);
    let k1 = (n2 / n1).sqrt();
    let k2 = (n1 / n2).sqrt();
    let mut statistic = 0.0;
    let mut used = 0usize;
    for (category, (&o1, &o2)) in a.iter().zip(b).enumerate() {
        let pooled = (o1 + o2) as f64;
        if pooled == 0.0 {
            continue;
        }
        let expected_small = pooled * n1.min(n2) / (n1 + n2);
        if expected_small < 5.0 {
            return Err(Error::Undersampled { category, expected: expected_small });
        }
        let diff = k1 * o1 as f64 - k2 * o2 as f64;
        statistic += diff * diff / pooled;
        used += 1;
    }
    if used < 2 {
        return Err(Error::InvalidParameter("fewer than two occupied cells".into()));
    }
    let dof = used - 1;
    Ok(ChiSquare { statistic, dof, p_value: chi_square_p(statistic, dof) })
}

/// One-sample Kolmogorov-Smirnov statistic of `samples` against `cdf`.
pub fn ks_statistic(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = samples.len();
    assert!(n > 0, "need samples");
    samples.sort_unstable_by(f64::total_cmp);
    let mut d = 0f64;
    for (i, &x) in samples.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n as f64);
        d = d.max((i + 1) as f64 / n as f64 - f);
    }
    d
}

/// Asymptotic KS rejection threshold at significance `alpha` for `n`
/// samples: `sqrt(-ln(alpha / 2) / 2) / sqrt(n)`.
pub fn ks_critical_value(alpha: f64, n: usize) -> f64 {
    ((-(alpha / 2.0).ln()) / 2.0).sqrt() / (n as f64).sqrt()
}

/// Spearman rank correlation with average ranks on ties.
pub fn spearman_rho(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch { expected: x.len(), found: y.len() });
    }
    if x.len() < 2 {
        return Err(Error::InvalidParameter("need at least two pairs".into()));
    }
    let rx = ranks(x);
    let ry = ranks(y);
    let n = x.len() as f64;
    let mean = (n + 1.0) / 2.0;
    let mut cov = 0.0;
    let mut var_x = 0.0;
    let mut var_y = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        cov += (a - mean) * (b - mean);
        var_x += (a - mean) * (a - mean);
        var_y += (b - mean) * (b - mean);
    }
    if var_x == 0.0 || var_y == 0.0 {
        return Err(Error::InvalidParameter("constant input has no rank correlation".into()));
    }
    Ok(cov / (var_x * var_y).sqrt())
}

fn ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut out = vec![0f64; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            out[idx] = rank;
        }
        i = j + 1;
    }
    out
}

/// CDF of the centered Laplace distribution with the given scale.
pub fn laplace_cdf(x: f64, scale: f64) -> f64 {
    if x < 0.0 {
        0.5 * (x / scale).exp()
    } else {
        1.0 - 0.5 * (-x / scale).exp()
    }
}

/// CDF of the Gamma distribution in shape/scale parameterization.
pub fn gamma_cdf(shape: f64, scale: f64, x: f64) -> f64 {
    use statrs::distribution::ContinuousCDF;
    statrs::distribution::Gamma::new(shape, 1.0 / scale)
        .expect("valid gamma parameters")
        .cdf(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniformity_statistic_matches_hand_computation() {
        // Counts (18, 12, 15, 15), expected 15 each:
        // (9 + 9 + 0 + 0) / 15 = 1.2 on 3 degrees of freedom.
        let t = chi_square_uniformity(&[18, 12, 15, 15]).unwrap();
        assert!((t.statistic - 1.2).abs() < 1e-12);
        assert_eq!(t.dof, 3);
        assert!((t.p_value - 0.7530).abs() < 1e-3);
    }

    #[test]
    fn empty_category_with_many_trials_is_detected() {
        let t = chi_square_uniformity(&[500, 500, 0]).unwrap();
        assert!(t.p_value < 1e-6);
    }

    #[test]
    fn weighted_gof_matches_hand_computation() {
        // Counts (30, 70) against (1/4, 3/4) of 100: expected (25, 75),
        // statistic 25/25 + 25/75 = 4/3 on 1 degree of freedom.
        let t = chi_square_gof(&[30, 70], &[0.25, 0.75]).unwrap();
        assert!((t.statistic - 4.0 / 3.0).abs() < 1e-12);
        assert_eq!(t.dof, 1);
        // Perfect fit has statistic 0 and p-value 1.
        let t = chi_square_gof(&[25, 75], &[0.25, 0.75]).unwrap();
        assert_eq!(t.statistic, 0.0);
        assert!((t.p_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn weighted_gof_validates_inputs() {
        assert!(chi_square_gof(&[10, 10], &[0.5, 0.4]).is_err());
        assert!(chi_square_gof(&[10, 10], &[0.5]).is_err());
        assert!(chi_square_gof(&[10, 10], &[1.0, 0.0]).is_err());
        // Expected count 0.2 < 5 in the small cell.
        assert!(matches!(
            chi_square_gof(&[10, 10], &[0.01, 0.99]),
            Err(Error::Undersampled { category: 0, .. })
        ));
    }

    #[test]
    fn undersampled_input_is_rejected() {
        assert!(matches!(
            chi_square_uniformity(&[2, 3, 1]),
            Err(Error::Undersampled { .. })
        ));
    }

    #[test]
    fn two_sample_test_accepts_identical_distributions() {
        let t = chi_square_two_sample(&[100, 200, 300], &[110, 190, 300]).unwrap();
        assert!(t.p_value > 0.05);
        let t = chi_square_two_sample(&[100, 200, 300], &[300, 200, 100]).unwrap();
        assert!(t.p_value < 1e-6);
    }

    #[test]
    fn ks_detects_wrong_distribution() {
        let uniform_cdf = |x: f64| x.clamp(0.0, 1.0);
        let mut close: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
        assert!(ks_statistic(&mut close, uniform_cdf) < ks_critical_value(0.01, 1000));
        let mut skewed: Vec<f64> = (0..1000).map(|i| ((i as f64 + 0.5) / 1000.0).powi(2)).collect();
        assert!(ks_statistic(&mut skewed, uniform_cdf) > ks_critical_value(0.01, 1000));
    }

    #[test]
    fn ks_critical_value_matches_tabulated_constant() {
        // c(0.01) = 1.6276 for large n.
        assert!((ks_critical_value(0.01, 1) - 1.6276).abs() < 1e-3);
    }

    #[test]
    fn spearman_detects_monotone_relationships() {
        let x = [1.0, 2.0, 3.0, 4.0];
        assert!((spearman_rho(&x, &[2.0, 4.0, 5.0, 9.0]).unwrap() - 1.0).abs() < 1e-12);
        assert!((spearman_rho(&x, &[9.0, 5.0, 4.0, 2.0]).unwrap() + 1.0).abs() < 1e-12);
        let rho = spearman_rho(&x, &[1.0, 1.0, 2.0, 2.0]).unwrap();
        assert!(rho > 0.8);
    }

    #[test]
    fn laplace_cdf_basics() {
        assert!((laplace_cdf(0.0, 1.0) - 0.5).abs() < 1e-15);
        assert!((laplace_cdf(1.0, 1.0) + laplace_cdf(-1.0, 1.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn gamma_cdf_matches_exponential_special_case() {
        // Gamma(1, scale) is Exp(1/scale).
        let x = 0.7;
        assert!((gamma_cdf(1.0, 2.0, x) - (1.0 - (-x / 2.0f64).exp())).abs() < 1e-12);
    }
}
