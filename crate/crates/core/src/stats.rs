//! Empirical statistics: Kolmogorov–Smirnov distances, chi-square
//! homogeneity, and order-independent sums.

use statrs::distribution::{ChiSquared, ContinuousCDF, Gamma};

use crate::error::{invalid, Result};

/// Pairwise (cascade) summation. The result depends only on the order of
/// `xs`, never on how replicates were scheduled.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

pub fn mean(xs: &[f64]) -> Result<f64> {
    if xs.is_empty() {
        return invalid("mean of an empty sample");
    }
    Ok(pairwise_sum(xs) / xs.len() as f64)
}

fn sorted(samples: &[f64]) -> Result<Vec<f64>> {
    if samples.is_empty() {
        return invalid("empty sample");
    }
    if samples.iter().any(|x| x.is_nan()) {
        return invalid("sample contains NaN");
    }
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// `sup_x |F_m(x) - F(x)|`, checking both sides of every jump of the
/// empirical CDF. The model CDF may have atoms: its left limit at a sample
/// point is taken just below it.
pub fn ks_distance<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<f64> {
    let v = sorted(samples)?;
    let m = v.len() as f64;
    let mut d = 0.0f64;
    let mut i = 0;
    while i < v.len() {
        let x = v[i];
        let mut j = i;
        while j < v.len() && v[j] == x {
            j += 1;
        }
        let below = cdf(x - 1e-12 * x.abs().max(1.0));
        d = d.max((j as f64 / m - cdf(x)).abs()).max((below - i as f64 / m).abs());
        i = j;
    }
    Ok(d)
}

/// `sup_x |F_a(x) - F_b(x)|` over the pooled jump points.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<f64> {
    let (a, b) = (sorted(a)?, sorted(b)?);
    let (ma, mb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d = 0.0f64;
    while i < a.len() || j < b.len() {
        let x = match (a.get(i), b.get(j)) {
            (Some(&p), Some(&q)) => p.min(q),
            (Some(&p), None) => p,
            (None, Some(&q)) => q,
            (None, None) => unreachable!(),
        };
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / ma - j as f64 / mb).abs());
    }
    Ok(d)
}

/// Largest violation of `F_upper - slack <= F_mid <= F_lower + slack` over
/// the pooled jump points: returns `max(F_upper - F_mid, F_mid - F_lower)`
/// clipped at zero. Used for stochastic sandwiches `lower <= mid <= upper`
/// in the usual order (smaller variables have larger CDFs).
pub fn sandwich_gap(lower: &[f64], mid: &[f64], upper: &[f64]) -> Result<f64> {
    let (lo, md, up) = (sorted(lower)?, sorted(mid)?, sorted(upper)?);
    let ecdf = |v: &[f64], x: f64| v.partition_point(|&y| y <= x) as f64 / v.len() as f64;
    let mut gap = 0.0f64;
    for &x in lo.iter().chain(&md).chain(&up) {
        let (fl, fm, fu) = (ecdf(&lo, x), ecdf(&md, x), ecdf(&up, x));
        gap = gap.max(fu - fm).max(fm - fl);
    }
    Ok(gap)
}

/// Chi-square homogeneity test of two count vectors over the same
/// categories. Categories whose pooled count is below `min_expected` are
/// merged into one bin.
#[derive(Clone, Debug, PartialEq)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

pub fn chi_square_homogeneity(a: &[u64], b: &[u64], min_expected: f64) -> Result<ChiSquare> {
    if a.len() != b.len() {
        return invalid("count vectors differ in length");
    }
    let (na, nb) = (a.iter().sum::<u64>() as f64, b.iter().sum::<u64>() as f64);
    if na == 0.0 || nb == 0.0 {
        return invalid("both samples need at least one observation");
    }
    let total = na + nb;
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let mut pool = (0.0, 0.0);
    for (&x, &y) in a.iter().zip(b) {
        let (x, y) = (x as f64, y as f64);
        let low = (x + y) * na.min(nb) / total < min_expected;
        if low {
            pool.0 += x;
            pool.1 += y;
        } else {
            bins.push((x, y));
        }
    }
    if pool.0 + pool.1 > 0.0 {
        bins.push(pool);
    }
    let mut stat = 0.0;
    for &(x, y) in &bins {
        let c = x + y;
        if c == 0.0 {
            continue;
        }
        let (ea, eb) = (c * na / total, c * nb / total);
        stat += (x - ea).powi(2) / ea + (y - eb).powi(2) / eb;
    }
    let dof = bins.len().saturating_sub(1);
    let p_value = if dof == 0 {
        1.0
    } else {
        1.0 - ChiSquared::new(dof as f64).expect("positive dof").cdf(stat)
    };
    Ok(ChiSquare { statistic: stat, dof, p_value })
}

/// CDF of Gamma(shape, 1).
pub fn gamma_cdf(shape: f64, x: f64) -> Result<f64> {
    let g = Gamma::new(shape, 1.0).map_err(|e| crate::error::Error::InvalidInput(e.to_string()))?;
    Ok(g.cdf(x))
}

/// Uniform[a, b] CDF.
pub fn uniform_cdf(a: f64, b: f64, x: f64) -> f64 {
    ((x - a) / (b - a)).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clock::{Domain, StreamKey};
    use rand::Rng;

    #[test]
    fn ks_single_sample_at_median() {
        let d = ks_distance(&[0.0], |x| uniform_cdf(-1.0, 1.0, x)).unwrap();
        assert!((d - 0.5).abs() < 1e-15);
    }

    #[test]
    fn ks_constant_samples() {
        let d = ks_distance(&[0.2; 10], |x| uniform_cdf(0.0, 1.0, x)).unwrap();
        assert!(d >= 0.8 - 1e-15);
    }

    #[test]
    fn ks_sees_model_atoms() {
        // Half the model mass sits at 0; samples just below it miss the atom.
        let cdf = |x: f64| if x < 0.0 { 0.0 } else { 0.5 + 0.5 * x.min(1.0) };
        let d = ks_distance(&[-0.001, 0.5], cdf).unwrap();
        assert!((d - 0.5).abs() < 1e-9, "{d}");
        let exact = ks_distance(&[0.0, 0.0, 0.5, 0.5], cdf).unwrap();
        assert!((exact - 0.25).abs() < 1e-9, "{exact}");
    }

    #[test]
    fn ks_rejects_empty() {
        assert!(ks_distance(&[], |x| x).is_err());
        assert!(ks_two_sample(&[1.0], &[]).is_err());
    }

    #[test]
    fn two_sample_extremes() {
        assert_eq!(ks_two_sample(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(ks_two_sample(&[1.0, 2.0], &[3.0, 4.0]).unwrap(), 1.0);
        assert!((ks_two_sample(&[1.0, 3.0], &[2.0, 4.0]).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn sandwich_detects_order() {
        let lo = [1.0, 2.0, 3.0];
        let mid = [1.5, 2.5, 3.5];
        let up = [2.0, 3.0, 4.0];
        assert_eq!(sandwich_gap(&lo, &mid, &up).unwrap(), 0.0);
        assert!(sandwich_gap(&up, &mid, &lo).unwrap() > 0.3);
    }

    #[test]
    fn pairwise_matches_naive() {
        let xs: Vec<f64> = (1..=1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&xs), 500500.0);
        assert_eq!(mean(&xs).unwrap(), 500.5);
    }

    #[test]
    fn chi_square_same_and_different() {
        let same = chi_square_homogeneity(&[100, 200, 300], &[100, 200, 300], 5.0).unwrap();
        assert_eq!(same.statistic, 0.0);
        assert_eq!(same.dof, 2);
        assert!((same.p_value - 1.0).abs() < 1e-12);
        let diff = chi_square_homogeneity(&[300, 200, 100], &[100, 200, 300], 5.0).unwrap();
        assert!(diff.p_value < 1e-10);
        let pooled = chi_square_homogeneity(&[100, 1, 0], &[100, 0, 1], 5.0).unwrap();
        assert_eq!(pooled.dof, 1);
    }

    #[test]
    fn gamma_cdf_shape_one_is_exponential() {
        for x in [0.1, 1.0, 3.0] {
            assert!((gamma_cdf(1.0, x).unwrap() - (1.0 - (-x).exp())).abs() < 1e-12);
        }
    }

    #[test]
    fn dkw_calibration() {
        let mut rng = StreamKey::new(11, 0).rng(Domain::Sampler, 0);
        let xs: Vec<f64> = (0..100_000).map(|_| rng.random::<f64>()).collect();
        let d = ks_distance(&xs, |x| uniform_cdf(0.0, 1.0, x)).unwrap();
        assert!(d < 0.01, "{d}");
    }
}
