//! Distances to the standard normal law, moments and log-log rate fits.

use alloc::vec::Vec;
use core::f64::consts::{FRAC_1_SQRT_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric;

/// Standard normal distribution function, `0.5 erfc(-z / sqrt 2)`.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z * FRAC_1_SQRT_2)
}

/// Standard normal density.
pub fn normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}

/// Standard normal quantile: rational initial guess refined by two Halley
/// steps on [`normal_cdf`].
pub fn normal_quantile(p: f64) -> f64 {
    if !(p > 0.0 && p < 1.0) {
        return if p == 0.0 {
            f64::NEG_INFINITY
        } else if p == 1.0 {
            f64::INFINITY
        } else {
            f64::NAN
        };
    }
    const A: [f64; 6] = [
        -3.969683028665376e1,
        2.209460984245205e2,
        -2.759285104469687e2,
        1.383577518672690e2,
        -3.066479806614716e1,
        2.506628277459239,
    ];
    const B: [f64; 5] =
        [-5.447609879822406e1, 1.615858368580409e2, -1.556989798598866e2, 6.680131188771972e1, -1.328068155288572e1];
    const C: [f64; 6] = [
        -7.784894002430293e-3,
        -3.223964580411365e-1,
        -2.400758277161838,
        -2.549732539343734,
        4.374664141464968,
        2.938163982698783,
    ];
    const D: [f64; 4] = [7.784695709041462e-3, 3.224671290700398e-1, 2.445134137142996, 3.754408661907416];
    let lo = 0.02425;
    let mut x = if p < lo {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - lo {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    for _ in 0..2 {
        // Work with the smaller tail to keep relative accuracy.
        let e = if x < 0.0 { normal_cdf(x) - p } else { (1.0 - p) - normal_cdf(-x) };
        let u = e / normal_pdf(x);
        x -= u / (1.0 + 0.5 * x * u);
    }
    x
}

/// Mean and standard deviation of a sample (unbiased variance).
pub fn standardize(samples: &[f64]) -> Result<Vec<f64>> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    let m = numeric::mean(samples);
    let v = numeric::variance(samples);
    if !(v > 0.0) {
        return Err(Error::ZeroVariance);
    }
    let sd = v.sqrt();
    Ok(samples.iter().map(|x| (x - m) / sd).collect())
}

fn sorted(samples: &[f64]) -> Vec<f64> {
    let mut z = samples.to_vec();
    z.sort_by(|a, b| a.total_cmp(b));
    z
}

/// Kolmogorov distance of the raw sample's empirical law to `Φ`.
pub fn kolmogorov_distance_raw(samples: &[f64]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    let z = sorted(samples);
    let n = z.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in z.iter().enumerate() {
        let f = normal_cdf(x);
        d = d.max(((i + 1) as f64 / n - f).abs()).max((f - i as f64 / n).abs());
    }
    Ok(d)
}

/// Kolmogorov distance to `Φ` after standardizing by the sample mean and SD.
pub fn kolmogorov_distance(samples: &[f64]) -> Result<f64> {
    kolmogorov_distance_raw(&standardize(samples)?)
}

/// Quantile-coupling Wasserstein-1 distance of the raw sample to `N(0, 1)`.
pub fn wasserstein_distance_raw(samples: &[f64]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    let z = sorted(samples);
    let n = z.len() as f64;
    Ok(numeric::sum(z.iter().enumerate().map(|(i, x)| (x - normal_quantile((i as f64 + 0.5) / n)).abs())) / n)
}

/// Wasserstein-1 distance after standardization.
pub fn wasserstein_distance(samples: &[f64]) -> Result<f64> {
    wasserstein_distance_raw(&standardize(samples)?)
}

/// Dvoretzky-Kiefer-Wolfowitz half-width `sqrt(ln(2/delta) / (2 R))`.
pub fn dkw_floor(replications: usize, delta: f64) -> f64 {
    ((2.0 / delta).ln() / (2.0 * replications as f64)).sqrt()
}

/// Sample moments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mean: f64,
    /// Unbiased variance.
    pub variance: f64,
    /// Fourth central moment.
    pub fourth_central: f64,
    /// Standard error of the mean.
    pub mean_se: f64,
    /// Standard error of the variance estimate.
    pub variance_se: f64,
}

/// Mean, variance and fourth central moment of a sample.
pub fn moments(samples: &[f64]) -> Result<Moments> {
    if samples.len() < 2 {
        return Err(Error::EmptySample);
    }
    let n = samples.len() as f64;
    let mean = numeric::mean(samples);
    let variance = numeric::variance(samples);
    let fourth_central = numeric::sum(samples.iter().map(|x| (x - mean).powi(4))) / n;
    let m2 = variance * (n - 1.0) / n;
    Ok(Moments {
        mean,
        variance,
        fourth_central,
        mean_se: (variance / n).sqrt(),
        variance_se: ((fourth_central - m2 * m2).max(0.0) / n).sqrt(),
    })
}

/// Ordinary least-squares line through `(log size, log value)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope.
    pub stderr: f64,
    pub r2: f64,
    /// Number of points used.
    pub points: usize,
}

/// Least-squares fit of `ln y = a + b ln x`; needs at least two positive points.
pub fn rate_fit(x: &[f64], y: &[f64]) -> Result<RateFit> {
    let pts: Vec<(f64, f64)> =
        x.iter().zip(y).filter(|(a, b)| **a > 0.0 && **b > 0.0).map(|(a, b)| (a.ln(), b.ln())).collect();
    line_fit(&pts)
}

/// Least-squares fit of `y = a + b x`.
pub fn line_fit(pts: &[(f64, f64)]) -> Result<RateFit> {
    let n = pts.len();
    if n < 2 {
        return Err(Error::Unfittable(alloc::format!("{n} usable points")));
    }
    let mx = numeric::sum(pts.iter().map(|p| p.0)) / n as f64;
    let my = numeric::sum(pts.iter().map(|p| p.1)) / n as f64;
    let sxx = numeric::sum(pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)));
    let sxy = numeric::sum(pts.iter().map(|p| (p.0 - mx) * (p.1 - my)));
    let syy = numeric::sum(pts.iter().map(|p| (p.1 - my) * (p.1 - my)));
    if !(sxx > 0.0) {
        return Err(Error::Unfittable(alloc::string::String::from("all abscissae equal")));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss = numeric::sum(pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)));
    let stderr = if n > 2 { (rss / (n - 2) as f64 / sxx).sqrt() } else { 0.0 };
    let r2 = if syy > 0.0 { 1.0 - rss / syy } else { 1.0 };
    Ok(RateFit { slope, intercept, stderr, r2, points: n })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RandomStream;
    use alloc::vec;

    #[test]
    fn cdf_reference_values() {
        assert_eq!(normal_cdf(0.0), 0.5);
        assert!((normal_cdf(1.959963984540054) - 0.975).abs() < 1e-15);
        assert!((normal_cdf(-8.0) - 6.220960574271785e-16).abs() < 1e-28);
    }

    #[test]
    fn quantile_inverts_cdf() {
        for &p in &[1e-12, 1e-6, 0.01, 0.3, 0.5, 0.77, 0.999, 1.0 - 1e-9] {
            let x = normal_quantile(p);
            assert!((normal_cdf(x) - p).abs() <= 1e-14 * p.max(1e-3), "{p}");
        }
    }

    #[test]
    fn kolmogorov_examples() {
        assert_eq!(kolmogorov_distance_raw(&[0.0]).unwrap(), 0.5);
        assert!(matches!(kolmogorov_distance(&[1.0, 1.0, 1.0]), Err(Error::ZeroVariance)));
        assert!(matches!(kolmogorov_distance(&[]), Err(Error::EmptySample)));
    }

    #[test]
    fn normal_sample_is_close() {
        let mut s = RandomStream::new(42).sampler();
        let xs: Vec<f64> = (0..20_000).map(|_| s.normal()).collect();
        assert!(kolmogorov_distance(&xs).unwrap() < 0.015);
        assert!(wasserstein_distance(&xs).unwrap() < 0.03);
    }

    #[test]
    fn rate_fit_exact_power_law() {
        let x = vec![1.0, 2.0, 4.0, 8.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(-0.5)).collect();
        let f = rate_fit(&x, &y).unwrap();
        assert!((f.slope + 0.5).abs() < 1e-14 && f.r2 > 1.0 - 1e-12 && f.stderr < 1e-12);
        assert!(rate_fit(&[1.0], &[1.0]).is_err());
    }

    #[test]
    fn dkw_value() {
        assert!((dkw_floor(20_000, 0.05) - (40f64.ln() / 40_000.0).sqrt()).abs() < 1e-15);
    }
}
