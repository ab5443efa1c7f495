//! Proper scoring rules: sample SE and CRPS, and closed-form Gaussian
//! theoretical scores.
//!
//! The sample CRPS of a sample `x = (x_1..x_n)` against an observation `y` is
//!
//! ```text
//! (1/n) Σ_j |x_j − y|  −  (1/(2n²)) Σ_j Σ_k |x_j − x_k|
//! ```
//!
//! [`sample_crps_naive`] evaluates exactly that double sum;
//! [`sample_crps_fast`] produces the same value in O(n log n) by sorting,
//! using `Σ_{j,k} |x_j − x_k| = 2 Σ_i (2i − 1 − n) x_(i)` over the ascending
//! order statistics `x_(1..n)`.

use crate::error::{Error, Result};
use crate::real::Real;

/// A Gaussian predictive distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianSpec<R> {
    pub mean: R,
    pub sd: R,
}

impl<R: Real> GaussianSpec<R> {
    /// Requires a finite mean and a finite, strictly positive `sd`.
    pub fn new(mean: R, sd: R) -> Result<Self> {
        if !mean.is_finite() || !sd.is_finite() {
            return Err(Error::NonFinite {
                context: "Gaussian parameters",
            });
        }
        if sd <= R::zero() {
            return Err(Error::InvalidParameter {
                reason: format!("sd must be positive, got {sd}"),
            });
        }
        Ok(Self { mean, sd })
    }
}

fn check_sample<R: Real>(sample: &[R]) -> Result<()> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    if sample.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { context: "sample" });
    }
    Ok(())
}

fn check_obs<R: Real>(obs: R) -> Result<()> {
    if !obs.is_finite() {
        return Err(Error::NonFinite {
            context: "observation",
        });
    }
    Ok(())
}

/// Sample squared error: `(mean(x) − y)²`.
pub fn sample_se<R: Real>(sample: &[R], obs: R) -> Result<R> {
    check_sample(sample)?;
    check_obs(obs)?;
    let n = R::of_usize(sample.len());
    let mean = sample.iter().fold(R::zero(), |a, &b| a + b) / n;
    let d = mean - obs;
    Ok(d * d)
}

/// Sample CRPS via the literal O(n²) double sum.
pub fn sample_crps_naive<R: Real>(sample: &[R], obs: R) -> Result<R> {
    check_sample(sample)?;
    check_obs(obs)?;
    let n = R::of_usize(sample.len());
    let mut abs_term = R::zero();
    for &x in sample {
        abs_term += (x - obs).abs();
    }
    let mut pair_term = R::zero();
    for &xj in sample {
        for &xk in sample {
            pair_term += (xj - xk).abs();
        }
    }
    let two = R::of(2.0);
    Ok(abs_term / n - pair_term / (two * n * n))
}

/// Sample CRPS via sorting; same value as [`sample_crps_naive`] to within
/// 1e-10.
pub fn sample_crps_fast<R: Real>(sample: &[R], obs: R) -> Result<R> {
    check_sample(sample)?;
    check_obs(obs)?;
    let sorted = SortedSample::new(sample);
    Ok(sorted.crps(obs))
}

/// Theoretical squared error of a Gaussian forecast: `(μ − y)²`.
pub fn theoretical_se<R: Real>(forecast: &GaussianSpec<R>, obs: R) -> R {
    let d = forecast.mean - obs;
    d * d
}

/// Closed-form CRPS of a Gaussian forecast:
/// `σ · [ z(2Φ(z) − 1) + 2φ(z) − 1/√π ]` with `z = (y − μ)/σ`.
pub fn theoretical_crps_gaussian<R: Real>(forecast: &GaussianSpec<R>, obs: R) -> R {
    let z = (obs - forecast.mean) / forecast.sd;
    let two = R::of(2.0);
    let inv_sqrt_pi = R::of(std::f64::consts::FRAC_1_PI).sqrt();
    let core = z * (two * std_normal_cdf(z) - R::one()) + two * std_normal_pdf(z) - inv_sqrt_pi;
    forecast.sd * core
}

/// A sample sorted ascending, with the precomputed pieces that make repeated
/// CRPS evaluations against different observations O(log n) each. Used by the
/// evaluation layer when many time instances share one window.
pub(crate) struct SortedSample<R> {
    sorted: Vec<R>,
    prefix: Vec<R>,
    /// `Σ_i (2i − 1 − n) x_(i)` over 1-based ranks; equals half the pairwise
    /// absolute-difference sum.
    rank_weighted: R,
}

impl<R: Real> SortedSample<R> {
    pub fn new(sample: &[R]) -> Self {
        let mut sorted = sample.to_vec();
        sorted.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite sample"));
        let mut prefix = Vec::with_capacity(sorted.len() + 1);
        prefix.push(R::zero());
        let mut acc = R::zero();
        for &v in &sorted {
            acc += v;
            prefix.push(acc);
        }
        let n = sorted.len();
        let mut rank_weighted = R::zero();
        for (i, &v) in sorted.iter().enumerate() {
            let w = R::of((2 * (i + 1)) as f64 - 1.0 - n as f64);
            rank_weighted += w * v;
        }
        Self {
            sorted,
            prefix,
            rank_weighted,
        }
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn crps(&self, obs: R) -> R {
        let n = self.len();
        let nf = R::of_usize(n);
        // r = number of sample values <= obs
        let r = self.sorted.partition_point(|&v| v <= obs);
        let rf = R::of_usize(r);
        let below = rf * obs - self.prefix[r];
        let above = (self.prefix[n] - self.prefix[r]) - (nf - rf) * obs;
        let abs_term = below + above;
        abs_term / nf - self.rank_weighted / (nf * nf)
    }
}

/// Φ, the standard normal CDF.
pub(crate) fn std_normal_cdf<R: Real>(z: R) -> R {
    let half = R::of(0.5);
    let sqrt2 = R::of(std::f64::consts::SQRT_2);
    half * erfc(-z / sqrt2)
}

/// φ, the standard normal density.
pub(crate) fn std_normal_pdf<R: Real>(z: R) -> R {
    let tau = R::of(std::f64::consts::TAU);
    (-(z * z) / R::of(2.0)).exp() / tau.sqrt()
}

/// Complementary error function, accurate to near machine precision.
///
/// Maclaurin series for |x| < 1.5, Legendre continued fraction (DLMF 7.9.1)
/// beyond.
fn erfc<R: Real>(x: R) -> R {
    let threshold = R::of(1.5);
    if x < R::zero() {
        return R::of(2.0) - erfc(-x);
    }
    if x < threshold {
        R::one() - erf_series(x)
    } else {
        erfc_continued_fraction(x)
    }
}

fn erf_series<R: Real>(x: R) -> R {
    // erf(x) = (2/√π) Σ_k (−1)^k x^(2k+1) / (k! (2k+1))
    let two_over_sqrt_pi = R::of(2.0) / R::of(std::f64::consts::PI).sqrt();
    let x2 = x * x;
    let mut term = x; // x^(2k+1) / k! at k = 0
    let mut sum = x;
    let mut k = 1usize;
    loop {
        term = term * (-x2) / R::of_usize(k);
        let contrib = term / R::of_usize(2 * k + 1);
        sum += contrib;
        if contrib.abs() <= sum.abs() * R::epsilon() || k > 200 {
            break;
        }
        k += 1;
    }
    two_over_sqrt_pi * sum
}

fn erfc_continued_fraction<R: Real>(x: R) -> R {
    // √π e^(x²) erfc(x) = x/(x² + (1/2)/(1 + 1/(x² + (3/2)/(1 + 2/(x² + …)))))
    // evaluated with the modified Lentz algorithm.
    let x2 = x * x;
    if x2 > R::of(700.0) {
        return R::zero();
    }
    let tiny = R::of(1e-300).max(R::min_positive_value());
    let mut f = tiny;
    let mut c = f;
    let mut d = R::zero();
    let mut n = 0usize;
    loop {
        n += 1;
        let (a, b) = if n == 1 {
            (x, x2)
        } else {
            let coeff = R::of_usize(n - 1) / R::of(2.0);
            if n % 2 == 1 {
                (coeff, x2)
            } else {
                (coeff, R::one())
            }
        };
        d = b + a * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + a / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = d.recip();
        let delta = c * d;
        f *= delta;
        if (delta - R::one()).abs() < R::epsilon() || n > 300 {
            break;
        }
    }
    let sqrt_pi = R::of(std::f64::consts::PI).sqrt();
    (-x2).exp() * f / sqrt_pi
}
