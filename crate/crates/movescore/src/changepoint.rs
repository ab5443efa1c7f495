//! Multiple-changepoint detection in mean and variance by exact penalized
//! cost minimization.
//!
//! The cost of a segment is twice its negative Gaussian log-likelihood with
//! the mean and variance replaced by their maximum-likelihood estimates,
//! `L · (ln(2π σ̂²) + 1)`, and the target is the total segment cost plus a
//! penalty `κ` per changepoint. [`optimal_partitioning`] minimizes the
//! target with the plain O(N²) dynamic program and serves as the reference
//! oracle; [`pelt_detect`] adds candidate pruning and must return the same
//! objective value (certified by the test suite, since the pruning constant
//! for this cost is not given in closed form).

use crate::accum::PrefixMoments;
use crate::error::{Error, Result};
use crate::real::Real;

/// Detection parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeltConfig<R> {
    /// Penalty κ added per changepoint.
    pub penalty_kappa: R,
    /// Smallest admissible segment length; at least 2 so the segment
    /// variance is estimable.
    pub min_seg_len: usize,
    /// Lower clamp for the segment variance estimate, in squared data units.
    /// Keeps the cost finite on (near-)constant segments.
    pub variance_floor: R,
}

impl<R: Real> PeltConfig<R> {
    pub const DEFAULT_MIN_SEG_LEN: usize = 11;
    pub const DEFAULT_VARIANCE_FLOOR: f64 = 1e-8;
    /// Parameters counted per extra segment (mean, variance, changepoint).
    pub const DEFAULT_PENALTY_P: f64 = 3.0;

    /// The default configuration for a series of length `n`:
    /// `κ = 3 ln n`, minimum segment length 11, variance floor 1e-8.
    pub fn for_series_len(n: usize) -> Self {
        Self::with_penalty_p(n, Self::DEFAULT_PENALTY_P)
    }

    /// `κ = p ln n` with everything else at its default.
    pub fn with_penalty_p(n: usize, p: f64) -> Self {
        Self {
            penalty_kappa: R::of(p) * R::of_usize(n.max(1)).ln(),
            min_seg_len: Self::DEFAULT_MIN_SEG_LEN,
            variance_floor: R::of(Self::DEFAULT_VARIANCE_FLOOR),
        }
    }

    pub fn min_seg_len(mut self, len: usize) -> Self {
        self.min_seg_len = len;
        self
    }

    pub fn variance_floor(mut self, floor: R) -> Self {
        self.variance_floor = floor;
        self
    }

    pub fn penalty_kappa(mut self, kappa: R) -> Self {
        self.penalty_kappa = kappa;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.min_seg_len < 2 {
            return Err(Error::InvalidParameter {
                reason: format!("min_seg_len must be at least 2, got {}", self.min_seg_len),
            });
        }
        if self.variance_floor <= R::zero() || !self.variance_floor.is_finite() {
            return Err(Error::InvalidParameter {
                reason: "variance_floor must be positive and finite".to_string(),
            });
        }
        if self.penalty_kappa < R::zero() || !self.penalty_kappa.is_finite() {
            return Err(Error::InvalidParameter {
                reason: "penalty_kappa must be nonnegative and finite".to_string(),
            });
        }
        Ok(())
    }
}

/// An ordered set of changepoints of a series of length `n`, plus the
/// segments they imply.
///
/// A changepoint `τ` splits the series between positions `τ` and `τ + 1` in
/// 1-based counting; equivalently, segment `j` covers the half-open 0-based
/// range `boundaries()[j]..boundaries()[j+1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segmentation {
    n: usize,
    changepoints: Vec<usize>,
}

impl Segmentation {
    /// Validates that the changepoints are strictly increasing and lie in
    /// `1..n`.
    pub fn new(n: usize, changepoints: Vec<usize>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSegmentation {
                reason: "series length must be positive".to_string(),
            });
        }
        let mut prev = 0usize;
        for &tau in &changepoints {
            if tau <= prev || tau >= n {
                return Err(Error::InvalidSegmentation {
                    reason: format!("changepoint {tau} out of order or out of range 1..{n}"),
                });
            }
            prev = tau;
        }
        Ok(Self { n, changepoints })
    }

    pub fn series_len(&self) -> usize {
        self.n
    }

    pub fn changepoints(&self) -> &[usize] {
        &self.changepoints
    }

    pub fn num_changepoints(&self) -> usize {
        self.changepoints.len()
    }

    pub fn num_segments(&self) -> usize {
        self.changepoints.len() + 1
    }

    /// `(0, τ_1, …, τ_m, n)` — split points delimiting the segments.
    pub fn boundaries(&self) -> Vec<usize> {
        let mut b = Vec::with_capacity(self.changepoints.len() + 2);
        b.push(0);
        b.extend_from_slice(&self.changepoints);
        b.push(self.n);
        b
    }

    /// The segments as half-open 0-based ranges.
    pub fn segments(&self) -> Vec<(usize, usize)> {
        let b = self.boundaries();
        b.windows(2).map(|w| (w[0], w[1])).collect()
    }

    pub fn segment_lengths(&self) -> Vec<usize> {
        self.segments().iter().map(|(a, b)| b - a).collect()
    }

    /// Index of the segment containing the 0-based position `t`.
    pub fn segment_index_of(&self, t: usize) -> usize {
        debug_assert!(t < self.n);
        self.changepoints.partition_point(|&tau| tau <= t)
    }
}

/// Maximum-likelihood statistics of one segment, with the variance clamped
/// at the configured floor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentStats<R> {
    pub mean: R,
    pub variance: R,
    pub len: usize,
}

/// Precomputed prefix moments exposing the segment cost in O(1) per query.
pub struct SegmentCostTable<R> {
    prefix: PrefixMoments<R>,
    n: usize,
    variance_floor: R,
}

impl<R: Real> SegmentCostTable<R> {
    pub fn new(y: &[R], cfg: &PeltConfig<R>) -> Self {
        Self {
            prefix: PrefixMoments::new(y),
            n: y.len(),
            variance_floor: cfg.variance_floor,
        }
    }

    /// Cost of the half-open segment `y[start..end]`; requires `end - start >= 2`.
    pub fn cost(&self, start: usize, end: usize) -> R {
        debug_assert!(start < end && end <= self.n && end - start >= 2);
        let len = R::of_usize(end - start);
        let var = self.prefix.range_variance(start, end, self.variance_floor);
        let two_pi = R::of(std::f64::consts::TAU);
        len * ((two_pi * var).ln() + R::one())
    }

    fn mean(&self, start: usize, end: usize) -> R {
        self.prefix.range_mean(start, end)
    }

    fn variance(&self, start: usize, end: usize) -> R {
        self.prefix.range_variance(start, end, self.variance_floor)
    }
}

/// Cost `L · (ln(2π σ̂²) + 1)` of the half-open segment `y[start..end]`.
pub fn segment_cost<R: Real>(y: &[R], start: usize, end: usize, cfg: &PeltConfig<R>) -> Result<R> {
    cfg.validate()?;
    if start >= end || end > y.len() {
        return Err(Error::InvalidParameter {
            reason: format!(
                "segment [{start}, {end}) out of range for length {}",
                y.len()
            ),
        });
    }
    if end - start < 2 {
        return Err(Error::SegmentTooShort { start, end, min: 2 });
    }
    check_series(y)?;
    Ok(SegmentCostTable::new(y, cfg).cost(start, end))
}

fn check_series<R: Real>(y: &[R]) -> Result<()> {
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { context: "series" });
    }
    Ok(())
}

/// Total objective of a segmentation: `Σ_j cost(segment_j) + κ m`.
pub fn objective_value<R: Real>(y: &[R], seg: &Segmentation, cfg: &PeltConfig<R>) -> Result<R> {
    cfg.validate()?;
    check_series(y)?;
    if seg.series_len() != y.len() {
        return Err(Error::LengthMismatch {
            context: "segmentation vs series",
            left: seg.series_len(),
            right: y.len(),
        });
    }
    let table = SegmentCostTable::new(y, cfg);
    let min_len = cfg.min_seg_len.max(2);
    let mut total = R::zero();
    for (a, b) in seg.segments() {
        if b - a < min_len {
            return Err(Error::SegmentTooShort {
                start: a,
                end: b,
                min: min_len,
            });
        }
        total += table.cost(a, b);
    }
    total += cfg.penalty_kappa * R::of_usize(seg.num_changepoints());
    Ok(total)
}

/// Per-segment means, floored variances and lengths.
pub fn segment_stats<R: Real>(
    y: &[R],
    seg: &Segmentation,
    cfg: &PeltConfig<R>,
) -> Result<Vec<SegmentStats<R>>> {
    cfg.validate()?;
    check_series(y)?;
    if seg.series_len() != y.len() {
        return Err(Error::LengthMismatch {
            context: "segmentation vs series",
            left: seg.series_len(),
            right: y.len(),
        });
    }
    let table = SegmentCostTable::new(y, cfg);
    Ok(seg
        .segments()
        .into_iter()
        .map(|(a, b)| SegmentStats {
            mean: table.mean(a, b),
            variance: table.variance(a, b),
            len: b - a,
        })
        .collect())
}

/// Exact minimizer via the unpruned O(N²) dynamic program.
pub fn optimal_partitioning<R: Real>(y: &[R], cfg: &PeltConfig<R>) -> Result<Segmentation> {
    detect(y, cfg, false)
}

/// Exact minimizer with candidate pruning; same segmentation and objective
/// as [`optimal_partitioning`].
pub fn pelt_detect<R: Real>(y: &[R], cfg: &PeltConfig<R>) -> Result<Segmentation> {
    detect(y, cfg, true)
}

fn detect<R: Real>(y: &[R], cfg: &PeltConfig<R>, prune: bool) -> Result<Segmentation> {
    cfg.validate()?;
    check_series(y)?;
    let n = y.len();
    let d = cfg.min_seg_len;
    if n < d {
        return Err(Error::SeriesTooShort {
            len: n,
            min_seg_len: d,
        });
    }
    let table = SegmentCostTable::new(y, cfg);
    let kappa = cfg.penalty_kappa;

    // best[s]: minimal objective of y[0..s]; prev[s]: its last changepoint.
    let mut best = vec![R::infinity(); n + 1];
    best[0] = -kappa;
    let mut prev = vec![0usize; n + 1];

    // Candidates are kept in increasing order; every entry is admissible as
    // a last changepoint for the current s (tau <= s - d), so scanning in
    // order with a strict `<` picks the smallest tau on ties.
    //
    // A candidate failing the prune test at time s is dominated by a cut at
    // s, but that cut is only admissible for end times >= s + d; the failed
    // candidate is therefore retired at s + d, not immediately. Retiring it
    // early loses optima whose last segment is shorter than d past s.
    let mut candidates: Vec<usize> = vec![0];
    let mut retire_at: Vec<usize> = vec![usize::MAX];

    for s in d..=n {
        if s >= 2 * d {
            candidates.push(s - d);
            retire_at.push(usize::MAX);
        }
        if prune {
            let mut w = 0;
            for i in 0..candidates.len() {
                if retire_at[i] > s {
                    candidates[w] = candidates[i];
                    retire_at[w] = retire_at[i];
                    w += 1;
                }
            }
            candidates.truncate(w);
            retire_at.truncate(w);
        }

        let mut best_total = R::infinity();
        let mut best_tau = usize::MAX;
        for &tau in &candidates {
            let total = best[tau] + table.cost(tau, s) + kappa;
            if total < best_total {
                best_total = total;
                best_tau = tau;
            }
        }
        debug_assert!(best_tau != usize::MAX);
        best[s] = best_total;
        prev[s] = best_tau;

        if prune {
            // The argmin passes the `<=` test, keeping the set nonempty.
            for (i, &tau) in candidates.iter().enumerate() {
                if retire_at[i] == usize::MAX && best[tau] + table.cost(tau, s) > best_total {
                    retire_at[i] = s + d;
                }
            }
        }
    }

    let mut cps = Vec::new();
    let mut s = n;
    loop {
        let tau = prev[s];
        if tau == 0 {
            break;
        }
        cps.push(tau);
        s = tau;
    }
    cps.reverse();
    Segmentation::new(n, cps)
}
