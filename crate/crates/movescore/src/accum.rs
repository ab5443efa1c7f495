//! Compensated prefix-moment tables.

use crate::real::Real;

/// Prefix sums of `y` and `y²`, built with running compensation, giving O(1)
/// segment means and variances. Guards the cancellation in
/// `Σy² − (Σy)²/L` on long, high-mean segments.
pub(crate) struct PrefixMoments<R> {
    sum: Vec<R>,
    sum_sq: Vec<R>,
}

impl<R: Real> PrefixMoments<R> {
    pub fn new(y: &[R]) -> Self {
        let mut sum = Vec::with_capacity(y.len() + 1);
        let mut sum_sq = Vec::with_capacity(y.len() + 1);
        sum.push(R::zero());
        sum_sq.push(R::zero());
        let mut s = R::zero();
        let mut s_comp = R::zero();
        let mut q = R::zero();
        let mut q_comp = R::zero();
        for &v in y {
            let t = s + v;
            if s.abs() >= v.abs() {
                s_comp += (s - t) + v;
            } else {
                s_comp += (v - t) + s;
            }
            s = t;
            sum.push(s + s_comp);

            let v2 = v * v;
            let t2 = q + v2;
            if q.abs() >= v2 {
                q_comp += (q - t2) + v2;
            } else {
                q_comp += (v2 - t2) + q;
            }
            q = t2;
            sum_sq.push(q + q_comp);
        }
        Self { sum, sum_sq }
    }

    pub fn range_sum(&self, start: usize, end: usize) -> R {
        self.sum[end] - self.sum[start]
    }

    pub fn range_mean(&self, start: usize, end: usize) -> R {
        self.range_sum(start, end) / R::of_usize(end - start)
    }

    /// Maximum-likelihood (biased) variance of `y[start..end]`, clamped
    /// below at `floor`.
    pub fn range_variance(&self, start: usize, end: usize, floor: R) -> R {
        let len = R::of_usize(end - start);
        let mean = self.range_sum(start, end) / len;
        let ex2 = (self.sum_sq[end] - self.sum_sq[start]) / len;
        (ex2 - mean * mean).max(floor)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prefix_variance_matches_two_pass() {
        let y: Vec<f64> = (0..50)
            .map(|i| 1000.0 + ((i * 37) % 11) as f64 * 0.25)
            .collect();
        let pm = PrefixMoments::new(&y);
        for &(a, b) in &[(0usize, 50usize), (3, 17), (10, 12), (0, 2)] {
            let seg = &y[a..b];
            let mean = seg.iter().sum::<f64>() / seg.len() as f64;
            let var = seg.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / seg.len() as f64;
            assert!((pm.range_mean(a, b) - mean).abs() < 1e-9);
            assert!((pm.range_variance(a, b, 1e-12) - var.max(1e-12)).abs() < 1e-9);
        }
    }
}
