//! Score series for (observation, model) pairs and their aggregation.
//!
//! Moving scores evaluate the model sub-sample on the window of each time
//! instance against that instance's observation. Point-wise (PW) scores
//! compare single realizations, stationarity (ST) scores use the full model
//! series as one sample, and theoretical scores evaluate known Gaussian
//! forecast distributions against the realized observations.
//!
//! Window plans are inputs here, never recomputed per model: plans come from
//! the observation series alone and are shared by every model under
//! comparison.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::real::Real;
use crate::scoring::{self, GaussianSpec, SortedSample};
use crate::windows::{WindowKind, WindowPlan};

/// How a score series was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    Theo,
    Of,
    Ov,
    Dv,
    Pw,
    St,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Theo => "Th",
            Method::Of => "OF",
            Method::Ov => "OV",
            Method::Dv => "DV",
            Method::Pw => "PW",
            Method::St => "ST",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl From<WindowKind> for Method {
    fn from(kind: WindowKind) -> Self {
        match kind {
            WindowKind::Of => Method::Of,
            WindowKind::Ov => Method::Ov,
            WindowKind::Dv => Method::Dv,
        }
    }
}

/// Scoring rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rule {
    Se,
    Crps,
}

impl Rule {
    pub const BOTH: [Rule; 2] = [Rule::Se, Rule::Crps];

    pub fn as_str(&self) -> &'static str {
        match self {
            Rule::Se => "SE",
            Rule::Crps => "CRPS",
        }
    }
}

impl std::fmt::Display for Rule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Rule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "se" => Ok(Rule::Se),
            "crps" => Ok(Rule::Crps),
            other => Err(Error::InvalidParameter {
                reason: format!("unknown rule {other:?} (expected se or crps)"),
            }),
        }
    }
}

/// One score per time instance for a single (model, method, rule) triple.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreSeries<R> {
    pub method: Method,
    pub rule: Rule,
    pub values: Vec<R>,
}

impl<R: Real> ScoreSeries<R> {
    /// Arithmetic mean over the time instances.
    pub fn average(&self) -> R {
        mean(&self.values)
    }
}

pub(crate) fn mean<R: Real>(values: &[R]) -> R {
    debug_assert!(!values.is_empty());
    values.iter().fold(R::zero(), |a, &b| a + b) / R::of_usize(values.len())
}

fn check_pair<R: Real>(obs: &[R], model: &[R]) -> Result<()> {
    if obs.len() != model.len() {
        return Err(Error::LengthMismatch {
            context: "observation vs model series",
            left: obs.len(),
            right: model.len(),
        });
    }
    if obs.is_empty() {
        return Err(Error::EmptySample);
    }
    if obs.iter().chain(model.iter()).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            context: "series pair",
        });
    }
    Ok(())
}

/// Scores the model sub-sample on each window against the observation at the
/// window location.
pub fn moving_scores<R: Real>(
    obs: &[R],
    model: &[R],
    plan: &WindowPlan,
    rule: Rule,
) -> Result<ScoreSeries<R>> {
    check_pair(obs, model)?;
    if plan.len() != obs.len() {
        return Err(Error::LengthMismatch {
            context: "window plan vs series",
            left: plan.len(),
            right: obs.len(),
        });
    }
    let n = obs.len();
    let mut values = Vec::with_capacity(n);
    match rule {
        Rule::Se => {
            let prefix = crate::accum::PrefixMoments::new(model);
            for (t, &y) in obs.iter().enumerate() {
                let (lo, hi) = plan.window(t);
                let m = prefix.range_mean(lo, hi + 1);
                let d = m - y;
                values.push(d * d);
            }
        }
        Rule::Crps => {
            // Consecutive instances often share a window (always for DV);
            // reuse the sorted sample in that case.
            let mut cached: Option<((usize, usize), SortedSample<R>)> = None;
            for (t, &y) in obs.iter().enumerate() {
                let window = plan.window(t);
                let rebuild = match &cached {
                    Some((w, _)) => *w != window,
                    None => true,
                };
                if rebuild {
                    cached = Some((window, SortedSample::new(&model[window.0..=window.1])));
                }
                let (_, sorted) = cached.as_ref().unwrap();
                values.push(sorted.crps(y));
            }
        }
    }
    Ok(ScoreSeries {
        method: plan.kind().into(),
        rule,
        values,
    })
}

/// Point-wise scores: `(x_t − y_t)²` for SE, `|x_t − y_t|` for CRPS.
pub fn pw_scores<R: Real>(obs: &[R], model: &[R], rule: Rule) -> Result<ScoreSeries<R>> {
    check_pair(obs, model)?;
    let values = obs
        .iter()
        .zip(model.iter())
        .map(|(&y, &x)| match rule {
            Rule::Se => {
                let d = x - y;
                d * d
            }
            Rule::Crps => (x - y).abs(),
        })
        .collect();
    Ok(ScoreSeries {
        method: Method::Pw,
        rule,
        values,
    })
}

/// Stationarity scores: the full model series is the sample for every
/// instance.
pub fn st_scores<R: Real>(obs: &[R], model: &[R], rule: Rule) -> Result<ScoreSeries<R>> {
    check_pair(obs, model)?;
    let values = match rule {
        Rule::Se => {
            let m = mean(model);
            obs.iter()
                .map(|&y| {
                    let d = m - y;
                    d * d
                })
                .collect()
        }
        Rule::Crps => {
            let sorted = SortedSample::new(model);
            obs.iter().map(|&y| sorted.crps(y)).collect()
        }
    };
    Ok(ScoreSeries {
        method: Method::St,
        rule,
        values,
    })
}

/// Theoretical scores of known per-instance Gaussian forecasts against the
/// realized observations.
pub fn theoretical_scores<R: Real>(
    forecasts: &[GaussianSpec<R>],
    obs: &[R],
    rule: Rule,
) -> Result<ScoreSeries<R>> {
    if forecasts.len() != obs.len() {
        return Err(Error::LengthMismatch {
            context: "forecasts vs observations",
            left: forecasts.len(),
            right: obs.len(),
        });
    }
    if obs.is_empty() {
        return Err(Error::EmptySample);
    }
    if obs.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            context: "observations",
        });
    }
    let values = forecasts
        .iter()
        .zip(obs.iter())
        .map(|(f, &y)| match rule {
            Rule::Se => scoring::theoretical_se(f, y),
            Rule::Crps => scoring::theoretical_crps_gaussian(f, y),
        })
        .collect();
    Ok(ScoreSeries {
        method: Method::Theo,
        rule,
        values,
    })
}

/// Arithmetic mean of a score series.
pub fn average_score<R: Real>(series: &ScoreSeries<R>) -> Result<R> {
    if series.values.is_empty() {
        return Err(Error::EmptySample);
    }
    Ok(series.average())
}

/// Ascending minimum ranks with tolerance-based ties: values within
/// `tie_tol` of the first value of their tied group share that group's rank,
/// and the next distinct value skips the tied positions.
pub fn rank_min_ties<R: Real>(averages: &[R], tie_tol: R) -> Vec<usize> {
    let mut order: Vec<usize> = (0..averages.len()).collect();
    order.sort_by(|&a, &b| {
        averages[a]
            .partial_cmp(&averages[b])
            .expect("finite averages")
            .then(a.cmp(&b))
    });
    let mut ranks = vec![0usize; averages.len()];
    let mut pos = 0usize;
    while pos < order.len() {
        let group_value = averages[order[pos]];
        let mut end = pos + 1;
        while end < order.len() && averages[order[end]] - group_value <= tie_tol {
            end += 1;
        }
        for &idx in &order[pos..end] {
            ranks[idx] = pos + 1;
        }
        pos = end;
    }
    ranks
}

/// Means of `values` grouped by the parallel `keys` (insertion-independent:
/// the map is ordered by key).
pub fn grouped_means<R: Real, K: Ord + Clone>(values: &[R], keys: &[K]) -> Result<BTreeMap<K, R>> {
    if values.len() != keys.len() {
        return Err(Error::LengthMismatch {
            context: "values vs group keys",
            left: values.len(),
            right: keys.len(),
        });
    }
    let mut sums: BTreeMap<K, (R, usize)> = BTreeMap::new();
    for (v, k) in values.iter().zip(keys.iter()) {
        let entry = sums.entry(k.clone()).or_insert((R::zero(), 0));
        entry.0 += *v;
        entry.1 += 1;
    }
    Ok(sums
        .into_iter()
        .map(|(k, (s, c))| (k, s / R::of_usize(c)))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::changepoint::Segmentation;
    use crate::windows::{dv_windows, WindowKind, WindowPlan};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn series(n: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let obs: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let model: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
        (obs, model)
    }

    fn degenerate_plan(n: usize) -> WindowPlan {
        let idx: Vec<usize> = (0..n).collect();
        WindowPlan::new(WindowKind::Of, idx.clone(), idx).unwrap()
    }

    fn full_plan(n: usize) -> WindowPlan {
        WindowPlan::new(WindowKind::Of, vec![0; n], vec![n - 1; n]).unwrap()
    }

    #[test]
    fn pw_examples() {
        let s = pw_scores(&[1.0, 2.0], &[1.0, 4.0], Rule::Se).unwrap();
        assert_eq!(s.values, vec![0.0, 4.0]);
        let s = pw_scores(&[1.0, 2.0], &[1.0, 4.0], Rule::Crps).unwrap();
        assert_eq!(s.values, vec![0.0, 2.0]);
    }

    #[test]
    fn pw_crps_equals_moving_with_degenerate_plan() {
        let (obs, model) = series(40, 1);
        let pw = pw_scores(&obs, &model, Rule::Crps).unwrap();
        let moving = moving_scores(&obs, &model, &degenerate_plan(40), Rule::Crps).unwrap();
        for (a, b) in pw.values.iter().zip(moving.values.iter()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn pw_crps_equals_singleton_sample_crps() {
        let (obs, model) = series(20, 2);
        let pw = pw_scores(&obs, &model, Rule::Crps).unwrap();
        for t in 0..20 {
            let single = crate::scoring::sample_crps_fast(&model[t..=t], obs[t]).unwrap();
            assert!((pw.values[t] - single).abs() < 1e-14);
        }
    }

    #[test]
    fn st_equals_moving_with_all_covering_plan() {
        let (obs, model) = series(60, 3);
        for rule in Rule::BOTH {
            let st = st_scores(&obs, &model, rule).unwrap();
            let moving = moving_scores(&obs, &model, &full_plan(60), rule).unwrap();
            for (a, b) in st.values.iter().zip(moving.values.iter()) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn st_se_of_constant_model() {
        let obs = vec![1.0, 2.0, 3.0];
        let model = vec![2.0; 3];
        let st = st_scores(&obs, &model, Rule::Se).unwrap();
        assert_eq!(st.values, vec![1.0, 0.0, 1.0]);
    }

    #[test]
    fn identical_constant_pair_scores_zero_crps() {
        let obs = vec![5.0; 30];
        let model = vec![5.0; 30];
        let seg = Segmentation::new(30, vec![15]).unwrap();
        let plan = dv_windows(&seg);
        let s = moving_scores(&obs, &model, &plan, Rule::Crps).unwrap();
        assert!(s.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn dv_se_is_segment_mean_error() {
        let (obs, model) = series(24, 4);
        let seg = Segmentation::new(24, vec![10]).unwrap();
        let plan = dv_windows(&seg);
        let s = moving_scores(&obs, &model, &plan, Rule::Se).unwrap();
        let m0 = model[..10].iter().sum::<f64>() / 10.0;
        let m1 = model[10..].iter().sum::<f64>() / 14.0;
        for (t, &y) in obs.iter().enumerate() {
            let m = if t < 10 { m0 } else { m1 };
            let expect = (m - y) * (m - y);
            assert!((s.values[t] - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn se_moving_scores_depend_only_on_window_means() {
        let (obs, mut model) = series(50, 5);
        let seg = Segmentation::new(50, vec![13, 31]).unwrap();
        let plan = dv_windows(&seg);
        let before = moving_scores(&obs, &model, &plan, Rule::Se).unwrap();
        // shuffle within each disjoint window
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for (a, b) in seg.segments() {
            for i in (a + 1..b).rev() {
                let j = rng.gen_range(a..=i);
                model.swap(i, j);
            }
        }
        let after = moving_scores(&obs, &model, &plan, Rule::Se).unwrap();
        for (x, y) in before.values.iter().zip(after.values.iter()) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn scores_are_nonnegative() {
        let (obs, model) = series(120, 7);
        let seg = Segmentation::new(120, vec![40, 77]).unwrap();
        for rule in Rule::BOTH {
            for plan in [
                crate::windows::of_windows(&seg),
                crate::windows::ov_windows(&seg),
                dv_windows(&seg),
            ] {
                let s = moving_scores(&obs, &model, &plan, rule).unwrap();
                assert!(s.values.iter().all(|&v| v >= -1e-12));
            }
            assert!(pw_scores(&obs, &model, rule)
                .unwrap()
                .values
                .iter()
                .all(|&v| v >= 0.0));
            assert!(st_scores(&obs, &model, rule)
                .unwrap()
                .values
                .iter()
                .all(|&v| v >= -1e-12));
        }
    }

    #[test]
    fn length_mismatch_is_rejected() {
        let obs = vec![1.0; 10];
        let model = vec![1.0; 9];
        assert!(matches!(
            pw_scores(&obs, &model, Rule::Se),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(moving_scores(&obs, &obs, &degenerate_plan(9), Rule::Se).is_err());
    }

    #[test]
    fn averages() {
        let s = ScoreSeries {
            method: Method::Pw,
            rule: Rule::Se,
            values: vec![1.0, 2.0, 3.0],
        };
        assert_eq!(average_score(&s).unwrap(), 2.0);
        let z = ScoreSeries::<f64> {
            method: Method::Pw,
            rule: Rule::Se,
            values: vec![0.0; 5],
        };
        assert_eq!(average_score(&z).unwrap(), 0.0);
    }

    #[test]
    fn ranking_with_min_ties() {
        let ranks = rank_min_ties(&[0.746, 0.746, 0.558, 0.558, 0.568], 0.0005);
        assert_eq!(ranks, vec![4, 4, 1, 1, 3]);
        assert_eq!(rank_min_ties(&[1.0, 1.0, 1.0], 0.0005), vec![1, 1, 1]);
        let ranks = rank_min_ties(&[0.3, 0.1, 0.2], 0.0005);
        assert_eq!(ranks, vec![3, 1, 2]);
    }

    #[test]
    fn ranking_is_shift_and_scale_invariant() {
        let base = [0.41, 0.39, 0.46, 0.48, 0.41];
        let ranks = rank_min_ties(&base, 0.0005);
        let shifted: Vec<f64> = base.iter().map(|v| v + 3.0).collect();
        assert_eq!(rank_min_ties(&shifted, 0.0005), ranks);
        let scaled: Vec<f64> = base.iter().map(|v| v * 7.0).collect();
        assert_eq!(rank_min_ties(&scaled, 0.0035), ranks);
    }

    #[test]
    fn theoretical_series_matches_pointwise_closed_form() {
        let (obs, _) = series(15, 8);
        let forecasts: Vec<GaussianSpec<f64>> = (0..15)
            .map(|i| GaussianSpec::new(i as f64 * 0.1, 1.0 + 0.05 * i as f64).unwrap())
            .collect();
        for rule in Rule::BOTH {
            let s = theoretical_scores(&forecasts, &obs, rule).unwrap();
            for t in 0..15 {
                let expect = match rule {
                    Rule::Se => crate::scoring::theoretical_se(&forecasts[t], obs[t]),
                    Rule::Crps => crate::scoring::theoretical_crps_gaussian(&forecasts[t], obs[t]),
                };
                assert_eq!(s.values[t], expect);
            }
        }
    }

    #[test]
    fn grouped_means_by_key() {
        let values = [1.0, 2.0, 3.0, 4.0];
        let keys = ["a", "b", "a", "b"];
        let groups = grouped_means(&values, &keys).unwrap();
        assert_eq!(groups["a"], 2.0);
        assert_eq!(groups["b"], 3.0);
        assert!(grouped_means(&values, &keys[..3]).is_err());
    }
}
