//! Linear-trend comparison baseline: annual aggregation, least-squares
//! trends, and per-location absolute trend errors.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::real::Real;

/// Yearly means in ascending year order.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnualSeries<R> {
    pub years: Vec<i32>,
    pub values: Vec<R>,
}

/// A fitted line `value = intercept + slope · year`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrendFit<R> {
    pub intercept: R,
    pub slope: R,
}

/// Per-year arithmetic means of a daily (or otherwise sub-annual) series.
/// Non-finite values are rejected, never imputed.
pub fn annual_means<R: Real>(daily: &[R], years: &[i32]) -> Result<AnnualSeries<R>> {
    if daily.len() != years.len() {
        return Err(Error::LengthMismatch {
            context: "daily values vs year labels",
            left: daily.len(),
            right: years.len(),
        });
    }
    if daily.is_empty() {
        return Err(Error::EmptySample);
    }
    if daily.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            context: "daily series",
        });
    }
    let mut sums: BTreeMap<i32, (R, usize)> = BTreeMap::new();
    for (&v, &y) in daily.iter().zip(years.iter()) {
        let entry = sums.entry(y).or_insert((R::zero(), 0));
        entry.0 += v;
        entry.1 += 1;
    }
    let mut years_out = Vec::with_capacity(sums.len());
    let mut values = Vec::with_capacity(sums.len());
    for (year, (sum, count)) in sums {
        years_out.push(year);
        values.push(sum / R::of_usize(count));
    }
    Ok(AnnualSeries {
        years: years_out,
        values,
    })
}

/// Closed-form least squares of `value = α + β · year`. The time axis is
/// centered at its mean before fitting; the slope is unaffected and the
/// intercept is mapped back to the uncentered axis.
pub fn ols_trend<R: Real>(series: &AnnualSeries<R>) -> Result<TrendFit<R>> {
    let k = series.years.len();
    if k != series.values.len() {
        return Err(Error::LengthMismatch {
            context: "years vs values",
            left: k,
            right: series.values.len(),
        });
    }
    if k < 3 {
        return Err(Error::TooFewPoints(k));
    }
    if series.values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            context: "annual series",
        });
    }
    let kf = R::of_usize(k);
    let t_mean = series
        .years
        .iter()
        .map(|&y| R::of(y as f64))
        .fold(R::zero(), |a, b| a + b)
        / kf;
    let v_mean = series.values.iter().fold(R::zero(), |a, &b| a + b) / kf;
    let mut sxx = R::zero();
    let mut sxy = R::zero();
    for (&year, &v) in series.years.iter().zip(series.values.iter()) {
        let dt = R::of(year as f64) - t_mean;
        sxx += dt * dt;
        sxy += dt * (v - v_mean);
    }
    if sxx <= R::zero() {
        return Err(Error::DegenerateTimeAxis);
    }
    let slope = sxy / sxx;
    Ok(TrendFit {
        intercept: v_mean - slope * t_mean,
        slope,
    })
}

/// Per-location absolute slope differences and their spatial mean.
#[derive(Debug, Clone, PartialEq)]
pub struct TrendErrorTable<R> {
    pub per_location: BTreeMap<String, R>,
    pub spatial_mean: R,
}

/// `|β̂_model − β̂_reference|` per location plus the spatial average; the two
/// maps must carry identical location keys.
pub fn trend_error_table<R: Real>(
    model_slopes: &BTreeMap<String, R>,
    ref_slopes: &BTreeMap<String, R>,
) -> Result<TrendErrorTable<R>> {
    if model_slopes.is_empty() {
        return Err(Error::EmptySample);
    }
    if model_slopes.len() != ref_slopes.len() || !model_slopes.keys().eq(ref_slopes.keys()) {
        let only_model: Vec<&String> = model_slopes
            .keys()
            .filter(|k| !ref_slopes.contains_key(*k))
            .collect();
        let only_ref: Vec<&String> = ref_slopes
            .keys()
            .filter(|k| !model_slopes.contains_key(*k))
            .collect();
        return Err(Error::KeyMismatch(format!(
            "model-only {only_model:?}, reference-only {only_ref:?}"
        )));
    }
    let mut per_location = BTreeMap::new();
    let mut total = R::zero();
    for (loc, &m) in model_slopes {
        let r = ref_slopes[loc];
        let err = (m - r).abs();
        total += err;
        per_location.insert(loc.clone(), err);
    }
    let spatial_mean = total / R::of_usize(per_location.len());
    Ok(TrendErrorTable {
        per_location,
        spatial_mean,
    })
}
