//! Built-in simulation scenarios and the replication harness.
//!
//! Three scenario families describe a Gaussian data-generating process and
//! five competing models through per-instance mean and standard-deviation
//! curves: piecewise-constant parameters with changepoints (C), an
//! exponential trend (T), and a sinusoidal seasonal cycle (P).
//!
//! [`run_scenario`] repeats the experiment: per replication it draws the
//! observation series, detects changepoints on it, builds the OF/OV/DV
//! window plans, draws every model series and computes moving, point-wise,
//! stationarity (C and T) and theoretical score series under both rules,
//! then averages across replications and ranks the models.
//!
//! Replications are independent work units on separate RNG streams keyed by
//! (seed, replication, series), processed in fixed-size blocks whose partial
//! sums are reduced in block order, so results are bit-identical for a given
//! seed regardless of worker count.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::changepoint::{pelt_detect, PeltConfig};
use crate::error::{Error, Result};
use crate::evaluation::{
    moving_scores, pw_scores, rank_min_ties, st_scores, theoretical_scores, Method, Rule,
};
use crate::scoring::GaussianSpec;
use crate::windows::{dv_windows, of_windows, ov_windows};

/// Scenario family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioKind {
    Changepoint,
    Trend,
    Periodicity,
}

impl ScenarioKind {
    pub fn code(&self) -> &'static str {
        match self {
            ScenarioKind::Changepoint => "C",
            ScenarioKind::Trend => "T",
            ScenarioKind::Periodicity => "P",
        }
    }
}

impl std::str::FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "C" => Ok(ScenarioKind::Changepoint),
            "T" => Ok(ScenarioKind::Trend),
            "P" => Ok(ScenarioKind::Periodicity),
            other => Err(Error::InvalidParameter {
                reason: format!("unknown scenario preset {other:?} (expected C, T or P)"),
            }),
        }
    }
}

/// A per-instance parameter curve; `t` is the 1-based time location.
#[derive(Debug, Clone, PartialEq)]
pub enum Curve {
    /// Constant per segment: `boundaries` are the split points
    /// `(0, τ_1, …, τ_m, n)` and `values` holds one value per segment.
    PiecewiseConstant {
        boundaries: Vec<usize>,
        values: Vec<f64>,
    },
    /// `θ0 + θ1 · t · exp(θ2 · t)`
    ExpTrend { theta: [f64; 3] },
    /// `θ0 + θ1 · sin(2π t θ2)`
    Sine { theta: [f64; 3] },
    /// `exp(θ0 + θ1 · sin(2π t θ2))`
    ExpSine { theta: [f64; 3] },
}

impl Curve {
    pub fn value_at(&self, t: f64) -> f64 {
        match self {
            Curve::PiecewiseConstant { boundaries, values } => {
                let j = boundaries
                    .windows(2)
                    .position(|w| t > w[0] as f64 && t <= w[1] as f64)
                    .unwrap_or(if t <= 1.0 { 0 } else { values.len() - 1 });
                values[j]
            }
            Curve::ExpTrend { theta } => theta[0] + theta[1] * t * (theta[2] * t).exp(),
            Curve::Sine { theta } => {
                theta[0] + theta[1] * (std::f64::consts::TAU * t * theta[2]).sin()
            }
            Curve::ExpSine { theta } => {
                (theta[0] + theta[1] * (std::f64::consts::TAU * t * theta[2]).sin()).exp()
            }
        }
    }
}

/// Mean and standard-deviation curves of one Gaussian series.
#[derive(Debug, Clone, PartialEq)]
pub struct DistCurves {
    pub mean: Curve,
    pub sd: Curve,
}

impl DistCurves {
    pub fn mean_sd(&self, t: usize) -> (f64, f64) {
        let tf = t as f64;
        (self.mean.value_at(tf), self.sd.value_at(tf))
    }
}

/// Which series of a scenario to address.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesId {
    Dgp,
    Model(usize),
}

/// A fully parameterized scenario.
#[derive(Debug, Clone)]
pub struct ScenarioSpec {
    pub kind: ScenarioKind,
    pub n: usize,
    pub dgp: DistCurves,
    pub models: Vec<(String, DistCurves)>,
    pub replications: usize,
    pub seed: u64,
    /// Compute ST scores (the paper's convention: C and T only).
    pub include_st: bool,
    pub tie_tol: f64,
    pub pelt: PeltConfig<f64>,
}

impl ScenarioSpec {
    /// Mean and standard deviation of a series at the 1-based instance `t`.
    pub fn mean_sd(&self, who: SeriesId, t: usize) -> (f64, f64) {
        self.curves(who).mean_sd(t)
    }

    fn curves(&self, who: SeriesId) -> &DistCurves {
        match who {
            SeriesId::Dgp => &self.dgp,
            SeriesId::Model(k) => &self.models[k].1,
        }
    }

    pub fn methods(&self) -> Vec<Method> {
        let mut m = vec![Method::Theo, Method::Of, Method::Ov, Method::Dv, Method::Pw];
        if self.include_st {
            m.push(Method::St);
        }
        m
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 || self.replications == 0 {
            return Err(Error::InvalidParameter {
                reason: "scenario needs n >= 1 and replications >= 1".to_string(),
            });
        }
        if self.models.len() + 1 >= STREAMS_PER_REPLICATION as usize {
            return Err(Error::InvalidParameter {
                reason: format!("at most {} models supported", STREAMS_PER_REPLICATION - 2),
            });
        }
        Ok(())
    }
}

const STREAMS_PER_REPLICATION: u64 = 64;

/// Independent RNG stream for one series of one replication.
pub fn series_rng(seed: u64, replication: usize, who: SeriesId) -> ChaCha8Rng {
    let series_idx = match who {
        SeriesId::Dgp => 0u64,
        SeriesId::Model(k) => k as u64 + 1,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replication as u64 * STREAMS_PER_REPLICATION + series_idx);
    rng
}

/// Draws the series `who` of the scenario: independent `N(μ_t, σ_t²)` per
/// instance.
pub fn generate_series<Rg: Rng + ?Sized>(
    spec: &ScenarioSpec,
    who: SeriesId,
    rng: &mut Rg,
) -> Vec<f64> {
    let curves = spec.curves(who);
    (1..=spec.n)
        .map(|t| {
            let (mean, sd) = curves.mean_sd(t);
            let z: f64 = rng.sample(rand_distr::StandardNormal);
            mean + sd * z
        })
        .collect()
}

/// The changepoint scenario: N = 200, changepoints after 80 and 130, mean
/// and standard deviation constant per segment.
pub fn scenario_c(replications: usize, seed: u64) -> ScenarioSpec {
    let n = 200;
    let bounds = vec![0, 80, 130, n];
    let piece = |values: [f64; 3]| Curve::PiecewiseConstant {
        boundaries: bounds.clone(),
        values: values.to_vec(),
    };
    let mu0 = [0.0, 1.0, 0.0];
    let sd0 = [0.9, 0.9, 0.3];
    let mu_const = [0.25, 0.25, 0.25];
    let sd_const = [0.6, 0.6, 0.6];
    let mu_wrong = [0.1, 0.9, 0.1];
    ScenarioSpec {
        kind: ScenarioKind::Changepoint,
        n,
        dgp: DistCurves {
            mean: piece(mu0),
            sd: piece(sd0),
        },
        models: vec![
            (
                "C1".into(),
                DistCurves {
                    mean: piece(mu0),
                    sd: piece(sd0),
                },
            ),
            (
                "C2".into(),
                DistCurves {
                    mean: piece(mu_const),
                    sd: piece(sd0),
                },
            ),
            (
                "C3".into(),
                DistCurves {
                    mean: piece(mu0),
                    sd: piece(sd_const),
                },
            ),
            (
                "C4".into(),
                DistCurves {
                    mean: piece(mu_const),
                    sd: piece(sd_const),
                },
            ),
            (
                "C5".into(),
                DistCurves {
                    mean: piece(mu_wrong),
                    sd: piece(sd_const),
                },
            ),
        ],
        replications,
        seed,
        include_st: true,
        tie_tol: 5e-4,
        pelt: PeltConfig::for_series_len(n),
    }
}

/// The trend scenario: N = 200, mean and standard deviation follow
/// `θ0 + θ1 t exp(θ2 t)` with the parameter vectors scaled by 1/N.
pub fn scenario_t(replications: usize, seed: u64) -> ScenarioSpec {
    let n = 200;
    let nf = n as f64;
    let scaled = |theta: [f64; 3]| Curve::ExpTrend {
        theta: [theta[0] / nf, theta[1] / nf, theta[2] / nf],
    };
    let mu0 = scaled([0.0, 1.0 / 3.0, 2.0]);
    let sd0 = scaled([20.0, 0.05, 2.0]);
    let mu_wrong = scaled([0.0, 1.0 / 3.0, 1.9]);
    ScenarioSpec {
        kind: ScenarioKind::Trend,
        n,
        dgp: DistCurves {
            mean: mu0.clone(),
            sd: sd0.clone(),
        },
        models: vec![
            (
                "T1".into(),
                DistCurves {
                    mean: mu0.clone(),
                    sd: sd0.clone(),
                },
            ),
            (
                "T2".into(),
                DistCurves {
                    mean: mu_wrong.clone(),
                    sd: sd0.clone(),
                },
            ),
            (
                "T3".into(),
                DistCurves {
                    mean: mu0,
                    sd: scaled([20.0, 0.0375, 1.5]),
                },
            ),
            (
                "T4".into(),
                DistCurves {
                    mean: mu_wrong.clone(),
                    sd: scaled([20.0, 0.05, 0.0]),
                },
            ),
            (
                "T5".into(),
                DistCurves {
                    mean: mu_wrong,
                    sd: scaled([20.0, 0.0, 0.0]),
                },
            ),
        ],
        replications,
        seed,
        include_st: true,
        tie_tol: 5e-4,
        pelt: PeltConfig::for_series_len(n),
    }
}

/// The periodicity scenario: N = 730, sinusoidal mean and log-sinusoidal
/// standard deviation with a 365-instance period.
pub fn scenario_p(replications: usize, seed: u64) -> ScenarioSpec {
    let n = 730;
    let freq = 1.0 / 365.0;
    let mu0 = Curve::Sine {
        theta: [0.0, 10.0, freq],
    };
    let sd0 = Curve::ExpSine {
        theta: [0.0, -0.5, freq],
    };
    let mu_wrong = Curve::Sine {
        theta: [0.0, 9.5, freq],
    };
    let sd_wrong = Curve::ExpSine {
        theta: [0.0, -0.25, freq],
    };
    ScenarioSpec {
        kind: ScenarioKind::Periodicity,
        n,
        dgp: DistCurves {
            mean: mu0.clone(),
            sd: sd0.clone(),
        },
        models: vec![
            (
                "P1".into(),
                DistCurves {
                    mean: mu0.clone(),
                    sd: sd0.clone(),
                },
            ),
            (
                "P2".into(),
                DistCurves {
                    mean: mu_wrong.clone(),
                    sd: sd0,
                },
            ),
            (
                "P3".into(),
                DistCurves {
                    mean: mu0,
                    sd: sd_wrong.clone(),
                },
            ),
            (
                "P4".into(),
                DistCurves {
                    mean: mu_wrong.clone(),
                    sd: sd_wrong,
                },
            ),
            (
                "P5".into(),
                DistCurves {
                    mean: mu_wrong,
                    sd: Curve::ExpSine {
                        theta: [0.0, 0.0, freq],
                    },
                },
            ),
        ],
        replications,
        seed,
        include_st: false,
        tie_tol: 5e-4,
        pelt: PeltConfig::for_series_len(n),
    }
}

/// The built-in preset for a scenario code.
pub fn preset(kind: ScenarioKind, replications: usize, seed: u64) -> ScenarioSpec {
    match kind {
        ScenarioKind::Changepoint => scenario_c(replications, seed),
        ScenarioKind::Trend => scenario_t(replications, seed),
        ScenarioKind::Periodicity => scenario_p(replications, seed),
    }
}

/// Replication-averaged score series, averages, ranks and changepoint
/// diagnostics of one scenario run.
#[derive(Debug, Clone)]
pub struct ReplicationResult {
    pub models: Vec<String>,
    pub methods: Vec<Method>,
    pub n: usize,
    pub replications: usize,
    pub completed: usize,
    /// Replications aborted by an error, with the first diagnostic kept.
    pub failed: usize,
    pub first_error: Option<String>,
    series: Vec<Vec<f64>>,
    averages: Vec<f64>,
    ranks: BTreeMap<(Method, Rule), Vec<usize>>,
    /// Number of detected changepoints per replication.
    pub changepoint_counts: Vec<usize>,
    /// Detected changepoints per replication.
    pub detected_changepoints: Vec<Vec<usize>>,
    /// Interior OF window width per replication.
    pub of_widths: Vec<usize>,
}

impl ReplicationResult {
    fn slot_of(&self, model: usize, method: Method, rule: Rule) -> Option<usize> {
        let m = self.methods.iter().position(|&x| x == method)?;
        let r = match rule {
            Rule::Se => 0,
            Rule::Crps => 1,
        };
        Some((model * self.methods.len() + m) * 2 + r)
    }

    pub fn model_index(&self, label: &str) -> Option<usize> {
        self.models.iter().position(|m| m == label)
    }

    /// Replication-averaged per-instance score series.
    pub fn mean_series(&self, model: &str, method: Method, rule: Rule) -> Option<&[f64]> {
        let idx = self.model_index(model)?;
        let slot = self.slot_of(idx, method, rule)?;
        Some(&self.series[slot])
    }

    /// Scalar average over instances and replications.
    pub fn average(&self, model: &str, method: Method, rule: Rule) -> Option<f64> {
        let idx = self.model_index(model)?;
        let slot = self.slot_of(idx, method, rule)?;
        Some(self.averages[slot])
    }

    /// Model ranks (aligned with `models`) under one method and rule.
    pub fn ranks(&self, method: Method, rule: Rule) -> Option<&[usize]> {
        self.ranks.get(&(method, rule)).map(|v| v.as_slice())
    }
}

struct BlockAccumulator {
    sums: Vec<Vec<f64>>,
    completed: usize,
    failed: usize,
    first_error: Option<String>,
    cp_counts: Vec<usize>,
    cps: Vec<Vec<usize>>,
    of_widths: Vec<usize>,
}

const REPLICATION_BLOCK: usize = 32;

/// Runs the replication experiment of a scenario.
pub fn run_scenario(spec: &ScenarioSpec) -> Result<ReplicationResult> {
    spec.validate()?;
    let methods = spec.methods();
    let n_slots = spec.models.len() * methods.len() * 2;

    // Per-instance Gaussian forecasts for the theoretical scores; fails up
    // front if any model sd is nonpositive.
    let mut forecasts: Vec<Vec<GaussianSpec<f64>>> = Vec::with_capacity(spec.models.len());
    for (label, curves) in &spec.models {
        let mut per_t = Vec::with_capacity(spec.n);
        for t in 1..=spec.n {
            let (mean, sd) = curves.mean_sd(t);
            per_t.push(
                GaussianSpec::new(mean, sd).map_err(|e| Error::InvalidParameter {
                    reason: format!("model {label} at t={t}: {e}"),
                })?,
            );
        }
        forecasts.push(per_t);
    }

    let n_blocks = spec.replications.div_ceil(REPLICATION_BLOCK);
    let blocks: Vec<BlockAccumulator> = (0..n_blocks)
        .into_par_iter()
        .map(|block| {
            let lo = block * REPLICATION_BLOCK;
            let hi = ((block + 1) * REPLICATION_BLOCK).min(spec.replications);
            let mut acc = BlockAccumulator {
                sums: vec![vec![0.0; spec.n]; n_slots],
                completed: 0,
                failed: 0,
                first_error: None,
                cp_counts: Vec::with_capacity(hi - lo),
                cps: Vec::with_capacity(hi - lo),
                of_widths: Vec::with_capacity(hi - lo),
            };
            for rep in lo..hi {
                match run_replication(spec, &methods, &forecasts, rep, &mut acc.sums) {
                    Ok((cps, of_width)) => {
                        acc.completed += 1;
                        acc.cp_counts.push(cps.len());
                        acc.cps.push(cps);
                        acc.of_widths.push(of_width);
                    }
                    Err(e) => {
                        acc.failed += 1;
                        acc.first_error
                            .get_or_insert_with(|| format!("replication {rep}: {e}"));
                    }
                }
            }
            acc
        })
        .collect();

    let mut sums = vec![vec![0.0f64; spec.n]; n_slots];
    let mut completed = 0usize;
    let mut failed = 0usize;
    let mut first_error = None;
    let mut cp_counts = Vec::with_capacity(spec.replications);
    let mut cps = Vec::with_capacity(spec.replications);
    let mut of_widths = Vec::with_capacity(spec.replications);
    for block in blocks {
        for (total, part) in sums.iter_mut().zip(block.sums.iter()) {
            for (a, b) in total.iter_mut().zip(part.iter()) {
                *a += b;
            }
        }
        completed += block.completed;
        failed += block.failed;
        if first_error.is_none() {
            first_error = block.first_error;
        }
        cp_counts.extend(block.cp_counts);
        cps.extend(block.cps);
        of_widths.extend(block.of_widths);
    }
    if completed == 0 {
        return Err(Error::InvalidParameter {
            reason: format!(
                "all {} replications failed: {}",
                spec.replications,
                first_error.unwrap_or_default()
            ),
        });
    }

    let denom = completed as f64;
    let series: Vec<Vec<f64>> = sums
        .into_iter()
        .map(|s| s.into_iter().map(|v| v / denom).collect())
        .collect();
    let averages: Vec<f64> = series
        .iter()
        .map(|s| s.iter().sum::<f64>() / s.len() as f64)
        .collect();

    let mut ranks = BTreeMap::new();
    if !spec.models.is_empty() {
        for (mi, &method) in methods.iter().enumerate() {
            for (ri, &rule) in Rule::BOTH.iter().enumerate() {
                let per_model: Vec<f64> = (0..spec.models.len())
                    .map(|k| averages[(k * methods.len() + mi) * 2 + ri])
                    .collect();
                ranks.insert((method, rule), rank_min_ties(&per_model, spec.tie_tol));
            }
        }
    }

    Ok(ReplicationResult {
        models: spec.models.iter().map(|(l, _)| l.clone()).collect(),
        methods,
        n: spec.n,
        replications: spec.replications,
        completed,
        failed,
        first_error,
        series,
        averages,
        ranks,
        changepoint_counts: cp_counts,
        detected_changepoints: cps,
        of_widths,
    })
}

fn run_replication(
    spec: &ScenarioSpec,
    methods: &[Method],
    forecasts: &[Vec<GaussianSpec<f64>>],
    rep: usize,
    sums: &mut [Vec<f64>],
) -> Result<(Vec<usize>, usize)> {
    let mut rng = series_rng(spec.seed, rep, SeriesId::Dgp);
    let obs = generate_series(spec, SeriesId::Dgp, &mut rng);

    let seg = pelt_detect(&obs, &spec.pelt)?;
    let plan_of = of_windows(&seg);
    let plan_ov = ov_windows(&seg);
    let plan_dv = dv_windows(&seg);
    let of_width = plan_of.max_width();

    let methods_len = methods.len();
    for (k, _) in spec.models.iter().enumerate() {
        let mut rng = series_rng(spec.seed, rep, SeriesId::Model(k));
        let model = generate_series(spec, SeriesId::Model(k), &mut rng);
        for (ri, &rule) in Rule::BOTH.iter().enumerate() {
            for (mi, &method) in methods.iter().enumerate() {
                let series = match method {
                    Method::Theo => theoretical_scores(&forecasts[k], &obs, rule)?,
                    Method::Of => moving_scores(&obs, &model, &plan_of, rule)?,
                    Method::Ov => moving_scores(&obs, &model, &plan_ov, rule)?,
                    Method::Dv => moving_scores(&obs, &model, &plan_dv, rule)?,
                    Method::Pw => pw_scores(&obs, &model, rule)?,
                    Method::St => st_scores(&obs, &model, rule)?,
                };
                let slot = (k * methods_len + mi) * 2 + ri;
                for (acc, v) in sums[slot].iter_mut().zip(series.values.iter()) {
                    *acc += v;
                }
            }
        }
    }
    Ok((seg.changepoints().to_vec(), of_width))
}
