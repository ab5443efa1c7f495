use std::path::PathBuf;

use anyhow::Context;
use serde::Deserialize;

use crate::CommonArgs;

/// Optional config-file keys; explicit flags win over these.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    penalty_p: Option<f64>,
    min_seg_len: Option<usize>,
    variance_floor: Option<f64>,
    tie_tol: Option<f64>,
    na: Option<String>,
    out: Option<PathBuf>,
    reps: Option<usize>,
    seed: Option<u64>,
}

/// Fully resolved run parameters.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub penalty_p: f64,
    pub min_seg_len: usize,
    pub variance_floor: f64,
    pub tie_tol: f64,
    pub na: String,
    pub out: PathBuf,
    pub reps: usize,
    pub seed: u64,
}

impl RunConfig {
    pub const DEFAULT_REPS: usize = 2000;

    pub fn resolve(args: &CommonArgs) -> anyhow::Result<Self> {
        let file = match &args.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading config file {}", path.display()))?;
                toml::from_str::<FileConfig>(&text)
                    .with_context(|| format!("parsing config file {}", path.display()))?
            }
            None => FileConfig::default(),
        };
        Ok(Self {
            penalty_p: args.penalty_p.or(file.penalty_p).unwrap_or(3.0),
            min_seg_len: args.min_seg_len.or(file.min_seg_len).unwrap_or(11),
            variance_floor: args.variance_floor.or(file.variance_floor).unwrap_or(1e-8),
            tie_tol: args.tie_tol.or(file.tie_tol).unwrap_or(5e-4),
            na: args.na.clone().or(file.na).unwrap_or_default(),
            out: args
                .out
                .clone()
                .or(file.out)
                .unwrap_or_else(|| PathBuf::from("movescore_out")),
            reps: file.reps.unwrap_or(Self::DEFAULT_REPS),
            seed: file.seed.unwrap_or(1),
        })
    }

    /// Detection parameters for a series of length `n`.
    pub fn pelt_config(&self, n: usize) -> movescore::PeltConfig {
        movescore::PeltConfig::with_penalty_p(n, self.penalty_p)
            .min_seg_len(self.min_seg_len)
            .variance_floor(self.variance_floor)
    }
}
