mod commands;
mod config;
mod report;
mod table;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

/// Moving-window proper-score evaluation of time-series models.
#[derive(Parser)]
#[command(name = "movescore", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every command; unset flags fall back to the config file,
/// then to the built-in defaults. Environment variables with the MOVESCORE_
/// prefix override the config file but not explicit flags.
#[derive(Args, Debug, Clone)]
struct CommonArgs {
    /// Optional TOML config file with the same keys as these flags.
    #[arg(long, global = true, env = "MOVESCORE_CONFIG")]
    config: Option<PathBuf>,

    /// Penalty multiplier p in kappa = p ln(N).
    #[arg(long, env = "MOVESCORE_PENALTY_P")]
    penalty_p: Option<f64>,

    /// Minimum changepoint segment length.
    #[arg(long, env = "MOVESCORE_MIN_SEG_LEN")]
    min_seg_len: Option<usize>,

    /// Lower clamp for segment variance estimates.
    #[arg(long, env = "MOVESCORE_VARIANCE_FLOOR")]
    variance_floor: Option<f64>,

    /// Absolute tolerance under which averages share a rank.
    #[arg(long, env = "MOVESCORE_TIE_TOL")]
    tie_tol: Option<f64>,

    /// Missing-value sentinel; cells equal to it are rejected in used columns.
    #[arg(long, env = "MOVESCORE_NA")]
    na: Option<String>,

    /// Output directory for reports.
    #[arg(long, env = "MOVESCORE_OUT")]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Detect changepoints in the observation column and report segments.
    Detect {
        /// Input CSV with columns: time, obs [, location].
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Emit window plans (t, lo, hi CSV) for the observation series.
    Windows {
        /// Input CSV with columns: time, obs (single location).
        #[arg(long)]
        input: PathBuf,
        /// Window kinds to plan: of, ov, dv or all.
        #[arg(long, default_value = "all")]
        windows: String,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Score model columns against the observation column.
    Evaluate {
        /// Input CSV with columns: time, obs, one per model [, location].
        #[arg(long)]
        input: PathBuf,
        /// Window kinds to evaluate: of, ov, dv or all.
        #[arg(long, default_value = "all")]
        windows: String,
        /// Scoring rules: se, crps or both.
        #[arg(long, default_value = "both")]
        rule: String,
        /// Also compute stationarity (full-sample) scores.
        #[arg(long)]
        include_st: bool,
        /// Grouped means to add to the report (repeatable): month, year or
        /// location.
        #[arg(long = "group-by")]
        group_by: Vec<String>,
        /// Reuse an emitted OF window plan instead of re-deriving it.
        #[arg(long)]
        plan_of: Option<PathBuf>,
        /// Reuse an emitted OV window plan instead of re-deriving it.
        #[arg(long)]
        plan_ov: Option<PathBuf>,
        /// Reuse an emitted DV window plan instead of re-deriving it.
        #[arg(long)]
        plan_dv: Option<PathBuf>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Run a built-in simulation scenario and emit its tables.
    Simulate {
        /// Scenario preset: C, T or P.
        preset: String,
        /// Number of replications.
        #[arg(long, env = "MOVESCORE_REPS")]
        reps: Option<usize>,
        /// Base RNG seed.
        #[arg(long, env = "MOVESCORE_SEED")]
        seed: Option<u64>,
        /// Force stationarity scores even where the preset omits them.
        #[arg(long)]
        force_st: bool,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Compare linear trends of a model against a reference data set.
    Trend {
        /// Model CSV with columns: time, value [, location].
        #[arg(long)]
        model: PathBuf,
        /// Reference CSV with columns: time, value [, location].
        #[arg(long)]
        reference: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
    },
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Detect { input, common } => {
            let cfg = config::RunConfig::resolve(&common)?;
            commands::detect::run(&input, &cfg)
        }
        Command::Windows {
            input,
            windows,
            common,
        } => {
            let cfg = config::RunConfig::resolve(&common)?;
            commands::windows::run(&input, &windows, &cfg)
        }
        Command::Evaluate {
            input,
            windows,
            rule,
            include_st,
            group_by,
            plan_of,
            plan_ov,
            plan_dv,
            common,
        } => {
            let cfg = config::RunConfig::resolve(&common)?;
            let plans = commands::evaluate::PlanFiles {
                of: plan_of,
                ov: plan_ov,
                dv: plan_dv,
            };
            commands::evaluate::run(&input, &windows, &rule, include_st, &group_by, &plans, &cfg)
        }
        Command::Simulate {
            preset,
            reps,
            seed,
            force_st,
            common,
        } => {
            let cfg = config::RunConfig::resolve(&common)?;
            commands::simulate::run(&preset, reps, seed, force_st, &cfg)
        }
        Command::Trend {
            model,
            reference,
            common,
        } => {
            let cfg = config::RunConfig::resolve(&common)?;
            commands::trend::run(&model, &reference, &cfg)
        }
    }
}
