use std::io::Write;

use anyhow::Context;
use movescore::evaluation::Rule;
use movescore::simulation::{preset, run_scenario, ScenarioKind};

use crate::config::RunConfig;
use crate::report::{fmt_full, out_file, write_json};

pub fn run(
    preset_code: &str,
    reps: Option<usize>,
    seed: Option<u64>,
    force_st: bool,
    cfg: &RunConfig,
) -> anyhow::Result<()> {
    let kind: ScenarioKind = preset_code.parse()?;
    let reps = reps.unwrap_or(cfg.reps);
    let seed = seed.unwrap_or(cfg.seed);
    let mut spec = preset(kind, reps, seed);
    spec.tie_tol = cfg.tie_tol;
    spec.pelt = cfg.pelt_config(spec.n);
    if force_st {
        spec.include_st = true;
    }

    let started = std::time::Instant::now();
    let result = run_scenario(&spec)?;
    let elapsed = started.elapsed();

    let csv_path = out_file(&cfg.out, "series.csv")?;
    let mut csv = std::io::BufWriter::new(
        std::fs::File::create(&csv_path)
            .with_context(|| format!("creating {}", csv_path.display()))?,
    );
    writeln!(csv, "t,model,method,rule,value")?;
    for model in &result.models {
        for &method in &result.methods {
            for rule in Rule::BOTH {
                let series = result
                    .mean_series(model, method, rule)
                    .expect("series present for every combination");
                for (t, v) in series.iter().enumerate() {
                    writeln!(
                        csv,
                        "{},{},{},{},{}",
                        t + 1,
                        model,
                        method,
                        rule,
                        fmt_full(*v)
                    )?;
                }
            }
        }
    }
    drop(csv);

    let mut rules_json = serde_json::Map::new();
    for rule in Rule::BOTH {
        let averages: Vec<Vec<f64>> = result
            .models
            .iter()
            .map(|m| {
                result
                    .methods
                    .iter()
                    .map(|&method| result.average(m, method, rule).expect("average"))
                    .collect()
            })
            .collect();
        let ranks: Vec<Vec<usize>> = {
            let mut per_model = vec![Vec::new(); result.models.len()];
            for &method in &result.methods {
                let r = result.ranks(method, rule).expect("ranks");
                for (mi, &rank) in r.iter().enumerate() {
                    per_model[mi].push(rank);
                }
            }
            per_model
        };
        rules_json.insert(
            rule.as_str().to_string(),
            serde_json::json!({
                "models": result.models,
                "methods": result.methods.iter().map(|m| m.as_str()).collect::<Vec<_>>(),
                "averages": averages,
                "ranks": ranks,
            }),
        );
    }

    let mut cp_counts = result.changepoint_counts.clone();
    cp_counts.sort_unstable();
    let mut widths = result.of_widths.clone();
    widths.sort_unstable();
    let json_path = out_file(&cfg.out, "tables.json")?;
    write_json(
        &json_path,
        &serde_json::json!({
            "scenario": kind.code(),
            "n": result.n,
            "replications": result.replications,
            "seed": seed,
            "tables": serde_json::Value::Object(rules_json),
            "diagnostics": {
                "completed": result.completed,
                "failed": result.failed,
                "first_error": result.first_error,
                "changepoints": {
                    "min": cp_counts.first(),
                    "median": cp_counts.get(cp_counts.len() / 2),
                    "max": cp_counts.last(),
                },
                "of_width": {
                    "min": widths.first(),
                    "median": widths.get(widths.len() / 2),
                    "max": widths.last(),
                },
            },
        }),
    )?;

    println!(
        "scenario {} ({} replications, seed {seed}) in {:.1?}",
        kind.code(),
        result.replications,
        elapsed
    );
    for rule in Rule::BOTH {
        println!("{rule}:");
        let header: Vec<String> = result
            .methods
            .iter()
            .map(|m| format!("{:>8}", m.as_str()))
            .collect();
        println!("  {:>6}{}  ranks", "model", header.join(""));
        for model in &result.models {
            let mut avgs = String::new();
            let mut ranks = String::new();
            for (mi, &method) in result.methods.iter().enumerate() {
                let a = result.average(model, method, rule).expect("average");
                avgs.push_str(&format!("{a:>8.3}"));
                let r = result.ranks(method, rule).expect("ranks");
                let idx = result.model_index(model).expect("model");
                ranks.push_str(&format!("{}{}", if mi > 0 { "," } else { "" }, r[idx]));
            }
            println!("  {model:>6}{avgs}  ({ranks})");
        }
    }
    if result.failed > 0 {
        eprintln!(
            "warning: {} replications failed; first error: {}",
            result.failed,
            result.first_error.as_deref().unwrap_or("unknown")
        );
    }
    Ok(())
}
