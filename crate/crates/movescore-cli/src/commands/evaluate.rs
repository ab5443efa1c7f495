use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use movescore::changepoint::pelt_detect;
use movescore::evaluation::{moving_scores, pw_scores, rank_min_ties, st_scores, Method, Rule};
use movescore::windows::{plan_windows, WindowKind};

use crate::config::RunConfig;
use crate::report::{fmt_full, out_file, write_json};
use crate::table::{read_table, SeriesTable};

pub struct PlanFiles {
    pub of: Option<PathBuf>,
    pub ov: Option<PathBuf>,
    pub dv: Option<PathBuf>,
}

impl PlanFiles {
    fn get(&self, kind: WindowKind) -> Option<&PathBuf> {
        match kind {
            WindowKind::Of => self.of.as_ref(),
            WindowKind::Ov => self.ov.as_ref(),
            WindowKind::Dv => self.dv.as_ref(),
        }
    }

    fn any(&self) -> bool {
        self.of.is_some() || self.ov.is_some() || self.dv.is_some()
    }
}

fn parse_rules(spec: &str) -> anyhow::Result<Vec<Rule>> {
    match spec.to_ascii_lowercase().as_str() {
        "both" => Ok(vec![Rule::Se, Rule::Crps]),
        other => Ok(vec![other.parse::<Rule>()?]),
    }
}

type GroupSums = BTreeMap<(usize, Method, Rule), (f64, usize)>;

struct ScoreRow {
    loc: usize,
    t: usize,
    model: usize,
    method: Method,
    rule: Rule,
    score: f64,
}

pub fn run(
    input: &Path,
    windows_spec: &str,
    rule_spec: &str,
    include_st: bool,
    group_by: &[String],
    plans: &PlanFiles,
    cfg: &RunConfig,
) -> anyhow::Result<()> {
    let table = read_table(input, &cfg.na, false)?;
    if table.model_names.is_empty() {
        bail!("input has no model columns (columns besides time, obs and location)");
    }
    let kinds = super::windows::parse_kinds(windows_spec)?;
    let rules = parse_rules(rule_spec)?;
    for g in group_by {
        match g.as_str() {
            "month" | "year" | "location" => {}
            other => bail!("unknown group-by key {other:?} (expected month, year or location)"),
        }
    }
    if group_by.iter().any(|g| g == "location") && !table.has_location {
        bail!("--group-by location needs a location column");
    }
    if plans.any() && table.locations.len() != 1 {
        bail!("window-plan files only apply to single-location input");
    }

    let mut methods: Vec<Method> = kinds.iter().map(|&k| Method::from(k)).collect();
    methods.push(Method::Pw);
    if include_st {
        methods.push(Method::St);
    }

    let mut rows: Vec<ScoreRow> = Vec::new();
    for (li, loc) in table.locations.iter().enumerate() {
        let n = loc.obs.len();
        // window plans come from the observation series only and are shared
        // by every model column
        let needs_detection = kinds.iter().any(|&k| plans.get(k).is_none());
        let seg = if needs_detection {
            Some(pelt_detect(&loc.obs, &cfg.pelt_config(n)).with_context(|| {
                format!("detecting changepoints for location {:?}", loc.location)
            })?)
        } else {
            None
        };
        let mut loc_plans = Vec::with_capacity(kinds.len());
        for &kind in &kinds {
            let plan = match plans.get(kind) {
                Some(path) => super::windows::read_plan(path, kind)?,
                None => plan_windows(kind, seg.as_ref().expect("detected segmentation")),
            };
            if plan.len() != n {
                bail!(
                    "plan for {kind} has length {} but the series has {n} instances",
                    plan.len()
                );
            }
            loc_plans.push(plan);
        }

        for (mi, model) in loc.models.iter().enumerate() {
            for &rule in &rules {
                for plan in &loc_plans {
                    let series = moving_scores(&loc.obs, model, plan, rule)?;
                    push_rows(&mut rows, li, mi, &series.values, series.method, rule);
                }
                let series = pw_scores(&loc.obs, model, rule)?;
                push_rows(&mut rows, li, mi, &series.values, Method::Pw, rule);
                if include_st {
                    let series = st_scores(&loc.obs, model, rule)?;
                    push_rows(&mut rows, li, mi, &series.values, Method::St, rule);
                }
            }
        }
    }

    write_scores_csv(&table, &rows, cfg)?;

    // pooled averages over every location and instance
    let mut sums: BTreeMap<(usize, Method, Rule), (f64, usize)> = BTreeMap::new();
    for row in &rows {
        let e = sums
            .entry((row.model, row.method, row.rule))
            .or_insert((0.0, 0));
        e.0 += row.score;
        e.1 += 1;
    }
    let averages: BTreeMap<(usize, Method, Rule), f64> = sums
        .into_iter()
        .map(|(k, (s, c))| (k, s / c as f64))
        .collect();

    let mut averages_json = Vec::new();
    for (mi, name) in table.model_names.iter().enumerate() {
        for &method in &methods {
            for &rule in &rules {
                averages_json.push(serde_json::json!({
                    "model": name,
                    "method": method.as_str(),
                    "rule": rule.as_str(),
                    "mean": averages[&(mi, method, rule)],
                }));
            }
        }
    }

    let mut ranks_json = BTreeMap::new();
    for &rule in &rules {
        let mut per_method = BTreeMap::new();
        for &method in &methods {
            let avgs: Vec<f64> = (0..table.model_names.len())
                .map(|mi| averages[&(mi, method, rule)])
                .collect();
            let ranks = rank_min_ties(&avgs, cfg.tie_tol);
            let map: BTreeMap<String, usize> =
                table.model_names.iter().cloned().zip(ranks).collect();
            per_method.insert(method.as_str().to_string(), map);
        }
        ranks_json.insert(rule.as_str().to_string(), per_method);
    }

    // grouped means
    let mut groups_json: BTreeMap<String, serde_json::Value> = BTreeMap::new();
    for grouping in group_by {
        let mut keyed: BTreeMap<String, GroupSums> = BTreeMap::new();
        for row in &rows {
            let loc = &table.locations[row.loc];
            let key = match grouping.as_str() {
                "month" => loc.time[row.t]
                    .month_key()
                    .context("--group-by month needs ISO date time labels")?,
                "year" => loc.time[row.t]
                    .year_key()
                    .context("--group-by year needs date or integer-year time labels")?
                    .to_string(),
                "location" => loc.location.clone(),
                _ => unreachable!(),
            };
            let e = keyed
                .entry(key)
                .or_default()
                .entry((row.model, row.method, row.rule))
                .or_insert((0.0, 0));
            e.0 += row.score;
            e.1 += 1;
        }
        let mut out: BTreeMap<String, serde_json::Value> = BTreeMap::new();
        for (key, sums) in keyed {
            let mut entries = Vec::new();
            for (mi, name) in table.model_names.iter().enumerate() {
                for &method in &methods {
                    for &rule in &rules {
                        let (s, c) = sums[&(mi, method, rule)];
                        entries.push(serde_json::json!({
                            "model": name,
                            "method": method.as_str(),
                            "rule": rule.as_str(),
                            "mean": s / c as f64,
                        }));
                    }
                }
            }
            out.insert(key, serde_json::Value::Array(entries));
        }
        groups_json.insert(grouping.clone(), serde_json::to_value(out)?);
    }

    let json_path = out_file(&cfg.out, "evaluation.json")?;
    write_json(
        &json_path,
        &serde_json::json!({
            "config": {
                "penalty_p": cfg.penalty_p,
                "min_seg_len": cfg.min_seg_len,
                "variance_floor": cfg.variance_floor,
                "tie_tol": cfg.tie_tol,
                "windows": kinds.iter().map(|k| k.as_str()).collect::<Vec<_>>(),
                "rules": rules.iter().map(|r| r.as_str()).collect::<Vec<_>>(),
                "include_st": include_st,
            },
            "models": table.model_names,
            "locations": table.locations.iter().map(|l| l.location.clone()).collect::<Vec<_>>(),
            "averages": averages_json,
            "ranks": ranks_json,
            "groups": groups_json,
        }),
    )?;

    // stdout summary, three decimals like the printed tables
    for &rule in &rules {
        println!("{rule} averages (rank):");
        for (mi, name) in table.model_names.iter().enumerate() {
            let mut line = format!("  {name:>12}");
            for &method in &methods {
                let avg = averages[&(mi, method, rule)];
                let rank = ranks_json[rule.as_str()][method.as_str()][name];
                line.push_str(&format!("  {method}={avg:.3} ({rank})"));
            }
            println!("{line}");
        }
    }
    Ok(())
}

fn push_rows(
    rows: &mut Vec<ScoreRow>,
    loc: usize,
    model: usize,
    values: &[f64],
    method: Method,
    rule: Rule,
) {
    rows.extend(values.iter().enumerate().map(|(t, &score)| ScoreRow {
        loc,
        t,
        model,
        method,
        rule,
        score,
    }));
}

fn write_scores_csv(table: &SeriesTable, rows: &[ScoreRow], cfg: &RunConfig) -> anyhow::Result<()> {
    let path = out_file(&cfg.out, "scores.csv")?;
    let mut file = std::io::BufWriter::new(
        std::fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?,
    );
    if table.has_location {
        writeln!(file, "location,t,time,model,method,rule,score")?;
    } else {
        writeln!(file, "t,time,model,method,rule,score")?;
    }
    for row in rows {
        let loc = &table.locations[row.loc];
        let base = format!(
            "{},{},{},{},{},{}",
            row.t + 1,
            loc.time[row.t].raw(),
            table.model_names[row.model],
            row.method,
            row.rule,
            fmt_full(row.score)
        );
        if table.has_location {
            writeln!(file, "{},{}", loc.location, base)?;
        } else {
            writeln!(file, "{base}")?;
        }
    }
    Ok(())
}
