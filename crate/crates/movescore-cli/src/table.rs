use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context};
use chrono::{Datelike, NaiveDate};

/// A time label: an ISO date or an integer step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TimeLabel {
    Date(NaiveDate),
    Step(i64),
}

impl TimeLabel {
    pub fn raw(&self) -> String {
        match self {
            TimeLabel::Date(d) => d.format("%Y-%m-%d").to_string(),
            TimeLabel::Step(s) => s.to_string(),
        }
    }

    pub fn month_key(&self) -> Option<String> {
        match self {
            TimeLabel::Date(d) => Some(format!("{:04}-{:02}", d.year(), d.month())),
            TimeLabel::Step(_) => None,
        }
    }

    pub fn year_key(&self) -> Option<i32> {
        match self {
            TimeLabel::Date(d) => Some(d.year()),
            TimeLabel::Step(s) => i32::try_from(*s).ok(),
        }
    }
}

/// One location's series, column-aligned with the table's model names.
#[derive(Debug, Clone)]
pub struct LocationSeries {
    pub location: String,
    pub time: Vec<TimeLabel>,
    pub obs: Vec<f64>,
    pub models: Vec<Vec<f64>>,
}

/// A rectangular series table: a time column, one observation column, zero
/// or more model columns and an optional location key column.
#[derive(Debug, Clone)]
pub struct SeriesTable {
    pub model_names: Vec<String>,
    pub has_location: bool,
    pub locations: Vec<LocationSeries>,
}

impl SeriesTable {
    /// The single location of a table that must not be gridded.
    pub fn single_location(&self) -> anyhow::Result<&LocationSeries> {
        if self.locations.len() != 1 {
            bail!(
                "input has {} locations; this command expects exactly one",
                self.locations.len()
            );
        }
        Ok(&self.locations[0])
    }
}

fn parse_time(raw: &str, line: u64) -> anyhow::Result<TimeLabel> {
    if let Ok(step) = raw.parse::<i64>() {
        return Ok(TimeLabel::Step(step));
    }
    if let Ok(date) = NaiveDate::parse_from_str(raw, "%Y-%m-%d") {
        return Ok(TimeLabel::Date(date));
    }
    bail!("line {line}: cannot parse time label {raw:?} (integer step or YYYY-MM-DD)")
}

fn parse_value(raw: &str, column: &str, na: &str, line: u64) -> anyhow::Result<f64> {
    if raw.is_empty() || raw == na {
        bail!("line {line}: missing value in used column {column:?}");
    }
    let v: f64 = raw
        .parse()
        .with_context(|| format!("line {line}: cannot parse {raw:?} in column {column:?}"))?;
    if !v.is_finite() {
        bail!("line {line}: non-finite value in column {column:?}");
    }
    Ok(v)
}

/// Reads a series table. `value_mode` controls the schema: `false` expects
/// `time, obs, <models...> [, location]`; `true` expects
/// `time, value [, location]` (trend inputs) and yields one model column
/// named `value` with an empty observation vector unused.
pub fn read_table(path: &Path, na: &str, value_mode: bool) -> anyhow::Result<SeriesTable> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("opening {}", path.display()))?;
    let headers = reader
        .headers()
        .with_context(|| format!("reading header of {}", path.display()))?
        .clone();

    let mut time_col = None;
    let mut obs_col = None;
    let mut loc_col = None;
    let mut model_cols: Vec<(usize, String)> = Vec::new();
    let obs_name = if value_mode { "value" } else { "obs" };
    for (idx, name) in headers.iter().enumerate() {
        match name.to_ascii_lowercase().as_str() {
            "time" | "date" => time_col = Some(idx),
            "location" => loc_col = Some(idx),
            lower if lower == obs_name => obs_col = Some(idx),
            _ => model_cols.push((idx, name.to_string())),
        }
    }
    let time_col = time_col.context("input needs a `time` column")?;
    let obs_col = obs_col.with_context(|| format!("input needs a `{obs_name}` column"))?;
    if value_mode && !model_cols.is_empty() {
        bail!(
            "unexpected columns {:?} (expected time, value and optional location)",
            model_cols.iter().map(|(_, n)| n).collect::<Vec<_>>()
        );
    }

    let mut order: Vec<String> = Vec::new();
    let mut per_loc: BTreeMap<String, LocationSeries> = BTreeMap::new();
    for record in reader.records() {
        let record = record.context("reading CSV record")?;
        let line = record.position().map(|p| p.line()).unwrap_or_default();
        let loc = match loc_col {
            Some(c) => record.get(c).unwrap_or_default().to_string(),
            None => String::new(),
        };
        let entry = per_loc.entry(loc.clone()).or_insert_with(|| {
            order.push(loc.clone());
            LocationSeries {
                location: loc,
                time: Vec::new(),
                obs: Vec::new(),
                models: vec![Vec::new(); model_cols.len()],
            }
        });
        entry
            .time
            .push(parse_time(record.get(time_col).unwrap_or_default(), line)?);
        entry.obs.push(parse_value(
            record.get(obs_col).unwrap_or_default(),
            obs_name,
            na,
            line,
        )?);
        for (slot, (idx, name)) in model_cols.iter().enumerate() {
            entry.models[slot].push(parse_value(
                record.get(*idx).unwrap_or_default(),
                name,
                na,
                line,
            )?);
        }
    }
    if per_loc.is_empty() {
        bail!("{} contains no data rows", path.display());
    }
    let lengths: Vec<usize> = per_loc.values().map(|l| l.obs.len()).collect();
    if lengths.iter().any(|&l| l != lengths[0]) {
        bail!("per-location series lengths differ: {lengths:?}");
    }

    // locations in first-appearance order for stable reports
    let mut locations = Vec::with_capacity(order.len());
    for key in order {
        locations.push(per_loc.remove(&key).expect("tracked location"));
    }
    Ok(SeriesTable {
        model_names: model_cols.into_iter().map(|(_, n)| n).collect(),
        has_location: loc_col.is_some(),
        locations,
    })
}
