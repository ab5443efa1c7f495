use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use anyhow::Context;
use movescore::trend::{annual_means, ols_trend, trend_error_table};

use crate::config::RunConfig;
use crate::report::{fmt_full, out_file, write_json};
use crate::table::read_table;

/// Decadal slopes (slope per year times ten) per location.
fn decadal_slopes(path: &Path, na: &str) -> anyhow::Result<BTreeMap<String, f64>> {
    let table = read_table(path, na, true)?;
    let mut slopes = BTreeMap::new();
    for loc in &table.locations {
        let years: Vec<i32> = loc
            .time
            .iter()
            .map(|t| {
                t.year_key()
                    .context("trend inputs need date or integer-year time labels")
            })
            .collect::<anyhow::Result<_>>()?;
        let annual = annual_means(&loc.obs, &years)?;
        let fit = ols_trend(&annual)
            .with_context(|| format!("fitting trend for location {:?}", loc.location))?;
        slopes.insert(loc.location.clone(), 10.0 * fit.slope);
    }
    Ok(slopes)
}

pub fn run(model: &Path, reference: &Path, cfg: &RunConfig) -> anyhow::Result<()> {
    let model_slopes = decadal_slopes(model, &cfg.na)?;
    let ref_slopes = decadal_slopes(reference, &cfg.na)?;
    let table = trend_error_table(&model_slopes, &ref_slopes)?;

    let csv_path = out_file(&cfg.out, "trend.csv")?;
    let mut csv = std::fs::File::create(&csv_path)
        .with_context(|| format!("creating {}", csv_path.display()))?;
    writeln!(
        csv,
        "location,model_slope_decadal,reference_slope_decadal,abs_error_decadal"
    )?;
    for (loc, err) in &table.per_location {
        writeln!(
            csv,
            "{},{},{},{}",
            loc,
            fmt_full(model_slopes[loc]),
            fmt_full(ref_slopes[loc]),
            fmt_full(*err)
        )?;
    }

    let json_path = out_file(&cfg.out, "trend.json")?;
    write_json(
        &json_path,
        &serde_json::json!({
            "per_location": table.per_location,
            "spatial_mean_decadal": table.spatial_mean,
        }),
    )?;

    println!(
        "absolute decadal trend error over {} locations: mean {:.3}",
        table.per_location.len(),
        table.spatial_mean
    );
    Ok(())
}
