use std::io::Write;
use std::path::Path;

use anyhow::Context;
use movescore::changepoint::{objective_value, pelt_detect, segment_stats};

use crate::config::RunConfig;
use crate::report::{fmt_full, out_file, write_json};
use crate::table::read_table;

pub fn run(input: &Path, cfg: &RunConfig) -> anyhow::Result<()> {
    let table = read_table(input, &cfg.na, false)?;

    let csv_path = out_file(&cfg.out, "segments.csv")?;
    let mut csv = std::fs::File::create(&csv_path)
        .with_context(|| format!("creating {}", csv_path.display()))?;
    if table.has_location {
        writeln!(csv, "location,segment,start,end,length,mean,sd")?;
    } else {
        writeln!(csv, "segment,start,end,length,mean,sd")?;
    }

    let mut json_series = Vec::new();
    for loc in &table.locations {
        let n = loc.obs.len();
        let pelt = cfg.pelt_config(n);
        let seg = pelt_detect(&loc.obs, &pelt)
            .with_context(|| format!("detecting changepoints for location {:?}", loc.location))?;
        let stats = segment_stats(&loc.obs, &seg, &pelt)?;
        let objective = objective_value(&loc.obs, &seg, &pelt)?;

        for (j, ((start, end), st)) in seg.segments().iter().zip(stats.iter()).enumerate() {
            let row = format!(
                "{},{},{},{},{},{}",
                j + 1,
                start + 1,
                end,
                st.len,
                fmt_full(st.mean),
                fmt_full(st.variance.sqrt())
            );
            if table.has_location {
                writeln!(csv, "{},{}", loc.location, row)?;
            } else {
                writeln!(csv, "{row}")?;
            }
        }
        json_series.push(serde_json::json!({
            "location": loc.location,
            "n": n,
            "changepoints": seg.changepoints(),
            "num_changepoints": seg.num_changepoints(),
            "objective": objective,
        }));
        println!(
            "{}n={} m={} changepoints={:?} objective={:.4}",
            if table.has_location {
                format!("location {}: ", loc.location)
            } else {
                String::new()
            },
            n,
            seg.num_changepoints(),
            seg.changepoints(),
            objective
        );
    }

    let json_path = out_file(&cfg.out, "detect.json")?;
    write_json(
        &json_path,
        &serde_json::json!({
            "penalty_p": cfg.penalty_p,
            "min_seg_len": cfg.min_seg_len,
            "variance_floor": cfg.variance_floor,
            "series": json_series,
        }),
    )?;
    Ok(())
}
