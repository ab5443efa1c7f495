use std::io::Write;
use std::path::Path;

use anyhow::Context;
use movescore::changepoint::pelt_detect;
use movescore::windows::{plan_windows, WindowKind, WindowPlan};

use crate::config::RunConfig;
use crate::report::out_file;
use crate::table::read_table;

pub fn parse_kinds(spec: &str) -> anyhow::Result<Vec<WindowKind>> {
    if spec.eq_ignore_ascii_case("all") {
        return Ok(WindowKind::ALL.to_vec());
    }
    let mut kinds = Vec::new();
    for part in spec.split(',') {
        kinds.push(part.trim().parse::<WindowKind>()?);
    }
    Ok(kinds)
}

/// Writes a plan as 1-based `t,lo,hi` rows.
pub fn write_plan(path: &Path, plan: &WindowPlan) -> anyhow::Result<()> {
    let mut file =
        std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    writeln!(file, "t,lo,hi")?;
    for t in 0..plan.len() {
        let (lo, hi) = plan.window(t);
        writeln!(file, "{},{},{}", t + 1, lo + 1, hi + 1)?;
    }
    Ok(())
}

/// Reads a plan emitted by [`write_plan`].
pub fn read_plan(path: &Path, kind: WindowKind) -> anyhow::Result<WindowPlan> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("opening plan {}", path.display()))?;
    let mut lo = Vec::new();
    let mut hi = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let t: usize = record.get(0).unwrap_or_default().parse()?;
        if t != i + 1 {
            anyhow::bail!("plan rows must be consecutive 1-based t values");
        }
        let l: usize = record.get(1).unwrap_or_default().parse()?;
        let h: usize = record.get(2).unwrap_or_default().parse()?;
        if l == 0 || h == 0 {
            anyhow::bail!("plan indices are 1-based");
        }
        lo.push(l - 1);
        hi.push(h - 1);
    }
    Ok(WindowPlan::new(kind, lo, hi)?)
}

pub fn run(input: &Path, kinds: &str, cfg: &RunConfig) -> anyhow::Result<()> {
    let table = read_table(input, &cfg.na, false)?;
    let loc = table.single_location()?;
    let pelt = cfg.pelt_config(loc.obs.len());
    let seg = pelt_detect(&loc.obs, &pelt)?;
    for kind in parse_kinds(kinds)? {
        let plan = plan_windows(kind, &seg);
        let name = format!("windows_{}.csv", kind.as_str().to_ascii_lowercase());
        let path = out_file(&cfg.out, &name)?;
        write_plan(&path, &plan)?;
        println!(
            "{kind}: n={} max width={} -> {}",
            plan.len(),
            plan.max_width(),
            path.display()
        );
    }
    Ok(())
}
