use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;

/// Creates the output directory and returns a path inside it.
pub fn out_file(out_dir: &Path, name: &str) -> anyhow::Result<PathBuf> {
    fs::create_dir_all(out_dir)
        .with_context(|| format!("creating output directory {}", out_dir.display()))?;
    Ok(out_dir.join(name))
}

/// Writes pretty JSON with a trailing newline.
pub fn write_json(path: &Path, value: &serde_json::Value) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Full-precision float formatting for CSV output (shortest round-trip).
pub fn fmt_full(v: f64) -> String {
    format!("{v}")
}
