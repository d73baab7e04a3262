//! Report emission: atomic file writes, CSV formatting (header row, full
//! double precision, dot separator, LF endings), and the seed stamp every
//! output carries.

use anyhow::{Context, Result};
use std::fs;
use std::io::Write;
use std::path::Path;

/// Shortest round-trip decimal form of an f64.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x}")
    }
}

/// Assemble a CSV document: seed comment, header, rows, LF endings.
pub fn csv_document(seed: u64, header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    out.push_str(&format!("# seed={seed}\n"));
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Write via a temp file in the same directory plus rename, so an
/// interrupted run never leaves a truncated report at the final path.
pub fn write_atomic(path: &Path, content: &str) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let tmp = match dir {
        Some(d) => d.join(format!(
            ".{}.tmp",
            path.file_name().map(|s| s.to_string_lossy()).unwrap_or_default()
        )),
        None => Path::new(&format!(
            ".{}.tmp",
            path.file_name().map(|s| s.to_string_lossy()).unwrap_or_default()
        ))
        .to_path_buf(),
    };
    {
        let mut f = fs::File::create(&tmp)
            .with_context(|| format!("creating {}", tmp.display()))?;
        f.write_all(content.as_bytes())?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
        .with_context(|| format!("renaming {} to {}", tmp.display(), path.display()))?;
    Ok(())
}

/// Emit to the given path atomically, or to stdout when no path is set.
pub fn emit(path: Option<&Path>, content: &str) -> Result<()> {
    match path {
        Some(p) => write_atomic(p, content),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}
