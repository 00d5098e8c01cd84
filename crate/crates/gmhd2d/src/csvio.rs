//! CSV emission. Floats print via Rust's shortest-roundtrip formatting, so
//! identical numeric content always produces byte-identical files — the
//! restart and sweep reproducibility contracts compare bytes.

use gmhd2d_core::diagnostics::NormSeries;
use std::io::Write;
use std::path::Path;

pub fn series_to_string(series: &NormSeries) -> String {
    let mut out = String::new();
    out.push_str(&series.columns().join(","));
    out.push('\n');
    for row in series.rows() {
        let mut first = true;
        for v in row {
            if !first {
                out.push(',');
            }
            first = false;
            out.push_str(&format_value(*v));
        }
        out.push('\n');
    }
    out
}

pub fn write_series(path: &Path, series: &NormSeries) -> std::io::Result<()> {
    let mut file = std::fs::File::create(path)?;
    file.write_all(series_to_string(series).as_bytes())?;
    file.sync_all()
}

/// Shortest-roundtrip decimal; NaN/Inf are written literally (they can only
/// appear in a terminal blow-up marker row).
pub fn format_value(v: f64) -> String {
    format!("{v}")
}
