//! CSV and JSON emitters.
//!
//! CSV dialect: comma separated, `.` decimal point, 17 significant digits,
//! `\n` line endings, leading `#` metadata lines, then a header row.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use spinmetro::Table;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Renders `table` with a metadata line naming the command and seed, and an
/// optional parameter line.
pub fn render_csv(table: &Table, command: &str, seed: u64, params: &[(&str, String)]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# spinmetro version={VERSION} seed={seed} command={command}");
    if !params.is_empty() {
        let joined: Vec<String> = params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        let _ = writeln!(s, "# params {}", joined.join(" "));
    }
    s.push_str(&table.columns.join(","));
    s.push('\n');
    for row in &table.rows {
        let cells: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(k, v)| {
                if k < table.integer_columns {
                    format!("{}", *v as i64)
                } else {
                    format_float(*v)
                }
            })
            .collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

/// Writes to `path`, or to stdout when `path` is `None`.
pub fn emit(path: Option<&Path>, content: &str) -> std::io::Result<()> {
    match path {
        Some(p) => std::fs::write(p, content),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(content.as_bytes())?;
            out.flush()
        }
    }
}
