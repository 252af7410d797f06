use std::fs;
use std::io::{self, Write};
use std::path::Path;

use boson_moments::io::CsvTable;
use serde_json::Value;

pub struct Report {
    pub tables: Vec<CsvTable>,
    pub summary: Value,
}

/// Tables then the summary: to stdout as `# name` blocks followed by one
/// JSON line, or as files in `out`.
pub fn emit(report: &Report, out: Option<&Path>) -> io::Result<()> {
    match out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            for t in &report.tables {
                fs::write(dir.join(format!("{}.csv", t.name)), t.render())?;
            }
            let mut summary = serde_json::to_string_pretty(&report.summary)?;
            summary.push('\n');
            fs::write(dir.join("summary.json"), summary)
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            for t in &report.tables {
                writeln!(w, "# {}", t.name)?;
                w.write_all(t.render().as_bytes())?;
            }
            writeln!(w, "{}", serde_json::to_string(&report.summary)?)
        }
    }
}
