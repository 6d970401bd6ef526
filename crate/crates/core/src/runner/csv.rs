//! CSV output with config-echo metadata.
//!
//! Floats are rendered with Rust's shortest round-trip formatting, so a
//! rerun that computes identical values writes identical bytes. The
//! wall-clock never appears in a CSV; it goes to `run_info.txt`.

use std::path::Path;

use super::config::Config;
use crate::Result;

/// One output table: a file name, a header row and string-rendered rows.
#[derive(Clone, Debug)]
pub struct CsvTable {
    pub name: String,
    /// Extra `# key = value` metadata lines, after the config echo.
    pub meta: Vec<(String, String)>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            meta: Vec::new(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: &str, value: impl std::fmt::Display) {
        self.meta.push((key.to_string(), value.to_string()));
    }

    pub fn row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.header.len());
        self.rows.push(cells);
    }

    /// Renders the full file contents.
    pub fn render(&self, experiment: &str, config: &Config) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "# spincorr v{} experiment={experiment}\n",
            env!("CARGO_PKG_VERSION")
        ));
        out.push_str(&format!("# config_hash = {}\n", config.hash()));
        for (k, v) in config.entries() {
            out.push_str(&format!("# cfg {k} = {v}\n"));
        }
        for (k, v) in &self.meta {
            out.push_str(&format!("# {k} = {v}\n"));
        }
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Shortest round-trip decimal rendering of a float.
pub fn fmt(v: f64) -> String {
    format!("{v}")
}

/// Writes every table under `out_dir` and a `run_info.txt` holding the
/// wall-clock, which is deliberately kept out of the data files.
pub fn write_tables(
    out_dir: &Path,
    experiment: &str,
    config: &Config,
    tables: &[CsvTable],
    wall_seconds: f64,
) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    for table in tables {
        let path = out_dir.join(&table.name);
        std::fs::write(&path, table.render(experiment, config))?;
    }
    let info = format!(
        "experiment = {experiment}\nconfig_hash = {}\nwall_seconds = {wall_seconds:.3}\nversion = {}\n",
        config.hash(),
        env!("CARGO_PKG_VERSION"),
    );
    std::fs::write(out_dir.join("run_info.txt"), info)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_is_deterministic_and_roundtrips_floats() {
        let cfg = Config::from_entries(&[("a", "5"), ("gamma", "2.835")]);
        let mut t = CsvTable::new("x.csv", &["n", "value"]);
        t.meta("note", "demo");
        t.row(vec!["0".into(), fmt(0.1 + 0.2)]);
        let r1 = t.render("relax", &cfg);
        let r2 = t.render("relax", &cfg);
        assert_eq!(r1, r2);
        assert!(r1.contains("# config_hash = "));
        assert!(r1.contains("# cfg a = 5"));
        assert!(r1.contains("# note = demo"));
        assert!(r1.contains("0.30000000000000004"));
        let reparsed: f64 = "0.30000000000000004".parse().unwrap();
        assert_eq!(reparsed, 0.1 + 0.2);
    }
}
