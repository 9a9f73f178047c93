//! Report schema and emission. All floating-point output is serialized as
//! fixed-format strings with 17 significant digits so that golden files
//! round-trip exactly and byte comparison is meaningful.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::config::{CliResult, ExperimentConfig};

/// 17 significant digits: round-trip exact for f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, Serialize)]
pub struct Invariant {
    pub name: String,
    pub pass: bool,
    pub residual: String,
}

impl Invariant {
    pub fn checked(name: &str, residual: f64, tol: f64) -> Self {
        Self { name: name.to_string(), pass: residual <= tol, residual: fmt_f64(residual) }
    }

    pub fn boolean(name: &str, pass: bool) -> Self {
        Self { name: name.to_string(), pass, residual: fmt_f64(if pass { 0.0 } else { 1.0 }) }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub experiment: String,
    pub config_echo: ExperimentConfig,
    pub invariants: Vec<Invariant>,
    pub tables: BTreeMap<String, Table>,
}

/// The theta-independent part of a report: invariants and tables only, no
/// config echo.
#[derive(Debug, Serialize)]
struct ReportBody<'a> {
    invariants: &'a [Invariant],
    tables: &'a BTreeMap<String, Table>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Csv,
    Both,
}

impl OutputFormat {
    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "json" => Some(Self::Json),
            "csv" => Some(Self::Csv),
            "both" => Some(Self::Both),
            _ => None,
        }
    }
}

impl Report {
    pub fn new(experiment: &str, config: &ExperimentConfig) -> Self {
        Self {
            experiment: experiment.to_string(),
            config_echo: config.clone(),
            invariants: Vec::new(),
            tables: BTreeMap::new(),
        }
    }

    pub fn all_pass(&self) -> bool {
        self.invariants.iter().all(|i| i.pass)
    }

    pub fn add_invariant(&mut self, invariant: Invariant) {
        self.invariants.push(invariant);
    }

    pub fn add_table(&mut self, name: &str, table: Table) {
        self.tables.insert(name.to_string(), table);
    }

    pub fn to_json(&self) -> CliResult<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Serialized invariants + tables, without the config echo; byte-equal
    /// across theta specs for theta-independent content.
    pub fn body_json(&self) -> CliResult<String> {
        Ok(serde_json::to_string_pretty(&ReportBody {
            invariants: &self.invariants,
            tables: &self.tables,
        })?)
    }

    /// Write `<experiment>.json` and/or one `<experiment>_<table>.csv` per
    /// table into `out_dir`.
    pub fn write(&self, out_dir: &Path, format: OutputFormat) -> CliResult<Vec<String>> {
        fs::create_dir_all(out_dir)?;
        let mut written = Vec::new();
        if matches!(format, OutputFormat::Json | OutputFormat::Both) {
            let name = format!("{}.json", self.experiment);
            fs::write(out_dir.join(&name), self.to_json()?)?;
            written.push(name);
        }
        if matches!(format, OutputFormat::Csv | OutputFormat::Both) {
            for (table_name, table) in &self.tables {
                let name = format!("{}_{}.csv", self.experiment, table_name);
                fs::write(out_dir.join(&name), table.to_csv())?;
                written.push(name);
            }
        }
        Ok(written)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{default_config, Experiment};

    #[test]
    fn float_format_is_17_significant_digits_and_round_trips() {
        for x in [0.1, -3.25e-12, 1.0 / 3.0, 6.02214076e23, 0.0] {
            let s = fmt_f64(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{s}");
        }
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
    }

    #[test]
    fn csv_has_header_and_one_line_per_row() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec!["1".into(), "2".into()]);
        t.push(vec!["3".into(), "4".into()]);
        assert_eq!(t.to_csv(), "a,b\n1,2\n3,4\n");
    }

    #[test]
    fn report_writes_expected_files() {
        let dir = tempfile::tempdir().unwrap();
        let config = default_config(Experiment::Axioms, 1);
        let mut report = Report::new("axioms", &config);
        report.add_invariant(Invariant::checked("demo", 0.0, 1.0));
        let mut t = Table::new(&["x"]);
        t.push(vec![fmt_f64(1.5)]);
        report.add_table("demo_table", t);
        let written = report.write(dir.path(), OutputFormat::Both).unwrap();
        assert_eq!(written, vec!["axioms.json", "axioms_demo_table.csv"]);
        let json = std::fs::read_to_string(dir.path().join("axioms.json")).unwrap();
        assert!(json.contains("\"experiment\": \"axioms\""));
        assert!(report.all_pass());
    }
}
