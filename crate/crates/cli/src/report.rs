//! Machine-readable verification reports: typed check rows, a canonical
//! JSON form, and CSV / text-table projections of the same rows.

use serde::{Deserialize, Serialize};

/// Output projection for tabular results.
#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Table,
}

/// Outcome of one check row.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Status {
    #[serde(rename = "PASS")]
    Pass,
    #[serde(rename = "FAIL")]
    Fail,
    #[serde(rename = "N/A")]
    NotApplicable,
    #[serde(rename = "INCONCLUSIVE")]
    Inconclusive,
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::NotApplicable => "N/A",
            Status::Inconclusive => "INCONCLUSIVE",
        };
        write!(f, "{s}")
    }
}

/// One check row. `witness` carries the numbers that justify the status;
/// `tolerance` states the bound the witness was held to (empty when the
/// check is exact or structural). Wall time is attached only on request,
/// so that default reports are byte-reproducible.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Row {
    pub suite: String,
    pub case: String,
    pub status: Status,
    pub witness: String,
    pub tolerance: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub wall_ms: Option<u64>,
}

impl Row {
    pub fn new(
        suite: impl Into<String>,
        case: impl Into<String>,
        status: Status,
        witness: impl Into<String>,
        tolerance: impl Into<String>,
    ) -> Self {
        Row {
            suite: suite.into(),
            case: case.into(),
            status,
            witness: witness.into(),
            tolerance: tolerance.into(),
            wall_ms: None,
        }
    }
}

/// A full report: tool version, the canonical echo of the configuration
/// that produced it, and the check rows sorted by `(suite, case)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Report {
    pub version: String,
    pub config: String,
    pub rows: Vec<Row>,
}

impl Report {
    /// Assemble a report; rows are sorted by `(suite, case)` so that the
    /// serialized form does not depend on execution order.
    pub fn new(config_echo: String, mut rows: Vec<Row>) -> Self {
        rows.sort_by(|a, b| (a.suite.as_str(), a.case.as_str()).cmp(&(b.suite.as_str(), b.case.as_str())));
        Report {
            version: env!("CARGO_PKG_VERSION").to_string(),
            config: config_echo,
            rows,
        }
    }

    /// Process exit code: 1 if any row failed, else 3 if any row was
    /// inconclusive, else 0.
    pub fn exit_code(&self) -> u8 {
        if self.rows.iter().any(|r| r.status == Status::Fail) {
            1
        } else if self.rows.iter().any(|r| r.status == Status::Inconclusive) {
            3
        } else {
            0
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(s: &str) -> Result<Report, String> {
        serde_json::from_str(s).map_err(|e| format!("bad report JSON: {e}"))
    }

    /// CSV projection: one line per row plus a header; carries every row
    /// of the JSON form.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("suite,case,status,witness,tolerance,wall_ms\n");
        for r in &self.rows {
            let wall = r.wall_ms.map(|w| w.to_string()).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                csv_field(&r.suite),
                csv_field(&r.case),
                r.status,
                csv_field(&r.witness),
                csv_field(&r.tolerance),
                wall
            ));
        }
        out
    }

    /// Aligned text table for terminals.
    pub fn to_table(&self) -> String {
        let headers = ["suite", "case", "status", "witness", "tolerance"];
        let mut widths: Vec<usize> = headers.iter().map(|h| h.len()).collect();
        let cells: Vec<[String; 5]> = self
            .rows
            .iter()
            .map(|r| {
                [
                    r.suite.clone(),
                    r.case.clone(),
                    r.status.to_string(),
                    r.witness.clone(),
                    r.tolerance.clone(),
                ]
            })
            .collect();
        for row in &cells {
            for (i, c) in row.iter().enumerate() {
                widths[i] = widths[i].max(c.len());
            }
        }
        let mut out = String::new();
        out.push_str(&format!("report version {} for config:\n", self.version));
        for line in self.config.lines() {
            out.push_str(&format!("  {line}\n"));
        }
        let mut line = String::new();
        for (i, h) in headers.iter().enumerate() {
            line.push_str(&format!("{:<w$}  ", h, w = widths[i]));
        }
        out.push_str(line.trim_end());
        out.push('\n');
        for row in &cells {
            let mut line = String::new();
            for (i, c) in row.iter().enumerate() {
                line.push_str(&format!("{:<w$}  ", c, w = widths[i]));
            }
            out.push_str(line.trim_end());
            out.push('\n');
        }
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
