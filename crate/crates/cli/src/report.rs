//! Report records and their emission as JSON, CSV, and plain text.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::{GridConfig, SuiteConfig};
use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
    /// Computed and reported, nothing asserted.
    Info,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub relation: Relation,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    /// NaN never passes.
    pub fn at_most(name: &str, value: f64, threshold: f64) -> Self {
        Self {
            name: name.to_string(),
            value,
            relation: Relation::AtMost,
            threshold,
            pass: value <= threshold,
        }
    }

    pub fn at_least(name: &str, value: f64, threshold: f64) -> Self {
        Self {
            name: name.to_string(),
            value,
            relation: Relation::AtLeast,
            threshold,
            pass: value >= threshold,
        }
    }

    pub fn holds(name: &str, ok: bool) -> Self {
        Self::at_least(name, if ok { 1.0 } else { 0.0 }, 1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub description: String,
}

/// Tabular data exported as one CSV file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub name: String,
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<f64>>,
}

impl Profile {
    pub fn new(name: &str, columns: &[(&str, &str)]) -> Self {
        Self {
            name: name.to_string(),
            columns: columns
                .iter()
                .map(|(n, d)| Column {
                    name: n.to_string(),
                    description: d.to_string(),
                })
                .collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// Discretization a record was computed on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridMeta {
    pub half_width: f64,
    pub points: usize,
    pub h: f64,
    /// Truncation box `[lo, hi)` of the spatial lattice.
    pub truncation_box: [f64; 2],
    pub a_min: f64,
    pub a_max: f64,
    pub voices: usize,
    pub translation_spacing: f64,
}

impl From<&GridConfig> for GridMeta {
    fn from(g: &GridConfig) -> Self {
        Self {
            half_width: g.half_width,
            points: g.points,
            h: g.spacing_h(),
            truncation_box: [-g.half_width, g.half_width],
            a_min: g.a_min,
            a_max: g.a_max,
            voices: g.voices,
            translation_spacing: g.spacing,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub diagnostic: String,
    /// Operator, symbol, or example the record is about.
    pub subject: String,
    pub verdict: Verdict,
    pub grid: GridMeta,
    pub checks: Vec<Check>,
    pub values: BTreeMap<String, f64>,
    pub profiles: Vec<Profile>,
    pub notes: Vec<String>,
}

impl Record {
    pub fn new(diagnostic: &str, subject: &str, grid: &GridConfig) -> Self {
        Self {
            diagnostic: diagnostic.to_string(),
            subject: subject.to_string(),
            verdict: Verdict::Info,
            grid: grid.into(),
            checks: Vec::new(),
            values: BTreeMap::new(),
            profiles: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn value(&mut self, name: &str, v: f64) -> &mut Self {
        self.values.insert(name.to_string(), v);
        self
    }

    pub fn check(&mut self, c: Check) -> &mut Self {
        self.checks.push(c);
        self
    }

    pub fn note(&mut self, n: impl Into<String>) -> &mut Self {
        self.notes.push(n.into());
        self
    }

    /// FAIL if any check fails, PASS if there is at least one check.
    pub fn finish(mut self) -> Self {
        self.verdict = if self.checks.iter().any(|c| !c.pass) {
            Verdict::Fail
        } else if self.checks.is_empty() {
            Verdict::Info
        } else {
            Verdict::Pass
        };
        self
    }

    pub fn find_check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn find_profile(&self, name: &str) -> Option<&Profile> {
        self.profiles.iter().find(|p| p.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub seed: u64,
    pub config: SuiteConfig,
    pub records: Vec<Record>,
    pub verdict: Verdict,
}

impl Report {
    pub fn new(config: &SuiteConfig, records: Vec<Record>) -> Self {
        let verdict = if records.iter().any(|r| r.verdict == Verdict::Fail) {
            Verdict::Fail
        } else {
            Verdict::Pass
        };
        Self {
            seed: config.seed,
            config: config.clone(),
            records,
            verdict,
        }
    }

    pub fn find(&self, diagnostic: &str, subject: &str) -> Option<&Record> {
        self.records
            .iter()
            .find(|r| r.diagnostic == diagnostic && r.subject == subject)
    }
}

/// Decimal with nine significant digits; scientific outside `[1e-4, 1e9)`.
pub fn format_sig(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return if v.is_nan() { "nan".into() } else if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let mag = v.abs().log10().floor() as i32;
    if (-4..9).contains(&mag) {
        format!("{:.*}", (8 - mag).max(0) as usize, v)
    } else {
        format!("{v:.8e}")
    }
}

fn slug(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '.' || c == '-' { c } else { '_' })
        .collect()
}

pub fn csv_name(record: &Record, profile: &Profile) -> String {
    format!("{}__{}__{}.csv", slug(&record.diagnostic), slug(&record.subject), slug(&profile.name))
}

pub fn render_csv(record: &Record, profile: &Profile) -> String {
    let g = &record.grid;
    let mut out = String::new();
    let _ = writeln!(out, "# {} / {} / {}", record.diagnostic, record.subject, profile.name);
    let _ = writeln!(
        out,
        "# grid: box [{}, {}), N = {}, h = {}, a in [{}, {}], {} voices, translation step {} a",
        g.truncation_box[0], g.truncation_box[1], g.points, g.h, g.a_min, g.a_max, g.voices, g.translation_spacing
    );
    for c in &profile.columns {
        let _ = writeln!(out, "# {}: {}", c.name, c.description);
    }
    let header: Vec<&str> = profile.columns.iter().map(|c| c.name.as_str()).collect();
    let _ = writeln!(out, "{}", header.join(","));
    for row in &profile.rows {
        let cells: Vec<String> = row.iter().map(|v| format_sig(*v)).collect();
        let _ = writeln!(out, "{}", cells.join(","));
    }
    out
}

pub fn render_summary(report: &Report) -> String {
    let mut out = String::new();
    let g = GridMeta::from(&report.config.grid);
    let _ = writeln!(out, "czframe suite report");
    let _ = writeln!(
        out,
        "grid: box [{}, {}), N = {}, h = {}, a in [{}, {}], {} voices, translation step {} a",
        g.truncation_box[0], g.truncation_box[1], g.points, g.h, g.a_min, g.a_max, g.voices, g.translation_spacing
    );
    let _ = writeln!(out, "seed: {}", report.seed);
    let _ = writeln!(out);
    for r in &report.records {
        let v = match r.verdict {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Info => "INFO",
        };
        let _ = writeln!(out, "{v} {} [{}]", r.diagnostic, r.subject);
        for c in &r.checks {
            let rel = match c.relation {
                Relation::AtMost => "<=",
                Relation::AtLeast => ">=",
            };
            let mark = if c.pass { "ok  " } else { "FAIL" };
            let _ = writeln!(
                out,
                "    {mark} {} = {} (required {rel} {})",
                c.name,
                format_sig(c.value),
                format_sig(c.threshold)
            );
        }
        for (k, v) in &r.values {
            let _ = writeln!(out, "    {k} = {}", format_sig(*v));
        }
        for n in &r.notes {
            let _ = writeln!(out, "    note: {n}");
        }
    }
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "suite verdict: {}",
        if report.verdict == Verdict::Pass { "PASS" } else { "FAIL" }
    );
    out
}

fn write(path: PathBuf, contents: &str) -> Result<PathBuf, CliError> {
    std::fs::write(&path, contents).map_err(|source| CliError::Io {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

/// Writes `report.json`, one CSV per profile, and `summary.txt`; returns the
/// written paths in order.
pub fn emit(report: &Report, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut json = serde_json::to_string_pretty(report).map_err(|e| CliError::Config(e.to_string()))?;
    json.push('\n');
    let mut written = vec![write(dir.join("report.json"), &json)?];
    for r in &report.records {
        for p in &r.profiles {
            written.push(write(dir.join(csv_name(r, p)), &render_csv(r, p))?);
        }
    }
    written.push(write(dir.join("summary.txt"), &render_summary(report))?);
    Ok(written)
}
