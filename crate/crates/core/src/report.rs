//! Table rendering: CSV, Markdown and JSON.
//!
//! CSV numbers carry 12 significant digits and re-parse to the printed
//! value. Several tables in one CSV stream are separated by `# name`
//! comment lines. JSON output is an array of table objects, each with a
//! `schema_version`, its column names and one object per row.

use std::fmt::Write as _;
use std::str::FromStr;

use serde_json::{json, Map, Value};

use crate::analysis::{Analysis, CiMethod};
use crate::error::{Error, Result};
use crate::intervals::{BootMethod, Interval};
use crate::model::{Component, PerComponent, SeTriple, VarianceComponents};
use crate::resampling::Flavor;
use crate::simulation::ScenarioSummary;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Markdown,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "markdown" | "md" => Ok(Format::Markdown),
            "json" => Ok(Format::Json),
            _ => Err(Error::config(format!("unknown output format `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Text(String),
    Num(f64),
    Int(u64),
    Empty,
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as u64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: impl Into<String>, columns: &[&str]) -> Self {
        Self {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Value of the numeric cell in `column` of the first row whose leading
    /// text cells equal `key`.
    pub fn lookup(&self, key: &[&str], column: &str) -> Option<f64> {
        let col = self.columns.iter().position(|c| c == column)?;
        self.rows
            .iter()
            .find(|row| {
                key.iter()
                    .zip(row.iter())
                    .all(|(k, cell)| matches!(cell, Cell::Text(t) if t == k))
            })
            .and_then(|row| match row[col] {
                Cell::Num(x) => Some(x),
                _ => None,
            })
    }
}

/// `x` rounded to 12 significant digits, printed in shortest form.
pub fn format_number(x: f64) -> String {
    format_sig(x, 12)
}

fn format_sig(x: f64, digits: usize) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let rounded: f64 = format!("{:.*e}", digits - 1, x).parse().unwrap_or(x);
    let plain = format!("{rounded}");
    let sci = format!("{rounded:e}");
    if plain.len() <= sci.len() + 4 {
        plain
    } else {
        sci
    }
}

fn cell_text(cell: &Cell, digits: usize) -> String {
    match cell {
        Cell::Text(s) => s.clone(),
        Cell::Num(x) => format_sig(*x, digits),
        Cell::Int(i) => i.to_string(),
        Cell::Empty => String::new(),
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn render(tables: &[Table], format: Format) -> String {
    match format {
        Format::Csv => render_csv(tables),
        Format::Markdown => render_markdown(tables),
        Format::Json => render_json(tables),
    }
}

fn render_csv(tables: &[Table]) -> String {
    let mut out = String::new();
    for (i, t) in tables.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let _ = writeln!(out, "# {}", t.name);
        let header: Vec<String> = t.columns.iter().map(|c| csv_field(c)).collect();
        let _ = writeln!(out, "{}", header.join(","));
        for row in &t.rows {
            let fields: Vec<String> = row.iter().map(|c| csv_field(&cell_text(c, 12))).collect();
            let _ = writeln!(out, "{}", fields.join(","));
        }
    }
    out
}

fn render_markdown(tables: &[Table]) -> String {
    let mut out = String::new();
    for (i, t) in tables.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let _ = writeln!(out, "### {}\n", t.name);
        let _ = writeln!(out, "| {} |", t.columns.join(" | "));
        let rule: Vec<&str> = t
            .columns
            .iter()
            .enumerate()
            .map(|(j, _)| {
                let numeric = t.rows.iter().any(|r| matches!(r[j], Cell::Num(_) | Cell::Int(_)));
                if numeric {
                    "---:"
                } else {
                    "---"
                }
            })
            .collect();
        let _ = writeln!(out, "| {} |", rule.join(" | "));
        for row in &t.rows {
            let cells: Vec<String> = row.iter().map(|c| cell_text(c, 6)).collect();
            let _ = writeln!(out, "| {} |", cells.join(" | "));
        }
    }
    out
}

fn render_json(tables: &[Table]) -> String {
    let values: Vec<Value> = tables
        .iter()
        .map(|t| {
            let rows: Vec<Value> = t
                .rows
                .iter()
                .map(|row| {
                    let mut obj = Map::new();
                    for (col, cell) in t.columns.iter().zip(row) {
                        let v = match cell {
                            Cell::Text(s) => Value::String(s.clone()),
                            Cell::Num(x) => serde_json::Number::from_f64(*x)
                                .map_or(Value::Null, Value::Number),
                            Cell::Int(i) => json!(i),
                            Cell::Empty => Value::Null,
                        };
                        obj.insert(col.clone(), v);
                    }
                    Value::Object(obj)
                })
                .collect();
            json!({
                "schema_version": SCHEMA_VERSION,
                "name": t.name,
                "columns": t.columns,
                "rows": rows,
            })
        })
        .collect();
    let mut s = serde_json::to_string_pretty(&Value::Array(values)).unwrap_or_default();
    s.push('\n');
    s
}

fn component_columns(suffixes: &[&str]) -> Vec<String> {
    let mut cols = Vec::new();
    for c in Component::ALL {
        for s in suffixes {
            cols.push(if s.is_empty() {
                c.label().to_string()
            } else {
                format!("{}_{s}", c.label())
            });
        }
    }
    cols
}

fn with_columns(name: &str, lead: &[&str], suffixes: &[&str]) -> Table {
    let mut cols: Vec<String> = lead.iter().map(|s| s.to_string()).collect();
    cols.extend(component_columns(suffixes));
    Table {
        name: name.to_string(),
        columns: cols,
        rows: Vec::new(),
    }
}

fn estimate_cells(v: &VarianceComponents, se: Option<&SeTriple>, scale: f64) -> Vec<Cell> {
    let mut out = Vec::with_capacity(6);
    for c in Component::ALL {
        out.push(Cell::Num(v.get(c) * scale));
        out.push(match se {
            Some(se) => Cell::Num(se.get(c) * scale),
            None => Cell::Empty,
        });
    }
    out
}

fn interval_cells(ivs: &PerComponent<Option<Interval>>, scale: f64) -> Vec<Cell> {
    let mut out = Vec::with_capacity(9);
    for c in Component::ALL {
        match ivs.get(c) {
            Some(iv) => {
                out.push(Cell::Num(iv.lower * scale));
                out.push(Cell::Num(iv.upper * scale));
                out.push(Cell::Num(iv.width() * scale));
            }
            None => out.extend([Cell::Empty, Cell::Empty, Cell::Empty]),
        }
    }
    out
}

/// Point estimates in the case-study layout: ANOVA, then one block per
/// selected flavor. Bias-corrected rows leave the SE cells empty since
/// they equal the bootstrap-mean SEs.
pub fn point_estimate_table(a: &Analysis, flavors: &[Flavor], scale: f64) -> Table {
    let mut t = with_columns("point estimates", &["block", "estimator"], &["", "se"]);
    let mut row = vec![Cell::from("ANOVA"), Cell::from("ANOVA")];
    row.extend(estimate_cells(&a.anova, Some(&a.anova_se.se), scale));
    t.push(row);
    for &flavor in flavors {
        for s in &a.schemes {
            let (v, se) = match flavor {
                Flavor::RawMean => (&s.means, Some(&s.ses)),
                Flavor::BiasCorrected => (&s.bias_corrected, None),
                Flavor::Adjusted => (&s.adjusted, Some(&s.adjusted_ses)),
            };
            let mut row = vec![Cell::from(flavor.label()), Cell::from(s.scheme.label())];
            row.extend(estimate_cells(v, se, scale));
            t.push(row);
        }
    }
    t
}

/// Confidence intervals in the case-study layout: the approximate row
/// first, then bootstrap rows grouped by flavor and method.
pub fn interval_table(a: &Analysis, ci_methods: &[CiMethod], scale: f64) -> Table {
    let mut t = with_columns(
        "confidence intervals",
        &["flavor", "estimator", "method"],
        &["lower", "upper", "range"],
    );
    if Component::ALL.iter().any(|&c| a.approx.get(c).is_some()) {
        let mut row = vec![Cell::from("approx"), Cell::from("Approx"), Cell::from("-")];
        row.extend(interval_cells(&a.approx, scale));
        t.push(row);
    }
    for flavor in [Flavor::RawMean, Flavor::Adjusted] {
        for method in BootMethod::ALL {
            if !ci_methods.contains(&CiMethod::Boot(method)) {
                continue;
            }
            for s in &a.schemes {
                let Some(b) = s
                    .intervals
                    .iter()
                    .find(|b| b.flavor == flavor && b.method == method)
                else {
                    continue;
                };
                let mut row = vec![
                    Cell::from(flavor.label()),
                    Cell::from(s.scheme.label()),
                    Cell::from(method.label()),
                ];
                row.extend(interval_cells(&b.intervals.map(|iv| Some(*iv)), scale));
                t.push(row);
            }
        }
    }
    t
}

/// Two tables per scenario: mean estimates and SEs, then interval
/// averages with coverage.
pub fn scenario_tables(s: &ScenarioSummary) -> [Table; 2] {
    let sc = &s.scenario;
    let tag = format!(
        "k={} n={} ratio={} M={} R={} alpha={} seed={}",
        sc.k, sc.n, sc.ratio, sc.m_boot, sc.r_mc, sc.alpha, sc.seed
    );
    let mut est = with_columns(&format!("estimates {tag}"), &["estimator"], &["mean", "se"]);
    let mut ci = with_columns(
        &format!("intervals {tag}"),
        &["estimator", "method"],
        &["lower", "upper", "width", "cp"],
    );
    for row in &s.rows {
        let label = row.estimator.to_string();
        let mut cells = vec![Cell::from(label.clone())];
        cells.extend(estimate_cells(&row.mean_estimate, Some(&row.mean_se), 1.0));
        est.push(cells);
        for (kind, stats) in &row.intervals {
            let mut cells = vec![Cell::from(label.clone()), Cell::from(kind.to_string())];
            for c in Component::ALL {
                let st = stats.get(c);
                cells.extend([
                    Cell::Num(st.mean_lower),
                    Cell::Num(st.mean_upper),
                    Cell::Num(st.mean_width),
                    Cell::Num(st.coverage),
                ]);
            }
            ci.push(cells);
        }
    }
    [est, ci]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip_at_twelve_digits() {
        for x in [10.773_642_857_142_857, -0.000_123_456_789_012_34, 1e-9, 123_456.0, 0.1] {
            let s = format_number(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back, format!("{x:.11e}").parse::<f64>().unwrap(), "{s}");
        }
        assert_eq!(format_number(0.0), "0");
        assert_eq!(format_number(2.5), "2.5");
    }

    #[test]
    fn csv_and_json_shapes() {
        let mut t = Table::new("demo", &["name", "x"]);
        t.push(vec!["a,b".into(), 1.5.into()]);
        t.push(vec!["c".into(), Cell::Empty]);
        let csv = render(&[t.clone()], Format::Csv);
        assert_eq!(csv, "# demo\nname,x\n\"a,b\",1.5\nc,\n");
        let json: Value = serde_json::from_str(&render(&[t.clone()], Format::Json)).unwrap();
        assert_eq!(json[0]["schema_version"], 1);
        assert_eq!(json[0]["rows"][0]["x"], 1.5);
        assert!(json[0]["rows"][1]["x"].is_null());
        let md = render(&[t], Format::Markdown);
        assert!(md.contains("| name | x |"));
    }

    #[test]
    fn lookup_finds_rows() {
        let mut t = Table::new("demo", &["a", "b", "v"]);
        t.push(vec!["x".into(), "y".into(), 2.0.into()]);
        assert_eq!(t.lookup(&["x", "y"], "v"), Some(2.0));
        assert_eq!(t.lookup(&["x", "z"], "v"), None);
    }
}
