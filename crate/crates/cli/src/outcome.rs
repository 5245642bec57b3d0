use carrier_core::io::{Csv, CsvCell};
use serde::Serialize;

pub const CSV_HEADER: [&str; 7] = ["graph", "center", "xi", "r", "epsilon", "quantity", "value"];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Result of one experiment sweep before it is written out.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub checks: Vec<Check>,
    pub rows: Csv,
    pub report: serde_json::Value,
    /// Extra artifacts as (file name, contents).
    pub files: Vec<(String, String)>,
}

impl Default for Outcome {
    fn default() -> Self {
        Outcome { checks: vec![], rows: Csv::new(&CSV_HEADER), report: serde_json::Value::Null, files: vec![] }
    }
}

/// One CSV row; unset coordinates are left blank.
#[derive(Debug, Clone, Default)]
pub struct Row<'a> {
    pub graph: &'a str,
    pub center: Option<usize>,
    pub xi: Option<f64>,
    pub r: Option<f64>,
    pub epsilon: Option<f64>,
}

impl<'a> Row<'a> {
    pub fn on(graph: &'a str) -> Self {
        Row { graph, ..Row::default() }
    }
    pub fn center(mut self, v: usize) -> Self {
        self.center = Some(v);
        self
    }
    pub fn xi(mut self, xi: f64) -> Self {
        self.xi = Some(xi);
        self
    }
    pub fn r(mut self, r: f64) -> Self {
        self.r = Some(r);
        self
    }
    pub fn eps(mut self, e: f64) -> Self {
        self.epsilon = Some(e);
        self
    }
}

fn opt(x: Option<f64>) -> CsvCell {
    x.map_or(CsvCell::Text(String::new()), CsvCell::Num)
}

impl Outcome {
    pub fn check(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check { name: name.into(), passed, detail: detail.into() });
    }

    pub fn row(&mut self, at: &Row, quantity: &str, value: f64) {
        self.rows.row(&[
            at.graph.into(),
            at.center.map_or(CsvCell::Text(String::new()), CsvCell::from),
            opt(at.xi),
            opt(at.r),
            opt(at.epsilon),
            quantity.into(),
            value.into(),
        ]);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}
