//! Canonical JSON files for graphs, packings and reports.
//!
//! Canonical files are written by hand so that the bytes are a pure function
//! of the data: fixed key order, one record per line, floats in scientific
//! notation with 17 significant digits.

use std::fmt::Write as _;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{GraphError, IoError};
use crate::geom::Point;
use crate::graph::{EmbeddedGraph, VertexId};
use crate::packing::PackingResult;
use crate::triangulation::Triangulation;

pub const GRAPH_FORMAT: &str = "carrier-graph/1";
pub const PACKING_FORMAT: &str = "carrier-packing/1";

/// Formats `x` with 17 significant digits, which round-trips every finite `f64`.
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        // keep the sign of negative zero out of canonical output
        return "0.0000000000000000e0".to_string();
    }
    format!("{x:.16e}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VertexRecord {
    id: VertexId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    x: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    y: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeRecord {
    u: VertexId,
    v: VertexId,
    #[serde(default)]
    w: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGraphFile {
    #[allow(dead_code)]
    format: String,
    vertices: Vec<VertexRecord>,
    edges: Vec<EdgeRecord>,
}

/// In-memory form of a `carrier-graph/1` file.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphFile {
    /// `None` for combinatorial graphs awaiting a layout.
    pub positions: Option<Vec<Point>>,
    pub edges: Vec<(VertexId, VertexId, f64)>,
    pub vertex_count: usize,
}

impl GraphFile {
    pub fn from_graph(g: &EmbeddedGraph) -> Self {
        GraphFile {
            positions: Some(g.positions().to_vec()),
            edges: g.edges().iter().map(|e| (e.u, e.v, e.weight)).collect(),
            vertex_count: g.vertex_count(),
        }
    }

    /// Unit-weight edges and no positions.
    pub fn from_triangulation(t: &Triangulation) -> Self {
        GraphFile {
            positions: None,
            edges: t.edges().iter().map(|&(u, v)| (u, v, 1.0)).collect(),
            vertex_count: t.vertex_count(),
        }
    }

    pub fn to_graph(&self) -> Result<EmbeddedGraph, GraphError> {
        let pos = self.positions.clone().ok_or(GraphError::MissingPositions)?;
        EmbeddedGraph::build(pos, self.edges.clone())
    }

    pub fn to_canonical_string(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{{\"format\":\"{GRAPH_FORMAT}\",\n\"vertices\":[");
        for i in 0..self.vertex_count {
            let sep = if i + 1 < self.vertex_count { "," } else { "" };
            match &self.positions {
                Some(p) => {
                    let _ = writeln!(s, "{{\"id\":{i},\"x\":{},\"y\":{}}}{sep}", fmt_f64(p[i].x), fmt_f64(p[i].y));
                }
                None => {
                    let _ = writeln!(s, "{{\"id\":{i}}}{sep}");
                }
            }
        }
        s.push_str("],\n\"edges\":[\n");
        for (k, &(u, v, w)) in self.edges.iter().enumerate() {
            let sep = if k + 1 < self.edges.len() { "," } else { "" };
            let _ = writeln!(s, "{{\"u\":{u},\"v\":{v},\"w\":{}}}{sep}", fmt_f64(w));
        }
        s.push_str("]}\n");
        s
    }

    pub fn parse(text: &str) -> Result<Self, IoError> {
        let value: Value = serde_json::from_str(text)?;
        check_format(&value, GRAPH_FORMAT)?;
        let raw: RawGraphFile = serde_json::from_value(value).map_err(|e| IoError::SchemaViolation(e.to_string()))?;
        let n = raw.vertices.len();
        let mut with_pos = 0;
        for (i, rec) in raw.vertices.iter().enumerate() {
            if rec.id != i {
                return Err(IoError::SchemaViolation(format!("vertex ids must be 0..{n} in order; found {} at index {i}", rec.id)));
            }
            match (rec.x, rec.y) {
                (Some(_), Some(_)) => with_pos += 1,
                (None, None) => {}
                _ => return Err(IoError::SchemaViolation(format!("vertex {i} has only one coordinate"))),
            }
        }
        if with_pos != 0 && with_pos != n {
            return Err(IoError::SchemaViolation("positions must be given for all vertices or none".into()));
        }
        let positions = (with_pos == n && n > 0)
            .then(|| raw.vertices.iter().map(|r| Point::new(r.x.unwrap_or(0.0), r.y.unwrap_or(0.0))).collect());
        let mut edges = Vec::with_capacity(raw.edges.len());
        for e in raw.edges {
            if e.u >= n || e.v >= n {
                return Err(IoError::SchemaViolation(format!("edge {}-{} references a missing vertex", e.u, e.v)));
            }
            let w = match e.w {
                Some(w) => w,
                None => {
                    log::warn!("edge {}-{} has no weight; using 1.0", e.u, e.v);
                    1.0
                }
            };
            edges.push((e.u, e.v, w));
        }
        Ok(GraphFile { positions, edges, vertex_count: n })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, IoError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), IoError> {
        Ok(std::fs::write(path, self.to_canonical_string())?)
    }
}

fn check_format(value: &Value, expected: &'static str) -> Result<(), IoError> {
    let found = value
        .get("format")
        .ok_or_else(|| IoError::SchemaViolation("missing \"format\" tag".into()))?;
    match found.as_str() {
        Some(f) if f == expected => Ok(()),
        Some(f) => Err(IoError::FormatVersionMismatch { expected, found: f.to_string() }),
        None => Err(IoError::FormatVersionMismatch { expected, found: found.to_string() }),
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RadiusRecord {
    id: VertexId,
    r: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CenterRecord {
    id: VertexId,
    x: f64,
    y: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Residuals {
    pub angle: f64,
    pub tangency: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPackingFile {
    #[allow(dead_code)]
    format: String,
    radii: Vec<RadiusRecord>,
    centers: Vec<CenterRecord>,
    residuals: Residuals,
}

/// In-memory form of a `carrier-packing/1` file.
#[derive(Debug, Clone, PartialEq)]
pub struct PackingFile {
    pub radius: Vec<f64>,
    pub center: Vec<Point>,
    pub residuals: Residuals,
}

impl PackingFile {
    pub fn from_packing(p: &PackingResult) -> Self {
        PackingFile {
            radius: p.radius.clone(),
            center: p.center.clone(),
            residuals: Residuals { angle: p.angle_residual, tangency: p.tangency_residual },
        }
    }

    pub fn to_canonical_string(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{{\"format\":\"{PACKING_FORMAT}\",\n\"radii\":[");
        let n = self.radius.len();
        for (i, r) in self.radius.iter().enumerate() {
            let sep = if i + 1 < n { "," } else { "" };
            let _ = writeln!(s, "{{\"id\":{i},\"r\":{}}}{sep}", fmt_f64(*r));
        }
        s.push_str("],\n\"centers\":[\n");
        for (i, c) in self.center.iter().enumerate() {
            let sep = if i + 1 < n { "," } else { "" };
            let _ = writeln!(s, "{{\"id\":{i},\"x\":{},\"y\":{}}}{sep}", fmt_f64(c.x), fmt_f64(c.y));
        }
        let _ = writeln!(
            s,
            "],\n\"residuals\":{{\"angle\":{},\"tangency\":{}}}}}",
            fmt_f64(self.residuals.angle),
            fmt_f64(self.residuals.tangency)
        );
        s
    }

    pub fn parse(text: &str) -> Result<Self, IoError> {
        let value: Value = serde_json::from_str(text)?;
        check_format(&value, PACKING_FORMAT)?;
        let raw: RawPackingFile = serde_json::from_value(value).map_err(|e| IoError::SchemaViolation(e.to_string()))?;
        if raw.radii.len() != raw.centers.len() {
            return Err(IoError::SchemaViolation(format!(
                "{} radii but {} centers",
                raw.radii.len(),
                raw.centers.len()
            )));
        }
        let mut radius = Vec::with_capacity(raw.radii.len());
        let mut center = Vec::with_capacity(raw.centers.len());
        for (i, (r, c)) in raw.radii.iter().zip(&raw.centers).enumerate() {
            if r.id != i || c.id != i {
                return Err(IoError::SchemaViolation(format!("record {i} is out of order")));
            }
            if !(r.r > 0.0) {
                return Err(IoError::SchemaViolation(format!("radius of vertex {i} is not positive")));
            }
            radius.push(r.r);
            center.push(Point::new(c.x, c.y));
        }
        Ok(PackingFile { radius, center, residuals: raw.residuals })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, IoError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), IoError> {
        Ok(std::fs::write(path, self.to_canonical_string())?)
    }
}

/// Pretty JSON with a trailing newline.
pub fn report_to_string<T: Serialize>(report: &T) -> Result<String, IoError> {
    let mut s = serde_json::to_string_pretty(report)?;
    s.push('\n');
    Ok(s)
}

pub fn save_report<T: Serialize>(report: &T, path: impl AsRef<Path>) -> Result<(), IoError> {
    Ok(std::fs::write(path, report_to_string(report)?)?)
}

pub fn load_report<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T, IoError> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| IoError::SchemaViolation(e.to_string()))
}

/// CSV writer for sweep rows: header first, `'\n'` line endings, floats via [`fmt_f64`].
#[derive(Debug, Clone, Default)]
pub struct Csv {
    text: String,
    columns: usize,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Csv { text: format!("{}\n", header.join(",")), columns: header.len() }
    }

    pub fn row(&mut self, cells: &[CsvCell]) {
        assert_eq!(cells.len(), self.columns, "row width differs from header");
        let parts: Vec<String> = cells.iter().map(CsvCell::render).collect();
        self.text.push_str(&parts.join(","));
        self.text.push('\n');
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }

    pub fn rows(&self) -> usize {
        self.text.lines().count() - 1
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), IoError> {
        Ok(std::fs::write(path, &self.text)?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CsvCell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl CsvCell {
    fn render(&self) -> String {
        match self {
            CsvCell::Num(x) if x.is_finite() => fmt_f64(*x),
            CsvCell::Num(x) => format!("{x}"),
            CsvCell::Int(i) => i.to_string(),
            CsvCell::Text(t) if t.contains([',', '"', '\n']) => format!("\"{}\"", t.replace('"', "\"\"")),
            CsvCell::Text(t) => t.clone(),
        }
    }
}

impl From<f64> for CsvCell {
    fn from(x: f64) -> Self {
        CsvCell::Num(x)
    }
}

impl From<usize> for CsvCell {
    fn from(x: usize) -> Self {
        CsvCell::Int(x as i64)
    }
}

impl From<&str> for CsvCell {
    fn from(x: &str) -> Self {
        CsvCell::Text(x.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::unit_triangle;

    #[test]
    fn tri3_round_trip_is_byte_identical() {
        let f = GraphFile::from_graph(&unit_triangle());
        let text = f.to_canonical_string();
        let back = GraphFile::parse(&text).unwrap();
        assert_eq!(back, f);
        assert_eq!(back.to_canonical_string(), text);
        let g = back.to_graph().unwrap();
        assert_eq!(g.faces().len(), 2);
    }

    #[test]
    fn wrong_format_tag() {
        let text = r#"{"format":"carrier-graph/2","vertices":[],"edges":[]}"#;
        assert!(matches!(GraphFile::parse(text), Err(IoError::FormatVersionMismatch { .. })));
        let text = r#"{"format":"carrier-graph/1","radii":[],"centers":[],"residuals":{"angle":0,"tangency":0}}"#;
        assert!(matches!(PackingFile::parse(text), Err(IoError::FormatVersionMismatch { .. })));
    }

    #[test]
    fn missing_weight_defaults_to_one() {
        let text = r#"{"format":"carrier-graph/1","vertices":[{"id":0,"x":0,"y":0},{"id":1,"x":1,"y":0}],"edges":[{"u":0,"v":1}]}"#;
        let f = GraphFile::parse(text).unwrap();
        assert_eq!(f.edges, vec![(0, 1, 1.0)]);
    }

    #[test]
    fn schema_violations() {
        let bad = [
            r#"{"format":"carrier-graph/1","vertices":[{"id":1}],"edges":[]}"#,
            r#"{"format":"carrier-graph/1","vertices":[{"id":0,"x":1}],"edges":[]}"#,
            r#"{"format":"carrier-graph/1","vertices":[{"id":0}],"edges":[{"u":0,"v":4,"w":1}]}"#,
            r#"{"format":"carrier-graph/1","vertices":[{"id":0,"z":3}],"edges":[]}"#,
            r#"{"vertices":[],"edges":[]}"#,
        ];
        for b in bad {
            assert!(matches!(GraphFile::parse(b), Err(IoError::SchemaViolation(_))), "{b}");
        }
    }

    #[test]
    fn combinatorial_file_has_no_positions() {
        let t = crate::generate::generate_hyperbolic(7, 1).unwrap();
        let f = GraphFile::from_triangulation(&t);
        let text = f.to_canonical_string();
        assert!(!text.contains("\"x\""));
        let back = GraphFile::parse(&text).unwrap();
        assert_eq!(back.to_canonical_string(), text);
        assert!(matches!(back.to_graph(), Err(GraphError::MissingPositions)));
    }

    #[test]
    fn csv_layout() {
        let mut c = Csv::new(&["xi", "r", "value"]);
        c.row(&[0.5.into(), 2usize.into(), "a,b".into()]);
        assert_eq!(c.as_str(), "xi,r,value\n5.0000000000000000e-1,2,\"a,b\"\n");
        assert_eq!(c.rows(), 1);
    }
}
