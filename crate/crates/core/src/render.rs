//! Deterministic SVG 1.1 output for embeddings, packings and overlays.
//!
//! World coordinates are mapped to pixels with the y axis pointing up.
//! Heatmap colours use the scale `t ↦ rgb(255t, 64, 255(1−t))`, where `t` is
//! the value rescaled linearly from `[min, max]` onto `[0, 1]`; the red channel
//! increases and the blue channel decreases with the value.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::GraphError;
use crate::geom::Point;
use crate::graph::{EmbeddedGraph, VertexId};
use crate::io::{GraphFile, PackingFile};
use crate::metric::CableBall;
use crate::triangulation::Triangulation;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RenderSpec {
    pub circles: bool,
    pub edges: bool,
    pub faces: bool,
    pub heatmap: bool,
    pub overlays: bool,
    /// Width and height of the square canvas.
    pub size_px: u32,
    /// Stroke width in pixels.
    pub stroke_px: f64,
    pub edge_color: String,
    pub circle_color: String,
    pub face_fill: String,
    pub overlay_color: String,
}

impl Default for RenderSpec {
    fn default() -> Self {
        RenderSpec {
            circles: true,
            edges: true,
            faces: false,
            heatmap: true,
            overlays: true,
            size_px: 800,
            stroke_px: 1.0,
            edge_color: "#333333".into(),
            circle_color: "#1f77b4".into(),
            face_fill: "#eeeeee".into(),
            overlay_color: "#d62728".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Overlay {
    /// Straight pieces, e.g. a d0 ball or a cone.
    Segments { label: String, segments: Vec<(Point, Point)> },
    Polyline { label: String, points: Vec<Point> },
}

impl Overlay {
    pub fn from_cable_set(label: &str, g: &EmbeddedGraph, set: &CableBall) -> Self {
        let segments = set
            .pieces
            .iter()
            .map(|&(e, a, b)| {
                let ed = g.edge(e);
                let (p, q) = (g.position(ed.u), g.position(ed.v));
                (p.lerp(q, a), p.lerp(q, b))
            })
            .collect();
        Overlay::Segments { label: label.to_string(), segments }
    }
}

/// Everything that can be drawn. Layers absent from the scene are skipped.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Scene {
    pub positions: Option<Vec<Point>>,
    pub edges: Vec<(VertexId, VertexId)>,
    pub faces: Vec<Vec<VertexId>>,
    pub circles: Vec<(Point, f64)>,
    pub heat: Option<Vec<f64>>,
    pub overlays: Vec<Overlay>,
}

impl Scene {
    pub fn from_graph(g: &EmbeddedGraph) -> Self {
        Scene {
            positions: Some(g.positions().to_vec()),
            edges: g.edges().iter().map(|e| (e.u, e.v)).collect(),
            faces: g.bounded_faces().map(|f| f.boundary.clone()).collect(),
            ..Scene::default()
        }
    }

    pub fn from_graph_file(f: &GraphFile) -> Self {
        Scene {
            positions: f.positions.clone(),
            edges: f.edges.iter().map(|&(u, v, _)| (u, v)).collect(),
            ..Scene::default()
        }
    }

    /// Circles at their centres, with the tangency graph and its triangles.
    pub fn from_packing(p: &PackingFile, t: &Triangulation) -> Self {
        Scene {
            positions: Some(p.center.clone()),
            edges: t.edges().to_vec(),
            faces: t.triangles().iter().map(|tr| tr.to_vec()).collect(),
            circles: p.center.iter().copied().zip(p.radius.iter().copied()).collect(),
            ..Scene::default()
        }
    }

    pub fn with_heat(mut self, values: Vec<f64>) -> Self {
        self.heat = Some(values);
        self
    }

    pub fn with_overlay(mut self, o: Overlay) -> Self {
        self.overlays.push(o);
        self
    }
}

pub fn heat_color(t: f64) -> String {
    let t = if t.is_finite() { t.clamp(0.0, 1.0) } else { 0.0 };
    format!("rgb({},64,{})", (255.0 * t).round() as u8, (255.0 * (1.0 - t)).round() as u8)
}

fn num(x: f64) -> String {
    let s = format!("{x:.3}");
    if s == "-0.000" {
        "0.000".into()
    } else {
        s
    }
}

struct Frame {
    min: Point,
    scale: f64,
    size: f64,
}

impl Frame {
    fn map(&self, p: Point) -> (String, String) {
        (num((p.x - self.min.x) * self.scale), num(self.size - (p.y - self.min.y) * self.scale))
    }
}

pub fn render(scene: &Scene, spec: &RenderSpec) -> Result<String, GraphError> {
    let pos = scene.positions.as_deref().ok_or(GraphError::MissingPositions)?;
    let draw_circles = spec.circles && !scene.circles.is_empty();
    let (mut lo, mut hi) = (Point::new(f64::INFINITY, f64::INFINITY), Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY));
    let mut discs: Vec<(Point, f64)> = pos.iter().map(|&p| (p, 0.0)).collect();
    if draw_circles {
        discs.push((Point::ORIGIN, 1.0));
        discs.extend(scene.circles.iter().copied());
    }
    if discs.is_empty() {
        discs.push((Point::ORIGIN, 1.0));
    }
    for (p, r) in discs {
        lo = Point::new(lo.x.min(p.x - r), lo.y.min(p.y - r));
        hi = Point::new(hi.x.max(p.x + r), hi.y.max(p.y + r));
    }
    let extent = (hi.x - lo.x).max(hi.y - lo.y).max(1e-9);
    let margin = 0.05 * extent;
    let size = f64::from(spec.size_px.max(1));
    let scale = size / (extent + 2.0 * margin);
    let f = Frame { min: Point::new(lo.x - margin, lo.y - margin), scale, size };
    let sw = num(spec.stroke_px);

    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{0}\" height=\"{0}\" viewBox=\"0 0 {0} {0}\">",
        spec.size_px
    );
    let _ = writeln!(s, "<rect x=\"0\" y=\"0\" width=\"{0}\" height=\"{0}\" fill=\"white\"/>", spec.size_px);

    if spec.faces && !scene.faces.is_empty() {
        let _ = writeln!(s, "<g class=\"faces\" fill=\"{}\" stroke=\"none\">", spec.face_fill);
        for face in &scene.faces {
            let pts: Vec<String> = face
                .iter()
                .map(|&v| {
                    let (x, y) = f.map(pos[v]);
                    format!("{x},{y}")
                })
                .collect();
            let _ = writeln!(s, "<polygon points=\"{}\"/>", pts.join(" "));
        }
        s.push_str("</g>\n");
    }

    if spec.heatmap {
        if let Some(heat) = &scene.heat {
            let (mn, mx) = heat
                .iter()
                .filter(|v| v.is_finite())
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
            let span = if mx > mn { mx - mn } else { 1.0 };
            let radii = heat_radii(pos, &scene.edges, &scene.circles);
            s.push_str("<g class=\"heatmap\" stroke=\"none\">\n");
            for (v, &val) in heat.iter().enumerate().take(pos.len()) {
                let (x, y) = f.map(pos[v]);
                let _ = writeln!(
                    s,
                    "<circle cx=\"{x}\" cy=\"{y}\" r=\"{}\" fill=\"{}\"/>",
                    num(radii[v] * scale),
                    heat_color((val - mn) / span)
                );
            }
            s.push_str("</g>\n");
        }
    }

    if spec.edges && !scene.edges.is_empty() {
        let _ = writeln!(s, "<g class=\"edges\" stroke=\"{}\" stroke-width=\"{sw}\">", spec.edge_color);
        for &(u, v) in &scene.edges {
            let (x1, y1) = f.map(pos[u]);
            let (x2, y2) = f.map(pos[v]);
            let _ = writeln!(s, "<line x1=\"{x1}\" y1=\"{y1}\" x2=\"{x2}\" y2=\"{y2}\"/>");
        }
        s.push_str("</g>\n");
    }

    if draw_circles {
        let _ = writeln!(s, "<g class=\"circles\" fill=\"none\" stroke=\"{}\" stroke-width=\"{sw}\">", spec.circle_color);
        let (ox, oy) = f.map(Point::ORIGIN);
        let _ = writeln!(s, "<circle class=\"unit\" cx=\"{ox}\" cy=\"{oy}\" r=\"{}\"/>", num(scale));
        for &(c, r) in &scene.circles {
            let (x, y) = f.map(c);
            let _ = writeln!(s, "<circle cx=\"{x}\" cy=\"{y}\" r=\"{}\"/>", num(r * scale));
        }
        s.push_str("</g>\n");
    }

    if spec.overlays && !scene.overlays.is_empty() {
        let wide = num(2.0 * spec.stroke_px);
        let _ = writeln!(
            s,
            "<g class=\"overlays\" fill=\"none\" stroke=\"{}\" stroke-width=\"{wide}\">",
            spec.overlay_color
        );
        for o in &scene.overlays {
            match o {
                Overlay::Segments { label, segments } => {
                    let _ = writeln!(s, "<g class=\"{}\">", escape(label));
                    for &(a, b) in segments {
                        let (x1, y1) = f.map(a);
                        let (x2, y2) = f.map(b);
                        let _ = writeln!(s, "<line x1=\"{x1}\" y1=\"{y1}\" x2=\"{x2}\" y2=\"{y2}\"/>");
                    }
                    s.push_str("</g>\n");
                }
                Overlay::Polyline { label, points } => {
                    let pts: Vec<String> = points
                        .iter()
                        .map(|&p| {
                            let (x, y) = f.map(p);
                            format!("{x},{y}")
                        })
                        .collect();
                    let _ = writeln!(s, "<polyline class=\"{}\" points=\"{}\"/>", escape(label), pts.join(" "));
                }
            }
        }
        s.push_str("</g>\n");
    }
    s.push_str("</svg>\n");
    Ok(s)
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('"', "&quot;")
}

/// Packing radius when available, else 0.4 of the shortest incident edge.
fn heat_radii(pos: &[Point], edges: &[(VertexId, VertexId)], circles: &[(Point, f64)]) -> Vec<f64> {
    if circles.len() == pos.len() {
        return circles.iter().map(|c| c.1).collect();
    }
    let mut r = vec![f64::INFINITY; pos.len()];
    for &(u, v) in edges {
        let d = 0.4 * pos[u].dist(pos[v]);
        r[u] = r[u].min(d);
        r[v] = r[v].min(d);
    }
    r.iter().map(|&x| if x.is_finite() { x } else { 0.01 }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::generate_hyperbolic;
    use crate::packing::{pack_maximal, PackingOptions};

    fn k4() -> (PackingFile, Triangulation) {
        let t = Triangulation::new(4, vec![[0, 1, 2], [0, 2, 3], [0, 3, 1]]).unwrap();
        let p = pack_maximal(&t, &PackingOptions::default()).unwrap();
        (PackingFile::from_packing(&p), t)
    }

    #[test]
    fn k4_has_four_circles_and_the_unit_circle() {
        let (p, t) = k4();
        let svg = render(&Scene::from_packing(&p, &t), &RenderSpec::default()).unwrap();
        assert_eq!(svg.matches("<circle").count(), 5);
        assert_eq!(svg.matches("class=\"unit\"").count(), 1);
        assert!(svg.starts_with("<?xml") && svg.ends_with("</svg>\n"));
    }

    #[test]
    fn heatmap_one_disc_per_vertex_and_deterministic() {
        let t = generate_hyperbolic(7, 2).unwrap();
        let p = PackingFile::from_packing(&pack_maximal(&t, &PackingOptions::default()).unwrap());
        let heat: Vec<f64> = (0..t.vertex_count()).map(|v| v as f64).collect();
        let spec = RenderSpec { circles: false, edges: false, ..RenderSpec::default() };
        let scene = Scene::from_packing(&p, &t).with_heat(heat);
        let a = render(&scene, &spec).unwrap();
        let b = render(&scene, &spec).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.matches("<circle").count(), t.vertex_count());
        assert!(a.contains(&heat_color(0.0)) && a.contains(&heat_color(1.0)));
    }

    #[test]
    fn colour_scale_is_monotone() {
        let red = |t: f64| heat_color(t)[4..].split(',').next().unwrap().parse::<u8>().unwrap();
        let mut prev = 0;
        for k in 0..=20 {
            let r = red(k as f64 / 20.0);
            assert!(r >= prev);
            prev = r;
        }
    }

    #[test]
    fn missing_positions() {
        let t = generate_hyperbolic(7, 1).unwrap();
        let scene = Scene::from_graph_file(&GraphFile::from_triangulation(&t));
        assert_eq!(render(&scene, &RenderSpec::default()), Err(GraphError::MissingPositions));
    }
}
