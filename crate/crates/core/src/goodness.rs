//! (D, η)-goodness checks and the geometric constants that goodness controls.
//!
//! The unbounded face is exempt from the flat-angle condition; its edges still
//! take part in the adjacent-length condition.

use std::f64::consts::PI;

use serde::Serialize;

use crate::geom::{ccw_angle, segment_distance, Point};
use crate::graph::{EdgeId, EmbeddedGraph, VertexId};

/// Absolute slack for angle comparisons.
pub const ANGLE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    FlatAngle { corner: [VertexId; 3], angle: f64, limit: f64 },
    LengthRatio { vertex: VertexId, short: (VertexId, VertexId), long: (VertexId, VertexId), ratio: f64 },
    WeightOutOfRange { edge: (VertexId, VertexId), weight: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FaceDiameterReport {
    /// max over bounded faces f and edges e ⊂ ∂f of diam(f)/|e|
    pub diameter_ratio: f64,
    /// max over the same pairs of |e|²/area(f)
    pub area_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GoodnessReport {
    pub d: f64,
    pub eta: f64,
    pub d_required: f64,
    pub eta_allowed: f64,
    pub min_adjacent_angle: f64,
    /// Lower bound `sin(eta_allowed/2) / d_required` on adjacent angles.
    pub angle_lower_bound: f64,
    /// Infinite (serialized as null) when no non-adjacent edge pair exists.
    pub sausage_constant: f64,
    pub face_diameter: FaceDiameterReport,
    pub violations: Vec<Violation>,
    pub passed: bool,
}

fn inner_angles(g: &EmbeddedGraph) -> impl Iterator<Item = ([VertexId; 3], f64)> + '_ {
    g.bounded_faces().flat_map(move |f| {
        let b = &f.boundary;
        let k = b.len();
        (0..k).map(move |i| {
            let (a, v, c) = (b[(i + k - 1) % k], b[i], b[(i + 1) % k]);
            let p = g.position(v);
            (
                [a, v, c],
                ccw_angle(g.position(c) - p, g.position(a) - p),
            )
        })
    })
}

/// Per-vertex (shortest incident edge, longest incident edge) with lengths.
fn extreme_incident(g: &EmbeddedGraph, v: VertexId) -> Option<((EdgeId, f64), (EdgeId, f64))> {
    let mut it = g.rotation(v).iter().map(|i| (i.edge, g.edge_length(i.edge)));
    let first = it.next()?;
    Some(it.fold((first, first), |(lo, hi), e| {
        (if e.1 < lo.1 { e } else { lo }, if e.1 > hi.1 { e } else { hi })
    }))
}

fn edge_pair(g: &EmbeddedGraph, e: EdgeId) -> (VertexId, VertexId) {
    let ed = g.edge(e);
    (ed.u, ed.v)
}

/// Smallest D with all adjacent length ratios in `[1/D, D]`, and largest η
/// with all bounded-face inner angles at most `π − η`.
pub fn tightest_parameters(g: &EmbeddedGraph) -> (f64, f64) {
    tightest_parameters_within(g, |_| true)
}

/// As [`tightest_parameters`] restricted to vertices accepted by `keep`
/// (and bounded faces all of whose vertices are kept).
pub fn tightest_parameters_within(g: &EmbeddedGraph, keep: impl Fn(VertexId) -> bool) -> (f64, f64) {
    let mut d: f64 = 1.0;
    for v in (0..g.vertex_count()).filter(|&v| keep(v)) {
        if let Some(((_, lo), (_, hi))) = extreme_incident(g, v) {
            d = d.max(hi / lo);
        }
    }
    let max_angle = g
        .bounded_faces()
        .filter(|f| f.boundary.iter().all(|&v| keep(v)))
        .flat_map(|f| {
            let b = &f.boundary;
            let k = b.len();
            (0..k).map(move |i| {
                let p = g.position(b[i]);
                ccw_angle(g.position(b[(i + 1) % k]) - p, g.position(b[(i + k - 1) % k]) - p)
            })
        })
        .fold(0.0, f64::max);
    (d, PI - max_angle)
}

/// Minimum angle between rotation-consecutive edges at any vertex.
pub fn min_adjacent_angle(g: &EmbeddedGraph) -> f64 {
    let mut best = 2.0 * PI;
    for v in 0..g.vertex_count() {
        let rot = g.rotation(v);
        let k = rot.len();
        if k < 2 {
            continue;
        }
        let p = g.position(v);
        for i in 0..k {
            let a = g.position(rot[i].to) - p;
            let b = g.position(rot[(i + 1) % k].to) - p;
            best = best.min(ccw_angle(a, b));
        }
    }
    best
}

fn edge_segment(g: &EmbeddedGraph, e: EdgeId) -> (Point, Point, f64) {
    let ed = g.edge(e);
    let (a, b) = (g.position(ed.u), g.position(ed.v));
    (a, b, a.dist(b))
}

fn adjacent(g: &EmbeddedGraph, e: EdgeId, f: EdgeId) -> bool {
    let (x, y) = (g.edge(e), g.edge(f));
    x.u == y.u || x.u == y.v || x.v == y.u || x.v == y.v
}

/// `min d(e,f) / min(|e|,|f|)` over non-adjacent pairs, by checking every pair.
pub fn sausage_constant_brute(g: &EmbeddedGraph) -> f64 {
    let m = g.edge_count();
    let mut best = f64::INFINITY;
    for e in 0..m {
        let (a, b, le) = edge_segment(g, e);
        for f in (e + 1)..m {
            if adjacent(g, e, f) {
                continue;
            }
            let (c, d, lf) = edge_segment(g, f);
            best = best.min(segment_distance(a, b, c, d) / le.min(lf));
        }
    }
    best
}

/// Same value as [`sausage_constant_brute`], pruning pairs by x-extent.
pub fn sausage_constant(g: &EmbeddedGraph) -> f64 {
    let m = g.edge_count();
    let seg: Vec<(Point, Point, f64)> = (0..m).map(|e| edge_segment(g, e)).collect();
    let ext: Vec<(f64, f64)> = seg.iter().map(|(a, b, _)| (a.x.min(b.x), a.x.max(b.x))).collect();
    let mut order: Vec<EdgeId> = (0..m).collect();
    order.sort_by(|&a, &b| ext[a].0.total_cmp(&ext[b].0).then(a.cmp(&b)));
    let mut best = f64::INFINITY;
    for (k, &e) in order.iter().enumerate() {
        let (a, b, le) = seg[e];
        for &f in &order[k + 1..] {
            // the ratio is at least gap/|e|; later edges only start further right
            let gap = ext[f].0 - ext[e].1;
            if gap > 0.0 && gap >= best * le {
                break;
            }
            if adjacent(g, e, f) {
                continue;
            }
            let (c, d, lf) = seg[f];
            best = best.min(segment_distance(a, b, c, d) / le.min(lf));
        }
    }
    best
}

pub fn face_diameter_constant(g: &EmbeddedGraph) -> FaceDiameterReport {
    let mut rep = FaceDiameterReport { diameter_ratio: 0.0, area_ratio: 0.0 };
    for f in g.bounded_faces() {
        let b = &f.boundary;
        for i in 0..b.len() {
            let len = g.position(b[i]).dist(g.position(b[(i + 1) % b.len()]));
            rep.diameter_ratio = rep.diameter_ratio.max(f.diameter / len);
            rep.area_ratio = rep.area_ratio.max(len * len / f.area);
        }
    }
    rep
}

/// Checks conditions (a) and (b) for the given `(D, η)` and collects every violation.
pub fn validate(g: &EmbeddedGraph, d: f64, eta: f64) -> GoodnessReport {
    let mut violations = Vec::new();
    let limit = PI - eta;
    for (corner, angle) in inner_angles(g) {
        if angle > limit + ANGLE_TOL {
            violations.push(Violation::FlatAngle { corner, angle, limit });
        }
    }
    for v in 0..g.vertex_count() {
        if let Some(((lo_e, lo), (hi_e, hi))) = extreme_incident(g, v) {
            let ratio = hi / lo;
            if ratio > d * (1.0 + 1e-12) {
                violations.push(Violation::LengthRatio {
                    vertex: v,
                    short: edge_pair(g, lo_e),
                    long: edge_pair(g, hi_e),
                    ratio,
                });
            }
        }
    }
    for e in g.edges() {
        if e.weight < 1.0 / d || e.weight > d {
            violations.push(Violation::WeightOutOfRange { edge: (e.u, e.v), weight: e.weight });
        }
    }
    let (d_required, eta_allowed) = tightest_parameters(g);
    GoodnessReport {
        d,
        eta,
        d_required,
        eta_allowed,
        min_adjacent_angle: min_adjacent_angle(g),
        angle_lower_bound: (eta_allowed / 2.0).sin() / d_required,
        sausage_constant: sausage_constant(g),
        face_diameter: face_diameter_constant(g),
        passed: violations.is_empty(),
        violations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{square_grid, unit_triangle};

    const THIRD: f64 = PI / 3.0;

    #[test]
    fn equilateral_triangle() {
        let g = unit_triangle();
        let r = validate(&g, 2.0, THIRD);
        assert!(r.passed);
        let (d, eta) = tightest_parameters(&g);
        assert!((d - 1.0).abs() < 1e-15 && (eta - 2.0 * THIRD).abs() < 1e-12);
        assert!((min_adjacent_angle(&g) - THIRD).abs() < 1e-12);
        assert!(sausage_constant(&g).is_infinite());
        let fd = face_diameter_constant(&g);
        assert!((fd.diameter_ratio - 1.0).abs() < 1e-12);
        assert!((fd.area_ratio - 4.0 / 3f64.sqrt()).abs() < 1e-12);
        // π − η below π/3 makes every corner a witness
        let r = validate(&g, 2.0, 0.7 * PI);
        assert!(!r.passed);
        assert_eq!(r.violations.len(), 3);
        assert!(r.violations.iter().all(|v| matches!(v, Violation::FlatAngle { .. })));
        assert!(validate(&g, 2.0, 0.66 * PI).passed);
    }

    #[test]
    fn square_grid_constants() {
        let g = square_grid(3, 3);
        let (d, eta) = tightest_parameters(&g);
        assert!((d - 1.0).abs() < 1e-15 && (eta - PI / 2.0).abs() < 1e-12);
        assert!((min_adjacent_angle(&g) - PI / 2.0).abs() < 1e-12);
        let fd = face_diameter_constant(&g);
        assert!((fd.diameter_ratio - 2f64.sqrt()).abs() < 1e-12);
        assert!((fd.area_ratio - 1.0).abs() < 1e-12);
        // opposite sides of a unit square are the closest non-adjacent pairs
        assert!((sausage_constant_brute(&g) - 1.0).abs() < 1e-15);
        assert_eq!(sausage_constant(&g), sausage_constant_brute(&g));
    }

    #[test]
    fn long_edge_ratio_witness() {
        let pos = vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(10.0, 0.1)];
        let g = EmbeddedGraph::build(pos, vec![(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap();
        let r = validate(&g, 2.0, 0.01);
        let oracle = (10f64.powi(2) + 0.01).sqrt() / 1.0;
        let found = r.violations.iter().find_map(|v| match v {
            Violation::LengthRatio { vertex: 0, ratio, .. } => Some(*ratio),
            _ => None,
        });
        assert!((found.unwrap() - oracle).abs() < 1e-12);
    }

    #[test]
    fn weights_checked_against_d() {
        let pos = vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(0.5, 0.8)];
        let g = EmbeddedGraph::build(pos, vec![(0, 1, 5.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap();
        let r = validate(&g, 2.0, 0.1);
        assert!(r.violations.iter().any(|v| matches!(v, Violation::WeightOutOfRange { .. })));
    }
}
