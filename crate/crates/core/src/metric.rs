//! The cable system X of an embedded graph: path metric d0, edge-length
//! measure m, balls, cones, doubling and Poincaré measurements, and curves
//! built from circles orthogonal to the unit circle.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::MetricError;
use crate::geom::{angle_diff, segment_circle_params, AngleInterval, Point};
use crate::graph::{EdgeId, EmbeddedGraph, VertexId};
use crate::sparse::{conjugate_gradient, dot, CsrMatrix};

/// A point of X: affine parameter `t` along `edge`, measured from the lower-id endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CablePoint {
    pub edge: EdgeId,
    pub t: f64,
}

impl CablePoint {
    pub fn new(edge: EdgeId, t: f64) -> Self {
        CablePoint { edge, t: t.clamp(0.0, 1.0) }
    }

    /// Representative of vertex `v` on its first incident edge.
    pub fn at_vertex(g: &EmbeddedGraph, v: VertexId) -> Self {
        let e = g.rotation(v).first().expect("vertex has an incident edge").edge;
        CablePoint { edge: e, t: if g.edge(e).u == v { 0.0 } else { 1.0 } }
    }

    pub fn position(&self, g: &EmbeddedGraph) -> Point {
        let e = g.edge(self.edge);
        g.position(e.u).lerp(g.position(e.v), self.t)
    }

    pub fn as_vertex(&self, g: &EmbeddedGraph) -> Option<VertexId> {
        let e = g.edge(self.edge);
        match self.t {
            t if t == 0.0 => Some(e.u),
            t if t == 1.0 => Some(e.v),
            _ => None,
        }
    }

    /// Whether two representations denote the same point of X.
    pub fn same_point(&self, other: &CablePoint, g: &EmbeddedGraph) -> bool {
        if self.edge == other.edge {
            return self.t == other.t;
        }
        matches!((self.as_vertex(g), other.as_vertex(g)), (Some(a), Some(b)) if a == b)
    }
}

#[derive(Clone, Copy, PartialEq)]
struct Item(f64, VertexId);

impl Eq for Item {}

impl Ord for Item {
    fn cmp(&self, o: &Self) -> Ordering {
        o.0.total_cmp(&self.0).then(o.1.cmp(&self.1))
    }
}

impl PartialOrd for Item {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// Multi-source Dijkstra over vertices with edge lengths as costs.
/// Returns distances and predecessor vertices.
pub fn dijkstra(g: &EmbeddedGraph, sources: &[(VertexId, f64)]) -> (Vec<f64>, Vec<Option<VertexId>>) {
    let n = g.vertex_count();
    let mut dist = vec![f64::INFINITY; n];
    let mut pred = vec![None; n];
    let mut heap = BinaryHeap::new();
    for &(s, d) in sources {
        if d < dist[s] {
            dist[s] = d;
            heap.push(Item(d, s));
        }
    }
    while let Some(Item(d, v)) = heap.pop() {
        if d > dist[v] {
            continue;
        }
        for inc in g.rotation(v) {
            let nd = d + g.edge_length(inc.edge);
            if nd < dist[inc.to] {
                dist[inc.to] = nd;
                pred[inc.to] = Some(v);
                heap.push(Item(nd, inc.to));
            }
        }
    }
    (dist, pred)
}

/// d0 from a fixed source to every point of X.
#[derive(Debug, Clone)]
pub struct DistanceField {
    pub source: CablePoint,
    pub vertex: Vec<f64>,
    pred: Vec<Option<VertexId>>,
}

impl DistanceField {
    pub fn new(g: &EmbeddedGraph, x: CablePoint) -> Self {
        let e = g.edge(x.edge);
        let l = g.edge_length(x.edge);
        let (vertex, pred) = dijkstra(g, &[(e.u, x.t * l), (e.v, (1.0 - x.t) * l)]);
        DistanceField { source: x, vertex, pred }
    }

    pub fn to(&self, g: &EmbeddedGraph, y: CablePoint) -> f64 {
        let e = g.edge(y.edge);
        let l = g.edge_length(y.edge);
        let mut d = (self.vertex[e.u] + y.t * l).min(self.vertex[e.v] + (1.0 - y.t) * l);
        if y.edge == self.source.edge {
            d = d.min((y.t - self.source.t).abs() * l);
        }
        d
    }

    /// Shortest path to `y` as a polyline of cable points from the source.
    pub fn path_to(&self, g: &EmbeddedGraph, y: CablePoint) -> Vec<CablePoint> {
        let e = g.edge(y.edge);
        let l = g.edge_length(y.edge);
        let via_u = self.vertex[e.u] + y.t * l;
        let via_v = self.vertex[e.v] + (1.0 - y.t) * l;
        if y.edge == self.source.edge && (y.t - self.source.t).abs() * l <= via_u.min(via_v) {
            return vec![self.source, y];
        }
        let mut chain = vec![if via_u <= via_v { e.u } else { e.v }];
        while let Some(p) = self.pred[*chain.last().expect("nonempty")] {
            chain.push(p);
        }
        chain.reverse();
        let mut out = vec![self.source];
        out.extend(chain.into_iter().map(|v| CablePoint::at_vertex(g, v)));
        out.push(y);
        out.dedup_by(|a, b| a.same_point(b, g));
        out
    }
}

/// Shortest-path length in X between two cable points.
pub fn d0(g: &EmbeddedGraph, x: CablePoint, y: CablePoint) -> f64 {
    DistanceField::new(g, x).to(g, y)
}

/// Uniformly random cable point, choosing the edge with probability proportional to length.
pub fn random_cable_point(g: &EmbeddedGraph, rng: &mut impl Rng) -> CablePoint {
    let total: f64 = (0..g.edge_count()).map(|e| g.edge_length(e)).sum();
    let mut u = rng.gen::<f64>() * total;
    for e in 0..g.edge_count() {
        let l = g.edge_length(e);
        if u < l {
            return CablePoint::new(e, u / l);
        }
        u -= l;
    }
    CablePoint::new(g.edge_count() - 1, rng.gen())
}

/// Maximum of `d0(x,y)/|x−y|` over `samples` random pairs.
pub fn bilipschitz_constant(g: &EmbeddedGraph, samples: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: f64 = 1.0;
    for _ in 0..samples {
        let x = random_cable_point(g, &mut rng);
        let y = random_cable_point(g, &mut rng);
        let euclid = x.position(g).dist(y.position(g));
        if euclid > 1e-12 {
            best = best.max(d0(g, x, y) / euclid);
        }
    }
    best
}

/// A subset of X as closed parameter intervals per edge, with its m-measure.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CableBall {
    pub pieces: Vec<(EdgeId, f64, f64)>,
    pub measure: f64,
}

impl CableBall {
    fn from_plane_intervals(g: &EmbeddedGraph, per_edge: Vec<(EdgeId, Vec<(f64, f64)>)>) -> Self {
        let mut pieces = Vec::new();
        let mut measure = 0.0;
        for (e, mut iv) in per_edge {
            let l = g.edge_length(e);
            iv.retain(|&(a, b)| b > a);
            iv.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut merged: Vec<(f64, f64)> = Vec::new();
            for (a, b) in iv {
                match merged.last_mut() {
                    Some(last) if a <= last.1 => last.1 = last.1.max(b),
                    _ => merged.push((a, b)),
                }
            }
            for (a, b) in merged {
                measure += l * (b - a);
                pieces.push((e, (a / l).clamp(0.0, 1.0), (b / l).clamp(0.0, 1.0)));
            }
        }
        CableBall { pieces, measure }
    }

    pub fn contains(&self, p: CablePoint, g: &EmbeddedGraph) -> bool {
        let on = |e: EdgeId, t: f64| self.pieces.iter().any(|&(e2, a, b)| e2 == e && a <= t && t <= b);
        on(p.edge, p.t)
            || p.as_vertex(g).is_some_and(|v| {
                g.rotation(v).iter().any(|inc| on(inc.edge, if g.edge(inc.edge).u == v { 0.0 } else { 1.0 }))
            })
    }

    /// Total Euclidean length of the pieces.
    pub fn length(&self, g: &EmbeddedGraph) -> f64 {
        self.pieces.iter().map(|&(e, a, b)| (b - a) * g.edge_length(e)).sum()
    }
}

/// The sublevel set `{y : d0(x, y) ≤ r}`.
pub fn ball_d0(g: &EmbeddedGraph, x: CablePoint, r: f64) -> CableBall {
    ball_from_field(g, &DistanceField::new(g, x), r)
}

pub fn ball_from_field(g: &EmbeddedGraph, f: &DistanceField, r: f64) -> CableBall {
    let mut per_edge = Vec::new();
    for (id, e) in g.edges().iter().enumerate() {
        let l = g.edge_length(id);
        let (du, dv) = (f.vertex[e.u], f.vertex[e.v]);
        let mut iv = Vec::new();
        if du <= r {
            iv.push((0.0, l.min(r - du)));
        }
        if dv <= r {
            iv.push(((l - (r - dv)).max(0.0), l));
        }
        if id == f.source.edge {
            let s = f.source.t * l;
            iv.push(((s - r).max(0.0), (s + r).min(l)));
        }
        if !iv.is_empty() {
            per_edge.push((id, iv));
        }
    }
    CableBall::from_plane_intervals(g, per_edge)
}

fn escape(p: Point, radius: f64) -> MetricError {
    MetricError::BallEscapesCarrier { x: p.x, y: p.y, radius }
}

/// `m(B(x, 2r)) / m(B(x, r))`.
pub fn doubling_ratio(g: &EmbeddedGraph, x: CablePoint, r: f64) -> Result<f64, MetricError> {
    let p = x.position(g);
    if !g.disc_in_carrier(p, 2.0 * r) {
        return Err(escape(p, 2.0 * r));
    }
    if r <= 0.0 {
        return Err(MetricError::InvalidArgument(format!("radius {r} must be positive")));
    }
    let f = DistanceField::new(g, x);
    Ok(ball_from_field(g, &f, 2.0 * r).measure / ball_from_field(g, &f, r).measure)
}

/// `{v ∈ X : |v − apex| ≤ r, arg(v − apex) ∈ I}`.
pub fn cone_at(g: &EmbeddedGraph, apex: Point, r: f64, interval: AngleInterval) -> CableBall {
    let full = interval.width >= std::f64::consts::TAU;
    let inside = |p: Point| {
        let d = p - apex;
        d.norm() <= r && (d.norm() == 0.0 || full || interval.contains(d.arg()))
    };
    let mut per_edge = Vec::new();
    for (id, e) in g.edges().iter().enumerate() {
        let (a, b) = (g.position(e.u), g.position(e.v));
        if a.dist(apex).min(b.dist(apex)) > r + a.dist(b) {
            continue;
        }
        let mut cuts = vec![0.0, 1.0];
        cuts.extend(segment_circle_params(a, b, apex, r));
        if !full {
            for theta in [interval.start, interval.end()] {
                let dir = Point::polar(1.0, theta);
                let den = dir.cross(b - a);
                if den != 0.0 {
                    let t = -dir.cross(a - apex) / den;
                    if t > 0.0 && t < 1.0 {
                        cuts.push(t);
                    }
                }
            }
        }
        cuts.sort_by(f64::total_cmp);
        let l = g.edge_length(id);
        let iv: Vec<(f64, f64)> = cuts
            .windows(2)
            .filter(|w| w[1] > w[0] && inside(a.lerp(b, 0.5 * (w[0] + w[1]))))
            .map(|w| (w[0] * l, w[1] * l))
            .collect();
        if !iv.is_empty() {
            per_edge.push((id, iv));
        }
    }
    CableBall::from_plane_intervals(g, per_edge)
}

pub fn cone(g: &EmbeddedGraph, u: VertexId, r: f64, interval: AngleInterval) -> CableBall {
    cone_at(g, g.position(u), r, interval)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoincareOptions {
    pub blowup: f64,
    /// Mesh step; defaults to an eighth of the shortest edge in the outer ball.
    pub h: Option<f64>,
    pub max_unknowns: usize,
    pub check_carrier: bool,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PoincareOptions {
    fn default() -> Self {
        PoincareOptions { blowup: 4.0, h: None, max_unknowns: 200_000, check_carrier: true, tol: 1e-10, max_iter: 5000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PoincareReport {
    pub kappa: f64,
    pub h: f64,
    pub unknowns: usize,
    pub iterations: usize,
}

/// Best κ with `∫_{B(r)} |f − f̄|² dm ≤ κ r² ∫_{B(blowup·r)} |f′|² dm` on P1 elements.
pub fn poincare_constant(g: &EmbeddedGraph, x0: CablePoint, r: f64, blowup: f64) -> Result<f64, MetricError> {
    poincare_with(g, x0, r, &PoincareOptions { blowup, ..Default::default() }).map(|p| p.kappa)
}

pub fn poincare_with(g: &EmbeddedGraph, x0: CablePoint, r: f64, opts: &PoincareOptions) -> Result<PoincareReport, MetricError> {
    if !(r > 0.0) || !(opts.blowup >= 1.0) {
        return Err(MetricError::InvalidArgument(format!("need r > 0 and blowup ≥ 1, got r={r}, blowup={}", opts.blowup)));
    }
    let big_r = opts.blowup * r;
    let p = x0.position(g);
    if opts.check_carrier && !g.disc_in_carrier(p, big_r) {
        return Err(escape(p, big_r));
    }
    let field = DistanceField::new(g, x0);
    let big = ball_from_field(g, &field, big_r);
    let small = ball_from_field(g, &field, r);
    let shortest = big.pieces.iter().map(|&(e, _, _)| g.edge_length(e)).fold(f64::INFINITY, f64::min);
    let mut h = opts.h.unwrap_or(shortest / 8.0);
    let estimate = |h: f64| big.pieces.iter().map(|&(e, a, b)| ((b - a) * g.edge_length(e) / h).ceil() as usize + 1).sum::<usize>();
    while estimate(h) > opts.max_unknowns {
        h *= 1.25;
    }

    let mut vertex_node: HashMap<VertexId, usize> = HashMap::new();
    let mut nodes = 0usize;
    let mut stiff = Vec::new();
    let mut mass = Vec::new();
    for &(e, a, b) in &big.pieces {
        let ed = g.edge(e);
        let l = g.edge_length(e);
        let mut breaks = vec![a, b];
        for &(e2, c, d) in &small.pieces {
            if e2 == e {
                breaks.extend([c, d].into_iter().filter(|&t| t > a && t < b));
            }
        }
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        let mut ts = vec![a];
        for w in breaks.windows(2) {
            let k = (((w[1] - w[0]) * l / h).ceil() as usize).max(1);
            ts.extend((1..=k).map(|i| w[0] + (w[1] - w[0]) * i as f64 / k as f64));
        }
        let mut node_of = |t: f64, first_or_last: bool| -> usize {
            let v = if first_or_last && t == 0.0 {
                Some(ed.u)
            } else if first_or_last && t == 1.0 {
                Some(ed.v)
            } else {
                None
            };
            match v {
                Some(v) => *vertex_node.entry(v).or_insert_with(|| {
                    nodes += 1;
                    nodes - 1
                }),
                None => {
                    nodes += 1;
                    nodes - 1
                }
            }
        };
        let ids: Vec<usize> = ts.iter().enumerate().map(|(i, &t)| node_of(t, i == 0 || i + 1 == ts.len())).collect();
        for k in 0..ts.len() - 1 {
            let s = (ts[k + 1] - ts[k]) * l;
            if s <= 0.0 {
                continue;
            }
            let (i, j) = (ids[k], ids[k + 1]);
            let kk = l / s;
            stiff.extend([(i, i, kk), (j, j, kk), (i, j, -kk), (j, i, -kk)]);
            let mid = CablePoint { edge: e, t: 0.5 * (ts[k] + ts[k + 1]) };
            if small.pieces.iter().any(|&(e2, c, d)| e2 == e && c <= mid.t && mid.t <= d) {
                let m = l * s / 6.0;
                mass.extend([(i, i, 2.0 * m), (j, j, 2.0 * m), (i, j, m), (j, i, m)]);
            }
        }
    }
    if nodes < 2 || mass.is_empty() {
        return Err(MetricError::EigenSolverFailure("ball carries no mesh".into()));
    }
    let k = CsrMatrix::from_triplets(nodes, stiff);
    let m = CsrMatrix::from_triplets(nodes, mass);
    let m1 = m.mul(&vec![1.0; nodes]);
    let total: f64 = m1.iter().sum();
    let centred = |x: &[f64]| -> Vec<f64> {
        let c = dot(&m1, x) / total;
        let mut y = m.mul(x);
        for i in 0..nodes {
            y[i] -= m1[i] * c;
        }
        y
    };

    let mut x: Vec<f64> = (0..nodes).map(|i| ((i as f64) * 0.754_877_666).sin() + 0.1).collect();
    let mut y = vec![0.0; nodes];
    let mut lambda = 0.0;
    for it in 1..=opts.max_iter {
        let rhs = centred(&x);
        let out = conjugate_gradient(&k, &rhs, &mut y, 1e-12, 20 * nodes + 100);
        if !out.converged && out.relative_residual > 1e-8 {
            return Err(MetricError::EigenSolverFailure(format!(
                "stiffness solve stalled at residual {:.3e}",
                out.relative_residual
            )));
        }
        let mean = y.iter().sum::<f64>() / nodes as f64;
        y.iter_mut().for_each(|v| *v -= mean);
        let num = dot(&y, &centred(&y));
        let den = dot(&y, &k.mul(&y));
        if !(den > 0.0) {
            return Err(MetricError::EigenSolverFailure("degenerate iterate".into()));
        }
        let next = num / den;
        let scale = y.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        x.iter_mut().zip(&y).for_each(|(xi, yi)| *xi = yi / scale);
        if (next - lambda).abs() <= opts.tol * next {
            return Ok(PoincareReport { kappa: next / (r * r), h, unknowns: nodes, iterations: it });
        }
        lambda = next;
    }
    Err(MetricError::EigenSolverFailure(format!("power iteration did not settle in {} steps", opts.max_iter)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveReport {
    /// Points of X visited by the curve in order; the straight connectors to
    /// the two ideal endpoints are not listed.
    pub polyline: Vec<CablePoint>,
    pub length: f64,
    /// `length / |ξ1 − ξ2|`.
    pub c_len: f64,
    /// Minimum over listed points of `d0(Γ(t), ∂U) / min(t, L − t)`.
    pub c_depth: f64,
}

/// d0 to the unit circle through the outer vertices of `g`.
pub fn boundary_distance_field(g: &EmbeddedGraph) -> Vec<f64> {
    let src: Vec<(VertexId, f64)> = g.outer_vertices().into_iter().map(|v| (v, (1.0 - g.position(v).norm()).max(0.0))).collect();
    dijkstra(g, &src).0
}

fn along_field(g: &EmbeddedGraph, field: &[f64], p: CablePoint) -> f64 {
    let e = g.edge(p.edge);
    let l = g.edge_length(p.edge);
    (field[e.u] + p.t * l).min(field[e.v] + (1.0 - p.t) * l)
}

/// Curve from `e^{iξ1}` to `e^{iξ2}` following the circle orthogonal to the
/// unit circle through both points, routed inside X between consecutive
/// crossings of that circle with the edges.
pub fn inner_uniform_curve(g: &EmbeddedGraph, xi1: f64, xi2: f64) -> Result<CurveReport, MetricError> {
    let (z1, z2) = (Point::polar(1.0, xi1), Point::polar(1.0, xi2));
    let half = 0.5 * angle_diff(xi2, xi1);
    if half.abs() < 1e-12 {
        return Err(MetricError::InvalidArgument("ξ1 and ξ2 coincide".into()));
    }
    // crossings keyed by a monotone parameter along the curve
    let mut crossings: Vec<(f64, CablePoint)> = Vec::new();
    if (half.abs() - std::f64::consts::FRAC_PI_2).abs() < 1e-9 {
        let dir = z2 - z1;
        let normal = Point::new(-dir.y, dir.x);
        for (id, e) in g.edges().iter().enumerate() {
            let (a, b) = (g.position(e.u), g.position(e.v));
            let (sa, sb) = (normal.dot(a - z1), normal.dot(b - z1));
            if (sa <= 0.0 && sb >= 0.0) || (sa >= 0.0 && sb <= 0.0) {
                let t = if sa == sb { 0.0 } else { sa / (sa - sb) };
                let p = a.lerp(b, t);
                crossings.push((dir.dot(p - z1), CablePoint::new(id, t)));
            }
        }
    } else {
        let mid = xi1 + half;
        let c = Point::polar(1.0 / half.cos().abs(), mid);
        let rad = half.tan().abs();
        let phi1 = (z1 - c).arg();
        for (id, e) in g.edges().iter().enumerate() {
            let (a, b) = (g.position(e.u), g.position(e.v));
            for t in segment_circle_params(a, b, c, rad) {
                let p = a.lerp(b, t);
                crossings.push((angle_diff((p - c).arg(), phi1).abs(), CablePoint::new(id, t)));
            }
        }
    }
    if crossings.is_empty() {
        return Err(MetricError::ArcMissesGraph);
    }
    crossings.sort_by(|a, b| a.0.total_cmp(&b.0));
    crossings.dedup_by(|a, b| a.1.position(g).dist(b.1.position(g)) < 1e-12);

    let mut polyline = vec![crossings[0].1];
    let mut length = z1.dist(crossings[0].1.position(g));
    let mut arclen = vec![length];
    for w in crossings.windows(2) {
        let f = DistanceField::new(g, w[0].1);
        let route = f.path_to(g, w[1].1);
        for q in route.windows(2) {
            length += d0(g, q[0], q[1]);
            polyline.push(q[1]);
            arclen.push(length);
        }
    }
    let last = *polyline.last().expect("nonempty");
    length += last.position(g).dist(z2);
    let field = boundary_distance_field(g);
    let c_depth = polyline
        .iter()
        .zip(&arclen)
        .filter_map(|(p, &t)| {
            let m = t.min(length - t);
            (m > 0.0).then(|| along_field(g, &field, *p) / m)
        })
        .fold(f64::INFINITY, f64::min);
    Ok(CurveReport { c_len: length / z1.dist(z2), polyline, length, c_depth })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{path, square_grid, triangular_lattice, unit_triangle};
    use std::f64::consts::PI;

    fn vertex_point(g: &EmbeddedGraph, v: VertexId) -> CablePoint {
        CablePoint::at_vertex(g, v)
    }

    #[test]
    fn same_edge_and_square_corners() {
        let g = square_grid(2, 2);
        let e = g.edge_between(0, 1).unwrap();
        let (x, y) = (CablePoint::new(e, 0.2), CablePoint::new(e, 0.9));
        assert!((d0(&g, x, y) - 0.7).abs() < 1e-15);
        assert!((d0(&g, vertex_point(&g, 0), vertex_point(&g, 3)) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn triangle_ball_at_vertex() {
        let g = unit_triangle();
        let b = ball_d0(&g, vertex_point(&g, 0), 0.5);
        assert_eq!(b.pieces.len(), 2);
        assert!((b.measure - 1.0).abs() < 1e-15);
        assert_eq!(ball_d0(&g, vertex_point(&g, 0), 0.0).measure, 0.0);
        let whole = ball_d0(&g, vertex_point(&g, 0), 5.0);
        assert!((whole.measure - 3.0).abs() < 1e-15);
    }

    #[test]
    fn bilipschitz_samples() {
        let g = square_grid(2, 2);
        let diag = d0(&g, vertex_point(&g, 0), vertex_point(&g, 3)) / g.position(0).dist(g.position(3));
        assert!((diag - 2f64.sqrt()).abs() < 1e-15);
        // midpoints of opposite sides realise the supremum 2
        let c = bilipschitz_constant(&g, 20_000, 1);
        assert!(c <= 2.0 + 1e-12 && c > 1.9, "{c}");
        let t = unit_triangle();
        assert!(bilipschitz_constant(&t, 5000, 2) <= 2.0 + 1e-12);
    }

    #[test]
    fn doubling_small_and_large() {
        let g = triangular_lattice(12);
        let x = vertex_point(&g, 0);
        let small = doubling_ratio(&g, x, 0.1).unwrap();
        assert!((small - 2.0).abs() < 1e-12, "{small}");
        let big = doubling_ratio(&g, x, 4.0).unwrap();
        assert!((big - 4.0).abs() < 0.6, "{big}");
        assert!(matches!(doubling_ratio(&g, x, 7.0), Err(MetricError::BallEscapesCarrier { .. })));
    }

    #[test]
    fn cones() {
        let g = unit_triangle();
        let c = cone(&g, 0, 2.0, AngleInterval::centered(0.0, 0.2));
        let e01 = g.edge_between(0, 1).unwrap();
        assert!(c.pieces.contains(&(e01, 0.0, 1.0)));
        // the far edge enters the wedge near (1, 0): arg ≤ 0.1 up to the crossing
        let e12 = g.edge_between(1, 2).unwrap();
        let piece = c.pieces.iter().find(|p| p.0 == e12).unwrap();
        let (a, b) = (g.position(1), g.position(2));
        let crossing = a.lerp(b, if g.edge(e12).u == 1 { piece.2 } else { piece.1 });
        assert!((crossing.arg() - 0.1).abs() < 1e-12);
        let full = cone(&g, 0, 0.5, AngleInterval::full());
        assert!((full.measure - 1.0).abs() < 1e-15);
    }

    #[test]
    fn single_edge_poincare() {
        let l = 3.0;
        let g = EmbeddedGraph::build(vec![Point::ORIGIN, Point::new(l, 0.0)], vec![(0, 1, 1.0)]).unwrap();
        let r = l / 2.0;
        let opts = PoincareOptions { blowup: 1.0, h: Some(l / 64.0), check_carrier: false, ..Default::default() };
        let rep = poincare_with(&g, CablePoint::new(0, 0.5), r, &opts).unwrap();
        let exact = (l / (PI * r)).powi(2);
        assert!((rep.kappa / exact - 1.0).abs() < 1e-3, "{} vs {exact}", rep.kappa);
    }

    #[test]
    fn path_poincare_matches_interval() {
        // a straight path is an interval with the same Neumann spectrum
        let g = path(4);
        let opts = PoincareOptions { blowup: 1.0, h: Some(1.0 / 32.0), check_carrier: false, ..Default::default() };
        let rep = poincare_with(&g, CablePoint::at_vertex(&g, 2), 2.0, &opts).unwrap();
        assert!((rep.kappa / (4.0 / (PI * PI) / 1.0) - 1.0).abs() < 2e-3, "{}", rep.kappa);
    }

    #[test]
    fn lattice_curve() {
        // scale a lattice patch into the unit disc
        let lat = triangular_lattice(6);
        let s = 0.95 / 6.0;
        let pos = lat.positions().iter().map(|&p| p * s).collect();
        let edges = lat.edges().iter().map(|e| (e.u, e.v, 1.0)).collect();
        let g = EmbeddedGraph::build(pos, edges).unwrap();
        let c = inner_uniform_curve(&g, 0.1, 0.1 + PI).unwrap();
        assert!(c.c_len.is_finite() && c.c_len >= 1.0);
        assert!(c.c_depth > 0.0);
        let near = inner_uniform_curve(&g, 0.1, 0.9).unwrap();
        assert!(near.c_len.is_finite());
    }
}
