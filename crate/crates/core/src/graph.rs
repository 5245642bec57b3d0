//! Straight-line embedded planar graphs with weighted edges.
//!
//! A graph is validated once in [`EmbeddedGraph::build`] and is immutable
//! afterwards. Faces are traced from the rotation system given by the angular
//! order of neighbours around each vertex.

use std::collections::VecDeque;

use serde::Serialize;

use crate::error::GraphError;
use crate::geom::{
    ccw_angle, point_segment_distance, polygon_diameter, segments_intersect, signed_area, Point,
};

pub type VertexId = usize;
pub type EdgeId = usize;

/// Relative tolerance for duplicate-position and crossing detection.
pub const GEOM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Edge {
    /// Lower endpoint id.
    pub u: VertexId,
    pub v: VertexId,
    pub weight: f64,
}

impl Edge {
    pub fn other(&self, x: VertexId) -> VertexId {
        if x == self.u {
            self.v
        } else {
            self.u
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Face {
    /// Cyclic vertex list, counterclockwise for bounded faces.
    pub boundary: Vec<VertexId>,
    pub bounded: bool,
    pub area: f64,
    pub diameter: f64,
}

/// One incidence in a vertex's rotation: the neighbour and the connecting edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Incidence {
    pub to: VertexId,
    pub edge: EdgeId,
}

#[derive(Debug, Clone)]
pub struct EmbeddedGraph {
    positions: Vec<Point>,
    edges: Vec<Edge>,
    /// Neighbours sorted counterclockwise by direction.
    rotation: Vec<Vec<Incidence>>,
    faces: Vec<Face>,
    isolation: Vec<f64>,
    vertex_weight: Vec<f64>,
    max_degree: usize,
}

impl EmbeddedGraph {
    pub fn build(positions: Vec<Point>, edges: Vec<(VertexId, VertexId, f64)>) -> Result<Self, GraphError> {
        let n = positions.len();
        if n == 0 {
            return Err(GraphError::Empty);
        }
        if let Some(i) = positions.iter().position(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(GraphError::NonFinitePosition(i));
        }
        let mut seen = std::collections::HashSet::new();
        let mut canon = Vec::with_capacity(edges.len());
        for (a, b, w) in edges {
            if a >= n || b >= n {
                return Err(GraphError::UnknownVertex(a.max(b)));
            }
            if a == b {
                return Err(GraphError::SelfLoop(a));
            }
            if !(w > 0.0 && w.is_finite()) {
                return Err(GraphError::NonPositiveWeight { u: a, v: b, weight: w });
            }
            let (u, v) = (a.min(b), a.max(b));
            if !seen.insert((u, v)) {
                return Err(GraphError::MultiEdge(u, v));
            }
            canon.push(Edge { u, v, weight: w });
        }

        let mut rotation: Vec<Vec<Incidence>> = vec![Vec::new(); n];
        for (id, e) in canon.iter().enumerate() {
            rotation[e.u].push(Incidence { to: e.v, edge: id });
            rotation[e.v].push(Incidence { to: e.u, edge: id });
        }
        let east = Point::new(1.0, 0.0);
        for (v, inc) in rotation.iter_mut().enumerate() {
            let p = positions[v];
            inc.sort_by(|a, b| {
                let ta = ccw_angle(east, positions[a.to] - p);
                let tb = ccw_angle(east, positions[b.to] - p);
                ta.total_cmp(&tb).then(a.to.cmp(&b.to))
            });
        }

        let mut g = EmbeddedGraph {
            positions,
            edges: canon,
            rotation,
            faces: Vec::new(),
            isolation: Vec::new(),
            vertex_weight: Vec::new(),
            max_degree: 0,
        };
        g.check_connected()?;
        g.check_duplicates()?;
        g.check_crossings()?;
        g.max_degree = g.rotation.iter().map(Vec::len).max().unwrap_or(0);
        g.vertex_weight = g
            .rotation
            .iter()
            .map(|inc| inc.iter().map(|i| g.edges[i.edge].weight).sum())
            .collect();
        g.isolation = compute_isolation(&g.positions);
        g.faces = g.trace_faces();
        Ok(g)
    }

    fn check_connected(&self) -> Result<(), GraphError> {
        let n = self.positions.len();
        let mut seen = vec![false; n];
        let mut q = VecDeque::from([0]);
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = q.pop_front() {
            for inc in &self.rotation[v] {
                if !seen[inc.to] {
                    seen[inc.to] = true;
                    count += 1;
                    q.push_back(inc.to);
                }
            }
        }
        if count == n {
            Ok(())
        } else {
            Err(GraphError::Disconnected { reached: count, total: n })
        }
    }

    fn local_scale(&self, v: VertexId) -> f64 {
        self.rotation[v]
            .iter()
            .map(|i| self.positions[v].dist(self.positions[i.to]))
            .fold(0.0, f64::max)
    }

    fn check_duplicates(&self) -> Result<(), GraphError> {
        let mut order: Vec<VertexId> = (0..self.positions.len()).collect();
        order.sort_by(|&a, &b| self.positions[a].x.total_cmp(&self.positions[b].x));
        for (k, &a) in order.iter().enumerate() {
            let pa = self.positions[a];
            for &b in &order[k + 1..] {
                let pb = self.positions[b];
                let tol = GEOM_TOL * self.local_scale(a).max(self.local_scale(b));
                if pb.x - pa.x > tol {
                    break;
                }
                if pa.dist(pb) <= tol {
                    return Err(GraphError::DuplicatePosition(a.min(b), a.max(b)));
                }
            }
        }
        Ok(())
    }

    /// Sweep over edges sorted by their leftmost x; only pairs with
    /// overlapping x-extent are tested.
    fn check_crossings(&self) -> Result<(), GraphError> {
        let ext: Vec<(f64, f64)> = self
            .edges
            .iter()
            .map(|e| {
                let (a, b) = (self.positions[e.u].x, self.positions[e.v].x);
                (a.min(b), a.max(b))
            })
            .collect();
        let mut order: Vec<EdgeId> = (0..self.edges.len()).collect();
        order.sort_by(|&a, &b| ext[a].0.total_cmp(&ext[b].0));
        for (k, &i) in order.iter().enumerate() {
            let ei = self.edges[i];
            let (a, b) = (self.positions[ei.u], self.positions[ei.v]);
            let slack = GEOM_TOL * a.dist(b);
            for &j in &order[k + 1..] {
                if ext[j].0 > ext[i].1 + slack {
                    break;
                }
                let ej = self.edges[j];
                let (c, d) = (self.positions[ej.u], self.positions[ej.v]);
                let shared = [ei.u, ei.v].iter().find(|x| **x == ej.u || **x == ej.v).copied();
                let bad = match shared {
                    None => segments_intersect(a, b, c, d, GEOM_TOL),
                    Some(s) => {
                        // adjacent edges only conflict if they overlap along a common direction
                        let p = self.positions[s];
                        let fi = self.positions[ei.other(s)];
                        let fj = self.positions[ej.other(s)];
                        let tol = GEOM_TOL * a.dist(b).max(c.dist(d));
                        (point_segment_distance(fj, p, fi) <= tol)
                            || (point_segment_distance(fi, p, fj) <= tol)
                    }
                };
                if bad {
                    return Err(GraphError::EdgeCrossing {
                        first: (ei.u, ei.v),
                        second: (ej.u, ej.v),
                    });
                }
            }
        }
        Ok(())
    }

    fn trace_faces(&self) -> Vec<Face> {
        // half-edge (v, k) is the k-th incidence of v, directed v -> to
        let mut used: Vec<Vec<bool>> = self.rotation.iter().map(|r| vec![false; r.len()]).collect();
        let mut faces = Vec::new();
        for v0 in 0..self.positions.len() {
            for k0 in 0..self.rotation[v0].len() {
                if used[v0][k0] {
                    continue;
                }
                let mut cycle = Vec::new();
                let (mut v, mut k) = (v0, k0);
                while !used[v][k] {
                    used[v][k] = true;
                    cycle.push(v);
                    let w = self.rotation[v][k].to;
                    let back = self.rotation[w].iter().position(|i| i.to == v).expect("symmetric rotation");
                    let deg = self.rotation[w].len();
                    k = (back + deg - 1) % deg;
                    v = w;
                }
                let poly: Vec<Point> = cycle.iter().map(|&i| self.positions[i]).collect();
                let area = signed_area(&poly);
                faces.push(Face {
                    diameter: polygon_diameter(&poly),
                    boundary: cycle,
                    bounded: true,
                    area,
                });
            }
        }
        if faces.is_empty() {
            // a lone vertex: the whole plane is the single face
            faces.push(Face { boundary: vec![0], bounded: false, area: 0.0, diameter: 0.0 });
            return faces;
        }
        let outer = faces
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.area.total_cmp(&b.1.area))
            .map(|(i, _)| i)
            .expect("connected graph has a face");
        faces[outer].bounded = false;
        faces[outer].area = faces[outer].area.abs();
        faces
    }

    pub fn vertex_count(&self) -> usize {
        self.positions.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn position(&self, v: VertexId) -> Point {
        self.positions[v]
    }

    pub fn positions(&self) -> &[Point] {
        &self.positions
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: EdgeId) -> &Edge {
        &self.edges[e]
    }

    pub fn edge_length(&self, e: EdgeId) -> f64 {
        let ed = &self.edges[e];
        self.positions[ed.u].dist(self.positions[ed.v])
    }

    pub fn edge_between(&self, a: VertexId, b: VertexId) -> Option<EdgeId> {
        self.rotation[a].iter().find(|i| i.to == b).map(|i| i.edge)
    }

    /// Neighbours of `v` in counterclockwise order.
    pub fn rotation(&self, v: VertexId) -> &[Incidence] {
        &self.rotation[v]
    }

    pub fn neighbors(&self, v: VertexId) -> impl Iterator<Item = VertexId> + '_ {
        self.rotation[v].iter().map(|i| i.to)
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.rotation[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    /// Total conductance `w_v` at a vertex.
    pub fn vertex_weight(&self, v: VertexId) -> f64 {
        self.vertex_weight[v]
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn bounded_faces(&self) -> impl Iterator<Item = &Face> {
        self.faces.iter().filter(|f| f.bounded)
    }

    pub fn outer_face(&self) -> &Face {
        self.faces.iter().find(|f| !f.bounded).expect("one unbounded face")
    }

    /// Distance from `u` to its nearest other vertex.
    pub fn isolation_radius(&self, u: VertexId) -> Result<f64, GraphError> {
        if self.positions.len() < 2 {
            return Err(GraphError::SingletonGraph);
        }
        Ok(self.isolation[u])
    }

    pub fn isolation_radii(&self) -> &[f64] {
        &self.isolation
    }

    /// Vertices within closed Euclidean distance `r` of `center`, ascending.
    pub fn euclidean_ball_vertices(&self, center: Point, r: f64) -> Vec<VertexId> {
        (0..self.positions.len()).filter(|&v| self.positions[v].dist(center) <= r).collect()
    }

    /// External vertex boundary of `set`, ascending.
    pub fn vertex_boundary(&self, set: &[VertexId]) -> Vec<VertexId> {
        let mut inside = vec![false; self.positions.len()];
        for &v in set {
            inside[v] = true;
        }
        let mut mark = vec![false; self.positions.len()];
        for &v in set {
            for w in self.neighbors(v) {
                if !inside[w] {
                    mark[w] = true;
                }
            }
        }
        (0..mark.len()).filter(|&v| mark[v]).collect()
    }

    /// Whether the closed disc `B(center, r)` lies inside the union of bounded faces.
    pub fn disc_in_carrier(&self, center: Point, r: f64) -> bool {
        let outer = self.outer_face();
        let in_carrier = self.bounded_faces().any(|f| {
            let poly: Vec<Point> = f.boundary.iter().map(|&v| self.positions[v]).collect();
            crate::geom::point_in_polygon(center, &poly)
                || poly
                    .iter()
                    .zip(poly.iter().cycle().skip(1))
                    .any(|(&a, &b)| point_segment_distance(center, a, b) == 0.0)
        });
        if !in_carrier {
            return false;
        }
        let b = &outer.boundary;
        (0..b.len()).all(|i| {
            let a = self.positions[b[i]];
            let c = self.positions[b[(i + 1) % b.len()]];
            point_segment_distance(center, a, c) > r
        })
    }

    /// Vertices on the unbounded face.
    pub fn outer_vertices(&self) -> Vec<VertexId> {
        let mut v = self.outer_face().boundary.clone();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Breadth-first hop distances from `src`.
    pub fn hop_distances(&self, src: VertexId) -> Vec<usize> {
        let mut d = vec![usize::MAX; self.positions.len()];
        d[src] = 0;
        let mut q = VecDeque::from([src]);
        while let Some(v) = q.pop_front() {
            for w in self.neighbors(v) {
                if d[w] == usize::MAX {
                    d[w] = d[v] + 1;
                    q.push_back(w);
                }
            }
        }
        d
    }

    /// Vertex nearest to a point (lowest id on ties).
    pub fn nearest_vertex(&self, p: Point) -> VertexId {
        (0..self.positions.len())
            .min_by(|&a, &b| self.positions[a].dist(p).total_cmp(&self.positions[b].dist(p)))
            .expect("nonempty graph")
    }
}

fn compute_isolation(pos: &[Point]) -> Vec<f64> {
    let n = pos.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| pos[a].x.total_cmp(&pos[b].x));
    let mut best = vec![f64::INFINITY; n];
    for k in 0..n {
        let a = order[k];
        for &b in &order[k + 1..] {
            if pos[b].x - pos[a].x > best[a] {
                break;
            }
            let d = pos[a].dist(pos[b]);
            best[a] = best[a].min(d);
            best[b] = best[b].min(d);
        }
        for &b in order[..k].iter().rev() {
            if pos[a].x - pos[b].x > best[a] {
                break;
            }
            best[a] = best[a].min(pos[a].dist(pos[b]));
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{square_grid as grid, unit_triangle as tri3};

    #[test]
    fn triangle_has_two_faces() {
        let g = tri3();
        assert_eq!(g.faces().len(), 2);
        assert_eq!(g.bounded_faces().count(), 1);
        let f = g.bounded_faces().next().unwrap();
        assert!((f.area - 3f64.sqrt() / 4.0).abs() < 1e-15);
    }

    #[test]
    fn duplicated_direction_chord_is_a_crossing() {
        let h = 3f64.sqrt() / 2.0;
        let pos = vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(0.5, h), Point::new(0.5, 0.0)];
        // the extra vertex sits on edge 0-1; the chord 2-3 touches its interior
        let r = EmbeddedGraph::build(pos, vec![(0, 1, 1.0), (1, 2, 1.0), (2, 0, 1.0), (2, 3, 1.0)]);
        assert!(matches!(r, Err(GraphError::EdgeCrossing { .. })));
        let pos = vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(2.0, 0.0)];
        let r = EmbeddedGraph::build(pos, vec![(0, 1, 1.0), (0, 2, 1.0)]);
        assert!(matches!(r, Err(GraphError::EdgeCrossing { .. })));
    }

    #[test]
    fn rejects_bad_input() {
        let p = vec![Point::new(0.0, 0.0), Point::new(0.0, 0.0)];
        assert!(matches!(EmbeddedGraph::build(p, vec![(0, 1, 1.0)]), Err(GraphError::DuplicatePosition(0, 1))));
        let p = vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(5.0, 5.0)];
        assert!(matches!(EmbeddedGraph::build(p, vec![(0, 1, 1.0)]), Err(GraphError::Disconnected { .. })));
        let p = vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0)];
        assert!(matches!(
            EmbeddedGraph::build(p, vec![(0, 1, -1.0)]),
            Err(GraphError::NonPositiveWeight { .. })
        ));
        let g = EmbeddedGraph::build(vec![Point::ORIGIN], vec![]).unwrap();
        assert!(matches!(g.isolation_radius(0), Err(GraphError::SingletonGraph)));
    }

    #[test]
    fn grid_faces_follow_euler() {
        let g = grid(3, 3);
        let bounded: Vec<&Face> = g.bounded_faces().collect();
        assert_eq!(bounded.len(), 4);
        // Euler oracle: F = 2 - V + E
        assert_eq!(g.faces().len() as i64, 2 - g.vertex_count() as i64 + g.edge_count() as i64);
        for f in bounded {
            assert!((f.area - 1.0).abs() < 1e-15);
            assert!((f.diameter - 2f64.sqrt()).abs() < 1e-15);
            assert_eq!(f.boundary.len(), 4);
        }
        let outer_area: f64 = g.outer_face().area;
        let sum: f64 = g.bounded_faces().map(|f| f.area).sum();
        assert!((outer_area - sum).abs() < 1e-12);
    }

    #[test]
    fn isolation_and_balls() {
        let g = tri3();
        for v in 0..3 {
            assert!((g.isolation_radius(v).unwrap() - 1.0).abs() < 1e-15);
        }
        assert_eq!(g.euclidean_ball_vertices(Point::ORIGIN, 0.5), vec![0]);
        assert_eq!(g.euclidean_ball_vertices(Point::ORIGIN, 1.0), vec![0, 1, 2]);
        let gr = grid(3, 3);
        assert_eq!(gr.isolation_radius(0).unwrap(), 1.0);
        let c = gr.euclidean_ball_vertices(Point::new(1.0, 1.0), 1.0);
        assert_eq!(c, vec![1, 3, 4, 5, 7]);
        assert_eq!(gr.vertex_boundary(&[4]), vec![1, 3, 5, 7]);
        let all: Vec<usize> = (0..9).collect();
        assert!(gr.vertex_boundary(&all).is_empty());
    }

    #[test]
    fn carrier_disc_test() {
        let g = grid(3, 3);
        assert!(g.disc_in_carrier(Point::new(1.0, 1.0), 0.9));
        assert!(!g.disc_in_carrier(Point::new(1.0, 1.0), 1.0));
        assert!(!g.disc_in_carrier(Point::new(3.0, 1.0), 0.1));
    }
}
