//! Test corpora: small fixtures, lattice patches, hyperbolic balls and
//! Delaunay triangulations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::GraphError;
use crate::geom::{orient, Point};
use crate::graph::{EmbeddedGraph, VertexId};
use crate::triangulation::Triangulation;

pub const DEFAULT_VERTEX_CAP: usize = 200_000;

/// Equilateral unit triangle on (0,0), (1,0), (1/2, √3/2).
pub fn unit_triangle() -> EmbeddedGraph {
    let pos = vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(0.5, 3f64.sqrt() / 2.0)];
    EmbeddedGraph::build(pos, vec![(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).expect("valid fixture")
}

/// `nx × ny` vertices on the integer lattice; vertex `(i, j)` has id `j * nx + i`.
pub fn square_grid(nx: usize, ny: usize) -> EmbeddedGraph {
    let mut pos = Vec::with_capacity(nx * ny);
    let mut edges = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            let id = j * nx + i;
            pos.push(Point::new(i as f64, j as f64));
            if i + 1 < nx {
                edges.push((id, id + 1, 1.0));
            }
            if j + 1 < ny {
                edges.push((id, id + nx, 1.0));
            }
        }
    }
    EmbeddedGraph::build(pos, edges).expect("valid grid")
}

/// Path of `k` unit edges along the x axis.
pub fn path(k: usize) -> EmbeddedGraph {
    let pos = (0..=k).map(|i| Point::new(i as f64, 0.0)).collect();
    let edges = (0..k).map(|i| (i, i + 1, 1.0)).collect();
    EmbeddedGraph::build(pos, edges).expect("valid path")
}

/// Hexagonal patch of the unit triangular lattice with all vertices at hex
/// distance at most `radius` from the origin. Vertex 0 is the origin.
pub fn triangular_lattice(radius: usize) -> EmbeddedGraph {
    let r = radius as i64;
    let mut coords = vec![(0i64, 0i64)];
    for a in -r..=r {
        for b in -r..=r {
            let c = -a - b;
            if (a, b) != (0, 0) && c.abs() <= r {
                coords.push((a, b));
            }
        }
    }
    let index: std::collections::HashMap<(i64, i64), usize> =
        coords.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    let h = 3f64.sqrt() / 2.0;
    let pos = coords.iter().map(|&(a, b)| Point::new(a as f64 + 0.5 * b as f64, h * b as f64)).collect();
    let mut edges = Vec::new();
    for (i, &(a, b)) in coords.iter().enumerate() {
        for (da, db) in [(1, 0), (0, 1), (-1, 1)] {
            if let Some(&j) = index.get(&(a + da, b + db)) {
                edges.push((i, j, 1.0));
            }
        }
    }
    EmbeddedGraph::build(pos, edges).expect("valid lattice")
}

/// Combinatorial ball of radius `depth` around a vertex of the regular
/// triangulation with all vertex degrees `deg`.
pub fn generate_hyperbolic(deg: usize, depth: usize) -> Result<Triangulation, GraphError> {
    generate_hyperbolic_capped(deg, depth, DEFAULT_VERTEX_CAP)
}

pub fn generate_hyperbolic_capped(deg: usize, depth: usize, cap: usize) -> Result<Triangulation, GraphError> {
    if deg < 7 {
        return Err(GraphError::InvalidArgument(format!("degree {deg} < 7 is not hyperbolic")));
    }
    if depth == 0 {
        return Err(GraphError::InvalidArgument("depth must be at least 1".into()));
    }
    let mut degree = vec![deg];
    let mut tris: Vec<[VertexId; 3]> = Vec::new();
    let mut ring: Vec<VertexId> = (1..=deg).collect();
    for i in 0..deg {
        tris.push([0, ring[i], ring[(i + 1) % deg]]);
        degree.push(3);
    }
    let mut n = deg + 1;
    if n > cap {
        return Err(GraphError::SizeCapExceeded { cap });
    }
    for _ in 1..depth {
        let m = ring.len();
        let need: Vec<usize> = ring.iter().map(|&u| deg - degree[u]).collect();
        let fresh: usize = need.iter().map(|k| k - 1).sum();
        if n + fresh > cap {
            return Err(GraphError::SizeCapExceeded { cap });
        }
        // outer[i] lists the new neighbours of ring[i] in ccw order; consecutive
        // ring vertices share one endpoint.
        let mut outer: Vec<Vec<VertexId>> = Vec::with_capacity(m);
        let first_shared = n;
        let mut next_id = n;
        for i in 0..m {
            let mut list = Vec::with_capacity(need[i]);
            list.push(if i == 0 { first_shared } else { *outer[i - 1].last().expect("nonempty") });
            if i == 0 {
                next_id += 1;
            }
            for k in 1..need[i] {
                if i == m - 1 && k == need[i] - 1 {
                    list.push(first_shared);
                } else {
                    list.push(next_id);
                    next_id += 1;
                }
            }
            outer.push(list);
        }
        degree.resize(next_id, 0);
        let mut new_ring = Vec::with_capacity(fresh);
        for i in 0..m {
            let u = ring[i];
            let list = &outer[i];
            for w in list.windows(2) {
                tris.push([u, w[0], w[1]]);
            }
            let last = *list.last().expect("nonempty");
            tris.push([ring[(i + 1) % m], u, last]);
            degree[u] += list.len();
            for (k, &w) in list.iter().enumerate() {
                // interior new vertices see u and two ring neighbours; shared ones see two old vertices
                degree[w] += if k == 0 || k == list.len() - 1 { 2 } else { 3 };
            }
            new_ring.extend_from_slice(&list[..list.len() - 1]);
        }
        n = next_id;
        ring = new_ring;
    }
    Triangulation::new(n, tris).map_err(|e| GraphError::InvalidArgument(e.to_string()))
}

/// Delaunay triangulation of `n` points spread over the unit disc with a
/// minimum separation, deterministic in `seed`.
pub fn generate_delaunay(n: usize, seed: u64) -> Result<EmbeddedGraph, GraphError> {
    if n < 3 {
        return Err(GraphError::InvalidArgument("need at least 3 points".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sep = 0.5 * (std::f64::consts::PI / n as f64).sqrt();
    let mut pts: Vec<Point> = Vec::with_capacity(n);
    let mut misses = 0usize;
    while pts.len() < n {
        let p = Point::polar(rng.gen::<f64>().sqrt(), rng.gen::<f64>() * std::f64::consts::TAU);
        if pts.iter().all(|q| q.dist(p) >= sep) {
            pts.push(p);
            misses = 0;
        } else {
            misses += 1;
            if misses > 10_000 {
                sep *= 0.9;
                misses = 0;
            }
        }
    }
    delaunay_of(pts)
}

/// Bowyer–Watson over the given points; exact-zero in-circle ties are
/// treated as outside, which acts as a consistent perturbation.
pub fn delaunay_of(pts: Vec<Point>) -> Result<EmbeddedGraph, GraphError> {
    let n = pts.len();
    for i in 0..n {
        for j in (i + 1)..n {
            if pts[i] == pts[j] {
                return Err(GraphError::DegenerateConfiguration(format!("points {i} and {j} coincide")));
            }
        }
    }
    let span = pts.iter().map(|p| p.norm()).fold(1.0, f64::max);
    let big = 64.0 * span;
    let mut all = pts.clone();
    all.push(Point::new(-big, -big));
    all.push(Point::new(big, -big));
    all.push(Point::new(0.0, big));
    let mut tris: Vec<[usize; 3]> = vec![[n, n + 1, n + 2]];
    for (i, &p) in pts.iter().enumerate() {
        let mut bad = Vec::new();
        let mut keep = Vec::new();
        for t in tris.drain(..) {
            if in_circumcircle(all[t[0]], all[t[1]], all[t[2]], p) {
                bad.push(t);
            } else {
                keep.push(t);
            }
        }
        // cavity boundary: directed edges of bad triangles whose reverse is not in a bad triangle
        let mut cavity = Vec::new();
        for t in &bad {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                let shared = bad.iter().any(|s| (0..3).any(|m| s[m] == b && s[(m + 1) % 3] == a));
                if !shared {
                    cavity.push((a, b));
                }
            }
        }
        for (a, b) in cavity {
            keep.push([a, b, i]);
        }
        tris = keep;
    }
    let mut edges: Vec<(usize, usize, f64)> = Vec::new();
    for t in tris.iter().filter(|t| t.iter().all(|&v| v < n)) {
        for k in 0..3 {
            let (a, b) = (t[k], t[(k + 1) % 3]);
            edges.push((a.min(b), a.max(b), 1.0));
        }
    }
    edges.sort_by_key(|x| (x.0, x.1));
    edges.dedup_by(|x, y| x.0 == y.0 && x.1 == y.1);
    if edges.is_empty() {
        return Err(GraphError::DegenerateConfiguration("all points collinear".into()));
    }
    EmbeddedGraph::build(pts, edges)
}

/// Whether `d` lies strictly inside the circumcircle of the ccw triangle `(a, b, c)`.
pub fn in_circumcircle(a: Point, b: Point, c: Point, d: Point) -> bool {
    let (a, b, c) = if orient(a, b, c) < 0.0 { (a, c, b) } else { (a, b, c) };
    let (ax, ay) = (a.x - d.x, a.y - d.y);
    let (bx, by) = (b.x - d.x, b.y - d.y);
    let (cx, cy) = (c.x - d.x, c.y - d.y);
    let det = (ax * ax + ay * ay) * (bx * cy - cx * by) - (bx * bx + by * by) * (ax * cy - cx * ay)
        + (cx * cx + cy * cy) * (ax * by - bx * ay);
    det > 0.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wheel_at_depth_one() {
        let t = generate_hyperbolic(7, 1).unwrap();
        assert_eq!(t.vertex_count(), 8);
        assert_eq!(t.triangles().len(), 7);
        assert_eq!(t.boundary().len(), 7);
        let t8 = generate_hyperbolic(8, 1).unwrap();
        assert_eq!(t8.degree(0), 8);
        assert_eq!(t8.boundary().len(), 8);
    }

    #[test]
    fn interior_degrees_are_exact() {
        for (deg, depth) in [(7, 2), (7, 3), (7, 4), (8, 3), (9, 2)] {
            let t = generate_hyperbolic(deg, depth).unwrap();
            let hops = t.hop_distances(0);
            for v in 0..t.vertex_count() {
                if hops[v] < depth {
                    assert!(!t.is_boundary(v), "vertex {v} at depth {} on boundary", hops[v]);
                    assert_eq!(t.degree(v), deg, "vertex {v}");
                } else {
                    assert_eq!(hops[v], depth);
                    assert!(t.is_boundary(v));
                }
            }
            assert_eq!(t.boundary().len(), hops.iter().filter(|&&h| h == depth).count());
        }
    }

    #[test]
    fn size_cap() {
        assert!(matches!(generate_hyperbolic_capped(7, 6, 100), Err(GraphError::SizeCapExceeded { .. })));
        assert!(generate_hyperbolic(6, 2).is_err());
    }

    #[test]
    fn delaunay_small_and_deterministic() {
        let g = generate_delaunay(3, 9).unwrap();
        assert_eq!(g.edge_count(), 3);
        assert_eq!(g.bounded_faces().count(), 1);
        let a = generate_delaunay(50, 1).unwrap();
        let b = generate_delaunay(50, 1).unwrap();
        assert_eq!(a.positions(), b.positions());
        assert_eq!(a.edges(), b.edges());
    }

    #[test]
    fn delaunay_empty_circumcircles() {
        let g = generate_delaunay(50, 1).unwrap();
        for f in g.bounded_faces() {
            assert_eq!(f.boundary.len(), 3);
            let [a, b, c] = [0, 1, 2].map(|k| g.position(f.boundary[k]));
            for v in 0..g.vertex_count() {
                if !f.boundary.contains(&v) {
                    assert!(!in_circumcircle(a, b, c, g.position(v)));
                }
            }
        }
        assert_eq!(g.faces().len() as i64, 2 - g.vertex_count() as i64 + g.edge_count() as i64);
    }

    #[test]
    fn lattice_patch() {
        let g = triangular_lattice(2);
        assert_eq!(g.vertex_count(), 19);
        assert_eq!(g.degree(0), 6);
        assert!(g.bounded_faces().all(|f| f.boundary.len() == 3));
    }
}
