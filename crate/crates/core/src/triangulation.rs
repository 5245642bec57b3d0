//! Combinatorial triangulations of a closed disc.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use crate::error::PackingError;
use crate::graph::VertexId;

/// A simplicial disc: consistently oriented triangles with one boundary cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct Triangulation {
    vertex_count: usize,
    triangles: Vec<[VertexId; 3]>,
    /// Boundary cycle, oriented so the interior lies on the left.
    boundary: Vec<VertexId>,
    is_boundary: Vec<bool>,
    /// Counterclockwise neighbour lists. Closed for interior vertices; for
    /// boundary vertices the list runs from one boundary neighbour to the other.
    flowers: Vec<Vec<VertexId>>,
    edges: Vec<(VertexId, VertexId)>,
}

impl Triangulation {
    /// Validates `triangles` (each listed counterclockwise) as a triangulated disc.
    pub fn new(vertex_count: usize, triangles: Vec<[VertexId; 3]>) -> Result<Self, PackingError> {
        let bad = |m: String| Err(PackingError::NotATriangulation(m));
        if triangles.is_empty() {
            return bad("no triangles".into());
        }
        // directed edge -> opposite vertex
        let mut next: HashMap<(VertexId, VertexId), VertexId> = HashMap::new();
        for t in &triangles {
            if t.iter().any(|&v| v >= vertex_count) {
                return bad(format!("triangle {t:?} references a missing vertex"));
            }
            if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
                return bad(format!("degenerate triangle {t:?}"));
            }
            for k in 0..3 {
                let (a, b, c) = (t[k], t[(k + 1) % 3], t[(k + 2) % 3]);
                if next.insert((a, b), c).is_some() {
                    return bad(format!("directed edge {a}->{b} used twice (inconsistent orientation)"));
                }
            }
        }
        let mut used = vec![false; vertex_count];
        for t in &triangles {
            for &v in t {
                used[v] = true;
            }
        }
        if let Some(v) = used.iter().position(|u| !u) {
            return bad(format!("vertex {v} is in no triangle"));
        }

        // boundary half-edges: a->b present but b->a absent
        let mut bnext: BTreeMap<VertexId, VertexId> = BTreeMap::new();
        for &(a, b) in next.keys() {
            if !next.contains_key(&(b, a)) && bnext.insert(a, b).is_some() {
                return bad(format!("vertex {a} is pinched on the boundary"));
            }
        }
        if bnext.is_empty() {
            return bad("closed surface, no boundary".into());
        }
        let start = *bnext.keys().next().expect("nonempty");
        let mut boundary = vec![start];
        let mut cur = bnext[&start];
        while cur != start {
            if boundary.len() > bnext.len() {
                return bad("boundary is not a cycle".into());
            }
            boundary.push(cur);
            cur = match bnext.get(&cur) {
                Some(&n) => n,
                None => return bad("boundary is not a cycle".into()),
            };
        }
        if boundary.len() != bnext.len() {
            return bad("boundary has more than one component".into());
        }
        let mut is_boundary = vec![false; vertex_count];
        for &b in &boundary {
            is_boundary[b] = true;
        }

        let mut flowers = vec![Vec::new(); vertex_count];
        for v in 0..vertex_count {
            // ccw successor of neighbour a around v is next[(v, a)]
            let nbrs: BTreeSet<VertexId> =
                next.keys().filter(|(a, _)| *a == v).map(|&(_, b)| b).collect();
            let first = if is_boundary[v] {
                // start at the neighbour u with v->u being a boundary half-edge
                bnext[&v]
            } else {
                *nbrs.iter().next().expect("interior vertex has neighbours")
            };
            let mut fl = vec![first];
            let mut a = first;
            while let Some(&b) = next.get(&(v, a)) {
                if b == first {
                    break;
                }
                fl.push(b);
                if fl.len() > nbrs.len() + 2 {
                    return bad(format!("vertex {v} has a non-manifold link"));
                }
                a = b;
            }
            let closed = next.get(&(v, a)) == Some(&first);
            if closed == is_boundary[v] {
                return bad(format!("link of vertex {v} is not a {}", if closed { "path" } else { "cycle" }));
            }
            let distinct: BTreeSet<_> = fl.iter().collect();
            if distinct.len() != fl.len() {
                return bad(format!("vertex {v} has a non-manifold link"));
            }
            flowers[v] = fl;
        }
        let mut edges: Vec<(VertexId, VertexId)> =
            next.keys().map(|&(a, b)| (a.min(b), a.max(b))).collect();
        edges.sort_unstable();
        edges.dedup();
        let t = Triangulation { vertex_count, triangles, boundary, is_boundary, flowers, edges };
        let (v, e, f) = (t.vertex_count as i64, t.edges.len() as i64, t.triangles.len() as i64);
        if v - e + f != 1 {
            return bad(format!("Euler characteristic {} is not that of a disc", v - e + f));
        }
        Ok(t)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn triangles(&self) -> &[[VertexId; 3]] {
        &self.triangles
    }

    pub fn boundary(&self) -> &[VertexId] {
        &self.boundary
    }

    pub fn is_boundary(&self, v: VertexId) -> bool {
        self.is_boundary[v]
    }

    pub fn interior_vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.vertex_count).filter(|&v| !self.is_boundary[v])
    }

    pub fn flower(&self, v: VertexId) -> &[VertexId] {
        &self.flowers[v]
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.flowers[v].len()
    }

    pub fn edges(&self) -> &[(VertexId, VertexId)] {
        &self.edges
    }

    /// Incident triangles of `v` as ordered pairs `(a, b)` with `(v, a, b)` counterclockwise.
    pub fn petals(&self, v: VertexId) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        let fl = &self.flowers[v];
        let k = fl.len();
        let count = if self.is_boundary[v] { k - 1 } else { k };
        (0..count).map(move |i| (fl[i], fl[(i + 1) % k]))
    }

    pub fn hop_distances(&self, src: VertexId) -> Vec<usize> {
        let mut d = vec![usize::MAX; self.vertex_count];
        d[src] = 0;
        let mut q = VecDeque::from([src]);
        while let Some(v) = q.pop_front() {
            for &w in &self.flowers[v] {
                if d[w] == usize::MAX {
                    d[w] = d[v] + 1;
                    q.push_back(w);
                }
            }
        }
        d
    }

    /// Interior vertex maximising the hop distance to the boundary (lowest id on ties).
    pub fn combinatorial_center(&self) -> Option<VertexId> {
        let mut d = vec![usize::MAX; self.vertex_count];
        let mut q = VecDeque::new();
        for &b in &self.boundary {
            d[b] = 0;
            q.push_back(b);
        }
        while let Some(v) = q.pop_front() {
            for &w in &self.flowers[v] {
                if d[w] == usize::MAX {
                    d[w] = d[v] + 1;
                    q.push_back(w);
                }
            }
        }
        self.interior_vertices().max_by(|&a, &b| d[a].cmp(&d[b]).then(b.cmp(&a)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wheel(k: usize) -> Triangulation {
        let tris = (0..k).map(|i| [0, 1 + i, 1 + (i + 1) % k]).collect();
        Triangulation::new(k + 1, tris).unwrap()
    }

    #[test]
    fn wheel_structure() {
        let t = wheel(5);
        assert_eq!(t.boundary().len(), 5);
        assert!(!t.is_boundary(0));
        assert_eq!(t.flower(0), &[1, 2, 3, 4, 5]);
        assert_eq!(t.flower(1).len(), 3);
        assert_eq!(t.petals(0).count(), 5);
        assert_eq!(t.petals(1).count(), 2);
        assert_eq!(t.combinatorial_center(), Some(0));
        assert_eq!(t.edges().len(), 10);
    }

    #[test]
    fn rejects_inconsistent_orientation() {
        let r = Triangulation::new(4, vec![[0, 1, 2], [0, 1, 3]]);
        assert!(matches!(r, Err(PackingError::NotATriangulation(_))));
    }

    #[test]
    fn rejects_closed_surface() {
        // boundary of a tetrahedron
        let r = Triangulation::new(4, vec![[0, 1, 2], [0, 2, 3], [0, 3, 1], [1, 3, 2]]);
        assert!(matches!(r, Err(PackingError::NotATriangulation(_))));
    }
}
