//! Maximal circle packings of triangulated discs in the unit disc.
//!
//! Radii are solved in hyperbolic geometry using s-radii `s = e^{-h}`, where
//! `h` is the hyperbolic radius; boundary vertices are horocycles (`s = 0`).
//! In a triangle of mutually tangent circles with s-radii `s_v, s_a, s_b`
//! the angle `α` at `v` satisfies
//!
//! ```text
//! sin²(α/2) = s_v² (1 − s_a²)(1 − s_b²) / ((1 − s_v² s_a²)(1 − s_v² s_b²))
//! ```
//!
//! which stays finite for horocycle neighbours. Centres are then laid out in
//! the Poincaré disc by moving each pivot circle to the origin with a disc
//! automorphism.

use std::collections::{BTreeMap, VecDeque};
use std::f64::consts::{PI, TAU};

use nalgebra::Complex;
use serde::Serialize;

use crate::error::{GraphError, PackingError};
use crate::geom::Point;
use crate::graph::{EmbeddedGraph, VertexId};
use crate::triangulation::Triangulation;

type C64 = Complex<f64>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PackingOptions {
    /// Target for the maximal interior angle-sum error.
    pub tol: f64,
    pub max_sweeps: usize,
    /// Interior vertex placed at the origin; defaults to the combinatorial centre.
    pub root: Option<VertexId>,
    /// Neighbour of the root placed on the positive real axis; defaults to its first neighbour.
    pub axis: Option<VertexId>,
}

impl Default for PackingOptions {
    fn default() -> Self {
        PackingOptions { tol: 1e-9, max_sweeps: 100_000, root: None, axis: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PackingResult {
    /// Euclidean radii.
    pub radius: Vec<f64>,
    pub center: Vec<Point>,
    pub is_boundary: Vec<bool>,
    /// Hyperbolic s-radii `e^{-h}`; zero for boundary horocycles.
    pub s_radius: Vec<f64>,
    pub iterations: usize,
    pub angle_residual: f64,
    pub tangency_residual: f64,
    pub root: VertexId,
    pub axis: VertexId,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AngleGeometry {
    /// Radii are Euclidean radii.
    Euclidean,
    /// Radii are s-radii `e^{-h}` (zero for horocycles).
    Hyperbolic,
}

/// Angle at `v` in the triangle of tangent circles `(v, a, b)`.
pub fn petal_angle(rv: f64, ra: f64, rb: f64, geometry: AngleGeometry) -> f64 {
    let q = match geometry {
        AngleGeometry::Euclidean => (ra / (rv + ra)) * (rb / (rv + rb)),
        AngleGeometry::Hyperbolic => {
            let v2 = rv * rv;
            v2 * (1.0 - ra * ra) * (1.0 - rb * rb) / ((1.0 - v2 * ra * ra) * (1.0 - v2 * rb * rb))
        }
    };
    2.0 * q.clamp(0.0, 1.0).sqrt().asin()
}

/// Sum of petal angles at vertex `v`.
pub fn angle_sum(t: &Triangulation, radii: &[f64], v: VertexId, geometry: AngleGeometry) -> f64 {
    t.petals(v).map(|(a, b)| petal_angle(radii[v], radii[a], radii[b], geometry)).sum()
}

/// Solves for the s-radius of `v` making its angle sum 2π with neighbours fixed.
fn solve_local(t: &Triangulation, s: &[f64], v: VertexId, start: f64) -> f64 {
    let petals: Vec<(f64, f64)> = t.petals(v).map(|(a, b)| (s[a], s[b])).collect();
    let sum = |x: f64| -> f64 {
        petals.iter().map(|&(a, b)| petal_angle(x, a, b, AngleGeometry::Hyperbolic)).sum()
    };
    // the angle sum increases from 0 to kπ as s runs over (0, 1)
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut x = start.clamp(1e-300, 1.0 - 1e-16);
    for _ in 0..200 {
        let f = sum(x) - TAU;
        if f.abs() < 1e-15 {
            break;
        }
        if f > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        // secant-free Newton with a numerical derivative on a relative step
        let h = 1e-7 * x.min(1.0 - x).max(1e-300);
        let df = (sum(x + h) - sum(x - h)) / (2.0 * h);
        let mut nx = if df > 0.0 { x - f / df } else { f64::NAN };
        if !(nx > lo && nx < hi) {
            nx = 0.5 * (lo + hi);
        }
        if (nx - x).abs() <= 1e-17 * x.max(1e-300) || hi - lo < 1e-17 {
            x = nx;
            break;
        }
        x = nx;
    }
    x
}

/// Radius iteration followed by layout; always returns the final iterate.
pub fn pack(t: &Triangulation, opts: &PackingOptions) -> Result<PackingResult, PackingError> {
    let n = t.vertex_count();
    let interior: Vec<VertexId> = t.interior_vertices().collect();
    if interior.is_empty() {
        return Err(PackingError::NoInteriorVertex);
    }
    if n < 4 {
        return Err(PackingError::NotATriangulation("fewer than 4 vertices".into()));
    }
    let root = match opts.root {
        Some(r) if t.is_boundary(r) => {
            return Err(PackingError::NotATriangulation(format!("root {r} is a boundary vertex")))
        }
        Some(r) => r,
        None => t.combinatorial_center().expect("has interior vertex"),
    };
    let axis = match opts.axis {
        Some(a) if t.flower(root).contains(&a) => a,
        Some(a) => return Err(PackingError::NotATriangulation(format!("axis {a} is not adjacent to root"))),
        None => t.flower(root)[0],
    };

    let mut s: Vec<f64> = (0..n).map(|v| if t.is_boundary(v) { 0.0 } else { 0.5 }).collect();
    let residual = |s: &[f64]| -> f64 {
        interior
            .iter()
            .map(|&v| (angle_sum(t, s, v, AngleGeometry::Hyperbolic) - TAU).abs())
            .fold(0.0, f64::max)
    };
    let mut sweeps = 0;
    let mut res = residual(&s);
    while res > opts.tol && sweeps < opts.max_sweeps {
        for &v in &interior {
            s[v] = solve_local(t, &s, v, s[v]);
        }
        sweeps += 1;
        if sweeps % 4 == 0 || sweeps < 8 {
            res = residual(&s);
        }
    }
    res = residual(&s);
    // polish: the layout accumulates angle error along face paths, so keep
    // sweeping past `tol` while the residual still improves
    if res <= opts.tol {
        for _ in 0..200 {
            for &v in &interior {
                s[v] = solve_local(t, &s, v, s[v]);
            }
            sweeps += 1;
            let next = residual(&s);
            if next >= 0.5 * res || next < 1e-14 {
                res = next.min(res);
                break;
            }
            res = next;
        }
    }

    let (center, radius) = layout(t, &s, root, axis)?;
    let mut result = PackingResult {
        radius,
        center,
        is_boundary: (0..n).map(|v| t.is_boundary(v)).collect(),
        s_radius: s,
        iterations: sweeps,
        angle_residual: res,
        tangency_residual: 0.0,
        root,
        axis,
        converged: res <= opts.tol,
    };
    result.tangency_residual = tangency_residual(&result, t);
    Ok(result)
}

/// Like [`pack`] but fails with `MaxIterationsExceeded` when the tolerance is not met.
pub fn pack_maximal(t: &Triangulation, opts: &PackingOptions) -> Result<PackingResult, PackingError> {
    let p = pack(t, opts)?;
    if !p.converged {
        return Err(PackingError::MaxIterationsExceeded { iterations: p.iterations, residual: p.angle_residual });
    }
    Ok(p)
}

fn to_disc_frame(c: C64, z: C64) -> C64 {
    (z - c) / (C64::new(1.0, 0.0) - c.conj() * z)
}

fn from_disc_frame(c: C64, w: C64) -> C64 {
    (w + c) / (C64::new(1.0, 0.0) + c.conj() * w)
}

/// Euclidean circle of the hyperbolic circle with centre `h` and s-radius `s`.
fn hyperbolic_to_euclidean(h: C64, s: f64) -> (C64, f64) {
    let m = h.norm();
    if m < 1e-300 {
        return (C64::new(0.0, 0.0), (1.0 - s) / (1.0 + s));
    }
    let q = (1.0 - m) / (1.0 + m);
    let p1 = (s - q) / (s + q);
    let p2 = (1.0 - q * s) / (1.0 + q * s);
    (h / m * (0.5 * (p1 + p2)), 0.5 * (p2 - p1))
}

#[derive(Clone, Copy)]
struct Placed {
    /// Hyperbolic centre, or the ideal tangency point for horocycles.
    anchor: C64,
    center: C64,
    radius: f64,
}

/// Places `w` tangent to the interior pivot `v` in direction `psi` (measured in v's frame).
fn place_from(pivot: &Placed, sv: f64, sw: f64, psi: f64) -> Placed {
    let c = pivot.anchor;
    let dir = C64::from_polar(1.0, psi);
    if sw == 0.0 {
        let zeta = from_disc_frame(c, dir);
        let zeta = zeta / zeta.norm();
        let touch = from_disc_frame(c, dir * ((1.0 - sv) / (1.0 + sv)));
        let re = (touch * zeta.conj()).re;
        let rho = (zeta - touch).norm_sqr() / (2.0 * (1.0 - re));
        Placed { anchor: zeta, center: zeta * (1.0 - rho), radius: rho }
    } else {
        let dist = (1.0 - sv * sw) / (1.0 + sv * sw);
        let h = from_disc_frame(c, dir * dist);
        let (center, radius) = hyperbolic_to_euclidean(h, sw);
        Placed { anchor: h, center, radius }
    }
}

fn direction_in_frame(pivot: &Placed, other: &Placed) -> f64 {
    to_disc_frame(pivot.anchor, other.anchor).arg()
}

fn layout(
    t: &Triangulation,
    s: &[f64],
    root: VertexId,
    axis: VertexId,
) -> Result<(Vec<Point>, Vec<f64>), PackingError> {
    let n = t.vertex_count();
    let mut placed: Vec<Option<Placed>> = vec![None; n];
    let origin = C64::new(0.0, 0.0);
    let (c0, r0) = hyperbolic_to_euclidean(origin, s[root]);
    placed[root] = Some(Placed { anchor: origin, center: c0, radius: r0 });
    let root_p = placed[root].expect("just placed");
    placed[axis] = Some(place_from(&root_p, s[root], s[axis], 0.0));

    let mut queue = VecDeque::from([root]);
    let mut queued = vec![false; n];
    queued[root] = true;
    if !t.is_boundary(axis) {
        queue.push_back(axis);
        queued[axis] = true;
    }
    while let Some(v) = queue.pop_front() {
        let pv = placed[v].expect("queued vertices are placed");
        let fl = t.flower(v);
        let k = fl.len();
        let start = (0..k).find(|&i| placed[fl[i]].is_some()).expect("pivot has a placed neighbour");
        // forward around the closed flower from the first placed neighbour
        let mut theta = direction_in_frame(&pv, &placed[fl[start]].expect("placed"));
        for step in 0..k {
            let a = fl[(start + step) % k];
            let b = fl[(start + step + 1) % k];
            if placed[a].is_some() {
                theta = direction_in_frame(&pv, &placed[a].expect("placed"));
            }
            theta += petal_angle(s[v], s[a], s[b], AngleGeometry::Hyperbolic);
            if placed[b].is_none() {
                placed[b] = Some(place_from(&pv, s[v], s[b], theta));
            }
        }
        for &w in fl {
            if !t.is_boundary(w) && !queued[w] {
                queued[w] = true;
                queue.push_back(w);
            }
        }
    }
    if placed.iter().any(Option::is_none) {
        return Err(PackingError::NotATriangulation(
            "interior vertices do not form a connected subgraph".into(),
        ));
    }
    let centers = placed.iter().map(|p| {
        let c = p.expect("all placed").center;
        Point::new(c.re, c.im)
    });
    let radii = placed.iter().map(|p| p.expect("all placed").radius);
    Ok((centers.collect(), radii.collect()))
}

/// Max relative tangency defect over edges.
pub fn tangency_residual(p: &PackingResult, t: &Triangulation) -> f64 {
    t.edges()
        .iter()
        .map(|&(u, v)| {
            let want = p.radius[u] + p.radius[v];
            (p.center[u].dist(p.center[v]) - want).abs() / want
        })
        .fold(0.0, f64::max)
}

/// Max defect of boundary circles being internally tangent to the unit circle.
pub fn boundary_residual(p: &PackingResult) -> f64 {
    (0..p.radius.len())
        .filter(|&v| p.is_boundary[v])
        .map(|v| (p.center[v].norm() + p.radius[v] - 1.0).abs())
        .fold(0.0, f64::max)
}

/// Re-derives every circle from each interior neighbour pair and returns the
/// largest centre disagreement relative to the circle's radius.
pub fn layout_discrepancy(p: &PackingResult, t: &Triangulation) -> f64 {
    let c = |v: VertexId| C64::new(p.center[v].x, p.center[v].y);
    let mut worst: f64 = 0.0;
    for v in t.interior_vertices() {
        for (a, b) in t.petals(v) {
            // third circle tangent to v and a, on the ccw side of v->a
            let (ra, rb, rv) = (p.radius[a], p.radius[b], p.radius[v]);
            let dvb = rv + rb;
            let alpha = petal_angle(rv, ra, rb, AngleGeometry::Euclidean);
            let dir = (c(a) - c(v)).arg() + alpha;
            let pred = c(v) + C64::from_polar(dvb, dir);
            worst = worst.max((pred - c(b)).norm() / rb);
        }
    }
    worst
}

/// Straight-line embedding on the circle centres with unit weights.
pub fn to_embedded_graph(p: &PackingResult, t: &Triangulation) -> Result<EmbeddedGraph, GraphError> {
    if p.center.len() != t.vertex_count() {
        return Err(GraphError::MissingPositions);
    }
    EmbeddedGraph::build(p.center.clone(), t.edges().iter().map(|&(u, v)| (u, v, 1.0)).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RingReport {
    /// Max radius ratio over edges with both ends interior (1 if there are none).
    pub interior_max: f64,
    /// Max radius ratio over all edges, boundary circles included.
    pub overall_max: f64,
    /// Max ratio over interior edges, keyed by the larger endpoint degree.
    pub per_degree: BTreeMap<usize, f64>,
}

pub fn ring_constant(p: &PackingResult, t: &Triangulation) -> RingReport {
    let mut interior_max: f64 = 1.0;
    let mut overall_max: f64 = 1.0;
    let mut per_degree = BTreeMap::new();
    for &(u, v) in t.edges() {
        let ratio = (p.radius[u] / p.radius[v]).max(p.radius[v] / p.radius[u]);
        overall_max = overall_max.max(ratio);
        if !t.is_boundary(u) && !t.is_boundary(v) {
            interior_max = interior_max.max(ratio);
            let d = t.degree(u).max(t.degree(v));
            let e = per_degree.entry(d).or_insert(1.0f64);
            *e = e.max(ratio);
        }
    }
    RingReport { interior_max, overall_max, per_degree }
}

/// Closed-form maximal packing of K4 (one interior circle, three boundary
/// circles): boundary radius `2√3 − 3`, central radius `7 − 4√3`.
pub fn k4_closed_form() -> (f64, f64) {
    let r = 2.0 * 3f64.sqrt() - 3.0;
    (1.0 - 2.0 * r, r)
}

/// Hyperbolic petal angle check helper: angle of the regular `k`-flower with horocycle petals.
pub fn regular_flower_s_radius(k: usize) -> f64 {
    (PI / k as f64).sin()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::generate_hyperbolic;

    fn k4() -> Triangulation {
        Triangulation::new(4, vec![[0, 1, 2], [0, 2, 3], [0, 3, 1]]).unwrap()
    }

    #[test]
    fn k4_matches_closed_form() {
        let (center_r, bdry_r) = k4_closed_form();
        // independent check of the closed form from the tangency equations
        assert!(((1.0 - bdry_r) * 3f64.sqrt() - 2.0 * bdry_r).abs() < 1e-15);
        assert!((center_r + bdry_r - (1.0 - bdry_r)).abs() < 1e-15);
        let p = pack_maximal(&k4(), &PackingOptions::default()).unwrap();
        assert!((p.radius[0] - center_r).abs() < 1e-10);
        for v in 1..4 {
            assert!((p.radius[v] - bdry_r).abs() < 1e-10, "{}", p.radius[v]);
            assert!((p.center[v].norm() - (1.0 - bdry_r)).abs() < 1e-10);
        }
        assert!(p.center[0].norm() < 1e-14);
        assert!(p.center[p.axis].y.abs() < 1e-14 && p.center[p.axis].x > 0.0);
        assert!(p.tangency_residual < 1e-10);
        assert!(boundary_residual(&p) < 1e-12);
        let ring = ring_constant(&p, &k4());
        assert!((ring.overall_max - bdry_r / center_r).abs() < 1e-8);
    }

    #[test]
    fn wheel_is_symmetric() {
        let t = generate_hyperbolic(7, 1).unwrap();
        let p = pack_maximal(&t, &PackingOptions::default()).unwrap();
        assert!((p.s_radius[0] - regular_flower_s_radius(7)).abs() < 1e-12);
        for v in 2..8 {
            assert!((p.radius[v] - p.radius[1]).abs() < 1e-12);
        }
        assert!((angle_sum(&t, &p.s_radius, 0, AngleGeometry::Hyperbolic) - TAU).abs() < 1e-9);
        assert!((angle_sum(&t, &p.radius, 0, AngleGeometry::Euclidean) - TAU).abs() < 1e-9);
    }

    #[test]
    fn euclidean_angle_sums() {
        let hex = Triangulation::new(7, (0..6).map(|i| [0, 1 + i, 1 + (i + 1) % 6]).collect()).unwrap();
        assert!((angle_sum(&hex, &[1.0; 7], 0, AngleGeometry::Euclidean) - TAU).abs() < 1e-14);
        let t = generate_hyperbolic(7, 1).unwrap();
        assert!((angle_sum(&t, &[1.0; 8], 0, AngleGeometry::Euclidean) - 7.0 * PI / 3.0).abs() < 1e-14);
    }

    #[test]
    fn euclidean_angle_matches_law_of_cosines() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let (rv, ra, rb): (f64, f64, f64) = (rng.gen_range(0.01..5.0), rng.gen_range(0.01..5.0), rng.gen_range(0.01..5.0));
            let (x, y, z) = (rv + ra, rv + rb, ra + rb);
            let oracle = ((x * x + y * y - z * z) / (2.0 * x * y)).acos();
            assert!((petal_angle(rv, ra, rb, AngleGeometry::Euclidean) - oracle).abs() < 1e-10);
        }
    }

    #[test]
    fn hyperbolic_angle_matches_law_of_cosines() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        for _ in 0..1000 {
            let h: [f64; 3] = [rng.gen_range(0.05..4.0), rng.gen_range(0.05..4.0), rng.gen_range(0.05..4.0)];
            let (a, b, c) = (h[0] + h[1], h[0] + h[2], h[1] + h[2]);
            let oracle = ((a.cosh() * b.cosh() - c.cosh()) / (a.sinh() * b.sinh())).acos();
            let s = h.map(|x| (-x).exp());
            assert!((petal_angle(s[0], s[1], s[2], AngleGeometry::Hyperbolic) - oracle).abs() < 1e-9);
        }
    }

    #[test]
    fn depth_three_packs_cleanly() {
        let t = generate_hyperbolic(7, 3).unwrap();
        let p = pack_maximal(&t, &PackingOptions::default()).unwrap();
        assert!(p.angle_residual <= 1e-9);
        assert!(p.tangency_residual <= 1e-8, "{}", p.tangency_residual);
        assert!(boundary_residual(&p) < 1e-10);
        assert!(layout_discrepancy(&p, &t) < 1e-8);
        assert!(p.center.iter().zip(&p.radius).all(|(c, r)| c.norm() + r <= 1.0 + 1e-12));
    }

    #[test]
    fn gauge_change_rotates_only() {
        let t = generate_hyperbolic(7, 1).unwrap();
        let a = pack_maximal(&t, &PackingOptions::default()).unwrap();
        let b = pack_maximal(&t, &PackingOptions { axis: Some(4), ..Default::default() }).unwrap();
        for v in 0..8 {
            assert!((a.radius[v] - b.radius[v]).abs() < 1e-8);
            assert!((a.center[v].norm() - b.center[v].norm()).abs() < 1e-8);
        }
        assert!(b.center[4].y.abs() < 1e-14);
    }

    #[test]
    fn errors() {
        let single = Triangulation::new(3, vec![[0, 1, 2]]).unwrap();
        assert!(matches!(pack(&single, &PackingOptions::default()), Err(PackingError::NoInteriorVertex)));
        let t = generate_hyperbolic(7, 3).unwrap();
        let r = pack_maximal(&t, &PackingOptions { max_sweeps: 1, ..Default::default() });
        assert!(matches!(r, Err(PackingError::MaxIterationsExceeded { .. })));
    }
}
