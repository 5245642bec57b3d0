//! Plane geometry primitives shared by every module.

use std::f64::consts::{PI, TAU};
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn polar(r: f64, theta: f64) -> Self {
        Point::new(r * theta.cos(), r * theta.sin())
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm2(self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    pub fn dist(self, o: Point) -> f64 {
        (self - o).norm()
    }

    pub fn dot(self, o: Point) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Point) -> f64 {
        self.x * o.y - self.y * o.x
    }

    /// Argument in `[0, 2π)`.
    pub fn arg(self) -> f64 {
        normalize_angle(self.y.atan2(self.x))
    }

    pub fn lerp(self, o: Point, t: f64) -> Point {
        Point::new(self.x + (o.x - self.x) * t, self.y + (o.y - self.y) * t)
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }
}

impl Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        Point::new(-self.x, -self.y)
    }
}

/// Maps any angle to `[0, 2π)`.
pub fn normalize_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Counterclockwise angle swept from direction `from` to direction `to`, in `[0, 2π)`.
pub fn ccw_angle(from: Point, to: Point) -> f64 {
    normalize_angle(from.cross(to).atan2(from.dot(to)))
}

/// Interior angle at `b` of the path `a → b → c`, in `[0, π]`.
pub fn corner_angle(a: Point, b: Point, c: Point) -> f64 {
    let u = a - b;
    let v = c - b;
    u.cross(v).abs().atan2(u.dot(v))
}

/// A closed interval of directions `[start, start + width]` on the circle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngleInterval {
    pub start: f64,
    pub width: f64,
}

impl AngleInterval {
    pub fn new(start: f64, width: f64) -> Self {
        AngleInterval {
            start: normalize_angle(start),
            width: width.clamp(0.0, TAU),
        }
    }

    pub fn full() -> Self {
        AngleInterval::new(0.0, TAU)
    }

    pub fn centered(mid: f64, width: f64) -> Self {
        AngleInterval::new(mid - width / 2.0, width)
    }

    pub fn end(&self) -> f64 {
        self.start + self.width
    }

    /// Endpoints are included.
    pub fn contains(&self, theta: f64) -> bool {
        if self.width >= TAU {
            return true;
        }
        let off = normalize_angle(theta - self.start);
        off <= self.width + 1e-15 || (TAU - off) <= 1e-15
    }

    pub fn complement(&self) -> AngleInterval {
        AngleInterval::new(self.end(), TAU - self.width)
    }
}

/// Orientation of `c` relative to the directed line `a → b` (twice the signed area).
pub fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b - a).cross(c - a)
}

/// Closest-point parameter of `p` on segment `[a, b]`, clamped to `[0, 1]`.
pub fn project_onto_segment(p: Point, a: Point, b: Point) -> f64 {
    let d = b - a;
    let l2 = d.norm2();
    if l2 == 0.0 {
        return 0.0;
    }
    ((p - a).dot(d) / l2).clamp(0.0, 1.0)
}

pub fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let t = project_onto_segment(p, a, b);
    p.dist(a.lerp(b, t))
}

/// Whether closed segments `[a,b]` and `[c,d]` intersect, with a relative tolerance.
pub fn segments_intersect(a: Point, b: Point, c: Point, d: Point, tol: f64) -> bool {
    let scale = a.dist(b).max(c.dist(d)).max(f64::MIN_POSITIVE);
    let eps = tol * scale * scale;
    let o1 = orient(a, b, c);
    let o2 = orient(a, b, d);
    let o3 = orient(c, d, a);
    let o4 = orient(c, d, b);
    let strictly = |x: f64, y: f64| (x > eps && y < -eps) || (x < -eps && y > eps);
    if strictly(o1, o2) && strictly(o3, o4) {
        return true;
    }
    let near = tol * scale;
    point_segment_distance(c, a, b) <= near
        || point_segment_distance(d, a, b) <= near
        || point_segment_distance(a, c, d) <= near
        || point_segment_distance(b, c, d) <= near
}

/// Euclidean distance between closed segments.
pub fn segment_distance(a: Point, b: Point, c: Point, d: Point) -> f64 {
    if segments_intersect(a, b, c, d, 0.0) {
        return 0.0;
    }
    point_segment_distance(a, c, d)
        .min(point_segment_distance(b, c, d))
        .min(point_segment_distance(c, a, b))
        .min(point_segment_distance(d, a, b))
}

/// Shoelace signed area; positive for counterclockwise polygons.
pub fn signed_area(poly: &[Point]) -> f64 {
    let n = poly.len();
    let mut s = 0.0;
    for i in 0..n {
        s += poly[i].cross(poly[(i + 1) % n]);
    }
    s / 2.0
}

pub fn polygon_diameter(poly: &[Point]) -> f64 {
    let mut d: f64 = 0.0;
    for i in 0..poly.len() {
        for j in (i + 1)..poly.len() {
            d = d.max(poly[i].dist(poly[j]));
        }
    }
    d
}

/// Even-odd point in polygon test.
pub fn point_in_polygon(p: Point, poly: &[Point]) -> bool {
    let n = poly.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (poly[i], poly[j]);
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if p.x < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// Parameters `t ∈ [0,1]` where segment `a + t(b−a)` meets the circle `|z − c| = r`.
pub fn segment_circle_params(a: Point, b: Point, c: Point, r: f64) -> Vec<f64> {
    let d = b - a;
    let f = a - c;
    let qa = d.norm2();
    let qb = 2.0 * f.dot(d);
    let qc = f.norm2() - r * r;
    let disc = qb * qb - 4.0 * qa * qc;
    if qa == 0.0 || disc < 0.0 {
        return Vec::new();
    }
    let s = disc.sqrt();
    let mut out = Vec::new();
    for t in [(-qb - s) / (2.0 * qa), (-qb + s) / (2.0 * qa)] {
        if (0.0..=1.0).contains(&t) && !out.iter().any(|&u: &f64| (u - t).abs() < 1e-15) {
            out.push(t);
        }
    }
    out
}

/// Signed angle of `theta` relative to `base`, in `(−π, π]`.
pub fn angle_diff(theta: f64, base: f64) -> f64 {
    let d = normalize_angle(theta - base);
    if d > PI {
        d - TAU
    } else {
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corner_angles() {
        let a = corner_angle(Point::new(1.0, 0.0), Point::ORIGIN, Point::new(0.0, 1.0));
        assert!((a - PI / 2.0).abs() < 1e-15);
        let flat = corner_angle(Point::new(-1.0, 0.0), Point::ORIGIN, Point::new(1.0, 0.0));
        assert!((flat - PI).abs() < 1e-15);
    }

    #[test]
    fn interval_wraps() {
        let i = AngleInterval::centered(0.0, 0.2);
        assert!(i.contains(0.05));
        assert!(i.contains(TAU - 0.05));
        assert!(i.contains(0.1));
        assert!(!i.contains(0.2));
        assert!(AngleInterval::full().contains(3.0));
        let c = i.complement();
        assert!(c.contains(PI) && !c.contains(0.0));
    }

    #[test]
    fn crossing_segments() {
        let o = Point::ORIGIN;
        assert!(segments_intersect(o, Point::new(1.0, 1.0), Point::new(0.0, 1.0), Point::new(1.0, 0.0), 1e-12));
        assert!(!segments_intersect(o, Point::new(1.0, 0.0), Point::new(0.0, 1.0), Point::new(1.0, 1.0), 1e-12));
        // collinear overlap
        assert!(segments_intersect(o, Point::new(2.0, 0.0), Point::new(1.0, 0.0), Point::new(3.0, 0.0), 1e-12));
        assert_eq!(segment_distance(o, Point::new(1.0, 0.0), Point::new(0.0, 1.0), Point::new(1.0, 1.0)), 1.0);
    }

    #[test]
    fn shoelace() {
        let sq = [Point::ORIGIN, Point::new(1.0, 0.0), Point::new(1.0, 1.0), Point::new(0.0, 1.0)];
        assert_eq!(signed_area(&sq), 1.0);
        assert!(point_in_polygon(Point::new(0.5, 0.5), &sq));
        assert!(!point_in_polygon(Point::new(1.5, 0.5), &sq));
    }

    #[test]
    fn circle_hits() {
        let ts = segment_circle_params(Point::new(-2.0, 0.0), Point::new(2.0, 0.0), Point::ORIGIN, 1.0);
        assert_eq!(ts.len(), 2);
        assert!((ts[0] - 0.25).abs() < 1e-15 && (ts[1] - 0.75).abs() < 1e-15);
    }
}
