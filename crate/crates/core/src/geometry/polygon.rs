//! Convex polygon helpers. Polygons are vertex lists, counterclockwise, implicitly closed.

use super::Point2;
use crate::scalar::Real;

/// Origin of a polygon edge after clipping.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeSource {
    /// Part of the domain boundary edge starting at domain vertex `k`.
    Domain(usize),
    /// Part of the perpendicular bisector with generator `j`.
    Bisector(usize),
}

pub fn signed_area<T: Real>(poly: &[Point2<T>]) -> T {
    let n = poly.len();
    if n < 3 {
        return T::zero();
    }
    let mut acc = T::zero();
    for k in 0..n {
        acc = acc + poly[k].cross(poly[(k + 1) % n]);
    }
    acc * T::lit(0.5)
}

pub fn area<T: Real>(poly: &[Point2<T>]) -> T {
    signed_area(poly).abs()
}

/// Area centroid; falls back to the vertex mean for degenerate polygons.
pub fn centroid<T: Real>(poly: &[Point2<T>]) -> Point2<T> {
    let n = poly.len();
    let a = signed_area(poly);
    if n < 3 || a.abs() <= T::epsilon() {
        let mut s = Point2::new(T::zero(), T::zero());
        for &p in poly {
            s = s + p;
        }
        return s * (T::one() / T::from_index(n.max(1)));
    }
    let (mut cx, mut cy) = (T::zero(), T::zero());
    for k in 0..n {
        let p = poly[k];
        let q = poly[(k + 1) % n];
        let w = p.cross(q);
        cx = cx + (p.x + q.x) * w;
        cy = cy + (p.y + q.y) * w;
    }
    let s = T::one() / (T::lit(6.0) * a);
    Point2::new(cx * s, cy * s)
}

/// Point-in-convex-polygon test; `tol` is an absolute distance slack.
pub fn contains<T: Real>(poly: &[Point2<T>], p: Point2<T>, tol: T) -> bool {
    let n = poly.len();
    if n == 0 {
        return false;
    }
    if n < 3 {
        return poly.iter().all(|v| v.dist(p) <= tol);
    }
    for k in 0..n {
        let a = poly[k];
        let b = poly[(k + 1) % n];
        let edge = b - a;
        let len = edge.norm();
        if len <= T::zero() {
            continue;
        }
        // signed distance to the left of the edge
        if edge.cross(p - a) / len < -tol {
            return false;
        }
    }
    true
}

/// Clips a labeled convex polygon against `{q : (q - anchor) . normal <= 0}`.
///
/// `labels[k]` describes the edge from vertex `k` to vertex `k + 1`. Edges
/// created along the clip line receive `clip_label`. Zero-length edges are
/// removed from the output.
pub fn clip_halfplane<T: Real>(
    poly: &[Point2<T>],
    labels: &[EdgeSource],
    anchor: Point2<T>,
    normal: Point2<T>,
    clip_label: EdgeSource,
    merge_tol: T,
) -> (Vec<Point2<T>>, Vec<EdgeSource>) {
    let n = poly.len();
    let mut out = Vec::with_capacity(n + 1);
    let mut out_labels = Vec::with_capacity(n + 1);
    if n == 0 {
        return (out, out_labels);
    }
    let side = |p: Point2<T>| (p - anchor).dot(normal);
    for k in 0..n {
        let a = poly[k];
        let b = poly[(k + 1) % n];
        let sa = side(a);
        let sb = side(b);
        let a_in = sa <= T::zero();
        let b_in = sb <= T::zero();
        match (a_in, b_in) {
            (true, true) => {
                out.push(a);
                out_labels.push(labels[k]);
            }
            (true, false) => {
                out.push(a);
                out_labels.push(labels[k]);
                let t = sa / (sa - sb);
                out.push(a + (b - a) * t);
                out_labels.push(clip_label);
            }
            (false, true) => {
                let t = sa / (sa - sb);
                out.push(a + (b - a) * t);
                out_labels.push(labels[k]);
            }
            (false, false) => {}
        }
    }
    dedup_ring(&mut out, &mut out_labels, merge_tol);
    (out, out_labels)
}

/// Drops vertices that start a zero-length edge.
fn dedup_ring<T: Real>(pts: &mut Vec<Point2<T>>, labels: &mut Vec<EdgeSource>, tol: T) {
    let mut k = 0;
    while pts.len() > 1 && k < pts.len() {
        let next = (k + 1) % pts.len();
        if pts[k].dist(pts[next]) <= tol {
            pts.remove(k);
            labels.remove(k);
        } else {
            k += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> Vec<Point2<f64>> {
        vec![Point2::new(0., 0.), Point2::new(1., 0.), Point2::new(1., 1.), Point2::new(0., 1.)]
    }

    #[test]
    fn area_and_centroid_of_square() {
        let s = square();
        assert!((area(&s) - 1.0).abs() < 1e-15);
        let c = centroid(&s);
        assert!((c.x - 0.5).abs() < 1e-15 && (c.y - 0.5).abs() < 1e-15);
    }

    #[test]
    fn clip_square_in_half() {
        let s = square();
        let labels: Vec<_> = (0..4).map(EdgeSource::Domain).collect();
        let (p, l) = clip_halfplane(&s, &labels, Point2::new(0.5, 0.5), Point2::new(1.0, 0.0), EdgeSource::Bisector(1), 1e-12);
        assert!((area(&p) - 0.5).abs() < 1e-15);
        assert_eq!(l.iter().filter(|e| **e == EdgeSource::Bisector(1)).count(), 1);
        assert!(p.iter().all(|q| q.x <= 0.5 + 1e-15));
    }

    #[test]
    fn clip_through_vertex_has_no_zero_edges() {
        let s = square();
        let labels: Vec<_> = (0..4).map(EdgeSource::Domain).collect();
        // diagonal from (0,0) to (1,1), keep lower-right triangle
        let (p, l) = clip_halfplane(&s, &labels, Point2::new(0.0, 0.0), Point2::new(-1.0, 1.0), EdgeSource::Bisector(3), 1e-12);
        assert_eq!(p.len(), 3);
        assert!((area(&p) - 0.5).abs() < 1e-15);
        assert!(l.contains(&EdgeSource::Bisector(3)));
    }

    #[test]
    fn containment_tolerance() {
        let s = square();
        assert!(contains(&s, Point2::new(0.5, 0.5), 0.0));
        assert!(contains(&s, Point2::new(1.0, 0.5), 0.0));
        assert!(!contains(&s, Point2::new(1.0 + 1e-9, 0.5), 0.0));
        assert!(contains(&s, Point2::new(1.0 + 1e-9, 0.5), 1e-8));
    }
}
