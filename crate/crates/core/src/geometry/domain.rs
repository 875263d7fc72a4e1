use super::{polygon, GeometryError, Point2};
use crate::scalar::Real;

/// Closed convex polygonal region with a uniform midpoint quadrature grid.
///
/// The grid covers the bounding box with `grid_resolution` cells per axis;
/// only cell midpoints inside the polygon become grid points. Grid points are
/// numbered in row-major order (x fastest), skipping those outside the domain.
#[derive(Clone, Debug)]
pub struct ConvexDomain<T> {
    vertices: Vec<Point2<T>>,
    grid_resolution: usize,
    origin: Point2<T>,
    spacing: Point2<T>,
    points: Vec<Point2<T>>,
    lattice: Vec<Option<u32>>,
    diameter: T,
    area: T,
}

impl<T: Real> PartialEq for ConvexDomain<T> {
    fn eq(&self, other: &Self) -> bool {
        self.grid_resolution == other.grid_resolution && self.vertices == other.vertices
    }
}

impl<T: Real> ConvexDomain<T> {
    /// Builds a domain from polygon vertices. Clockwise input is reversed.
    pub fn new(vertices: Vec<Point2<T>>, grid_resolution: usize) -> Result<Self, GeometryError> {
        if grid_resolution == 0 {
            return Err(GeometryError::InvalidDomain("grid_resolution must be positive".into()));
        }
        if vertices.len() < 3 {
            return Err(GeometryError::InvalidDomain("a domain needs at least 3 vertices".into()));
        }
        if vertices.iter().any(|v| !v.is_finite()) {
            return Err(GeometryError::InvalidDomain("vertex coordinates must be finite".into()));
        }
        let mut vertices = vertices;
        let signed = polygon::signed_area(&vertices);
        if signed < T::zero() {
            vertices.reverse();
        }
        let area = signed.abs();
        let diameter = vertices.iter().flat_map(|a| vertices.iter().map(move |b| a.dist(*b))).fold(T::zero(), T::max);
        if !(area > T::zero()) || !(diameter > T::zero()) {
            return Err(GeometryError::InvalidDomain("domain has zero area".into()));
        }
        let n = vertices.len();
        let tol = T::lit(1e-12) * diameter * diameter;
        for k in 0..n {
            let a = vertices[k];
            let b = vertices[(k + 1) % n];
            let c = vertices[(k + 2) % n];
            let turn = (b - a).cross(c - b);
            if turn <= tol {
                return Err(GeometryError::InvalidDomain(format!(
                    "vertices {}, {}, {} are collinear or turn clockwise; the polygon must be strictly convex",
                    k,
                    (k + 1) % n,
                    (k + 2) % n
                )));
            }
        }

        let (mut lo, mut hi) = (vertices[0], vertices[0]);
        for v in &vertices {
            lo = Point2::new(lo.x.min(v.x), lo.y.min(v.y));
            hi = Point2::new(hi.x.max(v.x), hi.y.max(v.y));
        }
        let res = T::from_index(grid_resolution);
        let spacing = Point2::new((hi.x - lo.x) / res, (hi.y - lo.y) / res);
        let half = T::lit(0.5);
        let mut points = Vec::new();
        let mut lattice = Vec::with_capacity(grid_resolution * grid_resolution);
        for iy in 0..grid_resolution {
            for ix in 0..grid_resolution {
                let q = Point2::new(lo.x + (T::from_index(ix) + half) * spacing.x, lo.y + (T::from_index(iy) + half) * spacing.y);
                if polygon::contains(&vertices, q, T::zero()) {
                    lattice.push(Some(points.len() as u32));
                    points.push(q);
                } else {
                    lattice.push(None);
                }
            }
        }
        if points.is_empty() {
            return Err(GeometryError::InvalidDomain("grid has no points inside the domain".into()));
        }

        Ok(ConvexDomain { vertices, grid_resolution, origin: lo, spacing, points, lattice, diameter, area })
    }

    /// The unit square `[0, 1]^2`.
    pub fn unit_square(grid_resolution: usize) -> Self {
        Self::rectangle(Point2::new(T::zero(), T::zero()), Point2::new(T::one(), T::one()), grid_resolution)
            .expect("unit square is a valid domain")
    }

    pub fn rectangle(lo: Point2<T>, hi: Point2<T>, grid_resolution: usize) -> Result<Self, GeometryError> {
        Self::new(vec![lo, Point2::new(hi.x, lo.y), hi, Point2::new(lo.x, hi.y)], grid_resolution)
    }

    pub fn vertices(&self) -> &[Point2<T>] {
        &self.vertices
    }

    pub fn grid_resolution(&self) -> usize {
        self.grid_resolution
    }

    /// Grid points inside the domain, in grid-index order.
    pub fn grid_points(&self) -> &[Point2<T>] {
        &self.points
    }

    pub fn num_grid_points(&self) -> usize {
        self.points.len()
    }

    /// Area weight of each grid point.
    pub fn cell_area(&self) -> T {
        self.spacing.x * self.spacing.y
    }

    pub fn spacing(&self) -> Point2<T> {
        self.spacing
    }

    pub fn diameter(&self) -> T {
        self.diameter
    }

    /// Exact polygon area.
    pub fn area(&self) -> T {
        self.area
    }

    pub fn contains(&self, p: Point2<T>) -> bool {
        polygon::contains(&self.vertices, p, T::lit(1e-12) * self.diameter)
    }

    /// Nearest point of the domain to `p`; `p` itself when already inside.
    pub fn project(&self, p: Point2<T>) -> Point2<T> {
        if polygon::contains(&self.vertices, p, T::zero()) {
            return p;
        }
        let n = self.vertices.len();
        let mut best = self.vertices[0];
        let mut best_d = T::infinity();
        for k in 0..n {
            let a = self.vertices[k];
            let b = self.vertices[(k + 1) % n];
            let ab = b - a;
            let t = ((p - a).dot(ab) / ab.norm_sq()).max(T::zero()).min(T::one());
            let q = a + ab * t;
            let d = q.dist_sq(p);
            if d < best_d {
                best_d = d;
                best = q;
            }
        }
        best
    }

    /// Grid index at lattice position `(ix, iy)`, if that midpoint is inside the domain.
    pub fn lattice_index(&self, ix: usize, iy: usize) -> Option<usize> {
        if ix >= self.grid_resolution || iy >= self.grid_resolution {
            return None;
        }
        self.lattice[iy * self.grid_resolution + ix].map(|i| i as usize)
    }

    /// Bilinear interpolation of grid values at an arbitrary point.
    ///
    /// Outside the span of grid midpoints the nearest lattice values are held
    /// constant. Lattice nodes outside the domain are dropped and the
    /// remaining weights renormalized; if none remain, the nearest grid point
    /// value is returned.
    pub fn interpolate(&self, values: &[T], p: Point2<T>) -> T {
        let res = self.grid_resolution;
        let half = T::lit(0.5);
        let fx = (p.x - self.origin.x) / self.spacing.x - half;
        let fy = (p.y - self.origin.y) / self.spacing.y - half;
        let max_base = T::from_index(res.saturating_sub(2));
        let bx = fx.floor().max(T::zero()).min(max_base);
        let by = fy.floor().max(T::zero()).min(max_base);
        let tx = (fx - bx).max(T::zero()).min(T::one());
        let ty = (fy - by).max(T::zero()).min(T::one());
        let ix = bx.to_usize().unwrap_or(0);
        let iy = by.to_usize().unwrap_or(0);
        if res == 1 {
            return self.nearest_value(values, p);
        }
        let corners = [
            (ix, iy, (T::one() - tx) * (T::one() - ty)),
            (ix + 1, iy, tx * (T::one() - ty)),
            (ix, iy + 1, (T::one() - tx) * ty),
            (ix + 1, iy + 1, tx * ty),
        ];
        let mut acc = T::zero();
        let mut wsum = T::zero();
        let mut all_present = true;
        for &(cx, cy, w) in &corners {
            match self.lattice_index(cx, cy) {
                Some(g) => {
                    acc = acc + w * values[g];
                    wsum = wsum + w;
                }
                None => all_present = false,
            }
        }
        if all_present {
            acc
        } else if wsum > T::lit(1e-12) {
            acc / wsum
        } else {
            self.nearest_value(values, p)
        }
    }

    fn nearest_value(&self, values: &[T], p: Point2<T>) -> T {
        let mut best = 0;
        let mut best_d = T::infinity();
        for (g, q) in self.points.iter().enumerate() {
            let d = q.dist_sq(p);
            if d < best_d {
                best_d = d;
                best = g;
            }
        }
        values[best]
    }
}
