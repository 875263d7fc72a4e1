use super::polygon::{self, EdgeSource};
use super::{ConvexDomain, GeometryError, Point2, ScalarField2D};
use crate::scalar::Real;

/// Masses below this are treated as zero by [`cell_mass_centroid`].
pub const MASS_FLOOR: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct VoronoiCell<T> {
    pub generator_id: usize,
    pub generator: Point2<T>,
    /// Convex, counterclockwise.
    pub polygon: Vec<Point2<T>>,
    /// Ascending indices of the domain grid points owned by this cell.
    pub grid_point_ids: Vec<usize>,
}

impl<T: Real> VoronoiCell<T> {
    pub fn area(&self) -> T {
        polygon::area(&self.polygon)
    }

    pub fn contains(&self, p: Point2<T>, tol: T) -> bool {
        polygon::contains(&self.polygon, p, tol)
    }
}

/// Voronoi tessellation of a convex domain and the induced Delaunay adjacency.
#[derive(Clone, Debug)]
pub struct VoronoiPartition<T> {
    pub cells: Vec<VoronoiCell<T>>,
    neighbors: Vec<Vec<usize>>,
    owner: Vec<usize>,
}

impl<T: Real> VoronoiPartition<T> {
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Sorted neighbor ids of robot `i`.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    pub fn adjacent(&self, i: usize, j: usize) -> bool {
        self.neighbors[i].binary_search(&j).is_ok()
    }

    /// Owning generator of every grid point.
    pub fn owners(&self) -> &[usize] {
        &self.owner
    }
}

/// Clips the domain by the bisector half-planes of every other generator.
///
/// Grid points go to the nearest generator, ties to the lowest index. Two
/// cells are adjacent when a bisector edge of positive length survives in
/// either cell's polygon.
pub fn compute_partition<T: Real>(positions: &[Point2<T>], domain: &ConvexDomain<T>) -> Result<VoronoiPartition<T>, GeometryError> {
    let m = positions.len();
    if m == 0 {
        return Err(GeometryError::NoGenerators);
    }
    let diam = domain.diameter();
    for (i, &p) in positions.iter().enumerate() {
        if !p.is_finite() || !domain.contains(p) {
            return Err(GeometryError::OutsideDomain { index: i });
        }
    }
    let min_sep = T::lit(1e-9) * diam;
    for i in 0..m {
        for j in (i + 1)..m {
            if positions[i].dist(positions[j]) < min_sep {
                return Err(GeometryError::CoincidentGenerators { first: i, second: j });
            }
        }
    }

    let merge_tol = T::lit(1e-12) * diam;
    let edge_tol = T::lit(1e-9) * diam;
    let half = T::lit(0.5);
    let mut cells = Vec::with_capacity(m);
    let mut neighbors = vec![Vec::new(); m];
    for i in 0..m {
        let xi = positions[i];
        let mut poly = domain.vertices().to_vec();
        let mut labels: Vec<EdgeSource> = (0..poly.len()).map(EdgeSource::Domain).collect();
        for j in 0..m {
            if j == i || poly.is_empty() {
                continue;
            }
            let xj = positions[j];
            let (p, l) = polygon::clip_halfplane(&poly, &labels, (xi + xj) * half, xj - xi, EdgeSource::Bisector(j), merge_tol);
            poly = p;
            labels = l;
        }
        let n = poly.len();
        for k in 0..n {
            if let EdgeSource::Bisector(j) = labels[k] {
                if poly[k].dist(poly[(k + 1) % n]) > edge_tol {
                    neighbors[i].push(j);
                }
            }
        }
        cells.push(VoronoiCell { generator_id: i, generator: xi, polygon: poly, grid_point_ids: Vec::new() });
    }
    // union keeps the relation symmetric when one side's edge falls under the tolerance
    for i in 0..m {
        for k in 0..neighbors[i].len() {
            let j = neighbors[i][k];
            if !neighbors[j].contains(&i) {
                neighbors[j].push(i);
            }
        }
    }
    for n in &mut neighbors {
        n.sort_unstable();
        n.dedup();
    }

    let owner: Vec<usize> = domain.grid_points().iter().map(|&q| nearest_generator(positions, q)).collect();
    for (g, &i) in owner.iter().enumerate() {
        cells[i].grid_point_ids.push(g);
    }

    Ok(VoronoiPartition { cells, neighbors, owner })
}

/// Index of the closest generator, lowest index on ties.
#[inline]
pub fn nearest_generator<T: Real>(positions: &[Point2<T>], q: Point2<T>) -> usize {
    let mut best = 0;
    let mut best_d = positions[0].dist_sq(q);
    for (i, p) in positions.iter().enumerate().skip(1) {
        let d = p.dist_sq(q);
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    best
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CellMoments<T> {
    pub mass: T,
    pub centroid: Point2<T>,
    /// Mass fell under [`MASS_FLOOR`]; centroid computed with uniform density.
    pub degenerate: bool,
}

/// Density-weighted mass and center of mass of a cell.
///
/// Expects a nonnegative density. When the mass is below [`MASS_FLOOR`] the
/// uniform-density centroid of the cell's grid points is returned instead
/// (the polygon centroid if the cell owns no grid point).
pub fn cell_mass_centroid<T: Real>(cell: &VoronoiCell<T>, density: &ScalarField2D<T>) -> CellMoments<T> {
    let pts = density.domain().grid_points();
    let da = density.domain().cell_area();
    let mut mass = T::zero();
    let mut mx = T::zero();
    let mut my = T::zero();
    for &g in &cell.grid_point_ids {
        let w = density.get(g);
        let q = pts[g];
        mass = mass + w;
        mx = mx + w * q.x;
        my = my + w * q.y;
    }
    if mass * da >= T::lit(MASS_FLOOR) {
        return CellMoments { mass: mass * da, centroid: Point2::new(mx / mass, my / mass), degenerate: false };
    }
    let centroid = if cell.grid_point_ids.is_empty() {
        polygon::centroid(&cell.polygon)
    } else {
        let mut s = Point2::new(T::zero(), T::zero());
        for &g in &cell.grid_point_ids {
            s = s + pts[g];
        }
        s * (T::one() / T::from_index(cell.grid_point_ids.len()))
    };
    CellMoments { mass: mass * da, centroid, degenerate: true }
}

/// Moments of every cell of the partition generated by `positions`, without building polygons.
///
/// Same grid ownership and summation order as [`compute_partition`] followed
/// by [`cell_mass_centroid`]. A cell that owns no grid point reports its
/// generator as centroid.
pub fn cell_moments_all<T: Real>(positions: &[Point2<T>], density: &ScalarField2D<T>) -> Vec<CellMoments<T>> {
    moments_with(positions, density.domain(), |_| density)
}

/// Like [`cell_moments_all`], but cell `i` is weighted by `densities[i]`.
///
/// All fields must live on the same grid.
pub fn cell_moments_each<T: Real>(positions: &[Point2<T>], densities: &[&ScalarField2D<T>]) -> Vec<CellMoments<T>> {
    assert_eq!(positions.len(), densities.len(), "one density per cell");
    let domain = densities[0].domain();
    debug_assert!(densities.iter().all(|d| d.same_grid(densities[0])));
    moments_with(positions, domain, |i| densities[i])
}

fn moments_with<'a, T: Real + 'a>(
    positions: &[Point2<T>],
    domain: &ConvexDomain<T>,
    density_of: impl Fn(usize) -> &'a ScalarField2D<T>,
) -> Vec<CellMoments<T>> {
    let m = positions.len();
    let pts = domain.grid_points();
    let da = domain.cell_area();
    let mut acc = vec![(T::zero(), T::zero(), T::zero()); m];
    let mut uniform = vec![(T::zero(), T::zero(), 0usize); m];
    for (g, &q) in pts.iter().enumerate() {
        let i = nearest_generator(positions, q);
        let w = density_of(i).get(g);
        let a = &mut acc[i];
        a.0 = a.0 + w;
        a.1 = a.1 + w * q.x;
        a.2 = a.2 + w * q.y;
        let u = &mut uniform[i];
        u.0 = u.0 + q.x;
        u.1 = u.1 + q.y;
        u.2 += 1;
    }
    acc.iter()
        .zip(&uniform)
        .zip(positions)
        .map(|((&(mass, mx, my), &(ux, uy, count)), &gen)| {
            if mass * da >= T::lit(MASS_FLOOR) {
                CellMoments { mass: mass * da, centroid: Point2::new(mx / mass, my / mass), degenerate: false }
            } else if count > 0 {
                let inv = T::one() / T::from_index(count);
                CellMoments { mass: mass * da, centroid: Point2::new(ux * inv, uy * inv), degenerate: true }
            } else {
                CellMoments { mass: T::zero(), centroid: gen, degenerate: true }
            }
        })
        .collect()
}

/// Locational cost `sum_i sum_{q in V_i} |q - x_i|^2 f(q) dq`.
pub fn coverage_cost<T: Real>(positions: &[Point2<T>], density: &ScalarField2D<T>) -> T {
    let pts = density.domain().grid_points();
    let mut h = T::zero();
    for (g, &q) in pts.iter().enumerate() {
        let i = nearest_generator(positions, q);
        h = h + q.dist_sq(positions[i]) * density.get(g);
    }
    h * density.domain().cell_area()
}

/// The cell grid point with the largest field value, lowest grid index on ties.
pub fn argmax_in_cell<T: Real>(cell: &VoronoiCell<T>, field: &ScalarField2D<T>) -> Result<Point2<T>, GeometryError> {
    let mut best: Option<(usize, T)> = None;
    for &g in &cell.grid_point_ids {
        let v = field.get(g);
        match best {
            Some((_, bv)) if !(v > bv) => {}
            _ => best = Some((g, v)),
        }
    }
    best.map(|(g, _)| field.domain().grid_points()[g]).ok_or(GeometryError::EmptyCell { index: cell.generator_id })
}
