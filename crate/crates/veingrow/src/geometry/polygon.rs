//! Simple polygons and the point-level queries built on them.

use super::{
    orient, point_segment_distance, raster::RasterGrid, GeometryError, Point2, DEGENERACY_EPS,
};

/// Tolerance for "on the boundary" checks; boundary points count as inside
/// so that vein endpoints sitting exactly on the contour are never classified
/// as background.
const BOUNDARY_TOL: f64 = 1e-9;

/// An instance boundary as an ordered vertex list, stored as given.
///
/// [`Polygon::new`] enforces the full invariants (at least 3 finite vertices,
/// no duplicate neighbours, nonzero area, no self-intersection).
/// Reconstructed contours can self-intersect for pathological inputs, so the
/// decoder uses [`Polygon::new_unchecked`] and relies on rasterization being
/// robust to that.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    vertices: Vec<Point2>,
}

impl Polygon {
    pub fn new(vertices: Vec<Point2>) -> Result<Self, GeometryError> {
        if vertices.len() < 3 {
            return Err(GeometryError::DegenerateGeometry("fewer than 3 vertices"));
        }
        if vertices.iter().any(|v| !v.is_finite()) {
            return Err(GeometryError::DegenerateGeometry("non-finite vertex"));
        }
        let n = vertices.len();
        for i in 0..n {
            if vertices[i].distance(vertices[(i + 1) % n]) < DEGENERACY_EPS {
                return Err(GeometryError::DegenerateGeometry("duplicate vertices"));
            }
        }
        let poly = Polygon { vertices };
        if poly.area() < DEGENERACY_EPS {
            return Err(GeometryError::DegenerateGeometry("zero area"));
        }
        if !poly.is_simple() {
            return Err(GeometryError::DegenerateGeometry("self-intersecting"));
        }
        Ok(poly)
    }

    /// Skips the simplicity and area validation. For internally assembled
    /// contours that feed only into rasterization.
    pub fn new_unchecked(vertices: Vec<Point2>) -> Self {
        Polygon { vertices }
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point2, Point2)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn signed_area(&self) -> f64 {
        let mut acc = 0.0;
        for (a, b) in self.edges() {
            acc += a.x * b.y - b.x * a.y;
        }
        acc / 2.0
    }

    pub fn area(&self) -> f64 {
        self.signed_area().abs()
    }

    pub fn perimeter(&self) -> f64 {
        self.edges().map(|(a, b)| a.distance(b)).sum()
    }

    /// Axis-aligned bounding box as (min corner, max corner).
    pub fn bounding_box(&self) -> (Point2, Point2) {
        let mut min = Point2::new(f64::INFINITY, f64::INFINITY);
        let mut max = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for v in &self.vertices {
            min.x = min.x.min(v.x);
            min.y = min.y.min(v.y);
            max.x = max.x.max(v.x);
            max.y = max.y.max(v.y);
        }
        (min, max)
    }

    pub fn translated(&self, dx: f64, dy: f64) -> Polygon {
        Polygon {
            vertices: self.vertices.iter().map(|v| v.translated(dx, dy)).collect(),
        }
    }

    /// `m` points spaced equally by arc length along the boundary.
    pub fn boundary_samples(&self, m: usize) -> Vec<Point2> {
        let perimeter = self.perimeter();
        let n = self.vertices.len();
        let mut samples = Vec::with_capacity(m);
        let mut edge = 0;
        let mut edge_start = 0.0;
        let mut edge_len = self.vertices[0].distance(self.vertices[1 % n]);
        for i in 0..m {
            let s = perimeter * i as f64 / m as f64;
            while s > edge_start + edge_len && edge + 1 < n {
                edge_start += edge_len;
                edge += 1;
                edge_len = self.vertices[edge].distance(self.vertices[(edge + 1) % n]);
            }
            let t = if edge_len > 0.0 { (s - edge_start) / edge_len } else { 0.0 };
            let a = self.vertices[edge];
            let b = self.vertices[(edge + 1) % n];
            samples.push(Point2::new(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)));
        }
        samples
    }

    fn is_simple(&self) -> bool {
        let n = self.vertices.len();
        // Adjacent edges folding back onto each other are degenerate spikes.
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            let c = self.vertices[(i + 2) % n];
            let cross = orient(a, b, c);
            let dot = (b.x - a.x) * (c.x - b.x) + (b.y - a.y) * (c.y - b.y);
            if cross.abs() < DEGENERACY_EPS && dot < 0.0 {
                return false;
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                // Skip pairs sharing a vertex (adjacent, incl. last-first).
                if j == i + 1 || (i == 0 && j == n - 1) {
                    continue;
                }
                let (p1, p2) = (self.vertices[i], self.vertices[(i + 1) % n]);
                let (p3, p4) = (self.vertices[j], self.vertices[(j + 1) % n]);
                if segments_intersect(p1, p2, p3, p4) {
                    return false;
                }
            }
        }
        true
    }
}

fn on_segment_collinear(a: Point2, b: Point2, q: Point2) -> bool {
    q.x >= a.x.min(b.x) - BOUNDARY_TOL
        && q.x <= a.x.max(b.x) + BOUNDARY_TOL
        && q.y >= a.y.min(b.y) - BOUNDARY_TOL
        && q.y <= a.y.max(b.y) + BOUNDARY_TOL
}

fn segments_intersect(p1: Point2, p2: Point2, p3: Point2, p4: Point2) -> bool {
    let d1 = orient(p3, p4, p1);
    let d2 = orient(p3, p4, p2);
    let d3 = orient(p1, p2, p3);
    let d4 = orient(p1, p2, p4);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment_collinear(p3, p4, p1))
        || (d2 == 0.0 && on_segment_collinear(p3, p4, p2))
        || (d3 == 0.0 && on_segment_collinear(p1, p2, p3))
        || (d4 == 0.0 && on_segment_collinear(p1, p2, p4))
}

/// Area-weighted centroid via the shoelace moment formula.
pub fn polygon_centroid(p: &Polygon) -> Result<Point2, GeometryError> {
    let a = p.signed_area();
    if a.abs() < DEGENERACY_EPS {
        return Err(GeometryError::DegenerateGeometry("area below threshold"));
    }
    let mut cx = 0.0;
    let mut cy = 0.0;
    for (u, v) in p.edges() {
        let w = u.x * v.y - v.x * u.y;
        cx += (u.x + v.x) * w;
        cy += (u.y + v.y) * w;
    }
    Ok(Point2::new(cx / (6.0 * a), cy / (6.0 * a)))
}

fn on_boundary(p: &Polygon, q: Point2) -> bool {
    p.edges()
        .any(|(a, b)| point_segment_distance(q, a, b) <= BOUNDARY_TOL)
}

/// Even-odd crossing parity with a ray toward +x. Half-open in y and strict
/// in x so that vertex and edge grazes never double-count.
fn crossing_parity(p: &Polygon, q: Point2) -> bool {
    let mut inside = false;
    for (a, b) in p.edges() {
        if (a.y > q.y) != (b.y > q.y) {
            let x_cross = a.x + (q.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if x_cross > q.x {
                inside = !inside;
            }
        }
    }
    inside
}

/// Even-odd containment; boundary points count as inside.
pub fn point_in_polygon(p: &Polygon, q: Point2) -> bool {
    on_boundary(p, q) || crossing_parity(p, q)
}

/// Containment excluding the boundary, as required of ray-cast origins.
pub fn point_strictly_inside(p: &Polygon, q: Point2) -> bool {
    !on_boundary(p, q) && crossing_parity(p, q)
}

/// Minimum Euclidean distance from `q` to the polygon boundary.
pub fn min_boundary_distance(p: &Polygon, q: Point2) -> f64 {
    p.edges()
        .map(|(a, b)| point_segment_distance(q, a, b))
        .fold(f64::INFINITY, f64::min)
}

/// Distance from `origin` to the farthest intersection of the ray at `angle`
/// with the polygon boundary. Multi-hit rays take the maximum so that
/// star-shaped reconstructions cover as much of the mask as possible.
pub fn ray_cast_distance(p: &Polygon, origin: Point2, angle: f64) -> Result<f64, GeometryError> {
    if !point_strictly_inside(p, origin) {
        return Err(GeometryError::OriginOutsideMask);
    }
    ray_cast_unchecked(p, origin, angle)
}

pub(crate) fn ray_cast_unchecked(
    p: &Polygon,
    origin: Point2,
    angle: f64,
) -> Result<f64, GeometryError> {
    let dir = Point2::new(angle.cos(), angle.sin());
    let mut best: Option<f64> = None;
    for (a, b) in p.edges() {
        let ex = b.x - a.x;
        let ey = b.y - a.y;
        let denom = dir.x * ey - dir.y * ex;
        let rx = a.x - origin.x;
        let ry = a.y - origin.y;
        if denom.abs() < 1e-12 {
            // Parallel; collinear edges contribute their endpoint distances.
            if (rx * dir.y - ry * dir.x).abs() <= BOUNDARY_TOL {
                for q in [a, b] {
                    let t = (q.x - origin.x) * dir.x + (q.y - origin.y) * dir.y;
                    if t > 0.0 {
                        best = Some(best.map_or(t, |m: f64| m.max(t)));
                    }
                }
            }
            continue;
        }
        let t = (rx * ey - ry * ex) / denom;
        let u = (rx * dir.y - ry * dir.x) / denom;
        if t > 0.0 && (-1e-9..=1.0 + 1e-9).contains(&u) {
            best = Some(best.map_or(t, |m: f64| m.max(t)));
        }
    }
    best.ok_or(GeometryError::InternalGeometryError(
        "interior ray found no boundary intersection",
    ))
}

/// Result of [`interior_anchor`]: the anchor point, and whether the
/// pole-of-inaccessibility fallback was taken because the centroid fell
/// outside the mask.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Anchor {
    pub point: Point2,
    pub used_fallback: bool,
}

/// The polygon centroid when it lies strictly inside; otherwise the pixel
/// center of `g` that maximizes the minimum distance to the boundary
/// (approximate pole of inaccessibility over the rasterized interior).
pub fn interior_anchor(p: &Polygon, g: &RasterGrid) -> Result<Anchor, GeometryError> {
    let centroid = polygon_centroid(p)?;
    if point_strictly_inside(p, centroid) {
        return Ok(Anchor {
            point: centroid,
            used_fallback: false,
        });
    }
    let mut best: Option<(f64, Point2)> = None;
    for row in 0..g.height() {
        for col in 0..g.width() {
            let q = Point2::new(col as f64 + 0.5, row as f64 + 0.5);
            if point_strictly_inside(p, q) {
                let d = min_boundary_distance(p, q);
                if best.map_or(true, |(bd, _)| d > bd) {
                    best = Some((d, q));
                }
            }
        }
    }
    best.map(|(_, q)| Anchor {
        point: q,
        used_fallback: true,
    })
    .ok_or(GeometryError::DegenerateGeometry(
        "no interior sample at grid resolution",
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::rasterize;

    pub(crate) fn square4() -> Polygon {
        Polygon::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(4.0, 0.0),
            Point2::new(4.0, 4.0),
            Point2::new(0.0, 4.0),
        ])
        .unwrap()
    }

    fn u_shape() -> Polygon {
        // Two vertical arms joined by a base; the opening faces -y.
        Polygon::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(2.0, 0.0),
            Point2::new(2.0, 6.0),
            Point2::new(8.0, 6.0),
            Point2::new(8.0, 0.0),
            Point2::new(10.0, 0.0),
            Point2::new(10.0, 8.0),
            Point2::new(0.0, 8.0),
        ])
        .unwrap()
    }

    #[test]
    fn rejects_degenerate_polygons() {
        assert!(matches!(
            Polygon::new(vec![Point2::new(0.0, 0.0), Point2::new(1.0, 0.0)]),
            Err(GeometryError::DegenerateGeometry(_))
        ));
        // Bowtie self-intersection.
        assert!(matches!(
            Polygon::new(vec![
                Point2::new(0.0, 0.0),
                Point2::new(2.0, 2.0),
                Point2::new(2.0, 0.0),
                Point2::new(0.0, 2.0),
            ]),
            Err(GeometryError::DegenerateGeometry(_))
        ));
        // Collinear sliver with zero area.
        assert!(matches!(
            Polygon::new(vec![
                Point2::new(0.0, 0.0),
                Point2::new(1.0, 0.0),
                Point2::new(2.0, 0.0),
            ]),
            Err(GeometryError::DegenerateGeometry(_))
        ));
    }

    #[test]
    fn centroid_of_square_and_triangle() {
        let c = polygon_centroid(&square4()).unwrap();
        assert!((c.x - 2.0).abs() < 1e-12 && (c.y - 2.0).abs() < 1e-12);
        let tri = Polygon::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(6.0, 0.0),
            Point2::new(0.0, 6.0),
        ])
        .unwrap();
        let c = polygon_centroid(&tri).unwrap();
        assert!((c.x - 2.0).abs() < 1e-12 && (c.y - 2.0).abs() < 1e-12);
    }

    #[test]
    fn concave_centroid_can_fall_outside() {
        // Crescent: the centroid sits in the hollow between the two arcs.
        let p = crescent().translated(24.0, 24.0);
        let c = polygon_centroid(&p).unwrap();
        assert!(!point_in_polygon(&p, c));
        // Cross-check by brute-force rasterization: the subsample cell at the
        // centroid is uncovered.
        let g = RasterGrid::new(48, 48, 4).unwrap();
        let mask = rasterize(&p, &g).unwrap();
        assert!(!mask.contains_point(c.x, c.y));
    }

    /// Crescent between an outer circle (r=20 at origin) and an inner circle
    /// (r=17 at (6,0)), traced through the two circle intersection points.
    pub(crate) fn crescent() -> Polygon {
        let (big_r, small_r, off) = (20.0f64, 17.0f64, 6.0f64);
        let ix = (off * off + big_r * big_r - small_r * small_r) / (2.0 * off);
        let iy = (big_r * big_r - ix * ix).sqrt();
        let outer_a = iy.atan2(ix);
        let inner_a = iy.atan2(ix - off);
        let steps = 48;
        let mut vs = Vec::new();
        // Outer arc from +outer_a around the far side to -outer_a.
        for i in 0..=steps {
            let a = outer_a + (std::f64::consts::TAU - 2.0 * outer_a) * i as f64 / steps as f64;
            vs.push(Point2::new(big_r * a.cos(), big_r * a.sin()));
        }
        // Inner arc back from -inner_a through the far side to +inner_a.
        for i in 1..steps {
            let a = (std::f64::consts::TAU - inner_a)
                - (std::f64::consts::TAU - 2.0 * inner_a) * i as f64 / steps as f64;
            vs.push(Point2::new(off + small_r * a.cos(), small_r * a.sin()));
        }
        Polygon::new(vs).unwrap()
    }

    pub(crate) fn quarter_ring() -> Polygon {
        // Radii 1.15..1.25 about (0.5, 0.5), angles 0..pi/2. No pixel center
        // of a unit grid lands inside the band.
        let mut vs = Vec::new();
        let steps = 24;
        for i in 0..=steps {
            let a = std::f64::consts::FRAC_PI_2 * i as f64 / steps as f64;
            vs.push(Point2::new(0.5 + 1.25 * a.cos(), 0.5 + 1.25 * a.sin()));
        }
        for i in (0..=steps).rev() {
            let a = std::f64::consts::FRAC_PI_2 * i as f64 / steps as f64;
            vs.push(Point2::new(0.5 + 1.15 * a.cos(), 0.5 + 1.15 * a.sin()));
        }
        Polygon::new(vs).unwrap()
    }

    #[test]
    fn containment_examples() {
        let p = square4();
        assert!(point_in_polygon(&p, Point2::new(2.0, 2.0)));
        assert!(!point_in_polygon(&p, Point2::new(5.0, 2.0)));
        // Boundary counts as inside.
        assert!(point_in_polygon(&p, Point2::new(4.0, 2.0)));
        assert!(!point_strictly_inside(&p, Point2::new(4.0, 2.0)));
    }

    #[test]
    fn ray_cast_square() {
        let p = square4();
        let o = Point2::new(2.0, 2.0);
        assert!((ray_cast_distance(&p, o, 0.0).unwrap() - 2.0).abs() < 1e-12);
        let d = ray_cast_distance(&p, o, std::f64::consts::FRAC_PI_4).unwrap();
        assert!((d - 2.0 * 2.0_f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn ray_cast_takes_farthest_hit_across_gaps() {
        // Origin in the left arm, ray crossing the opening and re-entering
        // the right arm: crossings at x=2, 8, 10, so distance 9.
        let p = u_shape();
        let d = ray_cast_distance(&p, Point2::new(1.0, 3.0), 0.0).unwrap();
        assert!((d - 9.0).abs() < 1e-12);
    }

    #[test]
    fn ray_cast_rejects_exterior_and_boundary_origins() {
        let p = square4();
        assert_eq!(
            ray_cast_distance(&p, Point2::new(5.0, 5.0), 0.0),
            Err(GeometryError::OriginOutsideMask)
        );
        assert_eq!(
            ray_cast_distance(&p, Point2::new(4.0, 2.0), 0.0),
            Err(GeometryError::OriginOutsideMask)
        );
    }

    #[test]
    fn anchor_prefers_interior_centroid() {
        let g = RasterGrid::new(4, 4, 1).unwrap();
        let a = interior_anchor(&square4(), &g).unwrap();
        assert!(!a.used_fallback);
        assert_eq!(a.point, Point2::new(2.0, 2.0));
    }

    #[test]
    fn anchor_falls_back_for_exterior_centroid() {
        let p = u_shape_thin();
        let g = RasterGrid::new(11, 9, 1).unwrap();
        let a = interior_anchor(&p, &g).unwrap();
        assert!(a.used_fallback);
        assert!(point_in_polygon(&p, a.point));
        // At least as deep inside as the nearest interior pixel to the raw
        // centroid.
        let c = polygon_centroid(&p).unwrap();
        let mut nearest: Option<(f64, Point2)> = None;
        for row in 0..9 {
            for col in 0..11 {
                let q = Point2::new(col as f64 + 0.5, row as f64 + 0.5);
                if point_strictly_inside(&p, q) {
                    let d = c.distance(q);
                    if nearest.map_or(true, |(nd, _)| d < nd) {
                        nearest = Some((d, q));
                    }
                }
            }
        }
        let (_, proj) = nearest.unwrap();
        assert!(min_boundary_distance(&p, a.point) >= min_boundary_distance(&p, proj) - 1e-12);
    }

    fn u_shape_thin() -> Polygon {
        // Narrow U whose centroid lands in the opening.
        Polygon::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(2.0, 0.0),
            Point2::new(2.0, 7.0),
            Point2::new(8.0, 7.0),
            Point2::new(8.0, 0.0),
            Point2::new(10.0, 0.0),
            Point2::new(10.0, 9.0),
            Point2::new(0.0, 9.0),
        ])
        .unwrap()
    }

    #[test]
    fn anchor_errors_when_no_pixel_center_is_interior() {
        let p = quarter_ring();
        let g = RasterGrid::new(3, 3, 1).unwrap();
        assert_eq!(
            interior_anchor(&p, &g),
            Err(GeometryError::DegenerateGeometry(
                "no interior sample at grid resolution"
            ))
        );
    }

    #[test]
    fn boundary_samples_are_evenly_spaced() {
        let p = square4();
        let samples = p.boundary_samples(16);
        assert_eq!(samples.len(), 16);
        for s in &samples {
            assert!(min_boundary_distance(&p, *s) < 1e-9);
        }
    }
}
