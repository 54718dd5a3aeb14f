//! Geometric primitives shared by every other module: points, polygons,
//! centroids, ray casting, rasterization, and rasterized IoU.
//!
//! Coordinate convention: x grows rightward, y grows downward (image
//! coordinates). Angles are measured from +x toward +y, so direction k of n
//! has `theta_k = 2*pi*k/n`. All operations are pure functions over immutable
//! values and safe to share across threads.

mod polygon;
mod raster;

pub use polygon::{
    interior_anchor, min_boundary_distance, point_in_polygon, point_strictly_inside,
    polygon_centroid, ray_cast_distance, Anchor, Polygon,
};
pub(crate) use polygon::ray_cast_unchecked;
pub use raster::{mask_iou, raster_iou, rasterize, RasterGrid, RasterMask};

use thiserror::Error;

/// Areas below this (px^2) and vertex separations below this (px) count as
/// degenerate. Well below annotation precision.
pub const DEGENERACY_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(&'static str),
    #[error("query origin lies outside the mask polygon")]
    OriginOutsideMask,
    #[error("internal geometry failure: {0}")]
    InternalGeometryError(&'static str),
    #[error("polygon exceeds raster grid bounds")]
    OutOfBounds,
}

/// A point in continuous pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn distance(self, other: Point2) -> f64 {
        self.distance_squared(other).sqrt()
    }

    pub fn distance_squared(self, other: Point2) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    /// The point reached by walking `dist` along `angle` (radians, +x toward +y).
    pub fn polar_offset(self, angle: f64, dist: f64) -> Point2 {
        Point2::new(self.x + dist * angle.cos(), self.y + dist * angle.sin())
    }

    pub fn translated(self, dx: f64, dy: f64) -> Point2 {
        Point2::new(self.x + dx, self.y + dy)
    }
}

/// Cross product of `b - a` and `c - a`; positive when the turn a->b->c
/// rotates in the +theta sense (from +x toward +y).
pub(crate) fn orient(a: Point2, b: Point2, c: Point2) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

/// Euclidean distance from `q` to segment `a`-`b`.
pub(crate) fn point_segment_distance(q: Point2, a: Point2, b: Point2) -> f64 {
    let len_sq = a.distance_squared(b);
    if len_sq <= DEGENERACY_EPS * DEGENERACY_EPS {
        return q.distance(a);
    }
    let t = ((q.x - a.x) * (b.x - a.x) + (q.y - a.y) * (b.y - a.y)) / len_sq;
    let t = t.clamp(0.0, 1.0);
    q.distance(Point2::new(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)))
}
