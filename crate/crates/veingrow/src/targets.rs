//! Training-target generation: the centroidness weight map, the box- and
//! polar-centerness baselines it is compared against, and pyramid-level
//! assignment.
//!
//! A pixel's centroidness is `d_min / (d_c + d_min)` where `d_c` is the
//! distance to the instance anchor and `d_min` the minimum distance to the
//! contour; it is 1 at the anchor, falls off toward the boundary, and is 0
//! outside the mask.

use std::io::{self, Write};

use crate::geometry::{
    interior_anchor, min_boundary_distance, point_in_polygon, ray_cast_unchecked, rasterize,
    GeometryError, Point2, Polygon, RasterGrid,
};
use crate::vein::PolarConfig;

/// Per-pixel weights in [0, 1], row-major.
///
/// Support semantics belong to the generator: centroidness and polar
/// centerness are zero outside the mask, the box-centerness baseline is zero
/// outside the bounding box (that mismatch is the point of the comparison).
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMap {
    width: u32,
    height: u32,
    values: Vec<f64>,
}

impl WeightMap {
    fn zeros(width: u32, height: u32) -> Self {
        WeightMap {
            width,
            height,
            values: vec![0.0; width as usize * height as usize],
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn get(&self, col: u32, row: u32) -> f64 {
        self.values[row as usize * self.width as usize + col as usize]
    }

    fn set(&mut self, col: u32, row: u32, v: f64) {
        self.values[row as usize * self.width as usize + col as usize] = v;
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Binary PGM, maxval 255, one byte per pixel (`round(255 * w)`).
    pub fn write_pgm<W: Write>(&self, out: &mut W) -> io::Result<()> {
        write!(out, "P5\n{} {}\n255\n", self.width, self.height)?;
        let bytes: Vec<u8> = self
            .values
            .iter()
            .map(|w| (255.0 * w).round() as u8)
            .collect();
        out.write_all(&bytes)
    }

    /// Row-major CSV, six decimal places.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> io::Result<()> {
        for row in 0..self.height as usize {
            let line = self.values[row * self.width as usize..(row + 1) * self.width as usize]
                .iter()
                .map(|v| format!("{v:.6}"))
                .collect::<Vec<_>>()
                .join(",");
            writeln!(out, "{line}")?;
        }
        Ok(())
    }
}

/// Centroidness at a single point: `d_min / (d_c + d_min)` inside the mask,
/// 0 outside.
pub fn centroidness_at(p: &Polygon, anchor: Point2, q: Point2) -> f64 {
    if !point_in_polygon(p, q) {
        return 0.0;
    }
    let d_min = min_boundary_distance(p, q);
    let d_c = q.distance(anchor);
    if d_c + d_min == 0.0 {
        return 1.0;
    }
    d_min / (d_c + d_min)
}

/// Centroidness over the grid's pixel centers. The support is exactly the
/// pixel-center rasterization of the mask.
pub fn centroidness_map(p: &Polygon, g: &RasterGrid) -> Result<WeightMap, GeometryError> {
    let anchor = interior_anchor(p, g)?.point;
    map_over_mask(p, g, |q| centroidness_at(p, anchor, q))
}

/// Discrete variant: `d_min` over `m` equally spaced boundary samples
/// instead of the exact boundary distance. Converges to
/// [`centroidness_map`] as `m` grows.
pub fn centroidness_map_discrete(
    p: &Polygon,
    g: &RasterGrid,
    m: usize,
) -> Result<WeightMap, GeometryError> {
    if m == 0 {
        return Err(GeometryError::DegenerateGeometry(
            "need at least one boundary sample",
        ));
    }
    let anchor = interior_anchor(p, g)?.point;
    let samples = p.boundary_samples(m);
    map_over_mask(p, g, |q| {
        let d_min = samples
            .iter()
            .map(|s| s.distance(q))
            .fold(f64::INFINITY, f64::min);
        let d_c = q.distance(anchor);
        if d_c + d_min == 0.0 {
            1.0
        } else {
            d_min / (d_c + d_min)
        }
    })
}

fn map_over_mask(
    p: &Polygon,
    g: &RasterGrid,
    f: impl Fn(Point2) -> f64,
) -> Result<WeightMap, GeometryError> {
    let mask = rasterize(p, &g.at_pixel_centers())?;
    let mut map = WeightMap::zeros(g.width(), g.height());
    for row in 0..g.height() {
        for col in 0..g.width() {
            if mask.pixel_coverage(col, row) > 0 {
                map.set(col, row, f(Point2::new(col as f64 + 0.5, row as f64 + 0.5)));
            }
        }
    }
    Ok(map)
}

/// Distances from a location to the four sides of its bounding box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxExtents {
    pub left: f64,
    pub top: f64,
    pub right: f64,
    pub bottom: f64,
}

impl BoxExtents {
    pub fn new(left: f64, top: f64, right: f64, bottom: f64) -> Result<Self, GeometryError> {
        let e = BoxExtents {
            left,
            top,
            right,
            bottom,
        };
        if [left, top, right, bottom].iter().any(|v| *v < 0.0 || !v.is_finite()) {
            return Err(GeometryError::DegenerateGeometry("negative box extent"));
        }
        if e.max_extent() <= 0.0 {
            return Err(GeometryError::DegenerateGeometry("all box extents zero"));
        }
        Ok(e)
    }

    /// Extents of a polygon's centroid against its own bounding box.
    pub fn from_polygon(p: &Polygon) -> Result<Self, GeometryError> {
        let c = crate::geometry::polygon_centroid(p)?;
        let (min, max) = p.bounding_box();
        BoxExtents::new(c.x - min.x, c.y - min.y, max.x - c.x, max.y - c.y)
    }

    pub fn max_extent(&self) -> f64 {
        self.left.max(self.top).max(self.right).max(self.bottom)
    }
}

/// Box-centerness at given extents:
/// `sqrt(min(l,r)/max(l,r) * min(t,b)/max(t,b))`.
pub fn fcos_centerness(e: &BoxExtents) -> Result<f64, GeometryError> {
    let mx = e.left.max(e.right);
    let my = e.top.max(e.bottom);
    if mx <= 0.0 || my <= 0.0 {
        return Err(GeometryError::DegenerateGeometry("zero max extent"));
    }
    Ok((e.left.min(e.right) / mx * (e.top.min(e.bottom) / my)).sqrt())
}

/// Box-centerness over pixel centers inside the box, 0 outside. This is the
/// baseline map: it is nonzero on background pixels inside the box, unlike
/// centroidness.
pub fn fcos_centerness_map(
    box_min: Point2,
    box_max: Point2,
    g: &RasterGrid,
) -> Result<WeightMap, GeometryError> {
    if box_max.x - box_min.x <= 0.0 || box_max.y - box_min.y <= 0.0 {
        return Err(GeometryError::DegenerateGeometry("degenerate box"));
    }
    let mut map = WeightMap::zeros(g.width(), g.height());
    for row in 0..g.height() {
        for col in 0..g.width() {
            let q = Point2::new(col as f64 + 0.5, row as f64 + 0.5);
            let (l, t, r, b) = (q.x - box_min.x, q.y - box_min.y, box_max.x - q.x, box_max.y - q.y);
            if l >= 0.0 && t >= 0.0 && r >= 0.0 && b >= 0.0 {
                let v = (l.min(r) / l.max(r) * (t.min(b) / t.max(b))).sqrt();
                map.set(col, row, v);
            }
        }
    }
    Ok(map)
}

/// Polar-centerness at a single interior point: min over the n ray distances
/// divided by max. Returns 0 when the point touches the boundary.
pub fn polarmask_centerness_at(p: &Polygon, cfg: PolarConfig, q: Point2) -> f64 {
    let mut min = f64::INFINITY;
    let mut max: f64 = 0.0;
    for k in 0..cfg.n() {
        match ray_cast_unchecked(p, q, cfg.angle(k)) {
            Ok(d) => {
                min = min.min(d);
                max = max.max(d);
            }
            Err(_) => return 0.0,
        }
    }
    if max <= 0.0 {
        return 0.0;
    }
    min / max
}

/// Polar-centerness over the mask's pixel centers, 0 outside.
pub fn polarmask_centerness_map(
    p: &Polygon,
    cfg: PolarConfig,
    g: &RasterGrid,
) -> Result<WeightMap, GeometryError> {
    map_over_mask(p, g, |q| {
        if crate::geometry::point_strictly_inside(p, q) {
            polarmask_centerness_at(p, cfg, q)
        } else {
            // Covered pixel whose center grazes the boundary.
            0.0
        }
    })
}

/// Route an instance to pyramid level 3..=7 by which half-open interval
/// (lo, hi] holds its maximum box extent; the interval tops are
/// 64, 128, 256, 512, and infinity.
pub fn fpn_level_assign(e: &BoxExtents) -> u8 {
    let m = e.max_extent();
    if m <= 64.0 {
        3
    } else if m <= 128.0 {
        4
    } else if m <= 256.0 {
        5
    } else if m <= 512.0 {
        6
    } else {
        7
    }
}
