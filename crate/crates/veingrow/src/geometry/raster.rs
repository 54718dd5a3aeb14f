//! Subsample rasterization and rasterized IoU.
//!
//! Cover ratios use rasterized IoU rather than exact polygon clipping:
//! reconstructed contours may self-intersect for pathological inputs, and
//! pixel-level evaluation mirrors how masks are scored anyway.

use super::{GeometryError, Polygon};
#[cfg(test)]
use super::Point2;

/// Pixel lattice over `[0, width] x [0, height]` sampled at
/// `supersample^2` points per pixel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RasterGrid {
    width: u32,
    height: u32,
    supersample: u32,
}

impl RasterGrid {
    pub fn new(width: u32, height: u32, supersample: u32) -> Result<Self, GeometryError> {
        if width == 0 || height == 0 {
            return Err(GeometryError::DegenerateGeometry("empty raster grid"));
        }
        if ![1, 2, 4, 8].contains(&supersample) {
            return Err(GeometryError::DegenerateGeometry(
                "supersample must be 1, 2, 4, or 8",
            ));
        }
        Ok(Self {
            width,
            height,
            supersample,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn supersample(&self) -> u32 {
        self.supersample
    }

    /// Same extents sampled only at pixel centers.
    pub fn at_pixel_centers(&self) -> RasterGrid {
        RasterGrid {
            supersample: 1,
            ..*self
        }
    }
}

/// Binary coverage at subsample resolution, stored as a bitset. Per-pixel
/// subsample counts give fractional coverage.
#[derive(Debug, Clone, PartialEq)]
pub struct RasterMask {
    width: u32,
    height: u32,
    supersample: u32,
    words: Vec<u64>,
}

impl RasterMask {
    fn sub_width(&self) -> usize {
        (self.width * self.supersample) as usize
    }

    fn sub_height(&self) -> usize {
        (self.height * self.supersample) as usize
    }

    fn get_sub(&self, sx: usize, sy: usize) -> bool {
        let idx = sy * self.sub_width() + sx;
        self.words[idx / 64] >> (idx % 64) & 1 == 1
    }

    pub fn supersample(&self) -> u32 {
        self.supersample
    }

    /// Number of covered subsamples within pixel (col, row).
    pub fn pixel_coverage(&self, col: u32, row: u32) -> u32 {
        let ss = self.supersample as usize;
        let mut count = 0;
        for j in 0..ss {
            for i in 0..ss {
                if self.get_sub(col as usize * ss + i, row as usize * ss + j) {
                    count += 1;
                }
            }
        }
        count
    }

    /// Covered fraction of pixel (col, row) in [0, 1].
    pub fn coverage_fraction(&self, col: u32, row: u32) -> f64 {
        self.pixel_coverage(col, row) as f64 / (self.supersample * self.supersample) as f64
    }

    /// Whether the subsample cell containing the continuous point is covered.
    pub fn contains_point(&self, x: f64, y: f64) -> bool {
        let ss = self.supersample as f64;
        let sx = (x * ss).floor();
        let sy = (y * ss).floor();
        if sx < 0.0 || sy < 0.0 || sx >= self.sub_width() as f64 || sy >= self.sub_height() as f64 {
            return false;
        }
        self.get_sub(sx as usize, sy as usize)
    }

    /// Covered area in px^2 from fractional subsample coverage.
    pub fn area_px(&self) -> f64 {
        let set: u64 = self.words.iter().map(|w| w.count_ones() as u64).sum();
        set as f64 / (self.supersample * self.supersample) as f64
    }
}

/// Rasterize by sampling subsample centers with even-odd scanline parity.
/// Samples exactly on a boundary crossing resolve half-open (low-x side in,
/// high-x side out), which keeps straight-edge areas exact.
pub fn rasterize(p: &Polygon, g: &RasterGrid) -> Result<RasterMask, GeometryError> {
    let (min, max) = p.bounding_box();
    if min.x < -1e-9
        || min.y < -1e-9
        || max.x > g.width as f64 + 1e-9
        || max.y > g.height as f64 + 1e-9
    {
        return Err(GeometryError::OutOfBounds);
    }
    let ss = g.supersample as usize;
    let sub_w = g.width as usize * ss;
    let sub_h = g.height as usize * ss;
    let mut words = vec![0u64; (sub_w * sub_h).div_ceil(64)];
    let inv = 1.0 / ss as f64;
    let mut crossings: Vec<f64> = Vec::new();
    for sy in 0..sub_h {
        let y = (sy as f64 + 0.5) * inv;
        crossings.clear();
        for (a, b) in p.edges() {
            if (a.y > y) != (b.y > y) {
                crossings.push(a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y));
            }
        }
        if crossings.is_empty() {
            continue;
        }
        crossings.sort_unstable_by(|u, v| u.partial_cmp(v).unwrap());
        let mut ptr = 0;
        let row_base = sy * sub_w;
        for sx in 0..sub_w {
            let x = (sx as f64 + 0.5) * inv;
            while ptr < crossings.len() && crossings[ptr] <= x {
                ptr += 1;
            }
            if (crossings.len() - ptr) % 2 == 1 {
                let idx = row_base + sx;
                words[idx / 64] |= 1 << (idx % 64);
            }
        }
    }
    Ok(RasterMask {
        width: g.width,
        height: g.height,
        supersample: g.supersample,
        words,
    })
}

/// IoU of two masks over the same grid, from subsample counts.
pub fn mask_iou(a: &RasterMask, b: &RasterMask) -> Result<f64, GeometryError> {
    if a.width != b.width || a.height != b.height || a.supersample != b.supersample {
        return Err(GeometryError::InternalGeometryError(
            "mask grids do not match",
        ));
    }
    let mut inter = 0u64;
    let mut union = 0u64;
    for (wa, wb) in a.words.iter().zip(&b.words) {
        inter += (wa & wb).count_ones() as u64;
        union += (wa | wb).count_ones() as u64;
    }
    if union == 0 {
        return Err(GeometryError::DegenerateGeometry("empty union"));
    }
    Ok(inter as f64 / union as f64)
}

/// Rasterized IoU of two polygons over a shared grid.
pub fn raster_iou(a: &Polygon, b: &Polygon, g: &RasterGrid) -> Result<f64, GeometryError> {
    mask_iou(&rasterize(a, g)?, &rasterize(b, g)?)
}
