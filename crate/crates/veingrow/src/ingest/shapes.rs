//! Deterministic synthetic shapes, centered on the origin. Callers translate
//! them onto a grid with [`Polygon::translated`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::IngestError;
use crate::geometry::{Point2, Polygon};

#[derive(Debug, Clone, PartialEq)]
pub enum ShapeKind {
    /// Regular `vertices`-gon approximation; use at least a few hundred
    /// vertices when a fixture stands in for a true circle.
    Circle { radius: f64, vertices: usize },
    Square { side: f64 },
    /// `points` spikes alternating between the two radii.
    Star {
        points: usize,
        outer_radius: f64,
        inner_radius: f64,
    },
    /// Square with a `notch_width` x `notch_depth` rectangle cut into the
    /// right edge, centered vertically.
    NotchedSquare {
        side: f64,
        notch_width: f64,
        notch_depth: f64,
    },
    /// Star-shaped polygon with jittered vertex angles and radii; always
    /// simple.
    RandomBlob {
        vertices: usize,
        mean_radius: f64,
        /// Relative radius jitter in [0, 1).
        irregularity: f64,
    },
}

/// Build the polygon for `kind`. Only `RandomBlob` consumes the seed; every
/// kind is deterministic for a given (kind, seed).
pub fn synthesize_shape(kind: &ShapeKind, seed: u64) -> Result<Polygon, IngestError> {
    let vertices = match kind {
        ShapeKind::Circle { radius, vertices } => {
            if *radius <= 0.0 {
                return Err(IngestError::ParamError("circle radius must be positive"));
            }
            if *vertices < 8 {
                return Err(IngestError::ParamError("circle needs at least 8 vertices"));
            }
            regular_points(*vertices, |_| *radius)
        }
        ShapeKind::Square { side } => {
            if *side <= 0.0 {
                return Err(IngestError::ParamError("square side must be positive"));
            }
            let h = side / 2.0;
            vec![
                Point2::new(-h, -h),
                Point2::new(h, -h),
                Point2::new(h, h),
                Point2::new(-h, h),
            ]
        }
        ShapeKind::Star {
            points,
            outer_radius,
            inner_radius,
        } => {
            if *points < 3 {
                return Err(IngestError::ParamError("star needs at least 3 points"));
            }
            if !(0.0 < *inner_radius && inner_radius < outer_radius) {
                return Err(IngestError::ParamError(
                    "star needs 0 < inner_radius < outer_radius",
                ));
            }
            regular_points(2 * points, |i| {
                if i % 2 == 0 {
                    *outer_radius
                } else {
                    *inner_radius
                }
            })
        }
        ShapeKind::NotchedSquare {
            side,
            notch_width,
            notch_depth,
        } => {
            if *side <= 0.0 {
                return Err(IngestError::ParamError("square side must be positive"));
            }
            if !(0.0 < *notch_width && notch_width < side)
                || !(0.0 < *notch_depth && notch_depth < side)
            {
                return Err(IngestError::ParamError(
                    "notch must be smaller than the square",
                ));
            }
            let h = side / 2.0;
            let w = notch_width / 2.0;
            vec![
                Point2::new(-h, -h),
                Point2::new(h, -h),
                Point2::new(h, -w),
                Point2::new(h - notch_depth, -w),
                Point2::new(h - notch_depth, w),
                Point2::new(h, w),
                Point2::new(h, h),
                Point2::new(-h, h),
            ]
        }
        ShapeKind::RandomBlob {
            vertices,
            mean_radius,
            irregularity,
        } => {
            if *vertices < 3 {
                return Err(IngestError::ParamError("blob needs at least 3 vertices"));
            }
            if *mean_radius <= 0.0 {
                return Err(IngestError::ParamError("blob radius must be positive"));
            }
            if !(0.0..1.0).contains(irregularity) {
                return Err(IngestError::ParamError("irregularity must be in [0, 1)"));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let step = std::f64::consts::TAU / *vertices as f64;
            (0..*vertices)
                .map(|i| {
                    // Jitter below half a step keeps angles strictly
                    // increasing, so the radial polygon stays simple.
                    let angle = step * i as f64 + 0.45 * step * rng.gen_range(-1.0..1.0);
                    let radius =
                        mean_radius * (1.0 + irregularity * rng.gen_range(-1.0..1.0));
                    Point2::new(radius * angle.cos(), radius * angle.sin())
                })
                .collect()
        }
    };
    Polygon::new(vertices).map_err(|_| IngestError::ParamError("shape degenerated"))
}

fn regular_points(count: usize, radius_of: impl Fn(usize) -> f64) -> Vec<Point2> {
    (0..count)
        .map(|i| {
            let angle = std::f64::consts::TAU * i as f64 / count as f64;
            Point2::new(radius_of(i) * angle.cos(), radius_of(i) * angle.sin())
        })
        .collect()
}
