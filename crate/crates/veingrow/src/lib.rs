//! veingrow — vein-structured polar encoding of instance masks.
//!
//! A ground-truth polygon is encoded as a root point with `n` major-vein
//! distances in a fixed polar direction set, plus per-part refinements: a
//! searched node, a twisty-part test, and minor veins grown from the node in
//! the same direction set. Decoding connects all vein endpoints back into a
//! contour. Everything runs in "oracle mode": distances come from exact ray
//! casts against the source polygon, which measures the representation's
//! cover-ratio upper bound independent of any learned predictor.
//!
//! The companion modules provide training-target generation (centroidness
//! and centerness baselines, pyramid-level assignment), the loss functions
//! with analytic gradients and a finite-difference harness, a reference
//! implementation of the surroundings cross-correlation dataflow, COCO-style
//! annotation ingestion, and corpus-level report runners.

pub mod corpus;
pub mod geometry;
pub mod ingest;
pub mod losses;
pub mod sccs;
pub mod targets;
pub mod vein;

pub use geometry::{Point2, Polygon, RasterGrid};
pub use vein::{PolarConfig, VeinTree};
