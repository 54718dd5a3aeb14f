//! Corpus ingestion: COCO-style annotation JSON, deterministic filtering,
//! and synthetic fixture shapes, all normalized into validated polygons.

mod coco;
mod shapes;

pub use coco::{parse_coco, parse_coco_reader, ParseSummary};
pub use shapes::{synthesize_shape, ShapeKind};

use std::collections::BTreeSet;

use thiserror::Error;

use crate::geometry::Polygon;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("failed to read or parse annotation JSON: {0}")]
    ParseError(String),
    #[error("no usable annotations in corpus")]
    EmptyCorpus,
    #[error("invalid shape parameters: {0}")]
    ParamError(&'static str),
}

/// One instance annotation with its validated polygon rings.
#[derive(Debug, Clone)]
pub struct AnnotationRecord {
    pub instance_id: i64,
    pub image_id: i64,
    pub category_id: i64,
    pub polygons: Vec<Polygon>,
    /// (x, y, w, h) in pixels.
    pub bbox: [f64; 4],
    pub area: f64,
}

/// Deterministic corpus filtering. Multi-ring instances are excluded by
/// default: the vein representation covers a single connected contour.
#[derive(Debug, Clone)]
pub struct CorpusFilter {
    pub min_area: f64,
    pub categories: Option<BTreeSet<i64>>,
    pub max_instances: Option<usize>,
    pub skip_multipart: bool,
}

impl Default for CorpusFilter {
    fn default() -> Self {
        CorpusFilter {
            min_area: 0.0,
            categories: None,
            max_instances: None,
            skip_multipart: true,
        }
    }
}

/// Order-preserving filter; truncation applies after the predicate filters.
pub fn apply_filter(records: Vec<AnnotationRecord>, filter: &CorpusFilter) -> Vec<AnnotationRecord> {
    let kept = records.into_iter().filter(|r| {
        r.area >= filter.min_area
            && filter
                .categories
                .as_ref()
                .map_or(true, |cats| cats.contains(&r.category_id))
            && !(filter.skip_multipart && r.polygons.len() != 1)
    });
    match filter.max_instances {
        Some(n) => kept.take(n).collect(),
        None => kept.collect(),
    }
}
