//! COCO-format annotation parsing.
//!
//! Only polygon segmentations (flat `[x1,y1,x2,y2,...]` lists) are usable;
//! RLE-encoded entries are skipped with a warning. Polygons that fail the
//! geometry invariants are dropped, never repaired: repair heuristics would
//! inject unauditable geometry into downstream numbers.

use std::fs::File;
use std::io::{BufReader, Read};
use std::path::Path;

use serde::Deserialize;
use serde_json::Value;

use super::{AnnotationRecord, IngestError};
use crate::geometry::{Point2, Polygon};

#[derive(Debug, Deserialize)]
struct CocoFile {
    #[serde(default)]
    annotations: Vec<CocoAnnotation>,
}

#[derive(Debug, Deserialize)]
struct CocoAnnotation {
    #[serde(default)]
    id: i64,
    #[serde(default)]
    image_id: i64,
    #[serde(default)]
    category_id: i64,
    #[serde(default)]
    segmentation: Option<Value>,
    #[serde(default)]
    bbox: Option<[f64; 4]>,
    #[serde(default)]
    area: Option<f64>,
}

/// Per-file skip counters; one `skip <instance_id>: <reason>` line also goes
/// to standard error per skipped annotation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ParseSummary {
    pub rle_skipped: usize,
    pub invalid_skipped: usize,
}

pub fn parse_coco(path: &Path) -> Result<(Vec<AnnotationRecord>, ParseSummary), IngestError> {
    let file = File::open(path)
        .map_err(|e| IngestError::ParseError(format!("{}: {e}", path.display())))?;
    parse_coco_reader(BufReader::new(file))
}

pub fn parse_coco_reader<R: Read>(
    reader: R,
) -> Result<(Vec<AnnotationRecord>, ParseSummary), IngestError> {
    let file: CocoFile =
        serde_json::from_reader(reader).map_err(|e| IngestError::ParseError(e.to_string()))?;
    let mut records = Vec::with_capacity(file.annotations.len());
    let mut summary = ParseSummary::default();
    for ann in file.annotations {
        match convert(&ann) {
            Ok(record) => records.push(record),
            Err(Skip::Rle) => {
                summary.rle_skipped += 1;
                eprintln!("skip {}: RLE segmentation", ann.id);
            }
            Err(Skip::Invalid(reason)) => {
                summary.invalid_skipped += 1;
                eprintln!("skip {}: {reason}", ann.id);
            }
        }
    }
    if records.is_empty() {
        return Err(IngestError::EmptyCorpus);
    }
    Ok((records, summary))
}

enum Skip {
    Rle,
    Invalid(String),
}

fn convert(ann: &CocoAnnotation) -> Result<AnnotationRecord, Skip> {
    let seg = ann
        .segmentation
        .as_ref()
        .ok_or_else(|| Skip::Invalid("no segmentation".into()))?;
    let rings = match seg {
        Value::Object(map) if map.contains_key("counts") => return Err(Skip::Rle),
        Value::Array(rings) => rings,
        _ => return Err(Skip::Invalid("unrecognized segmentation shape".into())),
    };
    if rings.is_empty() {
        return Err(Skip::Invalid("empty segmentation".into()));
    }
    let mut polygons = Vec::with_capacity(rings.len());
    for ring in rings {
        let coords: Vec<f64> = match ring {
            Value::Array(values) => values
                .iter()
                .map(|v| v.as_f64().ok_or_else(|| Skip::Invalid("non-numeric coordinate".into())))
                .collect::<Result<_, _>>()?,
            _ => return Err(Skip::Invalid("segmentation ring is not a list".into())),
        };
        if coords.len() < 6 || coords.len() % 2 != 0 {
            return Err(Skip::Invalid(format!(
                "coordinate list of length {}",
                coords.len()
            )));
        }
        let points = coords
            .chunks_exact(2)
            .map(|xy| Point2::new(xy[0], xy[1]))
            .collect();
        let polygon = Polygon::new(points)
            .map_err(|e| Skip::Invalid(format!("invalid polygon: {e}")))?;
        polygons.push(polygon);
    }
    let bbox = ann.bbox.unwrap_or_else(|| {
        let mut min = Point2::new(f64::INFINITY, f64::INFINITY);
        let mut max = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in &polygons {
            let (lo, hi) = p.bounding_box();
            min.x = min.x.min(lo.x);
            min.y = min.y.min(lo.y);
            max.x = max.x.max(hi.x);
            max.y = max.y.max(hi.y);
        }
        [min.x, min.y, max.x - min.x, max.y - min.y]
    });
    let area = ann
        .area
        .unwrap_or_else(|| polygons.iter().map(Polygon::area).sum());
    if area <= 0.0 {
        return Err(Skip::Invalid("nonpositive area".into()));
    }
    Ok(AnnotationRecord {
        instance_id: ann.id,
        image_id: ann.image_id,
        category_id: ann.category_id,
        polygons,
        bbox,
        area,
    })
}
