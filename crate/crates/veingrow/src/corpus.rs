//! Corpus-level runners: cover-ratio sweeps across design complexities and
//! batch encoding, parallel over instances with deterministic output order.

use rayon::prelude::*;

use crate::geometry::{mask_iou, rasterize, GeometryError, Polygon, RasterGrid};
use crate::ingest::AnnotationRecord;
use crate::vein::{
    build_offset_oracle, decode, decode_major_only, encode, grow_major_veins, PolarConfig,
    VeinError, VeinTreeRecord,
};

/// Padding around an instance when it is rebased into its own local grid.
pub const GRID_MARGIN: f64 = 2.0;

/// An instance polygon rebased to a tight positive-quadrant grid.
/// `offset` is what was added to the original coordinates.
#[derive(Debug, Clone)]
pub struct LocalFrame {
    pub polygon: Polygon,
    pub grid: RasterGrid,
    pub offset: (f64, f64),
}

pub fn local_frame(polygon: &Polygon, supersample: u32) -> Result<LocalFrame, GeometryError> {
    let (min, max) = polygon.bounding_box();
    let dx = GRID_MARGIN - min.x;
    let dy = GRID_MARGIN - min.y;
    let width = (max.x - min.x + 2.0 * GRID_MARGIN).ceil() as u32;
    let height = (max.y - min.y + 2.0 * GRID_MARGIN).ceil() as u32;
    Ok(LocalFrame {
        polygon: polygon.translated(dx, dy),
        grid: RasterGrid::new(width.max(1), height.max(1), supersample)?,
        offset: (dx, dy),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoverMethod {
    MajorOnly,
    VeinMask,
}

impl CoverMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            CoverMethod::MajorOnly => "major_only",
            CoverMethod::VeinMask => "veinmask",
        }
    }
}

/// One aggregated row of the cover-ratio report.
#[derive(Debug, Clone)]
pub struct CoverRow {
    pub complexity: usize,
    pub method: CoverMethod,
    pub mean_iou: f64,
    pub median_iou: f64,
    pub p10_iou: f64,
    pub instance_count: usize,
}

#[derive(Debug, Clone)]
pub struct InstanceFailure {
    pub instance_id: i64,
    pub reason: String,
}

/// Per-instance IoUs for one complexity, both methods.
struct InstanceCover {
    per_complexity: Vec<(f64, f64)>,
}

fn single_polygon(record: &AnnotationRecord) -> Result<&Polygon, String> {
    match record.polygons.as_slice() {
        [p] => Ok(p),
        [] => Err("record has no polygon".into()),
        _ => Err("multi-part record; enable skip_multipart".into()),
    }
}

fn instance_cover(
    record: &AnnotationRecord,
    complexities: &[usize],
    depth: usize,
    supersample: u32,
) -> Result<InstanceCover, VeinError> {
    let polygon =
        single_polygon(record).map_err(|_| VeinError::InvalidConfig("not a single-ring record"))?;
    let frame = local_frame(polygon, supersample)?;
    let source_mask = rasterize(&frame.polygon, &frame.grid)?;
    let mut per_complexity = Vec::with_capacity(complexities.len());
    for &n in complexities {
        let cfg = PolarConfig::new(n)?;
        let tree = encode(&frame.polygon, cfg, depth, &frame.grid)?;
        let major = decode_major_only(&tree.majors)?;
        let vein = decode(&tree)?;
        let major_iou = mask_iou(&source_mask, &rasterize(&major, &frame.grid)?)?;
        let vein_iou = mask_iou(&source_mask, &rasterize(&vein, &frame.grid)?)?;
        per_complexity.push((major_iou, vein_iou));
    }
    Ok(InstanceCover { per_complexity })
}

/// Run the full sweep. Per-instance failures are collected, not fatal; rows
/// come out ordered by (complexity as given, major before vein).
pub fn cover_ratio_sweep(
    records: &[AnnotationRecord],
    complexities: &[usize],
    depth: usize,
    supersample: u32,
) -> (Vec<CoverRow>, Vec<InstanceFailure>) {
    let results: Vec<(i64, Result<InstanceCover, VeinError>)> = records
        .par_iter()
        .map(|r| {
            (
                r.instance_id,
                instance_cover(r, complexities, depth, supersample),
            )
        })
        .collect();

    let mut failures = Vec::new();
    let mut covers: Vec<&InstanceCover> = Vec::with_capacity(results.len());
    for (id, result) in &results {
        match result {
            Ok(c) => covers.push(c),
            Err(e) => failures.push(InstanceFailure {
                instance_id: *id,
                reason: e.to_string(),
            }),
        }
    }

    let mut rows = Vec::with_capacity(2 * complexities.len());
    for (ci, &n) in complexities.iter().enumerate() {
        for method in [CoverMethod::MajorOnly, CoverMethod::VeinMask] {
            let ious: Vec<f64> = covers
                .iter()
                .map(|c| match method {
                    CoverMethod::MajorOnly => c.per_complexity[ci].0,
                    CoverMethod::VeinMask => c.per_complexity[ci].1,
                })
                .collect();
            rows.push(summarize(n, method, &ious));
        }
    }
    (rows, failures)
}

fn summarize(complexity: usize, method: CoverMethod, ious: &[f64]) -> CoverRow {
    let count = ious.len();
    let mean = if count == 0 {
        f64::NAN
    } else {
        ious.iter().sum::<f64>() / count as f64
    };
    let mut sorted = ious.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    CoverRow {
        complexity,
        method,
        mean_iou: mean,
        median_iou: percentile(&sorted, 0.5),
        p10_iou: percentile(&sorted, 0.1),
        instance_count: count,
    }
}

/// Linear-interpolation percentile of an ascending slice, `q` in [0, 1].
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    match sorted.len() {
        0 => f64::NAN,
        1 => sorted[0],
        n => {
            let rank = q.clamp(0.0, 1.0) * (n - 1) as f64;
            let lo = rank.floor() as usize;
            let hi = rank.ceil() as usize;
            let t = rank - lo as f64;
            sorted[lo] + t * (sorted[hi] - sorted[lo])
        }
    }
}

/// One encoded instance, mapped back into its original annotation
/// coordinates.
#[derive(Debug, Clone)]
pub struct EncodedInstance {
    pub instance_id: i64,
    pub record: VeinTreeRecord,
}

/// Encode every instance at one complexity; output sorted by instance id.
pub fn encode_corpus(
    records: &[AnnotationRecord],
    n: usize,
    depth: usize,
    supersample: u32,
    use_minor: bool,
) -> (Vec<EncodedInstance>, Vec<InstanceFailure>) {
    let results: Vec<(i64, Result<VeinTreeRecord, String>)> = records
        .par_iter()
        .map(|record| {
            let encoded = encode_instance(record, n, depth, supersample, use_minor)
                .map_err(|e| e.to_string());
            (record.instance_id, encoded)
        })
        .collect();
    let mut encoded = Vec::new();
    let mut failures = Vec::new();
    for (instance_id, result) in results {
        match result {
            Ok(record) => encoded.push(EncodedInstance {
                instance_id,
                record,
            }),
            Err(reason) => failures.push(InstanceFailure {
                instance_id,
                reason,
            }),
        }
    }
    encoded.sort_by_key(|e| e.instance_id);
    failures.sort_by_key(|f| f.instance_id);
    (encoded, failures)
}

fn encode_instance(
    record: &AnnotationRecord,
    n: usize,
    depth: usize,
    supersample: u32,
    use_minor: bool,
) -> Result<VeinTreeRecord, VeinError> {
    let polygon =
        single_polygon(record).map_err(|_| VeinError::InvalidConfig("not a single-ring record"))?;
    let frame = local_frame(polygon, supersample)?;
    let cfg = PolarConfig::new(n)?;
    let tree = if use_minor {
        encode(&frame.polygon, cfg, depth, &frame.grid)?
    } else {
        // Major veins only: every part stays smooth by construction.
        let anchor = crate::geometry::interior_anchor(&frame.polygon, &frame.grid)?;
        let oracle = build_offset_oracle(&frame.polygon, cfg);
        let majors = grow_major_veins(&oracle, anchor.point)?;
        let parts = (0..n)
            .map(|k| crate::vein::PartRefinement {
                part_index: k,
                node: anchor.point,
                is_twisty: false,
                minor: Vec::new(),
            })
            .collect();
        crate::vein::VeinTree {
            config: cfg,
            majors,
            parts,
            search_depth: depth,
        }
    };
    let original = tree.translated(-frame.offset.0, -frame.offset.1);
    Ok(VeinTreeRecord::from_tree(record.instance_id, &original))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point2;
    use crate::ingest::{synthesize_shape, ShapeKind};

    fn blob_record(id: i64, seed: u64) -> AnnotationRecord {
        let p = synthesize_shape(
            &ShapeKind::RandomBlob {
                vertices: 20,
                mean_radius: 15.0,
                irregularity: 0.4,
            },
            seed,
        )
        .unwrap()
        .translated(20.0, 20.0);
        let area = p.area();
        AnnotationRecord {
            instance_id: id,
            image_id: 0,
            category_id: 1,
            polygons: vec![p],
            bbox: [0.0, 0.0, 40.0, 40.0],
            area,
        }
    }

    #[test]
    fn sweep_reports_both_methods_per_complexity() {
        let records: Vec<_> = (0..6).map(|i| blob_record(i, i as u64)).collect();
        let (rows, failures) = cover_ratio_sweep(&records, &[4, 8], 3, 2);
        assert!(failures.is_empty());
        assert_eq!(rows.len(), 4);
        assert_eq!(rows[0].complexity, 4);
        assert_eq!(rows[0].method, CoverMethod::MajorOnly);
        assert_eq!(rows[1].method, CoverMethod::VeinMask);
        for row in &rows {
            assert_eq!(row.instance_count, 6);
            assert!(row.mean_iou > 0.0 && row.mean_iou <= 1.0);
        }
        // Refinement can only help.
        assert!(rows[1].mean_iou >= rows[0].mean_iou);
        assert!(rows[3].mean_iou >= rows[2].mean_iou);

        let (again, _) = cover_ratio_sweep(&records, &[4, 8], 3, 2);
        for (a, b) in rows.iter().zip(&again) {
            assert_eq!(a.mean_iou.to_bits(), b.mean_iou.to_bits());
        }
    }

    #[test]
    fn encode_round_trips_to_original_coordinates() {
        let square = Polygon::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(4.0, 0.0),
            Point2::new(4.0, 4.0),
            Point2::new(0.0, 4.0),
        ])
        .unwrap();
        let record = AnnotationRecord {
            instance_id: 9,
            image_id: 0,
            category_id: 1,
            polygons: vec![square],
            bbox: [0.0, 0.0, 4.0, 4.0],
            area: 16.0,
        };
        let (encoded, failures) = encode_corpus(&[record], 4, 3, 1, true);
        assert!(failures.is_empty());
        let rec = &encoded[0].record;
        assert_eq!(rec.root, [2.0, 2.0]);
        for d in &rec.major_distances {
            assert!((d - 2.0).abs() < 1e-9);
        }
        assert!(rec.parts.iter().all(|p| !p.twisty));
    }

    #[test]
    fn multipart_records_fail_per_instance() {
        let mut record = blob_record(1, 1);
        record.polygons.push(record.polygons[0].clone());
        let (rows, failures) = cover_ratio_sweep(&[record], &[4], 3, 1);
        assert_eq!(failures.len(), 1);
        assert_eq!(rows[0].instance_count, 0);
        assert!(rows[0].mean_iou.is_nan());
    }

    #[test]
    fn percentile_interpolates() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(percentile(&v, 0.0), 1.0);
        assert_eq!(percentile(&v, 1.0), 4.0);
        assert_eq!(percentile(&v, 0.5), 2.5);
        assert!((percentile(&v, 0.1) - 1.3).abs() < 1e-12);
        assert_eq!(percentile(&[5.0], 0.3), 5.0);
    }
}
