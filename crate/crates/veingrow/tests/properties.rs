//! Cross-module invariants on randomized geometry.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use veingrow::geometry::{
    interior_anchor, min_boundary_distance, point_in_polygon, rasterize, raster_iou,
    ray_cast_distance, Point2, Polygon, RasterGrid,
};
use veingrow::ingest::{synthesize_shape, ShapeKind};
use veingrow::losses::{r_iou_loss, DistanceVectorPair};
use veingrow::targets::{fpn_level_assign, polarmask_centerness_map, BoxExtents};
use veingrow::vein::{cover_ratio, decode, encode, PolarConfig};

fn blob(seed: u64, vertices: usize, radius: f64, irregularity: f64) -> Polygon {
    synthesize_shape(
        &ShapeKind::RandomBlob {
            vertices,
            mean_radius: radius,
            irregularity,
        },
        seed,
    )
    .unwrap()
}

/// Convex hull (monotone chain) of seeded random points; used wherever an
/// invariant is quantified over random convex polygons.
fn random_convex(seed: u64) -> Polygon {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points: Vec<Point2> = (0..20)
        .map(|_| Point2::new(rng.gen_range(-20.0..20.0), rng.gen_range(-20.0..20.0)))
        .collect();
    points.sort_by(|a, b| (a.x, a.y).partial_cmp(&(b.x, b.y)).unwrap());
    let cross =
        |o: Point2, a: Point2, b: Point2| (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
    let mut hull: Vec<Point2> = Vec::new();
    for &p in points.iter().chain(points.iter().rev().skip(1)) {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    Polygon::new(hull).unwrap()
}

/// Step-march containment oracle: walk the ray in small steps and report
/// the last inside-to-outside transition. Containment is a local
/// even-odd crossing test, independent of the library's.
fn march_ray(polygon: &Polygon, origin: Point2, angle: f64, step: f64) -> f64 {
    let verts = polygon.vertices();
    let inside = |q: Point2| {
        let mut odd = false;
        for i in 0..verts.len() {
            let a = verts[i];
            let b = verts[(i + 1) % verts.len()];
            if (a.y > q.y) != (b.y > q.y)
                && q.x < a.x + (q.y - a.y) * (b.x - a.x) / (b.y - a.y)
            {
                odd = !odd;
            }
        }
        odd
    };
    let (min, max) = polygon.bounding_box();
    let t_max = Point2::new(min.x, min.y).distance(Point2::new(max.x, max.y)) + 1.0;
    let mut last_exit = 0.0;
    let mut was_inside = true;
    let mut t = 0.0;
    while t <= t_max {
        t += step;
        let now_inside = inside(origin.polar_offset(angle, t));
        if was_inside && !now_inside {
            last_exit = t - step / 2.0;
        }
        was_inside = now_inside;
    }
    last_exit
}

fn interior_point(polygon: &Polygon, rng: &mut ChaCha8Rng) -> Point2 {
    let (min, max) = polygon.bounding_box();
    loop {
        let q = Point2::new(
            rng.gen_range(min.x..max.x),
            rng.gen_range(min.y..max.y),
        );
        if veingrow::geometry::point_strictly_inside(polygon, q)
            && min_boundary_distance(polygon, q) > 1e-3
        {
            return q;
        }
    }
}

#[test]
fn ray_cast_agrees_with_march_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for seed in 0..10 {
        let polygon = blob(seed, 8 + (seed as usize % 9), 6.0, 0.45);
        for _ in 0..20 {
            let origin = interior_point(&polygon, &mut rng);
            let angle = rng.gen_range(0.0..std::f64::consts::TAU);
            let exact = ray_cast_distance(&polygon, origin, angle).unwrap();
            let marched = march_ray(&polygon, origin, angle, 1e-3);
            assert!(
                (exact - marched).abs() < 1e-2,
                "seed {seed}: {exact} vs {marched}"
            );
        }
    }
}

#[test]
fn vein_endpoints_adhere_to_the_boundary() {
    for seed in 0..50 {
        let polygon = blob(seed, 10 + (seed as usize % 20), 20.0, 0.5).translated(30.0, 30.0);
        let grid = RasterGrid::new(60, 60, 1).unwrap();
        let tree = encode(&polygon, PolarConfig::new(8).unwrap(), 3, &grid).unwrap();
        for e in &tree.majors.endpoints {
            assert!(min_boundary_distance(&polygon, *e) < 1e-6);
        }
        for part in &tree.parts {
            for m in &part.minor {
                assert!(min_boundary_distance(&polygon, m.endpoint) < 1e-6);
            }
        }
    }
}

#[test]
fn convex_polygons_encode_smooth_at_all_depths() {
    for seed in 0..50 {
        let polygon = random_convex(seed).translated(25.0, 25.0);
        let grid = RasterGrid::new(50, 50, 1).unwrap();
        for n in [4, 8, 12] {
            for depth in [1, 2, 3] {
                let tree = encode(&polygon, PolarConfig::new(n).unwrap(), depth, &grid).unwrap();
                assert!(
                    tree.parts.iter().all(|p| !p.is_twisty),
                    "seed {seed} n {n} depth {depth}"
                );
            }
        }
    }
}

#[test]
fn nested_directions_do_not_lose_cover_on_convex_shapes() {
    for seed in 0..12 {
        let polygon = random_convex(seed).translated(25.0, 25.0);
        let grid = RasterGrid::new(50, 50, 4).unwrap();
        for m in [4, 6, 8] {
            let coarse =
                cover_ratio(&polygon, PolarConfig::new(m).unwrap(), 3, &grid, false).unwrap();
            let fine =
                cover_ratio(&polygon, PolarConfig::new(2 * m).unwrap(), 3, &grid, false).unwrap();
            assert!(
                fine >= coarse - 0.01,
                "seed {seed} m {m}: {coarse} -> {fine}"
            );
        }
    }
}

#[test]
fn refinement_dominates_major_only_on_a_blob_corpus() {
    let mut major_sum = 0.0;
    let mut vein_sum = 0.0;
    let count = 100;
    for seed in 0..count {
        let polygon = blob(seed, 16 + (seed as usize % 16), 18.0, 0.55).translated(28.0, 28.0);
        let grid = RasterGrid::new(56, 56, 2).unwrap();
        let cfg = PolarConfig::new(8).unwrap();
        major_sum += cover_ratio(&polygon, cfg, 3, &grid, false).unwrap();
        vein_sum += cover_ratio(&polygon, cfg, 3, &grid, true).unwrap();
    }
    let major_mean = major_sum / count as f64;
    let vein_mean = vein_sum / count as f64;
    assert!(
        vein_mean >= major_mean,
        "refinement lost cover: {vein_mean} < {major_mean}"
    );
    assert!(vein_mean > major_mean + 1e-3, "refinement never engaged");
}

#[test]
fn supersample_resolution_converges() {
    for seed in 0..10 {
        let polygon = blob(seed, 24, 14.0, 0.4).translated(20.0, 20.0);
        assert!(polygon.area() >= 100.0, "fixture too small for the bound");
        let other = blob(seed + 100, 24, 13.0, 0.4).translated(22.0, 22.0);
        for ss in [1u32, 2, 4] {
            let coarse = raster_iou(
                &polygon,
                &other,
                &RasterGrid::new(44, 44, ss).unwrap(),
            )
            .unwrap();
            let fine = raster_iou(
                &polygon,
                &other,
                &RasterGrid::new(44, 44, 2 * ss).unwrap(),
            )
            .unwrap();
            assert!(
                (coarse - fine).abs() < 0.01,
                "seed {seed} ss {ss}: {coarse} vs {fine}"
            );
        }
    }
}

#[test]
fn polarmask_centerness_is_invariant_under_quarter_turns() {
    // For n = 4 a quarter turn maps the direction set and the pixel grid
    // onto themselves.
    let polygon = blob(3, 14, 12.0, 0.35).translated(20.0, 20.0);
    let grid = RasterGrid::new(40, 40, 1).unwrap();
    let cfg = PolarConfig::new(4).unwrap();
    let rotated = Polygon::new(
        polygon
            .vertices()
            .iter()
            .map(|v| Point2::new(40.0 - v.y, v.x))
            .collect(),
    )
    .unwrap();
    let map = polarmask_centerness_map(&polygon, cfg, &grid).unwrap();
    let rot_map = polarmask_centerness_map(&rotated, cfg, &grid).unwrap();
    for row in 0..40u32 {
        for col in 0..40u32 {
            // Pixel center (c+.5, r+.5) maps to (39.5-r+.5... ) under the
            // same quarter turn.
            let (rc, rr) = (39 - row, col);
            assert!(
                (map.get(col, row) - rot_map.get(rc, rr)).abs() < 1e-6,
                "({col},{row})"
            );
        }
    }
}

#[test]
fn anchor_is_always_contained() {
    for seed in 0..40 {
        let polygon = blob(seed, 12 + (seed as usize % 12), 10.0, 0.6).translated(15.0, 15.0);
        let grid = RasterGrid::new(30, 30, 1).unwrap();
        let anchor = interior_anchor(&polygon, &grid).unwrap();
        assert!(point_in_polygon(&polygon, anchor.point));
    }
}

#[test]
fn decoded_trees_rasterize_deterministically() {
    let polygon = blob(7, 30, 20.0, 0.4).translated(32.0, 32.0);
    let grid = RasterGrid::new(64, 64, 4).unwrap();
    let cfg = PolarConfig::new(12).unwrap();
    let a = cover_ratio(&polygon, cfg, 3, &grid, true).unwrap();
    let b = cover_ratio(&polygon, cfg, 3, &grid, true).unwrap();
    assert_eq!(a.to_bits(), b.to_bits());
    let d1 = decode(&encode(&polygon, cfg, 3, &grid).unwrap()).unwrap();
    let d2 = decode(&encode(&polygon, cfg, 3, &grid).unwrap()).unwrap();
    assert_eq!(d1, d2);
}

proptest! {
    #[test]
    fn raster_iou_identity_and_symmetry(seed in 0u64..500, shift in 0u32..6) {
        let a = blob(seed, 12, 8.0, 0.5).translated(12.0, 12.0);
        let b = blob(seed + 1000, 12, 8.0, 0.5)
            .translated(12.0 + shift as f64, 12.0);
        let grid = RasterGrid::new(32, 32, 2).unwrap();
        prop_assert_eq!(raster_iou(&a, &a, &grid).unwrap(), 1.0);
        let ab = raster_iou(&a, &b, &grid).unwrap();
        let ba = raster_iou(&b, &a, &grid).unwrap();
        prop_assert_eq!(ab.to_bits(), ba.to_bits());
    }

    #[test]
    fn fpn_levels_are_total_and_monotone(lo in 0.01f64..2000.0, hi in 0.01f64..2000.0) {
        let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
        let a = fpn_level_assign(&BoxExtents::new(lo, 1.0, 1.0, 1.0).unwrap());
        let b = fpn_level_assign(&BoxExtents::new(hi, 1.0, 1.0, 1.0).unwrap());
        prop_assert!((3..=7).contains(&a));
        prop_assert!(a <= b);
    }

    #[test]
    fn r_iou_scale_invariance(seed in 0u64..200, alpha in prop::sample::select(vec![0.5f64, 2.0, 10.0])) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(3usize..16);
        let target: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..9.0)).collect();
        let predicted: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..9.0)).collect();
        let base = r_iou_loss(&DistanceVectorPair::new(predicted.clone(), target.clone()).unwrap())
            .unwrap();
        let scaled = r_iou_loss(&DistanceVectorPair::new(
            predicted.iter().map(|d| alpha * d).collect(),
            target.iter().map(|d| alpha * d).collect(),
        ).unwrap())
        .unwrap();
        prop_assert!((base.value - scaled.value).abs() < 1e-12);
    }

    #[test]
    fn weight_maps_stay_in_unit_range(seed in 0u64..100) {
        let polygon = blob(seed, 16, 8.0, 0.4).translated(13.0, 13.0);
        let grid = RasterGrid::new(26, 26, 1).unwrap();
        let map = veingrow::targets::centroidness_map(&polygon, &grid).unwrap();
        let mask = rasterize(&polygon, &grid).unwrap();
        for row in 0..26u32 {
            for col in 0..26u32 {
                let w = map.get(col, row);
                prop_assert!((0.0..=1.0).contains(&w));
                prop_assert_eq!(w > 0.0, mask.pixel_coverage(col, row) > 0);
            }
        }
    }
}
