//! Vein encoding and decoding of instance masks.
//!
//! Encoding grows `n` major veins from the root, searches each part's node
//! between adjacent major veins, flags twisty parts (swept angle at the node
//! strictly above pi), and grows minor veins there. Decoding connects the
//! endpoints of major and minor veins in increasing-angle order.

mod wire;

pub use wire::{MinorRecord, PartRecord, VeinTreeRecord};

use std::f64::consts::{PI, TAU};

use thiserror::Error;

use crate::geometry::{
    interior_anchor, point_in_polygon, point_strictly_inside, ray_cast_distance, GeometryError,
    Point2, Polygon, RasterGrid, DEGENERACY_EPS,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VeinError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("node search for part {part} escaped the mask")]
    NodeSearchEscaped { part: usize, last: Point2 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
}

/// The shared polar coordinate: `n` directions (the design complexity) at
/// `angle_offset + 2*pi*k/n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarConfig {
    n: usize,
    angle_offset: f64,
}

impl PolarConfig {
    pub fn new(n: usize) -> Result<Self, VeinError> {
        Self::with_offset(n, 0.0)
    }

    pub fn with_offset(n: usize, angle_offset: f64) -> Result<Self, VeinError> {
        if n < 3 {
            return Err(VeinError::InvalidConfig("need at least 3 directions"));
        }
        if !angle_offset.is_finite() {
            return Err(VeinError::InvalidConfig("non-finite angle offset"));
        }
        Ok(Self { n, angle_offset })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn angle_offset(&self) -> f64 {
        self.angle_offset
    }

    pub fn angle(&self, k: usize) -> f64 {
        self.angle_offset + TAU * (k % self.n) as f64 / self.n as f64
    }
}

/// Continuous-coordinate oracle for the per-direction offset maps: queried at
/// an interior point it returns the exact ray-cast distance to the contour.
#[derive(Debug, Clone)]
pub struct OffsetOracle<'a> {
    polygon: &'a Polygon,
    config: PolarConfig,
}

pub fn build_offset_oracle<'a>(polygon: &'a Polygon, config: PolarConfig) -> OffsetOracle<'a> {
    OffsetOracle { polygon, config }
}

impl<'a> OffsetOracle<'a> {
    pub fn config(&self) -> PolarConfig {
        self.config
    }

    pub fn polygon(&self) -> &'a Polygon {
        self.polygon
    }

    /// Distance along direction `k` (taken mod n) from an interior point.
    pub fn distance(&self, q: Point2, k: usize) -> Result<f64, VeinError> {
        Ok(ray_cast_distance(self.polygon, q, self.config.angle(k))?)
    }

    /// All `n` distances from an interior point.
    pub fn distances(&self, q: Point2) -> Result<Vec<f64>, VeinError> {
        (0..self.config.n).map(|k| self.distance(q, k)).collect()
    }
}

/// Major veins: the root plus one ray-cast distance and endpoint per
/// direction.
#[derive(Debug, Clone, PartialEq)]
pub struct MajorVeinSet {
    pub root: Point2,
    pub distances: Vec<f64>,
    pub endpoints: Vec<Point2>,
}

pub fn grow_major_veins(
    oracle: &OffsetOracle<'_>,
    root: Point2,
) -> Result<MajorVeinSet, VeinError> {
    let distances = oracle.distances(root)?;
    let endpoints = distances
        .iter()
        .enumerate()
        .map(|(k, &d)| root.polar_offset(oracle.config.angle(k), d))
        .collect();
    Ok(MajorVeinSet {
        root,
        distances,
        endpoints,
    })
}

/// One minor vein: a global direction index and its contour endpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinorVein {
    pub direction: usize,
    pub endpoint: Point2,
}

/// Refinement state of the part between major veins `k` and `k+1`.
#[derive(Debug, Clone, PartialEq)]
pub struct PartRefinement {
    pub part_index: usize,
    pub node: Point2,
    pub is_twisty: bool,
    /// Minor veins in sweep order; empty iff `is_twisty` is false.
    pub minor: Vec<MinorVein>,
}

/// The full instance representation: config, major veins, and one
/// refinement record per part.
#[derive(Debug, Clone, PartialEq)]
pub struct VeinTree {
    pub config: PolarConfig,
    pub majors: MajorVeinSet,
    pub parts: Vec<PartRefinement>,
    pub search_depth: usize,
}

impl VeinTree {
    /// The same tree with every coordinate shifted; distances are unchanged.
    pub fn translated(&self, dx: f64, dy: f64) -> VeinTree {
        VeinTree {
            config: self.config,
            majors: MajorVeinSet {
                root: self.majors.root.translated(dx, dy),
                distances: self.majors.distances.clone(),
                endpoints: self
                    .majors
                    .endpoints
                    .iter()
                    .map(|e| e.translated(dx, dy))
                    .collect(),
            },
            parts: self
                .parts
                .iter()
                .map(|p| PartRefinement {
                    part_index: p.part_index,
                    node: p.node.translated(dx, dy),
                    is_twisty: p.is_twisty,
                    minor: p
                        .minor
                        .iter()
                        .map(|m| MinorVein {
                            direction: m.direction,
                            endpoint: m.endpoint.translated(dx, dy),
                        })
                        .collect(),
                })
                .collect(),
            search_depth: self.search_depth,
        }
    }
}

/// Angle swept rotating from `from` to `to` in the increasing-theta sense,
/// in [0, 2*pi). Computed from cross/dot so that exactly opposite vectors
/// give exactly pi.
fn sweep_angle(from: Point2, to: Point2) -> f64 {
    let cross = from.x * to.y - from.y * to.x;
    let dot = from.x * to.x + from.y * to.y;
    let a = cross.atan2(dot);
    if a < 0.0 {
        a + TAU
    } else {
        a
    }
}

/// Walk from the root toward the node of part `k` (between directions `k`
/// and `k+1`), querying the oracle at each intermediate point.
///
/// Iteration `i` of `depth` moves `l1 * l_k` along direction `k`, then
/// `l2 * l_{k+1}` along direction `k+1`, with `l1 = 1/(2(depth-i)-1)`,
/// `l2 = 1/(2(depth-i)-2)`, and both 1/2 on the final iteration.
/// Displacement is along the direction unit vector.
pub fn search_node(
    oracle: &OffsetOracle<'_>,
    root: Point2,
    part: usize,
    depth: usize,
) -> Result<Point2, VeinError> {
    if depth == 0 {
        return Err(VeinError::InvalidConfig("search depth must be at least 1"));
    }
    let escaped = |last: Point2| VeinError::NodeSearchEscaped { part, last };
    let query = |q: Point2, k: usize, last: Point2| -> Result<f64, VeinError> {
        match oracle.distance(q, k) {
            Ok(d) => Ok(d),
            Err(VeinError::Geometry(GeometryError::OriginOutsideMask)) => Err(escaped(last)),
            Err(e) => Err(e),
        }
    };
    let mut current = root;
    let mut last_inside = root;
    for i in 0..depth {
        let (l1, l2) = if i + 1 == depth {
            (0.5, 0.5)
        } else {
            let r = (depth - i) as f64;
            (1.0 / (2.0 * r - 1.0), 1.0 / (2.0 * r - 2.0))
        };
        let d_k = query(current, part, last_inside)?;
        last_inside = current;
        current = current.polar_offset(oracle.config.angle(part), l1 * d_k);
        let d_next = query(current, part + 1, last_inside)?;
        last_inside = current;
        current = current.polar_offset(oracle.config.angle(part + 1), l2 * d_next);
    }
    if !point_strictly_inside(oracle.polygon, current) {
        return Err(escaped(last_inside));
    }
    Ok(current)
}

/// True iff the angle swept from `node -> e_pre` to `node -> e_nxt` in the
/// increasing-theta sense strictly exceeds pi. Straight parts sweep exactly
/// pi and stay smooth.
pub fn detect_twisty(node: Point2, e_pre: Point2, e_nxt: Point2) -> Result<bool, VeinError> {
    let vp = Point2::new(e_pre.x - node.x, e_pre.y - node.y);
    let vn = Point2::new(e_nxt.x - node.x, e_nxt.y - node.y);
    if vp.x.hypot(vp.y) < DEGENERACY_EPS || vn.x.hypot(vn.y) < DEGENERACY_EPS {
        return Err(VeinError::Geometry(GeometryError::DegenerateGeometry(
            "node coincides with a part endpoint",
        )));
    }
    Ok(sweep_angle(vp, vn) > PI)
}

/// Minor veins of a twisty part: every global direction whose angle lies
/// strictly inside the sweep from `node -> e_pre` to `node -> e_nxt`, with
/// its ray-cast endpoint, ordered by sweep position.
pub fn grow_minor_veins(
    oracle: &OffsetOracle<'_>,
    node: Point2,
    e_pre: Point2,
    e_nxt: Point2,
) -> Result<Vec<MinorVein>, VeinError> {
    let vp = Point2::new(e_pre.x - node.x, e_pre.y - node.y);
    let vn = Point2::new(e_nxt.x - node.x, e_nxt.y - node.y);
    let total = sweep_angle(vp, vn);
    let mut picked: Vec<(f64, usize)> = Vec::new();
    for j in 0..oracle.config.n() {
        let angle = oracle.config.angle(j);
        let dir = Point2::new(angle.cos(), angle.sin());
        let offset = sweep_angle(vp, dir);
        if offset > 0.0 && offset < total {
            picked.push((offset, j));
        }
    }
    picked.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    picked
        .into_iter()
        .map(|(_, j)| {
            let d = oracle.distance(node, j)?;
            Ok(MinorVein {
                direction: j,
                endpoint: node.polar_offset(oracle.config.angle(j), d),
            })
        })
        .collect()
}

/// Whether the straight segment between two boundary points stays inside the
/// mask (boundary included), sampled densely along its length.
fn chord_stays_inside(polygon: &Polygon, a: Point2, b: Point2) -> bool {
    const SAMPLES: usize = 64;
    (0..SAMPLES).all(|i| {
        let t = (i as f64 + 0.5) / SAMPLES as f64;
        point_in_polygon(
            polygon,
            Point2::new(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)),
        )
    })
}

/// Encode a polygon: anchor the root, grow major veins, and refine each part
/// that searches a node and tests twisty. Parts whose node search escapes the
/// mask fall back to smooth.
///
/// A twisty sweep at the node is confirmed only when the part's chord
/// actually exits the mask: a deep node walk can cross the chord of a convex
/// bulge and see a reflex sweep even though the coarse contour already
/// covers the part. Minor veins are kept only when their endpoint falls in
/// the part's angular span around the root; rays from a node beside a recess
/// can exit through a different part entirely, and such endpoints would
/// break the increasing-angle contour assembly.
pub fn encode(
    polygon: &Polygon,
    config: PolarConfig,
    depth: usize,
    grid: &RasterGrid,
) -> Result<VeinTree, VeinError> {
    let anchor = interior_anchor(polygon, grid)?;
    let oracle = build_offset_oracle(polygon, config);
    let majors = grow_major_veins(&oracle, anchor.point)?;
    let n = config.n();
    let mut parts = Vec::with_capacity(n);
    for k in 0..n {
        let e_pre = majors.endpoints[k];
        let e_nxt = majors.endpoints[(k + 1) % n];
        parts.push(refine_part(&oracle, anchor.point, k, depth, e_pre, e_nxt)?);
    }
    Ok(VeinTree {
        config,
        majors,
        parts,
        search_depth: depth,
    })
}

fn refine_part(
    oracle: &OffsetOracle<'_>,
    root: Point2,
    k: usize,
    depth: usize,
    e_pre: Point2,
    e_nxt: Point2,
) -> Result<PartRefinement, VeinError> {
    let smooth = |node: Point2| PartRefinement {
        part_index: k,
        node,
        is_twisty: false,
        minor: Vec::new(),
    };
    let node = match search_node(oracle, root, k, depth) {
        Ok(node) => node,
        Err(VeinError::NodeSearchEscaped { last, .. }) => return Ok(smooth(last)),
        Err(e) => return Err(e),
    };
    let twisty = match detect_twisty(node, e_pre, e_nxt) {
        Ok(t) => t,
        // Node landed exactly on an endpoint; nothing to refine.
        Err(VeinError::Geometry(GeometryError::DegenerateGeometry(_))) => false,
        Err(e) => return Err(e),
    };
    if !twisty || chord_stays_inside(oracle.polygon(), e_pre, e_nxt) {
        return Ok(smooth(node));
    }
    let minor = match grow_minor_veins(oracle, node, e_pre, e_nxt) {
        Ok(m) => m,
        Err(VeinError::Geometry(GeometryError::OriginOutsideMask)) => return Ok(smooth(node)),
        Err(e) => return Err(e),
    };
    // Validity: the endpoint must sit within this part's angular span
    // around the root.
    let span = TAU / oracle.config.n() as f64;
    let ray_k = oracle.config.angle(k);
    let ray_dir = Point2::new(ray_k.cos(), ray_k.sin());
    let minor: Vec<MinorVein> = minor
        .into_iter()
        .filter(|m| {
            let v = Point2::new(m.endpoint.x - root.x, m.endpoint.y - root.y);
            sweep_angle(ray_dir, v) <= span
        })
        .collect();
    if minor.is_empty() {
        // Sweep covered no grid direction; the part contour falls back to
        // its major endpoints.
        return Ok(smooth(node));
    }
    Ok(PartRefinement {
        part_index: k,
        node,
        is_twisty: true,
        minor,
    })
}

fn close_contour(points: Vec<Point2>) -> Result<Polygon, VeinError> {
    let mut deduped: Vec<Point2> = Vec::with_capacity(points.len());
    for p in points {
        if deduped
            .last()
            .map_or(true, |q| q.distance(p) >= DEGENERACY_EPS)
        {
            deduped.push(p);
        }
    }
    while deduped.len() > 1
        && deduped[0].distance(*deduped.last().unwrap()) < DEGENERACY_EPS
    {
        deduped.pop();
    }
    if deduped.len() < 3 {
        return Err(VeinError::Geometry(GeometryError::DegenerateGeometry(
            "decoded contour has fewer than 3 points",
        )));
    }
    Ok(Polygon::new_unchecked(deduped))
}

/// Decode the coarse contour from major endpoints alone.
pub fn decode_major_only(majors: &MajorVeinSet) -> Result<Polygon, VeinError> {
    close_contour(majors.endpoints.clone())
}

/// Decode the full contour: each major endpoint followed by that part's
/// minor endpoints in sweep order, closed in increasing-theta traversal.
pub fn decode(tree: &VeinTree) -> Result<Polygon, VeinError> {
    let n = tree.config.n();
    let mut points = Vec::with_capacity(n + tree.parts.iter().map(|p| p.minor.len()).sum::<usize>());
    for k in 0..n {
        points.push(tree.majors.endpoints[k]);
        points.extend(tree.parts[k].minor.iter().map(|m| m.endpoint));
    }
    close_contour(points)
}

/// Rasterized IoU between a polygon and its vein reconstruction; with
/// `use_minor` false only the major endpoints are connected, which is the
/// coarse fixed-ray bound.
pub fn cover_ratio(
    polygon: &Polygon,
    config: PolarConfig,
    depth: usize,
    grid: &RasterGrid,
    use_minor: bool,
) -> Result<f64, VeinError> {
    let contour = if use_minor {
        decode(&encode(polygon, config, depth, grid)?)?
    } else {
        let anchor = interior_anchor(polygon, grid)?;
        let oracle = build_offset_oracle(polygon, config);
        decode_major_only(&grow_major_veins(&oracle, anchor.point)?)?
    };
    Ok(crate::geometry::raster_iou(polygon, &contour, grid)?)
}
