//! JSON-line serialization of vein trees.
//!
//! One object per instance with fixed field order:
//! `{instance_id, n, s, root:[x,y], major_distances:[...],
//!   parts:[{index, node:[x,y], twisty, minor:[{dir, endpoint:[x,y]}]}]}`.
//!
//! The wire format carries no angle offset; it pins the default direction
//! set (offset 0), which is what every corpus runner uses.

use serde::{Deserialize, Serialize};

use super::{MajorVeinSet, MinorVein, PartRefinement, PolarConfig, VeinError, VeinTree};
use crate::geometry::Point2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VeinTreeRecord {
    pub instance_id: i64,
    pub n: usize,
    pub s: usize,
    pub root: [f64; 2],
    pub major_distances: Vec<f64>,
    pub parts: Vec<PartRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartRecord {
    pub index: usize,
    pub node: [f64; 2],
    pub twisty: bool,
    pub minor: Vec<MinorRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinorRecord {
    pub dir: usize,
    pub endpoint: [f64; 2],
}

impl VeinTreeRecord {
    pub fn from_tree(instance_id: i64, tree: &VeinTree) -> Self {
        VeinTreeRecord {
            instance_id,
            n: tree.config.n(),
            s: tree.search_depth,
            root: [tree.majors.root.x, tree.majors.root.y],
            major_distances: tree.majors.distances.clone(),
            parts: tree
                .parts
                .iter()
                .map(|p| PartRecord {
                    index: p.part_index,
                    node: [p.node.x, p.node.y],
                    twisty: p.is_twisty,
                    minor: p
                        .minor
                        .iter()
                        .map(|m| MinorRecord {
                            dir: m.direction,
                            endpoint: [m.endpoint.x, m.endpoint.y],
                        })
                        .collect(),
                })
                .collect(),
        }
    }

    /// Rebuild the in-memory tree; major endpoints are recomputed from the
    /// stored root and distances.
    pub fn to_tree(&self) -> Result<VeinTree, VeinError> {
        let config = PolarConfig::new(self.n)?;
        if self.major_distances.len() != self.n || self.parts.len() != self.n {
            return Err(VeinError::InvalidConfig(
                "record length does not match direction count",
            ));
        }
        let root = Point2::new(self.root[0], self.root[1]);
        let endpoints = self
            .major_distances
            .iter()
            .enumerate()
            .map(|(k, &d)| root.polar_offset(config.angle(k), d))
            .collect();
        Ok(VeinTree {
            config,
            majors: MajorVeinSet {
                root,
                distances: self.major_distances.clone(),
                endpoints,
            },
            parts: self
                .parts
                .iter()
                .map(|p| PartRefinement {
                    part_index: p.index,
                    node: Point2::new(p.node[0], p.node[1]),
                    is_twisty: p.twisty,
                    minor: p
                        .minor
                        .iter()
                        .map(|m| MinorVein {
                            direction: m.dir,
                            endpoint: Point2::new(m.endpoint[0], m.endpoint[1]),
                        })
                        .collect(),
                })
                .collect(),
            search_depth: self.s,
        })
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("vein tree records always serialize")
    }
}
