//! The metering tree: transformer → building → floor → load.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{align_all, align, PowerSeries};

/// Position of a meter in the electrical hierarchy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Transformer,
    Building,
    Floor,
    Load,
}

impl Level {
    fn rank(self) -> u8 {
        match self {
            Level::Transformer => 3,
            Level::Building => 2,
            Level::Floor => 1,
            Level::Load => 0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Level::Transformer => "transformer",
            Level::Building => "building",
            Level::Floor => "floor",
            Level::Load => "load",
        }
    }
}

impl PartialOrd for Level {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Level {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.rank().cmp(&other.rank())
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeterNode {
    id: String,
    level: Level,
    series: Option<PowerSeries>,
    children: Vec<String>,
}

impl MeterNode {
    pub fn new(id: impl Into<String>, level: Level) -> Self {
        Self {
            id: id.into(),
            level,
            series: None,
            children: Vec::new(),
        }
    }

    pub fn with_series(mut self, series: PowerSeries) -> Self {
        self.series = Some(series);
        self
    }

    pub fn with_children<I, S>(mut self, children: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.children = children.into_iter().map(Into::into).collect();
        self
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn level(&self) -> Level {
        self.level
    }

    pub fn series(&self) -> Option<&PowerSeries> {
        self.series.as_ref()
    }

    pub fn children(&self) -> &[String] {
        &self.children
    }
}

/// A validated, immutable metering tree.
#[derive(Debug, Clone, PartialEq)]
pub struct MeterHierarchy {
    nodes: BTreeMap<String, MeterNode>,
    root: String,
}

impl MeterHierarchy {
    /// Builds the tree, checking that ids are unique, every child resolves,
    /// there is exactly one root, there are no cycles and levels never
    /// increase from parent to child.
    pub fn new(nodes: Vec<MeterNode>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for node in nodes {
            if map.contains_key(&node.id) {
                return Err(Error::InvalidHierarchy(format!("duplicate id `{}`", node.id)));
            }
            map.insert(node.id.clone(), node);
        }
        if map.is_empty() {
            return Err(Error::InvalidHierarchy("no nodes".into()));
        }

        let mut parent_of: BTreeMap<&str, &str> = BTreeMap::new();
        for node in map.values() {
            for child in &node.children {
                let Some(c) = map.get(child) else {
                    return Err(Error::InvalidHierarchy(format!(
                        "`{}` lists unknown child `{child}`",
                        node.id
                    )));
                };
                if let Some(prev) = parent_of.insert(child, &node.id) {
                    return Err(Error::InvalidHierarchy(format!(
                        "`{child}` has two parents: `{prev}` and `{}`",
                        node.id
                    )));
                }
                if c.level > node.level {
                    return Err(Error::InvalidHierarchy(format!(
                        "level inversion: {} `{child}` under {} `{}`",
                        c.level, node.level, node.id
                    )));
                }
            }
        }

        let roots: Vec<&String> = map
            .keys()
            .filter(|id| !parent_of.contains_key(id.as_str()))
            .collect();
        let root = match roots.as_slice() {
            [r] => (*r).clone(),
            [] => return Err(Error::InvalidHierarchy("no root (cycle)".into())),
            many => {
                return Err(Error::InvalidHierarchy(format!(
                    "{} roots: {:?}",
                    many.len(),
                    many
                )))
            }
        };

        // Single parent per node plus full reachability from the root rules
        // out cycles.
        let mut seen = HashSet::new();
        let mut stack = vec![root.as_str()];
        while let Some(id) = stack.pop() {
            if !seen.insert(id) {
                return Err(Error::InvalidHierarchy(format!("cycle through `{id}`")));
            }
            stack.extend(map[id].children.iter().map(String::as_str));
        }
        if seen.len() != map.len() {
            return Err(Error::InvalidHierarchy(
                "nodes unreachable from the root (cycle)".into(),
            ));
        }

        Ok(Self { nodes: map, root })
    }

    pub fn root(&self) -> &MeterNode {
        &self.nodes[&self.root]
    }

    pub fn root_id(&self) -> &str {
        &self.root
    }

    pub fn node(&self, id: &str) -> Result<&MeterNode> {
        self.nodes
            .get(id)
            .ok_or_else(|| Error::UnknownNode(id.to_string()))
    }

    pub fn series(&self, id: &str) -> Result<&PowerSeries> {
        self.node(id)?
            .series()
            .ok_or_else(|| Error::NoData(format!("node `{id}` has no series")))
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Parent id of `id`, `None` for the root.
    pub fn parent(&self, id: &str) -> Option<&str> {
        self.nodes
            .values()
            .find(|n| n.children.iter().any(|c| c == id))
            .map(|n| n.id.as_str())
    }

    /// Nodes in depth-first pre-order from the root, children in listed order.
    pub fn iter(&self) -> impl Iterator<Item = &MeterNode> {
        let mut order = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![self.root.as_str()];
        while let Some(id) = stack.pop() {
            let node = &self.nodes[id];
            order.push(node);
            stack.extend(node.children.iter().rev().map(String::as_str));
        }
        order.into_iter()
    }
}

/// Sum of a node's children together with the slots where a missing child
/// sample was counted as zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ChildAggregate {
    pub series: PowerSeries,
    /// Sample indices (into `series`) where at least one child was missing.
    pub zero_filled: Vec<usize>,
}

/// Pointwise sum of the metered children of `node_id` over their common range.
pub fn aggregate_children(h: &MeterHierarchy, node_id: &str) -> Result<ChildAggregate> {
    let node = h.node(node_id)?;
    let children: Vec<&PowerSeries> = node
        .children
        .iter()
        .filter_map(|c| h.nodes[c].series())
        .collect();
    if children.is_empty() {
        return Err(Error::NoData(format!("`{node_id}` has no metered children")));
    }
    let aligned = align_all(&children)?;
    let n = aligned[0].len();
    let mut sums = vec![0.0; n];
    let mut filled = vec![false; n];
    for s in &aligned {
        for (i, v) in s.values().iter().enumerate() {
            match v {
                Some(w) => sums[i] += w,
                None => filled[i] = true,
            }
        }
    }
    let series = PowerSeries::from_watts(aligned[0].start(), aligned[0].period(), sums)?;
    let zero_filled = filled
        .iter()
        .enumerate()
        .filter_map(|(i, f)| f.then_some(i))
        .collect();
    Ok(ChildAggregate {
        series,
        zero_filled,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// Metered children draw more than the parent allows.
    ChildrenExceedParent {
        node: String,
        timestamp: i64,
        parent_watts: f64,
        children_watts: f64,
    },
    /// Parent and children could not be put on a common grid.
    Incomparable { node: String, reason: String },
}

/// Reports every timestamp where a parent meter reads less than
/// `(1 - tolerance_fraction)` times the sum of its metered children.
pub fn validate_hierarchy(h: &MeterHierarchy, tolerance_fraction: f64) -> Vec<Violation> {
    let mut out = Vec::new();
    for node in h.iter() {
        let Some(parent) = node.series() else {
            continue;
        };
        if !node.children.iter().any(|c| h.nodes[c].series().is_some()) {
            continue;
        }
        let checked = aggregate_children(h, &node.id).and_then(|agg| align(parent, &agg.series));
        let (p, c) = match checked {
            Ok(pair) => pair,
            Err(e) => {
                out.push(Violation::Incomparable {
                    node: node.id.clone(),
                    reason: e.to_string(),
                });
                continue;
            }
        };
        for (i, (pv, cv)) in p.values().iter().zip(c.values()).enumerate() {
            if let (Some(pw), Some(cw)) = (pv, cv) {
                if *pw < (1.0 - tolerance_fraction) * cw {
                    out.push(Violation::ChildrenExceedParent {
                        node: node.id.clone(),
                        timestamp: p.timestamp(i),
                        parent_watts: *pw,
                        children_watts: *cw,
                    });
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(start: i64, v: &[f64]) -> PowerSeries {
        PowerSeries::from_watts(start, 30, v.to_vec()).unwrap()
    }

    fn two_children(parent: &[f64], a: &[f64], b: &[f64]) -> MeterHierarchy {
        MeterHierarchy::new(vec![
            MeterNode::new("bldg", Level::Building)
                .with_series(s(0, parent))
                .with_children(["a", "b"]),
            MeterNode::new("a", Level::Load).with_series(s(0, a)),
            MeterNode::new("b", Level::Load).with_series(s(0, b)),
        ])
        .unwrap()
    }

    #[test]
    fn consistent_tree_has_no_violations() {
        let h = two_children(&[150.0, 150.0], &[100.0, 100.0], &[50.0, 50.0]);
        assert!(validate_hierarchy(&h, 0.0).is_empty());
    }

    #[test]
    fn parent_below_children_is_flagged() {
        let h = two_children(&[90.0], &[60.0], &[40.0]);
        let v = validate_hierarchy(&h, 0.05);
        assert_eq!(v.len(), 1);
        assert!(matches!(
            &v[0],
            Violation::ChildrenExceedParent { timestamp: 0, .. }
        ));
        // Within a 15 % tolerance the same reading is acceptable.
        assert!(validate_hierarchy(&h, 0.15).is_empty());
    }

    #[test]
    fn leaf_only_tree_is_vacuously_valid() {
        let h = MeterHierarchy::new(vec![MeterNode::new("x", Level::Load).with_series(s(0, &[1.0]))])
            .unwrap();
        assert!(validate_hierarchy(&h, 0.0).is_empty());
    }

    #[test]
    fn aggregate_sums_children() {
        let h = two_children(&[0.0, 0.0], &[100.0, 100.0], &[50.0, 50.0]);
        let agg = aggregate_children(&h, "bldg").unwrap();
        assert_eq!(agg.series.values(), &[Some(150.0), Some(150.0)]);
        assert!(agg.zero_filled.is_empty());
    }

    #[test]
    fn aggregate_single_child_is_identity() {
        let h = MeterHierarchy::new(vec![
            MeterNode::new("f", Level::Floor).with_children(["a"]),
            MeterNode::new("a", Level::Load).with_series(s(60, &[3.0, 4.0, 5.0])),
        ])
        .unwrap();
        let agg = aggregate_children(&h, "f").unwrap();
        assert_eq!(agg.series, s(60, &[3.0, 4.0, 5.0]));
    }

    #[test]
    fn aggregate_partial_overlap_uses_intersection() {
        // a covers [0, 150), b covers [60, 210): overlap [60, 150).
        let h = MeterHierarchy::new(vec![
            MeterNode::new("f", Level::Floor).with_children(["a", "b"]),
            MeterNode::new("a", Level::Load).with_series(s(0, &[1.0, 2.0, 3.0, 4.0, 5.0])),
            MeterNode::new("b", Level::Load).with_series(s(60, &[10.0, 20.0, 30.0, 40.0, 50.0])),
        ])
        .unwrap();
        let agg = aggregate_children(&h, "f").unwrap();
        assert_eq!(agg.series.start(), 60);
        assert_eq!(agg.series.values(), &[Some(13.0), Some(24.0), Some(35.0)]);
    }

    #[test]
    fn aggregate_flags_zero_filled_missing() {
        let a = PowerSeries::new(0, 30, vec![Some(1.0), None]).unwrap();
        let h = MeterHierarchy::new(vec![
            MeterNode::new("f", Level::Floor).with_children(["a", "b"]),
            MeterNode::new("a", Level::Load).with_series(a),
            MeterNode::new("b", Level::Load).with_series(s(0, &[2.0, 2.0])),
        ])
        .unwrap();
        let agg = aggregate_children(&h, "f").unwrap();
        assert_eq!(agg.series.values(), &[Some(3.0), Some(2.0)]);
        assert_eq!(agg.zero_filled, vec![1]);
    }

    #[test]
    fn aggregate_without_metered_children_is_no_data() {
        let h = MeterHierarchy::new(vec![
            MeterNode::new("f", Level::Floor).with_children(["a"]),
            MeterNode::new("a", Level::Load),
        ])
        .unwrap();
        assert!(matches!(aggregate_children(&h, "f"), Err(Error::NoData(_))));
        assert!(matches!(aggregate_children(&h, "zz"), Err(Error::UnknownNode(_))));
    }

    #[test]
    fn structural_errors() {
        let dup = MeterHierarchy::new(vec![
            MeterNode::new("a", Level::Floor),
            MeterNode::new("a", Level::Load),
        ]);
        assert!(dup.is_err());

        let two_roots = MeterHierarchy::new(vec![
            MeterNode::new("a", Level::Floor),
            MeterNode::new("b", Level::Floor),
        ]);
        assert!(two_roots.is_err());

        let cycle = MeterHierarchy::new(vec![
            MeterNode::new("r", Level::Building).with_children(["a"]),
            MeterNode::new("a", Level::Floor).with_children(["b"]),
            MeterNode::new("b", Level::Floor).with_children(["a"]),
        ]);
        assert!(cycle.is_err());

        let inverted = MeterHierarchy::new(vec![
            MeterNode::new("f", Level::Floor).with_children(["b"]),
            MeterNode::new("b", Level::Building),
        ]);
        assert!(inverted.is_err());

        let dangling = MeterHierarchy::new(vec![
            MeterNode::new("f", Level::Floor).with_children(["ghost"])
        ]);
        assert!(dangling.is_err());
    }

    #[test]
    fn skipped_levels_are_allowed() {
        let h = MeterHierarchy::new(vec![
            MeterNode::new("t", Level::Transformer).with_children(["l"]),
            MeterNode::new("l", Level::Load),
        ])
        .unwrap();
        assert_eq!(h.root_id(), "t");
        assert_eq!(h.parent("l"), Some("t"));
        let ids: Vec<_> = h.iter().map(|n| n.id().to_string()).collect();
        assert_eq!(ids, ["t", "l"]);
    }
}
