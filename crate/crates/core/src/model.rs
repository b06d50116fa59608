//! Frame domain model: geometry, supports, design groups, and the binding of
//! catalog sections to groups.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sections::Section;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: usize,
    pub x: f64,
    pub y: f64,
}

/// Beam-end joint model. `k_rot` is the rotational spring stiffness in
/// N·m/rad; the rigid and pinned cases are exact limits handled in closed
/// form by the solver, never as extreme finite stiffnesses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConnectionModel {
    Rigid,
    Pinned,
    SemiRigid { k_rot: f64 },
}

impl ConnectionModel {
    /// Parses the config syntax: `rigid`, `pinned`, or `semirigid:<K>` with K
    /// in N·m/rad.
    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        match t {
            "rigid" => Ok(ConnectionModel::Rigid),
            "pinned" => Ok(ConnectionModel::Pinned),
            _ => {
                let k = t
                    .strip_prefix("semirigid:")
                    .and_then(|v| v.trim().parse::<f64>().ok())
                    .ok_or_else(|| {
                        Error::config(format!(
                            "bad connection '{t}': expected rigid, pinned, or semirigid:<K>"
                        ))
                    })?;
                if !(k > 0.0) || !k.is_finite() {
                    return Err(Error::config(format!(
                        "semi-rigid stiffness must be positive and finite, got {k}"
                    )));
                }
                Ok(ConnectionModel::SemiRigid { k_rot: k })
            }
        }
    }
}

impl std::fmt::Display for ConnectionModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConnectionModel::Rigid => write!(f, "rigid"),
            ConnectionModel::Pinned => write!(f, "pinned"),
            ConnectionModel::SemiRigid { k_rot } => write!(f, "semirigid:{k_rot}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MemberRole {
    Beam,
    Column,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SupportFixity {
    /// All three DOFs restrained.
    Fixed,
    /// Both translations restrained, rotation free.
    Pinned,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Member {
    pub id: usize,
    pub node_a: usize,
    pub node_b: usize,
    pub role: MemberRole,
    /// Index into `Frame::groups`.
    pub group: usize,
    pub end_connection_a: ConnectionModel,
    pub end_connection_b: ConnectionModel,
}

#[derive(Debug, Clone)]
pub struct DesignGroup {
    pub id: usize,
    pub label: String,
    pub role: MemberRole,
    /// Candidate sections in catalog order; the discrete design variable is
    /// an index into this list.
    pub pool: Vec<Section>,
}

/// Validated, immutable frame. Member lengths are precomputed on
/// construction; everything else is plain data shared read-only across
/// evaluation workers.
#[derive(Debug, Clone)]
pub struct Frame {
    pub nodes: Vec<Node>,
    pub members: Vec<Member>,
    pub supports: Vec<(usize, SupportFixity)>,
    pub groups: Vec<DesignGroup>,
    /// Out-of-plane frame spacing used to turn area loads into line loads, m.
    pub tributary_width: f64,
    lengths: Vec<f64>,
}

/// Geometric coincidence tolerance for grouping nodes into floor levels.
const LEVEL_TOL: f64 = 1e-9;

impl Frame {
    pub fn new(
        nodes: Vec<Node>,
        members: Vec<Member>,
        supports: Vec<(usize, SupportFixity)>,
        groups: Vec<DesignGroup>,
        tributary_width: f64,
    ) -> Result<Self> {
        for (i, node) in nodes.iter().enumerate() {
            if node.id != i {
                return Err(Error::config(format!(
                    "node ids must be dense 0..{}: position {i} has id {}",
                    nodes.len(),
                    node.id
                )));
            }
        }
        if supports.is_empty() {
            return Err(Error::config("frame has no supports"));
        }
        let mut seen_support = BTreeSet::new();
        for (node, _) in &supports {
            if *node >= nodes.len() {
                return Err(Error::config(format!("support references unknown node {node}")));
            }
            if !seen_support.insert(*node) {
                return Err(Error::config(format!("node {node} supported twice")));
            }
        }
        let mut labels = BTreeSet::new();
        for (i, group) in groups.iter().enumerate() {
            if group.id != i {
                return Err(Error::config("group ids must be dense and ordered"));
            }
            if group.pool.is_empty() {
                return Err(Error::config(format!("group {} has an empty pool", group.label)));
            }
            if !labels.insert(group.label.clone()) {
                return Err(Error::config(format!("duplicate group label {}", group.label)));
            }
        }
        let mut lengths = Vec::with_capacity(members.len());
        for (i, m) in members.iter().enumerate() {
            if m.id != i {
                return Err(Error::config("member ids must be dense and ordered"));
            }
            if m.node_a == m.node_b {
                return Err(Error::config(format!(
                    "member {i} connects node {} to itself",
                    m.node_a
                )));
            }
            let (a, b) = (m.node_a, m.node_b);
            if a >= nodes.len() || b >= nodes.len() {
                return Err(Error::config(format!("member {i} references an unknown node")));
            }
            if m.group >= groups.len() {
                return Err(Error::config(format!("member {i} references an unknown group")));
            }
            for conn in [&m.end_connection_a, &m.end_connection_b] {
                if let ConnectionModel::SemiRigid { k_rot } = conn {
                    if !(*k_rot > 0.0) {
                        return Err(Error::config(format!(
                            "member {i}: k_rot must be positive, got {k_rot}"
                        )));
                    }
                }
            }
            let dx = nodes[b].x - nodes[a].x;
            let dy = nodes[b].y - nodes[a].y;
            let length = dx.hypot(dy);
            if length <= 0.0 {
                return Err(Error::config(format!("member {i} has zero length")));
            }
            lengths.push(length);
        }
        if !(tributary_width >= 0.0) {
            return Err(Error::config("tributary width must be non-negative"));
        }
        Ok(Frame { nodes, members, supports, groups, tributary_width, lengths })
    }

    pub fn member_length(&self, member: usize) -> f64 {
        self.lengths[member]
    }

    /// Orientation of the member's local x axis, radians from global +x.
    pub fn member_angle(&self, member: usize) -> f64 {
        let m = &self.members[member];
        let a = &self.nodes[m.node_a];
        let b = &self.nodes[m.node_b];
        (b.y - a.y).atan2(b.x - a.x)
    }

    pub fn base_elevation(&self) -> f64 {
        self.nodes.iter().map(|n| n.y).fold(f64::INFINITY, f64::min)
    }

    /// Distinct beam elevations, ascending. Beams define the floor levels.
    pub fn beam_levels(&self) -> Vec<f64> {
        let mut levels: Vec<f64> = Vec::new();
        for m in self.members.iter().filter(|m| m.role == MemberRole::Beam) {
            let y = self.nodes[m.node_a].y;
            if !levels.iter().any(|l| (l - y).abs() <= LEVEL_TOL) {
                levels.push(y);
            }
        }
        levels.sort_by(|a, b| a.partial_cmp(b).expect("finite coordinates"));
        levels
    }

    pub fn roof_level(&self) -> Option<f64> {
        self.beam_levels().last().copied()
    }

    /// Height from base to roof beam level, m.
    pub fn height(&self) -> f64 {
        self.roof_level().map_or(0.0, |r| r - self.base_elevation())
    }

    pub fn nodes_at_level(&self, level: f64) -> Vec<usize> {
        self.nodes
            .iter()
            .filter(|n| (n.y - level).abs() <= LEVEL_TOL)
            .map(|n| n.id)
            .collect()
    }

    pub fn leftmost_node_at_level(&self, level: f64) -> Option<usize> {
        self.nodes_at_level(level)
            .into_iter()
            .min_by(|&a, &b| {
                self.nodes[a]
                    .x
                    .partial_cmp(&self.nodes[b].x)
                    .expect("finite coordinates")
            })
    }

    pub fn beams_at_level(&self, level: f64) -> Vec<usize> {
        self.members
            .iter()
            .filter(|m| {
                m.role == MemberRole::Beam && (self.nodes[m.node_a].y - level).abs() <= LEVEL_TOL
            })
            .map(|m| m.id)
            .collect()
    }

    /// Distinct (lower group, upper group) pairs of vertically adjacent
    /// columns, walking every column line bottom to top. Feeds the column
    /// continuity constraint.
    pub fn column_group_pairs(&self) -> Vec<(usize, usize)> {
        // Columns share a line when both their nodes sit on one x ordinate.
        let mut lines: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
        for m in self.members.iter().filter(|m| m.role == MemberRole::Column) {
            let xa = self.nodes[m.node_a].x;
            let xb = self.nodes[m.node_b].x;
            if (xa - xb).abs() > LEVEL_TOL {
                continue; // inclined column, no stacking relation
            }
            let key = (xa / LEVEL_TOL).round() as i64;
            lines.entry(key).or_default().push(m.id);
        }
        let mut pairs = BTreeSet::new();
        for members in lines.values() {
            let mut ordered = members.clone();
            ordered.sort_by(|&a, &b| {
                let ya = self.nodes[self.members[a].node_a].y.min(self.nodes[self.members[a].node_b].y);
                let yb = self.nodes[self.members[b].node_a].y.min(self.nodes[self.members[b].node_b].y);
                ya.partial_cmp(&yb).expect("finite coordinates")
            });
            // Same-group adjacency is kept: a uniform stack reports its
            // boundary ratio of exactly 1.0 rather than vanishing.
            for w in ordered.windows(2) {
                pairs.insert((self.members[w[0]].group, self.members[w[1]].group));
            }
        }
        pairs.into_iter().collect()
    }

    /// Total member length per design group, m.
    pub fn group_lengths(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.groups.len()];
        for m in &self.members {
            sums[m.group] += self.lengths[m.id];
        }
        sums
    }
}

/// A frame with one concrete section chosen for every design group.
#[derive(Debug, Clone)]
pub struct SizedFrame<'a> {
    pub frame: &'a Frame,
    indices: Vec<usize>,
}

impl<'a> SizedFrame<'a> {
    /// Binds pool indices (the decoded chromosome) to groups. An
    /// out-of-range index here means the encoding repair failed upstream.
    pub fn from_pool_indices(frame: &'a Frame, indices: &[usize]) -> Result<Self> {
        if indices.len() != frame.groups.len() {
            return Err(Error::config(format!(
                "assignment covers {} groups, frame has {}",
                indices.len(),
                frame.groups.len()
            )));
        }
        for (group, &idx) in frame.groups.iter().zip(indices) {
            if idx >= group.pool.len() {
                return Err(Error::config(format!(
                    "group {}: pool index {idx} out of range (pool size {})",
                    group.label,
                    group.pool.len()
                )));
            }
        }
        Ok(SizedFrame { frame, indices: indices.to_vec() })
    }

    /// Binds sections by name, e.g. from a config `design` table.
    pub fn from_names(frame: &'a Frame, assignment: &BTreeMap<String, String>) -> Result<Self> {
        let mut indices = Vec::with_capacity(frame.groups.len());
        for group in &frame.groups {
            let name = assignment.get(&group.label).ok_or_else(|| {
                Error::config(format!("assignment missing group {}", group.label))
            })?;
            let canon = name.trim().to_ascii_uppercase();
            let idx = group
                .pool
                .iter()
                .position(|s| s.name.to_ascii_uppercase() == canon)
                .ok_or_else(|| {
                    Error::config(format!(
                        "section {name} is not in the pool of group {}",
                        group.label
                    ))
                })?;
            indices.push(idx);
        }
        for label in assignment.keys() {
            if !frame.groups.iter().any(|g| &g.label == label) {
                return Err(Error::config(format!("assignment names unknown group {label}")));
            }
        }
        Ok(SizedFrame { frame, indices })
    }

    pub fn pool_indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn group_section(&self, group: usize) -> &Section {
        &self.frame.groups[group].pool[self.indices[group]]
    }

    pub fn member_section(&self, member: usize) -> &Section {
        self.group_section(self.frame.members[member].group)
    }

    /// Label → section name pairs in group order, for reports.
    pub fn assignment_by_label(&self) -> Vec<(String, String)> {
        self.frame
            .groups
            .iter()
            .zip(&self.indices)
            .map(|(g, &i)| (g.label.clone(), g.pool[i].name.clone()))
            .collect()
    }
}

/// See [`SizedFrame::from_names`]; kept as a free function to mirror the
/// construction/weight API pair.
pub fn apply_design<'a>(
    frame: &'a Frame,
    assignment: &BTreeMap<String, String>,
) -> Result<SizedFrame<'a>> {
    SizedFrame::from_names(frame, assignment)
}

/// Total structure weight in N: Σ area × length × unit weight.
pub fn frame_weight(sized: &SizedFrame, unit_weight: f64) -> f64 {
    sized
        .frame
        .members
        .iter()
        .map(|m| sized.member_section(m.id).area * sized.frame.member_length(m.id) * unit_weight)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sections::{SectionCatalog, STEEL_UNIT_WEIGHT};
    use approx::assert_relative_eq;

    fn two_node_frame(pool: Vec<Section>) -> Frame {
        Frame::new(
            vec![Node { id: 0, x: 0.0, y: 0.0 }, Node { id: 1, x: 5.0, y: 0.0 }],
            vec![Member {
                id: 0,
                node_a: 0,
                node_b: 1,
                role: MemberRole::Beam,
                group: 0,
                end_connection_a: ConnectionModel::Rigid,
                end_connection_b: ConnectionModel::Rigid,
            }],
            vec![(0, SupportFixity::Fixed), (1, SupportFixity::Fixed)],
            vec![DesignGroup { id: 0, label: "G1".into(), role: MemberRole::Beam, pool }],
            5.0,
        )
        .unwrap()
    }

    #[test]
    fn connection_parsing() {
        assert_eq!(ConnectionModel::parse("rigid").unwrap(), ConnectionModel::Rigid);
        assert_eq!(ConnectionModel::parse("pinned").unwrap(), ConnectionModel::Pinned);
        assert_eq!(
            ConnectionModel::parse("semirigid:8.33e7").unwrap(),
            ConnectionModel::SemiRigid { k_rot: 8.33e7 }
        );
        assert!(ConnectionModel::parse("semirigid:-1").is_err());
        assert!(ConnectionModel::parse("hinged").is_err());
    }

    #[test]
    fn self_loop_member_is_rejected() {
        let cat = SectionCatalog::builtin();
        let pool = vec![cat.lookup("W8X21").unwrap().clone()];
        let err = Frame::new(
            vec![Node { id: 0, x: 0.0, y: 0.0 }],
            vec![Member {
                id: 0,
                node_a: 0,
                node_b: 0,
                role: MemberRole::Beam,
                group: 0,
                end_connection_a: ConnectionModel::Rigid,
                end_connection_b: ConnectionModel::Rigid,
            }],
            vec![(0, SupportFixity::Fixed)],
            vec![DesignGroup { id: 0, label: "G1".into(), role: MemberRole::Beam, pool }],
            5.0,
        )
        .unwrap_err();
        assert!(err.to_string().contains("itself"), "{err}");
    }

    #[test]
    fn unsupported_frame_is_rejected() {
        let cat = SectionCatalog::builtin();
        let pool = vec![cat.lookup("W8X21").unwrap().clone()];
        let err = Frame::new(
            vec![Node { id: 0, x: 0.0, y: 0.0 }, Node { id: 1, x: 5.0, y: 0.0 }],
            vec![Member {
                id: 0,
                node_a: 0,
                node_b: 1,
                role: MemberRole::Beam,
                group: 0,
                end_connection_a: ConnectionModel::Rigid,
                end_connection_b: ConnectionModel::Rigid,
            }],
            vec![],
            vec![DesignGroup { id: 0, label: "G1".into(), role: MemberRole::Beam, pool }],
            5.0,
        )
        .unwrap_err();
        assert!(err.to_string().contains("support"), "{err}");
    }

    #[test]
    fn single_member_weight() {
        // A = 0.01 m², L = 5 m, γ = 77008 → 3850.4 N.
        let section = Section {
            name: "TEST".into(),
            area: 0.01,
            depth: 0.3,
            moment_of_inertia_major: 1e-4,
            section_modulus_major: 6e-4,
            radius_of_gyration_minor: 0.05,
            flange_width: 0.2,
            flange_thickness: 0.02,
        };
        let frame = two_node_frame(vec![section]);
        let sized = SizedFrame::from_pool_indices(&frame, &[0]).unwrap();
        assert_relative_eq!(frame_weight(&sized, STEEL_UNIT_WEIGHT), 3850.4, max_relative = 1e-12);
    }

    #[test]
    fn weight_is_linear_in_group_area() {
        let cat = SectionCatalog::builtin();
        let small = cat.lookup("W12X14").unwrap().clone();
        let big = cat.lookup("W14X30").unwrap().clone();
        let frame = two_node_frame(vec![small.clone(), big.clone()]);
        let w_small = frame_weight(&SizedFrame::from_pool_indices(&frame, &[0]).unwrap(), STEEL_UNIT_WEIGHT);
        let w_big = frame_weight(&SizedFrame::from_pool_indices(&frame, &[1]).unwrap(), STEEL_UNIT_WEIGHT);
        let k = big.area / small.area;
        let expected_delta = (k - 1.0) * 5.0 * small.area * STEEL_UNIT_WEIGHT;
        assert_relative_eq!(w_big - w_small, expected_delta, max_relative = 1e-12);
    }

    #[test]
    fn assignment_by_names_validates_pool_membership() {
        let cat = SectionCatalog::builtin();
        let pool = vec![cat.lookup("W8X21").unwrap().clone()];
        let frame = two_node_frame(pool);
        let mut ok = BTreeMap::new();
        ok.insert("G1".to_string(), "w8x21".to_string());
        assert!(apply_design(&frame, &ok).is_ok());

        let mut missing = BTreeMap::new();
        missing.insert("G9".to_string(), "W8X21".to_string());
        assert!(apply_design(&frame, &missing).is_err());

        let mut outside = BTreeMap::new();
        outside.insert("G1".to_string(), "W27X102".to_string());
        let err = apply_design(&frame, &outside).unwrap_err();
        assert!(err.to_string().contains("not in the pool"), "{err}");
    }

    #[test]
    fn apply_design_is_pure() {
        let cat = SectionCatalog::builtin();
        let pool = vec![cat.lookup("W8X21").unwrap().clone(), cat.lookup("W10X33").unwrap().clone()];
        let frame = two_node_frame(pool);
        let a = SizedFrame::from_pool_indices(&frame, &[1]).unwrap();
        let b = SizedFrame::from_pool_indices(&frame, &[1]).unwrap();
        assert_eq!(a.pool_indices(), b.pool_indices());
        assert_eq!(a.assignment_by_label(), b.assignment_by_label());
    }
}
