//! Load generation: gravity line loads from area loads, equivalent lateral
//! seismic forces, and the combination set used for design checks.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Frame;
use crate::solver::LoadCase;

/// Area gravity loads and the out-of-plane width they act over.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GravitySpec {
    /// Dead load, N/m².
    pub dead: f64,
    /// Floor live load, N/m².
    pub live: f64,
    /// Live load at the roof level, N/m².
    pub roof_live: f64,
    /// Tributary width converting area loads to beam line loads, m.
    pub tributary_width: f64,
}

impl GravitySpec {
    pub fn floor_line_load(&self) -> f64 {
        (self.dead + self.live) * self.tributary_width
    }

    pub fn roof_line_load(&self) -> f64 {
        (self.dead + self.roof_live) * self.tributary_width
    }

    pub fn dead_line_load(&self) -> f64 {
        self.dead * self.tributary_width
    }

    pub fn live_line_load(&self, roof: bool) -> f64 {
        let live = if roof { self.roof_live } else { self.live };
        live * self.tributary_width
    }
}

/// Equivalent-lateral-force parameters: V = (A·B·I/R)·W.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeismicSpec {
    /// Peak ground acceleration factor.
    pub a: f64,
    /// Spectral response factor.
    pub b: f64,
    /// Importance factor.
    pub i: f64,
    /// Response modification factor.
    pub r: f64,
}

impl SeismicSpec {
    pub fn coefficient(&self) -> f64 {
        self.a * self.b * self.i / self.r
    }
}

/// Uniform gravity loads on every beam: floor beams carry
/// (dead + live)·width, roof beams (dead + roof_live)·width.
pub fn gravity_line_loads(spec: &GravitySpec, frame: &Frame) -> LoadCase {
    let mut case = LoadCase::new();
    let roof = frame.roof_level();
    for level in frame.beam_levels() {
        let is_roof = roof.is_some_and(|r| (level - r).abs() <= 1e-9);
        let w = if is_roof { spec.roof_line_load() } else { spec.floor_line_load() };
        for member in frame.beams_at_level(level) {
            case.add_member_load(member, w);
        }
    }
    case
}

/// Base shear V = C·W with C = A·B·I/R.
pub fn ubc_base_shear(effective_weight: f64, spec: &SeismicSpec) -> f64 {
    spec.coefficient() * effective_weight
}

/// Linear vertical distribution F_x = V·w_x·h_x / Σ w·h. The topmost story
/// absorbs the rounding so the forces sum to V exactly.
pub fn distribute_story_forces(
    v: f64,
    story_weights: &[f64],
    story_heights: &[f64],
) -> Result<Vec<f64>> {
    if story_weights.len() != story_heights.len() {
        return Err(Error::config(format!(
            "{} story weights vs {} heights",
            story_weights.len(),
            story_heights.len()
        )));
    }
    if story_weights.is_empty() {
        return Ok(Vec::new());
    }
    if v == 0.0 {
        return Ok(vec![0.0; story_weights.len()]);
    }
    let total: f64 = story_weights.iter().zip(story_heights).map(|(w, h)| w * h).sum();
    if !(total > 0.0) {
        return Err(Error::config("story weight-height products sum to zero"));
    }
    let n = story_weights.len();
    let mut forces: Vec<f64> = story_weights
        .iter()
        .zip(story_heights)
        .map(|(w, h)| v * w * h / total)
        .collect();
    let partial: f64 = forces[..n - 1].iter().sum();
    forces[n - 1] = v - partial;
    Ok(forces)
}

/// Lateral story forces applied in +x at the leftmost node of each beam
/// level, bottom to top. `forces` must align with `frame.beam_levels()`.
pub fn lateral_load_case(frame: &Frame, forces: &[f64]) -> Result<LoadCase> {
    let levels = frame.beam_levels();
    if levels.len() != forces.len() {
        return Err(Error::config(format!(
            "{} story forces for {} beam levels",
            forces.len(),
            levels.len()
        )));
    }
    let mut case = LoadCase::new();
    for (level, &f) in levels.iter().zip(forces) {
        let node = frame
            .leftmost_node_at_level(*level)
            .ok_or_else(|| Error::config("beam level without nodes"))?;
        case.add_nodal(node, f, 0.0, 0.0);
    }
    Ok(case)
}

/// The three design combinations: gravity alone, gravity + seismic in +x,
/// gravity + seismic in −x. `factors` scales (gravity, seismic).
pub fn combinations(gravity: &LoadCase, seismic: &LoadCase, factors: (f64, f64)) -> Vec<LoadCase> {
    let (fg, fs) = factors;
    vec![
        LoadCase::combine(&[(fg, gravity)]),
        LoadCase::combine(&[(fg, gravity), (fs, seismic)]),
        LoadCase::combine(&[(fg, gravity), (-fs, seismic)]),
    ]
}
