//! Design checks expressed as normalized demand/capacity ratios, so the
//! satisfaction layer can use a single allowable of 1.0 for everything.

use serde::{Deserialize, Serialize};

use crate::model::{Frame, SizedFrame};
use crate::sections::Section;
use crate::solver::AnalysisResult;

/// All constraint ratios of one design under its governing load cases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintReport {
    /// Per member, worst over load cases.
    pub stress_ratios: Vec<f64>,
    /// Roof lateral displacement over its limit, worst over load cases.
    pub drift_ratio: f64,
    /// Column continuity ratios (area above / area below per stacked pair).
    pub aux_ratios: Vec<f64>,
}

impl ConstraintReport {
    /// The single governing ratio; the design is feasible iff this is ≤ 1.
    pub fn worst(&self) -> f64 {
        self.stress_ratios
            .iter()
            .chain(self.aux_ratios.iter())
            .chain(std::iter::once(&self.drift_ratio))
            .fold(0.0f64, |acc, &r| acc.max(r))
    }

    pub fn is_feasible(&self) -> bool {
        self.worst() <= 1.0
    }
}

/// Allowable axial compressive stress from the classic allowable-stress
/// column curve. `slenderness` is KL/r with K = 1.
fn allowable_compression(e: f64, fy: f64, slenderness: f64) -> f64 {
    let cc = (2.0 * std::f64::consts::PI.powi(2) * e / fy).sqrt();
    if slenderness <= cc {
        let ratio = slenderness / cc;
        let fs = 5.0 / 3.0 + 3.0 * ratio / 8.0 - ratio.powi(3) / 8.0;
        (1.0 - 0.5 * ratio * ratio) * fy / fs
    } else {
        12.0 * std::f64::consts::PI.powi(2) * e / (23.0 * slenderness * slenderness)
    }
}

/// Combined axial + bending interaction ratio for one member and one load
/// case: f_a/F_a + f_b/F_b, with F_b = 0.66·F_y, compression capacity from
/// the column curve, and tension capacity 0.6·F_y. Bending demand is the
/// larger end moment over the major-axis section modulus.
pub fn stress_ratio(end_forces: &[f64; 6], section: &Section, e: f64, length: f64, fy: f64) -> f64 {
    // Local end force at A along +x is positive in compression.
    let axial = end_forces[0];
    let f_a = axial.abs() / section.area;
    let f_b = end_forces[2].abs().max(end_forces[5].abs()) / section.section_modulus_major;
    let axial_capacity = if axial >= 0.0 {
        let slenderness = length / section.radius_of_gyration_minor;
        allowable_compression(e, fy, slenderness)
    } else {
        0.6 * fy
    };
    f_a / axial_capacity + f_b / (0.66 * fy)
}

/// Roof drift over its allowable H/denominator, worst over load cases.
pub fn drift_ratio(results: &[AnalysisResult], frame: &Frame, drift_denominator: f64) -> f64 {
    let Some(roof) = frame.roof_level() else { return 0.0 };
    let height = frame.height();
    if !(height > 0.0) {
        return 0.0;
    }
    let limit = height / drift_denominator;
    let roof_nodes = frame.nodes_at_level(roof);
    results
        .iter()
        .flat_map(|r| roof_nodes.iter().map(|&n| r.displacements[n][0].abs()))
        .fold(0.0f64, f64::max)
        / limit
}

/// Largest |roof ux| across load cases, m. Reported alongside optimum
/// designs; the drift constraint above is this value normalized.
pub fn roof_displacement(results: &[AnalysisResult], frame: &Frame) -> f64 {
    let Some(roof) = frame.roof_level() else { return 0.0 };
    let roof_nodes = frame.nodes_at_level(roof);
    results
        .iter()
        .flat_map(|r| roof_nodes.iter().map(|&n| r.displacements[n][0].abs()))
        .fold(0.0f64, f64::max)
}

/// Column continuity: for every stacked pair of column groups, the upper
/// section's area must not exceed the lower's. Emitted as area ratios, one
/// per distinct pair, so uniform columns sit exactly on the feasible
/// boundary at 1.0.
pub fn constructability_ratios(sized: &SizedFrame) -> Vec<f64> {
    sized
        .frame
        .column_group_pairs()
        .iter()
        .map(|&(lower, upper)| sized.group_section(upper).area / sized.group_section(lower).area)
        .collect()
}

/// Full constraint evaluation: per-member stress worst-cased over all load
/// cases, drift, and constructability.
pub fn assess(
    sized: &SizedFrame,
    results: &[AnalysisResult],
    e: f64,
    fy: f64,
    drift_denominator: f64,
) -> ConstraintReport {
    let frame = sized.frame;
    let stress_ratios = frame
        .members
        .iter()
        .map(|m| {
            results
                .iter()
                .map(|r| {
                    stress_ratio(
                        &r.member_end_forces[m.id],
                        sized.member_section(m.id),
                        e,
                        frame.member_length(m.id),
                        fy,
                    )
                })
                .fold(0.0f64, f64::max)
        })
        .collect();
    ConstraintReport {
        stress_ratios,
        drift_ratio: drift_ratio(results, frame, drift_denominator),
        aux_ratios: constructability_ratios(sized),
    }
}
