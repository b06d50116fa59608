//! The full design problem: frame, loads, limits, and satisfaction settings,
//! plus the evaluation pipeline shared by the optimizer and the CLI.

use serde::{Deserialize, Serialize};

use crate::constraints::{self, ConstraintReport};
use crate::error::Result;
use crate::fuzzy::{
    aggregate_lambda, penalized_phi, ConstraintMembership, FitnessMode, MembershipShape,
    ObjectiveMembership, PenaltyConfig,
};
use crate::loading::{self, GravitySpec, SeismicSpec};
use crate::model::{frame_weight, Frame, SizedFrame};
use crate::solver::{assemble_and_solve, AnalysisResult, LoadCase};

/// Material and serviceability limits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignLimits {
    /// Roof drift allowable is height / this.
    pub drift_denominator: f64,
    /// Yield stress, Pa.
    pub fy: f64,
    /// Elastic modulus, Pa.
    pub e_modulus: f64,
    /// Steel unit weight, N/m³.
    pub unit_weight: f64,
}

/// Satisfaction-model settings before the objective bounds are resolved.
/// `f_*` bounds left unset are derived at run start (see the optimizer's
/// pilot stage) and recorded in the run output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FuzzySettings {
    pub shape: MembershipShape,
    pub mu_knee: f64,
    pub f_lower: Option<f64>,
    pub f_upper: Option<f64>,
    pub f_max: Option<f64>,
    pub n_factor: f64,
    pub delta_g: f64,
    pub penalty: PenaltyConfig,
    pub mode: FitnessMode,
}

impl Default for FuzzySettings {
    fn default() -> Self {
        FuzzySettings {
            shape: MembershipShape::Bilinear,
            mu_knee: 0.5,
            f_lower: None,
            f_upper: None,
            f_max: None,
            n_factor: 1.2,
            delta_g: 0.05,
            penalty: PenaltyConfig::default(),
            mode: FitnessMode::Lambda,
        }
    }
}

/// Concrete membership functions for one run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MembershipSet {
    pub objective: ObjectiveMembership,
    pub constraint: ConstraintMembership,
    pub mode: FitnessMode,
    pub penalty: PenaltyConfig,
}

/// One design's evaluation record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignOutcome {
    pub weight_n: f64,
    /// Aggregated satisfaction λ ∈ [0, 1].
    pub satisfaction: f64,
    pub mu_objective: f64,
    /// Governing constraint ratio (∞ for unstable designs).
    pub worst_ratio: f64,
    /// Selection score; λ or −φ depending on the configured mode.
    pub fitness: f64,
    pub feasible: bool,
    pub unstable: bool,
    pub roof_displacement_m: f64,
}

#[derive(Debug, Clone)]
pub struct Problem {
    pub frame: Frame,
    pub gravity: GravitySpec,
    pub seismic: SeismicSpec,
    /// Whether live load participates in the seismic effective weight.
    pub live_in_seismic_weight: bool,
    pub limits: DesignLimits,
    pub fuzzy: FuzzySettings,
}

impl Problem {
    /// Weight of the frame with every group at its heaviest pool section:
    /// an upper bound used as the crisp-mode objective span and as the
    /// fallback when a pilot run finds nothing feasible.
    pub fn max_pool_weight(&self) -> f64 {
        let lengths = self.frame.group_lengths();
        self.frame
            .groups
            .iter()
            .zip(&lengths)
            .map(|(g, &len)| {
                let amax = g.pool.iter().map(|s| s.area).fold(0.0f64, f64::max);
                amax * len * self.limits.unit_weight
            })
            .sum()
    }

    /// Builds the concrete membership functions given a resolved objective
    /// upper bound. Crisp runs keep crisp constraints but use a linear
    /// objective over (f_lower, f_upper): a step objective carries no
    /// selection gradient, which would make weight minimization a random
    /// walk. Defaults: f_lower = 0.6·f_upper (0 for crisp), f_max =
    /// 1.5·f_upper.
    pub fn resolve_memberships(&self, f_upper_hint: f64) -> Result<MembershipSet> {
        let fz = &self.fuzzy;
        let f_upper = fz.f_upper.unwrap_or(f_upper_hint);
        let crisp = fz.shape == MembershipShape::Crisp;
        let mut f_lower = fz.f_lower.unwrap_or(if crisp { 0.0 } else { 0.6 * f_upper });
        if fz.f_upper.is_none() && f_lower >= f_upper {
            // A fixed lower anchor can land above a hinted upper bound (the
            // hint tracks whatever the pilot run reached); re-derive it so
            // the anchors stay ordered instead of failing the run.
            f_lower = if crisp { 0.0 } else { 0.6 * f_upper };
        }
        let f_max = fz.f_max.unwrap_or(1.5 * f_upper);
        let objective_shape = match fz.shape {
            MembershipShape::Crisp => MembershipShape::Linear,
            other => other,
        };
        let objective =
            ObjectiveMembership::new(f_lower, f_upper, f_max, fz.mu_knee, objective_shape)?;
        let constraint =
            ConstraintMembership::new(1.0, fz.delta_g, fz.n_factor, fz.mu_knee, fz.shape)?;
        Ok(MembershipSet { objective, constraint, mode: fz.mode, penalty: fz.penalty })
    }

    /// Per-level seismic story weights: tributary dead load (plus live when
    /// configured) on that level's beams, with the structure's own weight
    /// spread evenly over the levels.
    fn story_weights(&self, structure_weight: f64, levels: &[f64]) -> Vec<f64> {
        let roof = levels.last().copied();
        let per_level_structure =
            if levels.is_empty() { 0.0 } else { structure_weight / levels.len() as f64 };
        levels
            .iter()
            .map(|&level| {
                let is_roof = roof.is_some_and(|r| (level - r).abs() <= 1e-9);
                let beam_len: f64 = self
                    .frame
                    .beams_at_level(level)
                    .iter()
                    .map(|&m| self.frame.member_length(m))
                    .sum();
                let mut line = self.gravity.dead_line_load();
                if self.live_in_seismic_weight {
                    line += self.gravity.live_line_load(is_roof);
                }
                line * beam_len + per_level_structure
            })
            .collect()
    }

    /// The three design load cases for one candidate design. The seismic
    /// effective weight depends on the candidate's own structure weight, so
    /// this is per-design.
    pub fn load_cases(&self, structure_weight: f64) -> Result<Vec<LoadCase>> {
        let gravity = loading::gravity_line_loads(&self.gravity, &self.frame);
        let levels = self.frame.beam_levels();
        let base = self.frame.base_elevation();
        let heights: Vec<f64> = levels.iter().map(|l| l - base).collect();
        let weights = self.story_weights(structure_weight, &levels);
        let effective: f64 = weights.iter().sum();
        let v = loading::ubc_base_shear(effective, &self.seismic);
        let forces = loading::distribute_story_forces(v, &weights, &heights)?;
        let lateral = loading::lateral_load_case(&self.frame, &forces)?;
        Ok(loading::combinations(&gravity, &lateral, (1.0, 1.0)))
    }

    /// Full analysis of one sized design: all load cases solved, constraint
    /// report assembled. Fails on unstable structures.
    pub fn analyze(&self, sized: &SizedFrame) -> Result<(Vec<AnalysisResult>, ConstraintReport)> {
        let weight = frame_weight(sized, self.limits.unit_weight);
        let cases = self.load_cases(weight)?;
        let mut results = Vec::with_capacity(cases.len());
        for case in &cases {
            results.push(assemble_and_solve(sized, case, self.limits.e_modulus)?);
        }
        let report = constraints::assess(
            sized,
            &results,
            self.limits.e_modulus,
            self.limits.fy,
            self.limits.drift_denominator,
        );
        Ok((results, report))
    }

    /// The optimizer's fitness pipeline. Unstable designs come back flagged
    /// and fully violated instead of erroring.
    pub fn evaluate_sized(&self, sized: &SizedFrame, ms: &MembershipSet) -> DesignOutcome {
        let weight = frame_weight(sized, self.limits.unit_weight);
        let (results, report) = match self.analyze(sized) {
            Ok(pair) => pair,
            Err(_) => return self.unstable_outcome(weight, ms),
        };
        let roof = constraints::roof_displacement(&results, &self.frame);
        self.outcome_from_report(weight, &report, roof, ms)
    }

    pub fn evaluate_indices(&self, indices: &[usize], ms: &MembershipSet) -> DesignOutcome {
        let sized = SizedFrame::from_pool_indices(&self.frame, indices)
            .expect("decoded chromosome indices are always in range");
        self.evaluate_sized(&sized, ms)
    }

    /// Memberships and fitness from an existing constraint report.
    pub fn outcome_from_report(
        &self,
        weight: f64,
        report: &ConstraintReport,
        roof_displacement: f64,
        ms: &MembershipSet,
    ) -> DesignOutcome {
        let mu_f = ms.objective.evaluate(weight);
        let mu_stress: Vec<f64> =
            report.stress_ratios.iter().map(|&g| ms.constraint.evaluate(g)).collect();
        let mu_disp = vec![ms.constraint.evaluate(report.drift_ratio)];
        let mu_aux: Vec<f64> = report.aux_ratios.iter().map(|&g| ms.constraint.evaluate(g)).collect();
        let lambda = [&mu_stress[..], &mu_disp[..], &mu_aux[..]]
            .into_iter()
            .fold(mu_f, |acc, mus| aggregate_lambda(acc, mus));
        let fitness = match ms.mode {
            FitnessMode::Lambda => lambda,
            FitnessMode::Phi => {
                -penalized_phi(lambda, mu_f, &mu_stress, &mu_disp, &mu_aux, &ms.penalty)
            }
        };
        DesignOutcome {
            weight_n: weight,
            satisfaction: lambda,
            mu_objective: mu_f,
            worst_ratio: report.worst(),
            fitness,
            feasible: report.is_feasible(),
            unstable: false,
            roof_displacement_m: roof_displacement,
        }
    }

    fn unstable_outcome(&self, weight: f64, ms: &MembershipSet) -> DesignOutcome {
        let fitness = match ms.mode {
            FitnessMode::Lambda => 0.0,
            FitnessMode::Phi => {
                // Fully violated: λ = 0 and every membership at the floor.
                let zeros_members = vec![0.0; self.frame.members.len()];
                let zeros_aux = vec![0.0; self.frame.column_group_pairs().len()];
                -penalized_phi(0.0, 0.0, &zeros_members, &[0.0], &zeros_aux, &ms.penalty)
            }
        };
        DesignOutcome {
            weight_n: weight,
            satisfaction: 0.0,
            mu_objective: 0.0,
            worst_ratio: f64::INFINITY,
            fitness,
            feasible: false,
            unstable: true,
            roof_displacement_m: f64::INFINITY,
        }
    }
}
