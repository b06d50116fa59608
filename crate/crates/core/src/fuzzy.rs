//! Satisfaction model: membership functions for the objective and the
//! normalized constraints, min-aggregation, and the penalized alternative
//! formulation.
//!
//! Memberships map "how good is this value" onto [0, 1]. The bilinear shape
//! is the interesting one: instead of dropping straight to zero at the upper
//! bound, it continues with a shallower second segment to a final cutoff, so
//! designs beyond the bound keep a usable selection gradient.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lower clamp for memberships used inside quotients of the penalized form.
const MU_EPSILON: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MembershipShape {
    Crisp,
    Linear,
    Bilinear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitnessMode {
    /// Fitness is the aggregated satisfaction λ (maximized).
    Lambda,
    /// Fitness is −φ of the penalized formulation (maximized ⇔ φ minimized).
    Phi,
}

/// Objective (weight) membership.
///
/// Bilinear: 1 at `f_lower`, descending to `mu_knee` at `f_upper`, then to 0
/// at `f_max`. Linear uses only (f_lower, f_upper); crisp is a step at
/// `f_upper`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveMembership {
    pub f_lower: f64,
    pub f_upper: f64,
    pub f_max: f64,
    pub mu_knee: f64,
    pub shape: MembershipShape,
}

impl ObjectiveMembership {
    pub fn new(
        f_lower: f64,
        f_upper: f64,
        f_max: f64,
        mu_knee: f64,
        shape: MembershipShape,
    ) -> Result<Self> {
        if !(f_lower < f_upper && f_upper < f_max) {
            return Err(Error::config(format!(
                "objective bounds must satisfy f_lower < f_upper < f_max, got {f_lower}, {f_upper}, {f_max}"
            )));
        }
        if !(mu_knee > 0.0 && mu_knee < 1.0) {
            return Err(Error::config(format!("mu_knee must lie in (0,1), got {mu_knee}")));
        }
        Ok(ObjectiveMembership { f_lower, f_upper, f_max, mu_knee, shape })
    }

    pub fn evaluate(&self, value: f64) -> f64 {
        match self.shape {
            MembershipShape::Crisp => {
                if value <= self.f_upper {
                    1.0
                } else {
                    0.0
                }
            }
            MembershipShape::Linear => {
                if value <= self.f_lower {
                    1.0
                } else if value >= self.f_upper {
                    0.0
                } else {
                    (self.f_upper - value) / (self.f_upper - self.f_lower)
                }
            }
            MembershipShape::Bilinear => {
                if value <= self.f_lower {
                    1.0
                } else if value == self.f_upper {
                    // The knee is an anchor of the piecewise definition;
                    // evaluating it through either segment formula leaks
                    // rounding error into what must be an exact grade.
                    self.mu_knee
                } else if value < self.f_upper {
                    1.0 - (1.0 - self.mu_knee) * (value - self.f_lower)
                        / (self.f_upper - self.f_lower)
                } else if value < self.f_max {
                    self.mu_knee * (self.f_max - value) / (self.f_max - self.f_upper)
                } else {
                    0.0
                }
            }
        }
    }
}

/// Constraint membership over normalized ratios (allowable = 1).
///
/// Bilinear: 1 up to `g_allow`, descending to `mu_knee` at
/// `g_allow + delta_g`, then to 0 at `n_factor · g_allow`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstraintMembership {
    pub g_allow: f64,
    pub delta_g: f64,
    pub n_factor: f64,
    pub mu_knee: f64,
    pub shape: MembershipShape,
}

impl ConstraintMembership {
    pub fn new(
        g_allow: f64,
        delta_g: f64,
        n_factor: f64,
        mu_knee: f64,
        shape: MembershipShape,
    ) -> Result<Self> {
        if !(n_factor > 1.0) {
            return Err(Error::config(format!("n_factor must exceed 1, got {n_factor}")));
        }
        if !(delta_g > 0.0 && delta_g < (n_factor - 1.0) * g_allow) {
            return Err(Error::config(format!(
                "delta_g must lie in (0, {}), got {delta_g}",
                (n_factor - 1.0) * g_allow
            )));
        }
        if !(mu_knee > 0.0 && mu_knee < 1.0) {
            return Err(Error::config(format!("mu_knee must lie in (0,1), got {mu_knee}")));
        }
        Ok(ConstraintMembership { g_allow, delta_g, n_factor, mu_knee, shape })
    }

    pub fn evaluate(&self, g_ratio: f64) -> f64 {
        let g_upper = self.n_factor * self.g_allow;
        match self.shape {
            MembershipShape::Crisp => {
                if g_ratio <= self.g_allow {
                    1.0
                } else {
                    0.0
                }
            }
            MembershipShape::Linear => {
                if g_ratio <= self.g_allow {
                    1.0
                } else if g_ratio >= g_upper {
                    0.0
                } else {
                    (g_upper - g_ratio) / (g_upper - self.g_allow)
                }
            }
            MembershipShape::Bilinear => {
                let knee_at = self.g_allow + self.delta_g;
                if g_ratio <= self.g_allow {
                    1.0
                } else if g_ratio == knee_at {
                    // Exact at the knee anchor; the segment formulas divide
                    // by delta_g, which differs from (knee_at - g_allow) by
                    // one rounding step.
                    self.mu_knee
                } else if g_ratio < knee_at {
                    1.0 - (1.0 - self.mu_knee) * (g_ratio - self.g_allow) / self.delta_g
                } else if g_ratio < g_upper {
                    self.mu_knee * (g_upper - g_ratio) / (g_upper - knee_at)
                } else {
                    0.0
                }
            }
        }
    }
}

/// Overall satisfaction: the worst membership governs.
pub fn aggregate_lambda(mu_f: f64, mu_gs: &[f64]) -> f64 {
    mu_gs.iter().fold(mu_f, |acc, &mu| acc.min(mu))
}

/// Multipliers of the penalized formulation. `s_f` scales the satisfaction
/// reward; (alpha, beta) act on the objective residual, (gamma, omega) on
/// every constraint residual.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PenaltyConfig {
    #[serde(default = "default_s_f")]
    pub s_f: f64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub beta: f64,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default)]
    pub omega: f64,
}

fn default_s_f() -> f64 {
    10.0
}
fn default_alpha() -> f64 {
    1.0
}
fn default_gamma() -> f64 {
    1.0
}

impl Default for PenaltyConfig {
    fn default() -> Self {
        PenaltyConfig { s_f: 10.0, alpha: 1.0, beta: 0.0, gamma: 1.0, omega: 0.0 }
    }
}

impl PenaltyConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.s_f > 0.0) {
            return Err(Error::config(format!("s_f must be positive, got {}", self.s_f)));
        }
        if self.gamma < 0.0 {
            return Err(Error::config(format!("gamma must be non-negative, got {}", self.gamma)));
        }
        Ok(())
    }
}

/// Penalized objective:
///
///   φ = −s_f·λ + ½·alpha·(λ/μ_F − 1 + beta)²
///       + ½·Σ gamma·(λ/μ_g − 1 + omega)²   over all constraint groups
///
/// Memberships are clamped at 1e-6 before dividing, since the quotient is
/// undefined at μ = 0.
pub fn penalized_phi(
    lambda: f64,
    mu_f: f64,
    mu_stress: &[f64],
    mu_disp: &[f64],
    mu_aux: &[f64],
    cfg: &PenaltyConfig,
) -> f64 {
    let quot = |mu: f64| lambda / mu.max(MU_EPSILON);
    let mut phi = -cfg.s_f * lambda;
    let obj_res = quot(mu_f) - 1.0 + cfg.beta;
    phi += 0.5 * cfg.alpha * obj_res * obj_res;
    for group in [mu_stress, mu_disp, mu_aux] {
        for &mu in group {
            let res = quot(mu) - 1.0 + cfg.omega;
            phi += 0.5 * cfg.gamma * res * res;
        }
    }
    phi
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn bilinear_objective() -> ObjectiveMembership {
        ObjectiveMembership::new(100.0, 200.0, 300.0, 0.5, MembershipShape::Bilinear).unwrap()
    }

    #[test]
    fn objective_membership_anchor_points() {
        let m = bilinear_objective();
        assert_eq!(m.evaluate(100.0), 1.0);
        assert_eq!(m.evaluate(50.0), 1.0);
        assert_relative_eq!(m.evaluate(200.0), 0.5, max_relative = 1e-15);
        assert_relative_eq!(m.evaluate(250.0), 0.25, max_relative = 1e-15);
        assert_eq!(m.evaluate(300.0), 0.0);
        assert_eq!(m.evaluate(1e9), 0.0);

        let linear =
            ObjectiveMembership::new(100.0, 200.0, 300.0, 0.5, MembershipShape::Linear).unwrap();
        assert_relative_eq!(linear.evaluate(150.0), 0.5, max_relative = 1e-15);
        assert_eq!(linear.evaluate(200.0), 0.0);

        let crisp =
            ObjectiveMembership::new(100.0, 200.0, 300.0, 0.5, MembershipShape::Crisp).unwrap();
        assert_eq!(crisp.evaluate(200.0), 1.0);
        assert_eq!(crisp.evaluate(200.0001), 0.0);
    }

    #[test]
    fn objective_bounds_are_validated() {
        assert!(ObjectiveMembership::new(2.0, 1.0, 3.0, 0.5, MembershipShape::Linear).is_err());
        assert!(ObjectiveMembership::new(1.0, 2.0, 2.0, 0.5, MembershipShape::Linear).is_err());
        assert!(ObjectiveMembership::new(1.0, 2.0, 3.0, 1.0, MembershipShape::Linear).is_err());
        assert!(ObjectiveMembership::new(1.0, 2.0, 3.0, 0.0, MembershipShape::Linear).is_err());
    }

    fn bilinear_constraint() -> ConstraintMembership {
        ConstraintMembership::new(1.0, 0.05, 1.2, 0.5, MembershipShape::Bilinear).unwrap()
    }

    #[test]
    fn constraint_membership_anchor_points() {
        let m = bilinear_constraint();
        assert_eq!(m.evaluate(0.9), 1.0);
        assert_eq!(m.evaluate(1.0), 1.0);
        assert_relative_eq!(m.evaluate(1.05), 0.5, max_relative = 1e-15);
        assert_eq!(m.evaluate(1.2), 0.0);
        assert_eq!(m.evaluate(5.0), 0.0);

        let crisp = ConstraintMembership::new(1.0, 0.05, 1.2, 0.5, MembershipShape::Crisp).unwrap();
        assert_eq!(crisp.evaluate(1.0), 1.0);
        assert_eq!(crisp.evaluate(1.0001), 0.0);
    }

    #[test]
    fn constraint_parameters_are_validated() {
        assert!(ConstraintMembership::new(1.0, 0.05, 1.0, 0.5, MembershipShape::Linear).is_err());
        assert!(ConstraintMembership::new(1.0, 0.3, 1.2, 0.5, MembershipShape::Linear).is_err());
        assert!(ConstraintMembership::new(1.0, 0.0, 1.2, 0.5, MembershipShape::Linear).is_err());
    }

    #[test]
    fn lambda_is_the_minimum() {
        assert_eq!(aggregate_lambda(0.8, &[0.6, 0.9]), 0.6);
        assert_eq!(aggregate_lambda(1.0, &[1.0, 1.0]), 1.0);
        assert_eq!(aggregate_lambda(0.5, &[0.7, 0.0, 0.9]), 0.0);
        assert_eq!(aggregate_lambda(0.3, &[]), 0.3);
    }

    #[test]
    fn phi_at_full_satisfaction_is_minus_scale() {
        let cfg = PenaltyConfig::default(); // beta = omega = 0
        let phi = penalized_phi(1.0, 1.0, &[1.0, 1.0], &[1.0], &[], &cfg);
        assert_relative_eq!(phi, -cfg.s_f, max_relative = 1e-15);
    }

    #[test]
    fn phi_at_zero_lambda_reduces_to_constant_residuals() {
        let cfg = PenaltyConfig { s_f: 10.0, alpha: 2.0, beta: 0.3, gamma: 1.5, omega: 0.1, };
        let n_constraints = 3;
        let phi = penalized_phi(0.0, 0.4, &[0.2, 0.9], &[0.5], &[], &cfg);
        let expected = 0.5 * cfg.alpha * (cfg.beta - 1.0f64).powi(2)
            + 0.5 * cfg.gamma * (cfg.omega - 1.0f64).powi(2) * n_constraints as f64;
        assert_relative_eq!(phi, expected, max_relative = 1e-14);
    }

    #[test]
    fn phi_rewards_higher_lambda_when_penalties_are_small() {
        let cfg = PenaltyConfig::default();
        // Near uniform satisfaction the −s_f·λ term dominates the quadratics.
        let lo = penalized_phi(0.90, 0.95, &[0.95], &[0.95], &[0.95], &cfg);
        let hi = penalized_phi(0.95, 0.95, &[0.95], &[0.95], &[0.95], &cfg);
        assert!(hi < lo, "phi should fall as lambda rises: {hi} vs {lo}");
    }

    proptest! {
        #[test]
        fn lambda_matches_brute_force_min(mus in prop::collection::vec(0.0f64..=1.0, 1..20)) {
            let mu_f = mus[0];
            let rest = &mus[1..];
            let brute = mus.iter().copied().fold(f64::INFINITY, f64::min);
            let lambda = aggregate_lambda(mu_f, rest);
            prop_assert!((lambda - brute).abs() < 1e-15);
        }

        #[test]
        fn objective_membership_is_monotone_and_bounded(
            a in 1.0f64..1e6,
            span1 in 1.0f64..1e6,
            span2 in 1.0f64..1e6,
            knee in 0.01f64..0.99,
            x1 in 0.0f64..4e6,
            x2 in 0.0f64..4e6,
            shape_i in 0usize..3,
        ) {
            let shape = [MembershipShape::Crisp, MembershipShape::Linear, MembershipShape::Bilinear][shape_i];
            let m = ObjectiveMembership::new(a, a + span1, a + span1 + span2, knee, shape).unwrap();
            let (lo, hi) = if x1 <= x2 { (x1, x2) } else { (x2, x1) };
            let (mu_lo, mu_hi) = (m.evaluate(lo), m.evaluate(hi));
            prop_assert!((0.0..=1.0).contains(&mu_lo));
            prop_assert!((0.0..=1.0).contains(&mu_hi));
            prop_assert!(mu_hi <= mu_lo + 1e-15);
        }

        #[test]
        fn bilinear_discriminates_where_linear_cannot(
            f1_t in 0.001f64..0.999,
            f2_t in 0.001f64..0.999,
        ) {
            prop_assume!((f1_t - f2_t).abs() > 1e-9);
            let (f_upper, f_max) = (200.0, 300.0);
            let bilinear = bilinear_objective();
            let linear = ObjectiveMembership::new(
                100.0, f_upper, f_max, 0.5, MembershipShape::Linear,
            ).unwrap();
            let (t_lo, t_hi) = if f1_t < f2_t { (f1_t, f2_t) } else { (f2_t, f1_t) };
            let f1 = f_upper + t_lo * (f_max - f_upper);
            let f2 = f_upper + t_hi * (f_max - f_upper);
            // Beyond f_upper the linear shape is flat zero; bilinear still ranks.
            prop_assert_eq!(linear.evaluate(f1), 0.0);
            prop_assert_eq!(linear.evaluate(f2), 0.0);
            let (b1, b2) = (bilinear.evaluate(f1), bilinear.evaluate(f2));
            prop_assert!(b1 > b2 && b2 > 0.0, "b1 {} b2 {}", b1, b2);
        }

        #[test]
        fn constraint_membership_is_monotone(
            delta in 0.01f64..0.15,
            n in 1.2f64..3.0,
            knee in 0.01f64..0.99,
            x1 in 0.0f64..5.0,
            x2 in 0.0f64..5.0,
            shape_i in 0usize..3,
        ) {
            let shape = [MembershipShape::Crisp, MembershipShape::Linear, MembershipShape::Bilinear][shape_i];
            let m = ConstraintMembership::new(1.0, delta, n, knee, shape).unwrap();
            let (lo, hi) = if x1 <= x2 { (x1, x2) } else { (x2, x1) };
            prop_assert!(m.evaluate(hi) <= m.evaluate(lo) + 1e-15);
            prop_assert!((0.0..=1.0).contains(&m.evaluate(lo)));
        }

        #[test]
        fn non_crisp_shapes_are_lipschitz_continuous(
            x in 0.0f64..2.0,
            eps in 1e-9f64..1e-3,
            shape_i in 0usize..2,
        ) {
            let shape = [MembershipShape::Linear, MembershipShape::Bilinear][shape_i];
            let m = ConstraintMembership::new(1.0, 0.05, 1.2, 0.5, shape).unwrap();
            // Steepest segment: (1 − knee)/delta_g for bilinear, 1/(g_u − g_a) linear.
            let lip = ((1.0 - m.mu_knee) / m.delta_g).max(1.0 / (m.n_factor - 1.0));
            let diff = (m.evaluate(x + eps) - m.evaluate(x)).abs();
            prop_assert!(diff <= lip * eps * (1.0 + 1e-9), "diff {} lip*eps {}", diff, lip * eps);
        }
    }
}
