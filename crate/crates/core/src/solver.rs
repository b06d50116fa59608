//! Direct-stiffness analysis of planar frames whose beam ends may carry
//! rotational springs.
//!
//! Local DOF order is (u1, v1, θ1, u2, v2, θ2) with right-handed axes and
//! counterclockwise-positive rotations. The closed-form element is written in
//! terms of end fixity factors r = 1/(1+3α), α = EI/(L·K), which gives exact
//! rigid (r = 1) and pinned (r = 0) limits with no large/small-K numerics.
//! The spring-condensation element in [`condensation_oracle`] is the
//! normative reference for every sign in this module.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector, Matrix2, Matrix6, Matrix6x2, Vector2, Vector6};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ConnectionModel, Frame, SizedFrame, SupportFixity};

pub const DOF_PER_NODE: usize = 3;

/// Relative pivot threshold below which the factorization reports the
/// structure as unstable.
const PIVOT_TOL: f64 = 1e-12;

/// Connection flexibility of both member ends. `alpha = EI/(L·K)`;
/// rigid ends have α = 0 and pinned ends are flagged infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SemiRigidFactors {
    pub alpha_a: f64,
    pub alpha_b: f64,
}

fn end_alpha(e: f64, i: f64, l: f64, conn: ConnectionModel) -> f64 {
    match conn {
        ConnectionModel::Rigid => 0.0,
        ConnectionModel::Pinned => f64::INFINITY,
        ConnectionModel::SemiRigid { k_rot } => e * i / (l * k_rot),
    }
}

fn fixity(alpha: f64) -> f64 {
    if alpha.is_infinite() {
        0.0
    } else {
        1.0 / (1.0 + 3.0 * alpha)
    }
}

impl SemiRigidFactors {
    pub fn rigid() -> Self {
        SemiRigidFactors { alpha_a: 0.0, alpha_b: 0.0 }
    }

    /// Fixity factor of end A in [0, 1]: 0 pinned, 1 rigid.
    pub fn fixity_a(&self) -> f64 {
        fixity(self.alpha_a)
    }

    pub fn fixity_b(&self) -> f64 {
        fixity(self.alpha_b)
    }

    /// The common denominator 1 + 4α_A + 4α_B + 12α_Aα_B of the α-form
    /// element. Infinite for pinned ends; the fixity form is used instead
    /// wherever a pinned limit must stay finite.
    pub fn denominator(&self) -> f64 {
        1.0 + 4.0 * self.alpha_a + 4.0 * self.alpha_b + 12.0 * self.alpha_a * self.alpha_b
    }
}

/// Computes both end flexibilities for a member.
pub fn semirigid_factors(
    e: f64,
    i: f64,
    l: f64,
    conn_a: ConnectionModel,
    conn_b: ConnectionModel,
) -> SemiRigidFactors {
    debug_assert!(l > 0.0);
    SemiRigidFactors {
        alpha_a: end_alpha(e, i, l, conn_a),
        alpha_b: end_alpha(e, i, l, conn_b),
    }
}

/// Local 6×6 element stiffness. Written with fixity factors so that the
/// pinned limit is an exact zero of the bending block:
///
/// with r_a, r_b ∈ [0,1], den = 4 − r_a·r_b and c = EI/L,
///   k_vv   = 12 (r_a + r_b + r_a r_b) / den · c/L²
///   k_vθA  =  6 r_a (2 + r_b) / den · c/L
///   k_vθB  =  6 r_b (2 + r_a) / den · c/L
///   k_θAθA = 12 r_a / den · c,  k_θBθB = 12 r_b / den · c
///   k_θAθB =  6 r_a r_b / den · c
///
/// which reduces to the familiar 12/6/4/2 EI pattern at r = 1 and to the
/// classic α-form (D = 1 + 4α_A + 4α_B + 12α_Aα_B) for finite springs.
pub fn element_stiffness_local(
    e: f64,
    i: f64,
    area: f64,
    l: f64,
    factors: &SemiRigidFactors,
) -> Matrix6<f64> {
    let ra = factors.fixity_a();
    let rb = factors.fixity_b();
    let den = 4.0 - ra * rb;
    let c = e * i / l;
    let ax = e * area / l;

    let kvv = 12.0 * (ra + rb + ra * rb) / den * c / (l * l);
    let kva = 6.0 * ra * (2.0 + rb) / den * c / l;
    let kvb = 6.0 * rb * (2.0 + ra) / den * c / l;
    let kaa = 12.0 * ra / den * c;
    let kbb = 12.0 * rb / den * c;
    let kab = 6.0 * ra * rb / den * c;

    Matrix6::from_row_slice(&[
        ax, 0.0, 0.0, -ax, 0.0, 0.0, //
        0.0, kvv, kva, 0.0, -kvv, kvb, //
        0.0, kva, kaa, 0.0, -kva, kab, //
        -ax, 0.0, 0.0, ax, 0.0, 0.0, //
        0.0, -kvv, -kva, 0.0, kvv, -kvb, //
        0.0, kvb, kab, 0.0, -kvb, kbb,
    ])
}

/// Transformation from global to local element DOFs for a member whose local
/// x axis makes `angle` with global x.
fn transformation(angle: f64) -> Matrix6<f64> {
    let (s, c) = angle.sin_cos();
    let mut t = Matrix6::zeros();
    for block in 0..2 {
        let o = 3 * block;
        t[(o, o)] = c;
        t[(o, o + 1)] = s;
        t[(o + 1, o)] = -s;
        t[(o + 1, o + 1)] = c;
        t[(o + 2, o + 2)] = 1.0;
    }
    t
}

/// Global-coordinate element stiffness: Tᵀ · k_local · T.
pub fn element_stiffness(
    section: &crate::sections::Section,
    e: f64,
    l: f64,
    factors: &SemiRigidFactors,
    orientation_angle: f64,
) -> Matrix6<f64> {
    let k = element_stiffness_local(e, section.moment_of_inertia_major, section.area, l, factors);
    let t = transformation(orientation_angle);
    t.transpose() * k * t
}

/// Exact semi-rigid element by static condensation: a rigid-ended beam whose
/// end rotations connect to the joints through springs k_a, k_b. The two
/// internal beam-end rotations are eliminated with a Schur complement. Only
/// valid for finite positive springs; the closed form owns the limits.
pub fn condensation_oracle(
    section: &crate::sections::Section,
    e: f64,
    l: f64,
    k_a: f64,
    k_b: f64,
) -> Matrix6<f64> {
    assert!(k_a > 0.0 && k_a.is_finite(), "oracle needs finite k_a");
    assert!(k_b > 0.0 && k_b.is_finite(), "oracle needs finite k_b");
    let i = section.moment_of_inertia_major;
    let c = e * i / l;
    let ax = e * section.area / l;
    let sh = 12.0 * c / (l * l);
    let cp = 6.0 * c / l;

    // External DOFs (u1, v1, θ1, u2, v2, θ2): joint translations are shared
    // with the beam; joint rotations see only their spring.
    let kee = Matrix6::from_row_slice(&[
        ax, 0.0, 0.0, -ax, 0.0, 0.0, //
        0.0, sh, 0.0, 0.0, -sh, 0.0, //
        0.0, 0.0, k_a, 0.0, 0.0, 0.0, //
        -ax, 0.0, 0.0, ax, 0.0, 0.0, //
        0.0, -sh, 0.0, 0.0, sh, 0.0, //
        0.0, 0.0, 0.0, 0.0, 0.0, k_b,
    ]);
    // Internal DOFs: beam end rotations (θ1', θ2').
    let kei = Matrix6x2::from_row_slice(&[
        0.0, 0.0, //
        cp, cp, //
        -k_a, 0.0, //
        0.0, 0.0, //
        -cp, -cp, //
        0.0, -k_b,
    ]);
    let kii = Matrix2::new(4.0 * c + k_a, 2.0 * c, 2.0 * c, 4.0 * c + k_b);
    let kii_inv = kii.try_inverse().expect("Kii is positive definite");
    kee - kei * kii_inv * kei.transpose()
}

/// Fixed-end force vector of a member under a uniform span load, local
/// coordinates. `w` is the load intensity acting toward local −y (so gravity
/// on a horizontal beam is positive w). With m = wL²/12:
///
///   M_A =  3 m r_a (2 − r_b) / (4 − r_a r_b)
///   M_B = −3 m r_b (2 − r_a) / (4 − r_a r_b)
///
/// (rigid: ±wL²/12; either end pinned: that end's moment exactly 0), and the
/// shears restore member equilibrium of the corrected moments.
pub fn fixed_end_forces(w: f64, l: f64, factors: &SemiRigidFactors) -> Vector6<f64> {
    let ra = factors.fixity_a();
    let rb = factors.fixity_b();
    let den = 4.0 - ra * rb;
    let m = w * l * l / 12.0;
    let ma = 3.0 * m * ra * (2.0 - rb) / den;
    let mb = -3.0 * m * rb * (2.0 - ra) / den;
    let vb = w * l / 2.0 - (ma + mb) / l;
    let va = w * l - vb;
    Vector6::new(0.0, va, ma, 0.0, vb, mb)
}

/// Fixed-end forces via the condensed spring-beam system; normative check
/// for [`fixed_end_forces`]. Finite springs only.
pub fn oracle_fixed_end_forces(
    section: &crate::sections::Section,
    e: f64,
    l: f64,
    k_a: f64,
    k_b: f64,
    w: f64,
) -> Vector6<f64> {
    let i = section.moment_of_inertia_major;
    let c = e * i / l;
    let cp = 6.0 * c / l;
    let kei = Matrix6x2::from_row_slice(&[
        0.0, 0.0, //
        cp, cp, //
        -k_a, 0.0, //
        0.0, 0.0, //
        -cp, -cp, //
        0.0, -k_b,
    ]);
    let kii = Matrix2::new(4.0 * c + k_a, 2.0 * c, 2.0 * c, 4.0 * c + k_b);
    let m = w * l * l / 12.0;
    // Clamping all eight DOFs puts the span-load reactions on the beam's own
    // ends: shears at the external translations, moments at the internal
    // rotations. Condensing transfers the internal part outward.
    let r_ext = Vector6::new(0.0, w * l / 2.0, 0.0, 0.0, w * l / 2.0, 0.0);
    let r_int = Vector2::new(m, -m);
    r_ext - kei * kii.try_inverse().expect("Kii positive definite") * r_int
}

/// Loads for one analysis: concentrated nodal forces plus uniform member
/// loads (positive toward local −y, i.e. gravity for horizontal beams).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LoadCase {
    pub nodal_forces: BTreeMap<usize, [f64; 3]>,
    pub member_uniform_loads: BTreeMap<usize, f64>,
}

impl LoadCase {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_nodal(&mut self, node: usize, fx: f64, fy: f64, moment: f64) {
        let entry = self.nodal_forces.entry(node).or_insert([0.0; 3]);
        entry[0] += fx;
        entry[1] += fy;
        entry[2] += moment;
    }

    pub fn add_member_load(&mut self, member: usize, w: f64) {
        *self.member_uniform_loads.entry(member).or_insert(0.0) += w;
    }

    /// Linear combination Σ factor_i · case_i.
    pub fn combine(parts: &[(f64, &LoadCase)]) -> LoadCase {
        let mut out = LoadCase::new();
        for (factor, case) in parts {
            for (&node, f) in &case.nodal_forces {
                out.add_nodal(node, factor * f[0], factor * f[1], factor * f[2]);
            }
            for (&member, &w) in &case.member_uniform_loads {
                out.add_member_load(member, factor * w);
            }
        }
        out
    }
}

/// Solution of one load case on one sized frame.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnalysisResult {
    /// Per node: (ux, uy, θ).
    pub displacements: Vec<[f64; 3]>,
    /// Per member: local end forces (u1, v1, θ1, u2, v2, θ2) acting on the
    /// member, span-load contribution included.
    pub member_end_forces: Vec<[f64; 6]>,
    /// Per support node: reaction forces (Fx, Fy, M).
    pub reactions: Vec<(usize, [f64; 3])>,
}

fn dof_name(dof: usize) -> String {
    let comp = ["ux", "uy", "rot"][dof % DOF_PER_NODE];
    format!("node {} ({comp})", dof / DOF_PER_NODE)
}

/// In-place LDLᵀ factorization and solve of a symmetric positive-definite
/// system. Reports the global DOF of the first non-positive pivot, which for
/// a frame names the mechanism's node and component.
fn solve_spd(mut a: DMatrix<f64>, mut b: DVector<f64>, free: &[usize]) -> Result<DVector<f64>> {
    let n = a.nrows();
    let scale = (0..n).map(|j| a[(j, j)].abs()).fold(0.0f64, f64::max).max(1.0);
    let mut d = vec![0.0f64; n];
    let mut w = vec![0.0f64; n];
    for j in 0..n {
        for k in 0..j {
            w[k] = a[(j, k)] * d[k];
        }
        let mut dj = a[(j, j)];
        for k in 0..j {
            dj -= a[(j, k)] * w[k];
        }
        if dj <= PIVOT_TOL * scale {
            return Err(Error::Singular { dof: dof_name(free[j]) });
        }
        d[j] = dj;
        for i in (j + 1)..n {
            let mut v = a[(i, j)];
            for k in 0..j {
                v -= a[(i, k)] * w[k];
            }
            a[(i, j)] = v / dj;
        }
    }
    // Forward substitution (unit lower), diagonal scaling, back substitution.
    for j in 0..n {
        let bj = b[j];
        for i in (j + 1)..n {
            b[i] -= a[(i, j)] * bj;
        }
    }
    for j in 0..n {
        b[j] /= d[j];
    }
    for j in (0..n).rev() {
        let mut v = b[j];
        for i in (j + 1)..n {
            v -= a[(i, j)] * b[i];
        }
        b[j] = v;
    }
    Ok(b)
}

struct ElementContext {
    dofs: [usize; 6],
    k_local: Matrix6<f64>,
    t: Matrix6<f64>,
    r_fixed: Vector6<f64>,
}

fn element_context(sized: &SizedFrame, case: &LoadCase, e: f64, member: usize) -> ElementContext {
    let frame = sized.frame;
    let m = &frame.members[member];
    let section = sized.member_section(member);
    let l = frame.member_length(member);
    let factors = semirigid_factors(
        e,
        section.moment_of_inertia_major,
        l,
        m.end_connection_a,
        m.end_connection_b,
    );
    let k_local = element_stiffness_local(e, section.moment_of_inertia_major, section.area, l, &factors);
    let t = transformation(frame.member_angle(member));
    let w = case.member_uniform_loads.get(&member).copied().unwrap_or(0.0);
    let r_fixed = if w != 0.0 { fixed_end_forces(w, l, &factors) } else { Vector6::zeros() };
    let a = m.node_a * DOF_PER_NODE;
    let b = m.node_b * DOF_PER_NODE;
    ElementContext {
        dofs: [a, a + 1, a + 2, b, b + 1, b + 2],
        k_local,
        t,
        r_fixed,
    }
}

/// Assembles the global system for one load case and solves it.
///
/// The load vector is nodal forces minus the transformed fixed-end forces;
/// supported DOFs are eliminated by index partitioning; member end forces are
/// recovered as k_local·(T·u) + r_F.
pub fn assemble_and_solve(
    sized: &SizedFrame,
    case: &LoadCase,
    e_modulus: f64,
) -> Result<AnalysisResult> {
    let frame = sized.frame;
    let ndof = frame.nodes.len() * DOF_PER_NODE;
    let mut k = DMatrix::<f64>::zeros(ndof, ndof);
    let mut p = DVector::<f64>::zeros(ndof);

    let contexts: Vec<ElementContext> = (0..frame.members.len())
        .map(|m| element_context(sized, case, e_modulus, m))
        .collect();

    for ctx in &contexts {
        let k_global = ctx.t.transpose() * ctx.k_local * ctx.t;
        let f_global = ctx.t.transpose() * ctx.r_fixed;
        for (li, &gi) in ctx.dofs.iter().enumerate() {
            p[gi] -= f_global[li];
            for (lj, &gj) in ctx.dofs.iter().enumerate() {
                k[(gi, gj)] += k_global[(li, lj)];
            }
        }
    }
    for (&node, f) in &case.nodal_forces {
        let base = node * DOF_PER_NODE;
        for c in 0..DOF_PER_NODE {
            p[base + c] += f[c];
        }
    }

    let mut constrained = vec![false; ndof];
    for &(node, fixity) in &frame.supports {
        let base = node * DOF_PER_NODE;
        constrained[base] = true;
        constrained[base + 1] = true;
        if fixity == SupportFixity::Fixed {
            constrained[base + 2] = true;
        }
    }
    let free: Vec<usize> = (0..ndof).filter(|&d| !constrained[d]).collect();

    let mut k_ff = DMatrix::<f64>::zeros(free.len(), free.len());
    let mut p_f = DVector::<f64>::zeros(free.len());
    for (i, &gi) in free.iter().enumerate() {
        p_f[i] = p[gi];
        for (j, &gj) in free.iter().enumerate() {
            k_ff[(i, j)] = k[(gi, gj)];
        }
    }
    let u_f = solve_spd(k_ff, p_f, &free)?;

    let mut u = DVector::<f64>::zeros(ndof);
    for (i, &gi) in free.iter().enumerate() {
        u[gi] = u_f[i];
    }

    let displacements = frame
        .nodes
        .iter()
        .map(|n| {
            let b = n.id * DOF_PER_NODE;
            [u[b], u[b + 1], u[b + 2]]
        })
        .collect();

    let member_end_forces = contexts
        .iter()
        .map(|ctx| {
            let mut u_e = Vector6::zeros();
            for (li, &gi) in ctx.dofs.iter().enumerate() {
                u_e[li] = u[gi];
            }
            let f = ctx.k_local * (ctx.t * u_e) + ctx.r_fixed;
            [f[0], f[1], f[2], f[3], f[4], f[5]]
        })
        .collect();

    // Reactions close the global balance: R = K·u − P on constrained DOFs.
    let residual = &k * &u - &p;
    let reactions = frame
        .supports
        .iter()
        .map(|&(node, _)| {
            let b = node * DOF_PER_NODE;
            (node, [residual[b], residual[b + 1], residual[b + 2]])
        })
        .collect();

    Ok(AnalysisResult { displacements, member_end_forces, reactions })
}

/// Sum of externally applied forces (global x, y) for an equilibrium check:
/// nodal loads plus the resultant of every member's uniform load.
pub fn total_applied_forces(frame: &Frame, case: &LoadCase) -> (f64, f64) {
    let mut fx = 0.0;
    let mut fy = 0.0;
    for f in case.nodal_forces.values() {
        fx += f[0];
        fy += f[1];
    }
    for (&member, &w) in &case.member_uniform_loads {
        let l = frame.member_length(member);
        let (s, c) = frame.member_angle(member).sin_cos();
        // Local force resultant (0, −wL) rotated to global.
        fx += s * w * l;
        fy += -c * w * l;
    }
    (fx, fy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{DesignGroup, Member, MemberRole, Node};
    use crate::sections::{Section, SectionCatalog};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn test_section(i: f64, a: f64) -> Section {
        Section {
            name: "T".into(),
            area: a,
            depth: 0.3,
            moment_of_inertia_major: i,
            section_modulus_major: i / 0.15,
            radius_of_gyration_minor: 0.05,
            flange_width: 0.2,
            flange_thickness: 0.02,
        }
    }

    fn rel_diff(a: &Matrix6<f64>, b: &Matrix6<f64>) -> f64 {
        let scale = a.amax().max(b.amax()).max(1e-300);
        (a - b).amax() / scale
    }

    #[test]
    fn rigid_element_matches_textbook_pattern() {
        let s = test_section(2e-4, 8e-3);
        let (e, l) = (2.059e11, 5.0);
        let k = element_stiffness_local(e, s.moment_of_inertia_major, s.area, l, &SemiRigidFactors::rigid());
        let c = e * s.moment_of_inertia_major / l;
        assert_relative_eq!(k[(2, 2)], 4.0 * c, max_relative = 1e-14);
        assert_relative_eq!(k[(5, 5)], 4.0 * c, max_relative = 1e-14);
        assert_relative_eq!(k[(2, 5)], 2.0 * c, max_relative = 1e-14);
        assert_relative_eq!(k[(1, 1)], 12.0 * c / (l * l), max_relative = 1e-14);
        assert_relative_eq!(k[(1, 2)], 6.0 * c / l, max_relative = 1e-14);
        assert_relative_eq!(k[(0, 0)], e * s.area / l, max_relative = 1e-14);
    }

    #[test]
    fn pinned_pinned_element_is_a_truss_bar() {
        let s = test_section(2e-4, 8e-3);
        let (e, l) = (2.059e11, 5.0);
        let f = SemiRigidFactors { alpha_a: f64::INFINITY, alpha_b: f64::INFINITY };
        let k = element_stiffness_local(e, s.moment_of_inertia_major, s.area, l, &f);
        let ax = e * s.area / l;
        for r in 0..6 {
            for c in 0..6 {
                let expect = match (r, c) {
                    (0, 0) | (3, 3) => ax,
                    (0, 3) | (3, 0) => -ax,
                    _ => 0.0,
                };
                assert_relative_eq!(k[(r, c)], expect, epsilon = ax * 1e-15);
            }
        }
        // Near-zero springs in the oracle approach the same truss limit.
        let tiny = 1e-9 * e * s.moment_of_inertia_major / l;
        let oracle = condensation_oracle(&s, e, l, tiny, tiny);
        assert!(rel_diff(&k, &oracle) < 1e-8, "rel {}", rel_diff(&k, &oracle));
    }

    #[test]
    fn example_alpha_value() {
        // W8X21 at L = 5 m with K = 8.33e7 N·m/rad.
        let e = 2.059e11;
        let i = 75.3 * 0.0254f64.powi(4);
        let f = semirigid_factors(e, i, 5.0, ConnectionModel::SemiRigid { k_rot: 8.33e7 }, ConnectionModel::Rigid);
        assert_relative_eq!(f.alpha_a, 0.015494272280881901, max_relative = 1e-14);
        assert_eq!(f.alpha_b, 0.0);
        assert_relative_eq!(f.denominator(), 1.0 + 4.0 * f.alpha_a, max_relative = 1e-14);
    }

    #[test]
    fn huge_stiffness_gives_negligible_alpha() {
        let f = semirigid_factors(
            2.059e11,
            3.13e-5,
            5.0,
            ConnectionModel::SemiRigid { k_rot: 1e20 },
            ConnectionModel::Rigid,
        );
        assert!(f.alpha_a < 1e-12);
    }

    #[test]
    fn stiff_oracle_matches_rigid_closed_form() {
        let s = test_section(3.134e-5, 4e-3);
        let (e, l) = (1.999e11, 5.0);
        let k_rigid =
            element_stiffness_local(e, s.moment_of_inertia_major, s.area, l, &SemiRigidFactors::rigid());
        // The Schur complement subtracts K-sized terms, so its rounding noise
        // grows like eps·K/k_element; 1e8·EI/L keeps that near 1e-8 while the
        // spring itself perturbs the matrix by only ~3·EI/(L·K) = 3e-8.
        // Extreme ratios like 1e16 are exact only in the closed form.
        let big = 1e8 * e * s.moment_of_inertia_major / l;
        let oracle = condensation_oracle(&s, e, l, big, big);
        assert!(rel_diff(&k_rigid, &oracle) < 1e-6, "rel {}", rel_diff(&k_rigid, &oracle));
    }

    #[test]
    fn oracle_end_swap_symmetry() {
        let s = test_section(3.134e-5, 4e-3);
        let (e, l) = (1.999e11, 5.0);
        let k = condensation_oracle(&s, e, l, 8.33e7, 8.33e7);
        // Swapping ends permutes DOFs (0..2 ↔ 3..5) and flips the local
        // axes' sense; for equal springs the matrix must be invariant.
        let perm = [3usize, 4, 5, 0, 1, 2];
        for r in 0..6 {
            for c in 0..6 {
                let sign = |d: usize| if d % 3 == 0 || d % 3 == 1 { -1.0 } else { 1.0 };
                let mirrored = sign(r) * sign(c) * k[(perm[r], perm[c])];
                // Translation DOFs flip direction under the end swap.
                assert_relative_eq!(k[(r, c)], mirrored, epsilon = k.amax() * 1e-12);
            }
        }
    }

    #[test]
    fn oracle_is_symmetric_psd_with_rigid_body_modes() {
        let s = test_section(2e-4, 8e-3);
        let (e, l) = (2.059e11, 4.0);
        let k = condensation_oracle(&s, e, l, 5e7, 9e8);
        assert!(rel_diff(&k, &k.transpose()) < 1e-13);
        let eigen = nalgebra::SymmetricEigen::new(k);
        let max_ev = eigen.eigenvalues.amax();
        let near_zero = eigen.eigenvalues.iter().filter(|&&ev| ev.abs() < 1e-9 * max_ev).count();
        assert_eq!(near_zero, 3, "eigenvalues: {:?}", eigen.eigenvalues);
        for &ev in eigen.eigenvalues.iter() {
            assert!(ev > -1e-9 * max_ev);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn closed_form_matches_condensation_oracle(
            e in 1e10f64..4e11,
            i in 1e-7f64..1e-2,
            a in 1e-4f64..1e-1,
            l in 0.5f64..20.0,
            log_ka in 3.0f64..13.0,
            log_kb in 3.0f64..13.0,
        ) {
            let s = test_section(i, a);
            let (ka, kb) = (10f64.powf(log_ka), 10f64.powf(log_kb));
            let factors = semirigid_factors(
                e, i, l,
                ConnectionModel::SemiRigid { k_rot: ka },
                ConnectionModel::SemiRigid { k_rot: kb },
            );
            let closed = element_stiffness_local(e, i, a, l, &factors);
            let oracle = condensation_oracle(&s, e, l, ka, kb);
            prop_assert!(rel_diff(&closed, &oracle) < 1e-10,
                "rel diff {}", rel_diff(&closed, &oracle));
        }

        #[test]
        fn fixed_end_forces_match_oracle(
            e in 1e10f64..4e11,
            i in 1e-7f64..1e-2,
            l in 0.5f64..20.0,
            log_ka in 3.0f64..13.0,
            log_kb in 3.0f64..13.0,
            w in 1.0f64..1e6,
        ) {
            let s = test_section(i, 1e-2);
            let (ka, kb) = (10f64.powf(log_ka), 10f64.powf(log_kb));
            let factors = semirigid_factors(
                e, i, l,
                ConnectionModel::SemiRigid { k_rot: ka },
                ConnectionModel::SemiRigid { k_rot: kb },
            );
            let closed = fixed_end_forces(w, l, &factors);
            let oracle = oracle_fixed_end_forces(&s, e, l, ka, kb, w);
            let scale = w * l * l;
            for d in 0..6 {
                prop_assert!((closed[d] - oracle[d]).abs() <= 1e-10 * scale,
                    "dof {d}: closed {} oracle {}", closed[d], oracle[d]);
            }
        }

        #[test]
        fn symmetric_springs_reduce_moments_by_one_plus_two_alpha(
            alpha in 0.0f64..10.0,
            w in 1.0f64..1e6,
            l in 0.5f64..20.0,
        ) {
            let f = SemiRigidFactors { alpha_a: alpha, alpha_b: alpha };
            let r = fixed_end_forces(w, l, &f);
            let expected = (w * l * l / 12.0) / (1.0 + 2.0 * alpha);
            prop_assert!((r[2].abs() - expected).abs() <= 1e-10 * expected.max(1.0));
            prop_assert!((r[5].abs() - expected).abs() <= 1e-10 * expected.max(1.0));
            prop_assert!((r[2] + r[5]).abs() <= 1e-12 * expected.max(1.0)); // antisymmetric
        }
    }

    #[test]
    fn fixed_end_force_limit_cases() {
        let rigid = fixed_end_forces(10_000.0, 5.0, &SemiRigidFactors::rigid());
        assert_relative_eq!(rigid[2], 10_000.0 * 25.0 / 12.0, max_relative = 1e-14);
        assert_relative_eq!(rigid[5], -10_000.0 * 25.0 / 12.0, max_relative = 1e-14);
        assert_relative_eq!(rigid[1], 25_000.0, max_relative = 1e-14);

        let pinned = fixed_end_forces(
            10_000.0,
            5.0,
            &SemiRigidFactors { alpha_a: f64::INFINITY, alpha_b: f64::INFINITY },
        );
        assert_eq!(pinned[2], 0.0);
        assert_eq!(pinned[5], 0.0);
        assert_relative_eq!(pinned[1], 25_000.0, max_relative = 1e-14);
        assert_relative_eq!(pinned[4], 25_000.0, max_relative = 1e-14);
    }

    /// One-member fixed-fixed beam: a full solve must return exactly the
    /// fixed-end forces (all DOFs are constrained).
    #[test]
    fn clamped_beam_solve_reproduces_fixed_end_forces() {
        let cat = SectionCatalog::builtin();
        let section = cat.lookup("W8X21").unwrap().clone();
        let frame = Frame::new(
            vec![Node { id: 0, x: 0.0, y: 0.0 }, Node { id: 1, x: 5.0, y: 0.0 }],
            vec![Member {
                id: 0,
                node_a: 0,
                node_b: 1,
                role: MemberRole::Beam,
                group: 0,
                end_connection_a: ConnectionModel::SemiRigid { k_rot: 3.140411e6 },
                end_connection_b: ConnectionModel::SemiRigid { k_rot: 3.140411e6 },
            }],
            vec![(0, SupportFixity::Fixed), (1, SupportFixity::Fixed)],
            vec![DesignGroup { id: 0, label: "G1".into(), role: MemberRole::Beam, pool: vec![section] }],
            5.0,
        )
        .unwrap();
        let sized = SizedFrame::from_pool_indices(&frame, &[0]).unwrap();
        let mut case = LoadCase::new();
        case.add_member_load(0, 39_240.0);
        let result = assemble_and_solve(&sized, &case, 1.9994785350188252e11).unwrap();

        let s = sized.member_section(0);
        let factors = semirigid_factors(
            1.9994785350188252e11,
            s.moment_of_inertia_major,
            5.0,
            ConnectionModel::SemiRigid { k_rot: 3.140411e6 },
            ConnectionModel::SemiRigid { k_rot: 3.140411e6 },
        );
        let expect = fixed_end_forces(39_240.0, 5.0, &factors);
        for d in 0..6 {
            assert_relative_eq!(result.member_end_forces[0][d], expect[d], max_relative = 1e-10);
        }
        // Reactions carry the whole load.
        let total: f64 = result.reactions.iter().map(|(_, r)| r[1]).sum();
        assert_relative_eq!(total, 39_240.0 * 5.0, max_relative = 1e-12);
    }

    #[test]
    fn unstable_structure_names_failing_dof() {
        let cat = SectionCatalog::builtin();
        let section = cat.lookup("W8X21").unwrap().clone();
        // Two pinned-base columns with a pinned-pinned beam: a sway mechanism.
        let frame = Frame::new(
            vec![
                Node { id: 0, x: 0.0, y: 0.0 },
                Node { id: 1, x: 5.0, y: 0.0 },
                Node { id: 2, x: 0.0, y: 3.0 },
                Node { id: 3, x: 5.0, y: 3.0 },
            ],
            vec![
                Member {
                    id: 0,
                    node_a: 0,
                    node_b: 2,
                    role: MemberRole::Column,
                    group: 0,
                    end_connection_a: ConnectionModel::Pinned,
                    end_connection_b: ConnectionModel::Pinned,
                },
                Member {
                    id: 1,
                    node_a: 1,
                    node_b: 3,
                    role: MemberRole::Column,
                    group: 0,
                    end_connection_a: ConnectionModel::Pinned,
                    end_connection_b: ConnectionModel::Pinned,
                },
                Member {
                    id: 2,
                    node_a: 2,
                    node_b: 3,
                    role: MemberRole::Beam,
                    group: 0,
                    end_connection_a: ConnectionModel::Pinned,
                    end_connection_b: ConnectionModel::Pinned,
                },
            ],
            vec![(0, SupportFixity::Pinned), (1, SupportFixity::Pinned)],
            vec![DesignGroup { id: 0, label: "G1".into(), role: MemberRole::Beam, pool: vec![section] }],
            5.0,
        )
        .unwrap();
        let sized = SizedFrame::from_pool_indices(&frame, &[0]).unwrap();
        let mut case = LoadCase::new();
        case.add_nodal(2, 1000.0, 0.0, 0.0);
        let err = assemble_and_solve(&sized, &case, 2.059e11).unwrap_err();
        match err {
            Error::Singular { dof } => assert!(dof.contains("node"), "{dof}"),
            other => panic!("expected Singular, got {other}"),
        }
    }

    #[test]
    fn load_case_combination_is_linear() {
        let mut a = LoadCase::new();
        a.add_nodal(0, 10.0, -5.0, 2.0);
        a.add_member_load(0, 100.0);
        let mut b = LoadCase::new();
        b.add_nodal(0, 1.0, 1.0, 1.0);
        b.add_nodal(3, 7.0, 0.0, 0.0);
        let c = LoadCase::combine(&[(2.0, &a), (-1.0, &b)]);
        assert_eq!(c.nodal_forces[&0], [19.0, -11.0, 3.0]);
        assert_eq!(c.nodal_forces[&3], [-7.0, 0.0, 0.0]);
        assert_eq!(c.member_uniform_loads[&0], 200.0);
    }
}
