//! Hess f = 2(P + A_b) at critical points and the minimal-degeneracy audit.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::critical::CriticalComponent;
use super::gradient::{f_value, grad_f_at};
use crate::error::{Error, Result};
use crate::numerics::sorted_symmetric_eigen;
use crate::symmetric_space::SymmetricSpaceModel;
use crate::weyl_moment::tangent::fd_chart_hessian;
use crate::weyl_moment::{second_variation, FlagOrbit, OrbitPoint, TangentFrame};

/// Gradient bound for a point to count as critical.
pub const CRITICAL_TOL: f64 = 1e-7;
/// Finite-difference step for the Hessian oracle.
pub const FD_STEP: f64 = 1e-3;

/// Hess f at x₀ in an orthonormal basis vᵢ of T_{x₀}M.
#[derive(Clone, Debug)]
pub struct HessianData {
    pub frame: TangentFrame,
    /// 2(P + A_b).
    pub hessian: DMatrix<f64>,
    /// ⟨Pvᵢ, Pvⱼ⟩.
    pub projection: DMatrix<f64>,
    /// Shape operator A_b: ⟨b, ½([zᵢ,[zⱼ,x₀]] + [zⱼ,[zᵢ,x₀]])⟩.
    pub shape: DMatrix<f64>,
}

/// Assembles 2(P + A_b) at a critical point x₀ with μ(x₀) − a = b.
pub fn hessian_f(
    model: &SymmetricSpaceModel,
    x0: &OrbitPoint,
    a: &DVector<f64>,
    b: &DVector<f64>,
) -> Result<HessianData> {
    let g = grad_f_at(model, &x0.x, a).norm();
    if g > CRITICAL_TOL {
        return Err(Error::NotCritical(g));
    }
    let frame = TangentFrame::at(model, &x0.x);
    let n = frame.dim();
    let vs = frame.space.vectors();
    let bp = model.a_to_p(b);
    let projection = DMatrix::from_fn(n, n, |i, j| model.p_to_a(&vs[i]).dot(&model.p_to_a(&vs[j])));
    let shape = DMatrix::from_fn(n, n, |i, j| {
        bp.dot(&second_variation(model, &x0.x, &frame.lifts[i], &frame.lifts[j]))
    });
    let hessian = (&projection + &shape) * 2.0;
    Ok(HessianData {
        frame,
        hessian,
        projection,
        shape,
    })
}

/// ‖H_fd − H‖_max / max(‖H‖_max, 1) with H_fd the central-difference
/// Hessian of f in the exponential chart at x₀.
pub fn hessian_fd_error(model: &SymmetricSpaceModel, x0: &OrbitPoint, a: &DVector<f64>, data: &HessianData) -> f64 {
    let fd = fd_chart_hessian(model, &x0.x, &data.frame.lifts, FD_STEP, |y| f_value(model, y, a));
    (fd - &data.hessian).amax() / data.hessian.amax().max(1.0)
}

/// Per-component audit row.
#[derive(Clone, Debug, Serialize)]
pub struct AuditRow {
    pub b: Vec<f64>,
    pub w: usize,
    pub level: f64,
    pub f_value: f64,
    pub level_error: f64,
    pub index: usize,
    pub negative_eigenvalues: usize,
    pub hessian_rel_error: f64,
    /// Largest gap between the spectrum of A_b and {⟨b, η_α⟩ × m_α}.
    pub shape_spectrum_error: f64,
    /// dim V (negative space of A_b) and dim T Y (its complement).
    pub dim_v: usize,
    pub dim_ty: usize,
    pub tangent_dim: usize,
    /// Smallest eigenvalue of Hess f on T Y (should be ≥ 0).
    pub min_on_ty: f64,
    /// Largest eigenvalue of Hess f on V (should be < 0).
    pub max_on_v: f64,
    pub violations: Vec<String>,
}

/// Minimal-degeneracy audit over all resolved components.
#[derive(Clone, Debug, Serialize)]
pub struct DegeneracyAudit {
    pub rows: Vec<AuditRow>,
    /// Some nonminimal component has index < 2.
    pub codim2_violation: bool,
    /// Index 0 occurs exactly at b = 0.
    pub index_zero_only_at_minimum: bool,
    pub unresolved: usize,
    pub passed: bool,
}

fn restricted_eigs(h: &DMatrix<f64>, basis: &DMatrix<f64>) -> Vec<f64> {
    if basis.ncols() == 0 {
        return Vec::new();
    }
    sorted_symmetric_eigen(&(basis.transpose() * h * basis)).0
}

/// Audits one resolved component: index, Hessian oracle, level, A_b spectrum
/// and the sign pattern on T Y and V.
pub fn audit_component(fo: &FlagOrbit, a: &DVector<f64>, comp: &CriticalComponent) -> Result<AuditRow> {
    let m = &fo.model;
    let x0 = comp
        .representative
        .as_ref()
        .ok_or_else(|| Error::Numerical("component has no representative".into()))?;
    let b = comp.b_vector();
    let data = hessian_f(m, x0, a, &b)?;
    let n = data.frame.dim();
    let scale = data.hessian.amax().max(1e-12);
    let eig_tol = 1e-6 * scale.max(1.0);
    let (h_eigs, _) = sorted_symmetric_eigen(&data.hessian);
    let negative = h_eigs.iter().filter(|v| **v < -eig_tol).count();

    // V and T Y from the spectrum of A_b
    let (s_eigs, s_vecs) = sorted_symmetric_eigen(&data.shape);
    let v_cols: Vec<usize> = (0..n).filter(|&i| s_eigs[i] < -eig_tol).collect();
    let ty_cols: Vec<usize> = (0..n).filter(|&i| s_eigs[i] >= -eig_tol).collect();
    let pick = |cols: &[usize]| {
        DMatrix::from_columns(&cols.iter().map(|&i| s_vecs.column(i).into_owned()).collect::<Vec<_>>())
    };
    let (v_basis, ty_basis) = if n == 0 {
        (DMatrix::zeros(0, 0), DMatrix::zeros(0, 0))
    } else {
        (
            if v_cols.is_empty() { DMatrix::zeros(n, 0) } else { pick(&v_cols) },
            if ty_cols.is_empty() { DMatrix::zeros(n, 0) } else { pick(&ty_cols) },
        )
    };
    let on_v = restricted_eigs(&data.hessian, &v_basis);
    let on_ty = restricted_eigs(&data.hessian, &ty_basis);
    let max_on_v = on_v.last().cloned().unwrap_or(f64::NEG_INFINITY);
    let min_on_ty = on_ty.first().cloned().unwrap_or(f64::INFINITY);

    // predicted spectrum of A_b: ⟨b, η_α(y)⟩ = −α(b)/α(y), multiplicity m_α
    let y = fo.weyl.apply(comp.w, &fo.q);
    let mut predicted: Vec<f64> = Vec::new();
    for (_, r, mult) in fo.roots.indivisible_roots() {
        predicted.extend(std::iter::repeat_n(-r.value(&b) / r.value(&y), mult));
    }
    predicted.sort_by(|p, q| p.partial_cmp(q).unwrap());
    let shape_spectrum_error = if predicted.len() == s_eigs.len() {
        predicted.iter().zip(&s_eigs).map(|(p, s)| (p - s).abs()).fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };

    let f = f_value(m, &x0.x, a);
    let level_error = (f - comp.level).abs();
    let hessian_rel_error = hessian_fd_error(m, x0, a, &data);

    let mut violations = Vec::new();
    if negative != comp.index {
        violations.push(format!("negative eigenvalues {negative} != index {}", comp.index));
    }
    if hessian_rel_error > 1e-4 {
        violations.push(format!("Hessian finite-difference error {hessian_rel_error:.2e}"));
    }
    if level_error > 1e-8 {
        violations.push(format!("level error {level_error:.2e}"));
    }
    if shape_spectrum_error > 1e-6 * predicted.iter().fold(1.0f64, |m, v| m.max(v.abs())) {
        violations.push(format!("shape operator spectrum error {shape_spectrum_error:.2e}"));
    }
    if min_on_ty < -eig_tol {
        violations.push(format!("Hess f not semidefinite on T Y (min {min_on_ty:.2e})"));
    }
    if max_on_v >= -eig_tol && !v_cols.is_empty() {
        violations.push(format!("Hess f not negative definite on V (max {max_on_v:.2e})"));
    }
    if v_cols.len() != comp.index {
        violations.push(format!("dim V {} != index {}", v_cols.len(), comp.index));
    }

    Ok(AuditRow {
        b: comp.b.clone(),
        w: comp.w,
        level: comp.level,
        f_value: f,
        level_error,
        index: comp.index,
        negative_eigenvalues: negative,
        hessian_rel_error,
        shape_spectrum_error,
        dim_v: v_cols.len(),
        dim_ty: ty_cols.len(),
        tangent_dim: n,
        min_on_ty,
        max_on_v,
        violations,
    })
}

/// Runs [`audit_component`] on every resolved component and aggregates the
/// index-0 uniqueness and codimension-2 checks.
pub fn audit_minimal_degeneracy(
    fo: &FlagOrbit,
    a: &DVector<f64>,
    components: &[CriticalComponent],
) -> Result<DegeneracyAudit> {
    let mut rows = Vec::new();
    let mut unresolved = 0;
    for c in components {
        if c.representative.is_none() || c.residual > super::critical::REPRESENTATIVE_TOL {
            unresolved += 1;
            continue;
        }
        rows.push(audit_component(fo, a, c)?);
    }
    let codim2_violation = components.iter().any(|c| !c.is_minimum() && c.index < 2);
    let index_zero_only_at_minimum = components.iter().all(|c| (c.index == 0) == c.is_minimum());
    let passed = unresolved == 0 && index_zero_only_at_minimum && rows.iter().all(|r| r.violations.is_empty());
    Ok(DegeneracyAudit {
        rows,
        codim2_violation,
        index_zero_only_at_minimum,
        unresolved,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::morse::critical::{enumerate_critical_levels, resolve_critical_components, ResolveOptions};
    use crate::morse::descent::Hybrid;
    use crate::symmetric_space::build_catalog_model;

    fn audit(name: &str, params: &[i64], a: DVector<f64>) -> DegeneracyAudit {
        let fo = FlagOrbit::new(build_catalog_model(name, params).unwrap(), None).unwrap();
        let cands = enumerate_critical_levels(&fo, &a).unwrap();
        let comps = resolve_critical_components(&fo, &a, &cands, &Hybrid, &ResolveOptions::default()).unwrap();
        audit_minimal_degeneracy(&fo, &a, &comps).unwrap()
    }

    #[test]
    fn circle_hessian_matches_scalar_calculus() {
        // x = ±(cos θ, sin θ), f = (±cos θ − a)²; at θ = 0, f'' = −2(±1)(±1 − a)
        let fo = FlagOrbit::new(build_catalog_model("su2-over-so2", &[]).unwrap(), None).unwrap();
        let a = DVector::from_element(1, 0.3);
        for (w, sign) in [(0usize, 1.0f64), (1, -1.0)] {
            let x0 = fo.weyl_point(w);
            let b = DVector::from_element(1, sign - 0.3);
            let h = hessian_f(&fo.model, &x0, &a, &b).unwrap();
            assert_eq!(h.hessian.shape(), (1, 1));
            let expect = 2.0 * sign * (sign - 0.3);
            assert!((h.hessian[(0, 0)] + expect).abs() < 1e-9, "{} vs {}", h.hessian[(0, 0)], -expect);
        }
    }

    #[test]
    fn non_critical_point_is_rejected() {
        let fo = FlagOrbit::new(build_catalog_model("adjoint-su", &[3]).unwrap(), None).unwrap();
        let m = &fo.model;
        let x = crate::weyl_moment::orbit_point(m, &fo.q, &crate::weyl_moment::sample_direction(m, 1, 2));
        assert!(matches!(
            hessian_f(m, &x, &DVector::from_vec(vec![0.2, 0.1]), &DVector::zeros(2)),
            Err(Error::NotCritical(_))
        ));
    }

    #[test]
    fn circle_audit_flags_codim_two() {
        let r = audit("su2-over-so2", &[], DVector::from_element(1, 0.3));
        assert!(r.passed, "{r:?}");
        assert!(r.codim2_violation);
    }

    #[test]
    fn a2_and_cp2_audits_pass_without_codim_flag() {
        for (name, params, a) in [
            ("adjoint-su", vec![3], DVector::from_vec(vec![0.11, -0.07])),
            ("su3-over-u2", vec![], DVector::from_element(1, 0.2)),
            ("su2n-over-spn", vec![2], DVector::from_element(1, -0.35)),
        ] {
            let r = audit(name, &params, a);
            assert!(r.passed, "{name}: {r:#?}");
            assert!(!r.codim2_violation);
            assert!(r.index_zero_only_at_minimum);
        }
    }

    #[test]
    fn minimum_hessian_is_semidefinite() {
        let r = audit("adjoint-su", &[3], DVector::from_vec(vec![0.05, 0.2]));
        let min = r.rows.iter().find(|row| row.level < 1e-20).unwrap();
        assert_eq!(min.negative_eigenvalues, 0);
        assert!(min.min_on_ty > -1e-9);
    }

    #[test]
    fn grassmannian_audit_passes_where_plain_svd_misfactors_the_lift_map() {
        // At this target one representative has a lift map on which an
        // unchecked SVD returned factors off by ~3e-3.
        let fo = FlagOrbit::new(build_catalog_model("su(m+n)-over-s(u(m)xu(n))", &[3, 2]).unwrap(), None).unwrap();
        let a = crate::morse::fiber::interior_targets(&fo, 1, 1, 0.05).remove(0);
        let cands = enumerate_critical_levels(&fo, &a).unwrap();
        let opts = ResolveOptions {
            seed: 1,
            ..ResolveOptions::default()
        };
        let comps = resolve_critical_components(&fo, &a, &cands, &Hybrid, &opts).unwrap();
        let r = audit_minimal_degeneracy(&fo, &a, &comps).unwrap();
        assert!(r.passed, "{r:#?}");
        assert!(r.rows.iter().all(|row| row.hessian_rel_error <= 1e-4));
        for c in &comps {
            let x = c.representative.as_ref().unwrap();
            let frame = TangentFrame::at(&fo.model, &x.x);
            for (z, v) in frame.lifts.iter().zip(frame.space.vectors()) {
                assert!((fo.model.bracket_kp(z, &x.x) - v).norm() < 1e-12);
            }
        }
    }
}
