use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::tangent::{fd_chart_hessian, second_variation};
use crate::error::{Error, Result};
use crate::numerics::{gaussian_vector, stream_rng, Subspace};
use crate::symmetric_space::{RestrictedRoot, RestrictedRootSystem, SymmetricSpaceModel};

/// Relative tolerance used to decide that q lies on a root wall.
pub const REGULARITY_TOL: f64 = 1e-8;

/// Curvature normal η_α = −α♯/α(q) of the curvature distribution
/// E_α(q) = [q, k_α + k_2α] of rank m_α.
#[derive(Clone, Debug)]
pub struct CurvatureNormal {
    /// Index of the indivisible root in `roots.roots`.
    pub root_index: usize,
    pub root: RestrictedRoot,
    pub eta: DVector<f64>,
    pub multiplicity: usize,
    /// k_α ⊕ k_2α in k-coordinates; E_α(x) = [x, this] at x = q.
    pub lift_space: Subspace,
}

impl CurvatureNormal {
    /// The focal hyperplane {q + ξ : ⟨η, ξ⟩ = 1} as (normal, offset) in a:
    /// ⟨η, y⟩ = 1 + ⟨η, q⟩.
    pub fn focal_hyperplane(&self, q: &DVector<f64>) -> (DVector<f64>, f64) {
        (self.eta.clone(), 1.0 + self.eta.dot(q))
    }
}

/// Errors with `NonRegular` when some root vanishes at q.
pub fn check_regular(roots: &RestrictedRootSystem, q: &DVector<f64>) -> Result<()> {
    for (slot, (_, r, _)) in roots.indivisible_roots().enumerate() {
        let v = r.value(q);
        if v.abs() <= REGULARITY_TOL * r.alpha_dual.norm() * q.norm().max(1e-300) {
            return Err(Error::NonRegular { root: slot, value: v });
        }
    }
    Ok(())
}

/// One curvature normal per indivisible positive root; the normal of 2α
/// coincides with that of α, so the two distributions are merged.
pub fn curvature_normals(
    _model: &SymmetricSpaceModel,
    roots: &RestrictedRootSystem,
    q: &DVector<f64>,
) -> Result<Vec<CurvatureNormal>> {
    check_regular(roots, q)?;
    let mut out = Vec::new();
    for (slot, (i, root, m)) in roots.indivisible_roots().enumerate() {
        let mut vecs = root.k_space.vectors();
        if let Some(d) = roots.doubles[slot] {
            vecs.extend(roots.roots[d].k_space.vectors());
        }
        let lift_space = Subspace::orthonormalize(root.k_space.ambient_dim(), &vecs, 1e-9)?;
        out.push(CurvatureNormal {
            root_index: i,
            root: root.clone(),
            eta: -&root.alpha_dual / root.value(q),
            multiplicity: m,
            lift_space,
        });
    }
    Ok(out)
}

/// Curvature normal of an arbitrary (possibly divisible) root: −β♯/β(q).
pub fn normal_of_root(root: &RestrictedRoot, q: &DVector<f64>) -> DVector<f64> {
    -&root.alpha_dual / root.value(q)
}

/// Outcome of the finite-difference shape-operator oracle.
#[derive(Clone, Debug, Serialize)]
pub struct ShapeOperatorCheck {
    pub trials: usize,
    /// Σ m_α compared with dim M.
    pub tangent_dim: usize,
    pub orbit_dim: usize,
    /// max over trials of ‖A_fd − A_pred‖_max / max |⟨ξ, η_α⟩|.
    pub max_rel_error: f64,
    /// Analytic second fundamental form against the finite-difference one.
    pub max_analytic_rel_error: f64,
}

impl ShapeOperatorCheck {
    pub fn passed(&self, tol: f64) -> bool {
        self.tangent_dim == self.orbit_dim && self.max_rel_error <= tol
    }
}

/// Compares A_ξ, computed from finite differences of the height function
/// h_ξ(x) = ⟨ξ, x⟩ in the exponential chart at q, with the predicted
/// block-scalar operator ⟨ξ, η_α⟩·id on each E_α(q), for `trials` random
/// normals ξ ∈ a.
pub fn shape_operator_check(
    model: &SymmetricSpaceModel,
    normals: &[CurvatureNormal],
    q: &DVector<f64>,
    trials: usize,
    seed: u64,
) -> Result<ShapeOperatorCheck> {
    let qp = model.a_to_p(q);
    let mut zs = Vec::new();
    let mut owner = Vec::new();
    for (n, cn) in normals.iter().enumerate() {
        for z in cn.lift_space.vectors() {
            zs.push(z);
            owner.push(n);
        }
    }
    let dim = zs.len();
    let vs: Vec<DVector<f64>> = zs.iter().map(|z| model.bracket_kp(z, &qp)).collect();
    let gram = DMatrix::from_fn(dim, dim, |i, j| vs[i].dot(&vs[j]));
    let gram_inv = gram
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Numerical("tangent vectors [q, k_α] are dependent".into()))?;
    let h = 1e-3 / q.norm().max(1e-12).sqrt();
    let mut worst: f64 = 0.0;
    let mut worst_analytic: f64 = 0.0;
    for t in 0..trials {
        let xi_a = gaussian_vector(&mut stream_rng(seed, t as u64), model.rank, 1.0);
        let xi = model.a_to_p(&xi_a);
        let s_fd = fd_chart_hessian(model, &qp, &zs, h, |y| xi.dot(y));
        let s_exact = DMatrix::from_fn(dim, dim, |i, j| xi.dot(&second_variation(model, &qp, &zs[i], &zs[j])));
        let scale_s = s_exact.amax().max(1e-300);
        worst_analytic = worst_analytic.max((&s_fd - &s_exact).amax() / scale_s);
        let a_fd = &gram_inv * s_fd;
        let lambdas: Vec<f64> = normals.iter().map(|n| xi_a.dot(&n.eta)).collect();
        let pred = DMatrix::from_fn(dim, dim, |i, j| if i == j { lambdas[owner[i]] } else { 0.0 });
        let scale = lambdas.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
        worst = worst.max((a_fd - pred).amax() / scale);
    }
    Ok(ShapeOperatorCheck {
        trials,
        tangent_dim: dim,
        orbit_dim: model.orbit_dim(),
        max_rel_error: worst,
        max_analytic_rel_error: worst_analytic,
    })
}

/// Largest discrepancy between the focal hyperplane ⟨η_α, ξ⟩ = 1 in q + a
/// and the wall {y : α(y) = 0}, tested on random points of each.
pub fn focal_residual(normals: &[CurvatureNormal], q: &DVector<f64>, samples: usize, seed: u64) -> f64 {
    let r = q.len();
    let mut worst: f64 = 0.0;
    for (n, cn) in normals.iter().enumerate() {
        let alpha = &cn.root.alpha_dual;
        for s in 0..samples {
            let g = gaussian_vector(&mut stream_rng(seed ^ ((n as u64) << 32), s as u64), r, 1.0);
            // y on the wall ⇒ ξ = y − q satisfies ⟨η, ξ⟩ = 1
            let y = &g - alpha * (g.dot(alpha) / alpha.norm_squared());
            worst = worst.max((cn.eta.dot(&(&y - q)) - 1.0).abs());
            // ξ with ⟨η, ξ⟩ = 1 ⇒ α(q + ξ) = 0
            let xi = &g - &cn.eta * ((cn.eta.dot(&g) - 1.0) / cn.eta.norm_squared());
            worst = worst.max((q + xi).dot(alpha).abs() / alpha.norm());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symmetric_space::{build_catalog_model, restricted_roots};
    use crate::weyl_moment::orbit::default_q;

    #[test]
    fn adjoint_su2_normal_matches_closed_form() {
        let m = build_catalog_model("adjoint-su", &[2]).unwrap();
        let rs = restricted_roots(&m).unwrap();
        let q = DVector::from_element(1, 0.8);
        let ns = curvature_normals(&m, &rs, &q).unwrap();
        assert_eq!(ns.len(), 1);
        let alpha = &rs.roots[0].alpha_dual;
        let c = alpha.dot(&q);
        assert!((&ns[0].eta + alpha / c).norm() < 1e-12);
        let chk = shape_operator_check(&m, &ns, &q, 20, 1).unwrap();
        assert!(chk.passed(1e-4), "{chk:?}");
    }

    #[test]
    fn double_root_shares_the_normal() {
        let m = build_catalog_model("su3-over-u2", &[]).unwrap();
        let rs = restricted_roots(&m).unwrap();
        let q = default_q(&rs);
        let ns = curvature_normals(&m, &rs, &q).unwrap();
        assert_eq!(ns.len(), 1);
        assert_eq!(ns[0].multiplicity, 3);
        let dbl = &rs.roots[rs.doubles[0].unwrap()];
        let eta2 = normal_of_root(dbl, &q);
        assert!((&eta2 - &ns[0].eta).norm() < 1e-12);
        // collinear with α♯
        let a = &ns[0].root.alpha_dual;
        assert!((ns[0].eta.dot(a).abs() - ns[0].eta.norm() * a.norm()).abs() < 1e-12);
        assert!(shape_operator_check(&m, &ns, &q, 20, 2).unwrap().passed(1e-4));
    }

    #[test]
    fn eta_dot_q_is_minus_one() {
        for (name, params) in [("adjoint-su", vec![3]), ("grassmannian", vec![3, 2]), ("su2n-over-spn", vec![3])] {
            let m = build_catalog_model(name, &params).unwrap();
            let rs = restricted_roots(&m).unwrap();
            let q = default_q(&rs);
            for n in curvature_normals(&m, &rs, &q).unwrap() {
                assert!((n.eta.dot(&q) + 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn focal_hyperplanes_are_root_walls() {
        let m = build_catalog_model("adjoint-su", &[3]).unwrap();
        let rs = restricted_roots(&m).unwrap();
        let q = default_q(&rs);
        let ns = curvature_normals(&m, &rs, &q).unwrap();
        assert!(focal_residual(&ns, &q, 20, 4) < 1e-8);
    }

    #[test]
    fn wall_point_is_rejected() {
        let m = build_catalog_model("adjoint-su", &[3]).unwrap();
        let rs = restricted_roots(&m).unwrap();
        let a = &rs.roots[rs.indivisible[0]].alpha_dual;
        let q = DVector::from_vec(vec![-a[1], a[0]]);
        assert!(matches!(curvature_normals(&m, &rs, &q), Err(Error::NonRegular { .. })));
    }
}
