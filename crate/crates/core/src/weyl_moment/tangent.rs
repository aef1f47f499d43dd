//! Tangent spaces of the orbit and second-order data in the exponential chart
//! t ↦ Ad(exp Σ tᵢ zᵢ)·x.

use nalgebra::{DMatrix, DVector};

use crate::numerics::{checked_svd, pseudo_inverse, Subspace};
use crate::symmetric_space::SymmetricSpaceModel;

/// T_xM = [k, x] with orthonormal basis vᵢ and minimal-norm lifts zᵢ ∈ k,
/// [zᵢ, x] = vᵢ.
#[derive(Clone, Debug)]
pub struct TangentFrame {
    pub space: Subspace,
    pub lifts: Vec<DVector<f64>>,
    /// Pseudo-inverse of z ↦ [z, x]; maps p to minimal-norm lifts.
    pub lift_pinv: DMatrix<f64>,
}

impl TangentFrame {
    pub fn at(model: &SymmetricSpaceModel, x: &DVector<f64>) -> Self {
        // One SVD gives both the range basis and its lifts, so [zᵢ, x] = vᵢ
        // holds to rounding; Gram-Schmidt on the raw columns can admit noise
        // directions when columns are nearly dependent.
        let l = model.lift_map(x);
        let lift_pinv = pseudo_inverse(&l, 1e-9);
        let svd = checked_svd(&l);
        let (u, v_t) = (svd.u.expect("requested U"), svd.v_t.expect("requested V^T"));
        let cut = 1e-9 * svd.singular_values.iter().cloned().fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        let mut vs = Vec::new();
        let mut lifts = Vec::new();
        for (i, s) in svd.singular_values.iter().enumerate() {
            if *s > cut {
                vs.push(u.column(i).into_owned());
                lifts.push(v_t.row(i).transpose() / *s);
            }
        }
        let space = Subspace::from_columns(x.len(), &vs);
        TangentFrame {
            space,
            lifts,
            lift_pinv,
        }
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    /// Minimal-norm z with [z, x] = P_T v.
    pub fn lift(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.lift_pinv * v
    }
}

/// ½([zi, [zj, x]] + [zj, [zi, x]]): the second derivative of the chart at 0.
pub fn second_variation(
    model: &SymmetricSpaceModel,
    x: &DVector<f64>,
    zi: &DVector<f64>,
    zj: &DVector<f64>,
) -> DVector<f64> {
    let a = model.bracket_kp(zi, &model.bracket_kp(zj, x));
    let b = model.bracket_kp(zj, &model.bracket_kp(zi, x));
    (a + b) * 0.5
}

/// Point Ad(exp Σ tᵢ zᵢ)·x of the chart.
pub fn chart_point(model: &SymmetricSpaceModel, x: &DVector<f64>, zs: &[DVector<f64>], t: &[f64]) -> DVector<f64> {
    let mut z = DVector::zeros(model.dim_k());
    for (zi, ti) in zs.iter().zip(t) {
        z += zi * *ti;
    }
    model.ad_on_p(&z).exp() * x
}

/// Central finite-difference Hessian of g(t) = f(chart(t)) at t = 0.
pub fn fd_chart_hessian(
    model: &SymmetricSpaceModel,
    x: &DVector<f64>,
    zs: &[DVector<f64>],
    h: f64,
    f: impl Fn(&DVector<f64>) -> f64,
) -> DMatrix<f64> {
    let n = zs.len();
    let eval = |i: usize, si: f64, j: usize, sj: f64| {
        let mut t = vec![0.0; n];
        t[i] += si * h;
        t[j] += sj * h;
        f(&chart_point(model, x, zs, &t))
    };
    let mut hess = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = (eval(i, 1.0, j, 1.0) - eval(i, 1.0, j, -1.0) - eval(i, -1.0, j, 1.0)
                + eval(i, -1.0, j, -1.0))
                / (4.0 * h * h);
            hess[(i, j)] = v;
            hess[(j, i)] = v;
        }
    }
    hess
}

/// Central finite-difference gradient of g(t) = f(chart(t)) at t = 0.
pub fn fd_chart_gradient(
    model: &SymmetricSpaceModel,
    x: &DVector<f64>,
    zs: &[DVector<f64>],
    h: f64,
    f: impl Fn(&DVector<f64>) -> f64,
) -> DVector<f64> {
    let n = zs.len();
    DVector::from_fn(n, |i, _| {
        let mut t = vec![0.0; n];
        t[i] = h;
        let plus = f(&chart_point(model, x, zs, &t));
        t[i] = -h;
        let minus = f(&chart_point(model, x, zs, &t));
        (plus - minus) / (2.0 * h)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symmetric_space::{build_catalog_model, restricted_roots};
    use crate::weyl_moment::orbit::{default_q, sample_direction};

    #[test]
    fn tangent_dimension_is_orbit_dimension() {
        for (name, params) in [("adjoint-su", vec![3]), ("su3-over-u2", vec![]), ("su2n-over-spn", vec![2])] {
            let m = build_catalog_model(name, &params).unwrap();
            let rs = restricted_roots(&m).unwrap();
            let q = m.a_to_p(&default_q(&rs));
            let x = m.ad_on_p(&sample_direction(&m, 1, 3)).exp() * q;
            let frame = TangentFrame::at(&m, &x);
            assert_eq!(frame.dim(), m.orbit_dim(), "{name}");
            for (v, z) in frame.space.vectors().iter().zip(&frame.lifts) {
                assert!((m.bracket_kp(z, &x) - v).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn fd_hessian_of_linear_function_matches_second_variation() {
        let m = build_catalog_model("adjoint-su", &[3]).unwrap();
        let rs = restricted_roots(&m).unwrap();
        let x = m.a_to_p(&default_q(&rs));
        let frame = TangentFrame::at(&m, &x);
        let xi = DVector::from_fn(m.dim_p(), |i, _| (i as f64 * 0.37).sin());
        let fd = fd_chart_hessian(&m, &x, &frame.lifts, 1e-3, |y| xi.dot(y));
        for i in 0..frame.dim() {
            for j in 0..frame.dim() {
                let exact = xi.dot(&second_variation(&m, &x, &frame.lifts[i], &frame.lifts[j]));
                assert!((fd[(i, j)] - exact).abs() < 1e-6);
            }
        }
    }
}
