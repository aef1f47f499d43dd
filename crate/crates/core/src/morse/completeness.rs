//! Brute-force oracle for the critical-level enumeration: multistart
//! minimization of ‖grad f‖², compared against the enumerated levels.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use super::critical::enumerate_critical_levels;
use super::gradient::f_value;
use crate::error::Result;
use crate::symmetric_space::SymmetricSpaceModel;
use crate::weyl_moment::{orbit_point, sample_direction, FlagOrbit};

/// A run counts as converged once the chart gradient drops below this.
pub const GRAD_TOL: f64 = 1e-9;
/// Critical values farther than this from every enumerated level are failures.
pub const LEVEL_MATCH_TOL: f64 = 1e-6;
const MAX_ITER: usize = 200;

#[derive(Clone, Debug, Serialize)]
pub struct CompletenessRun {
    pub start: usize,
    pub converged: bool,
    pub grad_norm: f64,
    pub value: f64,
    pub nearest_level: f64,
    pub distance: f64,
    pub iterations: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct CompletenessReport {
    pub a: Vec<f64>,
    pub starts: usize,
    pub converged: usize,
    pub levels: Vec<f64>,
    /// Distinct critical values found (clustered at the match tolerance).
    pub found_levels: Vec<f64>,
    pub failures: Vec<CompletenessRun>,
    pub max_distance: f64,
    pub passed: bool,
}

/// r = 2Lᵀd: derivative of f along each basis direction of k, with L the
/// lift map at x and d = μ(x) − a in p-coordinates.
fn chart_gradient(model: &SymmetricSpaceModel, x: &DVector<f64>, a: &DVector<f64>) -> (DVector<f64>, DMatrix<f64>, DVector<f64>) {
    let l = model.lift_map(x);
    let d = model.a_to_p(&(model.p_to_a(x) - a));
    let r = l.transpose() * &d * 2.0;
    (r, l, d)
}

/// Jacobian of r with respect to x ← Ad(exp δz)·x at δz = 0:
/// 2(L_aᵀL_a + D·L), with row j of D equal to (ad(k_j)|_pᵀ d)ᵀ.
fn chart_jacobian(model: &SymmetricSpaceModel, l: &DMatrix<f64>, d: &DVector<f64>) -> DMatrix<f64> {
    let dk = model.dim_k();
    let la = l.rows(0, model.rank).into_owned();
    let dmat = DMatrix::from_fn(dk, model.dim_p(), |j, i| (model.ad_basis_on_p(j).transpose() * d)[i]);
    (la.transpose() * la + dmat * l) * 2.0
}

/// Levenberg–Marquardt on r(x) = 0 from the orbit point of sample `start`.
fn find_critical(fo: &FlagOrbit, a: &DVector<f64>, seed: u64, start: usize) -> (DVector<f64>, f64, usize) {
    let m = &fo.model;
    let mut x = orbit_point(m, &fo.q, &sample_direction(m, seed, start)).x;
    let (mut r, mut l, mut d) = chart_gradient(m, &x, a);
    let mut lambda = 1e-3;
    let mut it = 0;
    while it < MAX_ITER && r.norm() > GRAD_TOL {
        it += 1;
        let j = chart_jacobian(m, &l, &d);
        let jtj = j.transpose() * &j;
        let g = j.transpose() * &r;
        let mut accepted = false;
        for _ in 0..30 {
            let mut sys = jtj.clone();
            let scale = jtj.diagonal().amax().max(1e-12);
            for i in 0..sys.nrows() {
                sys[(i, i)] += lambda * scale;
            }
            let Some(step) = sys.cholesky().map(|c| c.solve(&(-&g))) else {
                lambda *= 10.0;
                continue;
            };
            let nx = m.ad_on_p(&step).exp() * &x;
            let (nr, nl, nd) = chart_gradient(m, &nx, a);
            if nr.norm() < r.norm() {
                x = nx;
                r = nr;
                l = nl;
                d = nd;
                lambda = (lambda * 0.3).max(1e-12);
                accepted = true;
                break;
            }
            lambda *= 10.0;
        }
        if !accepted {
            break;
        }
    }
    (x, r.norm(), it)
}

/// Runs `starts` critical-point searches of f = ‖μ − a‖² and checks each
/// converged critical value against the enumerated levels ‖b‖².
pub fn completeness_check(fo: &FlagOrbit, a: &DVector<f64>, starts: usize, seed: u64) -> Result<CompletenessReport> {
    let mut levels: Vec<f64> = enumerate_critical_levels(fo, a)?.iter().map(|c| c.level).collect();
    levels.sort_by(|p, q| p.partial_cmp(q).unwrap());
    levels.dedup_by(|p, q| (*p - *q).abs() <= LEVEL_MATCH_TOL);

    let runs: Vec<CompletenessRun> = (0..starts)
        .into_par_iter()
        .map(|s| {
            let (x, grad_norm, iterations) = find_critical(fo, a, seed, s);
            let value = f_value(&fo.model, &x, a);
            let (nearest_level, distance) = levels
                .iter()
                .map(|l| (*l, (l - value).abs()))
                .min_by(|p, q| p.1.partial_cmp(&q.1).unwrap())
                .unwrap_or((f64::NAN, f64::INFINITY));
            CompletenessRun {
                start: s,
                converged: grad_norm <= GRAD_TOL,
                grad_norm,
                value,
                nearest_level,
                distance,
                iterations,
            }
        })
        .collect();

    let conv: Vec<&CompletenessRun> = runs.iter().filter(|r| r.converged).collect();
    let mut found: Vec<f64> = conv.iter().map(|r| r.value).collect();
    found.sort_by(|p, q| p.partial_cmp(q).unwrap());
    found.dedup_by(|p, q| (*p - *q).abs() <= LEVEL_MATCH_TOL);
    let failures: Vec<CompletenessRun> = conv
        .iter()
        .filter(|r| r.distance > LEVEL_MATCH_TOL)
        .map(|r| (*r).clone())
        .collect();
    let max_distance = conv.iter().map(|r| r.distance).fold(0.0, f64::max);
    Ok(CompletenessReport {
        a: a.iter().cloned().collect(),
        starts,
        converged: conv.len(),
        levels,
        found_levels: found,
        passed: failures.is_empty() && !conv.is_empty(),
        failures,
        max_distance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symmetric_space::build_catalog_model;
    use crate::weyl_moment::tangent::fd_chart_gradient;

    #[test]
    fn jacobian_matches_finite_differences() {
        let fo = FlagOrbit::new(build_catalog_model("adjoint-su", &[3]).unwrap(), None).unwrap();
        let m = &fo.model;
        let a = DVector::from_vec(vec![0.2, -0.1]);
        let x = orbit_point(m, &fo.q, &sample_direction(m, 3, 4)).x;
        let (r, l, d) = chart_gradient(m, &x, &a);
        let j = chart_jacobian(m, &l, &d);
        let basis: Vec<DVector<f64>> = (0..m.dim_k()).map(|i| DVector::from_fn(m.dim_k(), |k, _| (k == i) as u8 as f64)).collect();
        let fd_r = fd_chart_gradient(m, &x, &basis, 1e-6, |y| f_value(m, y, &a));
        assert!((&fd_r - &r).amax() < 1e-6);
        let h = 1e-6;
        for k in 0..m.dim_k() {
            let xp = m.ad_on_p(&(&basis[k] * h)).exp() * &x;
            let xm = m.ad_on_p(&(&basis[k] * -h)).exp() * &x;
            let col = (chart_gradient(m, &xp, &a).0 - chart_gradient(m, &xm, &a).0) / (2.0 * h);
            assert!((col - j.column(k)).amax() < 1e-5, "column {k}");
        }
    }

    #[test]
    fn circle_and_a2_levels_are_complete() {
        for (name, params, a) in [
            ("su2-over-so2", vec![], DVector::from_element(1, 0.3)),
            ("adjoint-su", vec![3], DVector::from_vec(vec![0.13, -0.21])),
        ] {
            let fo = FlagOrbit::new(build_catalog_model(name, &params).unwrap(), None).unwrap();
            let r = completeness_check(&fo, &a, 60, 5).unwrap();
            assert!(r.passed, "{name}: {r:#?}");
            assert!(r.converged >= 50, "{name}: {} converged", r.converged);
            assert!(r.found_levels.len() >= 2);
        }
    }
}
