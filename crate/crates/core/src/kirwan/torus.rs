use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::numerics::{gaussian_vector, kernel, stream_rng, CMatrix, Subspace};
use crate::symmetric_space::{RestrictedRootSystem, SymmetricSpaceModel};
use crate::weyl_moment::{orbit_point, sample_direction, OrbitPoint, WeylGroup};

/// Kernel and commutation tolerance.
pub const TORUS_TOL: f64 = 1e-9;
/// Generic samples drawn from G_b before giving up.
pub const WITNESS_ATTEMPTS: u64 = 5;

/// Σ k_α over positive roots α (k_2α included) with α(b) = 0.
pub fn vanishing_root_space(model: &SymmetricSpaceModel, roots: &RestrictedRootSystem, b: &DVector<f64>) -> Subspace {
    let vecs: Vec<DVector<f64>> = roots
        .roots
        .iter()
        .filter(|r| r.value(b).abs() <= 1e-9 * r.alpha_dual.norm() * b.norm().max(1.0))
        .flat_map(|r| r.k_space.vectors())
        .collect();
    Subspace::orthonormalize(model.dim_k(), &vecs, 1e-8).expect("root spaces live in k")
}

/// k₀^⊥ ∩ k = Σ_α k_α.
pub fn root_part(model: &SymmetricSpaceModel, roots: &RestrictedRootSystem) -> Subspace {
    let vecs: Vec<DVector<f64>> = roots.roots.iter().flat_map(|r| r.k_space.vectors()).collect();
    Subspace::orthonormalize(model.dim_k(), &vecs, 1e-8).expect("root spaces live in k")
}

/// ker(ad_Z) on a subspace S of k that ad_Z preserves, as a subspace of k.
fn kernel_on(model: &SymmetricSpaceModel, z: &DVector<f64>, s: &Subspace) -> Subspace {
    if s.dim() == 0 {
        return Subspace::zero(model.dim_k());
    }
    let scale = z.norm().max(1.0);
    let map = model.ad_on_k(&(z / scale)) * s.basis();
    let ker = kernel(&map, 1e-8);
    Subspace::from_matrix_columns(&(s.basis() * ker.basis()), 1e-8)
}

/// Admissible generators G_b = {Z ∈ k₀ : [Z, k_α] = 0 whenever α(b) = 0}.
pub fn admissible_generators(model: &SymmetricSpaceModel, roots: &RestrictedRootSystem, target: &Subspace) -> Subspace {
    let k0 = &roots.k0;
    let dk = model.dim_k();
    if k0.dim() == 0 || target.dim() == 0 {
        return k0.clone();
    }
    let tv = target.vectors();
    let k0v = k0.vectors();
    // column i: ([e_i, v_1]; …; [e_i, v_t]) for the k₀ basis vector e_i
    let mut m = DMatrix::zeros(dk * tv.len(), k0v.len());
    for (i, e) in k0v.iter().enumerate() {
        let ad = model.ad_on_k(e);
        for (j, v) in tv.iter().enumerate() {
            m.view_mut((j * dk, i), (dk, 1)).copy_from(&(&ad * v));
        }
    }
    let ker = kernel(&m, 1e-10);
    Subspace::from_matrix_columns(&(k0.basis() * ker.basis()), 1e-8)
}

/// Z ∈ k₀ generating a torus T = closure{exp(tZ)} whose fixed set on the
/// root part of k is exactly Σ_{α(b)=0} k_α.
#[derive(Clone, Debug, Serialize)]
pub struct TorusWitness {
    /// Generator in k-coordinates.
    pub generator: Vec<f64>,
    /// Dimension of ker(ad_Z) on all of k (includes the centralizer of Z in k₀).
    pub fixed_dim: usize,
    /// Dimension of ker(ad_Z) on Σ_α k_α; equals `target_dim`.
    pub fixed_root_dim: usize,
    /// dim Σ_{α(b)=0} k_α.
    pub target_dim: usize,
    /// dim Z_k(b) = dim k₀ + target_dim.
    pub centralizer_dim: usize,
    /// max ‖[Z, v]‖ over an orthonormal basis of the target.
    pub commutation_residual: f64,
    pub attempts: u64,
}

impl TorusWitness {
    pub fn generator_vector(&self) -> DVector<f64> {
        DVector::from_vec(self.generator.clone())
    }

    /// The generator as a matrix in the ambient su(N).
    pub fn matrix(&self, model: &SymmetricSpaceModel) -> CMatrix {
        model.k_matrix(&self.generator_vector())
    }
}

/// Certificate that no torus in K₀ has the required fixed set: a subspace
/// of Σ_{α(b)≠0} k_α annihilated by every admissible generator.
#[derive(Clone, Debug, Serialize)]
pub struct TorusObstruction {
    pub admissible_dim: usize,
    pub excess_dim: usize,
    /// Orthonormal basis of the excess subspace in k-coordinates.
    #[serde(skip)]
    pub excess: Subspace,
    /// max ‖[Z_i, e]‖ over a basis Z_i of G_b and e of the excess.
    pub annihilation_residual: f64,
    /// For each non-vanishing root (by slot in the positive root list), the
    /// dimension of its k-space inside the excess.
    pub excess_by_root: Vec<(usize, usize)>,
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TorusOutcome {
    Witness(TorusWitness),
    Obstruction(TorusObstruction),
    Undecided { attempts: u64, reason: String },
}

impl TorusOutcome {
    pub fn label(&self) -> &'static str {
        match self {
            TorusOutcome::Witness(_) => "witness found",
            TorusOutcome::Obstruction(_) => "impossible",
            TorusOutcome::Undecided { .. } => "undecided",
        }
    }
}

/// Searches G_b for a torus generator with fixed set Σ_{α(b)=0} k_α on the
/// root part of k; otherwise certifies an obstruction or reports undecided.
pub fn find_torus_witness(
    model: &SymmetricSpaceModel,
    roots: &RestrictedRootSystem,
    b: &DVector<f64>,
    seed: u64,
) -> Result<TorusOutcome> {
    let target = vanishing_root_space(model, roots, b);
    let all = root_part(model, roots);
    let gb = admissible_generators(model, roots, &target);

    // common kernel over a basis of G_b
    let mut common = all.clone();
    for z in gb.vectors() {
        common = common.intersection(&kernel_on(model, &z, &all), 1e-8)?;
    }
    if common.dim() > target.dim() {
        let excess = common.relative_complement(&target)?;
        let mut residual: f64 = 0.0;
        for z in gb.vectors() {
            let ad = model.ad_on_k(&z);
            for e in excess.vectors() {
                residual = residual.max((&ad * e).norm());
            }
        }
        let excess_by_root = roots
            .roots
            .iter()
            .enumerate()
            .filter_map(|(i, r)| {
                let d = r.k_space.intersection(&excess, 1e-8).map(|s| s.dim()).unwrap_or(0);
                (d > 0).then_some((i, d))
            })
            .collect();
        return Ok(TorusOutcome::Obstruction(TorusObstruction {
            admissible_dim: gb.dim(),
            excess_dim: excess.dim(),
            excess,
            annihilation_residual: residual,
            excess_by_root,
        }));
    }

    for attempt in 1..=WITNESS_ATTEMPTS {
        let z = if gb.dim() == 0 {
            DVector::zeros(model.dim_k())
        } else {
            gb.basis() * gaussian_vector(&mut stream_rng(seed, attempt), gb.dim(), 1.0)
        };
        let fixed_root = kernel_on(model, &z, &all);
        if fixed_root.dim() == target.dim() && target.contains_subspace(&fixed_root, 1e-8)? {
            let ad = model.ad_on_k(&z);
            let commutation_residual = target.vectors().iter().map(|v| (&ad * v).norm()).fold(0.0, f64::max);
            let fixed_all = kernel_on(model, &z, &Subspace::full(model.dim_k()));
            return Ok(TorusOutcome::Witness(TorusWitness {
                generator: z.iter().cloned().collect(),
                fixed_dim: fixed_all.dim(),
                fixed_root_dim: fixed_root.dim(),
                target_dim: target.dim(),
                centralizer_dim: roots.k0.dim() + target.dim(),
                commutation_residual,
                attempts: attempt,
            }));
        }
    }
    Ok(TorusOutcome::Undecided {
        attempts: WITNESS_ATTEMPTS,
        reason: format!(
            "common kernel of G_b equals the target (dim {}) but {WITNESS_ATTEMPTS} generic generators had larger kernels",
            target.dim()
        ),
    })
}

/// Agreement between "fixed by exp(tZ)" and "lies in Z_p(b)" on orbit points.
#[derive(Clone, Debug, Serialize)]
pub struct FixedPointReport {
    pub samples: usize,
    pub fixed: usize,
    pub in_centralizer: usize,
    pub agreements: usize,
    /// Largest ‖grad h_b‖ over fixed samples.
    pub max_grad_on_fixed: f64,
    /// Smallest displacement over samples that were not fixed.
    pub min_motion_on_moved: f64,
    pub passed: bool,
}

/// Times at which Ad(exp(tZ)) is applied, for unit-norm Z.
const T_GRID: [f64; 4] = [0.37, 1.0, 2.3, 5.1];
const FIXED_TOL: f64 = 1e-6;

/// Checks on M that the fixed points of the witness torus are M ∩ Z_p(b).
/// Half of the samples are random orbit points; the other half are drawn
/// from Crit(h_b) as Ad(exp z)·wq with z ∈ Z_k(b).
pub fn check_fixed_points_on_m(
    model: &SymmetricSpaceModel,
    weyl: &WeylGroup,
    witness: &TorusWitness,
    b: &DVector<f64>,
    q: &DVector<f64>,
    samples: usize,
    seed: u64,
) -> FixedPointReport {
    let z = witness.generator_vector();
    let z = if z.norm() > 0.0 { &z / z.norm() } else { z };
    let bp = model.a_to_p(b);
    let zk_b = crate::symmetric_space::centralizer_in_k(model, b);
    let flows: Vec<DMatrix<f64>> = T_GRID.iter().map(|t| model.ad_on_p(&(&z * *t)).exp()).collect();

    let rows: Vec<(bool, bool, f64, f64)> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let x: OrbitPoint = if i % 2 == 0 {
                orbit_point(model, q, &sample_direction(model, seed, i))
            } else {
                let y = weyl.apply((i / 2) % weyl.order(), q);
                let c = gaussian_vector(&mut stream_rng(seed ^ 0x5eed, i as u64), zk_b.dim(), 1.0);
                orbit_point(model, &y, &(zk_b.basis() * c))
            };
            let motion = flows.iter().map(|f| (f * &x.x - &x.x).norm()).fold(0.0, f64::max);
            // [b, x] = 0 iff ⟨b, [k, x]⟩ = 0, i.e. grad h_b(x) = 0
            let grad = (model.lift_map(&x.x).transpose() * &bp).norm();
            (motion <= FIXED_TOL, grad <= FIXED_TOL, grad, motion)
        })
        .collect();

    let fixed = rows.iter().filter(|r| r.0).count();
    let in_centralizer = rows.iter().filter(|r| r.1).count();
    let agreements = rows.iter().filter(|r| r.0 == r.1).count();
    let max_grad_on_fixed = rows.iter().filter(|r| r.0).map(|r| r.2).fold(0.0, f64::max);
    let min_motion_on_moved = rows.iter().filter(|r| !r.0).map(|r| r.3).fold(f64::INFINITY, f64::min);
    FixedPointReport {
        samples,
        fixed,
        in_centralizer,
        agreements,
        max_grad_on_fixed,
        min_motion_on_moved,
        passed: agreements == samples,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symmetric_space::{build_catalog_model, restricted_roots};
    use crate::weyl_moment::FlagOrbit;

    fn setup(name: &str, params: &[i64]) -> FlagOrbit {
        FlagOrbit::new(build_catalog_model(name, params).unwrap(), None).unwrap()
    }

    #[test]
    fn quaternionic_regular_b_has_a_witness() {
        let fo = setup("su2n-over-spn", &[2]);
        let out = find_torus_witness(&fo.model, &fo.roots, &fo.q, 1).unwrap();
        let TorusOutcome::Witness(w) = out else { panic!("{out:?}") };
        assert_eq!(w.fixed_root_dim, 0);
        assert_eq!(w.target_dim, 0);
        assert!(w.commutation_residual <= TORUS_TOL);
    }

    #[test]
    fn cp2_regular_b_is_obstructed_by_the_double_root() {
        let fo = setup("su3-over-u2", &[]);
        let out = find_torus_witness(&fo.model, &fo.roots, &fo.q, 1).unwrap();
        let TorusOutcome::Obstruction(o) = out else { panic!("{out:?}") };
        assert!(o.annihilation_residual <= TORUS_TOL);
        let double = fo.roots.doubles[0].expect("CP² has a double root");
        let k2a = &fo.roots.roots[double].k_space;
        assert!(o.excess.contains_subspace(k2a, 1e-8).unwrap());
        assert!(o.excess_by_root.iter().any(|(i, d)| *i == double && *d == k2a.dim()));
    }

    #[test]
    fn zero_b_is_trivially_witnessed() {
        for (name, params) in [("su3-over-u2", vec![]), ("adjoint-su", vec![3])] {
            let fo = setup(name, &params);
            let zero = DVector::zeros(fo.model.rank);
            let out = find_torus_witness(&fo.model, &fo.roots, &zero, 1).unwrap();
            let TorusOutcome::Witness(w) = out else { panic!("{out:?}") };
            assert_eq!(w.centralizer_dim, fo.model.dim_k());
        }
    }

    #[test]
    fn fixed_points_of_the_witness_are_critical_for_h_b() {
        let fo = setup("su2n-over-spn", &[2]);
        let TorusOutcome::Witness(w) = find_torus_witness(&fo.model, &fo.roots, &fo.q, 3).unwrap() else {
            panic!()
        };
        let r = check_fixed_points_on_m(&fo.model, &fo.weyl, &w, &fo.q, &fo.q, 40, 9);
        assert!(r.passed, "{r:?}");
        // the odd samples lie in Crit(h_b), and sample 0 is q itself
        assert_eq!(r.fixed, 21);
        assert!(r.max_grad_on_fixed <= 1e-6);
        assert!(r.min_motion_on_moved > 1e-6);
    }

    #[test]
    fn admissible_generators_commute_with_the_target() {
        let m = build_catalog_model("adjoint-su", &[4]).unwrap();
        let roots = restricted_roots(&m).unwrap();
        let b = DVector::from_vec(vec![1.0, 0.0, 0.0]);
        let target = vanishing_root_space(&m, &roots, &b);
        let gb = admissible_generators(&m, &roots, &target);
        assert!(gb.dim() <= roots.k0.dim());
        for z in gb.vectors() {
            let ad = m.ad_on_k(&z);
            for v in target.vectors() {
                assert!((&ad * v).norm() <= 1e-9);
            }
        }
    }
}
