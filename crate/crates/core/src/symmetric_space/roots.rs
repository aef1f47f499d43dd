use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::model::SymmetricSpaceModel;
use crate::error::{Error, Result};
use crate::numerics::{cluster_sorted, kernel, sorted_symmetric_eigen, stream_rng, Subspace};

/// Eigenvalue clustering tolerance for the restricted-root decomposition.
pub const ROOT_CLUSTER_TOL: f64 = 1e-7;
/// Residual bound for the joint eigenspace relation.
pub const ROOT_RELATION_TOL: f64 = 1e-8;

/// A positive restricted root α with α(x) = ⟨alpha_dual, x⟩ on a.
///
/// `k_space` lives in k-coordinates, `p_space` in p-coordinates.
#[derive(Clone, Debug)]
pub struct RestrictedRoot {
    pub alpha_dual: DVector<f64>,
    pub k_space: Subspace,
    pub p_space: Subspace,
    pub is_positive: bool,
}

impl RestrictedRoot {
    pub fn value(&self, x: &DVector<f64>) -> f64 {
        self.alpha_dual.dot(x)
    }
}

#[derive(Clone, Debug)]
pub struct RestrictedRootSystem {
    pub rank: usize,
    /// Positive roots, sorted lexicographically by dual vector.
    pub roots: Vec<RestrictedRoot>,
    /// Centralizer of a in k, in k-coordinates.
    pub k0: Subspace,
    /// Indices of indivisible positive roots.
    pub indivisible: Vec<usize>,
    /// For each indivisible root, the index of 2α when it is a root.
    pub doubles: Vec<Option<usize>>,
    /// m_α = dim k_α + dim k_2α for each indivisible root.
    pub multiplicities: Vec<usize>,
    /// Generic element of a fixing the positive chamber.
    pub generic: DVector<f64>,
}

/// Summary row for catalog listings.
#[derive(Clone, Debug, Serialize)]
pub struct RootSummary {
    pub alpha_dual: Vec<f64>,
    pub dim_k_alpha: usize,
    pub dim_p_alpha: usize,
    pub multiplicity: usize,
    pub has_double: bool,
}

impl RestrictedRootSystem {
    /// Indivisible positive roots with their multiplicities.
    pub fn indivisible_roots(&self) -> impl Iterator<Item = (usize, &RestrictedRoot, usize)> {
        self.indivisible
            .iter()
            .zip(self.multiplicities.iter())
            .map(move |(&i, &m)| (i, &self.roots[i], m))
    }

    pub fn indivisible_duals(&self) -> Vec<DVector<f64>> {
        self.indivisible.iter().map(|&i| self.roots[i].alpha_dual.clone()).collect()
    }

    /// All roots ±α as dual vectors.
    pub fn all_duals(&self) -> Vec<DVector<f64>> {
        self.roots
            .iter()
            .flat_map(|r| [r.alpha_dual.clone(), -r.alpha_dual.clone()])
            .collect()
    }

    pub fn min_multiplicity(&self) -> usize {
        self.multiplicities.iter().cloned().min().unwrap_or(0)
    }

    /// Whether no root vanishes at `x` (relative tolerance).
    pub fn is_regular(&self, x: &DVector<f64>, tol: f64) -> bool {
        self.indivisible_roots()
            .all(|(_, r, _)| r.value(x).abs() > tol * r.alpha_dual.norm() * x.norm().max(1e-300))
    }

    pub fn summaries(&self) -> Vec<RootSummary> {
        self.indivisible_roots()
            .enumerate()
            .map(|(slot, (_, r, m))| RootSummary {
                alpha_dual: r.alpha_dual.iter().map(|v| round(*v)).collect(),
                dim_k_alpha: r.k_space.dim(),
                dim_p_alpha: r.p_space.dim(),
                multiplicity: m,
                has_double: self.doubles[slot].is_some(),
            })
            .collect()
    }

    /// Dynkin-type label of the root system, e.g. "A2" or "BC1".
    pub fn root_type(&self) -> String {
        classify(self)
    }
}

fn round(v: f64) -> f64 {
    (v * 1e12).round() / 1e12
}

fn choose_generic(model: &SymmetricSpaceModel) -> (DVector<f64>, Vec<f64>, DMatrix<f64>) {
    let r = model.rank;
    let mut best: Option<(f64, DVector<f64>, Vec<f64>, DMatrix<f64>)> = None;
    for attempt in 0..8 {
        let mut rng = stream_rng(0x7007_5eed, attempt);
        let mut x = crate::numerics::gaussian_vector(&mut rng, r, 1.0);
        x /= x.norm();
        let ad = model.ad_p_on_g(&model.a_to_p(&x));
        let s = ad.transpose() * &ad;
        let (vals, vecs) = sorted_symmetric_eigen(&s);
        let clusters = cluster_sorted(&vals, ROOT_CLUSTER_TOL);
        let reps: Vec<f64> = clusters.iter().map(|c| vals[c.start]).collect();
        let gap = reps
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min);
        let gap = gap.min(reps.iter().cloned().filter(|v| *v > ROOT_CLUSTER_TOL).fold(f64::INFINITY, f64::min));
        if best.as_ref().is_none_or(|b| gap > b.0) {
            best = Some((gap, x, vals, vecs));
        }
    }
    let (_, x, vals, vecs) = best.expect("at least one attempt");
    (x, vals, vecs)
}

/// Simultaneous eigen-decomposition of {ad(x) : x ∈ a} on g.
///
/// In compact form ad(x) is skew, so each root α appears as the joint
/// eigenspace k_α ⊕ p_α of −ad(x)² with eigenvalue α(x)²; signs are fixed
/// by a generic element x₀ (α positive iff α(x₀) > 0).
pub fn restricted_roots(model: &SymmetricSpaceModel) -> Result<RestrictedRootSystem> {
    let dk = model.dim_k();
    let dp = model.dim_p();
    let r = model.rank;
    if r == 0 {
        return Err(Error::EmptyInput("a has rank zero"));
    }
    let (x0, vals, vecs) = choose_generic(model);
    let ad_x0 = model.ad_p_on_g(&model.a_to_p(&x0));
    let ad_basis: Vec<DMatrix<f64>> = (0..r)
        .map(|i| {
            let mut e = DVector::zeros(r);
            e[i] = 1.0;
            model.ad_p_on_g(&model.a_to_p(&e))
        })
        .collect();

    let mut roots = Vec::new();
    let mut k0 = None;
    for cl in cluster_sorted(&vals, ROOT_CLUSTER_TOL) {
        let v = vecs.columns(cl.start, cl.len()).into_owned();
        let lambda = vals[cl.clone()].iter().sum::<f64>() / cl.len() as f64;
        let k_part = Subspace::from_matrix_columns(&v.rows(0, dk).into_owned(), 1e-6);
        let p_part = Subspace::from_matrix_columns(&v.rows(dk, dp).into_owned(), 1e-6);
        if lambda <= ROOT_CLUSTER_TOL {
            if p_part.dim() != r {
                return Err(Error::NotMaximalAbelian {
                    found: p_part.dim(),
                    rank: r,
                });
            }
            k0 = Some(k_part);
            continue;
        }
        let a0 = lambda.sqrt();
        let mut dual = DVector::zeros(r);
        for i in 0..r {
            let c = (ad_x0.transpose() * &ad_basis[i] + ad_basis[i].transpose() * &ad_x0) * 0.5;
            let t = (v.transpose() * c * &v).trace() / cl.len() as f64;
            dual[i] = t / a0;
        }
        // joint-eigenspace residual
        for i in 0..r {
            let s = ad_basis[i].transpose() * &ad_basis[i];
            let resid = (&s * &v - &v * dual[i].powi(2)).amax();
            if resid > ROOT_RELATION_TOL * (1.0 + s.amax()) {
                return Err(Error::Numerical(format!(
                    "restricted root decomposition not simultaneous (residual {resid:.3e})"
                )));
            }
        }
        if k_part.dim() != p_part.dim() || 2 * k_part.dim() != cl.len() {
            return Err(Error::Numerical(format!(
                "root space split mismatch: dim k_α = {}, dim p_α = {}",
                k_part.dim(),
                p_part.dim()
            )));
        }
        roots.push(RestrictedRoot {
            alpha_dual: dual,
            k_space: k_part,
            p_space: p_part,
            is_positive: true,
        });
    }
    let k0 = k0.unwrap_or_else(|| Subspace::zero(dk));
    if roots.is_empty() {
        return Err(Error::EmptyInput("no restricted roots (a is central)"));
    }
    roots.sort_by(|a, b| {
        for i in 0..r {
            let (x, y) = (round(a.alpha_dual[i]), round(b.alpha_dual[i]));
            if x != y {
                return y.partial_cmp(&x).unwrap();
            }
        }
        std::cmp::Ordering::Equal
    });

    let matches = |u: &DVector<f64>, v: &DVector<f64>| {
        (u - v).norm() <= ROOT_CLUSTER_TOL * 10.0 * v.norm().max(1.0)
    };
    let mut indivisible = Vec::new();
    let mut doubles = Vec::new();
    let mut multiplicities = Vec::new();
    for (i, root) in roots.iter().enumerate() {
        let half = &root.alpha_dual * 0.5;
        if roots.iter().any(|o| matches(&o.alpha_dual, &half)) {
            continue;
        }
        let twice = &root.alpha_dual * 2.0;
        let dbl = roots.iter().position(|o| matches(&o.alpha_dual, &twice));
        indivisible.push(i);
        multiplicities.push(root.k_space.dim() + dbl.map_or(0, |j| roots[j].k_space.dim()));
        doubles.push(dbl);
    }

    // Dimension bookkeeping: p = a ⊕ Σ p_α, k = k₀ ⊕ Σ k_α.
    let sum_p: usize = roots.iter().map(|x| x.p_space.dim()).sum();
    let sum_k: usize = roots.iter().map(|x| x.k_space.dim()).sum();
    if r + sum_p != dp || k0.dim() + sum_k != dk {
        return Err(Error::Numerical(format!(
            "root decomposition dimensions do not add up: p {dp} vs {}, k {dk} vs {}",
            r + sum_p,
            k0.dim() + sum_k
        )));
    }

    Ok(RestrictedRootSystem {
        rank: r,
        roots,
        k0,
        indivisible,
        doubles,
        multiplicities,
        generic: x0,
    })
}

/// The element z_p = ad(x₀)z / α(x₀) paired with z ∈ k_α, so that
/// [x, z] = α(x) z_p and [x, z_p] = −α(x) z for all x ∈ a. This is the
/// compact-form rendering of the root relation [x, w] = α(x) w.
pub fn root_partner(
    model: &SymmetricSpaceModel,
    roots: &RestrictedRootSystem,
    root: &RestrictedRoot,
    z: &DVector<f64>,
) -> DVector<f64> {
    let x0 = model.a_to_p(&roots.generic);
    let a0 = root.value(&roots.generic);
    let bracket = model.bracket_kp(z, &x0);
    // [x₀, z] = −[z, x₀]
    -bracket / a0
}

/// Maximum of ‖[x, z] − α(x) z_p‖ and ‖[x, z_p] + α(x) z‖ over the a-basis
/// and an orthonormal basis of each k_α.
pub fn root_relation_residual(model: &SymmetricSpaceModel, roots: &RestrictedRootSystem) -> f64 {
    let dk = model.dim_k();
    let mut worst: f64 = 0.0;
    for root in &roots.roots {
        for z in root.k_space.vectors() {
            let zp = root_partner(model, roots, root, &z);
            for i in 0..model.rank {
                let mut e = DVector::zeros(model.rank);
                e[i] = 1.0;
                let x = model.a_to_p(&e);
                let ax = root.value(&e);
                // [x, z] = −[z, x] in p
                let xz = -model.bracket_kp(&z, &x);
                worst = worst.max((xz - &zp * ax).norm());
                // [x, z_p] ∈ k: coordinates via ad(x) on g
                let ad = model.ad_p_on_g(&x);
                let mut g = DVector::zeros(model.dim_g());
                g.rows_mut(dk, model.dim_p()).copy_from(&zp);
                let xzp = (ad * g).rows(0, dk).into_owned();
                worst = worst.max((xzp + &z * ax).norm());
            }
        }
    }
    worst
}

/// Z_k(b) = {z ∈ k : [z, b] = 0} computed as a kernel, b in a-coordinates.
pub fn centralizer_in_k(model: &SymmetricSpaceModel, b: &DVector<f64>) -> Subspace {
    let bp = model.a_to_p(b);
    kernel(&model.lift_map(&bp), 1e-9)
}

/// k₀ + Σ_{α(b)=0} k_α (including k_2α) assembled from root spaces.
pub fn centralizer_from_roots(roots: &RestrictedRootSystem, b: &DVector<f64>, tol: f64) -> Subspace {
    let mut vecs = roots.k0.vectors();
    for r in &roots.roots {
        if r.value(b).abs() <= tol * r.alpha_dual.norm() {
            vecs.extend(r.k_space.vectors());
        }
    }
    Subspace::orthonormalize(roots.k0.ambient_dim(), &vecs, 1e-8).expect("consistent lengths")
}

/// Lie algebra k₀ of K₀ = Z_K(a) as the intersection of centralizers over a basis.
pub fn centralizer_lie_k0(model: &SymmetricSpaceModel) -> Subspace {
    let dk = model.dim_k();
    let dp = model.dim_p();
    let mut stacked = DMatrix::zeros(dp * model.rank, dk);
    for i in 0..model.rank {
        let mut e = DVector::zeros(model.rank);
        e[i] = 1.0;
        stacked
            .view_mut((i * dp, 0), (dp, dk))
            .copy_from(&model.lift_map(&model.a_to_p(&e)));
    }
    kernel(&stacked, 1e-9)
}

// ---- Dynkin classification of the indivisible subsystem --------------------

fn classify(sys: &RestrictedRootSystem) -> String {
    let duals = sys.indivisible_duals();
    let tol = 1e-6;
    // simple roots: positive indivisible roots that are not sums of two others
    let simple: Vec<usize> = (0..duals.len())
        .filter(|&i| {
            !(0..duals.len()).any(|j| {
                (0..duals.len()).any(|k| {
                    j != i && k != i && (&duals[j] + &duals[k] - &duals[i]).norm() < tol
                })
            })
        })
        .collect();
    let n = simple.len();
    // connected components of the Dynkin graph
    let mut comp = vec![usize::MAX; n];
    let mut ncomp = 0;
    for s in 0..n {
        if comp[s] != usize::MAX {
            continue;
        }
        let mut stack = vec![s];
        comp[s] = ncomp;
        while let Some(u) = stack.pop() {
            for v in 0..n {
                if comp[v] == usize::MAX && duals[simple[u]].dot(&duals[simple[v]]).abs() > tol {
                    comp[v] = ncomp;
                    stack.push(v);
                }
            }
        }
        ncomp += 1;
    }
    let mut labels = Vec::new();
    for c in 0..ncomp {
        let members: Vec<usize> = (0..n).filter(|&s| comp[s] == c).map(|s| simple[s]).collect();
        let rank = members.len();
        // positive indivisible roots in the span of this component
        let span = Subspace::orthonormalize(sys.rank, &members.iter().map(|&i| duals[i].clone()).collect::<Vec<_>>(), 1e-9)
            .expect("consistent");
        let in_comp: Vec<usize> = (0..duals.len())
            .filter(|&i| span.contains_vector(&duals[i], 1e-8).unwrap_or(false))
            .collect();
        let has_double = in_comp.iter().any(|&i| sys.doubles[i].is_some());
        let count = in_comp.len();
        let lens: Vec<f64> = members.iter().map(|&i| duals[i].norm_squared()).collect();
        let max_len = lens.iter().cloned().fold(0.0, f64::max);
        let short = lens.iter().filter(|l| **l < max_len * (1.0 - 1e-6)).count();
        let label = if has_double {
            format!("BC{rank}")
        } else if count == rank * (rank + 1) / 2 && short == 0 {
            format!("A{rank}")
        } else if rank == 2 && count == 6 {
            "G2".to_string()
        } else if count == rank * rank {
            if rank == 4 && short == 2 {
                "F4".to_string()
            } else if short == 1 || rank == 2 {
                format!("B{rank}")
            } else {
                format!("C{rank}")
            }
        } else if count == rank * (rank - 1) {
            format!("D{rank}")
        } else if rank == 6 && count == 36 {
            "E6".into()
        } else if rank == 7 && count == 63 {
            "E7".into()
        } else if rank == 8 && count == 120 {
            "E8".into()
        } else {
            format!("rank{rank}-{count}roots")
        };
        labels.push(label);
    }
    labels.sort();
    labels.join("+")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symmetric_space::catalog::build_catalog_model;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn su4_over_sp2_has_one_root_of_multiplicity_four() {
        let m = build_catalog_model("su2n-over-spn", &[2]).unwrap();
        let rs = restricted_roots(&m).unwrap();
        assert_eq!(rs.indivisible.len(), 1);
        assert_eq!(rs.roots[rs.indivisible[0]].k_space.dim(), 4);
        assert_eq!(rs.multiplicities, vec![4]);
        assert_eq!(rs.root_type(), "A1");
        assert_eq!(rs.k0.dim(), 6);
    }

    #[test]
    fn su6_over_sp3_is_a2_with_multiplicity_four() {
        let m = build_catalog_model("su2n-over-spn", &[3]).unwrap();
        let rs = restricted_roots(&m).unwrap();
        assert_eq!(rs.multiplicities, vec![4, 4, 4]);
        assert_eq!(rs.root_type(), "A2");
        assert_eq!(rs.k0.dim(), 9);
    }

    #[test]
    fn cp2_has_roots_alpha_and_two_alpha() {
        let m = build_catalog_model("su3-over-u2", &[]).unwrap();
        let rs = restricted_roots(&m).unwrap();
        assert_eq!(rs.roots.len(), 2);
        assert_eq!(rs.indivisible.len(), 1);
        let ind = &rs.roots[rs.indivisible[0]];
        let dbl = &rs.roots[rs.doubles[0].unwrap()];
        assert_eq!(ind.p_space.dim(), 2);
        assert_eq!(dbl.p_space.dim(), 1);
        assert!((&dbl.alpha_dual - &ind.alpha_dual * 2.0).norm() < 1e-9);
        assert_eq!(rs.multiplicities, vec![3]);
        assert_eq!(rs.root_type(), "BC1");
        assert_eq!(rs.k0.dim(), 1);
    }

    #[test]
    fn circle_has_multiplicity_one() {
        let m = build_catalog_model("su2-over-so2", &[]).unwrap();
        let rs = restricted_roots(&m).unwrap();
        assert_eq!(rs.multiplicities, vec![1]);
        assert_eq!(rs.k0.dim(), 0);
    }

    #[test]
    fn adjoint_su2_is_a1_with_multiplicity_two() {
        // brute force: eigenspaces of −ad(h)² for the single a-basis element
        let m = build_catalog_model("adjoint-su", &[2]).unwrap();
        let h = m.a_to_p(&DVector::from_element(1, 1.0));
        let ad = m.ad_p_on_g(&h);
        let (vals, _) = sorted_symmetric_eigen(&(ad.transpose() * &ad));
        let nonzero = vals.iter().filter(|v| **v > 1e-9).count();
        assert_eq!(nonzero, 4); // k_α ⊕ p_α with dim k_α = 2
        let rs = restricted_roots(&m).unwrap();
        assert_eq!(rs.multiplicities, vec![2]);
        assert_eq!(rs.root_type(), "A1");
    }

    #[test]
    fn grassmannian_is_bc2() {
        let m = build_catalog_model("grassmannian", &[3, 2]).unwrap();
        let rs = restricted_roots(&m).unwrap();
        assert_eq!(rs.root_type(), "BC2");
        let mut ms = rs.multiplicities.clone();
        ms.sort();
        // e_i: 2(m−n) + 1 = 3; e_i ± e_j: 2
        assert_eq!(ms, vec![2, 2, 3, 3]);
    }

    #[test]
    fn root_relation_holds_on_catalog() {
        for (name, params) in [
            ("adjoint-su", vec![3]),
            ("su2n-over-spn", vec![2]),
            ("su3-over-u2", vec![]),
            ("su2-over-so2", vec![]),
        ] {
            let m = build_catalog_model(name, &params).unwrap();
            let rs = restricted_roots(&m).unwrap();
            assert!(root_relation_residual(&m, &rs) < 1e-8, "{name}");
        }
    }

    #[test]
    fn centralizer_kernel_matches_root_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for (name, params) in [
            ("adjoint-su", vec![3]),
            ("su2n-over-spn", vec![3]),
            ("su3-over-u2", vec![]),
            ("grassmannian", vec![3, 2]),
        ] {
            let m = build_catalog_model(name, &params).unwrap();
            let rs = restricted_roots(&m).unwrap();
            for _ in 0..50 {
                let b = crate::numerics::gaussian_vector(&mut rng, m.rank, 1.0);
                let ker = centralizer_in_k(&m, &b);
                let formula = centralizer_from_roots(&rs, &b, 1e-9);
                assert!(ker.same_as(&formula, 1e-9).unwrap(), "{name}");
                assert!(ker.same_as(&rs.k0, 1e-9).unwrap());
            }
            // zero: all of k
            assert_eq!(centralizer_in_k(&m, &DVector::zeros(m.rank)).dim(), m.dim_k());
            // exactly one wall: pick b ⟂ α♯ for one indivisible root
            if m.rank >= 2 {
                let alpha = &rs.roots[rs.indivisible[0]].alpha_dual;
                let g = crate::numerics::gaussian_vector(&mut rng, m.rank, 1.0);
                let b = &g - alpha * (g.dot(alpha) / alpha.norm_squared());
                let ker = centralizer_in_k(&m, &b);
                let formula = centralizer_from_roots(&rs, &b, 1e-9);
                assert!(ker.same_as(&formula, 1e-9).unwrap());
                let expect = rs.k0.dim()
                    + rs.roots.iter().filter(|r| r.value(&b).abs() < 1e-9).map(|r| r.k_space.dim()).sum::<usize>();
                assert_eq!(ker.dim(), expect);
                assert!(ker.dim() > rs.k0.dim());
            }
        }
    }

    #[test]
    fn k0_by_intersection_matches_zero_weight_space() {
        for (name, params, dim) in [
            ("su2n-over-spn", vec![2], 6),
            ("su3-over-u2", vec![], 1),
            ("adjoint-su", vec![2], 1),
        ] {
            let m = build_catalog_model(name, &params).unwrap();
            let rs = restricted_roots(&m).unwrap();
            let k0 = centralizer_lie_k0(&m);
            assert_eq!(k0.dim(), dim, "{name}");
            assert!(k0.same_as(&rs.k0, 1e-9).unwrap());
        }
    }
}
