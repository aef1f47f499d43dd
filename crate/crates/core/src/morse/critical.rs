//! Critical levels and critical components of f = ‖μ − a‖².
//!
//! A point x is critical for f iff it is critical for the height function
//! h_b with b = μ(x) − a, i.e. x ∈ M ∩ Z_p(b). The critical set of h_b is the
//! union of the K_b-orbits through the points y = w·q, and μ maps such an
//! orbit onto cvx(W_b·y) with W_b the stabilizer of b. So (b, y) contributes
//! exactly when c = a + b lies in cvx(W_b·y) and ⟨b, y⟩ = ⟨b, c⟩.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use super::descent::{DescentProblem, DescentStrategy};
use super::gradient::grad_f;
use crate::error::Result;
use crate::numerics::{convex_hull, gaussian_vector, kernel, stream_rng, GEOM_TOL};
use crate::symmetric_space::{centralizer_in_k, RestrictedRootSystem};
use crate::weyl_moment::{moment_map, orbit_of_subgroup, sample_direction, FlagOrbit, OrbitPoint};

/// Merge distance for candidate b vectors.
pub const B_DEDUP_TOL: f64 = 1e-8;
/// Convergence threshold for component representatives.
pub const REPRESENTATIVE_TOL: f64 = 1e-7;
/// Largest number of indivisible roots for which all wall subsets are listed.
const MAX_SUBSET_ROOTS: usize = 20;

/// An intersection of root walls ℓ_I = ∩_{i∈I} ker α_i, recorded by the
/// closed set I of all indivisible roots vanishing on it.
#[derive(Clone, Debug)]
pub struct Flat {
    /// Bit i set iff indivisible root slot i vanishes on the flat.
    pub mask: u64,
    pub space: crate::numerics::Subspace,
}

/// All distinct flats, from a itself (mask 0) down to {0}.
pub fn root_flats(roots: &RestrictedRootSystem) -> Vec<Flat> {
    let duals = roots.indivisible_duals();
    let n = duals.len().min(MAX_SUBSET_ROOTS);
    let r = roots.rank;
    let mut out: Vec<Flat> = Vec::new();
    for subset in 0u64..(1u64 << n) {
        let rows: Vec<usize> = (0..n).filter(|i| subset >> i & 1 == 1).collect();
        let space = if rows.is_empty() {
            crate::numerics::Subspace::full(r)
        } else {
            let m = DMatrix::from_fn(rows.len(), r, |i, j| duals[rows[i]][j]);
            kernel(&m, 1e-10)
        };
        let vecs = space.vectors();
        let mask = (0..duals.len())
            .filter(|&i| vecs.iter().all(|v| v.dot(&duals[i]).abs() <= 1e-9 * duals[i].norm()))
            .fold(0u64, |m, i| m | (1 << i));
        if !out.iter().any(|f| f.mask == mask) {
            out.push(Flat { mask, space });
        }
    }
    out.sort_by_key(|f| (f.mask.count_ones(), f.mask));
    out
}

/// A candidate critical level: b with the flat and orbit point producing it.
#[derive(Clone, Debug, Serialize)]
pub struct LevelCandidate {
    pub b: Vec<f64>,
    pub level: f64,
    /// Roots vanishing on the flat that produced the candidate.
    pub flat_mask: u64,
    /// Weyl element w with y = w·q.
    pub weyl_element: usize,
}

impl LevelCandidate {
    pub fn b_vector(&self) -> DVector<f64> {
        DVector::from_vec(self.b.clone())
    }
}

/// For each flat ℓ and each y ∈ W·q, the unique point c of
/// (a + ℓ) ∩ (P_ℓ y + ℓ^⊥) is kept when it lies in cvx(W_ℓ·y); the candidate
/// is b = c − a. Candidates within 1e-8 are merged; b = 0 appears iff a lies
/// in the moment polytope.
pub fn enumerate_critical_levels(fo: &FlagOrbit, a: &DVector<f64>) -> Result<Vec<LevelCandidate>> {
    let w = &fo.weyl;
    let (orbit, producers) = orbit_of_subgroup(w, &(0..w.order()).collect::<Vec<_>>(), &fo.q);
    let mut out: Vec<LevelCandidate> = Vec::new();
    for flat in root_flats(&fo.roots) {
        let stab = w.pointwise_stabilizer(&flat.space);
        for (y, &wi) in orbit.iter().zip(&producers) {
            let py = flat.space.project(y)?;
            let pa = flat.space.project(a)?;
            let c = py + (a - pa);
            let (sub_orbit, _) = orbit_of_subgroup(w, &stab, y);
            let hull = convex_hull(&sub_orbit, GEOM_TOL)?;
            if !hull.contains(&c, 1e-9 * fo.q.norm().max(1.0))? {
                continue;
            }
            let b = &c - a;
            if out.iter().any(|o| (o.b_vector() - &b).norm() <= B_DEDUP_TOL) {
                continue;
            }
            out.push(LevelCandidate {
                level: b.norm_squared(),
                b: b.iter().cloned().collect(),
                flat_mask: flat.mask,
                weyl_element: wi,
            });
        }
    }
    sort_by_level(&mut out, |c| (c.level, c.b.clone()));
    Ok(out)
}

fn sort_by_level<T>(v: &mut [T], key: impl Fn(&T) -> (f64, Vec<f64>)) {
    v.sort_by(|x, y| {
        let (lx, bx) = key(x);
        let (ly, by) = key(y);
        lx.partial_cmp(&ly)
            .unwrap()
            .then_with(|| bx.partial_cmp(&by).unwrap_or(std::cmp::Ordering::Equal))
    });
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ComponentStatus {
    Resolved,
    /// The level is present but the descent did not reach tolerance.
    LevelPresentRepresentativeUnresolved,
}

/// C_{b,w} = μ⁻¹(a + b) ∩ S_{wq,b}.
#[derive(Clone, Debug, Serialize)]
pub struct CriticalComponent {
    pub b: Vec<f64>,
    /// Weyl element w (index into W) and its word in the generators.
    pub w: usize,
    pub w_word: Vec<usize>,
    pub level: f64,
    #[serde(skip)]
    pub representative: Option<OrbitPoint>,
    /// μ(x₀) of the representative.
    pub representative_moment: Option<Vec<f64>>,
    /// Σ m_α over roots with ⟨b, η_α⟩ < 0.
    pub index: usize,
    /// Indivisible root slots with α(b) = 0.
    pub active_roots: Vec<usize>,
    /// dim of the slice K_b·(w q) = Σ_{α(b)=0} m_α.
    pub slice_dim: usize,
    /// ‖μ(x₀) − (a + b)‖.
    pub residual: f64,
    /// ‖grad f(x₀)‖.
    pub grad_norm: f64,
    /// |h_b(x₀) − h_b(w q)|: slice membership certificate.
    pub height_defect: f64,
    pub status: ComponentStatus,
}

impl CriticalComponent {
    pub fn b_vector(&self) -> DVector<f64> {
        DVector::from_vec(self.b.clone())
    }

    pub fn is_minimum(&self) -> bool {
        self.b.iter().all(|v| v.abs() <= B_DEDUP_TOL)
    }
}

/// Index of C_{b,w} through y: Σ m_α over indivisible α with
/// ⟨b, η_α(y)⟩ = −α(b)/α(y) < 0.
pub fn morse_index(fo: &FlagOrbit, b: &DVector<f64>, y: &DVector<f64>) -> usize {
    fo.roots
        .indivisible_roots()
        .filter(|(_, r, _)| {
            let ab = r.value(b);
            ab.abs() > 1e-9 * r.alpha_dual.norm() * b.norm().max(1e-300) && ab / r.value(y) > 0.0
        })
        .map(|(_, _, m)| m)
        .sum()
}

fn active_roots(fo: &FlagOrbit, b: &DVector<f64>) -> Vec<usize> {
    fo.roots
        .indivisible_roots()
        .enumerate()
        .filter(|(_, (_, r, _))| r.value(b).abs() <= 1e-9 * r.alpha_dual.norm() * b.norm().max(1.0))
        .map(|(s, _)| s)
        .collect()
}

/// Settings for resolving component representatives.
#[derive(Clone, Copy, Debug)]
pub struct ResolveOptions {
    pub seed: u64,
    pub attempts: usize,
    pub tol: f64,
}

impl Default for ResolveOptions {
    fn default() -> Self {
        ResolveOptions {
            seed: 0x5eed,
            attempts: 6,
            tol: REPRESENTATIVE_TOL,
        }
    }
}

fn finish_component(
    fo: &FlagOrbit,
    a: &DVector<f64>,
    b: &DVector<f64>,
    w: usize,
    rep: Option<OrbitPoint>,
    tol: f64,
) -> CriticalComponent {
    let m = &fo.model;
    let y = fo.weyl.apply(w, &fo.q);
    let c = a + b;
    let act = active_roots(fo, b);
    let slice_dim = fo
        .roots
        .indivisible_roots()
        .enumerate()
        .filter(|(s, _)| act.contains(s))
        .map(|(_, (_, _, mm))| mm)
        .sum();
    let (residual, grad_norm, height_defect, moment) = match &rep {
        Some(x) => {
            let mu = moment_map(m, x);
            (
                (&mu - &c).norm(),
                grad_f(m, x, a).norm(),
                (b.dot(&mu) - b.dot(&y)).abs(),
                Some(mu.iter().cloned().collect()),
            )
        }
        None => (f64::INFINITY, f64::INFINITY, f64::INFINITY, None),
    };
    let status = if rep.is_some() && residual <= tol {
        ComponentStatus::Resolved
    } else {
        ComponentStatus::LevelPresentRepresentativeUnresolved
    };
    CriticalComponent {
        b: b.iter().cloned().collect(),
        w,
        w_word: fo.weyl.elements[w].word.clone(),
        level: b.norm_squared(),
        representative: rep,
        representative_moment: moment,
        index: if b.norm() <= B_DEDUP_TOL { 0 } else { morse_index(fo, b, &y) },
        active_roots: act,
        slice_dim,
        residual,
        grad_norm,
        height_defect,
        status,
    }
}

/// Descends ‖μ(x) − target‖² over the subgroup generated by `directions`,
/// starting near `start`; returns the best point found.
fn resolve_point(
    fo: &FlagOrbit,
    start: &OrbitPoint,
    target: &DVector<f64>,
    directions: &crate::numerics::Subspace,
    strategy: &dyn DescentStrategy,
    opts: &ResolveOptions,
    stream: u64,
) -> Option<OrbitPoint> {
    let m = &fo.model;
    let problem = DescentProblem::new(m, target.clone())
        .with_directions(directions.clone())
        .with_tol(opts.tol)
        .with_polish(true)
        .with_max_iter(800);
    let mut best: Option<(f64, OrbitPoint)> = None;
    for attempt in 0..opts.attempts {
        let mut rng = stream_rng(opts.seed ^ stream.wrapping_mul(0x9e37_79b9), attempt as u64);
        let t = gaussian_vector(&mut rng, directions.dim(), 0.6);
        let p0 = start.moved(m, &(directions.basis() * t));
        let out = strategy.minimize(m, &problem, &p0);
        if best.as_ref().is_none_or(|(r, _)| out.residual < *r) {
            best = Some((out.residual, out.point));
        }
        if best.as_ref().is_some_and(|(r, _)| *r <= opts.tol) {
            break;
        }
    }
    best.map(|(_, p)| p)
}

/// Builds every critical component C_{b,w} from the candidate levels.
pub fn resolve_critical_components(
    fo: &FlagOrbit,
    a: &DVector<f64>,
    candidates: &[LevelCandidate],
    strategy: &dyn DescentStrategy,
    opts: &ResolveOptions,
) -> Result<Vec<CriticalComponent>> {
    let m = &fo.model;
    let w = &fo.weyl;
    let (orbit, producers) = orbit_of_subgroup(w, &(0..w.order()).collect::<Vec<_>>(), &fo.q);

    // (b, w) jobs, one per W_b-orbit of qualifying points y
    let mut jobs: Vec<(DVector<f64>, usize)> = Vec::new();
    for cand in candidates {
        let b = cand.b_vector();
        if b.norm() <= B_DEDUP_TOL {
            jobs.push((DVector::zeros(m.rank), 0));
            continue;
        }
        let c = a + &b;
        let stab = w.stabilizer_of_vector(&b, 1e-9);
        let mut covered: Vec<DVector<f64>> = Vec::new();
        for (y, &wi) in orbit.iter().zip(&producers) {
            if covered.iter().any(|p| (p - y).norm() <= 1e-9) {
                continue;
            }
            if (b.dot(y) - b.dot(&c)).abs() > 1e-8 * b.norm().max(1.0) {
                continue;
            }
            let (class, _) = orbit_of_subgroup(w, &stab, y);
            let hull = convex_hull(&class, GEOM_TOL)?;
            if !hull.contains(&c, 1e-9)? {
                continue;
            }
            covered.extend(class);
            jobs.push((b.clone(), wi));
        }
    }

    let mut comps: Vec<CriticalComponent> = jobs
        .par_iter()
        .enumerate()
        .map(|(j, (b, wi))| {
            let c = a + b;
            let rep = if b.norm() <= B_DEDUP_TOL {
                // μ⁻¹(a): descend f over all of K from seeded orbit points
                let full = crate::numerics::Subspace::full(m.dim_k());
                let start = OrbitPoint::base(m, &fo.q).moved(m, &sample_direction(m, opts.seed, 1));
                resolve_point(fo, &start, &c, &full, strategy, opts, j as u64)
            } else {
                let stab = w.stabilizer_of_vector(b, 1e-9);
                let y = w.apply(*wi, &fo.q);
                let hit = stab
                    .iter()
                    .find(|&&s| (w.apply(s, &y) - &c).norm() <= 1e-9 * fo.q.norm().max(1.0));
                match hit {
                    Some(&s) => {
                        let idx = fo.weyl.find(&(&w.elements[s].matrix * &w.elements[*wi].matrix));
                        idx.map(|i| fo.weyl_point(i))
                    }
                    None => {
                        let kb = centralizer_in_k(m, b);
                        resolve_point(fo, &fo.weyl_point(*wi), &c, &kb, strategy, opts, j as u64)
                    }
                }
            };
            finish_component(fo, a, b, *wi, rep, opts.tol)
        })
        .collect();
    sort_by_level(&mut comps, |c| (c.level, c.b.clone()));
    Ok(comps)
}

/// Distinct critical values |b|² of the components.
pub fn critical_values(components: &[CriticalComponent]) -> Vec<f64> {
    let mut v: Vec<f64> = components.iter().map(|c| c.level).collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v.dedup_by(|a, b| (*a - *b).abs() <= 1e-12);
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::morse::descent::Hybrid;
    use crate::symmetric_space::build_catalog_model;

    fn orbit(name: &str, params: &[i64]) -> FlagOrbit {
        FlagOrbit::new(build_catalog_model(name, params).unwrap(), None).unwrap()
    }

    #[test]
    fn circle_candidates_are_a_and_the_two_vertices() {
        let fo = orbit("su2-over-so2", &[]);
        let a = DVector::from_element(1, 0.3);
        let cands = enumerate_critical_levels(&fo, &a).unwrap();
        let mut targets: Vec<f64> = cands.iter().map(|c| c.b[0] + 0.3).collect();
        targets.sort_by(|x, y| x.partial_cmp(y).unwrap());
        assert_eq!(targets.len(), 3);
        assert!((targets[0] + 1.0).abs() < 1e-12);
        assert!((targets[1] - 0.3).abs() < 1e-12);
        assert!((targets[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn circle_components_have_index_one() {
        let fo = orbit("su2-over-so2", &[]);
        let a = DVector::from_element(1, 0.3);
        let cands = enumerate_critical_levels(&fo, &a).unwrap();
        let comps = resolve_critical_components(&fo, &a, &cands, &Hybrid, &ResolveOptions::default()).unwrap();
        assert_eq!(comps.len(), 3);
        assert!(comps[0].is_minimum() && comps[0].index == 0 && comps[0].level == 0.0);
        // levels (1 ∓ 0.3)², index m = 1
        assert!((comps[1].level - 0.49).abs() < 1e-12);
        assert!((comps[2].level - 1.69).abs() < 1e-12);
        for c in &comps {
            assert_eq!(c.status, ComponentStatus::Resolved, "{c:?}");
            assert!(c.grad_norm < 1e-7);
        }
        assert_eq!((comps[1].index, comps[2].index), (1, 1));
    }

    #[test]
    fn cp2_nonminimal_components_have_index_three() {
        let fo = orbit("su3-over-u2", &[]);
        let a = &fo.q * 0.2;
        let cands = enumerate_critical_levels(&fo, &a).unwrap();
        assert_eq!(cands.len(), 3);
        let comps = resolve_critical_components(&fo, &a, &cands, &Hybrid, &ResolveOptions::default()).unwrap();
        for c in &comps {
            assert_eq!(c.status, ComponentStatus::Resolved);
            if !c.is_minimum() {
                assert_eq!(c.index, 3);
            }
        }
    }

    #[test]
    fn outside_target_has_no_minimum() {
        let fo = orbit("adjoint-su", &[3]);
        let a = &fo.q * 1.5;
        let cands = enumerate_critical_levels(&fo, &a).unwrap();
        assert!(cands.iter().all(|c| c.level > 1e-6));
    }

    #[test]
    fn a2_components_resolve_and_only_the_minimum_has_index_zero() {
        let fo = orbit("adjoint-su", &[3]);
        let a = DVector::from_vec(vec![0.11, -0.07]);
        let cands = enumerate_critical_levels(&fo, &a).unwrap();
        assert!(cands.iter().any(|c| c.level < 1e-20));
        let comps = resolve_critical_components(&fo, &a, &cands, &Hybrid, &ResolveOptions::default()).unwrap();
        for c in &comps {
            assert_eq!(c.status, ComponentStatus::Resolved, "{c:?}");
            assert!(c.height_defect < 1e-8);
            assert_eq!(c.index == 0, c.is_minimum());
            if !c.is_minimum() {
                assert!(c.index >= 2);
            }
        }
    }

    #[test]
    fn flats_of_a2() {
        let fo = orbit("adjoint-su", &[3]);
        let flats = root_flats(&fo.roots);
        // a, three lines, and {0}
        assert_eq!(flats.len(), 5);
        assert_eq!(flats[0].space.dim(), 2);
        assert_eq!(flats[4].space.dim(), 0);
    }
}
