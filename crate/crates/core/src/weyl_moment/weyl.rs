use std::collections::{HashMap, VecDeque};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::{CMatrix, Subspace};
use crate::symmetric_space::{RestrictedRootSystem, SymmetricSpaceModel};

/// Matrix dedup tolerance for group closure.
pub const WEYL_TOL: f64 = 1e-9;
/// Safety bound on the closure size.
pub const WEYL_BOUND: usize = 1_000_000;

/// An element of W as an orthogonal matrix on a, with a word in the
/// generators: the element equals s_{word[0]} · s_{word[1]} · … .
#[derive(Clone, Debug)]
pub struct WeylElement {
    pub matrix: DMatrix<f64>,
    pub word: Vec<usize>,
}

/// Finite reflection group generated by the reflections in the indivisible
/// positive roots. Element 0 is the identity.
#[derive(Clone, Debug)]
pub struct WeylGroup {
    pub rank: usize,
    pub generators: Vec<DMatrix<f64>>,
    /// Index into `roots.roots` of the root defining each generator.
    pub generator_roots: Vec<usize>,
    pub elements: Vec<WeylElement>,
}

fn reflection(alpha: &DVector<f64>) -> DMatrix<f64> {
    let r = alpha.len();
    DMatrix::identity(r, r) - alpha * alpha.transpose() * (2.0 / alpha.norm_squared())
}

fn key(m: &DMatrix<f64>) -> Vec<i64> {
    m.iter().map(|v| (v * 1e6).round() as i64).collect()
}

fn same(a: &DMatrix<f64>, b: &DMatrix<f64>) -> bool {
    (a - b).amax() <= WEYL_TOL
}

/// Closure of the root reflections by breadth-first search.
pub fn generate_weyl(roots: &RestrictedRootSystem) -> Result<WeylGroup> {
    generate_weyl_bounded(roots, WEYL_BOUND)
}

pub fn generate_weyl_bounded(roots: &RestrictedRootSystem, bound: usize) -> Result<WeylGroup> {
    if roots.roots.is_empty() {
        return Err(Error::EmptyInput("root system"));
    }
    let r = roots.rank;
    let generator_roots = roots.indivisible.clone();
    let generators: Vec<DMatrix<f64>> = generator_roots
        .iter()
        .map(|&i| reflection(&roots.roots[i].alpha_dual))
        .collect();

    let mut elements = vec![WeylElement {
        matrix: DMatrix::identity(r, r),
        word: Vec::new(),
    }];
    let mut index: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
    index.entry(key(&elements[0].matrix)).or_default().push(0);
    let mut queue = VecDeque::from([0usize]);
    while let Some(e) = queue.pop_front() {
        for (g, s) in generators.iter().enumerate() {
            let m = s * &elements[e].matrix;
            let k = key(&m);
            let known = index
                .get(&k)
                .is_some_and(|ids| ids.iter().any(|&i| same(&elements[i].matrix, &m)));
            if known {
                continue;
            }
            if elements.len() >= bound {
                return Err(Error::WeylOverflow(bound));
            }
            let mut word = vec![g];
            word.extend(&elements[e].word);
            index.entry(k).or_default().push(elements.len());
            queue.push_back(elements.len());
            elements.push(WeylElement { matrix: m, word });
        }
    }
    Ok(WeylGroup {
        rank: r,
        generators,
        generator_roots,
        elements,
    })
}

impl WeylGroup {
    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn apply(&self, idx: usize, v: &DVector<f64>) -> DVector<f64> {
        &self.elements[idx].matrix * v
    }

    /// Index of the element equal to `m`, if any.
    pub fn find(&self, m: &DMatrix<f64>) -> Option<usize> {
        self.elements.iter().position(|e| same(&e.matrix, m))
    }

    /// Largest deviation from closure under composition and inversion.
    pub fn closure_defect(&self) -> f64 {
        let dist = |m: &DMatrix<f64>| {
            self.elements
                .iter()
                .map(|e| (&e.matrix - m).amax())
                .fold(f64::INFINITY, f64::min)
        };
        let mut worst: f64 = 0.0;
        for u in &self.elements {
            worst = worst.max(dist(&u.matrix.transpose()));
            for v in &self.elements {
                worst = worst.max(dist(&(&u.matrix * &v.matrix)));
            }
        }
        worst
    }

    /// Largest distance from w·α♯ to the nearest root, over all w and roots.
    pub fn root_permutation_defect(&self, roots: &RestrictedRootSystem) -> f64 {
        let all = roots.all_duals();
        let mut worst: f64 = 0.0;
        for e in &self.elements {
            for a in &all {
                let img = &e.matrix * a;
                let d = all.iter().map(|b| (&img - b).norm()).fold(f64::INFINITY, f64::min);
                worst = worst.max(d);
            }
        }
        worst
    }

    /// Elements fixing every vector of `space` (its pointwise stabilizer).
    pub fn pointwise_stabilizer(&self, space: &Subspace) -> Vec<usize> {
        let vecs = space.vectors();
        (0..self.order())
            .filter(|&i| {
                vecs.iter()
                    .all(|v| (&self.elements[i].matrix * v - v).norm() <= WEYL_TOL * 10.0)
            })
            .collect()
    }

    /// Elements fixing the vector `b`.
    pub fn stabilizer_of_vector(&self, b: &DVector<f64>, tol: f64) -> Vec<usize> {
        (0..self.order())
            .filter(|&i| (&self.elements[i].matrix * b - b).norm() <= tol * b.norm().max(1.0))
            .collect()
    }
}

/// Deduplicated orbit W·q (tolerance 1e-9), in order of first appearance.
pub fn weyl_orbit(w: &WeylGroup, q: &DVector<f64>) -> Vec<DVector<f64>> {
    orbit_of_subgroup(w, &(0..w.order()).collect::<Vec<_>>(), q).0
}

/// Orbit of `q` under the listed elements, with the index of an element
/// producing each orbit point.
pub fn orbit_of_subgroup(
    w: &WeylGroup,
    elements: &[usize],
    q: &DVector<f64>,
) -> (Vec<DVector<f64>>, Vec<usize>) {
    let mut pts: Vec<DVector<f64>> = Vec::new();
    let mut which = Vec::new();
    for &i in elements {
        let y = w.apply(i, q);
        if !pts.iter().any(|p| (p - &y).norm() <= WEYL_TOL * q.norm().max(1.0)) {
            pts.push(y);
            which.push(i);
        }
    }
    (pts, which)
}

/// Lift of one generator s_α to K: k = exp(t·z) with z a unit vector of
/// k_α (or k_{2α} when 2α is a root) and t = π/|β♯|, β the root used.
#[derive(Clone, Debug)]
pub struct GeneratorLift {
    pub z: DVector<f64>,
    pub t: f64,
    /// Ad(k) on p.
    pub p_action: DMatrix<f64>,
    /// k as a unitary matrix.
    pub group: CMatrix,
}

/// Realizations of Weyl elements by group elements of K normalizing a.
#[derive(Clone, Debug)]
pub struct WeylRealization {
    pub lifts: Vec<GeneratorLift>,
}

impl WeylRealization {
    pub fn new(model: &SymmetricSpaceModel, roots: &RestrictedRootSystem, w: &WeylGroup) -> Result<Self> {
        let mut lifts = Vec::new();
        for (slot, &ri) in w.generator_roots.iter().enumerate() {
            let dbl = roots
                .indivisible
                .iter()
                .position(|&i| i == ri)
                .and_then(|s| roots.doubles[s]);
            let root = &roots.roots[dbl.unwrap_or(ri)];
            let z = root.k_space.vectors().into_iter().next().ok_or_else(|| {
                Error::Numerical("root with empty k-space".into())
            })?;
            let t = std::f64::consts::PI / root.alpha_dual.norm();
            let zt = &z * t;
            let p_action = model.ad_on_p(&zt).exp();
            let group = (model.k_matrix(&z) * Complex64::new(t, 0.0)).exp();
            // Ad(k) must restrict to the reflection on a.
            let r = model.rank;
            let on_a = p_action.view((0, 0), (model.dim_p(), r)).into_owned();
            let mut expect = DMatrix::zeros(model.dim_p(), r);
            expect.view_mut((0, 0), (r, r)).copy_from(&w.generators[slot]);
            let resid = (on_a - expect).amax();
            if resid > 1e-8 {
                return Err(Error::InvariantViolation {
                    check: format!("lift of reflection {slot} acts on a as the reflection"),
                    residual: resid,
                });
            }
            lifts.push(GeneratorLift {
                z,
                t,
                p_action,
                group,
            });
        }
        Ok(WeylRealization { lifts })
    }

    /// Ad(k_w) on p for element `idx`.
    pub fn p_action(&self, w: &WeylGroup, idx: usize, dim_p: usize) -> DMatrix<f64> {
        let mut m = DMatrix::identity(dim_p, dim_p);
        for &g in &w.elements[idx].word {
            m *= &self.lifts[g].p_action;
        }
        m
    }

    /// k_w as a unitary matrix.
    pub fn group_element(&self, w: &WeylGroup, idx: usize, size: usize) -> CMatrix {
        let mut m = CMatrix::identity(size, size);
        for &g in &w.elements[idx].word {
            m *= &self.lifts[g].group;
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symmetric_space::{build_catalog_model, restricted_roots};

    fn group(name: &str, params: &[i64]) -> (SymmetricSpaceModel, RestrictedRootSystem, WeylGroup) {
        let m = build_catalog_model(name, params).unwrap();
        let rs = restricted_roots(&m).unwrap();
        let w = generate_weyl(&rs).unwrap();
        (m, rs, w)
    }

    #[test]
    fn orders_of_catalog_groups() {
        assert_eq!(group("su2-over-so2", &[]).2.order(), 2);
        assert_eq!(group("adjoint-su", &[2]).2.order(), 2);
        assert_eq!(group("adjoint-su", &[3]).2.order(), 6);
        assert_eq!(group("adjoint-su", &[4]).2.order(), 24);
        assert_eq!(group("su3-over-u2", &[]).2.order(), 2);
        assert_eq!(group("su2n-over-spn", &[3]).2.order(), 6);
        assert_eq!(group("grassmannian", &[3, 2]).2.order(), 8);
    }

    #[test]
    fn a2_closure_matches_brute_force() {
        let (_, rs, w) = group("adjoint-su", &[3]);
        // brute force: all products of up to 6 generator reflections
        let gens: Vec<DMatrix<f64>> = rs.indivisible_duals().iter().map(reflection).collect();
        let mut found: Vec<DMatrix<f64>> = vec![DMatrix::identity(2, 2)];
        for _ in 0..6 {
            let mut next = found.clone();
            for f in &found {
                for g in &gens {
                    let m = g * f;
                    if !next.iter().any(|x| same(x, &m)) {
                        next.push(m);
                    }
                }
            }
            found = next;
        }
        assert_eq!(found.len(), w.order());
        assert!(w.closure_defect() < 1e-9);
        assert!(w.root_permutation_defect(&rs) < 1e-9);
    }

    #[test]
    fn overflow_is_reported() {
        let (_, rs, _) = group("adjoint-su", &[3]);
        assert!(matches!(generate_weyl_bounded(&rs, 4), Err(Error::WeylOverflow(4))));
    }

    #[test]
    fn words_reproduce_matrices() {
        let (_, _, w) = group("grassmannian", &[3, 2]);
        for e in &w.elements {
            let mut m = DMatrix::identity(w.rank, w.rank);
            for &g in &e.word {
                m *= &w.generators[g];
            }
            assert!(same(&m, &e.matrix));
        }
    }

    #[test]
    fn orbit_sizes() {
        let (_, rs, w) = group("adjoint-su", &[3]);
        assert_eq!(weyl_orbit(&w, &DVector::zeros(2)).len(), 1);
        assert_eq!(weyl_orbit(&w, &rs.generic).len(), 6);
        let alpha = rs.indivisible_duals()[0].clone();
        let on_wall = DVector::from_vec(vec![-alpha[1], alpha[0]]);
        assert_eq!(weyl_orbit(&w, &on_wall).len(), 3);
        for q in [rs.generic.clone(), on_wall] {
            assert_eq!(w.order() % weyl_orbit(&w, &q).len(), 0);
        }
    }

    #[test]
    fn lifts_realize_every_element() {
        for (name, params) in [
            ("adjoint-su", vec![3]),
            ("su3-over-u2", vec![]),
            ("su2n-over-spn", vec![3]),
            ("grassmannian", vec![3, 2]),
        ] {
            let (m, rs, w) = group(name, &params);
            let lift = WeylRealization::new(&m, &rs, &w).unwrap();
            let q = m.a_to_p(&rs.generic);
            for i in 0..w.order() {
                let x = lift.p_action(&w, i, m.dim_p()) * &q;
                let wq = m.a_to_p(&w.apply(i, &rs.generic));
                assert!((&x - &wq).norm() < 1e-8, "{name}: element {i}");
                let k = lift.group_element(&w, i, m.matrix_size);
                let xm = &k * m.p_matrix(&q) * k.adjoint();
                assert!((m.p_coords(&xm) - &wq).norm() < 1e-8);
            }
        }
    }
}
