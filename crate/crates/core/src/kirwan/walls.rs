use nalgebra::DVector;
use serde::Serialize;

use crate::morse::root_flats;
use crate::numerics::{gaussian_vector, stream_rng, Subspace};
use crate::symmetric_space::RestrictedRootSystem;
use crate::weyl_moment::WeylGroup;

/// Tolerance (relative to |α|·|b|) for α(b) = 0.
pub const WALL_TOL: f64 = 1e-9;

/// Bitmask of the indivisible roots vanishing at b.
pub fn vanishing_mask(roots: &RestrictedRootSystem, b: &DVector<f64>) -> u64 {
    roots
        .indivisible_roots()
        .enumerate()
        .filter(|(_, (_, r, _))| r.value(b).abs() <= WALL_TOL * r.alpha_dual.norm() * b.norm().max(1.0))
        .fold(0u64, |m, (i, _)| m | (1 << i))
}

/// One class of root-wall intersections up to Weyl conjugacy. Z_k(b) only
/// depends on which roots vanish at b, so one generic point per class
/// decides the torus criterion for every b in it.
#[derive(Clone, Debug, Serialize)]
pub struct WallType {
    /// Vanishing-root mask of the representative (smallest in its class).
    pub mask: u64,
    /// Generic point of the representative flat.
    pub b: Vec<f64>,
    pub flat_dim: usize,
    /// Masks of all flats in the Weyl class.
    pub members: Vec<u64>,
    /// Generic point of each member flat, aligned with `members`.
    #[serde(skip)]
    pub member_points: Vec<DVector<f64>>,
}

impl WallType {
    pub fn b_vector(&self) -> DVector<f64> {
        DVector::from_vec(self.b.clone())
    }
}

/// A point of `space` at which exactly the roots in `mask` vanish.
pub fn generic_point(roots: &RestrictedRootSystem, space: &Subspace, mask: u64, seed: u64) -> DVector<f64> {
    if space.dim() == 0 {
        return DVector::zeros(roots.rank);
    }
    for attempt in 0..64 {
        let c = gaussian_vector(&mut stream_rng(seed, attempt), space.dim(), 1.0);
        let b = space.basis() * c;
        let b = &b / b.norm();
        if vanishing_mask(roots, &b) == mask {
            return b;
        }
    }
    // measure-zero failure repeated 64 times means the mask is not realizable
    panic!("no generic point realizes mask {mask:#b}");
}

/// All wall types, sorted by mask: from b regular (mask 0) to b = 0.
pub fn wall_types(roots: &RestrictedRootSystem, weyl: &WeylGroup) -> Vec<WallType> {
    let flats = root_flats(roots);
    let points: Vec<DVector<f64>> = flats
        .iter()
        .enumerate()
        .map(|(i, f)| generic_point(roots, &f.space, f.mask, 0x3a11 + i as u64))
        .collect();
    let mut class = vec![usize::MAX; flats.len()];
    for i in 0..flats.len() {
        if class[i] != usize::MAX {
            continue;
        }
        class[i] = i;
        for w in 0..weyl.order() {
            let m = vanishing_mask(roots, &weyl.apply(w, &points[i]));
            if let Some(j) = flats.iter().position(|f| f.mask == m) {
                if class[j] == usize::MAX {
                    class[j] = i;
                }
            }
        }
    }
    let mut out: Vec<WallType> = Vec::new();
    for i in 0..flats.len() {
        let mut members: Vec<usize> = (0..flats.len()).filter(|&j| class[j] == class[i]).collect();
        members.sort_by_key(|&j| flats[j].mask);
        let rep = members[0];
        if rep != i {
            continue;
        }
        out.push(WallType {
            mask: flats[rep].mask,
            b: points[rep].iter().cloned().collect(),
            flat_dim: flats[rep].space.dim(),
            members: members.iter().map(|&j| flats[j].mask).collect(),
            member_points: members.iter().map(|&j| points[j].clone()).collect(),
        });
    }
    out.sort_by_key(|t| t.mask);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symmetric_space::{build_catalog_model, restricted_roots};
    use crate::weyl_moment::generate_weyl;

    fn types(name: &str, params: &[i64]) -> Vec<WallType> {
        let m = build_catalog_model(name, params).unwrap();
        let roots = restricted_roots(&m).unwrap();
        let w = generate_weyl(&roots).unwrap();
        wall_types(&roots, &w)
    }

    #[test]
    fn rank_one_has_regular_and_zero() {
        for (name, params) in [("su2n-over-spn", vec![2]), ("su3-over-u2", vec![]), ("su2-over-so2", vec![])] {
            let t = types(name, &params);
            assert_eq!(t.len(), 2, "{name}");
            assert_eq!(t[0].mask, 0);
            assert_eq!(t[0].flat_dim, 1);
            assert_eq!(t[1].flat_dim, 0);
            assert!(t[1].b.iter().all(|v| *v == 0.0));
        }
    }

    #[test]
    fn a2_walls_are_one_weyl_class() {
        let t = types("adjoint-su", &[3]);
        let dims: Vec<usize> = t.iter().map(|w| w.flat_dim).collect();
        assert_eq!(dims, vec![2, 1, 0]);
        assert_eq!(t[1].members.len(), 3);
        assert_eq!(t[1].mask.count_ones(), 1);
        assert_eq!(t[2].mask.count_ones(), 3);
    }

    #[test]
    fn b2_walls_split_into_short_and_long() {
        // su(5)/s(u(3)+u(2)) has restricted roots of type BC2: four walls in
        // two Weyl classes
        let t = types("grassmannian", &[3, 2]);
        let walls: Vec<&WallType> = t.iter().filter(|w| w.flat_dim == 1).collect();
        assert_eq!(walls.len(), 2);
        assert!(walls.iter().all(|w| w.members.len() == 2));
    }

    #[test]
    fn generic_points_realize_their_masks() {
        let m = build_catalog_model("adjoint-su", &[4]).unwrap();
        let roots = restricted_roots(&m).unwrap();
        let w = generate_weyl(&roots).unwrap();
        for t in wall_types(&roots, &w) {
            for (mask, b) in t.members.iter().zip(&t.member_points) {
                assert_eq!(vanishing_mask(&roots, b), *mask);
            }
        }
    }
}
