use nalgebra::{DMatrix, DVector};

use super::svd::checked_svd;
use crate::error::{Error, Result};

/// Default tolerance for orthonormality and rank decisions.
pub const ORTHO_TOL: f64 = 1e-10;

/// A linear subspace of R^n stored as an orthonormal column basis.
#[derive(Clone, Debug)]
pub struct Subspace {
    ambient_dim: usize,
    basis: DMatrix<f64>,
}

impl Subspace {
    pub fn zero(ambient_dim: usize) -> Self {
        Subspace {
            ambient_dim,
            basis: DMatrix::zeros(ambient_dim, 0),
        }
    }

    pub fn full(ambient_dim: usize) -> Self {
        Subspace {
            ambient_dim,
            basis: DMatrix::identity(ambient_dim, ambient_dim),
        }
    }

    /// Gram-Schmidt (two passes) over `vectors`; vectors whose residual after
    /// projection falls below `tol` are dropped.
    pub fn orthonormalize(ambient_dim: usize, vectors: &[DVector<f64>], tol: f64) -> Result<Self> {
        let mut cols: Vec<DVector<f64>> = Vec::new();
        for v in vectors {
            if v.len() != ambient_dim {
                return Err(Error::DimensionMismatch {
                    expected: ambient_dim,
                    got: v.len(),
                });
            }
            let mut r = v.clone();
            for _ in 0..2 {
                for c in &cols {
                    let d = c.dot(&r);
                    r.axpy(-d, c, 1.0);
                }
            }
            let n = r.norm();
            if n >= tol {
                cols.push(r / n);
            }
        }
        Ok(Self::from_columns(ambient_dim, &cols))
    }

    /// Wraps vectors already known to be orthonormal.
    pub fn from_columns(ambient_dim: usize, cols: &[DVector<f64>]) -> Self {
        if cols.is_empty() {
            return Self::zero(ambient_dim);
        }
        Subspace {
            ambient_dim,
            basis: DMatrix::from_columns(cols),
        }
    }

    pub fn from_matrix_columns(m: &DMatrix<f64>, tol: f64) -> Self {
        let cols: Vec<DVector<f64>> = m.column_iter().map(|c| c.into_owned()).collect();
        Self::orthonormalize(m.nrows(), &cols, tol).expect("column lengths agree")
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn vectors(&self) -> Vec<DVector<f64>> {
        self.basis.column_iter().map(|c| c.into_owned()).collect()
    }

    fn check(&self, n: usize) -> Result<()> {
        if n != self.ambient_dim {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim,
                got: n,
            });
        }
        Ok(())
    }

    pub fn project(&self, v: &DVector<f64>) -> Result<DVector<f64>> {
        self.check(v.len())?;
        if self.dim() == 0 {
            return Ok(DVector::zeros(self.ambient_dim));
        }
        let coeffs = self.basis.tr_mul(v);
        Ok(&self.basis * coeffs)
    }

    /// Coordinates of the projection of `v` in this basis.
    pub fn coordinates(&self, v: &DVector<f64>) -> Result<DVector<f64>> {
        self.check(v.len())?;
        Ok(self.basis.tr_mul(v))
    }

    /// Distance from `v` to the subspace.
    pub fn residual(&self, v: &DVector<f64>) -> Result<f64> {
        Ok((v - self.project(v)?).norm())
    }

    pub fn contains_vector(&self, v: &DVector<f64>, tol: f64) -> Result<bool> {
        Ok(self.residual(v)? <= tol * v.norm().max(1.0))
    }

    pub fn contains_subspace(&self, other: &Subspace, tol: f64) -> Result<bool> {
        self.check(other.ambient_dim)?;
        for c in other.basis.column_iter() {
            if !self.contains_vector(&c.into_owned(), tol)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn complement(&self) -> Subspace {
        if self.dim() == 0 {
            return Subspace::full(self.ambient_dim);
        }
        kernel(&self.basis.transpose(), ORTHO_TOL)
    }

    /// Intersection via the kernel of [A | -B]; `tol` bounds the principal angle.
    pub fn intersection(&self, other: &Subspace, tol: f64) -> Result<Subspace> {
        self.check(other.ambient_dim)?;
        let (ka, kb) = (self.dim(), other.dim());
        if ka == 0 || kb == 0 {
            return Ok(Subspace::zero(self.ambient_dim));
        }
        let mut stacked = DMatrix::zeros(self.ambient_dim, ka + kb);
        stacked.columns_mut(0, ka).copy_from(&self.basis);
        stacked.columns_mut(ka, kb).copy_from(&(-&other.basis));
        let ker = kernel(&stacked, tol);
        let vecs: Vec<DVector<f64>> = ker
            .basis
            .column_iter()
            .map(|c| &self.basis * c.rows(0, ka))
            .collect();
        Subspace::orthonormalize(self.ambient_dim, &vecs, tol.max(ORTHO_TOL))
    }

    pub fn sum(&self, other: &Subspace) -> Result<Subspace> {
        self.check(other.ambient_dim)?;
        let mut vecs = self.vectors();
        vecs.extend(other.vectors());
        Subspace::orthonormalize(self.ambient_dim, &vecs, 1e-8)
    }

    /// Orthogonal complement of `other` inside `self` (assumes other ⊆ self).
    pub fn relative_complement(&self, other: &Subspace) -> Result<Subspace> {
        self.check(other.ambient_dim)?;
        let vecs: Vec<DVector<f64>> = self
            .vectors()
            .into_iter()
            .map(|v| {
                let p = other.project(&v).expect("dims checked");
                v - p
            })
            .collect();
        Subspace::orthonormalize(self.ambient_dim, &vecs, 1e-7)
    }

    /// Maximum deviation of the Gram matrix from the identity.
    pub fn orthonormality_defect(&self) -> f64 {
        let g = self.basis.tr_mul(&self.basis);
        let id = DMatrix::<f64>::identity(g.nrows(), g.ncols());
        (g - id).amax()
    }

    pub fn same_as(&self, other: &Subspace, tol: f64) -> Result<bool> {
        Ok(self.dim() == other.dim()
            && self.contains_subspace(other, tol)?
            && other.contains_subspace(self, tol)?)
    }
}

/// Kernel of the linear map R^cols -> R^rows given by `map`. Singular values
/// below `tol * max(1, sigma_max)` count as zero.
pub fn kernel(map: &DMatrix<f64>, tol: f64) -> Subspace {
    let (r, c) = map.shape();
    if c == 0 {
        return Subspace::zero(0);
    }
    // Pad to at least square so the SVD returns a full right basis.
    let padded = if r < c {
        let mut m = DMatrix::zeros(c, c);
        m.rows_mut(0, r).copy_from(map);
        m
    } else {
        map.clone()
    };
    let svd = checked_svd(&padded);
    let v_t = svd.v_t.expect("requested V^T");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let cut = tol * smax.max(1.0);
    let cols: Vec<DVector<f64>> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, s)| **s <= cut)
        .map(|(i, _)| v_t.row(i).transpose())
        .collect();
    Subspace::orthonormalize(c, &cols, 1e-8).expect("consistent lengths")
}

/// Numerical rank via singular values.
pub fn rank(m: &DMatrix<f64>, tol: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let s = checked_svd(m).singular_values;
    let smax = s.iter().cloned().fold(0.0, f64::max);
    s.iter().filter(|x| **x > tol * smax.max(1.0)).count()
}

/// Moore-Penrose pseudo-inverse with relative cutoff.
pub fn pseudo_inverse(m: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        return DMatrix::zeros(c, r);
    }
    let svd = checked_svd(m);
    let u = svd.u.as_ref().expect("u");
    let v_t = svd.v_t.as_ref().expect("v_t");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let cut = tol * smax.max(f64::MIN_POSITIVE);
    let mut out = DMatrix::zeros(c, r);
    for (i, s) in svd.singular_values.iter().enumerate() {
        if *s > cut {
            out += v_t.row(i).transpose() * u.column(i).transpose() / *s;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
        DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0))
    }

    #[test]
    fn gram_schmidt_independent_pair() {
        let s = Subspace::orthonormalize(2, &[dvector![1.0, 0.0], dvector![1.0, 1.0]], 1e-12).unwrap();
        assert_eq!(s.dim(), 2);
        assert!((s.basis()[(0, 0)] - 1.0).abs() < 1e-15);
        assert!(s.basis()[(1, 0)].abs() < 1e-15);
        assert!(s.basis()[(0, 1)].abs() < 1e-15);
        assert!((s.basis()[(1, 1)] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn dependent_vector_dropped() {
        let s = Subspace::orthonormalize(2, &[dvector![1.0, 0.0], dvector![2.0, 0.0]], 1e-12).unwrap();
        assert_eq!(s.dim(), 1);
        assert_eq!(s.basis().column(0).into_owned(), dvector![1.0, 0.0]);
    }

    #[test]
    fn empty_input_gives_zero_subspace() {
        let s = Subspace::orthonormalize(3, &[], 1e-12).unwrap();
        assert_eq!(s.dim(), 0);
        assert_eq!(s.complement().dim(), 3);
    }

    #[test]
    fn five_random_vectors_span_r3() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let vs: Vec<_> = (0..5).map(|_| random_vec(&mut rng, 3)).collect();
        let s = Subspace::orthonormalize(3, &vs, 1e-10).unwrap();
        // independent oracle: singular values of the stacked 3x5 matrix
        let m = DMatrix::from_columns(&vs);
        let sv = m.svd(false, false).singular_values;
        let oracle_rank = sv.iter().filter(|x| **x > 1e-10).count();
        assert_eq!(oracle_rank, 3);
        assert_eq!(s.dim(), oracle_rank);
        assert!(s.orthonormality_defect() < 1e-10);
    }

    #[test]
    fn axes_intersect_trivially() {
        let x = Subspace::orthonormalize(2, &[dvector![1.0, 0.0]], 1e-12).unwrap();
        let y = Subspace::orthonormalize(2, &[dvector![0.0, 1.0]], 1e-12).unwrap();
        assert_eq!(x.intersection(&y, 1e-9).unwrap().dim(), 0);
    }

    #[test]
    fn project_onto_coordinate_plane() {
        let s = Subspace::orthonormalize(3, &[dvector![1.0, 0.0, 0.0], dvector![0.0, 1.0, 0.0]], 1e-12)
            .unwrap();
        let p = s.project(&dvector![1.0, 2.0, 3.0]).unwrap();
        assert!((p - dvector![1.0, 2.0, 0.0]).norm() < 1e-15);
    }

    #[test]
    fn random_three_spaces_in_r4_meet_in_a_plane() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let a: Vec<_> = (0..3).map(|_| random_vec(&mut rng, 4)).collect();
            let b: Vec<_> = (0..3).map(|_| random_vec(&mut rng, 4)).collect();
            let sa = Subspace::orthonormalize(4, &a, 1e-10).unwrap();
            let sb = Subspace::orthonormalize(4, &b, 1e-10).unwrap();
            let i = sa.intersection(&sb, 1e-9).unwrap();
            // dimension formula: dim(A∩B) = dim A + dim B - rank[A B]
            let mut all = a.clone();
            all.extend(b.clone());
            let r = rank(&DMatrix::from_columns(&all), 1e-10);
            assert_eq!(i.dim(), 3 + 3 - r);
            assert_eq!(i.dim(), 2);
            assert!(sa.contains_subspace(&i, 1e-9).unwrap());
            assert!(sb.contains_subspace(&i, 1e-9).unwrap());
        }
    }

    #[test]
    fn mismatched_dimensions_rejected() {
        let a = Subspace::full(2);
        let b = Subspace::full(3);
        assert!(matches!(
            a.intersection(&b, 1e-9),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(a.project(&dvector![1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn kernel_of_wide_map() {
        let m = DMatrix::from_row_slice(1, 3, &[1.0, 1.0, 0.0]);
        let k = kernel(&m, 1e-12);
        assert_eq!(k.dim(), 2);
        for v in k.vectors() {
            assert!((&m * v).norm() < 1e-12);
        }
    }

    proptest::proptest! {
        #[test]
        fn projection_idempotent_and_complementary(
            seed in 0u64..10_000, n in 1usize..7, k in 0usize..7
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let vs: Vec<_> = (0..k).map(|_| random_vec(&mut rng, n)).collect();
            let s = Subspace::orthonormalize(n, &vs, 1e-10).unwrap();
            let v = random_vec(&mut rng, n);
            let p = s.project(&v).unwrap();
            let pp = s.project(&p).unwrap();
            proptest::prop_assert!((&p - &pp).norm() < 1e-10);
            proptest::prop_assert_eq!(s.dim() + s.complement().dim(), n);
            // self-adjointness: <Pv, w> = <v, Pw>
            let w = random_vec(&mut rng, n);
            let lhs = p.dot(&w);
            let rhs = v.dot(&s.project(&w).unwrap());
            proptest::prop_assert!((lhs - rhs).abs() < 1e-10);
        }
    }
}
