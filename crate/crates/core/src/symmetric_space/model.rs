use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::{bracket, kernel, sorted_symmetric_eigen, trace_form, CMatrix, Subspace};

/// Tolerance for the involution and orthonormality checks.
pub const INVOLUTION_TOL: f64 = 1e-10;
/// Tolerance for bracket closure residuals.
pub const BRACKET_TOL: f64 = 1e-9;

/// Concrete matrix model of a symmetric pair (g, k) in compact form:
/// g = k ⊕ p with orthonormal bases under ⟨x, y⟩ = −Re tr(xy), and a maximal
/// abelian a ⊆ p whose basis occupies the first `rank` slots of `basis_p`.
///
/// Elements of k and p are handled in coordinates with respect to these
/// bases; the structure constants are precomputed once.
#[derive(Clone, Debug)]
pub struct SymmetricSpaceModel {
    pub name: String,
    pub params: Vec<i64>,
    pub matrix_size: usize,
    /// Factor relating the model inner product to −Re tr(xy).
    pub inner_product_scale: f64,
    pub basis_k: Vec<CMatrix>,
    pub basis_p: Vec<CMatrix>,
    pub rank: usize,
    /// ad(k_j) restricted to p, as dim p × dim p matrices.
    ad_kp: Vec<DMatrix<f64>>,
    /// ad(k_j) restricted to k.
    ad_kk: Vec<DMatrix<f64>>,
    /// ad(g_j) on all of g = k ⊕ p (k coordinates first).
    ad_g: Vec<DMatrix<f64>>,
}

/// Residuals recorded while validating a model.
#[derive(Clone, Debug, Default, serde::Serialize)]
pub struct ValidationReport {
    pub involution_square: f64,
    pub basis_orthonormality: f64,
    pub algebra_closure: f64,
    pub kk_in_k: f64,
    pub kp_in_p: f64,
    pub pp_in_k: f64,
    pub a_abelian: f64,
    pub ad_invariance: f64,
}

fn frob(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn combine(basis: &[CMatrix], coeffs: impl Iterator<Item = f64>, n: usize) -> CMatrix {
    let mut out = CMatrix::zeros(n, n);
    for (b, c) in basis.iter().zip(coeffs) {
        if c != 0.0 {
            out += b * Complex64::new(c, 0.0);
        }
    }
    out
}

impl SymmetricSpaceModel {
    /// Builds and validates a model from an orthonormal basis of g, the
    /// involution written in that basis (column j holds θ(g_j)), and a basis
    /// of a (matrices lying in p).
    pub fn from_involution(
        name: impl Into<String>,
        params: Vec<i64>,
        matrix_size: usize,
        basis_g: &[CMatrix],
        involution: &DMatrix<f64>,
        basis_a: &[CMatrix],
    ) -> Result<(Self, ValidationReport)> {
        let n = matrix_size;
        let dg = basis_g.len();
        let mut report = ValidationReport::default();
        if dg == 0 {
            return Err(Error::EmptyInput("basis of g"));
        }
        if involution.shape() != (dg, dg) {
            return Err(Error::DimensionMismatch {
                expected: dg,
                got: involution.nrows(),
            });
        }
        for b in basis_g {
            if b.shape() != (n, n) {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: b.nrows(),
                });
            }
            let skew = frob(&(b + b.adjoint()));
            if skew > INVOLUTION_TOL {
                return Err(Error::InvariantViolation {
                    check: "basis matrices skew-Hermitian".into(),
                    residual: skew,
                });
            }
        }
        let gram = DMatrix::from_fn(dg, dg, |i, j| trace_form(&basis_g[i], &basis_g[j]));
        report.basis_orthonormality = (&gram - DMatrix::identity(dg, dg)).amax();
        if report.basis_orthonormality > INVOLUTION_TOL {
            return Err(Error::InvariantViolation {
                check: "basis of g orthonormal under -Re tr(xy)".into(),
                residual: report.basis_orthonormality,
            });
        }
        report.involution_square = (involution * involution - DMatrix::identity(dg, dg)).amax();
        if report.involution_square > INVOLUTION_TOL {
            return Err(Error::InvariantViolation {
                check: "involution squared equals identity".into(),
                residual: report.involution_square,
            });
        }
        let asym = (involution - involution.transpose()).amax();
        if asym > INVOLUTION_TOL {
            return Err(Error::InvariantViolation {
                check: "involution is an isometry".into(),
                residual: asym,
            });
        }

        let (vals, vecs) = sorted_symmetric_eigen(involution);
        let mut k_coeffs = Vec::new();
        let mut p_coeffs = Vec::new();
        for (i, v) in vals.iter().enumerate() {
            let col = vecs.column(i).into_owned();
            if (v - 1.0).abs() < 1e-8 {
                k_coeffs.push(col);
            } else if (v + 1.0).abs() < 1e-8 {
                p_coeffs.push(col);
            } else {
                return Err(Error::InvariantViolation {
                    check: "involution eigenvalues are ±1".into(),
                    residual: (v.abs() - 1.0).abs(),
                });
            }
        }
        let to_mat = |c: &DVector<f64>| combine(basis_g, c.iter().cloned(), n);
        let basis_k: Vec<CMatrix> = k_coeffs.iter().map(to_mat).collect();
        let p_raw: Vec<CMatrix> = p_coeffs.iter().map(to_mat).collect();
        let dp = p_raw.len();

        // Express a in p-coordinates and complete it to a basis of p.
        let mut a_coords = Vec::new();
        for a in basis_a {
            if a.shape() != (n, n) {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: a.nrows(),
                });
            }
            let c = DVector::from_fn(dp, |i, _| trace_form(&p_raw[i], a));
            let resid = frob(&(a - combine(&p_raw, c.iter().cloned(), n)));
            if resid > 1e-9 * frob(a).max(1.0) {
                return Err(Error::InvariantViolation {
                    check: "a lies in p".into(),
                    residual: resid,
                });
            }
            a_coords.push(c);
        }
        let a_space = Subspace::orthonormalize(dp, &a_coords, 1e-9)?;
        if a_space.dim() != basis_a.len() {
            return Err(Error::InvariantViolation {
                check: "a-basis linearly independent".into(),
                residual: 0.0,
            });
        }
        let rank = a_space.dim();
        let mut p_cols = a_space.vectors();
        p_cols.extend(a_space.complement().vectors());
        let basis_p: Vec<CMatrix> = p_cols
            .iter()
            .map(|c| combine(&p_raw, c.iter().cloned(), n))
            .collect();
        // Keep a-basis matrices exactly as supplied when already orthonormal.
        let basis_p = if (DMatrix::from_fn(rank, rank, |i, j| trace_form(&basis_a[i], &basis_a[j]))
            - DMatrix::identity(rank, rank))
        .amax()
            < 1e-12
        {
            let mut v = basis_a.to_vec();
            v.extend(basis_p.into_iter().skip(rank));
            v
        } else {
            basis_p
        };

        let mut model = SymmetricSpaceModel {
            name: name.into(),
            params,
            matrix_size: n,
            inner_product_scale: 1.0,
            basis_k,
            basis_p,
            rank,
            ad_kp: Vec::new(),
            ad_kk: Vec::new(),
            ad_g: Vec::new(),
        };
        model.compute_structure(&mut report)?;
        model.check_maximal_abelian()?;
        Ok((model, report))
    }

    fn compute_structure(&mut self, report: &mut ValidationReport) -> Result<()> {
        let dk = self.dim_k();
        let dp = self.dim_p();
        let dg = dk + dp;
        let basis: Vec<&CMatrix> = self.basis_k.iter().chain(self.basis_p.iter()).collect();
        let mut ad_g = vec![DMatrix::zeros(dg, dg); dg];
        let mut closure: f64 = 0.0;
        for j in 0..dg {
            for l in 0..dg {
                let c = bracket(basis[j], basis[l]);
                let mut recon = CMatrix::zeros(self.matrix_size, self.matrix_size);
                for i in 0..dg {
                    let v = trace_form(basis[i], &c);
                    ad_g[j][(i, l)] = v;
                    if v != 0.0 {
                        recon += basis[i] * Complex64::new(v, 0.0);
                    }
                }
                closure = closure.max(frob(&(c - recon)));
            }
        }
        report.algebra_closure = closure;
        if closure > BRACKET_TOL {
            return Err(Error::InvariantViolation {
                check: "g closed under the bracket".into(),
                residual: closure,
            });
        }
        let block_max = |m: &DMatrix<f64>, r0: usize, nr: usize, c0: usize, nc: usize| {
            if nr == 0 || nc == 0 {
                0.0
            } else {
                m.view((r0, c0), (nr, nc)).amax()
            }
        };
        let (mut kk, mut kp, mut pp, mut inv): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
        for j in 0..dg {
            inv = inv.max((&ad_g[j] + ad_g[j].transpose()).amax());
            if j < dk {
                kk = kk.max(block_max(&ad_g[j], dk, dp, 0, dk));
                kp = kp.max(block_max(&ad_g[j], 0, dk, dk, dp));
            } else {
                pp = pp.max(block_max(&ad_g[j], dk, dp, dk, dp));
            }
        }
        report.kk_in_k = kk;
        report.kp_in_p = kp;
        report.pp_in_k = pp;
        report.ad_invariance = inv;
        for (check, r) in [
            ("[k,k] ⊆ k", kk),
            ("[k,p] ⊆ p", kp),
            ("[p,p] ⊆ k", pp),
            ("ad-invariance of the inner product", inv),
        ] {
            if r > BRACKET_TOL {
                return Err(Error::InvariantViolation {
                    check: check.into(),
                    residual: r,
                });
            }
        }
        let mut ab: f64 = 0.0;
        for i in 0..self.rank {
            for j in 0..self.rank {
                ab = ab.max(ad_g[dk + i].column(dk + j).amax());
            }
        }
        report.a_abelian = ab;
        if ab > BRACKET_TOL {
            return Err(Error::InvariantViolation {
                check: "a is abelian".into(),
                residual: ab,
            });
        }
        self.ad_kp = (0..dk)
            .map(|j| ad_g[j].view((dk, dk), (dp, dp)).into_owned())
            .collect();
        self.ad_kk = (0..dk)
            .map(|j| ad_g[j].view((0, 0), (dk, dk)).into_owned())
            .collect();
        self.ad_g = ad_g;
        Ok(())
    }

    fn check_maximal_abelian(&self) -> Result<()> {
        // Centralizer of a in p: kernel of x ↦ ([a_1, x], ..., [a_r, x]).
        let dk = self.dim_k();
        let dp = self.dim_p();
        let mut stacked = DMatrix::zeros(dk * self.rank.max(1), dp);
        for i in 0..self.rank {
            let ad = &self.ad_g[dk + i];
            stacked
                .view_mut((i * dk, 0), (dk, dp))
                .copy_from(&ad.view((0, dk), (dk, dp)));
        }
        let found = if self.rank == 0 { dp } else { kernel(&stacked, 1e-8).dim() };
        if found != self.rank {
            return Err(Error::NotMaximalAbelian {
                found,
                rank: self.rank,
            });
        }
        Ok(())
    }

    pub fn dim_k(&self) -> usize {
        self.basis_k.len()
    }

    pub fn dim_p(&self) -> usize {
        self.basis_p.len()
    }

    pub fn dim_g(&self) -> usize {
        self.dim_k() + self.dim_p()
    }

    /// Dimension of a principal orbit Ad(K)·q.
    pub fn orbit_dim(&self) -> usize {
        self.dim_p() - self.rank
    }

    /// ad(k_j)|_p.
    pub fn ad_k_on_p(&self, j: usize) -> &DMatrix<f64> {
        &self.ad_kp[j]
    }

    /// ad(k_j)|_k.
    pub fn ad_k_on_k(&self, j: usize) -> &DMatrix<f64> {
        &self.ad_kk[j]
    }

    /// ad(g_j) on g in (k, p) coordinates.
    pub fn ad_on_g(&self, j: usize) -> &DMatrix<f64> {
        &self.ad_g[j]
    }

    /// ad(k_j)|_p for the j-th basis vector of k.
    pub fn ad_basis_on_p(&self, j: usize) -> &DMatrix<f64> {
        &self.ad_kp[j]
    }

    /// ad(z)|_p for z given in k-coordinates.
    pub fn ad_on_p(&self, z: &DVector<f64>) -> DMatrix<f64> {
        let dp = self.dim_p();
        let mut m = DMatrix::zeros(dp, dp);
        for (j, c) in z.iter().enumerate() {
            if *c != 0.0 {
                m += &self.ad_kp[j] * *c;
            }
        }
        m
    }

    /// ad(z)|_k for z in k-coordinates.
    pub fn ad_on_k(&self, z: &DVector<f64>) -> DMatrix<f64> {
        let dk = self.dim_k();
        let mut m = DMatrix::zeros(dk, dk);
        for (j, c) in z.iter().enumerate() {
            if *c != 0.0 {
                m += &self.ad_kk[j] * *c;
            }
        }
        m
    }

    /// ad(x) on g for x ∈ p given in p-coordinates.
    pub fn ad_p_on_g(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let dk = self.dim_k();
        let dg = self.dim_g();
        let mut m = DMatrix::zeros(dg, dg);
        for (i, c) in x.iter().enumerate() {
            if *c != 0.0 {
                m += &self.ad_g[dk + i] * *c;
            }
        }
        m
    }

    /// [z, x] for z ∈ k, x ∈ p (coordinates).
    pub fn bracket_kp(&self, z: &DVector<f64>, x: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.dim_p());
        for (j, c) in z.iter().enumerate() {
            if *c != 0.0 {
                out += (&self.ad_kp[j] * x) * *c;
            }
        }
        out
    }

    /// Matrix of z ↦ [z, x] from k-coordinates to p-coordinates.
    pub fn lift_map(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let cols: Vec<DVector<f64>> = self.ad_kp.iter().map(|m| m * x).collect();
        DMatrix::from_columns(&cols)
    }

    /// Embeds a vector of a (a-coordinates) into p-coordinates.
    pub fn a_to_p(&self, v: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.dim_p());
        out.rows_mut(0, self.rank).copy_from(v);
        out
    }

    /// Orthogonal projection p → a (the moment map on coordinates).
    pub fn p_to_a(&self, x: &DVector<f64>) -> DVector<f64> {
        x.rows(0, self.rank).into_owned()
    }

    pub fn k_matrix(&self, z: &DVector<f64>) -> CMatrix {
        combine(&self.basis_k, z.iter().cloned(), self.matrix_size)
    }

    pub fn p_matrix(&self, x: &DVector<f64>) -> CMatrix {
        combine(&self.basis_p, x.iter().cloned(), self.matrix_size)
    }

    /// p-coordinates of a matrix assumed to lie in p.
    pub fn p_coords(&self, x: &CMatrix) -> DVector<f64> {
        DVector::from_fn(self.dim_p(), |i, _| trace_form(&self.basis_p[i], x))
    }

    pub fn k_coords(&self, z: &CMatrix) -> DVector<f64> {
        DVector::from_fn(self.dim_k(), |i, _| trace_form(&self.basis_k[i], z))
    }

    /// Involution in the (k, p) basis: +1 on k, −1 on p.
    pub fn involution_matrix(&self) -> DMatrix<f64> {
        let dk = self.dim_k();
        DMatrix::from_fn(self.dim_g(), self.dim_g(), |i, j| {
            if i != j {
                0.0
            } else if i < dk {
                1.0
            } else {
                -1.0
            }
        })
    }

    /// Re-runs every structural check on the stored data.
    pub fn validate(&self) -> Result<ValidationReport> {
        let mut basis_g = self.basis_k.clone();
        basis_g.extend(self.basis_p.iter().cloned());
        let a: Vec<CMatrix> = self.basis_p[..self.rank].to_vec();
        let (_, report) = Self::from_involution(
            self.name.clone(),
            self.params.clone(),
            self.matrix_size,
            &basis_g,
            &self.involution_matrix(),
            &a,
        )?;
        Ok(report)
    }
}
