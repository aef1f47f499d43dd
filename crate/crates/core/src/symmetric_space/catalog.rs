//! Built-in symmetric pairs, each behind the [`ModelBuilder`] trait and
//! registered by name in a [`Catalog`].

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::model::SymmetricSpaceModel;
use crate::error::{Error, Result};
use crate::numerics::{trace_form, CMatrix};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Constructs a [`SymmetricSpaceModel`] from integer parameters.
pub trait ModelBuilder: Send + Sync {
    fn name(&self) -> &'static str;

    fn aliases(&self) -> &'static [&'static str] {
        &[]
    }

    fn summary(&self) -> &'static str;

    fn default_params(&self) -> Vec<i64>;

    fn build(&self, params: &[i64]) -> Result<SymmetricSpaceModel>;
}

/// Name-indexed registry of model builders.
pub struct Catalog {
    builders: Vec<Box<dyn ModelBuilder>>,
}

impl Default for Catalog {
    fn default() -> Self {
        Self::builtin()
    }
}

impl Catalog {
    pub fn empty() -> Self {
        Catalog {
            builders: Vec::new(),
        }
    }

    pub fn builtin() -> Self {
        let mut c = Self::empty();
        c.register(Box::new(AdjointSu));
        c.register(Box::new(Su2nOverSpn));
        c.register(Box::new(Su3OverU2));
        c.register(Box::new(Su2OverSo2));
        c.register(Box::new(ComplexGrassmannian));
        c
    }

    pub fn register(&mut self, builder: Box<dyn ModelBuilder>) {
        self.builders.retain(|b| b.name() != builder.name());
        self.builders.push(builder);
    }

    pub fn builders(&self) -> impl Iterator<Item = &dyn ModelBuilder> {
        self.builders.iter().map(|b| b.as_ref())
    }

    pub fn get(&self, name: &str) -> Result<&dyn ModelBuilder> {
        self.builders
            .iter()
            .find(|b| b.name() == name || b.aliases().contains(&name))
            .map(|b| b.as_ref())
            .ok_or_else(|| Error::UnknownModel(name.to_string()))
    }

    /// Builds `name` with `params`, or the builder's defaults when empty.
    pub fn build(&self, name: &str, params: &[i64]) -> Result<SymmetricSpaceModel> {
        let b = self.get(name)?;
        if params.is_empty() {
            b.build(&b.default_params())
        } else {
            b.build(params)
        }
    }
}

/// Builds a model from the built-in catalog.
pub fn build_catalog_model(name: &str, params: &[i64]) -> Result<SymmetricSpaceModel> {
    Catalog::builtin().build(name, params)
}

fn unit(n: usize, r: usize, c: usize) -> CMatrix {
    let mut m = CMatrix::zeros(n, n);
    m[(r, c)] = Complex64::new(1.0, 0.0);
    m
}

/// Orthonormal basis of su(n) under −Re tr(xy).
pub fn su_basis(n: usize) -> Vec<CMatrix> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::new();
    for j in 0..n {
        for k in (j + 1)..n {
            out.push((unit(n, j, k) - unit(n, k, j)) * Complex64::new(s, 0.0));
            out.push((unit(n, j, k) + unit(n, k, j)) * (I * s));
        }
    }
    out.extend(cartan_basis(n));
    out
}

/// Orthonormal basis of the diagonal traceless skew-Hermitian matrices.
pub fn cartan_basis(n: usize) -> Vec<CMatrix> {
    (1..n)
        .map(|l| {
            let norm = ((l * (l + 1)) as f64).sqrt();
            let mut m = CMatrix::zeros(n, n);
            for i in 0..l {
                m[(i, i)] = I / norm;
            }
            m[(l, l)] = I * (-(l as f64) / norm);
            m
        })
        .collect()
}

fn involution_in_basis(basis: &[CMatrix], theta: impl Fn(&CMatrix) -> CMatrix) -> DMatrix<f64> {
    let images: Vec<CMatrix> = basis.iter().map(&theta).collect();
    DMatrix::from_fn(basis.len(), basis.len(), |i, j| trace_form(&basis[i], &images[j]))
}

fn block_diag(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (n, m) = (a.nrows(), b.nrows());
    let mut out = CMatrix::zeros(n + m, n + m);
    out.view_mut((0, 0), (n, n)).copy_from(a);
    out.view_mut((n, n), (m, m)).copy_from(b);
    out
}

fn param(model: &str, params: &[i64], idx: usize, min: i64) -> Result<usize> {
    let v = *params.get(idx).ok_or_else(|| Error::InvalidParams {
        model: model.into(),
        reason: format!("missing parameter #{}", idx + 1),
    })?;
    if v < min {
        return Err(Error::InvalidParams {
            model: model.into(),
            reason: format!("parameter #{} must be >= {min}, got {v}", idx + 1),
        });
    }
    Ok(v as usize)
}

fn expect_len(model: &str, params: &[i64], n: usize) -> Result<()> {
    if params.len() != n {
        return Err(Error::InvalidParams {
            model: model.into(),
            reason: format!("expected {n} parameter(s), got {}", params.len()),
        });
    }
    Ok(())
}

fn finish(
    name: &str,
    params: &[i64],
    n: usize,
    basis: &[CMatrix],
    theta: impl Fn(&CMatrix) -> CMatrix,
    a: &[CMatrix],
) -> Result<SymmetricSpaceModel> {
    let inv = involution_in_basis(basis, theta);
    let (model, _) = SymmetricSpaceModel::from_involution(name, params.to_vec(), n, basis, &inv, a)?;
    Ok(model)
}

/// Adjoint orbits of SU(n), modeled as the pair (su(n) ⊕ su(n), diagonal).
pub struct AdjointSu;

impl ModelBuilder for AdjointSu {
    fn name(&self) -> &'static str {
        "adjoint-su"
    }
    fn summary(&self) -> &'static str {
        "adjoint orbits of SU(n) as the pair (su(n)+su(n), diagonal); params: n >= 2"
    }
    fn default_params(&self) -> Vec<i64> {
        vec![3]
    }
    fn build(&self, params: &[i64]) -> Result<SymmetricSpaceModel> {
        expect_len(self.name(), params, 1)?;
        let n = param(self.name(), params, 0, 2)?;
        let zero = CMatrix::zeros(n, n);
        let mut basis = Vec::new();
        for x in su_basis(n) {
            basis.push(block_diag(&x, &zero));
            basis.push(block_diag(&zero, &x));
        }
        let swap = move |m: &CMatrix| {
            let x = m.view((0, 0), (n, n)).into_owned();
            let y = m.view((n, n), (n, n)).into_owned();
            block_diag(&y, &x)
        };
        let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let a: Vec<CMatrix> = cartan_basis(n)
            .iter()
            .map(|h| block_diag(h, &(-h)) * s)
            .collect();
        finish(self.name(), params, 2 * n, &basis, swap, &a)
    }
}

/// SU(2n)/Sp(n) with the quaternionic structure embedded as 2n×2n complex
/// matrices: θ(X) = J X̄ J⁻¹, J = [[0, I], [−I, 0]].
pub struct Su2nOverSpn;

impl ModelBuilder for Su2nOverSpn {
    fn name(&self) -> &'static str {
        "su2n-over-spn"
    }
    fn summary(&self) -> &'static str {
        "SU(2n)/Sp(n), restricted roots of type A_{n-1}; params: n >= 2"
    }
    fn default_params(&self) -> Vec<i64> {
        vec![2]
    }
    fn build(&self, params: &[i64]) -> Result<SymmetricSpaceModel> {
        expect_len(self.name(), params, 1)?;
        let n = param(self.name(), params, 0, 2)?;
        let size = 2 * n;
        let mut j = CMatrix::zeros(size, size);
        for i in 0..n {
            j[(i, n + i)] = Complex64::new(1.0, 0.0);
            j[(n + i, i)] = Complex64::new(-1.0, 0.0);
        }
        let j_inv = -j.clone();
        let theta = move |x: &CMatrix| &j * x.map(|z| z.conj()) * &j_inv;
        let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let a: Vec<CMatrix> = cartan_basis(n).iter().map(|h| block_diag(h, h) * s).collect();
        finish(self.name(), params, size, &su_basis(size), theta, &a)
    }
}

/// CP² = SU(3)/S(U(1)×U(2)) with U(2) in the lower-right block.
pub struct Su3OverU2;

impl ModelBuilder for Su3OverU2 {
    fn name(&self) -> &'static str {
        "su3-over-u2"
    }
    fn summary(&self) -> &'static str {
        "CP^2 = SU(3)/U(2); roots alpha and 2 alpha; no params"
    }
    fn default_params(&self) -> Vec<i64> {
        Vec::new()
    }
    fn build(&self, params: &[i64]) -> Result<SymmetricSpaceModel> {
        expect_len(self.name(), params, 0)?;
        let mut s = CMatrix::identity(3, 3);
        s[(0, 0)] = Complex64::new(-1.0, 0.0);
        let theta = move |x: &CMatrix| &s * x * &s;
        let a = vec![(unit(3, 1, 0) - unit(3, 0, 1)) * Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0)];
        finish(self.name(), params, 3, &su_basis(3), theta, &a)
    }
}

/// SU(2)/SO(2): the orbits are circles.
pub struct Su2OverSo2;

impl ModelBuilder for Su2OverSo2 {
    fn name(&self) -> &'static str {
        "su2-over-so2"
    }
    fn aliases(&self) -> &'static [&'static str] {
        &["circle"]
    }
    fn summary(&self) -> &'static str {
        "SU(2)/SO(2); orbits are circles, multiplicity 1; no params"
    }
    fn default_params(&self) -> Vec<i64> {
        Vec::new()
    }
    fn build(&self, params: &[i64]) -> Result<SymmetricSpaceModel> {
        expect_len(self.name(), params, 0)?;
        let theta = |x: &CMatrix| x.map(|z| z.conj());
        let a = cartan_basis(2);
        finish(self.name(), params, 2, &su_basis(2), theta, &a)
    }
}

/// SU(m+n)/S(U(m)×U(n)), m >= n >= 1.
pub struct ComplexGrassmannian;

impl ModelBuilder for ComplexGrassmannian {
    fn name(&self) -> &'static str {
        "su(m+n)-over-s(u(m)xu(n))"
    }
    fn aliases(&self) -> &'static [&'static str] {
        &["grassmannian", "su(m+n)-over-s(u(m)×u(n))"]
    }
    fn summary(&self) -> &'static str {
        "complex Grassmannian SU(m+n)/S(U(m)xU(n)); params: m >= n >= 1"
    }
    fn default_params(&self) -> Vec<i64> {
        vec![3, 2]
    }
    fn build(&self, params: &[i64]) -> Result<SymmetricSpaceModel> {
        expect_len(self.name(), params, 2)?;
        let m = param(self.name(), params, 0, 1)?;
        let n = param(self.name(), params, 1, 1)?;
        if m < n {
            return Err(Error::InvalidParams {
                model: self.name().into(),
                reason: format!("need m >= n, got m = {m}, n = {n}"),
            });
        }
        let size = m + n;
        let mut s = CMatrix::identity(size, size);
        for i in m..size {
            s[(i, i)] = Complex64::new(-1.0, 0.0);
        }
        let theta = move |x: &CMatrix| &s * x * &s;
        let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let a: Vec<CMatrix> = (0..n)
            .map(|i| (unit(size, m + i, i) - unit(size, i, m + i)) * h)
            .collect();
        finish(self.name(), params, size, &su_basis(size), theta, &a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn su_basis_is_orthonormal() {
        for n in 2..5 {
            let b = su_basis(n);
            assert_eq!(b.len(), n * n - 1);
            for i in 0..b.len() {
                for j in 0..b.len() {
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((trace_form(&b[i], &b[j]) - expect).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn dimensions_of_catalog_models() {
        let c = Catalog::builtin();
        let cases: &[(&str, &[i64], usize, usize, usize)] = &[
            ("adjoint-su", &[2], 3, 3, 1),
            ("adjoint-su", &[3], 8, 8, 2),
            ("su2n-over-spn", &[2], 10, 5, 1),
            ("su2n-over-spn", &[3], 21, 14, 2),
            ("su3-over-u2", &[], 4, 4, 1),
            ("su2-over-so2", &[], 1, 2, 1),
            ("grassmannian", &[3, 2], 12, 12, 2),
        ];
        for (name, params, dk, dp, rank) in cases {
            let m = c.build(name, params).unwrap();
            assert_eq!((m.dim_k(), m.dim_p(), m.rank), (*dk, *dp, *rank), "{name} {params:?}");
        }
    }

    #[test]
    fn unknown_name_and_bad_params_are_errors() {
        let c = Catalog::builtin();
        assert!(matches!(c.build("e6-over-f4", &[]), Err(Error::UnknownModel(_))));
        assert!(matches!(
            c.build("su2n-over-spn", &[1]),
            Err(Error::InvalidParams { .. })
        ));
        assert!(matches!(
            c.build("grassmannian", &[1, 2]),
            Err(Error::InvalidParams { .. })
        ));
        assert!(matches!(
            c.build("su3-over-u2", &[4]),
            Err(Error::InvalidParams { .. })
        ));
    }

    #[test]
    fn every_catalog_model_validates() {
        let c = Catalog::builtin();
        for b in c.builders() {
            let m = b.build(&b.default_params()).unwrap();
            let r = m.validate().unwrap();
            assert!(r.kk_in_k < 1e-9 && r.kp_in_p < 1e-9 && r.pp_in_k < 1e-9);
            assert!(r.involution_square < 1e-10);
            assert!(r.ad_invariance < 1e-9);
        }
    }

    #[test]
    fn registry_replaces_by_name() {
        let mut c = Catalog::builtin();
        let before = c.builders().count();
        c.register(Box::new(Su2OverSo2));
        assert_eq!(c.builders().count(), before);
        assert_eq!(c.get("circle").unwrap().name(), "su2-over-so2");
    }
}
