//! JSON model documents: user-supplied symmetric pairs.
//!
//! ```json
//! {
//!   "schema": "isoflag-model/1",
//!   "name": "my-pair",
//!   "ambient_size": 3,
//!   "scalar": "complex",
//!   "inner_product_scale": 1.0,
//!   "basis": [[re, im, re, im, ...], ...],
//!   "involution": [[...], ...],
//!   "a_basis": [5, 6]
//! }
//! ```
//!
//! * `basis` lists an orthonormal basis of g under ⟨x, y⟩ = −Re tr(xy). Each
//!   matrix is flattened row-major; with `"scalar": "complex"` entries are
//!   interleaved (re, im) pairs, with `"scalar": "real"` they are plain reals.
//! * `involution` is the matrix of θ in that basis, given row by row: column
//!   j holds the coordinates of θ(basis[j]).
//! * `a_basis` holds indices into `basis` of the matrices spanning a.
//!
//! Every structural invariant is re-checked before a model is accepted.

use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::model::SymmetricSpaceModel;
use crate::error::{Error, Result};
use crate::numerics::CMatrix;

pub const MODEL_SCHEMA: &str = "isoflag-model/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scalar {
    Real,
    Complex,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModelDocument {
    pub schema: String,
    pub name: String,
    pub ambient_size: usize,
    pub scalar: Scalar,
    #[serde(default = "unit_scale")]
    pub inner_product_scale: f64,
    pub basis: Vec<Vec<f64>>,
    pub involution: Vec<Vec<f64>>,
    pub a_basis: Vec<usize>,
}

fn unit_scale() -> f64 {
    1.0
}

impl ModelDocument {
    /// Exports a model in its adapted basis (k first, then p with a leading).
    pub fn from_model(model: &SymmetricSpaceModel) -> Self {
        let basis: Vec<Vec<f64>> = model
            .basis_k
            .iter()
            .chain(model.basis_p.iter())
            .map(|m| {
                let n = m.nrows();
                let mut flat = Vec::with_capacity(2 * n * n);
                for i in 0..n {
                    for j in 0..n {
                        flat.push(m[(i, j)].re);
                        flat.push(m[(i, j)].im);
                    }
                }
                flat
            })
            .collect();
        let inv = model.involution_matrix();
        let involution = (0..inv.nrows())
            .map(|i| inv.row(i).iter().cloned().collect())
            .collect();
        let dk = model.dim_k();
        ModelDocument {
            schema: MODEL_SCHEMA.into(),
            name: model.name.clone(),
            ambient_size: model.matrix_size,
            scalar: Scalar::Complex,
            inner_product_scale: model.inner_product_scale,
            basis,
            involution,
            a_basis: (dk..dk + model.rank).collect(),
        }
    }

    fn matrix(&self, flat: &[f64]) -> Result<CMatrix> {
        let n = self.ambient_size;
        let per = match self.scalar {
            Scalar::Real => 1,
            Scalar::Complex => 2,
        };
        if flat.len() != per * n * n {
            return Err(Error::Document(format!(
                "basis matrix has {} entries, expected {}",
                flat.len(),
                per * n * n
            )));
        }
        Ok(CMatrix::from_fn(n, n, |i, j| {
            let k = per * (i * n + j);
            match self.scalar {
                Scalar::Real => Complex64::new(flat[k], 0.0),
                Scalar::Complex => Complex64::new(flat[k], flat[k + 1]),
            }
        }))
    }

    /// Validates the document and builds the model.
    pub fn into_model(self) -> Result<SymmetricSpaceModel> {
        if self.schema != MODEL_SCHEMA {
            return Err(Error::Document(format!(
                "unsupported schema `{}` (expected `{MODEL_SCHEMA}`)",
                self.schema
            )));
        }
        if !(self.inner_product_scale.is_finite() && self.inner_product_scale > 0.0) {
            return Err(Error::Document("inner_product_scale must be positive".into()));
        }
        let basis: Vec<CMatrix> = self
            .basis
            .iter()
            .map(|f| self.matrix(f))
            .collect::<Result<_>>()?;
        let dg = basis.len();
        if self.involution.len() != dg || self.involution.iter().any(|r| r.len() != dg) {
            return Err(Error::Document(format!("involution must be a {dg}×{dg} matrix")));
        }
        let inv = DMatrix::from_fn(dg, dg, |i, j| self.involution[i][j]);
        let mut a = Vec::with_capacity(self.a_basis.len());
        for &i in &self.a_basis {
            let m = basis
                .get(i)
                .ok_or_else(|| Error::Document(format!("a_basis index {i} out of range")))?;
            a.push(m.clone());
        }
        if a.is_empty() {
            return Err(Error::EmptyInput("a_basis"));
        }
        let (mut model, _) =
            SymmetricSpaceModel::from_involution(self.name, Vec::new(), self.ambient_size, &basis, &inv, &a)?;
        model.inner_product_scale = self.inner_product_scale;
        Ok(model)
    }
}

/// Parses and validates a model document from JSON text.
pub fn load_model_str(text: &str) -> Result<SymmetricSpaceModel> {
    let doc: ModelDocument = serde_json::from_str(text)?;
    doc.into_model()
}

/// Reads, parses and validates a model document.
pub fn load_model(path: impl AsRef<Path>) -> Result<SymmetricSpaceModel> {
    load_model_str(&std::fs::read_to_string(path)?)
}
