use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numerics::{gaussian_vector, stream_rng, CMatrix};
use crate::symmetric_space::{RestrictedRootSystem, SymmetricSpaceModel};

/// Standard deviation of the Lie-algebra directions used for sampling.
pub const SAMPLE_STD: f64 = 1.0;

/// A point x = Ad(k)·q of the orbit M, in p-coordinates, with its witness k.
#[derive(Clone, Debug)]
pub struct OrbitPoint {
    pub x: DVector<f64>,
    pub k_witness: CMatrix,
}

impl OrbitPoint {
    /// The base point q (given in a-coordinates) with identity witness.
    pub fn base(model: &SymmetricSpaceModel, q: &DVector<f64>) -> Self {
        OrbitPoint {
            x: model.a_to_p(q),
            k_witness: CMatrix::identity(model.matrix_size, model.matrix_size),
        }
    }

    /// Ad(exp z)·self for z ∈ k in coordinates.
    pub fn moved(&self, model: &SymmetricSpaceModel, z: &DVector<f64>) -> Self {
        OrbitPoint {
            x: ad_exp(model, z) * &self.x,
            k_witness: group_exp(model, z) * &self.k_witness,
        }
    }

    /// ‖Ad(k_witness)·q − x‖ computed through matrices.
    pub fn witness_residual(&self, model: &SymmetricSpaceModel, q: &DVector<f64>) -> f64 {
        let k = &self.k_witness;
        let xm = k * model.p_matrix(&model.a_to_p(q)) * k.adjoint();
        (model.p_coords(&xm) - &self.x).norm()
    }

    pub fn matrix(&self, model: &SymmetricSpaceModel) -> CMatrix {
        model.p_matrix(&self.x)
    }
}

/// Ad(exp z) on p, z ∈ k in coordinates.
pub fn ad_exp(model: &SymmetricSpaceModel, z: &DVector<f64>) -> DMatrix<f64> {
    model.ad_on_p(z).exp()
}

/// exp z as a unitary matrix.
pub fn group_exp(model: &SymmetricSpaceModel, z: &DVector<f64>) -> CMatrix {
    model.k_matrix(z).exp()
}

/// Ad(exp z)·q with q in a-coordinates.
pub fn orbit_point(model: &SymmetricSpaceModel, q: &DVector<f64>, z: &DVector<f64>) -> OrbitPoint {
    OrbitPoint::base(model, q).moved(model, z)
}

/// μ(x): orthogonal projection of x onto a, in a-coordinates.
pub fn moment_map(model: &SymmetricSpaceModel, x: &OrbitPoint) -> DVector<f64> {
    model.p_to_a(&x.x)
}

/// Lie-algebra direction used for sample `i`: zero for i = 0, otherwise a
/// Gaussian vector drawn from stream `i` of `seed`.
pub fn sample_direction(model: &SymmetricSpaceModel, seed: u64, i: usize) -> DVector<f64> {
    if i == 0 {
        DVector::zeros(model.dim_k())
    } else {
        gaussian_vector(&mut stream_rng(seed, i as u64), model.dim_k(), SAMPLE_STD)
    }
}

/// `n` seeded orbit points Ad(exp z_i)·q; the first is q itself.
pub fn sample_orbit(model: &SymmetricSpaceModel, q: &DVector<f64>, n: usize, seed: u64) -> Result<Vec<OrbitPoint>> {
    if n == 0 {
        return Err(Error::EmptyInput("sample count"));
    }
    check_q(model, q)?;
    Ok((0..n)
        .into_par_iter()
        .map(|i| orbit_point(model, q, &sample_direction(model, seed, i)))
        .collect())
}

pub(crate) fn check_q(model: &SymmetricSpaceModel, q: &DVector<f64>) -> Result<()> {
    if q.len() != model.rank {
        return Err(Error::DimensionMismatch {
            expected: model.rank,
            got: q.len(),
        });
    }
    if q.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite coordinate in q".into()));
    }
    Ok(())
}

/// Rescales q onto the unit sphere (q = 0 stays 0).
pub fn normalize_q(q: &DVector<f64>) -> DVector<f64> {
    let n = q.norm();
    if n > 0.0 {
        q / n
    } else {
        q.clone()
    }
}

/// Regular unit vector in the positive chamber: the normalized sum of the
/// indivisible positive root duals.
pub fn default_q(roots: &RestrictedRootSystem) -> DVector<f64> {
    let sum = roots
        .indivisible_duals()
        .iter()
        .fold(DVector::zeros(roots.rank), |acc, a| acc + a);
    normalize_q(&sum)
}
