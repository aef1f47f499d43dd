use nalgebra::DVector;

use super::normals::{check_regular, curvature_normals, CurvatureNormal};
use super::orbit::{check_q, default_q, OrbitPoint};
use super::polytope::moment_polytope;
use super::weyl::{generate_weyl, WeylGroup, WeylRealization};
use crate::error::{Error, Result};
use crate::numerics::Polytope;
use crate::symmetric_space::{restricted_roots, RestrictedRootSystem, SymmetricSpaceModel};

/// Everything derived from a model and a regular base point q: the root
/// system, W with its lifts to K, the curvature normals at q and cvx(W·q).
#[derive(Clone, Debug)]
pub struct FlagOrbit {
    pub model: SymmetricSpaceModel,
    pub roots: RestrictedRootSystem,
    pub weyl: WeylGroup,
    pub lifts: WeylRealization,
    pub q: DVector<f64>,
    pub normals: Vec<CurvatureNormal>,
    pub polytope: Polytope,
}

impl FlagOrbit {
    /// Builds the orbit through `q` (a-coordinates), or through the default
    /// regular point when `q` is `None`. q must be regular and nonzero.
    pub fn new(model: SymmetricSpaceModel, q: Option<DVector<f64>>) -> Result<Self> {
        let roots = restricted_roots(&model)?;
        let q = q.unwrap_or_else(|| default_q(&roots));
        check_q(&model, &q)?;
        if q.norm() == 0.0 {
            return Err(Error::NonRegular { root: 0, value: 0.0 });
        }
        check_regular(&roots, &q)?;
        let weyl = generate_weyl(&roots)?;
        let lifts = WeylRealization::new(&model, &roots, &weyl)?;
        let normals = curvature_normals(&model, &roots, &q)?;
        let polytope = moment_polytope(&weyl, &q)?;
        Ok(FlagOrbit {
            model,
            roots,
            weyl,
            lifts,
            q,
            normals,
            polytope,
        })
    }

    /// The orbit point w·q with its group witness.
    pub fn weyl_point(&self, idx: usize) -> OrbitPoint {
        let m = &self.model;
        OrbitPoint {
            x: m.a_to_p(&self.weyl.apply(idx, &self.q)),
            k_witness: self.lifts.group_element(&self.weyl, idx, m.matrix_size),
        }
    }

    /// α(y) for every indivisible root slot.
    pub fn root_values(&self, y: &DVector<f64>) -> Vec<f64> {
        self.roots.indivisible_roots().map(|(_, r, _)| r.value(y)).collect()
    }
}
