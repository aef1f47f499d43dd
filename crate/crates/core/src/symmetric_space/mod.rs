//! Matrix models of symmetric pairs (g, k), their Cartan decompositions,
//! restricted root systems and the built-in catalog.

pub mod catalog;
pub mod document;
pub mod model;
pub mod roots;

pub use catalog::{build_catalog_model, Catalog, ModelBuilder};
pub use document::{load_model, load_model_str, ModelDocument, MODEL_SCHEMA};
pub use model::{SymmetricSpaceModel, ValidationReport, BRACKET_TOL, INVOLUTION_TOL};
pub use roots::{
    centralizer_from_roots, centralizer_in_k, centralizer_lie_k0, restricted_roots, root_partner,
    root_relation_residual, RestrictedRoot, RestrictedRootSystem, RootSummary,
};
