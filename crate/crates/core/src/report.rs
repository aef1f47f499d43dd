//! Versioned report documents. Every document starts with a `schema` field;
//! field order is fixed so that identical runs serialize byte-identically.

use serde::Serialize;

use crate::error::Result;
use crate::morse::{CriticalComponent, DegeneracyAudit, FiberReport};
use crate::symmetric_space::{restricted_roots, Catalog};
use crate::verify::{SuiteReport, VERIFY_SCHEMA};
use crate::weyl_moment::{ContainmentReport, PolytopeDocument};

pub const CATALOG_SCHEMA: &str = "isoflag-catalog/1";
pub const CRITICAL_SCHEMA: &str = "isoflag-critical/1";
pub const FIBER_SCHEMA: &str = "isoflag-fiber/1";

#[derive(Clone, Debug, Serialize)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub aliases: Vec<&'static str>,
    pub summary: &'static str,
    pub default_params: Vec<i64>,
    pub rank: usize,
    pub dim_k: usize,
    pub dim_p: usize,
    pub root_type: String,
    pub multiplicities: Vec<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CatalogDocument {
    pub schema: &'static str,
    pub models: Vec<CatalogEntry>,
}

impl CatalogDocument {
    /// Builds each registered model at its default parameters.
    pub fn from_catalog(catalog: &Catalog) -> Result<Self> {
        let models = catalog
            .builders()
            .map(|b| {
                let params = b.default_params();
                let model = b.build(&params)?;
                let roots = restricted_roots(&model)?;
                Ok(CatalogEntry {
                    name: b.name(),
                    aliases: b.aliases().to_vec(),
                    summary: b.summary(),
                    default_params: params,
                    rank: model.rank,
                    dim_k: model.dim_k(),
                    dim_p: model.dim_p(),
                    root_type: roots.root_type(),
                    multiplicities: roots.multiplicities.clone(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CatalogDocument {
            schema: CATALOG_SCHEMA,
            models,
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PolytopeReport {
    #[serde(flatten)]
    pub polytope: PolytopeDocument,
    pub seed: u64,
    pub containment: ContainmentReport,
}

#[derive(Clone, Debug, Serialize)]
pub struct CriticalDocument {
    pub schema: &'static str,
    pub model: String,
    pub params: Vec<i64>,
    pub q: Vec<f64>,
    pub a: Vec<f64>,
    pub strategy: &'static str,
    pub seed: u64,
    pub components: Vec<CriticalComponent>,
    pub unresolved: usize,
    pub audit: DegeneracyAudit,
}

#[derive(Clone, Debug, Serialize)]
pub struct FiberDocument {
    pub schema: &'static str,
    pub model: String,
    pub params: Vec<i64>,
    pub q: Vec<f64>,
    pub strategy: &'static str,
    pub seed: u64,
    #[serde(flatten)]
    pub report: FiberReport,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyDocument {
    pub schema: &'static str,
    pub seed: u64,
    pub samples: Option<usize>,
    pub passed: bool,
    pub suites: Vec<SuiteReport>,
}

impl VerifyDocument {
    pub fn new(seed: u64, samples: Option<usize>, suites: Vec<SuiteReport>) -> Self {
        VerifyDocument {
            schema: VERIFY_SCHEMA,
            seed,
            samples,
            passed: suites.iter().all(|s| s.passed),
            suites,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_document_lists_paper_multiplicities() {
        let doc = CatalogDocument::from_catalog(&Catalog::builtin()).unwrap();
        let find = |n: &str| doc.models.iter().find(|m| m.name == n).unwrap();
        assert!(find("su2n-over-spn").multiplicities.iter().all(|m| *m == 4));
        assert_eq!(find("su3-over-u2").multiplicities, vec![3]);
        assert_eq!(find("su2-over-so2").multiplicities, vec![1]);
        let v = serde_json::to_value(&doc).unwrap();
        assert_eq!(v["schema"], CATALOG_SCHEMA);
    }
}
