//! Torus criterion for surjectivity of the Kirwan-type map: for every
//! b ∈ a, a torus T ⊂ K₀ should fix exactly the root spaces k_α with
//! α(b) = 0. Since Z_k(b) only depends on the vanishing roots, the check runs
//! on one generic b per Weyl class of wall intersections. A torus is the
//! closure of a one-parameter subgroup exp(tZ), so its fixed set on k is
//! ker(ad_Z) and the search reduces to linear algebra on k₀.

pub mod criterion;
pub mod torus;
pub mod walls;

pub use criterion::{criterion_verdict, CriterionReport, CriterionVerdict, WallTypeVerdict, CRITERION_SCHEMA};
pub use torus::{
    admissible_generators, check_fixed_points_on_m, find_torus_witness, root_part, vanishing_root_space,
    FixedPointReport, TorusObstruction, TorusOutcome, TorusWitness, TORUS_TOL, WITNESS_ATTEMPTS,
};
pub use walls::{generic_point, vanishing_mask, wall_types, WallType, WALL_TOL};
