//! Weyl groups, orbits, the moment map μ: M → a, moment polytopes and the
//! curvature normals of the orbit M = Ad(K)·q.

pub mod flag;
pub mod normals;
pub mod orbit;
pub mod polytope;
pub mod tangent;
pub mod weyl;

pub use flag::FlagOrbit;
pub use normals::{
    check_regular, curvature_normals, focal_residual, normal_of_root, shape_operator_check, CurvatureNormal,
    ShapeOperatorCheck,
};
pub use orbit::{
    ad_exp, default_q, group_exp, moment_map, normalize_q, orbit_point, sample_direction, sample_orbit, OrbitPoint,
};
pub use polytope::{containment_check, moment_polytope, polytope_svg, ContainmentReport, PolytopeDocument};
pub use tangent::{second_variation, TangentFrame};
pub use weyl::{generate_weyl, orbit_of_subgroup, weyl_orbit, WeylElement, WeylGroup, WeylRealization};
