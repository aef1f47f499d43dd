use std::fmt::Write as _;

use nalgebra::DVector;
use rayon::prelude::*;
use serde::Serialize;

use super::orbit::{check_q, moment_map, orbit_point, sample_direction};
use super::weyl::{weyl_orbit, WeylGroup};
use crate::error::Result;
use crate::numerics::{convex_hull, HalfSpace, HullMode, Polytope, GEOM_TOL};
use crate::symmetric_space::SymmetricSpaceModel;

/// cvx(W·q).
pub fn moment_polytope(w: &WeylGroup, q: &DVector<f64>) -> Result<Polytope> {
    convex_hull(&weyl_orbit(w, q), GEOM_TOL)
}

/// Result of testing μ(x) ∈ cvx(W·q) on sampled orbit points.
#[derive(Clone, Debug, Serialize)]
pub struct ContainmentReport {
    pub samples: usize,
    pub tol: f64,
    pub failures: usize,
    /// Largest facet violation (negative means strictly inside).
    pub max_violation: f64,
    pub max_sphere_defect: f64,
}

impl ContainmentReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// Samples `n` orbit points (seeded) and checks their moment images.
pub fn containment_check(
    model: &SymmetricSpaceModel,
    polytope: &Polytope,
    q: &DVector<f64>,
    n: usize,
    seed: u64,
    tol: f64,
) -> Result<ContainmentReport> {
    check_q(model, q)?;
    let qn = q.norm();
    let rows: Vec<Result<(bool, f64, f64)>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let x = orbit_point(model, q, &sample_direction(model, seed, i));
            let m = moment_map(model, &x);
            Ok((polytope.contains(&m, tol)?, polytope.max_violation(&m), (x.x.norm() - qn).abs()))
        })
        .collect();
    let mut report = ContainmentReport {
        samples: n,
        tol,
        failures: 0,
        max_violation: f64::NEG_INFINITY,
        max_sphere_defect: 0.0,
    };
    for r in rows {
        let (inside, viol, sphere) = r?;
        if !inside {
            report.failures += 1;
        }
        report.max_violation = report.max_violation.max(viol);
        report.max_sphere_defect = report.max_sphere_defect.max(sphere);
    }
    Ok(report)
}

pub const POLYTOPE_SCHEMA: &str = "isoflag-polytope/1";

/// Structured export of a moment polytope.
#[derive(Clone, Debug, Serialize)]
pub struct PolytopeDocument {
    pub schema: &'static str,
    pub model: String,
    pub rank: usize,
    pub q: Vec<f64>,
    pub dim: usize,
    pub mode: HullMode,
    pub vertices: Vec<Vec<f64>>,
    pub facets: Vec<HalfSpace>,
    pub equalities: Vec<HalfSpace>,
    pub edges: Vec<(usize, usize)>,
}

impl PolytopeDocument {
    pub fn new(model: &SymmetricSpaceModel, q: &DVector<f64>, p: &Polytope) -> Self {
        PolytopeDocument {
            schema: POLYTOPE_SCHEMA,
            model: model.name.clone(),
            rank: p.ambient_dim,
            q: q.iter().cloned().collect(),
            dim: p.dim,
            mode: p.mode,
            vertices: p.vertices.iter().map(|v| v.iter().cloned().collect()).collect(),
            facets: p.facets.clone(),
            equalities: p.equalities.clone(),
            edges: p.edges(),
        }
    }
}

fn project_2d(v: &DVector<f64>) -> (f64, f64) {
    match v.len() {
        0 => (0.0, 0.0),
        1 => (v[0], 0.0),
        2 => (v[0], v[1]),
        _ => {
            // fixed oblique view for rank 3
            let (x, y, z) = (v[0], v[1], v[2]);
            (x - 0.5 * z, y - 0.35 * z)
        }
    }
}

/// Vector graphic of the polytope (rank ≤ 3, rank 3 drawn in an oblique
/// projection), with optional moment images of samples as dots.
pub fn polytope_svg(p: &Polytope, points: &[DVector<f64>]) -> String {
    let size = 480.0;
    let pad = 30.0;
    let proj: Vec<(f64, f64)> = p.vertices.iter().map(project_2d).collect();
    let dots: Vec<(f64, f64)> = points.iter().map(project_2d).collect();
    let all = proj.iter().chain(dots.iter());
    let (mut lo_x, mut hi_x, mut lo_y, mut hi_y) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in all {
        lo_x = lo_x.min(x);
        hi_x = hi_x.max(x);
        lo_y = lo_y.min(y);
        hi_y = hi_y.max(y);
    }
    let span = (hi_x - lo_x).max(hi_y - lo_y).max(1e-9);
    let scale = (size - 2.0 * pad) / span;
    let cx = 0.5 * (lo_x + hi_x);
    let cy = 0.5 * (lo_y + hi_y);
    let map = |(x, y): (f64, f64)| (size / 2.0 + (x - cx) * scale, size / 2.0 - (y - cy) * scale);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (i, j) in p.edges() {
        let (x1, y1) = map(proj[i]);
        let (x2, y2) = map(proj[j]);
        let _ = writeln!(
            s,
            r#"<line x1="{x1:.3}" y1="{y1:.3}" x2="{x2:.3}" y2="{y2:.3}" stroke="black" stroke-width="1.5"/>"#
        );
    }
    for &d in &dots {
        let (x, y) = map(d);
        let _ = writeln!(s, r#"<circle cx="{x:.3}" cy="{y:.3}" r="1.2" fill="steelblue" fill-opacity="0.5"/>"#);
    }
    for &v in &proj {
        let (x, y) = map(v);
        let _ = writeln!(s, r#"<circle cx="{x:.3}" cy="{y:.3}" r="3.5" fill="crimson"/>"#);
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symmetric_space::{build_catalog_model, restricted_roots};
    use crate::weyl_moment::orbit::default_q;
    use crate::weyl_moment::weyl::generate_weyl;

    #[test]
    fn rank_one_polytope_is_a_segment() {
        let m = build_catalog_model("su2-over-so2", &[]).unwrap();
        let rs = restricted_roots(&m).unwrap();
        let w = generate_weyl(&rs).unwrap();
        let q = DVector::from_element(1, 1.0);
        let p = moment_polytope(&w, &q).unwrap();
        assert_eq!(p.dim, 1);
        assert_eq!(p.vertices.len(), 2);
        assert!(p.contains(&DVector::from_element(1, -1.0), 1e-9).unwrap());
        assert!(!p.contains(&DVector::from_element(1, 1.1), 1e-9).unwrap());
    }

    #[test]
    fn a2_regular_polytope_is_a_hexagon() {
        let m = build_catalog_model("adjoint-su", &[3]).unwrap();
        let rs = restricted_roots(&m).unwrap();
        let w = generate_weyl(&rs).unwrap();
        let q = default_q(&rs);
        let p = moment_polytope(&w, &q).unwrap();
        assert_eq!((p.dim, p.vertices.len(), p.facets.len()), (2, 6, 6));
        assert!(p.contains(&DVector::zeros(2), 1e-9).unwrap());
        assert!(!p.contains(&(&q * 2.0), 1e-9).unwrap());
        let svg = polytope_svg(&p, &[]);
        assert_eq!(svg.matches("<line").count(), 6);
    }

    #[test]
    fn zero_q_gives_a_point() {
        let m = build_catalog_model("adjoint-su", &[3]).unwrap();
        let rs = restricted_roots(&m).unwrap();
        let w = generate_weyl(&rs).unwrap();
        let p = moment_polytope(&w, &DVector::zeros(2)).unwrap();
        assert_eq!((p.dim, p.vertices.len()), (0, 1));
    }

    #[test]
    fn samples_of_cp2_lie_in_the_polytope() {
        let m = build_catalog_model("su3-over-u2", &[]).unwrap();
        let rs = restricted_roots(&m).unwrap();
        let w = generate_weyl(&rs).unwrap();
        let q = default_q(&rs);
        let p = moment_polytope(&w, &q).unwrap();
        let rep = containment_check(&m, &p, &q, 500, 8, 1e-7).unwrap();
        assert!(rep.passed(), "{rep:?}");
        assert!(rep.max_sphere_defect < 1e-9);
    }

    #[test]
    fn document_lists_vertices_and_facets() {
        let m = build_catalog_model("adjoint-su", &[3]).unwrap();
        let rs = restricted_roots(&m).unwrap();
        let w = generate_weyl(&rs).unwrap();
        let q = default_q(&rs);
        let doc = PolytopeDocument::new(&m, &q, &moment_polytope(&w, &q).unwrap());
        let json = serde_json::to_value(&doc).unwrap();
        assert_eq!(json["schema"], POLYTOPE_SCHEMA);
        assert_eq!(json["vertices"].as_array().unwrap().len(), 6);
        assert_eq!(json["facets"].as_array().unwrap().len(), 6);
    }
}
