use std::collections::HashMap;

use minilp::{ComparisonOp, OptimizationDirection, Problem};
use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::subspace::{kernel, rank, Subspace};
use super::svd::checked_svd;
use crate::error::{Error, Result};

/// Default geometric tolerance.
pub const GEOM_TOL: f64 = 1e-9;

/// Largest affine dimension for which facets are enumerated.
pub const MAX_FACET_DIM: usize = 4;

/// The half-space `normal · x <= offset` (or the hyperplane, for equalities).
#[derive(Clone, Debug, Serialize)]
pub struct HalfSpace {
    pub normal: Vec<f64>,
    pub offset: f64,
}

impl HalfSpace {
    pub fn value(&self, x: &DVector<f64>) -> f64 {
        self.normal.iter().zip(x.iter()).map(|(a, b)| a * b).sum::<f64>() - self.offset
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum HullMode {
    Facets,
    VertexOnly,
}

/// Convex polytope in R^n with its affine dimension, vertices and facet
/// inequalities. Lower-dimensional polytopes also carry the equalities
/// cutting out their affine span.
#[derive(Clone, Debug)]
pub struct Polytope {
    pub ambient_dim: usize,
    pub dim: usize,
    pub vertices: Vec<DVector<f64>>,
    pub facets: Vec<HalfSpace>,
    pub equalities: Vec<HalfSpace>,
    /// For each facet, indices into `vertices` lying on it.
    pub facet_vertices: Vec<Vec<usize>>,
    pub mode: HullMode,
}

impl Polytope {
    /// Membership with boundary counted as inside.
    pub fn contains(&self, x: &DVector<f64>, tol: f64) -> Result<bool> {
        if x.len() != self.ambient_dim {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim,
                got: x.len(),
            });
        }
        match self.mode {
            HullMode::Facets => {
                if self.dim == 0 {
                    return Ok((x - &self.vertices[0]).norm() <= tol);
                }
                Ok(self.equalities.iter().all(|h| h.value(x).abs() <= tol)
                    && self.facets.iter().all(|h| h.value(x) <= tol))
            }
            HullMode::VertexOnly => Ok(in_convex_hull_lp(&self.vertices, x, tol)),
        }
    }

    /// Largest facet violation (negative when strictly inside), ignoring equalities.
    pub fn max_violation(&self, x: &DVector<f64>) -> f64 {
        let eq = self
            .equalities
            .iter()
            .map(|h| h.value(x).abs())
            .fold(f64::NEG_INFINITY, f64::max);
        let ineq = self
            .facets
            .iter()
            .map(|h| h.value(x))
            .fold(f64::NEG_INFINITY, f64::max);
        eq.max(ineq)
    }

    /// Vertex pairs spanning an edge (share at least dim-1 facets).
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let n = self.vertices.len();
        let mut out = Vec::new();
        if self.dim == 1 && n == 2 {
            return vec![(0, 1)];
        }
        if self.dim < 2 || self.mode == HullMode::VertexOnly {
            return out;
        }
        let mut incidence = vec![Vec::new(); n];
        for (f, vs) in self.facet_vertices.iter().enumerate() {
            for &v in vs {
                incidence[v].push(f);
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let shared: Vec<usize> = incidence[i]
                    .iter()
                    .filter(|f| incidence[j].contains(f))
                    .cloned()
                    .collect();
                if shared.len() + 1 < self.dim {
                    continue;
                }
                let normals: Vec<DVector<f64>> = shared
                    .iter()
                    .map(|&f| DVector::from_vec(self.facets[f].normal.clone()))
                    .collect();
                if rank(&DMatrix::from_columns(&normals), 1e-8) + 1 == self.dim {
                    out.push((i, j));
                }
            }
        }
        out
    }
}

/// Linear-feasibility membership test: is there λ ≥ 0 with Σλ = 1 and
/// |Σ λ_i v_i − x|_∞ ≤ tol?
pub fn in_convex_hull_lp(vertices: &[DVector<f64>], x: &DVector<f64>, tol: f64) -> bool {
    if vertices.is_empty() {
        return false;
    }
    let mut problem = Problem::new(OptimizationDirection::Minimize);
    let vars: Vec<_> = vertices
        .iter()
        .map(|_| problem.add_var(0.0, (0.0, f64::INFINITY)))
        .collect();
    let ones: Vec<_> = vars.iter().map(|v| (*v, 1.0)).collect();
    problem.add_constraint(ones.as_slice(), ComparisonOp::Eq, 1.0);
    for j in 0..x.len() {
        let row: Vec<_> = vars
            .iter()
            .zip(vertices)
            .map(|(v, p)| (*v, p[j]))
            .collect();
        problem.add_constraint(row.as_slice(), ComparisonOp::Le, x[j] + tol);
        problem.add_constraint(row.as_slice(), ComparisonOp::Ge, x[j] - tol);
    }
    problem.solve().is_ok()
}

/// Convex hull of a finite point set. Affine dimension up to
/// [`MAX_FACET_DIM`] gets full facet enumeration by incremental insertion;
/// higher dimensions fall back to a vertex-only hull with LP membership.
pub fn convex_hull(points: &[DVector<f64>], tol: f64) -> Result<Polytope> {
    let first = points.first().ok_or(Error::EmptyInput("convex_hull needs at least one point"))?;
    let n = first.len();
    for p in points {
        if p.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: p.len(),
            });
        }
    }
    let mut uniq: Vec<DVector<f64>> = Vec::new();
    for p in points {
        if !uniq.iter().any(|u| (u - p).norm() <= tol) {
            uniq.push(p.clone());
        }
    }
    let origin = uniq[0].clone();
    let diffs: Vec<DVector<f64>> = uniq.iter().skip(1).map(|p| p - &origin).collect();
    let span = affine_directions(n, &diffs, tol);
    let d = span.dim();
    let equalities: Vec<HalfSpace> = span
        .complement()
        .vectors()
        .into_iter()
        .map(|e| HalfSpace {
            offset: e.dot(&origin),
            normal: e.iter().cloned().collect(),
        })
        .collect();

    if d == 0 {
        return Ok(Polytope {
            ambient_dim: n,
            dim: 0,
            vertices: vec![origin],
            facets: Vec::new(),
            equalities,
            facet_vertices: Vec::new(),
            mode: HullMode::Facets,
        });
    }
    if d > MAX_FACET_DIM {
        return Ok(vertex_only_hull(n, d, uniq, equalities, tol));
    }

    let basis = span.basis().clone();
    let local: Vec<DVector<f64>> = uniq.iter().map(|p| basis.tr_mul(&(p - &origin))).collect();
    let planes = if d == 1 {
        let (lo, hi) = local.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), y| {
            (lo.min(y[0]), hi.max(y[0]))
        });
        vec![
            (DVector::from_element(1, 1.0), hi),
            (DVector::from_element(1, -1.0), -lo),
        ]
    } else {
        incremental_hull(&local, d, tol)?
    };

    // Vertices: points on d merged facets whose normals have full rank.
    let mut vertex_ids = Vec::new();
    for (i, y) in local.iter().enumerate() {
        let active: Vec<DVector<f64>> = planes
            .iter()
            .filter(|(u, o)| (u.dot(y) - o).abs() <= tol * 10.0)
            .map(|(u, _)| u.clone())
            .collect();
        if active.len() >= d && rank(&DMatrix::from_columns(&active), 1e-8) == d {
            vertex_ids.push(i);
        }
    }
    let vertices: Vec<DVector<f64>> = vertex_ids.iter().map(|&i| uniq[i].clone()).collect();
    let mut facets = Vec::new();
    let mut facet_vertices = Vec::new();
    for (u, o) in &planes {
        let normal = &basis * u;
        facets.push(HalfSpace {
            offset: o + normal.dot(&origin),
            normal: normal.iter().cloned().collect(),
        });
        facet_vertices.push(
            vertex_ids
                .iter()
                .enumerate()
                .filter(|(_, &i)| (u.dot(&local[i]) - o).abs() <= tol * 10.0)
                .map(|(k, _)| k)
                .collect(),
        );
    }
    Ok(Polytope {
        ambient_dim: n,
        dim: d,
        vertices,
        facets,
        equalities,
        facet_vertices,
        mode: HullMode::Facets,
    })
}

fn affine_directions(n: usize, diffs: &[DVector<f64>], tol: f64) -> Subspace {
    if diffs.is_empty() {
        return Subspace::zero(n);
    }
    let m = DMatrix::from_columns(diffs);
    let svd = checked_svd(&m);
    let u = svd.u.expect("u");
    let cut = (tol * 10.0).max(1e-12);
    let cols: Vec<DVector<f64>> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, s)| **s > cut)
        .map(|(i, _)| u.column(i).into_owned())
        .collect();
    Subspace::orthonormalize(n, &cols, 1e-8).expect("consistent lengths")
}

fn vertex_only_hull(
    n: usize,
    d: usize,
    uniq: Vec<DVector<f64>>,
    equalities: Vec<HalfSpace>,
    tol: f64,
) -> Polytope {
    let centroid = uniq.iter().fold(DVector::zeros(n), |acc, p| acc + p) / uniq.len() as f64;
    let radii: Vec<f64> = uniq.iter().map(|p| (p - &centroid).norm()).collect();
    let r0 = radii[0];
    // Points on a common sphere are all extreme.
    let vertices = if radii.iter().all(|r| (r - r0).abs() <= tol) {
        uniq
    } else {
        (0..uniq.len())
            .filter(|&i| {
                let others: Vec<DVector<f64>> = uniq
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(_, p)| p.clone())
                    .collect();
                !in_convex_hull_lp(&others, &uniq[i], tol)
            })
            .map(|i| uniq[i].clone())
            .collect()
    };
    Polytope {
        ambient_dim: n,
        dim: d,
        vertices,
        facets: Vec::new(),
        equalities,
        facet_vertices: Vec::new(),
        mode: HullMode::VertexOnly,
    }
}

struct SimplexFacet {
    verts: Vec<usize>,
    normal: DVector<f64>,
    offset: f64,
}

fn make_facet(
    pts: &[DVector<f64>],
    mut verts: Vec<usize>,
    interior: &DVector<f64>,
) -> Option<SimplexFacet> {
    verts.sort_unstable();
    let d = interior.len();
    let base = &pts[verts[0]];
    let mut m = DMatrix::zeros(d - 1, d);
    for (r, &v) in verts.iter().skip(1).enumerate() {
        m.set_row(r, &(&pts[v] - base).transpose());
    }
    let ker = kernel(&m, 1e-10);
    if ker.dim() != 1 {
        return None;
    }
    let mut normal = ker.basis().column(0).into_owned();
    let mut offset = normal.dot(base);
    if normal.dot(interior) > offset {
        normal = -normal;
        offset = -offset;
    }
    Some(SimplexFacet {
        verts,
        normal,
        offset,
    })
}

/// Beneath-beyond hull of full-dimensional points in R^d, d >= 2. Returns
/// merged facet hyperplanes (unit normal, offset).
fn incremental_hull(pts: &[DVector<f64>], d: usize, tol: f64) -> Result<Vec<(DVector<f64>, f64)>> {
    // Initial simplex: greedily maximize distance to the current affine span.
    let mut chosen = vec![0usize];
    while chosen.len() < d + 1 {
        let base = &pts[chosen[0]];
        let dirs: Vec<DVector<f64>> = chosen.iter().skip(1).map(|&i| &pts[i] - base).collect();
        let span = Subspace::orthonormalize(d, &dirs, 1e-12)?;
        let (best, dist) = pts
            .iter()
            .enumerate()
            .filter(|(i, _)| !chosen.contains(i))
            .map(|(i, p)| (i, span.residual(&(p - base)).expect("dims")))
            .fold((usize::MAX, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best == usize::MAX || dist <= tol {
            return Err(Error::Numerical("degenerate point set in hull".into()));
        }
        chosen.push(best);
    }
    let interior = chosen.iter().fold(DVector::zeros(d), |acc, &i| acc + &pts[i]) / (d + 1) as f64;
    let mut facets: Vec<SimplexFacet> = Vec::new();
    for skip in 0..=d {
        let verts: Vec<usize> = chosen
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != skip)
            .map(|(_, &i)| i)
            .collect();
        facets.push(
            make_facet(pts, verts, &interior)
                .ok_or_else(|| Error::Numerical("degenerate initial simplex".into()))?,
        );
    }

    let mut order: Vec<usize> = (0..pts.len()).filter(|i| !chosen.contains(i)).collect();
    order.sort_by(|&a, &b| {
        let da = (&pts[a] - &interior).norm();
        let db = (&pts[b] - &interior).norm();
        db.partial_cmp(&da).unwrap_or(std::cmp::Ordering::Equal)
    });

    for p in order {
        let visible: Vec<usize> = facets
            .iter()
            .enumerate()
            .filter(|(_, f)| f.normal.dot(&pts[p]) - f.offset > tol)
            .map(|(i, _)| i)
            .collect();
        if visible.is_empty() {
            continue;
        }
        let mut ridges: HashMap<Vec<usize>, usize> = HashMap::new();
        for &fi in &visible {
            let vs = &facets[fi].verts;
            for skip in 0..vs.len() {
                let ridge: Vec<usize> = vs
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| *k != skip)
                    .map(|(_, &v)| v)
                    .collect();
                *ridges.entry(ridge).or_insert(0) += 1;
            }
        }
        let mut keep: Vec<SimplexFacet> = Vec::with_capacity(facets.len());
        for (i, f) in facets.into_iter().enumerate() {
            if !visible.contains(&i) {
                keep.push(f);
            }
        }
        facets = keep;
        let mut horizon: Vec<Vec<usize>> = ridges
            .into_iter()
            .filter(|(_, c)| *c == 1)
            .map(|(r, _)| r)
            .collect();
        horizon.sort();
        for mut ridge in horizon {
            ridge.push(p);
            if let Some(f) = make_facet(pts, ridge, &interior) {
                facets.push(f);
            }
        }
    }

    // Merge coplanar simplices.
    let merge_tol = (tol * 10.0).max(1e-9);
    let mut planes: Vec<(DVector<f64>, f64)> = Vec::new();
    for f in facets {
        if !planes
            .iter()
            .any(|(u, o)| (u - &f.normal).norm() <= merge_tol && (o - f.offset).abs() <= merge_tol)
        {
            planes.push((f.normal, f.offset));
        }
    }
    Ok(planes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn hexagon() -> Vec<DVector<f64>> {
        // W(A2)-orbit of a regular point in the plane: rotations by 120°
        // and reflections of (cos 10°, sin 10°).
        let t = 10f64.to_radians();
        let mut out = Vec::new();
        for k in 0..3 {
            let a = t + k as f64 * 2.0 * std::f64::consts::PI / 3.0;
            out.push(dvector![a.cos(), a.sin()]);
            let b = -t + k as f64 * 2.0 * std::f64::consts::PI / 3.0;
            out.push(dvector![b.cos(), b.sin()]);
        }
        out
    }

    /// Brute-force oracle: a pair (i, j) is an edge iff every point lies on
    /// one side of the line through them.
    fn brute_force_edge_count(pts: &[DVector<f64>]) -> usize {
        let mut count = 0;
        for i in 0..pts.len() {
            for j in (i + 1)..pts.len() {
                let d = &pts[j] - &pts[i];
                let n = dvector![-d[1], d[0]];
                let side: Vec<f64> = pts.iter().map(|p| n.dot(&(p - &pts[i]))).collect();
                if side.iter().all(|s| *s <= 1e-12) || side.iter().all(|s| *s >= -1e-12) {
                    count += 1;
                }
            }
        }
        count
    }

    #[test]
    fn triangle_drops_interior_point() {
        let pts = vec![
            dvector![0.0, 0.0],
            dvector![1.0, 0.0],
            dvector![0.0, 1.0],
            dvector![0.25, 0.25],
        ];
        let p = convex_hull(&pts, GEOM_TOL).unwrap();
        assert_eq!(p.vertices.len(), 3);
        assert_eq!(p.facets.len(), 3);
        assert!(p.contains(&dvector![0.25, 0.25], GEOM_TOL).unwrap());
    }

    #[test]
    fn hexagon_has_six_facets() {
        let pts = hexagon();
        assert_eq!(brute_force_edge_count(&pts), 6);
        let p = convex_hull(&pts, GEOM_TOL).unwrap();
        assert_eq!(p.vertices.len(), 6);
        assert_eq!(p.facets.len(), 6);
        assert_eq!(p.edges().len(), 6);
        // barycenter inside, vertices on the boundary, 2q outside
        assert!(p.contains(&dvector![0.0, 0.0], GEOM_TOL).unwrap());
        for v in &pts {
            assert!(p.contains(v, GEOM_TOL).unwrap());
            assert!(!p.contains(&(v * 2.0), GEOM_TOL).unwrap());
        }
    }

    #[test]
    fn outside_point_has_separating_facet() {
        let pts = hexagon();
        let p = convex_hull(&pts, GEOM_TOL).unwrap();
        let x = &pts[0] * 2.0;
        let sep = p.facets.iter().find(|h| h.value(&x) > 1e-3);
        assert!(sep.is_some());
    }

    #[test]
    fn single_point_is_zero_dimensional() {
        let p = convex_hull(&[dvector![0.3, -0.2, 1.0]], GEOM_TOL).unwrap();
        assert_eq!(p.dim, 0);
        assert!(p.contains(&dvector![0.3, -0.2, 1.0], GEOM_TOL).unwrap());
        assert!(!p.contains(&dvector![0.3, -0.2, 1.1], GEOM_TOL).unwrap());
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(matches!(convex_hull(&[], GEOM_TOL), Err(Error::EmptyInput(_))));
    }

    #[test]
    fn collinear_points_become_segment() {
        let pts = vec![dvector![0.0, 0.0], dvector![1.0, 0.0], dvector![2.0, 0.0]];
        let p = convex_hull(&pts, GEOM_TOL).unwrap();
        assert_eq!(p.dim, 1);
        assert_eq!(p.vertices.len(), 2);
        assert_eq!(p.equalities.len(), 1);
        assert!(p.contains(&dvector![1.5, 0.0], GEOM_TOL).unwrap());
        assert!(!p.contains(&dvector![1.5, 0.1], GEOM_TOL).unwrap());
    }

    #[test]
    fn cube_merges_coplanar_triangles() {
        let mut pts = Vec::new();
        for i in 0..8 {
            pts.push(dvector![(i & 1) as f64, ((i >> 1) & 1) as f64, ((i >> 2) & 1) as f64]);
        }
        pts.push(dvector![0.5, 0.5, 0.5]);
        pts.push(dvector![0.5, 0.5, 1.0]); // on a face
        let p = convex_hull(&pts, GEOM_TOL).unwrap();
        assert_eq!(p.vertices.len(), 8);
        assert_eq!(p.facets.len(), 6);
        assert_eq!(p.edges().len(), 12);
        for fv in &p.facet_vertices {
            assert_eq!(fv.len(), 4);
        }
    }

    #[test]
    fn tesseract_in_four_dimensions() {
        let mut pts = Vec::new();
        for i in 0..16 {
            pts.push(DVector::from_fn(4, |k, _| ((i >> k) & 1) as f64));
        }
        let p = convex_hull(&pts, GEOM_TOL).unwrap();
        assert_eq!(p.vertices.len(), 16);
        assert_eq!(p.facets.len(), 8);
    }

    #[test]
    fn vertex_only_mode_in_five_dimensions() {
        let mut pts = Vec::new();
        for k in 0..5 {
            let mut e = DVector::zeros(5);
            e[k] = 1.0;
            pts.push(e.clone());
            pts.push(-e);
        }
        pts.push(DVector::from_element(5, 0.1));
        let p = convex_hull(&pts, GEOM_TOL).unwrap();
        assert_eq!(p.mode, HullMode::VertexOnly);
        assert_eq!(p.vertices.len(), 10);
        assert!(p.contains(&DVector::from_element(5, 0.19), GEOM_TOL).unwrap());
        assert!(!p.contains(&DVector::from_element(5, 0.21), GEOM_TOL).unwrap());
    }

    #[test]
    fn hull_soundness_and_minimality_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for d in 2..=4 {
            for _ in 0..5 {
                let pts: Vec<DVector<f64>> = (0..30)
                    .map(|_| DVector::from_fn(d, |_, _| rng.random_range(-1.0..1.0)))
                    .collect();
                let p = convex_hull(&pts, GEOM_TOL).unwrap();
                for x in &pts {
                    assert!(p.contains(x, GEOM_TOL).unwrap());
                }
                for (i, v) in p.vertices.iter().enumerate() {
                    let others: Vec<_> = p
                        .vertices
                        .iter()
                        .enumerate()
                        .filter(|(j, _)| *j != i)
                        .map(|(_, w)| w.clone())
                        .collect();
                    assert!(!in_convex_hull_lp(&others, v, 1e-9));
                    for h in &p.facets {
                        assert!(h.value(v) <= 1e-9);
                    }
                }
                for fv in &p.facet_vertices {
                    assert!(fv.len() >= d);
                }
            }
        }
    }
}
