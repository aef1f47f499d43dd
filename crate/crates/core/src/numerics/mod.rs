//! Dense linear algebra, subspaces, low-dimensional convex hulls, union-find
//! and seeded randomness shared by the geometry modules.

pub mod components;
pub mod hull;
pub mod subspace;
pub mod svd;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub use components::{component_count, union_find_components};
pub use hull::{convex_hull, in_convex_hull_lp, HalfSpace, HullMode, Polytope, GEOM_TOL};
pub use subspace::{kernel, pseudo_inverse, rank, Subspace, ORTHO_TOL};
pub use svd::{checked_svd, SVD_TOL};

/// Complex dense matrix; real matrices have zero imaginary parts.
pub type CMatrix = DMatrix<Complex64>;

/// Independent deterministic stream `stream` derived from a master seed.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn gaussian_vector(rng: &mut ChaCha8Rng, n: usize, std_dev: f64) -> DVector<f64> {
    DVector::from_fn(n, |_, _| {
        let z: f64 = StandardNormal.sample(rng);
        z * std_dev
    })
}

/// Commutator xy - yx.
pub fn bracket(x: &CMatrix, y: &CMatrix) -> CMatrix {
    x * y - y * x
}

/// Trace form <x, y> = -Re tr(xy).
pub fn trace_form(x: &CMatrix, y: &CMatrix) -> f64 {
    // -Re tr(xy) without forming the product.
    let n = x.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            acc += (x[(i, j)] * y[(j, i)]).re;
        }
    }
    -acc
}

/// Symmetric eigen-decomposition sorted by ascending eigenvalue.
pub fn sorted_symmetric_eigen(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let sym = (m + m.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let mut idx: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let vals = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = DMatrix::from_columns(
        &idx.iter()
            .map(|&i| eig.eigenvectors.column(i).into_owned())
            .collect::<Vec<_>>(),
    );
    (vals, vecs)
}

/// Groups ascending values into clusters whose consecutive gaps are <= tol.
pub fn cluster_sorted(values: &[f64], tol: f64) -> Vec<std::ops::Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        if i == values.len() || values[i] - values[i - 1] > tol {
            out.push(start..i);
            start = i;
        }
    }
    out.retain(|r| !r.is_empty());
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a = gaussian_vector(&mut stream_rng(7, 0), 4, 1.0);
        let b = gaussian_vector(&mut stream_rng(7, 0), 4, 1.0);
        let c = gaussian_vector(&mut stream_rng(7, 1), 4, 1.0);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn clustering_respects_gaps() {
        let c = cluster_sorted(&[0.0, 1e-9, 1.0, 1.0 + 1e-8, 3.0], 1e-7);
        assert_eq!(c, vec![0..2, 2..4, 4..5]);
    }
}
