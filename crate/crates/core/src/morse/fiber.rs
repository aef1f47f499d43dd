//! Sampling of μ⁻¹(a) by descent and ε-graph connectivity of the samples.

use nalgebra::DVector;
use rayon::prelude::*;
use serde::Serialize;

use super::descent::{DescentProblem, DescentStrategy};
use crate::error::{Error, Result};
use crate::numerics::{component_count, gaussian_vector, stream_rng, union_find_components};
use crate::weyl_moment::{moment_map, sample_orbit, FlagOrbit, OrbitPoint};

/// Default fiber tolerance on ‖μ(x) − a‖.
pub const FIBER_TOL: f64 = 1e-6;
/// Targets with max facet violation above this are in the boundary regime.
pub const BOUNDARY_TOL: f64 = 1e-7;

/// Descent endpoints retained in μ⁻¹(a), with run diagnostics.
#[derive(Clone, Debug, Serialize)]
pub struct FiberSamples {
    pub a: Vec<f64>,
    pub tol: f64,
    pub requested: usize,
    #[serde(skip)]
    pub points: Vec<OrbitPoint>,
    pub retained: usize,
    /// Largest ‖μ(x) − a‖ over retained points.
    pub max_residual: f64,
    /// Smallest residual over all runs, retained or not.
    pub best_residual: f64,
    pub mean_iterations: f64,
    pub inside_polytope: bool,
    pub boundary_regime: bool,
    pub warnings: Vec<String>,
}

/// Runs `n` descents of ‖μ(x) − a‖² from seeded orbit samples (the first one
/// is q itself) and keeps endpoints with residual ≤ `tol`. Returns no points
/// when a lies outside the moment polytope.
pub fn sample_fiber(
    fo: &FlagOrbit,
    a: &DVector<f64>,
    n: usize,
    seed: u64,
    tol: f64,
    strategy: &dyn DescentStrategy,
) -> Result<FiberSamples> {
    let m = &fo.model;
    if a.len() != m.rank {
        return Err(Error::DimensionMismatch {
            expected: m.rank,
            got: a.len(),
        });
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::Numerical(format!("fiber tolerance must be positive, got {tol}")));
    }
    let violation = fo.polytope.max_violation(a);
    let inside = fo.polytope.contains(a, BOUNDARY_TOL)?;
    let mut out = FiberSamples {
        a: a.iter().cloned().collect(),
        tol,
        requested: n,
        points: Vec::new(),
        retained: 0,
        max_residual: 0.0,
        best_residual: f64::INFINITY,
        mean_iterations: 0.0,
        inside_polytope: inside,
        boundary_regime: inside && violation > -BOUNDARY_TOL,
        warnings: Vec::new(),
    };
    if !inside || n == 0 {
        return Ok(out);
    }
    let starts = sample_orbit(m, &fo.q, n, seed)?;
    let problem = DescentProblem::new(m, a.clone()).with_tol(tol).with_polish(true);
    let runs: Vec<_> = starts.par_iter().map(|s| strategy.minimize(m, &problem, s)).collect();
    out.mean_iterations = runs.iter().map(|r| r.iterations as f64).sum::<f64>() / n as f64;
    out.best_residual = runs.iter().map(|r| r.residual).fold(f64::INFINITY, f64::min);
    for r in runs {
        if r.residual <= tol {
            out.max_residual = out.max_residual.max(r.residual);
            out.points.push(r.point);
        }
    }
    out.retained = out.points.len();
    if out.retained == 0 && !out.boundary_regime {
        out.warnings.push(format!(
            "no descent run reached tolerance {tol:.1e} for an interior target \
             (strategy {}, best residual {:.3e}, mean iterations {:.1}, budget {})",
            strategy.name(),
            out.best_residual,
            out.mean_iterations,
            problem.max_iter
        ));
    }
    Ok(out)
}

/// `n` seeded targets a with facet margin at least `margin`·‖q‖ inside the
/// moment polytope, drawn from a Gaussian of scale ‖q‖/2 in a.
pub fn interior_targets(fo: &FlagOrbit, n: usize, seed: u64, margin: f64) -> Vec<DVector<f64>> {
    let scale = fo.q.norm();
    let mut out = Vec::with_capacity(n);
    let mut stream = 0u64;
    while out.len() < n {
        let a = gaussian_vector(&mut stream_rng(seed, stream), fo.model.rank, 0.5 * scale);
        stream += 1;
        if fo.polytope.max_violation(&a) < -margin * scale {
            out.push(a);
        }
        assert!(stream < 1_000_000, "polytope interior too thin for margin {margin}");
    }
    out
}

/// ε-sweep: ε = max(c · d_med, floor) for each factor c.
#[derive(Clone, Debug, Serialize)]
pub struct SweepPolicy {
    pub factors: Vec<f64>,
    /// Lower bound on ε, so that coincident samples (d_med = 0) still join.
    pub floor: f64,
}

impl Default for SweepPolicy {
    fn default() -> Self {
        SweepPolicy {
            factors: vec![1.5, 2.0, 3.0, 4.0, 6.0],
            floor: 1e-3,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub factor: f64,
    pub epsilon: f64,
    pub components: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Verdict {
    Connected,
    Disconnected { components: usize },
    Empty,
    Inconclusive,
}

impl Verdict {
    fn from_count(n: usize) -> Self {
        match n {
            0 => Verdict::Empty,
            1 => Verdict::Connected,
            c => Verdict::Disconnected { components: c },
        }
    }

    /// Component count, if a verdict was reached.
    pub fn components(&self) -> Option<usize> {
        match self {
            Verdict::Connected => Some(1),
            Verdict::Disconnected { components } => Some(*components),
            Verdict::Empty => Some(0),
            Verdict::Inconclusive => None,
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::Connected => write!(f, "connected"),
            Verdict::Disconnected { components } => write!(f, "disconnected({components})"),
            Verdict::Empty => write!(f, "empty"),
            Verdict::Inconclusive => write!(f, "inconclusive"),
        }
    }
}

/// Fiber samples together with their connectivity analysis.
#[derive(Clone, Debug, Serialize)]
pub struct FiberReport {
    #[serde(flatten)]
    pub samples: FiberSamples,
    pub median_nn: f64,
    pub epsilon_sweep: Vec<SweepRow>,
    /// Factor range [c_lo, c_hi] of the plateau the verdict was read from.
    pub plateau: Option<(f64, f64)>,
    pub verdict: Verdict,
}

fn nearest_neighbour_distances(points: &[DVector<f64>]) -> Vec<f64> {
    (0..points.len())
        .into_par_iter()
        .map(|i| {
            points
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, p)| (p - &points[i]).norm())
                .fold(f64::INFINITY, f64::min)
        })
        .collect()
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Number of connected components of the ε-graph on `points`.
pub fn epsilon_components(points: &[DVector<f64>], eps: f64) -> usize {
    let n = points.len();
    let edges: Vec<(usize, usize)> = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            ((i + 1)..n)
                .filter(move |&j| (&points[i] - &points[j]).norm() <= eps)
                .map(move |j| (i, j))
        })
        .collect();
    component_count(&union_find_components(n, &edges))
}

/// Reads the verdict off the widest run (≥ 2 consecutive factors) of equal
/// component counts. Equally wide runs with different counts are
/// inconclusive, as is a sweep without any run.
pub fn connectivity_verdict(samples: FiberSamples, policy: &SweepPolicy) -> FiberReport {
    let pts: Vec<DVector<f64>> = samples.points.iter().map(|p| p.x.clone()).collect();
    if pts.is_empty() {
        return FiberReport {
            samples,
            median_nn: 0.0,
            epsilon_sweep: Vec::new(),
            plateau: None,
            verdict: Verdict::Empty,
        };
    }
    if pts.len() == 1 {
        return FiberReport {
            samples,
            median_nn: 0.0,
            epsilon_sweep: policy
                .factors
                .iter()
                .map(|&c| SweepRow {
                    factor: c,
                    epsilon: policy.floor,
                    components: 1,
                })
                .collect(),
            plateau: policy.factors.first().zip(policy.factors.last()).map(|(a, b)| (*a, *b)),
            verdict: Verdict::Connected,
        };
    }
    let d_med = median(&mut nearest_neighbour_distances(&pts));
    let sweep: Vec<SweepRow> = policy
        .factors
        .iter()
        .map(|&c| {
            let eps = (c * d_med).max(policy.floor);
            SweepRow {
                factor: c,
                epsilon: eps,
                components: epsilon_components(&pts, eps),
            }
        })
        .collect();

    // runs of equal counts: (start, end inclusive)
    let mut runs = Vec::new();
    let mut start = 0;
    for i in 1..=sweep.len() {
        if i == sweep.len() || sweep[i].components != sweep[start].components {
            if i - start >= 2 {
                runs.push((start, i - 1));
            }
            start = i;
        }
    }
    let widest = runs.iter().map(|(s, e)| e - s).max();
    let (plateau, verdict) = match widest {
        None => (None, Verdict::Inconclusive),
        Some(w) => {
            let best: Vec<_> = runs.iter().filter(|(s, e)| e - s == w).collect();
            let counts: std::collections::BTreeSet<usize> =
                best.iter().map(|(s, _)| sweep[*s].components).collect();
            if counts.len() > 1 {
                (None, Verdict::Inconclusive)
            } else {
                let (s, e) = *best[0];
                (
                    Some((sweep[s].factor, sweep[e].factor)),
                    Verdict::from_count(sweep[s].components),
                )
            }
        }
    };
    FiberReport {
        samples,
        median_nn: d_med,
        epsilon_sweep: sweep,
        plateau,
        verdict,
    }
}

/// `sample_fiber` followed by `connectivity_verdict` with the default policy.
pub fn fiber_report(
    fo: &FlagOrbit,
    a: &DVector<f64>,
    n: usize,
    seed: u64,
    tol: f64,
    strategy: &dyn DescentStrategy,
) -> Result<FiberReport> {
    let s = sample_fiber(fo, a, n, seed, tol, strategy)?;
    Ok(connectivity_verdict(s, &SweepPolicy::default()))
}

/// Largest ‖μ(x) − a‖ over the given points.
pub fn fiber_residual(fo: &FlagOrbit, a: &DVector<f64>, points: &[OrbitPoint]) -> f64 {
    points
        .iter()
        .map(|p| (moment_map(&fo.model, p) - a).norm())
        .fold(0.0, f64::max)
}
