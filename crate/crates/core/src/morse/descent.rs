//! Minimization of F(x) = ‖μ(x) − c‖² over the orbit of a subgroup of K.
//!
//! Strategies share the [`DescentStrategy`] trait and are looked up by name
//! in a [`DescentRegistry`]. Every step moves x by Ad(exp z) with z in the
//! admissible direction space, so iterates stay exactly on the orbit.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{checked_svd, Subspace};
use crate::symmetric_space::SymmetricSpaceModel;
use crate::weyl_moment::OrbitPoint;

/// Initial step of the gradient flow line search.
pub const FLOW_STEP: f64 = 0.1;

/// The problem: reach μ(x) = target moving only along `directions` ⊆ k.
#[derive(Clone, Debug)]
pub struct DescentProblem {
    pub target: DVector<f64>,
    /// Orthonormal basis (k-coordinates) of the admissible directions.
    pub directions: Subspace,
    /// Convergence threshold on ‖μ(x) − target‖.
    pub tol: f64,
    pub max_iter: usize,
    /// Keep iterating after convergence until progress stalls.
    pub polish: bool,
}

impl DescentProblem {
    pub fn new(model: &SymmetricSpaceModel, target: DVector<f64>) -> Self {
        DescentProblem {
            target,
            directions: Subspace::full(model.dim_k()),
            tol: 1e-7,
            max_iter: 500,
            polish: false,
        }
    }

    pub fn with_directions(mut self, d: Subspace) -> Self {
        self.directions = d;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_polish(mut self, polish: bool) -> Self {
        self.polish = polish;
        self
    }

    pub fn with_max_iter(mut self, n: usize) -> Self {
        self.max_iter = n;
        self
    }

    fn residual(&self, model: &SymmetricSpaceModel, x: &DVector<f64>) -> DVector<f64> {
        model.p_to_a(x) - &self.target
    }

    /// Lift map restricted to the admissible directions (p × d).
    fn lift(&self, model: &SymmetricSpaceModel, x: &DVector<f64>) -> DMatrix<f64> {
        model.lift_map(x) * self.directions.basis()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DescentOutcome {
    #[serde(skip)]
    pub point: OrbitPoint,
    /// ‖μ(x) − target‖ at the final point.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Whether every accepted step strictly decreased F.
    pub monotone: bool,
    pub strategy: &'static str,
}

pub trait DescentStrategy: Send + Sync {
    fn name(&self) -> &'static str;
    fn summary(&self) -> &'static str;
    fn minimize(&self, model: &SymmetricSpaceModel, problem: &DescentProblem, start: &OrbitPoint) -> DescentOutcome;
}

struct State {
    point: OrbitPoint,
    f: f64,
    iterations: usize,
    monotone: bool,
}

impl State {
    fn new(model: &SymmetricSpaceModel, problem: &DescentProblem, start: &OrbitPoint) -> Self {
        State {
            f: problem.residual(model, &start.x).norm_squared(),
            point: start.clone(),
            iterations: 0,
            monotone: true,
        }
    }

    fn accept(&mut self, point: OrbitPoint, f: f64) {
        if f >= self.f {
            self.monotone = false;
        }
        self.point = point;
        self.f = f;
    }

    fn finish(self, problem: &DescentProblem, strategy: &'static str) -> DescentOutcome {
        let residual = self.f.sqrt();
        DescentOutcome {
            point: self.point,
            residual,
            iterations: self.iterations,
            converged: residual <= problem.tol,
            monotone: self.monotone,
            strategy,
        }
    }
}

/// Stops polishing once F has not dropped by this factor over a few steps.
const STALL_FACTOR: f64 = 0.5;
const STALL_WINDOW: usize = 6;
const F_FLOOR: f64 = 1e-30;

/// Riemannian gradient flow: x ← Ad(exp(−η z))·x with z the minimal-norm
/// lift of grad F ([z, x] = grad F), backtracking from η = 0.1.
pub struct GradientFlow;

impl GradientFlow {
    fn step(model: &SymmetricSpaceModel, problem: &DescentProblem, s: &mut State) -> bool {
        let r = problem.residual(model, &s.point.x);
        let l = problem.lift(model, &s.point.x);
        let g = model.a_to_p(&r) * 2.0;
        let svd = checked_svd(&l);
        let Ok(t) = svd.solve(&g, 1e-10 * svd.singular_values.max().max(1e-300)) else {
            return false;
        };
        let z = problem.directions.basis() * t;
        let mut eta = FLOW_STEP;
        for _ in 0..50 {
            let cand = s.point.moved(model, &(&z * -eta));
            let fc = problem.residual(model, &cand.x).norm_squared();
            if fc < s.f {
                s.accept(cand, fc);
                return true;
            }
            eta *= 0.5;
        }
        false
    }

    fn run(model: &SymmetricSpaceModel, problem: &DescentProblem, s: &mut State, budget: usize) {
        let mut history = Vec::new();
        for _ in 0..budget {
            if s.iterations >= problem.max_iter || s.f <= F_FLOOR {
                break;
            }
            if s.f.sqrt() <= problem.tol && !problem.polish {
                break;
            }
            s.iterations += 1;
            if !Self::step(model, problem, s) {
                break;
            }
            history.push(s.f);
            if stalled(&history, problem, s.f) {
                break;
            }
        }
    }
}

fn stalled(history: &[f64], problem: &DescentProblem, f: f64) -> bool {
    let n = history.len();
    problem.polish
        && f.sqrt() <= problem.tol
        && n > STALL_WINDOW
        && history[n - 1] > STALL_FACTOR * history[n - 1 - STALL_WINDOW]
}

impl DescentStrategy for GradientFlow {
    fn name(&self) -> &'static str {
        "gradient-flow"
    }
    fn summary(&self) -> &'static str {
        "first-order flow along the minimal-norm lift with backtracking line search"
    }
    fn minimize(&self, model: &SymmetricSpaceModel, problem: &DescentProblem, start: &OrbitPoint) -> DescentOutcome {
        let mut s = State::new(model, problem, start);
        Self::run(model, problem, &mut s, problem.max_iter);
        s.finish(problem, self.name())
    }
}

/// Levenberg–Marquardt on the residual r = μ(x) − c, Jacobian J = P∘[·, x]
/// restricted to the admissible directions; minimal-norm damped steps.
pub struct GaussNewton;

impl GaussNewton {
    fn run(model: &SymmetricSpaceModel, problem: &DescentProblem, s: &mut State, budget: usize) -> bool {
        let rank = model.rank;
        let mut lambda: Option<f64> = None;
        let mut history = Vec::new();
        let mut rejections = 0;
        for _ in 0..budget {
            if s.iterations >= problem.max_iter || s.f <= F_FLOOR {
                return true;
            }
            if s.f.sqrt() <= problem.tol && !problem.polish {
                return true;
            }
            s.iterations += 1;
            let r = problem.residual(model, &s.point.x);
            let l = problem.lift(model, &s.point.x);
            let j = l.rows(0, rank).into_owned();
            let jjt = &j * j.transpose();
            let lam = *lambda.get_or_insert_with(|| 1e-3 * jjt.diagonal().max().max(1e-12));
            let sys = &jjt + DMatrix::identity(rank, rank) * lam;
            let Some(chol) = sys.cholesky() else {
                lambda = Some(lam * 4.0);
                continue;
            };
            let step = -(j.transpose() * chol.solve(&r));
            let z = problem.directions.basis() * step;
            let cand = s.point.moved(model, &z);
            let fc = problem.residual(model, &cand.x).norm_squared();
            if fc < s.f {
                s.accept(cand, fc);
                lambda = Some((lam / 3.0).max(1e-15));
                rejections = 0;
                history.push(s.f);
                if stalled(&history, problem, s.f) {
                    return true;
                }
            } else {
                rejections += 1;
                lambda = Some(lam * 4.0);
                if rejections > 12 || lam > 1e12 {
                    return s.f.sqrt() <= problem.tol;
                }
            }
        }
        s.f.sqrt() <= problem.tol
    }
}

impl DescentStrategy for GaussNewton {
    fn name(&self) -> &'static str {
        "gauss-newton"
    }
    fn summary(&self) -> &'static str {
        "Levenberg-Marquardt on mu(x) - c with minimal-norm damped steps"
    }
    fn minimize(&self, model: &SymmetricSpaceModel, problem: &DescentProblem, start: &OrbitPoint) -> DescentOutcome {
        let mut s = State::new(model, problem, start);
        Self::run(model, problem, &mut s, problem.max_iter);
        s.finish(problem, self.name())
    }
}

/// Levenberg–Marquardt, falling back to bursts of gradient flow whenever
/// it stalls above tolerance.
pub struct Hybrid;

impl DescentStrategy for Hybrid {
    fn name(&self) -> &'static str {
        "hybrid"
    }
    fn summary(&self) -> &'static str {
        "Levenberg-Marquardt with gradient-flow restarts when progress stalls"
    }
    fn minimize(&self, model: &SymmetricSpaceModel, problem: &DescentProblem, start: &OrbitPoint) -> DescentOutcome {
        let mut s = State::new(model, problem, start);
        for _ in 0..4 {
            let budget = problem.max_iter.saturating_sub(s.iterations);
            if GaussNewton::run(model, problem, &mut s, budget) || s.iterations >= problem.max_iter {
                break;
            }
            GradientFlow::run(model, problem, &mut s, 50);
        }
        s.finish(problem, self.name())
    }
}

/// Name-indexed registry of descent strategies.
pub struct DescentRegistry {
    strategies: Vec<Box<dyn DescentStrategy>>,
}

impl Default for DescentRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}

impl DescentRegistry {
    pub const DEFAULT: &'static str = "hybrid";

    pub fn builtin() -> Self {
        let mut r = DescentRegistry { strategies: Vec::new() };
        r.register(Box::new(GradientFlow));
        r.register(Box::new(GaussNewton));
        r.register(Box::new(Hybrid));
        r
    }

    pub fn register(&mut self, s: Box<dyn DescentStrategy>) {
        self.strategies.retain(|x| x.name() != s.name());
        self.strategies.push(s);
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.strategies.iter().map(|s| s.name()).collect()
    }

    pub fn get(&self, name: &str) -> Result<&dyn DescentStrategy> {
        self.strategies
            .iter()
            .find(|s| s.name() == name)
            .map(|s| s.as_ref())
            .ok_or_else(|| Error::UnknownEntry {
                kind: "descent strategy",
                name: name.into(),
                known: self.names().join(", "),
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symmetric_space::build_catalog_model;
    use crate::weyl_moment::{orbit_point, sample_direction, FlagOrbit};

    fn setup() -> FlagOrbit {
        FlagOrbit::new(build_catalog_model("adjoint-su", &[3]).unwrap(), None).unwrap()
    }

    #[test]
    fn every_strategy_reaches_an_interior_target() {
        let fo = setup();
        let m = &fo.model;
        let target = &fo.q * 0.25;
        let reg = DescentRegistry::builtin();
        for name in reg.names() {
            let strat = reg.get(name).unwrap();
            let problem = DescentProblem::new(m, target.clone()).with_tol(1e-8).with_max_iter(3000);
            for s in 1..4 {
                let start = orbit_point(m, &fo.q, &sample_direction(m, 5, s));
                let out = strat.minimize(m, &problem, &start);
                assert!(out.converged, "{name}: residual {}", out.residual);
                assert!(out.monotone, "{name}");
                assert!((out.point.x.norm() - 1.0).abs() < 1e-9);
                assert!(out.point.witness_residual(m, &fo.q) < 1e-8);
            }
        }
    }

    #[test]
    fn polishing_a_vertex_target_clusters_tightly() {
        let fo = setup();
        let m = &fo.model;
        let problem = DescentProblem::new(m, fo.q.clone()).with_tol(1e-6).with_polish(true);
        let strat = Hybrid;
        for s in 1..6 {
            let start = orbit_point(m, &fo.q, &sample_direction(m, 8, s));
            let out = strat.minimize(m, &problem, &start);
            assert!(out.converged);
            // the fiber over a vertex is the single point q
            assert!((&out.point.x - m.a_to_p(&fo.q)).norm() < 1e-5, "{}", out.residual);
        }
    }

    #[test]
    fn restricted_directions_preserve_the_subgroup_orbit() {
        // moving only along k₀ never changes μ, so F stays put
        let fo = setup();
        let m = &fo.model;
        let start = orbit_point(m, &fo.q, &sample_direction(m, 2, 3));
        let problem = DescentProblem::new(m, DVector::zeros(2)).with_directions(fo.roots.k0.clone());
        let out = GaussNewton.minimize(m, &problem, &start);
        assert!((out.residual - m.p_to_a(&start.x).norm()).abs() < 1e-9);
    }

    #[test]
    fn unknown_strategy_is_an_error() {
        assert!(DescentRegistry::builtin().get("newton-raphson").is_err());
    }
}
