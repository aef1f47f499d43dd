//! Critical structure of f(x) = ‖μ(x) − a‖² on the orbit: critical levels,
//! critical components with their Morse indices, Hessian audits, descent
//! strategies and sampled fiber connectivity.

pub mod completeness;
pub mod critical;
pub mod descent;
pub mod fiber;
pub mod gradient;
pub mod hessian;

pub use completeness::{completeness_check, CompletenessReport, CompletenessRun, GRAD_TOL, LEVEL_MATCH_TOL};
pub use critical::{
    critical_values, enumerate_critical_levels, morse_index, resolve_critical_components, root_flats, ComponentStatus,
    CriticalComponent, Flat, LevelCandidate, ResolveOptions,
};
pub use descent::{DescentOutcome, DescentProblem, DescentRegistry, DescentStrategy, GaussNewton, GradientFlow, Hybrid};
pub use gradient::{f_value, grad_f, grad_f_at, gradient_fd_check, HeightFunction};
pub use hessian::{audit_component, audit_minimal_degeneracy, hessian_f, hessian_fd_error, AuditRow, DegeneracyAudit, HessianData};
pub use fiber::{
    connectivity_verdict, epsilon_components, fiber_report, fiber_residual, interior_targets, sample_fiber, FiberReport, FiberSamples,
    SweepPolicy, SweepRow, Verdict, BOUNDARY_TOL, FIBER_TOL,
};
