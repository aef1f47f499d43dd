//! Invariant suites behind the [`VerifySuite`] trait, registered by name in a
//! [`VerifyRegistry`]. Each suite runs its property checks over the catalog
//! and returns one line per check.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kirwan::{criterion_verdict, CriterionVerdict, TorusOutcome};
use crate::morse::{
    audit_minimal_degeneracy, completeness_check, enumerate_critical_levels, fiber_report, gradient_fd_check,
    interior_targets, resolve_critical_components, Hybrid, ResolveOptions, Verdict, FIBER_TOL,
};
use crate::symmetric_space::{build_catalog_model, Catalog};
use crate::weyl_moment::{containment_check, focal_residual, shape_operator_check, FlagOrbit};

pub const VERIFY_SCHEMA: &str = "isoflag-verify/1";

/// Shared knobs; `samples` overrides each suite's default sample count.
#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub seed: u64,
    pub samples: Option<usize>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { seed: 1, samples: None }
    }
}

impl VerifyOptions {
    fn samples_or(&self, default: usize) -> usize {
        self.samples.unwrap_or(default)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub label: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    pub fn new(label: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        CheckResult {
            label: label.into(),
            passed,
            detail: detail.into(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: &'static str,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

impl SuiteReport {
    fn new(suite: &'static str, checks: Vec<CheckResult>) -> Self {
        SuiteReport {
            suite,
            passed: checks.iter().all(|c| c.passed),
            checks,
        }
    }

    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| !c.passed).count()
    }
}

pub trait VerifySuite: Send + Sync {
    fn name(&self) -> &'static str;
    fn summary(&self) -> &'static str;
    fn run(&self, opts: &VerifyOptions) -> Result<SuiteReport>;
}

/// Name-indexed registry of invariant suites.
pub struct VerifyRegistry {
    suites: Vec<Box<dyn VerifySuite>>,
}

impl Default for VerifyRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}

impl VerifyRegistry {
    pub fn builtin() -> Self {
        let mut r = VerifyRegistry { suites: Vec::new() };
        r.register(Box::new(Multiplicities));
        r.register(Box::new(Convexity));
        r.register(Box::new(Curvature));
        r.register(Box::new(Gradient));
        r.register(Box::new(Enumeration));
        r.register(Box::new(Hessian));
        r.register(Box::new(Connectivity));
        r.register(Box::new(Counterexample));
        r.register(Box::new(Kirwan));
        r
    }

    /// Adds a suite, replacing any suite of the same name.
    pub fn register(&mut self, suite: Box<dyn VerifySuite>) {
        self.suites.retain(|s| s.name() != suite.name());
        self.suites.push(suite);
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.suites.iter().map(|s| s.name()).collect()
    }

    pub fn suites(&self) -> impl Iterator<Item = &dyn VerifySuite> {
        self.suites.iter().map(|s| s.as_ref())
    }

    pub fn get(&self, name: &str) -> Result<&dyn VerifySuite> {
        self.suites()
            .find(|s| s.name() == name)
            .ok_or_else(|| Error::UnknownEntry {
                kind: "verify suite",
                name: name.into(),
                known: self.names().join(", "),
            })
    }

    /// Runs one suite by name, or every suite for `"all"`.
    pub fn run(&self, selector: &str, opts: &VerifyOptions) -> Result<Vec<SuiteReport>> {
        if selector == "all" {
            self.suites().map(|s| s.run(opts)).collect()
        } else {
            Ok(vec![self.get(selector)?.run(opts)?])
        }
    }
}

fn catalog_orbits() -> Result<Vec<FlagOrbit>> {
    Catalog::builtin()
        .builders()
        .map(|b| FlagOrbit::new(b.build(&b.default_params())?, None))
        .collect()
}

fn orbit(name: &str, params: &[i64]) -> Result<FlagOrbit> {
    FlagOrbit::new(build_catalog_model(name, params)?, None)
}

fn tag(fo: &FlagOrbit) -> String {
    format!("{}{:?}", fo.model.name, fo.model.params)
}

pub struct Multiplicities;

impl VerifySuite for Multiplicities {
    fn name(&self) -> &'static str {
        "multiplicities"
    }
    fn summary(&self) -> &'static str {
        "restricted-root multiplicities of the quaternionic, CP² and circle models"
    }
    fn run(&self, _opts: &VerifyOptions) -> Result<SuiteReport> {
        let mut checks = Vec::new();
        for (name, params, expect) in [
            ("su2n-over-spn", vec![2], 4usize),
            ("su2n-over-spn", vec![3], 4),
            ("su3-over-u2", vec![], 3),
            ("su2-over-so2", vec![], 1),
        ] {
            let fo = orbit(name, &params)?;
            let ms = &fo.roots.multiplicities;
            checks.push(CheckResult::new(
                tag(&fo),
                !ms.is_empty() && ms.iter().all(|m| *m == expect),
                format!("multiplicities {ms:?}, expected all {expect}"),
            ));
        }
        Ok(SuiteReport::new(self.name(), checks))
    }
}

pub struct Convexity;

impl VerifySuite for Convexity {
    fn name(&self) -> &'static str {
        "convexity"
    }
    fn summary(&self) -> &'static str {
        "sampled orbit points map into the Weyl-orbit hull at 1e-7"
    }
    fn run(&self, opts: &VerifyOptions) -> Result<SuiteReport> {
        let n = opts.samples_or(1000);
        let mut checks = Vec::new();
        for fo in catalog_orbits()? {
            let r = containment_check(&fo.model, &fo.polytope, &fo.q, n, opts.seed, 1e-7)?;
            checks.push(CheckResult::new(
                tag(&fo),
                r.passed(),
                format!("{} samples, {} failures, max violation {:.2e}", r.samples, r.failures, r.max_violation),
            ));
        }
        Ok(SuiteReport::new(self.name(), checks))
    }
}

pub struct Curvature;

impl VerifySuite for Curvature {
    fn name(&self) -> &'static str {
        "curvature"
    }
    fn summary(&self) -> &'static str {
        "closed-form curvature normals against finite-difference shape operators; focal hyperplanes"
    }
    fn run(&self, opts: &VerifyOptions) -> Result<SuiteReport> {
        let mut checks = Vec::new();
        for fo in catalog_orbits()? {
            let s = shape_operator_check(&fo.model, &fo.normals, &fo.q, opts.samples_or(4), opts.seed)?;
            checks.push(CheckResult::new(
                format!("{} shape operator", tag(&fo)),
                s.passed(1e-4),
                format!("max relative error {:.2e}", s.max_rel_error),
            ));
            let f = focal_residual(&fo.normals, &fo.q, 50, opts.seed);
            checks.push(CheckResult::new(
                format!("{} focal hyperplanes", tag(&fo)),
                f <= 1e-8,
                format!("max residual {f:.2e}"),
            ));
        }
        Ok(SuiteReport::new(self.name(), checks))
    }
}

pub struct Gradient;

impl VerifySuite for Gradient {
    fn name(&self) -> &'static str {
        "gradient"
    }
    fn summary(&self) -> &'static str {
        "grad f against central differences along random orbit curves"
    }
    fn run(&self, opts: &VerifyOptions) -> Result<SuiteReport> {
        let mut checks = Vec::new();
        for fo in catalog_orbits()? {
            let a = &interior_targets(&fo, 1, opts.seed, 0.05)[0];
            let e = gradient_fd_check(&fo.model, &fo.q, a, opts.samples_or(10), opts.seed);
            checks.push(CheckResult::new(tag(&fo), e <= 1e-5, format!("max relative error {e:.2e}")));
        }
        Ok(SuiteReport::new(self.name(), checks))
    }
}

pub struct Enumeration;

impl VerifySuite for Enumeration {
    fn name(&self) -> &'static str {
        "enumeration"
    }
    fn summary(&self) -> &'static str {
        "multistart critical-point searches land on enumerated critical levels"
    }
    fn run(&self, opts: &VerifyOptions) -> Result<SuiteReport> {
        let mut checks = Vec::new();
        for fo in catalog_orbits()? {
            let a = &interior_targets(&fo, 1, opts.seed, 0.05)[0];
            let r = completeness_check(&fo, a, opts.samples_or(200), opts.seed)?;
            checks.push(CheckResult::new(
                tag(&fo),
                r.passed,
                format!(
                    "{}/{} converged, {} distinct values, {} levels, max distance {:.2e}",
                    r.converged,
                    r.starts,
                    r.found_levels.len(),
                    r.levels.len(),
                    r.max_distance
                ),
            ));
        }
        Ok(SuiteReport::new(self.name(), checks))
    }
}

pub struct Hessian;

impl VerifySuite for Hessian {
    fn name(&self) -> &'static str {
        "hessian"
    }
    fn summary(&self) -> &'static str {
        "Hessian law, level law, index count and codimension-2 flag at every critical component"
    }
    fn run(&self, opts: &VerifyOptions) -> Result<SuiteReport> {
        let mut checks = Vec::new();
        for fo in catalog_orbits()? {
            let a = &interior_targets(&fo, 1, opts.seed, 0.05)[0];
            let cands = enumerate_critical_levels(&fo, a)?;
            let ro = ResolveOptions {
                seed: opts.seed,
                ..ResolveOptions::default()
            };
            let comps = resolve_critical_components(&fo, a, &cands, &Hybrid, &ro)?;
            let audit = audit_minimal_degeneracy(&fo, a, &comps)?;
            let worst_h = audit.rows.iter().map(|r| r.hessian_rel_error).fold(0.0, f64::max);
            let worst_l = audit.rows.iter().map(|r| r.level_error).fold(0.0, f64::max);
            let violations: Vec<&String> = audit.rows.iter().flat_map(|r| &r.violations).collect();
            checks.push(CheckResult::new(
                format!("{} audit", tag(&fo)),
                audit.passed,
                format!(
                    "{} components, {} unresolved, max Hessian error {worst_h:.2e}, max level error {worst_l:.2e}{}",
                    audit.rows.len(),
                    audit.unresolved,
                    if violations.is_empty() { String::new() } else { format!(", violations: {violations:?}") }
                ),
            ));
            let all_ge_2 = fo.roots.multiplicities.iter().all(|m| *m >= 2);
            checks.push(CheckResult::new(
                format!("{} codim-2 flag", tag(&fo)),
                audit.codim2_violation != all_ge_2,
                format!(
                    "min multiplicity {}, flag {}",
                    fo.roots.min_multiplicity(),
                    if audit.codim2_violation { "raised" } else { "clear" }
                ),
            ));
        }
        Ok(SuiteReport::new(self.name(), checks))
    }
}

pub struct Connectivity;

impl VerifySuite for Connectivity {
    fn name(&self) -> &'static str {
        "connectivity"
    }
    fn summary(&self) -> &'static str {
        "fibers over interior targets are connected when all multiplicities are at least 2"
    }
    fn run(&self, opts: &VerifyOptions) -> Result<SuiteReport> {
        let n = opts.samples_or(2000);
        let mut checks = Vec::new();
        for (name, params) in [("adjoint-su", vec![3]), ("su2n-over-spn", vec![2])] {
            let fo = orbit(name, &params)?;
            for (i, a) in interior_targets(&fo, 10, opts.seed, 0.05).iter().enumerate() {
                let r = fiber_report(&fo, a, n, opts.seed + i as u64, FIBER_TOL, &Hybrid)?;
                checks.push(CheckResult::new(
                    format!("{} target {i}", tag(&fo)),
                    r.verdict == Verdict::Connected,
                    format!("{} retained, verdict {}, plateau {:?}", r.samples.retained, r.verdict, r.plateau),
                ));
            }
        }
        Ok(SuiteReport::new(self.name(), checks))
    }
}

pub struct Counterexample;

impl VerifySuite for Counterexample {
    fn name(&self) -> &'static str {
        "counterexample"
    }
    fn summary(&self) -> &'static str {
        "the circle model: two-point fibers inside, one point at a vertex"
    }
    fn run(&self, opts: &VerifyOptions) -> Result<SuiteReport> {
        let fo = orbit("su2-over-so2", &[])?;
        let n = opts.samples_or(500);
        let mut checks = Vec::new();
        for (label, a, expect) in [
            ("interior", &fo.q * 0.3, Verdict::Disconnected { components: 2 }),
            ("interior", &fo.q * -0.55, Verdict::Disconnected { components: 2 }),
            ("vertex", fo.q.clone(), Verdict::Connected),
            ("vertex", -&fo.q, Verdict::Connected),
        ] {
            let r = fiber_report(&fo, &a, n, opts.seed, FIBER_TOL, &Hybrid)?;
            checks.push(CheckResult::new(
                format!("{label} a = {:.3}", a[0]),
                r.verdict == expect,
                format!("{} retained, verdict {}, expected {expect}", r.samples.retained, r.verdict),
            ));
        }
        Ok(SuiteReport::new(self.name(), checks))
    }
}

pub struct Kirwan;

impl VerifySuite for Kirwan {
    fn name(&self) -> &'static str {
        "kirwan"
    }
    fn summary(&self) -> &'static str {
        "torus criterion verdicts, obstruction certificates and Weyl invariance"
    }
    fn run(&self, opts: &VerifyOptions) -> Result<SuiteReport> {
        let mut checks = Vec::new();
        for (name, params, expect) in [
            ("su2n-over-spn", vec![2], CriterionVerdict::Satisfied),
            ("su3-over-u2", vec![], CriterionVerdict::NotSatisfied),
            ("su2-over-so2", vec![], CriterionVerdict::GateFailed),
        ] {
            let fo = orbit(name, &params)?;
            let r = criterion_verdict(&fo, opts.seed)?;
            checks.push(CheckResult::new(
                tag(&fo),
                r.verdict == expect && r.wall_types.iter().all(|w| w.weyl_consistent),
                format!("verdict {}, expected {expect}", r.verdict),
            ));
            if expect == CriterionVerdict::NotSatisfied {
                let certified = r.wall_types.iter().any(|w| match &w.outcome {
                    TorusOutcome::Obstruction(o) => fo.roots.doubles.iter().flatten().any(|&d| {
                        o.excess.contains_subspace(&fo.roots.roots[d].k_space, 1e-8).unwrap_or(false)
                    }),
                    _ => false,
                });
                checks.push(CheckResult::new(
                    format!("{} obstruction contains k_2α", tag(&fo)),
                    certified,
                    "excess subspace annihilated by every admissible generator",
                ));
            }
        }
        Ok(SuiteReport::new(self.name(), checks))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_lists_all_suites() {
        let r = VerifyRegistry::builtin();
        let mut names = r.names();
        names.sort();
        assert_eq!(
            names,
            vec![
                "connectivity",
                "convexity",
                "counterexample",
                "curvature",
                "enumeration",
                "gradient",
                "hessian",
                "kirwan",
                "multiplicities"
            ]
        );
        assert!(r.get("nope").is_err());
    }

    #[test]
    fn fast_suites_pass() {
        let r = VerifyRegistry::builtin();
        let opts = VerifyOptions {
            seed: 3,
            samples: Some(40),
        };
        for name in ["multiplicities", "kirwan", "counterexample", "gradient"] {
            let rep = r.run(name, &opts).unwrap().remove(0);
            assert!(rep.passed, "{rep:#?}");
        }
    }

    struct AlwaysFails;

    impl VerifySuite for AlwaysFails {
        fn name(&self) -> &'static str {
            "kirwan"
        }
        fn summary(&self) -> &'static str {
            "replacement"
        }
        fn run(&self, _opts: &VerifyOptions) -> Result<SuiteReport> {
            Ok(SuiteReport::new("kirwan", vec![CheckResult::new("x", false, "")]))
        }
    }

    #[test]
    fn registering_replaces_by_name() {
        let mut r = VerifyRegistry::builtin();
        r.register(Box::new(AlwaysFails));
        assert_eq!(r.names().len(), 9);
        let rep = r.run("kirwan", &VerifyOptions::default()).unwrap();
        assert_eq!(rep[0].failures(), 1);
    }
}
