use nalgebra::DVector;
use serde::Serialize;

use isoflag_core::kirwan::{criterion_verdict, CriterionVerdict, TorusOutcome};
use isoflag_core::morse::{
    audit_minimal_degeneracy, enumerate_critical_levels, fiber_report, resolve_critical_components, ComponentStatus,
    DescentRegistry, ResolveOptions, Verdict,
};
use isoflag_core::report::{
    CatalogDocument, CriticalDocument, FiberDocument, PolytopeReport, VerifyDocument, CRITICAL_SCHEMA, FIBER_SCHEMA,
};
use isoflag_core::symmetric_space::{load_model, restricted_roots, Catalog, SymmetricSpaceModel};
use isoflag_core::verify::{VerifyOptions, VerifyRegistry};
use isoflag_core::weyl_moment::{
    containment_check, default_q, generate_weyl, moment_map, moment_polytope, polytope_svg, sample_orbit, FlagOrbit,
    PolytopeDocument,
};

use crate::args::{Command, Format, ModelArgs, OutputArgs};
use crate::error::CliError;
use crate::output::{cell, csv_rows, emit, json};

pub fn run(command: &Command) -> Result<(), CliError> {
    match command {
        Command::Catalog { output } => catalog(output),
        Command::Polytope {
            model,
            q,
            samples,
            seed,
            tol,
            output,
        } => polytope(model, q.as_deref(), *samples, *seed, *tol, output),
        Command::Critical {
            model,
            q,
            a,
            seed,
            tol,
            strategy,
            output,
        } => critical(model, q.as_deref(), a.as_deref(), *seed, *tol, strategy, output),
        Command::Fiber {
            model,
            q,
            a,
            samples,
            seed,
            tol,
            strategy,
            output,
        } => fiber(model, q.as_deref(), a.as_deref(), *samples, *seed, *tol, strategy, output),
        Command::Kirwan { model, seed, output } => kirwan(model, *seed, output),
        Command::Verify {
            suite,
            seed,
            samples,
            output,
        } => verify(suite, *seed, *samples, output),
    }
}

fn load(args: &ModelArgs) -> Result<SymmetricSpaceModel, CliError> {
    match (&args.model, &args.model_file) {
        (Some(name), None) => {
            let catalog = Catalog::builtin();
            let builder = catalog.get(name)?;
            let params = args.params.clone().unwrap_or_else(|| builder.default_params());
            Ok(builder.build(&params)?)
        }
        (None, Some(path)) => Ok(load_model(path)?),
        _ => Err(CliError::Input("exactly one of --model or --model-file is required".into())),
    }
}

fn vector(model: &SymmetricSpaceModel, flag: &str, v: Option<&[f64]>) -> Result<Option<DVector<f64>>, CliError> {
    match v {
        None => Ok(None),
        Some(v) if v.len() != model.rank => Err(CliError::Input(format!(
            "--{flag} needs {} coordinates for `{}` (rank {}), got {}",
            model.rank,
            model.name,
            model.rank,
            v.len()
        ))),
        Some(v) => Ok(Some(DVector::from_row_slice(v))),
    }
}

fn orbit(model: &ModelArgs, q: Option<&[f64]>) -> Result<FlagOrbit, CliError> {
    let m = load(model)?;
    let q = vector(&m, "q", q)?;
    Ok(FlagOrbit::new(m, q)?)
}

fn unsupported(command: &str, format: Format) -> CliError {
    CliError::Input(format!("`{command}` does not support --format {format:?}").to_lowercase())
}

fn catalog(output: &OutputArgs) -> Result<(), CliError> {
    let doc = CatalogDocument::from_catalog(&Catalog::builtin())?;
    let text = match output.format {
        Format::Json => json(&doc)?,
        Format::Csv => {
            #[derive(Serialize)]
            struct Row<'a> {
                name: &'a str,
                default_params: String,
                rank: usize,
                dim_k: usize,
                dim_p: usize,
                root_type: &'a str,
                multiplicities: String,
            }
            let rows: Vec<Row> = doc
                .models
                .iter()
                .map(|m| Row {
                    name: m.name,
                    default_params: m.default_params.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(";"),
                    rank: m.rank,
                    dim_k: m.dim_k,
                    dim_p: m.dim_p,
                    root_type: &m.root_type,
                    multiplicities: m.multiplicities.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(";"),
                })
                .collect();
            csv_rows(&rows)?
        }
        f => return Err(unsupported("catalog", f)),
    };
    emit(&text, output.out.as_deref())
}

fn polytope(
    args: &ModelArgs,
    q: Option<&[f64]>,
    samples: usize,
    seed: u64,
    tol: f64,
    output: &OutputArgs,
) -> Result<(), CliError> {
    // q may be singular or zero here, so the regular-orbit constructor is bypassed
    let model = load(args)?;
    let roots = restricted_roots(&model)?;
    let q = vector(&model, "q", q)?.unwrap_or_else(|| default_q(&roots));
    let weyl = generate_weyl(&roots)?;
    let p = moment_polytope(&weyl, &q)?;
    let containment = containment_check(&model, &p, &q, samples, seed, tol)?;
    let failures = containment.failures;
    let text = match output.format {
        Format::Json => json(&PolytopeReport {
            polytope: PolytopeDocument::new(&model, &q, &p),
            seed,
            containment,
        })?,
        Format::Csv => {
            #[derive(Serialize)]
            struct Row {
                vertex: usize,
                coordinates: String,
            }
            let rows: Vec<Row> = p
                .vertices
                .iter()
                .enumerate()
                .map(|(i, v)| Row {
                    vertex: i,
                    coordinates: cell(v.as_slice()),
                })
                .collect();
            csv_rows(&rows)?
        }
        Format::Svg => {
            let pts: Vec<DVector<f64>> = sample_orbit(&model, &q, samples.min(2000), seed)?
                .iter()
                .map(|x| moment_map(&model, x))
                .collect();
            polytope_svg(&p, &pts)
        }
    };
    emit(&text, output.out.as_deref())?;
    if failures > 0 {
        return Err(CliError::Numerical(format!(
            "{failures} of {samples} sampled moment images fall outside the polytope at {tol:.1e}"
        )));
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn critical(
    args: &ModelArgs,
    q: Option<&[f64]>,
    a: Option<&[f64]>,
    seed: u64,
    tol: f64,
    strategy: &str,
    output: &OutputArgs,
) -> Result<(), CliError> {
    let fo = orbit(args, q)?;
    let a = vector(&fo.model, "a", a)?.unwrap_or_else(|| DVector::zeros(fo.model.rank));
    let registry = DescentRegistry::builtin();
    let strategy = registry.get(strategy)?;
    let candidates = enumerate_critical_levels(&fo, &a)?;
    let opts = ResolveOptions {
        seed,
        tol,
        ..ResolveOptions::default()
    };
    let components = resolve_critical_components(&fo, &a, &candidates, strategy, &opts)?;
    let audit = audit_minimal_degeneracy(&fo, &a, &components)?;
    let unresolved = components
        .iter()
        .filter(|c| c.status == ComponentStatus::LevelPresentRepresentativeUnresolved)
        .count();
    let doc = CriticalDocument {
        schema: CRITICAL_SCHEMA,
        model: fo.model.name.clone(),
        params: fo.model.params.clone(),
        q: fo.q.iter().cloned().collect(),
        a: a.iter().cloned().collect(),
        strategy: strategy.name(),
        seed,
        components,
        unresolved,
        audit,
    };
    let text = match output.format {
        Format::Json => json(&doc)?,
        Format::Csv => {
            #[derive(Serialize)]
            struct Row {
                b: String,
                w: usize,
                level: f64,
                index: usize,
                slice_dim: usize,
                residual: f64,
                grad_norm: f64,
                status: &'static str,
            }
            let rows: Vec<Row> = doc
                .components
                .iter()
                .map(|c| Row {
                    b: cell(&c.b),
                    w: c.w,
                    level: c.level,
                    index: c.index,
                    slice_dim: c.slice_dim,
                    residual: c.residual,
                    grad_norm: c.grad_norm,
                    status: match c.status {
                        ComponentStatus::Resolved => "resolved",
                        ComponentStatus::LevelPresentRepresentativeUnresolved => "unresolved",
                    },
                })
                .collect();
            csv_rows(&rows)?
        }
        f => return Err(unsupported("critical", f)),
    };
    emit(&text, output.out.as_deref())?;
    if doc.audit.codim2_violation {
        eprintln!("note: a nonminimal component has index < 2; the codimension-2 hypothesis fails for this model");
    }
    if unresolved > 0 {
        return Err(CliError::Numerical(format!(
            "{unresolved} critical level(s) present but representative unresolved"
        )));
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn fiber(
    args: &ModelArgs,
    q: Option<&[f64]>,
    a: Option<&[f64]>,
    samples: usize,
    seed: u64,
    tol: f64,
    strategy: &str,
    output: &OutputArgs,
) -> Result<(), CliError> {
    let fo = orbit(args, q)?;
    let a = vector(&fo.model, "a", a)?.unwrap_or_else(|| DVector::zeros(fo.model.rank));
    let registry = DescentRegistry::builtin();
    let strategy = registry.get(strategy)?;
    let report = fiber_report(&fo, &a, samples, seed, tol, strategy)?;
    for w in &report.samples.warnings {
        eprintln!("warning: {w}");
    }
    if report.samples.boundary_regime {
        eprintln!("note: a lies on the polytope boundary; the verdict is in the boundary regime");
    }
    let verdict = report.verdict.clone();
    let doc = FiberDocument {
        schema: FIBER_SCHEMA,
        model: fo.model.name.clone(),
        params: fo.model.params.clone(),
        q: fo.q.iter().cloned().collect(),
        strategy: strategy.name(),
        seed,
        report,
    };
    let text = match output.format {
        Format::Json => json(&doc)?,
        Format::Csv => {
            #[derive(Serialize)]
            struct Row {
                factor: f64,
                epsilon: f64,
                components: usize,
            }
            let rows: Vec<Row> = doc
                .report
                .epsilon_sweep
                .iter()
                .map(|s| Row {
                    factor: s.factor,
                    epsilon: s.epsilon,
                    components: s.components,
                })
                .collect();
            csv_rows(&rows)?
        }
        f => return Err(unsupported("fiber", f)),
    };
    emit(&text, output.out.as_deref())?;
    if verdict == Verdict::Inconclusive {
        return Err(CliError::Numerical("no stable plateau in the epsilon sweep; verdict inconclusive".into()));
    }
    Ok(())
}

fn kirwan(args: &ModelArgs, seed: u64, output: &OutputArgs) -> Result<(), CliError> {
    let fo = orbit(args, None)?;
    let report = criterion_verdict(&fo, seed)?;
    let text = match output.format {
        Format::Json => json(&report)?,
        Format::Csv => {
            #[derive(Serialize)]
            struct Row {
                mask: u64,
                b: String,
                flat_dim: usize,
                class_size: usize,
                outcome: &'static str,
                excess_dim: Option<usize>,
                weyl_consistent: bool,
            }
            let rows: Vec<Row> = report
                .wall_types
                .iter()
                .map(|w| Row {
                    mask: w.wall.mask,
                    b: cell(&w.wall.b),
                    flat_dim: w.wall.flat_dim,
                    class_size: w.wall.members.len(),
                    outcome: w.outcome.label(),
                    excess_dim: match &w.outcome {
                        TorusOutcome::Obstruction(o) => Some(o.excess_dim),
                        _ => None,
                    },
                    weyl_consistent: w.weyl_consistent,
                })
                .collect();
            csv_rows(&rows)?
        }
        f => return Err(unsupported("kirwan", f)),
    };
    emit(&text, output.out.as_deref())?;
    if report.verdict == CriterionVerdict::Undecided {
        return Err(CliError::Numerical("torus search undecided for some wall type".into()));
    }
    Ok(())
}

fn verify(suite: &str, seed: u64, samples: Option<usize>, output: &OutputArgs) -> Result<(), CliError> {
    let registry = VerifyRegistry::builtin();
    let opts = VerifyOptions { seed, samples };
    let suites = registry.run(suite, &opts)?;
    for s in &suites {
        eprintln!(
            "{:<16} {} ({}/{} checks)",
            s.suite,
            if s.passed { "pass" } else { "FAIL" },
            s.checks.len() - s.failures(),
            s.checks.len()
        );
        for c in s.checks.iter().filter(|c| !c.passed) {
            eprintln!("  failed: {}: {}", c.label, c.detail);
        }
    }
    let doc = VerifyDocument::new(seed, samples, suites);
    let text = match output.format {
        Format::Json => json(&doc)?,
        Format::Csv => {
            #[derive(Serialize)]
            struct Row<'a> {
                suite: &'a str,
                check: &'a str,
                passed: bool,
                detail: &'a str,
            }
            let rows: Vec<Row> = doc
                .suites
                .iter()
                .flat_map(|s| {
                    s.checks.iter().map(move |c| Row {
                        suite: s.suite,
                        check: &c.label,
                        passed: c.passed,
                        detail: &c.detail,
                    })
                })
                .collect();
            csv_rows(&rows)?
        }
        f => return Err(unsupported("verify", f)),
    };
    emit(&text, output.out.as_deref())?;
    if !doc.passed {
        let failed: Vec<&str> = doc.suites.iter().filter(|s| !s.passed).map(|s| s.suite).collect();
        return Err(CliError::Verification(format!("failing suites: {}", failed.join(", "))));
    }
    Ok(())
}
