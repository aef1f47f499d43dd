use rayon::prelude::*;
use serde::Serialize;

use super::torus::{find_torus_witness, TorusOutcome};
use super::walls::{wall_types, WallType};
use crate::error::Result;
use crate::weyl_moment::FlagOrbit;

pub const CRITERION_SCHEMA: &str = "isoflag-criterion/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CriterionVerdict {
    /// Every multiplicity exceeds 1 and every wall type has a torus witness.
    Satisfied,
    /// Some wall type carries an obstruction certificate.
    NotSatisfied,
    /// Some multiplicity equals 1; the torus search is not run.
    GateFailed,
    /// No obstruction, but some wall type stayed undecided.
    Undecided,
}

impl std::fmt::Display for CriterionVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CriterionVerdict::Satisfied => "satisfied",
            CriterionVerdict::NotSatisfied => "not satisfied",
            CriterionVerdict::GateFailed => "not satisfied (multiplicity gate)",
            CriterionVerdict::Undecided => "undecided",
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct WallTypeVerdict {
    #[serde(flatten)]
    pub wall: WallType,
    pub outcome: TorusOutcome,
    /// Outcome labels of the other members of the Weyl class agree.
    pub weyl_consistent: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CriterionReport {
    pub schema: &'static str,
    pub model: String,
    pub params: Vec<i64>,
    pub multiplicities: Vec<usize>,
    pub gate_passed: bool,
    pub wall_types: Vec<WallTypeVerdict>,
    pub verdict: CriterionVerdict,
}

/// Multiplicity gate plus a torus search on every wall type.
pub fn criterion_verdict(fo: &FlagOrbit, seed: u64) -> Result<CriterionReport> {
    let multiplicities = fo.roots.multiplicities.clone();
    let gate_passed = multiplicities.iter().all(|m| *m > 1);
    let mut report = CriterionReport {
        schema: CRITERION_SCHEMA,
        model: fo.model.name.clone(),
        params: fo.model.params.clone(),
        multiplicities,
        gate_passed,
        wall_types: Vec::new(),
        verdict: CriterionVerdict::GateFailed,
    };
    if !gate_passed {
        return Ok(report);
    }
    let types = wall_types(&fo.roots, &fo.weyl);
    let verdicts: Result<Vec<WallTypeVerdict>> = types
        .into_par_iter()
        .map(|wall| {
            let outcome = find_torus_witness(&fo.model, &fo.roots, &wall.b_vector(), seed ^ wall.mask)?;
            let mut weyl_consistent = true;
            for (mask, b) in wall.members.iter().zip(&wall.member_points).skip(1) {
                let other = find_torus_witness(&fo.model, &fo.roots, b, seed ^ mask)?;
                weyl_consistent &= other.label() == outcome.label();
            }
            Ok(WallTypeVerdict {
                wall,
                outcome,
                weyl_consistent,
            })
        })
        .collect();
    report.wall_types = verdicts?;
    let any = |f: fn(&TorusOutcome) -> bool| report.wall_types.iter().any(|w| f(&w.outcome));
    report.verdict = if any(|o| matches!(o, TorusOutcome::Obstruction(_))) {
        CriterionVerdict::NotSatisfied
    } else if any(|o| matches!(o, TorusOutcome::Undecided { .. })) {
        CriterionVerdict::Undecided
    } else {
        CriterionVerdict::Satisfied
    };
    Ok(report)
}
