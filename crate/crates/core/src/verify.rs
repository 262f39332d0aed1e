//! Exact verification of identified functionals against seeded random models:
//! the functional is evaluated on each model's observed law and compared,
//! cell by cell, with the true query value enumerated from the full law.

use crate::expr::{EvalError, Evaluator, ProbExpr};
use crate::graph::{MDag, MonotoneSpec};
use crate::model::{observed_law, query_eval, random_model, ModelError, Query};
use serde::Serialize;
use std::collections::BTreeMap;

#[derive(Debug, Clone, Serialize)]
pub struct Counterexample {
    pub assignment: Vec<(String, u8)>,
    pub expected: String,
    pub got: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub seed: u64,
    pub pass: bool,
    pub cells_compared: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Counterexample>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub models: usize,
    pub passed: bool,
    /// `n = 0` verifies nothing; flagged so a vacuous pass cannot be mistaken
    /// for evidence.
    pub vacuous: bool,
    pub runs: Vec<RunReport>,
}

/// Compares `evaluate(expr, observed_law(m))` with `query_eval(m, query)` on
/// `n` seeded random models consistent with `(g, mono)`. Comparison is exact;
/// query cells undefined in the model (zero conditioning events) are skipped.
/// The first mismatching cell of each failing model is reported.
pub fn verify_functional(
    g: &MDag,
    mono: &MonotoneSpec,
    expr: &ProbExpr,
    query: &Query,
    n: u64,
    seed: u64,
) -> Result<VerificationReport, ModelError> {
    let mut runs = Vec::new();
    let mut passed = true;
    for i in 0..n {
        let model_seed = seed.wrapping_add(i);
        let m = random_model(g, mono, model_seed, &BTreeMap::new())?;
        let truth = query_eval(&m, query)?;
        let olaw = observed_law(&m);
        let mut ev = Evaluator::for_observed(&olaw);
        let mut run = RunReport {
            seed: model_seed,
            pass: true,
            cells_compared: 0,
            counterexample: None,
        };
        'cells: for (values, cell) in &truth.rows {
            let want = match cell {
                Some(v) => v,
                None => continue, // undefined in the model itself
            };
            let assignment: BTreeMap<String, u8> = truth
                .vars
                .iter()
                .cloned()
                .zip(values.iter().copied())
                .collect();
            run.cells_compared += 1;
            let outcome = ev.eval(expr, &assignment);
            let mismatch = |got: String| Counterexample {
                assignment: truth
                    .vars
                    .iter()
                    .cloned()
                    .zip(values.iter().copied())
                    .collect(),
                expected: crate::model::rational_string(want),
                got,
            };
            match outcome {
                Ok(got) if got == *want => {}
                Ok(got) => {
                    run.pass = false;
                    run.counterexample = Some(mismatch(crate::model::rational_string(&got)));
                    break 'cells;
                }
                Err(e @ EvalError::ConditioningOnNull(_)) => {
                    run.pass = false;
                    run.counterexample = Some(mismatch(format!("undefined: {e}")));
                    break 'cells;
                }
                Err(e) => {
                    run.pass = false;
                    run.counterexample = Some(mismatch(format!("error: {e}")));
                    break 'cells;
                }
            }
        }
        passed &= run.pass;
        runs.push(run);
    }
    Ok(VerificationReport {
        models: n as usize,
        passed,
        vacuous: n == 0,
        runs,
    })
}

/// Exact equality of two expressions on `n` seeded random models, both
/// evaluated against the observed law over all assignments of their shared
/// free variables. Used to check that algebraically different derivations
/// denote the same functional.
pub fn expressions_agree(
    g: &MDag,
    mono: &MonotoneSpec,
    lhs: &ProbExpr,
    rhs: &ProbExpr,
    free: &[(&str, u8)],
    n: u64,
    seed: u64,
) -> Result<bool, ModelError> {
    let total: usize = free.iter().map(|&(_, c)| c as usize).product();
    for i in 0..n {
        let m = random_model(g, mono, seed.wrapping_add(i), &BTreeMap::new())?;
        let olaw = observed_law(&m);
        let mut ev = Evaluator::for_observed(&olaw);
        for idx in 0..total {
            let mut rem = idx;
            let assignment: BTreeMap<String, u8> = free
                .iter()
                .rev()
                .map(|&(name, c)| {
                    let v = (rem % c as usize) as u8;
                    rem /= c as usize;
                    (name.to_string(), v)
                })
                .collect();
            let l = ev.eval(lhs, &assignment);
            let r = ev.eval(rhs, &assignment);
            match (l, r) {
                (Ok(a), Ok(b)) if a == b => {}
                (Err(EvalError::ConditioningOnNull(_)), Err(EvalError::ConditioningOnNull(_))) => {}
                _ => return Ok(false),
            }
        }
    }
    Ok(true)
}

pub fn first_failure(report: &VerificationReport) -> Option<(&RunReport, &Counterexample)> {
    report
        .runs
        .iter()
        .find(|r| !r.pass)
        .and_then(|r| r.counterexample.as_ref().map(|c| (r, c)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::figures;
    use crate::identify::identify_full_law;

    #[test]
    fn fig1_full_law_verifies() {
        let (g, mono) = figures::fig1();
        let res = identify_full_law(&g, &mono).unwrap();
        let expr = res.functional.unwrap();
        let report = verify_functional(&g, &mono, &expr, &Query::FullLaw, 5, 100).unwrap();
        assert!(report.passed, "{:?}", first_failure(&report));
        assert!(!report.vacuous);
    }

    #[test]
    fn complete_case_estimator_fails_on_bivariate_chain() {
        // p(X, Y | R=1) is a wrong target-law candidate under the monotone
        // chain; the oracle must produce a witness cell
        let (g, mono) = figures::fig2a();
        let wrong = crate::expr::parse_expr("p(X, Y | R_X=1, R_Y=1)").unwrap();
        let report = verify_functional(&g, &mono, &wrong, &Query::TargetLaw, 5, 3).unwrap();
        assert!(!report.passed);
        let (_, cex) = first_failure(&report).unwrap();
        assert!(!cex.assignment.is_empty());
    }

    #[test]
    fn zero_models_is_vacuous() {
        let (g, mono) = figures::fig1();
        let expr = crate::expr::parse_expr("p(X, Y | R_X=1, R_Y=1)").unwrap();
        let report = verify_functional(&g, &mono, &expr, &Query::TargetLaw, 0, 0).unwrap();
        assert!(report.passed && report.vacuous);
    }
}
