//! Odds-ratio factorization of the missingness mechanism, as an executable
//! reconstruction check.
//!
//! For a positive nonmonotone model the mechanism factorizes exactly into
//! baseline terms `p(R_k | R_-k = 1, O, X^(1))`, odds-ratio terms pairing each
//! `R_k` with its predecessors under an indicator ordering, and a normalizing
//! constant. Under local monotonicity some denominators in the odds-ratio
//! terms are exactly zero and the factorization is unusable; the check
//! surfaces the first offending term instead of dividing by zero.

use crate::expr::{ProbExpr, ProbTerm, VarRef};
use crate::model::{DiscreteModel, ModelError};
use num::rational::BigRational;
use num::{One, Zero};
use serde::Serialize;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OrError {
    #[error("ordering must cover every response indicator exactly once")]
    BadOrdering,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("zero denominator in odds-ratio term for `{indicator}` at {context}")]
    ZeroDenominator { indicator: String, context: String },
}

/// The symbolic shape of the factorization for a given indicator ordering:
/// baseline terms, odds-ratio terms, and the normalizer as a marginal sum.
#[derive(Debug, Clone, Serialize)]
pub struct OrFactorization {
    pub ordering: Vec<String>,
    pub baseline_terms: Vec<ProbExpr>,
    pub or_terms: Vec<ProbExpr>,
    pub normalizer: ProbExpr,
}

/// Exact cell-by-cell comparison of the reconstructed mechanism against the
/// true `p(R | O, X^(1))`.
#[derive(Debug, Clone, Serialize)]
pub struct OrReport {
    pub ordering: Vec<String>,
    pub cells_checked: usize,
    pub exact: bool,
    pub mismatches: Vec<String>,
}

fn substantive_refs(g: &crate::graph::MDag) -> Vec<VarRef> {
    g.substantive()
        .into_iter()
        .map(|v| VarRef::free(g.name(v)))
        .collect()
}

/// Builds the symbolic factorization for `ordering` over the model's graph.
pub fn or_factorization(
    g: &crate::graph::MDag,
    ordering: &[String],
) -> Result<OrFactorization, OrError> {
    let inds: Vec<String> = g
        .indicators()
        .iter()
        .map(|&r| g.name(r).to_string())
        .collect();
    {
        let mut sorted = ordering.to_vec();
        sorted.sort();
        let mut want = inds.clone();
        want.sort();
        if sorted != want {
            return Err(OrError::BadOrdering);
        }
    }
    let ctx = substantive_refs(g);
    let k_total = ordering.len();
    let mut baseline_terms = Vec::new();
    let mut or_terms = Vec::new();
    for (k, rk) in ordering.iter().enumerate() {
        let others: Vec<VarRef> = ordering
            .iter()
            .filter(|r| *r != rk)
            .map(|r| VarRef::fixed(r.clone(), 1))
            .chain(ctx.iter().cloned())
            .collect();
        baseline_terms.push(ProbExpr::term(
            vec![VarRef::free(rk.clone())],
            others.clone(),
        ));
        if k == 0 {
            continue;
        }
        // OR(R_k, R_{<k} | R_{>k} = 1, O, X^(1))
        let mixed: Vec<VarRef> = ordering[..k]
            .iter()
            .map(|r| VarRef::free(r.clone()))
            .chain(
                ordering[k + 1..]
                    .iter()
                    .map(|r| VarRef::fixed(r.clone(), 1)),
            )
            .chain(ctx.iter().cloned())
            .collect();
        let num1 = ProbExpr::term(vec![VarRef::free(rk.clone())], mixed.clone());
        let den1 = ProbExpr::term(vec![VarRef::fixed(rk.clone(), 1)], mixed);
        let num2 = ProbExpr::term(vec![VarRef::fixed(rk.clone(), 1)], others.clone());
        let den2 = ProbExpr::term(vec![VarRef::free(rk.clone())], others);
        or_terms.push(ProbExpr::quotient(
            ProbExpr::product(vec![num1, num2]),
            ProbExpr::product(vec![den1, den2]),
        ));
        let _ = k_total;
    }
    let unnormalized = ProbExpr::product(
        baseline_terms
            .iter()
            .cloned()
            .chain(or_terms.iter().cloned())
            .collect(),
    );
    let normalizer = ProbExpr::sum(ordering.to_vec(), unnormalized);
    Ok(OrFactorization {
        ordering: ordering.to_vec(),
        baseline_terms,
        or_terms,
        normalizer,
    })
}

/// Mass over indicator masks for one substantive assignment: `mass[m]` is
/// `p(base, R = bits of m)` with indicator `ordering[j]` on bit `j`.
struct MaskTable {
    mass: Vec<BigRational>,
}

impl MaskTable {
    /// Marginal mass of a partial indicator assignment
    /// (`constraints[j] = Some(v)` pins bit `j`).
    fn event(&self, constraints: &[Option<u8>]) -> BigRational {
        let mut sum = BigRational::zero();
        for (mask, p) in self.mass.iter().enumerate() {
            let ok = constraints
                .iter()
                .enumerate()
                .all(|(j, c)| c.is_none_or(|v| ((mask >> j) & 1) as u8 == v));
            if ok {
                sum += p.clone();
            }
        }
        sum
    }

    /// `p(bit k = val | constraints)`, or `None` on a zero conditioning event.
    fn cond(&self, k: usize, val: u8, constraints: &[Option<u8>]) -> Option<BigRational> {
        let den = self.event(constraints);
        if den.is_zero() {
            return None;
        }
        let mut with = constraints.to_vec();
        with[k] = Some(val);
        Some(self.event(&with) / den)
    }
}

/// Computes every factor and the normalizer from the model's full law, and
/// compares the reconstruction cell by cell against the true mechanism for
/// every substantive assignment. Errors with [`OrError::ZeroDenominator`] on
/// the first zero denominator term (the monotone failure mode).
pub fn or_reconstruct(m: &DiscreteModel, ordering: &[String]) -> Result<OrReport, OrError> {
    let g = &m.graph;
    let ord_ids: Result<Vec<_>, _> = ordering
        .iter()
        .map(|n| g.id(n).map_err(|_| OrError::BadOrdering))
        .collect();
    let ord_ids: Vec<crate::graph::VarId> = ord_ids?;
    {
        let mut sorted = ord_ids.clone();
        sorted.sort_unstable();
        if sorted != g.indicators() {
            return Err(OrError::BadOrdering);
        }
    }
    let substantive = g.substantive();
    let k_n = ord_ids.len();
    // one pass over the law: group indicator-mask masses by substantive assignment
    let mut groups: BTreeMap<Vec<u8>, MaskTable> = BTreeMap::new();
    for (values, p) in m.full_law().iter_assignments() {
        let key: Vec<u8> = substantive.iter().map(|&v| values[v]).collect();
        let mut mask = 0usize;
        for (j, &r) in ord_ids.iter().enumerate() {
            mask |= (values[r] as usize) << j;
        }
        let entry = groups.entry(key).or_insert_with(|| MaskTable {
            mass: vec![BigRational::zero(); 1 << k_n],
        });
        entry.mass[mask] += p.clone();
    }
    let mut report = OrReport {
        ordering: ordering.to_vec(),
        cells_checked: 0,
        exact: true,
        mismatches: Vec::new(),
    };
    for (key, table) in &groups {
        let base_mass = table.event(&vec![None; k_n]);
        if base_mass.is_zero() {
            continue;
        }
        let describe = |r_vals: &[Option<u8>]| -> String {
            let mut parts: Vec<String> = substantive
                .iter()
                .zip(key.iter())
                .map(|(&v, &val)| format!("{}={}", g.name(v), val))
                .collect();
            for (j, c) in r_vals.iter().enumerate() {
                if let Some(v) = c {
                    parts.push(format!("{}={}", g.name(ord_ids[j]), v));
                }
            }
            parts.join(", ")
        };
        // factor value for one full indicator assignment
        let factor = |r_vals: &[u8]| -> Result<BigRational, OrError> {
            let mut acc = BigRational::one();
            let others = |k: usize| -> Vec<Option<u8>> {
                (0..k_n)
                    .map(|j| if j == k { None } else { Some(1) })
                    .collect()
            };
            for (k, &rk) in ord_ids.iter().enumerate() {
                let ctx = others(k);
                let base =
                    table
                        .cond(k, r_vals[k], &ctx)
                        .ok_or_else(|| OrError::ZeroDenominator {
                            indicator: g.name(rk).to_string(),
                            context: describe(&ctx),
                        })?;
                acc *= base;
            }
            for k in 1..k_n {
                let rk = ord_ids[k];
                let mixed: Vec<Option<u8>> = (0..k_n)
                    .map(|j| {
                        if j < k {
                            Some(r_vals[j])
                        } else if j > k {
                            Some(1)
                        } else {
                            None
                        }
                    })
                    .collect();
                let ones = others(k);
                let zero_den = |ctx: &[Option<u8>]| OrError::ZeroDenominator {
                    indicator: g.name(rk).to_string(),
                    context: describe(ctx),
                };
                let quad = (
                    table.cond(k, r_vals[k], &mixed),
                    table.cond(k, 1, &mixed),
                    table.cond(k, 1, &ones),
                    table.cond(k, r_vals[k], &ones),
                );
                match quad {
                    (Some(n1), Some(d1), Some(n2), Some(d2)) => {
                        if d1.is_zero() || d2.is_zero() {
                            return Err(zero_den(&mixed));
                        }
                        acc *= n1 / d1 * n2 / d2;
                    }
                    // conditioning event itself has zero mass: same failure
                    _ => return Err(zero_den(&mixed)),
                }
            }
            Ok(acc)
        };
        let mut z = BigRational::zero();
        for mask in 0..(1usize << k_n) {
            let r_vals: Vec<u8> = (0..k_n).map(|j| ((mask >> j) & 1) as u8).collect();
            z += factor(&r_vals)?;
        }
        for mask in 0..(1usize << k_n) {
            let r_vals: Vec<u8> = (0..k_n).map(|j| ((mask >> j) & 1) as u8).collect();
            let reconstructed = factor(&r_vals)? / z.clone();
            let truth = table.mass[mask].clone() / base_mass.clone();
            report.cells_checked += 1;
            if reconstructed != truth {
                report.exact = false;
                let pins: Vec<Option<u8>> = r_vals.iter().map(|&v| Some(v)).collect();
                report.mismatches.push(describe(&pins));
            }
        }
    }
    Ok(report)
}

/// Single-indicator sanity form: the factorization degenerates to the bare
/// conditional with normalizer 1.
pub fn single_indicator_form(g: &crate::graph::MDag) -> Option<ProbTerm> {
    let inds = g.indicators();
    if inds.len() != 1 {
        return None;
    }
    Some(ProbTerm {
        outcomes: vec![VarRef::free(g.name(inds[0]))],
        given: substantive_refs(g),
    })
}
