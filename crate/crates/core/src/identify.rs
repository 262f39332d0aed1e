//! The identification engine.
//!
//! Full-law identification works indicator by indicator on the missingness
//! mechanism `p(R | O, X^(1)) = ∏ p(R_k | pa(R_k))`:
//!
//! * a colluded indicator with a fully monotone maximal colluder gets its
//!   monotonicity-violating slices for free (rule `T1`: the conditional is a
//!   point mass there) and its colluders-observed slice from the first
//!   applicable of rules `T2`..`T5`, tried in that order;
//! * a non-colluded indicator is handled by a best-effort fallback that
//!   conditions on the indicators of its partially observed parents, guarded
//!   slice by slice by [`ci_under_context`];
//! * if the per-indicator route cannot cover every consistent slice, a
//!   sequential fallback factorizes the substantive joint along a reverse
//!   topological chain, switching indicators to 1 where a certified
//!   conditional independence allows it.
//!
//! Every emitted functional is a function of the observed data law only, and
//! every conditional-independence obligation it relies on is recorded in the
//! provenance. When neither a known blocking structure nor a complete
//! derivation exists the engine answers `Unknown`, never `NotIdentifiable`.

use crate::expr::{CaseArm, ProbExpr, VarRef};
use crate::graph::{
    ci_under_context, validate_mdag, CiVerdict, CiVerdictKind, Context, GraphError, MDag,
    MonotoneSpec, ValidationReport, VarId, VertexKind,
};
use crate::structure::{find_maximal_colluder, find_self_censoring, MaximalColluder};
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("graph is not a valid m-DAG: {0:?}")]
    InvalidGraph(ValidationReport),
    #[error("rule not applicable to `{target}`: {why}")]
    NotApplicable { target: String, why: String },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Identification rule identifiers, as reported in provenance. `T1` covers
/// the monotonicity-violating slices of a colluded indicator; `T2`..`T5` are
/// the colluders-observed rules in trial order; `Fallback` covers everything
/// the best-effort machinery produces (direct reads, indicator fallbacks,
/// chain factors, target-law factors).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RuleId {
    T1,
    T2,
    T3,
    T4,
    T5,
    Fallback,
}

#[derive(Debug, Clone, Serialize)]
pub struct CiObligation {
    pub a: Vec<String>,
    pub b: Vec<String>,
    pub z: Vec<String>,
    pub ctx: Vec<(String, u8)>,
    pub verdict: CiVerdictKind,
    pub reason: String,
}

/// One applied rule: which theorem-shaped step was used for which target,
/// the sets it instantiated, the independence obligations it rests on, and
/// the emitted functional.
#[derive(Debug, Clone, Serialize)]
pub struct TheoremApplication {
    pub rule: RuleId,
    pub target: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub z_set: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub r_prime: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub w_set: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub d_set: Vec<String>,
    pub ci_obligations: Vec<CiObligation>,
    /// Indicator-slice patterns this functional covers (empty pattern = all).
    pub covers: Vec<Vec<(String, u8)>>,
    #[serde(serialize_with = "crate::identify::serialize_expr")]
    pub functional: ProbExpr,
}

pub(crate) fn serialize_expr<S: serde::Serializer>(e: &ProbExpr, s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeStruct;
    let mut st = s.serialize_struct("Functional", 2)?;
    st.serialize_field("text", &e.to_string())?;
    st.serialize_field("tree", e)?;
    st.end()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IdentifyStatus {
    Identified,
    NotIdentifiable,
    Unknown,
}

/// Refusals are witnessed: a `NotIdentifiable` always carries the concrete
/// structure that blocks identification.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum RefusalReason {
    SelfCensoringEdge {
        variable: String,
        indicator: String,
    },
    SelfCensoringPath {
        variable: String,
        indicator_chain: Vec<String>,
    },
    NoApplicableTheorem {
        detail: String,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentifyResult {
    pub status: IdentifyStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<RefusalReason>,
    #[serde(skip_serializing_if = "Option::is_none")]
    #[serde(serialize_with = "crate::identify::serialize_expr_opt")]
    pub functional: Option<ProbExpr>,
    pub provenance: Vec<TheoremApplication>,
}

pub(crate) fn serialize_expr_opt<S: serde::Serializer>(
    e: &Option<ProbExpr>,
    s: S,
) -> Result<S::Ok, S::Error> {
    match e {
        Some(e) => serialize_expr(e, s),
        None => s.serialize_none(),
    }
}

impl IdentifyResult {
    pub fn identified(functional: ProbExpr, provenance: Vec<TheoremApplication>) -> Self {
        IdentifyResult {
            status: IdentifyStatus::Identified,
            reason: None,
            functional: Some(functional),
            provenance,
        }
    }

    pub fn not_identifiable(reason: RefusalReason) -> Self {
        IdentifyResult {
            status: IdentifyStatus::NotIdentifiable,
            reason: Some(reason),
            functional: None,
            provenance: Vec::new(),
        }
    }

    pub fn unknown(detail: impl Into<String>) -> Self {
        IdentifyResult {
            status: IdentifyStatus::Unknown,
            reason: Some(RefusalReason::NoApplicableTheorem {
                detail: detail.into(),
            }),
            functional: None,
            provenance: Vec::new(),
        }
    }

    pub fn is_identified(&self) -> bool {
        self.status == IdentifyStatus::Identified
    }
}

// ---------------------------------------------------------------------------
// shared helpers

struct Ctx<'a> {
    g: &'a MDag,
    mono: &'a MonotoneSpec,
}

impl<'a> Ctx<'a> {
    fn names(&self, ids: &[VarId]) -> Vec<String> {
        ids.iter().map(|&v| self.g.name(v).to_string()).collect()
    }

    fn monotone_maximal_colluder(&self, r_y: VarId) -> Option<(MaximalColluder, Vec<VarId>)> {
        let mc = find_maximal_colluder(self.g, self.g.name(r_y)).ok()?;
        if mc.is_empty() {
            return None;
        }
        let c_inds: Vec<VarId> = mc
            .c_set
            .iter()
            .map(|v| self.g.indicator_of(self.g.id(v).ok()?))
            .collect::<Option<Vec<_>>>()?;
        if c_inds.iter().all(|&rc| self.mono.contains(rc, r_y)) {
            Some((mc, c_inds))
        } else {
            None
        }
    }

    fn obligation(
        &self,
        a: &BTreeSet<VarId>,
        b: &BTreeSet<VarId>,
        z: &BTreeSet<VarId>,
        ctx: &Context,
    ) -> Result<(CiVerdict, CiObligation), EngineError> {
        let verdict = ci_under_context(self.g, self.mono, a, b, z, ctx)?;
        let to_names =
            |s: &BTreeSet<VarId>| s.iter().map(|&v| self.g.name(v).to_string()).collect();
        let record = CiObligation {
            a: to_names(a),
            b: to_names(b),
            z: to_names(z),
            ctx: ctx
                .assignments()
                .iter()
                .map(|(&v, &val)| (self.g.name(v).to_string(), val))
                .collect(),
            verdict: verdict.kind,
            reason: verdict.reason.clone(),
        };
        Ok((verdict, record))
    }

    /// All assignments of `vars` that can be extended without violating a
    /// monotone pair.
    fn consistent_slices(&self, vars: &[VarId]) -> Vec<BTreeMap<VarId, u8>> {
        let mut out = Vec::new();
        let n = vars.len();
        for mask in 0..(1usize << n) {
            let assign: BTreeMap<VarId, u8> = vars
                .iter()
                .enumerate()
                .map(|(i, &v)| (v, ((mask >> i) & 1) as u8))
                .collect();
            if self.mono.consistent(&assign) {
                out.push(assign);
            }
        }
        out
    }

    fn pattern(&self, assign: &BTreeMap<VarId, u8>) -> Vec<(String, u8)> {
        assign
            .iter()
            .map(|(&v, &val)| (self.g.name(v).to_string(), val))
            .collect()
    }
}

/// Conditioning references for `pa(r_y)` with the colluder indicators pinned
/// to 1 and everything else free.
fn pa_refs_pinned(g: &MDag, pa: &[VarId], pinned_one: &BTreeSet<VarId>) -> Vec<VarRef> {
    pa.iter()
        .map(|&v| {
            if pinned_one.contains(&v) {
                VarRef::fixed(g.name(v), 1)
            } else {
                VarRef::free(g.name(v))
            }
        })
        .collect()
}

// ---------------------------------------------------------------------------
// rule T1: monotonicity-violating slices of a colluded indicator

/// The conditional distribution of a colluded indicator on the slices where
/// some colluder indicator is 0: a point mass on 0. Returned as case arms
/// (one per colluder indicator) over a nested case split on the target value.
pub fn identify_violation_part(
    g: &MDag,
    mono: &MonotoneSpec,
    r_y: &str,
) -> Result<TheoremApplication, EngineError> {
    let ctx = Ctx { g, mono };
    let target = g.id(r_y)?;
    let (_mc, c_inds) =
        ctx.monotone_maximal_colluder(target)
            .ok_or_else(|| EngineError::NotApplicable {
                target: r_y.to_string(),
                why: "no maximal colluder with fully monotone pairs at this indicator".into(),
            })?;
    let point_mass = ProbExpr::Cases {
        arms: vec![
            CaseArm {
                pattern: vec![(r_y.to_string(), 1)],
                body: ProbExpr::zero(),
            },
            CaseArm {
                pattern: vec![(r_y.to_string(), 0)],
                body: ProbExpr::one(),
            },
        ],
    };
    let covers: Vec<Vec<(String, u8)>> = c_inds
        .iter()
        .map(|&rc| vec![(g.name(rc).to_string(), 0)])
        .collect();
    Ok(TheoremApplication {
        rule: RuleId::T1,
        target: r_y.to_string(),
        z_set: Vec::new(),
        r_prime: Vec::new(),
        w_set: Vec::new(),
        d_set: Vec::new(),
        ci_obligations: Vec::new(),
        covers,
        functional: point_mass,
    })
}

// ---------------------------------------------------------------------------
// rules T2..T5: the colluders-observed slice

/// Applies the first applicable of rules `T2`..`T5` to the colluded indicator
/// `r_y`, producing the identified conditional on the slice where the
/// colluder indicators are 1. Candidate helper sets for `T4`/`T5` are
/// searched smallest-first with lexicographic tie-break.
pub fn identify_colluded_at_one(
    g: &MDag,
    mono: &MonotoneSpec,
    r_y: &str,
) -> Result<TheoremApplication, EngineError> {
    let ctx = Ctx { g, mono };
    let target = g.id(r_y)?;
    let (_mc, c_inds) =
        ctx.monotone_maximal_colluder(target)
            .ok_or_else(|| EngineError::NotApplicable {
                target: r_y.to_string(),
                why: "no maximal colluder with fully monotone pairs at this indicator".into(),
            })?;
    let pa: Vec<VarId> = g.parents(target).to_vec();
    let pa_set: BTreeSet<VarId> = pa.iter().copied().collect();
    let c_ind_set: BTreeSet<VarId> = c_inds.iter().copied().collect();
    // Z: partially observed parents whose indicators are not parents of r_y
    let z_vars: Vec<VarId> = pa
        .iter()
        .copied()
        .filter(|&v| {
            g.kind(v) == VertexKind::Partial
                && g.indicator_of(v)
                    .map(|r| !pa_set.contains(&r))
                    .unwrap_or(false)
        })
        .collect();
    let r_z: Vec<VarId> = z_vars.iter().map(|&v| g.indicator_of(v).unwrap()).collect();
    let other_ind_parents: Vec<VarId> = pa
        .iter()
        .copied()
        .filter(|&v| g.kind(v) == VertexKind::Indicator && !c_ind_set.contains(&v))
        .collect();
    let base_ctx = Context::from_ids(c_inds.iter().map(|&r| (r, 1u8)));

    let mut failures: Vec<String> = Vec::new();

    // ---- T2: condition on the indicators of partial parents directly
    let r_prime: Vec<VarId> = {
        let mut out: Vec<VarId> = pa
            .iter()
            .copied()
            .filter(|&v| g.kind(v) == VertexKind::Partial)
            .filter_map(|v| g.indicator_of(v))
            .filter(|r| !pa_set.contains(r))
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    };
    {
        let a: BTreeSet<VarId> = [target].into();
        let b: BTreeSet<VarId> = r_prime.iter().copied().collect();
        let (verdict, record) = ctx.obligation(&a, &b, &pa_set, &base_ctx)?;
        if verdict.holds() {
            // p(R_Y | pa)|_{R_C=1} = p(R_Y | pa, R')|_{R_C=1, R'=1}
            let mut given = pa_refs_pinned(g, &pa, &c_ind_set);
            given.extend(r_prime.iter().map(|&r| VarRef::fixed(g.name(r), 1)));
            let functional = ProbExpr::term(vec![VarRef::free(r_y)], given);
            // T2 leaves non-colluder indicator parents free; cover every
            // consistent slice whose context stays usable
            let covers = t2_covers(&ctx, &c_inds, &other_ind_parents, &r_prime);
            return Ok(TheoremApplication {
                rule: RuleId::T2,
                target: r_y.to_string(),
                z_set: ctx.names(&z_vars),
                r_prime: ctx.names(&r_prime),
                w_set: Vec::new(),
                d_set: Vec::new(),
                ci_obligations: vec![record],
                covers,
                functional,
            });
        }
        failures.push(format!("T2: {}", record.reason));
    }

    // Z is required by T3..T5
    if z_vars.is_empty() {
        return Err(EngineError::NotApplicable {
            target: r_y.to_string(),
            why: format!("no rule applies ({})", failures.join("; ")),
        });
    }
    let z_set: BTreeSet<VarId> = z_vars.iter().copied().collect();
    let cond_base: BTreeSet<VarId> = [target]
        .iter()
        .chain(pa_set.difference(&z_set))
        .copied()
        .collect();

    // ---- T3: flip to the conditional of Z given R_Y and the other parents
    {
        let a = z_set.clone();
        let b: BTreeSet<VarId> = r_z.iter().copied().collect();
        let (verdict, record) = ctx.obligation(&a, &b, &cond_base, &base_ctx)?;
        if verdict.holds() {
            let functional = quotient_functional(g, &pa, &z_vars, &r_z, &c_ind_set, &[], &[], r_y);
            return Ok(TheoremApplication {
                rule: RuleId::T3,
                target: r_y.to_string(),
                z_set: ctx.names(&z_vars),
                r_prime: Vec::new(),
                w_set: Vec::new(),
                d_set: Vec::new(),
                ci_obligations: vec![record],
                covers: vec![all_ones_pattern(g, &pa)],
                functional,
            });
        }
        failures.push(format!("T3: {}", record.reason));
    }

    // ---- T4: bring in fully observed helpers W
    let o_cands: Vec<VarId> = g
        .vertex_ids()
        .filter(|&v| g.kind(v) == VertexKind::Observed && !pa_set.contains(&v))
        .collect();
    for w in subsets_smallest_first(g, &o_cands) {
        if w.is_empty() {
            continue; // identical to T3
        }
        let a = z_set.clone();
        let b: BTreeSet<VarId> = r_z.iter().copied().collect();
        let cond: BTreeSet<VarId> = cond_base
            .union(&w.iter().copied().collect())
            .copied()
            .collect();
        let (verdict, record) = ctx.obligation(&a, &b, &cond, &base_ctx)?;
        if verdict.holds() {
            let functional = quotient_functional(g, &pa, &z_vars, &r_z, &c_ind_set, &w, &[], r_y);
            return Ok(TheoremApplication {
                rule: RuleId::T4,
                target: r_y.to_string(),
                z_set: ctx.names(&z_vars),
                r_prime: Vec::new(),
                w_set: ctx.names(&w),
                d_set: Vec::new(),
                ci_obligations: vec![record],
                covers: vec![all_ones_pattern(g, &pa)],
                functional,
            });
        }
    }
    failures.push("T4: no fully observed helper set satisfies the independence".into());

    // ---- T5: partially observed helpers W^(1), with a second obligation
    let x_cands: Vec<VarId> = g
        .vertex_ids()
        .filter(|&v| {
            g.kind(v) == VertexKind::Partial && !pa_set.contains(&v) && !z_set.contains(&v)
        })
        .collect();
    for w in subsets_smallest_first(g, &x_cands) {
        if w.is_empty() {
            continue;
        }
        let r_w: Vec<VarId> = w.iter().map(|&v| g.indicator_of(v).unwrap()).collect();
        let r_w_out: Vec<VarId> = r_w
            .iter()
            .copied()
            .filter(|r| !pa_set.contains(r))
            .collect();
        let a = z_set.clone();
        let b: BTreeSet<VarId> = r_z.iter().chain(r_w_out.iter()).copied().collect();
        let cond: BTreeSet<VarId> = cond_base
            .union(&w.iter().copied().collect())
            .copied()
            .collect();
        let (v1, rec1) = ctx.obligation(&a, &b, &cond, &base_ctx)?;
        if !v1.holds() {
            continue;
        }
        let a2: BTreeSet<VarId> = w.iter().copied().collect();
        let b2: BTreeSet<VarId> = r_w_out.iter().copied().collect();
        let (v2, rec2) = ctx.obligation(&a2, &b2, &cond_base, &base_ctx)?;
        if !v2.holds() {
            continue;
        }
        // proof-side augmented set: colluder variables plus helpers whose
        // indicators already parent r_y
        let d_set: Vec<VarId> = w
            .iter()
            .copied()
            .filter(|&v| {
                g.indicator_of(v)
                    .map(|r| pa_set.contains(&r))
                    .unwrap_or(false)
            })
            .collect();
        let functional = quotient_functional(g, &pa, &z_vars, &r_z, &c_ind_set, &w, &r_w, r_y);
        return Ok(TheoremApplication {
            rule: RuleId::T5,
            target: r_y.to_string(),
            z_set: ctx.names(&z_vars),
            r_prime: Vec::new(),
            w_set: ctx.names(&w),
            d_set: ctx.names(&d_set),
            ci_obligations: vec![rec1, rec2],
            covers: vec![all_ones_pattern(g, &pa)],
            functional,
        });
    }
    failures.push("T5: no partially observed helper set satisfies the independences".into());

    Err(EngineError::NotApplicable {
        target: r_y.to_string(),
        why: format!("no rule applies ({})", failures.join("; ")),
    })
}

/// Slice patterns a T2 functional covers: colluder indicators at 1, each
/// consistent assignment of the remaining indicator parents whose combined
/// context (with the pins) stays monotone-consistent.
fn t2_covers(
    ctx: &Ctx<'_>,
    c_inds: &[VarId],
    other_ind_parents: &[VarId],
    r_prime: &[VarId],
) -> Vec<Vec<(String, u8)>> {
    let mut covers = Vec::new();
    for slice in ctx.consistent_slices(other_ind_parents) {
        let mut full: BTreeMap<VarId, u8> = slice.clone();
        for &rc in c_inds {
            full.insert(rc, 1);
        }
        for &rp in r_prime {
            full.insert(rp, 1);
        }
        if ctx.mono.consistent(&full) {
            let mut pattern: BTreeMap<VarId, u8> = slice;
            for &rc in c_inds {
                pattern.insert(rc, 1);
            }
            covers.push(ctx.pattern(&pattern));
        }
    }
    covers
}

fn all_ones_pattern(g: &MDag, pa: &[VarId]) -> Vec<(String, u8)> {
    pa.iter()
        .filter(|&&v| g.kind(v) == VertexKind::Indicator)
        .map(|&v| (g.name(v).to_string(), 1))
        .collect()
}

/// Subset enumeration, smallest first, lexicographic by name within a size.
fn subsets_smallest_first(g: &MDag, cands: &[VarId]) -> Vec<Vec<VarId>> {
    let mut sorted: Vec<VarId> = cands.to_vec();
    sorted.sort_by(|&a, &b| g.name(a).cmp(g.name(b)));
    let n = sorted.len();
    let mut out: Vec<Vec<VarId>> = vec![Vec::new()];
    for size in 1..=n {
        let mut stack: Vec<(usize, Vec<VarId>)> = vec![(0, Vec::new())];
        let mut level: Vec<Vec<VarId>> = Vec::new();
        while let Some((start, cur)) = stack.pop() {
            if cur.len() == size {
                level.push(cur);
                continue;
            }
            // push in reverse so lexicographically smaller pops first
            for i in (start..n).rev() {
                let mut next = cur.clone();
                next.push(sorted[i]);
                stack.push((i + 1, next));
            }
        }
        level.sort_by(|a, b| {
            let an: Vec<&str> = a.iter().map(|&v| g.name(v)).collect();
            let bn: Vec<&str> = b.iter().map(|&v| g.name(v)).collect();
            an.cmp(&bn)
        });
        out.extend(level);
    }
    out
}

/// The shared quotient shape of rules T3..T5:
/// `Σ_W Q / Σ_{W, R_Y} Q` with
/// `Q = p(Z | W, R_Z=1, R_W=1, R_Y, pa \ (Z ∪ R_W)) * [p(W | ..) *] p(R_Y, pa \ Z)`.
/// With no helpers (`T3`) the sums disappear; when every helper indicator is
/// already a parent of `r_y` the helper factor merges into the joint term.
#[allow(clippy::too_many_arguments)]
fn quotient_functional(
    g: &MDag,
    pa: &[VarId],
    z_vars: &[VarId],
    r_z: &[VarId],
    c_ind_set: &BTreeSet<VarId>,
    w: &[VarId],
    r_w: &[VarId],
    r_y: &str,
) -> ProbExpr {
    let pa_set: BTreeSet<VarId> = pa.iter().copied().collect();
    let z_set: BTreeSet<VarId> = z_vars.iter().copied().collect();
    let r_w_set: BTreeSet<VarId> = r_w.iter().copied().collect();
    let merged = !r_w.is_empty() && r_w.iter().all(|r| pa_set.contains(r));

    // pa \ (Z ∪ R_W), with colluder indicators pinned to 1
    let rest: Vec<VarId> = pa
        .iter()
        .copied()
        .filter(|v| !z_set.contains(v) && !r_w_set.contains(v))
        .collect();
    let rest_refs = |g: &MDag| -> Vec<VarRef> {
        rest.iter()
            .map(|&v| {
                if c_ind_set.contains(&v) {
                    VarRef::fixed(g.name(v), 1)
                } else {
                    VarRef::free(g.name(v))
                }
            })
            .collect()
    };

    // factor 1: p(Z | W, R_Z=1, R_W=1, R_Y, rest)
    let mut f1_given: Vec<VarRef> = Vec::new();
    f1_given.extend(w.iter().map(|&v| VarRef::free(g.name(v))));
    f1_given.extend(r_z.iter().map(|&r| VarRef::fixed(g.name(r), 1)));
    f1_given.extend(r_w.iter().map(|&r| VarRef::fixed(g.name(r), 1)));
    f1_given.push(VarRef::free(r_y));
    f1_given.extend(rest_refs(g));
    let f1 = ProbExpr::term(
        z_vars.iter().map(|&v| VarRef::free(g.name(v))).collect(),
        f1_given,
    );

    let q = if w.is_empty() {
        // T3: p(Z | ..) * p(R_Y, pa \ Z)
        let joint = joint_term(g, r_y, &rest, c_ind_set, &[], &[]);
        ProbExpr::product(vec![f1, joint])
    } else if merged {
        // helper indicators all parent r_y: p(Z | ..) * p(R_Y, W, pa \ Z)
        let joint = joint_term(g, r_y, &rest, c_ind_set, w, r_w);
        ProbExpr::product(vec![f1, joint])
    } else if r_w.is_empty() {
        // T4: fully observed helpers: p(Z | ..) * p(W, R_Y, pa \ Z)
        let joint = joint_term(g, r_y, &rest, c_ind_set, w, &[]);
        ProbExpr::product(vec![f1, joint])
    } else {
        // T5 with outside helper indicators: three factors
        let mut f2_given: Vec<VarRef> = r_w.iter().map(|&r| VarRef::fixed(g.name(r), 1)).collect();
        f2_given.push(VarRef::free(r_y));
        f2_given.extend(rest_refs(g));
        let f2 = ProbExpr::term(
            w.iter().map(|&v| VarRef::free(g.name(v))).collect(),
            f2_given,
        );
        let joint = joint_term(g, r_y, &rest, c_ind_set, &[], &[]);
        ProbExpr::product(vec![f1, f2, joint])
    };

    let w_names: Vec<String> = w.iter().map(|&v| g.name(v).to_string()).collect();
    let num = if w_names.is_empty() {
        q.clone()
    } else {
        ProbExpr::sum(w_names.clone(), q.clone())
    };
    let mut den_over = w_names;
    den_over.push(r_y.to_string());
    let den = ProbExpr::sum(den_over, q);
    ProbExpr::quotient(num, den)
}

/// Joint term `p(R_Y, extra, pa \ Z)` with colluder indicators pinned to 1 and
/// helper variables made observable through their (pinned) indicators.
fn joint_term(
    g: &MDag,
    r_y: &str,
    rest: &[VarId],
    c_ind_set: &BTreeSet<VarId>,
    extra_vars: &[VarId],
    extra_inds: &[VarId],
) -> ProbExpr {
    let mut outcomes: Vec<VarRef> = vec![VarRef::free(r_y)];
    outcomes.extend(extra_vars.iter().map(|&v| VarRef::free(g.name(v))));
    outcomes.extend(extra_inds.iter().map(|&r| VarRef::fixed(g.name(r), 1)));
    outcomes.extend(rest.iter().map(|&v| {
        if c_ind_set.contains(&v) {
            VarRef::fixed(g.name(v), 1)
        } else {
            VarRef::free(g.name(v))
        }
    }));
    ProbExpr::term(outcomes, Vec::new())
}

// ---------------------------------------------------------------------------
// fallback for non-colluded indicators

/// Best-effort identification of `p(R_k | pa(R_k))` for a non-colluded
/// indicator: reads it directly when no partially observed parent exists,
/// otherwise conditions on the parents' indicators at 1 provided the
/// independence obligation holds on every monotone-consistent slice of the
/// indicator parents.
pub fn identify_indicator_fallback(
    g: &MDag,
    mono: &MonotoneSpec,
    r_k: &str,
) -> Result<TheoremApplication, EngineError> {
    let ctx = Ctx { g, mono };
    let target = g.id(r_k)?;
    if g.kind(target) != VertexKind::Indicator {
        return Err(EngineError::NotApplicable {
            target: r_k.to_string(),
            why: "not a response indicator".into(),
        });
    }
    let mc = find_maximal_colluder(g, r_k)?;
    if !mc.is_empty() {
        return Err(EngineError::NotApplicable {
            target: r_k.to_string(),
            why: "indicator is colluded; the colluder rules apply instead".into(),
        });
    }
    if let Some(v) = g.variable_of(target) {
        if g.has_edge(v, target) {
            return Err(EngineError::NotApplicable {
                target: r_k.to_string(),
                why: format!("self-censoring edge {} -> {}", g.name(v), r_k),
            });
        }
    }
    let pa: Vec<VarId> = g.parents(target).to_vec();
    let pa_set: BTreeSet<VarId> = pa.iter().copied().collect();
    let partial_parents: Vec<VarId> = pa
        .iter()
        .copied()
        .filter(|&v| g.kind(v) == VertexKind::Partial)
        .collect();
    if partial_parents.is_empty() {
        // every conditioning variable is observed: read the conditional off
        // the observed law at any slice
        let functional = ProbExpr::term(
            vec![VarRef::free(r_k)],
            pa_refs_pinned(g, &pa, &BTreeSet::new()),
        );
        return Ok(TheoremApplication {
            rule: RuleId::Fallback,
            target: r_k.to_string(),
            z_set: Vec::new(),
            r_prime: Vec::new(),
            w_set: Vec::new(),
            d_set: Vec::new(),
            ci_obligations: Vec::new(),
            covers: vec![Vec::new()],
            functional,
        });
    }
    let r_p: Vec<VarId> = partial_parents
        .iter()
        .map(|&v| g.indicator_of(v).unwrap())
        .collect();
    let ind_parents: Vec<VarId> = pa
        .iter()
        .copied()
        .filter(|&v| g.kind(v) == VertexKind::Indicator)
        .collect();
    let a: BTreeSet<VarId> = [target].into();
    let b: BTreeSet<VarId> = r_p.iter().copied().collect();
    let mut obligations = Vec::new();
    for slice in ctx.consistent_slices(&ind_parents) {
        let mut ctx_assign = slice.clone();
        for &rp in &r_p {
            ctx_assign.insert(rp, 1);
        }
        let context = Context::from_ids(ctx_assign);
        let (verdict, record) = ctx.obligation(&a, &b, &pa_set, &context)?;
        let ok = verdict.holds();
        obligations.push(record);
        if !ok {
            return Err(EngineError::NotApplicable {
                target: r_k.to_string(),
                why: format!(
                    "conditioning on parents' indicators is not certified on slice {:?}: {}",
                    ctx.pattern(&slice),
                    verdict.reason
                ),
            });
        }
    }
    let mut given = pa_refs_pinned(g, &pa, &BTreeSet::new());
    given.extend(r_p.iter().map(|&r| VarRef::fixed(g.name(r), 1)));
    let functional = ProbExpr::term(vec![VarRef::free(r_k)], given);
    Ok(TheoremApplication {
        rule: RuleId::Fallback,
        target: r_k.to_string(),
        z_set: Vec::new(),
        r_prime: ctx.names(&r_p),
        w_set: Vec::new(),
        d_set: Vec::new(),
        ci_obligations: obligations,
        covers: vec![Vec::new()],
        functional,
    })
}

// ---------------------------------------------------------------------------
// full law

/// Decides identifiability of the full law and, if identified, assembles the
/// functional `p(O, X^(1), R=1) / p(R=1 | O, X^(1)) * p(R | O, X^(1))` with
/// every mechanism factor replaced by its identified expression.
pub fn identify_full_law(g: &MDag, mono: &MonotoneSpec) -> Result<IdentifyResult, EngineError> {
    let report = validate_mdag(g);
    if !report.is_valid() {
        return Err(EngineError::InvalidGraph(report));
    }
    let sc = find_self_censoring(g, mono);
    if let Some(e) = sc.edges.first() {
        return Ok(IdentifyResult::not_identifiable(
            RefusalReason::SelfCensoringEdge {
                variable: e.variable.clone(),
                indicator: e.indicator.clone(),
            },
        ));
    }
    if let Some(p) = sc.paths.first() {
        return Ok(IdentifyResult::not_identifiable(
            RefusalReason::SelfCensoringPath {
                variable: p.variable.clone(),
                indicator_chain: p.indicator_chain.clone(),
            },
        ));
    }
    match per_indicator_route(g, mono) {
        Ok((functional, provenance)) => Ok(IdentifyResult::identified(functional, provenance)),
        Err(first_failure) => match chain_route(g, mono) {
            Ok((functional, provenance)) => Ok(IdentifyResult::identified(functional, provenance)),
            Err(chain_failure) => Ok(IdentifyResult::unknown(format!(
                "{first_failure}; sequential fallback: {chain_failure}"
            ))),
        },
    }
}

struct MechFactor {
    indicator: VarId,
    expr: ProbExpr,
    apps: Vec<TheoremApplication>,
}

fn per_indicator_route(
    g: &MDag,
    mono: &MonotoneSpec,
) -> Result<(ProbExpr, Vec<TheoremApplication>), String> {
    let ctx = Ctx { g, mono };
    let mut factors: Vec<MechFactor> = Vec::new();
    let mut indicators = g.indicators();
    indicators.sort_by(|&a, &b| g.name(a).cmp(g.name(b)));
    for r in indicators {
        let name = g.name(r).to_string();
        let colluded = ctx.monotone_maximal_colluder(r);
        let pa_inds: Vec<VarId> = g
            .parents(r)
            .iter()
            .copied()
            .filter(|&v| g.kind(v) == VertexKind::Indicator)
            .collect();
        let needed = ctx.consistent_slices(&pa_inds);
        if colluded.is_some() {
            let t1 = identify_violation_part(g, mono, &name).map_err(|e| e.to_string())?;
            let at_one = identify_colluded_at_one(g, mono, &name).map_err(|e| e.to_string())?;
            // completeness: every consistent slice matches a T1 arm or an
            // at-one cover
            for slice in &needed {
                let pat = ctx.pattern(slice);
                let covered = t1.covers.iter().chain(at_one.covers.iter()).any(|cover| {
                    cover
                        .iter()
                        .all(|(v, val)| pat.iter().any(|(pv, pval)| pv == v && pval == val))
                });
                if !covered {
                    return Err(format!(
                        "mechanism factor for `{name}` not identified on slice {pat:?}"
                    ));
                }
            }
            let mut arms: Vec<CaseArm> = t1
                .covers
                .iter()
                .map(|pattern| CaseArm {
                    pattern: pattern.clone(),
                    body: t1.functional.clone(),
                })
                .collect();
            for pattern in &at_one.covers {
                arms.push(CaseArm {
                    pattern: pattern.clone(),
                    body: at_one.functional.clone(),
                });
            }
            factors.push(MechFactor {
                indicator: r,
                expr: ProbExpr::Cases { arms },
                apps: vec![t1, at_one],
            });
        } else {
            let app = identify_indicator_fallback(g, mono, &name).map_err(|e| e.to_string())?;
            factors.push(MechFactor {
                indicator: r,
                expr: app.functional.clone(),
                apps: vec![app],
            });
        }
    }
    Ok(assemble_full_law(g, mono, factors))
}

fn assemble_full_law(
    g: &MDag,
    mono: &MonotoneSpec,
    factors: Vec<MechFactor>,
) -> (ProbExpr, Vec<TheoremApplication>) {
    // numerator p(O, X^(1), R = 1)
    let mut outcomes: Vec<VarRef> = g
        .substantive()
        .into_iter()
        .map(|v| VarRef::free(g.name(v)))
        .collect();
    outcomes.extend(
        g.indicators()
            .into_iter()
            .map(|r| VarRef::fixed(g.name(r), 1)),
    );
    let numerator = ProbExpr::term(outcomes, Vec::new());
    // denominator p(R = 1 | O, X^(1)) = ∏ factors at the all-ones slice
    let den = ProbExpr::product(
        factors
            .iter()
            .map(|f| {
                let mut pins: Vec<(String, u8)> = vec![(g.name(f.indicator).to_string(), 1)];
                for &p in g.parents(f.indicator) {
                    if g.kind(p) == VertexKind::Indicator {
                        pins.push((g.name(p).to_string(), 1));
                    }
                }
                ProbExpr::restrict(pins, f.expr.clone())
            })
            .collect(),
    );
    let mut body_factors = vec![ProbExpr::quotient(numerator, den)];
    body_factors.extend(factors.iter().map(|f| f.expr.clone()));
    let body = ProbExpr::product(body_factors);
    // outer guard: monotonicity-violating indicator assignments are zero
    let mut arms: Vec<CaseArm> = mono
        .pairs()
        .map(|(u, v)| CaseArm {
            pattern: vec![(g.name(u).to_string(), 0), (g.name(v).to_string(), 1)],
            body: ProbExpr::zero(),
        })
        .collect();
    arms.push(CaseArm {
        pattern: Vec::new(),
        body,
    });
    let functional = if arms.len() == 1 {
        arms.pop().unwrap().body
    } else {
        ProbExpr::Cases { arms }
    };
    let provenance = factors.into_iter().flat_map(|f| f.apps).collect();
    (functional, provenance)
}

/// Sequential factorization of the substantive joint given all indicators,
/// walking variables in topological order, each conditioned on all later
/// variables and on the indicator vector with the indicators of the factor's
/// own partial variables switched to 1 under a certified independence.
fn chain_route(
    g: &MDag,
    mono: &MonotoneSpec,
) -> Result<(ProbExpr, Vec<TheoremApplication>), String> {
    let ctx = Ctx { g, mono };
    let topo = g.topo_order().map_err(|e| e.to_string())?;
    let vars: Vec<VarId> = topo
        .into_iter()
        .filter(|&v| g.kind(v) != VertexKind::Indicator)
        .collect();
    let all_inds: Vec<VarId> = g.indicators();
    let mut apps = Vec::new();
    let mut factors = Vec::new();
    for (i, &v) in vars.iter().enumerate() {
        let later = &vars[i + 1..];
        let b_inds: BTreeSet<VarId> = std::iter::once(v)
            .chain(later.iter().copied())
            .filter(|&u| g.kind(u) == VertexKind::Partial)
            .filter_map(|u| g.indicator_of(u))
            .collect();
        let rest_inds: Vec<VarId> = all_inds
            .iter()
            .copied()
            .filter(|r| !b_inds.contains(r))
            .collect();
        let a: BTreeSet<VarId> = [v].into();
        let z: BTreeSet<VarId> = later
            .iter()
            .copied()
            .chain(rest_inds.iter().copied())
            .collect();
        let context = Context::from_ids(b_inds.iter().map(|&r| (r, 1u8)));
        let (verdict, record) = ctx
            .obligation(&a, &b_inds, &z, &context)
            .map_err(|e| e.to_string())?;
        if !verdict.holds() {
            return Err(format!(
                "factor for `{}` given later variables is not certified: {}",
                g.name(v),
                verdict.reason
            ));
        }
        let mut given: Vec<VarRef> = later.iter().map(|&u| VarRef::free(g.name(u))).collect();
        given.extend(b_inds.iter().map(|&r| VarRef::fixed(g.name(r), 1)));
        given.extend(rest_inds.iter().map(|&r| VarRef::free(g.name(r))));
        let functional = ProbExpr::term(vec![VarRef::free(g.name(v))], given);
        factors.push(functional.clone());
        apps.push(TheoremApplication {
            rule: RuleId::Fallback,
            target: g.name(v).to_string(),
            z_set: Vec::new(),
            r_prime: ctx.names(&b_inds.iter().copied().collect::<Vec<_>>()),
            w_set: Vec::new(),
            d_set: Vec::new(),
            ci_obligations: vec![record],
            covers: vec![Vec::new()],
            functional,
        });
    }
    // times the always-observed indicator joint p(R)
    factors.push(ProbExpr::term(
        all_inds.iter().map(|&r| VarRef::free(g.name(r))).collect(),
        Vec::new(),
    ));
    Ok((ProbExpr::product(factors), apps))
}

// ---------------------------------------------------------------------------
// target law via the ancestral criterion

/// Target-law identification by the ancestral criterion: if no partially
/// observed variable is an ancestor of its own response indicator, the target
/// law is the product of the parent conditionals, each factor restricted to
/// the responding context that makes it observable. Inapplicability yields
/// `Unknown`, not a nonidentifiability claim.
///
/// The factor independences follow from d-separation and survive monotone
/// mechanisms because every restriction here pins indicators to 1 (an
/// assignment no monotone pair can force to zero), so the obligations are
/// checked by plain d-separation at a consistent context.
pub fn identify_target_law(g: &MDag, mono: &MonotoneSpec) -> Result<IdentifyResult, EngineError> {
    let report = validate_mdag(g);
    if !report.is_valid() {
        return Err(EngineError::InvalidGraph(report));
    }
    for v in g.partials() {
        let r = g.indicator_of(v).expect("validated pairing");
        if g.ancestors(r).contains(&v) {
            return Ok(IdentifyResult::unknown(format!(
                "`{}` is an ancestor of its own response indicator `{}`; the ancestral criterion does not apply",
                g.name(v),
                g.name(r)
            )));
        }
    }
    let ctx = Ctx { g, mono };
    let topo = g.topo_order().map_err(EngineError::Graph)?;
    let mut factors = Vec::new();
    let mut apps = Vec::new();
    for v in topo
        .into_iter()
        .filter(|&v| g.kind(v) != VertexKind::Indicator)
    {
        let pa: Vec<VarId> = g.parents(v).to_vec();
        let mut scope_inds: BTreeSet<VarId> = pa
            .iter()
            .copied()
            .filter(|&p| g.kind(p) == VertexKind::Partial)
            .filter_map(|p| g.indicator_of(p))
            .collect();
        if g.kind(v) == VertexKind::Partial {
            scope_inds.insert(g.indicator_of(v).expect("validated pairing"));
        }
        let a: BTreeSet<VarId> = [v].into();
        let z: BTreeSet<VarId> = pa.iter().copied().collect();
        let dsep = crate::graph::d_separated(g, &a, &scope_inds, &z).map_err(EngineError::Graph)?;
        let record = CiObligation {
            a: ctx.names(&[v]),
            b: ctx.names(&scope_inds.iter().copied().collect::<Vec<_>>()),
            z: ctx.names(&pa),
            ctx: scope_inds
                .iter()
                .map(|&r| (g.name(r).to_string(), 1))
                .collect(),
            verdict: if dsep {
                CiVerdictKind::Holds
            } else {
                CiVerdictKind::Unknown
            },
            reason: if dsep {
                "d-separated; restriction context pins indicators to 1, which no monotone pair zeroes".into()
            } else {
                "not d-separated".into()
            },
        };
        if !dsep {
            return Ok(IdentifyResult::unknown(format!(
                "factor for `{}` cannot be made observable: {} not independent of its scope indicators",
                g.name(v),
                g.name(v),
            )));
        }
        let mut given: Vec<VarRef> = pa.iter().map(|&p| VarRef::free(g.name(p))).collect();
        given.extend(scope_inds.iter().map(|&r| VarRef::fixed(g.name(r), 1)));
        let functional = ProbExpr::term(vec![VarRef::free(g.name(v))], given);
        factors.push(functional.clone());
        apps.push(TheoremApplication {
            rule: RuleId::Fallback,
            target: g.name(v).to_string(),
            z_set: Vec::new(),
            r_prime: Vec::new(),
            w_set: Vec::new(),
            d_set: Vec::new(),
            ci_obligations: vec![record],
            covers: vec![Vec::new()],
            functional,
        });
    }
    Ok(IdentifyResult::identified(ProbExpr::product(factors), apps))
}
