//! Property tests: the d-separation soundness oracle on small random m-DAGs,
//! graph relation duality, observed-law coarsening invariants, context
//! verdicts, and expression round trips.

use mdag_core::*;
use num::rational::BigRational;
use num::Zero;
use proptest::prelude::*;
use std::collections::{BTreeMap, BTreeSet};

/// Random m-DAG on at most five vertices: one fully observed, two partially
/// observed (with their indicators), edges drawn forward along a fixed order
/// with indicator-to-substantive edges excluded.
fn small_mdag(edge_bits: u16, n_part: usize, with_obs: bool) -> MDag {
    let observed: Vec<&str> = if with_obs { vec!["O1"] } else { vec![] };
    let partial: Vec<&str> = ["A", "B"][..n_part].to_vec();
    // vertex order: O1, A, B, R_A, R_B — candidate edges are forward pairs
    let mut names: Vec<String> = observed.iter().map(|s| s.to_string()).collect();
    names.extend(partial.iter().map(|s| s.to_string()));
    names.extend(partial.iter().map(|s| format!("R_{s}")));
    let is_ind = |n: &str| n.starts_with("R_");
    let mut candidates = Vec::new();
    for i in 0..names.len() {
        for j in (i + 1)..names.len() {
            if is_ind(&names[i]) && !is_ind(&names[j]) {
                continue;
            }
            candidates.push((names[i].clone(), names[j].clone()));
        }
    }
    let chosen: Vec<(&str, &str)> = candidates
        .iter()
        .enumerate()
        .filter(|(i, _)| (edge_bits >> i) & 1 == 1)
        .map(|(_, (a, b))| (a.as_str(), b.as_str()))
        .collect();
    MDag::build(&observed, &partial, &chosen).expect("forward edges are acyclic")
}

fn exact_ci(
    law: &LawTable,
    g: &MDag,
    a: VarId,
    b: VarId,
    z: &BTreeSet<VarId>,
    cards: &[u8],
) -> bool {
    // p(a,b,z) * p(z) == p(a,z) * p(b,z) for all value combinations
    let vars: Vec<VarId> = [a, b].iter().copied().chain(z.iter().copied()).collect();
    let mut values = vec![0u8; g.len()];
    loop {
        let ev = |subset: &[VarId]| -> BigRational {
            let event: BTreeMap<VarId, u8> = subset.iter().map(|&v| (v, values[v])).collect();
            law.event_prob(&event)
        };
        let zs: Vec<VarId> = z.iter().copied().collect();
        let abz = ev(&vars);
        let pz = ev(&zs);
        let az: Vec<VarId> = std::iter::once(a).chain(z.iter().copied()).collect();
        let bz: Vec<VarId> = std::iter::once(b).chain(z.iter().copied()).collect();
        if abz * pz != ev(&az) * ev(&bz) {
            return false;
        }
        // advance
        let mut done = true;
        for &v in vars.iter().rev() {
            if values[v] + 1 < cards[v] {
                values[v] += 1;
                done = false;
                break;
            }
            values[v] = 0;
        }
        if done {
            return true;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// d-separation implies exact conditional independence in every random
    /// positive model without monotone pairs.
    #[test]
    fn dsep_implies_exact_ci(edge_bits in any::<u16>(), seed in any::<u64>(), with_obs in any::<bool>()) {
        let g = small_mdag(edge_bits, 2, with_obs);
        prop_assume!(validate_mdag(&g).is_valid());
        let mono = MonotoneSpec::empty();
        let m = random_model(&g, &mono, seed, &BTreeMap::new()).unwrap();
        let law = m.full_law();
        let ids: Vec<VarId> = g.vertex_ids().collect();
        for &a in &ids {
            for &b in &ids {
                if a >= b {
                    continue;
                }
                let rest: Vec<VarId> = ids.iter().copied().filter(|&v| v != a && v != b).collect();
                for mask in 0..(1usize << rest.len()) {
                    let z: BTreeSet<VarId> = rest
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| (mask >> i) & 1 == 1)
                        .map(|(_, &v)| v)
                        .collect();
                    let asets: BTreeSet<VarId> = [a].into();
                    let bsets: BTreeSet<VarId> = [b].into();
                    if d_separated(&g, &asets, &bsets, &z).unwrap() {
                        prop_assert!(
                            exact_ci(&law, &g, a, b, &z, m.cards()),
                            "d-sep {} _||_ {} | {:?} but CI fails",
                            g.name(a), g.name(b),
                            z.iter().map(|&v| g.name(v)).collect::<Vec<_>>()
                        );
                    }
                }
            }
        }
    }

    /// Ancestor/descendant duality on random graphs.
    #[test]
    fn ancestor_descendant_duality(edge_bits in any::<u16>()) {
        let g = small_mdag(edge_bits, 2, true);
        for u in g.vertex_ids() {
            for v in g.vertex_ids() {
                prop_assert_eq!(g.ancestors(v).contains(&u), g.descendants(u).contains(&v));
            }
        }
    }

    /// Observed-law coarsening preserves total mass and the indicator
    /// marginals of the full law.
    #[test]
    fn observed_law_preserves_mass(edge_bits in any::<u16>(), seed in any::<u64>(), mono_on in any::<bool>()) {
        let g = small_mdag(edge_bits, 2, false);
        prop_assume!(validate_mdag(&g).is_valid());
        let ra = g.id("R_A").unwrap();
        let rb = g.id("R_B").unwrap();
        let mono = if mono_on && g.has_edge(ra, rb) {
            MonotoneSpec::new(&g, &[("R_A", "R_B")]).unwrap()
        } else {
            MonotoneSpec::empty()
        };
        let m = random_model(&g, &mono, seed, &BTreeMap::new()).unwrap();
        let o = observed_law(&m);
        prop_assert!(num::One::is_one(&o.total()));
        let law = m.full_law();
        // indicator-pattern marginals agree between laws
        for rav in 0..2u8 {
            for rbv in 0..2u8 {
                let full = law.event_prob(&[(ra, rav), (rb, rbv)].into_iter().collect());
                let oa = o.var_index("R_A").unwrap();
                let ob = o.var_index("R_B").unwrap();
                let obs = o.event_prob(&[(oa, rav), (ob, rbv)].into_iter().collect());
                prop_assert_eq!(full, obs);
            }
        }
    }

    /// A context whose event is forced to probability zero never yields
    /// `Holds`, and `Holds` contexts have positive probability in every
    /// random model respecting the monotone pairs.
    #[test]
    fn holds_contexts_have_positive_mass(edge_bits in any::<u16>(), seed in any::<u64>(), ctx_bits in any::<u8>()) {
        let g = small_mdag(edge_bits, 2, false);
        prop_assume!(validate_mdag(&g).is_valid());
        let ra = g.id("R_A").unwrap();
        let rb = g.id("R_B").unwrap();
        prop_assume!(g.has_edge(ra, rb));
        let mono = MonotoneSpec::new(&g, &[("R_A", "R_B")]).unwrap();
        // random context over the two indicators
        let mut assigns = Vec::new();
        if ctx_bits & 1 != 0 {
            assigns.push(("R_A", (ctx_bits >> 1) & 1));
        }
        if ctx_bits & 4 != 0 {
            assigns.push(("R_B", (ctx_bits >> 3) & 1));
        }
        let ctx = Context::new(&g, &assigns).unwrap();
        let a: BTreeSet<VarId> = [g.id("A").unwrap()].into();
        let b: BTreeSet<VarId> = [g.id("B").unwrap()].into();
        let z: BTreeSet<VarId> = BTreeSet::new();
        let verdict = ci_under_context(&g, &mono, &a, &b, &z, &ctx).unwrap();
        let m = random_model(&g, &mono, seed, &BTreeMap::new()).unwrap();
        let event: BTreeMap<VarId, u8> =
            assigns.iter().map(|(n, v)| (g.id(n).unwrap(), *v)).collect();
        let mass = m.full_law().event_prob(&event);
        if verdict.kind == CiVerdictKind::UndefinedContext {
            prop_assert!(mass.is_zero());
        }
        if verdict.holds() {
            prop_assert!(!mass.is_zero());
        }
    }
}

// ---------------------------------------------------------------------------
// expression round trips

fn arb_varref() -> impl Strategy<Value = VarRef> {
    (
        prop_oneof!["X", "Y", "R_X", "R_Y", "W"],
        proptest::option::of(0u8..3),
    )
        .prop_map(|(var, value): (String, Option<u8>)| VarRef { var, value })
}

fn arb_expr() -> impl Strategy<Value = ProbExpr> {
    let term = (
        proptest::collection::vec(arb_varref(), 1..3),
        proptest::collection::vec(arb_varref(), 0..3),
    )
        .prop_map(|(outcomes, given)| ProbExpr::Term(ProbTerm { outcomes, given }));
    let constant = (0i64..6, 1i64..6).prop_map(|(n, d)| ProbExpr::constant(ratio(n, d)));
    let leaf = prop_oneof![term, constant];
    leaf.prop_recursive(3, 24, 4, |inner| {
        prop_oneof![
            proptest::collection::vec(inner.clone(), 2..4).prop_map(ProbExpr::product),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| ProbExpr::quotient(a, b)),
            (
                proptest::collection::vec(prop_oneof!["X", "Y", "W"], 1..3),
                inner.clone()
            )
                .prop_map(|(over, body)| {
                    let mut names: Vec<String> = over.iter().map(|s| s.to_string()).collect();
                    names.dedup();
                    ProbExpr::sum(names, body)
                }),
            (
                proptest::collection::vec((prop_oneof!["R_X", "R_Y"], 0u8..2), 1..3),
                inner.clone()
            )
                .prop_map(|(assign, body)| {
                    let mut pins: Vec<(String, u8)> =
                        assign.iter().map(|(v, x)| (v.to_string(), *x)).collect();
                    pins.dedup_by(|a, b| a.0 == b.0);
                    ProbExpr::restrict(pins, body)
                }),
            (
                proptest::collection::vec((prop_oneof!["R_X", "R_Y"], 0u8..2), 1..2),
                inner.clone(),
                inner
            )
                .prop_map(|(pat, a, b)| {
                    let pattern: Vec<(String, u8)> =
                        pat.iter().map(|(v, x)| (v.to_string(), *x)).collect();
                    ProbExpr::Cases {
                        arms: vec![expr_arm(pattern, a), expr_arm(Vec::new(), b)],
                    }
                }),
        ]
    })
}

fn expr_arm(pattern: Vec<(String, u8)>, body: ProbExpr) -> mdag_core::expr::CaseArm {
    mdag_core::expr::CaseArm { pattern, body }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    /// Text rendering parses back to the identical tree.
    #[test]
    fn expr_text_round_trip(e in arb_expr()) {
        let text = e.to_string();
        let back = parse_expr(&text).unwrap_or_else(|err| panic!("{text}: {err}"));
        prop_assert_eq!(&e, &back, "{}", text);
    }

    /// The JSON tree form round-trips exactly.
    #[test]
    fn expr_json_round_trip(e in arb_expr()) {
        let json = serde_json::to_string(&e).unwrap();
        let back: ProbExpr = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(e, back);
    }
}

/// Spec statements not tied to random inputs.
#[test]
fn example_figure_validity() {
    for (name, g, _) in figures::all() {
        assert!(validate_mdag(&g).is_valid(), "{name}");
    }
}
