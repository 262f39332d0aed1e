//! Detection of the graph structures that drive identifiability: colluders,
//! maximal colluders, self-censoring edges, and monotone self-censoring paths.

use crate::graph::{GraphError, MDag, MonotoneSpec, VarId, VertexKind};
use serde::Serialize;

/// A partially observed variable and its indicator both parenting another
/// variable's response indicator.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Colluder {
    pub collider_var: String,
    pub collider_ind: String,
    pub target: String,
}

/// The inclusion-maximal set of colluding variables at one target indicator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MaximalColluder {
    pub c_set: Vec<String>,
    pub target: String,
}

impl MaximalColluder {
    pub fn is_empty(&self) -> bool {
        self.c_set.is_empty()
    }
}

/// A directed edge from a partially observed variable into an indicator chain
/// that ends at the variable's own response indicator, every chain edge
/// carrying a monotone annotation. `indicator_chain.len() == 1` degenerates to
/// a plain self-censoring edge.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SelfCensoringPath {
    pub variable: String,
    pub indicator_chain: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SelfCensoringEdge {
    pub variable: String,
    pub indicator: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SelfCensoring {
    pub edges: Vec<SelfCensoringEdge>,
    pub paths: Vec<SelfCensoringPath>,
}

/// Exhaustive, deduplicated colluder list, ordered by (target, variable).
pub fn find_colluders(g: &MDag) -> Vec<Colluder> {
    let mut out = Vec::new();
    for r_y in g.indicators() {
        for v in g.partials() {
            let r_v = match g.indicator_of(v) {
                Some(r) => r,
                None => continue,
            };
            if r_v != r_y && g.has_edge(v, r_y) && g.has_edge(r_v, r_y) {
                out.push(Colluder {
                    collider_var: g.name(v).to_string(),
                    collider_ind: g.name(r_v).to_string(),
                    target: g.name(r_y).to_string(),
                });
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

/// The unique maximal colluder at `r_y` (possibly with an empty variable set).
pub fn find_maximal_colluder(g: &MDag, r_y: &str) -> Result<MaximalColluder, GraphError> {
    let target = g.id(r_y)?;
    if g.kind(target) != VertexKind::Indicator {
        return Err(GraphError::ContextNotIndicator(r_y.to_string()));
    }
    let mut c_set: Vec<String> = find_colluders(g)
        .into_iter()
        .filter(|c| c.target == r_y)
        .map(|c| c.collider_var)
        .collect();
    c_set.sort();
    Ok(MaximalColluder {
        c_set,
        target: r_y.to_string(),
    })
}

/// Self-censoring edges (unconditional) and monotone self-censoring paths.
/// Path enumeration walks simple chains through the monotone pair relation,
/// so it is exhaustive for chains up to the number of indicators.
pub fn find_self_censoring(g: &MDag, mono: &MonotoneSpec) -> SelfCensoring {
    let mut edges = Vec::new();
    let mut paths = Vec::new();
    for v in g.partials() {
        let own = match g.indicator_of(v) {
            Some(r) => r,
            None => continue,
        };
        if g.has_edge(v, own) {
            edges.push(SelfCensoringEdge {
                variable: g.name(v).to_string(),
                indicator: g.name(own).to_string(),
            });
            paths.push(SelfCensoringPath {
                variable: g.name(v).to_string(),
                indicator_chain: vec![g.name(own).to_string()],
            });
        }
        // chains of length >= 2: v -> r_1, then monotone pairs r_{j-1} >= r_j
        // down to the variable's own indicator
        for r1 in g.children(v).iter().copied() {
            if g.kind(r1) != VertexKind::Indicator || r1 == own {
                continue;
            }
            let mut chain = vec![r1];
            walk_chains(mono, own, &mut chain, &mut |chain| {
                paths.push(SelfCensoringPath {
                    variable: g.name(v).to_string(),
                    indicator_chain: chain.iter().map(|&r| g.name(r).to_string()).collect(),
                });
            });
        }
    }
    paths.sort_by(|a, b| (&a.variable, &a.indicator_chain).cmp(&(&b.variable, &b.indicator_chain)));
    paths.dedup();
    SelfCensoring { edges, paths }
}

fn walk_chains(
    mono: &MonotoneSpec,
    goal: VarId,
    chain: &mut Vec<VarId>,
    emit: &mut impl FnMut(&[VarId]),
) {
    let last = *chain.last().expect("nonempty chain");
    for (a, b) in mono.pairs() {
        if a != last || chain.contains(&b) {
            continue;
        }
        chain.push(b);
        if b == goal {
            emit(chain);
        } else {
            walk_chains(mono, goal, chain, emit);
        }
        chain.pop();
    }
}
