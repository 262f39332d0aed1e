//! Missing-data DAGs: vertex kinds, validity checking, graph relatives,
//! d-separation, and monotonicity-aware conditional-independence verdicts.
//!
//! An m-DAG partitions its vertices into fully observed variables, partially
//! observed variables, and binary response indicators. Each partially observed
//! variable is paired with exactly one response indicator. Observed proxies are
//! implicit: they are fully determined by the variable/indicator pair and play
//! no role in identifiability reasoning, so they are never stored.

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use thiserror::Error;

/// Dense vertex handle. Stable for the lifetime of the [`MDag`] that issued it.
pub type VarId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VertexKind {
    /// Fully observed variable (`O`).
    Observed,
    /// Partially observed variable (`X^(1)`).
    Partial,
    /// Response indicator (`R`), always binary.
    Indicator,
}

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("duplicate vertex `{0}`")]
    DuplicateVertex(String),
    #[error("self-loop on `{0}`")]
    SelfLoop(String),
    #[error("indicator pairing must map a partial variable to an indicator: `{0}` -> `{1}`")]
    BadPairing(String, String),
    #[error("sets passed to d-separation must be pairwise disjoint (vertex `{0}` repeats)")]
    OverlappingSets(String),
    #[error("context assigns `{0}`, which is not a response indicator")]
    ContextNotIndicator(String),
    #[error("context assigns `{0}` the value {1}; indicators are binary")]
    ContextBadValue(String, u8),
    #[error("monotone pair ({0}, {1}) has no corresponding edge in the graph")]
    MonoMissingEdge(String, String),
    #[error("monotone pair endpoint `{0}` is not a response indicator")]
    MonoNotIndicator(String),
    #[error("graph is not acyclic; topological order undefined")]
    Cyclic,
}

/// Vertex-partitioned DAG with indicator pairing. Construction is permissive:
/// structural violations are reported by [`validate_mdag`], not at build time,
/// so invalid graphs can be diagnosed rather than rejected opaquely.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MDag {
    names: Vec<String>,
    kinds: Vec<VertexKind>,
    index: HashMap<String, VarId>,
    parents: Vec<Vec<VarId>>,
    children: Vec<Vec<VarId>>,
    edges: BTreeSet<(VarId, VarId)>,
    indicator_of: BTreeMap<VarId, VarId>,
    variable_of: BTreeMap<VarId, VarId>,
}

impl MDag {
    /// Builds a graph from explicit parts. `pairs` maps each partial variable
    /// name to its response indicator name. Only name-level problems error
    /// here; m-DAG property violations are left to [`validate_mdag`].
    pub fn from_parts(
        vertices: &[(&str, VertexKind)],
        edges: &[(&str, &str)],
        pairs: &[(&str, &str)],
    ) -> Result<MDag, GraphError> {
        let mut g = MDag {
            names: Vec::new(),
            kinds: Vec::new(),
            index: HashMap::new(),
            parents: Vec::new(),
            children: Vec::new(),
            edges: BTreeSet::new(),
            indicator_of: BTreeMap::new(),
            variable_of: BTreeMap::new(),
        };
        for (name, kind) in vertices {
            if g.index.contains_key(*name) {
                return Err(GraphError::DuplicateVertex(name.to_string()));
            }
            let id = g.names.len();
            g.index.insert(name.to_string(), id);
            g.names.push(name.to_string());
            g.kinds.push(*kind);
            g.parents.push(Vec::new());
            g.children.push(Vec::new());
        }
        for (a, b) in edges {
            let (ia, ib) = (g.id(a)?, g.id(b)?);
            if ia == ib {
                return Err(GraphError::SelfLoop(a.to_string()));
            }
            if g.edges.insert((ia, ib)) {
                g.children[ia].push(ib);
                g.parents[ib].push(ia);
            }
        }
        for (v, r) in pairs {
            let (iv, ir) = (g.id(v)?, g.id(r)?);
            if g.kinds[iv] != VertexKind::Partial || g.kinds[ir] != VertexKind::Indicator {
                return Err(GraphError::BadPairing(v.to_string(), r.to_string()));
            }
            g.indicator_of.insert(iv, ir);
            g.variable_of.insert(ir, iv);
        }
        for list in g.parents.iter_mut().chain(g.children.iter_mut()) {
            list.sort_unstable();
        }
        Ok(g)
    }

    /// Convenience constructor: partial variables get an auto-paired indicator
    /// named `R_<var>`.
    pub fn build(
        observed: &[&str],
        partial: &[&str],
        edges: &[(&str, &str)],
    ) -> Result<MDag, GraphError> {
        let mut vertices: Vec<(String, VertexKind)> = Vec::new();
        for v in observed {
            vertices.push((v.to_string(), VertexKind::Observed));
        }
        let mut pairs: Vec<(String, String)> = Vec::new();
        for v in partial {
            vertices.push((v.to_string(), VertexKind::Partial));
            let r = format!("R_{v}");
            vertices.push((r.clone(), VertexKind::Indicator));
            pairs.push((v.to_string(), r));
        }
        let vref: Vec<(&str, VertexKind)> =
            vertices.iter().map(|(n, k)| (n.as_str(), *k)).collect();
        let pref: Vec<(&str, &str)> = pairs
            .iter()
            .map(|(a, b)| (a.as_str(), b.as_str()))
            .collect();
        MDag::from_parts(&vref, edges, &pref)
    }

    pub fn id(&self, name: &str) -> Result<VarId, GraphError> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| GraphError::UnknownVertex(name.to_string()))
    }

    pub fn name(&self, v: VarId) -> &str {
        &self.names[v]
    }

    pub fn kind(&self, v: VarId) -> VertexKind {
        self.kinds[v]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn vertex_ids(&self) -> impl Iterator<Item = VarId> {
        0..self.names.len()
    }

    pub fn edges(&self) -> impl Iterator<Item = (VarId, VarId)> + '_ {
        self.edges.iter().copied()
    }

    pub fn has_edge(&self, a: VarId, b: VarId) -> bool {
        self.edges.contains(&(a, b))
    }

    pub fn parents(&self, v: VarId) -> &[VarId] {
        &self.parents[v]
    }

    pub fn children(&self, v: VarId) -> &[VarId] {
        &self.children[v]
    }

    /// Indicator paired with a partial variable, if any.
    pub fn indicator_of(&self, v: VarId) -> Option<VarId> {
        self.indicator_of.get(&v).copied()
    }

    /// Partial variable paired with an indicator, if any.
    pub fn variable_of(&self, r: VarId) -> Option<VarId> {
        self.variable_of.get(&r).copied()
    }

    pub fn indicators(&self) -> Vec<VarId> {
        self.vertex_ids()
            .filter(|&v| self.kinds[v] == VertexKind::Indicator)
            .collect()
    }

    pub fn partials(&self) -> Vec<VarId> {
        self.vertex_ids()
            .filter(|&v| self.kinds[v] == VertexKind::Partial)
            .collect()
    }

    /// Non-indicator vertices (the target-law scope `O ∪ X^(1)`).
    pub fn substantive(&self) -> Vec<VarId> {
        self.vertex_ids()
            .filter(|&v| self.kinds[v] != VertexKind::Indicator)
            .collect()
    }

    /// Topological order, or an error on cyclic graphs. Deterministic:
    /// ties broken by vertex id.
    pub fn topo_order(&self) -> Result<Vec<VarId>, GraphError> {
        let mut indeg: Vec<usize> = self.parents.iter().map(|p| p.len()).collect();
        let mut ready: BTreeSet<VarId> = indeg
            .iter()
            .enumerate()
            .filter(|(_, &d)| d == 0)
            .map(|(v, _)| v)
            .collect();
        let mut order = Vec::with_capacity(self.len());
        while let Some(&v) = ready.iter().next() {
            ready.remove(&v);
            order.push(v);
            for &c in &self.children[v] {
                indeg[c] -= 1;
                if indeg[c] == 0 {
                    ready.insert(c);
                }
            }
        }
        if order.len() == self.len() {
            Ok(order)
        } else {
            Err(GraphError::Cyclic)
        }
    }

    fn closure(&self, v: VarId, step: impl Fn(&Self, VarId) -> Vec<VarId>) -> BTreeSet<VarId> {
        let mut out = BTreeSet::new();
        let mut stack = step(self, v);
        while let Some(u) = stack.pop() {
            if out.insert(u) {
                stack.extend(step(self, u));
            }
        }
        out
    }

    /// Ancestors of `v`, excluding `v` itself.
    pub fn ancestors(&self, v: VarId) -> BTreeSet<VarId> {
        self.closure(v, |g, u| g.parents[u].clone())
    }

    /// Descendants of `v`, excluding `v` itself.
    pub fn descendants(&self, v: VarId) -> BTreeSet<VarId> {
        self.closure(v, |g, u| g.children[u].clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelationKind {
    Parents,
    Children,
    Ancestors,
    Descendants,
}

/// Standard graph relatives of a named vertex. Ancestors and descendants
/// exclude the vertex itself.
pub fn relation_set(g: &MDag, v: &str, kind: RelationKind) -> Result<BTreeSet<String>, GraphError> {
    let id = g.id(v)?;
    let ids: BTreeSet<VarId> = match kind {
        RelationKind::Parents => g.parents(id).iter().copied().collect(),
        RelationKind::Children => g.children(id).iter().copied().collect(),
        RelationKind::Ancestors => g.ancestors(id),
        RelationKind::Descendants => g.descendants(id),
    };
    Ok(ids.into_iter().map(|i| g.name(i).to_string()).collect())
}

// ---------------------------------------------------------------------------
// validation

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    Cycle {
        vertices: Vec<String>,
    },
    PartialWithoutIndicator {
        variable: String,
    },
    IndicatorWithoutVariable {
        indicator: String,
    },
    /// A response indicator has a descendant among the substantive variables.
    IndicatorHasSubstantiveDescendant {
        indicator: String,
        descendant: String,
    },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::Cycle { vertices } => write!(f, "cycle through {}", vertices.join(" -> ")),
            Violation::PartialWithoutIndicator { variable } => {
                write!(f, "partially observed variable `{variable}` has no response indicator")
            }
            Violation::IndicatorWithoutVariable { indicator } => {
                write!(f, "response indicator `{indicator}` is not paired with a variable")
            }
            Violation::IndicatorHasSubstantiveDescendant { indicator, descendant } => write!(
                f,
                "indicator `{indicator}` has descendant `{descendant}` among observed/partial variables"
            ),
        }
    }
}

/// Violations are data, not failures: an empty report means the graph is a
/// valid m-DAG.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn validate_mdag(g: &MDag) -> ValidationReport {
    let mut violations = Vec::new();
    if g.topo_order().is_err() {
        // report one representative cycle
        if let Some(cycle) = find_cycle(g) {
            violations.push(Violation::Cycle {
                vertices: cycle.into_iter().map(|v| g.name(v).to_string()).collect(),
            });
        }
    }
    for v in g.vertex_ids() {
        match g.kind(v) {
            VertexKind::Partial => {
                if g.indicator_of(v).is_none() {
                    violations.push(Violation::PartialWithoutIndicator {
                        variable: g.name(v).to_string(),
                    });
                }
            }
            VertexKind::Indicator => {
                if g.variable_of(v).is_none() {
                    violations.push(Violation::IndicatorWithoutVariable {
                        indicator: g.name(v).to_string(),
                    });
                }
                for d in g.descendants(v) {
                    if g.kind(d) != VertexKind::Indicator {
                        violations.push(Violation::IndicatorHasSubstantiveDescendant {
                            indicator: g.name(v).to_string(),
                            descendant: g.name(d).to_string(),
                        });
                    }
                }
            }
            VertexKind::Observed => {}
        }
    }
    ValidationReport { violations }
}

fn find_cycle(g: &MDag) -> Option<Vec<VarId>> {
    // DFS with colors; returns the vertices on the first back-edge cycle.
    fn dfs(g: &MDag, v: VarId, color: &mut [u8], path: &mut Vec<VarId>) -> Option<Vec<VarId>> {
        color[v] = 1; // gray
        path.push(v);
        for &c in g.children(v) {
            if color[c] == 1 {
                let start = path.iter().position(|&x| x == c).unwrap_or(0);
                let mut cyc = path[start..].to_vec();
                cyc.push(c);
                return Some(cyc);
            }
            if color[c] == 0 {
                if let Some(cyc) = dfs(g, c, color, path) {
                    return Some(cyc);
                }
            }
        }
        color[v] = 2; // black
        path.pop();
        None
    }
    let mut color = vec![0u8; g.len()];
    let mut path = Vec::new();
    for v in g.vertex_ids() {
        if color[v] == 0 {
            if let Some(cyc) = dfs(g, v, &mut color, &mut path) {
                return Some(cyc);
            }
        }
    }
    None
}

// ---------------------------------------------------------------------------
// monotone specification

/// Ordered indicator pairs `(upstream, downstream)`: the missingness mechanism
/// is locally monotone with respect to each pair, so any indicator assignment
/// with `upstream = 0` and `downstream = 1` has probability zero. Each pair
/// requires the corresponding graph edge.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MonotoneSpec {
    pairs: BTreeSet<(VarId, VarId)>,
}

impl MonotoneSpec {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn new(g: &MDag, pairs: &[(&str, &str)]) -> Result<Self, GraphError> {
        let mut out = BTreeSet::new();
        for (a, b) in pairs {
            let (ia, ib) = (g.id(a)?, g.id(b)?);
            if g.kind(ia) != VertexKind::Indicator {
                return Err(GraphError::MonoNotIndicator(a.to_string()));
            }
            if g.kind(ib) != VertexKind::Indicator {
                return Err(GraphError::MonoNotIndicator(b.to_string()));
            }
            if !g.has_edge(ia, ib) {
                return Err(GraphError::MonoMissingEdge(a.to_string(), b.to_string()));
            }
            out.insert((ia, ib));
        }
        Ok(MonotoneSpec { pairs: out })
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (VarId, VarId)> + '_ {
        self.pairs.iter().copied()
    }

    pub fn contains(&self, up: VarId, down: VarId) -> bool {
        self.pairs.contains(&(up, down))
    }

    /// Direct monotone-upstream indicators of `v`.
    pub fn upstream_of(&self, v: VarId) -> Vec<VarId> {
        self.pairs
            .iter()
            .filter(|(_, b)| *b == v)
            .map(|(a, _)| *a)
            .collect()
    }

    /// All indicators that reach `v` through monotone pairs (transitive).
    pub fn upstream_closure(&self, v: VarId) -> BTreeSet<VarId> {
        let mut out = BTreeSet::new();
        let mut stack = self.upstream_of(v);
        while let Some(u) = stack.pop() {
            if out.insert(u) {
                stack.extend(self.upstream_of(u));
            }
        }
        out
    }

    /// Whether a partial indicator assignment can be extended to a full one
    /// without violating monotonicity. False exactly when some monotone chain
    /// leads from a 0-assigned indicator to a 1-assigned one.
    pub fn consistent(&self, assign: &BTreeMap<VarId, u8>) -> bool {
        let zeros: Vec<VarId> = assign
            .iter()
            .filter(|(_, &v)| v == 0)
            .map(|(&k, _)| k)
            .collect();
        let mut forced: BTreeSet<VarId> = zeros.iter().copied().collect();
        let mut stack = zeros;
        while let Some(u) = stack.pop() {
            for (a, b) in self.pairs.iter() {
                if *a == u && forced.insert(*b) {
                    stack.push(*b);
                }
            }
        }
        !forced.iter().any(|v| assign.get(v) == Some(&1))
    }

    /// Whether a full indicator assignment (lookup by id) violates some pair.
    pub fn violated_by(&self, value_of: impl Fn(VarId) -> u8) -> bool {
        self.pairs.iter().any(|&(a, b)| value_of(a) < value_of(b))
    }
}

// ---------------------------------------------------------------------------
// context and CI verdicts

/// Partial assignment of response indicators, pinning the value context under
/// which a conditional-independence statement is to be used.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Context {
    assignments: BTreeMap<VarId, u8>,
}

impl Context {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn new(g: &MDag, assigns: &[(&str, u8)]) -> Result<Self, GraphError> {
        let mut out = BTreeMap::new();
        for (name, val) in assigns {
            let id = g.id(name)?;
            if g.kind(id) != VertexKind::Indicator {
                return Err(GraphError::ContextNotIndicator(name.to_string()));
            }
            if *val > 1 {
                return Err(GraphError::ContextBadValue(name.to_string(), *val));
            }
            out.insert(id, *val);
        }
        Ok(Context { assignments: out })
    }

    pub fn from_ids(assigns: impl IntoIterator<Item = (VarId, u8)>) -> Self {
        Context {
            assignments: assigns.into_iter().collect(),
        }
    }

    pub fn get(&self, v: VarId) -> Option<u8> {
        self.assignments.get(&v).copied()
    }

    pub fn assignments(&self) -> &BTreeMap<VarId, u8> {
        &self.assignments
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CiVerdictKind {
    /// The independence is implied by d-separation and usable in this context.
    Holds,
    /// The conditioning event is forced to probability zero by monotonicity.
    UndefinedContext,
    /// Cannot be certified: either not d-separated, or monotone determinism
    /// touching the query is not neutralized by the context.
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CiVerdict {
    pub kind: CiVerdictKind,
    pub reason: String,
}

impl CiVerdict {
    fn new(kind: CiVerdictKind, reason: impl Into<String>) -> Self {
        CiVerdict {
            kind,
            reason: reason.into(),
        }
    }

    pub fn holds(&self) -> bool {
        self.kind == CiVerdictKind::Holds
    }
}

/// Plain d-separation of `a` and `b` given `z` (reachability formulation).
pub fn d_separated(
    g: &MDag,
    a: &BTreeSet<VarId>,
    b: &BTreeSet<VarId>,
    z: &BTreeSet<VarId>,
) -> Result<bool, GraphError> {
    for (s, t) in [(a, b), (a, z), (b, z)] {
        if let Some(v) = s.intersection(t).next() {
            return Err(GraphError::OverlappingSets(g.name(*v).to_string()));
        }
    }
    if a.is_empty() || b.is_empty() {
        return Ok(true);
    }
    // z together with its ancestors opens colliders
    let mut anz: BTreeSet<VarId> = z.clone();
    for &v in z {
        anz.extend(g.ancestors(v));
    }
    // states: (vertex, arrived-from-child?)
    let mut visited = vec![[false; 2]; g.len()];
    let mut queue: VecDeque<(VarId, bool)> = a.iter().map(|&v| (v, true)).collect();
    while let Some((v, from_child)) = queue.pop_front() {
        let dir = usize::from(from_child);
        if visited[v][dir] {
            continue;
        }
        visited[v][dir] = true;
        if b.contains(&v) {
            return Ok(false);
        }
        if from_child {
            if !z.contains(&v) {
                for &p in g.parents(v) {
                    queue.push_back((p, true));
                }
                for &c in g.children(v) {
                    queue.push_back((c, false));
                }
            }
        } else {
            if !z.contains(&v) {
                for &c in g.children(v) {
                    queue.push_back((c, false));
                }
            }
            if anz.contains(&v) {
                for &p in g.parents(v) {
                    queue.push_back((p, true));
                }
            }
        }
    }
    Ok(true)
}

/// Name-based convenience wrapper around [`d_separated`].
pub fn d_separated_named(g: &MDag, a: &[&str], b: &[&str], z: &[&str]) -> Result<bool, GraphError> {
    let resolve = |names: &[&str]| -> Result<BTreeSet<VarId>, GraphError> {
        names.iter().map(|n| g.id(n)).collect()
    };
    d_separated(g, &resolve(a)?, &resolve(b)?, &resolve(z)?)
}

/// Conditional-independence verdict under a monotone missingness mechanism and
/// a value context for response indicators.
///
/// `Holds` requires (i) d-separation, (ii) every monotone-upstream indicator
/// of a queried indicator fixed to 1 in the context (so the queried indicators
/// behave as genuine random variables), and (iii) a context event of nonzero
/// probability. Contexts whose event is forced to zero yield
/// `UndefinedContext`; anything else that cannot be certified yields the
/// conservative `Unknown`.
pub fn ci_under_context(
    g: &MDag,
    mono: &MonotoneSpec,
    a: &BTreeSet<VarId>,
    b: &BTreeSet<VarId>,
    z: &BTreeSet<VarId>,
    ctx: &Context,
) -> Result<CiVerdict, GraphError> {
    for (&v, &val) in ctx.assignments() {
        if g.kind(v) != VertexKind::Indicator {
            return Err(GraphError::ContextNotIndicator(g.name(v).to_string()));
        }
        if val > 1 {
            return Err(GraphError::ContextBadValue(g.name(v).to_string(), val));
        }
    }
    if !mono.consistent(ctx.assignments()) {
        return Ok(CiVerdict::new(
            CiVerdictKind::UndefinedContext,
            "context event has probability zero under the monotone mechanism",
        ));
    }
    if a.is_empty() || b.is_empty() {
        return Ok(CiVerdict::new(CiVerdictKind::Holds, "vacuous: empty side"));
    }
    if !d_separated(g, a, b, z)? {
        return Ok(CiVerdict::new(CiVerdictKind::Unknown, "not d-separated"));
    }
    let queried: Vec<VarId> = a
        .iter()
        .chain(b.iter())
        .chain(z.iter())
        .copied()
        .filter(|&v| g.kind(v) == VertexKind::Indicator)
        .collect();
    for &q in &queried {
        for u in mono.upstream_closure(q) {
            if ctx.get(u) != Some(1) {
                return Ok(CiVerdict::new(
                    CiVerdictKind::Unknown,
                    format!(
                        "monotone determinism may be active: `{}` is monotone-upstream of queried `{}` but not fixed to 1",
                        g.name(u),
                        g.name(q)
                    ),
                ));
            }
        }
    }
    Ok(CiVerdict::new(
        CiVerdictKind::Holds,
        "d-separated; monotone pairs neutralized by context",
    ))
}
