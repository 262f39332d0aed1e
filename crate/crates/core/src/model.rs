//! Exact-rational discrete models over m-DAGs: seeded random construction,
//! full-law enumeration, observed-law coarsening, and table queries.
//!
//! All probabilities are `BigRational`; there is no floating point anywhere on
//! an evaluation path. Monotone pairs force the corresponding indicator CPT
//! columns to a point mass on 0, so every full-law cell that violates a pair
//! is exactly zero.

use crate::graph::{MDag, MonotoneSpec, VarId, VertexKind};
use num::rational::BigRational;
use num::{BigInt, One, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("vertex `{0}` not found")]
    UnknownVertex(String),
    #[error("cardinality of `{0}` must be at least 2")]
    BadCardinality(String),
    #[error("response indicator `{0}` must be binary")]
    IndicatorNotBinary(String),
    #[error("CPT column for `{vertex}` does not sum to 1")]
    ColumnNotNormalized { vertex: String },
    #[error("conditioning event has probability zero: {0}")]
    NullConditioningEvent(String),
    #[error("graph must be acyclic to build a model")]
    CyclicGraph,
    #[error("malformed rational `{0}`")]
    BadRational(String),
}

pub fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn parse_rational(s: &str) -> Result<BigRational, ModelError> {
    let bad = || ModelError::BadRational(s.to_string());
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(BigRational::new(n, d))
        }
        None => {
            let n: BigInt = s.parse().map_err(|_| bad())?;
            Ok(BigRational::from_integer(n))
        }
    }
}

pub fn rational_string(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// One conditional probability table: `columns[col][value]` with `col` a
/// mixed-radix index over the parent assignment (first parent most
/// significant).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cpt {
    pub parents: Vec<VarId>,
    pub columns: Vec<Vec<BigRational>>,
}

/// A fully specified discrete model over an m-DAG, factorizing vertex by
/// vertex into `p(V | pa(V))`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteModel {
    pub graph: MDag,
    pub mono: MonotoneSpec,
    cards: Vec<u8>,
    cpts: Vec<Cpt>,
    topo: Vec<VarId>,
}

fn column_index(cards: &[u8], parents: &[VarId], values: impl Fn(VarId) -> u8) -> usize {
    let mut idx = 0usize;
    for &p in parents {
        idx = idx * cards[p] as usize + values(p) as usize;
    }
    idx
}

impl DiscreteModel {
    /// Assembles a model from explicit CPTs. Columns must sum to exactly 1.
    pub fn new(
        graph: MDag,
        mono: MonotoneSpec,
        cards: Vec<u8>,
        cpts: Vec<Cpt>,
    ) -> Result<Self, ModelError> {
        let topo = graph.topo_order().map_err(|_| ModelError::CyclicGraph)?;
        for v in graph.vertex_ids() {
            if cards[v] < 2 {
                return Err(ModelError::BadCardinality(graph.name(v).to_string()));
            }
            if graph.kind(v) == VertexKind::Indicator && cards[v] != 2 {
                return Err(ModelError::IndicatorNotBinary(graph.name(v).to_string()));
            }
            for col in &cpts[v].columns {
                let sum: BigRational = col.iter().sum();
                if !sum.is_one() || col.len() != cards[v] as usize {
                    return Err(ModelError::ColumnNotNormalized {
                        vertex: graph.name(v).to_string(),
                    });
                }
            }
        }
        Ok(DiscreteModel {
            graph,
            mono,
            cards,
            cpts,
            topo,
        })
    }

    pub fn card(&self, v: VarId) -> u8 {
        self.cards[v]
    }

    pub fn cards(&self) -> &[u8] {
        &self.cards
    }

    pub fn cpt(&self, v: VarId) -> &Cpt {
        &self.cpts[v]
    }

    /// Probability of a single full assignment (values indexed by `VarId`).
    pub fn cell(&self, values: &[u8]) -> BigRational {
        let mut p = BigRational::one();
        for &v in &self.topo {
            let cpt = &self.cpts[v];
            let col = column_index(&self.cards, &cpt.parents, |u| values[u]);
            p *= cpt.columns[col][values[v] as usize].clone();
        }
        p
    }

    /// Dense full-law table over all assignments.
    pub fn full_law(&self) -> LawTable {
        let vars: Vec<VarId> = self.graph.vertex_ids().collect();
        let mut table = LawTable::zeroed(vars.clone(), self.cards.clone());
        let mut values = vec![0u8; self.graph.len()];
        loop {
            let idx = table.index_of(&values);
            table.cells[idx] = self.cell(&values);
            if !next_assignment(&mut values, &self.cards, &vars) {
                break;
            }
        }
        table
    }
}

fn next_assignment(values: &mut [u8], cards: &[u8], vars: &[VarId]) -> bool {
    for &v in vars.iter().rev() {
        if values[v] + 1 < cards[v] {
            values[v] += 1;
            return true;
        }
        values[v] = 0;
    }
    false
}

/// Dense table of rationals over the listed variables (a joint law or a
/// marginal of one). Cells are indexed mixed-radix in `vars` order.
#[derive(Debug, Clone, PartialEq)]
pub struct LawTable {
    pub vars: Vec<VarId>,
    pub cards: Vec<u8>,
    pub cells: Vec<BigRational>,
}

impl LawTable {
    fn zeroed(vars: Vec<VarId>, cards: Vec<u8>) -> Self {
        let size = vars.iter().map(|&v| cards[v] as usize).product();
        LawTable {
            vars,
            cards,
            cells: vec![BigRational::zero(); size],
        }
    }

    pub fn index_of(&self, values: &[u8]) -> usize {
        let mut idx = 0usize;
        for &v in &self.vars {
            idx = idx * self.cards[v] as usize + values[v] as usize;
        }
        idx
    }

    pub fn get(&self, values: &[u8]) -> &BigRational {
        &self.cells[self.index_of(values)]
    }

    pub fn total(&self) -> BigRational {
        self.cells.iter().sum()
    }

    /// Iterate `(assignment-by-VarId, probability)` over all cells. The
    /// assignment vector is indexed by `VarId` (holes for absent vars).
    pub fn iter_assignments(&self) -> LawIter<'_> {
        let max_id = self.vars.iter().copied().max().map_or(0, |m| m + 1);
        LawIter {
            table: self,
            values: vec![0u8; max_id],
            pos: 0,
        }
    }

    /// Sum of cells matching a partial event (`VarId` -> value).
    pub fn event_prob(&self, event: &BTreeMap<VarId, u8>) -> BigRational {
        let mut sum = BigRational::zero();
        for (values, p) in self.iter_assignments() {
            if event.iter().all(|(&v, &val)| values[v] == val) {
                sum += p;
            }
        }
        sum
    }
}

pub struct LawIter<'a> {
    table: &'a LawTable,
    values: Vec<u8>,
    pos: usize,
}

impl<'a> Iterator for LawIter<'a> {
    type Item = (Vec<u8>, &'a BigRational);

    fn next(&mut self) -> Option<Self::Item> {
        if self.pos >= self.table.cells.len() {
            return None;
        }
        let item = (self.values.clone(), &self.table.cells[self.pos]);
        self.pos += 1;
        next_assignment(&mut self.values, &self.table.cards, &self.table.vars);
        Some(item)
    }
}

// ---------------------------------------------------------------------------
// random models

/// Seeded random model respecting the monotone zeros. Non-forced CPT entries
/// are rationals with small denominators, bounded away from 0 and 1 (floor
/// 1/64). Identical seeds produce identical models.
pub fn random_model(
    g: &MDag,
    mono: &MonotoneSpec,
    seed: u64,
    cardinalities: &BTreeMap<String, u8>,
) -> Result<DiscreteModel, ModelError> {
    let mut cards = vec![2u8; g.len()];
    for (name, &k) in cardinalities {
        let v = g
            .id(name)
            .map_err(|_| ModelError::UnknownVertex(name.clone()))?;
        if k < 2 {
            return Err(ModelError::BadCardinality(name.clone()));
        }
        cards[v] = k;
    }
    for r in g.indicators() {
        if cards[r] != 2 {
            return Err(ModelError::IndicatorNotBinary(g.name(r).to_string()));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cpts = Vec::with_capacity(g.len());
    for v in g.vertex_ids() {
        let parents: Vec<VarId> = g.parents(v).to_vec();
        let ncols: usize = parents.iter().map(|&p| cards[p] as usize).product();
        let k = cards[v] as usize;
        // numerator bound keeping every normalized entry >= 1/64
        let bound = (63 / (k as u64 - 1)).clamp(1, 16);
        let mono_up: Vec<VarId> = if g.kind(v) == VertexKind::Indicator {
            mono.upstream_of(v)
                .into_iter()
                .filter(|u| parents.contains(u))
                .collect()
        } else {
            Vec::new()
        };
        let mut columns = Vec::with_capacity(ncols);
        for col in 0..ncols {
            // decode parent values for this column
            let mut rem = col;
            let mut pvals: BTreeMap<VarId, u8> = BTreeMap::new();
            for &p in parents.iter().rev() {
                let c = cards[p] as usize;
                pvals.insert(p, (rem % c) as u8);
                rem /= c;
            }
            let forced_zero = mono_up.iter().any(|u| pvals[u] == 0);
            let column = if forced_zero {
                vec![BigRational::one(), BigRational::zero()]
            } else {
                let nums: Vec<u64> = (0..k).map(|_| rng.gen_range(1..=bound)).collect();
                let sum: u64 = nums.iter().sum();
                nums.into_iter()
                    .map(|n| ratio(n as i64, sum as i64))
                    .collect()
            };
            columns.push(column);
        }
        cpts.push(Cpt { parents, columns });
    }
    DiscreteModel::new(g.clone(), mono.clone(), cards, cpts)
}

// ---------------------------------------------------------------------------
// observed law

/// Value of an observed-law column. Proxies of partially observed variables
/// take `NA` exactly when their indicator is 0.
pub const NA: u8 = u8::MAX;

/// The observed data law: a table over fully observed variables, proxies
/// (with `NA`), and response indicators.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservedLaw {
    names: Vec<String>,
    kinds: Vec<VertexKind>,
    cards: Vec<u8>,
    indicator_of: Vec<Option<usize>>,
    index: BTreeMap<String, usize>,
    /// nonzero cells only, keyed by the assignment vector (NA for hidden)
    cells: BTreeMap<Vec<u8>, BigRational>,
}

impl ObservedLaw {
    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn kind(&self, i: usize) -> VertexKind {
        self.kinds[i]
    }

    pub fn card(&self, i: usize) -> u8 {
        self.cards[i]
    }

    pub fn indicator_of(&self, i: usize) -> Option<usize> {
        self.indicator_of[i]
    }

    pub fn cells(&self) -> impl Iterator<Item = (&Vec<u8>, &BigRational)> {
        self.cells.iter()
    }

    pub fn total(&self) -> BigRational {
        self.cells.values().sum()
    }

    /// Probability of a partial event over observed columns. Values use the
    /// proxy encoding (`NA` allowed).
    pub fn event_prob(&self, event: &BTreeMap<usize, u8>) -> BigRational {
        let mut sum = BigRational::zero();
        for (values, p) in &self.cells {
            if event.iter().all(|(&i, &val)| values[i] == val) {
                sum += p;
            }
        }
        sum
    }
}

/// Coarsens a model's full law per the missingness mechanism: each partially
/// observed value is replaced by `NA` wherever its indicator is 0, and the
/// collapsed cells are summed.
pub fn observed_law(m: &DiscreteModel) -> ObservedLaw {
    let g = &m.graph;
    let names: Vec<String> = g.vertex_ids().map(|v| g.name(v).to_string()).collect();
    let kinds: Vec<VertexKind> = g.vertex_ids().map(|v| g.kind(v)).collect();
    let cards = m.cards().to_vec();
    let indicator_of: Vec<Option<usize>> = g.vertex_ids().map(|v| g.indicator_of(v)).collect();
    let index: BTreeMap<String, usize> = names.iter().cloned().zip(0..).collect();
    let mut cells: BTreeMap<Vec<u8>, BigRational> = BTreeMap::new();
    for (values, p) in m.full_law().iter_assignments() {
        if p.is_zero() {
            continue;
        }
        let mut key = values.clone();
        for v in g.vertex_ids() {
            if let Some(r) = g.indicator_of(v) {
                if values[r] == 0 {
                    key[v] = NA;
                }
            }
        }
        *cells.entry(key).or_insert_with(BigRational::zero) += p;
    }
    ObservedLaw {
        names,
        kinds,
        cards,
        indicator_of,
        index,
        cells,
    }
}

// ---------------------------------------------------------------------------
// queries

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Query {
    /// Joint over all vertices.
    FullLaw,
    /// Joint over the substantive (non-indicator) vertices.
    TargetLaw,
    Marginal {
        vars: Vec<String>,
    },
    /// Table of `p(outcomes | given)` over all assignments of both sets;
    /// cells with a zero conditioning event are undefined.
    Conditional {
        outcomes: Vec<String>,
        given: Vec<String>,
    },
}

/// Result table of [`query_eval`]: assignments over `vars` (by name) mapped to
/// exact values; `None` marks conditionals on zero-probability events.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryTable {
    pub vars: Vec<String>,
    pub cards: Vec<u8>,
    pub rows: Vec<(Vec<u8>, Option<BigRational>)>,
}

/// Exact enumeration of a query against the model's full law.
pub fn query_eval(m: &DiscreteModel, query: &Query) -> Result<QueryTable, ModelError> {
    let g = &m.graph;
    let law = m.full_law();
    let resolve = |names: &[String]| -> Result<Vec<VarId>, ModelError> {
        names
            .iter()
            .map(|n| g.id(n).map_err(|_| ModelError::UnknownVertex(n.clone())))
            .collect()
    };
    let (outcome_ids, given_ids): (Vec<VarId>, Vec<VarId>) = match query {
        Query::FullLaw => (g.vertex_ids().collect(), vec![]),
        Query::TargetLaw => (g.substantive(), vec![]),
        Query::Marginal { vars } => (resolve(vars)?, vec![]),
        Query::Conditional { outcomes, given } => (resolve(outcomes)?, resolve(given)?),
    };
    let all: Vec<VarId> = outcome_ids
        .iter()
        .chain(given_ids.iter())
        .copied()
        .collect();
    let mut rows = Vec::new();
    let mut values: Vec<u8> = vec![0; g.len()];
    loop {
        let mut event: BTreeMap<VarId, u8> = BTreeMap::new();
        for &v in &all {
            event.insert(v, values[v]);
        }
        let joint = law.event_prob(&event);
        let cell = if given_ids.is_empty() {
            Some(joint)
        } else {
            let given_event: BTreeMap<VarId, u8> =
                given_ids.iter().map(|&v| (v, values[v])).collect();
            let den = law.event_prob(&given_event);
            if den.is_zero() {
                None
            } else {
                Some(joint / den)
            }
        };
        rows.push((all.iter().map(|&v| values[v]).collect(), cell));
        if !next_assignment(&mut values, m.cards(), &all) {
            break;
        }
    }
    Ok(QueryTable {
        vars: all.iter().map(|&v| g.name(v).to_string()).collect(),
        cards: all.iter().map(|&v| m.card(v)).collect(),
        rows,
    })
}

// ---------------------------------------------------------------------------
// JSON forms (bit-exact round trip)

#[derive(Debug, Serialize, Deserialize)]
pub struct ModelJson {
    pub vertices: Vec<VertexJson>,
    pub edges: Vec<(String, String)>,
    pub indicator_pairs: Vec<(String, String)>,
    pub mono: Vec<(String, String)>,
    pub cpts: Vec<CptJson>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct VertexJson {
    pub name: String,
    pub kind: VertexKind,
    pub card: u8,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CptJson {
    pub vertex: String,
    pub parents: Vec<String>,
    /// columns indexed mixed-radix over the parent assignment; entries are
    /// exact strings "num/den"
    pub columns: Vec<Vec<String>>,
}

impl DiscreteModel {
    pub fn to_json(&self) -> ModelJson {
        let g = &self.graph;
        ModelJson {
            vertices: g
                .vertex_ids()
                .map(|v| VertexJson {
                    name: g.name(v).to_string(),
                    kind: g.kind(v),
                    card: self.cards[v],
                })
                .collect(),
            edges: g
                .edges()
                .map(|(a, b)| (g.name(a).to_string(), g.name(b).to_string()))
                .collect(),
            indicator_pairs: g
                .partials()
                .into_iter()
                .filter_map(|v| {
                    g.indicator_of(v)
                        .map(|r| (g.name(v).to_string(), g.name(r).to_string()))
                })
                .collect(),
            mono: self
                .mono
                .pairs()
                .map(|(a, b)| (g.name(a).to_string(), g.name(b).to_string()))
                .collect(),
            cpts: g
                .vertex_ids()
                .map(|v| CptJson {
                    vertex: g.name(v).to_string(),
                    parents: self.cpts[v]
                        .parents
                        .iter()
                        .map(|&p| g.name(p).to_string())
                        .collect(),
                    columns: self.cpts[v]
                        .columns
                        .iter()
                        .map(|col| col.iter().map(rational_string).collect())
                        .collect(),
                })
                .collect(),
        }
    }

    pub fn from_json(json: &ModelJson) -> Result<Self, ModelError> {
        let vertices: Vec<(&str, VertexKind)> = json
            .vertices
            .iter()
            .map(|v| (v.name.as_str(), v.kind))
            .collect();
        let edges: Vec<(&str, &str)> = json
            .edges
            .iter()
            .map(|(a, b)| (a.as_str(), b.as_str()))
            .collect();
        let pairs: Vec<(&str, &str)> = json
            .indicator_pairs
            .iter()
            .map(|(a, b)| (a.as_str(), b.as_str()))
            .collect();
        let g = MDag::from_parts(&vertices, &edges, &pairs)
            .map_err(|e| ModelError::UnknownVertex(e.to_string()))?;
        let mono_pairs: Vec<(&str, &str)> = json
            .mono
            .iter()
            .map(|(a, b)| (a.as_str(), b.as_str()))
            .collect();
        let mono = MonotoneSpec::new(&g, &mono_pairs)
            .map_err(|e| ModelError::UnknownVertex(e.to_string()))?;
        let cards: Vec<u8> = json.vertices.iter().map(|v| v.card).collect();
        let mut cpts: Vec<Option<Cpt>> = vec![None; g.len()];
        for c in &json.cpts {
            let v = g
                .id(&c.vertex)
                .map_err(|_| ModelError::UnknownVertex(c.vertex.clone()))?;
            let parents: Result<Vec<VarId>, ModelError> = c
                .parents
                .iter()
                .map(|p| g.id(p).map_err(|_| ModelError::UnknownVertex(p.clone())))
                .collect();
            let columns: Result<Vec<Vec<BigRational>>, ModelError> = c
                .columns
                .iter()
                .map(|col| col.iter().map(|s| parse_rational(s)).collect())
                .collect();
            cpts[v] = Some(Cpt {
                parents: parents?,
                columns: columns?,
            });
        }
        let cpts: Vec<Cpt> = cpts
            .into_iter()
            .enumerate()
            .map(|(v, c)| c.ok_or_else(|| ModelError::UnknownVertex(g.name(v).to_string())))
            .collect::<Result<_, _>>()?;
        DiscreteModel::new(g, mono, cards, cpts)
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ObservedLawJson {
    pub order: Vec<String>,
    pub kinds: Vec<VertexKind>,
    pub cards: Vec<u8>,
    /// per column: the indicator column index of a partial variable
    pub indicator_of: Vec<Option<usize>>,
    /// values use "NA" for coarsened proxies, decimal digits otherwise
    pub cells: Vec<ObservedCellJson>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ObservedCellJson {
    pub values: Vec<String>,
    pub p: String,
}

impl ObservedLaw {
    pub fn to_json(&self) -> ObservedLawJson {
        ObservedLawJson {
            order: self.names.clone(),
            kinds: self.kinds.clone(),
            cards: self.cards.clone(),
            indicator_of: self.indicator_of.clone(),
            cells: self
                .cells
                .iter()
                .map(|(values, p)| ObservedCellJson {
                    values: values
                        .iter()
                        .map(|&v| {
                            if v == NA {
                                "NA".to_string()
                            } else {
                                v.to_string()
                            }
                        })
                        .collect(),
                    p: rational_string(p),
                })
                .collect(),
        }
    }

    pub fn from_json(json: &ObservedLawJson) -> Result<Self, ModelError> {
        let n = json.order.len();
        if json.kinds.len() != n || json.cards.len() != n || json.indicator_of.len() != n {
            return Err(ModelError::BadRational(
                "inconsistent observed-law header".into(),
            ));
        }
        let index: BTreeMap<String, usize> = json.order.iter().cloned().zip(0..).collect();
        let mut cells = BTreeMap::new();
        for cell in &json.cells {
            if cell.values.len() != n {
                return Err(ModelError::BadRational("cell arity mismatch".into()));
            }
            let values: Result<Vec<u8>, ModelError> = cell
                .values
                .iter()
                .map(|s| {
                    if s == "NA" {
                        Ok(NA)
                    } else {
                        s.parse::<u8>()
                            .map_err(|_| ModelError::BadRational(s.clone()))
                    }
                })
                .collect();
            cells.insert(values?, parse_rational(&cell.p)?);
        }
        Ok(ObservedLaw {
            names: json.order.clone(),
            kinds: json.kinds.clone(),
            cards: json.cards.clone(),
            indicator_of: json.indicator_of.clone(),
            index,
            cells,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::figures;
    use num::traits::ToPrimitive;

    fn no_cards() -> BTreeMap<String, u8> {
        BTreeMap::new()
    }

    #[test]
    fn full_law_sums_to_one() {
        for (name, g, mono) in figures::all() {
            let m = random_model(&g, &mono, 7, &no_cards()).unwrap();
            assert!(m.full_law().total().is_one(), "{name}");
        }
    }

    #[test]
    fn mono_cells_are_zero_and_rest_positive() {
        let (g, mono) = figures::fig1();
        let m = random_model(&g, &mono, 3, &no_cards()).unwrap();
        let rx = g.id("R_X").unwrap();
        let ry = g.id("R_Y").unwrap();
        let floor = ratio(1, 64);
        for (values, p) in m.full_law().iter_assignments() {
            if values[rx] < values[ry] {
                assert!(p.is_zero());
            } else {
                assert!(*p > BigRational::zero());
            }
        }
        // CPT floor on non-forced cells
        for v in g.vertex_ids() {
            for col in &m.cpt(v).columns {
                for cell in col {
                    assert!(cell.is_zero() || cell.is_one() || *cell >= floor);
                }
            }
        }
    }

    #[test]
    fn identical_seeds_identical_models() {
        let (g, mono) = figures::fig3c();
        let a = random_model(&g, &mono, 42, &no_cards()).unwrap();
        let b = random_model(&g, &mono, 42, &no_cards()).unwrap();
        assert_eq!(a, b);
        let c = random_model(&g, &mono, 43, &no_cards()).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn observed_law_mass_and_na_pattern() {
        let (g, mono) = figures::fig2a();
        let m = random_model(&g, &mono, 11, &no_cards()).unwrap();
        let o = observed_law(&m);
        assert!(o.total().is_one());
        let ix = o.var_index("X").unwrap();
        let irx = o.var_index("R_X").unwrap();
        for (values, _) in o.cells() {
            assert_eq!(values[ix] == NA, values[irx] == 0);
        }
    }

    #[test]
    fn observed_equals_full_when_all_observed() {
        // indicators forced to 1 by explicit CPTs
        let (g, _) = figures::fig1();
        let mono = MonotoneSpec::empty();
        let mut m = random_model(&g, &mono, 5, &no_cards()).unwrap();
        for r in g.indicators() {
            for col in &mut m.cpts[r].columns {
                *col = vec![BigRational::zero(), BigRational::one()];
            }
        }
        let o = observed_law(&m);
        for (values, p) in m.full_law().iter_assignments() {
            if p.is_zero() {
                continue;
            }
            let mut ev = BTreeMap::new();
            for v in g.vertex_ids() {
                ev.insert(v, values[v]);
            }
            assert_eq!(o.event_prob(&ev), *p);
        }
    }

    #[test]
    fn target_law_sums_to_one() {
        let (g, mono) = figures::fig3b();
        let m = random_model(&g, &mono, 23, &no_cards()).unwrap();
        let t = query_eval(&m, &Query::TargetLaw).unwrap();
        let sum: BigRational = t.rows.iter().filter_map(|(_, c)| c.clone()).sum();
        assert!(sum.is_one());
    }

    #[test]
    fn conditional_on_null_event_is_none() {
        let (g, mono) = figures::fig1();
        let m = random_model(&g, &mono, 2, &no_cards()).unwrap();
        let q = Query::Conditional {
            outcomes: vec!["Y".into()],
            given: vec!["R_X".into(), "R_Y".into()],
        };
        let t = query_eval(&m, &q).unwrap();
        let rx_pos = t.vars.iter().position(|v| v == "R_X").unwrap();
        let ry_pos = t.vars.iter().position(|v| v == "R_Y").unwrap();
        for (values, cell) in &t.rows {
            if values[rx_pos] == 0 && values[ry_pos] == 1 {
                assert!(cell.is_none());
            } else {
                assert!(cell.is_some());
            }
        }
    }

    #[test]
    fn model_json_round_trip() {
        let (g, mono) = figures::fig3d();
        let m = random_model(&g, &mono, 9, &no_cards()).unwrap();
        let json = serde_json::to_string(&m.to_json()).unwrap();
        let parsed: ModelJson = serde_json::from_str(&json).unwrap();
        let back = DiscreteModel::from_json(&parsed).unwrap();
        assert_eq!(m, back);
        // bit-exact: serializing again yields the same bytes
        assert_eq!(json, serde_json::to_string(&back.to_json()).unwrap());
    }

    #[test]
    fn observed_law_json_round_trip() {
        let (g, mono) = figures::fig2a();
        let m = random_model(&g, &mono, 21, &no_cards()).unwrap();
        let o = observed_law(&m);
        let json = serde_json::to_string(&o.to_json()).unwrap();
        let parsed: ObservedLawJson = serde_json::from_str(&json).unwrap();
        let back = ObservedLaw::from_json(&parsed).unwrap();
        assert_eq!(o, back);
        assert_eq!(json, serde_json::to_string(&back.to_json()).unwrap());
    }

    #[test]
    fn cardinalities_respected() {
        let (g, mono) = figures::fig1();
        let cards: BTreeMap<String, u8> = [("X".to_string(), 3u8)].into_iter().collect();
        let m = random_model(&g, &mono, 1, &cards).unwrap();
        assert_eq!(m.card(g.id("X").unwrap()), 3);
        assert!(m.full_law().total().is_one());
        let q = query_eval(
            &m,
            &Query::Marginal {
                vars: vec!["X".into()],
            },
        )
        .unwrap();
        assert_eq!(q.rows.len(), 3);
        let s: f64 = q
            .rows
            .iter()
            .map(|(_, c)| c.as_ref().unwrap().to_f64().unwrap())
            .sum();
        assert!((s - 1.0).abs() < 1e-12);
    }
}
