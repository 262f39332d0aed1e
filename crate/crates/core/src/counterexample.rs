//! Counterexample constructions: pairs of models that agree exactly on the
//! observed data law yet disagree on the full law, witnessing
//! nonidentifiability.
//!
//! * [`chain_pair`] builds the two-model construction along a monotone
//!   self-censoring chain of length `k`, parametrized by `gamma`.
//! * [`bivariate_pair`] solves the bivariate chain model from given observed
//!   probabilities, one model per admissible marginal parameter `a`.

use crate::figures;
use crate::graph::{MDag, MonotoneSpec, VarId, VertexKind};
use crate::model::{observed_law, ratio, Cpt, DiscreteModel, ModelError};
use crate::structure::find_self_censoring;
use num::rational::BigRational;
use num::{One, Zero};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CexError {
    #[error("gamma must lie strictly between 0 and 1 and differ from 1/2")]
    BadGamma,
    #[error("graph carries no monotone self-censoring path of length {0}")]
    MissingPath(usize),
    #[error("infeasible a = {a}: {why}")]
    InfeasibleA { a: String, why: String },
    #[error("observed probabilities must be positive and sum to 1")]
    BadObserved,
    #[error("graph is not the bivariate chain shape")]
    NotBivariateShape,
    #[error("construction failed its built-in checks: {0}")]
    ConstructionInvalid(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

// ---------------------------------------------------------------------------
// chain construction

/// The two-model construction along a self-censoring chain, together with the
/// derived quantities used to check it.
#[derive(Debug)]
pub struct ChainPair {
    pub variable: String,
    pub indicator_chain: Vec<String>,
    pub gamma: BigRational,
    pub models: (DiscreteModel, DiscreteModel),
    /// Chain-weighted factor sums per model and per value of the chain
    /// variable: weighting each chain assignment by `2^c` with `c` the number
    /// of ones among the first `k-1` indicators collapses them to
    /// `gamma^2 + k*gamma*(1-gamma)` and `(1-gamma)^2 + k*gamma*(1-gamma)`.
    pub weighted_sums: [[BigRational; 2]; 2],
}

/// Builds the pair on a graph containing a monotone self-censoring path of
/// length `k`. Off-path vertices get uniform, effect-free tables (shared by
/// both models); on-path tables follow the swap construction controlled by
/// `gamma`. Both returned models respect every monotone pair exactly, agree
/// cell-by-cell on the observed law, and disagree on the marginal law of the
/// chain variable.
pub fn chain_pair(
    g: &MDag,
    mono: &MonotoneSpec,
    k: usize,
    gamma: &BigRational,
) -> Result<ChainPair, CexError> {
    if gamma <= &BigRational::zero() || gamma >= &BigRational::one() || *gamma == ratio(1, 2) {
        return Err(CexError::BadGamma);
    }
    let sc = find_self_censoring(g, mono);
    let path = sc
        .paths
        .iter()
        .find(|p| p.indicator_chain.len() == k)
        .ok_or(CexError::MissingPath(k))?;
    let variable = g.id(&path.variable).expect("detected path");
    let chain: Vec<VarId> = path
        .indicator_chain
        .iter()
        .map(|r| g.id(r).expect("detected path"))
        .collect();

    let build = |swapped: bool| -> Result<DiscreteModel, CexError> {
        let cards = vec![2u8; g.len()];
        let mut cpts = Vec::with_capacity(g.len());
        let g0 = if swapped {
            BigRational::one() - gamma
        } else {
            gamma.clone()
        };
        for v in g.vertex_ids() {
            let parents: Vec<VarId> = g.parents(v).to_vec();
            let ncols: usize = parents.iter().map(|_| 2usize).product();
            let mut columns = Vec::with_capacity(ncols);
            for col in 0..ncols {
                let mut rem = col;
                let mut pvals: BTreeMap<VarId, u8> = BTreeMap::new();
                for &p in parents.iter().rev() {
                    pvals.insert(p, (rem % 2) as u8);
                    rem /= 2;
                }
                let p_zero: BigRational = if v == variable {
                    // chain variable: constant regardless of parents
                    g0.clone()
                } else if v == chain[0] {
                    // head indicator: depends only on the chain variable
                    if pvals[&variable] == 0 {
                        g0.clone()
                    } else {
                        BigRational::one() - g0.clone()
                    }
                } else if let Some(j) = chain.iter().position(|&r| r == v) {
                    // interior chain indicator: absorbing at 0, else fair coin
                    if pvals[&chain[j - 1]] == 0 {
                        BigRational::one()
                    } else {
                        ratio(1, 2)
                    }
                } else if g.kind(v) == VertexKind::Indicator
                    && mono.upstream_of(v).iter().any(|u| pvals.get(u) == Some(&0))
                {
                    // off-path indicator forced by its own monotone parents
                    BigRational::one()
                } else {
                    // off-path: uniform, no effects
                    ratio(1, 2)
                };
                columns.push(vec![p_zero.clone(), BigRational::one() - p_zero]);
            }
            cpts.push(Cpt { parents, columns });
        }
        Ok(DiscreteModel::new(g.clone(), mono.clone(), cards, cpts)?)
    };

    let m1 = build(false)?;
    let m2 = build(true)?;

    // built-in checks: monotone zeros, observed equality, marginal difference
    for (label, m) in [("first", &m1), ("second", &m2)] {
        for (values, p) in m.full_law().iter_assignments() {
            if m.mono.violated_by(|v| values[v]) && !p.is_zero() {
                return Err(CexError::ConstructionInvalid(format!(
                    "{label} model puts mass on a monotonicity-violating assignment"
                )));
            }
        }
    }
    let o1 = observed_law(&m1);
    let o2 = observed_law(&m2);
    if o1 != o2 {
        return Err(CexError::ConstructionInvalid("observed laws differ".into()));
    }
    let marg = |m: &DiscreteModel, val: u8| -> BigRational {
        m.full_law()
            .event_prob(&[(variable, val)].into_iter().collect())
    };
    if marg(&m1, 0) == marg(&m2, 0) {
        return Err(CexError::ConstructionInvalid(
            "models agree on the chain-variable marginal".into(),
        ));
    }

    let weighted_sums = [
        weighted_sums(&m1, variable, &chain),
        weighted_sums(&m2, variable, &chain),
    ];
    Ok(ChainPair {
        variable: path.variable.clone(),
        indicator_chain: path.indicator_chain.clone(),
        gamma: gamma.clone(),
        models: (m1, m2),
        weighted_sums,
    })
}

/// Sum over chain assignments of the on-path factor product, weighted by
/// `2^c` where `c` counts ones among the first `k-1` chain indicators.
fn weighted_sums(m: &DiscreteModel, variable: VarId, chain: &[VarId]) -> [BigRational; 2] {
    let k = chain.len();
    let g = &m.graph;
    let mut out = [BigRational::zero(), BigRational::zero()];
    for (xv, slot) in [(0u8, 0usize), (1, 1)] {
        let mut sum = BigRational::zero();
        for mask in 0..(1usize << k) {
            let rv = |j: usize| ((mask >> j) & 1) as u8;
            // factor product along the path; off-path parents are null effects
            let mut prob = cpt_at(m, variable, &|_| 0, xv);
            let head_parent = |p: VarId| if p == variable { xv } else { 1 };
            prob *= cpt_at(m, chain[0], &head_parent, rv(0));
            for j in 1..k {
                let prev = chain[j - 1];
                let pv = |p: VarId| if p == prev { rv(j - 1) } else { 1 };
                prob *= cpt_at(m, chain[j], &pv, rv(j));
            }
            let c: u32 = (0..k.saturating_sub(1)).map(|j| rv(j) as u32).sum();
            sum += prob * BigRational::from_integer(num::BigInt::from(1u64 << c));
        }
        out[slot] = sum;
        let _ = g;
    }
    out
}

fn cpt_at(
    m: &DiscreteModel,
    v: VarId,
    parent_value: &dyn Fn(VarId) -> u8,
    value: u8,
) -> BigRational {
    let cpt = m.cpt(v);
    let mut idx = 0usize;
    for &p in &cpt.parents {
        idx = idx * m.card(p) as usize + parent_value(p) as usize;
    }
    cpt.columns[idx][value as usize].clone()
}

// ---------------------------------------------------------------------------
// bivariate construction

/// Observed probabilities of the bivariate chain model, in the complete-case
/// cells, the partially observed column, and the fully missing cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservedBivariate {
    pub p11: BigRational,
    pub p10: BigRational,
    pub p01: BigRational,
    pub p00: BigRational,
    pub p1na: BigRational,
    pub p0na: BigRational,
    pub pnana: BigRational,
}

impl ObservedBivariate {
    /// Builds from the six specifiable entries, deriving the fully missing
    /// cell from normalization.
    pub fn from_six(
        p11: BigRational,
        p10: BigRational,
        p01: BigRational,
        p00: BigRational,
        p1na: BigRational,
        p0na: BigRational,
    ) -> Result<Self, CexError> {
        let sum: BigRational = [&p11, &p10, &p01, &p00, &p1na, &p0na]
            .into_iter()
            .cloned()
            .sum();
        if sum >= BigRational::one() {
            return Err(CexError::BadObserved);
        }
        let all = [&p11, &p10, &p01, &p00, &p1na, &p0na];
        if all.into_iter().any(|p| *p <= BigRational::zero()) {
            return Err(CexError::BadObserved);
        }
        let pnana = BigRational::one() - sum;
        Ok(ObservedBivariate {
            p11,
            p10,
            p01,
            p00,
            p1na,
            p0na,
            pnana,
        })
    }

    /// The observed probabilities used by the built-in example construction.
    pub fn example() -> Self {
        Self::from_six(
            ratio(1, 5),
            ratio(1, 10),
            ratio(1, 10),
            ratio(1, 5),
            ratio(1, 20),
            ratio(1, 10),
        )
        .expect("example observed table")
    }
}

/// One solved model of the bivariate construction, with its parameters.
#[derive(Debug)]
pub struct BivariateModel {
    pub a: BigRational,
    pub b: BigRational,
    pub c: BigRational,
    pub d: BigRational,
    pub e: BigRational,
    pub f: BigRational,
    pub gamma1: BigRational,
    pub gamma0: BigRational,
    pub model: DiscreteModel,
}

/// Role names of the bivariate chain shape detected in a graph:
/// `x -> y`, `y -> r_x`, `r_x -> r_y` with `r_x >= r_y` monotone.
#[derive(Debug, Clone)]
pub struct BivariateShape {
    pub x: String,
    pub y: String,
    pub r_x: String,
    pub r_y: String,
}

/// Recognizes the bivariate chain shape (two partial variables, three edges,
/// one monotone pair) and maps its role names.
pub fn bivariate_shape(g: &MDag, mono: &MonotoneSpec) -> Result<BivariateShape, CexError> {
    let partials = g.partials();
    if partials.len() != 2 || !g.vertex_ids().all(|v| g.kind(v) != VertexKind::Observed) {
        return Err(CexError::NotBivariateShape);
    }
    for (x, y) in [(partials[0], partials[1]), (partials[1], partials[0])] {
        let (rx, ry) = (g.indicator_of(x).unwrap(), g.indicator_of(y).unwrap());
        let edges_ok =
            g.has_edge(x, y) && g.has_edge(y, rx) && g.has_edge(rx, ry) && g.edges().count() == 3;
        if edges_ok && mono.contains(rx, ry) && mono.pairs().count() == 1 {
            return Ok(BivariateShape {
                x: g.name(x).to_string(),
                y: g.name(y).to_string(),
                r_x: g.name(rx).to_string(),
                r_y: g.name(ry).to_string(),
            });
        }
    }
    Err(CexError::NotBivariateShape)
}

/// Solves the bivariate construction on the given graph for each `a`: the
/// pair `(b, d)` from the complete-case odds `gamma1 = p11/p01` and
/// `gamma0 = p10/p00`, `f` from the response totals, then `c` and `e` from
/// the complete-case cells. Every parameter must land strictly inside (0, 1)
/// or the `a` is rejected. Each solved model is verified to reproduce the
/// observed probabilities exactly before it is returned.
pub fn bivariate_pair(
    g: &MDag,
    mono: &MonotoneSpec,
    observed: &ObservedBivariate,
    a_values: &[BigRational],
) -> Result<Vec<BivariateModel>, CexError> {
    let shape = bivariate_shape(g, mono)?;
    let gamma1 = observed.p11.clone() / observed.p01.clone();
    let gamma0 = observed.p10.clone() / observed.p00.clone();
    if gamma1 == gamma0 {
        return Err(CexError::BadObserved);
    }
    let mut out = Vec::new();
    for a in a_values {
        let reject = |why: &str| CexError::InfeasibleA {
            a: crate::model::rational_string(a),
            why: why.to_string(),
        };
        if a <= &BigRational::zero() || a >= &BigRational::one() {
            return Err(reject("a must lie strictly inside (0, 1)"));
        }
        let t = a.clone() / (BigRational::one() - a.clone());
        let d = (t.clone() - gamma0.clone()) / (gamma1.clone() - gamma0.clone());
        if d <= BigRational::zero() || d >= BigRational::one() {
            return Err(reject("d leaves (0, 1)"));
        }
        let b = gamma1.clone() * d.clone() / t;
        if b <= BigRational::zero() || b >= BigRational::one() {
            return Err(reject("b leaves (0, 1)"));
        }
        let s: BigRational = [&observed.p11, &observed.p10, &observed.p01, &observed.p00]
            .into_iter()
            .cloned()
            .sum();
        let f = s.clone() / (s + observed.p1na.clone() + observed.p0na.clone());
        let c = observed.p11.clone() / (a.clone() * b.clone() * f.clone());
        if c <= BigRational::zero() || c >= BigRational::one() {
            return Err(reject("c leaves (0, 1)"));
        }
        let e = observed.p10.clone() / (a.clone() * (BigRational::one() - b.clone()) * f.clone());
        if e <= BigRational::zero() || e >= BigRational::one() {
            return Err(reject("e leaves (0, 1)"));
        }
        let model = bivariate_model(g, mono, &shape, a, &b, &c, &d, &e, &f)?;
        verify_reproduces(&shape, &model, observed)?;
        out.push(BivariateModel {
            a: a.clone(),
            b,
            c,
            d,
            e,
            f,
            gamma1: gamma1.clone(),
            gamma0: gamma0.clone(),
            model,
        });
    }
    Ok(out)
}

/// [`bivariate_pair`] on the built-in bivariate graph with the example
/// observed probabilities.
pub fn bivariate_pair_default(a_values: &[BigRational]) -> Result<Vec<BivariateModel>, CexError> {
    let (g, mono) = figures::fig2a();
    bivariate_pair(&g, &mono, &ObservedBivariate::example(), a_values)
}

#[allow(clippy::too_many_arguments)]
fn bivariate_model(
    g: &MDag,
    mono: &MonotoneSpec,
    shape: &BivariateShape,
    a: &BigRational,
    b: &BigRational,
    c: &BigRational,
    d: &BigRational,
    e: &BigRational,
    f: &BigRational,
) -> Result<DiscreteModel, CexError> {
    let one = BigRational::one;
    let mut cpts: Vec<Cpt> = Vec::with_capacity(g.len());
    for v in g.vertex_ids() {
        let name = g.name(v);
        let parents: Vec<VarId> = g.parents(v).to_vec();
        let columns: Vec<Vec<BigRational>> = if name == shape.x {
            vec![vec![one() - a.clone(), a.clone()]]
        } else if name == shape.y {
            // columns indexed by x value: 0 then 1
            vec![
                vec![one() - d.clone(), d.clone()],
                vec![one() - b.clone(), b.clone()],
            ]
        } else if name == shape.r_x {
            vec![
                vec![one() - e.clone(), e.clone()],
                vec![one() - c.clone(), c.clone()],
            ]
        } else {
            // r_y given r_x: forced to 0 when r_x = 0
            vec![
                vec![one(), BigRational::zero()],
                vec![one() - f.clone(), f.clone()],
            ]
        };
        cpts.push(Cpt { parents, columns });
    }
    Ok(DiscreteModel::new(
        g.clone(),
        mono.clone(),
        vec![2; g.len()],
        cpts,
    )?)
}

/// The solved model must reproduce the given observed probabilities exactly:
/// the four complete-case cells, the fully missing cell, and the total mass of
/// the partially observed column. The split of that column is functionally
/// determined by the rest and is not a free input.
fn verify_reproduces(
    shape: &BivariateShape,
    model: &DiscreteModel,
    observed: &ObservedBivariate,
) -> Result<(), CexError> {
    let o = observed_law(model);
    let ix = o.var_index(&shape.x).unwrap();
    let iy = o.var_index(&shape.y).unwrap();
    let irx = o.var_index(&shape.r_x).unwrap();
    let iry = o.var_index(&shape.r_y).unwrap();
    let cell = |x: u8, y: u8, rx: u8, ry: u8| -> BigRational {
        o.event_prob(
            &[(ix, x), (iy, y), (irx, rx), (iry, ry)]
                .into_iter()
                .collect(),
        )
    };
    use crate::model::NA;
    let checks = [
        (cell(1, 1, 1, 1), observed.p11.clone(), "p11"),
        (cell(1, 0, 1, 1), observed.p10.clone(), "p10"),
        (cell(0, 1, 1, 1), observed.p01.clone(), "p01"),
        (cell(0, 0, 1, 1), observed.p00.clone(), "p00"),
        (cell(NA, NA, 0, 0), observed.pnana.clone(), "pnana"),
        (
            cell(1, NA, 1, 0) + cell(0, NA, 1, 0),
            observed.p1na.clone() + observed.p0na.clone(),
            "p1na + p0na",
        ),
    ];
    for (got, want, label) in checks {
        if got != want {
            return Err(CexError::ConstructionInvalid(format!(
                "solved model does not reproduce {label}"
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::figures;

    #[test]
    fn chain_pair_k2_quarter() {
        let (g, mono) = figures::fig2a();
        let pair = chain_pair(&g, &mono, 2, &ratio(1, 4)).unwrap();
        let (m1, m2) = (&pair.models.0, &pair.models.1);
        assert_eq!(observed_law(m1), observed_law(m2));
        let v = m1.graph.id(&pair.variable).unwrap();
        let p1 = m1.full_law().event_prob(&[(v, 0)].into_iter().collect());
        let p2 = m2.full_law().event_prob(&[(v, 0)].into_iter().collect());
        assert_eq!(p1, ratio(1, 4));
        assert_eq!(p2, ratio(3, 4));
    }

    #[test]
    fn chain_pair_rejects_half() {
        let (g, mono) = figures::fig2a();
        assert!(matches!(
            chain_pair(&g, &mono, 2, &ratio(1, 2)),
            Err(CexError::BadGamma)
        ));
        assert!(matches!(
            chain_pair(&g, &mono, 2, &ratio(0, 1)),
            Err(CexError::BadGamma)
        ));
    }

    #[test]
    fn chain_pair_missing_path() {
        let (g, _) = figures::fig2a();
        let no_mono = MonotoneSpec::empty();
        assert!(matches!(
            chain_pair(&g, &no_mono, 2, &ratio(1, 4)),
            Err(CexError::MissingPath(2))
        ));
    }

    #[test]
    fn chain_pair_degenerates_to_censoring_edge() {
        // length 1: the chain is the variable's own indicator, no
        // monotone pairs needed
        let (g, mono) = figures::chain(1);
        let pair = chain_pair(&g, &mono, 1, &ratio(1, 4)).unwrap();
        assert_eq!(pair.indicator_chain, vec!["R_X1"]);
        let (m1, m2) = (&pair.models.0, &pair.models.1);
        assert_eq!(observed_law(m1), observed_law(m2));
        let v = m1.graph.id("X1").unwrap();
        let p1 = m1.full_law().event_prob(&[(v, 0)].into_iter().collect());
        let p2 = m2.full_law().event_prob(&[(v, 0)].into_iter().collect());
        assert_eq!(p1, ratio(1, 4));
        assert_eq!(p2, ratio(3, 4));
    }

    #[test]
    fn chain_pair_k4_fig2b() {
        let (g, mono) = figures::fig2b();
        let pair = chain_pair(&g, &mono, 4, &ratio(1, 3)).unwrap();
        let v = pair.models.0.graph.id("X4").unwrap();
        let p1 = pair
            .models
            .0
            .full_law()
            .event_prob(&[(v, 0)].into_iter().collect());
        let p2 = pair
            .models
            .1
            .full_law()
            .event_prob(&[(v, 0)].into_iter().collect());
        assert_ne!(p1, p2);
        // weighted sums follow the closed pattern
        let gam = ratio(1, 3);
        let k = BigRational::from_integer(4.into());
        let small = gam.clone() * gam.clone()
            + k.clone() * gam.clone() * (BigRational::one() - gam.clone());
        let big = (BigRational::one() - gam.clone()) * (BigRational::one() - gam.clone())
            + k * gam.clone() * (BigRational::one() - gam.clone());
        assert_eq!(pair.weighted_sums[0][0], small);
        assert_eq!(pair.weighted_sums[0][1], big);
        assert_eq!(pair.weighted_sums[1][0], big);
        assert_eq!(pair.weighted_sums[1][1], small);
    }

    #[test]
    fn bivariate_reproduces_parameter_table() {
        let models = bivariate_pair_default(&[ratio(7, 15), ratio(8, 15)]).unwrap();
        let m1 = &models[0];
        assert_eq!(
            (&m1.b, &m1.c, &m1.d, &m1.e, &m1.f),
            (
                &ratio(4, 7),
                &ratio(15, 16),
                &ratio(1, 4),
                &ratio(5, 8),
                &ratio(4, 5)
            )
        );
        let m2 = &models[1];
        assert_eq!(
            (&m2.b, &m2.c, &m2.d, &m2.e, &m2.f),
            (
                &ratio(3, 4),
                &ratio(5, 8),
                &ratio(9, 21),
                &ratio(15, 16),
                &ratio(4, 5)
            )
        );
        assert_eq!(m1.gamma1, ratio(2, 1));
        assert_eq!(m1.gamma0, ratio(1, 2));
        // the fully responding cell of the first model
        let g = &m1.model.graph;
        let ev: std::collections::BTreeMap<VarId, u8> = ["X", "Y", "R_X", "R_Y"]
            .iter()
            .map(|n| (g.id(n).unwrap(), 1u8))
            .collect();
        assert_eq!(m1.model.full_law().event_prob(&ev), ratio(1, 5));
    }

    #[test]
    fn solved_observed_law_pins_the_partial_column_split() {
        // The partially observed column of the solved models is functionally
        // determined by the complete cells and the response ratio: its split
        // is (3/40, 3/40) for the example table, whatever a is chosen.
        let models = bivariate_pair_default(&[ratio(7, 15), ratio(1, 2)]).unwrap();
        for m in &models {
            let o = observed_law(&m.model);
            let i = |n: &str| o.var_index(n).unwrap();
            let cell = |x: u8, y: u8, rx: u8, ry: u8| {
                o.event_prob(
                    &[(i("X"), x), (i("Y"), y), (i("R_X"), rx), (i("R_Y"), ry)]
                        .into_iter()
                        .collect(),
                )
            };
            use crate::model::NA;
            assert_eq!(cell(1, 1, 1, 1), ratio(1, 5));
            assert_eq!(cell(1, 0, 1, 1), ratio(1, 10));
            assert_eq!(cell(0, 1, 1, 1), ratio(1, 10));
            assert_eq!(cell(0, 0, 1, 1), ratio(1, 5));
            assert_eq!(cell(1, NA, 1, 0), ratio(3, 40));
            assert_eq!(cell(0, NA, 1, 0), ratio(3, 40));
            assert_eq!(cell(NA, NA, 0, 0), ratio(1, 4));
        }
    }

    #[test]
    fn bivariate_infeasible_values() {
        for a in [ratio(2, 5), ratio(3, 5)] {
            assert!(matches!(
                bivariate_pair_default(&[a]),
                Err(CexError::InfeasibleA { .. })
            ));
        }
    }

    #[test]
    fn bivariate_pair_differs_only_on_double_missing() {
        let models = bivariate_pair_default(&[ratio(7, 15), ratio(8, 15)]).unwrap();
        let (m1, m2) = (&models[0].model, &models[1].model);
        assert_eq!(observed_law(m1), observed_law(m2));
        let g = &m1.graph;
        let ids: Vec<_> = ["X", "Y", "R_X", "R_Y"]
            .iter()
            .map(|n| g.id(n).unwrap())
            .collect();
        let l1 = m1.full_law();
        let l2 = m2.full_law();
        for (values, p) in l1.iter_assignments() {
            let q = l2.get(&values);
            if values[ids[2]] == 0 && values[ids[3]] == 0 {
                assert_ne!(p, q, "double-missing cells must differ");
            } else {
                assert_eq!(p, q);
            }
        }
    }
}
