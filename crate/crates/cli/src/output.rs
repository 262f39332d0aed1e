//! Output documents for every subcommand: a stable JSON shape plus a terse
//! text rendering. Rationals appear as exact `num/den` strings throughout.

use mdag_core::{
    rational_string, BivariateModel, ChainPair, DiscreteModel, IdentifyResult, IdentifyStatus,
    MDag, MonotoneSpec, ObservedLaw, VertexKind,
};
use serde::Serialize;
use serde_json::{json, Value};

/// Exit status of a command: `Ok` maps to 0, `Refused` (nonidentifiability,
/// failed verification, unusable factorization) to 1, input errors to 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Ok,
    Refused,
    InputError,
}

impl Outcome {
    pub fn code(self) -> i32 {
        match self {
            Outcome::Ok => 0,
            Outcome::Refused => 1,
            Outcome::InputError => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    Json,
    Text,
}

pub struct Document {
    pub json: Value,
    pub text: String,
    pub outcome: Outcome,
}

impl Document {
    pub fn print(&self, format: OutputFormat) {
        match format {
            OutputFormat::Json => {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&self.json).expect("serializable")
                )
            }
            OutputFormat::Text => println!("{}", self.text.trim_end()),
        }
    }
}

pub fn graph_json(g: &MDag, mono: &MonotoneSpec) -> Value {
    #[derive(Serialize)]
    struct V<'a> {
        name: &'a str,
        kind: VertexKind,
    }
    let vertices: Vec<V> = g
        .vertex_ids()
        .map(|v| V {
            name: g.name(v),
            kind: g.kind(v),
        })
        .collect();
    let edges: Vec<(String, String)> = g
        .edges()
        .map(|(a, b)| (g.name(a).to_string(), g.name(b).to_string()))
        .collect();
    let monos: Vec<(String, String)> = mono
        .pairs()
        .map(|(a, b)| (g.name(a).to_string(), g.name(b).to_string()))
        .collect();
    json!({ "vertices": vertices, "edges": edges, "mono": monos })
}

pub fn identify_document(
    command: &str,
    g: &MDag,
    mono: &MonotoneSpec,
    res: &IdentifyResult,
) -> Document {
    let outcome = match res.status {
        IdentifyStatus::Identified => Outcome::Ok,
        _ => Outcome::Refused,
    };
    let mut text = match res.status {
        IdentifyStatus::Identified => "status: identified\n".to_string(),
        IdentifyStatus::NotIdentifiable => {
            format!("status: not identifiable\nreason: {:?}\n", res.reason)
        }
        IdentifyStatus::Unknown => format!("status: unknown\nreason: {:?}\n", res.reason),
    };
    if let Some(f) = &res.functional {
        text.push_str(&format!("functional: {f}\n"));
    }
    for app in &res.provenance {
        text.push_str(&format!(
            "  [{:?}] {} -> {}\n",
            app.rule, app.target, app.functional
        ));
    }
    Document {
        json: json!({
            "command": command,
            "graph": graph_json(g, mono),
            "result": serde_json::to_value(res).expect("serializable"),
        }),
        text,
        outcome,
    }
}

pub fn observed_cells_json(o: &ObservedLaw) -> Value {
    serde_json::to_value(o.to_json()).expect("serializable")
}

pub fn model_json(m: &DiscreteModel) -> Value {
    serde_json::to_value(m.to_json()).expect("serializable")
}

/// Cell-by-cell difference summary of two full laws over the same graph.
pub fn full_law_difference(a: &DiscreteModel, b: &DiscreteModel) -> (Value, String) {
    let g = &a.graph;
    let la = a.full_law();
    let lb = b.full_law();
    let mut cells = Vec::new();
    let mut text = String::new();
    for (values, p) in la.iter_assignments() {
        let q = lb.get(&values);
        if p != q {
            let assign: Vec<String> = g
                .vertex_ids()
                .map(|v| format!("{}={}", g.name(v), values[v]))
                .collect();
            text.push_str(&format!(
                "  {}: {} vs {}\n",
                assign.join(", "),
                rational_string(p),
                rational_string(q)
            ));
            cells.push(json!({
                "assignment": assign,
                "first": rational_string(p),
                "second": rational_string(q),
            }));
        }
    }
    (json!(cells), text)
}

pub fn chain_pair_document(g: &MDag, mono: &MonotoneSpec, pair: &ChainPair) -> Document {
    let (m1, m2) = (&pair.models.0, &pair.models.1);
    let o1 = mdag_core::observed_law(m1);
    let o2 = mdag_core::observed_law(m2);
    let observed_equal = o1 == o2;
    let (diff, diff_text) = full_law_difference(m1, m2);
    let sums: Vec<Vec<String>> = pair
        .weighted_sums
        .iter()
        .map(|row| row.iter().map(rational_string).collect())
        .collect();
    let text = format!(
        "chain counterexample: variable {} through {:?}, gamma = {}\nobserved laws equal: {observed_equal}\nfull-law differences:\n{diff_text}",
        pair.variable,
        pair.indicator_chain,
        rational_string(&pair.gamma),
    );
    Document {
        json: json!({
            "command": "counterexample",
            "kind": "thm6",
            "graph": graph_json(g, mono),
            "variable": pair.variable,
            "indicator_chain": pair.indicator_chain,
            "gamma": rational_string(&pair.gamma),
            "weighted_sums": sums,
            "models": [model_json(m1), model_json(m2)],
            "observed_law": observed_cells_json(&o1),
            "observed_equal": observed_equal,
            "full_law_difference": diff,
        }),
        text,
        outcome: Outcome::Ok,
    }
}

pub fn bivariate_document(g: &MDag, mono: &MonotoneSpec, models: &[BivariateModel]) -> Document {
    let mut entries = Vec::new();
    let mut text = String::from("bivariate counterexample models:\n");
    for m in models {
        text.push_str(&format!(
            "  a={} b={} c={} d={} e={} f={}\n",
            rational_string(&m.a),
            rational_string(&m.b),
            rational_string(&m.c),
            rational_string(&m.d),
            rational_string(&m.e),
            rational_string(&m.f),
        ));
        entries.push(json!({
            "a": rational_string(&m.a),
            "b": rational_string(&m.b),
            "c": rational_string(&m.c),
            "d": rational_string(&m.d),
            "e": rational_string(&m.e),
            "f": rational_string(&m.f),
            "gamma1": rational_string(&m.gamma1),
            "gamma0": rational_string(&m.gamma0),
            "model": model_json(&m.model),
        }));
    }
    let (diff, observed_equal) = if models.len() >= 2 {
        let (d, dt) = full_law_difference(&models[0].model, &models[1].model);
        let eq =
            mdag_core::observed_law(&models[0].model) == mdag_core::observed_law(&models[1].model);
        text.push_str(&format!(
            "observed laws equal: {eq}\nfull-law differences:\n{dt}"
        ));
        (d, Some(eq))
    } else {
        (json!([]), None)
    };
    Document {
        json: json!({
            "command": "counterexample",
            "kind": "appendix",
            "graph": graph_json(g, mono),
            "models": entries,
            "observed_equal": observed_equal,
            "full_law_difference": diff,
        }),
        text,
        outcome: Outcome::Ok,
    }
}
