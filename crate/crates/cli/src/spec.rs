//! The graph-spec language: one statement per line.
//!
//! ```text
//! # comment
//! var <name> partial|observed
//! edge <a> -> <b>
//! mono <Ra> >= <Rb>
//! card <name> <k>
//! ```
//!
//! Response indicators `R_<name>` are created automatically for each partial
//! variable; proxies are implicit. Every diagnostic carries a line/column and
//! a caret-annotated snippet.

use mdag_core::{validate_mdag, MDag, MonotoneSpec, ValidationReport, VertexKind};
use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug)]
pub struct GraphSpec {
    pub source: String,
    pub mdag: MDag,
    pub mono: MonotoneSpec,
    pub cards: BTreeMap<String, u8>,
    /// statement index -> (line, column) of its first token
    pub locations: Vec<(usize, usize)>,
}

#[derive(Debug)]
pub enum SpecError {
    Syntax {
        line: usize,
        col: usize,
        message: String,
        snippet: String,
    },
    Semantic {
        line: usize,
        col: usize,
        message: String,
        snippet: String,
    },
    Validation(ValidationReport),
}

impl fmt::Display for SpecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpecError::Syntax {
                line,
                col,
                message,
                snippet,
            }
            | SpecError::Semantic {
                line,
                col,
                message,
                snippet,
            } => {
                let kind = if matches!(self, SpecError::Syntax { .. }) {
                    "syntax"
                } else {
                    "semantic"
                };
                writeln!(f, "{kind} error: {message}")?;
                writeln!(f, "  --> line {line}, column {col}")?;
                writeln!(f, "   |")?;
                writeln!(f, "{line:>3}| {snippet}")?;
                write!(f, "   | {}^", " ".repeat(col.saturating_sub(1)))
            }
            SpecError::Validation(report) => {
                writeln!(f, "the graph is not a valid m-DAG:")?;
                for v in &report.violations {
                    writeln!(f, "  - {v}")?;
                }
                Ok(())
            }
        }
    }
}

impl std::error::Error for SpecError {}

#[derive(Debug, Clone)]
enum Statement {
    Var { name: String, partial: bool },
    Edge { from: String, to: String },
    Mono { up: String, down: String },
    Card { name: String, k: u8 },
}

struct Line<'a> {
    number: usize,
    text: &'a str,
}

impl<'a> Line<'a> {
    fn col_of(&self, token: &str) -> usize {
        self.text.find(token).map_or(1, |i| i + 1)
    }

    fn syntax(&self, col: usize, message: impl Into<String>) -> SpecError {
        SpecError::Syntax {
            line: self.number,
            col,
            message: message.into(),
            snippet: self.text.to_string(),
        }
    }

    fn semantic(&self, col: usize, message: impl Into<String>) -> SpecError {
        SpecError::Semantic {
            line: self.number,
            col,
            message: message.into(),
            snippet: self.text.to_string(),
        }
    }
}

fn ident_ok(s: &str) -> bool {
    !s.is_empty()
        && s.chars()
            .next()
            .map(|c| c.is_ascii_alphabetic() || c == '_')
            .unwrap_or(false)
        && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Parses the graph-spec text into a validated m-DAG with monotone
/// annotations and cardinalities.
pub fn parse_mdag_file(text: &str) -> Result<GraphSpec, SpecError> {
    let mut statements: Vec<(Statement, usize, usize)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = Line {
            number: idx + 1,
            text: raw,
        };
        let stripped = raw.split('#').next().unwrap_or("");
        let tokens: Vec<&str> = stripped.split_whitespace().collect();
        if tokens.is_empty() {
            continue;
        }
        let col = line.col_of(tokens[0]);
        let stmt = match tokens[0] {
            "var" => {
                let [_, name, kind] = tokens[..] else {
                    return Err(line.syntax(col, "expected `var <name> partial|observed`"));
                };
                if !ident_ok(name) {
                    return Err(line.syntax(line.col_of(name), format!("bad vertex name `{name}`")));
                }
                let partial = match kind {
                    "partial" => true,
                    "observed" => false,
                    other => {
                        return Err(line.syntax(
                            line.col_of(other),
                            format!("expected `partial` or `observed`, found `{other}`"),
                        ))
                    }
                };
                Statement::Var {
                    name: name.to_string(),
                    partial,
                }
            }
            "edge" => {
                let [_, from, arrow, to] = tokens[..] else {
                    return Err(line.syntax(col, "expected `edge <a> -> <b>`"));
                };
                if arrow != "->" {
                    return Err(line.syntax(line.col_of(arrow), "expected `->`"));
                }
                Statement::Edge {
                    from: from.to_string(),
                    to: to.to_string(),
                }
            }
            "mono" => {
                let [_, up, geq, down] = tokens[..] else {
                    return Err(line.syntax(col, "expected `mono <Ra> >= <Rb>`"));
                };
                if geq != ">=" {
                    return Err(line.syntax(line.col_of(geq), "expected `>=`"));
                }
                Statement::Mono {
                    up: up.to_string(),
                    down: down.to_string(),
                }
            }
            "card" => {
                let [_, name, k] = tokens[..] else {
                    return Err(line.syntax(col, "expected `card <name> <k>`"));
                };
                let k: u8 = k.parse().map_err(|_| {
                    line.syntax(line.col_of(k), "cardinality must be a small integer")
                })?;
                if k < 2 {
                    return Err(
                        line.semantic(line.col_of(tokens[2]), "cardinality must be at least 2")
                    );
                }
                Statement::Card {
                    name: name.to_string(),
                    k,
                }
            }
            other => {
                return Err(line.syntax(col, format!("unknown statement `{other}`")));
            }
        };
        statements.push((stmt, line.number, col));
    }

    // collect vertices first
    let mut observed: Vec<String> = Vec::new();
    let mut partial: Vec<String> = Vec::new();
    let lines: Vec<&str> = text.lines().collect();
    let line_at = |n: usize| Line {
        number: n,
        text: lines.get(n - 1).copied().unwrap_or(""),
    };
    for (stmt, line_no, col) in &statements {
        if let Statement::Var {
            name,
            partial: is_partial,
        } = stmt
        {
            if observed.contains(name) || partial.contains(name) {
                return Err(line_at(*line_no).semantic(*col, format!("duplicate vertex `{name}`")));
            }
            let auto = format!("R_{name}");
            if *is_partial && (observed.contains(&auto) || partial.contains(&auto)) {
                return Err(line_at(*line_no).semantic(
                    *col,
                    format!("auto-generated indicator `{auto}` collides with a declared vertex"),
                ));
            }
            if let Some(base) = name.strip_prefix("R_") {
                if partial.contains(&base.to_string()) {
                    return Err(line_at(*line_no).semantic(
                        *col,
                        format!("`{name}` collides with the auto-generated indicator of `{base}`"),
                    ));
                }
            }
            if *is_partial {
                partial.push(name.clone());
            } else {
                observed.push(name.clone());
            }
        }
    }
    let known = |name: &str| -> bool {
        observed.iter().any(|v| v == name)
            || partial.iter().any(|v| v == name)
            || (name
                .strip_prefix("R_")
                .map(|b| partial.iter().any(|v| v == b))
                .unwrap_or(false))
    };
    let mut edges: Vec<(String, String)> = Vec::new();
    let mut monos: Vec<(String, String)> = Vec::new();
    let mut cards: BTreeMap<String, u8> = BTreeMap::new();
    for (stmt, line_no, col) in &statements {
        match stmt {
            Statement::Var { .. } => {}
            Statement::Edge { from, to } => {
                for name in [from, to] {
                    if !known(name) {
                        return Err(line_at(*line_no).semantic(
                            line_at(*line_no).col_of(name).max(*col),
                            format!("unknown vertex `{name}`"),
                        ));
                    }
                }
                edges.push((from.clone(), to.clone()));
            }
            Statement::Mono { up, down } => {
                for name in [up, down] {
                    if !known(name) {
                        return Err(
                            line_at(*line_no).semantic(*col, format!("unknown vertex `{name}`"))
                        );
                    }
                    let is_ind = name
                        .strip_prefix("R_")
                        .map(|b| partial.iter().any(|v| v == b))
                        .unwrap_or(false);
                    if !is_ind {
                        return Err(line_at(*line_no).semantic(
                            line_at(*line_no).col_of(name),
                            format!("mono endpoint `{name}` is not a response indicator"),
                        ));
                    }
                }
                monos.push((up.clone(), down.clone()));
            }
            Statement::Card { name, k } => {
                if !known(name) {
                    return Err(
                        line_at(*line_no).semantic(*col, format!("unknown vertex `{name}`"))
                    );
                }
                let is_ind = name
                    .strip_prefix("R_")
                    .map(|b| partial.iter().any(|v| v == b))
                    .unwrap_or(false);
                if is_ind && *k != 2 {
                    return Err(line_at(*line_no)
                        .semantic(*col, "response indicators are binary".to_string()));
                }
                cards.insert(name.clone(), *k);
            }
        }
    }
    let obs_ref: Vec<&str> = observed.iter().map(String::as_str).collect();
    let part_ref: Vec<&str> = partial.iter().map(String::as_str).collect();
    let edge_ref: Vec<(&str, &str)> = edges
        .iter()
        .map(|(a, b)| (a.as_str(), b.as_str()))
        .collect();
    let mdag = MDag::build(&obs_ref, &part_ref, &edge_ref).map_err(|e| SpecError::Semantic {
        line: 1,
        col: 1,
        message: e.to_string(),
        snippet: lines.first().copied().unwrap_or("").to_string(),
    })?;
    let report = validate_mdag(&mdag);
    if !report.is_valid() {
        return Err(SpecError::Validation(report));
    }
    let mono_ref: Vec<(&str, &str)> = monos
        .iter()
        .map(|(a, b)| (a.as_str(), b.as_str()))
        .collect();
    let mono = MonotoneSpec::new(&mdag, &mono_ref).map_err(|e| {
        // find the offending mono line for the diagnostic
        let pos = statements.iter().find_map(|(s, l, c)| match s {
            Statement::Mono { .. } => Some((*l, *c)),
            _ => None,
        });
        let (line_no, col) = pos.unwrap_or((1, 1));
        line_at(line_no).semantic(col, e.to_string())
    })?;
    let locations = statements.iter().map(|(_, l, c)| (*l, *c)).collect();
    Ok(GraphSpec {
        source: text.to_string(),
        mdag,
        mono,
        cards,
        locations,
    })
}

impl GraphSpec {
    /// Canonical text form: vars, cards, edges, monos, each block sorted.
    /// Parsing the canonical form reproduces the same graph, annotations, and
    /// cardinalities.
    pub fn render_canonical(&self) -> String {
        let g = &self.mdag;
        let mut out = String::new();
        let mut vars: Vec<(String, bool)> = g
            .vertex_ids()
            .filter(|&v| g.kind(v) != VertexKind::Indicator)
            .map(|v| (g.name(v).to_string(), g.kind(v) == VertexKind::Partial))
            .collect();
        vars.sort();
        for (name, partial) in vars {
            out.push_str(&format!(
                "var {name} {}\n",
                if partial { "partial" } else { "observed" }
            ));
        }
        for (name, k) in &self.cards {
            if *k != 2 {
                out.push_str(&format!("card {name} {k}\n"));
            }
        }
        let mut edges: Vec<(String, String)> = g
            .edges()
            .map(|(a, b)| (g.name(a).to_string(), g.name(b).to_string()))
            .collect();
        edges.sort();
        for (a, b) in edges {
            out.push_str(&format!("edge {a} -> {b}\n"));
        }
        let mut monos: Vec<(String, String)> = self
            .mono
            .pairs()
            .map(|(a, b)| (g.name(a).to_string(), g.name(b).to_string()))
            .collect();
        monos.sort();
        for (a, b) in monos {
            out.push_str(&format!("mono {a} >= {b}\n"));
        }
        out
    }
}
