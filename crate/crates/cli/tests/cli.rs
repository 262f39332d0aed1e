//! End-to-end tests of the `mdag` binary, including the CLI acceptance
//! criterion: parse -> identify-full -> JSON on the colluder spec exits 0
//! with schema-conforming output; the monotone bivariate chain spec exits 1
//! with the self-censoring-path reason.

use serde_json::Value;
use std::path::PathBuf;
use std::process::{Command, Output};

fn graphs_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../graphs")
}

fn mdag(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mdag"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("not JSON ({e}): {}", String::from_utf8_lossy(&out.stdout)))
}

fn path(name: &str) -> String {
    graphs_dir().join(name).to_string_lossy().into_owned()
}

#[test]
fn criterion_9_identify_full_round_trip() {
    // colluder spec: exit 0, identified, provenance carries T1 and T2
    let out = mdag(&["identify-full", &path("fig1.mdag")]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let doc = json_of(&out);
    assert_eq!(doc["command"], "identify-full");
    assert_eq!(doc["result"]["status"], "identified");
    let provenance = doc["result"]["provenance"].as_array().unwrap();
    let rules: Vec<&str> = provenance
        .iter()
        .map(|p| p["rule"].as_str().unwrap())
        .collect();
    assert!(rules.contains(&"T1") && rules.contains(&"T2"), "{rules:?}");
    let text = doc["result"]["functional"]["text"].as_str().unwrap();
    assert!(text.contains("p(X, Y, R_X=1, R_Y=1)"), "{text}");
    // the functional tree round-trips through the expression parser
    let tree: mdag_core::ProbExpr =
        serde_json::from_value(doc["result"]["functional"]["tree"].clone()).unwrap();
    assert_eq!(mdag_core::parse_expr(text).unwrap(), tree);

    // monotone bivariate chain: exit 1, self-censoring-path reason
    let out = mdag(&["identify-full", &path("fig2a.mdag")]);
    assert_eq!(out.status.code(), Some(1));
    let doc = json_of(&out);
    assert_eq!(doc["result"]["status"], "not_identifiable");
    assert_eq!(doc["result"]["reason"]["reason"], "self_censoring_path");
    assert_eq!(doc["result"]["reason"]["variable"], "Y");
    println!("criterion 9 (CLI round trip): PASS");
}

#[test]
fn identify_full_without_mono_uses_sequential_route() {
    let out = mdag(&["identify-full", &path("fig2a-plain.mdag")]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json_of(&out);
    let text = doc["result"]["functional"]["text"].as_str().unwrap();
    assert_eq!(
        text,
        "p(X | Y, R_X=1, R_Y=1) * p(Y | R_Y=1, R_X) * p(R_X, R_Y)"
    );
}

#[test]
fn validate_reports_canonical_form() {
    let out = mdag(&["validate", &path("fig1.mdag")]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json_of(&out);
    assert_eq!(doc["valid"], true);
    let canon = doc["canonical"].as_str().unwrap();
    assert!(canon.contains("mono R_X >= R_Y"));
    // canonical form re-validates identically
    let tmp = std::env::temp_dir().join("mdag_canon_fig1.mdag");
    std::fs::write(&tmp, canon).unwrap();
    let out2 = mdag(&["validate", tmp.to_str().unwrap()]);
    assert_eq!(out2.status.code(), Some(0));
    assert_eq!(json_of(&out2)["canonical"], doc["canonical"]);
}

#[test]
fn syntax_error_exits_2_with_caret() {
    let tmp = std::env::temp_dir().join("mdag_bad_syntax.mdag");
    std::fs::write(&tmp, "var X partial\nedg X -> R_X\n").unwrap();
    let out = mdag(&["validate", tmp.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2"), "{err}");
    assert!(err.contains('^'), "{err}");
}

#[test]
fn detect_lists_structures() {
    let out = mdag(&["detect", &path("fig2b.mdag")]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json_of(&out);
    assert_eq!(doc["colluders"].as_array().unwrap().len(), 0);
    let paths = doc["self_censoring"]["paths"].as_array().unwrap();
    assert_eq!(paths.len(), 1);
    assert_eq!(paths[0]["variable"], "X4");
    // empty graph: empty structure lists
    let tmp = std::env::temp_dir().join("mdag_single_var.mdag");
    std::fs::write(&tmp, "var X partial\n").unwrap();
    let out = mdag(&["detect", tmp.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json_of(&out);
    assert!(doc["colluders"].as_array().unwrap().is_empty());
    assert!(doc["self_censoring"]["edges"]
        .as_array()
        .unwrap()
        .is_empty());
}

#[test]
fn verify_command_passes_on_colluder_graph() {
    let out = mdag(&["verify", &path("fig1.mdag"), "--n", "5", "--seed", "11"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let doc = json_of(&out);
    assert_eq!(doc["report"]["passed"], true);
    assert_eq!(doc["report"]["models"], 5);
}

#[test]
fn verify_target_law_and_refusal() {
    let out = mdag(&[
        "verify",
        &path("fig1.mdag"),
        "--law",
        "target-law",
        "--n",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(0));
    // refused identification verifies nothing and exits 1
    let out = mdag(&["verify", &path("fig2a.mdag"), "--n", "3"]);
    assert_eq!(out.status.code(), Some(1));
    let doc = json_of(&out);
    assert!(doc["report"].is_null());
}

#[test]
fn counterexample_chain() {
    let out = mdag(&[
        "counterexample",
        &path("fig2b.mdag"),
        "--kind",
        "thm6",
        "--k",
        "4",
        "--gamma",
        "1/3",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let doc = json_of(&out);
    assert_eq!(doc["observed_equal"], true);
    assert_eq!(doc["variable"], "X4");
    assert!(!doc["full_law_difference"].as_array().unwrap().is_empty());
    // gamma = 1/2 is an input error
    let out = mdag(&[
        "counterexample",
        &path("fig2b.mdag"),
        "--kind",
        "thm6",
        "--k",
        "4",
        "--gamma",
        "1/2",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn counterexample_bivariate() {
    let out = mdag(&[
        "counterexample",
        &path("fig2a.mdag"),
        "--kind",
        "appendix",
        "--a",
        "7/15",
        "--a",
        "8/15",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let doc = json_of(&out);
    assert_eq!(doc["observed_equal"], true);
    let models = doc["models"].as_array().unwrap();
    assert_eq!(models.len(), 2);
    assert_eq!(models[0]["b"], "4/7");
    assert_eq!(models[1]["d"], "3/7");
    let diffs = doc["full_law_difference"].as_array().unwrap();
    assert_eq!(
        diffs.len(),
        4,
        "exactly the four double-missing cells differ"
    );
    for d in diffs {
        let assign: Vec<&str> = d["assignment"]
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v.as_str().unwrap())
            .collect();
        assert!(
            assign.contains(&"R_X=0") && assign.contains(&"R_Y=0"),
            "{assign:?}"
        );
    }
    // infeasible a is an input error
    let out = mdag(&[
        "counterexample",
        &path("fig2a.mdag"),
        "--kind",
        "appendix",
        "--a",
        "2/5",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn or_check_exact_and_monotone_failure() {
    let tmp = std::env::temp_dir().join("mdag_or_nonmono.mdag");
    std::fs::write(
        &tmp,
        "var X partial\nvar Y partial\nedge X -> Y\nedge X -> R_Y\nedge Y -> R_X\n",
    )
    .unwrap();
    let out = mdag(&["or-check", tmp.to_str().unwrap(), "--n", "5", "--seed", "1"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let doc = json_of(&out);
    assert_eq!(doc["exact"], true);
    // ordering flag
    let out = mdag(&[
        "or-check",
        tmp.to_str().unwrap(),
        "--n",
        "3",
        "--order",
        "R_Y,R_X",
    ]);
    assert_eq!(out.status.code(), Some(0));
    // the monotone colluder graph breaks the factorization
    let out = mdag(&["or-check", &path("fig1.mdag"), "--n", "3"]);
    assert_eq!(out.status.code(), Some(1));
    let doc = json_of(&out);
    assert_eq!(doc["exact"], false);
    assert!(doc["failure"]
        .as_str()
        .unwrap()
        .contains("zero denominator"));
}

#[test]
fn text_output_mode() {
    let out = mdag(&["identify-full", &path("fig1.mdag"), "--output", "text"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("status: identified"), "{text}");
}

// ---------------------------------------------------------------------------
// schema conformance: every command's JSON output validates against its
// published schema in docs/schemas/

mod schema {
    use serde_json::Value;

    pub fn check(instance: &Value, schema: &Value, root: &Value, path: &str) -> Result<(), String> {
        if let Some(reference) = schema.get("$ref").and_then(Value::as_str) {
            let target = reference
                .strip_prefix("#/")
                .ok_or_else(|| format!("{path}: unsupported $ref {reference}"))?
                .split('/')
                .fold(root.clone(), |acc, seg| acc[seg].clone());
            return check(instance, &target, root, path);
        }
        if let Some(types) = schema.get("type") {
            let allowed: Vec<&str> = match types {
                Value::String(s) => vec![s.as_str()],
                Value::Array(a) => a.iter().filter_map(Value::as_str).collect(),
                _ => vec![],
            };
            let actual = match instance {
                Value::Null => "null",
                Value::Bool(_) => "boolean",
                Value::Number(n) if n.is_i64() || n.is_u64() => "integer",
                Value::Number(_) => "number",
                Value::String(_) => "string",
                Value::Array(_) => "array",
                Value::Object(_) => "object",
            };
            let ok = allowed
                .iter()
                .any(|t| *t == actual || (*t == "number" && actual == "integer"));
            if !ok {
                return Err(format!("{path}: expected type {allowed:?}, found {actual}"));
            }
            if actual == "null" {
                return Ok(()); // nullable field: nothing further to check
            }
        }
        if let Some(options) = schema.get("enum").and_then(Value::as_array) {
            if !options.contains(instance) {
                return Err(format!("{path}: {instance} not in {options:?}"));
            }
        }
        if let Some(obj) = instance.as_object() {
            if let Some(required) = schema.get("required").and_then(Value::as_array) {
                for key in required.iter().filter_map(Value::as_str) {
                    if !obj.contains_key(key) {
                        return Err(format!("{path}: missing required `{key}`"));
                    }
                }
            }
            if let Some(props) = schema.get("properties").and_then(Value::as_object) {
                for (key, sub) in props {
                    if let Some(v) = obj.get(key) {
                        check(v, sub, root, &format!("{path}.{key}"))?;
                    }
                }
            }
        }
        if let (Some(items), Some(arr)) = (schema.get("items"), instance.as_array()) {
            for (i, v) in arr.iter().enumerate() {
                check(v, items, root, &format!("{path}[{i}]"))?;
            }
        }
        Ok(())
    }
}

fn assert_schema(instance: &Value, schema_file: &str) {
    let schema_path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../docs/schemas")
        .join(schema_file);
    let schema: Value =
        serde_json::from_str(&std::fs::read_to_string(&schema_path).expect("schema file"))
            .expect("schema JSON");
    if let Err(e) = schema::check(instance, &schema, &schema, "$") {
        panic!("{schema_file}: {e}\ninstance: {instance:#}");
    }
}

#[test]
fn outputs_validate_against_published_schemas() {
    fn args(parts: &[&str]) -> Vec<String> {
        parts
            .iter()
            .map(|p| {
                if p.ends_with(".mdag") {
                    path(p)
                } else {
                    p.to_string()
                }
            })
            .collect()
    }
    let cases: Vec<(Vec<String>, &str)> = vec![
        (args(&["validate", "fig1.mdag"]), "validate.json"),
        (args(&["detect", "fig3a.mdag"]), "detect.json"),
        (args(&["identify-full", "fig1.mdag"]), "identify.json"),
        (args(&["identify-full", "fig2a.mdag"]), "identify.json"),
        (args(&["identify-full", "fig3d.mdag"]), "identify.json"),
        (args(&["identify-target", "fig1.mdag"]), "identify.json"),
        (args(&["verify", "fig1.mdag", "--n", "2"]), "verify.json"),
        (
            args(&[
                "counterexample",
                "fig2b.mdag",
                "--kind",
                "thm6",
                "--k",
                "4",
                "--gamma",
                "2/5",
            ]),
            "counterexample.json",
        ),
        (
            args(&[
                "counterexample",
                "fig2a.mdag",
                "--kind",
                "appendix",
                "--a",
                "7/15",
                "--a",
                "8/15",
            ]),
            "counterexample.json",
        ),
        (
            args(&["or-check", "fig2a-plain.mdag", "--n", "2"]),
            "or-check.json",
        ),
        (
            args(&["or-check", "fig1.mdag", "--n", "2"]),
            "or-check.json",
        ),
    ];
    for (argv, schema) in cases {
        let arg_refs: Vec<&str> = argv.iter().map(String::as_str).collect();
        let out = mdag(&arg_refs);
        let doc = json_of(&out);
        assert_schema(&doc, schema);
    }
    println!("all command outputs validate against docs/schemas/*.json");
}
