//! `mdag` — identifiability analysis for missing-data DAGs from the command
//! line. See `docs/graph-spec.md` for the input language and
//! `docs/json-output.md` for the output documents.

mod output;
mod spec;

use anyhow::{anyhow, Context as _};
use clap::{Parser, Subcommand};
use mdag_core::{
    bivariate_pair, chain_pair, find_colluders, find_maximal_colluder, find_self_censoring,
    identify_full_law, identify_target_law, or_reconstruct, parse_rational, validate_mdag,
    verify_functional, DiscreteModel, ObservedBivariate, OrError, Query,
};
use output::{Document, Outcome, OutputFormat};
use serde_json::json;
use spec::GraphSpec;
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "mdag",
    about = "Identifiability of full and target laws in missing-data DAGs under monotone missingness",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output format for the result document.
    #[arg(long, global = true, value_enum, default_value = "json")]
    output: OutputFormat,
}

#[derive(Subcommand)]
enum Command {
    /// Check the m-DAG properties of a graph spec.
    Validate { file: PathBuf },
    /// List colluders, maximal colluders, and self-censoring structures.
    Detect { file: PathBuf },
    /// Decide identifiability of the full law and emit the functional.
    IdentifyFull { file: PathBuf },
    /// Decide identifiability of the target law via the ancestral criterion.
    IdentifyTarget { file: PathBuf },
    /// Re-verify the identified functional on seeded random models.
    Verify {
        file: PathBuf,
        /// Number of random models.
        #[arg(long, default_value_t = 20)]
        n: u64,
        /// Base seed; model i uses seed + i.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Which law to identify and verify.
        #[arg(long, value_enum, default_value = "full-law")]
        law: LawKind,
    },
    /// Construct observationally equivalent model pairs.
    Counterexample {
        file: PathBuf,
        /// `thm6` (monotone self-censoring chain) or `appendix` (bivariate).
        #[arg(long)]
        kind: CexKind,
        /// Chain length for `--kind thm6`.
        #[arg(long)]
        k: Option<usize>,
        /// Swap parameter for `--kind thm6`, e.g. `1/4`.
        #[arg(long)]
        gamma: Option<String>,
        /// Marginal parameter(s) for `--kind appendix`; repeatable.
        #[arg(long = "a")]
        a: Vec<String>,
        /// Observed probabilities `p11,p10,p01,p00,p1na,p0na` for
        /// `--kind appendix` (defaults to the built-in example table).
        #[arg(long)]
        observed: Option<String>,
    },
    /// Reconstruct the missingness mechanism through the odds-ratio
    /// factorization on random models and compare exactly.
    OrCheck {
        file: PathBuf,
        #[arg(long, default_value_t = 20)]
        n: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Indicator ordering, comma separated (defaults to name order).
        #[arg(long)]
        order: Option<String>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum LawKind {
    FullLaw,
    TargetLaw,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum CexKind {
    Thm6,
    Appendix,
}

fn main() {
    let cli = Cli::parse();
    let code = match run(&cli) {
        Ok(doc) => {
            doc.print(cli.output);
            doc.outcome.code()
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            Outcome::InputError.code()
        }
    };
    std::process::exit(code);
}

fn load(file: &PathBuf) -> anyhow::Result<GraphSpec> {
    let text =
        std::fs::read_to_string(file).with_context(|| format!("reading {}", file.display()))?;
    spec::parse_mdag_file(&text).map_err(|e| anyhow!("{e}"))
}

fn run(cli: &Cli) -> anyhow::Result<Document> {
    match &cli.command {
        Command::Validate { file } => {
            // parse_mdag_file already rejects invalid graphs; re-report here
            let text = std::fs::read_to_string(file)
                .with_context(|| format!("reading {}", file.display()))?;
            match spec::parse_mdag_file(&text) {
                Ok(spec) => {
                    let report = validate_mdag(&spec.mdag);
                    Ok(Document {
                        json: json!({
                            "command": "validate",
                            "graph": output::graph_json(&spec.mdag, &spec.mono),
                            "valid": report.is_valid(),
                            "violations": report.violations,
                            "statements": spec.locations.len(),
                            "statement_locations": spec.locations,
                            "source_bytes": spec.source.len(),
                            "canonical": spec.render_canonical(),
                        }),
                        text: "valid m-DAG\n".into(),
                        outcome: Outcome::Ok,
                    })
                }
                Err(e) => Err(anyhow!("{e}")),
            }
        }
        Command::Detect { file } => {
            let spec = load(file)?;
            let g = &spec.mdag;
            let colluders = find_colluders(g);
            let maximal: Vec<_> = g
                .indicators()
                .into_iter()
                .map(|r| find_maximal_colluder(g, g.name(r)).expect("indicator"))
                .filter(|mc| !mc.is_empty())
                .collect();
            let sc = find_self_censoring(g, &spec.mono);
            let text = format!(
                "colluders: {colluders:?}\nmaximal colluders: {maximal:?}\nself-censoring edges: {:?}\nself-censoring paths: {:?}\n",
                sc.edges, sc.paths
            );
            Ok(Document {
                json: json!({
                    "command": "detect",
                    "graph": output::graph_json(g, &spec.mono),
                    "colluders": colluders,
                    "maximal_colluders": maximal,
                    "self_censoring": sc,
                }),
                text,
                outcome: Outcome::Ok,
            })
        }
        Command::IdentifyFull { file } => {
            let spec = load(file)?;
            let res = identify_full_law(&spec.mdag, &spec.mono).map_err(|e| anyhow!("{e}"))?;
            Ok(output::identify_document(
                "identify-full",
                &spec.mdag,
                &spec.mono,
                &res,
            ))
        }
        Command::IdentifyTarget { file } => {
            let spec = load(file)?;
            let res = identify_target_law(&spec.mdag, &spec.mono).map_err(|e| anyhow!("{e}"))?;
            Ok(output::identify_document(
                "identify-target",
                &spec.mdag,
                &spec.mono,
                &res,
            ))
        }
        Command::Verify { file, n, seed, law } => {
            let spec = load(file)?;
            let (res, query, law_name) = match law {
                LawKind::FullLaw => (
                    identify_full_law(&spec.mdag, &spec.mono).map_err(|e| anyhow!("{e}"))?,
                    Query::FullLaw,
                    "full-law",
                ),
                LawKind::TargetLaw => (
                    identify_target_law(&spec.mdag, &spec.mono).map_err(|e| anyhow!("{e}"))?,
                    Query::TargetLaw,
                    "target-law",
                ),
            };
            let Some(expr) = &res.functional else {
                let doc = output::identify_document("verify", &spec.mdag, &spec.mono, &res);
                return Ok(Document {
                    json: json!({
                        "command": "verify",
                        "law": law_name,
                        "identify": doc.json["result"],
                        "report": null,
                    }),
                    text: format!("nothing to verify: {}", doc.text),
                    outcome: Outcome::Refused,
                });
            };
            let report = verify_functional(&spec.mdag, &spec.mono, expr, &query, *n, *seed)
                .map_err(|e| anyhow!("{e}"))?;
            let outcome = if report.passed && !report.vacuous {
                Outcome::Ok
            } else {
                Outcome::Refused
            };
            let text = format!(
                "verified {} models: {}{}\n",
                report.models,
                if report.passed {
                    "all exact"
                } else {
                    "MISMATCH"
                },
                if report.vacuous {
                    " (vacuous: n = 0)"
                } else {
                    ""
                }
            );
            Ok(Document {
                json: json!({
                    "command": "verify",
                    "law": law_name,
                    "functional": expr.to_string(),
                    "report": serde_json::to_value(&report)?,
                }),
                text,
                outcome,
            })
        }
        Command::Counterexample {
            file,
            kind,
            k,
            gamma,
            a,
            observed,
        } => {
            let spec = load(file)?;
            match kind {
                CexKind::Thm6 => {
                    let k = k.ok_or_else(|| anyhow!("--kind thm6 requires --k"))?;
                    let gamma = gamma.as_deref().unwrap_or("1/4");
                    let gamma = parse_rational(gamma).map_err(|e| anyhow!("{e}"))?;
                    let pair = chain_pair(&spec.mdag, &spec.mono, k, &gamma)
                        .map_err(|e| anyhow!("{e}"))?;
                    Ok(output::chain_pair_document(&spec.mdag, &spec.mono, &pair))
                }
                CexKind::Appendix => {
                    if a.is_empty() {
                        return Err(anyhow!("--kind appendix requires at least one --a"));
                    }
                    let a_values: Result<Vec<_>, _> = a.iter().map(|s| parse_rational(s)).collect();
                    let a_values = a_values.map_err(|e| anyhow!("{e}"))?;
                    let table = match observed {
                        None => ObservedBivariate::example(),
                        Some(csv) => {
                            let parts: Result<Vec<_>, _> =
                                csv.split(',').map(|s| parse_rational(s.trim())).collect();
                            let parts = parts.map_err(|e| anyhow!("{e}"))?;
                            let [p11, p10, p01, p00, p1na, p0na] = parts.as_slice() else {
                                return Err(anyhow!(
                                    "--observed expects six comma-separated rationals"
                                ));
                            };
                            ObservedBivariate::from_six(
                                p11.clone(),
                                p10.clone(),
                                p01.clone(),
                                p00.clone(),
                                p1na.clone(),
                                p0na.clone(),
                            )
                            .map_err(|e| anyhow!("{e}"))?
                        }
                    };
                    let models = bivariate_pair(&spec.mdag, &spec.mono, &table, &a_values)
                        .map_err(|e| anyhow!("{e}"))?;
                    Ok(output::bivariate_document(&spec.mdag, &spec.mono, &models))
                }
            }
        }
        Command::OrCheck {
            file,
            n,
            seed,
            order,
        } => {
            let spec = load(file)?;
            let g = &spec.mdag;
            let ordering: Vec<String> = match order {
                Some(csv) => csv.split(',').map(|s| s.trim().to_string()).collect(),
                None => g
                    .indicators()
                    .into_iter()
                    .map(|r| g.name(r).to_string())
                    .collect(),
            };
            let mut reports = Vec::new();
            let mut failure: Option<String> = None;
            for i in 0..*n {
                let m: DiscreteModel =
                    mdag_core::random_model(g, &spec.mono, seed.wrapping_add(i), &spec.cards)
                        .map_err(|e| anyhow!("{e}"))?;
                match or_reconstruct(&m, &ordering) {
                    Ok(report) => {
                        if !report.exact {
                            failure =
                                Some(format!("reconstruction mismatch: {:?}", report.mismatches));
                        }
                        reports.push(serde_json::to_value(&report)?);
                    }
                    Err(e @ OrError::ZeroDenominator { .. }) => {
                        failure = Some(e.to_string());
                        reports
                            .push(json!({ "seed": seed.wrapping_add(i), "error": e.to_string() }));
                        break;
                    }
                    Err(e) => return Err(anyhow!("{e}")),
                }
            }
            let outcome = if failure.is_none() {
                Outcome::Ok
            } else {
                Outcome::Refused
            };
            let text = match &failure {
                None => format!("odds-ratio reconstruction exact on {n} random models\n"),
                Some(f) => format!("odds-ratio factorization unusable: {f}\n"),
            };
            Ok(Document {
                json: json!({
                    "command": "or-check",
                    "ordering": ordering,
                    "models": *n,
                    "exact": failure.is_none(),
                    "failure": failure,
                    "reports": reports,
                }),
                text,
                outcome,
            })
        }
    }
}
