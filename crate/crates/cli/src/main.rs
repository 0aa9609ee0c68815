//! Command-line driver: check suites, classification, the phi family and the
//! genus-one predictor, on builtins or model files.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use vircheck_core::format::{load_model, serialize_model};
use vircheck_core::frobenius::Frobenius;
use vircheck_core::genus1::{predict_genus1, Genus1Context, Prediction};
use vircheck_core::library::{builtin, builtin_names, default_order, BuiltinOptions};
use vircheck_core::model::ModelSpec;
use vircheck_core::report::Status;
use vircheck_core::span::classify;
use vircheck_core::suite::{describe, run_suite, Suite, SuiteOptions};

#[derive(Parser)]
#[command(name = "vircheck", version, about = "Exact checks of genus-one Virasoro identities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum Format {
    Text,
    Json,
}

#[derive(clap::Args)]
struct ModelArgs {
    /// Builtin name or path to a model file.
    #[arg(value_name = "MODEL", required_unless_present = "model")]
    positional: Option<String>,
    /// Builtin name or path to a model file.
    #[arg(long, conflicts_with = "positional")]
    model: Option<String>,
    /// Truncation order (weighted degree).
    #[arg(long)]
    order: Option<u32>,
    /// Genus of the curve for curve-even.
    #[arg(long)]
    g: Option<u32>,
}

#[derive(Subcommand)]
enum Command {
    /// List the builtin models.
    ListModels {
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Run a check suite.
    Check {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value = "all")]
        suite: String,
        /// Largest index in the phi-Virasoro relations.
        #[arg(long, default_value_t = 4)]
        phimax: usize,
        /// Search limit for non-degeneracy.
        #[arg(long)]
        mmax: Option<usize>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        /// Also write the report to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Classify the Euler span.
    Classify {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        mmax: Option<usize>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Print phi_k.
    Phi {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        k: usize,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Predict the genus-one potential from genus zero.
    PredictGenus1 {
        #[command(flatten)]
        model: ModelArgs,
        /// Write the model with the predicted [f1] section here.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
}

struct Failure {
    code: u8,
    message: String,
}

fn input_error(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

fn resolve(args: &ModelArgs) -> Result<(ModelSpec, BTreeSet<String>), Failure> {
    let name = args
        .positional
        .as_deref()
        .or(args.model.as_deref())
        .ok_or_else(|| input_error("no model given"))?;
    if default_order(name).is_some() {
        let b = builtin(
            name,
            &BuiltinOptions {
                order: args.order,
                genus: args.g,
            },
        )
        .map_err(|e| input_error(e.to_string()))?;
        return Ok((b.spec, b.expected_failures));
    }
    let path = Path::new(name);
    if !path.exists() {
        return Err(input_error(format!(
            "'{name}' is neither a builtin model nor an existing file; run list-models for the builtins"
        )));
    }
    if args.g.is_some() {
        return Err(input_error("--g only applies to curve-even"));
    }
    let spec = load_model(path).map_err(|e| input_error(format!("{}: {e}", path.display())))?;
    let spec = match args.order {
        Some(o) => spec.truncated(o).map_err(|e| input_error(e.to_string()))?,
        None => spec,
    };
    Ok((spec, BTreeSet::new()))
}

fn frobenius(spec: &ModelSpec) -> Result<Frobenius, Failure> {
    Frobenius::new(spec).map_err(|e| input_error(e.to_string()))
}

fn emit(text: String, out: Option<&Path>) -> Result<(), Failure> {
    print!("{text}");
    if let Some(p) = out {
        std::fs::write(p, &text).map_err(|e| input_error(format!("{}: {e}", p.display())))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::ListModels { format } => {
            let names = builtin_names();
            let text = match format {
                Format::Text => names
                    .iter()
                    .map(|(n, d)| format!("{n:<12} {d}\n"))
                    .collect::<String>(),
                Format::Json => {
                    let v: Vec<_> = names
                        .iter()
                        .map(|(n, d)| json!({ "name": n, "description": d, "default_order": default_order(n) }))
                        .collect();
                    format!("{}\n", serde_json::to_string_pretty(&v).expect("json"))
                }
            };
            emit(text, None)
        }
        Command::Check {
            model,
            suite,
            phimax,
            mmax,
            format,
            out,
        } => {
            let suite: Suite = suite.parse().map_err(input_error)?;
            let (spec, expected) = resolve(&model)?;
            let start = Instant::now();
            let result = run_suite(
                &spec,
                &expected,
                &SuiteOptions {
                    suite,
                    phi_max: phimax,
                    m_max: mmax,
                },
            );
            eprintln!("wall time: {:.2}s", start.elapsed().as_secs_f64());
            let text = match format {
                Format::Text => result.to_text(),
                Format::Json => format!("{}\n", result.to_json()),
            };
            emit(text, out.as_deref())?;
            if result.summary.ok {
                Ok(())
            } else {
                Err(Failure {
                    code: 1,
                    message: "unexpected FAIL or UNDETERMINED".into(),
                })
            }
        }
        Command::Classify { model, mmax, format } => {
            let (spec, _) = resolve(&model)?;
            let fr = frobenius(&spec)?;
            let c = classify(&fr, mmax).map_err(|e| Failure {
                code: 1,
                message: e.to_string(),
            })?;
            let verdict = describe(c.verdict, c.semisimple);
            let text = match format {
                Format::Text => {
                    let mut t = format!("model {}\nverdict: {verdict}\nwitness: {}\n", spec.name, c.witness);
                    if let Some(n) = c.n {
                        t.push_str(&format!("euler span dimension: {}\n", n + 1));
                    }
                    if let Some(m) = c.det_matches {
                        t.push_str(&format!("resultant equals det A: {m}\n"));
                    }
                    t
                }
                Format::Json => format!(
                    "{}\n",
                    serde_json::to_string_pretty(&json!({
                        "model": spec.name,
                        "verdict": c.verdict,
                        "description": verdict,
                        "non_degenerate": c.non_degenerate,
                        "semisimple": c.semisimple,
                        "span_dimension": c.n.map(|n| n + 1),
                        "witness": c.witness,
                        "det_matches": c.det_matches,
                    }))
                    .expect("json")
                ),
            };
            emit(text, None)?;
            if c.verdict == vircheck_core::span::Verdict::Undetermined {
                return Err(Failure {
                    code: 1,
                    message: "classification undetermined".into(),
                });
            }
            Ok(())
        }
        Command::Phi { model, k, format } => {
            let (spec, _) = resolve(&model)?;
            let fr = frobenius(&spec)?;
            let cx = Genus1Context::new(&fr);
            let phi = cx.phi(k).map_err(|e| Failure {
                code: 1,
                message: e.to_string(),
            })?;
            let phi = spec.uncentered(&phi);
            let text = match format {
                Format::Text => format!("{phi}\n"),
                Format::Json => {
                    let terms: Vec<_> = phi
                        .sorted_terms()
                        .into_iter()
                        .map(|(m, c)| json!({ "monomial": m.render(phi.table()), "coefficient": c.to_string() }))
                        .collect();
                    format!(
                        "{}\n",
                        serde_json::to_string_pretty(&json!({
                            "model": spec.name,
                            "k": k,
                            "order": phi.valid_order(),
                            "series": phi.to_string(),
                            "terms": terms,
                        }))
                        .expect("json")
                    )
                }
            };
            emit(text, None)
        }
        Command::PredictGenus1 { model, out, format } => {
            let (spec, _) = resolve(&model)?;
            let fr = frobenius(&spec)?;
            let prediction = predict_genus1(&fr).map_err(|e| Failure {
                code: 1,
                message: e.to_string(),
            })?;
            match prediction {
                Prediction::Unique { f1, integrability, .. } => {
                    let installed = spec.with_f1(Some(f1.clone())).map_err(|e| Failure {
                        code: 1,
                        message: e.to_string(),
                    })?;
                    if let Some(p) = &out {
                        std::fs::write(p, serialize_model(&installed))
                            .map_err(|e| input_error(format!("{}: {e}", p.display())))?;
                    }
                    let text = match format {
                        Format::Text => format!(
                            "model {}\nunique gradient\nintegrability: {}\nf1 = {}\n",
                            spec.name,
                            integrability.status.label(),
                            f1
                        ),
                        Format::Json => format!(
                            "{}\n",
                            serde_json::to_string_pretty(&json!({
                                "model": spec.name,
                                "kind": "unique",
                                "integrability": integrability,
                                "f1": f1.to_string(),
                            }))
                            .expect("json")
                        ),
                    };
                    emit(text, None)?;
                    if integrability.status == Status::Pass {
                        Ok(())
                    } else {
                        Err(Failure {
                            code: 1,
                            message: "predicted gradient is not integrable".into(),
                        })
                    }
                }
                Prediction::Underdetermined {
                    rank,
                    constrained,
                    consistency,
                } => {
                    let constrained: Vec<String> = constrained
                        .iter()
                        .map(|s| spec.uncentered(s).to_string())
                        .collect();
                    let text = match format {
                        Format::Text => {
                            let mut t = format!(
                                "model {}\nunderdetermined: Euler powers span {rank} of {} directions\n",
                                spec.name,
                                spec.rank()
                            );
                            for (k, s) in constrained.iter().enumerate() {
                                t.push_str(&format!("<<E^{k}>>_1 = {s}\n"));
                            }
                            t.push_str(&format!("constrained directions consistent: {}\n", consistency.status.label()));
                            t
                        }
                        Format::Json => format!(
                            "{}\n",
                            serde_json::to_string_pretty(&json!({
                                "model": spec.name,
                                "kind": "underdetermined",
                                "rank": rank,
                                "constrained": constrained,
                                "consistency": consistency,
                            }))
                            .expect("json")
                        ),
                    };
                    emit(text, None)?;
                    if out.is_some() {
                        eprintln!("no file written: the genus-one potential is not determined");
                    }
                    if consistency.status == Status::Pass {
                        Ok(())
                    } else {
                        Err(Failure {
                            code: 1,
                            message: "constrained directions are inconsistent".into(),
                        })
                    }
                }
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
