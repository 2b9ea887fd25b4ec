//! `natgraph` — command-line front end for the graph-complex engine.
//!
//! Exit codes: `0` success, `1` a verification command found a violation
//! (δ² residue, naturality counterexample, internal consistency failure),
//! `2` malformed input or arguments.  Every JSON document written carries
//! `schemaVersion`.

use std::fs;
use std::io::{ErrorKind, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use natgraph::complex::{d_squared_zero, differential, differential_unchecked, enumerate_basis, Family};
use natgraph::genfun::{g_functional, lie_dimensions};
use natgraph::graph::dot::{graph_to_dot, sum_to_dot};
use natgraph::graph::json::{graph_from_json, graph_to_json, sum_from_str, sum_to_json, GraphJson, SCHEMA_VERSION};
use natgraph::graph::{canonicalize, FormalSum};
use natgraph::homology::{delta_matrix, h0_dimension, kernel_basis};
use natgraph::jets::natural::{naturality_check, random_data_for, trial_rng, NaturalityOutcome};
use natgraph::jets::realize::{realize, Realized};
use natgraph::jets::JetData;
use natgraph::operad::{compose, lie_expand, trace_sum, OperadElement};
use natgraph::Error;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "natgraph", version, about = "Graph complexes for natural differential operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Slice {
    /// Graph family.
    #[arg(long, value_parser = parse_family)]
    family: Family,
    /// Number of vector fields.
    #[arg(long)]
    d: usize,
}

#[derive(Args)]
struct Output {
    /// Write the result to this file instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Canonical basis of one graded slice, or re-canonicalisation of an
    /// exported slice given with `--in`.
    Basis {
        #[arg(long, value_parser = parse_family, required_unless_present = "input", requires = "d")]
        family: Option<Family>,
        #[arg(long, required_unless_present = "input")]
        d: Option<usize>,
        /// Cochain degree (number of white vertices).
        #[arg(long, default_value_t = 0)]
        degree: usize,
        #[arg(long = "in", conflicts_with_all = ["family", "d"])]
        input: Option<PathBuf>,
        #[command(flatten)]
        output: Output,
    },
    /// Differential of a graph or formal sum.
    Diff {
        #[arg(long = "in")]
        input: PathBuf,
        /// Check membership in this family before differentiating.
        #[arg(long, value_parser = parse_family)]
        family: Option<Family>,
        #[command(flatten)]
        output: Output,
    },
    /// Verifies δ² = 0 on the degree-0 and degree-1 bases.
    D2check {
        #[command(flatten)]
        slice: Slice,
        #[command(flatten)]
        output: Output,
    },
    /// Dimension of degree-zero cohomology.
    H0 {
        #[command(flatten)]
        slice: Slice,
        /// Also write the δ⁰ matrix as JSON triplets to this file.
        #[arg(long)]
        matrix_out: Option<PathBuf>,
    },
    /// A basis of degree-zero cohomology.
    Kerbasis {
        #[command(flatten)]
        slice: Slice,
        /// Also write the δ⁰ matrix as JSON triplets to this file.
        #[arg(long)]
        matrix_out: Option<PathBuf>,
        #[command(flatten)]
        output: Output,
    },
    /// Partial composition `A ∘ₛ B`.
    Compose {
        /// The outer element A.
        #[arg(long = "in")]
        input: PathBuf,
        /// The inner element B.
        #[arg(long)]
        with: PathBuf,
        /// The slot s (1-based).
        #[arg(long)]
        slot: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Expands a bracket word such as `(b (b X1 X2) X3)` or `(c X1 X2)`.
    LieExpand {
        #[arg(long)]
        word: String,
        #[command(flatten)]
        output: Output,
    },
    /// Trace of an operator linear of order zero in X0.
    Trace {
        #[arg(long = "in")]
        input: PathBuf,
        #[command(flatten)]
        output: Output,
    },
    /// Realises a degree-zero sum on jet data.
    Eval {
        #[arg(long = "in")]
        input: PathBuf,
        /// Jet data file; random data in `--dim` dimensions otherwise.
        #[arg(long)]
        jets: Option<PathBuf>,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: Output,
    },
    /// Tests naturality under random coordinate changes.
    Natcheck {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: Output,
    },
    /// Table of d, g_d and (d−1)!.
    Genfun {
        #[arg(long)]
        upto: usize,
        /// Emit JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// Graphviz rendering of a sum or of a basis slice.
    ExportDot {
        #[arg(long = "in", conflicts_with_all = ["family", "d"])]
        input: Option<PathBuf>,
        #[arg(long, value_parser = parse_family, requires = "d")]
        family: Option<Family>,
        #[arg(long, requires = "family")]
        d: Option<usize>,
        #[arg(long, default_value_t = 0)]
        degree: usize,
        #[command(flatten)]
        output: Output,
    },
}

fn parse_family(s: &str) -> Result<Family, String> {
    s.parse::<Family>().map_err(|e| e.to_string())
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        let code = match e {
            Error::InvalidGraph(_) | Error::Domain(_) | Error::Schema(_) => 2,
            Error::BasisIncomplete(_) | Error::Internal(_) => 1,
        };
        Failure { code, message: e.to_string() }
    }
}

fn input_error(message: String) -> Failure {
    Failure { code: 2, message }
}

fn read_sum(path: &PathBuf) -> Result<FormalSum, Failure> {
    Ok(sum_from_str(&read_text(path)?)?)
}

fn read_element(path: &PathBuf) -> Result<OperadElement, Failure> {
    let sum = read_sum(path)?;
    let arity = sum
        .iter()
        .next()
        .map(|(k, _)| k.graph().labels().len())
        .ok_or_else(|| input_error(format!("{}: empty sum has no arity", path.display())))?;
    Ok(OperadElement::new(sum, arity)?)
}

fn emit(output: &Output, text: &str) -> Result<(), Failure> {
    match &output.out {
        Some(path) => fs::write(path, format!("{text}\n")).map_err(|e| input_error(format!("{}: {e}", path.display()))),
        None => print_stdout(text),
    }
}

/// Writes to standard output; a closed pipe (e.g. `| head`) is not an error.
fn print_stdout(text: &str) -> Result<(), Failure> {
    match writeln!(std::io::stdout().lock(), "{text}") {
        Err(e) if e.kind() != ErrorKind::BrokenPipe => Err(Failure { code: 2, message: e.to_string() }),
        _ => Ok(()),
    }
}

fn emit_json(output: &Output, value: &Value) -> Result<(), Failure> {
    emit(output, &serde_json::to_string_pretty(value).expect("serialisable"))
}

fn sum_value(s: &FormalSum) -> Value {
    serde_json::to_value(sum_to_json(s)).expect("serialisable")
}

fn realized_value(r: &Realized) -> Value {
    match r {
        Realized::Vector(v) => json!({"kind": "vector", "value": v.iter().map(|c| c.to_string()).collect::<Vec<_>>()}),
        Realized::Scalar(s) => json!({"kind": "scalar", "value": s.to_string()}),
    }
}

fn read_text(path: &PathBuf) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

/// Reads an exported basis slice and recomputes every canonical key from
/// the stored graph, keeping the document layout.
fn reimport_basis(path: &PathBuf) -> Result<Value, Failure> {
    let schema = |m: &str| Failure::from(Error::Schema(format!("{}: {m}", path.display())));
    let mut doc: Value = serde_json::from_str(&read_text(path)?).map_err(|e| schema(&e.to_string()))?;
    if doc.get("schemaVersion") != Some(&json!(SCHEMA_VERSION)) {
        return Err(schema("missing or unsupported schemaVersion"));
    }
    let entries = doc.get_mut("graphs").and_then(Value::as_array_mut).ok_or_else(|| schema("missing graphs array"))?;
    for entry in entries.iter_mut() {
        let stored = entry.get("graph").cloned().ok_or_else(|| schema("entry without graph"))?;
        let gj: GraphJson = serde_json::from_value(stored).map_err(|e| schema(&e.to_string()))?;
        let (canon, _) = canonicalize(&graph_from_json(&gj)?)?;
        let class = canon.class().ok_or_else(|| schema("graph has an odd automorphism and is zero"))?;
        *entry = json!({"key": class.key(), "graph": graph_to_json(class.graph())});
    }
    Ok(doc)
}

/// Writes the δ⁰ matrix of a slice as `{rows, cols, entries: [[r, c, "p/q"]]}`.
fn write_matrix(slice: &Slice, path: Option<&PathBuf>) -> Result<(), Failure> {
    let Some(path) = path else { return Ok(()) };
    let m = delta_matrix(slice.family, slice.d, 0)?;
    let entries: Vec<Value> = m.triplets().into_iter().map(|(r, c, v)| json!([r, c, v.to_string()])).collect();
    let doc = json!({
        "schemaVersion": SCHEMA_VERSION,
        "family": slice.family.name(),
        "d": slice.d,
        "rows": m.rows,
        "cols": m.cols,
        "entries": entries,
    });
    emit_json(&Output { out: Some(path.clone()) }, &doc)
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Basis { family, d, degree, input, output } => {
            let doc = match (input, family, d) {
                (Some(path), _, _) => reimport_basis(&path)?,
                (None, Some(family), Some(d)) => {
                    let basis = enumerate_basis(family, d, degree);
                    let graphs: Vec<Value> = basis
                        .graphs
                        .iter()
                        .map(|c| json!({"key": c.key(), "graph": graph_to_json(c.graph())}))
                        .collect();
                    json!({
                        "schemaVersion": SCHEMA_VERSION,
                        "family": family.name(),
                        "d": d,
                        "degree": degree,
                        "size": basis.len(),
                        "graphs": graphs,
                    })
                }
                _ => return Err(input_error("give --in or --family with --d".into())),
            };
            emit_json(&output, &doc)
        }
        Command::Diff { input, family, output } => {
            let x = read_sum(&input)?;
            let dx = match family {
                Some(f) => differential(&x, f)?,
                None => differential_unchecked(&x)?,
            };
            emit_json(&output, &sum_value(&dx))
        }
        Command::D2check { slice, output } => {
            let report = d_squared_zero(slice.family, slice.d)?;
            let failures: Vec<Value> = report
                .failures
                .iter()
                .map(|f| json!({"degree": f.degree, "key": f.graph.key(), "residue": sum_value(&f.residue)}))
                .collect();
            emit_json(
                &output,
                &json!({
                    "schemaVersion": SCHEMA_VERSION,
                    "family": slice.family.name(),
                    "d": slice.d,
                    "checked": report.checked,
                    "passed": report.passed(),
                    "failures": failures,
                }),
            )?;
            if report.passed() {
                Ok(())
            } else {
                Err(Failure { code: 1, message: format!("δ² ≠ 0 on {} basis graphs", report.failures.len()) })
            }
        }
        Command::H0 { slice, matrix_out } => {
            write_matrix(&slice, matrix_out.as_ref())?;
            print_stdout(&h0_dimension(slice.family, slice.d)?.to_string())
        }
        Command::Kerbasis { slice, matrix_out, output } => {
            write_matrix(&slice, matrix_out.as_ref())?;
            let basis = kernel_basis(slice.family, slice.d)?;
            emit_json(
                &output,
                &json!({
                    "schemaVersion": SCHEMA_VERSION,
                    "family": slice.family.name(),
                    "d": slice.d,
                    "dimension": basis.len(),
                    "basis": basis.iter().map(sum_value).collect::<Vec<_>>(),
                }),
            )
        }
        Command::Compose { input, with, slot, output } => {
            let outer = read_element(&input)?;
            let inner = read_element(&with)?;
            emit_json(&output, &sum_value(compose(&outer, slot, &inner)?.sum()))
        }
        Command::LieExpand { word, output } => emit_json(&output, &sum_value(lie_expand(&word)?.sum())),
        Command::Trace { input, output } => emit_json(&output, &sum_value(&trace_sum(&read_sum(&input)?)?)),
        Command::Eval { input, jets, dim, seed, output } => {
            let x = read_sum(&input)?;
            let data = match jets {
                Some(path) => JetData::from_json_str(&read_text(&path)?)?,
                None => {
                    if dim == 0 {
                        return Err(input_error("--dim must be positive".into()));
                    }
                    random_data_for(&x, dim, &mut trial_rng(seed, 0))
                }
            };
            let mut value = realized_value(&realize(&x, &data)?);
            value["schemaVersion"] = json!(SCHEMA_VERSION);
            value["n"] = json!(data.n);
            emit_json(&output, &value)
        }
        Command::Natcheck { input, dim, trials, seed, output } => {
            let x = read_sum(&input)?;
            let outcome = naturality_check(&x, dim, trials, seed)?;
            let mut value = json!({"schemaVersion": SCHEMA_VERSION, "dim": dim, "trials": trials, "seed": seed});
            match &outcome {
                NaturalityOutcome::Pass => value["result"] = json!("pass"),
                NaturalityOutcome::Counterexample { trial, transformed_data, transformed_value } => {
                    value["result"] = json!("counterexample");
                    value["trial"] = json!(trial);
                    value["onTransformedData"] = realized_value(transformed_data);
                    value["transformedValue"] = realized_value(transformed_value);
                }
            }
            emit_json(&output, &value)?;
            if outcome.passed() {
                Ok(())
            } else {
                Err(Failure { code: 1, message: "naturality counterexample found".into() })
            }
        }
        Command::Genfun { upto, json } => {
            let g = g_functional(upto)?;
            let lie = lie_dimensions(upto)?;
            let text = if json {
                let rows: Vec<Value> =
                    (0..upto).map(|k| json!({"d": k + 1, "g": g[k].to_string(), "lie": lie[k].to_string()})).collect();
                serde_json::to_string_pretty(&json!({"schemaVersion": SCHEMA_VERSION, "rows": rows}))
                    .expect("serialisable")
            } else {
                let mut table = String::from("d\tg_d\t(d-1)!");
                for k in 0..upto {
                    table.push_str(&format!("\n{}\t{}\t{}", k + 1, g[k], lie[k]));
                }
                table
            };
            print_stdout(&text)
        }
        Command::ExportDot { input, family, d, degree, output } => {
            let text = match (input, family, d) {
                (Some(path), _, _) => sum_to_dot(&read_sum(&path)?),
                (None, Some(f), Some(d)) => {
                    let basis = enumerate_basis(f, d, degree);
                    basis.graphs.iter().enumerate().map(|(i, c)| graph_to_dot(c.graph(), &format!("g{i}"))).collect()
                }
                _ => return Err(input_error("give --in or --family with --d".into())),
            };
            emit(&output, text.trim_end())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("natgraph: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
