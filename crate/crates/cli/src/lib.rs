//! Subcommand dispatch for the `isocode` binary.
//!
//! Exit codes: 0 = answer produced / property holds, 1 = usage error,
//! 2 = a bounded search was exhausted, 3 = internal contradiction or
//! contract violation.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use isocode_core::ceer::{adjacent, connect, CeerError};
use isocode_core::gen::{build_ceer, build_order, build_stream, build_structure, GenDescriptor};
use isocode_core::ks::{
    build_generic, condition_from_json, eval_labels, DenseSelector, KsCondition, KsError, Labeling,
};
use isocode_core::lo::{decode_payload, encode_order};
use isocode_core::oracles::{BitStream, OrderTable, StructTable};
use isocode_core::structure::{
    decode_structure, encode_structure, is_trivial_within, StructDecodeError, StructEncodeError,
    TrivialityVerdict,
};
use isocode_core::verify::{check_ceer_diameter, run_suite, Report, RunConfig, Status};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_BUDGET: i32 = 2;
pub const EXIT_CONTRADICTION: i32 = 3;

#[derive(Parser)]
#[command(name = "isocode", version, about = "Oracle-backed coding constructions")]
struct Cli {
    /// Write the output here as well as to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Default seed for any subcommand that takes one.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output format; `dot` applies to commands that produce a graph.
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Json)]
    format: OutputFormat,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum OutputFormat {
    Json,
    Dot,
}

#[derive(Subcommand)]
enum Command {
    /// Diameter-2 graphing of computably enumerable equivalence relations.
    #[command(name = "ceer-graph")]
    CeerGraph {
        #[command(subcommand)]
        action: CeerAction,
    },
    /// Bit-stream coding into isomorphic linear orders.
    #[command(name = "lo-code")]
    LoCode {
        #[command(subcommand)]
        action: LoAction,
    },
    /// Bit-stream coding into isomorphic relational structures.
    #[command(name = "struct-code")]
    StructCode {
        #[command(subcommand)]
        action: StructAction,
    },
    /// Kumabe-Slaman condition poset and path coding.
    #[command(name = "ks-force")]
    KsForce {
        #[command(subcommand)]
        action: KsAction,
    },
    /// Run the seeded property suites and emit a report.
    Verify(VerifyArgs),
}

#[derive(Subcommand)]
enum CeerAction {
    /// Decide adjacency of x and y in the computable graphing.
    Adjacent {
        /// Ceer generator descriptor (JSON).
        #[arg(long)]
        ceer: String,
        #[arg(long)]
        x: u64,
        #[arg(long)]
        y: u64,
        /// Also write the witness graph as DOT to this path.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Find a midpoint adjacent to both x and y.
    Connect {
        #[arg(long)]
        ceer: String,
        #[arg(long)]
        x: u64,
        #[arg(long)]
        y: u64,
        #[arg(long, default_value_t = 1_000)]
        budget: u64,
    },
    /// Sample certified pairs and check the diameter-2 property.
    Verify {
        #[arg(long)]
        ceer: String,
        #[arg(long, default_value_t = 25)]
        pairs: usize,
        #[arg(long, default_value_t = 1_000)]
        budget: u64,
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Subcommand)]
enum LoAction {
    /// Code a payload into an order isomorphic to the given one.
    Encode {
        /// Order generator descriptor (JSON).
        #[arg(long)]
        order: String,
        /// Payload bits as a '0'/'1' string (zero-extended).
        #[arg(long)]
        payload: String,
        /// Materialize the encoded order and isomorphism up to this bound.
        #[arg(long, default_value_t = 64)]
        prefix: u64,
    },
    /// Read payload, base-order code and coded stream off an order table.
    Decode {
        /// Materialized order table (inline JSON or a file path).
        #[arg(long = "order-table")]
        order_table: String,
        /// How many coded bits to read.
        #[arg(long, default_value_t = 16)]
        bits: u64,
    },
    /// Seeded round-trip property runs.
    Verify {
        #[arg(long, default_value_t = 20)]
        seeds: usize,
        #[arg(long, default_value_t = 100)]
        prefix: u64,
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Subcommand)]
enum StructAction {
    /// Code a payload into an isomorphic copy of a non-trivial structure.
    Encode {
        /// Structure generator descriptor (JSON).
        #[arg(long)]
        structure: String,
        #[arg(long)]
        payload: String,
        #[arg(long)]
        stages: u64,
        #[arg(long, default_value_t = 100_000)]
        budget: u64,
    },
    /// Re-derive stage decisions, payload and placement from a copy.
    Decode {
        /// Materialized structure table (inline JSON or a file path).
        #[arg(long)]
        table: String,
        #[arg(long)]
        stages: u64,
        #[arg(long, default_value_t = 100_000)]
        budget: u64,
    },
    /// Probe a structure for non-triviality over a finite parameter set.
    TrivialCheck {
        #[arg(long)]
        structure: String,
        /// Comma-separated parameter elements.
        #[arg(long, default_value = "")]
        f: String,
        #[arg(long, default_value_t = 100_000)]
        budget: u64,
    },
}

#[derive(Subcommand)]
enum KsAction {
    /// Code a payload along a path, alternating with dense selectors.
    Encode {
        #[arg(long)]
        payload: String,
        /// Path generator descriptor (JSON).
        #[arg(long)]
        path: String,
        #[arg(long)]
        rounds: u64,
        #[arg(long = "diff-budget", default_value_t = 10_000)]
        diff_budget: u64,
        /// Comma-separated selector names: identity, label-beside,
        /// decide-label-parity, path-violator.
        #[arg(long, default_value = "identity")]
        selectors: String,
    },
    /// Read the labels along a path through a condition.
    Eval {
        /// Condition (inline JSON or a file path).
        #[arg(long)]
        condition: String,
        #[arg(long)]
        path: String,
        #[arg(long, default_value_t = 32)]
        depth: usize,
    },
}

#[derive(Args)]
struct VerifyArgs {
    /// Suite selector: `all`, a suite name, or empty for an empty report.
    #[arg(long, default_value = "all")]
    suite: String,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    pairs: Option<usize>,
    #[arg(long)]
    instances: Option<usize>,
    #[arg(long)]
    stages: Option<u64>,
    #[arg(long)]
    rounds: Option<u64>,
    #[arg(long)]
    budget: Option<u64>,
}

struct CliError {
    code: i32,
    message: String,
}

enum Output {
    Json(Value),
    Text(String),
}

/// Global flags threaded into the handlers.
struct Ctx {
    seed: Option<u64>,
    format: OutputFormat,
}

impl Ctx {
    /// A subcommand's own seed wins; then the global one; then 7.
    fn seed(&self, per_command: Option<u64>) -> u64 {
        per_command.or(self.seed).unwrap_or(7)
    }
}

impl From<Value> for Output {
    fn from(v: Value) -> Self {
        Output::Json(v)
    }
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        CliError { code: EXIT_USAGE, message: message.into() }
    }
}

type CliResult = Result<Output, CliError>;

fn parse_bits(s: &str) -> Result<Vec<u8>, CliError> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            _ => Err(CliError::usage(format!("payload must be a '0'/'1' string, found {c:?}"))),
        })
        .collect()
}

/// Inline JSON or a path to a JSON file.
fn read_json_arg(arg: &str) -> Result<Value, CliError> {
    let trimmed = arg.trim_start();
    if trimmed.starts_with('{') || trimmed.starts_with('[') {
        serde_json::from_str(arg).map_err(|e| CliError::usage(format!("bad JSON argument: {e}")))
    } else {
        let text = std::fs::read_to_string(arg)
            .map_err(|e| CliError::usage(format!("cannot read {arg}: {e}")))?;
        serde_json::from_str(&text).map_err(|e| CliError::usage(format!("bad JSON in {arg}: {e}")))
    }
}

fn parse_descriptor(arg: &str) -> Result<GenDescriptor, CliError> {
    serde_json::from_value(read_json_arg(arg)?)
        .map_err(|e| CliError::usage(format!("bad generator descriptor: {e}")))
}

fn ceer_code(e: &CeerError) -> i32 {
    match e {
        CeerError::BudgetExhausted { .. } => EXIT_BUDGET,
        CeerError::InternalContradiction { .. } => EXIT_CONTRADICTION,
        _ => EXIT_USAGE,
    }
}

fn run_ceer(action: CeerAction, ctx: &Ctx) -> CliResult {
    match action {
        CeerAction::Adjacent { ceer, x, y, dot } => {
            let ceer = build_ceer(&parse_descriptor(&ceer)?)
                .map_err(|e| CliError::usage(e.to_string()))?;
            let (answer, graph) = adjacent(&ceer, x, y)
                .map_err(|e| CliError { code: ceer_code(&e), message: e.to_string() })?;
            if let Some(path) = dot {
                std::fs::write(&path, graph.to_dot())
                    .map_err(|e| CliError::usage(format!("cannot write {}: {e}", path.display())))?;
            }
            if ctx.format == OutputFormat::Dot {
                return Ok(Output::Text(graph.to_dot()));
            }
            let certificate = graph.certificate(x, y);
            Ok(json!({
                "adjacent": answer,
                "certificate": certificate,
                "witness_graph": graph,
            })
            .into())
        }
        CeerAction::Connect { ceer, x, y, budget } => {
            let ceer = build_ceer(&parse_descriptor(&ceer)?)
                .map_err(|e| CliError::usage(e.to_string()))?;
            let midpoint = connect(&ceer, x, y, budget)
                .map_err(|e| CliError { code: ceer_code(&e), message: e.to_string() })?;
            Ok(json!({ "midpoint": midpoint }).into())
        }
        CeerAction::Verify { ceer, pairs, budget, seed } => {
            let ceer = build_ceer(&parse_descriptor(&ceer)?)
                .map_err(|e| CliError::usage(e.to_string()))?;
            let results = check_ceer_diameter(&ceer, pairs, budget, ctx.seed(seed));
            let all_pass = results.iter().all(|r| r.status == Status::Pass);
            let out = json!({ "results": results, "all_pass": all_pass });
            if all_pass {
                Ok(out.into())
            } else {
                Err(CliError { code: EXIT_CONTRADICTION, message: out.to_string() })
            }
        }
    }
}

fn run_lo(action: LoAction, ctx: &Ctx) -> CliResult {
    match action {
        LoAction::Encode { order, payload, prefix } => {
            let base = build_order(&parse_descriptor(&order)?)
                .map_err(|e| CliError::usage(e.to_string()))?;
            let payload = BitStream::from_bits(parse_bits(&payload)?);
            let (encoded, f) = encode_order(&base, &payload);
            let iso: Vec<u64> = (0..prefix).map(|n| f.apply(n)).collect();
            let readback: String = (0..prefix / 2)
                .map(|n| if decode_payload(&encoded, n) == 0 { '0' } else { '1' })
                .collect();
            Ok(json!({
                "encoded_order_table": encoded.materialize_prefix(prefix),
                "isomorphism": iso,
                "coded_bits": readback,
            })
            .into())
        }
        LoAction::Decode { order_table, bits } => {
            let table: OrderTable = serde_json::from_value(read_json_arg(&order_table)?)
                .map_err(|e| CliError::usage(format!("bad order table: {e}")))?;
            if table.bound < 2 * bits {
                return Err(CliError::usage(format!(
                    "table bound {} too small for {bits} coded bits (needs {})",
                    table.bound,
                    2 * bits
                )));
            }
            let order = table.oracle();
            let coded: Vec<u8> = (0..bits).map(|n| decode_payload(&order, n)).collect();
            let render = |bits: &[u8]| -> String {
                bits.iter().map(|&b| if b == 0 { '0' } else { '1' }).collect()
            };
            let payload: Vec<u8> = coded.iter().copied().step_by(2).collect();
            let base_code: Vec<u8> = coded.iter().copied().skip(1).step_by(2).collect();
            Ok(json!({
                "coded_bits": render(&coded),
                "payload_bits": render(&payload),
                "base_code_bits": render(&base_code),
            })
            .into())
        }
        LoAction::Verify { seeds, prefix, seed } => {
            let mut config = RunConfig::with_seed(ctx.seed(seed));
            config.instances = seeds;
            config.prefix = prefix;
            report_result(run_suite("lo-roundtrip", &config))
        }
    }
}

fn run_struct(action: StructAction) -> CliResult {
    match action {
        StructAction::Encode { structure, payload, stages, budget } => {
            let m = build_structure(&parse_descriptor(&structure)?)
                .map_err(|e| CliError::usage(e.to_string()))?;
            let payload = BitStream::from_bits(parse_bits(&payload)?);
            let encoding = encode_structure(&m, &payload, stages, budget).map_err(|e| {
                let code = match e {
                    StructEncodeError::TrivialityDetected { .. } => EXIT_BUDGET,
                    StructEncodeError::CertificationFailed { .. } => EXIT_CONTRADICTION,
                };
                CliError { code, message: e.to_string() }
            })?;
            Ok(serde_json::to_value(&encoding).expect("encoding serializes").into())
        }
        StructAction::Decode { table, stages, budget } => {
            let table: StructTable = serde_json::from_value(read_json_arg(&table)?)
                .map_err(|e| CliError::usage(format!("bad structure table: {e}")))?;
            let decoding = decode_structure(&table, stages, budget).map_err(|e| {
                let code = match e {
                    StructDecodeError::RecordMismatch { .. } => EXIT_CONTRADICTION,
                    _ => EXIT_BUDGET,
                };
                CliError { code, message: e.to_string() }
            })?;
            Ok(serde_json::to_value(&decoding).expect("decoding serializes").into())
        }
        StructAction::TrivialCheck { structure, f, budget } => {
            let m = build_structure(&parse_descriptor(&structure)?)
                .map_err(|e| CliError::usage(e.to_string()))?;
            let params: Vec<u64> = if f.is_empty() {
                Vec::new()
            } else {
                f.split(',')
                    .map(|p| p.trim().parse())
                    .collect::<Result<_, _>>()
                    .map_err(|e| CliError::usage(format!("bad parameter list: {e}")))?
            };
            let verdict = match is_trivial_within(&m, &params, budget) {
                TrivialityVerdict::NonTrivialWitness {
                    formula_index,
                    formula,
                    true_tuple,
                    false_tuple,
                } => json!({
                    "verdict": "non-trivial",
                    "formula_index": formula_index,
                    "formula": formula.render(m.signature()),
                    "true_tuple": true_tuple,
                    "false_tuple": false_tuple,
                }),
                TrivialityVerdict::NoWitnessWithinBudget(e) => json!({
                    "verdict": "no-witness-within-budget",
                    "evals_used": e.evals_used,
                    "formulas_scanned": e.formulas_scanned,
                }),
            };
            Ok(verdict.into())
        }
    }
}

fn parse_selectors(names: &str, x: &BitStream) -> Result<Vec<DenseSelector>, CliError> {
    names
        .split(',')
        .map(|name| match name.trim() {
            "identity" => Ok(DenseSelector::identity()),
            "label-beside" => Ok(DenseSelector::label_beside(x, 1)),
            "decide-label-parity" => Ok(DenseSelector::decide_label_parity()),
            "path-violator" => Ok(DenseSelector::path_violator(x)),
            other => Err(CliError::usage(format!("unknown selector {other:?}"))),
        })
        .collect()
}

fn run_ks(action: KsAction) -> CliResult {
    match action {
        KsAction::Encode { payload, path, rounds, diff_budget, selectors } => {
            let x = build_stream(&parse_descriptor(&path)?)
                .map_err(|e| CliError::usage(e.to_string()))?;
            let payload = BitStream::from_bits(parse_bits(&payload)?);
            let selectors = parse_selectors(&selectors, &x)?;
            let generic =
                build_generic(&KsCondition::empty(), &selectors, &x, &payload, rounds, diff_budget)
                    .map_err(|e| {
                        let code = match e {
                            KsError::DiffBudgetExhausted { .. } => EXIT_BUDGET,
                            KsError::SelectorContractViolation { .. } => EXIT_CONTRADICTION,
                            _ => EXIT_USAGE,
                        };
                        CliError { code, message: e.to_string() }
                    })?;
            let depth = generic.labeled_depth().unwrap_or(0);
            let chain: Vec<_> = generic.chain().iter().map(|c| c.view()).collect();
            Ok(json!({
                "labels_along_path": eval_labels(&generic, &x, depth),
                "final_depth": generic.labeled_depth(),
                "chain": chain,
            })
            .into())
        }
        KsAction::Eval { condition, path, depth } => {
            let condition = condition_from_json(&read_json_arg(&condition)?)
                .map_err(|e| CliError::usage(e.to_string()))?;
            let x = build_stream(&parse_descriptor(&path)?)
                .map_err(|e| CliError::usage(e.to_string()))?;
            Ok(json!({ "labels": eval_labels(&condition, &x, depth) }).into())
        }
    }
}

fn run_verify(args: VerifyArgs, ctx: &Ctx) -> CliResult {
    let mut config = RunConfig::with_seed(ctx.seed(args.seed));
    if let Some(p) = args.pairs {
        config.pairs = p;
    }
    if let Some(i) = args.instances {
        config.instances = i;
    }
    if let Some(s) = args.stages {
        config.stages = s;
    }
    if let Some(r) = args.rounds {
        config.rounds = r;
    }
    if let Some(b) = args.budget {
        config.struct_budget = b;
    }
    report_result(run_suite(&args.suite, &config))
}

/// A report with a failing property is an implementation contradiction.
fn report_result(report: Report) -> CliResult {
    let all_pass = report.all_pass();
    let mut value = serde_json::to_value(&report).expect("report serializes");
    let millis = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0);
    value
        .as_object_mut()
        .expect("report is an object")
        .insert("timestamp_ms".into(), json!(millis));
    if all_pass {
        Ok(value.into())
    } else {
        Err(CliError { code: EXIT_CONTRADICTION, message: value.to_string() })
    }
}

fn write_output(out: &Option<PathBuf>, output: &Output) -> Result<(), CliError> {
    let rendered = match output {
        Output::Json(value) => serde_json::to_string_pretty(value).expect("JSON renders"),
        Output::Text(text) => text.trim_end().to_string(),
    };
    // Tolerate a closed pipe: downstream consumers may stop reading early.
    let mut stdout = std::io::stdout().lock();
    let _ = writeln!(stdout, "{rendered}");
    if let Some(path) = out {
        std::fs::write(path, rendered.as_bytes())
            .map_err(|e| CliError::usage(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}

/// Parses and runs one invocation; returns the process exit code.
pub fn dispatch<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // Let clap print its own help/version output; everything else
            // is a usage error.
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
    };
    let ctx = Ctx { seed: cli.seed, format: cli.format };
    let result = match cli.command {
        Command::CeerGraph { action } => run_ceer(action, &ctx),
        Command::LoCode { action } => run_lo(action, &ctx),
        Command::StructCode { action } => run_struct(action),
        Command::KsForce { action } => run_ks(action),
        Command::Verify(args) => run_verify(args, &ctx),
    };
    match result {
        Ok(value) => match write_output(&cli.out, &value) {
            Ok(()) => EXIT_OK,
            Err(e) => {
                let _ = writeln!(std::io::stderr(), "{}", e.message);
                e.code
            }
        },
        Err(e) => {
            let _ = writeln!(std::io::stderr(), "{}", e.message);
            e.code
        }
    }
}
