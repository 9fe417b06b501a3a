use std::fs::{self, File};
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use xolap::bench::{generate, BenchFile, ComplexityKind, GeneratorConfig};
use xolap::model::{parse_warehouse_from, serialize_warehouse, validate_summarizability, MDDataTree, WarehouseSchema};
use xolap::pattern::{parse_query, TreePatternQuery};
use xolap::pedersen::{normalize, NormalizationPlan};
use xolap::qbs::{qbs_with, rollup_with, QbsOptions};

#[derive(Parser)]
#[command(name = "xolap", version, about = "OLAP grouping over XML warehouses with complex hierarchies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic sales warehouse.
    Generate(GenerateArgs),
    /// Report non-strict and incomplete hierarchy sites.
    Validate(InputArgs),
    /// Group a warehouse by one query.
    Query(QueryArgs),
    /// Chain several queries, each grouping the previous result.
    Rollup(QueryArgs),
    /// Fill skipped levels with placeholders and fuse multiple parents.
    Normalize(NormalizeArgs),
    /// Time grouping against normalize-then-group.
    Bench(BenchArgs),
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, default_value_t = 1000)]
    facts: usize,
    #[arg(long, default_value = "none")]
    kind: String,
    #[arg(long, default_value_t = 0)]
    pct: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Warehouse XML destination (stdout if absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Where to write the matching schema file.
    #[arg(long)]
    schema: Option<PathBuf>,
    /// Where to write the injection ledger.
    #[arg(long)]
    emit_ledger: Option<PathBuf>,
}

#[derive(Args)]
struct InputArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    schema: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct QueryArgs {
    #[command(flatten)]
    io: InputArgs,
    /// Query file; repeat for roll-up stages.
    #[arg(long = "q", required = true)]
    queries: Vec<PathBuf>,
    /// Find groups by scanning instead of hashing.
    #[arg(long)]
    linear_scan: bool,
}

#[derive(Args)]
struct NormalizeArgs {
    #[command(flatten)]
    io: InputArgs,
    /// Where to write one line per inserted node.
    #[arg(long)]
    emit_ledger: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    /// Bad invocation: unreadable inputs or unwritable outputs.
    Usage(String),
    Domain(xolap::Error),
}

impl From<xolap::Error> for Failure {
    fn from(e: xolap::Error) -> Self {
        Failure::Domain(e)
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(a) => run_generate(a),
        Command::Validate(a) => run_validate(a),
        Command::Query(a) => run_query(a, false),
        Command::Rollup(a) => run_query(a, true),
        Command::Normalize(a) => run_normalize(a),
        Command::Bench(a) => run_bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Domain(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

fn load(io: &InputArgs) -> Result<(MDDataTree, WarehouseSchema), Failure> {
    let schema = WarehouseSchema::parse(&read_text(&io.schema)?)?;
    let file = File::open(&io.input)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", io.input.display())))?;
    let tree = parse_warehouse_from(BufReader::new(file), &schema)?;
    Ok((tree, schema))
}

fn write_to(path: Option<&Path>, bytes: &[u8]) -> Outcome {
    let result = match path {
        Some(p) => fs::write(p, bytes),
        None => io::stdout().lock().write_all(bytes),
    };
    result.map_err(|e| {
        let target = path.map_or("stdout".to_string(), |p| p.display().to_string());
        Failure::Usage(format!("cannot write {target}: {e}"))
    })
}

fn run_generate(a: GenerateArgs) -> Outcome {
    let kind: ComplexityKind = a.kind.parse()?;
    let config = GeneratorConfig::xweb(a.facts, kind, a.pct, a.seed);
    let (tree, ledger) = generate(&config)?;
    if let Some(p) = &a.schema {
        write_to(Some(p), config.schema()?.to_toml().as_bytes())?;
    }
    if let Some(p) = &a.emit_ledger {
        write_to(Some(p), ledger.to_string().as_bytes())?;
    }
    eprintln!("generated {} facts, {} injections", tree.fact_count(), ledger.records.len());
    write_to(a.out.as_deref(), &serialize_warehouse(&tree))
}

fn run_validate(a: InputArgs) -> Outcome {
    let (tree, schema) = load(&a)?;
    let report = validate_summarizability(&tree, &schema);
    write_to(a.out.as_deref(), report.to_string().as_bytes())
}

fn run_query(a: QueryArgs, chained: bool) -> Outcome {
    let (tree, schema) = load(&a.io)?;
    let queries = a
        .queries
        .iter()
        .map(|p| Ok(parse_query(&read_text(p)?, &schema)?))
        .collect::<Result<Vec<TreePatternQuery>, Failure>>()?;
    let options = QbsOptions { linear_scan: a.linear_scan };
    let out = if chained {
        rollup_with(&tree, &queries, &schema, options)?
    } else {
        let [query] = &queries[..] else {
            return Err(Failure::Usage("`query` takes exactly one --q; use `rollup` to chain".into()));
        };
        let (out, t) = qbs_with(&tree, query, &schema, options)?;
        eprintln!(
            "{} groups; summarizability {:?}, matching {:?}, total {:?}",
            out.fact_count(),
            t.summarizability,
            t.matching,
            t.total()
        );
        out
    };
    write_to(a.io.out.as_deref(), &serialize_warehouse(&out))
}

fn run_normalize(a: NormalizeArgs) -> Outcome {
    let (tree, schema) = load(&a.io)?;
    let plan = NormalizationPlan::default();
    plan.check(&schema)?;
    let (out, ledger) = normalize(&tree, &schema, plan);
    if let Some(p) = &a.emit_ledger {
        write_to(Some(p), ledger.to_string().as_bytes())?;
    }
    write_to(a.io.out.as_deref(), &serialize_warehouse(&out))
}

fn run_bench(a: BenchArgs) -> Outcome {
    let file = BenchFile::parse(&read_text(&a.config)?)?;
    let report = file.run()?;
    for ((config, query, mode, phase), ms) in report.medians() {
        eprintln!("{config} {query} {} {} median {ms:.3} ms", mode.as_str(), phase.as_str());
    }
    write_to(a.out.as_deref(), report.to_csv().as_bytes())
}
