//! `bji`: command-line bitmap join index advisor.
//!
//! Exit codes: 0 success, 2 usage error, 3 parse error (workload or catalog
//! text), 4 catalog invariant violation.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use bji_cli::catalog_io::{parse_catalog, CatalogIoError};
use bji_cli::ddl::emit_ddl;
use bji_cli::pipeline::{
    advise, analyze_workload_text, mine_candidates, AdviseOptions, PipelineError, WorkloadAnalysis,
};
use bji_cli::report::{
    self, build_report, candidate_docs, itemset_docs, maintenance_docs, per_query_docs,
    rejection_docs, InputsDoc,
};
use bji_cli::sweep::{run_sweep, SweepError, SweepVariable};
use bji_cli::synth::generate_synthetic;
use bji_core::catalog::SchemaCatalog;
use bji_core::costmodel::{query_cost, workload_cost};
use bji_core::selector::{ObjectiveKind, SelectorOptions};

#[derive(Parser)]
#[command(
    name = "bji",
    version,
    about = "Bitmap join index advisor for star-schema warehouses"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full advisor and print a report.
    Advise(AdviseArgs),
    /// Mine frequent closed itemsets from the workload.
    Mine(MineArgs),
    /// Build candidate indexes from the mined itemsets.
    Candidates(MineArgs),
    /// Price candidate indexes and the workload against them.
    Cost(CostArgs),
    /// Rerun the advisor across a list of values of one parameter.
    Sweep(SweepArgs),
    /// Write a deterministic synthetic catalog and workload.
    Synth(SynthArgs),
}

#[derive(Args)]
struct InputArgs {
    /// SQL workload file.
    #[arg(long, value_name = "FILE")]
    workload: PathBuf,
    /// Catalog JSON file with table and attribute statistics.
    #[arg(long, value_name = "FILE")]
    schema: PathBuf,
    /// Skip unsupported statements and drop non-star queries instead of
    /// failing (each skip is reported on stderr).
    #[arg(long)]
    lenient: bool,
    /// Witness joins from catalog foreign keys instead of requiring key
    /// attributes in the mined itemsets.
    #[arg(long)]
    keys_from_metadata: bool,
}

#[derive(Args)]
struct ObjectiveArgs {
    /// Greedy scoring objective.
    #[arg(long, value_enum)]
    objective: ObjectiveName,
    /// Storage budget in bytes (required by ratio and hybrid).
    #[arg(long, value_name = "BYTES")]
    budget: Option<u64>,
    /// Hybrid switch point as a fraction of the budget, within [0, 1].
    #[arg(long, value_name = "R")]
    alpha: Option<f64>,
    /// Cap on selected indexes touching any one table.
    #[arg(long, value_name = "N")]
    max_per_table: Option<u32>,
    /// Subtract this multiple of fact-insert maintenance cost from profit.
    #[arg(long, value_name = "R", default_value_t = 0.0)]
    maintenance_weight: f64,
}

#[derive(Args)]
struct AdviseArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Minimum itemset support within (0, 1].
    #[arg(long, value_name = "R")]
    minsup: f64,
    #[command(flatten)]
    objective: ObjectiveArgs,
    /// Report format.
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    format: OutputFormat,
    /// Also write CREATE BITMAP INDEX statements to this file.
    #[arg(long, value_name = "PATH")]
    ddl: Option<PathBuf>,
    /// Omit the timestamp so identical runs print byte-identical reports.
    #[arg(long)]
    stable: bool,
}

#[derive(Args)]
struct MineArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Minimum itemset support within (0, 1].
    #[arg(long, value_name = "R")]
    minsup: f64,
    /// Output format.
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    format: OutputFormat,
}

#[derive(Args)]
struct CostArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Minimum itemset support within (0, 1].
    #[arg(long, value_name = "R")]
    minsup: f64,
    /// Price only these candidate ids (repeatable); default all.
    #[arg(long = "index", value_name = "ID")]
    index: Vec<String>,
    /// Output format.
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    format: OutputFormat,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Parameter to vary, one advisor run per value.
    #[arg(long, value_enum)]
    variable: SweepVarName,
    /// Comma-separated values for the swept parameter.
    #[arg(long, value_name = "V,V,...", value_delimiter = ',', required = true)]
    values: Vec<f64>,
    /// Fixed minimum support (ignored when sweeping minsup).
    #[arg(long, value_name = "R")]
    minsup: Option<f64>,
    #[command(flatten)]
    objective: ObjectiveArgs,
    /// Output format.
    #[arg(long, value_enum, default_value_t = SweepFormat::Csv)]
    format: SweepFormat,
}

#[derive(Args)]
struct SynthArgs {
    /// Random seed; the same seed always produces the same files.
    #[arg(long, value_name = "N", default_value_t = 42)]
    seed: u64,
    /// Fact-table row multiplier (scale 1 = 1,000,000 rows).
    #[arg(long, value_name = "N", default_value_t = 1)]
    scale: u64,
    /// Directory for catalog.json and workload.sql (created if missing).
    #[arg(long, value_name = "DIR")]
    out_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ObjectiveName {
    Profit,
    Ratio,
    Hybrid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Json,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SweepFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SweepVarName {
    Minsup,
    Budget,
    Alpha,
}

#[derive(Debug)]
enum CliError {
    /// Bad flags or flag combinations: exit 2.
    Usage(String),
    /// File system trouble: exit 2.
    Io(String),
    /// Workload or catalog text does not parse or validate: exit 3.
    Parse(String),
    /// Catalog violates a schema invariant: exit 4.
    Invariant(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => 2,
            CliError::Parse(_) => 3,
            CliError::Invariant(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Io(m) | CliError::Parse(m) | CliError::Invariant(m) => m,
        }
    }
}

impl From<CatalogIoError> for CliError {
    fn from(e: CatalogIoError) -> CliError {
        match e {
            CatalogIoError::Json(_) | CatalogIoError::Format(_) => {
                CliError::Parse(format!("catalog: {e}"))
            }
            CatalogIoError::Invariant(_) => CliError::Invariant(format!("catalog: {e}")),
        }
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> CliError {
        match e {
            PipelineError::Parse(_) | PipelineError::Analyze(_) => CliError::Parse(e.to_string()),
            PipelineError::Mine(_) | PipelineError::Select(_) => CliError::Usage(e.to_string()),
        }
    }
}

impl From<SweepError> for CliError {
    fn from(e: SweepError) -> CliError {
        match &e {
            SweepError::Run { source, .. } => match source {
                PipelineError::Parse(_) | PipelineError::Analyze(_) => {
                    CliError::Parse(e.to_string())
                }
                PipelineError::Mine(_) | PipelineError::Select(_) => {
                    CliError::Usage(e.to_string())
                }
            },
            SweepError::AlphaNeedsHybrid | SweepError::FractionalBudget { .. } => {
                CliError::Usage(e.to_string())
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("bji: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Advise(a) => cmd_advise(a),
        Command::Mine(a) => cmd_mine(a, false),
        Command::Candidates(a) => cmd_mine(a, true),
        Command::Cost(a) => cmd_cost(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Synth(a) => cmd_synth(a),
    }
}

fn check_minsup(minsup: f64) -> Result<(), CliError> {
    if minsup.is_finite() && 0.0 < minsup && minsup <= 1.0 {
        Ok(())
    } else {
        Err(CliError::Usage(format!(
            "--minsup {minsup} outside (0, 1]"
        )))
    }
}

/// Resolves flags to an objective. The fallbacks relax budget/alpha presence
/// for sweeps that replace them per row.
fn objective_kind(
    o: &ObjectiveArgs,
    budget_fallback: Option<u64>,
    alpha_fallback: Option<f64>,
) -> Result<ObjectiveKind, CliError> {
    if o.alpha.is_some() && o.objective != ObjectiveName::Hybrid {
        return Err(CliError::Usage(
            "--alpha applies only to the hybrid objective".to_string(),
        ));
    }
    let budget = |name: &str| {
        o.budget.or(budget_fallback).ok_or_else(|| {
            CliError::Usage(format!("the {name} objective requires --budget"))
        })
    };
    match o.objective {
        ObjectiveName::Profit => Ok(ObjectiveKind::Profit {
            budget_bytes: o.budget,
        }),
        ObjectiveName::Ratio => Ok(ObjectiveKind::Ratio {
            budget_bytes: budget("ratio")?,
        }),
        ObjectiveName::Hybrid => {
            let budget_bytes = budget("hybrid")?;
            let alpha = o.alpha.or(alpha_fallback).ok_or_else(|| {
                CliError::Usage("the hybrid objective requires --alpha".to_string())
            })?;
            if !(0.0..=1.0).contains(&alpha) {
                return Err(CliError::Usage(format!("--alpha {alpha} outside [0, 1]")));
            }
            Ok(ObjectiveKind::Hybrid { budget_bytes, alpha })
        }
    }
}

fn selector_options(o: &ObjectiveArgs) -> Result<SelectorOptions, CliError> {
    if !(o.maintenance_weight.is_finite() && o.maintenance_weight >= 0.0) {
        return Err(CliError::Usage(format!(
            "--maintenance-weight {} must be finite and non-negative",
            o.maintenance_weight
        )));
    }
    Ok(SelectorOptions {
        maintenance_weight: o.maintenance_weight,
        max_per_table: o.max_per_table,
    })
}

fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn load_catalog(path: &Path) -> Result<SchemaCatalog, CliError> {
    Ok(parse_catalog(&read_file(path)?)?)
}

fn warn_lenient(analysis: &WorkloadAnalysis) {
    for s in &analysis.skipped_statements {
        eprintln!(
            "bji: warning: skipped statement {} at offset {}: {}",
            s.statement, s.offset, s.construct
        );
    }
    for d in &analysis.dropped_queries {
        eprintln!("bji: warning: dropped query: {d}");
    }
}

fn now_unix() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn pretty(value: &serde_json::Value) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("value serializes");
    text.push('\n');
    text
}

fn cmd_advise(a: AdviseArgs) -> Result<(), CliError> {
    check_minsup(a.minsup)?;
    let objective = objective_kind(&a.objective, None, None)?;
    let selector = selector_options(&a.objective)?;
    let workload_sql = read_file(&a.input.workload)?;
    let cat = load_catalog(&a.input.schema)?;
    let opts = AdviseOptions {
        minsup: a.minsup,
        objective,
        selector,
        lenient: a.input.lenient,
        keys_from_metadata: a.input.keys_from_metadata,
    };
    let run = advise(&workload_sql, &cat, &opts)?;
    warn_lenient(&run.analysis);
    let inputs = InputsDoc::new(
        &a.input.workload.display().to_string(),
        &a.input.schema.display().to_string(),
        &workload_sql,
        a.minsup,
        &objective,
        a.objective.maintenance_weight,
        a.objective.max_per_table,
        a.input.lenient,
        a.input.keys_from_metadata,
    );
    let stamp = if a.stable { None } else { Some(now_unix()) };
    let rep = build_report(&run, &cat, inputs, stamp);
    match a.format {
        OutputFormat::Json => print!("{}", report::to_json(&rep)),
        OutputFormat::Text => print!("{}", report::to_text(&rep)),
    }
    if let Some(path) = &a.ddl {
        fs::write(path, emit_ddl(&run.configuration))
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

/// `mine` and `candidates` share everything up to what they print.
fn cmd_mine(a: MineArgs, with_candidates: bool) -> Result<(), CliError> {
    check_minsup(a.minsup)?;
    let workload_sql = read_file(&a.input.workload)?;
    let cat = load_catalog(&a.input.schema)?;
    let analysis =
        analyze_workload_text(&workload_sql, &cat, a.input.lenient, a.input.keys_from_metadata)?;
    warn_lenient(&analysis);
    let (itemsets, candidates, rejections) =
        mine_candidates(&analysis, &cat, a.minsup, a.input.keys_from_metadata)?;
    let sets = itemset_docs(&itemsets, &analysis.matrix);
    match (with_candidates, a.format) {
        (false, OutputFormat::Json) => {
            let doc = json!({
                "matrix": { "rows": analysis.matrix.n_rows(), "cols": analysis.matrix.n_cols() },
                "minsup": a.minsup,
                "itemsets": sets,
            });
            print!("{}", pretty(&doc));
        }
        (false, OutputFormat::Text) => {
            println!(
                "{} frequent closed itemsets at minsup {} ({} queries x {} attributes)",
                sets.len(),
                a.minsup,
                analysis.matrix.n_rows(),
                analysis.matrix.n_cols()
            );
            for s in &sets {
                println!("  {{{}}} support {:.4}", s.attributes.join(", "), s.support);
            }
        }
        (true, OutputFormat::Json) => {
            let doc = json!({
                "matrix": { "rows": analysis.matrix.n_rows(), "cols": analysis.matrix.n_cols() },
                "minsup": a.minsup,
                "itemsets": sets,
                "candidates": candidate_docs(&candidates.candidates, &cat),
                "rejected": rejection_docs(&rejections),
            });
            print!("{}", pretty(&doc));
        }
        (true, OutputFormat::Text) => {
            println!(
                "{} candidates from {} itemsets at minsup {}",
                candidates.candidates.len(),
                sets.len(),
                a.minsup
            );
            for c in candidate_docs(&candidates.candidates, &cat) {
                println!("  {}", c.id);
                println!("    on: {}", c.on.join(", "));
                println!("    from: {}", c.from.join(", "));
                println!("    where: {}", c.where_.join(" AND "));
                println!(
                    "    |A|={} size={} bytes support {:.4}",
                    c.cardinality, c.size_bytes, c.support
                );
            }
            for j in rejection_docs(&rejections) {
                println!("  rejected {{{}}}: {}", j.attributes.join(", "), j.reason);
            }
        }
    }
    Ok(())
}

fn cmd_cost(a: CostArgs) -> Result<(), CliError> {
    check_minsup(a.minsup)?;
    let workload_sql = read_file(&a.input.workload)?;
    let cat = load_catalog(&a.input.schema)?;
    let analysis =
        analyze_workload_text(&workload_sql, &cat, a.input.lenient, a.input.keys_from_metadata)?;
    warn_lenient(&analysis);
    let (_, candidates, _) =
        mine_candidates(&analysis, &cat, a.minsup, a.input.keys_from_metadata)?;
    let chosen: Vec<_> = if a.index.is_empty() {
        candidates.candidates.clone()
    } else {
        let mut picked = Vec::new();
        for id in &a.index {
            match candidates.candidates.iter().find(|c| &c.id == id) {
                Some(c) => picked.push(c.clone()),
                None => {
                    return Err(CliError::Usage(format!(
                        "no candidate with id '{id}' at minsup {}",
                        a.minsup
                    )))
                }
            }
        }
        picked
    };
    let baseline = workload_cost(&analysis.profiles, &[], &cat);
    let total = workload_cost(&analysis.profiles, &chosen, &cat);
    let per_query: Vec<_> = analysis
        .profiles
        .iter()
        .map(|q| query_cost(q, &chosen, &cat))
        .collect();
    match a.format {
        OutputFormat::Json => {
            let doc = json!({
                "matrix": { "rows": analysis.matrix.n_rows(), "cols": analysis.matrix.n_cols() },
                "minsup": a.minsup,
                "indexes": candidate_docs(&chosen, &cat),
                "baseline_cost": baseline.ios,
                "workload_cost": total.ios,
                "per_query": per_query_docs(&per_query),
                "maintenance": maintenance_docs(&chosen, &cat),
            });
            print!("{}", pretty(&doc));
        }
        OutputFormat::Text => {
            println!(
                "workload cost {:.3} with {} indexes (baseline {:.3})",
                total.ios,
                chosen.len(),
                baseline.ios
            );
            for q in per_query_docs(&per_query) {
                println!(
                    "  q{}: total {:.3} baseline {:.3}{}",
                    q.query,
                    q.total,
                    q.baseline,
                    q.chosen
                        .as_deref()
                        .map(|id| format!(" via {id}"))
                        .unwrap_or_default()
                );
            }
            for m in maintenance_docs(&chosen, &cat) {
                println!(
                    "  {}: size {} bytes, fact insert {:.3}, dimension insert {:.3} (expanding {:.3})",
                    m.index, m.size_bytes, m.fact_insert, m.dimension_insert,
                    m.dimension_insert_expanding
                );
            }
        }
    }
    Ok(())
}

fn cmd_sweep(a: SweepArgs) -> Result<(), CliError> {
    let variable = match a.variable {
        SweepVarName::Minsup => SweepVariable::Minsup,
        SweepVarName::Budget => SweepVariable::Budget,
        SweepVarName::Alpha => SweepVariable::Alpha,
    };
    // The swept parameter is replaced per row, so its fixed flag may be
    // absent; every other parameter keeps advise's requirements.
    let minsup = match (variable, a.minsup) {
        (SweepVariable::Minsup, _) => 1.0,
        (_, Some(m)) => m,
        (_, None) => {
            return Err(CliError::Usage(
                "--minsup is required unless sweeping minsup".to_string(),
            ))
        }
    };
    check_minsup(minsup)?;
    if variable == SweepVariable::Minsup {
        for &v in &a.values {
            check_minsup(v)?;
        }
    }
    let objective = match variable {
        SweepVariable::Budget => objective_kind(&a.objective, Some(0), None)?,
        SweepVariable::Alpha => objective_kind(&a.objective, None, Some(0.0))?,
        SweepVariable::Minsup => objective_kind(&a.objective, None, None)?,
    };
    if variable == SweepVariable::Alpha && a.objective.objective != ObjectiveName::Hybrid {
        return Err(CliError::Usage(
            "alpha sweeps need --objective hybrid".to_string(),
        ));
    }
    let selector = selector_options(&a.objective)?;
    let workload_sql = read_file(&a.input.workload)?;
    let cat = load_catalog(&a.input.schema)?;
    let base = AdviseOptions {
        minsup,
        objective,
        selector,
        lenient: a.input.lenient,
        keys_from_metadata: a.input.keys_from_metadata,
    };
    let rows = run_sweep(&workload_sql, &cat, &base, variable, &a.values)?;
    match a.format {
        SweepFormat::Csv => print!("{}", bji_cli::sweep::to_csv(&rows)),
        SweepFormat::Json => print!("{}", bji_cli::sweep::to_json(&rows)),
    }
    Ok(())
}

fn cmd_synth(a: SynthArgs) -> Result<(), CliError> {
    if a.scale < 1 {
        return Err(CliError::Usage("--scale must be at least 1".to_string()));
    }
    let files = generate_synthetic(a.seed, a.scale);
    fs::create_dir_all(&a.out_dir)
        .map_err(|e| CliError::Io(format!("{}: {e}", a.out_dir.display())))?;
    let catalog_path = a.out_dir.join("catalog.json");
    let workload_path = a.out_dir.join("workload.sql");
    fs::write(&catalog_path, &files.catalog_json)
        .map_err(|e| CliError::Io(format!("{}: {e}", catalog_path.display())))?;
    fs::write(&workload_path, &files.workload_sql)
        .map_err(|e| CliError::Io(format!("{}: {e}", workload_path.display())))?;
    println!("{}", catalog_path.display());
    println!("{}", workload_path.display());
    Ok(())
}
