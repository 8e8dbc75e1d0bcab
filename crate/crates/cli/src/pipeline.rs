//! Pipeline orchestration: parse the workload, validate it against the
//! catalog, mine closed itemsets, assemble candidates, and run the greedy
//! selection. Every stage is a pure function of its inputs, so identical
//! inputs always produce identical runs.

use bji_core::candidates::{build_candidate_set, CandidateOptions, CandidateSet, Rejection};
use bji_core::catalog::SchemaCatalog;
use bji_core::closeminer::{mine_closed, FrequentClosedItemset, MinerError};
use bji_core::costmodel::{query_cost, workload_cost, IoCost, QueryCostBreakdown};
use bji_core::selector::{
    greedy_select, IndexConfiguration, ObjectiveKind, SelectorError, SelectorOptions,
};
use bji_core::sqlparse::{
    analyze_query, parse_workload, parse_workload_lenient, AnalyzeError, AnalyzeOptions,
    ParseError, QueryAttributeMatrix, QueryProfile, SkippedStatement,
};

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("workload: {0}")]
    Parse(#[from] ParseError),
    #[error("workload: {0}")]
    Analyze(#[from] AnalyzeError),
    #[error("mining: {0}")]
    Mine(#[from] MinerError),
    #[error("selection: {0}")]
    Select(#[from] SelectorError),
}

/// Parsed and validated workload plus its query-attribute matrix.
#[derive(Debug, Clone)]
pub struct WorkloadAnalysis {
    pub profiles: Vec<QueryProfile>,
    pub matrix: QueryAttributeMatrix,
    /// Statements outside the grammar, skipped under lenient parsing.
    pub skipped_statements: Vec<SkippedStatement>,
    /// Queries dropped under lenient analysis (non-star joins).
    pub dropped_queries: Vec<AnalyzeError>,
}

/// Parses and validates the workload text. Strict mode fails on the first
/// unsupported statement; lenient mode skips unknown constructs and drops
/// queries with non-star joins, recording both. Unknown attributes of known
/// tables are always fatal: they mean the catalog and workload disagree.
pub fn analyze_workload_text(
    sql: &str,
    cat: &SchemaCatalog,
    lenient: bool,
    keys_from_metadata: bool,
) -> Result<WorkloadAnalysis, PipelineError> {
    let aopts = AnalyzeOptions {
        include_join_keys: !keys_from_metadata,
    };
    let (queries, skipped_statements) = if lenient {
        let lp = parse_workload_lenient(sql)?;
        (lp.queries, lp.skipped)
    } else {
        (parse_workload(sql)?, Vec::new())
    };
    let mut profiles = Vec::new();
    let mut dropped_queries = Vec::new();
    for q in &queries {
        match analyze_query(q, cat, &aopts) {
            Ok(p) => profiles.push(p),
            Err(e @ AnalyzeError::UnsupportedJoin { .. }) if lenient => dropped_queries.push(e),
            Err(e) => return Err(e.into()),
        }
    }
    let matrix = QueryAttributeMatrix::from_profiles(&profiles);
    Ok(WorkloadAnalysis {
        profiles,
        matrix,
        skipped_statements,
        dropped_queries,
    })
}

#[derive(Debug, Clone)]
pub struct AdviseOptions {
    pub minsup: f64,
    pub objective: ObjectiveKind,
    pub selector: SelectorOptions,
    pub lenient: bool,
    pub keys_from_metadata: bool,
}

/// One full advisor run, every stage's output retained for reporting.
#[derive(Debug, Clone)]
pub struct AdvisorRun {
    pub analysis: WorkloadAnalysis,
    pub itemsets: Vec<FrequentClosedItemset>,
    pub candidates: CandidateSet,
    pub rejections: Vec<Rejection>,
    pub configuration: IndexConfiguration,
    pub baseline: IoCost,
    pub per_query: Vec<QueryCostBreakdown>,
}

/// Mines the matrix and assembles candidates; shared by every subcommand
/// that looks past parsing.
pub fn mine_candidates(
    analysis: &WorkloadAnalysis,
    cat: &SchemaCatalog,
    minsup: f64,
    keys_from_metadata: bool,
) -> Result<(Vec<FrequentClosedItemset>, CandidateSet, Vec<Rejection>), PipelineError> {
    let itemsets = mine_closed(&analysis.matrix, minsup)?;
    let copts = CandidateOptions {
        witness_from_metadata: keys_from_metadata,
    };
    let (candidates, rejections) = build_candidate_set(&itemsets, &analysis.matrix, cat, &copts);
    Ok((itemsets, candidates, rejections))
}

/// Runs the advisor end to end.
pub fn advise(
    sql: &str,
    cat: &SchemaCatalog,
    opts: &AdviseOptions,
) -> Result<AdvisorRun, PipelineError> {
    let analysis = analyze_workload_text(sql, cat, opts.lenient, opts.keys_from_metadata)?;
    let (itemsets, candidates, rejections) =
        mine_candidates(&analysis, cat, opts.minsup, opts.keys_from_metadata)?;
    let configuration = greedy_select(
        &candidates,
        &analysis.profiles,
        cat,
        &opts.objective,
        &opts.selector,
    )?;
    let baseline = workload_cost(&analysis.profiles, &[], cat);
    let per_query = analysis
        .profiles
        .iter()
        .map(|q| query_cost(q, &configuration.selected, cat))
        .collect();
    Ok(AdvisorRun {
        analysis,
        itemsets,
        candidates,
        rejections,
        configuration,
        baseline,
        per_query,
    })
}
