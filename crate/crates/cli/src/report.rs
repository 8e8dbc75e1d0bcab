//! Report assembly and rendering. The JSON document is the machine-readable
//! contract: `{inputs, matrix, itemsets, candidates, rejected, configuration,
//! per_query, maintenance}` plus a `generated_at_unix` stamp that `--stable`
//! omits so identical runs serialize byte-identically.

use serde::Serialize;

use bji_core::candidates::{CandidateIndex, Rejection};
use bji_core::catalog::SchemaCatalog;
use bji_core::closeminer::FrequentClosedItemset;
use bji_core::costmodel::{
    index_size_bytes, maintenance_dimension_insert, maintenance_fact_insert, QueryCostBreakdown,
};
use bji_core::selector::ObjectiveKind;
use bji_core::sqlparse::QueryAttributeMatrix;

use crate::pipeline::AdvisorRun;
use crate::synth::STAND_IN_MARKER;

/// Inputs echoed into the report verbatim.
#[derive(Debug, Clone, Serialize)]
pub struct InputsDoc {
    pub workload: String,
    pub schema: String,
    pub minsup: f64,
    pub objective: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub budget_bytes: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    pub maintenance_weight: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_per_table: Option<u32>,
    pub lenient: bool,
    pub keys_from_metadata: bool,
    /// True when the workload file carries the synthetic stand-in marker.
    pub synthetic_stand_in: bool,
}

impl InputsDoc {
    pub fn new(
        workload_path: &str,
        schema_path: &str,
        workload_sql: &str,
        minsup: f64,
        objective: &ObjectiveKind,
        maintenance_weight: f64,
        max_per_table: Option<u32>,
        lenient: bool,
        keys_from_metadata: bool,
    ) -> InputsDoc {
        let (name, budget_bytes, alpha) = match *objective {
            ObjectiveKind::Profit { budget_bytes } => ("profit", budget_bytes, None),
            ObjectiveKind::Ratio { budget_bytes } => ("ratio", Some(budget_bytes), None),
            ObjectiveKind::Hybrid { budget_bytes, alpha } => {
                ("hybrid", Some(budget_bytes), Some(alpha))
            }
        };
        InputsDoc {
            workload: workload_path.to_string(),
            schema: schema_path.to_string(),
            minsup,
            objective: name.to_string(),
            budget_bytes,
            alpha,
            maintenance_weight,
            max_per_table,
            lenient,
            keys_from_metadata,
            synthetic_stand_in: workload_sql.contains(STAND_IN_MARKER),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MatrixDoc {
    pub rows: usize,
    pub cols: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ItemsetDoc {
    pub attributes: Vec<String>,
    pub support: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CandidateDoc {
    pub id: String,
    pub on: Vec<String>,
    pub from: Vec<String>,
    #[serde(rename = "where")]
    pub where_: Vec<String>,
    pub cardinality: u64,
    pub size_bytes: u64,
    pub support: f64,
}

impl CandidateDoc {
    fn new(c: &CandidateIndex, cat: &SchemaCatalog) -> CandidateDoc {
        let fact = &c.from_tables[0];
        CandidateDoc {
            id: c.id.clone(),
            on: c.on_attributes.iter().map(ToString::to_string).collect(),
            from: c.from_tables.clone(),
            where_: c
                .join_predicates
                .iter()
                .map(|e| {
                    format!(
                        "{fact}.{} = {}.{}",
                        e.fact_attribute, e.dimension, e.dimension_attribute
                    )
                })
                .collect(),
            cardinality: c.combined_cardinality,
            size_bytes: index_size_bytes(c, cat),
            support: c.support(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RejectionDoc {
    pub attributes: Vec<String>,
    pub support: f64,
    pub reason: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceDoc {
    pub index_id: String,
    pub objective_value: f64,
    pub workload_cost_after: f64,
    pub cumulative_bytes: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConfigurationDoc {
    pub selected: Vec<CandidateDoc>,
    pub trace: Vec<TraceDoc>,
    pub total_bytes: u64,
    pub baseline_cost: f64,
    pub final_cost: f64,
    /// (baseline - final) / baseline; zero on an empty workload.
    pub saving_ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PerQueryDoc {
    pub query: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chosen: Option<String>,
    pub index_access: f64,
    pub residual_joins: f64,
    pub baseline: f64,
    pub total: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MaintenanceDoc {
    pub index: String,
    pub size_bytes: u64,
    pub fact_insert: f64,
    pub dimension_insert: f64,
    pub dimension_insert_expanding: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generated_at_unix: Option<u64>,
    pub inputs: InputsDoc,
    pub matrix: MatrixDoc,
    pub itemsets: Vec<ItemsetDoc>,
    pub candidates: Vec<CandidateDoc>,
    pub rejected: Vec<RejectionDoc>,
    pub configuration: ConfigurationDoc,
    pub per_query: Vec<PerQueryDoc>,
    pub maintenance: Vec<MaintenanceDoc>,
}

pub fn itemset_docs(
    itemsets: &[FrequentClosedItemset],
    matrix: &QueryAttributeMatrix,
) -> Vec<ItemsetDoc> {
    itemsets
        .iter()
        .map(|s| ItemsetDoc {
            attributes: s
                .itemset
                .items()
                .iter()
                .map(|&i| matrix.columns()[i].to_string())
                .collect(),
            support: s.support,
        })
        .collect()
}

pub fn candidate_docs(candidates: &[CandidateIndex], cat: &SchemaCatalog) -> Vec<CandidateDoc> {
    candidates.iter().map(|c| CandidateDoc::new(c, cat)).collect()
}

pub fn rejection_docs(rejections: &[Rejection]) -> Vec<RejectionDoc> {
    rejections
        .iter()
        .map(|r| RejectionDoc {
            attributes: r.attributes.iter().map(ToString::to_string).collect(),
            support: r.support,
            reason: r.reason.to_string(),
        })
        .collect()
}

pub fn per_query_docs(breakdowns: &[QueryCostBreakdown]) -> Vec<PerQueryDoc> {
    breakdowns
        .iter()
        .map(|b| PerQueryDoc {
            query: b.query,
            chosen: b.chosen.clone(),
            index_access: b.index_access.ios,
            residual_joins: b.residual_joins.ios,
            baseline: b.baseline.ios,
            total: b.total.ios,
        })
        .collect()
}

pub fn maintenance_docs(selected: &[CandidateIndex], cat: &SchemaCatalog) -> Vec<MaintenanceDoc> {
    selected
        .iter()
        .map(|c| MaintenanceDoc {
            index: c.id.clone(),
            size_bytes: index_size_bytes(c, cat),
            fact_insert: maintenance_fact_insert(c, cat).ios,
            dimension_insert: maintenance_dimension_insert(c, cat, false).ios,
            dimension_insert_expanding: maintenance_dimension_insert(c, cat, true).ios,
        })
        .collect()
}

/// Assembles the full report. `generated_at_unix` is the caller's clock
/// reading, or None under `--stable`.
pub fn build_report(
    run: &AdvisorRun,
    cat: &SchemaCatalog,
    inputs: InputsDoc,
    generated_at_unix: Option<u64>,
) -> Report {
    let baseline = run.baseline.ios;
    let final_cost = run.configuration.final_cost.ios;
    let saving_ratio = if baseline > 0.0 {
        (baseline - final_cost) / baseline
    } else {
        0.0
    };
    Report {
        generated_at_unix,
        inputs,
        matrix: MatrixDoc {
            rows: run.analysis.matrix.n_rows(),
            cols: run.analysis.matrix.n_cols(),
        },
        itemsets: itemset_docs(&run.itemsets, &run.analysis.matrix),
        candidates: candidate_docs(&run.candidates.candidates, cat),
        rejected: rejection_docs(&run.rejections),
        configuration: ConfigurationDoc {
            selected: candidate_docs(&run.configuration.selected, cat),
            trace: run
                .configuration
                .trace
                .iterations
                .iter()
                .map(|t| TraceDoc {
                    index_id: t.index_id.clone(),
                    objective_value: t.objective_value,
                    workload_cost_after: t.workload_cost_after,
                    cumulative_bytes: t.cumulative_bytes,
                })
                .collect(),
            total_bytes: run.configuration.total_bytes,
            baseline_cost: baseline,
            final_cost,
            saving_ratio,
        },
        per_query: per_query_docs(&run.per_query),
        maintenance: maintenance_docs(&run.configuration.selected, cat),
    }
}

pub fn to_json(report: &Report) -> String {
    let mut text = serde_json::to_string_pretty(report).expect("report serializes");
    text.push('\n');
    text
}

/// Human rendering of the same document.
pub fn to_text(r: &Report) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    let w = &mut out;
    let _ = writeln!(w, "bitmap join index advisor");
    let _ = writeln!(
        w,
        "inputs: workload={} schema={} minsup={} objective={}{}{}",
        r.inputs.workload,
        r.inputs.schema,
        r.inputs.minsup,
        r.inputs.objective,
        r.inputs
            .budget_bytes
            .map(|b| format!(" budget={b}"))
            .unwrap_or_default(),
        r.inputs
            .alpha
            .map(|a| format!(" alpha={a}"))
            .unwrap_or_default(),
    );
    if r.inputs.synthetic_stand_in {
        let _ = writeln!(w, "note: workload is a synthetic stand-in");
    }
    let _ = writeln!(w, "matrix: {} queries x {} attributes", r.matrix.rows, r.matrix.cols);
    let _ = writeln!(w, "frequent closed itemsets: {}", r.itemsets.len());
    for s in &r.itemsets {
        let _ = writeln!(w, "  {{{}}} support {:.4}", s.attributes.join(", "), s.support);
    }
    let _ = writeln!(w, "candidates: {}", r.candidates.len());
    for c in &r.candidates {
        let _ = writeln!(
            w,
            "  {} |A|={} size={} bytes support {:.4}",
            c.id, c.cardinality, c.size_bytes, c.support
        );
    }
    if !r.rejected.is_empty() {
        let _ = writeln!(w, "rejected itemsets: {}", r.rejected.len());
        for j in &r.rejected {
            let _ = writeln!(w, "  {{{}}}: {}", j.attributes.join(", "), j.reason);
        }
    }
    let _ = writeln!(w, "selection trace:");
    for (i, t) in r.configuration.trace.iter().enumerate() {
        let _ = writeln!(
            w,
            "  {}. {} objective {:.3} cost-after {:.3} bytes {}",
            i + 1,
            t.index_id,
            t.objective_value,
            t.workload_cost_after,
            t.cumulative_bytes
        );
    }
    let _ = writeln!(
        w,
        "configuration: {} indexes, {} bytes, baseline {:.3}, final {:.3}, saving {:.2}%",
        r.configuration.selected.len(),
        r.configuration.total_bytes,
        r.configuration.baseline_cost,
        r.configuration.final_cost,
        100.0 * r.configuration.saving_ratio
    );
    let _ = writeln!(w, "per-query costs:");
    for q in &r.per_query {
        let _ = writeln!(
            w,
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
    if !r.maintenance.is_empty() {
        let _ = writeln!(w, "maintenance (I/Os per insert):");
        for m in &r.maintenance {
            let _ = writeln!(
                w,
                "  {}: fact {:.3}, dimension {:.3} (expanding {:.3})",
                m.index, m.fact_insert, m.dimension_insert, m.dimension_insert_expanding
            );
        }
    }
    out
}
