//! Parameter sweeps: rerun the advisor once per value of one variable and
//! tabulate the outcome. Each row is exactly what a standalone `advise`
//! with that value would produce; the driver holds no state across rows.

use serde::Serialize;

use bji_core::catalog::SchemaCatalog;
use bji_core::selector::ObjectiveKind;

use crate::pipeline::{advise, AdviseOptions, PipelineError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    Minsup,
    Budget,
    Alpha,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub candidates: usize,
    pub selected: usize,
    pub total_bytes: u64,
    pub workload_cost: f64,
    /// final cost / baseline cost; 1.0 on an empty workload.
    pub cost_ratio: f64,
}

#[derive(Debug, thiserror::Error)]
pub enum SweepError {
    #[error("sweep value {value}: {source}")]
    Run {
        value: f64,
        #[source]
        source: PipelineError,
    },
    #[error("alpha sweeps need a hybrid objective")]
    AlphaNeedsHybrid,
    #[error("budget sweep value {value} is not a non-negative whole byte count")]
    FractionalBudget { value: f64 },
}

fn with_value(
    base: &AdviseOptions,
    variable: SweepVariable,
    value: f64,
) -> Result<AdviseOptions, SweepError> {
    let mut opts = base.clone();
    match variable {
        SweepVariable::Minsup => opts.minsup = value,
        SweepVariable::Budget => {
            if value < 0.0 || value.fract() != 0.0 || value > u64::MAX as f64 {
                return Err(SweepError::FractionalBudget { value });
            }
            let b = value as u64;
            opts.objective = match opts.objective {
                ObjectiveKind::Profit { .. } => ObjectiveKind::Profit {
                    budget_bytes: Some(b),
                },
                ObjectiveKind::Ratio { .. } => ObjectiveKind::Ratio { budget_bytes: b },
                ObjectiveKind::Hybrid { alpha, .. } => ObjectiveKind::Hybrid {
                    budget_bytes: b,
                    alpha,
                },
            };
        }
        SweepVariable::Alpha => match opts.objective {
            ObjectiveKind::Hybrid { budget_bytes, .. } => {
                opts.objective = ObjectiveKind::Hybrid {
                    budget_bytes,
                    alpha: value,
                };
            }
            _ => return Err(SweepError::AlphaNeedsHybrid),
        },
    }
    Ok(opts)
}

/// One advisor run per value, in the given order.
pub fn run_sweep(
    sql: &str,
    cat: &SchemaCatalog,
    base: &AdviseOptions,
    variable: SweepVariable,
    values: &[f64],
) -> Result<Vec<SweepRow>, SweepError> {
    let mut rows = Vec::with_capacity(values.len());
    for &value in values {
        let opts = with_value(base, variable, value)?;
        let run = advise(sql, cat, &opts).map_err(|source| SweepError::Run { value, source })?;
        let baseline = run.baseline.ios;
        let final_cost = run.configuration.final_cost.ios;
        rows.push(SweepRow {
            value,
            candidates: run.candidates.candidates.len(),
            selected: run.configuration.selected.len(),
            total_bytes: run.configuration.total_bytes,
            workload_cost: final_cost,
            cost_ratio: if baseline > 0.0 {
                final_cost / baseline
            } else {
                1.0
            },
        });
    }
    Ok(rows)
}

pub fn to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("value,candidates,selected,total_bytes,workload_cost,cost_ratio\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.value, r.candidates, r.selected, r.total_bytes, r.workload_cost, r.cost_ratio
        ));
    }
    out
}

pub fn to_json(rows: &[SweepRow]) -> String {
    let mut text = serde_json::to_string_pretty(rows).expect("sweep rows serialize");
    text.push('\n');
    text
}
