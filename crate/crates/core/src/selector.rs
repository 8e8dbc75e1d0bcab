//! Objective functions and greedy construction of an index configuration.
//!
//! The loop re-evaluates every remaining candidate against the current
//! selection each iteration because indexes interact: a selected index can
//! erase another's profit by serving the same queries cheaper.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::candidates::{CandidateIndex, CandidateSet};
use crate::catalog::SchemaCatalog;
use crate::costmodel::{index_size_bytes, maintenance_fact_insert, workload_cost, IoCost};
use crate::sqlparse::QueryProfile;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ObjectiveKind {
    /// Workload-cost delta; budget optional.
    Profit { budget_bytes: Option<u64> },
    /// Profit per byte; budget required.
    Ratio { budget_bytes: u64 },
    /// Profit until used_bytes reaches alpha×budget, ratio afterwards.
    Hybrid { budget_bytes: u64, alpha: f64 },
}

impl ObjectiveKind {
    pub fn budget_bytes(&self) -> Option<u64> {
        match *self {
            ObjectiveKind::Profit { budget_bytes } => budget_bytes,
            ObjectiveKind::Ratio { budget_bytes } => Some(budget_bytes),
            ObjectiveKind::Hybrid { budget_bytes, .. } => Some(budget_bytes),
        }
    }

    fn validate(&self) -> Result<(), SelectorError> {
        if let ObjectiveKind::Hybrid { alpha, .. } = *self {
            if !(0.0..=1.0).contains(&alpha) {
                return Err(SelectorError::AlphaOutOfRange { alpha });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SelectorError {
    AlphaOutOfRange { alpha: f64 },
    InvalidMaintenanceWeight { weight: f64 },
}

impl fmt::Display for SelectorError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SelectorError::AlphaOutOfRange { alpha } => {
                write!(f, "alpha {alpha} outside [0, 1]")
            }
            SelectorError::InvalidMaintenanceWeight { weight } => {
                write!(f, "maintenance weight {weight} must be finite and non-negative")
            }
        }
    }
}

impl core::error::Error for SelectorError {}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectorOptions {
    /// Subtracted from profit as weight × fact-insert maintenance cost.
    pub maintenance_weight: f64,
    /// Cap on selected indexes touching any one table.
    pub max_per_table: Option<u32>,
}

impl Default for SelectorOptions {
    fn default() -> Self {
        SelectorOptions {
            maintenance_weight: 0.0,
            max_per_table: None,
        }
    }
}

/// Workload-cost drop from adding `i` to selection `s`. Zero when `i`
/// serves nothing better; never negative.
pub fn profit(
    i: &CandidateIndex,
    s: &[CandidateIndex],
    queries: &[QueryProfile],
    cat: &SchemaCatalog,
) -> f64 {
    let before = workload_cost(queries, s, cat).ios;
    let mut with = s.to_vec();
    if !with.iter().any(|c| c.id == i.id) {
        with.push(i.clone());
    }
    let after = workload_cost(queries, &with, cat).ios;
    (before - after).max(0.0)
}

/// Profit per byte of index storage.
pub fn ratio(
    i: &CandidateIndex,
    s: &[CandidateIndex],
    queries: &[QueryProfile],
    cat: &SchemaCatalog,
) -> f64 {
    profit(i, s, queries, cat) / index_size_bytes(i, cat).max(1) as f64
}

/// Profit while storage is plentiful, ratio once used_bytes reaches
/// alpha × budget.
#[allow(clippy::too_many_arguments)]
pub fn hybrid(
    i: &CandidateIndex,
    s: &[CandidateIndex],
    queries: &[QueryProfile],
    cat: &SchemaCatalog,
    alpha: f64,
    budget_bytes: u64,
    used_bytes: u64,
) -> f64 {
    if (used_bytes as f64) < alpha * budget_bytes as f64 {
        profit(i, s, queries, cat)
    } else {
        ratio(i, s, queries, cat)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceIteration {
    pub index_id: String,
    pub objective_value: f64,
    pub workload_cost_after: f64,
    pub cumulative_bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SelectionTrace {
    pub iterations: Vec<TraceIteration>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndexConfiguration {
    pub selected: Vec<CandidateIndex>,
    pub total_bytes: u64,
    pub final_cost: IoCost,
    pub trace: SelectionTrace,
}

/// Greedy ascent: each iteration scores every remaining candidate against
/// the current selection, picks the best positive score that fits the
/// remaining budget, and stops when none qualifies. Ties break by higher
/// score, then smaller size, then smaller id.
pub fn greedy_select(
    candidates: &CandidateSet,
    queries: &[QueryProfile],
    cat: &SchemaCatalog,
    objective: &ObjectiveKind,
    options: &SelectorOptions,
) -> Result<IndexConfiguration, SelectorError> {
    greedy_with_sizes(candidates, queries, cat, objective, options, |c| {
        index_size_bytes(c, cat)
    })
}

/// Size-injectable core so the size model can be varied under test.
fn greedy_with_sizes<F: Fn(&CandidateIndex) -> u64>(
    candidates: &CandidateSet,
    queries: &[QueryProfile],
    cat: &SchemaCatalog,
    objective: &ObjectiveKind,
    options: &SelectorOptions,
    size_of: F,
) -> Result<IndexConfiguration, SelectorError> {
    objective.validate()?;
    if !(options.maintenance_weight.is_finite() && options.maintenance_weight >= 0.0) {
        return Err(SelectorError::InvalidMaintenanceWeight {
            weight: options.maintenance_weight,
        });
    }

    let set = &candidates.candidates;
    let sizes: Vec<u64> = set.iter().map(&size_of).collect();
    let budget = objective.budget_bytes();

    let mut remaining: Vec<usize> = (0..set.len()).collect();
    let mut selected: Vec<CandidateIndex> = Vec::new();
    let mut used_bytes: u64 = 0;
    let mut current_cost = workload_cost(queries, &selected, cat).ios;
    let mut iterations: Vec<TraceIteration> = Vec::new();

    loop {
        struct Best {
            pos: usize,
            ci: usize,
            score: f64,
            size: u64,
            cost_after: f64,
        }
        let mut best: Option<Best> = None;

        for (pos, &ci) in remaining.iter().enumerate() {
            let cand = &set[ci];
            let size = sizes[ci];
            if let Some(b) = budget {
                if used_bytes.saturating_add(size) > b {
                    continue;
                }
            }
            if let Some(cap) = options.max_per_table {
                let capped = cand.from_tables.iter().any(|t| {
                    selected
                        .iter()
                        .filter(|s| s.from_tables.contains(t))
                        .count()
                        >= cap as usize
                });
                if capped {
                    continue;
                }
            }

            let mut trial = selected.clone();
            trial.push(cand.clone());
            let cost_after = workload_cost(queries, &trial, cat).ios;
            let gain = (current_cost - cost_after).max(0.0)
                - options.maintenance_weight * maintenance_fact_insert(cand, cat).ios;
            let score = match *objective {
                ObjectiveKind::Profit { .. } => gain,
                ObjectiveKind::Ratio { .. } => gain / size.max(1) as f64,
                ObjectiveKind::Hybrid {
                    budget_bytes,
                    alpha,
                } => {
                    if (used_bytes as f64) < alpha * budget_bytes as f64 {
                        gain
                    } else {
                        gain / size.max(1) as f64
                    }
                }
            };
            if !(score > 0.0) {
                continue;
            }
            let better = match &best {
                None => true,
                Some(b) => {
                    score > b.score
                        || (score == b.score
                            && (size, set[ci].id.as_str()) < (b.size, set[b.ci].id.as_str()))
                }
            };
            if better {
                best = Some(Best {
                    pos,
                    ci,
                    score,
                    size,
                    cost_after,
                });
            }
        }

        match best {
            None => break,
            Some(b) => {
                selected.push(set[b.ci].clone());
                used_bytes = used_bytes.saturating_add(b.size);
                current_cost = b.cost_after;
                iterations.push(TraceIteration {
                    index_id: set[b.ci].id.clone(),
                    objective_value: b.score,
                    workload_cost_after: b.cost_after,
                    cumulative_bytes: used_bytes,
                });
                remaining.remove(b.pos);
            }
        }
    }

    Ok(IndexConfiguration {
        selected,
        total_bytes: used_bytes,
        final_cost: IoCost::new(current_cost),
        trace: SelectionTrace { iterations },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::candidates::{build_candidate_set, CandidateOptions};
    use crate::closeminer::mine_closed;
    use crate::sqlparse::{analyze_workload, build_matrix, parse_workload, AnalyzeOptions};
    use crate::testfix::{docs_catalog, docs_workload_sql};

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} !~ {b} (tol {tol})");
    }

    struct Fix {
        cat: SchemaCatalog,
        profiles: Vec<QueryProfile>,
        set: CandidateSet,
    }

    /// minsup 2/3 keeps exactly the city and month candidates.
    fn fixture() -> Fix {
        let cat = docs_catalog();
        let queries = parse_workload(docs_workload_sql()).unwrap();
        let profiles = analyze_workload(&queries, &cat, &AnalyzeOptions::default()).unwrap();
        let m = build_matrix(&queries, &cat).unwrap();
        let itemsets = mine_closed(&m, 2.0 / 3.0).unwrap();
        let (set, _) = build_candidate_set(&itemsets, &m, &cat, &CandidateOptions::default());
        assert_eq!(set.candidates.len(), 2);
        Fix {
            cat,
            profiles,
            set,
        }
    }

    fn ids(c: &IndexConfiguration) -> Vec<&str> {
        c.selected.iter().map(|i| i.id.as_str()).collect()
    }

    const CITY_ID: &str = "Customers.city|Sales.cust_id=Customers.cust_id";
    const MONTH_ID: &str = "Times.month|Sales.time_id=Times.time_id";

    #[test]
    fn empty_candidate_set_keeps_the_baseline() {
        let f = fixture();
        let cfg = greedy_select(
            &CandidateSet::default(),
            &f.profiles,
            &f.cat,
            &ObjectiveKind::Profit { budget_bytes: None },
            &SelectorOptions::default(),
        )
        .unwrap();
        assert!(cfg.selected.is_empty());
        assert_eq!(cfg.total_bytes, 0);
        assert_eq!(cfg.final_cost.ios, 118296.0);
        assert!(cfg.trace.iterations.is_empty());
    }

    #[test]
    fn profit_objective_takes_city_then_month() {
        let f = fixture();
        let cfg = greedy_select(
            &f.set,
            &f.profiles,
            &f.cat,
            &ObjectiveKind::Profit { budget_bytes: None },
            &SelectorOptions::default(),
        )
        .unwrap();
        assert_eq!(ids(&cfg), [CITY_ID, MONTH_ID]);
        assert_eq!(cfg.total_bytes, 7_750_000);
        close(cfg.final_cost.ios, 56342.317790048124, 1e-6);

        let it = &cfg.trace.iterations;
        assert_eq!(it.len(), 2);
        close(it[0].objective_value, 42287.68220987737, 1e-6);
        close(it[0].workload_cost_after, 76008.31779012263, 1e-6);
        assert_eq!(it[0].cumulative_bytes, 6_250_000);
        close(it[1].objective_value, 19666.000000074506, 1e-6);
        close(it[1].workload_cost_after, 56342.317790048124, 1e-6);
        assert_eq!(it[1].cumulative_bytes, 7_750_000);
    }

    #[test]
    fn ratio_objective_takes_month_first() {
        let f = fixture();
        let cfg = greedy_select(
            &f.set,
            &f.profiles,
            &f.cat,
            &ObjectiveKind::Ratio {
                budget_bytes: 20_000_000,
            },
            &SelectorOptions::default(),
        )
        .unwrap();
        assert_eq!(ids(&cfg), [MONTH_ID, CITY_ID]);
        close(cfg.final_cost.ios, 56342.317790048124, 1e-6);
        let it = &cfg.trace.iterations;
        close(it[0].objective_value, 39188.0000000745 / 1_500_000.0, 1e-12);
        close(it[1].objective_value, 22765.68220987737 / 6_250_000.0, 1e-12);
    }

    #[test]
    fn hybrid_endpoints_replay_profit_and_ratio() {
        let f = fixture();
        let budget = 20_000_000;
        let profit_cfg = greedy_select(
            &f.set,
            &f.profiles,
            &f.cat,
            &ObjectiveKind::Profit { budget_bytes: None },
            &SelectorOptions::default(),
        )
        .unwrap();
        let ratio_cfg = greedy_select(
            &f.set,
            &f.profiles,
            &f.cat,
            &ObjectiveKind::Ratio {
                budget_bytes: budget,
            },
            &SelectorOptions::default(),
        )
        .unwrap();
        let h1 = greedy_select(
            &f.set,
            &f.profiles,
            &f.cat,
            &ObjectiveKind::Hybrid {
                budget_bytes: budget,
                alpha: 1.0,
            },
            &SelectorOptions::default(),
        )
        .unwrap();
        let h0 = greedy_select(
            &f.set,
            &f.profiles,
            &f.cat,
            &ObjectiveKind::Hybrid {
                budget_bytes: budget,
                alpha: 0.0,
            },
            &SelectorOptions::default(),
        )
        .unwrap();
        assert_eq!(ids(&h1), ids(&profit_cfg));
        assert_eq!(ids(&h0), ids(&ratio_cfg));
    }

    #[test]
    fn budget_is_never_exceeded() {
        let f = fixture();
        let cfg = greedy_select(
            &f.set,
            &f.profiles,
            &f.cat,
            &ObjectiveKind::Ratio {
                budget_bytes: 2_000_000,
            },
            &SelectorOptions::default(),
        )
        .unwrap();
        assert_eq!(ids(&cfg), [MONTH_ID]);
        assert_eq!(cfg.total_bytes, 1_500_000);

        let none = greedy_select(
            &f.set,
            &f.profiles,
            &f.cat,
            &ObjectiveKind::Ratio {
                budget_bytes: 1_000_000,
            },
            &SelectorOptions::default(),
        )
        .unwrap();
        assert!(none.selected.is_empty());
        assert_eq!(none.final_cost.ios, 118296.0);
    }

    #[test]
    fn heavy_maintenance_weight_suppresses_selection() {
        let f = fixture();
        let cfg = greedy_select(
            &f.set,
            &f.profiles,
            &f.cat,
            &ObjectiveKind::Profit { budget_bytes: None },
            &SelectorOptions {
                maintenance_weight: 1e6,
                max_per_table: None,
            },
        )
        .unwrap();
        assert!(cfg.selected.is_empty());
    }

    #[test]
    fn per_table_cap_limits_fact_indexes() {
        let f = fixture();
        let cfg = greedy_select(
            &f.set,
            &f.profiles,
            &f.cat,
            &ObjectiveKind::Profit { budget_bytes: None },
            &SelectorOptions {
                maintenance_weight: 0.0,
                max_per_table: Some(1),
            },
        )
        .unwrap();
        // Both candidates join through Sales; the cap stops after one.
        assert_eq!(ids(&cfg), [CITY_ID]);
    }

    #[test]
    fn profit_sequence_ignores_the_size_model() {
        let f = fixture();
        let obj = ObjectiveKind::Profit { budget_bytes: None };
        let opts = SelectorOptions::default();
        let plain = greedy_with_sizes(&f.set, &f.profiles, &f.cat, &obj, &opts, |c| {
            index_size_bytes(c, &f.cat)
        })
        .unwrap();
        let scaled = greedy_with_sizes(&f.set, &f.profiles, &f.cat, &obj, &opts, |c| {
            index_size_bytes(c, &f.cat) * 1000
        })
        .unwrap();
        assert_eq!(ids(&plain), ids(&scaled));
    }

    #[test]
    fn objective_inputs_are_validated() {
        let f = fixture();
        let opts = SelectorOptions::default();
        // A zero budget is legal and admits nothing.
        let broke =
            greedy_select(&f.set, &f.profiles, &f.cat, &ObjectiveKind::Ratio { budget_bytes: 0 }, &opts)
                .unwrap();
        assert!(broke.selected.is_empty());
        assert_eq!(broke.final_cost.ios, 118296.0);
        assert!(matches!(
            greedy_select(
                &f.set,
                &f.profiles,
                &f.cat,
                &ObjectiveKind::Hybrid {
                    budget_bytes: 10,
                    alpha: 1.5
                },
                &opts
            ),
            Err(SelectorError::AlphaOutOfRange { .. })
        ));
        assert!(matches!(
            greedy_select(
                &f.set,
                &f.profiles,
                &f.cat,
                &ObjectiveKind::Profit { budget_bytes: None },
                &SelectorOptions {
                    maintenance_weight: -1.0,
                    max_per_table: None,
                }
            ),
            Err(SelectorError::InvalidMaintenanceWeight { .. })
        ));
    }

    #[test]
    fn pure_objectives_match_hand_derivations() {
        let f = fixture();
        let city = f
            .set
            .candidates
            .iter()
            .find(|c| c.id == CITY_ID)
            .unwrap();
        let p = profit(city, &[], &f.profiles, &f.cat);
        close(p, 42287.68220987737, 1e-6);
        let r = ratio(city, &[], &f.profiles, &f.cat);
        close(r, p / 6_250_000.0, 1e-15);

        // Already selected: min unchanged, profit zero.
        assert_eq!(profit(city, &[city.clone()], &f.profiles, &f.cat), 0.0);

        let h_rich = hybrid(city, &[], &f.profiles, &f.cat, 0.5, 10_000_000, 4_000_000);
        let h_tight = hybrid(city, &[], &f.profiles, &f.cat, 0.5, 10_000_000, 6_000_000);
        close(h_rich, p, 1e-9);
        close(h_tight, r, 1e-15);
    }

    #[test]
    fn identical_inputs_reproduce_the_configuration() {
        let f = fixture();
        let obj = ObjectiveKind::Hybrid {
            budget_bytes: 8_000_000,
            alpha: 0.5,
        };
        let a = greedy_select(&f.set, &f.profiles, &f.cat, &obj, &SelectorOptions::default())
            .unwrap();
        let b = greedy_select(&f.set, &f.profiles, &f.cat, &obj, &SelectorOptions::default())
            .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn trace_costs_fall_and_bytes_grow() {
        let f = fixture();
        let cfg = greedy_select(
            &f.set,
            &f.profiles,
            &f.cat,
            &ObjectiveKind::Profit { budget_bytes: None },
            &SelectorOptions::default(),
        )
        .unwrap();
        let mut prev_cost = 118296.0;
        let mut prev_bytes = 0u64;
        for it in &cfg.trace.iterations {
            assert!(it.workload_cost_after < prev_cost);
            assert!(it.cumulative_bytes > prev_bytes);
            assert!(it.objective_value > 0.0);
            prev_cost = it.workload_cost_after;
            prev_bytes = it.cumulative_bytes;
        }
        assert_eq!(cfg.final_cost.ios, prev_cost);
    }
}
