//! Analytic I/O cost model: index storage, maintenance, b-tree-mediated
//! bitmap access, hash joins, and whole-query/workload costing.
//!
//! All costs are expressed in I/O operations. Real-valued terms stay
//! real-valued; page and node counts are ceiled because a partial page
//! still costs one read.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::candidates::CandidateIndex;
use crate::catalog::{SchemaCatalog, SystemParams};
use crate::sqlparse::{QueryProfile, RestrictionKind};

/// Non-negative, finite number of I/O operations.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct IoCost {
    pub ios: f64,
}

impl IoCost {
    pub const ZERO: IoCost = IoCost { ios: 0.0 };

    pub fn new(ios: f64) -> IoCost {
        debug_assert!(ios.is_finite() && ios >= 0.0);
        IoCost { ios }
    }
}

impl core::ops::Add for IoCost {
    type Output = IoCost;
    fn add(self, rhs: IoCost) -> IoCost {
        IoCost::new(self.ios + rhs.ios)
    }
}

impl core::ops::AddAssign for IoCost {
    fn add_assign(&mut self, rhs: IoCost) {
        self.ios += rhs.ios;
    }
}

impl fmt::Display for IoCost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.3}", self.ios)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CostError {
    /// w(A) + S_pointer exceeds the page size: no b-tree node fits.
    KeyTooWide { key_width: u64, page: u64 },
    /// Defensive: a b-tree order of 1 or less admits no search.
    DegenerateOrder { order: u64 },
    /// d outside [1, combined_cardinality].
    InvalidBitmapCount { d: u64, cardinality: u64 },
}

impl fmt::Display for CostError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CostError::KeyTooWide { key_width, page } => write!(
                f,
                "key too wide for page: key width {key_width} plus pointer exceeds page size {page}"
            ),
            CostError::DegenerateOrder { order } => {
                write!(f, "degenerate b-tree order {order}")
            }
            CostError::InvalidBitmapCount { d, cardinality } => write!(
                f,
                "bitmap count {d} outside [1, {cardinality}]"
            ),
        }
    }
}

impl core::error::Error for CostError {}

fn ceil_div(a: u64, b: u64) -> u64 {
    debug_assert!(b > 0);
    ((a as u128 + b as u128 - 1) / b as u128) as u64
}

/// Real-valued bitmap heap size in pages: |A|·|F| / (8·S_p).
fn bitmap_pages(cardinality: u64, fact_rows: u64, params: &SystemParams) -> f64 {
    (cardinality as f64) * (fact_rows as f64) / (8.0 * params.page_size_bytes as f64)
}

/// Storage footprint: ceil(|A|·|F| / 8) bytes.
pub fn index_size_bytes(i: &CandidateIndex, cat: &SchemaCatalog) -> u64 {
    let bits = i.combined_cardinality as u128 * cat.fact.row_count as u128;
    let bytes = (bits + 7) / 8;
    if bytes > u64::MAX as u128 {
        u64::MAX
    } else {
        bytes as u64
    }
}

/// Cost of one fact-table insert: probe every joined dimension for the
/// incoming tuple, then touch the bitmaps.
pub fn maintenance_fact_insert(i: &CandidateIndex, cat: &SchemaCatalog) -> IoCost {
    let dim_pages: u64 = i
        .join_predicates
        .iter()
        .filter_map(|e| cat.dimension(&e.dimension))
        .map(|t| t.page_count)
        .sum();
    IoCost::new(dim_pages as f64 + bitmap_pages(i.combined_cardinality, cat.fact.row_count, &cat.params))
}

/// Cost of one dimension-table insert: scan the fact table for joining
/// tuples, then rewrite the bitmaps; a domain expansion additionally
/// builds one new bitmap.
pub fn maintenance_dimension_insert(
    i: &CandidateIndex,
    cat: &SchemaCatalog,
    expanding: bool,
) -> IoCost {
    let xi = if expanding { 1.0 } else { 0.0 };
    IoCost::new(
        cat.fact.page_count as f64
            + (1.0 + xi) * bitmap_pages(i.combined_cardinality, cat.fact.row_count, &cat.params),
    )
}

/// B-tree order m = floor(S_p / (w(A) + S_pointer)) + 1 for the key made
/// of the given attribute widths.
pub fn btree_order(on_widths: &[u64], params: &SystemParams) -> Result<u64, CostError> {
    let key_width: u64 = on_widths.iter().fold(0u64, |a, &w| a.saturating_add(w));
    let entry = key_width.saturating_add(params.pointer_size_bytes);
    if entry > params.page_size_bytes {
        return Err(CostError::KeyTooWide {
            key_width,
            page: params.page_size_bytes,
        });
    }
    Ok(params.page_size_bytes / entry + 1)
}

/// Widths of a candidate's On attributes, in On order.
pub fn candidate_key_widths(i: &CandidateIndex, cat: &SchemaCatalog) -> Vec<u64> {
    i.on_attributes
        .iter()
        .filter_map(|a| {
            cat.dimension(&a.table)
                .and_then(|t| t.attribute(&a.attribute))
                .map(|s| s.width_bytes)
        })
        .collect()
}

/// How an index is driven by one query: d bitmaps out of |A| are read.
#[derive(Debug, Clone, Copy)]
pub struct BitmapAccessProfile<'a> {
    pub index: &'a CandidateIndex,
    pub d: u64,
}

impl<'a> BitmapAccessProfile<'a> {
    pub fn new(index: &'a CandidateIndex, d: u64) -> Result<Self, CostError> {
        if d < 1 || d > index.combined_cardinality {
            return Err(CostError::InvalidBitmapCount {
                d,
                cardinality: index.combined_cardinality,
            });
        }
        Ok(BitmapAccessProfile { index, d })
    }
}

/// Smallest h ≥ 0 with m^h ≥ a, i.e. ceil(log_m a); exact in integers.
fn ceil_log(m: u64, a: u64) -> u64 {
    debug_assert!(m >= 2);
    let mut h = 0u64;
    let mut p = 1u128;
    while p < a as u128 {
        p = p.saturating_mul(m as u128);
        h += 1;
    }
    h
}

/// Data access through the index: b-tree descent, leaf scan plus bitmap
/// reads, then fact-page fetches estimated by the uniform-spread
/// exponential term.
pub fn access_cost(
    profile: &BitmapAccessProfile<'_>,
    cat: &SchemaCatalog,
) -> Result<IoCost, CostError> {
    let i = profile.index;
    let params = &cat.params;
    let m = btree_order(&candidate_key_widths(i, cat), params)?;
    if m <= 1 {
        return Err(CostError::DegenerateOrder { order: m });
    }
    let a = i.combined_cardinality;
    let fact_rows = cat.fact.row_count;

    let descent = ceil_log(m, a).saturating_sub(1);
    let scan = ceil_div(a, m - 1) + profile.d * ceil_div(fact_rows, 8 * params.page_size_bytes);

    let p_f = cat.fact.page_count as f64;
    let n_r = profile.d as f64 * fact_rows as f64 / a as f64;
    let read = p_f * (1.0 - libm::exp(-n_r / p_f));

    Ok(IoCost::new(descent as f64 + scan as f64 + read))
}

/// Hash join of two tables given their page counts: 3·(p_R + p_S).
pub fn hash_join_cost(p_r: u64, p_s: u64) -> IoCost {
    IoCost::new(3.0 * (p_r as f64 + p_s as f64))
}

/// Bitmaps read when `i` serves `q`: per On attribute, 1 for an equality,
/// k for a k-value IN list, half the domain for a range, all but one for
/// an exclusion, the full cardinality when unrestricted; product clamped
/// to [1, |A|].
pub fn derive_d(q: &QueryProfile, i: &CandidateIndex, cat: &SchemaCatalog) -> u64 {
    let mut d: u64 = 1;
    for attr in &i.on_attributes {
        let card = cat
            .dimension(&attr.table)
            .and_then(|t| t.attribute(&attr.attribute))
            .map(|s| s.cardinality)
            .unwrap_or(1);
        let per_attr = match q.restrictions.get(attr) {
            Some(RestrictionKind::Equality) => 1,
            Some(RestrictionKind::Membership(k)) => (*k as u64).max(1),
            Some(RestrictionKind::Range) => (card + 1) / 2,
            Some(RestrictionKind::Exclusion) => (card - 1).max(1),
            None => card,
        };
        d = d.saturating_mul(per_attr.max(1));
    }
    d.clamp(1, i.combined_cardinality.max(1))
}

/// An index serves a query only if the query performs every join the
/// index embodies and references at least one On attribute.
pub fn applicable(i: &CandidateIndex, q: &QueryProfile) -> bool {
    i.join_predicates.iter().all(|e| q.joins.contains(e))
        && i.on_attributes
            .iter()
            .any(|a| q.restrictions.contains_key(a) || q.group_by.contains(a))
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueryCostBreakdown {
    pub query: u32,
    pub chosen: Option<String>,
    pub index_access: IoCost,
    pub residual_joins: IoCost,
    pub baseline: IoCost,
    pub total: IoCost,
}

/// Cheapest plan for one query under a configuration: all-hash-joins
/// baseline versus each applicable index (access plus residual joins).
/// An index is chosen only when strictly cheaper than the baseline;
/// route ties break by smaller index size, then id.
pub fn query_cost(
    q: &QueryProfile,
    config: &[CandidateIndex],
    cat: &SchemaCatalog,
) -> QueryCostBreakdown {
    let baseline = q
        .joins
        .iter()
        .filter_map(|e| cat.dimension(&e.dimension))
        .fold(IoCost::ZERO, |acc, t| {
            acc + hash_join_cost(cat.fact.page_count, t.page_count)
        });

    struct Route<'a> {
        cost: f64,
        size: u64,
        index: &'a CandidateIndex,
        access: f64,
        residual: f64,
    }
    let mut best: Option<Route<'_>> = None;

    for i in config {
        if !applicable(i, q) {
            continue;
        }
        let d = derive_d(q, i, cat);
        let profile = match BitmapAccessProfile::new(i, d) {
            Ok(p) => p,
            Err(_) => continue,
        };
        // An index whose b-tree cannot be built serves no query.
        let access = match access_cost(&profile, cat) {
            Ok(c) => c.ios,
            Err(_) => continue,
        };
        let residual: f64 = q
            .joins
            .iter()
            .filter(|e| !i.join_predicates.contains(e))
            .filter_map(|e| cat.dimension(&e.dimension))
            .map(|t| hash_join_cost(cat.fact.page_count, t.page_count).ios)
            .sum();
        let cost = access + residual;
        let size = index_size_bytes(i, cat);
        let better = match &best {
            None => true,
            Some(b) => {
                cost < b.cost
                    || (cost == b.cost && (size, i.id.as_str()) < (b.size, b.index.id.as_str()))
            }
        };
        if better {
            best = Some(Route {
                cost,
                size,
                index: i,
                access,
                residual,
            });
        }
    }

    match best {
        Some(r) if r.cost < baseline.ios => QueryCostBreakdown {
            query: q.id,
            chosen: Some(r.index.id.clone()),
            index_access: IoCost::new(r.access),
            residual_joins: IoCost::new(r.residual),
            baseline,
            total: IoCost::new(r.cost),
        },
        _ => QueryCostBreakdown {
            query: q.id,
            chosen: None,
            index_access: IoCost::ZERO,
            residual_joins: IoCost::ZERO,
            baseline,
            total: baseline,
        },
    }
}

/// Workload cost: sum of per-query totals.
pub fn workload_cost(
    queries: &[QueryProfile],
    config: &[CandidateIndex],
    cat: &SchemaCatalog,
) -> IoCost {
    queries
        .iter()
        .fold(IoCost::ZERO, |acc, q| acc + query_cost(q, config, cat).total)
}
