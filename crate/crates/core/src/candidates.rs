//! Candidate bitmap join index construction from mined itemsets.
//!
//! Itemset elements sort into three roles: fact foreign keys witness a join
//! and land in From/Where, dimension primary keys witness the same join from
//! the other end, and non-key dimension attributes become the On clause. An
//! itemset with no On attribute, or with an On attribute whose dimension has
//! no witnessed join, yields a rejection instead of an index.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::catalog::{JoinEdge, SchemaCatalog};
use crate::closeminer::FrequentClosedItemset;
use crate::sqlparse::{QualifiedAttribute, QueryAttributeMatrix};

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateIndex {
    /// Deterministic canonical string: sorted On attributes, then sorted
    /// join predicates.
    pub id: String,
    /// Non-key dimension attributes, sorted. Never empty.
    pub on_attributes: Vec<QualifiedAttribute>,
    /// Fact table first, then the joined dimensions sorted by name.
    pub from_tables: Vec<String>,
    /// One edge per joined dimension, sorted.
    pub join_predicates: Vec<JoinEdge>,
    /// Product of On-attribute cardinalities: the bitmap count |A|.
    pub combined_cardinality: u64,
    pub source_itemset: FrequentClosedItemset,
}

impl CandidateIndex {
    pub fn support(&self) -> f64 {
        self.source_itemset.support
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RejectReason {
    /// Only key attributes: there is nothing to index.
    NoNonKeyAttribute,
    /// An On attribute's dimension has no witnessed join to the fact.
    UnwitnessedJoin { attribute: QualifiedAttribute },
    /// Itemset attribute that the catalog cannot resolve.
    UnknownAttribute { attribute: QualifiedAttribute },
    /// Two witnessed joins reach the same dimension; the index would need
    /// one Where predicate per dimension.
    AmbiguousJoinPath { dimension: String },
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RejectReason::NoNonKeyAttribute => f.write_str("no non-key attribute"),
            RejectReason::UnwitnessedJoin { attribute } => {
                write!(f, "no witnessed join to the fact for {attribute}")
            }
            RejectReason::UnknownAttribute { attribute } => {
                write!(f, "attribute {attribute} not in catalog")
            }
            RejectReason::AmbiguousJoinPath { dimension } => {
                write!(f, "multiple join paths to dimension '{dimension}'")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rejection {
    pub attributes: Vec<QualifiedAttribute>,
    pub support: f64,
    pub reason: RejectReason,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CandidateOutcome {
    Accepted(CandidateIndex),
    Rejected(Rejection),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CandidateOptions {
    /// Witness joins from catalog foreign keys instead of requiring key
    /// attributes in the itemset; pairs with extraction that omits join keys.
    pub witness_from_metadata: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CandidateSet {
    pub candidates: Vec<CandidateIndex>,
}

/// Builds one candidate from one itemset under default options.
pub fn generate_candidate(
    s: &FrequentClosedItemset,
    m: &QueryAttributeMatrix,
    cat: &SchemaCatalog,
) -> CandidateOutcome {
    generate_candidate_with(s, m, cat, &CandidateOptions::default())
}

/// Itemset items must index into `m`'s columns; panics otherwise.
pub fn generate_candidate_with(
    s: &FrequentClosedItemset,
    m: &QueryAttributeMatrix,
    cat: &SchemaCatalog,
    opts: &CandidateOptions,
) -> CandidateOutcome {
    let attributes: Vec<QualifiedAttribute> = s
        .itemset
        .items()
        .iter()
        .map(|&i| m.columns()[i].clone())
        .collect();

    let reject = |reason: RejectReason| {
        CandidateOutcome::Rejected(Rejection {
            attributes: attributes.clone(),
            support: s.support,
            reason,
        })
    };

    let mut edges: BTreeSet<JoinEdge> = BTreeSet::new();
    let mut on_attributes: Vec<QualifiedAttribute> = Vec::new();

    for attr in &attributes {
        if attr.table == cat.fact.name {
            if cat.fact.attribute(&attr.attribute).is_none() {
                return reject(RejectReason::UnknownAttribute {
                    attribute: attr.clone(),
                });
            }
            // Foreign keys witness their join; other fact attributes
            // (measures, the fact primary key) contribute nothing.
            if let Some(edge) = cat.edge_for_fact_attribute(&attr.attribute) {
                edges.insert(edge);
            }
        } else if let Some(dim) = cat.dimension(&attr.table) {
            let stats = match dim.attribute(&attr.attribute) {
                Some(a) => a,
                None => {
                    return reject(RejectReason::UnknownAttribute {
                        attribute: attr.clone(),
                    })
                }
            };
            if dim.is_primary_key(&attr.attribute) {
                // A primary key witnesses the join only when some fact
                // foreign key actually lands on it.
                if let Some(edge) = cat.edge_for_dimension_key(&dim.name, &attr.attribute) {
                    edges.insert(edge);
                }
            } else if !stats.is_key {
                on_attributes.push(attr.clone());
            }
        } else {
            return reject(RejectReason::UnknownAttribute {
                attribute: attr.clone(),
            });
        }
    }

    if opts.witness_from_metadata {
        for attr in &on_attributes {
            if edges.iter().any(|e| e.dimension == attr.table) {
                continue;
            }
            if let Some((fact_attr, (dim, key))) = cat
                .foreign_keys
                .iter()
                .find(|(_, (dim, _))| dim == &attr.table)
            {
                edges.insert(JoinEdge {
                    fact_attribute: fact_attr.clone(),
                    dimension: dim.clone(),
                    dimension_attribute: key.clone(),
                });
            }
        }
    }

    if on_attributes.is_empty() {
        return reject(RejectReason::NoNonKeyAttribute);
    }
    on_attributes.sort();
    on_attributes.dedup();

    let witnessed: BTreeSet<&str> = edges.iter().map(|e| e.dimension.as_str()).collect();
    for attr in &on_attributes {
        if !witnessed.contains(attr.table.as_str()) {
            return reject(RejectReason::UnwitnessedJoin {
                attribute: attr.clone(),
            });
        }
    }

    let mut per_dimension: BTreeMap<&str, usize> = BTreeMap::new();
    for edge in &edges {
        *per_dimension.entry(edge.dimension.as_str()).or_insert(0) += 1;
    }
    if let Some((dim, _)) = per_dimension.iter().find(|(_, &n)| n > 1) {
        return reject(RejectReason::AmbiguousJoinPath {
            dimension: String::from(*dim),
        });
    }

    let combined_cardinality = on_attributes
        .iter()
        .map(|a| {
            cat.dimension(&a.table)
                .and_then(|d| d.attribute(&a.attribute))
                .map(|s| s.cardinality)
                .unwrap_or(1)
        })
        .fold(1u64, |acc, c| acc.saturating_mul(c));

    let mut from_tables = Vec::with_capacity(1 + witnessed.len());
    from_tables.push(cat.fact.name.clone());
    from_tables.extend(witnessed.iter().map(|d| String::from(*d)));

    let join_predicates: Vec<JoinEdge> = edges.into_iter().collect();
    let id = candidate_id(&on_attributes, &join_predicates, &cat.fact.name);

    CandidateOutcome::Accepted(CandidateIndex {
        id,
        on_attributes,
        from_tables,
        join_predicates,
        combined_cardinality,
        source_itemset: s.clone(),
    })
}

fn candidate_id(
    on: &[QualifiedAttribute],
    joins: &[JoinEdge],
    fact: &str,
) -> String {
    let mut id = String::new();
    for (i, a) in on.iter().enumerate() {
        if i > 0 {
            id.push(',');
        }
        id.push_str(&format!("{a}"));
    }
    id.push('|');
    for (i, e) in joins.iter().enumerate() {
        if i > 0 {
            id.push(',');
        }
        id.push_str(&format!(
            "{fact}.{}={}.{}",
            e.fact_attribute, e.dimension, e.dimension_attribute
        ));
    }
    id
}

/// Applies [`generate_candidate_with`] to every itemset, keeping accepted
/// candidates in miner order with the first occurrence of each id winning.
pub fn build_candidate_set(
    itemsets: &[FrequentClosedItemset],
    m: &QueryAttributeMatrix,
    cat: &SchemaCatalog,
    opts: &CandidateOptions,
) -> (CandidateSet, Vec<Rejection>) {
    let mut seen: BTreeSet<String> = BTreeSet::new();
    let mut candidates = Vec::new();
    let mut rejections = Vec::new();
    for s in itemsets {
        match generate_candidate_with(s, m, cat, opts) {
            CandidateOutcome::Accepted(c) => {
                if seen.insert(c.id.clone()) {
                    candidates.push(c);
                }
            }
            CandidateOutcome::Rejected(r) => rejections.push(r),
        }
    }
    (CandidateSet { candidates }, rejections)
}
