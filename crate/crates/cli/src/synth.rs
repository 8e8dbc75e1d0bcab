//! Synthetic star-schema fixture: one Sales fact, five dimensions, and a
//! 40-query star-join workload with a skewed attribute popularity ladder.
//!
//! Which attributes each query touches is fixed by construction, so
//! supports, candidate counts, and sweep shapes are seed-independent:
//! city 14/40, month 11/40, category 8/40, promo_type 6/40, year 5/40,
//! channel_class 4/40, state 2/40, every multi-dimension pair exactly once.
//! The seed drives only literals, operator choice, group-by placement, and
//! statement order. `scale` multiplies the fact row count alone; dimensions
//! keep their size so per-index costs stay on the same page-count footing.

use std::collections::BTreeMap;
use std::fmt::Write;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use bji_core::catalog::{
    AttributeStats, SchemaCatalog, SystemParams, TableRole, TableStats,
};

use crate::catalog_io::emit_catalog;

/// Marker comment prefixed to generated workloads; reports flag runs whose
/// workload carries it.
pub const STAND_IN_MARKER: &str = "synthetic stand-in workload";

pub const FACT_BASE_ROWS: u64 = 1_000_000;

#[derive(Debug, Clone)]
pub struct SynthFiles {
    pub catalog_json: String,
    pub workload_sql: String,
}

fn attr(name: &str, cardinality: u64, width: u64, key: bool) -> AttributeStats {
    AttributeStats {
        name: String::from(name),
        cardinality,
        width_bytes: width,
        is_key: key,
    }
}

fn dimension(
    name: &str,
    rows: u64,
    width: u64,
    key: &str,
    attrs: &[(&str, u64, u64)],
    params: &SystemParams,
) -> TableStats {
    let mut list = vec![attr(key, rows, 8, true)];
    for &(n, card, w) in attrs {
        list.push(attr(n, card, w, false));
    }
    TableStats::new(
        String::from(name),
        TableRole::Dimension,
        rows,
        width,
        list,
        vec![String::from(key)],
        params,
    )
    .expect("synthetic dimension is valid")
}

/// The fixed schema; only the fact row count depends on `scale`.
pub fn synthetic_catalog(scale: u64) -> SchemaCatalog {
    let params = SystemParams::default();
    let fact_rows = FACT_BASE_ROWS.saturating_mul(scale.max(1));
    let fact = TableStats::new(
        String::from("Sales"),
        TableRole::Fact,
        fact_rows,
        80,
        vec![
            attr("sale_id", fact_rows, 8, true),
            attr("cust_id", 10_000, 8, true),
            attr("prod_id", 5_000, 8, true),
            attr("promo_id", 200, 8, true),
            attr("time_id", 1_460, 8, true),
            attr("channel_id", 5, 8, true),
            attr("amount", 100_000, 8, false),
            attr("quantity", 100, 4, false),
        ],
        vec![String::from("sale_id")],
        &params,
    )
    .expect("synthetic fact is valid");
    let dimensions = vec![
        dimension(
            "Customers",
            10_000,
            100,
            "cust_id",
            &[("city", 50, 16), ("state", 10, 12), ("segment", 8, 10)],
            &params,
        ),
        dimension(
            "Products",
            5_000,
            120,
            "prod_id",
            &[("category", 20, 14), ("brand", 100, 16), ("family", 8, 12)],
            &params,
        ),
        dimension(
            "Promotions",
            200,
            80,
            "promo_id",
            &[("promo_type", 6, 10), ("medium", 4, 8)],
            &params,
        ),
        dimension(
            "Times",
            1_460,
            40,
            "time_id",
            &[
                ("month", 12, 4),
                ("quarter", 4, 4),
                ("year", 5, 4),
                ("day_of_week", 7, 4),
            ],
            &params,
        ),
        dimension(
            "Channels",
            5,
            60,
            "channel_id",
            &[("channel_class", 3, 8)],
            &params,
        ),
    ];
    let mut fks = BTreeMap::new();
    for (fk, dim, key) in [
        ("cust_id", "Customers", "cust_id"),
        ("prod_id", "Products", "prod_id"),
        ("promo_id", "Promotions", "promo_id"),
        ("time_id", "Times", "time_id"),
        ("channel_id", "Channels", "channel_id"),
    ] {
        fks.insert(
            String::from(fk),
            (String::from(dim), String::from(key)),
        );
    }
    SchemaCatalog::new(fact, dimensions, fks, params).expect("synthetic schema is valid")
}

/// (dimension, attribute, queries restricting it alone).
const SINGLE_DIM: &[(&str, &str, usize)] = &[
    ("Customers", "city", 9),
    ("Times", "month", 7),
    ("Products", "category", 4),
    ("Promotions", "promo_type", 3),
    ("Times", "year", 3),
    ("Channels", "channel_class", 2),
    ("Customers", "state", 2),
];

/// Every attribute pair appears in exactly one query, keeping pairwise
/// supports at 1/40, below every sweep threshold.
const PAIRS: &[[(&str, &str); 2]] = &[
    [("Customers", "city"), ("Times", "month")],
    [("Customers", "city"), ("Times", "year")],
    [("Times", "month"), ("Products", "category")],
    [("Products", "category"), ("Promotions", "promo_type")],
    [("Customers", "city"), ("Products", "category")],
    [("Times", "month"), ("Promotions", "promo_type")],
    [("Customers", "city"), ("Promotions", "promo_type")],
    [("Times", "month"), ("Times", "year")],
    [("Products", "category"), ("Channels", "channel_class")],
    [("Customers", "city"), ("Channels", "channel_class")],
];

fn literal(rng: &mut ChaCha8Rng, dim: &str, attribute: &str, cardinality: u64) -> String {
    let pick = rng.gen_range(0..cardinality);
    match (dim, attribute) {
        ("Times", "month") => format!("{}", pick + 1),
        ("Times", "year") => format!("{}", 2000 + pick),
        ("Times", "quarter") => format!("{}", pick + 1),
        _ => format!("'{}_{:02}'", attribute, pick),
    }
}

/// One restriction predicate: equality, or an IN list of 2..=3 values.
fn restriction(rng: &mut ChaCha8Rng, cat: &SchemaCatalog, dim: &str, attribute: &str) -> String {
    let card = cat
        .dimension(dim)
        .and_then(|d| d.attribute(attribute))
        .map(|a| a.cardinality)
        .expect("workload attribute exists");
    if rng.gen_bool(0.35) {
        let k = rng.gen_range(2..=3usize);
        let mut values = Vec::with_capacity(k);
        while values.len() < k {
            let v = literal(rng, dim, attribute, card);
            if !values.contains(&v) {
                values.push(v);
            }
        }
        format!("{dim}.{attribute} IN ({})", values.join(", "))
    } else {
        format!("{dim}.{attribute} = {}", literal(rng, dim, attribute, card))
    }
}

fn fk_for(cat: &SchemaCatalog, dim: &str) -> (String, String) {
    cat.foreign_keys
        .iter()
        .find(|(_, (d, _))| d == dim)
        .map(|(fk, (_, key))| (fk.clone(), key.clone()))
        .expect("every dimension has a foreign key")
}

/// Builds one star query over the given (dimension, attribute) targets.
/// Group-by, when present, lands on an attribute the query already
/// restricts, so it never adds a matrix column.
fn query(rng: &mut ChaCha8Rng, cat: &SchemaCatalog, targets: &[(&str, &str)]) -> String {
    let mut dims: Vec<&str> = Vec::new();
    for (d, _) in targets {
        if !dims.contains(d) {
            dims.push(d);
        }
    }
    let mut sql = String::from("SELECT * FROM Sales");
    for d in &dims {
        let _ = write!(sql, ", {d}");
    }
    let mut preds: Vec<String> = Vec::new();
    for d in &dims {
        let (fk, key) = fk_for(cat, d);
        preds.push(format!("Sales.{fk} = {d}.{key}"));
    }
    for (d, a) in targets {
        preds.push(restriction(rng, cat, d, a));
    }
    let _ = write!(sql, " WHERE {}", preds.join(" AND "));
    if rng.gen_bool(0.4) {
        let (d, a) = targets[rng.gen_range(0..targets.len())];
        let _ = write!(sql, " GROUP BY {d}.{a}");
    }
    sql.push(';');
    sql
}

/// Deterministic per (seed, scale): same inputs, byte-identical files.
pub fn generate_synthetic(seed: u64, scale: u64) -> SynthFiles {
    let cat = synthetic_catalog(scale);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut statements: Vec<String> = Vec::new();
    for &(dim, attribute, count) in SINGLE_DIM {
        for _ in 0..count {
            statements.push(query(&mut rng, &cat, &[(dim, attribute)]));
        }
    }
    for pair in PAIRS {
        statements.push(query(&mut rng, &cat, pair));
    }
    statements.shuffle(&mut rng);
    let mut workload_sql = format!(
        "-- {STAND_IN_MARKER} (seed {seed}, scale {scale})\n\
         -- {} star-join queries against the Sales schema\n",
        statements.len()
    );
    for s in &statements {
        workload_sql.push_str(s);
        workload_sql.push('\n');
    }
    SynthFiles {
        catalog_json: emit_catalog(&cat),
        workload_sql,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog_io::parse_catalog;
    use crate::pipeline::{analyze_workload_text, mine_candidates};

    #[test]
    fn same_seed_is_byte_identical_and_seeds_differ() {
        let a = generate_synthetic(42, 1);
        let b = generate_synthetic(42, 1);
        assert_eq!(a.catalog_json, b.catalog_json);
        assert_eq!(a.workload_sql, b.workload_sql);
        let c = generate_synthetic(43, 1);
        assert_eq!(a.catalog_json, c.catalog_json);
        assert_ne!(a.workload_sql, c.workload_sql);
    }

    #[test]
    fn scale_multiplies_the_fact_alone() {
        let one = synthetic_catalog(1);
        let three = synthetic_catalog(3);
        assert_eq!(one.fact.row_count, 1_000_000);
        assert_eq!(three.fact.row_count, 3_000_000);
        assert_eq!(one.dimensions.len(), 5);
        for (a, b) in one.dimensions.iter().zip(&three.dimensions) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn generated_files_parse_cleanly() {
        let files = generate_synthetic(7, 2);
        let cat = parse_catalog(&files.catalog_json).unwrap();
        assert_eq!(cat.fact.row_count, 2_000_000);
        let analysis = analyze_workload_text(&files.workload_sql, &cat, false, false).unwrap();
        assert_eq!(analysis.profiles.len(), 40);
        assert!(analysis.skipped_statements.is_empty());
        assert!(files.workload_sql.contains(STAND_IN_MARKER));
    }

    #[test]
    fn attribute_popularity_ladder_is_seed_independent() {
        for seed in [1, 42, 999] {
            let files = generate_synthetic(seed, 1);
            let cat = parse_catalog(&files.catalog_json).unwrap();
            let analysis =
                analyze_workload_text(&files.workload_sql, &cat, false, false).unwrap();
            let m = &analysis.matrix;
            let expected = [
                ("Customers", "city", 14),
                ("Times", "month", 11),
                ("Products", "category", 8),
                ("Promotions", "promo_type", 6),
                ("Times", "year", 5),
                ("Channels", "channel_class", 4),
                ("Customers", "state", 2),
            ];
            for (table, attribute, count) in expected {
                let col = m
                    .columns()
                    .iter()
                    .position(|c| c.table == table && c.attribute == attribute)
                    .unwrap_or_else(|| panic!("{table}.{attribute} missing"));
                let rows = (0..m.n_rows()).filter(|&r| m.cell(r, col)).count();
                assert_eq!(rows, count, "{table}.{attribute} support drifted");
            }
        }
    }

    #[test]
    fn candidate_counts_step_down_the_minsup_ladder() {
        let files = generate_synthetic(42, 1);
        let cat = parse_catalog(&files.catalog_json).unwrap();
        let analysis = analyze_workload_text(&files.workload_sql, &cat, false, false).unwrap();
        let expected = [
            (0.05, 8),
            (0.10, 6),
            (0.15, 4),
            (0.20, 3),
            (0.25, 2),
            (0.30, 1),
            (0.35, 1),
            (0.40, 0),
            (0.45, 0),
            (1.00, 0),
        ];
        for (minsup, count) in expected {
            let (_, candidates, _) = mine_candidates(&analysis, &cat, minsup, false).unwrap();
            assert_eq!(
                candidates.candidates.len(),
                count,
                "candidate count at minsup {minsup}"
            );
        }
    }

    #[test]
    fn key_only_itemsets_exist_for_the_rejection_rule() {
        let files = generate_synthetic(42, 1);
        let cat = parse_catalog(&files.catalog_json).unwrap();
        let analysis = analyze_workload_text(&files.workload_sql, &cat, false, false).unwrap();
        let (itemsets, _, rejections) = mine_candidates(&analysis, &cat, 0.05, false).unwrap();
        assert!(!itemsets.is_empty());
        let key_only: Vec<_> = rejections
            .iter()
            .filter(|r| r.reason.to_string() == "no non-key attribute")
            .collect();
        // The Customers and Times key pairs close on themselves because
        // their joining queries split across two restriction attributes.
        assert_eq!(key_only.len(), 2);
    }
}
