//! Shared test fixture: a small Sales star schema and a three-query workload
//! whose matrix, closed sets, and costs are hand-checked in module tests.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::catalog::{AttributeStats, SchemaCatalog, SystemParams, TableRole, TableStats};
use crate::sqlparse::QualifiedAttribute;

pub fn qa(table: &str, attribute: &str) -> QualifiedAttribute {
    QualifiedAttribute {
        table: String::from(table),
        attribute: String::from(attribute),
    }
}

fn attr(name: &str, cardinality: u64, width: u64, key: bool) -> AttributeStats {
    AttributeStats {
        name: String::from(name),
        cardinality,
        width_bytes: width,
        is_key: key,
    }
}

/// Sales (1M rows, 80 B) joined to Customers (10k rows, 100 B) and
/// Times (5k rows, 99 B); page counts 9766 / 123 / 61.
pub fn docs_catalog() -> SchemaCatalog {
    let params = SystemParams::default();
    let fact = TableStats::new(
        String::from("Sales"),
        TableRole::Fact,
        1_000_000,
        80,
        vec![
            attr("sale_id", 1_000_000, 8, true),
            attr("cust_id", 10_000, 8, true),
            attr("time_id", 5_000, 8, true),
            attr("amount", 100_000, 8, false),
        ],
        vec![String::from("sale_id")],
        &params,
    )
    .unwrap();
    let customers = TableStats::new(
        String::from("Customers"),
        TableRole::Dimension,
        10_000,
        100,
        vec![
            attr("cust_id", 10_000, 8, true),
            attr("city", 50, 16, false),
            attr("state", 10, 12, false),
        ],
        vec![String::from("cust_id")],
        &params,
    )
    .unwrap();
    let times = TableStats::new(
        String::from("Times"),
        TableRole::Dimension,
        5_000,
        99,
        vec![
            attr("time_id", 5_000, 8, true),
            attr("month", 12, 4, false),
            attr("year", 5, 4, false),
        ],
        vec![String::from("time_id")],
        &params,
    )
    .unwrap();
    let mut fks = BTreeMap::new();
    fks.insert(
        String::from("cust_id"),
        (String::from("Customers"), String::from("cust_id")),
    );
    fks.insert(
        String::from("time_id"),
        (String::from("Times"), String::from("time_id")),
    );
    SchemaCatalog::new(fact, vec![customers, times], fks, params).unwrap()
}

pub fn docs_workload_sql() -> &'static str {
    "SELECT * FROM Sales S, Customers C WHERE S.cust_id = C.cust_id AND C.city = 'Lyon';\n\
     SELECT * FROM Sales S, Times T WHERE S.time_id = T.time_id AND T.month IN (1, 2, 3) AND T.year = 2004;\n\
     SELECT * FROM Sales S, Customers C, Times T WHERE S.cust_id = C.cust_id AND S.time_id = T.time_id \
     AND C.city = 'Paris' GROUP BY T.month;\n"
}

/// Matrix columns in lexicographic order, as built from the workload above.
pub fn docs_columns() -> Vec<QualifiedAttribute> {
    vec![
        qa("Customers", "city"),
        qa("Customers", "cust_id"),
        qa("Sales", "cust_id"),
        qa("Sales", "time_id"),
        qa("Times", "month"),
        qa("Times", "time_id"),
        qa("Times", "year"),
    ]
}

/// Row item sets of the fixture matrix, indices into [`docs_columns`].
pub fn docs_rows() -> Vec<Vec<usize>> {
    vec![
        vec![0, 1, 2],
        vec![3, 4, 5, 6],
        vec![0, 1, 2, 3, 4, 5],
    ]
}
