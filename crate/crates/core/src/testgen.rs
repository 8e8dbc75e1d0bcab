//! Random fixture generators for property and acceptance tests.
//!
//! Compiled only with the `testgen` feature; nothing here is part of the
//! advisor API. All generators are deterministic functions of the caller's
//! RNG so failures replay from a seed.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
pub use rand_chacha::ChaCha8Rng;

use crate::catalog::{AttributeStats, SchemaCatalog, SystemParams, TableRole, TableStats};
use crate::sqlparse::{QualifiedAttribute, QueryAttributeMatrix};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random 0/1 matrix over synthetic column names, cell density as given.
pub fn random_matrix<R: Rng>(
    rng: &mut R,
    n_rows: usize,
    n_cols: usize,
    density: f64,
) -> QueryAttributeMatrix {
    let columns: Vec<QualifiedAttribute> = (0..n_cols)
        .map(|c| QualifiedAttribute {
            table: String::from("T"),
            attribute: format!("a{c:02}"),
        })
        .collect();
    let cells: Vec<Vec<bool>> = (0..n_rows)
        .map(|_| (0..n_cols).map(|_| rng.gen_bool(density)).collect())
        .collect();
    let query_ids: Vec<u32> = (1..=n_rows as u32).collect();
    QueryAttributeMatrix::from_cells(query_ids, columns, &cells)
}

/// Random star catalog: one fact joined to 1–4 dimensions, each dimension
/// carrying one key and 1–3 indexable attributes, page geometry varied.
pub fn random_catalog<R: Rng>(rng: &mut R) -> SchemaCatalog {
    let page = *[1024u64, 4096, 8192, 16384].choose(rng).unwrap();
    let pointer = *[4u64, 8].choose(rng).unwrap();
    let params = SystemParams::new(page, pointer).unwrap();

    let n_dims = rng.gen_range(1..=4usize);
    let mut dimensions = Vec::with_capacity(n_dims);
    for i in 0..n_dims {
        let rows = rng.gen_range(10u64..=20_000);
        let n_attrs = rng.gen_range(1..=3usize);
        let mut attributes = alloc::vec![AttributeStats {
            name: String::from("id"),
            cardinality: rows,
            width_bytes: rng.gen_range(4..=8),
            is_key: true,
        }];
        for j in 0..n_attrs {
            attributes.push(AttributeStats {
                name: format!("a{j}"),
                cardinality: rng.gen_range(2u64..=500),
                width_bytes: rng.gen_range(1u64..=32),
                is_key: false,
            });
        }
        dimensions.push(
            TableStats::new(
                format!("Dim{i}"),
                TableRole::Dimension,
                rows,
                rng.gen_range(8u64..=256),
                attributes,
                alloc::vec![String::from("id")],
                &params,
            )
            .unwrap(),
        );
    }

    let mut fact_attributes = alloc::vec![AttributeStats {
        name: String::from("pk"),
        cardinality: 1_000_000,
        width_bytes: 8,
        is_key: true,
    }];
    let mut foreign_keys = alloc::collections::BTreeMap::new();
    for i in 0..n_dims {
        fact_attributes.push(AttributeStats {
            name: format!("fk{i}"),
            cardinality: dimensions[i].row_count,
            width_bytes: 8,
            is_key: true,
        });
        foreign_keys.insert(
            format!("fk{i}"),
            (format!("Dim{i}"), String::from("id")),
        );
    }
    fact_attributes.push(AttributeStats {
        name: String::from("measure"),
        cardinality: rng.gen_range(100u64..=100_000),
        width_bytes: 8,
        is_key: false,
    });
    let fact = TableStats::new(
        String::from("Fact"),
        TableRole::Fact,
        rng.gen_range(10_000u64..=2_000_000),
        rng.gen_range(16u64..=200),
        fact_attributes,
        alloc::vec![String::from("pk")],
        &params,
    )
    .unwrap();

    SchemaCatalog::new(fact, dimensions, foreign_keys, params).unwrap()
}

/// Random star-join workload over `cat`: each query joins a random subset
/// of dimensions and restricts or groups their indexable attributes.
pub fn random_workload_sql<R: Rng>(
    rng: &mut R,
    cat: &SchemaCatalog,
    n_queries: usize,
) -> String {
    let mut sql = String::new();
    let dims: Vec<&TableStats> = cat.dimensions.iter().collect();
    for _ in 0..n_queries {
        let k = rng.gen_range(1..=dims.len());
        let mut chosen: Vec<&TableStats> = dims.clone();
        chosen.shuffle(rng);
        chosen.truncate(k);
        chosen.sort_by(|a, b| a.name.cmp(&b.name));

        let mut from = alloc::vec![cat.fact.name.clone()];
        let mut preds: Vec<String> = Vec::new();
        let mut group_by: Vec<String> = Vec::new();
        for dim in &chosen {
            let edge = cat.edge_for_dimension_key(&dim.name, &dim.primary_key[0]).unwrap();
            from.push(dim.name.clone());
            preds.push(format!(
                "{}.{} = {}.{}",
                cat.fact.name, edge.fact_attribute, dim.name, edge.dimension_attribute
            ));
            let indexable: Vec<&AttributeStats> =
                dim.attributes.iter().filter(|a| !a.is_key).collect();
            if indexable.is_empty() {
                continue;
            }
            let attr = indexable[rng.gen_range(0..indexable.len())];
            let card = attr.cardinality;
            match rng.gen_range(0..5u8) {
                0 => preds.push(format!("{}.{} = {}", dim.name, attr.name, rng.gen_range(1..=card))),
                1 => {
                    let k = rng.gen_range(2u64..=4).min(card);
                    let vals: Vec<String> = (0..k)
                        .map(|_| format!("{}", rng.gen_range(1..=card)))
                        .collect();
                    preds.push(format!("{}.{} IN ({})", dim.name, attr.name, vals.join(", ")));
                }
                2 => preds.push(format!("{}.{} > {}", dim.name, attr.name, rng.gen_range(1..=card))),
                3 => preds.push(format!("{}.{} <> {}", dim.name, attr.name, rng.gen_range(1..=card))),
                _ => group_by.push(format!("{}.{}", dim.name, attr.name)),
            }
        }

        sql.push_str("SELECT * FROM ");
        sql.push_str(&from.join(", "));
        if !preds.is_empty() {
            sql.push_str(" WHERE ");
            sql.push_str(&preds.join(" AND "));
        }
        if !group_by.is_empty() {
            sql.push_str(" GROUP BY ");
            sql.push_str(&group_by.join(", "));
        }
        sql.push_str(";\n");
    }
    sql
}
