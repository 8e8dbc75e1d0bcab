//! JSON catalog format.
//!
//! Top level: `params {page_size_bytes, pointer_size_bytes}`, `fact {..}`,
//! `dimensions [..]`. Tables carry `name`, `row_count`, `tuple_width_bytes`,
//! `primary_key` (a string or a list), `attributes []`, and, on the fact
//! only, `foreign_keys {fact_attr: "Dimension.key"}`. Attribute entries are
//! `{name, cardinality, width_bytes, is_key}` with `is_key` defaulting to
//! false. Unknown fields are rejected so typos surface as parse errors.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use bji_core::catalog::{
    AttributeStats, CatalogError, SchemaCatalog, SystemParams, TableRole, TableStats,
};

#[derive(Debug, thiserror::Error)]
pub enum CatalogIoError {
    /// Malformed JSON or a wrong field type/shape.
    #[error("catalog JSON: {0}")]
    Json(#[from] serde_json::Error),
    /// Well-formed JSON that does not fit the catalog format.
    #[error("catalog: {0}")]
    Format(String),
    /// Structurally valid file violating a schema invariant.
    #[error("catalog: {0}")]
    Invariant(#[from] CatalogError),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CatalogDoc {
    params: ParamsDoc,
    fact: TableDoc,
    dimensions: Vec<TableDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamsDoc {
    page_size_bytes: u64,
    pointer_size_bytes: u64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TableDoc {
    name: String,
    row_count: u64,
    tuple_width_bytes: u64,
    primary_key: KeyDoc,
    attributes: Vec<AttrDoc>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    foreign_keys: BTreeMap<String, String>,
}

/// Single-attribute keys read and write as a plain string.
#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum KeyDoc {
    One(String),
    Many(Vec<String>),
}

impl KeyDoc {
    fn to_list(&self) -> Vec<String> {
        match self {
            KeyDoc::One(k) => vec![k.clone()],
            KeyDoc::Many(ks) => ks.clone(),
        }
    }

    fn from_list(keys: &[String]) -> KeyDoc {
        if keys.len() == 1 {
            KeyDoc::One(keys[0].clone())
        } else {
            KeyDoc::Many(keys.to_vec())
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AttrDoc {
    name: String,
    cardinality: u64,
    width_bytes: u64,
    #[serde(default)]
    is_key: bool,
}

fn table_from_doc(
    doc: &TableDoc,
    role: TableRole,
    params: &SystemParams,
) -> Result<TableStats, CatalogIoError> {
    let attributes = doc
        .attributes
        .iter()
        .map(|a| AttributeStats {
            name: a.name.clone(),
            cardinality: a.cardinality,
            width_bytes: a.width_bytes,
            is_key: a.is_key,
        })
        .collect();
    Ok(TableStats::new(
        doc.name.clone(),
        role,
        doc.row_count,
        doc.tuple_width_bytes,
        attributes,
        doc.primary_key.to_list(),
        params,
    )?)
}

fn doc_from_table(t: &TableStats, foreign_keys: BTreeMap<String, String>) -> TableDoc {
    TableDoc {
        name: t.name.clone(),
        row_count: t.row_count,
        tuple_width_bytes: t.tuple_width_bytes,
        primary_key: KeyDoc::from_list(&t.primary_key),
        attributes: t
            .attributes
            .iter()
            .map(|a| AttrDoc {
                name: a.name.clone(),
                cardinality: a.cardinality,
                width_bytes: a.width_bytes,
                is_key: a.is_key,
            })
            .collect(),
        foreign_keys,
    }
}

/// Parses and validates a catalog document.
pub fn parse_catalog(text: &str) -> Result<SchemaCatalog, CatalogIoError> {
    let doc: CatalogDoc = serde_json::from_str(text)?;
    let params = SystemParams::new(doc.params.page_size_bytes, doc.params.pointer_size_bytes)?;
    let fact = table_from_doc(&doc.fact, TableRole::Fact, &params)?;
    let mut foreign_keys = BTreeMap::new();
    for (attr, target) in &doc.fact.foreign_keys {
        let (dim, key) = target.split_once('.').ok_or_else(|| {
            CatalogIoError::Format(format!(
                "foreign key '{attr}': target '{target}' is not of the form Dimension.key"
            ))
        })?;
        if dim.is_empty() || key.is_empty() {
            return Err(CatalogIoError::Format(format!(
                "foreign key '{attr}': target '{target}' is not of the form Dimension.key"
            )));
        }
        foreign_keys.insert(attr.clone(), (dim.to_string(), key.to_string()));
    }
    let mut dimensions = Vec::new();
    for d in &doc.dimensions {
        if !d.foreign_keys.is_empty() {
            return Err(CatalogIoError::Format(format!(
                "dimension '{}' must not declare foreign keys",
                d.name
            )));
        }
        dimensions.push(table_from_doc(d, TableRole::Dimension, &params)?);
    }
    Ok(SchemaCatalog::new(fact, dimensions, foreign_keys, params)?)
}

/// Emits a catalog document that [`parse_catalog`] reloads to an equal value.
pub fn emit_catalog(cat: &SchemaCatalog) -> String {
    let fact_fks = cat
        .foreign_keys
        .iter()
        .map(|(attr, (dim, key))| (attr.clone(), format!("{dim}.{key}")))
        .collect();
    let doc = CatalogDoc {
        params: ParamsDoc {
            page_size_bytes: cat.params.page_size_bytes,
            pointer_size_bytes: cat.params.pointer_size_bytes,
        },
        fact: doc_from_table(&cat.fact, fact_fks),
        dimensions: cat
            .dimensions
            .iter()
            .map(|d| doc_from_table(d, BTreeMap::new()))
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("catalog document serializes");
    text.push('\n');
    text
}
