//! Bitmap join index DDL emission, Oracle surface syntax. Text only; the
//! advisor never executes statements.

use std::collections::BTreeSet;
use std::fmt::Write;

use bji_core::candidates::CandidateIndex;
use bji_core::selector::IndexConfiguration;

/// `bji_` plus each On attribute as `table_attr`, lowercased. Collisions
/// (same On list, different joins) get a numeric suffix.
fn index_name(c: &CandidateIndex, used: &mut BTreeSet<String>) -> String {
    let base = c
        .on_attributes
        .iter()
        .map(|a| format!("{}_{}", a.table.to_lowercase(), a.attribute.to_lowercase()))
        .collect::<Vec<_>>()
        .join("_");
    let base = format!("bji_{base}");
    if used.insert(base.clone()) {
        return base;
    }
    for n in 2.. {
        let name = format!("{base}_{n}");
        if used.insert(name.clone()) {
            return name;
        }
    }
    unreachable!("suffix loop terminates");
}

fn statement(c: &CandidateIndex, name: &str) -> String {
    let fact = &c.from_tables[0];
    let on = c
        .on_attributes
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(", ");
    let from = c.from_tables.join(", ");
    let preds = c
        .join_predicates
        .iter()
        .map(|e| {
            format!(
                "{fact}.{} = {}.{}",
                e.fact_attribute, e.dimension, e.dimension_attribute
            )
        })
        .collect::<Vec<_>>()
        .join(" AND ");
    format!("CREATE BITMAP INDEX {name} ON {fact}({on}) FROM {from} WHERE {preds};")
}

/// One CREATE statement per selected index, in selection order.
pub fn emit_ddl(config: &IndexConfiguration) -> String {
    let mut used = BTreeSet::new();
    let mut out = String::new();
    for c in &config.selected {
        let name = index_name(c, &mut used);
        let _ = writeln!(out, "{}", statement(c, &name));
    }
    out
}
