//! Star-schema statistics: one fact table, its dimensions, the foreign keys
//! joining them, and the physical parameters every cost formula depends on.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// Physical storage parameters shared by all cost formulas.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SystemParams {
    pub page_size_bytes: u64,
    pub pointer_size_bytes: u64,
}

impl SystemParams {
    /// Invariant: page_size_bytes > pointer_size_bytes > 0.
    pub fn new(page_size_bytes: u64, pointer_size_bytes: u64) -> Result<Self, CatalogError> {
        if pointer_size_bytes == 0 || page_size_bytes <= pointer_size_bytes {
            return Err(CatalogError::InvalidParams {
                page_size_bytes,
                pointer_size_bytes,
            });
        }
        Ok(SystemParams {
            page_size_bytes,
            pointer_size_bytes,
        })
    }
}

impl Default for SystemParams {
    /// 8 KiB pages with 4-byte pointers.
    fn default() -> Self {
        SystemParams {
            page_size_bytes: 8192,
            pointer_size_bytes: 4,
        }
    }
}

/// Per-attribute statistics. `cardinality` is the number of distinct values,
/// `width_bytes` the stored width, `is_key` marks key attributes (primary or
/// foreign), which are never indexed by a bitmap join index themselves.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttributeStats {
    pub name: String,
    pub cardinality: u64,
    pub width_bytes: u64,
    pub is_key: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableRole {
    Fact,
    Dimension,
}

/// Table-level statistics with the derived page count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableStats {
    pub name: String,
    pub role: TableRole,
    pub row_count: u64,
    pub tuple_width_bytes: u64,
    pub attributes: Vec<AttributeStats>,
    /// Attribute names forming the primary key; each must exist with is_key set.
    pub primary_key: Vec<String>,
    /// ceil(row_count * tuple_width_bytes / page_size_bytes), floored at 1.
    pub page_count: u64,
}

impl TableStats {
    pub fn new(
        name: String,
        role: TableRole,
        row_count: u64,
        tuple_width_bytes: u64,
        attributes: Vec<AttributeStats>,
        primary_key: Vec<String>,
        params: &SystemParams,
    ) -> Result<Self, CatalogError> {
        if name.is_empty() {
            return Err(CatalogError::EmptyName);
        }
        if tuple_width_bytes == 0 {
            return Err(CatalogError::ZeroTupleWidth { table: name });
        }
        let mut seen: BTreeMap<&str, ()> = BTreeMap::new();
        for attr in &attributes {
            if attr.name.is_empty() {
                return Err(CatalogError::EmptyName);
            }
            if attr.cardinality == 0 || attr.width_bytes == 0 {
                return Err(CatalogError::DegenerateAttribute {
                    table: name.clone(),
                    attribute: attr.name.clone(),
                });
            }
            if seen.insert(attr.name.as_str(), ()).is_some() {
                return Err(CatalogError::DuplicateAttribute {
                    table: name.clone(),
                    attribute: attr.name.clone(),
                });
            }
        }
        if primary_key.is_empty() {
            return Err(CatalogError::MissingPrimaryKey { table: name });
        }
        for key in &primary_key {
            match attributes.iter().find(|a| &a.name == key) {
                None => {
                    return Err(CatalogError::UnknownKeyAttribute {
                        table: name.clone(),
                        attribute: key.clone(),
                    })
                }
                Some(a) if !a.is_key => {
                    return Err(CatalogError::KeyNotFlagged {
                        table: name.clone(),
                        attribute: key.clone(),
                    })
                }
                Some(_) => {}
            }
        }
        let page_count = page_count(row_count, tuple_width_bytes, params);
        Ok(TableStats {
            name,
            role,
            row_count,
            tuple_width_bytes,
            attributes,
            primary_key,
            page_count,
        })
    }

    pub fn attribute(&self, name: &str) -> Option<&AttributeStats> {
        self.attributes.iter().find(|a| a.name == name)
    }

    pub fn is_primary_key(&self, name: &str) -> bool {
        self.primary_key.iter().any(|k| k == name)
    }
}

/// Pages occupied by a table: ceil(rows * width / page size), at least 1.
pub fn page_count(row_count: u64, tuple_width_bytes: u64, params: &SystemParams) -> u64 {
    let bytes = row_count as u128 * tuple_width_bytes as u128;
    let page = params.page_size_bytes as u128;
    let pages = (bytes + page - 1) / page;
    if pages == 0 {
        1
    } else {
        pages as u64
    }
}

/// An equi-join between a fact foreign key and the primary key of one
/// dimension. Edges compare by field order, giving a stable sort.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct JoinEdge {
    pub fact_attribute: String,
    pub dimension: String,
    pub dimension_attribute: String,
}

/// A validated star schema: the fact table, its dimensions, and the foreign
/// keys wiring them together.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemaCatalog {
    pub fact: TableStats,
    pub dimensions: Vec<TableStats>,
    /// Fact attribute name -> (dimension name, dimension key attribute).
    pub foreign_keys: BTreeMap<String, (String, String)>,
    pub params: SystemParams,
}

impl SchemaCatalog {
    pub fn new(
        fact: TableStats,
        dimensions: Vec<TableStats>,
        foreign_keys: BTreeMap<String, (String, String)>,
        params: SystemParams,
    ) -> Result<Self, CatalogError> {
        SystemParams::new(params.page_size_bytes, params.pointer_size_bytes)?;
        if fact.role != TableRole::Fact {
            return Err(CatalogError::RoleMismatch {
                table: fact.name,
            });
        }
        let mut names: BTreeMap<&str, ()> = BTreeMap::new();
        names.insert(fact.name.as_str(), ());
        for dim in &dimensions {
            if dim.role != TableRole::Dimension {
                return Err(CatalogError::RoleMismatch {
                    table: dim.name.clone(),
                });
            }
            if names.insert(dim.name.as_str(), ()).is_some() {
                return Err(CatalogError::DuplicateTable {
                    table: dim.name.clone(),
                });
            }
        }
        for (fact_attr, (dim_name, dim_attr)) in &foreign_keys {
            let stats = fact
                .attribute(fact_attr)
                .ok_or_else(|| CatalogError::ForeignKeyUnknownFactAttribute {
                    attribute: fact_attr.clone(),
                })?;
            if !stats.is_key {
                return Err(CatalogError::KeyNotFlagged {
                    table: fact.name.clone(),
                    attribute: fact_attr.clone(),
                });
            }
            let dim = dimensions
                .iter()
                .find(|d| &d.name == dim_name)
                .ok_or_else(|| CatalogError::ForeignKeyUnknownDimension {
                    attribute: fact_attr.clone(),
                    dimension: dim_name.clone(),
                })?;
            if !dim.is_primary_key(dim_attr) {
                return Err(CatalogError::ForeignKeyNotPrimaryKey {
                    attribute: fact_attr.clone(),
                    dimension: dim_name.clone(),
                    target: dim_attr.clone(),
                });
            }
        }
        Ok(SchemaCatalog {
            fact,
            dimensions,
            foreign_keys,
            params,
        })
    }

    /// Any table by name, fact included.
    pub fn table(&self, name: &str) -> Option<&TableStats> {
        if self.fact.name == name {
            Some(&self.fact)
        } else {
            self.dimension(name)
        }
    }

    pub fn dimension(&self, name: &str) -> Option<&TableStats> {
        self.dimensions.iter().find(|d| d.name == name)
    }

    /// The join edge rooted at a fact foreign-key attribute, if one exists.
    pub fn edge_for_fact_attribute(&self, fact_attr: &str) -> Option<JoinEdge> {
        self.foreign_keys
            .get(fact_attr)
            .map(|(dim, key)| JoinEdge {
                fact_attribute: String::from(fact_attr),
                dimension: dim.clone(),
                dimension_attribute: key.clone(),
            })
    }

    /// The join edge landing on a dimension key attribute. With several
    /// foreign keys to one dimension the lexically smallest fact attribute
    /// wins, keeping lookups deterministic.
    pub fn edge_for_dimension_key(&self, dimension: &str, key: &str) -> Option<JoinEdge> {
        self.foreign_keys
            .iter()
            .find(|(_, (dim, attr))| dim == dimension && attr == key)
            .map(|(fact_attr, (dim, attr))| JoinEdge {
                fact_attribute: fact_attr.clone(),
                dimension: dim.clone(),
                dimension_attribute: attr.clone(),
            })
    }

    pub fn join_edges(&self) -> Vec<JoinEdge> {
        self.foreign_keys
            .iter()
            .map(|(fact_attr, (dim, attr))| JoinEdge {
                fact_attribute: fact_attr.clone(),
                dimension: dim.clone(),
                dimension_attribute: attr.clone(),
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CatalogError {
    InvalidParams {
        page_size_bytes: u64,
        pointer_size_bytes: u64,
    },
    EmptyName,
    ZeroTupleWidth {
        table: String,
    },
    DegenerateAttribute {
        table: String,
        attribute: String,
    },
    DuplicateAttribute {
        table: String,
        attribute: String,
    },
    DuplicateTable {
        table: String,
    },
    MissingPrimaryKey {
        table: String,
    },
    UnknownKeyAttribute {
        table: String,
        attribute: String,
    },
    KeyNotFlagged {
        table: String,
        attribute: String,
    },
    RoleMismatch {
        table: String,
    },
    ForeignKeyUnknownFactAttribute {
        attribute: String,
    },
    ForeignKeyUnknownDimension {
        attribute: String,
        dimension: String,
    },
    ForeignKeyNotPrimaryKey {
        attribute: String,
        dimension: String,
        target: String,
    },
}

impl fmt::Display for CatalogError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CatalogError::InvalidParams {
                page_size_bytes,
                pointer_size_bytes,
            } => write!(
                f,
                "invalid system parameters: page size {page_size_bytes} must exceed pointer size {pointer_size_bytes} and both must be positive"
            ),
            CatalogError::EmptyName => write!(f, "empty table or attribute name"),
            CatalogError::ZeroTupleWidth { table } => {
                write!(f, "table '{table}' has zero tuple width")
            }
            CatalogError::DegenerateAttribute { table, attribute } => write!(
                f,
                "attribute '{table}.{attribute}' needs positive cardinality and width"
            ),
            CatalogError::DuplicateAttribute { table, attribute } => {
                write!(f, "duplicate attribute '{attribute}' in table '{table}'")
            }
            CatalogError::DuplicateTable { table } => {
                write!(f, "duplicate table '{table}'")
            }
            CatalogError::MissingPrimaryKey { table } => {
                write!(f, "table '{table}' declares no primary key")
            }
            CatalogError::UnknownKeyAttribute { table, attribute } => write!(
                f,
                "primary key attribute '{attribute}' not found in table '{table}'"
            ),
            CatalogError::KeyNotFlagged { table, attribute } => write!(
                f,
                "key attribute '{table}.{attribute}' must have is_key set"
            ),
            CatalogError::RoleMismatch { table } => {
                write!(f, "table '{table}' has the wrong role for its position")
            }
            CatalogError::ForeignKeyUnknownFactAttribute { attribute } => {
                write!(f, "foreign key '{attribute}' is not a fact attribute")
            }
            CatalogError::ForeignKeyUnknownDimension { attribute, dimension } => write!(
                f,
                "foreign key '{attribute}' references unknown dimension '{dimension}'"
            ),
            CatalogError::ForeignKeyNotPrimaryKey {
                attribute,
                dimension,
                target,
            } => write!(
                f,
                "foreign key '{attribute}' references '{dimension}.{target}' which is not the dimension's primary key"
            ),
        }
    }
}

impl core::error::Error for CatalogError {}
