//! Frequent closed itemset mining over the query-attribute matrix, with a
//! brute-force oracle for verification.
//!
//! The contract is extensional: exactly the set {closure(s) : support(s) >=
//! minsup, s nonempty}, deduplicated, with supports, sorted by descending
//! support, then ascending size, then lexicographic item order. The fast
//! miner walks closures depth-first, extending each closed set by one column
//! and keeping a result only when its closure adds no item below the
//! extension column outside the current prefix (each closed set is reached
//! exactly once).

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::bits::Bits;
use crate::sqlparse::QueryAttributeMatrix;

/// Sorted, duplicate-free column indices into a matrix.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Itemset {
    items: Vec<usize>,
}

impl Itemset {
    pub fn new(mut items: Vec<usize>) -> Self {
        items.sort_unstable();
        items.dedup();
        Itemset { items }
    }

    pub fn items(&self) -> &[usize] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn contains(&self, item: usize) -> bool {
        self.items.binary_search(&item).is_ok()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrequentClosedItemset {
    pub itemset: Itemset,
    /// Fraction of matrix rows containing every item, in (0, 1].
    pub support: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MinerError {
    MinsupOutOfRange { minsup: f64 },
    /// closure() is undefined for an itemset no row contains.
    EmptySupport,
    /// Brute-force enumeration is capped to keep 2^columns tractable.
    TooManyColumns { columns: usize, limit: usize },
    ItemOutOfRange { item: usize, columns: usize },
}

impl fmt::Display for MinerError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MinerError::MinsupOutOfRange { minsup } => {
                write!(f, "minsup {minsup} outside (0, 1]")
            }
            MinerError::EmptySupport => {
                write!(f, "closure undefined: no row contains the itemset")
            }
            MinerError::TooManyColumns { columns, limit } => {
                write!(f, "matrix has {columns} columns, brute force allows {limit}")
            }
            MinerError::ItemOutOfRange { item, columns } => {
                write!(f, "item {item} out of range for {columns} columns")
            }
        }
    }
}

impl core::error::Error for MinerError {}

pub const BRUTE_FORCE_COLUMN_LIMIT: usize = 20;

/// Minimum supporting-row count for a support threshold. The epsilon absorbs
/// binary-float artifacts (0.1 * 10 rounds above 1.0); at least one row must
/// always match, so zero-row thresholds clamp up.
pub(crate) fn min_count(minsup: f64, rows: usize) -> usize {
    let raw = minsup * rows as f64 - 1e-9;
    let c = if raw <= 0.0 { 0 } else { libm::ceil(raw) as usize };
    c.max(1)
}

fn check_items(s: &Itemset, m: &QueryAttributeMatrix) -> Result<(), MinerError> {
    for &item in s.items() {
        if item >= m.n_cols() {
            return Err(MinerError::ItemOutOfRange {
                item,
                columns: m.n_cols(),
            });
        }
    }
    Ok(())
}

/// Fraction of rows containing every item of `s`; support of the empty set
/// is 1 by convention.
pub fn support(s: &Itemset, m: &QueryAttributeMatrix) -> Result<f64, MinerError> {
    check_items(s, m)?;
    if s.is_empty() {
        return Ok(1.0);
    }
    if m.n_rows() == 0 {
        return Ok(0.0);
    }
    let count = (0..m.n_rows())
        .filter(|&r| s.items().iter().all(|&c| m.cell(r, c)))
        .count();
    Ok(count as f64 / m.n_rows() as f64)
}

/// Intersection of all rows containing `s`: the maximal superset with the
/// same supporting rows.
pub fn closure(s: &Itemset, m: &QueryAttributeMatrix) -> Result<Itemset, MinerError> {
    check_items(s, m)?;
    let supporting: Vec<usize> = (0..m.n_rows())
        .filter(|&r| s.items().iter().all(|&c| m.cell(r, c)))
        .collect();
    if supporting.is_empty() {
        return Err(MinerError::EmptySupport);
    }
    let items = (0..m.n_cols())
        .filter(|&c| supporting.iter().all(|&r| m.cell(r, c)))
        .collect();
    Ok(Itemset::new(items))
}

fn validate_minsup(minsup: f64) -> Result<(), MinerError> {
    if minsup > 0.0 && minsup <= 1.0 {
        Ok(())
    } else {
        Err(MinerError::MinsupOutOfRange { minsup })
    }
}

/// Sort key shared by both miners: descending support (by count), ascending
/// size, then lexicographic items.
fn sort_results(found: Vec<(Vec<usize>, usize)>, rows: usize) -> Vec<FrequentClosedItemset> {
    let mut found = found;
    found.sort_unstable_by(|(ia, ca), (ib, cb)| {
        cb.cmp(ca)
            .then_with(|| ia.len().cmp(&ib.len()))
            .then_with(|| ia.cmp(ib))
    });
    found
        .into_iter()
        .map(|(items, count)| FrequentClosedItemset {
            itemset: Itemset { items },
            support: count as f64 / rows as f64,
        })
        .collect()
}

/// All frequent closed itemsets of the matrix at the given threshold.
pub fn mine_closed(
    m: &QueryAttributeMatrix,
    minsup: f64,
) -> Result<Vec<FrequentClosedItemset>, MinerError> {
    validate_minsup(minsup)?;
    let rows = m.n_rows();
    let cols = m.n_cols();
    if rows == 0 || cols == 0 {
        return Ok(vec![]);
    }
    let minc = min_count(minsup, rows);

    let mut tids: Vec<Bits> = vec![Bits::new(rows); cols];
    for r in 0..rows {
        for c in m.row_items(r) {
            tids[c].set(r);
        }
    }

    let closure_of = |tid: &Bits| -> Vec<usize> {
        (0..cols).filter(|&c| tids[c].contains_all(tid)).collect()
    };

    let mut found: Vec<(Vec<usize>, usize)> = Vec::new();
    let full = Bits::full(rows);
    let root = closure_of(&full);
    let mut in_current = vec![false; cols];
    for &c in &root {
        in_current[c] = true;
    }
    if !root.is_empty() {
        found.push((root.clone(), rows));
    }

    // Depth-first closure extension; `start` is the next column to try.
    struct Dfs<'a> {
        tids: &'a [Bits],
        cols: usize,
        minc: usize,
        found: &'a mut Vec<(Vec<usize>, usize)>,
    }
    impl Dfs<'_> {
        fn run(&mut self, current: &[usize], in_current: &mut [bool], tid: &Bits, start: usize) {
            for j in start..self.cols {
                if in_current[j] {
                    continue;
                }
                let mut new_tid = tid.clone();
                new_tid.intersect_assign(&self.tids[j]);
                let count = new_tid.count();
                if count < self.minc {
                    continue;
                }
                let clo: Vec<usize> = (0..self.cols)
                    .filter(|&c| self.tids[c].contains_all(&new_tid))
                    .collect();
                if clo.iter().any(|&c| c < j && !in_current[c]) {
                    continue;
                }
                self.found.push((clo.clone(), count));
                for &c in &clo {
                    in_current[c] = true;
                }
                self.run(&clo, in_current, &new_tid, j + 1);
                for &c in &clo {
                    in_current[c] = false;
                }
                for &c in current {
                    in_current[c] = true;
                }
            }
        }
    }
    let mut dfs = Dfs {
        tids: &tids,
        cols,
        minc,
        found: &mut found,
    };
    dfs.run(&root, &mut in_current, &full, 0);

    Ok(sort_results(found, rows))
}

/// Exhaustive-enumeration oracle for [`mine_closed`], capped at
/// [`BRUTE_FORCE_COLUMN_LIMIT`] columns.
pub fn mine_closed_bruteforce(
    m: &QueryAttributeMatrix,
    minsup: f64,
) -> Result<Vec<FrequentClosedItemset>, MinerError> {
    validate_minsup(minsup)?;
    let cols = m.n_cols();
    if cols > BRUTE_FORCE_COLUMN_LIMIT {
        return Err(MinerError::TooManyColumns {
            columns: cols,
            limit: BRUTE_FORCE_COLUMN_LIMIT,
        });
    }
    let rows = m.n_rows();
    if rows == 0 || cols == 0 {
        return Ok(vec![]);
    }
    let minc = min_count(minsup, rows);

    let row_masks: Vec<u32> = (0..rows)
        .map(|r| m.row_items(r).fold(0u32, |acc, c| acc | 1 << c))
        .collect();

    let mut closed: BTreeMap<u32, usize> = BTreeMap::new();
    for s in 1u32..1 << cols {
        let mut count = 0usize;
        let mut closure_mask = !0u32;
        for &rm in &row_masks {
            if rm & s == s {
                count += 1;
                closure_mask &= rm;
            }
        }
        if count >= minc {
            let prev = closed.insert(closure_mask, count);
            debug_assert!(prev.is_none() || prev == Some(count));
        }
    }

    let found = closed
        .into_iter()
        .map(|(mask, count)| {
            let items = (0..cols).filter(|&c| mask >> c & 1 == 1).collect();
            (items, count)
        })
        .collect();
    Ok(sort_results(found, rows))
}
