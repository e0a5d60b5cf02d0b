//! The Z-marginal feasibility program and exact solution recovery.
//!
//! Variables are block-normalized probabilities `p_{j,x}` on each logical
//! class. Row layout: `(K−1)·n` matching rows (block 0 against block j for
//! each site), then `K` normalization rows. Columns run over blocks in
//! logical order and, inside a block, over strings in lexicographic order.

mod reconstruct;
mod simplex;

pub use reconstruct::{basis_solve, exact_bfs_reconstruct, rationalize_by_projection, Reconstruction, RecoveryPath};
pub use simplex::solve_feasibility;

use std::collections::BTreeMap;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bitspace::{BitString, ResidueClass};
use crate::exactnum::{LinearSystem, NumError, Rational};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ZFeasError {
    #[error("no logical classes given")]
    NoClasses,
    #[error("class {0} is empty")]
    EmptyClass(usize),
    #[error("classes disagree on string length")]
    MixedLength,
    #[error("numeric vector has {found} entries, expected {expected}")]
    Dimension { expected: usize, found: usize },
    #[error("no full-rank basis among the candidate columns")]
    NoBasis,
    #[error("reconstruction failed: {0}")]
    Reconstruction(String),
    #[error(transparent)]
    Num(#[from] NumError),
}

/// `A_eq p = b_eq, p ≥ 0` together with the meaning of each column.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZFeasibilityLP {
    system: LinearSystem,
    columns: Vec<(usize, BitString)>,
    block_starts: Vec<usize>,
    n: usize,
}

impl ZFeasibilityLP {
    pub fn system(&self) -> &LinearSystem {
        &self.system
    }

    /// `(logical index, string)` for every column.
    pub fn column_index(&self) -> &[(usize, BitString)] {
        &self.columns
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.block_starts.len()
    }

    pub fn rows(&self) -> usize {
        self.system.rows()
    }

    pub fn cols(&self) -> usize {
        self.system.cols()
    }

    /// Column range of block `j`.
    pub fn block(&self, j: usize) -> std::ops::Range<usize> {
        let end = self.block_starts.get(j + 1).copied().unwrap_or(self.columns.len());
        self.block_starts[j]..end
    }

    /// Exact check of `A p = b` and `p ≥ 0`.
    pub fn accepts(&self, p: &[Rational]) -> bool {
        p.len() == self.cols() && p.iter().all(|v| !v.is_negative()) && self.system.is_satisfied_by(p)
    }

    pub fn table_from_vector(&self, p: &[Rational]) -> ProbabilityTable {
        let mut blocks = vec![BTreeMap::new(); self.k()];
        for ((j, x), v) in self.columns.iter().zip(p) {
            blocks[*j].insert(*x, v.clone());
        }
        ProbabilityTable { blocks }
    }

    pub fn vector_from_table(&self, table: &ProbabilityTable) -> Vec<Rational> {
        self.columns
            .iter()
            .map(|(j, x)| table.get(*j, x).cloned().unwrap_or_default())
            .collect()
    }
}

/// Build the program for the given logical classes (in logical order).
pub fn build_lp(classes: &[ResidueClass]) -> Result<ZFeasibilityLP, ZFeasError> {
    if classes.is_empty() {
        return Err(ZFeasError::NoClasses);
    }
    if let Some(j) = classes.iter().position(ResidueClass::is_empty) {
        return Err(ZFeasError::EmptyClass(j));
    }
    let n = classes[0].members[0].len();
    if classes.iter().flat_map(|c| &c.members).any(|x| x.len() != n) {
        return Err(ZFeasError::MixedLength);
    }
    let k = classes.len();
    let mut columns = Vec::new();
    let mut block_starts = Vec::with_capacity(k);
    for (j, class) in classes.iter().enumerate() {
        block_starts.push(columns.len());
        columns.extend(class.members.iter().map(|&x| (j, x)));
    }
    let cols = columns.len();
    let rows = (k - 1) * n + k;
    let mut a = vec![0i64; rows * cols];
    let mut b = vec![0i64; rows];
    for (c, (j, x)) in columns.iter().enumerate() {
        let signs: Vec<i64> = (0..n).map(|i| if x.bit(i) { -1 } else { 1 }).collect();
        if *j == 0 {
            for jj in 1..k {
                for (i, &s) in signs.iter().enumerate() {
                    a[((jj - 1) * n + i) * cols + c] = s;
                }
            }
        } else {
            for (i, &s) in signs.iter().enumerate() {
                a[((j - 1) * n + i) * cols + c] = -s;
            }
        }
        a[((k - 1) * n + j) * cols + c] = 1;
    }
    for row in b.iter_mut().skip((k - 1) * n) {
        *row = 1;
    }
    let system = LinearSystem::new(rows, cols, a, b)?;
    Ok(ZFeasibilityLP {
        system,
        columns,
        block_starts,
        n,
    })
}

/// Exact probabilities `p_{j,x}` per logical block, keyed by string.
///
/// Every string of the block's class appears, zeros included.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProbabilityTable {
    blocks: Vec<BTreeMap<BitString, Rational>>,
}

impl ProbabilityTable {
    pub fn from_blocks(blocks: Vec<BTreeMap<BitString, Rational>>) -> Self {
        ProbabilityTable { blocks }
    }

    pub fn k(&self) -> usize {
        self.blocks.len()
    }

    pub fn block(&self, j: usize) -> &BTreeMap<BitString, Rational> {
        &self.blocks[j]
    }

    pub fn blocks(&self) -> &[BTreeMap<BitString, Rational>] {
        &self.blocks
    }

    pub fn get(&self, j: usize, x: &BitString) -> Option<&Rational> {
        self.blocks.get(j)?.get(x)
    }

    /// Number of strictly positive entries.
    pub fn support_size(&self) -> usize {
        self.blocks.iter().flat_map(|b| b.values()).filter(|v| v.is_positive()).count()
    }

    /// Largest denominator over all entries.
    pub fn max_denominator(&self) -> BigInt {
        self.blocks
            .iter()
            .flat_map(|b| b.values())
            .map(Rational::denom)
            .max()
            .unwrap_or_else(|| BigInt::from(1))
    }

    /// `Σ_x (1 − 2xᵢ) p_{j,x}` for every block and site.
    pub fn z_expectations(&self) -> Vec<Vec<Rational>> {
        self.blocks
            .iter()
            .map(|block| {
                let n = block.keys().next().map_or(0, BitString::len);
                (0..n)
                    .map(|i| {
                        let mut acc = Rational::zero();
                        for (x, p) in block {
                            if x.bit(i) {
                                acc -= p;
                            } else {
                                acc += p;
                            }
                        }
                        acc
                    })
                    .collect()
            })
            .collect()
    }

    /// Nonnegativity, exact block normalization and exact Z-matching.
    pub fn validate(&self) -> Result<(), String> {
        for (j, block) in self.blocks.iter().enumerate() {
            if let Some((x, v)) = block.iter().find(|(_, v)| v.is_negative()) {
                return Err(format!("p[{j}][{x}] = {v} is negative"));
            }
            let total: Rational = block.values().sum();
            if !total.is_one() {
                return Err(format!("block {j} sums to {total}"));
            }
        }
        let z = self.z_expectations();
        if let Some(first) = z.first() {
            for (j, row) in z.iter().enumerate().skip(1) {
                if row != first {
                    return Err(format!("block {j} Z-marginals differ from block 0"));
                }
            }
        }
        Ok(())
    }
}
