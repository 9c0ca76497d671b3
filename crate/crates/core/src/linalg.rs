//! Exact linear algebra over `F_q` for systems of linear forms.
//!
//! A [`LinearSystem`] is stored with independent rows only, together with its
//! reduced row echelon form (leading coefficients equal to one). Two systems
//! with the same row space have the same solution sets, so everything
//! structural here is computed from the RREF.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{FieldElem, FieldSpec};

/// Limit on the number of projective row combinations enumerated.
pub const MAX_COMBINATIONS: u64 = 1_000_000;
/// Largest `k` accepted by [`LinearSystem::good_sets`].
pub const MAX_SUBSET_COLUMNS: usize = 20;

/// Row-reduces `rows` in place and returns the pivot columns.
/// Zero rows are removed; every pivot entry is one.
pub fn rref(field: &FieldSpec, rows: &mut Vec<Vec<FieldElem>>) -> Vec<usize> {
    let k = rows.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..k {
        if r == rows.len() {
            break;
        }
        let Some(src) = (r..rows.len()).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        rows.swap(r, src);
        let inv = field.inv(rows[r][col]).expect("pivot is nonzero");
        for x in rows[r].iter_mut() {
            *x = field.mul(*x, inv);
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == r || row[col].is_zero() {
                continue;
            }
            let c = row[col];
            for (x, &y) in row.iter_mut().zip(&pivot_row) {
                *x = field.sub(*x, field.mul(c, y));
            }
        }
        pivots.push(col);
        r += 1;
    }
    rows.truncate(r);
    pivots
}

pub fn rank(field: &FieldSpec, rows: &[Vec<FieldElem>]) -> usize {
    let mut work = rows.to_vec();
    rref(field, &mut work).len()
}

/// A full-rank `m x k` system of linear forms over `F_q`.
#[derive(Clone)]
pub struct LinearSystem {
    field: Arc<FieldSpec>,
    k: usize,
    /// Independent input rows, in input order.
    generators: Vec<Vec<FieldElem>>,
    rref: Vec<Vec<FieldElem>>,
    pivots: Vec<usize>,
    dropped_rows: usize,
}

impl fmt::Debug for LinearSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LinearSystem")
            .field("q", &self.field.order())
            .field("generators", &self.generators)
            .finish()
    }
}

impl LinearSystem {
    /// Normalizes a raw matrix: drops dependent rows and caches the RREF.
    pub fn new(field: Arc<FieldSpec>, rows: Vec<Vec<FieldElem>>) -> Result<Self> {
        let k = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != k) {
            return Err(Error::RaggedRows);
        }
        if rows.iter().flatten().any(|x| x.value() >= field.order()) {
            let bad = rows.iter().flatten().find(|x| x.value() >= field.order()).unwrap();
            return Err(Error::NotAnElement(bad.value() as i64));
        }
        let mut generators: Vec<Vec<FieldElem>> = Vec::new();
        for row in &rows {
            let mut trial = generators.clone();
            trial.push(row.clone());
            if rank(&field, &trial) == trial.len() {
                generators.push(row.clone());
            }
        }
        if generators.is_empty() {
            return Err(Error::EmptySystem);
        }
        let mut reduced = generators.clone();
        let pivots = rref(&field, &mut reduced);
        let dropped_rows = rows.len() - generators.len();
        Ok(LinearSystem {
            field,
            k,
            generators,
            rref: reduced,
            pivots,
            dropped_rows,
        })
    }

    /// Builds a system from signed integer rows (reduced into the field).
    pub fn from_ints(field: Arc<FieldSpec>, rows: &[Vec<i64>]) -> Result<Self> {
        let rows = rows
            .iter()
            .map(|r| r.iter().map(|&v| field.from_signed(v)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Self::new(field, rows)
    }

    #[inline]
    pub fn field(&self) -> &Arc<FieldSpec> {
        &self.field
    }

    /// Number of independent forms.
    #[inline]
    pub fn m(&self) -> usize {
        self.rref.len()
    }

    /// Number of variables.
    #[inline]
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn generators(&self) -> &[Vec<FieldElem>] {
        &self.generators
    }

    pub fn rref_rows(&self) -> &[Vec<FieldElem>] {
        &self.rref
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// Columns that are not pivots of the RREF.
    pub fn free_columns(&self) -> Vec<usize> {
        (0..self.k).filter(|c| !self.pivots.contains(c)).collect()
    }

    /// Number of input rows discarded as linearly dependent.
    pub fn dropped_rows(&self) -> usize {
        self.dropped_rows
    }

    pub fn same_row_space(&self, other: &LinearSystem) -> bool {
        *self.field == *other.field && self.k == other.k && self.rref == other.rref
    }

    /// Whether `v` lies in the row space.
    pub fn contains(&self, v: &[FieldElem]) -> bool {
        if v.len() != self.k {
            return false;
        }
        let mut rows = self.rref.clone();
        rows.push(v.to_vec());
        rank(&self.field, &rows) == self.m()
    }

    /// The system with variables permuted: new column `j` is old column `perm[j]`.
    pub fn permute_columns(&self, perm: &[usize]) -> Result<LinearSystem> {
        let rows = self
            .generators
            .iter()
            .map(|r| perm.iter().map(|&j| r[j]).collect())
            .collect();
        LinearSystem::new(self.field.clone(), rows)
    }

    fn combination_count(&self) -> u64 {
        let q = self.field.order() as u64;
        let mut total: u64 = 0;
        let mut power: u64 = 1;
        for _ in 0..self.m() {
            total = total.saturating_add(power);
            power = power.saturating_mul(q);
        }
        total
    }

    /// All equations induced by the system, one canonical representative
    /// (first nonzero coefficient one) per projective row combination.
    pub fn induced_equations(&self) -> Result<Vec<InducedEquation>> {
        let count = self.combination_count();
        if self.m() > 4 || count > MAX_COMBINATIONS {
            return Err(Error::TooManyCombinations(count));
        }
        let f = &*self.field;
        let q = f.order();
        let m = self.m();
        let mut out = Vec::with_capacity(count as usize);
        for lead in 0..m {
            let tail = m - lead - 1;
            let tail_count = (q as u64).pow(tail as u32);
            for code in 0..tail_count {
                let mut coeffs = self.rref[lead].clone();
                let mut rest = code;
                for j in (lead + 1..m).rev() {
                    let c = FieldElem::from_raw((rest % q as u64) as u32);
                    rest /= q as u64;
                    if c.is_zero() {
                        continue;
                    }
                    for (x, &y) in coeffs.iter_mut().zip(&self.rref[j]) {
                        *x = f.add(*x, f.mul(c, y));
                    }
                }
                // The leading entry sits in pivot column `lead` and is already one.
                out.push(InducedEquation { coeffs });
            }
        }
        Ok(out)
    }

    /// `s(L)` and every induced equation of that length.
    pub fn min_induced_length(&self) -> Result<(usize, Vec<InducedEquation>)> {
        let eqs = self.induced_equations()?;
        let s = eqs.iter().map(InducedEquation::length).min().ok_or(Error::EmptySystem)?;
        let shortest = eqs.into_iter().filter(|e| e.length() == s).collect();
        Ok((s, shortest))
    }

    fn rank_without_mask(&self, deleted: u64) -> usize {
        let rows: Vec<Vec<FieldElem>> = self
            .rref
            .iter()
            .map(|r| {
                r.iter()
                    .enumerate()
                    .filter(|(j, _)| deleted >> j & 1 == 0)
                    .map(|(_, &x)| x)
                    .collect()
            })
            .collect();
        rank(&self.field, &rows)
    }

    /// `m` minus the rank after deleting the columns in `cols`.
    pub fn rank_reduction(&self, cols: &[usize]) -> Result<usize> {
        let mut mask = 0u64;
        for &c in cols {
            if c >= self.k {
                return Err(Error::BadIndex { index: c, k: self.k });
            }
            mask |= 1 << c;
        }
        if self.k > 64 {
            let keep: Vec<usize> = (0..self.k).filter(|j| !cols.contains(j)).collect();
            let rows: Vec<Vec<FieldElem>> =
                self.rref.iter().map(|r| keep.iter().map(|&j| r[j]).collect()).collect();
            return Ok(self.m() - rank(&self.field, &rows));
        }
        Ok(self.m() - self.rank_without_mask(mask))
    }

    /// Enumerates all `2^k` column subsets and reports the good sets.
    pub fn good_sets(&self) -> Result<GoodSetReport> {
        if self.k > MAX_SUBSET_COLUMNS {
            return Err(Error::TooManyColumns(self.k));
        }
        let m = self.m();
        let reductions: Vec<u8> = (0u64..1 << self.k)
            .into_par_iter()
            .map(|mask| (m - self.rank_without_mask(mask)) as u8)
            .collect();
        // s(L) is the least size of a rank-reducing set.
        let s = (0u64..1 << self.k)
            .filter(|&b| reductions[b as usize] > 0)
            .map(|b| b.count_ones() as usize)
            .min()
            .ok_or(Error::EmptySystem)?;
        let is_good = |b: u64| {
            let t = reductions[b as usize] as usize;
            t >= 1 && b.count_ones() as usize == s + t - 1
        };
        let good: Vec<u64> = (0u64..1 << self.k).filter(|&b| is_good(b)).collect();
        let maximal: Vec<u64> = good
            .iter()
            .copied()
            .filter(|&b| !good.iter().any(|&c| c != b && c & b == b))
            .collect();

        // Every subset of a good set with size >= s is good.
        for &b in &good {
            let mut sub = b;
            loop {
                if sub.count_ones() as usize >= s && !is_good(sub) {
                    return Err(Error::Invariant(format!(
                        "subset {:?} of good set {:?} is not good",
                        mask_to_vec(sub),
                        mask_to_vec(b)
                    )));
                }
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & b;
            }
        }
        // Every good set lies in exactly one maximal good set.
        for &b in &good {
            let containers = maximal.iter().filter(|&&c| c & b == b).count();
            if containers != 1 {
                return Err(Error::Invariant(format!(
                    "good set {:?} lies in {containers} maximal good sets",
                    mask_to_vec(b)
                )));
            }
        }

        let good_sets = good
            .iter()
            .map(|&b| GoodSet {
                columns: mask_to_vec(b),
                t: reductions[b as usize] as usize - 1,
            })
            .collect();
        let rank_reduction = (0u64..1 << self.k)
            .filter(|&b| reductions[b as usize] > 0)
            .map(|b| (mask_to_vec(b), reductions[b as usize] as usize))
            .collect();
        Ok(GoodSetReport {
            s,
            good_sets,
            maximal_good_sets: maximal.into_iter().map(mask_to_vec).collect(),
            rank_reduction,
        })
    }

    /// Translation invariance and degeneracy.
    pub fn structural_flags(&self) -> StructuralFlags {
        let f = &*self.field;
        let translation_invariant = self
            .rref
            .iter()
            .all(|r| r.iter().fold(FieldElem::ZERO, |a, &x| f.add(a, x)).is_zero());
        let mut degenerate_pair = None;
        'outer: for i in 0..self.k {
            for j in i + 1..self.k {
                let mut v = vec![FieldElem::ZERO; self.k];
                v[i] = FieldElem::ONE;
                v[j] = f.neg(FieldElem::ONE);
                if self.contains(&v) {
                    degenerate_pair = Some((i, j));
                    break 'outer;
                }
            }
        }
        StructuralFlags {
            translation_invariant,
            degenerate: degenerate_pair.is_some(),
            degenerate_pair,
        }
    }

    /// Restriction of an induced equation to its support, as a 1-row system.
    pub fn restrict_equation(&self, eq: &InducedEquation) -> Result<LinearSystem> {
        LinearSystem::new(self.field.clone(), vec![eq.nonzero_coeffs()])
    }
}

pub(crate) fn mask_to_vec(mask: u64) -> Vec<usize> {
    (0..64).filter(|j| mask >> j & 1 == 1).collect()
}

/// A linear form in the row space, scaled so its first nonzero entry is one.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct InducedEquation {
    pub coeffs: Vec<FieldElem>,
}

impl InducedEquation {
    /// Scales `coeffs` to canonical form. Returns `None` for the zero vector.
    pub fn canonical(field: &FieldSpec, coeffs: Vec<FieldElem>) -> Option<Self> {
        let lead = *coeffs.iter().find(|x| !x.is_zero())?;
        let inv = field.inv(lead).ok()?;
        Some(InducedEquation {
            coeffs: coeffs.into_iter().map(|x| field.mul(x, inv)).collect(),
        })
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.coeffs.len()).filter(|&j| !self.coeffs[j].is_zero()).collect()
    }

    pub fn length(&self) -> usize {
        self.coeffs.iter().filter(|x| !x.is_zero()).count()
    }

    pub fn nonzero_coeffs(&self) -> Vec<FieldElem> {
        self.coeffs.iter().copied().filter(|x| !x.is_zero()).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoodSet {
    pub columns: Vec<usize>,
    /// The set is `(t + 1)`-rank-reducing and has size `s + t`.
    pub t: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoodSetReport {
    pub s: usize,
    pub good_sets: Vec<GoodSet>,
    pub maximal_good_sets: Vec<Vec<usize>>,
    /// Rank reduction of every rank-reducing column set.
    pub rank_reduction: BTreeMap<Vec<usize>, usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructuralFlags {
    pub translation_invariant: bool,
    pub degenerate: bool,
    /// A pair `(i, j)` with `x_i = x_j` induced, when degenerate.
    pub degenerate_pair: Option<(usize, usize)>,
}
