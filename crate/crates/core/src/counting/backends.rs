//! Exact counting backends.
//!
//! * brute force: depth-first search over `A^k` with running row sums, a row
//!   being checked as soon as its last variable is fixed;
//! * kernel: enumerates `sol(L, F_q^n) = sol(L, F_q)^n` coordinate by
//!   coordinate, pruning on prefixes that no point of `A` extends;
//! * meet in the middle: histogram of partial row sums over the first half of
//!   the variables, matched against the second half.

use rayon::prelude::*;

use crate::field::FieldElem;
use crate::linalg::LinearSystem;
use crate::space::Space;

use super::PointSet;

/// Parametrization of `sol(L, F_q)` by the free columns of the RREF.
pub(crate) struct Kernel {
    k: usize,
    q: u64,
    free: Vec<usize>,
    pivots: Vec<usize>,
    /// `neg_coeffs[r][j] = -rref[r][free[j]]`
    neg_coeffs: Vec<Vec<FieldElem>>,
    field: std::sync::Arc<crate::field::FieldSpec>,
    table: Option<Vec<u32>>,
}

impl Kernel {
    pub(crate) fn new(sys: &LinearSystem) -> Kernel {
        let f = sys.field();
        let free = sys.free_columns();
        let neg_coeffs = sys
            .rref_rows()
            .iter()
            .map(|row| free.iter().map(|&c| f.neg(row[c])).collect())
            .collect();
        let mut kernel = Kernel {
            k: sys.k(),
            q: f.order() as u64,
            free,
            pivots: sys.pivots().to_vec(),
            neg_coeffs,
            field: f.clone(),
            table: None,
        };
        let size = kernel.size();
        if size <= 1 << 18 {
            let mut flat = vec![0u32; size as usize * kernel.k];
            for (code, chunk) in flat.chunks_mut(kernel.k).enumerate() {
                kernel.decode(code as u64, chunk);
            }
            kernel.table = Some(flat);
        }
        kernel
    }

    /// `q^(k - m)`, saturating.
    pub(crate) fn size(&self) -> u64 {
        self.q.saturating_pow(self.free.len() as u32)
    }

    fn decode(&self, mut code: u64, out: &mut [u32]) {
        let f = &*self.field;
        let mut u = vec![FieldElem::ZERO; self.free.len()];
        for j in (0..self.free.len()).rev() {
            u[j] = FieldElem::from_raw((code % self.q) as u32);
            code /= self.q;
        }
        for (j, &c) in self.free.iter().enumerate() {
            out[c] = u[j].value();
        }
        for (r, &p) in self.pivots.iter().enumerate() {
            let v = self.neg_coeffs[r]
                .iter()
                .zip(&u)
                .fold(FieldElem::ZERO, |acc, (&a, &b)| f.add(acc, f.mul(a, b)));
            out[p] = v.value();
        }
    }

    #[inline]
    pub(crate) fn vector(&self, code: u64, out: &mut [u32]) {
        match &self.table {
            Some(t) => {
                let s = code as usize * self.k;
                out.copy_from_slice(&t[s..s + self.k]);
            }
            None => self.decode(code, out),
        }
    }
}

/// `prefixes[d][p]` says whether some point of `A` has its first `d + 1`
/// coordinates encoded as `p`.
fn prefix_tables(set: &PointSet) -> Vec<Vec<bool>> {
    let q = set.space().q();
    let n = set.dim();
    let mut out = Vec::with_capacity(n);
    for d in 1..=n {
        let width = q.pow(d as u32);
        let shift = q.pow((n - d) as u32);
        let mut t = vec![false; width];
        for &pt in set.indices() {
            t[pt as usize / shift] = true;
        }
        out.push(t);
    }
    out
}

struct Walk<'a> {
    kernel: &'a Kernel,
    n: usize,
    q: usize,
    prefixes: Option<Vec<Vec<bool>>>,
    /// Variables required to land in the set.
    checked: Vec<usize>,
}

impl Walk<'_> {
    fn descend<A>(&self, level: usize, idx: &mut [usize], acc: &mut A, leaf: &(impl Fn(&mut A, &[usize]) + Sync)) {
        if level == self.n {
            leaf(acc, idx);
            return;
        }
        let k = self.kernel.k;
        let mut v = vec![0u32; k];
        let saved = idx.to_vec();
        for code in 0..self.kernel.size() {
            self.kernel.vector(code, &mut v);
            if self.step(level, &saved, &v, idx) {
                self.descend(level + 1, idx, acc, leaf);
            }
        }
        idx.copy_from_slice(&saved);
    }

    #[inline]
    fn step(&self, level: usize, saved: &[usize], v: &[u32], idx: &mut [usize]) -> bool {
        for i in 0..idx.len() {
            idx[i] = saved[i] * self.q + v[i] as usize;
        }
        match &self.prefixes {
            Some(t) => self.checked.iter().all(|&i| t[level][idx[i]]),
            None => true,
        }
    }

    fn run<A: Send>(
        &self,
        make: impl Fn() -> A + Sync,
        leaf: impl Fn(&mut A, &[usize]) + Sync,
        merge: impl Fn(A, A) -> A,
    ) -> A {
        let k = self.kernel.k;
        let size = self.kernel.size();
        let chunks = size.min(512).max(1);
        let parts: Vec<A> = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let lo = size * c / chunks;
                let hi = size * (c + 1) / chunks;
                let mut acc = make();
                let mut v = vec![0u32; k];
                let zero = vec![0usize; k];
                let mut idx = vec![0usize; k];
                for code in lo..hi {
                    self.kernel.vector(code, &mut v);
                    if self.step(0, &zero, &v, &mut idx) {
                        self.descend(1, &mut idx, &mut acc, &leaf);
                    }
                }
                acc
            })
            .collect();
        let mut it = parts.into_iter();
        let first = it.next().unwrap_or_else(&make);
        it.fold(first, merge)
    }
}

/// Number of solutions whose variables in `checked` all lie in `set`
/// (other variables range over the whole space).
pub(crate) fn kernel_count(sys: &LinearSystem, set: &PointSet, checked: &[usize]) -> u64 {
    let kernel = Kernel::new(sys);
    let walk = Walk {
        kernel: &kernel,
        n: set.dim(),
        q: set.space().q(),
        prefixes: Some(prefix_tables(set)),
        checked: checked.to_vec(),
    };
    walk.run(|| 0u64, |acc, _| *acc += 1, |a, b| a + b)
}

/// Histogram over all solutions of the mask `{i : x_i in set}`.
pub(crate) fn kernel_membership_histogram(sys: &LinearSystem, set: &PointSet) -> Vec<u64> {
    let kernel = Kernel::new(sys);
    let k = sys.k();
    let walk = Walk {
        kernel: &kernel,
        n: set.dim(),
        q: set.space().q(),
        prefixes: None,
        checked: Vec::new(),
    };
    let members = set.members();
    walk.run(
        || vec![0u64; 1 << k],
        |acc, idx| {
            let mut mask = 0usize;
            for (i, &x) in idx.iter().enumerate() {
                if members[x] {
                    mask |= 1 << i;
                }
            }
            acc[mask] += 1;
        },
        |mut a, b| {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
            a
        },
    )
}

/// Distinct "used point" masks over all solutions, for spaces with at most
/// 64 points. A solution lies in `A^k` iff its mask is a subset of `A`.
pub(crate) fn kernel_usage_masks(sys: &LinearSystem, space: &Space) -> Vec<(u64, u64)> {
    assert!(space.size() <= 64);
    let kernel = Kernel::new(sys);
    let walk = Walk {
        kernel: &kernel,
        n: space.dim(),
        q: space.q(),
        prefixes: None,
        checked: Vec::new(),
    };
    let mut merged = walk.run(
        std::collections::BTreeMap::<u64, u64>::new,
        |acc, idx| {
            let mask = idx.iter().fold(0u64, |m, &x| m | 1 << x);
            *acc.entry(mask).or_default() += 1;
        },
        |mut a, b| {
            for (m, c) in b {
                *a.entry(m).or_default() += c;
            }
            a
        },
    );
    std::mem::take(&mut merged).into_iter().collect()
}

/// Rows with, for every variable, the table `a -> L[j][i] * A[a]`.
struct ScaledRows {
    rows: usize,
    k: usize,
    /// `tables[j * k + i]` is empty when the coefficient is zero.
    tables: Vec<Vec<u32>>,
}

impl ScaledRows {
    fn new(sys: &LinearSystem, set: &PointSet, negate_from: usize) -> ScaledRows {
        let f = sys.field();
        let space = set.space();
        let rows = sys.rref_rows();
        let mut tables = Vec::with_capacity(rows.len() * sys.k());
        for row in rows {
            for (i, &c) in row.iter().enumerate() {
                if c.is_zero() {
                    tables.push(Vec::new());
                } else {
                    let c = if i >= negate_from { f.neg(c) } else { c };
                    tables.push(set.indices().iter().map(|&x| space.scale(c, x as usize) as u32).collect());
                }
            }
        }
        ScaledRows {
            rows: rows.len(),
            k: sys.k(),
            tables,
        }
    }

    #[inline]
    fn table(&self, j: usize, i: usize) -> &[u32] {
        &self.tables[j * self.k + i]
    }
}

pub(crate) fn brute_force_count(sys: &LinearSystem, set: &PointSet) -> u64 {
    if set.is_empty() {
        return 0;
    }
    let space = set.space();
    let scaled = ScaledRows::new(sys, set, usize::MAX);
    let k = sys.k();
    let last: Vec<usize> = sys
        .rref_rows()
        .iter()
        .map(|r| (0..k).rev().find(|&i| !r[i].is_zero()).unwrap_or(0))
        .collect();
    let closes: Vec<Vec<usize>> = (0..k)
        .map(|i| (0..scaled.rows).filter(|&j| last[j] == i).collect())
        .collect();

    fn dfs(
        i: usize,
        sums: &mut [usize],
        ctx: &(&ScaledRows, &Space, &[Vec<usize>], usize, usize),
    ) -> u64 {
        let (scaled, space, closes, k, size) = *ctx;
        if i == k {
            return 1;
        }
        let saved = sums.to_vec();
        let mut total = 0;
        for a in 0..size {
            for j in 0..scaled.rows {
                let t = scaled.table(j, i);
                sums[j] = if t.is_empty() { saved[j] } else { space.add(saved[j], t[a] as usize) };
            }
            if closes[i].iter().all(|&j| sums[j] == 0) {
                total += dfs(i + 1, sums, ctx);
            }
        }
        sums.copy_from_slice(&saved);
        total
    }

    let size = set.len();
    let closes_ref: &[Vec<usize>] = &closes;
    (0..size)
        .into_par_iter()
        .map(|a| {
            let ctx = (&scaled, space, closes_ref, k, size);
            let mut sums: Vec<usize> = (0..scaled.rows)
                .map(|j| {
                    let t = scaled.table(j, 0);
                    if t.is_empty() { 0 } else { t[a] as usize }
                })
                .collect();
            if !closes[0].iter().all(|&j| sums[j] == 0) {
                return 0;
            }
            dfs(1, &mut sums, &ctx)
        })
        .sum()
}

/// Splits variables at `k / 2`; requires `(q^n)^m` histogram slots.
pub(crate) fn meet_in_middle_count(sys: &LinearSystem, set: &PointSet) -> u64 {
    if set.is_empty() {
        return 0;
    }
    let k = sys.k();
    let h = k / 2;
    let space = set.space();
    let n_pts = space.size();
    // Right-hand variables use negated coefficients, so matching keys are equal.
    let scaled = ScaledRows::new(sys, set, h);
    let rows = scaled.rows;
    let key = |sums: &[usize]| sums.iter().rev().fold(0usize, |acc, &s| acc * n_pts + s);
    let slots = n_pts.pow(rows as u32);

    fn enumerate(
        i: usize,
        end: usize,
        sums: &mut Vec<usize>,
        scaled: &ScaledRows,
        space: &Space,
        size: usize,
        visit: &mut dyn FnMut(&[usize]),
    ) {
        if i == end {
            visit(sums);
            return;
        }
        let saved = sums.clone();
        for a in 0..size {
            for j in 0..scaled.rows {
                let t = scaled.table(j, i);
                sums[j] = if t.is_empty() { saved[j] } else { space.add(saved[j], t[a] as usize) };
            }
            enumerate(i + 1, end, sums, scaled, space, size, visit);
        }
        *sums = saved;
    }

    let size = set.len();
    let mut hist = vec![0u32; slots];
    let mut sums = vec![0usize; rows];
    enumerate(0, h, &mut sums, &scaled, space, size, &mut |s| hist[key(s)] += 1);
    let hist = &hist;
    if h == k {
        return hist[0] as u64;
    }
    (0..size)
        .into_par_iter()
        .map(|a| {
            let mut sums: Vec<usize> = (0..rows)
                .map(|j| {
                    let t = scaled.table(j, h);
                    if t.is_empty() { 0 } else { t[a] as usize }
                })
                .collect();
            let mut total = 0u64;
            enumerate(h + 1, k, &mut sums, &scaled, space, size, &mut |s| {
                total += hist[key(s)] as u64
            });
            total
        })
        .sum()
}

/// `Σ_{x in sol(L, F_q^n)} Π_i values[x_i]`.
pub(crate) fn kernel_product_sum<T: crate::scalar::Real>(sys: &LinearSystem, space: &Space, values: &[T]) -> T {
    let kernel = Kernel::new(sys);
    let walk = Walk {
        kernel: &kernel,
        n: space.dim(),
        q: space.q(),
        prefixes: None,
        checked: Vec::new(),
    };
    walk.run(
        T::zero,
        |acc, idx| *acc = *acc + idx.iter().fold(T::one(), |p, &x| p * values[x]),
        |a, b| a + b,
    )
}
