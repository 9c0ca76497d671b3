//! The vector space `F_q^n`, with points encoded as integers in `[0, q^n)`.
//!
//! The first coordinate is the most significant base-`q` digit (row-major),
//! so encodings sort lexicographically by coordinates.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::{FieldElem, FieldSpec};

/// Upper bound on `q^n` for any explicit space.
pub const MAX_POINTS: u64 = 1 << 26;

#[derive(Clone, Debug)]
pub struct Space {
    field: Arc<FieldSpec>,
    n: usize,
    size: usize,
}

impl PartialEq for Space {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && *self.field == *other.field
    }
}

impl Space {
    pub fn new(field: Arc<FieldSpec>, n: usize) -> Result<Self> {
        let size = checked_power(field.order() as u64, n as u64);
        match size {
            Some(s) if s <= MAX_POINTS && n >= 1 => Ok(Space {
                field,
                n,
                size: s as usize,
            }),
            Some(_) if n == 0 => Err(Error::DimensionMismatch {
                expected: 1,
                actual: 0,
            }),
            _ => Err(Error::TooLarge(size.unwrap_or(u64::MAX))),
        }
    }

    #[inline]
    pub fn field(&self) -> &Arc<FieldSpec> {
        &self.field
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Number of points, `q^n`.
    #[inline]
    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn q(&self) -> usize {
        self.field.order() as usize
    }

    pub fn index(&self, coords: &[FieldElem]) -> Result<usize> {
        if coords.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                actual: coords.len(),
            });
        }
        let q = self.q();
        Ok(coords.iter().fold(0, |acc, c| acc * q + c.value() as usize))
    }

    pub fn coords(&self, mut idx: usize) -> Vec<FieldElem> {
        let q = self.q();
        let mut out = vec![FieldElem::ZERO; self.n];
        for slot in out.iter_mut().rev() {
            *slot = FieldElem::from_raw((idx % q) as u32);
            idx /= q;
        }
        out
    }

    #[inline]
    pub fn add(&self, a: usize, b: usize) -> usize {
        let q = self.q();
        let f = &*self.field;
        let (mut a, mut b) = (a, b);
        let mut out = 0;
        let mut place = 1;
        for _ in 0..self.n {
            let d = f.add(
                FieldElem::from_raw((a % q) as u32),
                FieldElem::from_raw((b % q) as u32),
            );
            out += d.value() as usize * place;
            place *= q;
            a /= q;
            b /= q;
        }
        out
    }

    #[inline]
    pub fn neg(&self, a: usize) -> usize {
        self.scale(self.field.neg(FieldElem::ONE), a)
    }

    #[inline]
    pub fn scale(&self, c: FieldElem, a: usize) -> usize {
        let q = self.q();
        let f = &*self.field;
        let mut a = a;
        let mut out = 0;
        let mut place = 1;
        for _ in 0..self.n {
            let d = f.mul(c, FieldElem::from_raw((a % q) as u32));
            out += d.value() as usize * place;
            place *= q;
            a /= q;
        }
        out
    }

    /// Table `x -> c x` over all points.
    pub fn scale_table(&self, c: FieldElem) -> Vec<u32> {
        (0..self.size).map(|x| self.scale(c, x) as u32).collect()
    }

    /// `Tr(r . x)` as an integer in `[0, p)`.
    #[inline]
    pub fn trace_dot(&self, r: usize, x: usize) -> u32 {
        let q = self.q();
        let f = &*self.field;
        let (mut r, mut x) = (r, x);
        let mut acc = FieldElem::ZERO;
        for _ in 0..self.n {
            acc = f.add(
                acc,
                f.mul(
                    FieldElem::from_raw((r % q) as u32),
                    FieldElem::from_raw((x % q) as u32),
                ),
            );
            r /= q;
            x /= q;
        }
        f.trace(acc).value()
    }

    /// Calls `visit(r, Tr(r . x))` for every `r` in index order.
    pub fn for_each_trace_dot(&self, x: usize, mut visit: impl FnMut(usize, u32)) {
        let coords = self.coords(x);
        let f = &*self.field;
        let q = self.q() as u32;
        // partial[d] = sum over the first d coordinates of r_j x_j
        let mut partial = vec![FieldElem::ZERO; self.n + 1];
        let mut digits = vec![0u32; self.n];
        let mut r = 0usize;
        loop {
            visit(r, f.trace(partial[self.n]).value());
            // odometer increment on the last coordinate
            let mut d = self.n;
            loop {
                if d == 0 {
                    return;
                }
                d -= 1;
                digits[d] += 1;
                if digits[d] < q {
                    break;
                }
                digits[d] = 0;
            }
            for j in d..self.n {
                partial[j + 1] = f.add(
                    partial[j],
                    f.mul(FieldElem::from_raw(digits[j]), coords[j]),
                );
            }
            r += 1;
        }
    }
}

pub(crate) fn checked_power(base: u64, exp: u64) -> Option<u64> {
    let mut acc: u64 = 1;
    for _ in 0..exp {
        acc = acc.checked_mul(base)?;
    }
    Some(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_roundtrip_and_ops() {
        let f = Arc::new(FieldSpec::new(3, 2).unwrap());
        let s = Space::new(f.clone(), 2).unwrap();
        assert_eq!(s.size(), 81);
        for i in 0..s.size() {
            assert_eq!(s.index(&s.coords(i)).unwrap(), i);
            assert_eq!(s.add(i, s.neg(i)), 0);
        }
        let a = s.index(&[FieldElem::from_raw(3), FieldElem::from_raw(1)]).unwrap();
        let b = s.index(&[FieldElem::from_raw(4), FieldElem::from_raw(2)]).unwrap();
        let sum = s.coords(s.add(a, b));
        assert_eq!(sum, vec![f.add(FieldElem::from_raw(3), FieldElem::from_raw(4)), FieldElem::ZERO]);
    }

    #[test]
    fn trace_dot_sweep_matches_pointwise() {
        let f = Arc::new(FieldSpec::new(2, 2).unwrap());
        let s = Space::new(f, 3).unwrap();
        for x in [0, 5, 17, 63] {
            let mut seen = 0;
            s.for_each_trace_dot(x, |r, t| {
                assert_eq!(r, seen);
                assert_eq!(t, s.trace_dot(r, x));
                seen += 1;
            });
            assert_eq!(seen, s.size());
        }
    }

    #[test]
    fn too_large() {
        let f = Arc::new(FieldSpec::new(1021, 1).unwrap());
        assert!(matches!(Space::new(f, 3), Err(Error::TooLarge(_))));
    }
}
