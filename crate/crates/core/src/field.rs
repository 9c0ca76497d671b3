//! Finite fields `F_q` with `q = p^e <= 2^20`.
//!
//! Elements are encoded as integers in `[0, q)` whose base-`p` digits are the
//! coefficients (low degree first) of a polynomial reduced modulo a fixed
//! monic irreducible polynomial. Multiplication goes through log/exp tables
//! built from a primitive element; addition is digitwise.

use std::fmt;

use num_complex::Complex;
use num_traits::{Float, FloatConst};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported field order.
pub const MAX_ORDER: u64 = 1 << 20;

/// An element of some [`FieldSpec`], stored by its integer encoding.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FieldElem(u32);

impl FieldElem {
    pub const ZERO: FieldElem = FieldElem(0);
    pub const ONE: FieldElem = FieldElem(1);

    /// Wraps a raw encoding. The caller is responsible for `value < q`.
    #[inline]
    pub const fn from_raw(value: u32) -> Self {
        FieldElem(value)
    }

    #[inline]
    pub const fn value(self) -> u32 {
        self.0
    }

    #[inline]
    pub const fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A finite field `F_{p^e}` with precomputed arithmetic tables.
#[derive(Clone)]
pub struct FieldSpec {
    p: u32,
    e: u32,
    q: u32,
    /// Monic modulus, coefficients `c_0..=c_e`.
    modulus: Vec<u32>,
    generator: u32,
    /// `exp[i] = g^i` for `i` in `0..2(q-1)`.
    exp: Vec<u32>,
    /// `log[x]` for nonzero `x`; `log[0]` is unused.
    log: Vec<u32>,
    /// Absolute trace into the prime field, indexed by encoding.
    trace: Vec<u32>,
}

impl fmt::Debug for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldSpec")
            .field("p", &self.p)
            .field("e", &self.e)
            .field("modulus", &self.modulus)
            .finish()
    }
}

impl PartialEq for FieldSpec {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.e == other.e && self.modulus == other.modulus
    }
}

impl Eq for FieldSpec {}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Splits `q` into `(p, e)` with `q = p^e`.
pub fn prime_power(q: u64) -> Result<(u32, u32)> {
    if q < 2 {
        return Err(Error::NotPrimePower(q));
    }
    let mut p = 2;
    while q % p != 0 {
        p += 1;
    }
    let mut rest = q;
    let mut e = 0;
    while rest % p == 0 {
        rest /= p;
        e += 1;
    }
    if rest != 1 {
        return Err(Error::NotPrimePower(q));
    }
    Ok((p as u32, e))
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

// Polynomials over F_p, coefficient vectors low degree first.

fn poly_trim(a: &mut Vec<u32>) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

fn poly_rem(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let mut r = a.to_vec();
    poly_trim(&mut r);
    let db = b.len() - 1;
    let lead_inv = pow_mod(b[db] as u64, p as u64 - 2, p as u64) as u32;
    while r.len() > db {
        let shift = r.len() - 1 - db;
        let c = (r[r.len() - 1] as u64 * lead_inv as u64 % p as u64) as u32;
        for (i, &bi) in b.iter().enumerate() {
            let sub = (c as u64 * bi as u64 % p as u64) as u32;
            r[shift + i] = (r[shift + i] + p - sub) % p;
        }
        poly_trim(&mut r);
    }
    r
}

fn poly_mulmod(a: &[u32], b: &[u32], modulus: &[u32], p: u32) -> Vec<u32> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut prod = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x as u64 * y as u64) % p as u64;
        }
    }
    let prod: Vec<u32> = prod.into_iter().map(|v| v as u32).collect();
    poly_rem(&prod, modulus, p)
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % m;
        }
        base = base * base % m;
        exp >>= 1;
    }
    acc
}

fn digits(mut v: u32, p: u32, e: u32) -> Vec<u32> {
    let mut out = Vec::with_capacity(e as usize);
    for _ in 0..e {
        out.push(v % p);
        v /= p;
    }
    out
}

fn undigits(d: &[u32], p: u32) -> u32 {
    d.iter().rev().fold(0, |acc, &x| acc * p + x)
}

/// Irreducibility by trial division against every monic polynomial of
/// degree `1..=deg/2`.
pub fn is_irreducible(poly: &[u32], p: u32) -> bool {
    let mut f = poly.to_vec();
    poly_trim(&mut f);
    if f.len() < 2 {
        return false;
    }
    let deg = f.len() - 1;
    for d in 1..=deg / 2 {
        let count = (p as u64).pow(d as u32);
        for low in 0..count {
            let mut g = digits(low as u32, p, d as u32);
            g.push(1);
            if poly_rem(&f, &g, p).is_empty() {
                return false;
            }
        }
    }
    true
}

/// The monic irreducible polynomial of degree `e` over `F_p` that is least
/// when coefficients are compared low degree first.
pub fn least_irreducible(p: u32, e: u32) -> Vec<u32> {
    let count = (p as u64).pow(e);
    for v in 0..count {
        // c_0 is the most significant key.
        let mut coeffs = vec![0u32; e as usize + 1];
        let mut rest = v;
        for i in (0..e as usize).rev() {
            coeffs[i] = (rest % p as u64) as u32;
            rest /= p as u64;
        }
        coeffs[e as usize] = 1;
        if is_irreducible(&coeffs, p) {
            return coeffs;
        }
    }
    unreachable!("irreducible polynomials exist in every degree")
}

impl FieldSpec {
    /// Builds `F_{p^e}` with the least irreducible modulus.
    pub fn new(p: u32, e: u32) -> Result<Self> {
        Self::check_order(p, e)?;
        let modulus = if e == 1 { vec![0, 1] } else { least_irreducible(p, e) };
        Self::build(p, e, modulus)
    }

    /// Builds `F_{p^e}` with an explicit monic modulus `c_0..=c_e`.
    pub fn with_modulus(p: u32, e: u32, modulus: Vec<u32>) -> Result<Self> {
        Self::check_order(p, e)?;
        if modulus.len() != e as usize + 1
            || modulus[e as usize] != 1
            || modulus.iter().any(|&c| c >= p)
            || !is_irreducible(&modulus, p)
        {
            return Err(Error::BadModulus(e));
        }
        Self::build(p, e, modulus)
    }

    /// Builds the field of order `q` with the default modulus.
    pub fn of_order(q: u64) -> Result<Self> {
        let (p, e) = prime_power(q)?;
        Self::new(p, e)
    }

    fn check_order(p: u32, e: u32) -> Result<()> {
        if !is_prime(p as u64) {
            return Err(Error::NotPrime(p as u64));
        }
        if e == 0 {
            return Err(Error::ZeroDegree);
        }
        let q = (p as u64).checked_pow(e).unwrap_or(u64::MAX);
        if q > MAX_ORDER {
            return Err(Error::FieldTooLarge(q));
        }
        Ok(())
    }

    fn build(p: u32, e: u32, modulus: Vec<u32>) -> Result<Self> {
        let q = p.pow(e);
        let order = (q - 1) as u64;
        let mul_raw = |a: u32, b: u32| -> u32 {
            if e == 1 {
                return (a as u64 * b as u64 % p as u64) as u32;
            }
            let r = poly_mulmod(&digits(a, p, e), &digits(b, p, e), &modulus, p);
            let mut d = r;
            d.resize(e as usize, 0);
            undigits(&d, p)
        };
        let pow_raw = |a: u32, mut k: u64| -> u32 {
            let mut acc = 1u32;
            let mut base = a;
            while k > 0 {
                if k & 1 == 1 {
                    acc = mul_raw(acc, base);
                }
                base = mul_raw(base, base);
                k >>= 1;
            }
            acc
        };
        let factors = prime_factors(order);
        let generator = if q == 2 {
            1
        } else {
            (2..q)
                .chain(std::iter::once(1))
                .find(|&g| factors.iter().all(|&l| pow_raw(g, order / l) != 1))
                .ok_or(Error::BadModulus(e))?
        };
        let n = (q - 1) as usize;
        let mut exp = vec![0u32; 2 * n.max(1)];
        let mut log = vec![0u32; q as usize];
        let mut x = 1u32;
        for i in 0..n {
            exp[i] = x;
            log[x as usize] = i as u32;
            x = mul_raw(x, generator);
        }
        if x != 1 {
            return Err(Error::Invariant("generator order is not q-1".into()));
        }
        for i in n..2 * n {
            exp[i] = exp[i - n];
        }
        let mut field = FieldSpec {
            p,
            e,
            q,
            modulus,
            generator,
            exp,
            log,
            trace: Vec::new(),
        };
        let trace = (0..q)
            .map(|v| field.trace_slow(FieldElem(v)).0)
            .collect::<Vec<_>>();
        if trace.iter().any(|&t| t >= p) {
            return Err(Error::Invariant("trace left the prime field".into()));
        }
        field.trace = trace;
        Ok(field)
    }

    #[inline]
    pub fn characteristic(&self) -> u32 {
        self.p
    }

    #[inline]
    pub fn degree(&self) -> u32 {
        self.e
    }

    #[inline]
    pub fn order(&self) -> u32 {
        self.q
    }

    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    pub fn generator(&self) -> FieldElem {
        FieldElem(self.generator)
    }

    pub fn is_prime_field(&self) -> bool {
        self.e == 1
    }

    /// Validates an encoding.
    pub fn elem(&self, value: u32) -> Result<FieldElem> {
        if value < self.q {
            Ok(FieldElem(value))
        } else {
            Err(Error::NotAnElement(value as i64))
        }
    }

    /// Maps a signed integer into the field. In a prime field this is
    /// reduction mod `p`; in an extension field `v` must satisfy `|v| < q`
    /// and `-v` denotes the additive inverse of the element encoded by `v`.
    pub fn from_signed(&self, v: i64) -> Result<FieldElem> {
        if self.e == 1 {
            return Ok(FieldElem(v.rem_euclid(self.p as i64) as u32));
        }
        let mag = v.unsigned_abs();
        if mag >= self.q as u64 {
            return Err(Error::NotAnElement(v));
        }
        let x = FieldElem(mag as u32);
        Ok(if v < 0 { self.neg(x) } else { x })
    }

    /// The image of an integer under `Z -> F_p -> F_q`.
    pub fn from_integer(&self, v: i64) -> FieldElem {
        FieldElem(v.rem_euclid(self.p as i64) as u32)
    }

    pub fn elements(&self) -> impl Iterator<Item = FieldElem> {
        (0..self.q).map(FieldElem)
    }

    pub fn nonzero_elements(&self) -> impl Iterator<Item = FieldElem> {
        (1..self.q).map(FieldElem)
    }

    #[inline]
    pub fn add(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        if self.e == 1 {
            let s = a.0 + b.0;
            return FieldElem(if s >= self.p { s - self.p } else { s });
        }
        if self.p == 2 {
            return FieldElem(a.0 ^ b.0);
        }
        let (mut x, mut y) = (a.0, b.0);
        let mut out = 0;
        let mut place = 1;
        for _ in 0..self.e {
            let d = (x % self.p + y % self.p) % self.p;
            out += d * place;
            place *= self.p;
            x /= self.p;
            y /= self.p;
        }
        FieldElem(out)
    }

    #[inline]
    pub fn neg(&self, a: FieldElem) -> FieldElem {
        if self.e == 1 {
            return FieldElem(if a.0 == 0 { 0 } else { self.p - a.0 });
        }
        if self.p == 2 {
            return a;
        }
        let mut x = a.0;
        let mut out = 0;
        let mut place = 1;
        for _ in 0..self.e {
            let d = x % self.p;
            out += ((self.p - d) % self.p) * place;
            place *= self.p;
            x /= self.p;
        }
        FieldElem(out)
    }

    #[inline]
    pub fn sub(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        if a.0 == 0 || b.0 == 0 {
            return FieldElem(0);
        }
        let i = self.log[a.0 as usize] + self.log[b.0 as usize];
        FieldElem(self.exp[i as usize])
    }

    pub fn inv(&self, a: FieldElem) -> Result<FieldElem> {
        if a.0 == 0 {
            return Err(Error::DivisionByZero);
        }
        let n = self.q - 1;
        let l = self.log[a.0 as usize];
        Ok(FieldElem(self.exp[((n - l) % n) as usize]))
    }

    pub fn div(&self, a: FieldElem, b: FieldElem) -> Result<FieldElem> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn pow(&self, a: FieldElem, k: u64) -> FieldElem {
        if k == 0 {
            return FieldElem::ONE;
        }
        if a.0 == 0 {
            return FieldElem::ZERO;
        }
        let n = (self.q - 1) as u64;
        let l = self.log[a.0 as usize] as u64 * (k % n) % n;
        FieldElem(self.exp[l as usize])
    }

    fn trace_slow(&self, x: FieldElem) -> FieldElem {
        let mut acc = FieldElem::ZERO;
        let mut y = x;
        for _ in 0..self.e {
            acc = self.add(acc, y);
            y = self.pow(y, self.p as u64);
        }
        acc
    }

    /// Absolute trace `x + x^p + ... + x^(p^(e-1))`, an element of `F_p`.
    #[inline]
    pub fn trace(&self, x: FieldElem) -> FieldElem {
        FieldElem(self.trace[x.0 as usize])
    }

    pub fn dot(&self, r: &[FieldElem], x: &[FieldElem]) -> Result<FieldElem> {
        if r.len() != x.len() {
            return Err(Error::DimensionMismatch {
                expected: r.len(),
                actual: x.len(),
            });
        }
        Ok(r
            .iter()
            .zip(x)
            .fold(FieldElem::ZERO, |acc, (&a, &b)| self.add(acc, self.mul(a, b))))
    }

    /// The `p`-th roots of unity `exp(-2 pi i t / p)` for `t` in `0..p`.
    pub fn character_table<T: Float + FloatConst>(&self) -> Vec<Complex<T>> {
        let p = T::from(self.p).unwrap();
        (0..self.p)
            .map(|t| {
                let angle = -T::TAU() * T::from(t).unwrap() / p;
                Complex::from_polar(T::one(), angle)
            })
            .collect()
    }

    /// `chi_r(x) = exp(-2 pi i Tr(r . x) / p)`.
    pub fn character<T: Float + FloatConst>(
        &self,
        r: &[FieldElem],
        x: &[FieldElem],
    ) -> Result<Complex<T>> {
        let t = self.trace(self.dot(r, x)?).0;
        let angle = -T::TAU() * T::from(t).unwrap() / T::from(self.p).unwrap();
        Ok(Complex::from_polar(T::one(), angle))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn prime_fields() {
        let f5 = FieldSpec::new(5, 1).unwrap();
        assert_eq!(f5.order(), 5);
        assert_eq!(f5.elements().count(), 5);
        let f2 = FieldSpec::new(2, 1).unwrap();
        assert_eq!(f2.add(FieldElem::ONE, FieldElem::ONE), FieldElem::ZERO);
    }

    #[test]
    fn f9_modulus_and_square_of_x() {
        let f9 = FieldSpec::new(3, 2).unwrap();
        assert_eq!(f9.modulus(), &[1, 0, 1]);
        let x = FieldElem::from_raw(3);
        assert_eq!(f9.mul(x, x), FieldElem::from_raw(2));
    }

    #[test]
    fn construction_errors() {
        assert_eq!(FieldSpec::new(4, 1).unwrap_err(), Error::NotPrime(4));
        assert_eq!(FieldSpec::new(2, 21).unwrap_err(), Error::FieldTooLarge(1 << 21));
        assert!(matches!(
            FieldSpec::with_modulus(3, 2, vec![2, 0, 1]),
            Err(Error::BadModulus(2))
        ));
        assert_eq!(FieldSpec::of_order(12).unwrap_err(), Error::NotPrimePower(12));
        assert_eq!(FieldSpec::of_order(4).unwrap().degree(), 2);
    }

    #[test]
    fn least_irreducible_matches_hand_enumeration() {
        // x^2 + x + 1 is the only irreducible quadratic over F_2.
        assert_eq!(least_irreducible(2, 2), vec![1, 1, 1]);
        // Degree 3 over F_2: (c0, c1, c2) = (1, 0, 1) sorts before (1, 1, 0).
        assert_eq!(least_irreducible(2, 3), vec![1, 0, 1, 1]);
        // x^2 + 1 splits over F_5 (2^2 = -1); x^2 + x + 1 has discriminant 2, a non-square.
        assert_eq!(least_irreducible(5, 2), vec![1, 1, 1]);
    }

    #[test]
    fn trace_examples() {
        let f5 = FieldSpec::new(5, 1).unwrap();
        assert_eq!(f5.trace(FieldElem::from_raw(3)), FieldElem::from_raw(3));
        let f9 = FieldSpec::new(3, 2).unwrap();
        assert_eq!(f9.trace(FieldElem::ONE), FieldElem::from_raw(2));
        // x + x^3 with x^2 = -1: x^3 = -x, so the trace of x is 0.
        assert_eq!(f9.trace(FieldElem::from_raw(3)), FieldElem::ZERO);
    }

    #[test]
    fn trace_is_additive_and_lands_in_prime_field() {
        for (p, e) in [(2, 3), (3, 2), (5, 2), (7, 1)] {
            let f = FieldSpec::new(p, e).unwrap();
            for a in f.elements() {
                assert!(f.trace(a).value() < p);
                for b in f.elements() {
                    let lhs = f.trace(f.add(a, b));
                    let rhs = f.add(f.trace(a), f.trace(b));
                    assert_eq!(lhs, rhs);
                }
            }
        }
    }

    #[test]
    fn multiplicative_group_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (p, e) in [(2, 1), (2, 5), (3, 3), (5, 2), (11, 1), (13, 2)] {
            let f = FieldSpec::new(p, e).unwrap();
            for _ in 0..100 {
                let x = FieldElem::from_raw(rng.gen_range(1..f.order()));
                assert_eq!(f.pow(x, f.order() as u64 - 1), FieldElem::ONE);
            }
        }
    }

    #[test]
    fn characters() {
        let f5 = FieldSpec::new(5, 1).unwrap();
        let one = [FieldElem::ONE];
        let z: Complex<f64> = f5.character(&[FieldElem::ZERO], &one).unwrap();
        assert_eq!(z, Complex::new(1.0, 0.0));
        let c: Complex<f64> = f5.character(&one, &one).unwrap();
        let expected = Complex::from_polar(1.0, -std::f64::consts::TAU / 5.0);
        assert!((c - expected).norm() < 1e-15);
        let total: Complex<f64> = f5
            .elements()
            .map(|x| f5.character(&one, &[x]).unwrap())
            .sum();
        assert!(total.norm() < 1e-12);
        assert!(matches!(
            f5.character::<f64>(&one, &[FieldElem::ONE, FieldElem::ONE]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn signed_parsing() {
        let f5 = FieldSpec::new(5, 1).unwrap();
        assert_eq!(f5.from_signed(-6).unwrap(), FieldElem::from_raw(4));
        let f9 = FieldSpec::new(3, 2).unwrap();
        assert_eq!(f9.from_signed(-3).unwrap(), f9.neg(FieldElem::from_raw(3)));
        assert!(f9.from_signed(9).is_err());
    }
}
