//! Fourier analysis on `F_q^n`.
//!
//! Conventions: `f̂(r) = q^(-n) Σ_x f(x) ω^(-Tr(r·x))` with `ω = exp(2πi/p)`,
//! so `f̂(0) = E f` and `f(x) = Σ_r f̂(r) ω^(Tr(r·x))`.

mod fpz;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::counting::{kernel_product_sum, PointSet, KERNEL_BUDGET};
use crate::error::{Error, Result};
use crate::field::{FieldElem, FieldSpec};
use crate::linalg::{InducedEquation, LinearSystem};
use crate::scalar::Real;
use crate::space::Space;

pub use fpz::{build_fpz_function, FpzFunction, Thm43Instance, DEFAULT_EPSILON, MAX_SIGN_RETRIES};

/// Largest `q^n` accepted by the transform.
pub const MAX_TRANSFORM: u64 = 1_000_000;
/// Below this many points the transform is evaluated directly.
pub const NAIVE_LIMIT: usize = 4096;

fn check_size(space: &Space) -> Result<()> {
    if space.size() as u64 > MAX_TRANSFORM {
        return Err(Error::TooLarge(space.size() as u64));
    }
    Ok(())
}

fn check_len(space: &Space, len: usize) -> Result<()> {
    if len != space.size() {
        return Err(Error::DimensionMismatch {
            expected: space.size(),
            actual: len,
        });
    }
    Ok(())
}

fn cast<T: Real>(x: f64) -> T {
    T::from(x).unwrap()
}

/// Direct `O(q^2n)` evaluation; `forward` selects the sign and the `q^(-n)`
/// normalization.
pub fn naive_transform<T: Real>(space: &Space, data: &[Complex<T>], forward: bool) -> Result<Vec<Complex<T>>> {
    check_size(space)?;
    check_len(space, data.len())?;
    let chars = character_lookup::<T>(space.field(), forward);
    let scale = if forward { T::one() / cast::<T>(space.size() as f64) } else { T::one() };
    Ok((0..space.size())
        .into_par_iter()
        .map(|r| {
            let mut acc = Complex::new(T::zero(), T::zero());
            for (x, &v) in data.iter().enumerate() {
                acc = acc + v * chars[space.trace_dot(r, x) as usize];
            }
            acc * scale
        })
        .collect())
}

/// Row-column transform: one `q x q` pass per coordinate axis.
pub fn fast_transform<T: Real>(space: &Space, data: &[Complex<T>], forward: bool) -> Result<Vec<Complex<T>>> {
    check_size(space)?;
    check_len(space, data.len())?;
    let f = space.field();
    let q = space.q();
    let chars = character_lookup::<T>(f, forward);
    // matrix[r * q + x] = character value for Tr(r x) in F_q
    let matrix: Vec<Complex<T>> = (0..q * q)
        .map(|i| {
            let t = f.trace(f.mul(FieldElem::from_raw((i / q) as u32), FieldElem::from_raw((i % q) as u32)));
            chars[t.value() as usize]
        })
        .collect();
    let mut out = data.to_vec();
    let n = space.dim();
    for axis in 0..n {
        let stride = q.pow((n - 1 - axis) as u32);
        out.par_chunks_mut(q * stride).for_each(|block| {
            let mut line = vec![Complex::new(T::zero(), T::zero()); q];
            for inner in 0..stride {
                for (t, slot) in line.iter_mut().enumerate() {
                    *slot = block[inner + t * stride];
                }
                for r in 0..q {
                    let row = &matrix[r * q..(r + 1) * q];
                    let v = row
                        .iter()
                        .zip(&line)
                        .fold(Complex::new(T::zero(), T::zero()), |acc, (&c, &v)| acc + c * v);
                    block[inner + r * stride] = v;
                }
            }
        });
    }
    if forward {
        let scale = T::one() / cast::<T>(space.size() as f64);
        for v in &mut out {
            *v = *v * scale;
        }
    }
    Ok(out)
}

/// `chars[t] = ω^(-t)` for the forward transform, `ω^t` for the inverse.
fn character_lookup<T: Real>(field: &FieldSpec, forward: bool) -> Vec<Complex<T>> {
    let table = field.character_table::<T>();
    if forward {
        table
    } else {
        table.iter().map(|c| c.conj()).collect()
    }
}

pub fn transform<T: Real>(space: &Space, data: &[Complex<T>], forward: bool) -> Result<Vec<Complex<T>>> {
    if space.size() < NAIVE_LIMIT {
        naive_transform(space, data, forward)
    } else {
        fast_transform(space, data, forward)
    }
}

/// A function on `F_q^n` together with its Fourier coefficients.
#[derive(Clone, Debug)]
pub struct SpectralFunction<T: Real> {
    space: Space,
    values: Vec<T>,
    coeffs: Vec<Complex<T>>,
}

/// The function-file document.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FunctionFile {
    pub q: u64,
    pub n: usize,
    pub values: Vec<f64>,
}

impl<T: Real> SpectralFunction<T> {
    pub fn from_values(space: Space, values: Vec<T>) -> Result<Self> {
        check_len(&space, values.len())?;
        let data: Vec<Complex<T>> = values.iter().map(|&v| Complex::new(v, T::zero())).collect();
        let coeffs = transform(&space, &data, true)?;
        Ok(SpectralFunction { space, values, coeffs })
    }

    /// Builds `f` from `f̂`. The coefficients must be conjugate-symmetric up
    /// to rounding; the imaginary part of the inverse is discarded.
    pub fn from_coefficients(space: Space, coeffs: Vec<Complex<T>>) -> Result<Self> {
        check_len(&space, coeffs.len())?;
        let values = transform(&space, &coeffs, false)?.into_iter().map(|c| c.re).collect();
        Ok(SpectralFunction { space, values, coeffs })
    }

    pub fn indicator(set: &PointSet) -> Result<Self> {
        let values = set.members().iter().map(|&b| if b { T::one() } else { T::zero() }).collect();
        Self::from_values(set.space().clone(), values)
    }

    pub fn constant(space: Space, c: T) -> Result<Self> {
        check_size(&space)?;
        let mut coeffs = vec![Complex::new(T::zero(), T::zero()); space.size()];
        coeffs[0] = Complex::new(c, T::zero());
        let values = vec![c; space.size()];
        Ok(SpectralFunction { space, values, coeffs })
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn coeffs(&self) -> &[Complex<T>] {
        &self.coeffs
    }

    #[inline]
    pub fn coeff(&self, r: usize) -> Complex<T> {
        self.coeffs[r]
    }

    /// `E f = f̂(0)`.
    pub fn mean(&self) -> T {
        self.coeffs[0].re
    }

    pub fn in_unit_range(&self, tol: T) -> bool {
        self.values.iter().all(|&v| v >= -tol && v <= T::one() + tol)
    }

    /// `max_x |f(x) - inverse(f̂)(x)|`.
    pub fn round_trip_error(&self) -> Result<T> {
        let back = transform(&self.space, &self.coeffs, false)?;
        Ok(back
            .iter()
            .zip(&self.values)
            .map(|(b, &v)| (*b - Complex::new(v, T::zero())).norm())
            .fold(T::zero(), T::max))
    }

    /// `|Σ_r |f̂(r)|^2 - E f^2|`.
    pub fn parseval_gap(&self) -> T {
        let lhs: T = self.coeffs.iter().map(|c| c.norm_sqr()).sum();
        let rhs: T = self.values.iter().map(|&v| v * v).sum::<T>() / cast::<T>(self.space.size() as f64);
        (lhs - rhs).abs()
    }

    /// `max_r |f̂(-r) - conj(f̂(r))|`.
    pub fn conjugate_symmetry_gap(&self) -> T {
        (0..self.space.size())
            .map(|r| (self.coeffs[self.space.neg(r)] - self.coeffs[r].conj()).norm())
            .fold(T::zero(), T::max)
    }

    pub fn to_file(&self) -> FunctionFile {
        FunctionFile {
            q: self.space.q() as u64,
            n: self.space.dim(),
            values: self.values.iter().map(|v| v.to_f64().unwrap()).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_file()).expect("plain data serializes")
    }

    /// Parses a function file; the field is built with its default modulus.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: FunctionFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::from_file(file, None)
    }

    pub fn from_file(file: FunctionFile, field: Option<std::sync::Arc<FieldSpec>>) -> Result<Self> {
        let field = match field {
            Some(f) if f.order() as u64 == file.q => f,
            Some(f) => {
                return Err(Error::Parse(format!("function is over F_{}, expected F_{}", file.q, f.order())))
            }
            None => std::sync::Arc::new(FieldSpec::of_order(file.q)?),
        };
        let space = Space::new(field, file.n)?;
        Self::from_values(space, file.values.into_iter().map(cast::<T>).collect())
    }
}

/// `τ_E(f) = Σ_{r ≠ 0} Π_i f̂(a_i r)` over the nonzero coefficients `a_i`.
pub fn tau<T: Real>(coeffs: &[FieldElem], f: &SpectralFunction<T>) -> Result<Complex<T>> {
    let space = f.space();
    let nz: Vec<FieldElem> = coeffs.iter().copied().filter(|c| !c.is_zero()).collect();
    if nz.is_empty() {
        return Err(Error::ZeroForm);
    }
    let tables: Vec<Vec<u32>> = nz.iter().map(|&a| space.scale_table(a)).collect();
    let terms: Vec<Complex<T>> = (1..space.size())
        .into_par_iter()
        .map(|r| tau_term(&tables, f, r))
        .collect();
    Ok(terms.into_iter().fold(Complex::new(T::zero(), T::zero()), |a, b| a + b))
}

#[inline]
fn tau_term<T: Real>(tables: &[Vec<u32>], f: &SpectralFunction<T>, r: usize) -> Complex<T> {
    tables
        .iter()
        .fold(Complex::new(T::one(), T::zero()), |acc, t| acc * f.coeff(t[r] as usize))
}

/// `Λ_L(f) = E_{x ∈ sol(L)} Π_i f(x_i)`, evaluated spectrally as
/// `Σ_{s ∈ (F_q^n)^m} Π_i f̂(Σ_j L_ji s_j)`.
pub fn system_density<T: Real>(sys: &LinearSystem, f: &SpectralFunction<T>) -> Result<Complex<T>> {
    if **sys.field() != **f.space().field() {
        return Err(Error::Invariant("system and function live over different fields".into()));
    }
    let space = f.space();
    let size = space.size();
    let m = sys.m();
    let rows = sys.rref_rows();
    let slots = (size as u128).checked_pow(m as u32).unwrap_or(u128::MAX);
    if slots > crate::counting::FOURIER_BUDGET as u128 {
        return Err(Error::BudgetExceeded(format!("{slots} frequency tuples")));
    }
    // scaled[j][i] maps s_j to L_ji s_j (empty when the coefficient is zero)
    let scaled: Vec<Vec<Vec<u32>>> = rows
        .iter()
        .map(|row| {
            row.iter()
                .map(|&c| if c.is_zero() { Vec::new() } else { space.scale_table(c) })
                .collect()
        })
        .collect();
    let k = sys.k();
    let parts: Vec<Complex<T>> = (0..size)
        .into_par_iter()
        .map(|s0| {
            let mut acc = Complex::new(T::zero(), T::zero());
            let mut s = vec![0usize; m];
            s[0] = s0;
            let inner = size.pow(m as u32 - 1);
            for code in 0..inner {
                let mut c = code;
                for slot in s.iter_mut().skip(1).rev() {
                    *slot = c % size;
                    c /= size;
                }
                let mut prod = Complex::new(T::one(), T::zero());
                for i in 0..k {
                    let mut freq = 0usize;
                    for j in 0..m {
                        let t = &scaled[j][i];
                        if !t.is_empty() {
                            freq = space.add(freq, t[s[j]] as usize);
                        }
                    }
                    prod = prod * f.coeff(freq);
                    if prod.re == T::zero() && prod.im == T::zero() {
                        break;
                    }
                }
                acc = acc + prod;
            }
            acc
        })
        .collect();
    Ok(parts.into_iter().fold(Complex::new(T::zero(), T::zero()), |a, b| a + b))
}

/// `Λ_L(f)` by direct enumeration of `sol(L, F_q^n)`.
pub fn direct_density<T: Real>(sys: &LinearSystem, f: &SpectralFunction<T>) -> Result<T> {
    let space = f.space();
    let total = (space.q() as u128).checked_pow((space.dim() * (sys.k() - sys.m())) as u32);
    match total {
        Some(t) if t <= KERNEL_BUDGET as u128 => {
            Ok(kernel_product_sum(sys, space, f.values()) / cast::<T>(t as f64))
        }
        _ => Err(Error::BudgetExceeded("kernel enumeration of the equation".into())),
    }
}

/// Both sides of `Λ_E(f) = (E f)^k + τ_E(f)`.
#[derive(Clone, Debug)]
pub struct TwistedCheck<T: Real> {
    pub density: T,
    pub mean_power: T,
    pub tau: Complex<T>,
}

/// Checks `Λ_E(f) = (E f)^k + τ_E(f)` to relative tolerance `1e-8`, with
/// `Λ_E(f)` from kernel enumeration and `k` the length of `E`.
pub fn twisted_identity<T: Real>(coeffs: &[FieldElem], f: &SpectralFunction<T>) -> Result<TwistedCheck<T>> {
    let nz: Vec<FieldElem> = coeffs.iter().copied().filter(|c| !c.is_zero()).collect();
    if nz.is_empty() {
        return Err(Error::ZeroForm);
    }
    let sys = LinearSystem::new(f.space().field().clone(), vec![nz.clone()])?;
    let density = direct_density(&sys, f)?;
    let mean_power = f.mean().powi(nz.len() as i32);
    let t = tau(&nz, f)?;
    let err = (density - mean_power - t.re).abs().max(t.im.abs());
    if err > cast::<T>(1e-8) * density.max(T::one()) {
        return Err(Error::IdentityViolated(format!(
            "twisted identity off by {:e}",
            err.to_f64().unwrap()
        )));
    }
    Ok(TwistedCheck { density, mean_power, tau: t })
}

/// `τ_{L_i}(f)` for the `k` shortest equations of a `2 x k` system with
/// `k ≥ 5` odd and `s(L) = k - 1`.
#[derive(Clone, Debug, Serialize)]
pub struct TauReport<T: Real + Serialize> {
    /// Equation `i` omits variable `i`.
    pub equations: Vec<InducedEquation>,
    pub sidorenko: Vec<bool>,
    pub taus: Vec<Complex<T>>,
    pub sum: T,
    /// Largest `|Π_j f̂(a_ij h)|` over non-Sidorenko equations and `h ≠ 0`.
    pub xi: T,
    /// Sum of the terms attaining `xi`.
    pub zeta: T,
    pub mean: T,
}

impl<T: Real + Serialize> TauReport<T> {
    /// A negative sum at mean `1/2` witnesses that the system is uncommon.
    pub fn witnesses_uncommon(&self) -> bool {
        self.sum < T::zero() && (self.mean - cast::<T>(0.5)).abs() <= cast::<T>(1e-9)
    }
}

pub fn sum_tau_shortest<T: Real + Serialize>(sys: &LinearSystem, f: &SpectralFunction<T>) -> Result<TauReport<T>> {
    if sys.k() < 5 {
        return Err(Error::HypothesisViolated(format!("need k >= 5, got {}", sys.k())));
    }
    let equations = crate::counting::shortest_equations_by_column(sys)?;
    let field = sys.field();
    let space = f.space();
    let sidorenko: Vec<bool> = equations
        .iter()
        .map(|e| crate::classify::single_equation_is_sidorenko(field, &e.nonzero_coeffs()))
        .collect();
    let taus = equations
        .iter()
        .map(|e| tau(&e.coeffs, f))
        .collect::<Result<Vec<_>>>()?;
    let sum = taus.iter().map(|t| t.re).sum();

    let mut terms = Vec::new();
    for (e, &sid) in equations.iter().zip(&sidorenko) {
        if sid {
            continue;
        }
        let tables: Vec<Vec<u32>> = e.nonzero_coeffs().iter().map(|&a| space.scale_table(a)).collect();
        terms.extend((1..space.size()).map(|r| tau_term(&tables, f, r)));
    }
    let xi = terms.iter().map(|t| t.norm()).fold(T::zero(), T::max);
    let tol = xi * cast::<T>(1e-9);
    let zeta = if xi > T::zero() {
        terms
            .iter()
            .filter(|t| (t.norm() - xi).abs() <= tol)
            .map(|t| t.re)
            .sum()
    } else {
        T::zero()
    };
    Ok(TauReport {
        equations,
        sidorenko,
        taus,
        sum,
        xi,
        zeta,
        mean: f.mean(),
    })
}

/// Random set in `F_q^(n + extra)` containing `(x, y)` with probability
/// `f(x)`, independently. Points are visited in encoding order.
pub fn round_to_set<T: Real>(f: &SpectralFunction<T>, extra: usize, seed: u64) -> Result<PointSet> {
    let space = Space::new(f.space().field().clone(), f.space().dim() + extra)?;
    check_size(&space)?;
    let block = space.size() / f.space().size();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let members = (0..space.size())
        .map(|i| {
            let p = f.values()[i / block].to_f64().unwrap().clamp(0.0, 1.0);
            rng.gen::<f64>() < p
        })
        .collect();
    Ok(PointSet::from_members(space, members))
}
