//! Exact solution counts, densities `Λ_L(A)`, partial densities `t_B`, and
//! the Sidorenko and common deficits.
//!
//! Every density is an exact rational. Several backends are available and
//! cross-check each other; the Fourier backend is the only one that touches
//! floating point, and its result is rounded to an integer.

mod backends;
mod pointset;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{InducedEquation, LinearSystem};
use crate::scalar::Scalar;

pub use pointset::PointSet;

pub(crate) use backends::{kernel_product_sum, kernel_usage_masks};

/// Upper bound on `|A|^k` for [`Method::BruteForce`].
pub const BRUTE_FORCE_BUDGET: u64 = 100_000_000;
/// Upper bound on `q^(n(k-m))` for [`Method::Kernel`].
pub const KERNEL_BUDGET: u64 = 100_000_000;
/// Upper bound on `q^(nm)` for [`Method::Fourier`].
pub const FOURIER_BUDGET: u64 = 10_000_000;
/// Upper bound on histogram slots `q^(nm)` for [`Method::MeetInMiddle`].
pub const MEET_SLOTS_BUDGET: u64 = 10_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    BruteForce,
    Kernel,
    Fourier,
    MeetInMiddle,
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "brute_force" | "brute" => Ok(Method::BruteForce),
            "kernel" => Ok(Method::Kernel),
            "fourier" => Ok(Method::Fourier),
            "meet_in_middle" | "mitm" => Ok(Method::MeetInMiddle),
            _ => Err(Error::Parse(format!("unknown counting method {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolutionCount {
    #[serde(with = "crate::scalar::serde_biguint")]
    pub count: BigUint,
    /// `|sol(L, F_q^n)| = q^(n(k-m))`.
    #[serde(with = "crate::scalar::serde_biguint")]
    pub total: BigUint,
    pub method: Method,
    /// Set when the count came from rounding a float sum that no exact
    /// backend could confirm.
    pub float_derived: bool,
}

impl SolutionCount {
    pub fn density(&self) -> BigRational {
        BigRational::new(BigInt::from(self.count.clone()), BigInt::from(self.total.clone()))
    }

    pub fn density_as<S: Scalar>(&self) -> S {
        S::from_ratio(&BigInt::from(self.count.clone()), &BigInt::from(self.total.clone()))
    }
}

fn pow_u128(base: u64, exp: usize) -> u128 {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.saturating_mul(base as u128);
    }
    acc
}

/// `q^(n(k-m))` as an exact integer.
pub fn total_solutions(sys: &LinearSystem, n: usize) -> BigUint {
    BigUint::from(sys.field().order()).pow((n * (sys.k() - sys.m())) as u32)
}

fn check_compatible(sys: &LinearSystem, set: &PointSet) -> Result<()> {
    if **sys.field() != **set.field() {
        return Err(Error::Invariant("system and set live over different fields".into()));
    }
    Ok(())
}

/// Estimated work for each method, or `None` when out of budget.
fn cost(sys: &LinearSystem, set: &PointSet, method: Method) -> Option<u128> {
    let q = sys.field().order() as u64;
    let n = set.dim();
    let (k, m) = (sys.k(), sys.m());
    match method {
        Method::BruteForce => {
            let c = pow_u128(set.len() as u64, k);
            (c <= BRUTE_FORCE_BUDGET as u128).then_some(c)
        }
        Method::Kernel => {
            let c = pow_u128(q, n * (k - m));
            (c <= KERNEL_BUDGET as u128).then_some(c)
        }
        Method::MeetInMiddle => {
            let slots = pow_u128(q, n * m);
            let h = k / 2;
            let c = pow_u128(set.len() as u64, h) + pow_u128(set.len() as u64, k - h);
            (slots <= MEET_SLOTS_BUDGET as u128 && c <= BRUTE_FORCE_BUDGET as u128)
                .then_some(c + slots)
        }
        Method::Fourier => {
            let c = pow_u128(q, n * m);
            (c <= FOURIER_BUDGET as u128 && set.space().size() as u64 <= crate::fourier::MAX_TRANSFORM)
                .then(|| c * k as u128 + pow_u128(set.space().size() as u64, 2))
        }
    }
}

fn cheapest_exact(sys: &LinearSystem, set: &PointSet) -> Option<Method> {
    [Method::BruteForce, Method::MeetInMiddle, Method::Kernel]
        .into_iter()
        .filter_map(|m| cost(sys, set, m).map(|c| (c, m)))
        .min_by_key(|&(c, _)| c)
        .map(|(_, m)| m)
}

fn exact_count(sys: &LinearSystem, set: &PointSet, method: Method) -> u64 {
    let all: Vec<usize> = (0..sys.k()).collect();
    match method {
        Method::BruteForce => backends::brute_force_count(sys, set),
        Method::Kernel => backends::kernel_count(sys, set, &all),
        Method::MeetInMiddle => backends::meet_in_middle_count(sys, set),
        Method::Fourier => unreachable!("not an exact backend"),
    }
}

/// `|sol(L, A)|` with the requested backend.
pub fn count_solutions(sys: &LinearSystem, set: &PointSet, method: Method) -> Result<SolutionCount> {
    check_compatible(sys, set)?;
    if cost(sys, set, method).is_none() {
        return Err(Error::BudgetExceeded(format!("{method:?} for q = {}, n = {}, |A| = {}", sys.field().order(), set.dim(), set.len())));
    }
    let total = total_solutions(sys, set.dim());
    if set.is_empty() {
        return Ok(SolutionCount {
            count: BigUint::zero(),
            total,
            method,
            float_derived: false,
        });
    }
    let (count, float_derived) = match method {
        Method::Fourier => {
            let fhat = crate::fourier::SpectralFunction::<f64>::indicator(set)?;
            let lambda = crate::fourier::system_density(sys, &fhat)?;
            let scaled = lambda.re * total.to_f64().unwrap_or(f64::INFINITY);
            if !scaled.is_finite() || scaled > u64::MAX as f64 {
                return Err(Error::BudgetExceeded("Fourier count overflows".into()));
            }
            let rounded = scaled.round().max(0.0) as u64;
            match cheapest_exact(sys, set) {
                Some(m) => {
                    let exact = exact_count(sys, set, m);
                    if exact != rounded {
                        return Err(Error::Invariant(format!(
                            "Fourier count {rounded} disagrees with {m:?} count {exact}"
                        )));
                    }
                    (rounded, false)
                }
                None => (rounded, true),
            }
        }
        m => (exact_count(sys, set, m), false),
    };
    Ok(SolutionCount {
        count: BigUint::from(count),
        total,
        method,
        float_derived,
    })
}

/// Counts with the cheapest exact backend in budget, else the Fourier one.
pub fn count_auto(sys: &LinearSystem, set: &PointSet) -> Result<SolutionCount> {
    check_compatible(sys, set)?;
    match cheapest_exact(sys, set) {
        Some(m) => count_solutions(sys, set, m),
        None => count_solutions(sys, set, Method::Fourier),
    }
}

fn exact_auto(sys: &LinearSystem, set: &PointSet) -> Result<SolutionCount> {
    check_compatible(sys, set)?;
    match cheapest_exact(sys, set) {
        Some(m) => count_solutions(sys, set, m),
        None => Err(Error::BudgetExceeded(format!(
            "no exact backend for q = {}, n = {}, |A| = {}",
            sys.field().order(),
            set.dim(),
            set.len()
        ))),
    }
}

/// `Λ_L(A)`, exactly.
pub fn density(sys: &LinearSystem, set: &PointSet) -> Result<BigRational> {
    Ok(exact_auto(sys, set)?.density())
}

/// `t_B(L, A)`: the fraction of solutions in `F_q^n` whose coordinates
/// indexed by `b` all lie in `A`.
pub fn partial_density(sys: &LinearSystem, set: &PointSet, b: &[usize]) -> Result<BigRational> {
    check_compatible(sys, set)?;
    if let Some(&bad) = b.iter().find(|&&i| i >= sys.k()) {
        return Err(Error::BadIndex { index: bad, k: sys.k() });
    }
    if b.is_empty() {
        return Ok(BigRational::one());
    }
    if cost(sys, set, Method::Kernel).is_none() {
        return Err(Error::BudgetExceeded("kernel enumeration for t_B".into()));
    }
    let mut cols = b.to_vec();
    cols.sort_unstable();
    cols.dedup();
    let count = backends::kernel_count(sys, set, &cols);
    Ok(BigRational::new(
        BigInt::from(count),
        BigInt::from(total_solutions(sys, set.dim())),
    ))
}

/// Exact deficits of a set against the Sidorenko and common benchmarks.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Deficits {
    #[serde(with = "crate::scalar::serde_rational")]
    pub alpha: BigRational,
    /// `Λ_L(A)`
    #[serde(with = "crate::scalar::serde_rational")]
    pub density: BigRational,
    /// `Λ_L(Ā)`
    #[serde(with = "crate::scalar::serde_rational")]
    pub complement_density: BigRational,
    /// `Λ_L(A) - α^k`
    #[serde(with = "crate::scalar::serde_rational")]
    pub sidorenko: BigRational,
    /// `Λ_L(A) + Λ_L(Ā) - 2^(1-k)`
    #[serde(with = "crate::scalar::serde_rational")]
    pub common: BigRational,
}

impl Deficits {
    pub fn sidorenko_as<S: Scalar>(&self) -> S {
        S::from_ratio(self.sidorenko.numer(), self.sidorenko.denom())
    }

    pub fn common_as<S: Scalar>(&self) -> S {
        S::from_ratio(self.common.numer(), self.common.denom())
    }
}

/// `2^(1-k)`.
pub fn common_benchmark(k: usize) -> BigRational {
    BigRational::new(BigInt::one(), BigInt::from(2u32).pow(k as u32 - 1))
}

pub fn sidorenko_deficit(sys: &LinearSystem, set: &PointSet) -> Result<BigRational> {
    let lambda = density(sys, set)?;
    Ok(lambda - Scalar::powi(&set.density(), sys.k() as u32))
}

/// Common deficit. When `Λ_L(Ā)` is out of exact budget for a `2 x k`
/// system with `k` odd and `s = k - 1`, the sum `Λ_L(A) + Λ_L(Ā)` is taken
/// from the identity over the `k` shortest equations instead.
pub fn common_deficit(sys: &LinearSystem, set: &PointSet) -> Result<BigRational> {
    let bench = common_benchmark(sys.k());
    let comp = set.complement();
    if cheapest_exact(sys, set).is_some() && cheapest_exact(sys, &comp).is_some() {
        return Ok(density(sys, set)? + density(sys, &comp)? - bench);
    }
    match aux346_rhs(sys, set) {
        Ok(rhs) => Ok(rhs.value - bench),
        Err(Error::HypothesisViolated(_)) => Err(Error::BudgetExceeded(
            "complement density out of exact budget".into(),
        )),
        Err(e) => Err(e),
    }
}

pub fn deficits(sys: &LinearSystem, set: &PointSet) -> Result<Deficits> {
    let alpha = set.density();
    let lambda = density(sys, set)?;
    let comp = density(sys, &set.complement())?;
    let sidorenko = &lambda - Scalar::powi(&alpha, sys.k() as u32);
    let common = &lambda + &comp - common_benchmark(sys.k());
    Ok(Deficits {
        alpha,
        density: lambda,
        complement_density: comp,
        sidorenko,
        common,
    })
}

/// Both sides of `Λ_L(A) = Σ_B (-1)^|B| t_B(L, Ā)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdentityCheck {
    pub lhs: BigRational,
    pub rhs: BigRational,
}

pub const MAX_INCLUSION_EXCLUSION_COLUMNS: usize = 12;

/// Evaluates both sides of the inclusion-exclusion identity and fails with
/// [`Error::IdentityViolated`] if they differ.
///
/// All `2^k` partial densities of `Ā` come from one kernel pass: a histogram
/// of the exact membership pattern of each solution, followed by a
/// superset-sum transform.
pub fn inclusion_exclusion(sys: &LinearSystem, set: &PointSet) -> Result<IdentityCheck> {
    check_compatible(sys, set)?;
    let k = sys.k();
    if k > MAX_INCLUSION_EXCLUSION_COLUMNS {
        return Err(Error::TooManyColumns(k));
    }
    if cost(sys, set, Method::Kernel).is_none() {
        return Err(Error::BudgetExceeded("kernel enumeration for t_B".into()));
    }
    let comp = set.complement();
    let mut sup = backends::kernel_membership_histogram(sys, &comp);
    for bit in 0..k {
        for mask in 0..sup.len() {
            if mask >> bit & 1 == 0 {
                sup[mask] += sup[mask | 1 << bit];
            }
        }
    }
    let mut signed = BigInt::zero();
    for (mask, &c) in sup.iter().enumerate() {
        if (mask as u32).count_ones() % 2 == 0 {
            signed += c;
        } else {
            signed -= c;
        }
    }
    let total = BigInt::from(total_solutions(sys, set.dim()));
    let rhs = BigRational::new(signed, total);
    let lhs = density(sys, set)?;
    if lhs != rhs {
        return Err(Error::IdentityViolated(format!("inclusion-exclusion: {lhs} != {rhs}")));
    }
    Ok(IdentityCheck { lhs, rhs })
}

/// For a rank-2 system, the unique induced equation vanishing on each
/// column, in column order. `None` where the column cannot be eliminated.
pub fn equations_missing_each_column(sys: &LinearSystem) -> Result<Vec<Option<InducedEquation>>> {
    if sys.m() != 2 {
        return Err(Error::HypothesisViolated(format!("expected 2 rows, got {}", sys.m())));
    }
    let f = sys.field();
    let rows = sys.rref_rows();
    Ok((0..sys.k())
        .map(|i| {
            let (a, b) = (rows[0][i], rows[1][i]);
            let coeffs: Vec<_> = (0..sys.k())
                .map(|j| f.sub(f.mul(b, rows[0][j]), f.mul(a, rows[1][j])))
                .collect();
            InducedEquation::canonical(f, coeffs)
        })
        .collect())
}

/// Right side of the common-sum identity for `2 x k` systems with `k` odd
/// and `s = k - 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShortestSum {
    /// The `k` shortest equations; equation `i` omits variable `i`.
    pub equations: Vec<InducedEquation>,
    /// `Λ_{L_i}(A)` for each.
    pub densities: Vec<BigRational>,
    /// `α^k + (1-α)^k + Σ Λ_{L_i}(A) - k α^(k-1)`
    pub value: BigRational,
}

pub fn shortest_equations_by_column(sys: &LinearSystem) -> Result<Vec<InducedEquation>> {
    let k = sys.k();
    if sys.m() != 2 || k % 2 == 0 {
        return Err(Error::HypothesisViolated(format!(
            "need a 2 x k system with k odd, got {} x {k}",
            sys.m()
        )));
    }
    let eqs = equations_missing_each_column(sys)?;
    eqs.into_iter()
        .map(|e| match e {
            Some(e) if e.length() == k - 1 => Ok(e),
            _ => Err(Error::HypothesisViolated(format!("s(L) != {}", k - 1))),
        })
        .collect()
}

pub fn aux346_rhs(sys: &LinearSystem, set: &PointSet) -> Result<ShortestSum> {
    check_compatible(sys, set)?;
    let equations = shortest_equations_by_column(sys)?;
    let k = sys.k() as u32;
    let alpha = set.density();
    let beta = BigRational::one() - &alpha;
    let densities = equations
        .iter()
        .map(|e| density(&sys.restrict_equation(e)?, set))
        .collect::<Result<Vec<_>>>()?;
    let sum: BigRational = densities.iter().cloned().sum();
    let value = Scalar::powi(&alpha, k) + Scalar::powi(&beta, k) + sum
        - BigRational::from_integer(k.into()) * Scalar::powi(&alpha, k - 1);
    Ok(ShortestSum {
        equations,
        densities,
        value,
    })
}

/// Checks `Λ_L(A) + Λ_L(Ā) = α^k + (1-α)^k + Σ Λ_{L_i}(A) - k α^(k-1)`.
pub fn aux346_identity(sys: &LinearSystem, set: &PointSet) -> Result<IdentityCheck> {
    let rhs = aux346_rhs(sys, set)?.value;
    let lhs = density(sys, set)? + density(sys, &set.complement())?;
    if lhs != rhs {
        return Err(Error::IdentityViolated(format!("common-sum identity: {lhs} != {rhs}")));
    }
    Ok(IdentityCheck { lhs, rhs })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::field::FieldSpec;
    use crate::space::Space;

    fn field(q: u64) -> Arc<FieldSpec> {
        Arc::new(FieldSpec::of_order(q).unwrap())
    }

    fn ex44(q: u64) -> LinearSystem {
        LinearSystem::from_ints(field(q), &[vec![1, 0, -1, 2, -2], vec![0, 1, 2, -1, -2]]).unwrap()
    }

    fn ex44_set() -> PointSet {
        let s = Space::new(field(5), 2).unwrap();
        let pts = [(0, 0), (0, 3), (1, 2), (3, 0), (3, 3), (4, 0), (4, 1), (4, 2)];
        PointSet::from_indices(s, pts.iter().map(|&(a, b)| a * 5 + b)).unwrap()
    }

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn full_space_and_empty() {
        let sys = ex44(5);
        let full = PointSet::full(Space::new(field(5), 1).unwrap());
        for m in [Method::BruteForce, Method::Kernel, Method::MeetInMiddle, Method::Fourier] {
            let c = count_solutions(&sys, &full, m).unwrap();
            assert_eq!(c.count, BigUint::from(125u32), "{m:?}");
            assert_eq!(c.density(), BigRational::one());
            let e = count_solutions(&sys, &full.complement(), m).unwrap();
            assert!(e.count.is_zero());
        }
    }

    #[test]
    fn example_set_count() {
        let sys = ex44(5);
        let a = ex44_set();
        for m in [Method::BruteForce, Method::Kernel, Method::MeetInMiddle, Method::Fourier] {
            assert_eq!(count_solutions(&sys, &a, m).unwrap().count, BigUint::from(48u32), "{m:?}");
        }
        assert!(sidorenko_deficit(&sys, &a).unwrap() < BigRational::zero());
    }

    #[test]
    fn partial_densities() {
        let sys = LinearSystem::from_ints(field(3), &[vec![1, 1, 1]]).unwrap();
        let s = Space::new(field(3), 1).unwrap();
        let a = PointSet::from_indices(s.clone(), [0]).unwrap();
        assert_eq!(partial_density(&sys, &a, &[]).unwrap(), BigRational::one());
        assert_eq!(partial_density(&sys, &a, &[0]).unwrap(), r(1, 3));
        assert_eq!(partial_density(&sys, &PointSet::full(s), &[0, 1, 2]).unwrap(), BigRational::one());
        assert!(matches!(partial_density(&sys, &a, &[3]), Err(Error::BadIndex { .. })));
    }

    #[test]
    fn odd_equation_deficit() {
        let sys = LinearSystem::from_ints(field(3), &[vec![1, 1, 1]]).unwrap();
        let a = PointSet::from_indices(Space::new(field(3), 1).unwrap(), [1, 2]).unwrap();
        let d = deficits(&sys, &a).unwrap();
        assert_eq!(d.density, r(2, 9));
        assert_eq!(d.sidorenko, r(-2, 27));
        assert_eq!(inclusion_exclusion(&sys, &a).unwrap().lhs, r(2, 9));
    }

    #[test]
    fn identities_on_example_set() {
        let sys = ex44(5);
        let a = ex44_set();
        inclusion_exclusion(&sys, &a).unwrap();
        let check = aux346_identity(&sys, &a).unwrap();
        assert_eq!(common_deficit(&sys, &a).unwrap(), check.lhs - common_benchmark(5));
        let full = PointSet::full(a.space().clone());
        assert_eq!(aux346_identity(&sys, &full).unwrap().rhs, BigRational::one());
    }

    #[test]
    fn aux346_hypotheses() {
        let sys = LinearSystem::from_ints(field(5), &[vec![1, 1, -1, -1]]).unwrap();
        let a = PointSet::full(Space::new(field(5), 1).unwrap());
        assert!(matches!(aux346_identity(&sys, &a), Err(Error::HypothesisViolated(_))));
    }

    #[test]
    fn budgets_enforced() {
        let sys = ex44(5);
        let big = PointSet::full(Space::new(field(5), 4).unwrap());
        assert!(matches!(count_solutions(&sys, &big, Method::BruteForce), Err(Error::BudgetExceeded(_))));
    }
}
