//! Random-sign spectral construction certifying that a `2 x 5` system with
//! one Sidorenko shortest equation is uncommon.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::classify::{is_b_coincidental, single_equation_is_sidorenko};
use crate::counting::shortest_equations_by_column;
use crate::error::{Error, Result};
use crate::field::{FieldElem, FieldSpec};
use crate::linalg::{InducedEquation, LinearSystem};
use crate::space::Space;

use super::{sum_tau_shortest, SpectralFunction, TauReport};

pub const DEFAULT_EPSILON: f64 = 1.0 / 1024.0;
pub const MAX_SIGN_RETRIES: u32 = 256;

/// A `2 x 5` system with `s = 4`, exactly one Sidorenko shortest equation
/// `L_1` with coefficients `{±1, ±b}` (`b ≠ ±1`) after scaling, and a
/// non-Sidorenko shortest equation `L_2` that is not `b`-coincidental.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Thm43Instance {
    pub b: FieldElem,
    pub sidorenko_equation: InducedEquation,
    pub witness_equation: InducedEquation,
    /// Nonzero coefficients of `L_2`, scaled so the first is 1 and no
    /// other lies in `{±b, ±b^-1}`.
    pub scaled_witness: Vec<FieldElem>,
    pub translation_invariant: bool,
}

fn fail<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::HypothesisViolated(msg.into()))
}

/// Values `b` such that some scaling of `coeffs` is `{1, -1, b, -b}`.
pub(crate) fn pm_one_pm_b(field: &FieldSpec, coeffs: &[FieldElem]) -> Vec<FieldElem> {
    let one = FieldElem::ONE;
    let minus_one = field.neg(one);
    let mut out = Vec::new();
    if coeffs.len() != 4 {
        return out;
    }
    for &c in coeffs {
        let inv = match field.inv(c) {
            Ok(i) => i,
            Err(_) => continue,
        };
        let mut rest: Vec<FieldElem> = coeffs.iter().map(|&a| field.mul(a, inv)).collect();
        let Some(pos) = rest.iter().position(|&a| a == one) else { continue };
        rest.remove(pos);
        let Some(pos) = rest.iter().position(|&a| a == minus_one) else { continue };
        rest.remove(pos);
        let (u, v) = (rest[0], rest[1]);
        if field.add(u, v).is_zero() && u != one && u != minus_one && !out.contains(&u) {
            out.push(u);
        }
    }
    out
}

impl Thm43Instance {
    pub fn find(sys: &LinearSystem) -> Result<Thm43Instance> {
        let field = sys.field();
        if field.characteristic() == 2 {
            return fail("q must be odd");
        }
        if sys.m() != 2 || sys.k() != 5 {
            return fail(format!("need a 2 x 5 system, got {} x {}", sys.m(), sys.k()));
        }
        let equations = shortest_equations_by_column(sys)?;
        let sid: Vec<bool> = equations
            .iter()
            .map(|e| single_equation_is_sidorenko(field, &e.nonzero_coeffs()))
            .collect();
        if sid.iter().filter(|&&s| s).count() != 1 {
            return fail("need exactly one Sidorenko shortest equation");
        }
        let l1 = equations[sid.iter().position(|&s| s).unwrap()].clone();
        let bs = pm_one_pm_b(field, &l1.nonzero_coeffs());
        if bs.is_empty() {
            return fail("Sidorenko equation does not have coefficients {±1, ±b} with b != ±1");
        }
        for &b in &bs {
            for (e, _) in equations.iter().zip(&sid).filter(|(_, &s)| !s) {
                let coeffs = e.nonzero_coeffs();
                if is_b_coincidental(field, &coeffs, b)? {
                    continue;
                }
                let scaled = scale_non_coincidental(field, &coeffs, b)
                    .ok_or_else(|| Error::Invariant("no free coefficient in a non-coincidental form".into()))?;
                return Ok(Thm43Instance {
                    b,
                    sidorenko_equation: l1,
                    witness_equation: e.clone(),
                    scaled_witness: scaled,
                    translation_invariant: sys.structural_flags().translation_invariant,
                });
            }
        }
        fail("every non-Sidorenko shortest equation is b-coincidental")
    }
}

/// Scales `coeffs` by `a_i^-1` for an index `i` whose ratios to all other
/// coefficients avoid `{±b, ±b^-1}`, and moves that coefficient first.
fn scale_non_coincidental(field: &FieldSpec, coeffs: &[FieldElem], b: FieldElem) -> Option<Vec<FieldElem>> {
    let binv = field.inv(b).ok()?;
    let bad = [b, field.neg(b), binv, field.neg(binv)];
    (0..coeffs.len()).find_map(|i| {
        let inv = field.inv(coeffs[i]).ok()?;
        let others: Vec<FieldElem> = (0..coeffs.len())
            .filter(|&j| j != i)
            .map(|j| field.mul(coeffs[j], inv))
            .collect();
        if others.iter().any(|r| bad.contains(r)) {
            return None;
        }
        let mut out = vec![FieldElem::ONE];
        out.extend(others);
        Some(out)
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct FpzFunction {
    #[serde(skip)]
    pub function: SpectralFunction<f64>,
    pub report: TauReport<f64>,
    /// Number of sign draws used, starting at 1.
    pub attempts: u32,
    /// Each randomized coefficient class `±a` with its chosen sign.
    pub signs: Vec<(FieldElem, i8)>,
    pub epsilon: f64,
}

impl FpzFunction {
    /// The final inequality of the construction: `Σ τ < -ξ/2`.
    pub fn below_half_xi(&self) -> bool {
        self.report.sum < -self.report.xi / 2.0
    }
}

/// Builds `f` on `F_q` (prime `q`) with `f̂(0) = 1/2`, `f̂(±1) = 1/8`,
/// `f̂(±a) = ±ε` for the remaining coefficients `a ≠ ±1` of the scaled
/// `L_2`, and zero elsewhere. Signs are redrawn until `Σ τ_{L_i}(f) < 0`.
pub fn build_fpz_function(sys: &LinearSystem, inst: &Thm43Instance, seed: u64, epsilon: f64) -> Result<FpzFunction> {
    let field = sys.field();
    if !field.is_prime_field() {
        return fail("the construction is implemented over prime fields only");
    }
    let space = Space::new(field.clone(), 1)?;
    let one = FieldElem::ONE;
    let minus_one = field.neg(one);
    let mut classes: Vec<FieldElem> = Vec::new();
    for &a in &inst.scaled_witness[1..] {
        if a == one || a == minus_one {
            continue;
        }
        let rep = a.min(field.neg(a));
        if !classes.contains(&rep) {
            classes.push(rep);
        }
    }
    let binv = field.inv(inst.b)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for attempt in 1..=MAX_SIGN_RETRIES {
        let signs: Vec<(FieldElem, i8)> = classes
            .iter()
            .map(|&c| (c, if rng.gen::<bool>() { 1 } else { -1 }))
            .collect();
        let mut coeffs = vec![Complex::new(0.0, 0.0); space.size()];
        coeffs[0] = Complex::new(0.5, 0.0);
        coeffs[one.value() as usize] = Complex::new(0.125, 0.0);
        coeffs[minus_one.value() as usize] = Complex::new(0.125, 0.0);
        for &(c, s) in &signs {
            let v = Complex::new(s as f64 * epsilon, 0.0);
            coeffs[c.value() as usize] = v;
            coeffs[field.neg(c).value() as usize] = v;
        }
        let f = SpectralFunction::from_coefficients(space.clone(), coeffs)?;
        if !f.in_unit_range(1e-9) {
            return Err(Error::Invariant("constructed function leaves [0, 1]".into()));
        }
        if f.coeff(inst.b.value() as usize).norm() != 0.0 || f.coeff(binv.value() as usize).norm() != 0.0 {
            return Err(Error::Invariant("f̂(b) or f̂(1/b) is nonzero".into()));
        }
        let report = sum_tau_shortest(sys, &f)?;
        if report.sum < 0.0 {
            return Ok(FpzFunction {
                function: f,
                report,
                attempts: attempt,
                signs,
                epsilon,
            });
        }
    }
    Err(Error::RetriesExhausted(MAX_SIGN_RETRIES))
}
