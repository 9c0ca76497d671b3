//! Classification of linear systems as Sidorenko / common / uncommon.
//!
//! [`classify_system`] runs every applicable rule and collects a
//! certificate for each conclusion. Structural rules run first; template
//! search, the spectral construction and stored witness sets follow.

mod template;

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::counting::{self, PointSet};
use crate::error::{Error, Result};
use crate::field::{FieldElem, FieldSpec};
use crate::fourier::{build_fpz_function, Thm43Instance, DEFAULT_EPSILON};
use crate::linalg::{mask_to_vec, InducedEquation, LinearSystem};
use crate::scalar::{rational_string, Scalar};
use crate::space::Space;

pub use template::{
    detect_tree_template, detect_tree_template_with, TemplateBudget, TemplateEdge, TemplateGraph,
    MAX_TEMPLATE_BASES, MAX_TEMPLATE_COLUMNS, MAX_TEMPLATE_ROWS,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Answer {
    Yes,
    No,
    Unknown,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Rule {
    NotTranslationInvariant,
    SingleEquationCharacterization,
    OddS,
    AllShortestUncommon,
    TreeTemplate,
    Thm43,
    FourierCommonProof,
    NumericWitness,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    Sidorenko,
    Common,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Payload {
    /// A basis row whose coefficients do not sum to zero.
    Row { row: Vec<FieldElem>, sum: FieldElem },
    SingleEquation {
        coeffs: Vec<FieldElem>,
        length: usize,
        /// Index pairs into `coeffs` whose entries sum to zero.
        pairing: Option<Vec<(usize, usize)>>,
    },
    OddS {
        s: usize,
        maximal_good_sets: Vec<Vec<usize>>,
    },
    ShortestEquations { s: usize, equations: Vec<InducedEquation> },
    Template(TemplateGraph),
    Thm43 {
        instance: Thm43Instance,
        /// Values of a function `f: F_q -> [0, 1]` with mean 1/2 and
        /// negative `Σ τ_{L_i}(f)`, when the construction was run.
        witness_values: Option<Vec<f64>>,
        tau_sum: Option<f64>,
        xi: Option<f64>,
        sign_attempts: Option<u32>,
    },
    /// The system matches a named example up to a column permutation.
    Example { name: String, permutation: Vec<usize> },
    Witness(WitnessPayload),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessPayload {
    pub objective: Objective,
    pub n: usize,
    /// Point encodings in `[0, q^n)`.
    pub points: Vec<u32>,
    pub count: String,
    pub total: String,
    /// Exact deficit as `"num/den"`.
    pub deficit: String,
    pub source: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Certificate {
    pub rule: Rule,
    pub sidorenko: Option<bool>,
    pub common: Option<bool>,
    pub payload: Payload,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ShortestInfo {
    pub equation: InducedEquation,
    pub sidorenko: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub sidorenko: Answer,
    pub common: Answer,
    pub degenerate: bool,
    pub translation_invariant: bool,
    pub s: usize,
    pub shortest: Vec<ShortestInfo>,
    pub certificates: Vec<Certificate>,
    pub notes: Vec<String>,
}

impl Verdict {
    fn new(translation_invariant: bool, s: usize, shortest: Vec<ShortestInfo>) -> Self {
        Verdict {
            sidorenko: Answer::Unknown,
            common: Answer::Unknown,
            degenerate: false,
            translation_invariant,
            s,
            shortest,
            certificates: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn set(slot: &mut Answer, value: bool) -> Result<()> {
        let new = if value { Answer::Yes } else { Answer::No };
        match *slot {
            Answer::Unknown => *slot = new,
            old if old != new => {
                return Err(Error::Invariant(format!("certificates disagree: {old:?} vs {new:?}")))
            }
            _ => {}
        }
        Ok(())
    }

    fn add(&mut self, cert: Certificate) -> Result<()> {
        if let Some(v) = cert.sidorenko {
            Self::set(&mut self.sidorenko, v)?;
            // Sidorenko implies common.
            if v {
                Self::set(&mut self.common, true)?;
            }
        }
        if let Some(v) = cert.common {
            Self::set(&mut self.common, v)?;
            if !v {
                Self::set(&mut self.sidorenko, false)?;
            }
        }
        self.certificates.push(cert);
        Ok(())
    }

    pub fn is_decided(&self) -> bool {
        self.sidorenko != Answer::Unknown && self.common != Answer::Unknown
    }

    /// Every definite answer is backed by a certificate, and
    /// Sidorenko implies common.
    pub fn is_consistent(&self) -> bool {
        if self.sidorenko == Answer::Yes && self.common == Answer::No {
            return false;
        }
        let backs = |want: bool, pick: fn(&Certificate) -> Option<bool>| {
            self.certificates.iter().any(|c| pick(c) == Some(want))
        };
        let sid_ok = match self.sidorenko {
            Answer::Yes => backs(true, |c| c.sidorenko),
            Answer::No => backs(false, |c| c.sidorenko) || backs(false, |c| c.common),
            Answer::Unknown => true,
        };
        let com_ok = match self.common {
            Answer::Yes => backs(true, |c| c.common) || backs(true, |c| c.sidorenko),
            Answer::No => backs(false, |c| c.common),
            Answer::Unknown => true,
        };
        sid_ok && com_ok
    }
}

/// Whether the nonzero coefficients split into pairs `(a, -a)`.
pub fn single_equation_is_sidorenko(field: &FieldSpec, coeffs: &[FieldElem]) -> bool {
    negation_pairing(field, coeffs).is_some()
}

/// A perfect matching of the nonzero entries of `coeffs` into pairs summing
/// to zero, as index pairs into `coeffs`.
pub fn negation_pairing(field: &FieldSpec, coeffs: &[FieldElem]) -> Option<Vec<(usize, usize)>> {
    let mut open: BTreeMap<FieldElem, Vec<usize>> = BTreeMap::new();
    let mut pairs = Vec::new();
    let mut nonzero = 0;
    for (i, &c) in coeffs.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        nonzero += 1;
        let partner = field.neg(c);
        match open.get_mut(&partner).and_then(Vec::pop) {
            Some(j) => pairs.push((j, i)),
            None => open.entry(c).or_default().push(i),
        }
    }
    (nonzero > 0 && pairs.len() * 2 == nonzero).then_some(pairs)
}

/// Classifies a single linear form by its nonzero coefficients.
pub fn classify_single_equation(field: &FieldSpec, coeffs: &[FieldElem]) -> Result<Verdict> {
    let nz: Vec<FieldElem> = coeffs.iter().copied().filter(|c| !c.is_zero()).collect();
    if nz.is_empty() {
        return Err(Error::ZeroForm);
    }
    let sum = nz.iter().fold(FieldElem::ZERO, |a, &b| field.add(a, b));
    let eq = InducedEquation::canonical(field, coeffs.to_vec()).expect("nonzero");
    let pairing = negation_pairing(field, coeffs);
    let sid = pairing.is_some();
    let mut v = Verdict::new(
        sum.is_zero(),
        nz.len(),
        vec![ShortestInfo {
            equation: eq,
            sidorenko: sid,
        }],
    );
    let payload = Payload::SingleEquation {
        coeffs: coeffs.to_vec(),
        length: nz.len(),
        pairing,
    };
    let (s, c) = if nz.len() % 2 == 1 {
        (false, true)
    } else {
        (sid, sid)
    };
    v.add(Certificate {
        rule: Rule::SingleEquationCharacterization,
        sidorenko: Some(s),
        common: Some(c),
        payload,
    })?;
    Ok(v)
}

/// `coeffs` (four nonzero entries) is `b`-coincidental if every `a_i` has a
/// partner `a_j`, `j ≠ i`, with `a_i / a_j ∈ {±b, ±b^-1}`.
pub fn is_b_coincidental(field: &FieldSpec, coeffs: &[FieldElem], b: FieldElem) -> Result<bool> {
    let nz = coeffs.iter().filter(|c| !c.is_zero()).count();
    if coeffs.len() != 4 || nz != 4 {
        return Err(Error::BadArity {
            expected: 4,
            actual: nz,
        });
    }
    let binv = field.inv(b)?;
    let targets = [b, field.neg(b), binv, field.neg(binv)];
    Ok((0..4).all(|i| {
        (0..4).any(|j| j != i && targets.contains(&field.div(coeffs[i], coeffs[j]).expect("nonzero")))
    }))
}

/// Options for [`classify_system`].
#[derive(Clone, Debug)]
pub struct ClassifyOptions {
    pub seed: u64,
    /// Extra candidate witness sets, each tried for negative deficits.
    pub witness_sets: Vec<PointSet>,
    /// Also try the stored example witnesses whose system matches.
    pub use_catalog: bool,
    pub template_budget: TemplateBudget,
    /// Run the random-sign construction when the spectral rule applies.
    pub spectral_witness: bool,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            seed: 0,
            witness_sets: Vec::new(),
            use_catalog: true,
            template_budget: TemplateBudget::default(),
            spectral_witness: true,
        }
    }
}

/// Largest `q^n` for the `F_q^n \ {0}` witness.
pub const ODD_S_WITNESS_POINTS: u64 = 100_000;

/// Applies every rule to a non-degenerate system.
pub fn classify_system(sys: &LinearSystem, opts: &ClassifyOptions) -> Result<Verdict> {
    let (m, k) = (sys.m(), sys.k());
    if m > MAX_TEMPLATE_ROWS || k > MAX_TEMPLATE_COLUMNS {
        return Err(Error::SystemTooLarge { m, k });
    }
    let flags = sys.structural_flags();
    if flags.degenerate {
        return Err(Error::DegenerateSystem);
    }
    let field = sys.field();
    let (s, shortest) = sys.min_induced_length()?;
    let shortest: Vec<ShortestInfo> = shortest
        .into_iter()
        .map(|e| {
            let sid = single_equation_is_sidorenko(field, &e.coeffs);
            ShortestInfo { equation: e, sidorenko: sid }
        })
        .collect();
    let mut v = Verdict::new(flags.translation_invariant, s, shortest);

    // (1) translation invariance
    if !flags.translation_invariant {
        let row = sys
            .rref_rows()
            .iter()
            .find(|r| !r.iter().fold(FieldElem::ZERO, |a, &b| field.add(a, b)).is_zero())
            .expect("some row has nonzero sum")
            .clone();
        let sum = row.iter().fold(FieldElem::ZERO, |a, &b| field.add(a, b));
        v.add(Certificate {
            rule: Rule::NotTranslationInvariant,
            sidorenko: Some(false),
            common: None,
            payload: Payload::Row { row, sum },
        })?;
    }

    // (2) single equations
    if m == 1 {
        let single = classify_single_equation(field, &sys.rref_rows()[0])?;
        for c in single.certificates {
            v.add(c)?;
        }
    }

    // (3) odd s
    if s % 2 == 1 {
        let report = sys.good_sets()?;
        v.add(Certificate {
            rule: Rule::OddS,
            sidorenko: Some(false),
            common: None,
            payload: Payload::OddS {
                s,
                maximal_good_sets: report.maximal_good_sets,
            },
        })?;
        match odd_s_witness(sys)? {
            Some(w) => v.add(w)?,
            None => v.notes.push("no F_q^n \\ {0} witness within budget".into()),
        }
    }

    // (4) all shortest equations uncommon
    if s % 2 == 0 && v.shortest.iter().all(|e| !e.sidorenko) {
        v.add(Certificate {
            rule: Rule::AllShortestUncommon,
            sidorenko: Some(false),
            common: Some(false),
            payload: Payload::ShortestEquations {
                s,
                equations: v.shortest.iter().map(|e| e.equation.clone()).collect(),
            },
        })?;
    }

    // (5) forest template
    if v.sidorenko != Answer::No {
        match detect_tree_template_with(sys, opts.template_budget) {
            Ok(Some(t)) => v.add(Certificate {
                rule: Rule::TreeTemplate,
                sidorenko: Some(true),
                common: None,
                payload: Payload::Template(t),
            })?,
            Ok(None) => v.notes.push("no forest template exists".into()),
            Err(Error::SearchBudgetExceeded(b)) => {
                v.notes.push(format!("template search budget exceeded ({b})"))
            }
            Err(e) => return Err(e),
        }
    }

    // (6) one Sidorenko shortest equation in a 2 x 5 system
    if m == 2 && k == 5 && s == 4 {
        match Thm43Instance::find(sys) {
            Ok(inst) => {
                let mut payload = Payload::Thm43 {
                    instance: inst.clone(),
                    witness_values: None,
                    tau_sum: None,
                    xi: None,
                    sign_attempts: None,
                };
                if opts.spectral_witness && field.is_prime_field() {
                    match build_fpz_function(sys, &inst, opts.seed, DEFAULT_EPSILON) {
                        Ok(w) => {
                            payload = Payload::Thm43 {
                                instance: inst.clone(),
                                witness_values: Some(w.function.values().to_vec()),
                                tau_sum: Some(w.report.sum),
                                xi: Some(w.report.xi),
                                sign_attempts: Some(w.attempts),
                            }
                        }
                        Err(Error::RetriesExhausted(n)) => {
                            v.notes.push(format!("sign construction failed after {n} draws"))
                        }
                        Err(e) => return Err(e),
                    }
                }
                v.add(Certificate {
                    rule: Rule::Thm43,
                    sidorenko: Some(false),
                    // Under translation invariance the argument shows the
                    // system is uncommon.
                    common: inst.translation_invariant.then_some(false),
                    payload,
                })?;
            }
            Err(Error::HypothesisViolated(_)) => {}
            Err(e) => return Err(e),
        }
    }

    // (7) examples with spectral commonness proofs
    if let Some(cert) = fourier_common_proof(sys)? {
        v.add(cert)?;
    }

    // (8) explicit witness sets
    let mut sets: Vec<(PointSet, String)> =
        opts.witness_sets.iter().map(|s| (s.clone(), "supplied".to_string())).collect();
    if opts.use_catalog {
        for w in crate::catalog::known_witnesses() {
            if **w.system.field() == **field && w.system.same_row_space(sys) {
                sets.push((w.set, w.name.to_string()));
            }
        }
    }
    for (set, source) in sets {
        for cert in witness_certificates(sys, &set, &source)? {
            v.add(cert)?;
        }
    }

    if !v.is_consistent() {
        return Err(Error::Invariant("verdict is not backed by its certificates".into()));
    }
    Ok(v)
}

/// Exact deficits of `set`, as certificates for each negative one.
pub fn witness_certificates(sys: &LinearSystem, set: &PointSet, source: &str) -> Result<Vec<Certificate>> {
    if **set.field() != **sys.field() {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    let count = match counting::count_auto(sys, set) {
        Ok(c) if !c.float_derived => c,
        Ok(_) | Err(Error::BudgetExceeded(_)) => return Ok(out),
        Err(e) => return Err(e),
    };
    let sid = count.density() - Scalar::powi(&set.density(), sys.k() as u32);
    let payload = |objective, deficit: &BigRational| WitnessPayload {
        objective,
        n: set.dim(),
        points: set.indices().to_vec(),
        count: count.count.to_string(),
        total: count.total.to_string(),
        deficit: rational_string(deficit),
        source: source.to_string(),
    };
    if sid < BigRational::zero() {
        out.push(Certificate {
            rule: Rule::NumericWitness,
            sidorenko: Some(false),
            common: None,
            payload: Payload::Witness(payload(Objective::Sidorenko, &sid)),
        });
    }
    match counting::common_deficit(sys, set) {
        Ok(c) if c < BigRational::zero() => out.push(Certificate {
            rule: Rule::NumericWitness,
            sidorenko: Some(false),
            common: Some(false),
            payload: Payload::Witness(payload(Objective::Common, &c)),
        }),
        Ok(_) | Err(Error::BudgetExceeded(_)) => {}
        Err(e) => return Err(e),
    }
    Ok(out)
}

/// `Λ_L(F_q^n \ {0})` from `t_B({0}) = q^(-n(|B| - t(B)))`, where `t(B)` is
/// the rank reduction of `B`, via inclusion-exclusion.
pub fn punctured_space_density(sys: &LinearSystem, n: usize) -> Result<BigRational> {
    let k = sys.k();
    let q = BigInt::from(sys.field().order());
    let mut acc = BigRational::zero();
    for mask in 0u64..1 << k {
        let b = mask_to_vec(mask);
        let t = sys.rank_reduction(&b)?;
        let term = BigRational::new(BigInt::one(), q.pow((n * (b.len() - t)) as u32));
        if b.len() % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    Ok(acc)
}

/// The `F_q^n \ {0}` witness for odd `s`, at the least `n` where its
/// closed-form deficit is negative and an exact recount agrees.
pub fn odd_s_witness(sys: &LinearSystem) -> Result<Option<Certificate>> {
    let q = sys.field().order() as u64;
    let k = sys.k() as u32;
    for n in 1..=4usize {
        let size = q.checked_pow(n as u32).filter(|&s| s <= ODD_S_WITNESS_POINTS);
        let Some(size) = size else { break };
        let predicted = punctured_space_density(sys, n)?;
        let alpha = BigRational::new(BigInt::from(size - 1), BigInt::from(size));
        let deficit = &predicted - Scalar::powi(&alpha, k);
        if deficit >= BigRational::zero() {
            continue;
        }
        let space = Space::new(sys.field().clone(), n)?;
        let set = PointSet::full(space).punctured_at_zero();
        let count = match counting::count_auto(sys, &set) {
            Ok(c) if !c.float_derived => c,
            Ok(_) | Err(Error::BudgetExceeded(_)) => continue,
            Err(e) => return Err(e),
        };
        if count.density() != predicted {
            return Err(Error::IdentityViolated(format!(
                "punctured-space density {} != count {}",
                predicted,
                count.density()
            )));
        }
        return Ok(Some(Certificate {
            rule: Rule::NumericWitness,
            sidorenko: Some(false),
            common: None,
            payload: Payload::Witness(WitnessPayload {
                objective: Objective::Sidorenko,
                n,
                points: set.indices().to_vec(),
                count: count.count.to_string(),
                total: count.total.to_string(),
                deficit: rational_string(&deficit),
                source: "complement of the origin".into(),
            }),
        }));
    }
    Ok(None)
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut perm: Vec<usize> = (0..k).collect();
    fn heap(n: usize, perm: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if n <= 1 {
            out.push(perm.clone());
            return;
        }
        for i in 0..n {
            heap(n - 1, perm, out);
            let j = if n % 2 == 0 { i } else { 0 };
            perm.swap(j, n - 1);
        }
    }
    heap(k, &mut perm, &mut out);
    out
}

/// Systems with a spectral proof of commonness: the non-AQ example over
/// primes `p > 3`, and the AQ example over `F_q` with `q` coprime to 6.
fn fourier_common_proof(sys: &LinearSystem) -> Result<Option<Certificate>> {
    if sys.m() != 2 || sys.k() != 5 {
        return Ok(None);
    }
    let f = sys.field();
    let p = f.characteristic();
    let mut examples: Vec<(&str, LinearSystem)> = Vec::new();
    if f.is_prime_field() && p > 3 {
        examples.push((
            "non-AQ example",
            LinearSystem::from_ints(f.clone(), &crate::catalog::NON_AQ_ROWS.map(|r| r.to_vec()))?,
        ));
    }
    if p > 3 {
        examples.push((
            "AQ example",
            LinearSystem::from_ints(f.clone(), &crate::catalog::AQ_ROWS.map(|r| r.to_vec()))?,
        ));
    }
    for perm in permutations(5) {
        let permuted = sys.permute_columns(&perm)?;
        for (name, ex) in &examples {
            if permuted.same_row_space(ex) {
                return Ok(Some(Certificate {
                    rule: Rule::FourierCommonProof,
                    sidorenko: None,
                    common: Some(true),
                    payload: Payload::Example {
                        name: name.to_string(),
                        permutation: perm,
                    },
                }));
            }
        }
    }
    Ok(None)
}
