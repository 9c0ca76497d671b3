//! Searching for sets with negative Sidorenko or common deficit.
//!
//! Exhaustive search works on solution-usage masks with exact integer
//! arithmetic. Annealing scores sets through floating-point Fourier
//! coefficients that are updated in place on each toggle; every emitted
//! witness is recounted exactly.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::classify::Objective;
use crate::counting::{self, kernel_usage_masks, PointSet};
use crate::error::{Error, Result};
use crate::fourier::transform;
use crate::linalg::LinearSystem;
use crate::scalar::serde_rational;
use crate::space::Space;

/// Largest family of subsets enumerated by the full exhaustive search.
pub const MAX_EXHAUSTIVE_POINTS: usize = 26;
/// Largest number of fixed-size subsets enumerated.
pub const MAX_FIXED_SIZE_SETS: u64 = 10_000_000;
/// Largest space the annealer accepts.
pub const MAX_ANNEAL_POINTS: usize = 10_000;
/// Largest spectral table (frequency tuples times width) evaluated per step.
pub const MAX_STEP_TABLE: usize = 20_000_000;
/// Below this many points, full exhaustive search builds a subset-sum table.
const ZETA_POINTS: usize = 22;
/// Coefficients are recomputed from scratch this often to shed drift.
const RESYNC_EVERY: u64 = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AnnealSchedule {
    pub steps: u64,
    pub restarts: u32,
    /// Geometric cooling from `t_start` to `t_end` over `steps`.
    pub t_start: f64,
    pub t_end: f64,
}

impl Default for AnnealSchedule {
    fn default() -> Self {
        AnnealSchedule {
            steps: 20_000,
            restarts: 4,
            t_start: 1e-3,
            t_end: 1e-7,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Strategy {
    Exhaustive,
    ExhaustiveFixedSize { size: usize },
    Anneal(AnnealSchedule),
}

#[derive(Clone, Debug)]
pub struct SearchConfig {
    pub n: usize,
    pub objective: Objective,
    pub strategy: Strategy,
    pub seed: u64,
    /// Upper bound on objective evaluations.
    pub eval_budget: u64,
    /// Starting set for every annealing restart; random density-1/2 sets
    /// otherwise.
    pub initial: Option<PointSet>,
}

impl SearchConfig {
    pub fn new(n: usize, objective: Objective, strategy: Strategy) -> Self {
        SearchConfig {
            n,
            objective,
            strategy,
            seed: 0,
            eval_budget: 100_000_000,
            initial: None,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Witness {
    #[serde(skip)]
    pub set: PointSet,
    pub objective: Objective,
    pub q: usize,
    pub n: usize,
    pub points: Vec<u32>,
    #[serde(with = "serde_rational")]
    pub deficit: BigRational,
    pub evaluations: u64,
    pub summary: String,
}

impl Witness {
    pub fn is_negative(&self) -> bool {
        self.deficit < BigRational::from_integer(0.into())
    }
}

fn exact_deficit(sys: &LinearSystem, set: &PointSet, objective: Objective) -> Result<BigRational> {
    match objective {
        Objective::Sidorenko => counting::sidorenko_deficit(sys, set),
        Objective::Common => counting::common_deficit(sys, set),
    }
}

fn witness(
    sys: &LinearSystem,
    set: PointSet,
    objective: Objective,
    evaluations: u64,
    summary: String,
) -> Result<Witness> {
    let deficit = exact_deficit(sys, &set, objective)?;
    Ok(Witness {
        objective,
        q: set.space().q(),
        n: set.dim(),
        points: set.indices().to_vec(),
        deficit,
        evaluations,
        summary,
        set,
    })
}

/// Orders masks as sorted index lists, lexicographically.
fn lex_cmp(a: u64, b: u64) -> Ordering {
    if a == b {
        return Ordering::Equal;
    }
    let low = (a ^ b).trailing_zeros();
    let above = |m: u64| if low == 63 { 0 } else { m >> (low + 1) };
    if a >> low & 1 == 1 {
        // a continues with `low`; b continues with something larger, or ends
        if above(b) != 0 {
            Ordering::Less
        } else {
            Ordering::Greater
        }
    } else if above(a) != 0 {
        Ordering::Greater
    } else {
        Ordering::Less
    }
}

/// Integer form of a deficit: the true value is `num / scale`.
struct Scaled {
    objective: Objective,
    k: u32,
    /// `q^(nm)`, `2^(k-1)` or `q^(n(k-m))` depending on the objective.
    factor: i128,
    total: i128,
    size: usize,
    powers: Vec<i128>,
}

impl Scaled {
    fn new(sys: &LinearSystem, space: &Space, objective: Objective) -> Result<Scaled> {
        let k = sys.k() as u32;
        let n = space.dim() as u32;
        let q = space.q() as i128;
        let overflow = || Error::TooLarge(space.size() as u64);
        let total = q.checked_pow(n * (k - sys.m() as u32)).ok_or_else(overflow)?;
        let factor = match objective {
            Objective::Sidorenko => q.checked_pow(n * sys.m() as u32).ok_or_else(overflow)?,
            Objective::Common => 1i128 << (k - 1),
        };
        let powers = (0..=space.size())
            .map(|a| (a as i128).checked_pow(k).ok_or_else(overflow))
            .collect::<Result<Vec<_>>>()?;
        total.checked_mul(factor).ok_or_else(overflow)?;
        (space.size() as i128).checked_pow(k).ok_or_else(overflow)?;
        Ok(Scaled {
            objective,
            k,
            factor,
            total,
            size: space.size(),
            powers,
        })
    }

    /// `count` solutions in `A`, `comp` in the complement, `|A| = a`.
    fn value(&self, count: u64, comp: u64, a: usize) -> i128 {
        match self.objective {
            Objective::Sidorenko => count as i128 * self.factor - self.powers[a],
            Objective::Common => (count as i128 + comp as i128) * self.factor - self.total,
        }
    }

    fn to_rational(&self, v: i128) -> BigRational {
        let den = match self.objective {
            Objective::Sidorenko => BigInt::from(self.size).pow(self.k),
            Objective::Common => BigInt::from(self.total) * BigInt::from(self.factor),
        };
        BigRational::new(BigInt::from(v), den)
    }
}

/// Best `(value, mask)` under the `(deficit, lexicographic set)` order.
fn better(a: (i128, u64), b: (i128, u64)) -> (i128, u64) {
    match a.0.cmp(&b.0).then_with(|| lex_cmp(a.1, b.1)) {
        Ordering::Greater => b,
        _ => a,
    }
}

fn binomial(n: u64, k: u64) -> u64 {
    let k = k.min(n - k.min(n));
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

/// Exact minimization over all subsets of `F_q^n`, or all subsets of one
/// size. Ties go to the lexicographically least sorted point list.
pub fn exhaustive_search(sys: &LinearSystem, cfg: &SearchConfig) -> Result<Witness> {
    let space = Space::new(sys.field().clone(), cfg.n)?;
    let points = space.size();
    let fixed = match cfg.strategy {
        Strategy::Exhaustive => None,
        Strategy::ExhaustiveFixedSize { size } => Some(size),
        Strategy::Anneal(_) => {
            return Err(Error::Invariant("exhaustive_search called with an annealing strategy".into()))
        }
    };
    let family = match fixed {
        None if points <= MAX_EXHAUSTIVE_POINTS => 1u64 << points,
        None => return Err(Error::BudgetExceeded(format!("2^{points} subsets"))),
        Some(size) if size > points => {
            return Err(Error::BudgetExceeded(format!("no {size}-subsets of {points} points")))
        }
        Some(_) if points > 64 => return Err(Error::BudgetExceeded(format!("{points} points"))),
        Some(size) => binomial(points as u64, size as u64),
    };
    if fixed.is_some() && family > MAX_FIXED_SIZE_SETS {
        return Err(Error::BudgetExceeded(format!("{family} subsets")));
    }
    if family > cfg.eval_budget {
        return Err(Error::BudgetExceeded(format!("{family} evaluations over budget {}", cfg.eval_budget)));
    }
    if counting::total_solutions(sys, cfg.n) > num_bigint::BigUint::from(counting::KERNEL_BUDGET) {
        return Err(Error::BudgetExceeded("solution enumeration".into()));
    }
    let scaled = Scaled::new(sys, &space, cfg.objective)?;
    let masks = kernel_usage_masks(sys, &space);
    let full = if points == 64 { u64::MAX } else { (1u64 << points) - 1 };

    let best = if fixed.is_none() && points <= ZETA_POINTS {
        let mut table = vec![0u64; 1 << points];
        for &(m, c) in &masks {
            table[m as usize] += c;
        }
        for bit in 0..points {
            let step = 1usize << bit;
            table.par_chunks_mut(2 * step).for_each(|chunk| {
                let (lo, hi) = chunk.split_at_mut(step);
                for (h, l) in hi.iter_mut().zip(lo.iter()) {
                    *h += *l;
                }
            });
        }
        let table = &table;
        (0..1u64 << points)
            .into_par_iter()
            .map(|a| {
                let v = scaled.value(table[a as usize], table[(full & !a) as usize], a.count_ones() as usize);
                (v, a)
            })
            .reduce_with(better)
            .expect("at least one subset")
    } else {
        let masks = &masks;
        let eval = |a: u64| {
            let mut inside = 0u64;
            let mut outside = 0u64;
            for &(m, c) in masks {
                if m & !a == 0 {
                    inside += c;
                } else if m & a == 0 {
                    outside += c;
                }
            }
            (scaled.value(inside, outside, a.count_ones() as usize), a)
        };
        match fixed {
            None => (0..1u64 << points).into_par_iter().map(eval).reduce_with(better),
            Some(size) => fixed_size_masks(points, size)
                .par_chunks(1 << 14)
                .map(|chunk| chunk.iter().map(|&a| eval(a)).reduce(better).expect("nonempty chunk"))
                .reduce_with(better),
        }
        .expect("at least one subset")
    };

    let set = PointSet::from_indices(space, (0..points).filter(|&i| best.1 >> i & 1 == 1))?;
    let summary = match fixed {
        None => format!("exhaustive over all {family} subsets"),
        Some(size) => format!("exhaustive over all {family} subsets of size {size}"),
    };
    let w = witness(sys, set, cfg.objective, family, summary)?;
    if w.deficit != scaled.to_rational(best.0) {
        return Err(Error::Invariant(format!(
            "exhaustive deficit {} disagrees with the recount {}",
            scaled.to_rational(best.0),
            w.deficit
        )));
    }
    Ok(w)
}

/// All `size`-subsets of `points` as masks, in increasing numeric order.
fn fixed_size_masks(points: usize, size: usize) -> Vec<u64> {
    if size == 0 {
        return vec![0];
    }
    let limit = if points == 64 { u64::MAX } else { (1u64 << points) - 1 };
    let mut out = Vec::new();
    let mut m: u64 = if size == 64 { u64::MAX } else { (1u64 << size) - 1 };
    loop {
        out.push(m);
        // next mask with the same popcount (Gosper)
        let c = m & m.wrapping_neg();
        let r = m.wrapping_add(c);
        if r == 0 || r > limit {
            break;
        }
        let next = (((r ^ m) >> 2) / c) | r;
        if next > limit {
            break;
        }
        m = next;
    }
    out
}

/// One product-sum `Σ_row Π_j f̂(table[row][j])`.
struct ProductTable {
    width: usize,
    freqs: Vec<u32>,
}

impl ProductTable {
    fn eval(&self, coeff: impl Fn(usize) -> Complex<f64>) -> f64 {
        self.freqs
            .chunks_exact(self.width)
            .map(|row| row.iter().fold(Complex::new(1.0, 0.0), |acc, &r| acc * coeff(r as usize)))
            .sum::<Complex<f64>>()
            .re
    }
}

enum Score {
    /// `Λ_L(A) - α^k` from the full spectral sum.
    Sidorenko(ProductTable),
    /// `Λ_L(A) + Λ_L(Ā) - 2^(1-k)`.
    Common(ProductTable),
    /// The same, through `α^k + (1-α)^k + Σ τ_{L_i}(A) - 2^(1-k)` over the
    /// shortest equations of a `2 x k` system with `k` odd and `s = k - 1`.
    CommonShortest(Vec<ProductTable>),
}

struct Objectives {
    k: i32,
    score: Score,
}

impl Objectives {
    fn new(sys: &LinearSystem, space: &Space, objective: Objective) -> Result<Objectives> {
        let k = sys.k() as i32;
        if objective == Objective::Common {
            if let Ok(eqs) = counting::shortest_equations_by_column(sys) {
                let tables = eqs
                    .iter()
                    .map(|e| {
                        let scale: Vec<Vec<u32>> =
                            e.nonzero_coeffs().iter().map(|&a| space.scale_table(a)).collect();
                        let freqs = (1..space.size()).flat_map(|r| scale.iter().map(move |t| t[r])).collect();
                        ProductTable {
                            width: scale.len(),
                            freqs,
                        }
                    })
                    .collect();
                return Ok(Objectives {
                    k,
                    score: Score::CommonShortest(tables),
                });
            }
        }
        let table = full_table(sys, space)?;
        let score = match objective {
            Objective::Sidorenko => Score::Sidorenko(table),
            Objective::Common => Score::Common(table),
        };
        Ok(Objectives { k, score })
    }

    fn eval(&self, coeffs: &[Complex<f64>]) -> f64 {
        let alpha = coeffs[0].re;
        let bench = 0.5f64.powi(self.k - 1);
        match &self.score {
            Score::Sidorenko(t) => t.eval(|r| coeffs[r]) - alpha.powi(self.k),
            Score::Common(t) => {
                let comp = |r: usize| {
                    if r == 0 {
                        Complex::new(1.0, 0.0) - coeffs[0]
                    } else {
                        -coeffs[r]
                    }
                };
                t.eval(|r| coeffs[r]) + t.eval(comp) - bench
            }
            Score::CommonShortest(ts) => {
                let taus: f64 = ts.iter().map(|t| t.eval(|r| coeffs[r])).sum();
                alpha.powi(self.k) + (1.0 - alpha).powi(self.k) + taus - bench
            }
        }
    }
}

/// Frequencies `Σ_j L_ji s_j` for every `s ∈ (F_q^n)^m`, row by row.
fn full_table(sys: &LinearSystem, space: &Space) -> Result<ProductTable> {
    let size = space.size();
    let m = sys.m();
    let k = sys.k();
    let slots = size.checked_pow(m as u32).filter(|s| s.saturating_mul(k) <= MAX_STEP_TABLE);
    let Some(slots) = slots else {
        return Err(Error::BudgetExceeded(format!("{size}^{m} frequency tuples per step")));
    };
    let scaled: Vec<Vec<Vec<u32>>> = sys
        .rref_rows()
        .iter()
        .map(|row| row.iter().map(|&c| space.scale_table(c)).collect())
        .collect();
    let mut freqs = Vec::with_capacity(slots * k);
    let mut s = vec![0usize; m];
    for code in 0..slots {
        let mut c = code;
        for slot in s.iter_mut().rev() {
            *slot = c % size;
            c /= size;
        }
        for i in 0..k {
            let f = (0..m).fold(0usize, |acc, j| space.add(acc, scaled[j][i][s[j]] as usize));
            freqs.push(f as u32);
        }
    }
    Ok(ProductTable { width: k, freqs })
}

struct Restart {
    best: Vec<bool>,
    estimate: f64,
    accepted: u64,
    evaluations: u64,
}

fn coefficients(space: &Space, members: &[bool]) -> Result<Vec<Complex<f64>>> {
    let data: Vec<Complex<f64>> = members
        .iter()
        .map(|&b| Complex::new(if b { 1.0 } else { 0.0 }, 0.0))
        .collect();
    transform(space, &data, true)
}

fn restart_seed(seed: u64, restart: u32) -> u64 {
    seed ^ (restart as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

fn run_restart(
    space: &Space,
    obj: &Objectives,
    start: Vec<bool>,
    schedule: &AnnealSchedule,
    rng: &mut ChaCha8Rng,
    chars: &[Complex<f64>],
) -> Result<Restart> {
    let size = space.size();
    let inv = 1.0 / size as f64;
    let mut members = start;
    let mut coeffs = coefficients(space, &members)?;
    let mut current = obj.eval(&coeffs);
    let mut out = Restart {
        best: members.clone(),
        estimate: current,
        accepted: 0,
        evaluations: 1,
    };
    let toggle = |coeffs: &mut [Complex<f64>], x: usize, add: bool| {
        let d = if add { inv } else { -inv };
        space.for_each_trace_dot(x, |r, t| coeffs[r] += chars[t as usize] * d);
    };
    let ratio = if schedule.steps > 1 {
        (schedule.t_end / schedule.t_start).powf(1.0 / (schedule.steps - 1) as f64)
    } else {
        1.0
    };
    let mut temp = schedule.t_start;
    for step in 0..schedule.steps {
        let x = rng.gen_range(0..size);
        let add = !members[x];
        toggle(&mut coeffs, x, add);
        let proposal = obj.eval(&coeffs);
        out.evaluations += 1;
        let delta = proposal - current;
        let u: f64 = rng.gen();
        if delta <= 0.0 || u < (-delta / temp).exp() {
            members[x] = add;
            current = proposal;
            out.accepted += 1;
            if current < out.estimate {
                out.estimate = current;
                out.best.clone_from(&members);
            }
        } else {
            toggle(&mut coeffs, x, !add);
        }
        if (step + 1) % RESYNC_EVERY == 0 {
            coeffs = coefficients(space, &members)?;
            current = obj.eval(&coeffs);
        }
        temp *= ratio;
    }
    Ok(out)
}

/// Simulated annealing with single-point toggles. Restarts run in parallel
/// from independent seeds; the best restart is chosen by its exactly
/// recounted deficit, ties broken lexicographically.
pub fn anneal_search(sys: &LinearSystem, cfg: &SearchConfig) -> Result<Witness> {
    let Strategy::Anneal(schedule) = cfg.strategy else {
        return Err(Error::Invariant("anneal_search needs an annealing strategy".into()));
    };
    if schedule.restarts == 0 || schedule.steps == 0 || !(schedule.t_start > 0.0 && schedule.t_end > 0.0) {
        return Err(Error::Invariant("annealing budgets and temperatures must be positive".into()));
    }
    let space = Space::new(sys.field().clone(), cfg.n)?;
    if space.size() > MAX_ANNEAL_POINTS {
        return Err(Error::TooLarge(space.size() as u64));
    }
    let planned = (schedule.steps + 1).saturating_mul(schedule.restarts as u64);
    if planned > cfg.eval_budget {
        return Err(Error::BudgetExceeded(format!("{planned} evaluations over budget {}", cfg.eval_budget)));
    }
    if let Some(init) = &cfg.initial {
        if init.space().size() != space.size() || **init.field() != **space.field() {
            return Err(Error::DimensionMismatch {
                expected: space.size(),
                actual: init.space().size(),
            });
        }
    }
    let obj = Objectives::new(sys, &space, cfg.objective)?;
    let chars = sys.field().character_table::<f64>();

    let runs = (0..schedule.restarts)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(restart_seed(cfg.seed, i));
            let start = match &cfg.initial {
                Some(set) => set.members().to_vec(),
                None => (0..space.size()).map(|_| rng.gen::<bool>()).collect(),
            };
            run_restart(&space, &obj, start, &schedule, &mut rng, &chars)
        })
        .collect::<Result<Vec<_>>>()?;

    let evaluations: u64 = runs.iter().map(|r| r.evaluations).sum();
    let accepted: u64 = runs.iter().map(|r| r.accepted).sum();
    let mut scored = runs
        .into_iter()
        .enumerate()
        .map(|(i, r)| {
            let set = PointSet::from_members(space.clone(), r.best);
            let d = exact_deficit(sys, &set, cfg.objective)?;
            Ok((d, set, i, r.estimate))
        })
        .collect::<Result<Vec<_>>>()?;
    scored.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.indices().cmp(b.1.indices())));
    let (deficit, set, restart, estimate) = scored.swap_remove(0);
    let summary = format!(
        "anneal: {} restarts x {} steps, temperature {:e} -> {:e}, {} moves accepted, best from restart {} (estimate {:.3e})",
        schedule.restarts, schedule.steps, schedule.t_start, schedule.t_end, accepted, restart, estimate
    );
    Ok(Witness {
        objective: cfg.objective,
        q: space.q(),
        n: cfg.n,
        points: set.indices().to_vec(),
        deficit,
        evaluations,
        summary,
        set,
    })
}

/// Dispatches on the strategy.
pub fn search(sys: &LinearSystem, cfg: &SearchConfig) -> Result<Witness> {
    match cfg.strategy {
        Strategy::Anneal(_) => anneal_search(sys, cfg),
        _ => exhaustive_search(sys, cfg),
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::field::FieldSpec;
    use crate::scalar::rational_string;

    fn sys(q: u64, rows: &[Vec<i64>]) -> LinearSystem {
        LinearSystem::from_ints(Arc::new(FieldSpec::of_order(q).unwrap()), rows).unwrap()
    }

    #[test]
    fn lex_order_on_masks() {
        let as_list = |m: u64| (0..64).filter(|i| m >> i & 1 == 1).collect::<Vec<u32>>();
        for a in 0..64u64 {
            for b in 0..64u64 {
                assert_eq!(lex_cmp(a, b), as_list(a).cmp(&as_list(b)), "{a} {b}");
            }
        }
    }

    #[test]
    fn gosper_enumerates_combinations() {
        let masks = fixed_size_masks(7, 3);
        assert_eq!(masks.len(), 35);
        assert!(masks.iter().all(|m| m.count_ones() == 3 && *m < 128));
        assert_eq!(fixed_size_masks(5, 5), vec![31]);
        assert_eq!(fixed_size_masks(5, 0), vec![0]);
    }

    #[test]
    fn three_term_sum_over_f3() {
        let s = sys(3, &[vec![1, 1, 1]]);
        let cfg = SearchConfig::new(1, Objective::Sidorenko, Strategy::Exhaustive);
        let w = exhaustive_search(&s, &cfg).unwrap();
        // {0,1}, {0,2} and {1,2} all attain the minimum; the tie-break picks {0,1}
        assert_eq!(w.points, vec![0, 1]);
        assert_eq!(rational_string(&w.deficit), "-2/27");
        let other = PointSet::from_indices(w.set.space().clone(), [1, 2]).unwrap();
        assert_eq!(counting::sidorenko_deficit(&s, &other).unwrap(), w.deficit);
        assert_eq!(w.evaluations, 8);
    }

    #[test]
    fn mask_scan_agrees_with_subset_sums() {
        // fixed size 2 over F_3 takes the scanning path
        let s = sys(3, &[vec![1, 1, 1]]);
        let cfg = SearchConfig::new(1, Objective::Sidorenko, Strategy::ExhaustiveFixedSize { size: 2 });
        let w = exhaustive_search(&s, &cfg).unwrap();
        assert_eq!(w.points, vec![0, 1]);
        let common = SearchConfig::new(2, Objective::Common, Strategy::ExhaustiveFixedSize { size: 4 });
        let wc = exhaustive_search(&s, &common).unwrap();
        assert_eq!(wc.deficit, counting::common_deficit(&s, &wc.set).unwrap());
    }

    #[test]
    fn schur_triples_common_minimum() {
        let s = sys(5, &[vec![1, 1, -1]]);
        let w = exhaustive_search(&s, &SearchConfig::new(1, Objective::Common, Strategy::Exhaustive)).unwrap();
        assert!(w.deficit >= BigRational::from_integer(0.into()) || w.is_negative());
        assert_eq!(w.deficit, counting::common_deficit(&s, &w.set).unwrap());
    }

    #[test]
    fn additive_quadruples_are_sidorenko_on_small_spaces() {
        let s = sys(3, &[vec![1, -1, 1, -1]]);
        let w = exhaustive_search(&s, &SearchConfig::new(2, Objective::Sidorenko, Strategy::Exhaustive)).unwrap();
        assert!(!w.is_negative());
        // the empty set attains zero first
        assert!(w.points.is_empty());
    }

    #[test]
    fn budgets() {
        let s = sys(5, &[vec![1, 1, -1]]);
        let cfg = SearchConfig::new(3, Objective::Sidorenko, Strategy::Exhaustive);
        assert!(matches!(exhaustive_search(&s, &cfg), Err(Error::BudgetExceeded(_))));
        let mut anneal = SearchConfig::new(6, Objective::Sidorenko, Strategy::Anneal(AnnealSchedule::default()));
        assert!(matches!(anneal_search(&s, &anneal), Err(Error::TooLarge(_))));
        anneal.n = 1;
        anneal.eval_budget = 10;
        assert!(matches!(anneal_search(&s, &anneal), Err(Error::BudgetExceeded(_))));
    }

    #[test]
    fn anneal_is_reproducible_and_exact() {
        let s = sys(5, &[vec![1, 1, 1]]);
        let schedule = AnnealSchedule {
            steps: 2000,
            restarts: 3,
            ..AnnealSchedule::default()
        };
        let mut cfg = SearchConfig::new(2, Objective::Sidorenko, Strategy::Anneal(schedule));
        cfg.seed = 7;
        let a = anneal_search(&s, &cfg).unwrap();
        let b = anneal_search(&s, &cfg).unwrap();
        assert_eq!(a.points, b.points);
        assert_eq!(a.deficit, b.deficit);
        assert_eq!(a.deficit, counting::sidorenko_deficit(&s, &a.set).unwrap());
        assert!(a.is_negative());
    }

    #[test]
    fn spectral_scores_match_exact_deficits() {
        let s = sys(5, &[vec![1, 0, -1, 2, -2], vec![0, 1, 2, -1, -2]]);
        let space = Space::new(s.field().clone(), 1).unwrap();
        let set = PointSet::from_indices(space.clone(), [0, 1, 3]).unwrap();
        let coeffs = coefficients(&space, set.members()).unwrap();
        let to_f64 = |r: BigRational| crate::scalar::Scalar::to_f64(&r);
        for objective in [Objective::Sidorenko, Objective::Common] {
            let obj = Objectives::new(&s, &space, objective).unwrap();
            let exact = to_f64(exact_deficit(&s, &set, objective).unwrap());
            assert!((obj.eval(&coeffs) - exact).abs() < 1e-12, "{objective:?}");
        }
        let general = Objectives {
            k: 5,
            score: Score::Common(full_table(&s, &space).unwrap()),
        };
        let exact = to_f64(counting::common_deficit(&s, &set).unwrap());
        assert!((general.eval(&coeffs) - exact).abs() < 1e-12);
    }
}
