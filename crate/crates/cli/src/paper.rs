//! The built-in reproduction suite behind `verify-paper`.

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;
use sidorenko::catalog;
use sidorenko::classify::{classify_system, Answer, ClassifyOptions, Objective, Rule};
use sidorenko::counting::{self, count_solutions, Method, PointSet};
use sidorenko::fourier::{build_fpz_function, Thm43Instance, DEFAULT_EPSILON};
use sidorenko::scalar::rational_string;
use sidorenko::search::{exhaustive_search, SearchConfig, Strategy};
use sidorenko::{FieldSpec, InducedEquation, LinearSystem, Space};

#[derive(Debug, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

type Outcome = sidorenko::Result<(bool, String)>;

fn field(q: u64) -> sidorenko::Result<Arc<FieldSpec>> {
    Ok(Arc::new(FieldSpec::of_order(q)?))
}

fn example_count() -> Outcome {
    let sys = catalog::non_aq(5)?;
    let set = catalog::non_aq_witness()?;
    let c = count_solutions(&sys, &set, Method::BruteForce)?;
    let bench = BigRational::new(BigInt::from(8).pow(5), BigInt::from(5).pow(4));
    let count = BigRational::from_integer(BigInt::from(c.count.clone()));
    Ok((
        count < bench && c.count == catalog::NON_AQ_WITNESS_COUNT.into(),
        format!("{} solutions, benchmark {}", c.count, rational_string(&bench)),
    ))
}

fn example_shortest() -> Outcome {
    let mut details = Vec::new();
    let mut ok = true;
    for q in [7, 11, 13] {
        let sys = catalog::non_aq(q)?;
        let v = classify_system(&sys, &ClassifyOptions::default())?;
        // L_1, L_2 and L_5 of the catalog listing
        let expected: Vec<InducedEquation> = [0usize, 1, 4]
            .iter()
            .filter_map(|&i| {
                let row: Vec<_> = catalog::NON_AQ_SHORTEST[i].iter().map(|&c| sys.field().from_integer(c)).collect();
                InducedEquation::canonical(sys.field(), row)
            })
            .collect();
        let got: Vec<&InducedEquation> = v.shortest.iter().filter(|e| e.sidorenko).map(|e| &e.equation).collect();
        let same = got.len() == 3 && expected.iter().all(|e| got.contains(&e));
        ok &= same && v.s == 4 && v.common == Answer::Yes;
        details.push(format!("F_{q}: {} marked", got.len()));
    }
    Ok((ok, details.join(", ")))
}

fn example_not_sidorenko() -> Outcome {
    let v = classify_system(&catalog::non_aq(5)?, &ClassifyOptions::default())?;
    let witnessed = v.certificates.iter().any(|c| c.rule == Rule::NumericWitness);
    Ok((
        v.sidorenko == Answer::No && v.common == Answer::Yes && witnessed,
        format!("sidorenko {:?}, common {:?}", v.sidorenko, v.common),
    ))
}

fn full_space_counts() -> Outcome {
    let cases: [(u64, usize, Vec<Vec<i64>>); 3] = [
        (5, 2, catalog::NON_AQ_ROWS.iter().map(|r| r.to_vec()).collect()),
        (3, 2, vec![vec![1, 1, 1]]),
        (4, 2, vec![vec![1, 1, 1, 1], vec![0, 1, 2, 3]]),
    ];
    for (q, n, rows) in cases {
        let sys = LinearSystem::from_ints(field(q)?, &rows)?;
        let full = PointSet::full(Space::new(sys.field().clone(), n)?);
        let c = counting::count_auto(&sys, &full)?;
        if c.count != counting::total_solutions(&sys, n) {
            return Ok((false, format!("F_{q}^{n}: {} != q^(n(k-m))", c.count)));
        }
    }
    Ok((true, "3 systems".into()))
}

fn odd_sum_deficit() -> Outcome {
    let sys = LinearSystem::from_ints(field(3)?, &[vec![1, 1, 1]])?;
    let set = PointSet::full(Space::new(sys.field().clone(), 1)?).punctured_at_zero();
    let d = counting::sidorenko_deficit(&sys, &set)?;
    let ie = counting::inclusion_exclusion(&sys, &set)?;
    let expected = BigRational::new(BigInt::from(-2), BigInt::from(27));
    Ok((d == expected && ie.lhs == ie.rhs, rational_string(&d)))
}

fn odd_s_not_sidorenko() -> Outcome {
    let v = classify_system(&catalog::four_ap(5)?, &ClassifyOptions::default())?;
    Ok((
        v.s == 3 && v.sidorenko == Answer::No,
        format!("s = {}, sidorenko {:?}", v.s, v.sidorenko),
    ))
}

fn aq_common_small() -> Outcome {
    let sys = catalog::aq(5)?;
    let cfg = SearchConfig::new(1, Objective::Common, Strategy::Exhaustive);
    let w = exhaustive_search(&sys, &cfg)?;
    let v = classify_system(&sys, &ClassifyOptions::default())?;
    Ok((
        !w.deficit.lt(&BigRational::zero()) && v.common == Answer::Yes,
        format!("least common deficit over F_5 is {}", rational_string(&w.deficit)),
    ))
}

fn spectral_construction() -> Outcome {
    let sys = catalog::single_sidorenko()?;
    let inst = Thm43Instance::find(&sys)?;
    let f = build_fpz_function(&sys, &inst, 0, DEFAULT_EPSILON)?;
    let b = inst.b.value() as usize;
    let binv = sys.field().inv(inst.b)?.value() as usize;
    let ok = (f.function.mean() - 0.5).abs() < 1e-12
        && f.function.in_unit_range(1e-12)
        && f.function.coeff(b).norm() == 0.0
        && f.function.coeff(binv).norm() == 0.0
        && f.report.sum < 0.0;
    Ok((ok, format!("sum of tau {:.3e} after {} draws", f.report.sum, f.attempts)))
}

fn single_equations() -> Outcome {
    let f = field(7)?;
    let cases: [(&[i64], bool); 4] = [
        (&[1, -1, 1, -1], true),
        (&[1, 2, -1, -2], true),
        (&[2, 1, 3, -6], false),
        (&[1, 1, -2], false),
    ];
    for (coeffs, expected) in cases {
        let c: Vec<_> = coeffs.iter().map(|&v| f.from_integer(v)).collect();
        if sidorenko::classify::single_equation_is_sidorenko(&f, &c) != expected {
            return Ok((false, format!("{coeffs:?}")));
        }
    }
    Ok((true, "4 equations over F_7".into()))
}

pub fn run() -> Vec<Check> {
    let checks: [(&'static str, fn() -> Outcome); 9] = [
        ("8-point set in F_5^2 has fewer than 8^5/5^4 solutions", example_count),
        ("L_1, L_2, L_5 are the Sidorenko shortest equations (p > 5)", example_shortest),
        ("non-AQ example: common but not Sidorenko over F_5", example_not_sidorenko),
        ("full-space count is q^(n(k-m))", full_space_counts),
        ("x1 + x2 + x3 over F_3: F_3 minus 0 has deficit -2/27", odd_sum_deficit),
        ("odd s implies not Sidorenko (4-term progressions)", odd_s_not_sidorenko),
        ("AQ example: common, no subset of F_5 beats 2^(1-k)", aq_common_small),
        ("random-sign function over F_11 has negative tau sum", spectral_construction),
        ("single equations: Sidorenko iff coefficients pair off", single_equations),
    ];
    checks
        .into_iter()
        .map(|(name, f)| match f() {
            Ok((passed, detail)) => Check { name, passed, detail },
            Err(e) => Check {
                name,
                passed: false,
                detail: format!("error: {e}"),
            },
        })
        .collect()
}
