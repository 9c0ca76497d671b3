mod input;
mod paper;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_rational::BigRational;
use serde_json::{json, Value};
use sidorenko::classify::{classify_system, Answer, ClassifyOptions, Objective, Verdict};
use sidorenko::counting::{self, count_auto, count_solutions, Method, PointSet};
use sidorenko::fourier::{sum_tau_shortest, system_density, tau};
use sidorenko::scalar::rational_string;
use sidorenko::search::{search, AnnealSchedule, SearchConfig, Strategy, Witness};
use sidorenko::{Error, LinearSystem};

use input::{load_function, load_set, parse_system, CliError, CliResult, SystemFile};
use report::{row, table, Report};

#[derive(Parser, Debug)]
#[command(name = "sidorenko", version, about = "Classify and count solutions of linear systems over finite fields")]
struct Cli {
    /// Print a single JSON report instead of text tables.
    #[arg(long, global = true)]
    json: bool,
    /// Cap on worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for randomized steps.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Leave the timestamp out of JSON reports.
    #[arg(long, global = true)]
    no_timestamp: bool,
    /// Exit with status 2 when a verdict is Unknown.
    #[arg(long, global = true)]
    require_decision: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decide the Sidorenko and common properties where a rule applies.
    Classify {
        #[arg(long)]
        system: PathBuf,
        /// Candidate witness sets, tried for negative deficits.
        #[arg(long)]
        witness: Vec<PathBuf>,
        /// Dimension of the witness sets.
        #[arg(long)]
        n: Option<usize>,
    },
    /// Count solutions with all variables in a set.
    Count {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        set: PathBuf,
        #[arg(long)]
        n: usize,
        /// brute-force, kernel, fourier or meet-in-middle; chosen automatically if absent.
        #[arg(long)]
        method: Option<Method>,
    },
    /// Exact Sidorenko and common deficits of a set.
    Deficit {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        set: PathBuf,
        #[arg(long)]
        n: usize,
    },
    /// Twisted sums of a function file.
    Tau {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        function: PathBuf,
    },
    /// Search for a set with negative deficit.
    Search {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = ObjectiveArg::Sidorenko)]
        objective: ObjectiveArg,
        #[arg(long, value_enum, default_value_t = StrategyArg::Anneal)]
        strategy: StrategyArg,
        /// Set size for the fixed-size strategy.
        #[arg(long)]
        size: Option<usize>,
        #[arg(long, default_value_t = AnnealSchedule::default().steps)]
        steps: u64,
        #[arg(long, default_value_t = AnnealSchedule::default().restarts)]
        restarts: u32,
        #[arg(long, default_value_t = AnnealSchedule::default().t_start)]
        t_start: f64,
        #[arg(long, default_value_t = AnnealSchedule::default().t_end)]
        t_end: f64,
        /// Starting set for every restart.
        #[arg(long)]
        initial: Option<PathBuf>,
        /// Maximum objective evaluations.
        #[arg(long, default_value_t = 100_000_000)]
        budget: u64,
        /// Write the best set here in point-set format.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the built-in reproduction checks.
    VerifyPaper,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ObjectiveArg {
    Sidorenko,
    Common,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum StrategyArg {
    Exhaustive,
    FixedSize,
    Anneal,
}

/// What a subcommand produced, before printing.
struct Outcome {
    report: Report,
    text: String,
    code: u8,
}

fn rat(r: &BigRational) -> String {
    rational_string(r)
}

fn system_echo(f: &SystemFile) -> Value {
    json!({ "path": f.path, "q": f.q, "modulus": f.modulus, "rows": f.rows })
}

fn system_line(f: &SystemFile) -> String {
    let sys = &f.system;
    format!("{}: {} x {} over F_{}", f.path, sys.m(), sys.k(), f.q)
}

fn coeffs(e: &sidorenko::InducedEquation) -> String {
    e.coeffs.iter().map(|c| c.value().to_string()).collect::<Vec<_>>().join(" ")
}

fn answer(a: Answer) -> &'static str {
    match a {
        Answer::Yes => "yes",
        Answer::No => "no",
        Answer::Unknown => "unknown",
    }
}

fn classify_text(f: &SystemFile, v: &Verdict) -> String {
    let mut rows = vec![
        row(["system", &system_line(f)]),
        row(["sidorenko", answer(v.sidorenko)]),
        row(["common", answer(v.common)]),
        row(["s", &v.s.to_string()]),
        row(["translation invariant", &v.translation_invariant.to_string()]),
    ];
    for (i, e) in v.shortest.iter().enumerate() {
        let label = if i == 0 { "shortest equations" } else { "" };
        let mark = if e.sidorenko { "sidorenko" } else { "" };
        rows.push(row([label, &coeffs(&e.equation), mark]));
    }
    for (i, c) in v.certificates.iter().enumerate() {
        let label = if i == 0 { "certificates" } else { "" };
        let tag = |b: Option<bool>| b.map_or("-", |b| if b { "yes" } else { "no" });
        rows.push(row([
            label,
            &format!("{:?}", c.rule),
            &format!("sidorenko {}", tag(c.sidorenko)),
            &format!("common {}", tag(c.common)),
        ]));
    }
    for (i, n) in v.notes.iter().enumerate() {
        rows.push(row([if i == 0 { "notes" } else { "" }, n]));
    }
    table(&rows)
}

fn classify(cli: &Cli, system: &PathBuf, witness: &[PathBuf], n: Option<usize>) -> CliResult<Outcome> {
    let f = parse_system(system)?;
    let mut opts = ClassifyOptions {
        seed: cli.seed,
        ..ClassifyOptions::default()
    };
    if !witness.is_empty() {
        let n = n.ok_or_else(|| CliError::Usage("--witness needs --n".into()))?;
        for w in witness {
            opts.witness_sets.push(load_set(w, &f.system, n)?);
        }
    }
    let v = classify_system(&f.system, &opts)?;
    let code = if cli.require_decision && !v.is_decided() { 2 } else { 0 };
    let inputs = json!({ "system": system_echo(&f), "witnesses": witness, "n": n });
    let text = classify_text(&f, &v);
    let mut report = Report::new("classify", inputs, serde_json::to_value(&v).expect("verdict serializes"));
    report.seed = Some(cli.seed);
    Ok(Outcome { report, text, code })
}

fn benchmark(sys: &LinearSystem, set: &PointSet) -> BigRational {
    let q = BigInt::from(set.space().q());
    let nm = (set.dim() * sys.m()) as u32;
    BigRational::new(BigInt::from(set.len()).pow(sys.k() as u32), q.pow(nm))
}

fn count(system: &PathBuf, set: &PathBuf, n: usize, method: Option<Method>) -> CliResult<Outcome> {
    let f = parse_system(system)?;
    let a = load_set(set, &f.system, n)?;
    let c = match method {
        Some(m) => count_solutions(&f.system, &a, m)?,
        None => count_auto(&f.system, &a)?,
    };
    let bench = benchmark(&f.system, &a);
    let count = BigRational::from_integer(BigInt::from(c.count.clone()));
    let result = json!({
        "count": c.count.to_string(),
        "total": c.total.to_string(),
        "method": c.method,
        "float_derived": c.float_derived,
        "set_size": a.len(),
        "density": rat(&c.density()),
        "benchmark": rat(&bench),
        "below_benchmark": count < bench,
    });
    let text = table(&[
        row(["system", &system_line(&f)]),
        row(["set", &format!("{} points in F_{}^{n}", a.len(), f.q)]),
        row(["count", &c.count.to_string()]),
        row(["|A|^k / q^(nm)", &rat(&bench)]),
        row(["total", &c.total.to_string()]),
        row(["method", &format!("{:?}", c.method)]),
        row(["float derived", &c.float_derived.to_string()]),
    ]);
    let inputs = json!({ "system": system_echo(&f), "set": set, "n": n, "method": method });
    Ok(Outcome {
        report: Report::new("count", inputs, result),
        text,
        code: 0,
    })
}

fn deficit(system: &PathBuf, set: &PathBuf, n: usize) -> CliResult<Outcome> {
    let f = parse_system(system)?;
    let a = load_set(set, &f.system, n)?;
    let (result, rows) = match counting::deficits(&f.system, &a) {
        Ok(d) => {
            let rows = vec![
                row(["density", &rat(&d.alpha)]),
                row(["Lambda(A)", &rat(&d.density)]),
                row(["Lambda(complement)", &rat(&d.complement_density)]),
                row(["sidorenko deficit", &rat(&d.sidorenko)]),
                row(["common deficit", &rat(&d.common)]),
            ];
            (serde_json::to_value(&d).expect("deficits serialize"), rows)
        }
        Err(Error::BudgetExceeded(_)) => {
            let sid = counting::sidorenko_deficit(&f.system, &a)?;
            let common = counting::common_deficit(&f.system, &a)?;
            let rows = vec![
                row(["density", &rat(&a.density())]),
                row(["sidorenko deficit", &rat(&sid)]),
                row(["common deficit", &rat(&common)]),
            ];
            let v = json!({ "alpha": rat(&a.density()), "sidorenko": rat(&sid), "common": rat(&common) });
            (v, rows)
        }
        Err(e) => return Err(e.into()),
    };
    let mut all = vec![row(["system", &system_line(&f)])];
    all.extend(rows);
    let inputs = json!({ "system": system_echo(&f), "set": set, "n": n });
    Ok(Outcome {
        report: Report::new("deficit", inputs, result),
        text: table(&all),
        code: 0,
    })
}

fn tau_cmd(system: &PathBuf, function: &PathBuf) -> CliResult<Outcome> {
    let f = parse_system(system)?;
    let g = load_function(function, &f.system)?;
    let density = system_density(&f.system, &g)?.re;
    let mut rows = vec![
        row(["system", &system_line(&f)]),
        row(["mean", &format!("{:.12}", g.mean())]),
        row(["Lambda(f)", &format!("{density:.12e}")]),
    ];
    let mut result = json!({ "mean": g.mean(), "density": density });
    match sum_tau_shortest(&f.system, &g) {
        Ok(r) => {
            for (i, (e, t)) in r.equations.iter().zip(&r.taus).enumerate() {
                let mark = if r.sidorenko[i] { "sidorenko" } else { "" };
                rows.push(row([&format!("tau L_{}", i + 1), &coeffs(e), &format!("{:.6e}", t.re), mark]));
            }
            rows.push(row(["sum", &format!("{:.6e}", r.sum)]));
            rows.push(row(["witnesses uncommon", &r.witnesses_uncommon().to_string()]));
            result["shortest"] = serde_json::to_value(&r).expect("report serializes");
            result["witnesses_uncommon"] = json!(r.witnesses_uncommon());
        }
        Err(Error::HypothesisViolated(_)) => {
            let mut taus = Vec::new();
            for (i, g_row) in f.system.generators().iter().enumerate() {
                let t = tau(g_row, &g)?;
                rows.push(row([&format!("tau row {}", i + 1), &format!("{:.6e}", t.re)]));
                taus.push(t.re);
            }
            result["row_taus"] = json!(taus);
        }
        Err(e) => return Err(e.into()),
    }
    let inputs = json!({ "system": system_echo(&f), "function": function });
    Ok(Outcome {
        report: Report::new("tau", inputs, result),
        text: table(&rows),
        code: 0,
    })
}

fn search_cmd(cli: &Cli, cmd: &Command) -> CliResult<Outcome> {
    let Command::Search {
        system,
        n,
        objective,
        strategy,
        size,
        steps,
        restarts,
        t_start,
        t_end,
        initial,
        budget,
        out,
    } = cmd
    else {
        unreachable!()
    };
    let f = parse_system(system)?;
    let objective = match objective {
        ObjectiveArg::Sidorenko => Objective::Sidorenko,
        ObjectiveArg::Common => Objective::Common,
    };
    let strategy = match strategy {
        StrategyArg::Exhaustive => Strategy::Exhaustive,
        StrategyArg::FixedSize => Strategy::ExhaustiveFixedSize {
            size: size.ok_or_else(|| CliError::Usage("--strategy fixed-size needs --size".into()))?,
        },
        StrategyArg::Anneal => Strategy::Anneal(AnnealSchedule {
            steps: *steps,
            restarts: *restarts,
            t_start: *t_start,
            t_end: *t_end,
        }),
    };
    let mut cfg = SearchConfig::new(*n, objective, strategy);
    cfg.seed = cli.seed;
    cfg.eval_budget = *budget;
    if let Some(p) = initial {
        cfg.initial = Some(load_set(p, &f.system, *n)?);
    }
    let w: Witness = search(&f.system, &cfg)?;
    if let Some(p) = out {
        std::fs::write(p, w.set.to_file_string()).map_err(|source| CliError::Io {
            path: p.display().to_string(),
            source,
        })?;
    }
    let coords: Vec<Vec<u32>> = w
        .set
        .coordinates()
        .iter()
        .map(|p| p.iter().map(|c| c.value()).collect())
        .collect();
    let mut result = serde_json::to_value(&w).expect("witness serializes");
    result["coordinates"] = json!(coords);
    result["negative"] = json!(w.is_negative());
    let text = table(&[
        row(["system", &system_line(&f)]),
        row(["objective", &format!("{objective:?}")]),
        row(["set size", &w.set.len().to_string()]),
        row(["deficit", &rat(&w.deficit)]),
        row(["negative", &w.is_negative().to_string()]),
        row(["evaluations", &w.evaluations.to_string()]),
        row(["search", &w.summary]),
    ]) + &w.set.to_file_string();
    let inputs = json!({
        "system": system_echo(&f),
        "n": n,
        "objective": objective,
        "strategy": strategy,
        "budget": budget,
        "initial": initial,
    });
    let mut report = Report::new("search", inputs, result);
    report.seed = Some(cli.seed);
    Ok(Outcome { report, text, code: 0 })
}

fn verify_paper() -> Outcome {
    let checks = paper::run();
    let failed = checks.iter().filter(|c| !c.passed).count();
    let rows: Vec<Vec<String>> = checks
        .iter()
        .map(|c| row([if c.passed { "PASS" } else { "FAIL" }, c.name, &c.detail]))
        .collect();
    let text = table(&rows) + &format!("{} of {} checks passed\n", checks.len() - failed, checks.len());
    let result = json!({ "checks": checks, "failed": failed });
    Outcome {
        report: Report::new("verify-paper", json!({}), result),
        text,
        code: if failed == 0 { 0 } else { 1 },
    }
}

fn run(cli: &Cli) -> CliResult<Outcome> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    match &cli.command {
        Command::Classify { system, witness, n } => classify(cli, system, witness, *n),
        Command::Count { system, set, n, method } => count(system, set, *n, *method),
        Command::Deficit { system, set, n } => deficit(system, set, *n),
        Command::Tau { system, function } => tau_cmd(system, function),
        cmd @ Command::Search { .. } => search_cmd(cli, cmd),
        Command::VerifyPaper => Ok(verify_paper()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(mut out) => {
            if cli.json {
                if !cli.no_timestamp {
                    out.report.timestamp = SystemTime::now().duration_since(UNIX_EPOCH).ok().map(|d| d.as_secs());
                }
                println!("{}", out.report.json());
            } else {
                print!("{}", out.text);
            }
            ExitCode::from(out.code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
