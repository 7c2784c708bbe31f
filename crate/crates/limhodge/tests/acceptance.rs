//! One PASS/FAIL line per acceptance criterion; exits nonzero if any
//! criterion fails. Runs without the libtest harness so the lines always
//! print.

mod common;

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use common::{brute_grading, descended, family, kunneth};
use limhodge::degeneration::generate::random_family;
use limhodge::degeneration::{build_page, generate, run_pipeline, Family, PipelineOptions};
use limhodge::hl::AXIOM_NAMES;
use limhodge::suite::{self, SuiteResult};

struct Outcome {
    name: &'static str,
    passed: bool,
    elapsed: Duration,
    limit: Option<Duration>,
    detail: String,
}

fn timed(name: &'static str, limit: Option<u64>, f: impl FnOnce() -> Result<String, String>) -> Outcome {
    let start = Instant::now();
    let res = f();
    let elapsed = start.elapsed();
    let limit = limit.map(Duration::from_secs);
    let in_time = limit.is_none_or(|l| elapsed < l);
    let (ok, detail) = match res {
        Ok(d) => (in_time, d),
        Err(d) => (false, d),
    };
    let detail = if in_time { detail } else { format!("{detail}; over the time limit") };
    Outcome { name, passed: ok, elapsed, limit, detail }
}

fn suites(rs: Vec<SuiteResult>) -> Result<String, String> {
    let summary: Vec<String> = rs.iter().map(|r| format!("{} {} cases", r.name, r.cases)).collect();
    let failures: Vec<String> =
        rs.iter().flat_map(|r| r.failures.iter().take(3).map(move |f| format!("{}: {f}", r.name))).collect();
    if failures.is_empty() {
        Ok(summary.join(", "))
    } else {
        Err(failures.join("; "))
    }
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn families() -> Vec<Family> {
    let mut fams = suite::named_families();
    fams.extend((0..20).map(random_family));
    fams
}

fn nodal_conic() -> Result<String, String> {
    let inst = family("nodal-conic");
    let r = run_pipeline(&inst, &PipelineOptions::default()).map_err(|e| e.to_string())?;
    ensure(r.passed, format!("{:?}", r.failures()))?;
    ensure(r.betti == vec![1, 0, 1], format!("betti {:?}", r.betti))?;
    let expected = BTreeMap::from([((-1, 0), 1), ((1, 0), 1)]);
    let got = descended(&inst);
    ensure(got == expected, format!("grading {got:?}"))?;
    Ok(format!("betti {:?}, grading {got:?}", r.betti))
}

fn product() -> Result<String, String> {
    let a = family("nodal-conic");
    let p = family("product:nodal-conic+nodal-conic");
    let r = run_pipeline(&p, &PipelineOptions::default()).map_err(|e| e.to_string())?;
    ensure(r.passed, format!("{:?}", r.failures()))?;
    ensure(r.betti == vec![1, 0, 2, 0, 1], format!("betti {:?}", r.betti))?;
    let single = brute_grading(&build_page(&a).map_err(|e| e.to_string())?.module);
    let expected = kunneth(&single, &single);
    let got = descended(&p);
    ensure(got == expected, format!("grading {got:?} vs {expected:?}"))?;
    Ok(format!("betti {:?}, graded dims match the tensor square", r.betti))
}

fn theorem_shadows(fams: &[Family]) -> Result<String, String> {
    for f in fams {
        let inst = generate(f).map_err(|e| format!("{f}: {e}"))?;
        ensure(inst.k() <= 3 && inst.alphabet.len() <= 6, format!("{f}: out of scope"))?;
    }
    let opts = PipelineOptions { directions: None, samples: 3, seed: 0 };
    suites(vec![suite::family_suite(fams, &opts)])
}

fn hl_modules(fams: &[Family]) -> Result<String, String> {
    for f in fams {
        let page = build_page(&generate(f).map_err(|e| e.to_string())?).map_err(|e| format!("{f}: {e}"))?;
        let rep = page.module.report();
        ensure(rep.axioms.len() == AXIOM_NAMES.len(), format!("{f}: {} axioms", rep.axioms.len()))?;
        ensure(rep.passed(), format!("{f}: {:?}", rep.failures()))?;
    }
    suites(vec![suite::hl_suite(fams)]).map(|s| format!("{} axioms each, {s}", AXIOM_NAMES.len()))
}

fn summary_line(o: &Outcome) -> String {
    let limit = o.limit.map_or(String::new(), |l| format!(" (limit {} s)", l.as_secs()));
    format!("{} {}: {:.2} s{limit}; {}", if o.passed { "PASS" } else { "FAIL" }, o.name, o.elapsed.as_secs_f64(), o.detail)
}

fn main() {
    let fams = families();
    let outcomes = vec![
        timed("nodal-conic limit", Some(1), nodal_conic),
        timed("product limit and Kunneth", Some(5), product),
        timed("pipeline on generated families", Some(60), || theorem_shadows(&fams)),
        timed("page-module axioms and descent", None, || hl_modules(&fams)),
        timed("monodromy weight filtration", None, || {
            suites(vec![suite::monodromy_suite(200, 8, 1), suite::relative_nonexistence_suite()])
        }),
        timed("spectral sequences", None, || {
            suites(vec![suite::spectral_suite(100, 8, 4, 2), suite::d1_split_suite(50, 8, 3, 3)])
        }),
        timed("combinatorics", Some(30), || {
            suites(vec![suite::chibar_sign_suite(5), suite::chibar_restriction_suite(4), suite::local_complex_suite(4)])
        }),
    ];
    for o in &outcomes {
        println!("{}", summary_line(o));
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    println!("acceptance: {} of {} criteria pass", outcomes.len() - failed, outcomes.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
