//! `limhodge`: load or generate degeneration instances, run the checks and
//! write reports.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use limhodge::degeneration::{
    build_page, generate, run_pipeline, spectral_pages, DegenerationError, DegenerationInstance, Family,
    PipelineOptions, PipelineReport, WeightPages,
};
use limhodge::field::{format_q, parse_q};
use limhodge::filtration::{Direction, Filtration};
use limhodge::linalg::Matrix;
use limhodge::monodromy::{lefschetz_basis, nilpotency_index, relative_weight_filtration, weight_filtration, MonodromyError};
use limhodge::suite::{self, SuiteResult};
use limhodge::{Field, Q};

#[derive(Parser)]
#[command(name = "limhodge", version, about = "Limit mixed Hodge structures of semistable degenerations, exactly")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
    /// Output format on stdout.
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: Format,
    /// Directory for `report.json` and `report.txt`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
    Grid,
}

#[derive(clap::Args)]
struct InstanceArg {
    /// Instance file or builtin family (nodal-conic, chain:M, cycle:M,
    /// smooth-curve:G, random:SEED, product:A+B).
    #[arg(long = "instance", value_name = "PATH|NAME")]
    flag: Option<String>,
    #[arg(value_name = "INSTANCE", conflicts_with = "flag")]
    positional: Option<String>,
}

impl InstanceArg {
    fn get(&self) -> Result<&str, Failure> {
        self.flag.as_deref().or(self.positional.as_deref()).ok_or_else(|| Failure::Usage("an instance is required".into()))
    }
}

#[derive(Subcommand)]
enum Verb {
    /// Print the instance file of a builtin family.
    Generate {
        #[command(flatten)]
        instance: InstanceArg,
    },
    /// Check an instance against the stratum data invariants.
    Validate {
        #[command(flatten)]
        instance: InstanceArg,
    },
    /// Build the page module and run its axiom and polarization checks.
    Build {
        #[command(flatten)]
        instance: InstanceArg,
    },
    /// Run the full pipeline.
    Pipeline {
        #[command(flatten)]
        instance: InstanceArg,
        /// Direction set such as `{}` or `{1,2}`; repeatable. Default: all.
        #[arg(long = "I", value_name = "SET")]
        dirs: Vec<String>,
        #[arg(long, default_value_t = 3)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Every page of the spectral sequence of each direction set.
    Spectral {
        #[command(flatten)]
        instance: InstanceArg,
        #[arg(long = "I", value_name = "SET")]
        dirs: Vec<String>,
    },
    /// Weight filtration of a nilpotent matrix given as JSON
    /// `{"n": [[...]], "w": [weights]}` (file or inline); `w` is optional
    /// and asks for the relative weight filtration.
    Monodromy {
        #[command(flatten)]
        instance: InstanceArg,
    },
    /// Exhaustive sign law, restriction and local complex checks.
    Combinatorics {
        /// Largest alphabet for the sign law.
        #[arg(long, default_value_t = 5)]
        letters: usize,
    },
    /// Run every oracle suite.
    Selftest {
        /// Number of random families.
        #[arg(long, default_value_t = 20)]
        random: u64,
    },
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Instance(DegenerationError),
    Other(String),
}

struct Report {
    passed: bool,
    json: Value,
    text: String,
    grid: Option<String>,
}

fn load_instance(spec: &str) -> Result<DegenerationInstance, Failure> {
    let path = Path::new(spec);
    if path.exists() {
        let s = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{spec}: {e}")))?;
        return DegenerationInstance::from_str(&s).map_err(Failure::Instance);
    }
    let fam: Family = spec.parse().map_err(|e: DegenerationError| Failure::Usage(format!("{spec}: no such file, and {e}")))?;
    generate(&fam).map_err(Failure::Instance)
}

/// `{}`, `{1}`, `{1,3}` to a mask over parts.
fn parse_dirs(s: &str, k: usize) -> Result<u32, Failure> {
    let bad = || Failure::Usage(format!("direction set {s:?}: expected {{}} or {{i,j,...}} with 1 <= i <= {k}"));
    let inner = s.trim().strip_prefix('{').and_then(|t| t.strip_suffix('}')).ok_or_else(bad)?;
    let mut mask = 0u32;
    for part in inner.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let i: usize = part.parse().map_err(|_| bad())?;
        if i == 0 || i > k {
            return Err(bad());
        }
        mask |= 1 << (i - 1);
    }
    Ok(mask)
}

fn dir_name(mask: u32, k: usize) -> String {
    let v: Vec<String> = (0..k).filter(|i| mask & (1 << i) != 0).map(|i| (i + 1).to_string()).collect();
    format!("{{{}}}", v.join(","))
}

fn error_json(e: &DegenerationError) -> Value {
    json!({ "passed": false, "error": e.kind(), "detail": e.to_string() })
}

fn check_lines(out: &mut String, checks: &[limhodge::hl::CheckResult], indent: &str) {
    for c in checks {
        let status = if c.holds { "PASS" } else { "FAIL" };
        let _ = writeln!(out, "{indent}{status} {}", c.name);
        for f in &c.failures {
            let _ = writeln!(out, "{indent}    {f}");
        }
    }
}

fn pipeline_text(r: &PipelineReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "instance {} (k = {}, dim X = {})", r.name, r.k, r.dim_x);
    let _ = writeln!(s, "betti {:?}", r.betti);
    let _ = writeln!(s, "samples {:?}", r.samples);
    check_lines(&mut s, &r.checks, "");
    for d in &r.directions {
        let _ = writeln!(s, "I = {:?} ({})", d.directions, d.filtration);
        check_lines(&mut s, &d.checks, "  ");
    }
    let _ = writeln!(s, "note: {}", r.scope);
    let _ = writeln!(s, "{}", if r.passed { "PASSED" } else { "FAILED" });
    s
}

/// `(p, q)` diagram of one page: `q` downwards, `p` across.
fn grid(cells: &[(i64, i64, usize)]) -> String {
    if cells.is_empty() {
        return "  (zero page)\n".into();
    }
    let (pl, ph) = (cells.iter().map(|c| c.0).min().unwrap_or(0), cells.iter().map(|c| c.0).max().unwrap_or(0));
    let (ql, qh) = (cells.iter().map(|c| c.1).min().unwrap_or(0), cells.iter().map(|c| c.1).max().unwrap_or(0));
    let at: BTreeMap<(i64, i64), usize> = cells.iter().map(|&(p, q, d)| ((p, q), d)).collect();
    let mut s = String::new();
    for q in (ql..=qh).rev() {
        let _ = write!(s, "{q:>4} |");
        for p in pl..=ph {
            match at.get(&(p, q)) {
                Some(d) => {
                    let _ = write!(s, "{d:>4}");
                }
                None => s.push_str("   ."),
            }
        }
        s.push('\n');
    }
    let _ = write!(s, "     +{}\n      ", "-".repeat(4 * (ph - pl + 1) as usize));
    for p in pl..=ph {
        let _ = write!(s, "{p:>4}");
    }
    s.push('\n');
    s
}

fn spectral_grid(per_dir: &[(String, Vec<WeightPages>)]) -> String {
    let mut s = String::new();
    for (name, weights) in per_dir {
        for w in weights {
            for (r, page) in &w.pages {
                let _ = writeln!(s, "I = {name}, weight {}, E_{r}  (p across, q down)", w.weight);
                s.push_str(&grid(page));
            }
            let _ = writeln!(s, "degenerates at E_{}\n", w.degenerates_at);
        }
    }
    s
}

fn suites_report(results: Vec<SuiteResult>) -> Report {
    let passed = results.iter().all(|r| r.passed());
    let mut text = String::new();
    for r in &results {
        let _ = writeln!(text, "{} {} ({} cases)", if r.passed() { "PASS" } else { "FAIL" }, r.name, r.cases);
        for f in r.failures.iter().take(20) {
            let _ = writeln!(text, "    {f}");
        }
    }
    Report { passed, json: json!({ "passed": passed, "suites": results }), text, grid: None }
}

fn parse_matrix(v: &Value) -> Result<Matrix<Q>, Failure> {
    let bad = || Failure::Usage("\"n\" must be a square matrix of integers or \"a/b\" strings".into());
    let rows = v.as_array().ok_or_else(bad)?;
    let n = rows.len();
    let mut out = Vec::new();
    for row in rows {
        let row = row.as_array().filter(|r| r.len() == n).ok_or_else(bad)?;
        let parsed: Option<Vec<Q>> = row
            .iter()
            .map(|x| match x {
                Value::Number(num) => num.as_i64().map(Q::from_i64),
                Value::String(s) => parse_q(s),
                _ => None,
            })
            .collect();
        out.push(parsed.ok_or_else(bad)?);
    }
    Ok(Matrix::from_rows(out, n))
}

fn filtration_json(w: &Filtration<Q>) -> Value {
    let (lo, hi) = w.w_window();
    let dims: BTreeMap<String, usize> = (lo..=hi).map(|m| (m.to_string(), w.w(m).dim())).collect();
    json!({ "dim_w": dims })
}

fn monodromy_kind(e: &MonodromyError) -> &'static str {
    match e {
        MonodromyError::NotNilpotent => "NotNilpotent",
        MonodromyError::DoesNotExist(_) => "DoesNotExist",
        MonodromyError::NotCompatible(_) => "NotCompatible",
        MonodromyError::NonCommuting(..) => "NonCommuting",
    }
}

fn monodromy(spec: &str) -> Result<Report, Failure> {
    let raw = if Path::new(spec).exists() {
        std::fs::read_to_string(spec).map_err(|e| Failure::Usage(format!("{spec}: {e}")))?
    } else {
        spec.to_string()
    };
    let v: Value = serde_json::from_str(&raw).map_err(|e| Failure::Usage(format!("monodromy input: {e}")))?;
    let n = parse_matrix(v.get("n").ok_or_else(|| Failure::Usage("monodromy input needs \"n\"".into()))?)?;
    let mut text = String::new();
    let mut out = serde_json::Map::new();
    let e = nilpotency_index(&n).map_err(|e| Failure::Other(e.to_string()))?;
    out.insert("nilpotency_index".into(), json!(e));
    let w = weight_filtration(&n).map_err(|e| Failure::Other(e.to_string()))?;
    let _ = writeln!(text, "nilpotency index {e}");
    let (lo, hi) = w.w_window();
    for m in lo + 1..=hi {
        let _ = writeln!(text, "dim gr_{m} W = {}", w.w(m).dim() - w.w(m - 1).dim());
    }
    out.insert("weight_filtration".into(), filtration_json(&w));
    let basis = lefschetz_basis(&n).map_err(|e| Failure::Other(e.to_string()))?;
    let basis: Vec<Value> =
        basis.iter().map(|(v, l)| json!({ "weight": l, "vector": v.iter().map(format_q).collect::<Vec<_>>() })).collect();
    out.insert("primitive_vectors".into(), Value::Array(basis));
    let mut passed = true;
    if let Some(ws) = v.get("w") {
        let weights: Option<Vec<i64>> = ws.as_array().and_then(|a| a.iter().map(Value::as_i64).collect());
        let weights = weights
            .filter(|x| x.len() == n.rows())
            .ok_or_else(|| Failure::Usage("\"w\" must list one integer weight per basis vector".into()))?;
        let wf = Filtration::from_weights(&weights, Direction::Increasing);
        match relative_weight_filtration(&n, &wf) {
            Ok(m) => {
                let _ = writeln!(text, "relative weight filtration exists");
                out.insert("relative_weight_filtration".into(), filtration_json(&m));
            }
            Err(e) => {
                passed = false;
                let _ = writeln!(text, "relative weight filtration: {e}");
                out.insert("relative_weight_filtration".into(), json!({ "error": monodromy_kind(&e), "detail": e.to_string() }));
            }
        }
    }
    out.insert("passed".into(), json!(passed));
    Ok(Report { passed, json: Value::Object(out), text, grid: None })
}

fn run(cli: &Cli) -> Result<Report, Failure> {
    match &cli.verb {
        Verb::Generate { instance } => {
            let spec = instance.get()?;
            let fam: Family = spec.parse().map_err(|e: DegenerationError| Failure::Usage(e.to_string()))?;
            let inst = generate(&fam).map_err(Failure::Instance)?;
            let j = inst.to_json();
            let text = serde_json::to_string_pretty(&j).expect("serializable");
            Ok(Report { passed: true, json: j, text, grid: None })
        }
        Verb::Validate { instance } => match load_instance(instance.get()?) {
            Ok(inst) => {
                let text = format!("{}: valid (k = {}, dim X = {}, {} strata)\n", inst.name, inst.k(), inst.dim_x, inst.strata.len());
                Ok(Report { passed: true, json: json!({ "passed": true, "name": inst.name }), text, grid: None })
            }
            Err(Failure::Instance(e)) => {
                let text = format!("{}: {e}\n", e.kind());
                Ok(Report { passed: false, json: error_json(&e), text, grid: None })
            }
            Err(e) => Err(e),
        },
        Verb::Build { instance } => {
            let inst = load_instance(instance.get()?)?;
            let page = build_page(&inst).map_err(Failure::Instance)?;
            let report = page.module.report();
            let dims: BTreeMap<String, usize> = page.module.dims.iter().map(|(g, &d)| (g.to_string(), d)).collect();
            let mut text = format!("{}: page module of dimension {}\n", inst.name, page.module.total_dim());
            check_lines(&mut text, &report.axioms, "");
            check_lines(&mut text, &[report.lefschetz.clone(), report.polarization.clone()], "");
            check_lines(&mut text, &report.extra, "");
            let passed = report.passed();
            Ok(Report { passed, json: json!({ "passed": passed, "name": inst.name, "dims": dims, "report": report }), text, grid: None })
        }
        Verb::Pipeline { instance, dirs, samples, seed } => {
            let inst = load_instance(instance.get()?)?;
            let k = inst.k();
            let directions = if dirs.is_empty() {
                None
            } else {
                Some(dirs.iter().map(|d| parse_dirs(d, k)).collect::<Result<Vec<_>, _>>()?)
            };
            if *samples == 0 {
                return Err(Failure::Usage("--samples must be positive".into()));
            }
            let opts = PipelineOptions { directions, samples: *samples, seed: *seed };
            match run_pipeline(&inst, &opts) {
                Ok(r) => {
                    let text = pipeline_text(&r);
                    Ok(Report { passed: r.passed, json: serde_json::to_value(&r).expect("serializable"), text, grid: None })
                }
                Err(e) => Ok(Report { passed: false, json: error_json(&e), text: format!("{}: {e}\n", e.kind()), grid: None }),
            }
        }
        Verb::Spectral { instance, dirs } => {
            let inst = load_instance(instance.get()?)?;
            let k = inst.k();
            let masks: Vec<u32> = if dirs.is_empty() {
                (0..(1u32 << k)).collect()
            } else {
                dirs.iter().map(|d| parse_dirs(d, k)).collect::<Result<_, _>>()?
            };
            let mut per_dir = Vec::new();
            for m in masks {
                per_dir.push((dir_name(m, k), spectral_pages(&inst, m).map_err(Failure::Instance)?));
            }
            let passed = per_dir.iter().all(|(_, ws)| ws.iter().all(|w| w.degenerates_at <= 2));
            let mut text = String::new();
            for (name, ws) in &per_dir {
                for w in ws {
                    let _ = writeln!(text, "I = {name}, weight {}: degenerates at E_{}", w.weight, w.degenerates_at);
                }
            }
            let json = json!({
                "passed": passed,
                "name": inst.name,
                "directions": per_dir.iter().map(|(n, ws)| json!({ "I": n, "weights": ws })).collect::<Vec<_>>(),
            });
            Ok(Report { passed, json, text, grid: Some(spectral_grid(&per_dir)) })
        }
        Verb::Monodromy { instance } => monodromy(instance.get()?),
        Verb::Combinatorics { letters } => Ok(suites_report(vec![
            suite::chibar_sign_suite(*letters),
            suite::chibar_restriction_suite((*letters).min(4)),
            suite::local_complex_suite((*letters).min(4)),
        ])),
        Verb::Selftest { random } => Ok(suites_report(suite::all_suites(*random))),
    }
}

fn emit(cli: &Cli, report: &Report) -> Result<(), String> {
    let json = serde_json::to_string_pretty(&report.json).expect("serializable") + "\n";
    match cli.format {
        Format::Json => print!("{json}"),
        Format::Text => print!("{}", report.text),
        Format::Grid => print!("{}", report.grid.as_deref().unwrap_or(&report.text)),
    }
    if let Some(dir) = &cli.out {
        std::fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
        std::fs::write(dir.join("report.json"), &json).map_err(|e| e.to_string())?;
        std::fs::write(dir.join("report.txt"), &report.text).map_err(|e| e.to_string())?;
        if let Some(g) = &report.grid {
            std::fs::write(dir.join("report.grid.txt"), g).map_err(|e| e.to_string())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = std::env::var("LIMHODGE_THREADS").ok().and_then(|s| s.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    match run(&cli) {
        Ok(report) => {
            if let Err(e) = emit(&cli, &report) {
                eprintln!("error: {e}");
                return ExitCode::from(1);
            }
            if report.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Instance(e)) => {
            let report = Report { passed: false, json: error_json(&e), text: format!("{}: {e}\n", e.kind()), grid: None };
            let _ = emit(&cli, &report);
            ExitCode::from(1)
        }
        Err(Failure::Other(msg)) => {
            let report = Report { passed: false, json: json!({ "passed": false, "error": msg }), text: format!("{msg}\n"), grid: None };
            let _ = emit(&cli, &report);
            ExitCode::from(1)
        }
    }
}
