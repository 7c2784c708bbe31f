//! The per-direction pipeline: spectral sequences of `(V, d)` for the
//! filtrations `L(I)`, the induced monodromy on `E_2`, iterated cohomology
//! descent and the limit module `H(V, d)`.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::combinatorics::l_name;
use crate::field::{Field, Q};
use crate::filtration::{Direction, FilteredComplex, Filtration};
use crate::hl::{Axis, CheckResult, GradedMap, Grade, HLModule, ReportOptions};
use crate::linalg::Matrix;
use crate::monodromy::{c_independence_check, linear_combination};
use crate::spectral::{
    check_degeneracy, compute_page_range, compute_pages, induced_page_map, recurrent_filtration,
    SpectralSequence,
};

use super::page::{build_page, PageModule};
use super::{DegenerationError, DegenerationInstance};

/// What the pipeline reports but does not represent.
pub const SCOPE_NOTE: &str = "pages and gradings only: extension data of the limit mixed Hodge structure beyond the E_2 pages is not represented";

#[derive(Debug, Clone)]
pub struct PipelineOptions {
    /// Direction sets as masks over parts; `None` runs every subset.
    pub directions: Option<Vec<u32>>,
    /// Number of coefficient samples `c`; the first is all ones.
    pub samples: usize,
    pub seed: u64,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions { directions: None, samples: 3, seed: 0 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DirectionReport {
    /// Parts in `I`, 1-based.
    pub directions: Vec<usize>,
    pub filtration: String,
    /// `dim E_2^{p,n}` summed over weights, keyed `"p,n"`.
    pub e2: BTreeMap<String, usize>,
    pub checks: Vec<CheckResult>,
}

impl DirectionReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PipelineReport {
    pub name: String,
    pub k: usize,
    pub dim_x: usize,
    pub samples: Vec<Vec<String>>,
    /// `dim V^{j0, j}` keyed by the grade.
    pub page_dims: BTreeMap<String, usize>,
    /// `dim H^n` of the nearby fibre, `n = 0..=2 dim X`.
    pub betti: Vec<usize>,
    pub checks: Vec<CheckResult>,
    pub directions: Vec<DirectionReport>,
    pub scope: String,
    pub passed: bool,
}

impl PipelineReport {
    pub fn failures(&self) -> Vec<String> {
        let mut out: Vec<String> =
            self.checks.iter().filter(|c| !c.holds).map(|c| format!("{}: {}", c.name, c.failures.join(", "))).collect();
        for d in &self.directions {
            for c in d.checks.iter().filter(|c| !c.holds) {
                out.push(format!("I={:?} {}: {}", d.directions, c.name, c.failures.join(", ")));
            }
        }
        out
    }

    /// `Err(TheoremCheckFailure)` unless every check holds.
    pub fn into_result(self) -> Result<Self, DegenerationError> {
        if self.passed {
            Ok(self)
        } else {
            Err(DegenerationError::TheoremCheckFailure(self.failures()))
        }
    }
}

fn check(name: &str, failures: Vec<String>) -> CheckResult {
    CheckResult { name: name.into(), holds: failures.is_empty(), failures }
}

/// The summand of `(V, d)` of weight `w = j0 - |j|`, one degree per `j0`.
struct WeightPiece {
    /// Grades and offsets per degree.
    layout: BTreeMap<i64, Vec<(Grade, usize)>>,
    complex: FilteredComplex<Q>,
    betti: Vec<usize>,
}

impl WeightPiece {
    fn dim(&self, n: i64) -> usize {
        self.complex.dim(n)
    }
    fn weights(&self, n: i64, f: impl Fn(&Grade) -> i64) -> Vec<i64> {
        let mut out = Vec::new();
        for (g, _) in self.layout.get(&n).map(|v| v.as_slice()).unwrap_or(&[]) {
            out.extend(std::iter::repeat_n(f(g), self.complex_block_dim(g)));
        }
        out
    }
    fn complex_block_dim(&self, g: &Grade) -> usize {
        let row = &self.layout[&g.j0];
        let i = row.iter().position(|(h, _)| h == g).expect("grade in layout");
        let end = row.get(i + 1).map_or(self.dim(g.j0), |x| x.1);
        end - row[i].1
    }
    fn offset(&self, g: &Grade) -> Option<usize> {
        self.layout.get(&g.j0)?.iter().find(|(h, _)| h == g).map(|x| x.1)
    }
}

/// Per-degree matrices of `Σ ops` from `src` to `tgt`.
fn op_matrices(module: &HLModule<Q>, ops: &[&GradedMap<Q>], src: &WeightPiece, tgt: &WeightPiece, deg: i64) -> BTreeMap<i64, Matrix<Q>> {
    let mut out = BTreeMap::new();
    for n in src.complex.degrees() {
        let mut m = Matrix::zeros(tgt.dim(n + deg), src.dim(n));
        for (g, off) in src.layout.get(&n).map(|v| v.as_slice()).unwrap_or(&[]) {
            for op in ops {
                let t = g.add(&op.shift);
                if let Some(toff) = tgt.offset(&t) {
                    m.add_block(toff, *off, &module.block(op, g));
                }
            }
        }
        out.insert(n, m);
    }
    out
}

fn weight_pieces(module: &HLModule<Q>) -> Result<BTreeMap<i64, WeightPiece>, DegenerationError> {
    let mut by_w: BTreeMap<i64, BTreeMap<i64, Vec<(Grade, usize)>>> = BTreeMap::new();
    for (g, &d) in &module.dims {
        let w = g.j0 - g.total_j();
        by_w.entry(w).or_default().entry(g.j0).or_default().push((g.clone(), d));
    }
    let mut out = BTreeMap::new();
    for (w, rows) in by_w {
        let lo = *rows.keys().next().expect("nonempty");
        let hi = *rows.keys().last().expect("nonempty");
        let mut layout = BTreeMap::new();
        let mut dims = Vec::new();
        for n in lo..=hi {
            let mut off = 0;
            let mut row = Vec::new();
            for (g, d) in rows.get(&n).map(|v| v.as_slice()).unwrap_or(&[]) {
                row.push((g.clone(), off));
                off += d;
            }
            dims.push(off);
            layout.insert(n, row);
        }
        // Placeholder complex to compute offsets, then the real differential.
        let zero_d = (lo..hi).map(|i| Matrix::zeros(dims[(i + 1 - lo) as usize], dims[(i - lo) as usize])).collect();
        let shape = WeightPiece { layout, complex: FilteredComplex::new(lo, dims.clone(), zero_d).expect("zero complex"), betti: Vec::new() };
        let ops: Vec<&GradedMap<Q>> = module.d.iter().collect();
        let dm = op_matrices(module, &ops, &shape, &shape, 1);
        let d: Vec<Matrix<Q>> = (lo..hi).map(|n| dm[&n].clone()).collect();
        let complex = FilteredComplex::new(lo, dims, d).map_err(|e| DegenerationError::AxiomFailure(vec![format!("weight {w}: {e}")]))?;
        let betti = complex.betti();
        out.insert(w, WeightPiece { layout: shape.layout, complex, betti });
    }
    Ok(out)
}

fn samples(k: usize, count: usize, seed: u64) -> Vec<Vec<Q>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![vec![Q::from_i64(1); k]];
    while out.len() < count.max(1) {
        out.push((0..k).map(|_| Q::from_i64(rng.gen_range(1..=9))).collect());
    }
    out
}

fn format_sample(c: &[Q]) -> Vec<String> {
    c.iter().map(crate::field::format_q).collect()
}

/// `(w, p, n)` cells of `E_2` in a fixed order with offsets, per degree.
type CellLayout = BTreeMap<i64, Vec<((i64, i64), usize, usize)>>;

fn e2_layout(sss: &BTreeMap<i64, SpectralSequence<Q>>) -> (CellLayout, BTreeMap<i64, usize>) {
    let mut layout: CellLayout = BTreeMap::new();
    let mut totals: BTreeMap<i64, usize> = BTreeMap::new();
    for (&w, ss) in sss {
        for (&(p, n), d) in &ss.page(2).dims() {
            let off = totals.entry(n).or_default();
            layout.entry(n).or_default().push(((w, p), *off, *d));
            *off += d;
        }
    }
    (layout, totals)
}

/// Runs every check for one direction set.
fn run_direction(
    inst: &DegenerationInstance,
    page: &PageModule,
    pieces: &BTreeMap<i64, WeightPiece>,
    dirs: u32,
    cs: &[Vec<Q>],
) -> Result<DirectionReport, DegenerationError> {
    let module = &page.module;
    let k = inst.k();
    let i_set: Vec<usize> = (0..k).filter(|i| dirs & (1 << i) != 0).collect();
    let j_set: Vec<usize> = (0..k).filter(|i| dirs & (1 << i) == 0).collect();
    let fname = l_name(dirs);
    let jname = l_name(!dirs & ((1 << k) - 1));
    let gerr = |e: String| DegenerationError::AxiomFailure(vec![e]);
    let mut checks = Vec::new();

    let mut sss = BTreeMap::new();
    let mut complexes = BTreeMap::new();
    for (&w, piece) in pieces {
        let mut c = piece.complex.clone();
        let mk = |f: &dyn Fn(&Grade) -> i64| -> Vec<Filtration<Q>> {
            piece.complex.degrees().map(|n| Filtration::from_weights(&piece.weights(n, f), Direction::Decreasing)).collect()
        };
        let sum_i = |g: &Grade| i_set.iter().map(|&i| g.j[i]).sum::<i64>();
        let sum_j = |g: &Grade| j_set.iter().map(|&i| g.j[i]).sum::<i64>();
        c.add_filtration(&fname, mk(&sum_i)).map_err(|e| gerr(e.to_string()))?;
        c.add_filtration(&jname, mk(&sum_j)).map_err(|e| gerr(e.to_string()))?;
        let ss = compute_page_range(&c, &fname, 2, Some(2)).map_err(|e| gerr(e.to_string()))?;
        sss.insert(w, ss);
        complexes.insert(w, c);
    }
    // E_2 = E_∞ exactly when the E_2 terms add up to the cohomology.
    let mut degen = Vec::new();
    for (&w, ss) in &sss {
        let c = &complexes[&w];
        let betti = &pieces[&w].betti;
        let short = c.degrees().any(|n| ss.page(2).total_dim(n) != betti[(n - c.lo()) as usize]);
        if short {
            let full = compute_pages(c, &fname).map_err(|e| gerr(e.to_string()))?;
            match check_degeneracy(&full, 2).witness {
                Some((r, p, q)) => degen.push(format!("weight {w}: d_{r} nonzero at (p, q) = ({p}, {q})")),
                None => degen.push(format!("weight {w}: E_2 larger than cohomology")),
            }
        }
    }
    checks.push(check("e2-degeneracy", degen));
    let mut e2: BTreeMap<String, usize> = BTreeMap::new();
    for ss in sss.values() {
        for ((p, n), d) in ss.page(2).dims() {
            *e2.entry(format!("{p},{n}")).or_default() += d;
        }
    }

    // Monodromy on E_2: E_2(l_i) for i ∈ I, from weight w to w - 2.
    let (layout, totals) = e2_layout(&sss);
    let mut e2_l: Vec<BTreeMap<i64, Matrix<Q>>> = Vec::new();
    for &i in &i_set {
        let mut per_n: BTreeMap<i64, Matrix<Q>> = totals.iter().map(|(&n, &d)| (n, Matrix::zeros(d, d))).collect();
        for (&w, ss) in &sss {
            let Some(tgt) = sss.get(&(w - 2)) else { continue };
            let maps = op_matrices(module, &[&module.l[i]], &pieces[&w], &pieces[&(w - 2)], 0);
            let pm = induced_page_map(ss, tgt, 2, &maps, 0, 2).map_err(|e| gerr(e.to_string()))?;
            for ((p, n), m) in pm {
                if m.rows() == 0 || m.cols() == 0 {
                    continue;
                }
                let row = &layout[&n];
                let src = row.iter().find(|x| x.0 == (w, p)).expect("source cell");
                let dst = row.iter().find(|x| x.0 == (w - 2, p + 2)).expect("target cell");
                per_n.get_mut(&n).expect("degree").set_block(dst.1, src.1, &m);
            }
        }
        e2_l.push(per_n);
    }
    let mut lef = Vec::new();
    let mut indep = Vec::new();
    let mut grading = Vec::new();
    if !i_set.is_empty() {
        let ci: Vec<Vec<Q>> = cs.iter().map(|c| i_set.iter().map(|&i| c[i].clone()).collect()).collect();
        for (&n, &dim) in &totals {
            let ns: Vec<Matrix<Q>> = e2_l.iter().map(|m| m[&n].clone()).collect();
            let row = &layout[&n];
            let idx = |pred: &dyn Fn(i64) -> bool| -> Vec<usize> {
                row.iter().filter(|x| pred(x.0 .1)).flat_map(|x| x.1..x.1 + x.2).collect()
            };
            for (s, c) in ci.iter().enumerate() {
                let nm = linear_combination(&ns, c);
                let pmax = row.iter().map(|x| x.0 .1.abs()).max().unwrap_or(0);
                for l in 1..=pmax {
                    let src = idx(&|p| p == -l);
                    let tgt = idx(&|p| p == l);
                    let b = nm.pow(l as usize).select_rows(&tgt).select_columns(&src);
                    if src.len() != tgt.len() || b.rank() != src.len() {
                        lef.push(format!("sample {s}: N^{l} on E_2^{{-{l}}} in degree {n}"));
                    }
                }
            }
            let weights: Vec<i64> = {
                let mut v = vec![0; dim];
                for x in row {
                    for i in x.1..x.1 + x.2 {
                        v[i] = -x.0 .1;
                    }
                }
                v
            };
            let expected = Filtration::from_weights(&weights, Direction::Increasing);
            match c_independence_check(&ns, &ci) {
                Ok(r) => {
                    if let Some(s) = r.first_mismatch {
                        indep.push(format!("degree {n}: sample {s} differs"));
                    }
                    for (s, f) in r.filtrations.iter().enumerate() {
                        if *f != expected {
                            grading.push(format!("degree {n}, sample {s}"));
                        }
                    }
                }
                Err(e) => indep.push(format!("degree {n}: {e}")),
            }
        }
    }
    checks.push(check("e2-monodromy-lefschetz", lef));
    checks.push(check("monodromy-cone-independence", indep));
    checks.push(check("monodromy-weight-is-grading", grading));

    // Iterated descent: H(H(V, d_J), d_I).
    let mut descent = Vec::new();
    let mut matches = Vec::new();
    let opts = ReportOptions { hodge: true, weil_element: false };
    let cj: Vec<Vec<Q>> = cs.iter().map(|c| j_set.iter().map(|&i| c[i].clone()).collect()).collect();
    let h1s = match module.cohomology_descent_samples(&j_set, &cj, opts) {
        Ok(h) => h,
        Err(e) => {
            descent.push(format!("d_J: {e}"));
            Vec::new()
        }
    };
    let b2: Vec<usize> = (1..=i_set.len()).collect();
    for (s, mut h1) in h1s.into_iter().enumerate() {
        // The Hodge layer does not depend on c; it is carried along once.
        if s > 0 {
            h1.hodge = None;
        }
        let ci: Vec<Q> = i_set.iter().map(|&i| cs[s][i].clone()).collect();
        let h2 = match h1.cohomology_descent_samples(&b2, &[ci], opts) {
            Ok(mut h) => h.pop().expect("one sample"),
            Err(e) => {
                descent.push(format!("sample {s}, d_I: {e}"));
                continue;
            }
        };
        if s > 0 {
            continue;
        }
        // E_2^{p,n} in weight w equals H2 at (n; p, n - w - p).
        for (&w, ss) in &sss {
            for (&(p, n), cell) in ss.page(2).cells() {
                let g = Grade::new(n, vec![p, n - w - p]);
                if cell.sq.dim() != h2.dim(&g) {
                    matches.push(format!("weight {w}: E_2 at ({p}, {n}) has dim {} but descent gives {}", cell.sq.dim(), h2.dim(&g)));
                    continue;
                }
                if cell.sq.dim() == 0 {
                    continue;
                }
                match recurrent_filtration(&complexes[&w], ss, 2, p, n, &jname) {
                    Ok(f) if f.graded_dim(n - w - p) == cell.sq.dim() => {}
                    Ok(_) => matches.push(format!("weight {w}: recurrent {jname} not pure at ({p}, {n})")),
                    Err(e) => matches.push(e.to_string()),
                }
            }
        }
    }
    checks.push(check("iterated-descent", descent));
    checks.push(check("e2-matches-descent", matches));
    Ok(DirectionReport { directions: i_set.iter().map(|i| i + 1).collect(), filtration: fname, e2, checks })
}

/// Lefschetz of `l0` on `H(V, d)` block by block and summed over `j`.
fn l0_checks(h: &HLModule<Q>) -> (Vec<String>, Vec<String>) {
    let mut per = Vec::new();
    let mut total = Vec::new();
    let j0max = h.dims.keys().map(|g| g.j0.abs()).max().unwrap_or(0);
    for a in 1..=j0max {
        let mut src_dim = 0;
        let mut tgt_dim = 0;
        let mut rank = 0;
        for (g, &d) in h.dims.iter().filter(|(g, _)| g.j0 == -a) {
            let t = g.with(Axis::Zero, a);
            let m = h.power_block(&h.l0, g, a as usize);
            let r = m.rank();
            if r != d || h.dim(&t) != d {
                per.push(format!("l0^{a} from {g}"));
            }
            src_dim += d;
            rank += r;
        }
        for (_, &d) in h.dims.iter().filter(|(g, _)| g.j0 == a) {
            tgt_dim += d;
        }
        if src_dim != tgt_dim || rank != src_dim {
            total.push(format!("l0^{a} on j0 = -{a}"));
        }
    }
    for g in h.dims.keys() {
        if !h.dims.contains_key(&g.with(Axis::Zero, -g.j0)) {
            per.push(format!("no partner for {g}"));
        }
    }
    (per, total)
}

/// Runs the pipeline. Failures are recorded in the report; see
/// [`PipelineReport::into_result`].
pub fn run_pipeline(inst: &DegenerationInstance, opts: &PipelineOptions) -> Result<PipelineReport, DegenerationError> {
    let page = build_page(inst)?;
    let module = &page.module;
    let k = inst.k();
    let cs = samples(k, opts.samples, opts.seed);
    let pieces = weight_pieces(module)?;
    let dirs: Vec<u32> = match &opts.directions {
        Some(v) => v.clone(),
        None => (0..(1u32 << k)).collect(),
    };
    if let Some(bad) = dirs.iter().find(|&&d| d >> k != 0) {
        return Err(DegenerationError::SchemaError(format!("direction set {bad:b} names a part beyond k = {k}")));
    }
    let directions: Vec<DirectionReport> =
        dirs.par_iter().map(|&d| run_direction(inst, &page, &pieces, d, &cs)).collect::<Result<Vec<_>, _>>()?;

    let mut checks = vec![check("page-module-axioms", Vec::new())];
    let all: Vec<usize> = (0..k).collect();
    let mut betti = vec![0; 2 * inst.dim_x + 1];
    let mut limit = Vec::new();
    let mut per = Vec::new();
    let mut total = Vec::new();
    let opts = ReportOptions { hodge: true, weil_element: false };
    match module.cohomology_descent_samples(&all, &cs, opts) {
        Ok(hs) => {
            for (g, &d) in &hs[0].dims {
                let n = g.j0 + inst.dim_x as i64;
                if n < 0 || n as usize >= betti.len() {
                    limit.push(format!("class in degree {n}"));
                } else {
                    betti[n as usize] += d;
                }
            }
            for (s, h) in hs.iter().enumerate() {
                let (a, b) = l0_checks(h);
                per.extend(a.into_iter().map(|x| format!("sample {s}: {x}")));
                total.extend(b.into_iter().map(|x| format!("sample {s}: {x}")));
            }
        }
        Err(e) => limit.push(e.to_string()),
    }
    checks.push(check("limit-module-descent", limit));
    checks.push(check("l0-hard-lefschetz", per));
    checks.push(check("l0-hard-lefschetz-total", total));
    let passed = checks.iter().all(|c| c.holds) && directions.iter().all(|d| d.passed());
    Ok(PipelineReport {
        name: inst.name.clone(),
        k,
        dim_x: inst.dim_x,
        samples: cs.iter().map(|c| format_sample(c)).collect(),
        page_dims: module.dims.iter().map(|(g, &d)| (g.to_string(), d)).collect(),
        betti,
        checks,
        directions,
        scope: SCOPE_NOTE.to_string(),
        passed,
    })
}

/// Page dimensions of one weight summand.
#[derive(Debug, Clone, Serialize)]
pub struct WeightPages {
    pub weight: i64,
    /// `(r, cells)` with cells the nonzero `(p, q, dim E_r^{p,q})`, from `r = 0`.
    pub pages: Vec<(usize, Vec<(i64, i64, usize)>)>,
    /// First `r` with all later differentials zero.
    pub degenerates_at: usize,
}

/// Every page of `(V, d; L(I))`, weight by weight.
pub fn spectral_pages(inst: &DegenerationInstance, dirs: u32) -> Result<Vec<WeightPages>, DegenerationError> {
    let k = inst.k();
    if dirs >> k != 0 {
        return Err(DegenerationError::SchemaError(format!("direction set {dirs:b} names a part beyond k = {k}")));
    }
    let page = build_page(inst)?;
    let pieces = weight_pieces(&page.module)?;
    let i_set: Vec<usize> = (0..k).filter(|i| dirs & (1 << i) != 0).collect();
    let fname = l_name(dirs);
    let gerr = |e: String| DegenerationError::AxiomFailure(vec![e]);
    let mut out = Vec::new();
    for (&w, piece) in &pieces {
        let levels = piece
            .complex
            .degrees()
            .map(|n| Filtration::from_weights(&piece.weights(n, |g| i_set.iter().map(|&i| g.j[i]).sum()), Direction::Decreasing))
            .collect();
        let c = piece.complex.clone().with_filtration(&fname, levels).map_err(|e| gerr(e.to_string()))?;
        let ss = compute_pages(&c, &fname).map_err(|e| gerr(e.to_string()))?;
        let degenerates_at = (1..).find(|&r| check_degeneracy(&ss, r).degenerates).expect("finite sequence");
        let pages = ss.pages.iter().map(|pg| (pg.r, pg.dims().into_iter().map(|((p, n), d)| (p, n - p, d)).collect())).collect();
        out.push(WeightPages { weight: w, pages, degenerates_at });
    }
    Ok(out)
}
