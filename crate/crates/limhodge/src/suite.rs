//! Randomized oracle suites: random inputs with answers known by
//! construction, compared against the library's algorithms.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::combinatorics::{
    a_exponents, chibar_ext, graded_residue_isomorphism, restrict, Exterior, LocalComplexA, PartitionedAlphabet,
};
use crate::degeneration::{build_page, generate, run_pipeline, Family, PipelineOptions};
use crate::field::{Field, Q};
use crate::filtration::{Direction, FilteredComplex, Filtration};
use crate::linalg::Matrix;
use crate::monodromy::{relative_weight_filtration, weight_filtration, MonodromyError};
use crate::spectral::{compute_pages, d1_split, gysin_connecting, pages_are_cohomology};

#[derive(Debug, Clone, Serialize)]
pub struct SuiteResult {
    pub name: String,
    pub cases: usize,
    pub failures: Vec<String>,
}

impl SuiteResult {
    fn new(name: &str) -> Self {
        SuiteResult { name: name.into(), cases: 0, failures: Vec::new() }
    }
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

fn q(n: i64) -> Q {
    Q::from_i64(n)
}

/// Random invertible integer matrix.
fn random_invertible(rng: &mut ChaCha8Rng, n: usize) -> Matrix<Q> {
    loop {
        let data = (0..n * n).map(|_| q(rng.gen_range(-2..=2))).collect();
        let m = Matrix::from_vec(n, n, data);
        if m.is_invertible() {
            return m;
        }
    }
}

/// Random nilpotent `N = P J P^{-1}` of Jordan type `sizes`, with its weight
/// filtration read off the Jordan chains: `N^a v` has weight `s - 1 - 2a`.
pub fn random_nilpotent(rng: &mut ChaCha8Rng, dim: usize) -> (Vec<usize>, Matrix<Q>, Filtration<Q>) {
    let mut sizes = Vec::new();
    let mut left = dim;
    while left > 0 {
        let s = rng.gen_range(1..=left);
        sizes.push(s);
        left -= s;
    }
    let mut j = Matrix::zeros(dim, dim);
    let mut weights = Vec::new();
    let mut off = 0;
    for &s in &sizes {
        // Basis v, N v, ..., N^{s-1} v.
        for a in 0..s {
            if a + 1 < s {
                j.set(off + a + 1, off + a, q(1));
            }
            weights.push(s as i64 - 1 - 2 * a as i64);
        }
        off += s;
    }
    let p = random_invertible(rng, dim);
    let n = &(&p * &j) * &p.inverse().expect("invertible");
    let w = Filtration::from_weights(&weights, Direction::Increasing).image(&p);
    (sizes, n, w)
}

/// `W(N)` against the Jordan chain filtration on `count` random nilpotents.
pub fn monodromy_suite(count: usize, max_dim: usize, seed: u64) -> SuiteResult {
    let mut out = SuiteResult::new("weight-filtration-vs-jordan-chains");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for case in 0..count {
        let dim = rng.gen_range(1..=max_dim);
        let (sizes, n, expected) = random_nilpotent(&mut rng, dim);
        out.cases += 1;
        match weight_filtration(&n) {
            Ok(w) if w == expected => {}
            Ok(_) => out.failures.push(format!("case {case}: Jordan type {sizes:?} gives a different filtration")),
            Err(e) => out.failures.push(format!("case {case}: {e}")),
        }
    }
    out
}

/// `N = [[0, 1], [0, 0]]` relative to `W` with `gr_0` and `gr_1` of rank one
/// has no relative weight filtration.
pub fn relative_nonexistence_suite() -> SuiteResult {
    let mut out = SuiteResult::new("relative-weight-filtration-nonexistence");
    out.cases = 1;
    let n = Matrix::<Q>::from_i64(&[&[0, 1], &[0, 0]]);
    let w = Filtration::<Q>::from_weights(&[0, 1], Direction::Increasing);
    match relative_weight_filtration(&n, &w) {
        Err(MonodromyError::DoesNotExist(_)) => {}
        other => out.failures.push(format!("expected DoesNotExist, got {other:?}")),
    }
    out
}

/// A random bifiltered complex: a direct sum of single classes and pairs
/// `x -> y`, each vector carrying weights for `F` and `G` with `d`
/// preserving both, moved by a random change of basis in every degree.
/// Returns the complex with filtrations `"F"` and `"G"` and the expected
/// `dim gr_F^p H^n` keyed by `(p, n)`.
pub fn random_filtered_complex(
    rng: &mut ChaCha8Rng,
    max_dim: usize,
    steps: i64,
) -> (FilteredComplex<Q>, BTreeMap<(i64, i64), usize>) {
    let degrees = rng.gen_range(1..=3usize);
    let mut vecs: Vec<Vec<(i64, i64)>> = vec![Vec::new(); degrees];
    let mut pairs: Vec<(usize, usize, usize)> = Vec::new();
    let mut graded: BTreeMap<(i64, i64), usize> = BTreeMap::new();
    let total = rng.gen_range(1..=max_dim);
    let mut used = 0;
    while used < total {
        let n = rng.gen_range(0..degrees);
        let wf = rng.gen_range(0..steps);
        let wg = rng.gen_range(0..steps);
        if used + 2 <= total && n + 1 < degrees && rng.gen_bool(0.6) {
            let yf = rng.gen_range(wf..steps);
            let yg = rng.gen_range(wg..steps);
            vecs[n].push((wf, wg));
            vecs[n + 1].push((yf, yg));
            pairs.push((n, vecs[n].len() - 1, vecs[n + 1].len() - 1));
            used += 2;
        } else {
            vecs[n].push((wf, wg));
            *graded.entry((wf, n as i64)).or_default() += 1;
            used += 1;
        }
    }
    let dims: Vec<usize> = vecs.iter().map(|v| v.len()).collect();
    let gs: Vec<Matrix<Q>> = dims.iter().map(|&d| random_invertible(rng, d)).collect();
    let mut d = Vec::new();
    for n in 0..degrees.saturating_sub(1) {
        let mut m = Matrix::zeros(dims[n + 1], dims[n]);
        for &(deg, x, y) in &pairs {
            if deg == n {
                m.set(y, x, q(rng.gen_range(1..=3)));
            }
        }
        d.push(&(&gs[n + 1] * &m) * &gs[n].inverse().expect("invertible"));
    }
    let filt = |pick: fn(&(i64, i64)) -> i64| -> Vec<Filtration<Q>> {
        vecs.iter()
            .zip(&gs)
            .map(|(v, g)| Filtration::from_weights(&v.iter().map(pick).collect::<Vec<_>>(), Direction::Decreasing).image(g))
            .collect()
    };
    let k = FilteredComplex::new(0, dims, d)
        .and_then(|k| k.with_filtration("F", filt(|x| x.0)))
        .and_then(|k| k.with_filtration("G", filt(|x| x.1)))
        .expect("filtered complex by construction");
    (k, graded)
}

/// `dim (Z ∩ F^p + B) / (Z ∩ F^{p+1} + B)` straight from subspaces.
fn brute_graded_cohomology(k: &FilteredComplex<Q>, name: &str) -> BTreeMap<(i64, i64), usize> {
    let mut out = BTreeMap::new();
    for n in k.degrees() {
        let f = k.filtration(name, n).expect("registered");
        let (lo, hi) = f.window();
        let z = k.cocycles(n);
        let b = k.coboundaries(n);
        let level = |p: i64| z.intersection(&f.level(p)).sum(&b).dim();
        for p in lo..=hi {
            let d = level(p) - level(p + 1);
            if d > 0 {
                out.insert((p, n), d);
            }
        }
    }
    out
}

/// `E_∞` against `gr H` on random filtered complexes, by construction and
/// by brute force.
pub fn spectral_suite(count: usize, max_dim: usize, steps: i64, seed: u64) -> SuiteResult {
    let mut out = SuiteResult::new("e-infinity-vs-graded-cohomology");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for case in 0..count {
        let (k, expected) = random_filtered_complex(&mut rng, max_dim, steps);
        out.cases += 1;
        let ss = match compute_pages(&k, "F") {
            Ok(ss) => ss,
            Err(e) => {
                out.failures.push(format!("case {case}: {e}"));
                continue;
            }
        };
        let einf: BTreeMap<(i64, i64), usize> = ss.e_infinity().dims();
        if einf != expected {
            out.failures.push(format!("case {case}: E_inf {einf:?}, expected {expected:?}"));
        }
        if brute_graded_cohomology(&k, "F") != expected {
            out.failures.push(format!("case {case}: brute-force gr H disagrees with the construction"));
        }
        if !pages_are_cohomology(&ss) {
            out.failures.push(format!("case {case}: some page is not the cohomology of the previous one"));
        }
    }
    out
}

/// `d_1 = d_1' + d_1''` for `H = F * G` and anticommutation of the
/// connecting morphisms with `d_1`, on random bifiltered complexes.
pub fn d1_split_suite(count: usize, max_dim: usize, steps: i64, seed: u64) -> SuiteResult {
    let mut out = SuiteResult::new("d1-splitting-and-connecting-anticommutation");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for case in 0..count {
        let (mut k, _) = random_filtered_complex(&mut rng, max_dim, steps);
        out.cases += 1;
        let conv = k.convolve("F", "G").expect("both registered");
        if let Err(e) = k.add_filtration("H", conv) {
            out.failures.push(format!("case {case}: convolution not preserved by d: {e}"));
            continue;
        }
        match d1_split(&k, "H", "F", "G") {
            Ok(r) if r.holds && r.identification_is_iso => {}
            Ok(r) => out.failures.push(format!("case {case}: split {} iso {}", r.holds, r.identification_is_iso)),
            Err(e) => out.failures.push(format!("case {case}: {e}")),
        }
        for b in 0..steps {
            let res = gysin_connecting(&k, "G", "F", b).and_then(|g| {
                let src = compute_pages(&g.source.complex, "F")?;
                let tgt = compute_pages(&g.target.complex, "F")?;
                g.anticommutes(&src, &tgt, 1)
            });
            match res {
                Ok(true) => {}
                Ok(false) => out.failures.push(format!("case {case}: connecting map at {b} does not anticommute")),
                Err(e) => out.failures.push(format!("case {case}, level {b}: {e}")),
            }
        }
    }
    out
}

/// Partitions of `n` letters into `k` nonempty consecutive parts.
fn compositions(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return if n == 0 { vec![vec![]] } else { vec![] };
    }
    (1..=n)
        .flat_map(|first| compositions(n - first, k - 1).into_iter().map(move |rest| [vec![first], rest].concat()))
        .collect()
}

/// Every assignment of `n` letters to `k` nonempty parts.
fn assignments(n: usize, k: usize) -> Vec<Vec<u32>> {
    let total = k.pow(n as u32);
    (0..total)
        .filter_map(|mut code| {
            let mut parts = vec![0u32; k];
            for l in 0..n {
                parts[code % k] |= 1 << l;
                code /= k;
            }
            parts.iter().all(|&p| p != 0).then_some(parts)
        })
        .collect()
}

fn basis(s: u32) -> Exterior<Q> {
    Exterior::from([(s, q(1))])
}

fn negate(v: &Exterior<Q>) -> Exterior<Q> {
    v.iter().map(|(&s, c)| (s, -c.clone())).collect()
}

/// Sign law of the `χ̄` product on basis monomials, exhaustively.
pub fn chibar_sign_suite(max_letters: usize) -> SuiteResult {
    let mut out = SuiteResult::new("chibar-graded-commutativity");
    for n in 1..=max_letters {
        for k in 1..=3.min(n) {
            for parts in assignments(n, k) {
                for a in 0..(1u32 << n) {
                    for b in 0..(1u32 << n) {
                        out.cases += 1;
                        let (p, s) = (a.count_ones() as i64, b.count_ones() as i64);
                        let vw = chibar_ext(&parts, &basis(a), &basis(b));
                        let wv = chibar_ext(&parts, &basis(b), &basis(a));
                        let expected = if ((p - k as i64) * (s - k as i64)).rem_euclid(2) == 0 { vw } else { negate(&vw) };
                        if wv != expected {
                            out.failures.push(format!("parts {parts:?}: {a:b} and {b:b}"));
                        }
                    }
                }
            }
        }
    }
    out
}

/// `χ̄` commutes with restriction to a sub-alphabet.
pub fn chibar_restriction_suite(max_letters: usize) -> SuiteResult {
    let mut out = SuiteResult::new("chibar-restriction");
    for n in 1..=max_letters {
        for k in 1..=3.min(n) {
            for parts in assignments(n, k) {
                for gamma in 0..(1u32 << n) {
                    let sub: Vec<u32> = parts.iter().map(|p| p & gamma).collect();
                    for a in 0..(1u32 << n) {
                        for b in 0..(1u32 << n) {
                            out.cases += 1;
                            let top = restrict(&chibar_ext(&parts, &basis(a), &basis(b)), gamma);
                            let bottom = chibar_ext(&sub, &restrict(&basis(a), gamma), &restrict(&basis(b), gamma));
                            if top != bottom {
                                out.failures.push(format!("parts {parts:?}, restriction {gamma:b}: {a:b} and {b:b}"));
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

/// The local complex checks: commuting operators, weight shifts, the
/// convolution `L = L(I) * L(J)` for every `I`, and the graded residue
/// isomorphisms.
pub fn local_complex_suite(max_letters: usize) -> SuiteResult {
    let mut out = SuiteResult::new("local-complex-convolution-and-residues");
    for n in 1..=max_letters {
        for k in 1..=n.min(3) {
            for sizes in compositions(n, k) {
                let alpha = PartitionedAlphabet::with_sizes(&sizes).expect("nonempty parts");
                let a = match LocalComplexA::<Q>::build(&alpha) {
                    Ok(a) => a,
                    Err(e) => {
                        out.failures.push(format!("{sizes:?}: {e}"));
                        continue;
                    }
                };
                out.cases += 1;
                if !a.check_commutation() {
                    out.failures.push(format!("{sizes:?}: operators do not commute"));
                }
                if !a.check_nu_shifts() {
                    out.failures.push(format!("{sizes:?}: weight shifts"));
                }
                for dirs in 0..(1u32 << k) {
                    out.cases += 1;
                    if !a.verify_convolution_identity(dirs) {
                        out.failures.push(format!("{sizes:?}, I = {dirs:b}: convolution"));
                    }
                    for qv in a_exponents(&alpha) {
                        for m in 0..=n {
                            out.cases += 1;
                            if !graded_residue_isomorphism::<Q>(&alpha, &qv, dirs, m) {
                                out.failures.push(format!("{sizes:?}, q = {qv:?}, I = {dirs:b}, m = {m}: residue"));
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

/// The builtin named families.
pub fn named_families() -> Vec<Family> {
    ["nodal-conic", "chain:3", "cycle:2", "cycle:3", "smooth-curve:1", "smooth-curve:2", "product:nodal-conic+nodal-conic"]
        .iter()
        .map(|s| s.parse().expect("valid family"))
        .collect()
}

/// The full pipeline on each family; every check must hold.
pub fn family_suite(families: &[Family], opts: &PipelineOptions) -> SuiteResult {
    let mut out = SuiteResult::new("pipeline-on-families");
    for fam in families {
        out.cases += 1;
        let res = generate(fam).and_then(|inst| run_pipeline(&inst, opts));
        match res {
            Ok(r) if r.passed => {}
            Ok(r) => out.failures.extend(r.failures().into_iter().map(|f| format!("{fam}: {f}"))),
            Err(e) => out.failures.push(format!("{fam}: {e}")),
        }
    }
    out
}

/// Module axioms and polarization on each page module, and cohomology
/// descent with a full report for every `B`.
pub fn hl_suite(families: &[Family]) -> SuiteResult {
    let mut out = SuiteResult::new("page-module-axioms-and-descent");
    for fam in families {
        let page = match generate(fam).and_then(|inst| build_page(&inst)) {
            Ok(p) => p,
            Err(e) => {
                out.failures.push(format!("{fam}: {e}"));
                continue;
            }
        };
        out.cases += 1;
        let k = page.module.l.len();
        for mask in 0..(1u32 << k) {
            out.cases += 1;
            let b: Vec<usize> = (0..k).filter(|i| mask & (1 << i) != 0).collect();
            let ones = vec![q(1); b.len()];
            if let Err(e) = page.module.cohomology_descent(&b, &ones) {
                out.failures.push(format!("{fam}, B = {b:?}: {e}"));
            }
        }
    }
    out
}

/// Every suite at the sizes used by the acceptance run.
pub fn all_suites(random_families: u64) -> Vec<SuiteResult> {
    let mut fams = named_families();
    fams.extend((0..random_families).map(crate::degeneration::generate::random_family));
    vec![
        monodromy_suite(200, 8, 1),
        relative_nonexistence_suite(),
        spectral_suite(100, 8, 4, 2),
        d1_split_suite(50, 8, 3, 3),
        chibar_sign_suite(5),
        chibar_restriction_suite(4),
        local_complex_suite(4),
        hl_suite(&fams),
        family_suite(&fams, &PipelineOptions::default()),
    ]
}
