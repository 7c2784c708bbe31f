//! The page module `V = ⊕ u^q ⊗ H(D[λ̄])(|q| + k - |r|)` with its Lefschetz
//! operators, differentials `d_i`, pairing, Weil operator and Hodge layer.

use std::collections::BTreeMap;

use num_traits::Zero;

use crate::combinatorics::{contraction_sign, letters, wedge_sign};
use crate::field::{sign_pow, Field, Q, Qi};
use crate::hl::{Grade, HLModule, HodgeComponent};
use crate::linalg::Matrix;

use super::{DegenerationError, DegenerationInstance};

/// One summand `u^q ⊗ H^h(D[λ̄])` of a block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Summand {
    pub subset: u32,
    pub q: Vec<usize>,
    pub h: usize,
    pub grade: Grade,
    /// Offset inside the block.
    pub offset: usize,
    pub len: usize,
}

impl Summand {
    /// Tate twist `|r| - |q| - k`.
    pub fn twist(&self, r: &[usize]) -> i64 {
        r.iter().sum::<usize>() as i64 - self.q.iter().sum::<usize>() as i64 - r.len() as i64
    }
}

/// `V` as a Hodge-Lefschetz module with back-pointers to its summands.
#[derive(Debug, Clone)]
pub struct PageModule {
    pub module: HLModule<Q>,
    pub summands: Vec<Summand>,
    index: BTreeMap<(u32, Vec<usize>, usize), usize>,
}

impl PageModule {
    pub fn summand(&self, subset: u32, q: &[usize], h: usize) -> Option<&Summand> {
        self.index.get(&(subset, q.to_vec(), h)).map(|&i| &self.summands[i])
    }
    pub fn summands_at<'a>(&'a self, g: &'a Grade) -> impl Iterator<Item = &'a Summand> + 'a {
        self.summands.iter().filter(move |s| &s.grade == g)
    }
}

/// All `q` with `0 <= q_i < r_i`.
fn q_box(r: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for &ri in r {
        out = out.into_iter().flat_map(|v| (0..ri).map(move |x| [v.clone(), vec![x]].concat())).collect();
    }
    out
}

/// `(-1)^{m(m-1)/2}`.
fn epsilon(m: i64) -> i64 {
    sign_pow(m * (m - 1) / 2)
}

/// `dim V`, multiplicative over products.
pub fn page_dim(inst: &DegenerationInstance) -> usize {
    inst.strata.iter().map(|(&s, pkg)| inst.alphabet.r(s).iter().product::<usize>() * pkg.len()).sum()
}

/// Builds `V`; the module report must pass.
pub fn build_page(inst: &DegenerationInstance) -> Result<PageModule, DegenerationError> {
    let page = assemble(inst);
    page.module.validate_structure().map_err(|e| DegenerationError::AxiomFailure(vec![e.to_string()]))?;
    let report = page.module.report();
    if !report.passed() {
        return Err(DegenerationError::AxiomFailure(report.failures()));
    }
    Ok(page)
}

/// Builds `V` without running the module checks.
pub fn assemble(inst: &DegenerationInstance) -> PageModule {
    let alpha = &inst.alphabet;
    let k = alpha.k();
    let dim_x = inst.dim_x as i64;
    let mut summands = Vec::new();
    let mut dims: BTreeMap<Grade, usize> = BTreeMap::new();
    for (&s, pkg) in &inst.strata {
        let r = alpha.r(s);
        let rs = r.iter().sum::<usize>() as i64;
        for q in q_box(&r) {
            let mut hs: Vec<usize> = pkg.degrees.clone();
            hs.dedup();
            for h in hs {
                let j: Vec<i64> = (0..k).map(|i| 2 * q[i] as i64 - r[i] as i64 + 1).collect();
                let grade = Grade::new(h as i64 + rs - k as i64 - dim_x, j);
                let len = pkg.betti(h);
                let off = dims.entry(grade.clone()).or_default();
                summands.push(Summand { subset: s, q: q.clone(), h, grade, offset: *off, len });
                *off += len;
            }
        }
    }
    let index = summands.iter().enumerate().map(|(i, x)| ((x.subset, x.q.clone(), x.h), i)).collect();
    let labels = (1..=k).map(|i| i.to_string()).collect();
    let mut module = HLModule::<Q>::new(labels, dims.clone(), dim_x, sign_pow(dim_x), true);
    let mut page = PageModule { module: module.clone(), summands, index };

    let zero_block = |g: &Grade, t: &Grade| Matrix::<Q>::zeros(dims.get(t).copied().unwrap_or(0), dims[g]);
    let mut l0: BTreeMap<Grade, Matrix<Q>> = BTreeMap::new();
    let mut ls: Vec<BTreeMap<Grade, Matrix<Q>>> = vec![BTreeMap::new(); k];
    let mut ds: Vec<BTreeMap<Grade, Matrix<Q>>> = vec![BTreeMap::new(); k];
    let mut pairing: BTreeMap<Grade, Matrix<Q>> = BTreeMap::new();
    let mut weil: BTreeMap<Grade, Matrix<Q>> = dims.iter().map(|(g, &d)| (g.clone(), Matrix::zeros(d, d))).collect();
    let mut hodge: BTreeMap<Grade, BTreeMap<(i64, i64), Vec<Vec<Qi>>>> = BTreeMap::new();

    fn put(map: &mut BTreeMap<Grade, Matrix<Q>>, g: &Grade, init: impl FnOnce() -> Matrix<Q>, r0: usize, c0: usize, b: &Matrix<Q>) {
        map.entry(g.clone()).or_insert_with(init).add_block(r0, c0, b);
    }

    for x in &page.summands {
        let pkg = &inst.strata[&x.subset];
        let r = alpha.r(x.subset);
        let src = pkg.degree_range(x.h);
        let g = &x.grade;
        // l0 = L.
        if let Some(t) = page.summand(x.subset, &x.q, x.h + 2) {
            let tr = pkg.degree_range(x.h + 2);
            let b = pkg.lefschetz.block(tr.start, src.start, tr.len(), src.len());
            put(&mut l0, g, || zero_block(g, &t.grade), t.offset, x.offset, &b);
        }
        for i in 0..k {
            // l_i: u^q ↦ u^{q + e_i}.
            let mut qi = x.q.clone();
            qi[i] += 1;
            if let Some(t) = page.summand(x.subset, &qi, x.h) {
                put(&mut ls[i], g, || zero_block(g, &t.grade), t.offset, x.offset, &Matrix::identity(x.len));
            }
            // d_i: restrictions to deeper strata and Gysin maps to shallower ones.
            for lam in letters(alpha.part(i)) {
                let bit = 1u32 << lam;
                if x.subset & bit == 0 {
                    let big = x.subset | bit;
                    let Some(t) = page.summand(big, &qi, x.h) else { continue };
                    let tr = inst.strata[&big].degree_range(x.h);
                    let b = inst.restrictions[&(x.subset, lam)].block(tr.start, src.start, tr.len(), src.len());
                    let b = b.scale(&Q::from_i64(wedge_sign(bit, x.subset)));
                    put(&mut ds[i], g, || zero_block(g, &t.grade), t.offset, x.offset, &b);
                } else if x.q[i] + 2 <= r[i] {
                    let small = x.subset & !bit;
                    let Some(t) = page.summand(small, &x.q, x.h + 2) else { continue };
                    let tr = inst.strata[&small].degree_range(x.h + 2);
                    let b = inst.gysins[&(small, lam)].block(tr.start, src.start, tr.len(), src.len());
                    let b = b.scale(&Q::from_i64(contraction_sign(lam, x.subset)));
                    put(&mut ds[i], g, || zero_block(g, &t.grade), t.offset, x.offset, &b);
                }
            }
        }
        // S on u^q ⊗ α and u^{r-e-q} ⊗ β.
        let n = 2 * pkg.dim;
        let qp: Vec<usize> = (0..k).map(|i| r[i] - 1 - x.q[i]).collect();
        if let Some(t) = page.summand(x.subset, &qp, n - x.h) {
            let tr = pkg.degree_range(n - x.h);
            let sign = sign_pow(x.q.iter().sum::<usize>() as i64) * epsilon(-(x.h as i64));
            let b = pkg.cup.block(src.start, tr.start, src.len(), tr.len()).scale(&Q::from_i64(sign));
            let neg = g.neg();
            let (rows, cols) = (dims[g], dims[&neg]);
            put(&mut pairing, g, || Matrix::zeros(rows, cols), x.offset, t.offset, &b);
        }
        let c = pkg.weil.block(src.start, src.start, src.len(), src.len());
        weil.get_mut(g).expect("block exists").set_block(x.offset, x.offset, &c);
        let twist = x.twist(&r);
        for comp in &pkg.hodge {
            if (comp.p + comp.q) as usize != x.h {
                continue;
            }
            let entry = hodge.entry(g.clone()).or_default().entry((comp.p + twist, comp.q + twist)).or_default();
            for cidx in 0..comp.basis.cols() {
                let mut v = vec![Qi::zero(); dims[g]];
                for (a, i) in src.clone().enumerate() {
                    v[x.offset + a] = comp.basis.get(i, cidx).clone();
                }
                entry.push(v);
            }
        }
    }
    module.l0.blocks = l0;
    for i in 0..k {
        module.l[i].blocks = std::mem::take(&mut ls[i]);
        module.d[i].blocks = std::mem::take(&mut ds[i]);
    }
    module.pairing = Some(pairing);
    module.weil = weil;
    module.hodge = Some(
        hodge
            .into_iter()
            .map(|(g, comps)| {
                let d = dims[&g];
                let list = comps
                    .into_iter()
                    .map(|((p, q), cols)| HodgeComponent { p, q, basis: Matrix::from_columns(&cols, d) })
                    .collect();
                (g, list)
            })
            .collect(),
    );
    page.module = module;
    page
}
