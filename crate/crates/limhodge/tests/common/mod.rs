use std::collections::BTreeMap;

use limhodge::degeneration::{build_page, DegenerationInstance};
use limhodge::filtration::FilteredComplex;
use limhodge::hl::{Grade, HLModule};
use limhodge::linalg::Matrix;
use limhodge::{Field, Q};

pub fn family(s: &str) -> DegenerationInstance {
    limhodge::degeneration::generate(&s.parse().unwrap()).unwrap()
}

/// `dim H^{j0}` of `(V, Σ d_i)` on each weight `w = j0 - |j|`, keyed
/// `(j0, |j|)`: a brute-force grading that never calls the descent code.
pub fn brute_grading(m: &HLModule<Q>) -> BTreeMap<(i64, i64), usize> {
    let mut by_w: BTreeMap<i64, Vec<Grade>> = BTreeMap::new();
    for g in m.dims.keys() {
        by_w.entry(g.j0 - g.total_j()).or_default().push(g.clone());
    }
    let mut out = BTreeMap::new();
    for (w, grades) in by_w {
        let lo = grades.iter().map(|g| g.j0).min().unwrap();
        let hi = grades.iter().map(|g| g.j0).max().unwrap();
        let mut offs = BTreeMap::new();
        let mut dims = vec![0usize; (hi - lo + 1) as usize];
        for g in &grades {
            let i = (g.j0 - lo) as usize;
            offs.insert(g.clone(), dims[i]);
            dims[i] += m.dims[g];
        }
        let mut d: Vec<Matrix<Q>> =
            (lo..hi).map(|n| Matrix::zeros(dims[(n + 1 - lo) as usize], dims[(n - lo) as usize])).collect();
        for op in &m.d {
            for g in &grades {
                if let Some(&to) = offs.get(&g.add(&op.shift)) {
                    d[(g.j0 - lo) as usize].add_block(to, offs[g], &m.block(op, g));
                }
            }
        }
        let k = FilteredComplex::new(lo, dims, d).unwrap();
        for (i, b) in k.betti().into_iter().enumerate() {
            if b > 0 {
                let j0 = lo + i as i64;
                out.insert((j0, j0 - w), b);
            }
        }
    }
    out
}

pub fn descended(inst: &DegenerationInstance) -> BTreeMap<(i64, i64), usize> {
    let page = build_page(inst).unwrap();
    let k = inst.k();
    let all: Vec<usize> = (0..k).collect();
    let h = page.module.cohomology_descent(&all, &vec![Q::from_i64(1); k]).unwrap();
    h.dims.iter().map(|(g, &d)| ((g.j0, g.total_j()), d)).collect()
}

/// Tensor product of two gradings.
pub fn kunneth(a: &BTreeMap<(i64, i64), usize>, b: &BTreeMap<(i64, i64), usize>) -> BTreeMap<(i64, i64), usize> {
    let mut out = BTreeMap::new();
    for (&(x0, x1), &da) in a {
        for (&(y0, y1), &db) in b {
            *out.entry((x0 + y0, x1 + y1)).or_default() += da * db;
        }
    }
    out
}
