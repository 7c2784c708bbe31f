use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use limhodge::degeneration::generate::random_family;
use limhodge::degeneration::{build_page, generate, page_dim};
use limhodge::filtration::FilteredComplex;
use limhodge::hl::{Axis, Grade, HLModule};
use limhodge::linalg::{Matrix, Subspace};
use limhodge::monodromy::{is_weight_filtration_of, lefschetz_basis, weight_filtration};
use limhodge::spectral::{compute_pages, pages_are_cohomology};
use limhodge::suite::{d1_split_suite, random_filtered_complex};
use limhodge::{Field, Q};

fn q(n: i64) -> Q {
    Q::from_i64(n)
}

/// `P = U L` with unit triangular factors, hence invertible.
fn unit_triangular_product(n: usize, upper: &[i64], lower: &[i64]) -> Matrix<Q> {
    let mut u = Matrix::identity(n);
    let mut l = Matrix::identity(n);
    let mut k = 0;
    for i in 0..n {
        for j in i + 1..n {
            u.set(i, j, q(upper[k % upper.len()]));
            l.set(j, i, q(lower[k % lower.len()]));
            k += 1;
        }
    }
    &u * &l
}

fn jordan_blocks() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(1usize..=4, 1..=4).prop_filter("dim at most 8", |v| v.iter().sum::<usize>() <= 8)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn weight_filtration_matches_jordan_chains(
        sizes in jordan_blocks(),
        upper in prop::collection::vec(-2i64..=2, 1..=28),
        lower in prop::collection::vec(-2i64..=2, 1..=28),
    ) {
        let n: usize = sizes.iter().sum();
        let mut j = Matrix::<Q>::zeros(n, n);
        let mut chain_weight = Vec::new();
        let mut off = 0;
        for &s in &sizes {
            for a in 0..s {
                if a + 1 < s {
                    j.set(off + a + 1, off + a, q(1));
                }
                chain_weight.push(s as i64 - 1 - 2 * a as i64);
            }
            off += s;
        }
        let p = unit_triangular_product(n, &upper, &lower);
        let nmat = &(&p * &j) * &p.inverse().unwrap();
        let w = weight_filtration(&nmat).unwrap();
        for m in -8..=8 {
            let cols: Vec<Vec<Q>> = (0..n).filter(|&i| chain_weight[i] <= m).map(|i| p.column(i)).collect();
            prop_assert_eq!(w.w(m), Subspace::from_vectors(&cols, n));
        }
        prop_assert!(is_weight_filtration_of(&nmat, &w, 0));
        // One primitive vector per Jordan block, of weight size - 1.
        let mut prims: Vec<i64> = lefschetz_basis(&nmat).unwrap().into_iter().map(|(_, l)| l).collect();
        let mut expected: Vec<i64> = sizes.iter().map(|&s| s as i64 - 1).collect();
        prims.sort();
        expected.sort();
        prop_assert_eq!(prims, expected);
    }

    #[test]
    fn shifted_weight_filtration_is_not_centred(sizes in jordan_blocks()) {
        let n: usize = sizes.iter().sum();
        let mut j = Matrix::<Q>::zeros(n, n);
        let mut off = 0;
        for &s in &sizes {
            for a in 0..s.saturating_sub(1) {
                j.set(off + a + 1, off + a, q(1));
            }
            off += s;
        }
        let w = weight_filtration(&j).unwrap();
        prop_assert!(is_weight_filtration_of(&j, &w.shift(2), 2));
        if sizes.iter().any(|&s| s > 1) {
            prop_assert!(!is_weight_filtration_of(&j, &w.shift(2), 0));
        }
    }

    #[test]
    fn e_infinity_is_graded_cohomology(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (k, expected) = random_filtered_complex(&mut rng, 8, 4);
        let ss = compute_pages(&k, "F").unwrap();
        prop_assert_eq!(ss.e_infinity().dims(), expected.clone());
        prop_assert!(pages_are_cohomology(&ss));
        // Betti numbers add up from the graded pieces.
        for n in k.degrees() {
            let total: usize = expected.iter().filter(|((_, m), _)| *m == n).map(|(_, d)| d).sum();
            prop_assert_eq!(total, k.cohomology(n).dim());
        }
    }

    #[test]
    fn d1_splits_for_convolutions(seed in any::<u64>()) {
        let r = d1_split_suite(1, 8, 3, seed);
        prop_assert!(r.passed(), "{:?}", r.failures);
    }

    #[test]
    fn sl2_strings(lengths in prop::collection::vec(1usize..=4, 1..=4), scale in prop::collection::vec(1i64..=5, 4)) {
        // One axis, a direct sum of strings with l acting by nonzero scalars.
        let mut dims: BTreeMap<Grade, usize> = BTreeMap::new();
        for &s in &lengths {
            for a in 0..s {
                *dims.entry(Grade::new(0, vec![2 * a as i64 - (s as i64 - 1)])).or_default() += 1;
            }
        }
        let mut m = HLModule::<Q>::new(vec!["a".into()], dims.clone(), 0, 1, false);
        let mut offset: BTreeMap<Grade, usize> = BTreeMap::new();
        let mut slots: Vec<Vec<(Grade, usize)>> = Vec::new();
        for &s in &lengths {
            let mut row = Vec::new();
            for a in 0..s {
                let g = Grade::new(0, vec![2 * a as i64 - (s as i64 - 1)]);
                let o = offset.entry(g.clone()).or_default();
                row.push((g, *o));
                *o += 1;
            }
            slots.push(row);
        }
        let mut blocks: BTreeMap<Grade, Matrix<Q>> = BTreeMap::new();
        for (i, row) in slots.iter().enumerate() {
            for w in row.windows(2) {
                let (src, so) = &w[0];
                let (tgt, to) = &w[1];
                blocks.entry(src.clone()).or_insert_with(|| Matrix::zeros(dims[tgt], dims[src])).set(*to, *so, q(scale[i % 4]));
            }
        }
        for (g, b) in blocks {
            m.l[0].set(g, b);
        }
        prop_assert!(m.verify_lefschetz().is_empty());
        let prim = m.primitive_decomposition().unwrap().multiplicities();
        let mut expected: BTreeMap<Grade, usize> = BTreeMap::new();
        for &s in &lengths {
            *expected.entry(Grade::new(0, vec![1 - s as i64])).or_default() += 1;
        }
        prop_assert_eq!(prim, expected);
        // w^2 = (-1)^j on V^j.
        let w = m.weil_element(Axis::A(0)).unwrap();
        for (g, &d) in &dims {
            let t = g.with(Axis::A(0), -g.j[0]);
            let sq = &w.blocks[&t] * &w.blocks[g];
            let sign = if g.j[0].rem_euclid(2) == 0 { 1 } else { -1 };
            prop_assert_eq!(sq, Matrix::scalar(d, q(sign)));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn descent_is_functorial(seed in 0u64..200, split in 0u32..8) {
        let fam = random_family(seed);
        let inst = generate(&fam).unwrap();
        prop_assume!(page_dim(&inst) <= 120);
        let page = build_page(&inst).unwrap();
        let k = inst.k();
        let all: Vec<usize> = (0..k).collect();
        let ones = |n: usize| vec![q(1); n];
        let direct = page.module.cohomology_descent(&all, &ones(k)).unwrap();
        let first: Vec<usize> = (0..k).filter(|i| split & (1 << i) != 0).collect();
        let step = page.module.cohomology_descent(&first, &ones(first.len())).unwrap();
        let rest: Vec<usize> = (0..step.n_axes()).collect();
        let iterated = step.cohomology_descent(&rest, &ones(rest.len())).unwrap();
        prop_assert_eq!(&direct.dims, &iterated.dims);
        // The collapsed module is the total cohomology of (V, d).
        let cohom: usize = direct.dims.values().sum();
        prop_assert_eq!(cohom, total_cohomology(&page.module));
    }
}

/// `dim H(V, Σ d_i)` from one big complex graded by `j0`.
fn total_cohomology(m: &HLModule<Q>) -> usize {
    let grades: Vec<Grade> = m.dims.keys().cloned().collect();
    let lo = grades.iter().map(|g| g.j0).min().unwrap();
    let hi = grades.iter().map(|g| g.j0).max().unwrap();
    let mut offs: BTreeMap<Grade, usize> = BTreeMap::new();
    let mut dims = vec![0usize; (hi - lo + 1) as usize];
    for g in &grades {
        let i = (g.j0 - lo) as usize;
        offs.insert(g.clone(), dims[i]);
        dims[i] += m.dims[g];
    }
    let mut d: Vec<Matrix<Q>> = (lo..hi).map(|n| Matrix::zeros(dims[(n + 1 - lo) as usize], dims[(n - lo) as usize])).collect();
    for op in &m.d {
        for g in &grades {
            let t = g.add(&op.shift);
            if let Some(&to) = offs.get(&t) {
                d[(g.j0 - lo) as usize].add_block(to, offs[g], &m.block(op, g));
            }
        }
    }
    let k = FilteredComplex::new(lo, dims, d).unwrap();
    k.betti().iter().sum()
}
