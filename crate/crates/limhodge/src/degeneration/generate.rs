//! Instance generators: graph curves, smooth curves, products and random
//! families.

use std::collections::BTreeMap;
use std::str::FromStr;

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::combinatorics::{letter_name, letters, PartitionedAlphabet};
use crate::field::{Field, Q, Qi};
use crate::linalg::Matrix;

use super::instance::{StratumHodge, StratumPackage};
use super::page::page_dim;
use super::{DegenerationError, DegenerationInstance};

/// A curve degenerating to a nodal union of smooth components.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphCurve {
    /// `(genus, degree of the ample class)` per component; genus is 0 or 1.
    pub components: Vec<(usize, i64)>,
    /// `(u, v, number of nodes)` with `u < v`.
    pub edges: Vec<(usize, usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Family {
    /// Two lines meeting in a point.
    NodalConic,
    /// `m` lines in a chain.
    Chain(usize),
    /// `m` lines in a cycle; `Cycle(2)` is two lines meeting twice.
    Cycle(usize),
    GraphCurve(GraphCurve),
    /// A smooth curve of the given genus, no degeneration (`k = 0`).
    SmoothCurve(usize),
    Product(Vec<Family>),
    Random(u64),
}

fn param(msg: impl Into<String>) -> DegenerationError {
    DegenerationError::ParamError(msg.into())
}

impl FromStr for Family {
    type Err = DegenerationError;

    /// `nodal-conic`, `chain:M`, `cycle:M`, `smooth-curve:G`, `random:SEED`,
    /// `product:F1+F2+...`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (head, arg) = match s.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (s, None),
        };
        let num = |a: Option<&str>| -> Result<u64, DegenerationError> {
            a.ok_or_else(|| param(format!("{head} needs a parameter")))?
                .parse::<u64>()
                .map_err(|_| param(format!("bad parameter for {head}")))
        };
        match head {
            "nodal-conic" => Ok(Family::NodalConic),
            "chain" => Ok(Family::Chain(num(arg)? as usize)),
            "cycle" => Ok(Family::Cycle(num(arg)? as usize)),
            "smooth-curve" => Ok(Family::SmoothCurve(num(arg)? as usize)),
            "random" => Ok(Family::Random(num(arg)?)),
            "product" => {
                let a = arg.ok_or_else(|| param("product needs factors"))?;
                a.split('+').map(Family::from_str).collect::<Result<Vec<_>, _>>().map(Family::Product)
            }
            _ => Err(param(format!("unknown family {head:?}"))),
        }
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Family::NodalConic => write!(f, "nodal-conic"),
            Family::Chain(m) => write!(f, "chain:{m}"),
            Family::Cycle(m) => write!(f, "cycle:{m}"),
            Family::GraphCurve(g) => write!(f, "graph-curve({} components, {} edges)", g.components.len(), g.edges.len()),
            Family::SmoothCurve(g) => write!(f, "smooth-curve:{g}"),
            Family::Product(fs) => write!(f, "product:{}", fs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("+")),
            Family::Random(s) => write!(f, "random:{s}"),
        }
    }
}

/// Builds and validates an instance of the family.
pub fn generate(family: &Family) -> Result<DegenerationInstance, DegenerationError> {
    let mut inst = build(family)?;
    inst.name = family.to_string();
    inst.validate()?;
    Ok(inst)
}

fn build(family: &Family) -> Result<DegenerationInstance, DegenerationError> {
    match family {
        Family::NodalConic => graph_curve(&GraphCurve { components: vec![(0, 1), (0, 1)], edges: vec![(0, 1, 1)] }),
        Family::Chain(m) => {
            if *m == 0 {
                return Err(param("chain needs at least one component"));
            }
            graph_curve(&GraphCurve { components: vec![(0, 1); *m], edges: (1..*m).map(|i| (i - 1, i, 1)).collect() })
        }
        Family::Cycle(m) => match m {
            0 | 1 => Err(param("cycle needs at least two components")),
            2 => graph_curve(&GraphCurve { components: vec![(0, 1); 2], edges: vec![(0, 1, 2)] }),
            _ => {
                let mut edges: Vec<(usize, usize, usize)> = (1..*m).map(|i| (i - 1, i, 1)).collect();
                edges.push((0, m - 1, 1));
                graph_curve(&GraphCurve { components: vec![(0, 1); *m], edges })
            }
        },
        Family::GraphCurve(g) => graph_curve(g),
        Family::SmoothCurve(g) => smooth_curve(*g),
        Family::Product(fs) => {
            if fs.is_empty() {
                return Err(param("product needs factors"));
            }
            let mut acc = build(&fs[0])?;
            for f in &fs[1..] {
                acc = product(&acc, &build(f)?)?;
            }
            Ok(acc)
        }
        Family::Random(seed) => build(&random_family(*seed)),
    }
}

fn q(n: i64) -> Q {
    Q::from_i64(n)
}

fn qi(re: i64, im: i64) -> Qi {
    Qi::new(q(re), q(im))
}

/// Cohomology of a smooth curve of genus `g` with ample degree `a`, basis
/// `1, a_1..a_g, b_1..b_g, pt`.
fn curve_package(subset: u32, genus: usize, degree: i64) -> StratumPackage {
    let n = 2 * genus + 2;
    let top = n - 1;
    let mut degrees = vec![0];
    degrees.extend(std::iter::repeat_n(1, 2 * genus));
    degrees.push(2);
    let mut lefschetz = Matrix::zeros(n, n);
    lefschetz.set(top, 0, q(degree));
    let mut trace = vec![Q::zero(); n];
    trace[top] = Q::one();
    let mut cup = Matrix::zeros(n, n);
    cup.set(0, top, Q::one());
    cup.set(top, 0, Q::one());
    let mut weil = Matrix::identity(n);
    let mut h10 = Matrix::<Qi>::zeros(n, genus);
    let mut h01 = Matrix::<Qi>::zeros(n, genus);
    for i in 0..genus {
        let (a, b) = (1 + i, 1 + genus + i);
        cup.set(a, b, Q::one());
        cup.set(b, a, -Q::one());
        // C a = -b, C b = a.
        weil.set(a, a, Q::zero());
        weil.set(b, b, Q::zero());
        weil.set(b, a, -Q::one());
        weil.set(a, b, Q::one());
        h10.set(a, i, qi(1, 0));
        h10.set(b, i, qi(0, 1));
        h01.set(a, i, qi(1, 0));
        h01.set(b, i, qi(0, -1));
    }
    let point = |i: usize| {
        let mut m = Matrix::<Qi>::zeros(n, 1);
        m.set(i, 0, Qi::one());
        m
    };
    let mut hodge = vec![StratumHodge { p: 0, q: 0, basis: point(0) }];
    if genus > 0 {
        hodge.push(StratumHodge { p: 1, q: 0, basis: h10 });
        hodge.push(StratumHodge { p: 0, q: 1, basis: h01 });
    }
    hodge.push(StratumHodge { p: 1, q: 1, basis: point(top) });
    StratumPackage { subset, dim: 1, degrees, hodge, lefschetz, trace, cup, weil }
}

/// `m` points.
fn points_package(subset: u32, m: usize) -> StratumPackage {
    StratumPackage {
        subset,
        dim: 0,
        degrees: vec![0; m],
        hodge: vec![StratumHodge { p: 0, q: 0, basis: Matrix::identity(m) }],
        lefschetz: Matrix::zeros(m, m),
        trace: vec![Q::one(); m],
        cup: Matrix::identity(m),
        weil: Matrix::identity(m),
    }
}

fn smooth_curve(genus: usize) -> Result<DegenerationInstance, DegenerationError> {
    let alphabet = PartitionedAlphabet::from_parts(&[]).map_err(|e| param(e.to_string()))?;
    Ok(DegenerationInstance {
        name: String::new(),
        alphabet,
        dim_x: 1,
        strata: BTreeMap::from([(0, curve_package(0, genus, 1))]),
        restrictions: BTreeMap::new(),
        gysins: BTreeMap::new(),
    })
}

fn graph_curve(g: &GraphCurve) -> Result<DegenerationInstance, DegenerationError> {
    let m = g.components.len();
    if m == 0 || m > crate::combinatorics::MAX_LETTERS {
        return Err(param("graph curve needs between 1 and MAX_LETTERS components"));
    }
    if g.components.iter().any(|&(genus, deg)| genus > 1 || deg <= 0) {
        return Err(param("components need genus 0 or 1 and positive degree"));
    }
    let mut mult: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for &(u, v, c) in &g.edges {
        if u >= v || v >= m || c == 0 {
            return Err(param(format!("bad edge ({u}, {v}, {c})")));
        }
        *mult.entry((u, v)).or_default() += c;
    }
    let labels: Vec<String> = (0..m).map(letter_name).collect();
    let alphabet = PartitionedAlphabet::from_parts(&[labels]).map_err(|e| param(e.to_string()))?;
    let mut strata = BTreeMap::new();
    for (v, &(genus, deg)) in g.components.iter().enumerate() {
        strata.insert(1u32 << v, curve_package(1 << v, genus, deg));
    }
    let mut restrictions = BTreeMap::new();
    let mut gysins = BTreeMap::new();
    for (&(u, v), &c) in &mult {
        let s = (1u32 << u) | (1 << v);
        strata.insert(s, points_package(s, c));
        for (from, add) in [(u, v), (v, u)] {
            let comp = &strata[&(1u32 << from)];
            let (len, top) = (comp.len(), comp.len() - 1);
            // 1 ↦ (1, ..., 1); points ↦ -pt.
            let mut rho = Matrix::zeros(c, len);
            let mut gam = Matrix::zeros(len, c);
            for i in 0..c {
                rho.set(i, 0, Q::one());
                gam.set(top, i, -Q::one());
            }
            restrictions.insert((1u32 << from, add), rho);
            gysins.insert((1u32 << from, add), gam);
        }
    }
    Ok(DegenerationInstance { name: String::new(), alphabet, dim_x: 1, strata, restrictions, gysins })
}

/// Tensor basis `(i, j)` ordered by total degree.
fn tensor_order(a: &StratumPackage, b: &StratumPackage) -> Vec<(usize, usize)> {
    let mut v: Vec<(usize, usize)> = (0..a.len()).flat_map(|i| (0..b.len()).map(move |j| (i, j))).collect();
    v.sort_by_key(|&(i, j)| (a.degrees[i] + b.degrees[j], i, j));
    v
}

fn permute<F: Field>(m: &Matrix<F>, rows: &[(usize, usize)], cols: &[(usize, usize)], nb_r: usize, nb_c: usize) -> Matrix<F> {
    let mut out = Matrix::zeros(rows.len(), cols.len());
    for (r, &(i, j)) in rows.iter().enumerate() {
        for (c, &(k, l)) in cols.iter().enumerate() {
            out.set(r, c, m.get(i * nb_r + j, k * nb_c + l).clone());
        }
    }
    out
}

fn tensor_package(a: &StratumPackage, b: &StratumPackage, subset: u32) -> StratumPackage {
    let order = tensor_order(a, b);
    let nb = b.len();
    let ib = Matrix::<Q>::identity(nb);
    let ia = Matrix::<Q>::identity(a.len());
    let lk = &a.lefschetz.kron(&ib) + &ia.kron(&b.lefschetz);
    let lefschetz = permute(&lk, &order, &order, nb, nb);
    let weil = permute(&a.weil.kron(&b.weil), &order, &order, nb, nb);
    let trace = order.iter().map(|&(i, j)| a.trace[i].clone() * &b.trace[j]).collect();
    let mut cup = Matrix::zeros(order.len(), order.len());
    for (r, &(i, j)) in order.iter().enumerate() {
        for (c, &(k, l)) in order.iter().enumerate() {
            let v = a.cup.get(i, k).clone() * b.cup.get(j, l);
            if v.is_zero() {
                continue;
            }
            let sign = if (b.degrees[j] * a.degrees[k]) % 2 == 1 { -Q::one() } else { Q::one() };
            cup.set(r, c, sign * v);
        }
    }
    let mut by_type: BTreeMap<(i64, i64), Vec<Vec<Qi>>> = BTreeMap::new();
    for ca in &a.hodge {
        for cb in &b.hodge {
            let e = by_type.entry((ca.p + cb.p, ca.q + cb.q)).or_default();
            for x in 0..ca.basis.cols() {
                for y in 0..cb.basis.cols() {
                    let u = ca.basis.column(x);
                    let w = cb.basis.column(y);
                    e.push(order.iter().map(|&(i, j)| u[i].clone() * &w[j]).collect());
                }
            }
        }
    }
    let n = order.len();
    let hodge = by_type.into_iter().map(|((p, qq), cols)| StratumHodge { p, q: qq, basis: Matrix::from_columns(&cols, n) }).collect();
    StratumPackage {
        subset,
        dim: a.dim + b.dim,
        degrees: order.iter().map(|&(i, j)| a.degrees[i] + b.degrees[j]).collect(),
        hodge,
        lefschetz,
        trace,
        cup,
        weil,
    }
}

/// `f ⊗ id` or `id ⊗ f` between tensor packages.
fn tensor_map(
    f: &Matrix<Q>,
    left: bool,
    src: (&StratumPackage, &StratumPackage),
    tgt: (&StratumPackage, &StratumPackage),
) -> Matrix<Q> {
    let so = tensor_order(src.0, src.1);
    let to = tensor_order(tgt.0, tgt.1);
    let mut out = Matrix::zeros(to.len(), so.len());
    for (r, &(i, j)) in to.iter().enumerate() {
        for (c, &(k, l)) in so.iter().enumerate() {
            let v = if left {
                if j == l {
                    f.get(i, k).clone()
                } else {
                    Q::zero()
                }
            } else if i == k {
                f.get(j, l).clone()
            } else {
                Q::zero()
            };
            out.set(r, c, v);
        }
    }
    out
}

/// The product degeneration over the product of bases.
pub fn product(a: &DegenerationInstance, b: &DegenerationInstance) -> Result<DegenerationInstance, DegenerationError> {
    let na = a.alphabet.len();
    if na + b.alphabet.len() > crate::combinatorics::MAX_LETTERS {
        return Err(param("product has too many letters"));
    }
    let clash = a.alphabet.labels().iter().any(|l| b.alphabet.index(l).is_some());
    let relabel = |inst: &DegenerationInstance, tag: &str, s: u32| -> Vec<String> {
        inst.alphabet.subset_labels(s).into_iter().map(|l| if clash { format!("{tag}{l}") } else { l }).collect()
    };
    let mut parts: Vec<Vec<String>> = (0..a.k()).map(|i| relabel(a, "1", a.alphabet.part(i))).collect();
    parts.extend((0..b.k()).map(|i| relabel(b, "2", b.alphabet.part(i))));
    let alphabet = PartitionedAlphabet::from_parts(&parts).map_err(|e| param(e.to_string()))?;
    // Letter indices: a's letters keep their positions only if from_parts orders them so.
    let a_idx: Vec<usize> = (0..na).map(|l| alphabet.index(&relabel(a, "1", 1 << l)[0]).expect("label")).collect();
    let b_idx: Vec<usize> = (0..b.alphabet.len()).map(|l| alphabet.index(&relabel(b, "2", 1 << l)[0]).expect("label")).collect();
    let lift = |s: u32, idx: &[usize]| -> u32 { letters(s).map(|l| 1u32 << idx[l]).fold(0, |x, y| x | y) };
    let mut strata = BTreeMap::new();
    for (&sa, pa) in &a.strata {
        for (&sb, pb) in &b.strata {
            let s = lift(sa, &a_idx) | lift(sb, &b_idx);
            strata.insert(s, tensor_package(pa, pb, s));
        }
    }
    let mut restrictions = BTreeMap::new();
    let mut gysins = BTreeMap::new();
    for (&sa, pa) in &a.strata {
        for (&sb, pb) in &b.strata {
            let s = lift(sa, &a_idx) | lift(sb, &b_idx);
            for (&(from, l), rho) in a.restrictions.iter().filter(|((f, _), _)| *f == sa) {
                let big = &a.strata[&(from | (1 << l))];
                restrictions.insert((s, a_idx[l]), tensor_map(rho, true, (pa, pb), (big, pb)));
                gysins.insert((s, a_idx[l]), tensor_map(&a.gysins[&(from, l)], true, (big, pb), (pa, pb)));
            }
            for (&(from, l), rho) in b.restrictions.iter().filter(|((f, _), _)| *f == sb) {
                let big = &b.strata[&(from | (1 << l))];
                restrictions.insert((s, b_idx[l]), tensor_map(rho, false, (pa, pb), (pa, big)));
                gysins.insert((s, b_idx[l]), tensor_map(&b.gysins[&(from, l)], false, (pa, big), (pa, pb)));
            }
        }
    }
    Ok(DegenerationInstance {
        name: format!("{} x {}", a.name, b.name),
        alphabet,
        dim_x: a.dim_x + b.dim_x,
        strata,
        restrictions,
        gysins,
    })
}

/// A random connected graph curve with 2 to 4 components.
fn random_graph_curve(rng: &mut ChaCha8Rng, max_components: usize) -> GraphCurve {
    let m = rng.gen_range(2..=max_components.max(2));
    let components = (0..m).map(|_| (usize::from(rng.gen_bool(0.3)), rng.gen_range(1..=3))).collect();
    let mut mult: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for v in 1..m {
        let u = rng.gen_range(0..v);
        *mult.entry((u, v)).or_default() += 1;
    }
    for _ in 0..rng.gen_range(0..=2) {
        let u = rng.gen_range(0..m);
        let v = rng.gen_range(0..m);
        if u != v {
            *mult.entry((u.min(v), u.max(v))).or_default() += 1;
        }
    }
    GraphCurve { components, edges: mult.into_iter().map(|((u, v), c)| (u, v, c)).collect() }
}

/// Upper bound on `dim V` for random families.
pub const RANDOM_PAGE_BUDGET: usize = 320;

/// Random families: products of one to three random graph curves, possibly
/// with a smooth curve factor, with `k <= 3`, at most six letters and
/// `dim V <= RANDOM_PAGE_BUDGET`. Oversized draws are rejected.
pub fn random_family(seed: u64) -> Family {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let fs = random_factors(&mut rng);
        let dim: usize = fs.iter().map(|f| build(f).map(|i| page_dim(&i)).unwrap_or(usize::MAX)).product();
        if dim <= RANDOM_PAGE_BUDGET {
            return if fs.len() == 1 { fs.into_iter().next().expect("one factor") } else { Family::Product(fs) };
        }
    }
}

fn random_factors(rng: &mut ChaCha8Rng) -> Vec<Family> {
    let factors = rng.gen_range(1..=3);
    let mut fs = Vec::new();
    let mut letters_left = 6usize;
    for f in 0..factors {
        let remaining = factors - f - 1;
        let cap = (letters_left - 2 * remaining).min(if factors == 3 { 2 } else { 4 });
        let g = random_graph_curve(rng, cap);
        letters_left -= g.components.len();
        fs.push(Family::GraphCurve(g));
    }
    if factors == 1 && rng.gen_bool(0.3) {
        fs.push(Family::SmoothCurve(rng.gen_range(0..=1)));
    }
    fs
}
