//! Graded Hodge-Lefschetz modules.
//!
//! A module is graded by `(j0, j)` with `j ∈ Z^A`. It carries raising
//! operators `l0` (shift `(2, 0)`) and `l_a` (shift `(0, 2e_a)`), optional
//! differentials `d_a` (shift `(1, e_a)`), an optional pairing
//! `S: V^g ⊗ V^{-g} → F`, a Weil operator per block and an optional Hodge
//! layer over `Q(i)`. The weight of `V^{j0, j}` is `j0 - |j| + weight_offset`.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::field::{i_pow, Field, Qi};
use crate::linalg::{hermitian_definiteness, Definiteness, Matrix, Subquotient, Subspace};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum HlError {
    #[error("malformed module: {0}")]
    Malformed(String),
    #[error("not a Lefschetz module: {0}")]
    NotLefschetz(String),
    #[error("descent failed: {}", .0.join("; "))]
    DescentAxiomFailure(Vec<String>),
    #[error("coefficients must be positive")]
    NonPositiveWeights,
}

/// A grade `(j0, j)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Grade {
    pub j0: i64,
    pub j: Vec<i64>,
}

/// `Zero` is the `j0` axis of `l0`; `A(a)` is the axis of `l_a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Axis {
    Zero,
    A(usize),
}

impl Axis {
    pub fn name(&self) -> String {
        match self {
            Axis::Zero => "l0".into(),
            Axis::A(a) => format!("l{}", a + 1),
        }
    }
}

impl Grade {
    pub fn new(j0: i64, j: Vec<i64>) -> Self {
        Grade { j0, j }
    }
    pub fn zero(n: usize) -> Self {
        Grade { j0: 0, j: vec![0; n] }
    }
    pub fn unit(axis: Axis, n: usize, amount: i64) -> Self {
        let mut g = Self::zero(n);
        g.set(axis, amount);
        g
    }
    pub fn get(&self, axis: Axis) -> i64 {
        match axis {
            Axis::Zero => self.j0,
            Axis::A(a) => self.j[a],
        }
    }
    pub fn set(&mut self, axis: Axis, v: i64) {
        match axis {
            Axis::Zero => self.j0 = v,
            Axis::A(a) => self.j[a] = v,
        }
    }
    pub fn with(&self, axis: Axis, v: i64) -> Self {
        let mut g = self.clone();
        g.set(axis, v);
        g
    }
    pub fn add(&self, o: &Grade) -> Self {
        Grade { j0: self.j0 + o.j0, j: self.j.iter().zip(&o.j).map(|(a, b)| a + b).collect() }
    }
    pub fn neg(&self) -> Self {
        Grade { j0: -self.j0, j: self.j.iter().map(|x| -x).collect() }
    }
    pub fn total_j(&self) -> i64 {
        self.j.iter().sum()
    }
}

impl std::fmt::Display for Grade {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let js: Vec<String> = self.j.iter().map(|x| x.to_string()).collect();
        if js.is_empty() {
            write!(f, "({})", self.j0)
        } else {
            write!(f, "({},{})", self.j0, js.join(","))
        }
    }
}

/// A homogeneous operator: a matrix per source grade, all with the same shift.
#[derive(Debug, Clone)]
pub struct GradedMap<F> {
    pub shift: Grade,
    pub blocks: BTreeMap<Grade, Matrix<F>>,
}

impl<F: Field> GradedMap<F> {
    pub fn new(shift: Grade) -> Self {
        GradedMap { shift, blocks: BTreeMap::new() }
    }
    pub fn set(&mut self, src: Grade, m: Matrix<F>) {
        self.blocks.insert(src, m);
    }
    pub fn add_to(&mut self, src: Grade, m: &Matrix<F>) {
        match self.blocks.get_mut(&src) {
            Some(b) => *b = &*b + m,
            None => {
                self.blocks.insert(src, m.clone());
            }
        }
    }
}

/// One Hodge component `V^{p,q}` of a block, spanned by columns over `Q(i)`.
#[derive(Debug, Clone)]
pub struct HodgeComponent {
    pub p: i64,
    pub q: i64,
    pub basis: Matrix<Qi>,
}

/// Outcome of one named check.
#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub holds: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub failures: Vec<String>,
}

impl CheckResult {
    fn new(name: &str, failures: Vec<String>) -> Self {
        CheckResult { name: name.into(), holds: failures.is_empty(), failures }
    }
}

/// Names of the axioms checked by [`HLModule::axioms`], in report order.
pub const AXIOM_NAMES: [&str; 11] = [
    "differentials-anticommute",
    "raising-operators-commute",
    "l0-commutes-with-raising",
    "differentials-commute-with-lefschetz",
    "pairing-anti-invariance-raising",
    "pairing-anti-invariance-l0",
    "pairing-differential-self-adjoint",
    "pairing-support",
    "pairing-symmetry",
    "hodge-filtration-shifts",
    "pairing-hodge-orthogonality",
];

#[derive(Debug, Clone, Serialize)]
pub struct LefschetzFailure {
    pub axis: String,
    pub source: Grade,
    pub source_dim: usize,
    pub target_dim: usize,
    pub rank: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct PolarizationFailure {
    pub grade: Grade,
    pub definiteness: Option<Definiteness>,
}

/// Primitive subspaces `V_0^{-j0,-j}` keyed by their (nonpositive) grade.
#[derive(Debug, Clone)]
pub struct PrimitiveDecomposition<F> {
    pub primitives: BTreeMap<Grade, Matrix<F>>,
}

impl<F: Field> PrimitiveDecomposition<F> {
    /// `(grade, dim)` of each nonzero primitive space.
    pub fn multiplicities(&self) -> BTreeMap<Grade, usize> {
        self.primitives.iter().filter(|(_, m)| m.cols() > 0).map(|(g, m)| (g.clone(), m.cols())).collect()
    }
}

/// A degree-reversing operator `V^g → V^{σ(g)}` such as a Weil element.
#[derive(Debug, Clone)]
pub struct Reflection<F> {
    pub axes: Vec<Axis>,
    pub blocks: BTreeMap<Grade, Matrix<F>>,
}

#[derive(Debug, Clone)]
pub struct HLModule<F> {
    pub labels: Vec<String>,
    pub dims: BTreeMap<Grade, usize>,
    pub l0: GradedMap<F>,
    pub l: Vec<GradedMap<F>>,
    pub d: Vec<GradedMap<F>>,
    /// `S_g` with `S(x, y) = x^T S_g y` for `x ∈ V^g`, `y ∈ V^{-g}`.
    pub pairing: Option<BTreeMap<Grade, Matrix<F>>>,
    pub weil: BTreeMap<Grade, Matrix<F>>,
    pub hodge: Option<BTreeMap<Grade, Vec<HodgeComponent>>>,
    pub weight_offset: i64,
    /// `S(y, x) = symmetry · S(x, y)`.
    pub symmetry: i64,
}

fn to_qi<F: Field>(m: &Matrix<F>) -> Matrix<Qi> {
    m.map(|x| x.to_qi())
}

fn exp_nilpotent<F: Field>(x: &Matrix<F>) -> Matrix<F> {
    let n = x.rows();
    let mut acc = Matrix::identity(n);
    let mut term = Matrix::identity(n);
    for k in 1..=n + 1 {
        term = (&term * x).scale(&F::from_ratio(1, k as i64));
        if term.is_zero() {
            break;
        }
        acc = &acc + &term;
    }
    acc
}

impl<F: Field> HLModule<F> {
    /// Empty operators on the given blocks; the Weil operator defaults to the identity.
    pub fn new(labels: Vec<String>, dims: BTreeMap<Grade, usize>, weight_offset: i64, symmetry: i64, with_d: bool) -> Self {
        let n = labels.len();
        let dims: BTreeMap<Grade, usize> = dims.into_iter().filter(|(_, d)| *d > 0).collect();
        let weil = dims.iter().map(|(g, &d)| (g.clone(), Matrix::identity(d))).collect();
        let l = (0..n).map(|a| GradedMap::new(Grade::unit(Axis::A(a), n, 2))).collect();
        let d = if with_d {
            (0..n).map(|a| GradedMap::new(Grade::unit(Axis::A(a), n, 1).add(&Grade::unit(Axis::Zero, n, 1)))).collect()
        } else {
            Vec::new()
        };
        HLModule {
            labels,
            dims,
            l0: GradedMap::new(Grade::unit(Axis::Zero, n, 2)),
            l,
            d,
            pairing: None,
            weil,
            hodge: None,
            weight_offset,
            symmetry,
        }
    }

    pub fn n_axes(&self) -> usize {
        self.labels.len()
    }
    pub fn dim(&self, g: &Grade) -> usize {
        self.dims.get(g).copied().unwrap_or(0)
    }
    pub fn total_dim(&self) -> usize {
        self.dims.values().sum()
    }
    pub fn weight(&self, g: &Grade) -> i64 {
        g.j0 - g.total_j() + self.weight_offset
    }
    pub fn grades(&self) -> impl Iterator<Item = &Grade> {
        self.dims.keys()
    }

    pub fn raising(&self, axis: Axis) -> &GradedMap<F> {
        match axis {
            Axis::Zero => &self.l0,
            Axis::A(a) => &self.l[a],
        }
    }
    pub fn axes(&self) -> Vec<Axis> {
        std::iter::once(Axis::Zero).chain((0..self.n_axes()).map(Axis::A)).collect()
    }

    /// Block of `m` at source `g`, zero if absent.
    pub fn block(&self, m: &GradedMap<F>, g: &Grade) -> Matrix<F> {
        let t = g.add(&m.shift);
        let (rows, cols) = (self.dim(&t), self.dim(g));
        match m.blocks.get(g) {
            Some(b) if b.rows() == rows && b.cols() == cols => b.clone(),
            _ => Matrix::zeros(rows, cols),
        }
    }

    /// `S_g`, zero if absent.
    pub fn pairing_block(&self, g: &Grade) -> Matrix<F> {
        let (rows, cols) = (self.dim(g), self.dim(&g.neg()));
        match self.pairing.as_ref().and_then(|p| p.get(g)) {
            Some(b) if b.rows() == rows && b.cols() == cols => b.clone(),
            _ => Matrix::zeros(rows, cols),
        }
    }

    pub fn weil_block(&self, g: &Grade) -> Matrix<F> {
        self.weil.get(g).cloned().unwrap_or_else(|| Matrix::identity(self.dim(g)))
    }

    /// `m^k` from `g`.
    pub fn power_block(&self, m: &GradedMap<F>, g: &Grade, k: usize) -> Matrix<F> {
        let mut acc = Matrix::identity(self.dim(g));
        let mut cur = g.clone();
        for _ in 0..k {
            acc = &self.block(m, &cur) * &acc;
            cur = cur.add(&m.shift);
        }
        acc
    }

    /// Checks shapes of all stored blocks and validity of the Hodge layer.
    pub fn validate_structure(&self) -> Result<(), HlError> {
        let n = self.n_axes();
        let mut maps: Vec<(&str, &GradedMap<F>)> = vec![("l0", &self.l0)];
        maps.extend(self.l.iter().map(|m| ("l", m)));
        maps.extend(self.d.iter().map(|m| ("d", m)));
        for (name, m) in maps {
            if m.shift.j.len() != n {
                return Err(HlError::Malformed(format!("{name} has shift of wrong length")));
            }
            for (g, b) in &m.blocks {
                let t = g.add(&m.shift);
                if b.rows() != self.dim(&t) || b.cols() != self.dim(g) {
                    return Err(HlError::Malformed(format!("{name} block at {g} has wrong shape")));
                }
            }
        }
        if let Some(p) = &self.pairing {
            for (g, b) in p {
                if b.rows() != self.dim(g) || b.cols() != self.dim(&g.neg()) {
                    return Err(HlError::Malformed(format!("pairing block at {g} has wrong shape")));
                }
            }
        }
        for (g, c) in &self.weil {
            if c.rows() != self.dim(g) || c.cols() != self.dim(g) {
                return Err(HlError::Malformed(format!("Weil block at {g} has wrong shape")));
            }
        }
        if let Some(h) = &self.hodge {
            for (g, comps) in h {
                self.check_hodge_block(g, comps)?;
            }
        }
        Ok(())
    }

    fn check_hodge_block(&self, g: &Grade, comps: &[HodgeComponent]) -> Result<(), HlError> {
        let dim = self.dim(g);
        let w = self.weight(g);
        let mut all = Matrix::<Qi>::zeros(dim, 0);
        let c = to_qi(&self.weil_block(g));
        for comp in comps {
            if comp.p + comp.q != w {
                return Err(HlError::Malformed(format!("Hodge type ({},{}) at {g} has wrong weight {w}", comp.p, comp.q)));
            }
            if comp.basis.rows() != dim {
                return Err(HlError::Malformed(format!("Hodge basis at {g} has wrong length")));
            }
            let conj = Subspace::from_columns(&comp.basis.conj());
            let partner = comps.iter().find(|o| o.p == comp.q && o.q == comp.p);
            match partner {
                Some(o) if Subspace::from_columns(&o.basis) == conj => {}
                _ => return Err(HlError::Malformed(format!("Hodge component ({},{}) at {g} is not conjugate to its partner", comp.p, comp.q))),
            }
            let expected = comp.basis.scale(&i_pow(comp.p - comp.q));
            if &c * &comp.basis != expected {
                return Err(HlError::Malformed(format!("Weil operator at {g} is not i^(p-q) on ({},{})", comp.p, comp.q)));
            }
            all = all.hstack(&comp.basis);
        }
        if all.cols() != dim || all.rank() != dim {
            return Err(HlError::Malformed(format!("Hodge components at {g} do not decompose the block")));
        }
        Ok(())
    }

    fn compose_equal(&self, a: &GradedMap<F>, b: &GradedMap<F>, c: &GradedMap<F>, e: &GradedMap<F>, sign: i64) -> Vec<String> {
        // a∘b == sign · c∘e
        let mut out = Vec::new();
        for g in self.dims.keys() {
            let ab = &self.block(a, &g.add(&b.shift)) * &self.block(b, g);
            let ce = &self.block(c, &g.add(&e.shift)) * &self.block(e, g);
            let rhs = if sign == 1 { ce } else { -&ce };
            if ab != rhs {
                out.push(format!("at {g}"));
            }
        }
        out
    }

    /// `S(m x, y) = sign · S(x, m y)` for all `x ∈ V^g`.
    fn pairing_adjoint(&self, m: &GradedMap<F>, sign: i64) -> Vec<String> {
        let mut out = Vec::new();
        if self.pairing.is_none() {
            return out;
        }
        for g in self.dims.keys() {
            let t = g.add(&m.shift);
            let y = t.neg();
            let lhs = &self.block(m, g).transpose() * &self.pairing_block(&t);
            let rhs = &self.pairing_block(g) * &self.block(m, &y);
            let rhs = if sign == 1 { rhs } else { -&rhs };
            if lhs != rhs {
                out.push(format!("at {g}"));
            }
        }
        out
    }

    fn hodge_filtration(&self, g: &Grade, p: i64) -> Subspace<Qi> {
        let dim = self.dim(g);
        let Some(h) = self.hodge.as_ref().and_then(|h| h.get(g)) else {
            return Subspace::full(dim);
        };
        let cols: Vec<Vec<Qi>> =
            h.iter().filter(|c| c.p >= p).flat_map(|c| (0..c.basis.cols()).map(|j| c.basis.column(j)).collect::<Vec<_>>()).collect();
        Subspace::from_vectors(&cols, dim)
    }

    fn filtration_shift_failures(&self, m: &GradedMap<F>, name: &str, shift: i64) -> Vec<String> {
        let mut out = Vec::new();
        let Some(h) = &self.hodge else { return out };
        for (g, comps) in h {
            let t = g.add(&m.shift);
            if self.dim(&t) == 0 {
                continue;
            }
            let b = to_qi(&self.block(m, g));
            let ps: BTreeSet<i64> = comps.iter().map(|c| c.p).collect();
            for p in ps {
                if !self.hodge_filtration(g, p).image(&b).is_subspace_of(&self.hodge_filtration(&t, p + shift)) {
                    out.push(format!("{name} at {g}, p={p}"));
                }
            }
        }
        out
    }

    /// The eleven module axioms.
    pub fn axioms(&self) -> Vec<CheckResult> {
        self.axioms_with(true)
    }

    /// The axioms, leaving out the two Hodge-layer checks unless `hodge`.
    pub fn axioms_with(&self, hodge: bool) -> Vec<CheckResult> {
        let n = self.n_axes();
        let mut res = Vec::new();
        let mut f = Vec::new();
        for a in 0..self.d.len() {
            for b in a..self.d.len() {
                for e in self.compose_equal(&self.d[a], &self.d[b], &self.d[b], &self.d[a], -1) {
                    f.push(format!("d{} d{} {e}", a + 1, b + 1));
                }
            }
        }
        res.push(CheckResult::new(AXIOM_NAMES[0], f));
        let mut f = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                for e in self.compose_equal(&self.l[a], &self.l[b], &self.l[b], &self.l[a], 1) {
                    f.push(format!("l{} l{} {e}", a + 1, b + 1));
                }
            }
        }
        res.push(CheckResult::new(AXIOM_NAMES[1], f));
        let mut f = Vec::new();
        for a in 0..n {
            for e in self.compose_equal(&self.l0, &self.l[a], &self.l[a], &self.l0, 1) {
                f.push(format!("l0 l{} {e}", a + 1));
            }
        }
        res.push(CheckResult::new(AXIOM_NAMES[2], f));
        let mut f = Vec::new();
        for a in 0..self.d.len() {
            for e in self.compose_equal(&self.l0, &self.d[a], &self.d[a], &self.l0, 1) {
                f.push(format!("l0 d{} {e}", a + 1));
            }
            for b in 0..n {
                for e in self.compose_equal(&self.l[b], &self.d[a], &self.d[a], &self.l[b], 1) {
                    f.push(format!("l{} d{} {e}", b + 1, a + 1));
                }
            }
        }
        res.push(CheckResult::new(AXIOM_NAMES[3], f));
        let mut f = Vec::new();
        for a in 0..n {
            f.extend(self.pairing_adjoint(&self.l[a], -1).into_iter().map(|e| format!("l{} {e}", a + 1)));
        }
        res.push(CheckResult::new(AXIOM_NAMES[4], f));
        res.push(CheckResult::new(AXIOM_NAMES[5], self.pairing_adjoint(&self.l0, -1)));
        let mut f = Vec::new();
        for a in 0..self.d.len() {
            f.extend(self.pairing_adjoint(&self.d[a], 1).into_iter().map(|e| format!("d{} {e}", a + 1)));
        }
        res.push(CheckResult::new(AXIOM_NAMES[6], f));
        let mut f = Vec::new();
        if let Some(p) = &self.pairing {
            for (g, b) in p {
                if (!self.dims.contains_key(g) || !self.dims.contains_key(&g.neg()))
                    && !b.is_zero() {
                        f.push(format!("nonzero block at {g} without partner"));
                    }
            }
            for g in self.dims.keys() {
                if !self.dims.contains_key(&g.neg()) {
                    f.push(format!("no complementary block for {g}"));
                }
            }
        }
        res.push(CheckResult::new(AXIOM_NAMES[7], f));
        let mut f = Vec::new();
        if self.pairing.is_some() {
            for g in self.dims.keys() {
                let lhs = self.pairing_block(&g.neg());
                let rhs = self.pairing_block(g).transpose();
                let rhs = if self.symmetry == 1 { rhs } else { -&rhs };
                if lhs != rhs {
                    f.push(format!("at {g}"));
                }
            }
        }
        res.push(CheckResult::new(AXIOM_NAMES[8], f));
        if !hodge {
            return res;
        }
        let mut f = self.filtration_shift_failures(&self.l0, "l0", 1);
        for a in 0..n {
            f.extend(self.filtration_shift_failures(&self.l[a], &format!("l{}", a + 1), -1));
        }
        for a in 0..self.d.len() {
            f.extend(self.filtration_shift_failures(&self.d[a], &format!("d{}", a + 1), 0));
        }
        res.push(CheckResult::new(AXIOM_NAMES[9], f));
        let mut f = Vec::new();
        if let (Some(h), Some(_)) = (&self.hodge, &self.pairing) {
            for (g, comps) in h {
                let s = to_qi(&self.pairing_block(g));
                let Some(other) = h.get(&g.neg()) else { continue };
                for c in comps {
                    for o in other {
                        if c.p + o.p > self.weight_offset {
                            let v = &(&c.basis.transpose() * &s) * &o.basis;
                            if !v.is_zero() {
                                f.push(format!("F^{} x F^{} at {g}", c.p, o.p));
                            }
                        }
                    }
                }
            }
        }
        res.push(CheckResult::new(AXIOM_NAMES[10], f));
        res
    }

    /// The Weil operator commutes with every raising operator and differential.
    pub fn weil_commutes(&self) -> CheckResult {
        let mut f = Vec::new();
        let mut maps: Vec<(String, &GradedMap<F>)> = vec![("l0".into(), &self.l0)];
        maps.extend(self.l.iter().enumerate().map(|(a, m)| (format!("l{}", a + 1), m)));
        maps.extend(self.d.iter().enumerate().map(|(a, m)| (format!("d{}", a + 1), m)));
        for (name, m) in maps {
            for g in self.dims.keys() {
                let t = g.add(&m.shift);
                let b = self.block(m, g);
                if &self.weil_block(&t) * &b != &b * &self.weil_block(g) {
                    f.push(format!("{name} at {g}"));
                }
            }
        }
        CheckResult::new("weil-operator-commutes", f)
    }

    /// `l^m: V^g ≅ V^{g+2m e_axis}` whenever `g_axis = -m < 0`.
    pub fn verify_lefschetz(&self) -> Vec<LefschetzFailure> {
        let mut out = Vec::new();
        for axis in self.axes() {
            let m = self.raising(axis);
            let mut seen = BTreeSet::new();
            for g in self.dims.keys() {
                let v = g.get(axis);
                if v == 0 {
                    continue;
                }
                let src = g.with(axis, -v.abs());
                if !seen.insert(src.clone()) {
                    continue;
                }
                let k = v.unsigned_abs() as usize;
                let p = self.power_block(m, &src, k);
                let (s, t) = (self.dim(&src), self.dim(&src.with(axis, v.abs())));
                let rank = p.rank();
                if !(s == t && rank == s) {
                    out.push(LefschetzFailure { axis: axis.name(), source: src, source_dim: s, target_dim: t, rank });
                }
            }
        }
        out
    }

    /// Joint kernels `V^g ∩ ker l0^{-g0+1} ∩ ⋂ ker l_a^{-g_a+1}` for `g ≤ 0`.
    pub fn primitive_decomposition(&self) -> Result<PrimitiveDecomposition<F>, HlError> {
        let fails = self.verify_lefschetz();
        if let Some(f) = fails.first() {
            return Err(HlError::NotLefschetz(format!("{} at {}", f.axis, f.source)));
        }
        let mut primitives = BTreeMap::new();
        let mut total = 0usize;
        for g in self.dims.keys() {
            if g.j0 > 0 || g.j.iter().any(|&x| x > 0) {
                continue;
            }
            let mut stacked = Matrix::zeros(0, self.dim(g));
            for axis in self.axes() {
                let k = (-g.get(axis)) as usize + 1;
                stacked = stacked.vstack(&self.power_block(self.raising(axis), g, k));
            }
            let p = stacked.kernel();
            let strings: usize = std::iter::once(g.j0).chain(g.j.iter().copied()).map(|x| (1 - x) as usize).product();
            total += p.cols() * strings;
            primitives.insert(g.clone(), p);
        }
        if total != self.total_dim() {
            return Err(HlError::NotLefschetz(format!("primitive strings span {total} of {} dimensions", self.total_dim())));
        }
        Ok(PrimitiveDecomposition { primitives })
    }

    /// Gram form `S(x̄, C l0^{j0} ∏ l_a^{j_a} y)` on each primitive space; must be positive definite.
    pub fn verify_polarization(&self) -> Result<Vec<PolarizationFailure>, HlError> {
        let prim = self.primitive_decomposition()?;
        let mut out = Vec::new();
        if self.pairing.is_none() {
            return Err(HlError::Malformed("no pairing".into()));
        }
        for (g, p) in &prim.primitives {
            if p.cols() == 0 {
                continue;
            }
            let mut img = p.clone();
            let mut cur = g.clone();
            for axis in self.axes() {
                let k = (-g.get(axis)) as usize;
                img = &self.power_block(self.raising(axis), &cur, k) * &img;
                cur = cur.with(axis, -g.get(axis));
            }
            let img = &self.weil_block(&cur) * &img;
            let gram = &(&p.conj().transpose() * &self.pairing_block(g)) * &img;
            match hermitian_definiteness(&gram) {
                Ok(Definiteness::PositiveDefinite) => {}
                Ok(d) => out.push(PolarizationFailure { grade: g.clone(), definiteness: Some(d) }),
                Err(_) => out.push(PolarizationFailure { grade: g.clone(), definiteness: None }),
            }
        }
        Ok(out)
    }

    /// Unique lowering operator `Λ` along `axis` with `[l, Λ] = H`.
    pub fn lowering(&self, axis: Axis) -> Result<GradedMap<F>, HlError> {
        let n = self.n_axes();
        let l = self.raising(axis);
        let mut out = GradedMap::new(Grade::unit(axis, n, -2));
        for h in self.dims.keys() {
            let s = h.get(axis);
            let dim = self.dim(h);
            let mut basis: Vec<Vec<F>> = Vec::new();
            let mut images: Vec<Vec<F>> = Vec::new();
            let mut m = s.abs();
            while basis.len() < dim {
                let g = h.with(axis, -m);
                if self.dim(&g) > 0 {
                    let p = self.power_block(l, &g, m as usize + 1).kernel();
                    let k = ((s + m) / 2) as usize;
                    let lk = self.power_block(l, &g, k);
                    let coef = F::from_i64(k as i64 * (m - k as i64 + 1));
                    let lk1 = if k > 0 { self.power_block(l, &g, k - 1) } else { Matrix::zeros(0, 0) };
                    for c in 0..p.cols() {
                        let v = p.column(c);
                        basis.push(lk.mul_vec(&v));
                        images.push(if k > 0 {
                            lk1.mul_vec(&v).into_iter().map(|x| x * coef.clone()).collect()
                        } else {
                            vec![F::zero(); self.dim(&h.with(axis, s - 2))]
                        });
                    }
                }
                m += 2;
                if m > s.abs() + 2 * (self.total_dim() as i64 + 1) {
                    break;
                }
            }
            let t = Matrix::from_columns(&basis, dim);
            let tinv = t.inverse().ok_or_else(|| HlError::NotLefschetz(format!("{} strings do not span {h}", axis.name())))?;
            let img = Matrix::from_columns(&images, self.dim(&h.with(axis, s - 2)));
            out.set(h.clone(), &img * &tinv);
        }
        // [l, Λ] = H on every block.
        for h in self.dims.keys() {
            let s = h.get(axis);
            let up = h.add(&l.shift);
            let down = h.add(&out.shift);
            let lhs = &self.block(l, &down) * &self.block(&out, h);
            let rhs = &self.block(&out, &up) * &self.block(l, h);
            if &lhs - &rhs != Matrix::scalar(self.dim(h), F::from_i64(s)) {
                return Err(HlError::NotLefschetz(format!("[l, Λ] != H along {} at {h}", axis.name())));
            }
        }
        Ok(out)
    }

    /// `w = exp(l) exp(-Λ) exp(l)` along `axis`, mapping `V^g → V^{g'}` with
    /// `g'_axis = -g_axis`.
    pub fn weil_element(&self, axis: Axis) -> Result<Reflection<F>, HlError> {
        let lower = self.lowering(axis)?;
        let l = self.raising(axis);
        let mut lines: BTreeMap<Grade, Vec<Grade>> = BTreeMap::new();
        for g in self.dims.keys() {
            lines.entry(g.with(axis, 0)).or_default().push(g.clone());
        }
        let mut blocks = BTreeMap::new();
        for grades in lines.values() {
            let mut offs = BTreeMap::new();
            let mut total = 0;
            for g in grades {
                offs.insert(g.clone(), total);
                total += self.dim(g);
            }
            let mut dl = Matrix::zeros(total, total);
            let mut dlow = Matrix::zeros(total, total);
            for g in grades {
                let up = g.add(&l.shift);
                if let Some(&o) = offs.get(&up) {
                    dl.set_block(o, offs[g], &self.block(l, g));
                }
                let down = g.add(&lower.shift);
                if let Some(&o) = offs.get(&down) {
                    dlow.set_block(o, offs[g], &self.block(&lower, g));
                }
            }
            let el = exp_nilpotent(&dl);
            let w = &(&el * &exp_nilpotent(&-&dlow)) * &el;
            for g in grades {
                let target = g.with(axis, -g.get(axis));
                for h in grades {
                    let b = w.block(offs[h], offs[g], self.dim(h), self.dim(g));
                    if *h == target {
                        blocks.insert(g.clone(), b);
                    } else if !b.is_zero() {
                        return Err(HlError::NotLefschetz(format!("Weil element along {} does not reflect {g}", axis.name())));
                    }
                }
                if !offs.contains_key(&target) {
                    return Err(HlError::NotLefschetz(format!("no block reflecting {g}")));
                }
            }
        }
        Ok(Reflection { axes: vec![axis], blocks })
    }

    /// Product of the Weil elements along all axes.
    pub fn total_weil_element(&self) -> Result<Reflection<F>, HlError> {
        let mut acc: Option<Reflection<F>> = None;
        for axis in self.axes() {
            let w = self.weil_element(axis)?;
            acc = Some(match acc {
                None => w,
                Some(prev) => {
                    let mut blocks = BTreeMap::new();
                    for (g, b) in &prev.blocks {
                        let mid = g.with(prev.axes[0], -g.get(prev.axes[0]));
                        let mid = prev.axes[1..].iter().fold(mid, |x, &a| x.with(a, -g.get(a)));
                        blocks.insert(g.clone(), &w.blocks[&mid] * b);
                    }
                    let mut axes = prev.axes.clone();
                    axes.push(axis);
                    Reflection { axes, blocks }
                }
            });
        }
        Ok(acc.expect("at least the l0 axis"))
    }

    /// Grades where `S(x̄, C w y)` fails to be positive definite on `V^g`.
    pub fn weil_positivity_failures(&self) -> Result<Vec<Grade>, HlError> {
        let w = self.total_weil_element()?;
        let mut out = Vec::new();
        for g in self.dims.keys() {
            let wb = &w.blocks[g];
            let ng = g.neg();
            let form = &(&self.pairing_block(g) * &self.weil_block(&ng)) * wb;
            if hermitian_definiteness(&form) != Ok(Definiteness::PositiveDefinite) {
                out.push(g.clone());
            }
        }
        Ok(out)
    }

    /// Full report: axioms, Lefschetz, polarization and Weil positivity.
    pub fn report(&self) -> ModuleReport {
        self.report_with(ReportOptions::FULL)
    }

    pub fn report_with(&self, opts: ReportOptions) -> ModuleReport {
        let axioms = self.axioms_with(opts.hodge);
        let lefschetz = self.verify_lefschetz();
        let polarization = if self.pairing.is_some() {
            match self.verify_polarization() {
                Ok(f) => f.into_iter().map(|x| format!("{} {:?}", x.grade, x.definiteness)).collect(),
                Err(e) => vec![e.to_string()],
            }
        } else {
            vec!["no pairing".into()]
        };
        let mut extra = vec![self.weil_commutes()];
        if opts.weil_element {
            let weil = match self.weil_positivity_failures() {
                Ok(f) => f.into_iter().map(|g| format!("at {g}")).collect(),
                Err(e) => vec![e.to_string()],
            };
            extra.push(CheckResult::new("weil-element-positivity", weil));
        }
        ModuleReport {
            axioms,
            lefschetz: CheckResult::new(
                "hard-lefschetz",
                lefschetz.iter().map(|f| format!("{} from {} ({} -> {}, rank {})", f.axis, f.source, f.source_dim, f.target_dim, f.rank)).collect(),
            ),
            polarization: CheckResult::new("primitive-positivity", polarization),
            extra,
        }
    }

    /// `H(V, d_B)` with `B` collapsed into one axis placed first, followed by
    /// the remaining axes in order; `l_B(c) = Σ c_b l_b`.
    pub fn cohomology_descent(&self, b: &[usize], c: &[F]) -> Result<HLModule<F>, HlError> {
        let mut out = self.cohomology_descent_samples(b, &[c.to_vec()], ReportOptions::FULL)?;
        Ok(out.pop().expect("one sample"))
    }

    /// [`Self::cohomology_descent`] for several coefficient vectors at once.
    /// Only `l_B(c) = Σ c_b l̄_b` depends on `c`; everything else is descended
    /// once. The Hodge-layer checks run on the first sample only, since the
    /// Hodge layer does not depend on `c`.
    pub fn cohomology_descent_samples(&self, b: &[usize], cs: &[Vec<F>], opts: ReportOptions) -> Result<Vec<HLModule<F>>, HlError> {
        for c in cs {
            if b.len() != c.len() {
                return Err(HlError::Malformed("one coefficient per collapsed axis".into()));
            }
            if c.iter().any(|x| x.real_sign() != Some(std::cmp::Ordering::Greater)) {
                return Err(HlError::NonPositiveWeights);
            }
        }
        let n = self.n_axes();
        if b.iter().any(|&x| x >= n) || self.d.len() != n {
            return Err(HlError::Malformed("collapsed axes need differentials".into()));
        }
        let bset: BTreeSet<usize> = b.iter().copied().collect();
        let rest: Vec<usize> = (0..n).filter(|a| !bset.contains(a)).collect();
        let collapse = |g: &Grade| -> Grade {
            let mut j = vec![bset.iter().map(|&a| g.j[a]).sum()];
            j.extend(rest.iter().map(|&a| g.j[a]));
            Grade { j0: g.j0, j }
        };
        let n2 = rest.len() + 1;
        let mut pieces: BTreeMap<Grade, Vec<(Grade, usize)>> = BTreeMap::new();
        for (g, &d) in &self.dims {
            pieces.entry(collapse(g)).or_default().push((g.clone(), d));
        }
        let piece_dim = |big: &Grade| -> usize { pieces.get(big).map_or(0, |v| v.iter().map(|x| x.1).sum()) };
        // Assembles a sum of homogeneous operators with a common collapsed shift.
        let assemble = |ops: &[(&GradedMap<F>, F)], src: &Grade, shift: &Grade| -> Matrix<F> {
            let tgt = src.add(shift);
            let mut m = Matrix::zeros(piece_dim(&tgt), piece_dim(src));
            let (Some(sp), Some(tp)) = (pieces.get(src), pieces.get(&tgt)) else { return m };
            let mut col = 0;
            for (g, dg) in sp {
                for (op, coef) in ops {
                    let t = g.add(&op.shift);
                    let mut row = 0;
                    for (h, dh) in tp {
                        if *h == t {
                            m.add_block(row, col, &self.block(op, g).scale(coef));
                        }
                        row += dh;
                    }
                }
                col += dg;
            }
            m
        };
        let dshift = Grade { j0: 1, j: std::iter::once(1).chain(std::iter::repeat_n(0, rest.len())).collect() };
        let d_ops: Vec<(&GradedMap<F>, F)> = b.iter().map(|&a| (&self.d[a], F::one())).collect();
        let mut sq: BTreeMap<Grade, Subquotient<F>> = BTreeMap::new();
        for big in pieces.keys() {
            let out = assemble(&d_ops, big, &dshift);
            let prev = big.add(&dshift.neg());
            let inc = assemble(&d_ops, &prev, &dshift);
            let z = Subspace::from_columns(&out.kernel());
            let bd = Subspace::from_columns(&inc);
            let q = Subquotient::new(z, bd).map_err(|e| HlError::DescentAxiomFailure(vec![format!("d_B^2 != 0 at {big}: {e}")]))?;
            sq.insert(big.clone(), q);
        }
        let mut labels = vec![b.iter().map(|&a| self.labels[a].clone()).collect::<Vec<_>>().join("+")];
        labels.extend(rest.iter().map(|&a| self.labels[a].clone()));
        let dims: BTreeMap<Grade, usize> = sq.iter().map(|(g, q)| (g.clone(), q.dim())).collect();
        let mut out = HLModule::new(labels, dims, self.weight_offset, self.symmetry, true);
        let mut errors = Vec::new();
        let descend = |ops: &[(&GradedMap<F>, F)], shift: &Grade, name: &str, errors: &mut Vec<String>| -> GradedMap<F> {
            let mut gm = GradedMap::new(shift.clone());
            for (big, q) in &sq {
                let tgt = big.add(shift);
                let Some(tq) = sq.get(&tgt) else { continue };
                if q.dim() == 0 || tq.dim() == 0 {
                    continue;
                }
                let m = assemble(ops, big, shift);
                match crate::linalg::subquotient_map(&m, q, tq) {
                    Ok(x) => gm.set(big.clone(), x),
                    Err(e) => errors.push(format!("{name} at {big}: {e}")),
                }
            }
            gm
        };
        out.l0 = descend(&[(&self.l0, F::one())], &Grade::unit(Axis::Zero, n2, 2), "l0", &mut errors);
        let lb_shift = Grade::unit(Axis::A(0), n2, 2);
        let lb_parts: Vec<GradedMap<F>> =
            b.iter().map(|&a| descend(&[(&self.l[a], F::one())], &lb_shift, &format!("l{}", a + 1), &mut errors)).collect();
        let mut ls = vec![GradedMap::new(lb_shift.clone())];
        let mut ds = vec![GradedMap::new(dshift.clone())];
        for (i, &a) in rest.iter().enumerate() {
            ls.push(descend(&[(&self.l[a], F::one())], &Grade::unit(Axis::A(i + 1), n2, 2), &format!("l{}", a + 1), &mut errors));
            let sh = Grade::unit(Axis::A(i + 1), n2, 1).add(&Grade::unit(Axis::Zero, n2, 1));
            ds.push(descend(&[(&self.d[a], F::one())], &sh, &format!("d{}", a + 1), &mut errors));
        }
        out.l = ls;
        out.d = ds;
        for (big, q) in &sq {
            if q.dim() == 0 {
                continue;
            }
            let cm = {
                let mut m = Matrix::zeros(piece_dim(big), piece_dim(big));
                let mut off = 0;
                for (g, dg) in &pieces[big] {
                    m.set_block(off, off, &self.weil_block(g));
                    off += dg;
                }
                m
            };
            match crate::linalg::subquotient_map(&cm, q, q) {
                Ok(x) => {
                    out.weil.insert(big.clone(), x);
                }
                Err(e) => errors.push(format!("Weil operator at {big}: {e}")),
            }
        }
        if self.pairing.is_some() {
            let mut pm = BTreeMap::new();
            for (big, q) in &sq {
                let neg = big.neg();
                let Some(nq) = sq.get(&neg) else { continue };
                if q.dim() == 0 || nq.dim() == 0 {
                    continue;
                }
                let mut s = Matrix::zeros(piece_dim(big), piece_dim(&neg));
                let mut row = 0;
                for (g, dg) in &pieces[big] {
                    let mut col = 0;
                    for (h, dh) in &pieces[&neg] {
                        if *h == g.neg() {
                            s.set_block(row, col, &self.pairing_block(g));
                        }
                        col += dh;
                    }
                    row += dg;
                }
                pm.insert(big.clone(), &(&q.reps.transpose() * &s) * &nq.reps);
            }
            out.pairing = Some(pm);
        }
        if let Some(h) = &self.hodge {
            let mut hm = BTreeMap::new();
            for (big, q) in &sq {
                if q.dim() == 0 {
                    continue;
                }
                let dim = piece_dim(big);
                let mut comps: BTreeMap<(i64, i64), Vec<Vec<Qi>>> = BTreeMap::new();
                let mut off = 0;
                for (g, dg) in &pieces[big] {
                    for c in h.get(g).map(|v| v.as_slice()).unwrap_or(&[]) {
                        let e = comps.entry((c.p, c.q)).or_default();
                        for j in 0..c.basis.cols() {
                            let mut v = vec![Qi::from_i64(0); dim];
                            for (r, x) in c.basis.column(j).into_iter().enumerate() {
                                v[off + r] = x;
                            }
                            e.push(v);
                        }
                    }
                    off += dg;
                }
                let qq = Subquotient::<Qi>::with_reps(
                    Subspace::from_columns(&to_qi(&q.outer.basis())),
                    Subspace::from_columns(&to_qi(&q.inner.basis())),
                    to_qi(&q.reps),
                );
                let Ok(qq) = qq else {
                    errors.push(format!("Hodge layer at {big}"));
                    continue;
                };
                let mut list = Vec::new();
                for ((p, qv), vs) in comps {
                    let proj = qq.project_subspace(&Subspace::from_vectors(&vs, dim));
                    if proj.dim() > 0 {
                        list.push(HodgeComponent { p, q: qv, basis: proj.basis() });
                    }
                }
                hm.insert(big.clone(), list);
            }
            out.hodge = Some(hm);
        }
        if !errors.is_empty() {
            return Err(HlError::DescentAxiomFailure(errors));
        }
        out.dims.retain(|_, d| *d > 0);
        let mut modules = Vec::new();
        for (s, c) in cs.iter().enumerate() {
            let mut m = out.clone();
            let mut lb = GradedMap::new(lb_shift.clone());
            for (part, x) in lb_parts.iter().zip(c) {
                for (g, blk) in &part.blocks {
                    lb.add_to(g.clone(), &blk.scale(x));
                }
            }
            m.l[0] = lb;
            m.validate_structure().map_err(|e| HlError::DescentAxiomFailure(vec![e.to_string()]))?;
            let rep = m.report_with(ReportOptions { hodge: opts.hodge && s == 0, ..opts });
            let fails = rep.failures();
            if !fails.is_empty() {
                return Err(HlError::DescentAxiomFailure(fails));
            }
            modules.push(m);
        }
        Ok(modules)
    }
}

/// Which optional checks a report runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReportOptions {
    /// The Hodge-layer axioms.
    pub hodge: bool,
    /// Positivity through the Weil element, besides primitive positivity.
    pub weil_element: bool,
}

impl ReportOptions {
    pub const FULL: ReportOptions = ReportOptions { hodge: true, weil_element: true };
}

/// All checks on a module.
#[derive(Debug, Clone, Serialize)]
pub struct ModuleReport {
    pub axioms: Vec<CheckResult>,
    pub lefschetz: CheckResult,
    pub polarization: CheckResult,
    pub extra: Vec<CheckResult>,
}

impl ModuleReport {
    pub fn passed(&self) -> bool {
        self.failures().is_empty()
    }
    pub fn failures(&self) -> Vec<String> {
        self.axioms
            .iter()
            .chain([&self.lefschetz, &self.polarization])
            .chain(&self.extra)
            .filter(|c| !c.holds)
            .map(|c| format!("{}: {}", c.name, c.failures.join(", ")))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Q;

    fn q(n: i64) -> Q {
        Q::from_i64(n)
    }

    /// `V^{-1} = V^{1} = Q` along one axis, `l` given.
    fn two_dim(lv: i64, s: i64) -> HLModule<Q> {
        let g0 = Grade::new(0, vec![-1]);
        let g1 = Grade::new(0, vec![1]);
        let dims = BTreeMap::from([(g0.clone(), 1), (g1.clone(), 1)]);
        let mut m = HLModule::new(vec!["a".into()], dims, 1, -1, false);
        m.l[0].set(g0.clone(), Matrix::from_i64(&[&[lv]]));
        m.pairing = Some(BTreeMap::from([(g0, Matrix::from_i64(&[&[s]])), (g1, Matrix::from_i64(&[&[-s]]))]));
        m
    }

    #[test]
    fn lefschetz_pass_and_fail() {
        assert!(two_dim(1, 1).verify_lefschetz().is_empty());
        let f = two_dim(0, 1).verify_lefschetz();
        assert_eq!(f.len(), 1);
        assert_eq!(f[0].source, Grade::new(0, vec![-1]));
    }

    #[test]
    fn weil_element_on_two_dim() {
        let m = two_dim(1, 1);
        let w = m.weil_element(Axis::A(0)).unwrap();
        let g0 = Grade::new(0, vec![-1]);
        let g1 = Grade::new(0, vec![1]);
        assert_eq!(w.blocks[&g0], Matrix::from_i64(&[&[1]]));
        assert_eq!(w.blocks[&g1], Matrix::from_i64(&[&[-1]]));
    }

    #[test]
    fn polarization_sign() {
        // S(v, l v) = s on the primitive v.
        assert!(two_dim(1, 1).verify_polarization().unwrap().is_empty());
        assert_eq!(two_dim(1, -1).verify_polarization().unwrap().len(), 1);
        assert!(two_dim(1, 1).axioms().iter().all(|c| c.holds));
        assert!(two_dim(1, 1).weil_positivity_failures().unwrap().is_empty());
    }

    #[test]
    fn one_dim_positive() {
        let g = Grade::new(0, vec![]);
        let mut m = HLModule::<Q>::new(vec![], BTreeMap::from([(g.clone(), 1)]), 0, 1, false);
        m.pairing = Some(BTreeMap::from([(g.clone(), Matrix::from_rows(vec![vec![q(1)]], 1))]));
        assert!(m.verify_polarization().unwrap().is_empty());
        m.pairing = Some(BTreeMap::from([(g, Matrix::from_rows(vec![vec![q(-1)]], 1))]));
        assert_eq!(m.verify_polarization().unwrap().len(), 1);
    }

    #[test]
    fn irreducible_three_dim() {
        let gs: Vec<Grade> = [-2, 0, 2].iter().map(|&x| Grade::new(0, vec![x])).collect();
        let dims = gs.iter().map(|g| (g.clone(), 1)).collect();
        let mut m = HLModule::<Q>::new(vec!["a".into()], dims, 0, 1, false);
        m.l[0].set(gs[0].clone(), Matrix::from_i64(&[&[1]]));
        m.l[0].set(gs[1].clone(), Matrix::from_i64(&[&[1]]));
        let p = m.primitive_decomposition().unwrap();
        assert_eq!(p.multiplicities(), BTreeMap::from([(gs[0].clone(), 1)]));
        let w = m.weil_element(Axis::A(0)).unwrap();
        // w^2 = (-1)^{j} = +1 on even weights.
        for g in &gs {
            let t = g.with(Axis::A(0), -g.j[0]);
            assert_eq!(&w.blocks[&t] * &w.blocks[g], Matrix::identity(1));
        }
    }
}
