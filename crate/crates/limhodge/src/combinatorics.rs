//! Partitioned alphabets, exterior algebra signs, the products `χ` and `χ̄`,
//! Koszul stalks and the finite stalk model of the complex `A`.
//!
//! Subsets of `Λ` are bitmasks: bit `i` is the `i`-th letter in the fixed
//! total order. The generator of `ε(λ̄)` is the wedge of its letters in
//! increasing order.

use std::collections::{BTreeMap, HashMap};

use crate::field::Field;
use crate::filtration::{convolve, Direction, FilteredComplex, Filtration, FiltrationError};
use crate::linalg::{Matrix, Subquotient, Subspace};

/// Largest supported alphabet.
pub const MAX_LETTERS: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CombinatoricsError {
    #[error("generator e_{generator} is not sent to a sum of distinct letters: {reason}")]
    NotSemistable { generator: usize, reason: String },
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("alphabet too large: {0} letters")]
    TooLarge(usize),
}

pub fn popcount(s: u32) -> usize {
    s.count_ones() as usize
}

/// Letters of `s` in increasing order.
pub fn letters(s: u32) -> impl Iterator<Item = usize> {
    (0..32).filter(move |&i| s & (1 << i) != 0)
}

/// Sign of `gen(a) ∧ gen(b)` relative to `gen(a ∪ b)`, or 0 if they overlap.
pub fn wedge_sign(a: u32, b: u32) -> i64 {
    if a & b != 0 {
        return 0;
    }
    let inversions: usize = letters(b).map(|y| popcount(a & !((2u32 << y) - 1))).sum();
    if inversions.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// `(e_λ∧)^{-1}` on `gen(s)`: the sign `c` with `gen(s) = c · e_λ ∧ gen(s ∖ λ)`.
pub fn contraction_sign(letter: usize, s: u32) -> i64 {
    debug_assert!(s & (1 << letter) != 0);
    wedge_sign(1 << letter, s & !(1 << letter))
}

/// A finite ordered alphabet with a partition into `k` nonempty parts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionedAlphabet {
    labels: Vec<String>,
    part_of: Vec<usize>,
    parts: Vec<u32>,
}

impl PartitionedAlphabet {
    /// Parts listed in order; the concatenation gives the total order.
    pub fn from_parts(parts: &[Vec<String>]) -> Result<Self, CombinatoricsError> {
        let mut labels = Vec::new();
        let mut part_of = Vec::new();
        for (i, p) in parts.iter().enumerate() {
            if p.is_empty() {
                return Err(CombinatoricsError::NotSemistable { generator: i + 1, reason: "empty part".into() });
            }
            for l in p {
                if labels.contains(l) {
                    return Err(CombinatoricsError::NotSemistable {
                        generator: i + 1,
                        reason: format!("letter {l:?} occurs twice"),
                    });
                }
                labels.push(l.clone());
                part_of.push(i);
            }
        }
        Self::new(labels, part_of, parts.len())
    }

    /// Parts of the given sizes with letters `a, b, c, ...`.
    pub fn with_sizes(sizes: &[usize]) -> Result<Self, CombinatoricsError> {
        let mut next = 0;
        let parts: Vec<Vec<String>> = sizes
            .iter()
            .map(|&s| {
                (0..s)
                    .map(|_| {
                        next += 1;
                        letter_name(next - 1)
                    })
                    .collect()
            })
            .collect();
        Self::from_parts(&parts)
    }

    fn new(labels: Vec<String>, part_of: Vec<usize>, k: usize) -> Result<Self, CombinatoricsError> {
        if labels.len() > MAX_LETTERS {
            return Err(CombinatoricsError::TooLarge(labels.len()));
        }
        let mut parts = vec![0u32; k];
        for (l, &i) in part_of.iter().enumerate() {
            parts[i] |= 1 << l;
        }
        Ok(PartitionedAlphabet { labels, part_of, parts })
    }

    pub fn k(&self) -> usize {
        self.parts.len()
    }
    pub fn len(&self) -> usize {
        self.labels.len()
    }
    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
    pub fn labels(&self) -> &[String] {
        &self.labels
    }
    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }
    pub fn index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
    pub fn part_of(&self, letter: usize) -> usize {
        self.part_of[letter]
    }
    /// `Λ_i` as a mask (`i` is 0-based).
    pub fn part(&self, i: usize) -> u32 {
        self.parts[i]
    }
    pub fn parts(&self) -> &[u32] {
        &self.parts
    }
    pub fn all(&self) -> u32 {
        mask_below(self.len())
    }
    /// `Λ_I` for a set `I` of directions given as a mask.
    pub fn parts_mask(&self, dirs: u32) -> u32 {
        letters(dirs).filter(|&i| i < self.k()).fold(0, |acc, i| acc | self.parts[i])
    }
    /// `r(λ̄)_i = |λ̄ ∩ Λ_i|`.
    pub fn r(&self, s: u32) -> Vec<usize> {
        self.parts.iter().map(|&p| popcount(s & p)).collect()
    }
    /// Mask of a list of labels.
    pub fn subset(&self, labels: &[String]) -> Option<u32> {
        labels.iter().try_fold(0u32, |acc, l| self.index(l).map(|i| acc | (1 << i)))
    }
    pub fn subset_labels(&self, s: u32) -> Vec<String> {
        letters(s).map(|i| self.labels[i].clone()).collect()
    }
    /// `S_r(Λ)`: subsets with `|λ̄ ∩ Λ_i| = r_i`.
    pub fn s_r(&self, r: &[usize]) -> Vec<u32> {
        (0..=self.all()).filter(|&s| self.r(s) == r).collect()
    }
    /// All subsets meeting every part.
    pub fn strata(&self) -> Vec<u32> {
        (0..=self.all()).filter(|&s| self.r(s).iter().all(|&x| x > 0)).collect()
    }
}

pub fn mask_below(n: usize) -> u32 {
    if n >= 32 {
        u32::MAX
    } else {
        (1u32 << n) - 1
    }
}

pub fn letter_name(i: usize) -> String {
    let base = (b'a' + (i % 26) as u8) as char;
    if i < 26 {
        base.to_string()
    } else {
        format!("{base}{}", i / 26)
    }
}

/// Recovers the partition from `φ(e_i)`, given as coefficient vectors over `Λ`.
pub fn semistable_check(labels: &[String], phi: &[Vec<i64>]) -> Result<PartitionedAlphabet, CombinatoricsError> {
    let mut part_of = vec![usize::MAX; labels.len()];
    for (i, v) in phi.iter().enumerate() {
        if v.len() != labels.len() {
            return Err(CombinatoricsError::NotSemistable { generator: i + 1, reason: "wrong length".into() });
        }
        if v.iter().all(|&c| c == 0) {
            return Err(CombinatoricsError::NotSemistable { generator: i + 1, reason: "image is zero".into() });
        }
        for (l, &c) in v.iter().enumerate() {
            match c {
                0 => {}
                1 if part_of[l] == usize::MAX => part_of[l] = i,
                1 => {
                    return Err(CombinatoricsError::NotSemistable {
                        generator: i + 1,
                        reason: format!("letter {:?} is shared with e_{}", labels[l], part_of[l] + 1),
                    })
                }
                c => {
                    return Err(CombinatoricsError::NotSemistable {
                        generator: i + 1,
                        reason: format!("coefficient {c} on {:?}", labels[l]),
                    })
                }
            }
        }
    }
    if let Some(l) = part_of.iter().position(|&p| p == usize::MAX) {
        return Err(CombinatoricsError::NotSemistable { generator: 0, reason: format!("letter {:?} is not hit", labels[l]) });
    }
    PartitionedAlphabet::new(labels.to_vec(), part_of, phi.len())
}

/// The canonical form `(e_λ, e_μ) = δ_{λμ}` on `Z^Λ`.
pub fn canonical_pairing<F: Field>(alpha: &PartitionedAlphabet) -> Matrix<F> {
    Matrix::identity(alpha.len())
}

/// `coeff · gen(subset)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonElement<F> {
    pub subset: u32,
    pub coeff: F,
}

/// An element of `⋀Z^Λ ⊗ F` by its `ε(λ̄)` components.
pub type Exterior<F> = BTreeMap<u32, F>;

fn add_term<F: Field>(out: &mut Exterior<F>, s: u32, c: F) {
    if c.is_negligible() {
        return;
    }
    let e = out.entry(s).or_insert_with(F::zero);
    *e = e.clone() + c;
    if e.is_negligible() {
        out.remove(&s);
    }
}

/// `χ(v ⊗ w) = v ∧ w`.
pub fn chi<F: Field>(v: &EpsilonElement<F>, w: &EpsilonElement<F>) -> EpsilonElement<F> {
    let s = wedge_sign(v.subset, w.subset);
    EpsilonElement { subset: v.subset | w.subset, coeff: F::from_i64(s) * v.coeff.clone() * w.coeff.clone() }
}

/// Bilinear extension of `χ`.
pub fn wedge<F: Field>(v: &Exterior<F>, w: &Exterior<F>) -> Exterior<F> {
    let mut out = Exterior::new();
    for (&a, x) in v {
        for (&b, y) in w {
            let s = wedge_sign(a, b);
            if s != 0 {
                add_term(&mut out, a | b, F::from_i64(s) * x.clone() * y.clone());
            }
        }
    }
    out
}

/// Sign and support of `χ̄(gen a ⊗ gen b)` for the given part masks, or
/// `None` when some part meets `a ∩ b` in other than one letter.
pub fn chibar_basis(parts: &[u32], a: u32, b: u32) -> Option<(u32, i64)> {
    let shared = a & b;
    if parts.iter().any(|&p| popcount(shared & p) != 1) {
        return None;
    }
    let mut rest = b;
    let mut sign = 1;
    for &p in parts {
        let l = (shared & p).trailing_zeros() as usize;
        sign *= contraction_sign(l, rest);
        rest &= !(1 << l);
    }
    let s = wedge_sign(a, rest);
    (s != 0).then_some((a | rest, sign * s))
}

/// `χ̄(v ⊗ w)`: contract the letters shared in each part out of `w`, then wedge.
pub fn chibar<F: Field>(alpha: &PartitionedAlphabet, v: &EpsilonElement<F>, w: &EpsilonElement<F>) -> Exterior<F> {
    let mut out = Exterior::new();
    if let Some((s, sign)) = chibar_basis(alpha.parts(), v.subset, w.subset) {
        add_term(&mut out, s, F::from_i64(sign) * v.coeff.clone() * w.coeff.clone());
    }
    out
}

/// Bilinear extension of `χ̄` for arbitrary part masks.
pub fn chibar_ext<F: Field>(parts: &[u32], v: &Exterior<F>, w: &Exterior<F>) -> Exterior<F> {
    let mut out = Exterior::new();
    for (&a, x) in v {
        for (&b, y) in w {
            if let Some((s, sign)) = chibar_basis(parts, a, b) {
                add_term(&mut out, s, F::from_i64(sign) * x.clone() * y.clone());
            }
        }
    }
    out
}

/// Projection `⋀Z^Λ → ⋀Z^Γ` induced by `Z^Λ → Z^Γ`.
pub fn restrict<F: Field>(v: &Exterior<F>, gamma: u32) -> Exterior<F> {
    v.iter().filter(|(&s, _)| s & !gamma == 0).map(|(&s, c)| (s, c.clone())).collect()
}

/// `⋀Q^Λ` with zero differential, the operators `t_i∧` and filtrations `W(I)`.
/// Basis: all subsets, indexed by mask.
#[derive(Debug, Clone)]
pub struct KoszulStalk {
    pub alphabet: PartitionedAlphabet,
}

impl KoszulStalk {
    pub fn new(alphabet: PartitionedAlphabet) -> Self {
        KoszulStalk { alphabet }
    }
    pub fn dim(&self) -> usize {
        1 << self.alphabet.len()
    }
    pub fn degree(&self, s: u32) -> usize {
        popcount(s)
    }
    /// `t_i∧ = Σ_{λ ∈ Λ_i} e_λ∧`.
    pub fn t<F: Field>(&self, i: usize) -> Matrix<F> {
        let n = self.dim();
        let mut m = Matrix::zeros(n, n);
        for s in 0..n as u32 {
            for l in letters(self.alphabet.part(i) & !s) {
                m.set((s | (1 << l)) as usize, s as usize, F::from_i64(wedge_sign(1 << l, s)));
            }
        }
        m
    }
    /// `W(I)_m = span{ε(λ̄) : |λ̄ ∩ Λ_I| ≤ m}`.
    pub fn w<F: Field>(&self, dirs: u32) -> Filtration<F> {
        let li = self.alphabet.parts_mask(dirs);
        let weights: Vec<i64> = (0..self.dim() as u32).map(|s| popcount(s & li) as i64).collect();
        Filtration::from_weights(&weights, Direction::Increasing)
    }
}

/// A basis vector `u^q ⊗ gen(λ̄)` of the stalk model.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ABasis {
    pub q: Vec<usize>,
    pub subset: u32,
}

/// Name under which `L(I)` is registered; `I` is a 0-based mask.
pub fn l_name(dirs: u32) -> String {
    let list: Vec<String> = letters(dirs).map(|i| (i + 1).to_string()).collect();
    format!("L({})", list.join(","))
}

/// The stalk model: `⊕_q u^q ⊗ ⋀Q^Λ / Σ_i W(i)_{q_i}` shifted by `[k]`, with
/// `d = Σ_i u_i ⊗ t_i∧`, filtrations `L(I)`, `L`, `F` and operators `ν_i`.
#[derive(Debug, Clone)]
pub struct LocalComplexA<F> {
    pub alphabet: PartitionedAlphabet,
    /// Basis per degree, starting at degree 0.
    pub basis: Vec<Vec<ABasis>>,
    index: HashMap<ABasis, (usize, usize)>,
    pub complex: FilteredComplex<F>,
    /// `d_i` per direction and degree.
    pub d_parts: Vec<Vec<Matrix<F>>>,
    /// `ν_i` per direction and degree.
    pub nu: Vec<Vec<Matrix<F>>>,
}

/// Whether `u^q ⊗ gen(s)` is nonzero in the quotient.
pub fn a_admissible(alpha: &PartitionedAlphabet, q: &[usize], s: u32) -> bool {
    alpha.r(s).iter().zip(q).all(|(&r, &qi)| r > qi)
}

/// All exponent vectors `q` with `q_i < |Λ_i|`.
pub fn a_exponents(alpha: &PartitionedAlphabet) -> Vec<Vec<usize>> {
    let bounds: Vec<usize> = alpha.parts().iter().map(|&p| popcount(p)).collect();
    let mut out = vec![vec![]];
    for &b in &bounds {
        out = out.into_iter().flat_map(|q: Vec<usize>| (0..b).map(move |x| [q.clone(), vec![x]].concat())).collect();
    }
    out
}

impl<F: Field> LocalComplexA<F> {
    pub fn build(alpha: &PartitionedAlphabet) -> Result<Self, FiltrationError> {
        let k = alpha.k();
        let n = alpha.len();
        let top = n - k;
        let mut basis: Vec<Vec<ABasis>> = vec![Vec::new(); top + 1];
        for q in a_exponents(alpha) {
            for s in 0..=alpha.all() {
                if a_admissible(alpha, &q, s) {
                    basis[popcount(s) - k].push(ABasis { q: q.clone(), subset: s });
                }
            }
        }
        for b in &mut basis {
            b.sort();
        }
        let index: HashMap<ABasis, (usize, usize)> = basis
            .iter()
            .enumerate()
            .flat_map(|(deg, bs)| bs.iter().enumerate().map(move |(j, b)| (b.clone(), (deg, j))))
            .collect();
        let dims: Vec<usize> = basis.iter().map(|b| b.len()).collect();
        let mut d_parts = Vec::new();
        let mut nu = Vec::new();
        for i in 0..k {
            let mut di = Vec::new();
            let mut ni = Vec::new();
            for deg in 0..=top {
                let mut m = Matrix::zeros(*dims.get(deg + 1).unwrap_or(&0), dims[deg]);
                let mut nm = Matrix::zeros(dims[deg], dims[deg]);
                for (j, b) in basis[deg].iter().enumerate() {
                    let mut q = b.q.clone();
                    q[i] += 1;
                    for l in letters(alpha.part(i) & !b.subset) {
                        let t = ABasis { q: q.clone(), subset: b.subset | (1 << l) };
                        if let Some(&(_, row)) = index.get(&t) {
                            m.set(row, j, F::from_i64(wedge_sign(1 << l, b.subset)));
                        }
                    }
                    if let Some(&(_, row)) = index.get(&ABasis { q: q.clone(), subset: b.subset }) {
                        nm.set(row, j, F::one());
                    }
                }
                if deg < top {
                    di.push(m);
                }
                ni.push(nm);
            }
            d_parts.push(di);
            nu.push(ni);
        }
        let d: Vec<Matrix<F>> = (0..top)
            .map(|deg| {
                let mut acc = Matrix::zeros(dims[deg + 1], dims[deg]);
                for di in &d_parts {
                    acc = &acc + &di[deg];
                }
                acc
            })
            .collect();
        let mut complex = FilteredComplex::new(0, dims, d)?;
        for dirs in 0..(1u32 << k) {
            let levels = basis
                .iter()
                .map(|bs| {
                    let w: Vec<i64> = bs.iter().map(|b| l_weight(alpha, dirs, b)).collect();
                    Filtration::from_weights(&w, Direction::Increasing)
                })
                .collect();
            complex.add_filtration(&l_name(dirs), levels)?;
        }
        let all = mask_below(k);
        let l_levels = complex.levels(&l_name(all))?.to_vec();
        complex.add_filtration("L", l_levels)?;
        let f_levels = basis
            .iter()
            .enumerate()
            .map(|(deg, bs)| {
                let w: Vec<i64> = bs.iter().map(|b| deg as i64 - b.q.iter().sum::<usize>() as i64).collect();
                Filtration::from_weights(&w, Direction::Decreasing)
            })
            .collect();
        complex.add_filtration("F", f_levels)?;
        Ok(LocalComplexA { alphabet: alpha.clone(), basis, index, complex, d_parts, nu })
    }

    pub fn k(&self) -> usize {
        self.alphabet.k()
    }

    pub fn total_dim(&self) -> usize {
        self.basis.iter().map(|b| b.len()).sum()
    }

    /// (degree, position) of a basis vector.
    pub fn position(&self, b: &ABasis) -> Option<(usize, usize)> {
        self.index.get(b).copied()
    }

    /// `d_i d_j + d_j d_i = 0` and `ν_i ν_j = ν_j ν_i` in every degree.
    pub fn check_commutation(&self) -> bool {
        let k = self.k();
        for i in 0..k {
            for j in 0..k {
                for deg in 0..self.d_parts[i].len().saturating_sub(1) {
                    let s = &(&self.d_parts[i][deg + 1] * &self.d_parts[j][deg]) + &(&self.d_parts[j][deg + 1] * &self.d_parts[i][deg]);
                    if !s.is_zero() {
                        return false;
                    }
                }
                for deg in 0..self.nu[i].len() {
                    if &self.nu[i][deg] * &self.nu[j][deg] != &self.nu[j][deg] * &self.nu[i][deg] {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// `ν_i L(I)_m ⊆ L(I)_{m-2}` for `i ∈ I`, `⊆ L(I)_m` otherwise, and
    /// `ν_i F^p ⊆ F^{p-1}`.
    pub fn check_nu_shifts(&self) -> bool {
        let k = self.k();
        for i in 0..k {
            for dirs in 0..(1u32 << k) {
                let levels = self.complex.levels(&l_name(dirs)).expect("registered");
                // An increasing shift by -2 is a decreasing shift by +2.
                let shift = if dirs & (1 << i) != 0 { 2 } else { 0 };
                for (deg, f) in levels.iter().enumerate() {
                    if !f.maps_into(&self.nu[i][deg], f, shift) {
                        return false;
                    }
                }
            }
            let fl = self.complex.levels("F").expect("registered");
            for (deg, f) in fl.iter().enumerate() {
                if !f.maps_into(&self.nu[i][deg], f, -1) {
                    return false;
                }
            }
        }
        true
    }

    /// `L = L(I) ∗ L(J)` degreewise, `J` the complement of `I`.
    pub fn verify_convolution_identity(&self, dirs: u32) -> bool {
        let all = mask_below(self.k());
        let li = self.complex.levels(&l_name(dirs & all)).expect("registered");
        let lj = self.complex.levels(&l_name(all & !dirs)).expect("registered");
        let l = self.complex.levels("L").expect("registered");
        (0..l.len()).all(|deg| convolve(&li[deg], &lj[deg]).map(|c| c == l[deg]).unwrap_or(false))
    }
}

/// `L(I)` weight of `u^q ⊗ gen(λ̄)`: `|λ̄ ∩ Λ_I| - 2|q_I| - |I|`.
pub fn l_weight(alpha: &PartitionedAlphabet, dirs: u32, b: &ABasis) -> i64 {
    let li = alpha.parts_mask(dirs);
    let qi: usize = letters(dirs).filter(|&i| i < alpha.k()).map(|i| b.q[i]).sum();
    popcount(b.subset & li) as i64 - 2 * qi as i64 - popcount(dirs & mask_below(alpha.k())) as i64
}

/// Fiber of the stalk model at `q`: subsets `λ̄` with `r(λ̄) ≥ q + e`.
pub fn fiber_basis(alpha: &PartitionedAlphabet, q: &[usize]) -> Vec<u32> {
    (0..=alpha.all()).filter(|&s| a_admissible(alpha, q, s)).collect()
}

/// Target basis of a residue: pairs `(μ̄, ν̄)` with `μ̄ ∈ S_r` along the
/// directions `dirs` (so `μ̄ ⊆ Λ_I`) and `ν̄ ⊆ Λ ∖ μ̄`.
pub fn residue_target(alpha: &PartitionedAlphabet, dirs: u32, r: &[usize]) -> Vec<(u32, u32)> {
    let li = alpha.parts_mask(dirs);
    let mut out = Vec::new();
    for mu in 0..=alpha.all() {
        if mu & !li != 0 {
            continue;
        }
        let rm = alpha.r(mu);
        if letters(dirs).filter(|&i| i < alpha.k()).any(|i| rm[i] != r[i]) {
            continue;
        }
        for nu in 0..=alpha.all() {
            if nu & mu == 0 {
                out.push((mu, nu));
            }
        }
    }
    out
}

/// Residue along the directions `dirs` at index `r`, on the fiber at `q`:
/// `gen(λ̄) ↦ Σ_{μ̄ ⊆ λ̄, μ̄ ∈ S_r} χ(μ̄, λ̄∖μ̄)^{-1} gen(λ̄)`.
/// Requires `r_i ≥ q_i + 1` for `i ∈ I`.
pub fn partial_residue<F: Field>(
    alpha: &PartitionedAlphabet,
    q: &[usize],
    dirs: u32,
    r: &[usize],
) -> Result<(Matrix<F>, Vec<(u32, u32)>), CombinatoricsError> {
    let k = alpha.k();
    if q.len() != k || r.len() != k {
        return Err(CombinatoricsError::IndexOutOfRange("q and r must have length k".into()));
    }
    for i in letters(dirs).filter(|&i| i < k) {
        if r[i] < 1 {
            return Err(CombinatoricsError::IndexOutOfRange(format!("r_{} = 0", i + 1)));
        }
        if r[i] < q[i] + 1 {
            return Err(CombinatoricsError::IndexOutOfRange(format!("r_{} < q_{} + 1", i + 1, i + 1)));
        }
    }
    let src = fiber_basis(alpha, q);
    let tgt = residue_target(alpha, dirs, r);
    let pos: HashMap<(u32, u32), usize> = tgt.iter().enumerate().map(|(i, &p)| (p, i)).collect();
    let mut m = Matrix::zeros(tgt.len(), src.len());
    for (j, &s) in src.iter().enumerate() {
        let mut mu = s;
        loop {
            if let Some(&row) = pos.get(&(mu, s & !mu)) {
                m.set(row, j, F::from_i64(wedge_sign(mu, s & !mu)));
            }
            if mu == 0 {
                break;
            }
            mu = (mu - 1) & s;
        }
    }
    Ok((m, tgt))
}

/// Residue along all directions.
pub fn stalk_residue<F: Field>(
    alpha: &PartitionedAlphabet,
    q: &[usize],
    r: &[usize],
) -> Result<(Matrix<F>, Vec<(u32, u32)>), CombinatoricsError> {
    partial_residue(alpha, q, mask_below(alpha.k()), r)
}

/// Checks that `Σ_{|r_I| = m} res_r` kills `W(I)_{m-1}` of the fiber at `q`
/// and induces an isomorphism from `gr_m^{W(I)}` onto the span of the pairs
/// `(μ̄, ν̄)` with `ν̄ ⊆ Λ_J` and `r(ν̄)_J ≥ q_J + e`.
pub fn graded_residue_isomorphism<F: Field>(alpha: &PartitionedAlphabet, q: &[usize], dirs: u32, m: usize) -> bool {
    let k = alpha.k();
    let dirs = dirs & mask_below(k);
    let src = fiber_basis(alpha, q);
    let li = alpha.parts_mask(dirs);
    let dir_list: Vec<usize> = letters(dirs).collect();
    // Enumerate r_I with |r_I| = m and r_i ≥ q_i + 1.
    let mut rs: Vec<Vec<usize>> = vec![vec![0; k]];
    for &i in &dir_list {
        let bound = popcount(alpha.part(i));
        rs = rs
            .into_iter()
            .flat_map(|r| (q[i] + 1..=bound).map(move |x| {
                let mut r2 = r.clone();
                r2[i] = x;
                r2
            }))
            .collect();
    }
    rs.retain(|r| dir_list.iter().map(|&i| r[i]).sum::<usize>() == m);
    let mut blocks: Vec<Matrix<F>> = Vec::new();
    let mut targets: Vec<(u32, u32)> = Vec::new();
    for r in &rs {
        let (mat, tgt) = partial_residue::<F>(alpha, q, dirs, r).expect("admissible r");
        blocks.push(mat);
        targets.extend(tgt);
    }
    let res = blocks.iter().fold(Matrix::zeros(0, src.len()), |acc, b| acc.vstack(b));
    let weights: Vec<i64> = src.iter().map(|&s| popcount(s & li) as i64).collect();
    let w = Filtration::<F>::from_weights(&weights, Direction::Increasing);
    let m = m as i64;
    if !w.w(m - 1).image(&res).is_zero() {
        return false;
    }
    let lj = alpha.all() & !li;
    let expected_idx: Vec<usize> = targets
        .iter()
        .enumerate()
        .filter(|(_, &(_, nu))| {
            nu & !lj == 0 && (0..k).filter(|i| dirs & (1 << i) == 0).all(|i| popcount(nu & alpha.part(i)) > q[i])
        })
        .map(|(i, _)| i)
        .collect();
    let expected = Subspace::coordinate(targets.len(), expected_idx);
    let Ok(gr) = Subquotient::new(w.w(m), w.w(m - 1)) else {
        return false;
    };
    let image = Subspace::from_columns(&(&res * &gr.reps));
    image == expected && image.dim() == gr.dim()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Q;

    fn alpha(sizes: &[usize]) -> PartitionedAlphabet {
        PartitionedAlphabet::with_sizes(sizes).unwrap()
    }

    fn strs(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn semistable_examples() {
        let a = semistable_check(&strs(&["a", "b"]), &[vec![1, 1]]).unwrap();
        assert_eq!(a.part(0), 0b11);
        let b = semistable_check(&strs(&["a", "b", "c"]), &[vec![1, 0, 0], vec![0, 1, 1]]).unwrap();
        assert_eq!(b.parts(), &[0b001, 0b110]);
        let bad = semistable_check(&strs(&["a"]), &[vec![2]]);
        assert!(matches!(bad, Err(CombinatoricsError::NotSemistable { generator: 1, .. })));
    }

    #[test]
    fn wedge_signs() {
        let ea = EpsilonElement { subset: 0b01, coeff: Q::from_i64(1) };
        let eb = EpsilonElement { subset: 0b10, coeff: Q::from_i64(1) };
        assert_eq!(chi(&ea, &eb).coeff, Q::from_i64(1));
        assert_eq!(chi(&eb, &ea).coeff, Q::from_i64(-1));
        assert_eq!(chi(&ea, &ea).coeff, Q::from_i64(0));
    }

    #[test]
    fn chibar_examples() {
        let a = alpha(&[2]);
        let ea = EpsilonElement { subset: 0b01, coeff: Q::from_i64(1) };
        let eab = EpsilonElement { subset: 0b11, coeff: Q::from_i64(1) };
        let eb = EpsilonElement { subset: 0b10, coeff: Q::from_i64(1) };
        assert_eq!(chibar(&a, &ea, &eab), Exterior::from([(0b11, Q::from_i64(1))]));
        assert!(chibar(&a, &ea, &eb).is_empty());
    }

    #[test]
    fn local_a_dimensions() {
        let a1 = LocalComplexA::<Q>::build(&alpha(&[1])).unwrap();
        assert_eq!(a1.total_dim(), 1);
        let a2 = LocalComplexA::<Q>::build(&alpha(&[2])).unwrap();
        assert_eq!(a2.total_dim(), 4);
        assert!(a2.check_commutation());
        assert!(a2.check_nu_shifts());
    }

    #[test]
    fn residue_vanishes_on_small_subsets() {
        let a = alpha(&[3]);
        let (m, _) = stalk_residue::<Q>(&a, &[0], &[3]).unwrap();
        let src = fiber_basis(&a, &[0]);
        for (j, &s) in src.iter().enumerate() {
            if popcount(s) < 3 {
                assert!(m.column(j).iter().all(|x| x.is_negligible()));
            }
        }
        assert!(matches!(stalk_residue::<Q>(&a, &[1], &[1]), Err(CombinatoricsError::IndexOutOfRange(_))));
    }

    #[test]
    fn residue_two_letters() {
        let a = alpha(&[2]);
        let (m, tgt) = stalk_residue::<Q>(&a, &[0], &[1]).unwrap();
        let src = fiber_basis(&a, &[0]);
        let j = src.iter().position(|&s| s == 0b11).unwrap();
        let row_a = tgt.iter().position(|&p| p == (0b01, 0b10)).unwrap();
        let row_b = tgt.iter().position(|&p| p == (0b10, 0b01)).unwrap();
        assert_eq!(m.get(row_a, j), &Q::from_i64(1));
        assert_eq!(m.get(row_b, j), &Q::from_i64(-1));
    }
}
