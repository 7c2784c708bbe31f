//! Finite filtrations and filtered cochain complexes.
//!
//! A filtration is stored in decreasing form `F^p`; an increasing filtration
//! is presented through `W_m = F^{-m}`. Only the finitely many proper steps
//! are stored: below the window every level is the whole space, above it
//! every level is zero.

use std::collections::BTreeMap;

use crate::field::Field;
use crate::linalg::{subquotient_map, LinalgError, Matrix, Subquotient, Subspace};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FiltrationError {
    #[error("filtration levels are not nested at index {0}")]
    NotNested(i64),
    #[error("filtrations live on different objects")]
    MismatchedObject,
    #[error("unknown filtration {0:?}")]
    UnknownFiltration(String),
    #[error("not a complex: d d != 0 out of degree {0}")]
    NotAComplex(i64),
    #[error("filtration {name:?} is not preserved by d in degree {degree}")]
    NotPreserved { name: String, degree: i64 },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Direction {
    Decreasing,
    Increasing,
}

#[derive(Debug, Clone)]
pub struct Filtration<F> {
    ambient: usize,
    start: i64,
    steps: Vec<Subspace<F>>,
    direction: Direction,
}

impl<F: Field> PartialEq for Filtration<F> {
    fn eq(&self, o: &Self) -> bool {
        self.ambient == o.ambient && self.start == o.start && self.steps == o.steps
    }
}

impl<F: Field> Filtration<F> {
    /// Decreasing filtration with `F^p = steps[p - start]` inside the window.
    pub fn decreasing(ambient: usize, start: i64, steps: Vec<Subspace<F>>) -> Result<Self, FiltrationError> {
        Self::build(ambient, start, steps, Direction::Decreasing)
    }

    /// Increasing filtration with `W_m = steps[m - start]` inside the window.
    pub fn increasing(ambient: usize, start: i64, steps: Vec<Subspace<F>>) -> Result<Self, FiltrationError> {
        let len = steps.len() as i64;
        let mut rev = steps;
        rev.reverse();
        // W_m = F^{-m}: m = start + len - 1 becomes p = -(start + len - 1).
        Self::build(ambient, -(start + len - 1), rev, Direction::Increasing)
    }

    fn build(ambient: usize, start: i64, steps: Vec<Subspace<F>>, direction: Direction) -> Result<Self, FiltrationError> {
        for s in &steps {
            if s.ambient() != ambient {
                return Err(FiltrationError::Shape("step in wrong ambient space".into()));
            }
        }
        for (i, w) in steps.windows(2).enumerate() {
            if !w[1].is_subspace_of(&w[0]) {
                return Err(FiltrationError::NotNested(start + i as i64 + 1));
            }
        }
        let mut f = Filtration { ambient, start, steps, direction };
        f.normalize();
        Ok(f)
    }

    fn normalize(&mut self) {
        let lead = self.steps.iter().take_while(|s| s.is_full()).count();
        self.steps.drain(..lead);
        self.start += lead as i64;
        while self.steps.last().is_some_and(|s| s.is_zero()) {
            self.steps.pop();
        }
        if self.ambient == 0 {
            self.start = 0;
        }
    }

    /// `F^p = V` for `p <= 0` and `F^p = 0` for `p > 0`.
    pub fn trivial(ambient: usize) -> Self {
        Filtration { ambient, start: 1, steps: vec![], direction: Direction::Decreasing }
    }

    /// Filtration by basis weights. Decreasing: `F^p` is spanned by the basis
    /// vectors of weight at least `p`. Increasing: `W_m` is spanned by those of
    /// weight at most `m`.
    pub fn from_weights(weights: &[i64], direction: Direction) -> Self {
        let n = weights.len();
        let signed: Vec<i64> = match direction {
            Direction::Decreasing => weights.to_vec(),
            Direction::Increasing => weights.iter().map(|w| -w).collect(),
        };
        let (Some(&lo), Some(&hi)) = (signed.iter().min(), signed.iter().max()) else {
            return Filtration { ambient: 0, start: 0, steps: vec![], direction };
        };
        let steps = (lo..=hi).map(|p| Subspace::coordinate(n, (0..n).filter(|&i| signed[i] >= p))).collect();
        let mut f = Filtration { ambient: n, start: lo, steps, direction };
        f.normalize();
        f
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }
    pub fn direction(&self) -> Direction {
        self.direction
    }
    pub fn with_direction(mut self, d: Direction) -> Self {
        self.direction = d;
        self
    }

    /// Decreasing level `F^p`.
    pub fn level(&self, p: i64) -> Subspace<F> {
        if p < self.start {
            return Subspace::full(self.ambient);
        }
        let i = (p - self.start) as usize;
        match self.steps.get(i) {
            Some(s) => s.clone(),
            None => Subspace::zero(self.ambient),
        }
    }

    /// Increasing level `W_m = F^{-m}`.
    pub fn w(&self, m: i64) -> Subspace<F> {
        self.level(-m)
    }

    /// Decreasing indices `[lo, hi]` with `F^lo = V` and `F^{hi} = 0`.
    pub fn window(&self) -> (i64, i64) {
        (self.start - 1, self.start + self.steps.len() as i64)
    }

    /// Increasing indices `[lo, hi]` with `W_lo = 0` and `W_hi = V`.
    pub fn w_window(&self) -> (i64, i64) {
        let (lo, hi) = self.window();
        (-hi, -lo)
    }

    /// `F[n]^p = F^{p+n}`; for increasing filtrations `W[n]_m = W_{m-n}`.
    pub fn shift(&self, n: i64) -> Self {
        let mut f = self.clone();
        f.start -= n;
        f
    }

    /// Induced filtration on a subquotient, in its coordinates.
    pub fn induced(&self, sq: &Subquotient<F>) -> Self {
        let (lo, hi) = self.window();
        let steps = (lo..=hi).map(|p| sq.project_subspace(&self.level(p))).collect();
        let mut f = Filtration { ambient: sq.dim(), start: lo, steps, direction: self.direction };
        f.normalize();
        f
    }

    /// Image filtration under `f` intersected with nothing: `f(F^p)`.
    pub fn image(&self, f: &Matrix<F>) -> Self {
        let (lo, hi) = self.window();
        let steps = (lo..=hi).map(|p| self.level(p).image(f)).collect();
        let mut out = Filtration { ambient: f.rows(), start: lo, steps, direction: self.direction };
        out.normalize();
        out
    }

    /// Whether `f(F^p) ⊆ G^{p + shift}` for all `p`.
    pub fn maps_into(&self, f: &Matrix<F>, target: &Self, shift: i64) -> bool {
        let (lo, hi) = self.window();
        (lo..=hi).all(|p| self.level(p).image(f).is_subspace_of(&target.level(p + shift)))
    }

    /// Dimension of `gr^p = F^p / F^{p+1}`.
    pub fn graded_dim(&self, p: i64) -> usize {
        self.level(p).dim() - self.level(p + 1).dim()
    }

    /// Decreasing indices with nonzero graded pieces.
    pub fn jumps(&self) -> Vec<i64> {
        let (lo, hi) = self.window();
        (lo..=hi).filter(|&p| self.graded_dim(p) > 0).collect()
    }

    /// Basis representatives for `(F^p ∩ outer + inner) / inner`, adapted to
    /// this filtration: each vector added at level `p` lies in `F^p ∩ outer`.
    pub fn adapted_reps(&self, outer: &Subspace<F>, inner: &Subspace<F>) -> Matrix<F> {
        let n = outer.ambient();
        let (lo, hi) = self.window();
        let mut span = inner.clone();
        let mut reps: Vec<Vec<F>> = Vec::new();
        for p in (lo..=hi).rev() {
            let level = self.level(p).intersection(outer);
            let target = level.sum(inner);
            if target.dim() == span.dim() {
                continue;
            }
            let add = span.intersection(&level).complement_in(&level);
            for j in 0..add.cols() {
                reps.push(add.column(j));
            }
            span = span.sum(&Subspace::from_columns(&add));
        }
        Matrix::from_columns(&reps, n)
    }
}

/// `(F * G)^p = sum_{a+b=p} F^a ∩ G^b`.
pub fn convolve<F: Field>(f: &Filtration<F>, g: &Filtration<F>) -> Result<Filtration<F>, FiltrationError> {
    if f.ambient != g.ambient {
        return Err(FiltrationError::MismatchedObject);
    }
    let (flo, fhi) = f.window();
    let (glo, ghi) = g.window();
    let n = f.ambient;
    let steps: Vec<Subspace<F>> = (flo + glo..=fhi + ghi)
        .map(|p| {
            let mut acc = Subspace::zero(n);
            for a in flo..=fhi {
                acc = acc.sum(&f.level(a).intersection(&g.level(p - a)));
            }
            acc
        })
        .collect();
    Filtration::build(n, flo + glo, steps, f.direction)
}

/// A bounded cochain complex with named filtrations preserved by `d`.
#[derive(Debug, Clone)]
pub struct FilteredComplex<F> {
    lo: i64,
    dims: Vec<usize>,
    d: Vec<Matrix<F>>,
    filtrations: BTreeMap<String, Vec<Filtration<F>>>,
}

impl<F: Field> FilteredComplex<F> {
    /// `dims[i]` is the dimension in degree `lo + i`; `d[i]` maps degree
    /// `lo + i` to `lo + i + 1` (so `d.len() == dims.len() - 1`).
    pub fn new(lo: i64, dims: Vec<usize>, d: Vec<Matrix<F>>) -> Result<Self, FiltrationError> {
        if d.len() + 1 != dims.len().max(1) {
            return Err(FiltrationError::Shape("need one differential between consecutive degrees".into()));
        }
        for (i, m) in d.iter().enumerate() {
            if m.cols() != dims[i] || m.rows() != dims[i + 1] {
                return Err(FiltrationError::Shape(format!("differential in degree {}", lo + i as i64)));
            }
        }
        for i in 1..d.len() {
            if !(&d[i] * &d[i - 1]).is_zero() {
                return Err(FiltrationError::NotAComplex(lo + i as i64));
            }
        }
        Ok(FilteredComplex { lo, dims, d, filtrations: BTreeMap::new() })
    }

    /// Registers a filtration given degreewise; checks `d F^p ⊆ F^p`.
    pub fn add_filtration(&mut self, name: &str, levels: Vec<Filtration<F>>) -> Result<(), FiltrationError> {
        if levels.len() != self.dims.len() {
            return Err(FiltrationError::Shape(format!("filtration {name:?} has wrong number of degrees")));
        }
        for (i, f) in levels.iter().enumerate() {
            if f.ambient() != self.dims[i] {
                return Err(FiltrationError::MismatchedObject);
            }
        }
        for i in 0..self.d.len() {
            if !levels[i].maps_into(&self.d[i], &levels[i + 1], 0) {
                return Err(FiltrationError::NotPreserved { name: name.into(), degree: self.lo + i as i64 });
            }
        }
        self.filtrations.insert(name.to_string(), levels);
        Ok(())
    }

    pub fn with_filtration(mut self, name: &str, levels: Vec<Filtration<F>>) -> Result<Self, FiltrationError> {
        self.add_filtration(name, levels)?;
        Ok(self)
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }
    pub fn hi(&self) -> i64 {
        self.lo + self.dims.len() as i64 - 1
    }
    pub fn degrees(&self) -> std::ops::RangeInclusive<i64> {
        self.lo..=self.hi()
    }
    pub fn dim(&self, n: i64) -> usize {
        self.idx(n).map_or(0, |i| self.dims[i])
    }
    fn idx(&self, n: i64) -> Option<usize> {
        (n >= self.lo && n <= self.hi()).then(|| (n - self.lo) as usize)
    }

    /// `d: K^n -> K^{n+1}` (a zero matrix outside the stored range).
    pub fn d(&self, n: i64) -> Matrix<F> {
        match self.idx(n) {
            Some(i) if i < self.d.len() => self.d[i].clone(),
            _ => Matrix::zeros(self.dim(n + 1), self.dim(n)),
        }
    }

    pub fn filtration_names(&self) -> impl Iterator<Item = &str> {
        self.filtrations.keys().map(|s| s.as_str())
    }

    pub fn has_filtration(&self, name: &str) -> bool {
        self.filtrations.contains_key(name)
    }

    pub fn filtration(&self, name: &str, n: i64) -> Result<Filtration<F>, FiltrationError> {
        let levels = self.filtrations.get(name).ok_or_else(|| FiltrationError::UnknownFiltration(name.into()))?;
        Ok(match self.idx(n) {
            Some(i) => levels[i].clone(),
            None => Filtration::trivial(0),
        })
    }

    pub fn levels(&self, name: &str) -> Result<&[Filtration<F>], FiltrationError> {
        self.filtrations
            .get(name)
            .map(|v| v.as_slice())
            .ok_or_else(|| FiltrationError::UnknownFiltration(name.into()))
    }

    pub fn cocycles(&self, n: i64) -> Subspace<F> {
        crate::linalg::kernel(&self.d(n))
    }

    pub fn coboundaries(&self, n: i64) -> Subspace<F> {
        Subspace::full(self.dim(n - 1)).image(&self.d(n - 1))
    }

    /// `H^n` as a subquotient of `K^n`.
    pub fn cohomology(&self, n: i64) -> Subquotient<F> {
        Subquotient::new(self.cocycles(n), self.coboundaries(n)).expect("coboundaries are cocycles")
    }

    pub fn betti(&self) -> Vec<usize> {
        self.degrees().map(|n| self.cohomology(n).dim()).collect()
    }

    /// Filtration induced on `H^n`: image of `ker d ∩ F^p`.
    pub fn cohomology_filtration(&self, name: &str, n: i64) -> Result<Filtration<F>, FiltrationError> {
        let f = self.filtration(name, n)?;
        Ok(f.induced(&self.cohomology(n)))
    }

    /// Convolution of two registered filtrations, degreewise.
    pub fn convolve(&self, a: &str, b: &str) -> Result<Vec<Filtration<F>>, FiltrationError> {
        let fa = self.levels(a)?;
        let fb = self.levels(b)?;
        fa.iter().zip(fb).map(|(x, y)| convolve(x, y)).collect()
    }
}

/// Degreewise shift of all levels of a filtration.
pub fn shift_filtration<F: Field>(levels: &[Filtration<F>], n: i64) -> Vec<Filtration<F>> {
    levels.iter().map(|f| f.shift(n)).collect()
}

/// The graded complex `gr^p_name K` together with the subquotient data used
/// to present it.
#[derive(Debug, Clone)]
pub struct GradedPiece<F> {
    pub complex: FilteredComplex<F>,
    /// `F^p K^n / F^{p+1} K^n`, indexed like the degrees of the complex.
    pub pieces: Vec<Subquotient<F>>,
}

/// `gr^p` of the filtration `name` as a complex, carrying all other
/// registered filtrations induced on it. Representatives are adapted to
/// the first other filtration (in name order) when one exists.
pub fn graded_piece<F: Field>(k: &FilteredComplex<F>, name: &str, p: i64) -> Result<GradedPiece<F>, FiltrationError> {
    let adapt = k.filtration_names().find(|n| *n != name).map(|s| s.to_string());
    graded_piece_adapted(k, name, p, adapt.as_deref())
}

/// As [`graded_piece`], with representatives adapted to `adapt`.
pub fn graded_piece_adapted<F: Field>(
    k: &FilteredComplex<F>,
    name: &str,
    p: i64,
    adapt: Option<&str>,
) -> Result<GradedPiece<F>, FiltrationError> {
    let levels = k.levels(name)?;
    let mut pieces = Vec::new();
    for (i, n) in k.degrees().enumerate() {
        let outer = levels[i].level(p);
        let inner = levels[i].level(p + 1);
        let sq = match adapt {
            Some(a) => {
                let g = k.filtration(a, n)?;
                let reps = g.adapted_reps(&outer, &inner);
                Subquotient::with_reps(outer, inner, reps)?
            }
            None => Subquotient::new(outer, inner)?,
        };
        pieces.push(sq);
    }
    let dims: Vec<usize> = pieces.iter().map(|s| s.dim()).collect();
    let mut d = Vec::new();
    for i in 0..pieces.len().saturating_sub(1) {
        d.push(subquotient_map(&k.d(k.lo + i as i64), &pieces[i], &pieces[i + 1])?);
    }
    let mut complex = FilteredComplex::new(k.lo, dims, d)?;
    for other in k.filtration_names() {
        if other == name {
            continue;
        }
        let ind: Vec<Filtration<F>> = k
            .levels(other)?
            .iter()
            .zip(&pieces)
            .map(|(f, sq)| f.induced(sq))
            .collect();
        complex.add_filtration(other, ind)?;
    }
    Ok(GradedPiece { complex, pieces })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Q;

    #[test]
    fn increasing_decreasing_dictionary() {
        let w = Filtration::<Q>::from_weights(&[0, 1, 2], Direction::Increasing);
        assert_eq!(w.w(0).dim(), 1);
        assert_eq!(w.w(1).dim(), 2);
        assert_eq!(w.level(-1).dim(), 2);
        assert_eq!(w.w(-1).dim(), 0);
        assert_eq!(w.w(5).dim(), 3);
        assert_eq!(w.w_window(), (-1, 2));
    }

    #[test]
    fn shift_conventions() {
        let f = Filtration::<Q>::from_weights(&[0, 1], Direction::Decreasing);
        let g = f.shift(1);
        assert_eq!(g.level(0), f.level(1));
        let w = Filtration::<Q>::from_weights(&[0, 1], Direction::Increasing);
        let w1 = w.shift(1);
        assert_eq!(w1.w(1), w.w(0));
    }

    #[test]
    fn convolution_of_weight_filtrations_adds_weights() {
        let a = Filtration::<Q>::from_weights(&[0, 1, 1, 2], Direction::Decreasing);
        let b = Filtration::<Q>::from_weights(&[3, 0, 1, 1], Direction::Decreasing);
        let c = convolve(&a, &b).unwrap();
        assert_eq!(c, Filtration::from_weights(&[3, 1, 2, 3], Direction::Decreasing));
        let other = Filtration::<Q>::trivial(2);
        assert_eq!(convolve(&a, &other), Err(FiltrationError::MismatchedObject));
    }

    #[test]
    fn unnested_levels_rejected() {
        let a = Subspace::<Q>::coordinate(2, [0]);
        let b = Subspace::<Q>::coordinate(2, [1]);
        assert!(Filtration::decreasing(2, 0, vec![a, b]).is_err());
    }

    #[test]
    fn graded_piece_of_two_term_complex() {
        // K^0 = Q^2 -> K^1 = Q, d = (1 0); F by weights.
        let d = Matrix::<Q>::from_i64(&[&[1, 0]]);
        let k = FilteredComplex::new(0, vec![2, 1], vec![d])
            .unwrap()
            .with_filtration(
                "F",
                vec![
                    Filtration::from_weights(&[0, 1], Direction::Decreasing),
                    Filtration::from_weights(&[0], Direction::Decreasing),
                ],
            )
            .unwrap();
        let g0 = graded_piece(&k, "F", 0).unwrap();
        assert_eq!(g0.complex.betti(), vec![0, 0]);
        let g1 = graded_piece(&k, "F", 1).unwrap();
        assert_eq!(g1.complex.betti(), vec![1, 0]);
        assert!(matches!(graded_piece(&k, "G", 0), Err(FiltrationError::UnknownFiltration(_))));
    }
}
