use crate::field::Field;
use crate::linalg::{LinalgError, Matrix};

/// A subspace of `F^n`, stored as the nonzero rows of its reduced row
/// echelon basis. Equal subspaces have identical representations.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Subspace<F> {
    ambient: usize,
    basis: Matrix<F>,
}

impl<F: Field> Subspace<F> {
    pub fn zero(n: usize) -> Self {
        Subspace { ambient: n, basis: Matrix::zeros(0, n) }
    }

    pub fn full(n: usize) -> Self {
        Subspace { ambient: n, basis: Matrix::identity(n) }
    }

    /// Span of the rows of `rows`.
    pub fn from_rows(rows: &Matrix<F>) -> Self {
        let r = rows.rref();
        let k = r.pivots.len();
        Subspace { ambient: rows.cols(), basis: r.matrix.block(0, 0, k, rows.cols()) }
    }

    /// Span of the columns of `cols`.
    pub fn from_columns(cols: &Matrix<F>) -> Self {
        Self::from_rows(&cols.transpose())
    }

    pub fn from_vectors(vs: &[Vec<F>], n: usize) -> Self {
        Self::from_columns(&Matrix::from_columns(vs, n))
    }

    /// Span of a set of standard basis vectors.
    pub fn coordinate(n: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut idx: Vec<usize> = indices.into_iter().collect();
        idx.sort_unstable();
        idx.dedup();
        let mut b = Matrix::zeros(idx.len(), n);
        for (r, &i) in idx.iter().enumerate() {
            b.set(r, i, F::one());
        }
        Subspace { ambient: n, basis: b }
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }
    pub fn dim(&self) -> usize {
        self.basis.rows()
    }
    pub fn is_zero(&self) -> bool {
        self.dim() == 0
    }
    pub fn is_full(&self) -> bool {
        self.dim() == self.ambient
    }
    /// Basis rows (RREF).
    pub fn basis_rows(&self) -> &Matrix<F> {
        &self.basis
    }
    /// Basis as columns of an `n x dim` matrix.
    pub fn basis(&self) -> Matrix<F> {
        self.basis.transpose()
    }
    pub fn basis_vectors(&self) -> Vec<Vec<F>> {
        (0..self.dim()).map(|r| self.basis.row(r).to_vec()).collect()
    }

    pub fn contains(&self, v: &[F]) -> bool {
        assert_eq!(v.len(), self.ambient, "vector length");
        if v.iter().all(|x| x.is_negligible()) {
            return true;
        }
        let stacked = self.basis.vstack(&Matrix::from_rows(vec![v.to_vec()], self.ambient));
        stacked.rank() == self.dim()
    }

    pub fn is_subspace_of(&self, other: &Self) -> bool {
        assert_eq!(self.ambient, other.ambient, "ambient mismatch");
        if self.dim() > other.dim() {
            return false;
        }
        other.basis.vstack(&self.basis).rank() == other.dim()
    }

    pub fn sum(&self, other: &Self) -> Self {
        assert_eq!(self.ambient, other.ambient, "ambient mismatch");
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        Self::from_rows(&self.basis.vstack(&other.basis))
    }

    /// Vectors `a` with `a . u = 0` for every `u` in the subspace.
    pub fn annihilator(&self) -> Self {
        if self.is_zero() {
            return Self::full(self.ambient);
        }
        Self::from_columns(&self.basis.kernel())
    }

    pub fn intersection(&self, other: &Self) -> Self {
        assert_eq!(self.ambient, other.ambient, "ambient mismatch");
        if self.is_zero() || other.is_full() {
            return self.clone();
        }
        if other.is_zero() || self.is_full() {
            return other.clone();
        }
        let ann = self.annihilator().basis.vstack(&other.annihilator().basis);
        Self::from_columns(&ann.kernel())
    }

    /// `f(U)` for `f: F^n -> F^m`.
    pub fn image(&self, f: &Matrix<F>) -> Self {
        assert_eq!(f.cols(), self.ambient, "image shape");
        if self.is_zero() {
            return Self::zero(f.rows());
        }
        Self::from_columns(&(f * &self.basis()))
    }

    /// `f^{-1}(W)` for `f: F^n -> F^m`.
    pub fn preimage(&self, f: &Matrix<F>) -> Self {
        assert_eq!(f.rows(), self.ambient, "preimage shape");
        if self.is_full() {
            return Self::full(f.cols());
        }
        let ann = self.annihilator().basis;
        Self::from_columns(&(&ann * f).kernel())
    }

    /// Extends a basis of `self` to a basis of `outer` and returns the added
    /// vectors as columns.
    pub fn complement_in(&self, outer: &Self) -> Matrix<F> {
        // Echelon rows with pivot 1, each reduced against the earlier ones.
        let mut rows: Vec<(usize, Vec<F>)> = Vec::new();
        let mut reduce = |mut v: Vec<F>| -> bool {
            for (pc, row) in &rows {
                if !v[*pc].is_negligible() {
                    let c = v[*pc].clone();
                    for (x, y) in v.iter_mut().zip(row) {
                        if !y.is_negligible() {
                            *x = x.clone() - c.clone() * y.clone();
                        }
                    }
                }
            }
            match v.iter().position(|x| !x.is_negligible()) {
                Some(pc) => {
                    let inv = F::one() / v[pc].clone();
                    let row = v.into_iter().map(|x| x * inv.clone()).collect();
                    rows.push((pc, row));
                    true
                }
                None => false,
            }
        };
        for v in self.basis_vectors() {
            reduce(v);
        }
        let mut added = Vec::new();
        for v in outer.basis_vectors() {
            if reduce(v.clone()) {
                added.push(v);
            }
        }
        Matrix::from_columns(&added, self.ambient)
    }
}

/// Kernel of `f` as a subspace of its source.
pub fn kernel<F: Field>(f: &Matrix<F>) -> Subspace<F> {
    Subspace::from_columns(&f.kernel())
}

/// Image of `f` as a subspace of its target.
pub fn image<F: Field>(f: &Matrix<F>) -> Subspace<F> {
    Subspace::full(f.cols()).image(f)
}

/// A subquotient `outer / inner` with a chosen basis of representatives.
#[derive(Clone, Debug)]
pub struct Subquotient<F> {
    pub outer: Subspace<F>,
    pub inner: Subspace<F>,
    /// Representatives of a basis, as columns (`n x dim`).
    pub reps: Matrix<F>,
    /// Coordinates modulo `inner`: for `v` in `outer`,
    /// `v = reps * (coord * v) mod inner`.
    pub coord: Matrix<F>,
}

impl<F: Field> Subquotient<F> {
    pub fn new(outer: Subspace<F>, inner: Subspace<F>) -> Result<Self, LinalgError> {
        let reps = inner.complement_in(&outer);
        Self::with_reps(outer, inner, reps)
    }

    /// Uses the given representatives, which must project to a basis.
    pub fn with_reps(outer: Subspace<F>, inner: Subspace<F>, reps: Matrix<F>) -> Result<Self, LinalgError> {
        if !inner.is_subspace_of(&outer) {
            return Err(LinalgError::NotCompatible("inner space is not contained in outer space".into()));
        }
        let n = outer.ambient();
        let d = outer.dim() - inner.dim();
        if reps.cols() != d || reps.rows() != n {
            return Err(LinalgError::NotCompatible("wrong number of representatives".into()));
        }
        let full = reps.hstack(&inner.basis());
        let left = full
            .left_inverse()
            .ok_or_else(|| LinalgError::NotCompatible("representatives are dependent modulo inner".into()))?;
        let coord = left.block(0, 0, d, n);
        let sq = Subquotient { outer, inner, reps, coord };
        for j in 0..d {
            if !sq.outer.contains(&sq.reps.column(j)) {
                return Err(LinalgError::NotCompatible("representative outside outer space".into()));
            }
        }
        Ok(sq)
    }

    /// The whole space `F^n / 0` with the standard basis.
    pub fn whole(n: usize) -> Self {
        Subquotient {
            outer: Subspace::full(n),
            inner: Subspace::zero(n),
            reps: Matrix::identity(n),
            coord: Matrix::identity(n),
        }
    }

    pub fn dim(&self) -> usize {
        self.reps.cols()
    }
    pub fn ambient(&self) -> usize {
        self.outer.ambient()
    }

    /// Coordinates of a vector of `outer`.
    pub fn coords(&self, v: &[F]) -> Vec<F> {
        self.coord.mul_vec(v)
    }

    /// Image of an ambient subspace in this subquotient, in coordinates.
    pub fn project_subspace(&self, s: &Subspace<F>) -> Subspace<F> {
        let cut = s.intersection(&self.outer).sum(&self.inner);
        cut.image(&self.coord)
    }

    /// Preimage of a coordinate subspace, as an ambient subspace between
    /// `inner` and `outer`.
    pub fn lift_subspace(&self, s: &Subspace<F>) -> Subspace<F> {
        s.image(&self.reps).sum(&self.inner)
    }
}

/// The map induced by `f` between subquotients.
pub fn subquotient_map<F: Field>(
    f: &Matrix<F>,
    src: &Subquotient<F>,
    tgt: &Subquotient<F>,
) -> Result<Matrix<F>, LinalgError> {
    if f.cols() != src.ambient() || f.rows() != tgt.ambient() {
        return Err(LinalgError::NotCompatible("map shape does not match subquotients".into()));
    }
    if !src.outer.image(f).is_subspace_of(&tgt.outer) {
        return Err(LinalgError::NotCompatible("map does not send outer into outer".into()));
    }
    if !src.inner.image(f).is_subspace_of(&tgt.inner) {
        return Err(LinalgError::NotCompatible("map does not send inner into inner".into()));
    }
    Ok(&(&tgt.coord * f) * &src.reps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Q;

    fn v(xs: &[i64]) -> Vec<Q> {
        xs.iter().map(|&x| Q::from_i64(x)).collect()
    }

    #[test]
    fn canonical_form() {
        let a = Subspace::from_vectors(&[v(&[1, 1, 0]), v(&[0, 1, 1])], 3);
        let b = Subspace::from_vectors(&[v(&[1, 2, 1]), v(&[1, 0, -1])], 3);
        assert_eq!(a, b);
    }

    #[test]
    fn sum_and_intersection() {
        let a = Subspace::<Q>::coordinate(3, [0, 1]);
        let b = Subspace::<Q>::coordinate(3, [1, 2]);
        assert_eq!(a.intersection(&b), Subspace::coordinate(3, [1]));
        assert_eq!(a.sum(&b), Subspace::full(3));
        assert_eq!(a.intersection(&Subspace::zero(3)), Subspace::zero(3));
    }

    #[test]
    fn preimage_image() {
        let f = Matrix::<Q>::from_i64(&[&[0, 1, 0], &[0, 0, 1], &[0, 0, 0]]);
        let w = Subspace::<Q>::coordinate(3, [0]);
        assert_eq!(w.preimage(&f), Subspace::coordinate(3, [0, 1]));
        assert_eq!(Subspace::<Q>::full(3).image(&f), Subspace::coordinate(3, [0, 1]));
    }

    #[test]
    fn subquotient_coordinates() {
        let outer = Subspace::<Q>::coordinate(3, [0, 1]);
        let inner = Subspace::<Q>::coordinate(3, [0]);
        let sq = Subquotient::new(outer, inner).unwrap();
        assert_eq!(sq.dim(), 1);
        assert_eq!(sq.coords(&v(&[5, 2, 0])), v(&[2]));
        assert!(Subquotient::new(Subspace::<Q>::coordinate(3, [0]), Subspace::coordinate(3, [1])).is_err());
    }

    #[test]
    fn induced_map_incompatible() {
        let sq = Subquotient::new(Subspace::<Q>::coordinate(2, [0]), Subspace::zero(2)).unwrap();
        let swap = Matrix::<Q>::from_i64(&[&[0, 1], &[1, 0]]);
        assert!(matches!(subquotient_map(&swap, &sq, &sq), Err(LinalgError::NotCompatible(_))));
        let id = Matrix::<Q>::identity(2);
        assert_eq!(subquotient_map(&id, &sq, &sq).unwrap(), Matrix::identity(1));
    }
}
