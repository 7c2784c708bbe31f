use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::field::Field;

/// Dense row-major matrix. A linear map `F^n -> F^m` is an `m x n` matrix
/// acting on column vectors.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix<F> {
    rows: usize,
    cols: usize,
    data: Vec<F>,
}

impl<F: fmt::Debug> fmt::Debug for Matrix<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", &self.data[r * self.cols..(r + 1) * self.cols])?;
        }
        write!(f, "]")
    }
}

/// Output of [`Matrix::rref`].
pub struct Rref<F> {
    pub matrix: Matrix<F>,
    pub pivots: Vec<usize>,
}

impl<F: Field> Matrix<F> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![F::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = F::one();
        }
        m
    }

    pub fn scalar(n: usize, c: F) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = c.clone();
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<F>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data length");
        Matrix { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<F>>, cols: usize) -> Self {
        let r = rows.len();
        let mut data = Vec::with_capacity(r * cols);
        for row in rows {
            assert_eq!(row.len(), cols, "ragged rows");
            data.extend(row);
        }
        Matrix { rows: r, cols, data }
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        Self::from_rows(rows.iter().map(|r| r.iter().map(|&x| F::from_i64(x)).collect()).collect(), cols)
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[Vec<F>], rows: usize) -> Self {
        let mut m = Self::zeros(rows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            assert_eq!(c.len(), rows, "column length");
            for (i, x) in c.iter().enumerate() {
                m.data[i * cols.len() + j] = x.clone();
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }
    pub fn get(&self, r: usize, c: usize) -> &F {
        &self.data[r * self.cols + c]
    }
    pub fn set(&mut self, r: usize, c: usize, v: F) {
        self.data[r * self.cols + c] = v;
    }
    pub fn row(&self, r: usize) -> &[F] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }
    pub fn column(&self, c: usize) -> Vec<F> {
        (0..self.rows).map(|r| self.get(r, c).clone()).collect()
    }
    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_negligible())
    }
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.data[c * self.rows + r] = self.get(r, c).clone();
            }
        }
        t
    }

    /// Entrywise conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let mut t = self.transpose();
        for x in t.data.iter_mut() {
            *x = x.conj();
        }
        t
    }

    pub fn conj(&self) -> Self {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| x.conj()).collect() }
    }

    pub fn map<G>(&self, f: impl Fn(&F) -> G) -> Matrix<G> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn try_map<G>(&self, f: impl Fn(&F) -> Option<G>) -> Option<Matrix<G>> {
        let data: Option<Vec<G>> = self.data.iter().map(f).collect();
        data.map(|data| Matrix { rows: self.rows, cols: self.cols, data })
    }

    pub fn scale(&self, c: &F) -> Self {
        self.map(|x| c.clone() * x)
    }

    pub fn mul_vec(&self, v: &[F]) -> Vec<F> {
        assert_eq!(v.len(), self.cols, "dimension mismatch in mul_vec");
        (0..self.rows)
            .map(|r| {
                let mut acc = F::zero();
                for (a, b) in self.row(r).iter().zip(v) {
                    if !a.is_zero() && !b.is_zero() {
                        acc = acc + a.clone() * b;
                    }
                }
                acc
            })
            .collect()
    }

    pub fn pow(&self, e: usize) -> Self {
        assert!(self.is_square());
        let mut out = Self::identity(self.rows);
        for _ in 0..e {
            out = &out * self;
        }
        out
    }

    pub fn hstack(&self, other: &Self) -> Self {
        assert_eq!(self.rows, other.rows, "hstack row mismatch");
        let cols = self.cols + other.cols;
        let mut m = Self::zeros(self.rows, cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                m.data[r * cols + c] = self.get(r, c).clone();
            }
            for c in 0..other.cols {
                m.data[r * cols + self.cols + c] = other.get(r, c).clone();
            }
        }
        m
    }

    pub fn vstack(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.cols, "vstack column mismatch");
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        Matrix { rows: self.rows + other.rows, cols: self.cols, data }
    }

    /// Block diagonal sum.
    pub fn direct_sum(&self, other: &Self) -> Self {
        let mut m = Self::zeros(self.rows + other.rows, self.cols + other.cols);
        m.set_block(0, 0, self);
        m.set_block(self.rows, self.cols, other);
        m
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, b: &Self) {
        for r in 0..b.rows {
            for c in 0..b.cols {
                self.set(r0 + r, c0 + c, b.get(r, c).clone());
            }
        }
    }

    pub fn add_block(&mut self, r0: usize, c0: usize, b: &Self) {
        for r in 0..b.rows {
            for c in 0..b.cols {
                let x = b.get(r, c);
                if !x.is_zero() {
                    let i = (r0 + r) * self.cols + c0 + c;
                    let old = std::mem::replace(&mut self.data[i], F::zero());
                    self.data[i] = old + x;
                }
            }
        }
    }

    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        let mut m = Self::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m.data[r * cols + c] = self.get(r0 + r, c0 + c).clone();
            }
        }
        m
    }

    pub fn select_columns(&self, cols: &[usize]) -> Self {
        let mut m = Self::zeros(self.rows, cols.len());
        for r in 0..self.rows {
            for (j, &c) in cols.iter().enumerate() {
                m.data[r * cols.len() + j] = self.get(r, c).clone();
            }
        }
        m
    }

    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let mut data = Vec::with_capacity(rows.len() * self.cols);
        for &r in rows {
            data.extend(self.row(r).iter().cloned());
        }
        Matrix { rows: rows.len(), cols: self.cols, data }
    }

    /// Kronecker product.
    pub fn kron(&self, other: &Self) -> Self {
        let mut m = Self::zeros(self.rows * other.rows, self.cols * other.cols);
        for a in 0..self.rows {
            for b in 0..self.cols {
                let x = self.get(a, b);
                if x.is_zero() {
                    continue;
                }
                for c in 0..other.rows {
                    for d in 0..other.cols {
                        m.set(a * other.rows + c, b * other.cols + d, x.clone() * other.get(c, d));
                    }
                }
            }
        }
        m
    }

    /// Reduced row echelon form. Pivots are normalized to one.
    pub fn rref(&self) -> Rref<F> {
        let mut m = self.clone();
        let pivots = m.rref_in_place(self.cols);
        Rref { matrix: m, pivots }
    }

    /// Row reduces using only the first `ncols` columns as pivot candidates.
    /// Returns the pivot columns.
    fn rref_in_place(&mut self, ncols: usize) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut prow = 0;
        let cols = self.cols;
        for c in 0..ncols {
            if prow == self.rows {
                break;
            }
            let Some(sel) = (prow..self.rows).find(|&r| !self.data[r * cols + c].is_negligible()) else {
                continue;
            };
            if sel != prow {
                for k in 0..cols {
                    self.data.swap(sel * cols + k, prow * cols + k);
                }
            }
            let inv = F::one() / self.data[prow * cols + c].clone();
            for k in c..cols {
                let i = prow * cols + k;
                if !self.data[i].is_zero() {
                    let old = std::mem::replace(&mut self.data[i], F::zero());
                    self.data[i] = old * &inv;
                }
            }
            let pivot_row: Vec<F> = self.data[prow * cols..(prow + 1) * cols].to_vec();
            for r in 0..self.rows {
                if r == prow {
                    continue;
                }
                let factor = self.data[r * cols + c].clone();
                if factor.is_zero() {
                    continue;
                }
                for k in c..cols {
                    let p = &pivot_row[k];
                    if p.is_zero() {
                        continue;
                    }
                    let i = r * cols + k;
                    let old = std::mem::replace(&mut self.data[i], F::zero());
                    self.data[i] = old - factor.clone() * p;
                }
                if !F::EXACT {
                    self.data[r * cols + c] = F::zero();
                }
            }
            pivots.push(c);
            prow += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        self.rref().pivots.len()
    }

    /// Basis of the kernel, as the columns of an `cols x k` matrix.
    pub fn kernel(&self) -> Self {
        let Rref { matrix, pivots } = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut k = Self::zeros(self.cols, free.len());
        for (j, &f) in free.iter().enumerate() {
            k.set(f, j, F::one());
            for (i, &p) in pivots.iter().enumerate() {
                let x = matrix.get(i, f);
                if !x.is_zero() {
                    k.set(p, j, -x.clone());
                }
            }
        }
        k
    }

    /// Some solution of `self * x = b`, if one exists.
    pub fn solve(&self, b: &[F]) -> Option<Vec<F>> {
        assert_eq!(b.len(), self.rows, "rhs length");
        let aug = self.hstack(&Matrix::from_columns(&[b.to_vec()], self.rows));
        let Rref { matrix, pivots } = aug.rref();
        if pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut x = vec![F::zero(); self.cols];
        for (i, &p) in pivots.iter().enumerate() {
            x[p] = matrix.get(i, self.cols).clone();
        }
        Some(x)
    }

    /// Some solution `X` of `self * X = b` for a matrix right-hand side.
    pub fn solve_matrix(&self, b: &Self) -> Option<Self> {
        assert_eq!(b.rows, self.rows, "rhs rows");
        let aug = self.hstack(b);
        let Rref { matrix, pivots } = aug.rref();
        if pivots.iter().any(|&p| p >= self.cols) {
            return None;
        }
        let mut x = Self::zeros(self.cols, b.cols);
        for (i, &p) in pivots.iter().enumerate() {
            for c in 0..b.cols {
                x.set(p, c, matrix.get(i, self.cols + c).clone());
            }
        }
        Some(x)
    }

    pub fn inverse(&self) -> Option<Self> {
        if !self.is_square() {
            return None;
        }
        let n = self.rows;
        let mut aug = self.hstack(&Self::identity(n));
        let pivots = aug.rref_in_place(n);
        (pivots.len() == n).then(|| aug.block(0, n, n, n))
    }

    /// `L` with `L * self = I` for a matrix of full column rank.
    pub fn left_inverse(&self) -> Option<Self> {
        let (n, m) = (self.rows, self.cols);
        let mut aug = self.hstack(&Self::identity(n));
        let pivots = aug.rref_in_place(m);
        (pivots.len() == m).then(|| aug.block(0, m, m, n))
    }

    pub fn is_invertible(&self) -> bool {
        self.is_square() && self.rank() == self.rows
    }
}

impl<F: Field> Add for &Matrix<F> {
    type Output = Matrix<F>;
    fn add(self, o: &Matrix<F>) -> Matrix<F> {
        assert!(self.rows == o.rows && self.cols == o.cols, "add shape mismatch");
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&o.data).map(|(a, b)| a.clone() + b).collect(),
        }
    }
}

impl<F: Field> Sub for &Matrix<F> {
    type Output = Matrix<F>;
    fn sub(self, o: &Matrix<F>) -> Matrix<F> {
        assert!(self.rows == o.rows && self.cols == o.cols, "sub shape mismatch");
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&o.data).map(|(a, b)| a.clone() - b).collect(),
        }
    }
}

impl<F: Field> Neg for &Matrix<F> {
    type Output = Matrix<F>;
    fn neg(self) -> Matrix<F> {
        self.map(|x| -x.clone())
    }
}

impl<F: Field> Mul for &Matrix<F> {
    type Output = Matrix<F>;
    fn mul(self, o: &Matrix<F>) -> Matrix<F> {
        assert_eq!(self.cols, o.rows, "mul shape mismatch");
        let mut out = Matrix::zeros(self.rows, o.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a.is_zero() {
                    continue;
                }
                for c in 0..o.cols {
                    let b = o.get(k, c);
                    if b.is_zero() {
                        continue;
                    }
                    let i = r * o.cols + c;
                    let old = std::mem::replace(&mut out.data[i], F::zero());
                    out.data[i] = old + a.clone() * b;
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Q;

    #[test]
    fn kernel_and_rank() {
        let m = Matrix::<Q>::from_i64(&[&[1, 2, 3], &[2, 4, 6]]);
        assert_eq!(m.rank(), 1);
        let k = m.kernel();
        assert_eq!(k.cols(), 2);
        assert!((&m * &k).is_zero());
    }

    #[test]
    fn inverse_and_left_inverse() {
        let m = Matrix::<Q>::from_i64(&[&[2, 1], &[1, 1]]);
        let inv = m.inverse().unwrap();
        assert_eq!(&m * &inv, Matrix::identity(2));
        let tall = Matrix::<Q>::from_i64(&[&[1, 0], &[1, 1], &[0, 3]]);
        let l = tall.left_inverse().unwrap();
        assert_eq!(&l * &tall, Matrix::identity(2));
        assert!(Matrix::<Q>::from_i64(&[&[1, 1], &[1, 1]]).inverse().is_none());
    }

    #[test]
    fn solve_consistent_and_inconsistent() {
        let m = Matrix::<Q>::from_i64(&[&[1, 1], &[1, 1]]);
        let two = Q::from_i64(2);
        assert!(m.solve(&[two.clone(), two.clone()]).is_some());
        assert!(m.solve(&[two.clone(), Q::from_i64(3)]).is_none());
    }

    #[test]
    fn float_instance() {
        let m = Matrix::<f64>::from_i64(&[&[1, 1], &[2, 2]]);
        assert_eq!(m.rank(), 1);
        let k = m.kernel();
        assert!((&m * &k).is_zero());
    }
}
