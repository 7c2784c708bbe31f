//! Exact linear algebra: matrices, canonical subspaces, subquotients,
//! induced maps and definiteness of Hermitian forms.

mod matrix;
mod subspace;

use std::cmp::Ordering;

pub use matrix::{Matrix, Rref};
pub use subspace::{image, kernel, subquotient_map, Subquotient, Subspace};

use crate::field::Field;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LinalgError {
    #[error("not compatible: {0}")]
    NotCompatible(String),
    #[error("matrix is not Hermitian")]
    NotHermitian,
}

/// Inertia-based classification of a Hermitian form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Definiteness {
    PositiveDefinite,
    NegativeDefinite,
    PositiveSemidefinite,
    NegativeSemidefinite,
    Indefinite,
    Zero,
}

/// Numbers of positive, negative and zero squares.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Inertia {
    pub positive: usize,
    pub negative: usize,
    pub zero: usize,
}

impl Inertia {
    pub fn classify(&self) -> Definiteness {
        match (self.positive, self.negative, self.zero) {
            (0, 0, _) => Definiteness::Zero,
            (_, 0, 0) => Definiteness::PositiveDefinite,
            (0, _, 0) => Definiteness::NegativeDefinite,
            (_, 0, _) => Definiteness::PositiveSemidefinite,
            (0, _, _) => Definiteness::NegativeSemidefinite,
            _ => Definiteness::Indefinite,
        }
    }
}

pub fn is_hermitian<F: Field>(g: &Matrix<F>) -> bool {
    g.is_square() && (g - &g.adjoint()).is_zero()
}

/// Inertia of a Hermitian matrix by exact congruence diagonalization.
pub fn inertia<F: Field>(g: &Matrix<F>) -> Result<Inertia, LinalgError> {
    if !is_hermitian(g) {
        return Err(LinalgError::NotHermitian);
    }
    let mut a = g.clone();
    let mut n = a.rows();
    let mut out = Inertia { positive: 0, negative: 0, zero: 0 };
    while n > 0 {
        let diag = (0..n).find(|&i| !a.get(i, i).is_negligible());
        let piv = match diag {
            Some(i) => i,
            None => {
                let found = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).find(|&(i, j)| !a.get(i, j).is_negligible());
                let Some((i, j)) = found else {
                    out.zero += n;
                    break;
                };
                // Replace e_i by e_i + conj(a_ij) e_j, making the diagonal 2|a_ij|^2.
                let t = a.get(i, j).conj();
                let tc = t.conj();
                for c in 0..n {
                    let v = a.get(i, c).clone() + tc.clone() * a.get(j, c);
                    a.set(i, c, v);
                }
                for r in 0..n {
                    let v = a.get(r, i).clone() + a.get(r, j).clone() * &t;
                    a.set(r, i, v);
                }
                i
            }
        };
        let p = a.get(piv, piv).clone();
        match p.real_sign() {
            Some(Ordering::Greater) => out.positive += 1,
            Some(Ordering::Less) => out.negative += 1,
            _ => return Err(LinalgError::NotHermitian),
        }
        let mut next = Matrix::zeros(n - 1, n - 1);
        let keep: Vec<usize> = (0..n).filter(|&x| x != piv).collect();
        for (ri, &r) in keep.iter().enumerate() {
            for (ci, &c) in keep.iter().enumerate() {
                let v = a.get(r, c).clone() - a.get(r, piv).clone() * a.get(piv, c) / p.clone();
                next.set(ri, ci, v);
            }
        }
        a = next;
        n -= 1;
    }
    Ok(out)
}

/// Classifies the Hermitian form with Gram matrix `g`.
pub fn hermitian_definiteness<F: Field>(g: &Matrix<F>) -> Result<Definiteness, LinalgError> {
    inertia(g).map(|i| i.classify())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Q, Qi};

    #[test]
    fn classification() {
        let pd = Matrix::<Q>::from_i64(&[&[2, 1], &[1, 2]]);
        assert_eq!(hermitian_definiteness(&pd).unwrap(), Definiteness::PositiveDefinite);
        let hyp = Matrix::<Q>::from_i64(&[&[0, 1], &[1, 0]]);
        assert_eq!(hermitian_definiteness(&hyp).unwrap(), Definiteness::Indefinite);
        let psd = Matrix::<Q>::from_i64(&[&[1, 1], &[1, 1]]);
        assert_eq!(hermitian_definiteness(&psd).unwrap(), Definiteness::PositiveSemidefinite);
        assert_eq!(hermitian_definiteness(&Matrix::<Q>::zeros(2, 2)).unwrap(), Definiteness::Zero);
        let nonsym = Matrix::<Q>::from_i64(&[&[1, 2], &[0, 1]]);
        assert_eq!(hermitian_definiteness(&nonsym), Err(LinalgError::NotHermitian));
    }

    #[test]
    fn gaussian_hermitian() {
        let i = Qi::imag_unit().unwrap();
        let one = Qi::from_i64(1);
        let zero = Qi::from_i64(0);
        // [[0, i], [-i, 0]] has eigenvalues +-1.
        let g = Matrix::from_rows(vec![vec![zero.clone(), i.clone()], vec![-i.clone(), zero.clone()]], 2);
        assert_eq!(hermitian_definiteness(&g).unwrap(), Definiteness::Indefinite);
        let h = Matrix::from_rows(vec![vec![one.clone() + one.clone(), i.clone()], vec![-i, one]], 2);
        assert_eq!(hermitian_definiteness(&h).unwrap(), Definiteness::PositiveDefinite);
    }
}
