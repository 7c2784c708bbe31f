//! Monodromy weight filtrations.
//!
//! For nilpotent `N` the weight filtration `W(N)` (centred at 0) is the
//! unique increasing filtration with `N W_m ⊆ W_{m-2}` and
//! `N^l: gr_l ≅ gr_{-l}`. It is computed by
//!
//! ```text
//! W_m = Σ_{j >= max(0, -m)} ker N^{m+j+1} ∩ im N^j
//! ```
//!
//! The weight filtration relative to an `N`-stable filtration `W` is built
//! one graded piece of `W` at a time, lifting Lefschetz strings.

use std::collections::BTreeMap;

use crate::field::Field;
use crate::filtration::{Direction, Filtration};
use crate::linalg::{image, kernel, subquotient_map, Matrix, Subquotient, Subspace};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MonodromyError {
    #[error("endomorphism is not nilpotent")]
    NotNilpotent,
    #[error("relative weight filtration does not exist: {0}")]
    DoesNotExist(RelativeWitness),
    #[error("not compatible: {0}")]
    NotCompatible(String),
    #[error("endomorphisms {0} and {1} do not commute")]
    NonCommuting(usize, usize),
}

/// A primitive class on `gr^W_weight` of absolute `N`-weight `l` admitting
/// no lift `v` with `N^{l+1} v ∈ M_{weight-l-2}`.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct RelativeWitness {
    pub weight: i64,
    pub l: i64,
    pub class: Vec<String>,
}

impl std::fmt::Display for RelativeWitness {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "primitive class {:?} of gr_{} with N-weight {} has no admissible lift", self.class, self.weight, self.l)
    }
}

/// Smallest `e` with `N^e = 0`.
pub fn nilpotency_index<F: Field>(n: &Matrix<F>) -> Result<usize, MonodromyError> {
    if !n.is_square() {
        return Err(MonodromyError::NotCompatible("endomorphism must be square".into()));
    }
    let mut p = Matrix::identity(n.rows());
    for e in 0..=n.rows() {
        if p.is_zero() {
            return Ok(e);
        }
        p = &p * n;
    }
    Err(MonodromyError::NotNilpotent)
}

/// `W(N)` centred at 0, as an increasing filtration.
pub fn weight_filtration<F: Field>(n: &Matrix<F>) -> Result<Filtration<F>, MonodromyError> {
    let e = nilpotency_index(n)?;
    let dim = n.rows();
    if dim == 0 {
        return Ok(Filtration::from_weights(&[], Direction::Increasing));
    }
    let top = e as i64 - 1;
    let powers: Vec<Matrix<F>> = (0..=2 * e + 1).map(|j| n.pow(j)).collect();
    let kers: Vec<Subspace<F>> = powers.iter().map(kernel).collect();
    let ims: Vec<Subspace<F>> = powers.iter().map(image).collect();
    let steps: Vec<Subspace<F>> = (-top..=top)
        .map(|m| {
            let mut acc = Subspace::zero(dim);
            for j in (-m).max(0)..=top {
                let kk = (m + j + 1).clamp(0, 2 * e as i64 + 1) as usize;
                acc = acc.sum(&kers[kk].intersection(&ims[j as usize]));
            }
            acc
        })
        .collect();
    Filtration::increasing(dim, -top, steps).map_err(|e| MonodromyError::NotCompatible(e.to_string()))
}

/// Checks `N W_m ⊆ W_{m-2}` and `N^l: gr_{c+l} ≅ gr_{c-l}` for all `l > 0`.
pub fn is_weight_filtration_of<F: Field>(n: &Matrix<F>, w: &Filtration<F>, centre: i64) -> bool {
    let (lo, hi) = w.w_window();
    if (lo..=hi).any(|m| !w.w(m).image(n).is_subspace_of(&w.w(m - 2))) {
        return false;
    }
    let gr = |m: i64| Subquotient::new(w.w(m), w.w(m - 1)).expect("nested");
    let span = (hi - centre).max(centre - lo).max(0) + 1;
    for l in 1..=span {
        let (s, t) = (gr(centre + l), gr(centre - l));
        match subquotient_map(&n.pow(l as usize), &s, &t) {
            Ok(m) if m.is_square() && m.is_invertible() => {}
            _ => return false,
        }
    }
    true
}

/// Lefschetz basis of a nilpotent endomorphism: primitive vectors `v` of
/// weight `l` with `N^{l+1} v = 0`, whose strings `N^j v` form a basis.
pub fn lefschetz_basis<F: Field>(n: &Matrix<F>) -> Result<Vec<(Vec<F>, i64)>, MonodromyError> {
    let w = weight_filtration(n)?;
    let (_, hi) = w.w_window();
    let mut out = Vec::new();
    for l in (0..=hi).rev() {
        let kl = w.w(l).intersection(&kernel(&n.pow(l as usize + 1)));
        let lower = kl.intersection(&w.w(l - 1));
        let reps = lower.complement_in(&kl);
        for j in 0..reps.cols() {
            out.push((reps.column(j), l));
        }
    }
    Ok(out)
}

/// Weight filtration of `N` relative to the increasing filtration `W`.
pub fn relative_weight_filtration<F: Field>(n: &Matrix<F>, w: &Filtration<F>) -> Result<Filtration<F>, MonodromyError> {
    nilpotency_index(n)?;
    let dim = n.rows();
    if w.ambient() != dim {
        return Err(MonodromyError::NotCompatible("filtration and endomorphism live on different spaces".into()));
    }
    let (wlo, whi) = w.w_window();
    for k in wlo..=whi {
        if !w.w(k).image(n).is_subspace_of(&w.w(k)) {
            return Err(MonodromyError::NotCompatible(format!("N does not preserve W_{k}")));
        }
    }
    let pad = dim as i64 + 2;
    let (m_lo, m_hi) = (wlo - pad, whi + pad);
    let mut m: BTreeMap<i64, Subspace<F>> = (m_lo..=m_hi).map(|x| (x, Subspace::zero(dim))).collect();
    let get = |m: &BTreeMap<i64, Subspace<F>>, x: i64| -> Subspace<F> {
        if x < m_lo {
            Subspace::zero(dim)
        } else if x > m_hi {
            m[&m_hi].clone()
        } else {
            m[&x].clone()
        }
    };
    for k in wlo + 1..=whi {
        let prev = w.w(k - 1);
        let q = Subquotient::new(w.w(k), prev.clone()).expect("nested");
        if q.dim() == 0 {
            continue;
        }
        let nq = &(&q.coord * n) * &q.reps;
        let basis_prev = prev.basis();
        let mut strings: Vec<(Vec<F>, i64)> = Vec::new();
        for (v, l) in lefschetz_basis(&nq)? {
            let v0 = q.reps.mul_vec(&v);
            let nl = n.pow(l as usize + 1);
            let target = get(&m, k - l - 2);
            let ann = target.annihilator().basis_rows().clone();
            let rhs: Vec<F> = ann.mul_vec(&nl.mul_vec(&v0)).into_iter().map(|x| -x).collect();
            let lifted = if basis_prev.cols() == 0 {
                rhs.iter().all(|x| x.is_negligible()).then(|| v0.clone())
            } else {
                let a = &(&ann * &nl) * &basis_prev;
                a.solve(&rhs).map(|y| {
                    let x = basis_prev.mul_vec(&y);
                    v0.iter().zip(&x).map(|(s, t)| s.clone() + t).collect()
                })
            };
            match lifted {
                Some(vt) => strings.push((vt, l)),
                None => {
                    return Err(MonodromyError::DoesNotExist(RelativeWitness {
                        weight: k,
                        l,
                        class: v.iter().map(|x| x.to_string()).collect(),
                    }))
                }
            }
        }
        for x in m_lo..=m_hi {
            let mut level = get(&m, x);
            for (vt, l) in &strings {
                let mut cur = vt.clone();
                for j in 0..=*l {
                    if k + l - 2 * j <= x {
                        level = level.sum(&Subspace::from_vectors(&[cur.clone()], dim));
                    }
                    cur = n.mul_vec(&cur);
                }
            }
            m.insert(x, level);
        }
    }
    let steps: Vec<Subspace<F>> = (m_lo..=m_hi).map(|x| get(&m, x)).collect();
    let out = Filtration::increasing(dim, m_lo, steps).map_err(|e| MonodromyError::NotCompatible(e.to_string()))?;
    if !is_relative_weight_filtration(n, w, &out) {
        return Err(MonodromyError::NotCompatible("constructed filtration fails the defining properties".into()));
    }
    Ok(out)
}

/// Checks `N M_m ⊆ M_{m-2}` and `N^l: gr^M_{k+l} gr^W_k ≅ gr^M_{k-l} gr^W_k`.
pub fn is_relative_weight_filtration<F: Field>(n: &Matrix<F>, w: &Filtration<F>, m: &Filtration<F>) -> bool {
    let (mlo, mhi) = m.w_window();
    if (mlo..=mhi).any(|x| !m.w(x).image(n).is_subspace_of(&m.w(x - 2))) {
        return false;
    }
    let (wlo, whi) = w.w_window();
    for k in wlo + 1..=whi {
        let wk = w.w(k);
        let wk1 = w.w(k - 1);
        let piece = |x: i64| {
            Subquotient::new(wk.intersection(&m.w(x)).sum(&wk1), wk.intersection(&m.w(x - 1)).sum(&wk1)).expect("nested")
        };
        let span = (mhi - mlo).abs() + 2;
        for l in 1..=span {
            let (s, t) = (piece(k + l), piece(k - l));
            match subquotient_map(&n.pow(l as usize), &s, &t) {
                Ok(mm) if mm.is_square() && mm.is_invertible() => {}
                _ => return false,
            }
        }
    }
    true
}

/// Result of comparing `W(Σ c_i N_i)` across samples `c`.
#[derive(Debug, Clone)]
pub struct CIndependence<F> {
    pub independent: bool,
    pub filtrations: Vec<Filtration<F>>,
    /// Index of the first sample disagreeing with sample 0.
    pub first_mismatch: Option<usize>,
}

/// `Σ c_i N_i`.
pub fn linear_combination<F: Field>(ns: &[Matrix<F>], c: &[F]) -> Matrix<F> {
    let dim = ns.first().map_or(0, |x| x.rows());
    let mut acc = Matrix::zeros(dim, dim);
    for (ni, ci) in ns.iter().zip(c) {
        acc = &acc + &ni.scale(ci);
    }
    acc
}

/// Computes `W(Σ c_i N_i)` for each sample and checks they agree.
pub fn c_independence_check<F: Field>(ns: &[Matrix<F>], samples: &[Vec<F>]) -> Result<CIndependence<F>, MonodromyError> {
    for i in 0..ns.len() {
        for j in i + 1..ns.len() {
            if &ns[i] * &ns[j] != &ns[j] * &ns[i] {
                return Err(MonodromyError::NonCommuting(i, j));
            }
        }
    }
    let mut filtrations = Vec::new();
    for c in samples {
        if c.len() != ns.len() {
            return Err(MonodromyError::NotCompatible("sample length differs from number of endomorphisms".into()));
        }
        filtrations.push(weight_filtration(&linear_combination(ns, c))?);
    }
    let first_mismatch = filtrations.iter().position(|f| f != &filtrations[0]);
    Ok(CIndependence { independent: first_mismatch.is_none(), filtrations, first_mismatch })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Q;

    #[test]
    fn single_block() {
        let n = Matrix::<Q>::from_i64(&[&[0, 1, 0], &[0, 0, 1], &[0, 0, 0]]);
        let w = weight_filtration(&n).unwrap();
        assert_eq!(w.w(-3).dim(), 0);
        assert_eq!(w.w(-2).dim(), 1);
        assert_eq!(w.w(-1).dim(), 1);
        assert_eq!(w.w(0).dim(), 2);
        assert_eq!(w.w(2).dim(), 3);
        assert!(is_weight_filtration_of(&n, &w, 0));
    }

    #[test]
    fn not_nilpotent() {
        let n = Matrix::<Q>::from_i64(&[&[1, 0], &[0, 0]]);
        assert_eq!(weight_filtration(&n), Err(MonodromyError::NotNilpotent));
    }

    #[test]
    fn relative_nonexistence_example() {
        let n = Matrix::<Q>::from_i64(&[&[0, 1], &[0, 0]]);
        let w = Filtration::<Q>::from_weights(&[0, 1], Direction::Increasing);
        match relative_weight_filtration(&n, &w) {
            Err(MonodromyError::DoesNotExist(wit)) => {
                assert_eq!(wit.weight, 1);
                assert_eq!(wit.l, 0);
            }
            other => panic!("expected DoesNotExist, got {other:?}"),
        }
    }

    #[test]
    fn relative_for_pure_filtration_is_shifted_absolute() {
        let n = Matrix::<Q>::from_i64(&[&[0, 1], &[0, 0]]);
        let w = Filtration::<Q>::from_weights(&[3, 3], Direction::Increasing);
        let m = relative_weight_filtration(&n, &w).unwrap();
        assert_eq!(m, weight_filtration(&n).unwrap().shift(3));
    }

    #[test]
    fn noncommuting_rejected() {
        let a = Matrix::<Q>::from_i64(&[&[0, 1], &[0, 0]]);
        let b = Matrix::<Q>::from_i64(&[&[0, 0], &[1, 0]]);
        let c = vec![Q::from_i64(1), Q::from_i64(1)];
        assert!(matches!(c_independence_check(&[a, b], &[c]), Err(MonodromyError::NonCommuting(0, 1))));
    }
}
