//! Scalar fields.
//!
//! All structural code is generic over [`Field`]. The exact instances are
//! [`Q`] (big rationals) and [`Qi`] (Gaussian rationals, `Q(i)`), which carry
//! complex conjugation. `f64` is provided for experimentation; it uses a
//! tolerance for zero tests and is never used by the degeneration pipeline.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Neg;

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{NumRef, One, Signed, ToPrimitive, Zero};

/// Rational numbers.
pub type Q = BigRational;
/// Gaussian rationals `Q(i)`.
pub type Qi = Complex<BigRational>;

/// A field with conjugation and an exact embedding into `Q(i)`.
pub trait Field:
    NumRef + Neg<Output = Self> + Clone + PartialEq + fmt::Debug + fmt::Display + Send + Sync + 'static
{
    /// Whether arithmetic is exact.
    const EXACT: bool;

    /// Zero test used for pivoting.
    fn is_negligible(&self) -> bool {
        self.is_zero()
    }
    fn conj(&self) -> Self;
    fn from_i64(n: i64) -> Self;
    fn from_q(r: &Q) -> Self;
    /// `None` when `z` does not lie in this field.
    fn from_qi(z: &Qi) -> Option<Self>;
    fn to_qi(&self) -> Qi;
    /// Sign of a real element; `None` for non-real elements.
    fn real_sign(&self) -> Option<Ordering>;
    /// The imaginary unit, if it lies in the field.
    fn imag_unit() -> Option<Self>;

    fn is_real(&self) -> bool {
        self.real_sign().is_some()
    }
    fn from_ratio(n: i64, d: i64) -> Self {
        Self::from_q(&Q::new(BigInt::from(n), BigInt::from(d)))
    }
}

fn sign_of(r: &Q) -> Ordering {
    if r.is_zero() {
        Ordering::Equal
    } else if r.is_positive() {
        Ordering::Greater
    } else {
        Ordering::Less
    }
}

impl Field for Q {
    const EXACT: bool = true;
    fn conj(&self) -> Self {
        self.clone()
    }
    fn from_i64(n: i64) -> Self {
        Q::from_integer(BigInt::from(n))
    }
    fn from_q(r: &Q) -> Self {
        r.clone()
    }
    fn from_qi(z: &Qi) -> Option<Self> {
        z.im.is_zero().then(|| z.re.clone())
    }
    fn to_qi(&self) -> Qi {
        Complex::new(self.clone(), Q::zero())
    }
    fn real_sign(&self) -> Option<Ordering> {
        Some(sign_of(self))
    }
    fn imag_unit() -> Option<Self> {
        None
    }
}

impl Field for Qi {
    const EXACT: bool = true;
    fn conj(&self) -> Self {
        Complex::conj(self)
    }
    fn from_i64(n: i64) -> Self {
        Complex::new(Q::from_i64(n), Q::zero())
    }
    fn from_q(r: &Q) -> Self {
        Complex::new(r.clone(), Q::zero())
    }
    fn from_qi(z: &Qi) -> Option<Self> {
        Some(z.clone())
    }
    fn to_qi(&self) -> Qi {
        self.clone()
    }
    fn real_sign(&self) -> Option<Ordering> {
        self.im.is_zero().then(|| sign_of(&self.re))
    }
    fn imag_unit() -> Option<Self> {
        Some(Complex::new(Q::zero(), Q::one()))
    }
}

/// Tolerance for the `f64` instance.
pub const F64_TOL: f64 = 1e-9;

impl Field for f64 {
    const EXACT: bool = false;
    fn is_negligible(&self) -> bool {
        self.abs() < F64_TOL
    }
    fn conj(&self) -> Self {
        *self
    }
    fn from_i64(n: i64) -> Self {
        n as f64
    }
    fn from_q(r: &Q) -> Self {
        r.to_f64().unwrap_or(f64::NAN)
    }
    fn from_qi(z: &Qi) -> Option<Self> {
        z.im.is_zero().then(|| z.re.to_f64().unwrap_or(f64::NAN))
    }
    fn to_qi(&self) -> Qi {
        Complex::new(Q::from_float(*self).unwrap_or_else(Q::zero), Q::zero())
    }
    fn real_sign(&self) -> Option<Ordering> {
        Some(if self.abs() < F64_TOL {
            Ordering::Equal
        } else if *self > 0.0 {
            Ordering::Greater
        } else {
            Ordering::Less
        })
    }
    fn imag_unit() -> Option<Self> {
        None
    }
}

/// `i^n` in `Q(i)`.
pub fn i_pow(n: i64) -> Qi {
    match n.rem_euclid(4) {
        0 => Qi::from_i64(1),
        1 => Complex::new(Q::zero(), Q::one()),
        2 => Qi::from_i64(-1),
        _ => Complex::new(Q::zero(), -Q::one()),
    }
}

/// `(-1)^n`.
pub fn sign_pow(n: i64) -> i64 {
    if n.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

/// Parses `"a"`, `"a/b"` or `"-a/b"` into a rational.
pub fn parse_q(s: &str) -> Option<Q> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            (!d.is_zero()).then(|| Q::new(n, d))
        }
        None => s.parse::<BigInt>().ok().map(Q::from_integer),
    }
}

/// Formats a rational as `"a"` or `"a/b"`.
pub fn format_q(r: &Q) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_roundtrip() {
        for s in ["0", "3", "-7/2", "5/10"] {
            let r = parse_q(s).unwrap();
            assert_eq!(parse_q(&format_q(&r)).unwrap(), r);
        }
        assert_eq!(format_q(&parse_q("5/10").unwrap()), "1/2");
        assert!(parse_q("1/0").is_none());
        assert!(parse_q("x").is_none());
    }

    #[test]
    fn gaussian_division_and_conjugation() {
        let z = Qi::new(Q::from_i64(1), Q::from_i64(2));
        let w = z.clone() / z.clone();
        assert_eq!(w, Qi::from_i64(1));
        let n = z.clone() * Field::conj(&z);
        assert_eq!(n.real_sign(), Some(Ordering::Greater));
        assert_eq!(z.real_sign(), None);
        assert_eq!(i_pow(2), Qi::from_i64(-1));
        assert_eq!(i_pow(-1) * i_pow(1), Qi::from_i64(1));
    }

    #[test]
    fn embeddings() {
        let r = Q::from_ratio(3, 4);
        assert_eq!(Q::from_qi(&r.to_qi()), Some(r.clone()));
        assert_eq!(Q::from_qi(&i_pow(1)), None);
        assert_eq!(f64::from_q(&r), 0.75);
    }
}
