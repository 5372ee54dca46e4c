//! Exact scalars: integers, rationals and the real quadratic field Q(√5).
//!
//! Divisor classes and isometry spectra are computed over these types so that
//! isotropy, eigenvector and normalization identities can be checked with `==`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

/// Ring operations shared by every coordinate type of a [`crate::lattice::DivisorClass`].
pub trait Scalar:
    Clone
    + PartialEq
    + fmt::Debug
    + fmt::Display
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_int(n: i64) -> Self;
    fn is_zero(&self) -> bool;
    /// Sign relative to zero; exact for every implementor.
    fn sign(&self) -> Ordering;
    fn to_f64(&self) -> f64;
}

/// Scalars with exact division.
pub trait FieldScalar: Scalar {
    fn inv(&self) -> Option<Self>;
}

impl Scalar for i64 {
    fn zero() -> Self {
        0
    }
    fn one() -> Self {
        1
    }
    fn from_int(n: i64) -> Self {
        n
    }
    fn is_zero(&self) -> bool {
        *self == 0
    }
    fn sign(&self) -> Ordering {
        self.cmp(&0)
    }
    fn to_f64(&self) -> f64 {
        *self as f64
    }
}

impl Scalar for BigRational {
    fn zero() -> Self {
        <BigRational as Zero>::zero()
    }
    fn one() -> Self {
        <BigRational as One>::one()
    }
    fn from_int(n: i64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn sign(&self) -> Ordering {
        if Zero::is_zero(self) {
            Ordering::Equal
        } else if self.is_positive() {
            Ordering::Greater
        } else {
            Ordering::Less
        }
    }
    fn to_f64(&self) -> f64 {
        ratio_to_f64(self)
    }
}

impl FieldScalar for BigRational {
    fn inv(&self) -> Option<Self> {
        if Zero::is_zero(self) {
            None
        } else {
            Some(self.recip())
        }
    }
}

pub fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Lossy conversion that survives numerators and denominators beyond the f64 range.
pub fn ratio_to_f64(r: &BigRational) -> f64 {
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    let nb = r.numer().bits() as i64;
    let db = r.denom().bits() as i64;
    let shift_n = (nb - 900).max(0) as usize;
    let shift_d = (db - 900).max(0) as usize;
    let n = (r.numer() >> shift_n).to_f64().unwrap_or(0.0);
    let d = (r.denom() >> shift_d).to_f64().unwrap_or(1.0);
    n / d * 2f64.powi(shift_n as i32 - shift_d as i32)
}

/// `"p/q"`, or `"p"` for integers.
pub fn format_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// An element `a + b√5` of Q(√5) with rational `a`, `b`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct QuadSqrt5 {
    pub a: BigRational,
    pub b: BigRational,
}

impl QuadSqrt5 {
    pub fn new(a: BigRational, b: BigRational) -> Self {
        Self { a, b }
    }

    pub fn from_ints(a: i64, b: i64) -> Self {
        Self::new(BigRational::from_int(a), BigRational::from_int(b))
    }

    pub fn from_rational(a: BigRational) -> Self {
        Self::new(a, <BigRational as Zero>::zero())
    }

    pub fn sqrt5() -> Self {
        Self::from_ints(0, 1)
    }

    /// Galois conjugate `a − b√5`.
    pub fn conjugate(&self) -> Self {
        Self::new(self.a.clone(), -self.b.clone())
    }

    /// Field norm `a² − 5b²`.
    pub fn norm(&self) -> BigRational {
        &self.a * &self.a - BigRational::from_int(5) * &self.b * &self.b
    }

    pub fn is_rational(&self) -> bool {
        Zero::is_zero(&self.b)
    }

    pub fn scale(&self, r: &BigRational) -> Self {
        Self::new(&self.a * r, &self.b * r)
    }
}

impl fmt::Display for QuadSqrt5 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let a_zero = Zero::is_zero(&self.a);
        let b_zero = Zero::is_zero(&self.b);
        match (a_zero, b_zero) {
            (_, true) => write!(f, "{}", format_rational(&self.a)),
            (true, false) => write!(f, "{}√5", format_rational(&self.b)),
            (false, false) => {
                if self.b.is_negative() {
                    write!(f, "{}-{}√5", format_rational(&self.a), format_rational(&-self.b.clone()))
                } else {
                    write!(f, "{}+{}√5", format_rational(&self.a), format_rational(&self.b))
                }
            }
        }
    }
}

impl Add for QuadSqrt5 {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.a + rhs.a, self.b + rhs.b)
    }
}

impl Sub for QuadSqrt5 {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.a - rhs.a, self.b - rhs.b)
    }
}

impl Mul for QuadSqrt5 {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let five = BigRational::from_int(5);
        let a = &self.a * &rhs.a + five * &self.b * &rhs.b;
        let b = &self.a * &rhs.b + &self.b * &rhs.a;
        Self::new(a, b)
    }
}

impl Neg for QuadSqrt5 {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.a, -self.b)
    }
}

impl Scalar for QuadSqrt5 {
    fn zero() -> Self {
        Self::from_ints(0, 0)
    }
    fn one() -> Self {
        Self::from_ints(1, 0)
    }
    fn from_int(n: i64) -> Self {
        Self::from_ints(n, 0)
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(&self.a) && Zero::is_zero(&self.b)
    }
    fn sign(&self) -> Ordering {
        let sa = Scalar::sign(&self.a);
        let sb = Scalar::sign(&self.b);
        if sb == Ordering::Equal {
            return sa;
        }
        if sa == Ordering::Equal || sa == sb {
            return sb;
        }
        // opposite signs: compare a² with 5b²
        let a2 = &self.a * &self.a;
        let b2 = BigRational::from_int(5) * &self.b * &self.b;
        match a2.cmp(&b2) {
            Ordering::Greater => sa,
            Ordering::Less => sb,
            Ordering::Equal => Ordering::Equal,
        }
    }
    fn to_f64(&self) -> f64 {
        ratio_to_f64(&self.a) + ratio_to_f64(&self.b) * 5f64.sqrt()
    }
}

impl FieldScalar for QuadSqrt5 {
    fn inv(&self) -> Option<Self> {
        let n = self.norm();
        if Zero::is_zero(&n) {
            return None;
        }
        let c = self.conjugate();
        Some(Self::new(c.a / &n, c.b / &n))
    }
}

impl Serialize for QuadSqrt5 {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("QuadSqrt5", 3)?;
        st.serialize_field("a", &format_rational(&self.a))?;
        st.serialize_field("b", &format_rational(&self.b))?;
        st.serialize_field("approx", &self.to_f64())?;
        st.end()
    }
}
