use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use super::poly::{self, Pair};
use super::{SurfaceError, WehlerCoefficients};
use crate::scalar::format_rational;

pub type C64 = Complex64;

/// Divides a pair by its larger-modulus coordinate; that coordinate becomes exactly 1.
/// Returns the normalized pair, the chart index and the divisor.
pub fn normalize_pair(w: Pair<C64>) -> Option<(Pair<C64>, usize, C64)> {
    let k = chart_of(&w);
    let mu = w[k];
    if mu == C64::new(0.0, 0.0) || !mu.is_finite() {
        return None;
    }
    let mut out = [w[0] / mu, w[1] / mu];
    out[k] = C64::new(1.0, 0.0);
    Some((out, k, mu))
}

#[inline]
pub fn chart_of(w: &Pair<C64>) -> usize {
    if w[0].norm_sqr() >= w[1].norm_sqr() {
        0
    } else {
        1
    }
}

/// A point of (P¹)³ in floating point, each pair normalized to unit max-norm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SurfacePoint {
    pairs: [Pair<C64>; 3],
}

impl SurfacePoint {
    pub fn new(pairs: [Pair<C64>; 3]) -> Result<Self, SurfaceError> {
        let mut out = [[C64::new(0.0, 0.0); 2]; 3];
        for (j, w) in pairs.into_iter().enumerate() {
            out[j] = normalize_pair(w).ok_or(SurfaceError::ZeroPair { factor: j + 1 })?.0;
        }
        Ok(Self { pairs: out })
    }

    /// Point with affine coordinates `x = x₁/x₀` etc.
    pub fn from_affine(x: C64, y: C64, z: C64) -> Self {
        let one = C64::new(1.0, 0.0);
        Self::new([[one, x], [one, y], [one, z]]).expect("finite affine coordinates")
    }

    pub(crate) fn from_normalized(pairs: [Pair<C64>; 3]) -> Self {
        Self { pairs }
    }

    pub fn pairs(&self) -> &[Pair<C64>; 3] {
        &self.pairs
    }

    pub fn pair(&self, j: usize) -> &Pair<C64> {
        &self.pairs[j]
    }

    /// Chart index per pair: the coordinate equal to 1.
    pub fn charts(&self) -> [usize; 3] {
        [chart_of(&self.pairs[0]), chart_of(&self.pairs[1]), chart_of(&self.pairs[2])]
    }

    /// Chart coordinate `w_{1−k}/w_k` for each pair.
    pub fn chart_coords(&self) -> [C64; 3] {
        let k = self.charts();
        std::array::from_fn(|j| self.pairs[j][1 - k[j]])
    }

    /// Affine coordinate `w₁/w₀`, infinite at `[0 : 1]`.
    pub fn affine(&self, j: usize) -> C64 {
        self.pairs[j][1] / self.pairs[j][0]
    }

    pub fn residual(&self, coeffs: &WehlerCoefficients) -> f64 {
        poly::eval(coeffs.complex(), &self.pairs).norm()
    }

    /// Projective distance: max over pairs of `|a₀b₁ − a₁b₀|` on max-norm lifts.
    pub fn distance(&self, other: &Self) -> f64 {
        (0..3)
            .map(|j| {
                let (a, b) = (&self.pairs[j], &other.pairs[j]);
                (a[0] * b[1] - a[1] * b[0]).norm()
            })
            .fold(0.0, f64::max)
    }

    /// `log‖w‖₂²` for each pair.
    pub fn log_norms_sq(&self) -> [f64; 3] {
        std::array::from_fn(|j| (self.pairs[j][0].norm_sqr() + self.pairs[j][1].norm_sqr()).ln())
    }

    pub fn is_finite(&self) -> bool {
        self.pairs.iter().flatten().all(|z| z.is_finite())
    }

    pub fn with_pair(&self, j: usize, w: Pair<C64>) -> Result<Self, SurfaceError> {
        let mut pairs = self.pairs;
        pairs[j] = w;
        Self::new(pairs)
    }
}

impl fmt::Display for SurfacePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.pairs.iter().map(|w| format!("[{} : {}]", w[0], w[1])).collect();
        write!(f, "({})", s.join(", "))
    }
}

/// Primitive integer lift of a rational point: each pair has coprime entries and
/// its first nonzero entry positive.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ExactPoint {
    pairs: [Pair<BigInt>; 3],
}

pub(crate) fn primitive(w: Pair<BigInt>) -> Option<Pair<BigInt>> {
    let g = w[0].gcd(&w[1]);
    if g.is_zero() {
        return None;
    }
    let [mut a, mut b] = w;
    a /= &g;
    b /= &g;
    if a.is_negative() || (a.is_zero() && b.is_negative()) {
        a = -a;
        b = -b;
    }
    Some([a, b])
}

impl ExactPoint {
    pub fn new(pairs: [Pair<BigInt>; 3]) -> Result<Self, SurfaceError> {
        let mut out: [Pair<BigInt>; 3] = Default::default();
        for (j, w) in pairs.into_iter().enumerate() {
            out[j] = primitive(w).ok_or(SurfaceError::ZeroPair { factor: j + 1 })?;
        }
        Ok(Self { pairs: out })
    }

    pub fn from_ints(p: [[i64; 2]; 3]) -> Result<Self, SurfaceError> {
        Self::new(p.map(|w| w.map(BigInt::from)))
    }

    /// Point with rational affine coordinates.
    pub fn from_affine(coords: [BigRational; 3]) -> Self {
        let pairs = coords.map(|r| [r.denom().clone(), r.numer().clone()]);
        Self::new(pairs).expect("rational denominators are nonzero")
    }

    pub fn pairs(&self) -> &[Pair<BigInt>; 3] {
        &self.pairs
    }

    pub(crate) fn from_primitive(pairs: [Pair<BigInt>; 3]) -> Self {
        Self { pairs }
    }

    /// Affine coordinate `w₁/w₀`, `None` at infinity.
    pub fn affine(&self, j: usize) -> Option<BigRational> {
        let [a, b] = &self.pairs[j];
        (!a.is_zero()).then(|| BigRational::new(b.clone(), a.clone()))
    }

    pub fn affine_string(&self, j: usize) -> String {
        self.affine(j).map(|r| format_rational(&r)).unwrap_or_else(|| "inf".into())
    }

    pub fn eval(&self, coeffs: &WehlerCoefficients) -> BigInt {
        poly::eval(coeffs.integral(), &self.pairs)
    }

    pub fn on_surface(&self, coeffs: &WehlerCoefficients) -> bool {
        self.eval(coeffs).is_zero()
    }

    /// Logarithmic height: `Σ_j log max(|w_{j,0}|, |w_{j,1}|)`.
    pub fn log_height(&self) -> f64 {
        self.pairs.iter().map(|w| log_abs(&w[0]).max(log_abs(&w[1]))).sum()
    }

    /// Total number of decimal digits over the six coordinates. Large values are
    /// counted from the logarithm, which can be off by one next to a power of ten.
    pub fn digits(&self) -> usize {
        self.pairs
            .iter()
            .flatten()
            .map(|v| {
                if v.bits() < 64 {
                    v.magnitude().to_string().len()
                } else {
                    (log_abs(v) / std::f64::consts::LN_10).floor() as usize + 1
                }
            })
            .sum()
    }

    pub fn to_float(&self) -> SurfacePoint {
        let pairs = self.pairs.clone().map(|w| {
            // scale by a common power of two so huge coordinates stay finite
            let bits = w[0].bits().max(w[1].bits()) as i64;
            let shift = (bits - 60).max(0) as usize;
            let f = |v: &BigInt| C64::new(crate::scalar::ratio_to_f64(&BigRational::from(v >> shift)), 0.0);
            [f(&w[0]), f(&w[1])]
        });
        let pairs = pairs.map(|w| {
            if w[0] == C64::new(0.0, 0.0) && w[1] == C64::new(0.0, 0.0) {
                [C64::new(1.0, 0.0), w[1]]
            } else {
                w
            }
        });
        SurfacePoint::new(pairs).expect("nonzero pairs")
    }
}

pub(crate) fn log_abs(v: &BigInt) -> f64 {
    if v.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = v.bits();
    if bits < 1000 {
        return crate::scalar::ratio_to_f64(&BigRational::from(v.abs())).ln();
    }
    let shift = bits - 64;
    let top = crate::scalar::ratio_to_f64(&BigRational::from(v.abs() >> shift));
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

impl fmt::Display for ExactPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.pairs.iter().map(|w| format!("[{} : {}]", w[0], w[1])).collect();
        write!(f, "({})", s.join(", "))
    }
}

/// A point of P¹ distributed by the Fubini–Study measure, via the round sphere.
pub fn random_p1<R: Rng + ?Sized>(rng: &mut R) -> Pair<C64> {
    loop {
        let v: [f64; 3] = [rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal)];
        let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if r < 1e-12 {
            continue;
        }
        let (x, y, z) = (v[0] / r, v[1] / r, v[2] / r);
        // stereographic projection, written in the better-conditioned chart
        let w = if z <= 0.0 {
            [C64::new(1.0 - z, 0.0), C64::new(x, y)]
        } else {
            [C64::new(x, -y), C64::new(1.0 + z, 0.0)]
        };
        if let Some((w, _, _)) = normalize_pair(w) {
            return w;
        }
    }
}

/// Both roots `[A : q]`, `[q : C]` of `A u² + B u + C` (with `u = w₁/w₀`),
/// using the cancellation-free form of the quadratic formula.
pub fn fiber_roots(abc: &[C64; 3]) -> Option<[Pair<C64>; 2]> {
    let [a, b, c] = *abc;
    let disc = (b * b - 4.0 * a * c).sqrt();
    let s = if (b.conj() * disc).re >= 0.0 { 1.0 } else { -1.0 };
    let q = -(b + s * disc) / 2.0;
    let zero = C64::new(0.0, 0.0);
    if q == zero {
        // B = 0 and AC = 0
        return match (a == zero, c == zero) {
            (true, true) => None,
            (true, false) => Some([[zero, C64::new(1.0, 0.0)]; 2]),
            (false, _) => Some([[C64::new(1.0, 0.0), zero]; 2]),
        };
    }
    let r1 = normalize_pair([a, q])?.0;
    let r2 = normalize_pair([q, c])?.0;
    Some([r1, r2])
}

pub(crate) fn one() -> C64 {
    C64::new(1.0, 0.0)
}
