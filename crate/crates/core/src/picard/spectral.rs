use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Roots;
use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;

use super::{char_poly, is_hyperbolic, spectral_radius, CharPoly, IsometryMatrix, PicardError};
use crate::lattice::{DivisorClass, IntersectionForm};
use crate::scalar::{format_rational, FieldScalar, QuadSqrt5, Scalar};

/// Exact spectral data of a hyperbolic Wehler isometry.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EigenData {
    /// Dominant eigenvalue, `|lambda| > 1`.
    pub lambda: QuadSqrt5,
    pub lambda_inv: QuadSqrt5,
    /// Nef-side λ-eigenclass with first nonzero coordinate 1.
    pub e_plus: DivisorClass<QuadSqrt5>,
    /// Nef-side λ⁻¹-eigenclass scaled so that `⟨e_plus, e_minus⟩ = 1`.
    pub e_minus: DivisorClass<QuadSqrt5>,
    /// λ⁻¹-eigenclass before normalization.
    pub e_minus_raw: DivisorClass<QuadSqrt5>,
    pub third_eigenvalue: i64,
    #[serde(serialize_with = "ser_rational")]
    pub normalization_factor: BigRational,
    pub char_poly: CharPoly,
    pub entropy: f64,
}

fn ser_rational<S: serde::Serializer>(r: &BigRational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format_rational(r))
}

impl EigenData {
    pub fn lambda_f64(&self) -> f64 {
        self.lambda.to_f64()
    }

    pub fn e_plus_f64(&self) -> [f64; 3] {
        to_array(&self.e_plus)
    }

    pub fn e_minus_f64(&self) -> [f64; 3] {
        to_array(&self.e_minus)
    }
}

fn to_array(v: &DivisorClass<QuadSqrt5>) -> [f64; 3] {
    let f = v.to_f64();
    [f[0], f[1], f[2]]
}

fn q(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Factors `(x − r)(x² + px + c)` with `r = ±1` and the quadratic split over Q(√5).
fn split_roots(p: &CharPoly) -> Result<(i64, QuadSqrt5, QuadSqrt5), PicardError> {
    let [_, c2, c1, c0] = p.coeffs;
    let r = [1i64, -1]
        .into_iter()
        .find(|&r| p.eval(r) == 0)
        .ok_or_else(|| PicardError::UnsupportedField(p.to_string()))?;
    let pp = c2 + r;
    let cc = c1 + r * pp;
    debug_assert_eq!(-r * cc, c0);
    // roots (−p ± √disc)/2 with disc = 5s²
    let disc = pp * pp - 4 * cc;
    if disc <= 0 || disc % 5 != 0 {
        return Err(PicardError::UnsupportedField(p.to_string()));
    }
    let s2 = disc / 5;
    let s = s2.sqrt();
    if s * s != s2 {
        return Err(PicardError::UnsupportedField(p.to_string()));
    }
    let half = BigRational::new(BigInt::from(1), BigInt::from(2));
    let plus = QuadSqrt5::new(q(-pp) * &half, q(s) * &half);
    let minus = plus.conjugate();
    // dominant root first
    if plus.to_f64().abs() >= minus.to_f64().abs() {
        Ok((r, plus, minus))
    } else {
        Ok((r, minus, plus))
    }
}

/// Exact kernel vector of a rank-2 square matrix over a field, scaled so its first
/// nonzero coordinate is 1.
pub(crate) fn kernel_vector<S: FieldScalar>(mut a: Vec<Vec<S>>) -> Option<Vec<S>> {
    let n = a.len();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..n {
        let Some(p) = (row..n).find(|&r| !a[r][col].is_zero()) else { continue };
        a.swap(row, p);
        let inv = a[row][col].inv()?;
        for c in 0..n {
            a[row][c] = a[row][c].clone() * inv.clone();
        }
        for r in 0..n {
            if r != row && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for c in 0..n {
                    a[r][c] = a[r][c].clone() - f.clone() * a[row][c].clone();
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    if pivots.len() != n - 1 {
        return None;
    }
    let free = (0..n).find(|c| !pivots.contains(c))?;
    let mut v = vec![S::zero(); n];
    v[free] = S::one();
    for (r, &pc) in pivots.iter().enumerate() {
        v[pc] = -a[r][free].clone();
    }
    let lead = v.iter().find(|x| !x.is_zero())?.inv()?;
    Some(v.into_iter().map(|x| x * lead.clone()).collect())
}

fn eigenvector(m: &IsometryMatrix, mu: &QuadSqrt5) -> Result<DivisorClass<QuadSqrt5>, PicardError> {
    let rows = (0..3)
        .map(|i| {
            (0..3)
                .map(|j| {
                    let e = QuadSqrt5::from_int(m.entries()[i][j]);
                    if i == j {
                        e - mu.clone()
                    } else {
                        e
                    }
                })
                .collect()
        })
        .collect();
    let v = kernel_vector(rows).ok_or_else(|| {
        PicardError::InvariantViolation(format!("eigenspace of {mu} is not one-dimensional"))
    })?;
    let v = DivisorClass::new(v);
    if m.apply(&v) != v.scale(mu) {
        return Err(PicardError::InvariantViolation(format!("M v ≠ {mu} v")));
    }
    Ok(v)
}

/// Pairings `⟨v, h_i⟩` for the three basis classes.
fn basis_pairings(v: &DivisorClass<QuadSqrt5>) -> Vec<QuadSqrt5> {
    let form = IntersectionForm::wehler();
    (0..3).map(|i| form.pair(v, &DivisorClass::basis(3, i))).collect()
}

/// Flips `v` so it pairs positively with every `h_i`.
fn nef_side(v: DivisorClass<QuadSqrt5>) -> Result<DivisorClass<QuadSqrt5>, PicardError> {
    let p = basis_pairings(&v);
    if p.iter().all(|x| x.sign() == Ordering::Greater) {
        return Ok(v);
    }
    if p.iter().all(|x| x.sign() == Ordering::Less) {
        return Ok(v.neg());
    }
    let (basis, pairing) = p
        .iter()
        .enumerate()
        .find(|(_, x)| x.sign() != Ordering::Greater)
        .map(|(i, x)| (i + 1, x.to_string()))
        .unwrap_or((1, String::new()));
    Err(PicardError::NotNefSide { basis, pairing })
}

fn check_nef_side(v: &DivisorClass<QuadSqrt5>) -> Result<(), PicardError> {
    for (i, x) in basis_pairings(v).iter().enumerate() {
        if x.sign() != Ordering::Greater {
            return Err(PicardError::NotNefSide { basis: i + 1, pairing: x.to_string() });
        }
    }
    Ok(())
}

/// Rescales `e_minus` so that `⟨e_plus, e_minus⟩ = 1`; returns the pair and the factor.
pub fn normalize_pair(
    e_plus: &DivisorClass<QuadSqrt5>,
    e_minus: &DivisorClass<QuadSqrt5>,
) -> Result<(DivisorClass<QuadSqrt5>, DivisorClass<QuadSqrt5>, QuadSqrt5), PicardError> {
    let form = IntersectionForm::wehler();
    check_nef_side(e_plus)?;
    check_nef_side(e_minus)?;
    let p = form.pair(e_plus, e_minus);
    let factor = p.inv().ok_or(PicardError::DegeneratePair)?;
    Ok((e_plus.clone(), e_minus.scale(&factor), factor))
}

/// Exact eigen-decomposition of a hyperbolic isometry whose characteristic
/// polynomial splits over Q(√5).
pub fn spectral_data(m: &IsometryMatrix) -> Result<EigenData, PicardError> {
    if !is_hyperbolic(m) {
        return Err(PicardError::NotHyperbolic(spectral_radius(m)));
    }
    let poly = char_poly(m);
    let (third, lambda, lambda_inv) = split_roots(&poly)?;
    if lambda.clone() * lambda_inv.clone() * QuadSqrt5::from_int(third) != QuadSqrt5::from_int(m.det()) {
        return Err(PicardError::InvariantViolation("product of eigenvalues ≠ det".into()));
    }
    let form = IntersectionForm::wehler();
    let e_plus = nef_side(eigenvector(m, &lambda)?)?;
    let e_minus_raw = nef_side(eigenvector(m, &lambda_inv)?)?;
    if !form.square(&e_plus).is_zero() || !form.square(&e_minus_raw).is_zero() {
        return Err(PicardError::InvariantViolation("eigenclass is not isotropic".into()));
    }
    let (e_plus, e_minus, factor) = normalize_pair(&e_plus, &e_minus_raw)?;
    if !factor.is_rational() {
        return Err(PicardError::InvariantViolation(format!("normalization factor {factor} is irrational")));
    }
    if form.pair(&e_plus, &e_minus) != QuadSqrt5::one() {
        return Err(PicardError::InvariantViolation("⟨e+, e-⟩ ≠ 1".into()));
    }
    let entropy = lambda.to_f64().abs().ln();
    Ok(EigenData {
        lambda,
        lambda_inv,
        e_plus,
        e_minus,
        e_minus_raw,
        third_eigenvalue: third,
        normalization_factor: factor.a,
        char_poly: poly,
        entropy,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LineRationality {
    Rational,
    Irrational,
}

/// Whether the Q(√5)-line through `v` is defined over Q: writing `v = r + √5 s`
/// with rational vectors, this holds iff `r` and `s` are parallel.
pub fn eigenline_rationality(v: &DivisorClass<QuadSqrt5>) -> Result<LineRationality, PicardError> {
    if v.is_zero() {
        return Err(PicardError::ZeroClass);
    }
    let n = v.len();
    for i in 0..n {
        for j in (i + 1)..n {
            let minor = &v.coords[i].a * &v.coords[j].b - &v.coords[j].a * &v.coords[i].b;
            if !Zero::is_zero(&minor) {
                return Ok(LineRationality::Irrational);
            }
        }
    }
    Ok(LineRationality::Rational)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::picard::{automorphism_action, involution_isometry, Composition};
    use crate::scalar::rational;

    fn qs(a: (i64, i64), b: (i64, i64)) -> QuadSqrt5 {
        QuadSqrt5::new(rational(a.0, a.1), rational(b.0, b.1))
    }

    fn e_plus_expected() -> DivisorClass<QuadSqrt5> {
        DivisorClass::new(vec![QuadSqrt5::one(), qs((-1, 2), (1, 2)), qs((-3, 2), (1, 2))])
    }

    fn e_minus_raw_expected() -> DivisorClass<QuadSqrt5> {
        DivisorClass::new(vec![QuadSqrt5::from_int(-1), qs((1, 2), (1, 2)), qs((3, 2), (1, 2))])
    }

    #[test]
    fn wehler_spectral_data() {
        let t = automorphism_action(Composition::default());
        let d = spectral_data(&t).unwrap();
        assert_eq!(d.lambda, QuadSqrt5::from_ints(9, 4));
        assert_eq!(d.lambda_inv, QuadSqrt5::from_ints(9, -4));
        assert_eq!(d.third_eigenvalue, -1);
        assert_eq!(d.e_plus, e_plus_expected());
        assert_eq!(d.e_minus_raw, e_minus_raw_expected());
        assert_eq!(d.normalization_factor, rational(1, 10));
        assert_eq!(d.e_minus, e_minus_raw_expected().scale(&QuadSqrt5::from_rational(rational(1, 10))));
        assert!((d.lambda_f64() - 17.944_271_909_999_16).abs() < 1e-12);
    }

    #[test]
    fn inverse_swaps_eigenclasses() {
        let ti = automorphism_action(Composition::default().inverted());
        let d = spectral_data(&ti).unwrap();
        assert_eq!(d.lambda, QuadSqrt5::from_ints(9, 4));
        // the expanding class of T⁻¹ is the contracting class of T, up to scale
        let e = e_minus_raw_expected();
        assert_eq!(eigenline_rationality(&d.e_plus).unwrap(), LineRationality::Irrational);
        assert_eq!(ti.apply(&e), e.scale(&d.lambda));
    }

    #[test]
    fn normalize_examples() {
        let (p, m, f) = normalize_pair(&e_plus_expected(), &e_minus_raw_expected()).unwrap();
        assert_eq!(f, QuadSqrt5::from_rational(rational(1, 10)));
        let (p2, m2, f2) = normalize_pair(&p, &m).unwrap();
        assert_eq!((p2, m2), (p.clone(), m));
        assert_eq!(f2, QuadSqrt5::one());
        assert_eq!(normalize_pair(&p, &p).unwrap_err(), PicardError::DegeneratePair);
    }

    #[test]
    fn non_hyperbolic_rejected() {
        let m1 = involution_isometry(1).unwrap();
        assert!(matches!(spectral_data(&m1), Err(PicardError::NotHyperbolic(_))));
        assert!(matches!(spectral_data(&IsometryMatrix::identity()), Err(PicardError::NotHyperbolic(_))));
    }

    #[test]
    fn rationality_examples() {
        assert_eq!(eigenline_rationality(&e_plus_expected()).unwrap(), LineRationality::Irrational);
        let ones = DivisorClass::new(vec![QuadSqrt5::one(); 3]);
        assert_eq!(eigenline_rationality(&ones).unwrap(), LineRationality::Rational);
        let s = DivisorClass::new(vec![QuadSqrt5::from_ints(0, 1), QuadSqrt5::from_ints(0, 2), QuadSqrt5::from_ints(0, 3)]);
        assert_eq!(eigenline_rationality(&s).unwrap(), LineRationality::Rational);
        assert_eq!(eigenline_rationality(&DivisorClass::zero(3)).unwrap_err(), PicardError::ZeroClass);
    }
}
