//! Action of the Vieta involutions and their composition on NS(X) ≅ Z³.
//!
//! Convention: the automorphism is `T = σ_a ∘ σ_b ∘ σ_c` on points for the
//! order `(a, b, c)`, so the pullback on classes is `T* = M_c M_b M_a`. The
//! default order is `(1, 2, 3)`.

mod spectral;

pub use spectral::{
    eigenline_rationality, normalize_pair, spectral_data, EigenData, LineRationality,
};

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::{DivisorClass, IntersectionForm};
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PicardError {
    #[error("factor index {0} out of range 1..=3")]
    FactorOutOfRange(usize),
    #[error("invalid composition order {0:?}: expected a permutation of 1,2,3")]
    InvalidOrder(String),
    #[error("matrix is not an isometry of the intersection form")]
    NotIsometry,
    #[error("determinant {0} is not ±1")]
    NotUnimodular(i64),
    #[error("isometry is not hyperbolic (spectral radius {0})")]
    NotHyperbolic(f64),
    #[error("characteristic polynomial {0} does not split over Q(√5)")]
    UnsupportedField(String),
    #[error("degenerate eigenclass pair: pairing is zero")]
    DegeneratePair,
    #[error("class is not on the nef side: pairing with h{basis} is {pairing}")]
    NotNefSide { basis: usize, pairing: String },
    #[error("zero class has no line")]
    ZeroClass,
    #[error("exact identity failed: {0}")]
    InvariantViolation(String),
}

/// One of the three P¹ factors of (P¹)³, 0-based internally.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Factor {
    X,
    Y,
    Z,
}

impl Factor {
    pub const ALL: [Factor; 3] = [Factor::X, Factor::Y, Factor::Z];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    /// 1-based factor number as used in the CLI and reports.
    pub fn from_number(i: usize) -> Result<Self, PicardError> {
        i.checked_sub(1).and_then(Self::from_index).ok_or(PicardError::FactorOutOfRange(i))
    }

    pub fn number(self) -> usize {
        self.index() + 1
    }

    /// The other two factors in increasing order.
    pub fn others(self) -> [Factor; 2] {
        match self {
            Factor::X => [Factor::Y, Factor::Z],
            Factor::Y => [Factor::X, Factor::Z],
            Factor::Z => [Factor::X, Factor::Y],
        }
    }
}

/// Order of the involutions in `T = σ_a ∘ σ_b ∘ σ_c`, with optional inversion.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Composition {
    pub order: [Factor; 3],
    pub inverse: bool,
}

impl Default for Composition {
    fn default() -> Self {
        Self { order: [Factor::X, Factor::Y, Factor::Z], inverse: false }
    }
}

impl Composition {
    pub fn new(order: [Factor; 3], inverse: bool) -> Result<Self, PicardError> {
        let mut seen = [false; 3];
        for f in order {
            seen[f.index()] = true;
        }
        if seen.iter().all(|&s| s) {
            Ok(Self { order, inverse })
        } else {
            Err(PicardError::InvalidOrder(format!("{order:?}")))
        }
    }

    pub fn inverted(self) -> Self {
        Self { inverse: !self.inverse, ..self }
    }

    /// Involutions in the order they act on a point (innermost first).
    pub fn application_order(&self) -> [Factor; 3] {
        let [a, b, c] = self.order;
        if self.inverse {
            [a, b, c]
        } else {
            [c, b, a]
        }
    }

    pub fn order_string(&self) -> String {
        self.order.iter().map(|f| f.number().to_string()).collect()
    }

    pub fn describe(&self) -> String {
        let [a, b, c] = self.order.map(Factor::number);
        if self.inverse {
            format!("T^-1 with T = s{a} o s{b} o s{c}; (T^-1)* = M{a} M{b} M{c}")
        } else {
            format!("T = s{a} o s{b} o s{c}; T* = M{c} M{b} M{a}")
        }
    }
}

impl FromStr for Composition {
    type Err = PicardError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let digits: Vec<usize> = s
            .chars()
            .filter(|c| !matches!(c, ',' | ' '))
            .map(|c| c.to_digit(10).map(|d| d as usize))
            .collect::<Option<_>>()
            .ok_or_else(|| PicardError::InvalidOrder(s.to_string()))?;
        if digits.len() != 3 {
            return Err(PicardError::InvalidOrder(s.to_string()));
        }
        let mut order = [Factor::X; 3];
        for (slot, d) in order.iter_mut().zip(digits) {
            *slot = Factor::from_number(d).map_err(|_| PicardError::InvalidOrder(s.to_string()))?;
        }
        Composition::new(order, false).map_err(|_| PicardError::InvalidOrder(s.to_string()))
    }
}

/// Integer 3×3 matrix preserving the Wehler intersection form, acting on
/// coordinate column vectors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct IsometryMatrix {
    entries: [[i64; 3]; 3],
}

impl IsometryMatrix {
    pub fn new(entries: [[i64; 3]; 3]) -> Result<Self, PicardError> {
        Self::for_form(entries, &IntersectionForm::wehler())
    }

    pub fn for_form(entries: [[i64; 3]; 3], form: &IntersectionForm) -> Result<Self, PicardError> {
        let m = Self { entries };
        let det = m.det();
        if det != 1 && det != -1 {
            return Err(PicardError::NotUnimodular(det));
        }
        if form.rank() != 3 {
            return Err(PicardError::NotIsometry);
        }
        let g = form.gram();
        for i in 0..3 {
            for j in 0..3 {
                let mut s = 0i64;
                for k in 0..3 {
                    for l in 0..3 {
                        s += entries[k][i] * g[k][l] * entries[l][j];
                    }
                }
                if s != g[i][j] {
                    return Err(PicardError::NotIsometry);
                }
            }
        }
        Ok(m)
    }

    pub fn identity() -> Self {
        Self { entries: [[1, 0, 0], [0, 1, 0], [0, 0, 1]] }
    }

    pub fn entries(&self) -> &[[i64; 3]; 3] {
        &self.entries
    }

    pub fn det(&self) -> i64 {
        let m = &self.entries;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    pub fn trace(&self) -> i64 {
        (0..3).map(|i| self.entries[i][i]).sum()
    }

    /// Matrix product; the product of two isometries is again one.
    pub fn compose(&self, rhs: &Self) -> Self {
        Self { entries: mat_mul(&self.entries, &rhs.entries) }
    }

    pub fn transpose(&self) -> [[i64; 3]; 3] {
        let mut t = [[0; 3]; 3];
        for (i, row) in self.entries.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                t[j][i] = v;
            }
        }
        t
    }

    pub fn apply<S: Scalar>(&self, v: &DivisorClass<S>) -> DivisorClass<S> {
        let coords = (0..3)
            .map(|i| {
                (0..3).fold(S::zero(), |acc, j| acc + S::from_int(self.entries[i][j]) * v.coords[j].clone())
            })
            .collect();
        DivisorClass::new(coords)
    }
}

impl fmt::Display for IsometryMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self
            .entries
            .iter()
            .map(|r| format!("[{}, {}, {}]", r[0], r[1], r[2]))
            .collect();
        write!(f, "[{}]", rows.join(", "))
    }
}

pub(crate) fn mat_mul(a: &[[i64; 3]; 3], b: &[[i64; 3]; 3]) -> [[i64; 3]; 3] {
    let mut c = [[0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            c[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    c
}

/// Pullback of the i-th Vieta involution: fixes `h_j`, `h_k` and sends
/// `h_i ↦ −h_i + 2h_j + 2h_k`.
pub fn involution_isometry(i: usize) -> Result<IsometryMatrix, PicardError> {
    let f = Factor::from_number(i)?;
    Ok(involution_matrix(f))
}

pub(crate) fn involution_matrix(f: Factor) -> IsometryMatrix {
    let i = f.index();
    let mut e = [[0i64; 3]; 3];
    for (k, row) in e.iter_mut().enumerate() {
        row[k] = 1;
    }
    for (k, row) in e.iter_mut().enumerate() {
        row[i] = if k == i { -1 } else { 2 };
    }
    IsometryMatrix { entries: e }
}

/// `T*` for `T = σ_a ∘ σ_b ∘ σ_c`, or `(T⁻¹)*` when `composition.inverse`.
pub fn automorphism_action(composition: Composition) -> IsometryMatrix {
    // pullback reverses composition: the innermost map ends up leftmost
    let mut m = IsometryMatrix::identity();
    for f in composition.application_order() {
        m = m.compose(&involution_matrix(f));
    }
    m
}

/// Monic characteristic polynomial `x³ + c₂x² + c₁x + c₀`, returned as `[1, c₂, c₁, c₀]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CharPoly {
    pub coeffs: [i64; 4],
}

impl CharPoly {
    pub fn eval(&self, x: i64) -> i64 {
        self.coeffs.iter().fold(0, |acc, &c| acc * x + c)
    }

    /// p(M) as an integer matrix; zero by Cayley–Hamilton.
    pub fn eval_matrix(&self, m: &IsometryMatrix) -> [[i64; 3]; 3] {
        let mut acc = [[0i64; 3]; 3];
        for &c in &self.coeffs {
            acc = mat_mul(&acc, m.entries());
            for (i, row) in acc.iter_mut().enumerate() {
                row[i] += c;
            }
        }
        acc
    }
}

impl fmt::Display for CharPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [_, c2, c1, c0] = self.coeffs;
        let term = |c: i64, mono: &str| -> String {
            match c {
                0 => String::new(),
                1 if !mono.is_empty() => format!(" + {mono}"),
                -1 if !mono.is_empty() => format!(" - {mono}"),
                c if c < 0 => format!(" - {}{mono}", -c),
                c => format!(" + {c}{mono}"),
            }
        };
        write!(f, "x^3{}{}{}", term(c2, "x^2"), term(c1, "x"), term(c0, ""))
    }
}

pub fn char_poly(m: &IsometryMatrix) -> CharPoly {
    let e = m.entries();
    let minors = (e[0][0] * e[1][1] - e[0][1] * e[1][0])
        + (e[0][0] * e[2][2] - e[0][2] * e[2][0])
        + (e[1][1] * e[2][2] - e[1][2] * e[2][1]);
    CharPoly { coeffs: [1, -m.trace(), minors, -m.det()] }
}

/// Largest modulus among the roots of the characteristic polynomial.
pub fn spectral_radius(m: &IsometryMatrix) -> f64 {
    cubic_roots(&char_poly(m)).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn cubic_roots(p: &CharPoly) -> [Complex64; 3] {
    let [_, c2, c1, c0] = p.coeffs;
    // a rational root of a monic integer cubic divides c0
    let divisors = |n: i64| -> Vec<i64> {
        if n == 0 {
            return vec![0];
        }
        let n = n.abs();
        (1..=n).filter(|d| n % d == 0).flat_map(|d| [d, -d]).collect()
    };
    if let Some(r) = divisors(c0).into_iter().find(|&r| p.eval(r) == 0) {
        // x³ + c2x² + c1x + c0 = (x − r)(x² + px + q)
        let pp = c2 + r;
        let qq = c1 + r * pp;
        let disc = Complex64::new((pp * pp - 4 * qq) as f64, 0.0).sqrt();
        let half = Complex64::new(-pp as f64 / 2.0, 0.0);
        return [Complex64::new(r as f64, 0.0), half + disc / 2.0, half - disc / 2.0];
    }
    // Durand–Kerner for the irreducible case
    let f = |z: Complex64| ((z + c2 as f64) * z + c1 as f64) * z + c0 as f64;
    let mut z = [
        Complex64::new(0.4, 0.9),
        Complex64::new(0.4, 0.9).powu(2),
        Complex64::new(0.4, 0.9).powu(3),
    ];
    for _ in 0..500 {
        for i in 0..3 {
            let mut den = Complex64::new(1.0, 0.0);
            for j in 0..3 {
                if i != j {
                    den *= z[i] - z[j];
                }
            }
            z[i] -= f(z[i]) / den;
        }
    }
    z
}

/// Spectral radius strictly above 1.
pub fn is_hyperbolic(m: &IsometryMatrix) -> bool {
    // spectral radii of integer unimodular matrices are algebraic units bounded away from 1
    spectral_radius(m) > 1.0 + 1e-9
}

/// Topological entropy `log(spectral radius)`, zero when not hyperbolic.
pub fn entropy(m: &IsometryMatrix) -> f64 {
    if is_hyperbolic(m) {
        spectral_radius(m).ln()
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn involution_matrices() {
        let m1 = involution_isometry(1).unwrap();
        assert_eq!(m1.entries(), &[[-1, 0, 0], [2, 1, 0], [2, 0, 1]]);
        for i in 1..=3 {
            let m = involution_isometry(i).unwrap();
            assert_eq!(m.compose(&m), IsometryMatrix::identity());
            assert_eq!(m.det(), -1);
            IsometryMatrix::new(*m.entries()).expect("isometry");
        }
        assert_eq!(involution_isometry(0), Err(PicardError::FactorOutOfRange(0)));
        assert_eq!(involution_isometry(4), Err(PicardError::FactorOutOfRange(4)));
    }

    #[test]
    fn default_automorphism() {
        let t = automorphism_action(Composition::default());
        assert_eq!(t.entries(), &[[15, 6, 2], [10, 3, 2], [-6, -2, -1]]);
        assert_eq!(t.trace(), 17);
        assert_eq!(t.det(), -1);
        let ti = automorphism_action(Composition::default().inverted());
        assert_eq!(t.compose(&ti), IsometryMatrix::identity());
    }

    #[test]
    fn char_polys() {
        let t = automorphism_action(Composition::default());
        assert_eq!(char_poly(&t).coeffs, [1, -17, -17, 1]);
        assert_eq!(char_poly(&t).to_string(), "x^3 - 17x^2 - 17x + 1");
        assert_eq!(char_poly(&IsometryMatrix::identity()).coeffs, [1, -3, 3, -1]);
        // (x-1)²(x+1) = x³ - x² - x + 1
        assert_eq!(char_poly(&involution_isometry(1).unwrap()).coeffs, [1, -1, -1, 1]);
        assert_eq!(char_poly(&t).eval_matrix(&t), [[0; 3]; 3]);
    }

    #[test]
    fn hyperbolicity_and_entropy() {
        let t = automorphism_action(Composition::default());
        let m1 = involution_isometry(1).unwrap();
        assert!(is_hyperbolic(&t));
        assert!(!is_hyperbolic(&m1));
        assert!(!is_hyperbolic(&IsometryMatrix::identity()));
        assert!((entropy(&t) - 2.887_270_950_357_620_6).abs() < 1e-12);
        assert_eq!(entropy(&m1), 0.0);
        assert_eq!(entropy(&IsometryMatrix::identity()), 0.0);
        let ti = automorphism_action(Composition::default().inverted());
        assert!((entropy(&t) - entropy(&ti)).abs() < 1e-12);
    }

    #[test]
    fn composition_parsing() {
        let c: Composition = "231".parse().unwrap();
        assert_eq!(c.order, [Factor::Y, Factor::Z, Factor::X]);
        assert!("112".parse::<Composition>().is_err());
        assert!("12".parse::<Composition>().is_err());
        assert!("1,2,3".parse::<Composition>().is_ok());
        assert_eq!(Composition::default().application_order(), [Factor::Z, Factor::Y, Factor::X]);
    }

    #[test]
    fn rejects_non_isometry() {
        assert_eq!(IsometryMatrix::new([[1, 1, 0], [0, 1, 0], [0, 0, 1]]), Err(PicardError::NotIsometry));
        assert_eq!(IsometryMatrix::new([[2, 0, 0], [0, 1, 0], [0, 0, 1]]), Err(PicardError::NotUnimodular(2)));
    }
}
