//! Integer intersection forms, divisor classes and the lattice-level
//! contraction criteria for curve configurations on a surface.

mod contraction;
mod criteria;

pub use contraction::{
    contraction_report, null_locus, ComponentReport, ContractionReport, ContractionVerdict,
    CurveConfigFile,
};
pub use criteria::{
    arithmetic_genus, artin_test, classify_null_curve, euler_char_k3, hodge_index_check,
    kummer_screen, ArithmeticGenus, ArtinOutcome, CurveKind, HodgeVerdict, KummerVerdict,
};

use std::cmp::Ordering;
use std::fmt;

use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{FieldScalar, Scalar};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LatticeError {
    #[error("gram matrix is not square (row {row} has {len} entries, expected {expected})")]
    NotSquare { row: usize, len: usize, expected: usize },
    #[error("gram matrix is not symmetric at ({i}, {j})")]
    NotSymmetric { i: usize, j: usize },
    #[error("class has {found} coordinates, lattice rank is {expected}")]
    RankMismatch { expected: usize, found: usize },
    #[error("k_dot has {found} entries for {expected} curves")]
    KDotMismatch { expected: usize, found: usize },
    #[error("L² = {0} is odd; the K3 lattice is even")]
    OddSquare(i64),
    #[error("Picard rank {0} outside [0, 20]")]
    PicardRankOutOfRange(i64),
    #[error("induced intersection matrix is not negative definite")]
    NotNegativeDefinite,
    #[error("Hodge index precondition failed: {0}")]
    HodgePrecondition(String),
    #[error("class is not nef: pairing with curve {curve} is {pairing}")]
    NotNef { curve: usize, pairing: String },
    #[error("class is not big: self-intersection {0} is not positive")]
    NotBig(String),
    #[error("enumeration of {0} combinations exceeds the supported bound")]
    EnumerationTooLarge(u128),
    #[error("invalid curve configuration: {0}")]
    Invalid(String),
}

/// A symmetric integer Gram matrix.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IntersectionForm {
    gram: Vec<Vec<i64>>,
}

impl IntersectionForm {
    pub fn new(gram: Vec<Vec<i64>>) -> Result<Self, LatticeError> {
        let n = gram.len();
        for (row, r) in gram.iter().enumerate() {
            if r.len() != n {
                return Err(LatticeError::NotSquare { row, len: r.len(), expected: n });
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if gram[i][j] != gram[j][i] {
                    return Err(LatticeError::NotSymmetric { i, j });
                }
            }
        }
        Ok(Self { gram })
    }

    /// Néron–Severi lattice of a generic (2,2,2) surface in the basis h₁, h₂, h₃.
    pub fn wehler() -> Self {
        Self { gram: vec![vec![0, 2, 2], vec![2, 0, 2], vec![2, 2, 0]] }
    }

    pub fn rank(&self) -> usize {
        self.gram.len()
    }

    pub fn gram(&self) -> &[Vec<i64>] {
        &self.gram
    }

    pub fn entry(&self, i: usize, j: usize) -> i64 {
        self.gram[i][j]
    }

    pub fn is_even(&self) -> bool {
        (0..self.rank()).all(|i| self.gram[i][i] % 2 == 0)
    }

    pub fn check_class<S: Scalar>(&self, c: &DivisorClass<S>) -> Result<(), LatticeError> {
        if c.len() != self.rank() {
            return Err(LatticeError::RankMismatch { expected: self.rank(), found: c.len() });
        }
        Ok(())
    }

    /// Bilinear pairing ⟨a, b⟩. Panics on a rank mismatch; use [`Self::check_class`] first
    /// for untrusted input.
    pub fn pair<S: Scalar>(&self, a: &DivisorClass<S>, b: &DivisorClass<S>) -> S {
        assert_eq!(a.len(), self.rank(), "class rank mismatch");
        assert_eq!(b.len(), self.rank(), "class rank mismatch");
        let mut acc = S::zero();
        for (i, row) in self.gram.iter().enumerate() {
            if a.coords[i].is_zero() {
                continue;
            }
            let mut inner = S::zero();
            for (j, &g) in row.iter().enumerate() {
                if g != 0 && !b.coords[j].is_zero() {
                    inner = inner + S::from_int(g) * b.coords[j].clone();
                }
            }
            acc = acc + a.coords[i].clone() * inner;
        }
        acc
    }

    pub fn square<S: Scalar>(&self, a: &DivisorClass<S>) -> S {
        self.pair(a, a)
    }

    pub fn signature(&self) -> Signature {
        signature(self)
    }

    pub fn is_negative_definite(&self) -> bool {
        is_negative_definite(self)
    }
}

/// Coordinates of a class in the basis of a fixed [`IntersectionForm`].
#[derive(Clone, Debug, PartialEq)]
pub struct DivisorClass<S> {
    pub coords: Vec<S>,
}

impl<S: Scalar> DivisorClass<S> {
    pub fn new(coords: Vec<S>) -> Self {
        Self { coords }
    }

    pub fn zero(rank: usize) -> Self {
        Self { coords: vec![S::zero(); rank] }
    }

    /// The i-th basis class (0-based).
    pub fn basis(rank: usize, i: usize) -> Self {
        let mut c = Self::zero(rank);
        c.coords[i] = S::one();
        c
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(Scalar::is_zero)
    }

    pub fn scale(&self, s: &S) -> Self {
        Self { coords: self.coords.iter().map(|c| c.clone() * s.clone()).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            coords: self.coords.iter().zip(&other.coords).map(|(a, b)| a.clone() + b.clone()).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            coords: self.coords.iter().zip(&other.coords).map(|(a, b)| a.clone() - b.clone()).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        Self { coords: self.coords.iter().map(|c| -c.clone()).collect() }
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.coords.iter().map(Scalar::to_f64).collect()
    }
}

impl DivisorClass<i64> {
    pub fn from_ints(coords: &[i64]) -> Self {
        Self { coords: coords.to_vec() }
    }

    pub fn cast<S: Scalar>(&self) -> DivisorClass<S> {
        DivisorClass { coords: self.coords.iter().map(|&c| S::from_int(c)).collect() }
    }
}

impl<S: Scalar> fmt::Display for DivisorClass<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl<S: Scalar + Serialize> Serialize for DivisorClass<S> {
    fn serialize<Se: serde::Serializer>(&self, s: Se) -> Result<Se::Ok, Se::Error> {
        self.coords.serialize(s)
    }
}

/// Inertia counts of a real symmetric form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Signature {
    pub pos: usize,
    pub zero: usize,
    pub neg: usize,
}

impl Signature {
    pub fn rank(&self) -> usize {
        self.pos + self.zero + self.neg
    }

    /// Signature (1, n−1) with no kernel: the hyperbolic case of the Hodge index theorem.
    pub fn is_hyperbolic(&self) -> bool {
        self.pos == 1 && self.zero == 0
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.pos, self.zero, self.neg)
    }
}

/// Sylvester inertia by exact congruence diagonalization over Q.
pub fn signature(form: &IntersectionForm) -> Signature {
    let mut a: Vec<Vec<BigRational>> = form
        .gram
        .iter()
        .map(|r| r.iter().map(|&v| BigRational::from_int(v)).collect())
        .collect();
    let mut active: Vec<usize> = (0..form.rank()).collect();
    let (mut pos, mut neg) = (0usize, 0usize);

    while !active.is_empty() {
        let pivot = match active.iter().copied().find(|&i| !Zero::is_zero(&a[i][i])) {
            Some(p) => p,
            None => {
                // all diagonal entries vanish: create one from an off-diagonal pair
                let pair = active.iter().copied().find_map(|i| {
                    active.iter().copied().find(|&j| j != i && !Zero::is_zero(&a[i][j])).map(|j| (i, j))
                });
                let Some((i, j)) = pair else { break };
                for &k in &active {
                    let v = a[j][k].clone();
                    a[i][k] = &a[i][k] + v;
                }
                for &k in &active {
                    let v = a[k][j].clone();
                    a[k][i] = &a[k][i] + v;
                }
                i
            }
        };
        let p = a[pivot][pivot].clone();
        match Scalar::sign(&p) {
            Ordering::Greater => pos += 1,
            Ordering::Less => neg += 1,
            Ordering::Equal => unreachable!("pivot is nonzero"),
        }
        active.retain(|&k| k != pivot);
        let inv = FieldScalar::inv(&p).expect("nonzero pivot");
        for &r in &active {
            let f = &a[r][pivot] * &inv;
            if Zero::is_zero(&f) {
                continue;
            }
            for &c in &active {
                let delta = &f * &a[pivot][c];
                a[r][c] = &a[r][c] - delta;
            }
        }
        for &r in &active {
            a[r][pivot] = Zero::zero();
            a[pivot][r] = Zero::zero();
        }
    }
    let zero = form.rank() - pos - neg;
    Signature { pos, zero, neg }
}

pub fn is_negative_definite(form: &IntersectionForm) -> bool {
    let s = signature(form);
    s.neg == form.rank()
}

/// Curve classes together with their canonical degrees and induced Gram matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CurveConfig {
    form: IntersectionForm,
    classes: Vec<DivisorClass<i64>>,
    k_dot: Vec<i64>,
    gram: Vec<Vec<i64>>,
}

impl CurveConfig {
    pub fn new(
        form: IntersectionForm,
        classes: Vec<DivisorClass<i64>>,
        k_dot: Vec<i64>,
    ) -> Result<Self, LatticeError> {
        for c in &classes {
            form.check_class(c)?;
        }
        if k_dot.len() != classes.len() {
            return Err(LatticeError::KDotMismatch { expected: classes.len(), found: k_dot.len() });
        }
        let gram = classes
            .iter()
            .map(|a| classes.iter().map(|b| form.pair(a, b)).collect())
            .collect();
        Ok(Self { form, classes, k_dot, gram })
    }

    /// Curves given directly by their intersection matrix: each curve is a basis vector.
    pub fn from_gram(gram: Vec<Vec<i64>>, k_dot: Vec<i64>) -> Result<Self, LatticeError> {
        let form = IntersectionForm::new(gram)?;
        let classes = (0..form.rank()).map(|i| DivisorClass::<i64>::basis(form.rank(), i)).collect();
        Self::new(form, classes, k_dot)
    }

    pub fn form(&self) -> &IntersectionForm {
        &self.form
    }

    pub fn classes(&self) -> &[DivisorClass<i64>] {
        &self.classes
    }

    pub fn k_dot(&self) -> &[i64] {
        &self.k_dot
    }

    pub fn gram(&self) -> &[Vec<i64>] {
        &self.gram
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    /// The configuration restricted to `indices`, in the given order.
    pub fn subconfig(&self, indices: &[usize]) -> CurveConfig {
        CurveConfig {
            form: self.form.clone(),
            classes: indices.iter().map(|&i| self.classes[i].clone()).collect(),
            k_dot: indices.iter().map(|&i| self.k_dot[i]).collect(),
            gram: indices.iter().map(|&i| indices.iter().map(|&j| self.gram[i][j]).collect()).collect(),
        }
    }

    pub fn induced_form(&self) -> IntersectionForm {
        IntersectionForm { gram: self.gram.clone() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn form(g: &[&[i64]]) -> IntersectionForm {
        IntersectionForm::new(g.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn wehler_signature() {
        let s = IntersectionForm::wehler().signature();
        assert_eq!(s, Signature { pos: 1, zero: 0, neg: 2 });
        assert!(s.is_hyperbolic());
    }

    #[test]
    fn small_signatures() {
        assert_eq!(form(&[&[1, 0], &[0, 1]]).signature(), Signature { pos: 2, zero: 0, neg: 0 });
        assert_eq!(form(&[&[0, 1], &[1, 0]]).signature(), Signature { pos: 1, zero: 0, neg: 1 });
        assert_eq!(form(&[&[0, 0], &[0, 0]]).signature(), Signature { pos: 0, zero: 2, neg: 0 });
        assert_eq!(form(&[&[1, 1], &[1, 1]]).signature(), Signature { pos: 1, zero: 1, neg: 0 });
    }

    #[test]
    fn rejects_non_symmetric() {
        let err = IntersectionForm::new(vec![vec![0, 1], vec![2, 0]]).unwrap_err();
        assert_eq!(err, LatticeError::NotSymmetric { i: 0, j: 1 });
        assert!(matches!(
            IntersectionForm::new(vec![vec![0, 1], vec![2]]),
            Err(LatticeError::NotSquare { .. })
        ));
    }

    #[test]
    fn negative_definite_examples() {
        assert!(form(&[&[-2]]).is_negative_definite());
        assert!(form(&[&[-2, 1], &[1, -2]]).is_negative_definite());
        assert!(!form(&[&[-1, 2], &[2, -1]]).is_negative_definite());
        assert!(!form(&[&[0]]).is_negative_definite());
    }

    #[test]
    fn wehler_pairing_is_twice_elementary_symmetric() {
        let f = IntersectionForm::wehler();
        let v = DivisorClass::from_ints(&[1, -1, 0]);
        assert_eq!(f.square(&v), -4);
        let w = DivisorClass::from_ints(&[3, 5, -2]);
        assert_eq!(f.square(&w), 4 * (15 - 6 - 10));
        assert!(f.is_even());
    }

    #[test]
    fn curve_config_induced_gram() {
        let cfg = CurveConfig::new(
            IntersectionForm::wehler(),
            vec![DivisorClass::from_ints(&[1, 0, 0]), DivisorClass::from_ints(&[0, 1, 0])],
            vec![0, 0],
        )
        .unwrap();
        assert_eq!(cfg.gram(), &[vec![0, 2], vec![2, 0]]);
        assert!(CurveConfig::new(IntersectionForm::wehler(), vec![], vec![1]).is_err());
    }
}
