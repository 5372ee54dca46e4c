use std::cmp::Ordering;

use num_rational::Ratio;
use serde::Serialize;

use super::{CurveConfig, DivisorClass, IntersectionForm, LatticeError};
use crate::scalar::Scalar;

/// Arithmetic genus `1 + (K·C + C²)/2` of a class.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ArithmeticGenus {
    #[serde(serialize_with = "ser_ratio")]
    pub value: Ratio<i64>,
}

impl ArithmeticGenus {
    /// A half-integer value cannot come from a curve on a smooth surface.
    pub fn is_curve_class(&self) -> bool {
        self.value.is_integer()
    }
}

fn ser_ratio<S: serde::Serializer>(r: &Ratio<i64>, s: S) -> Result<S::Ok, S::Error> {
    if r.is_integer() {
        s.serialize_str(&r.numer().to_string())
    } else {
        s.serialize_str(&format!("{}/{}", r.numer(), r.denom()))
    }
}

pub fn arithmetic_genus(c_sq: i64, k_dot_c: i64) -> ArithmeticGenus {
    ArithmeticGenus { value: Ratio::from_integer(1) + Ratio::new(k_dot_c + c_sq, 2) }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    MinusTwo,
    MinusOne,
    Other,
}

/// Adjunction split for an irreducible curve of negative self-intersection.
pub fn classify_null_curve(c_sq: i64, k_dot_c: i64) -> CurveKind {
    match (c_sq, k_dot_c) {
        (-2, 0) => CurveKind::MinusTwo,
        (-1, -1) => CurveKind::MinusOne,
        _ => CurveKind::Other,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HodgeVerdict {
    Zero,
    Negative,
    Violation,
}

/// Hodge index trichotomy for `v` orthogonal to a class of positive square.
pub fn hodge_index_check<S: Scalar>(
    form: &IntersectionForm,
    alpha: &DivisorClass<S>,
    v: &DivisorClass<S>,
) -> Result<HodgeVerdict, LatticeError> {
    form.check_class(alpha)?;
    form.check_class(v)?;
    let a2 = form.square(alpha);
    if a2.sign() != Ordering::Greater {
        return Err(LatticeError::HodgePrecondition(format!("alpha² = {a2} is not positive")));
    }
    let av = form.pair(alpha, v);
    if !av.is_zero() {
        return Err(LatticeError::HodgePrecondition(format!("⟨alpha, v⟩ = {av} is not zero")));
    }
    if v.is_zero() {
        return Ok(HodgeVerdict::Zero);
    }
    Ok(match form.square(v).sign() {
        Ordering::Less => HodgeVerdict::Negative,
        _ => HodgeVerdict::Violation,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ArtinOutcome {
    pub pass: bool,
    /// Multiplicities of the first combination with p_a(Z) > 0.
    pub witness: Option<Vec<u32>>,
    pub witness_genus: Option<ArithmeticGenus>,
    pub r_max: u32,
    pub combinations_checked: u64,
}

const ARTIN_ENUMERATION_LIMIT: u128 = 50_000_000;

/// Checks `p_a(Z) ≤ 0` for every `Z = Σ r_i C_i` with `0 ≤ r_i ≤ r_max`, not all zero.
///
/// Combinations are visited in odometer order with `r_0` varying fastest, so the
/// witness is the first violator in that order. The configuration must be
/// negative definite.
pub fn artin_test(curves: &CurveConfig, r_max: u32) -> Result<ArtinOutcome, LatticeError> {
    if r_max == 0 {
        return Err(LatticeError::Invalid("r_max must be positive".into()));
    }
    if !curves.induced_form().is_negative_definite() {
        return Err(LatticeError::NotNegativeDefinite);
    }
    let n = curves.len();
    let total = (r_max as u128 + 1).checked_pow(n as u32).unwrap_or(u128::MAX);
    if total > ARTIN_ENUMERATION_LIMIT {
        return Err(LatticeError::EnumerationTooLarge(total));
    }
    let gram = curves.gram();
    let k = curves.k_dot();
    let mut r = vec![0u32; n];
    let mut checked = 0u64;
    loop {
        // advance odometer
        let mut i = 0;
        loop {
            if i == n {
                return Ok(ArtinOutcome {
                    pass: true,
                    witness: None,
                    witness_genus: None,
                    r_max,
                    combinations_checked: checked,
                });
            }
            if r[i] < r_max {
                r[i] += 1;
                break;
            }
            r[i] = 0;
            i += 1;
        }
        checked += 1;
        let mut z_sq: i128 = 0;
        let mut kz: i128 = 0;
        for a in 0..n {
            if r[a] == 0 {
                continue;
            }
            kz += r[a] as i128 * k[a] as i128;
            for b in 0..n {
                z_sq += r[a] as i128 * r[b] as i128 * gram[a][b] as i128;
            }
        }
        let twice = 2 + z_sq + kz;
        if twice > 0 {
            let genus = ArithmeticGenus {
                value: Ratio::new(i64::try_from(twice).unwrap_or(i64::MAX), 2),
            };
            return Ok(ArtinOutcome {
                pass: false,
                witness: Some(r),
                witness_genus: Some(genus),
                r_max,
                combinations_checked: checked,
            });
        }
    }
}

/// χ(L) = L²/2 + 2 for a line bundle on a K3 surface.
pub fn euler_char_k3(l_sq: i64) -> Result<i64, LatticeError> {
    if l_sq % 2 != 0 {
        return Err(LatticeError::OddSquare(l_sq));
    }
    Ok(l_sq / 2 + 2)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KummerVerdict {
    NotKummer,
    Inconclusive,
}

/// Projective Kummer K3 surfaces have Picard rank at least 17.
pub fn kummer_screen(picard_rank: i64) -> Result<KummerVerdict, LatticeError> {
    if !(0..=20).contains(&picard_rank) {
        return Err(LatticeError::PicardRankOutOfRange(picard_rank));
    }
    Ok(if picard_rank < 17 { KummerVerdict::NotKummer } else { KummerVerdict::Inconclusive })
}
