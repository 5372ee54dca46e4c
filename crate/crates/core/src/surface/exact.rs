use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use serde::Serialize;

use super::point::{primitive, ExactPoint};
use super::poly::{self, Pair};
use super::{SurfaceError, WehlerCoefficients};
use crate::picard::{Composition, Factor};

/// Vieta conjugate over the integers; exact on rational points of X.
pub fn exact_involution(
    coeffs: &WehlerCoefficients,
    factor: Factor,
    p: &ExactPoint,
) -> Result<ExactPoint, SurfaceError> {
    let d = factor.index();
    let abc = poly::fiber_abc(coeffs.integral(), d, p.pairs());
    if abc.iter().all(Zero::is_zero) {
        return Err(SurfaceError::DegenerateFiber { factor: factor.number(), stage: None });
    }
    let w = &p.pairs()[d];
    let s0 = poly::vieta_s0(&abc, w);
    let s = if s0.iter().all(Zero::is_zero) { poly::vieta_s1(&abc, w) } else { s0 };
    let s = primitive(s).ok_or(SurfaceError::VanishingDenominators {
        factor: factor.number(),
        a: 0.0,
        b: 0.0,
        c: 0.0,
        stage: None,
    })?;
    let mut pairs = p.pairs().clone();
    pairs[d] = s;
    Ok(ExactPoint::from_primitive(pairs))
}

pub fn exact_automorphism(
    coeffs: &WehlerCoefficients,
    p: &ExactPoint,
    composition: Composition,
) -> Result<ExactPoint, SurfaceError> {
    let mut q = p.clone();
    for (stage, f) in composition.application_order().into_iter().enumerate() {
        q = exact_involution(coeffs, f, &q).map_err(|e| e.at_stage(stage + 1))?;
    }
    Ok(q)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HeightRecord {
    pub step: usize,
    pub log_height: f64,
    pub digits: usize,
}

/// Exact orbit `p, Tp, …, Tⁿp` with the logarithmic height of each point.
pub fn exact_orbit_heights(
    coeffs: &WehlerCoefficients,
    p: &ExactPoint,
    n: usize,
    composition: Composition,
) -> Result<(Vec<ExactPoint>, Vec<HeightRecord>), SurfaceError> {
    let mut pts = vec![p.clone()];
    for _ in 0..n {
        let next = exact_automorphism(coeffs, pts.last().expect("nonempty"), composition)?;
        pts.push(next);
    }
    let recs = pts
        .iter()
        .enumerate()
        .map(|(step, q)| HeightRecord { step, log_height: q.log_height(), digits: q.digits() })
        .collect();
    Ok((pts, recs))
}

fn small_p1(bound: i64) -> Vec<Pair<BigInt>> {
    let mut out = vec![[BigInt::from(0), BigInt::from(1)]];
    for den in 1..=bound {
        for num in -bound..=bound {
            if num.gcd(&den) == 1 || (num == 0 && den == 1) {
                out.push([BigInt::from(den), BigInt::from(num)]);
            }
        }
    }
    out
}

/// Roots of `A w₁² + B w₀w₁ + C w₀²` in P¹(Q).
fn rational_roots(abc: &[BigInt; 3]) -> Vec<Pair<BigInt>> {
    let [a, b, c] = abc;
    if a.is_zero() {
        let mut r = vec![[BigInt::from(0), BigInt::from(1)]];
        if !b.is_zero() {
            r.push([b.clone(), -c.clone()]);
        } else if c.is_zero() {
            return Vec::new();
        }
        return r;
    }
    let disc = b * b - BigInt::from(4) * a * c;
    if disc.is_negative() {
        return Vec::new();
    }
    let s = disc.sqrt();
    if &s * &s != disc {
        return Vec::new();
    }
    let two_a = BigInt::from(2) * a;
    vec![[two_a.clone(), -b + &s], [two_a, -b - &s]]
}

/// Rational points of X with `x`, `y` of naive height at most `bound`, found by
/// solving the `z` fiber over Q; at most `limit` points, in a deterministic order.
pub fn rational_points(coeffs: &WehlerCoefficients, bound: i64, limit: usize) -> Vec<ExactPoint> {
    let grid = small_p1(bound.max(1));
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for x in &grid {
        for y in &grid {
            let base = [x.clone(), y.clone(), [BigInt::from(1), BigInt::from(0)]];
            let abc = poly::fiber_abc(coeffs.integral(), 2, &base);
            if abc.iter().all(Zero::is_zero) {
                continue;
            }
            for z in rational_roots(&abc) {
                let Ok(p) = ExactPoint::new([x.clone(), y.clone(), z]) else { continue };
                let key = format!("{p}");
                if seen.insert(key) {
                    debug_assert!(p.on_surface(coeffs));
                    out.push(p);
                    if out.len() >= limit {
                        return out;
                    }
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::{involution, random_wehler_screened};

    #[test]
    fn exact_involutions_are_exact() {
        let w = random_wehler_screened(7, 5, 0).unwrap();
        let pts = rational_points(&w, 6, 20);
        assert!(!pts.is_empty());
        for p in &pts {
            assert!(p.on_surface(&w));
            for f in Factor::ALL {
                let Ok(q) = exact_involution(&w, f, p) else { continue };
                assert!(q.on_surface(&w));
                assert_eq!(&exact_involution(&w, f, &q).unwrap(), p);
                let qf = involution(&w, f, &p.to_float()).unwrap();
                assert!(qf.distance(&q.to_float()) < 1e-9);
            }
        }
    }

    #[test]
    fn affine_origin_point() {
        let mut c = [1i64; 27];
        c[poly::coeff_index(0, 0, 0)] = 0;
        c[poly::coeff_index(0, 0, 1)] = 3;
        c[poly::coeff_index(0, 0, 2)] = 2;
        let w = WehlerCoefficients::from_ints(&c).unwrap();
        let o = ExactPoint::from_ints([[1, 0], [1, 0], [1, 0]]).unwrap();
        assert!(o.on_surface(&w));
        let q = exact_involution(&w, Factor::Z, &o).unwrap();
        assert_eq!(q.affine_string(2), "-3/2");
    }
}
