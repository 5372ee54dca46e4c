//! Ring-generic kernels for the tri-homogeneous (2,2,2) polynomial.
//!
//! Coefficient `c[9i + 3j + k]` multiplies `X_i Y_j Z_k` with
//! `X_i = x₀^{2−i} x₁^i`, and likewise for `Y`, `Z`.

use std::ops::{Add, Mul, Neg, Sub};

use num_traits::Zero;

pub trait Ring:
    Clone + Zero + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self>
{
}

impl<T> Ring for T where
    T: Clone + Zero + Add<Output = T> + Sub<Output = T> + Mul<Output = T> + Neg<Output = T>
{
}

pub type Pair<T> = [T; 2];

#[inline]
pub fn coeff_index(i: usize, j: usize, k: usize) -> usize {
    9 * i + 3 * j + k
}

/// Index of the coefficient multiplying degree `e_d` in factor `d` and
/// degrees `e_a`, `e_b` in the two other factors (increasing order).
#[inline]
pub fn slot(d: usize, e_d: usize, e_a: usize, e_b: usize) -> usize {
    match d {
        0 => coeff_index(e_d, e_a, e_b),
        1 => coeff_index(e_a, e_d, e_b),
        _ => coeff_index(e_a, e_b, e_d),
    }
}

pub fn others(d: usize) -> [usize; 2] {
    match d {
        0 => [1, 2],
        1 => [0, 2],
        _ => [0, 1],
    }
}

/// `[p₀², p₀p₁, p₁²]`.
pub fn monomials<T: Ring>(p: &Pair<T>) -> [T; 3] {
    [
        p[0].clone() * p[0].clone(),
        p[0].clone() * p[1].clone(),
        p[1].clone() * p[1].clone(),
    ]
}

/// Partial derivatives of the monomials with respect to `p_coord`.
pub fn monomial_partials<T: Ring>(p: &Pair<T>, coord: usize) -> [T; 3] {
    let two = |x: &T| x.clone() + x.clone();
    if coord == 0 {
        [two(&p[0]), p[1].clone(), T::zero()]
    } else {
        [T::zero(), p[0].clone(), two(&p[1])]
    }
}

/// `(A, B, C)` for direction `d` given monomial vectors of the other two factors.
pub fn abc_from_monomials<T: Ring>(c: &[T; 27], d: usize, ma: &[T; 3], mb: &[T; 3]) -> [T; 3] {
    let mut q = [T::zero(), T::zero(), T::zero()];
    for (e_d, acc) in q.iter_mut().enumerate() {
        for (e_a, xa) in ma.iter().enumerate() {
            if xa.is_zero() {
                continue;
            }
            let mut inner = T::zero();
            for (e_b, xb) in mb.iter().enumerate() {
                let cf = &c[slot(d, e_d, e_a, e_b)];
                if !cf.is_zero() {
                    inner = inner + cf.clone() * xb.clone();
                }
            }
            *acc = acc.clone() + xa.clone() * inner;
        }
    }
    // q[e] multiplies w₀^{2−e} w₁^e, so A = q[2], B = q[1], C = q[0]
    let [c0, b, a] = q;
    [a, b, c0]
}

/// `F = A w₁² + B w₀w₁ + C w₀²` in the fiber of direction `d`.
pub fn fiber_abc<T: Ring>(c: &[T; 27], d: usize, pairs: &[Pair<T>; 3]) -> [T; 3] {
    let [a, b] = others(d);
    abc_from_monomials(c, d, &monomials(&pairs[a]), &monomials(&pairs[b]))
}

pub fn quad_eval<T: Ring>(abc: &[T; 3], w: &Pair<T>) -> T {
    let [a, b, c] = abc;
    a.clone() * w[1].clone() * w[1].clone()
        + b.clone() * w[0].clone() * w[1].clone()
        + c.clone() * w[0].clone() * w[0].clone()
}

pub fn eval<T: Ring>(c: &[T; 27], pairs: &[Pair<T>; 3]) -> T {
    quad_eval(&fiber_abc(c, 2, pairs), &pairs[2])
}

/// `∂F/∂w_{d,0}` and `∂F/∂w_{d,1}` from the fiber quadratic.
pub fn quad_partials<T: Ring>(abc: &[T; 3], w: &Pair<T>) -> Pair<T> {
    let [a, b, c] = abc;
    let two = |x: T| x.clone() + x;
    [
        b.clone() * w[1].clone() + two(c.clone() * w[0].clone()),
        two(a.clone() * w[1].clone()) + b.clone() * w[0].clone(),
    ]
}

/// All six homogeneous partial derivatives of `F`.
pub fn partials<T: Ring>(c: &[T; 27], pairs: &[Pair<T>; 3]) -> [Pair<T>; 3] {
    let g = |d: usize| quad_partials(&fiber_abc(c, d, pairs), &pairs[d]);
    [g(0), g(1), g(2)]
}

/// Root-sum form of the Vieta conjugate, valid where `w₀ ≠ 0`.
pub fn vieta_s0<T: Ring>(abc: &[T; 3], w: &Pair<T>) -> Pair<T> {
    let [a, b, _] = abc;
    [a.clone() * w[0].clone(), -(b.clone() * w[0].clone() + a.clone() * w[1].clone())]
}

/// Root-sum form in the opposite chart, valid where `w₁ ≠ 0`.
pub fn vieta_s1<T: Ring>(abc: &[T; 3], w: &Pair<T>) -> Pair<T> {
    let [_, b, c] = abc;
    [-(b.clone() * w[1].clone() + c.clone() * w[0].clone()), c.clone() * w[1].clone()]
}

/// Root-product form `[A w₁ : C w₀]`.
pub fn vieta_product<T: Ring>(abc: &[T; 3], w: &Pair<T>) -> Pair<T> {
    let [a, _, c] = abc;
    [a.clone() * w[1].clone(), c.clone() * w[0].clone()]
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn coeffs(v: impl Fn(usize) -> i64) -> [BigInt; 27] {
        std::array::from_fn(|i| BigInt::from(v(i)))
    }

    fn pair(a: i64, b: i64) -> Pair<BigInt> {
        [BigInt::from(a), BigInt::from(b)]
    }

    // direct sum over all 27 monomials
    fn brute(c: &[BigInt; 27], p: &[Pair<BigInt>; 3]) -> BigInt {
        let mut s = BigInt::zero();
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    let m = |q: &Pair<BigInt>, e: usize| q[0].pow(2 - e as u32) * q[1].pow(e as u32);
                    s += &c[coeff_index(i, j, k)] * m(&p[0], i) * m(&p[1], j) * m(&p[2], k);
                }
            }
        }
        s
    }

    #[test]
    fn fiber_reconstruction_all_directions() {
        let c = coeffs(|i| (i as i64 * 7 + 3) % 11 - 5);
        let p = [pair(2, -3), pair(5, 1), pair(-1, 4)];
        let f = brute(&c, &p);
        assert_eq!(eval(&c, &p), f);
        for d in 0..3 {
            assert_eq!(quad_eval(&fiber_abc(&c, d, &p), &p[d]), f);
        }
    }

    #[test]
    fn euler_identity() {
        let c = coeffs(|i| (i as i64 * 5 + 1) % 9 - 4);
        let p = [pair(3, -1), pair(2, 2), pair(-4, 1)];
        let f = eval(&c, &p);
        let g = partials(&c, &p);
        for d in 0..3 {
            assert_eq!(&p[d][0] * &g[d][0] + &p[d][1] * &g[d][1], BigInt::from(2) * &f);
        }
    }

    #[test]
    fn top_degree_only_in_z() {
        let c = coeffs(|i| if i % 3 == 2 { 1 + i as i64 } else { 0 });
        let p = [pair(1, 2), pair(3, -1), pair(1, 1)];
        let [_, b, cc] = fiber_abc(&c, 2, &p);
        assert!(b.is_zero() && cc.is_zero());
    }
}
