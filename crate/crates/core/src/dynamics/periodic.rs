use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{task_seed, DynamicsError};
use crate::picard::Composition;
use crate::surface::tangent::chart_gradient;
use crate::surface::{
    ambient_jacobian, apply_composition, random_point, Frame, SurfaceError, SurfacePoint, WehlerCoefficients,
};

const MAX_NEWTON_STEPS: usize = 50;
const MAX_HALVINGS: usize = 30;
/// Projective distance below which two periodic points are the same.
const SAME_POINT: f64 = 1e-7;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SaddlePoint {
    #[serde(skip)]
    pub point: SurfacePoint,
    pub period: usize,
    /// Eigenvalues of `dTᵏ`, larger modulus first.
    pub multipliers: [C64; 2],
    #[serde(skip)]
    pub orbit: Vec<SurfacePoint>,
    /// `d(Tᵏp, p)` at acceptance.
    pub residual: f64,
}

impl SaddlePoint {
    /// `(1/k) log|μ₁|`.
    pub fn unstable_exponent(&self) -> f64 {
        self.multipliers[0].norm().ln() / self.period as f64
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct PeriodicReport {
    pub saddles: Vec<SaddlePoint>,
    pub seeds: usize,
    pub converged: usize,
    pub lower_period: usize,
    pub not_saddle: usize,
    pub duplicates: usize,
}

enum Outcome {
    Periodic(SurfacePoint, f64),
    Failed,
}

/// Gauss–Newton on `coords(Tᵏq) − coords(q)` over the tangent plane of the
/// current frame. Matching only the kept coordinates would also accept points
/// with `Tᵏq` on the other sheet of the dropped coordinate.
fn newton(coeffs: &WehlerCoefficients, seed: SurfacePoint, k: usize, tol: f64) -> Outcome {
    let comp = Composition::default();
    let mut q = seed;
    for _ in 0..MAX_NEWTON_STEPS {
        let Ok(frame) = Frame::standard(coeffs, &q) else { return Outcome::Failed };
        let Ok(amb) = ambient_jacobian(coeffs, &q, comp, k) else { return Outcome::Failed };
        let r = residual(&frame, &q, &amb.target);
        let rn = norm3(&r);
        if !rn.is_finite() {
            return Outcome::Failed;
        }
        if rn < tol {
            let d = amb.target.distance(&q);
            return if d < 1e-8 { Outcome::Periodic(q, d) } else { Outcome::Failed };
        }
        let mut j = amb.on_tangent(coeffs, &frame, &frame.charts);
        let kept = frame.kept();
        for (col, &c) in kept.iter().enumerate() {
            j[c][col] -= 1.0;
        }
        let g = chart_gradient(coeffs, &q, &frame.charts);
        for (col, &c) in kept.iter().enumerate() {
            j[frame.drop][col] += g[c] / g[frame.drop];
        }
        let Some(delta) = least_squares(&j, &r) else { return Outcome::Failed };
        let z = frame.kept_coords(&q);
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let zt = [z[0] + delta[0] * step, z[1] + delta[1] * step];
            if let Ok(qt) = frame.point_at(coeffs, &q, zt) {
                if let Ok(tt) = iterate(coeffs, &qt, k) {
                    let rt = norm3(&residual(&frame, &qt, &tt));
                    if rt.is_finite() && rt < rn {
                        accepted = Some(qt);
                        break;
                    }
                }
            }
            step *= 0.5;
        }
        match accepted {
            Some(qt) => q = qt,
            None => return Outcome::Failed,
        }
    }
    Outcome::Failed
}

fn residual(frame: &Frame, q: &SurfacePoint, t: &SurfacePoint) -> [C64; 3] {
    let a = frame.coords(t);
    let b = frame.coords(q);
    std::array::from_fn(|i| a[i] - b[i])
}

fn norm3(v: &[C64; 3]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `δ` minimizing `|J δ + r|` through the normal equations.
fn least_squares(j: &[[C64; 2]; 3], r: &[C64; 3]) -> Option<[C64; 2]> {
    let mut a = [[C64::new(0.0, 0.0); 2]; 2];
    let mut b = [C64::new(0.0, 0.0); 2];
    for row in 0..3 {
        for p in 0..2 {
            b[p] -= j[row][p].conj() * r[row];
            for q in 0..2 {
                a[p][q] += j[row][p].conj() * j[row][q];
            }
        }
    }
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    if !(det.norm() > 1e-300) {
        return None;
    }
    Some([(a[1][1] * b[0] - a[0][1] * b[1]) / det, (a[0][0] * b[1] - a[1][0] * b[0]) / det])
}

fn iterate(coeffs: &WehlerCoefficients, p: &SurfacePoint, k: usize) -> Result<SurfacePoint, SurfaceError> {
    let mut q = *p;
    for _ in 0..k {
        q = apply_composition(coeffs, &q, Composition::default())?;
    }
    Ok(q)
}

fn eigenvalues(m: &crate::surface::Mat2) -> [C64; 2] {
    let tr = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let s = (tr * tr / 4.0 - det).sqrt();
    let (a, b) = (tr / 2.0 + s, tr / 2.0 - s);
    if a.norm() >= b.norm() {
        [a, b]
    } else {
        [b, a]
    }
}

/// Newton search for saddle points of exact period `k`, one task per seed.
/// Seeds are `splitmix(master, i)`, so the result for `n` seeds is a prefix-stable
/// subset of the result for `2n` seeds.
pub fn periodic_search(
    coeffs: &WehlerCoefficients,
    k: usize,
    n_seeds: usize,
    tol: f64,
    master_seed: u64,
) -> Result<PeriodicReport, DynamicsError> {
    if k == 0 {
        return Err(DynamicsError::InvalidPeriod);
    }
    let outcomes: Vec<Outcome> = (0..n_seeds as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(task_seed(master_seed, i));
            let seed = random_point(coeffs, &mut rng);
            newton(coeffs, seed, k, tol)
        })
        .collect();
    let comp = Composition::default();
    let mut rep = PeriodicReport { seeds: n_seeds, ..Default::default() };
    for o in outcomes {
        let Outcome::Periodic(q, residual) = o else { continue };
        rep.converged += 1;
        let mut orbit = vec![q];
        for _ in 1..k {
            match apply_composition(coeffs, orbit.last().expect("nonempty"), comp) {
                Ok(n) => orbit.push(n),
                Err(_) => break,
            }
        }
        if orbit.len() < k || orbit[1..].iter().any(|p| p.distance(&q) < SAME_POINT) {
            rep.lower_period += 1;
            continue;
        }
        if rep.saddles.iter().any(|s| s.period == k && s.orbit.iter().any(|p| p.distance(&q) < SAME_POINT)) {
            rep.duplicates += 1;
            continue;
        }
        let Ok(frame) = Frame::standard(coeffs, &q) else { continue };
        let amb = ambient_jacobian(coeffs, &q, comp, k).map_err(DynamicsError::from)?;
        let mult = eigenvalues(&amb.restrict(coeffs, &frame, &frame));
        if !(mult[0].norm() > 1.0 + 1e-6 && mult[1].norm() < 1.0 - 1e-6) {
            rep.not_saddle += 1;
            continue;
        }
        rep.saddles.push(SaddlePoint { point: q, period: k, multipliers: mult, orbit, residual });
    }
    Ok(rep)
}

pub fn periodic_points(
    coeffs: &WehlerCoefficients,
    k: usize,
    n_seeds: usize,
    tol: f64,
    master_seed: u64,
) -> Result<Vec<SaddlePoint>, DynamicsError> {
    periodic_search(coeffs, k, n_seeds, tol, master_seed).map(|r| r.saddles)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::random_wehler_screened;

    #[test]
    fn no_fixed_points_generically() {
        // T acts by −1 on the 2-form, so its Lefschetz number is 2 + 17 − 19 = 0
        let w = random_wehler_screened(7, 5, 0).unwrap();
        let rep = periodic_search(&w, 1, 100, 1e-11, 3).unwrap();
        assert!(rep.saddles.is_empty());
    }

    #[test]
    fn finds_period_two_saddles() {
        let w = random_wehler_screened(7, 5, 0).unwrap();
        let rep = periodic_search(&w, 2, 200, 1e-11, 3).unwrap();
        assert!(!rep.saddles.is_empty(), "{rep:?}");
        for s in &rep.saddles {
            assert_eq!(s.orbit.len(), 2);
            let t = apply_composition(&w, &s.orbit[1], Composition::default()).unwrap();
            assert!(t.distance(&s.point) < 1e-9);
            assert!(s.orbit[1].distance(&s.point) > 1e-7);
            let det = s.multipliers[0] * s.multipliers[1];
            assert!((det.norm() - 1.0).abs() < 1e-6);
        }
    }
}
