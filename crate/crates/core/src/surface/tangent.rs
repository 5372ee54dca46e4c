//! Derivatives of the involutions in chart coordinates.
//!
//! A chart of (P¹)³ fixes, for each pair, the coordinate set to 1; the chart
//! coordinate of pair `j` is then `u_j = w_{1−c_j}/w_{c_j}`. A [`Frame`] adds the
//! coordinate that is solved for on X, so the remaining two are local
//! coordinates on the surface.

use serde::Serialize;

use super::point::{chart_of, fiber_roots, normalize_pair, SurfacePoint, C64};
use super::poly::{self, Pair};
use super::{involution_lifted, SurfaceError, WehlerCoefficients};
use crate::picard::{Composition, Factor};

pub type Mat2 = [[C64; 2]; 2];
pub type Mat3 = [[C64; 3]; 3];

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

fn one() -> C64 {
    C64::new(1.0, 0.0)
}

fn identity3() -> Mat3 {
    std::array::from_fn(|i| std::array::from_fn(|j| if i == j { one() } else { zero() }))
}

fn mul3(a: &Mat3, b: &Mat3) -> Mat3 {
    std::array::from_fn(|i| std::array::from_fn(|j| (0..3).map(|k| a[i][k] * b[k][j]).sum()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Frame {
    pub charts: [usize; 3],
    /// Coordinate eliminated through `F = 0`.
    pub drop: usize,
}

impl Frame {
    /// Own charts of `p` and the largest-modulus gradient component as `drop`.
    pub fn standard(coeffs: &WehlerCoefficients, p: &SurfacePoint) -> Result<Self, SurfaceError> {
        let charts = p.charts();
        let g = chart_gradient(coeffs, p, &charts);
        let (drop, gm) = g
            .iter()
            .enumerate()
            .map(|(i, z)| (i, z.norm()))
            .fold((0, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if !(gm > 1e-14 * coeffs.scale()) {
            return Err(SurfaceError::SingularPoint);
        }
        Ok(Self { charts, drop })
    }

    pub fn kept(&self) -> [usize; 2] {
        poly::others(self.drop)
    }

    /// Chart coordinates of `p` in this frame's charts.
    pub fn coords(&self, p: &SurfacePoint) -> [C64; 3] {
        std::array::from_fn(|j| {
            let w = p.pair(j);
            let c = self.charts[j];
            w[1 - c] / w[c]
        })
    }

    pub fn kept_coords(&self, p: &SurfacePoint) -> [C64; 2] {
        let u = self.coords(p);
        self.kept().map(|j| u[j])
    }

    /// Point of X with the given kept coordinates, taking the root of the dropped
    /// coordinate nearest to that of `reference`.
    pub fn point_at(
        &self,
        coeffs: &WehlerCoefficients,
        reference: &SurfacePoint,
        kept: [C64; 2],
    ) -> Result<SurfacePoint, SurfaceError> {
        self.point_at_with_margin(coeffs, reference, kept).map(|x| x.0)
    }

    /// As [`Frame::point_at`], also returning the distance to the chosen root
    /// divided by the distance to the other one (small means unambiguous).
    pub fn point_at_with_margin(
        &self,
        coeffs: &WehlerCoefficients,
        reference: &SurfacePoint,
        kept: [C64; 2],
    ) -> Result<(SurfacePoint, f64), SurfaceError> {
        let u_ref = self.coords(reference)[self.drop];
        let mut pairs = chart_lift(&self.coords(reference), &self.charts);
        for (slot, &j) in self.kept().iter().enumerate() {
            pairs[j] = lift_coord(kept[slot], self.charts[j]);
        }
        let m = self.drop;
        let abc = poly::fiber_abc(coeffs.complex(), m, &pairs);
        let roots = fiber_roots(&abc).ok_or(SurfaceError::DegenerateFiber { factor: m + 1, stage: None })?;
        let c = self.charts[m];
        // compare roots in the frame chart when finite, projectively otherwise
        let dist = |w: &Pair<C64>| {
            let u = w[1 - c] / w[c];
            if u.is_finite() {
                (u - u_ref).norm()
            } else {
                f64::INFINITY
            }
        };
        let (d0, d1) = (dist(&roots[0]), dist(&roots[1]));
        let (w, margin) = if d0 <= d1 { (roots[0], d0 / d1) } else { (roots[1], d1 / d0) };
        pairs[m] = w;
        Ok((SurfacePoint::new(pairs)?, margin))
    }
}

fn lift_coord(u: C64, chart: usize) -> Pair<C64> {
    if chart == 0 {
        [one(), u]
    } else {
        [u, one()]
    }
}

fn chart_lift(u: &[C64; 3], charts: &[usize; 3]) -> [Pair<C64>; 3] {
    std::array::from_fn(|j| lift_coord(u[j], charts[j]))
}

/// `∂F̃/∂u_j` where `F̃` is `F` on the chart lift with the given charts.
pub(crate) fn chart_gradient(coeffs: &WehlerCoefficients, p: &SurfacePoint, charts: &[usize; 3]) -> [C64; 3] {
    let u: [C64; 3] = std::array::from_fn(|j| {
        let w = p.pair(j);
        w[1 - charts[j]] / w[charts[j]]
    });
    let lift = chart_lift(&u, charts);
    let g = poly::partials(coeffs.complex(), &lift);
    std::array::from_fn(|j| g[j][1 - charts[j]])
}

/// Jacobian of a map between chart coordinates of (P¹)³, tracking the charts.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AmbientJacobian {
    pub matrix: Mat3,
    pub source: SurfacePoint,
    pub target: SurfacePoint,
    pub charts_in: [usize; 3],
    pub charts_out: [usize; 3],
}

impl AmbientJacobian {
    /// The same derivative with input and output expressed in other charts.
    pub fn reframed(&self, charts_in: &[usize; 3], charts_out: &[usize; 3]) -> Mat3 {
        let mut m = self.matrix;
        for j in 0..3 {
            if charts_out[j] != self.charts_out[j] {
                // u_new = 1/u_old, du_new = −u_new² du_old
                let w = self.target.pair(j);
                let c = charts_out[j];
                let f = -(w[1 - c] / w[c]).powu(2);
                for x in m[j].iter_mut() {
                    *x *= f;
                }
            }
            if charts_in[j] != self.charts_in[j] {
                let w = self.source.pair(j);
                let c = self.charts_in[j];
                let f = -(w[1 - c] / w[c]).powu(2);
                for row in m.iter_mut() {
                    row[j] *= f;
                }
            }
        }
        m
    }

    /// Images of the frame's tangent basis, in all three output chart coordinates.
    pub fn on_tangent(&self, coeffs: &WehlerCoefficients, frame_in: &Frame, charts_out: &[usize; 3]) -> [[C64; 2]; 3] {
        let m = self.reframed(&frame_in.charts, charts_out);
        let g = chart_gradient(coeffs, &self.source, &frame_in.charts);
        let mut out = [[zero(); 2]; 3];
        for (col, &c) in frame_in.kept().iter().enumerate() {
            // tangent vector e_c − (g_c/g_m) e_m
            let mut v = [zero(); 3];
            v[c] = one();
            v[frame_in.drop] = -g[c] / g[frame_in.drop];
            for (r, row) in out.iter_mut().enumerate() {
                row[col] = (0..3).map(|k| m[r][k] * v[k]).sum();
            }
        }
        out
    }

    /// Restriction to the tangent planes of X in the given frames.
    pub fn restrict(&self, coeffs: &WehlerCoefficients, frame_in: &Frame, frame_out: &Frame) -> Mat2 {
        let full = self.on_tangent(coeffs, frame_in, &frame_out.charts);
        frame_out.kept().map(|r| full[r])
    }
}

/// Derivative of `σ_d` at `q` between the charts of `q` and of `σ_d(q)`.
fn stage_jacobian(
    coeffs: &WehlerCoefficients,
    factor: Factor,
    q: &SurfacePoint,
) -> Result<(Mat3, SurfacePoint), SurfaceError> {
    let step = involution_lifted(coeffs, factor, q)?;
    let d = factor.index();
    let k = q.charts();
    let pairs = q.pairs();
    let [a, b] = poly::others(d);
    let c = coeffs.complex();
    let xa = poly::monomials(&pairs[a]);
    let xb = poly::monomials(&pairs[b]);
    let dxa = poly::monomial_partials(&pairs[a], 1 - k[a]);
    let dxb = poly::monomial_partials(&pairs[b], 1 - k[b]);
    let abc = poly::abc_from_monomials(c, d, &xa, &xb);
    let abc_a = poly::abc_from_monomials(c, d, &dxa, &xb);
    let abc_b = poly::abc_from_monomials(c, d, &xa, &dxb);
    let w = pairs[d];
    let mut dw = [zero(); 2];
    dw[1 - k[d]] = one();
    let s_form = |abc: &[C64; 3], w: &Pair<C64>| {
        if k[d] == 0 {
            poly::vieta_s0(abc, w)
        } else {
            poly::vieta_s1(abc, w)
        }
    };
    let s = s_form(&abc, &w);
    let mut ds = [[zero(); 2]; 3];
    ds[d] = s_form(&abc, &dw);
    ds[a] = s_form(&abc_a, &w);
    ds[b] = s_form(&abc_b, &w);
    let kp = chart_of(&s);
    debug_assert_eq!(Some(kp), normalize_pair(s).map(|x| x.1));
    let den = s[kp];
    let num = s[1 - kp];
    let mut m = identity3();
    for j in 0..3 {
        m[d][j] = (ds[j][1 - kp] * den - num * ds[j][kp]) / (den * den);
    }
    Ok((m, step.point))
}

/// Chart Jacobian of `steps` applications of the composition starting at `p`.
pub fn ambient_jacobian(
    coeffs: &WehlerCoefficients,
    p: &SurfacePoint,
    composition: Composition,
    steps: usize,
) -> Result<AmbientJacobian, SurfaceError> {
    let mut m = identity3();
    let mut q = *p;
    for _ in 0..steps {
        for f in composition.application_order() {
            let (js, next) = stage_jacobian(coeffs, f, &q)?;
            m = mul3(&js, &m);
            q = next;
        }
    }
    Ok(AmbientJacobian { matrix: m, source: *p, target: q, charts_in: p.charts(), charts_out: q.charts() })
}

/// Differential of a map restricted to X, in explicit frames.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TangentMap {
    pub matrix: Mat2,
    pub frame_in: Frame,
    pub frame_out: Frame,
    #[serde(skip)]
    pub target: SurfacePoint,
}

impl TangentMap {
    pub fn det(&self) -> C64 {
        det2(&self.matrix)
    }
}

pub fn det2(m: &Mat2) -> C64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

pub fn mul2(a: &Mat2, b: &Mat2) -> Mat2 {
    std::array::from_fn(|i| std::array::from_fn(|j| a[i][0] * b[0][j] + a[i][1] * b[1][j]))
}

/// `dT` at `p` between the standard frames of `p` and `T(p)`.
pub fn tangent_map(coeffs: &WehlerCoefficients, p: &SurfacePoint) -> Result<TangentMap, SurfaceError> {
    tangent_map_of(coeffs, p, Composition::default(), 1)
}

pub fn tangent_map_of(
    coeffs: &WehlerCoefficients,
    p: &SurfacePoint,
    composition: Composition,
    steps: usize,
) -> Result<TangentMap, SurfaceError> {
    let amb = ambient_jacobian(coeffs, p, composition, steps)?;
    let frame_in = Frame::standard(coeffs, p)?;
    let frame_out = Frame::standard(coeffs, &amb.target)?;
    Ok(TangentMap { matrix: amb.restrict(coeffs, &frame_in, &frame_out), frame_in, frame_out, target: amb.target })
}

fn perm_sign(drop: usize) -> f64 {
    // sign of the permutation (m, a, b) with a < b
    if drop == 1 {
        -1.0
    } else {
        1.0
    }
}

/// Coefficient `s` with `Ω = s · du_a ∧ du_b` at `p` in the given frame.
pub fn omega_scale(coeffs: &WehlerCoefficients, p: &SurfacePoint, frame: &Frame) -> Result<C64, SurfaceError> {
    let g = chart_gradient(coeffs, p, &frame.charts);
    let gm = g[frame.drop];
    if !(gm.norm() > 1e-14 * coeffs.scale()) {
        return Err(SurfaceError::ChartFailure);
    }
    let eps = if frame.charts.iter().filter(|&&c| c == 1).count() % 2 == 0 { 1.0 } else { -1.0 };
    Ok(C64::new(eps * perm_sign(frame.drop), 0.0) / gm)
}

/// `J` with `T*Ω = J·Ω` at `p`.
pub fn omega_jacobian(coeffs: &WehlerCoefficients, p: &SurfacePoint) -> Result<C64, SurfaceError> {
    omega_jacobian_of(coeffs, p, Composition::default(), 1)
}

pub fn omega_jacobian_of(
    coeffs: &WehlerCoefficients,
    p: &SurfacePoint,
    composition: Composition,
    steps: usize,
) -> Result<C64, SurfaceError> {
    let t = tangent_map_of(coeffs, p, composition, steps)?;
    let s_in = omega_scale(coeffs, p, &t.frame_in)?;
    let s_out = omega_scale(coeffs, &t.target, &t.frame_out)?;
    Ok(t.det() * s_out / s_in)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::{automorphism, involution, random_point, random_wehler_screened};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn setup() -> (WehlerCoefficients, ChaCha8Rng) {
        (random_wehler_screened(7, 5, 64).unwrap(), ChaCha8Rng::seed_from_u64(17))
    }

    #[test]
    fn finite_differences_converge_first_order() {
        let (w, mut rng) = setup();
        for _ in 0..20 {
            let p = random_point(&w, &mut rng);
            let t = tangent_map(&w, &p).unwrap();
            let base_out = t.frame_out.kept_coords(&t.target);
            let base_in = t.frame_in.kept_coords(&p);
            let v = [C64::new(0.3, -0.2), C64::new(-0.1, 0.4)];
            let dv: [C64; 2] = std::array::from_fn(|r| t.matrix[r][0] * v[0] + t.matrix[r][1] * v[1]);
            let mut errs = Vec::new();
            for eps in [1e-4, 1e-5, 1e-6] {
                let q = t.frame_in.point_at(&w, &p, [base_in[0] + v[0] * eps, base_in[1] + v[1] * eps]).unwrap();
                let tq = automorphism(&w, &q, false).unwrap();
                let out = t.frame_out.kept_coords(&tq);
                let fd: [C64; 2] = std::array::from_fn(|r| (out[r] - base_out[r]) / eps);
                let scale = 1.0 + dv[0].norm().max(dv[1].norm());
                errs.push(((fd[0] - dv[0]).norm().max((fd[1] - dv[1]).norm())) / scale);
            }
            // first order: error shrinks with ε until rounding takes over
            assert!(errs[1] < 1e-3, "{errs:?}");
            assert!(errs[1] <= errs[0] * 0.5 || errs[0] < 1e-8, "{errs:?}");
        }
    }

    #[test]
    fn fiber_derivative_of_involution_is_reflection() {
        let (w, mut rng) = setup();
        for _ in 0..20 {
            let p = random_point(&w, &mut rng);
            for f in Factor::ALL {
                let (m, q) = stage_jacobian(&w, f, &p).unwrap();
                let d = f.index();
                if q.charts()[d] == p.charts()[d] && p.charts()[d] == 0 {
                    assert!((m[d][d] + 1.0).norm() < 1e-12);
                }
                assert!(involution(&w, f, &p).unwrap().distance(&q) == 0.0);
            }
        }
    }

    #[test]
    fn chain_rule_over_two_steps() {
        let (w, mut rng) = setup();
        for _ in 0..20 {
            let p = random_point(&w, &mut rng);
            let t1 = tangent_map(&w, &p).unwrap();
            let t2 = tangent_map(&w, &t1.target).unwrap();
            let amb = ambient_jacobian(&w, &p, Composition::default(), 2).unwrap();
            let both = amb.restrict(&w, &t1.frame_in, &t2.frame_out);
            let prod = mul2(&t2.matrix, &t1.matrix);
            let scale = prod.iter().flatten().map(|z| z.norm()).fold(1.0, f64::max);
            for i in 0..2 {
                for j in 0..2 {
                    assert!((both[i][j] - prod[i][j]).norm() / scale < 1e-8);
                }
            }
        }
    }

    #[test]
    fn omega_jacobian_is_unimodular_and_a_cocycle() {
        let (w, mut rng) = setup();
        for _ in 0..100 {
            let p = random_point(&w, &mut rng);
            let j = omega_jacobian(&w, &p).unwrap();
            assert!((j.norm() - 1.0).abs() < 1e-8, "{j}");
            let tp = automorphism(&w, &p, false).unwrap();
            let j2 = omega_jacobian_of(&w, &p, Composition::default(), 2).unwrap();
            let jt = omega_jacobian(&w, &tp).unwrap();
            assert!((j2 - jt * j).norm() < 1e-8);
            let j0 = omega_jacobian_of(&w, &p, Composition::default(), 0).unwrap();
            assert!((j0 - 1.0).norm() < 1e-12);
        }
    }
}
