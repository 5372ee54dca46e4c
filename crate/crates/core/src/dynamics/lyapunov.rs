use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{DynamicsError, SaddlePoint};
use crate::picard::Composition;
use crate::surface::{ambient_jacobian, check_on_surface, tangent_map, Frame, Mat2, WehlerCoefficients};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LyapunovEstimate {
    /// Nats per iteration.
    pub lambda_plus: f64,
    pub n: usize,
    /// 95% half-width from a block bootstrap of the per-step increments.
    pub half_width: f64,
}

/// Top exponent of a 2×2 cocycle by QR re-orthonormalization at every step.
/// Returns the mean and the per-step increments `log r₁₁`.
pub fn lyapunov_cocycle<I: IntoIterator<Item = Mat2>>(maps: I) -> (f64, Vec<f64>) {
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    let mut q = [[one, zero], [zero, one]];
    let mut incr = Vec::new();
    for m in maps {
        let a: Mat2 = std::array::from_fn(|i| std::array::from_fn(|j| m[i][0] * q[0][j] + m[i][1] * q[1][j]));
        let c1 = [a[0][0], a[1][0]];
        let r11 = (c1[0].norm_sqr() + c1[1].norm_sqr()).sqrt();
        let q1 = [c1[0] / r11, c1[1] / r11];
        let c2 = [a[0][1], a[1][1]];
        let proj = q1[0].conj() * c2[0] + q1[1].conj() * c2[1];
        let v = [c2[0] - proj * q1[0], c2[1] - proj * q1[1]];
        let r22 = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
        let q2 = if r22 > 0.0 { [v[0] / r22, v[1] / r22] } else { [-q1[1].conj(), q1[0].conj()] };
        q = [[q1[0], q2[0]], [q1[1], q2[1]]];
        incr.push(r11.ln());
    }
    let mean = if incr.is_empty() { 0.0 } else { incr.iter().sum::<f64>() / incr.len() as f64 };
    (mean, incr)
}

/// 1.96 times the bootstrap standard deviation of the mean, resampling blocks of
/// length `⌈√n⌉`.
pub fn block_bootstrap_halfwidth(xs: &[f64], resamples: usize, seed: u64) -> f64 {
    let n = xs.len();
    if n < 2 {
        return f64::INFINITY;
    }
    let len = (n as f64).sqrt().ceil() as usize;
    let blocks = n.div_ceil(len);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let means: Vec<f64> = (0..resamples)
        .map(|_| {
            let mut s = 0.0;
            let mut cnt = 0;
            for _ in 0..blocks {
                let start = rng.random_range(0..=n - len);
                for &x in &xs[start..start + len] {
                    if cnt < n {
                        s += x;
                        cnt += 1;
                    }
                }
            }
            s / cnt as f64
        })
        .collect();
    let m = means.iter().sum::<f64>() / means.len() as f64;
    let var = means.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (means.len() - 1).max(1) as f64;
    1.96 * var.sqrt()
}

const BOOTSTRAP_RESAMPLES: usize = 200;

/// Top Lyapunov exponent along the forward orbit of `p`.
pub fn lyapunov(
    coeffs: &WehlerCoefficients,
    p: &crate::surface::SurfacePoint,
    n: usize,
    seed: u64,
) -> Result<LyapunovEstimate, DynamicsError> {
    if n < 10 {
        return Err(DynamicsError::TooFewSteps { n, min: 10 });
    }
    check_on_surface(coeffs, p)?;
    let mut maps = Vec::with_capacity(n);
    let mut q = *p;
    for step in 0..n {
        let t = tangent_map(coeffs, &q).map_err(|source| DynamicsError::Aborted { step, source })?;
        maps.push(t.matrix);
        q = t.target;
    }
    let (mean, incr) = lyapunov_cocycle(maps);
    Ok(LyapunovEstimate {
        lambda_plus: mean.max(0.0),
        n,
        half_width: block_bootstrap_halfwidth(&incr, BOOTSTRAP_RESAMPLES, seed),
    })
}

/// Exponent per application of `T` along a periodic saddle orbit, cycling the
/// tangent maps at the orbit points over `⌈n/k⌉` whole periods; a free-running float orbit would leave the
/// saddle within a few dozen periods.
pub fn lyapunov_periodic(
    coeffs: &WehlerCoefficients,
    saddle: &SaddlePoint,
    n: usize,
    seed: u64,
) -> Result<LyapunovEstimate, DynamicsError> {
    if n < 10 {
        return Err(DynamicsError::TooFewSteps { n, min: 10 });
    }
    let k = saddle.orbit.len();
    let frames = saddle
        .orbit
        .iter()
        .map(|q| Frame::standard(coeffs, q))
        .collect::<Result<Vec<_>, _>>()?;
    let mut cycle = Vec::with_capacity(k);
    for j in 0..k {
        let amb = ambient_jacobian(coeffs, &saddle.orbit[j], Composition::default(), 1)?;
        cycle.push(amb.restrict(coeffs, &frames[j], &frames[(j + 1) % k]));
    }
    // whole cycles only; the bootstrap resamples per-cycle means
    let cycles = n.div_ceil(k);
    let burn = 20;
    let (_, incr) = lyapunov_cocycle((0..(burn + cycles) * k).map(|i| cycle[i % k]));
    let per_cycle: Vec<f64> = incr[burn * k..].chunks(k).map(|c| c.iter().sum::<f64>() / k as f64).collect();
    let mean = per_cycle.iter().sum::<f64>() / cycles as f64;
    Ok(LyapunovEstimate {
        lambda_plus: mean.max(0.0),
        n: cycles * k,
        half_width: block_bootstrap_halfwidth(&per_cycle, BOOTSTRAP_RESAMPLES, seed),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DimPlus {
    pub value: f64,
    /// Above 2, impossible for a measure on a complex surface.
    pub flagged: bool,
}

/// `h / lyap`.
pub fn dim_plus(h: f64, lyap: f64) -> Result<DimPlus, DynamicsError> {
    if !(lyap > 0.0) {
        return Err(DynamicsError::NonPositiveLyapunov(lyap));
    }
    let value = h / lyap;
    Ok(DimPlus { value, flagged: value > 2.0 })
}
