use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{green_value, ClassWeights, CurrentsError, Sign};
use crate::dynamics::task_seed;
use crate::surface::{Frame, SurfacePoint, WehlerCoefficients};

/// Reports with a regression `R²` above this are labelled reliable.
pub const HOLDER_R2_RELIABLE: f64 = 0.9;
const DIRECTIONS: usize = 8;
const NOISE_FLOOR: f64 = 1e-13;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HolderScale {
    pub r: f64,
    /// Mean over base points of the largest `|f(q) − f(p)|` at chart distance `r`.
    pub oscillation: f64,
    pub samples: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HolderReport {
    pub beta: f64,
    pub intercept: f64,
    pub r2: f64,
    pub reliable: bool,
    pub scales: Vec<HolderScale>,
    /// Base points skipped because the function was unavailable there.
    pub excluded: usize,
}

/// Hölder exponent of `f` from the log-log regression of oscillation against
/// distance, moving from each base point along random tangent directions in its
/// standard frame.
pub fn holder_estimate_with<F>(
    coeffs: &WehlerCoefficients,
    points: &[SurfacePoint],
    scales: &[f64],
    seed: u64,
    f: F,
) -> Result<HolderReport, CurrentsError>
where
    F: Fn(&SurfacePoint) -> Option<f64> + Sync,
{
    if scales.len() < 4 || scales.iter().any(|r| !(*r > 0.0)) || scales.windows(2).any(|w| w[1] >= w[0]) {
        return Err(CurrentsError::InvalidScales);
    }
    let per_point: Vec<Option<Vec<f64>>> = points
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let f0 = f(p)?;
            let frame = Frame::standard(coeffs, p).ok()?;
            let z = frame.kept_coords(p);
            let mut rng = ChaCha8Rng::seed_from_u64(task_seed(seed, i as u64));
            let dirs: Vec<[C64; 2]> = (0..DIRECTIONS)
                .map(|_| {
                    let v: [C64; 2] = std::array::from_fn(|_| {
                        C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
                    });
                    let n = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
                    [v[0] / n, v[1] / n]
                })
                .collect();
            let mut osc = Vec::with_capacity(scales.len());
            for &r in scales {
                let mut best = 0.0f64;
                for d in &dirs {
                    let q = frame.point_at(coeffs, p, [z[0] + d[0] * r, z[1] + d[1] * r]).ok()?;
                    best = best.max((f(&q)? - f0).abs());
                }
                osc.push(best);
            }
            Some(osc)
        })
        .collect();
    let used: Vec<&Vec<f64>> = per_point.iter().flatten().collect();
    let excluded = per_point.len() - used.len();
    if used.is_empty() {
        return Err(CurrentsError::DegenerateRegression);
    }
    let scales_out: Vec<HolderScale> = scales
        .iter()
        .enumerate()
        .map(|(k, &r)| HolderScale {
            r,
            oscillation: used.iter().map(|o| o[k]).sum::<f64>() / used.len() as f64,
            samples: used.len(),
        })
        .collect();
    let pts: Vec<(f64, f64)> = scales_out
        .iter()
        .filter(|s| s.oscillation > NOISE_FLOOR)
        .map(|s| (s.r.ln(), s.oscillation.ln()))
        .collect();
    if pts.len() < 2 {
        return Err(CurrentsError::DegenerateRegression);
    }
    let (beta, intercept, r2) = linear_fit(&pts);
    Ok(HolderReport { beta, intercept, r2, reliable: r2 > HOLDER_R2_RELIABLE, scales: scales_out, excluded })
}

/// Least squares `y = βx + c`, returning `(β, c, R²)`.
fn linear_fit(pts: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let beta = sxy / sxx;
    let r2 = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    (beta, my - beta * mx, r2)
}

/// Hölder report for the Green potential `g±` truncated at `n_terms`; points
/// whose evaluation is flagged are excluded.
pub fn holder_estimate(
    coeffs: &WehlerCoefficients,
    points: &[SurfacePoint],
    weights: &ClassWeights,
    sign: Sign,
    n_terms: usize,
    scales: &[f64],
    seed: u64,
) -> Result<HolderReport, CurrentsError> {
    holder_estimate_with(coeffs, points, scales, seed, |q| {
        green_value(coeffs, q, weights, sign, n_terms).ok().filter(|g| !g.flagged()).map(|g| g.value)
    })
}

/// `2^-k` for `k` in `from..=to`.
pub fn dyadic_scales(from: i32, to: i32) -> Vec<f64> {
    (from..=to).map(|k| 2f64.powi(-k)).collect()
}
