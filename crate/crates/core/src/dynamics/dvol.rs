use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{task_seed, DynamicsError};
use crate::picard::{Composition, Factor};
use crate::surface::{
    apply_composition, fiber_quadratic, fiber_roots, random_p1, SurfacePoint, WehlerCoefficients,
};

/// Importance weights above this multiple of the pilot median are rejected.
pub const DVOL_CAP_FACTOR: f64 = 1e4;
const PILOT_DRAWS: usize = 1024;
const BOOTSTRAP_RESAMPLES: usize = 400;

/// Weighted sample of the normalized volume form `Ω∧Ω̄`. Each draw picks `x`, `y`
/// from Fubini–Study and keeps both roots in `z`, so points come in pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct DvolSample {
    pub points: Vec<SurfacePoint>,
    /// Normalized to sum to one.
    pub weights: Vec<f64>,
    pub draws: usize,
    pub rejected: usize,
    pub cap: f64,
}

impl DvolSample {
    pub fn mean<F: Fn(&SurfacePoint) -> f64>(&self, f: F) -> f64 {
        self.points.iter().zip(&self.weights).map(|(p, w)| w * f(p)).sum()
    }
}

struct Draw {
    pts: [SurfacePoint; 2],
    weight: f64,
}

fn draw<R: Rng + ?Sized>(coeffs: &WehlerCoefficients, rng: &mut R) -> Option<Draw> {
    let x = random_p1(rng);
    let y = random_p1(rng);
    let base = SurfacePoint::new([x, y, [num_complex::Complex64::new(1.0, 0.0), Default::default()]]).ok()?;
    let fq = fiber_quadratic(coeffs, Factor::Z, &base);
    if fq.degenerate {
        return None;
    }
    let roots = fiber_roots(&fq.abc())?;
    let n4 = |w: &[num_complex::Complex64; 2]| (w[0].norm_sqr() + w[1].norm_sqr()).powi(2);
    // |Ω∧Ω̄| against FS × FS on the base, per sheet, up to a constant
    let weight = n4(&x) * n4(&y) / fq.discriminant().norm();
    if !weight.is_finite() {
        return None;
    }
    let pts = [base.with_pair(2, roots[0]).ok()?, base.with_pair(2, roots[1]).ok()?];
    Some(Draw { pts, weight })
}

/// At least `n` points (rounded up to an even count).
pub fn dvol_sample(coeffs: &WehlerCoefficients, n: usize, seed: u64) -> Result<DvolSample, DynamicsError> {
    if n == 0 {
        return Err(DynamicsError::TooFewSteps { n, min: 1 });
    }
    let mut pilot_rng = ChaCha8Rng::seed_from_u64(task_seed(seed, u64::MAX));
    let mut pilot: Vec<f64> = Vec::with_capacity(PILOT_DRAWS);
    let mut guard = 0;
    while pilot.len() < PILOT_DRAWS {
        guard += 1;
        if guard > 100 * PILOT_DRAWS {
            return Err(DynamicsError::Invalid("dvol pilot produced no usable draws".into()));
        }
        if let Some(d) = draw(coeffs, &mut pilot_rng) {
            pilot.push(d.weight);
        }
    }
    pilot.sort_by(f64::total_cmp);
    let cap = DVOL_CAP_FACTOR * pilot[PILOT_DRAWS / 2];

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draws = n.div_ceil(2);
    let mut points = Vec::with_capacity(2 * draws);
    let mut weights = Vec::with_capacity(2 * draws);
    let mut rejected = 0;
    while weights.len() < 2 * draws {
        match draw(coeffs, &mut rng) {
            Some(d) if d.weight <= cap => {
                points.extend(d.pts);
                weights.extend([d.weight, d.weight]);
            }
            _ => rejected += 1,
        }
        if rejected > 100 * (draws + PILOT_DRAWS) {
            return Err(DynamicsError::Invalid("dvol sampler rejected too many draws".into()));
        }
    }
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    Ok(DvolSample { points, weights, draws, rejected, cap })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InvarianceReport {
    pub mean: f64,
    pub mean_pushed: f64,
    pub diff: f64,
    /// Bootstrap standard error of `diff`, resampling draws.
    pub se: f64,
    /// `|diff| / se`.
    pub z: f64,
}

/// Compares `∫ f` with `∫ f∘T` on a dvol sample.
pub fn dvol_invariance<F: Fn(&SurfacePoint) -> f64 + Sync>(
    coeffs: &WehlerCoefficients,
    sample: &DvolSample,
    f: F,
    seed: u64,
) -> Result<InvarianceReport, DynamicsError> {
    let comp = Composition::default();
    let mut fx = Vec::with_capacity(sample.points.len());
    let mut ftx = Vec::with_capacity(sample.points.len());
    let mut w = Vec::with_capacity(sample.points.len());
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); sample.points.len().div_ceil(2)];
    for (i, (p, &wt)) in sample.points.iter().zip(&sample.weights).enumerate() {
        // a degenerate fiber along the way has measure zero; drop the point
        let Ok(tp) = apply_composition(coeffs, p, comp) else { continue };
        groups[i / 2].push(fx.len());
        fx.push(f(p));
        ftx.push(f(&tp));
        w.push(wt);
    }
    let stat = |idx: &mut dyn Iterator<Item = usize>| {
        let (mut sw, mut a, mut b) = (0.0, 0.0, 0.0);
        for i in idx {
            sw += w[i];
            a += w[i] * fx[i];
            b += w[i] * ftx[i];
        }
        (a / sw, b / sw)
    };
    let (mean, mean_pushed) = stat(&mut (0..w.len()));
    let diff = mean_pushed - mean;
    // the two sheets over one base point are resampled together
    let n = groups.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let boots: Vec<f64> = (0..BOOTSTRAP_RESAMPLES)
        .map(|_| {
            let mut idx = (0..n)
                .flat_map(|_| groups[rng.random_range(0..n)].clone())
                .collect::<Vec<_>>()
                .into_iter();
            let (a, b) = stat(&mut idx);
            b - a
        })
        .collect();
    let m = boots.iter().sum::<f64>() / boots.len() as f64;
    let se = (boots.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (boots.len() - 1) as f64).sqrt();
    Ok(InvarianceReport { mean, mean_pushed, diff, se, z: diff.abs() / se })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::random_wehler_screened;

    #[test]
    fn weights_normalized_and_deterministic() {
        let w = random_wehler_screened(7, 5, 0).unwrap();
        let a = dvol_sample(&w, 501, 9).unwrap();
        assert_eq!(a.points.len(), 502);
        assert!((a.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let b = dvol_sample(&w, 501, 9).unwrap();
        assert_eq!(a, b);
        for p in &a.points {
            assert!(p.residual(&w) < 1e-10);
        }
    }
}
