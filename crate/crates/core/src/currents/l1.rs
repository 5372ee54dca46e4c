use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{lambda, CurrentsError, TestFunction};
use crate::dynamics::dvol_sample;
use crate::picard::Composition;
use crate::surface::{apply_composition, WehlerCoefficients};

const BOOTSTRAP_RESAMPLES: usize = 400;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct L1Report {
    pub function: String,
    pub centered: bool,
    pub n_mc: usize,
    /// Sample mean of `u` subtracted before taking norms (0 when uncentered).
    pub mean: f64,
    pub norm: f64,
    pub norm_pushed: f64,
    pub diff: f64,
    /// Bootstrap standard error of `diff`.
    pub se: f64,
    pub pass: bool,
    /// `‖λ⁻¹ T*u‖ / ‖u‖` implied by the two norms.
    pub contraction: f64,
}

/// Checks `‖u∘T‖_{L¹(dVol)} = ‖u‖_{L¹(dVol)}` on a weighted dVol sample.
pub fn l1_contraction_test(
    coeffs: &WehlerCoefficients,
    u: &TestFunction,
    n_mc: usize,
    seed: u64,
    centered: bool,
) -> Result<L1Report, CurrentsError> {
    let sample = dvol_sample(coeffs, n_mc, seed)?;
    let comp = Composition::default();
    let mut rows: Vec<(usize, f64, f64, f64)> = Vec::with_capacity(sample.points.len());
    for (i, (p, &w)) in sample.points.iter().zip(&sample.weights).enumerate() {
        let Ok(tp) = apply_composition(coeffs, p, comp) else { continue };
        rows.push((i / 2, w, u.eval(p), u.eval(&tp)));
    }
    let sw: f64 = rows.iter().map(|r| r.1).sum();
    let mean = if centered { rows.iter().map(|r| r.1 * r.2).sum::<f64>() / sw } else { 0.0 };
    let norms = |idx: &mut dyn Iterator<Item = usize>| {
        let (mut s, mut a, mut b) = (0.0, 0.0, 0.0);
        for i in idx {
            let (_, w, fu, ftu) = rows[i];
            s += w;
            a += w * (fu - mean).abs();
            b += w * (ftu - mean).abs();
        }
        if s > 0.0 {
            (a / s, b / s)
        } else {
            (0.0, 0.0)
        }
    };
    let (norm, norm_pushed) = norms(&mut (0..rows.len()));
    let diff = norm_pushed - norm;
    let n_groups = sample.draws;
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); n_groups];
    for (k, r) in rows.iter().enumerate() {
        groups[r.0].push(k);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5151_5151);
    let boots: Vec<f64> = (0..BOOTSTRAP_RESAMPLES)
        .map(|_| {
            let mut idx = (0..n_groups)
                .flat_map(|_| groups[rng.random_range(0..n_groups)].clone())
                .collect::<Vec<_>>()
                .into_iter();
            let (a, b) = norms(&mut idx);
            b - a
        })
        .collect();
    let m = boots.iter().sum::<f64>() / boots.len() as f64;
    let se = (boots.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (boots.len() - 1) as f64).sqrt();
    let pass = diff.abs() <= 3.0 * se || diff.abs() <= 1e-12 * norm.max(1.0);
    let contraction = if norm > 0.0 { norm_pushed / (lambda() * norm) } else { 0.0 };
    Ok(L1Report {
        function: u.source().to_string(),
        centered,
        n_mc: sample.points.len(),
        mean,
        norm,
        norm_pushed,
        diff,
        se,
        pass,
        contraction,
    })
}
