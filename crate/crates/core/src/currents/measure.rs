use serde::Serialize;

use super::CurrentsError;
use crate::dynamics::{periodic_search, task_seed};
use crate::picard::{Composition, Factor};
use crate::surface::{apply_composition, fiber_quadratic, SurfacePoint, WehlerCoefficients};

/// Equal-weight ensemble of saddle orbits, standing in for `μ = η₊∧η₋`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeasureSample {
    #[serde(skip)]
    pub points: Vec<SurfacePoint>,
    pub weights: Vec<f64>,
    /// Period of the orbit each point belongs to.
    pub periods: Vec<usize>,
    /// Number of saddle orbits found for periods `1..=period_cap`.
    pub orbits_per_period: Vec<usize>,
    pub period_cap: usize,
    pub seeds_per_period: usize,
    pub master_seed: u64,
}

impl MeasureSample {
    pub fn mean<F: Fn(&SurfacePoint) -> f64>(&self, f: F) -> f64 {
        self.points.iter().zip(&self.weights).map(|(p, w)| w * f(p)).sum()
    }

    /// `|∫ f∘T − ∫ f|` under the sample; zero up to rounding since orbits are permuted.
    pub fn pushforward_gap<F: Fn(&SurfacePoint) -> f64>(
        &self,
        coeffs: &WehlerCoefficients,
        f: F,
    ) -> Result<f64, CurrentsError> {
        let mut pushed = 0.0;
        for (p, w) in self.points.iter().zip(&self.weights) {
            pushed += w * f(&apply_composition(coeffs, p, Composition::default())?);
        }
        Ok((pushed - self.mean(f)).abs())
    }

    /// Mass of points where some fiber discriminant is small relative to the
    /// size of its quadratic.
    pub fn ramification_mass(&self, coeffs: &WehlerCoefficients, threshold: f64) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .filter(|(p, _)| {
                Factor::ALL.iter().any(|&f| {
                    let q = fiber_quadratic(coeffs, f, p);
                    let size: f64 = q.abc().iter().map(|c| c.norm_sqr()).sum();
                    q.discriminant().norm() < threshold * size
                })
            })
            .map(|(_, w)| w)
            .sum()
    }
}

/// Saddle orbits of every period up to `period_cap`, each point weighted equally.
pub fn measure_sample(
    coeffs: &WehlerCoefficients,
    period_cap: usize,
    seeds_per_period: usize,
    tol: f64,
    master_seed: u64,
) -> Result<MeasureSample, CurrentsError> {
    let mut points = Vec::new();
    let mut periods = Vec::new();
    let mut orbits_per_period = Vec::new();
    for k in 1..=period_cap {
        let rep = periodic_search(coeffs, k, seeds_per_period, tol, task_seed(master_seed, k as u64))?;
        orbits_per_period.push(rep.saddles.len());
        for s in rep.saddles {
            periods.extend(std::iter::repeat_n(k, s.orbit.len()));
            points.extend(s.orbit);
        }
    }
    if points.is_empty() {
        return Err(CurrentsError::EmptySaddleSet(period_cap));
    }
    let w = 1.0 / points.len() as f64;
    Ok(MeasureSample {
        weights: vec![w; points.len()],
        points,
        periods,
        orbits_per_period,
        period_cap,
        seeds_per_period,
        master_seed,
    })
}
