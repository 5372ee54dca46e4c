use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::Serialize;

use super::{green_value, local_potential, ClassWeights, CurrentsError, Sign};
use crate::surface::{Frame, SurfacePoint, WehlerCoefficients};

/// Absolute slack on `center ≤ average`.
pub const SUBMEAN_TOL: f64 = 1e-6;
/// Coefficient of the `r²` slack for the chart correction.
pub const SUBMEAN_ALLOWANCE: f64 = 1.0;
/// Chosen root must be this much closer than the other one along the circle.
const ROOT_MARGIN: f64 = 0.25;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SubmeanVerdict {
    pub pass: bool,
    pub center: f64,
    pub average: f64,
    /// `average − center`.
    pub margin: f64,
    pub slack: f64,
}

fn verdict(center: f64, values: &[f64], r: f64) -> SubmeanVerdict {
    let average = values.iter().sum::<f64>() / values.len() as f64;
    let slack = SUBMEAN_TOL + SUBMEAN_ALLOWANCE * r * r;
    SubmeanVerdict { pass: center <= average + slack, center, average, margin: average - center, slack }
}

fn circle(w0: C64, r: f64, n: usize) -> impl Iterator<Item = C64> {
    (0..n).map(move |k| w0 + C64::from_polar(r, 2.0 * PI * k as f64 / n as f64))
}

/// Sub-mean test for a function of one complex variable.
pub fn submean_check_fn<F: Fn(C64) -> f64>(f: F, w0: C64, r: f64, n_circle: usize) -> SubmeanVerdict {
    let values: Vec<f64> = circle(w0, r, n_circle).map(&f).collect();
    verdict(f(w0), &values, r)
}

/// Sub-mean test of the local potential of `η±` on the holomorphic disc of
/// radius `r` that moves the second kept coordinate of the standard frame at
/// `p`, with the dropped coordinate following its root.
pub fn submean_check(
    coeffs: &WehlerCoefficients,
    p: &SurfacePoint,
    weights: &ClassWeights,
    sign: Sign,
    n_terms: usize,
    r: f64,
    n_circle: usize,
) -> Result<SubmeanVerdict, CurrentsError> {
    if !(r > 0.0) || n_circle < 3 {
        return Err(CurrentsError::Invalid("need r > 0 and at least 3 circle samples".into()));
    }
    let frame = Frame::standard(coeffs, p)?;
    let z = frame.kept_coords(p);
    let potential = |q: &SurfacePoint| -> Result<f64, CurrentsError> {
        let g = green_value(coeffs, q, weights, sign, n_terms)?;
        if g.flagged() {
            return Err(CurrentsError::ChartFailure(format!(
                "flagged lift (abort {:?}, divergence {:?})",
                g.aborted_at, g.diverged_at
            )));
        }
        Ok(local_potential(g.value, weights, q, &frame.charts))
    };
    let center = potential(p)?;
    let mut values = Vec::with_capacity(n_circle);
    for w in circle(z[1], r, n_circle) {
        let (q, margin) = frame.point_at_with_margin(coeffs, p, [z[0], w])?;
        if !(margin < ROOT_MARGIN) {
            return Err(CurrentsError::ChartFailure("disc meets a ramification point".into()));
        }
        values.push(potential(&q)?);
    }
    Ok(verdict(center, &values, r))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_modulus_is_subharmonic() {
        let v = submean_check_fn(|w| w.norm().ln(), C64::new(0.1, 0.0), 0.5, 256);
        assert!(v.pass && v.margin > 0.1);
        let v = submean_check_fn(|w| w.norm().ln(), C64::new(2.0, 1.0), 0.5, 256);
        assert!(v.pass && v.margin.abs() < 1e-12);
    }

    #[test]
    fn negative_log_modulus_fails() {
        let v = submean_check_fn(|w| -w.norm().ln(), C64::new(0.1, 0.0), 0.5, 256);
        assert!(!v.pass);
    }
}
