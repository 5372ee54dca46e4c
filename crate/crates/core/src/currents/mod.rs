//! Green potentials of the invariant currents `η±` and diagnostics built on them.
//!
//! The potential is accumulated from the renormalized lifted iteration: with
//! `ℓ(w) = log‖w‖²` per factor and a weight vector `a` in the `h`-basis,
//! `d_n = a·ℓ(lift of T(p̂ₙ)) − λ a·ℓ(p̂ₙ)` and `g_N = Σ_{n<N} λ^{-(n+1)} d_n`.
//! Chartwise, `g + a·ℓ(chart lift)` is the local potential; it differs from a true
//! potential of `η±` only by a smooth bounded term, which is enough for the
//! convergence, sub-mean and regularity checks here.

mod holder;
mod l1;
mod measure;
mod submean;
mod testfn;

pub use holder::{dyadic_scales, holder_estimate, holder_estimate_with, HolderReport, HolderScale, HOLDER_R2_RELIABLE};
pub use l1::{l1_contraction_test, L1Report};
pub use measure::{measure_sample, MeasureSample};
pub use submean::{
    submean_check, submean_check_fn, SubmeanVerdict, SUBMEAN_ALLOWANCE, SUBMEAN_TOL,
};
pub use testfn::{panel, TestFunction, PANEL};

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::DynamicsError;
use crate::picard::{automorphism_action, spectral_data, Composition, PicardError};
use crate::surface::{automorphism_step, check_on_surface, SurfaceError, SurfacePoint, WehlerCoefficients};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CurrentsError {
    #[error(transparent)]
    Surface(#[from] SurfaceError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Picard(#[from] PicardError),
    #[error("test function parse error at byte {position}: {message}")]
    Parse { position: usize, message: String },
    #[error("test function '{0}' is not bounded")]
    Unbounded(String),
    #[error("need at least 4 strictly decreasing positive scales")]
    InvalidScales,
    #[error("all oscillations are below floating-point noise")]
    DegenerateRegression,
    #[error("no saddle orbits up to period {0}; try a larger period cap or more seeds")]
    EmptySaddleSet(usize),
    #[error("disc leaves the chart: {0}")]
    ChartFailure(String),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    #[default]
    Plus,
    Minus,
}

impl Sign {
    /// `T` for `η₊`, `T⁻¹` for `η₋`.
    pub fn composition(self) -> Composition {
        match self {
            Sign::Plus => Composition::default(),
            Sign::Minus => Composition::default().inverted(),
        }
    }
}

/// Coordinates of a class in the `h`-basis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassWeights {
    pub a: [f64; 3],
}

struct Canonical {
    lambda: f64,
    plus: [f64; 3],
    minus: [f64; 3],
}

fn canonical() -> &'static Canonical {
    static C: OnceLock<Canonical> = OnceLock::new();
    C.get_or_init(|| {
        let eig = spectral_data(&automorphism_action(Composition::default()))
            .expect("the Wehler automorphism is hyperbolic");
        Canonical { lambda: eig.lambda_f64(), plus: eig.e_plus_f64(), minus: eig.e_minus_f64() }
    })
}

/// `λ = 9 + 4√5` as a float.
pub fn lambda() -> f64 {
    canonical().lambda
}

impl ClassWeights {
    /// `e₊` for the plus current and the normalized `e₋` for the minus one.
    pub fn canonical(sign: Sign) -> Self {
        let c = canonical();
        match sign {
            Sign::Plus => Self { a: c.plus },
            Sign::Minus => Self { a: c.minus },
        }
    }

    pub fn dot(&self, v: &[f64; 3]) -> f64 {
        self.a[0] * v[0] + self.a[1] * v[1] + self.a[2] * v[2]
    }
}

/// Per-step increments beyond this many nats mark an approach to the common
/// vanishing locus of the lift.
pub const GREEN_DIVERGENCE: f64 = 60.0;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GreenEvaluation {
    pub value: f64,
    pub terms: Vec<f64>,
    pub n_terms: usize,
    pub tail_bound: f64,
    /// Step at which a degenerate fiber stopped the iteration.
    pub aborted_at: Option<usize>,
    /// First step with `|d_n|` above [`GREEN_DIVERGENCE`].
    pub diverged_at: Option<usize>,
}

impl GreenEvaluation {
    pub fn flagged(&self) -> bool {
        self.aborted_at.is_some() || self.diverged_at.is_some()
    }

    /// `g_M` for `M ≤ n_terms` from the recorded increments.
    pub fn partial(&self, m: usize) -> f64 {
        horner(&self.terms[..m.min(self.terms.len())], lambda())
    }
}

/// `Σ λ^{-(n+1)} d_n`, summed from the last term so that the recursion
/// `g_N(p) = (d₀ + g_{N-1}(Tp))/λ` holds operation for operation.
fn horner(d: &[f64], lam: f64) -> f64 {
    d.iter().rev().fold(0.0, |v, &x| (v + x) / lam)
}

pub fn green_value(
    coeffs: &WehlerCoefficients,
    p: &SurfacePoint,
    weights: &ClassWeights,
    sign: Sign,
    n: usize,
) -> Result<GreenEvaluation, CurrentsError> {
    check_on_surface(coeffs, p)?;
    let lam = lambda();
    let comp = sign.composition();
    let mut terms = Vec::with_capacity(n);
    let mut aborted_at = None;
    let mut diverged_at = None;
    let mut q = *p;
    let mut l_cur = q.log_norms_sq();
    for step in 0..n {
        let s = match automorphism_step(coeffs, &q, comp) {
            Ok(s) => s,
            Err(_) => {
                aborted_at = Some(step);
                break;
            }
        };
        let l_next = s.point.log_norms_sq();
        let lifted: [f64; 3] = std::array::from_fn(|i| 2.0 * s.kappa[i] + l_next[i]);
        let d = weights.dot(&lifted) - lam * weights.dot(&l_cur);
        if !d.is_finite() {
            diverged_at.get_or_insert(step);
            break;
        }
        if d.abs() > GREEN_DIVERGENCE {
            diverged_at.get_or_insert(step);
        }
        terms.push(d);
        q = s.point;
        l_cur = l_next;
    }
    let n_terms = terms.len();
    let max_d = terms.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    let tail_bound = max_d * lam.powi(-(n_terms as i32)) / (1.0 - 1.0 / lam);
    Ok(GreenEvaluation { value: horner(&terms, lam), terms, n_terms, tail_bound, aborted_at, diverged_at })
}

/// Local potential `g + a·ℓ(chart lift)` in fixed charts.
pub(crate) fn local_potential(g: f64, weights: &ClassWeights, p: &SurfacePoint, charts: &[usize; 3]) -> f64 {
    let l = p.log_norms_sq();
    let corr: [f64; 3] = std::array::from_fn(|j| l[j] - p.pair(j)[charts[j]].norm_sqr().ln());
    g + weights.dot(&corr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::{random_point, random_wehler_screened};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn empty_sum() {
        let w = random_wehler_screened(7, 5, 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = random_point(&w, &mut rng);
        let g = green_value(&w, &p, &ClassWeights::canonical(Sign::Plus), Sign::Plus, 0).unwrap();
        assert_eq!(g.value, 0.0);
        assert_eq!(g.tail_bound, 0.0);
    }

    #[test]
    fn telescoping_and_convergence() {
        let w = random_wehler_screened(7, 5, 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for sign in [Sign::Plus, Sign::Minus] {
            let a = ClassWeights::canonical(sign);
            for _ in 0..20 {
                let p = random_point(&w, &mut rng);
                let g = green_value(&w, &p, &a, sign, 20).unwrap();
                assert!(!g.flagged());
                let tp = automorphism_step(&w, &p, sign.composition()).unwrap().point;
                let g1 = green_value(&w, &tp, &a, sign, 19).unwrap();
                assert!((g.value - (g.terms[0] + g1.value) / lambda()).abs() <= 1e-12);
                assert!((g.partial(20) - g.partial(10)).abs() < 1e-10);
                assert!((g.partial(20) - g.partial(10)).abs() <= g.partial_tail(10));
            }
        }
    }

    impl GreenEvaluation {
        fn partial_tail(&self, m: usize) -> f64 {
            let max_d = self.terms.iter().fold(0.0f64, |x, d| x.max(d.abs()));
            max_d * lambda().powi(-(m as i32)) / (1.0 - 1.0 / lambda())
        }
    }

    #[test]
    fn weights_are_eigenvectors_of_the_degree_action() {
        let lam = lambda();
        for sign in [Sign::Plus, Sign::Minus] {
            let a = ClassWeights::canonical(sign).a;
            let m = *automorphism_action(sign.composition()).entries();
            for i in 0..3 {
                let v: f64 = (0..3).map(|j| m[i][j] as f64 * a[j]).sum();
                assert!((v - lam * a[i]).abs() < 1e-12 * lam);
            }
        }
    }
}
