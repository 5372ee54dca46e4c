//! Orbits of `T`, Lyapunov cocycles, saddle periodic points and Lebesgue
//! (`Ω∧Ω̄`) sampling.

mod dvol;
mod lyapunov;
mod periodic;

pub use dvol::{dvol_invariance, dvol_sample, DvolSample, InvarianceReport, DVOL_CAP_FACTOR};
pub use lyapunov::{
    block_bootstrap_halfwidth, dim_plus, lyapunov, lyapunov_cocycle, lyapunov_periodic, DimPlus,
    LyapunovEstimate,
};
pub use periodic::{periodic_points, periodic_search, PeriodicReport, SaddlePoint};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::picard::{automorphism_action, Composition};
use crate::surface::{
    automorphism_step, check_on_surface, exact_automorphism, ExactPoint, HeightRecord, SurfaceError,
    SurfacePoint, WehlerCoefficients,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error(transparent)]
    Surface(#[from] SurfaceError),
    #[error("orbit aborted at step {step}: {source}")]
    Aborted { step: usize, source: SurfaceError },
    #[error("need at least {min} iterations, got {n}")]
    TooFewSteps { n: usize, min: usize },
    #[error("Lyapunov exponent must be positive, got {0}")]
    NonPositiveLyapunov(f64),
    #[error("period must be at least 1")]
    InvalidPeriod,
    #[error("{0}")]
    Invalid(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    #[default]
    Forward,
    Backward,
}

impl Direction {
    pub fn composition(self) -> Composition {
        match self {
            Direction::Forward => Composition::default(),
            Direction::Backward => Composition::default().inverted(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Exact,
    #[default]
    Float,
}

/// Floating-point orbit with per-step lift bookkeeping.
#[derive(Clone, Debug, PartialEq)]
pub struct OrbitRecord {
    pub points: Vec<SurfacePoint>,
    /// Per step and factor, `log|·|` of the lifted step relative to the normalized output.
    pub renorm_logs: Vec<[f64; 3]>,
    pub composition: Composition,
    pub mode: Mode,
    /// The exact orbit in exact mode; `points` then holds its float images.
    pub exact: Vec<ExactPoint>,
    /// Set when a degenerate fiber stopped the orbit early.
    pub abort: Option<(usize, SurfaceError)>,
}

impl OrbitRecord {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn last(&self) -> &SurfacePoint {
        self.points.last().expect("orbit holds its start point")
    }

    /// Accumulated per-factor `log|·|` of the unnormalized lift of `Tⁿ`, starting
    /// from the normalized lift of the first point.
    pub fn lift_log_scales(&self) -> Vec<[f64; 3]> {
        let m = automorphism_action(self.composition).transpose();
        let mut k = [0.0f64; 3];
        let mut out = vec![k];
        for kappa in &self.renorm_logs {
            let next: [f64; 3] =
                std::array::from_fn(|i| (0..3).map(|j| m[i][j] as f64 * k[j]).sum::<f64>() + kappa[i]);
            k = next;
            out.push(k);
        }
        out
    }

    pub fn into_result(self) -> Result<Self, DynamicsError> {
        match self.abort {
            Some((step, source)) => Err(DynamicsError::Aborted { step, source }),
            None => Ok(self),
        }
    }
}

/// `n` applications of `T` (or `T⁻¹`); a degenerate fiber ends the orbit early and
/// is recorded in [`OrbitRecord::abort`].
pub fn orbit(
    coeffs: &WehlerCoefficients,
    p: &SurfacePoint,
    n: usize,
    direction: Direction,
) -> Result<OrbitRecord, DynamicsError> {
    orbit_with(coeffs, p, n, direction.composition())
}

pub fn orbit_with(
    coeffs: &WehlerCoefficients,
    p: &SurfacePoint,
    n: usize,
    composition: Composition,
) -> Result<OrbitRecord, DynamicsError> {
    check_on_surface(coeffs, p)?;
    let mut rec = OrbitRecord {
        points: Vec::with_capacity(n + 1),
        renorm_logs: Vec::with_capacity(n),
        composition,
        mode: Mode::Float,
        exact: Vec::new(),
        abort: None,
    };
    rec.points.push(*p);
    let mut q = *p;
    for step in 0..n {
        match automorphism_step(coeffs, &q, composition) {
            Ok(s) => {
                q = s.point;
                rec.points.push(q);
                rec.renorm_logs.push(s.kappa);
            }
            Err(e) => {
                rec.abort = Some((step, e));
                break;
            }
        }
    }
    Ok(rec)
}

/// Orbit of a rational point in exact arithmetic. Coordinate sizes grow by a
/// factor of about λ per step, so `n` is capped. `renorm_logs` are those of the
/// floating-point lift run through the exact points.
pub fn orbit_exact(
    coeffs: &WehlerCoefficients,
    p: &ExactPoint,
    n: usize,
    direction: Direction,
) -> Result<OrbitRecord, DynamicsError> {
    if n > EXACT_ORBIT_CAP {
        return Err(DynamicsError::Invalid(format!(
            "exact orbits are capped at {EXACT_ORBIT_CAP} steps (requested {n})"
        )));
    }
    if !p.on_surface(coeffs) {
        return Err(SurfaceError::NotOnSurface(f64::NAN).into());
    }
    let composition = direction.composition();
    let mut rec = OrbitRecord {
        points: vec![p.to_float()],
        renorm_logs: Vec::with_capacity(n),
        composition,
        mode: Mode::Exact,
        exact: vec![p.clone()],
        abort: None,
    };
    for step in 0..n {
        let cur = rec.exact.last().expect("nonempty");
        let next = match exact_automorphism(coeffs, cur, composition) {
            Ok(q) => q,
            Err(e) => {
                rec.abort = Some((step, e));
                break;
            }
        };
        let kappa = automorphism_step(coeffs, &cur.to_float(), composition)
            .map(|s| s.kappa)
            .unwrap_or([f64::NAN; 3]);
        rec.renorm_logs.push(kappa);
        rec.points.push(next.to_float());
        rec.exact.push(next);
    }
    Ok(rec)
}

/// Logarithmic heights along an exact orbit.
pub fn exact_heights(rec: &OrbitRecord) -> Vec<HeightRecord> {
    rec.exact
        .iter()
        .enumerate()
        .map(|(step, q)| HeightRecord { step, log_height: q.log_height(), digits: q.digits() })
        .collect()
}

/// Step 6 needs gcds of million-digit integers and takes minutes.
pub const EXACT_ORBIT_CAP: usize = 5;

/// `splitmix64` of `master + index`; independent per-task seeds.
pub fn task_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::{random_point, random_wehler_screened};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_steps_and_round_trip() {
        let w = random_wehler_screened(7, 5, 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let p = random_point(&w, &mut rng);
        let o = orbit(&w, &p, 0, Direction::Forward).unwrap();
        assert_eq!(o.points, vec![p]);
        let f = orbit(&w, &p, 5, Direction::Forward).unwrap().into_result().unwrap();
        let b = orbit(&w, f.last(), 5, Direction::Backward).unwrap().into_result().unwrap();
        assert!(b.last().distance(&p) < 1e-8);
    }

    #[test]
    fn task_seeds_differ() {
        let s: Vec<u64> = (0..100).map(|i| task_seed(42, i)).collect();
        let mut d = s.clone();
        d.sort_unstable();
        d.dedup();
        assert_eq!(d.len(), s.len());
        assert_eq!(task_seed(42, 3), task_seed(42, 3));
    }
}
