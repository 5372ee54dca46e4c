use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::point::{fiber_roots, normalize_pair, random_p1, C64};
use super::poly::{self, Pair};
use super::{WehlerCoefficients, DEGENERACY_TOL};

pub const DEFAULT_SCREEN_SAMPLES: usize = 4096;

/// Relative gradient size below which a sampled point is reported as singular.
pub const SINGULAR_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessKind {
    Singular,
    DegenerateFiber,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScreenWitness {
    pub kind: WitnessKind,
    /// Fiber direction, 1-based.
    pub factor: usize,
    /// `[[re, im]; 2]` per pair.
    pub point: [[[f64; 2]; 2]; 3],
    pub gradient: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScreenReport {
    pub pass: bool,
    pub n_samples: usize,
    pub probes: usize,
    pub min_relative_gradient: f64,
    pub witnesses: Vec<ScreenWitness>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

const MAX_WITNESSES: usize = 16;

fn probe_values() -> [Pair<C64>; 6] {
    let z = C64::new(0.0, 0.0);
    let o = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    [[o, z], [o, o], [o, -o], [z, o], [o, i], [o, -i]]
}

fn encode(pairs: &[Pair<C64>; 3]) -> [[[f64; 2]; 2]; 3] {
    pairs.map(|w| w.map(|z| [z.re, z.im]))
}

/// Samples fibers in all three directions and flags sample points where `F` and
/// its gradient vanish together, and fibers on which `F` vanishes identically.
///
/// Each direction also gets a fixed grid of base points with coordinates in
/// `{0, ±1, ∞, ±i}`. Passing the screen is evidence of smoothness, not a proof.
pub fn smoothness_screen(coeffs: &WehlerCoefficients, n_samples: usize, seed: u64) -> ScreenReport {
    if n_samples == 0 {
        return ScreenReport {
            pass: true,
            n_samples: 0,
            probes: 0,
            min_relative_gradient: f64::INFINITY,
            witnesses: Vec::new(),
            warning: Some("no samples drawn; screen is vacuous".into()),
        };
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5c4e_e11d_0f5c_a1e5);
    let scale = coeffs.scale();
    let mut witnesses = Vec::new();
    let mut min_grad = f64::INFINITY;
    let mut probes = 0;

    let mut check = |d: usize, base: [Pair<C64>; 2], witnesses: &mut Vec<ScreenWitness>| {
        let [a, b] = poly::others(d);
        let mut pairs = [[C64::new(1.0, 0.0), C64::new(0.0, 0.0)]; 3];
        pairs[a] = base[0];
        pairs[b] = base[1];
        let abc = poly::fiber_abc(coeffs.complex(), d, &pairs);
        let size = abc.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if size <= DEGENERACY_TOL * scale {
            if witnesses.len() < MAX_WITNESSES {
                witnesses.push(ScreenWitness {
                    kind: WitnessKind::DegenerateFiber,
                    factor: d + 1,
                    point: encode(&pairs),
                    gradient: 0.0,
                });
            }
            return;
        }
        let Some(roots) = fiber_roots(&abc) else { return };
        for w in roots {
            pairs[d] = w;
            let g = poly::partials(coeffs.complex(), &pairs);
            let gn = g.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max) / scale;
            min_grad = min_grad.min(gn);
            if gn < SINGULAR_TOL && witnesses.len() < MAX_WITNESSES {
                witnesses.push(ScreenWitness {
                    kind: WitnessKind::Singular,
                    factor: d + 1,
                    point: encode(&pairs),
                    gradient: gn,
                });
            }
        }
    };

    for d in 0..3 {
        for u in probe_values() {
            for v in probe_values() {
                let u = normalize_pair(u).expect("probe").0;
                let v = normalize_pair(v).expect("probe").0;
                check(d, [u, v], &mut witnesses);
                probes += 1;
            }
        }
    }
    for s in 0..n_samples {
        let base = [random_p1(&mut rng), random_p1(&mut rng)];
        check(s % 3, base, &mut witnesses);
    }

    ScreenReport {
        pass: witnesses.is_empty(),
        n_samples,
        probes,
        min_relative_gradient: min_grad,
        witnesses,
        warning: None,
    }
}

#[cfg(test)]
fn witness_point(w: &ScreenWitness) -> super::SurfacePoint {
    let pairs = w.point.map(|p| p.map(|z| C64::new(z[0], z[1])));
    super::SurfacePoint::new(pairs).expect("witness pairs are nonzero")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::random_wehler_screened;

    #[test]
    fn singular_origin_is_found() {
        // F and ∇F vanish at the affine origin when c000 = c100 = c010 = c001 = 0
        let mut c = [1i64; 27];
        for (i, j, k) in [(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)] {
            c[poly::coeff_index(i, j, k)] = 0;
        }
        let w = WehlerCoefficients::from_ints(&c).unwrap();
        let r = smoothness_screen(&w, 64, 1);
        assert!(!r.pass);
        let s = r.witnesses.iter().find(|x| x.kind == WitnessKind::Singular).unwrap();
        let p = witness_point(s);
        assert!(p.residual(&w) < 1e-14);
        assert!(p.affine(0).norm() < 1e-14 && p.affine(1).norm() < 1e-14 && p.affine(2).norm() < 1e-14);
    }

    #[test]
    fn empty_screen_warns() {
        let w = random_wehler_screened(7, 5, 0).unwrap();
        let r = w.screen().unwrap();
        assert!(r.pass);
        assert!(r.warning.is_some());
    }

    #[test]
    fn generic_surface_passes() {
        let w = random_wehler_screened(7, 5, 2000).unwrap();
        assert!(w.screen().unwrap().pass);
    }
}
