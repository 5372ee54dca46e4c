//! The Wehler surface `X = {F = 0} ⊂ (P¹)³`: coefficients, points, the Vieta
//! involutions `σ₁, σ₂, σ₃`, the automorphism `T`, tangent maps and the
//! holomorphic 2-form Jacobian.

mod exact;
pub mod poly;
mod point;
mod screen;
pub(crate) mod tangent;

pub use exact::{exact_automorphism, exact_involution, exact_orbit_heights, rational_points, HeightRecord};
pub use point::{chart_of, fiber_roots, normalize_pair, random_p1, ExactPoint, SurfacePoint, C64};
pub use screen::{smoothness_screen, ScreenReport, ScreenWitness, DEFAULT_SCREEN_SAMPLES};
pub use tangent::{
    ambient_jacobian, omega_jacobian, omega_jacobian_of, omega_scale, tangent_map, tangent_map_of,
    det2, mul2, AmbientJacobian, Frame, Mat2, Mat3, TangentMap,
};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::picard::{Composition, Factor};
use crate::scalar::{format_rational, ratio_to_f64};
use poly::Pair;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SurfaceError {
    #[error("coefficient bound must be at least 1")]
    InvalidBound,
    #[error("polynomial is identically zero")]
    ZeroPolynomial,
    #[error("coordinate pair {factor} is zero")]
    ZeroPair { factor: usize },
    #[error("involution s{factor} is indeterminate on this fiber (A = B = C = 0){}", stage_note(*.stage))]
    DegenerateFiber { factor: usize, stage: Option<usize> },
    #[error("both Vieta denominators vanish for s{factor} (|A|={a:.3e}, |B|={b:.3e}, |C|={c:.3e}){}", stage_note(*.stage))]
    VanishingDenominators { factor: usize, a: f64, b: f64, c: f64, stage: Option<usize> },
    #[error("point is not on the surface (residual {0:.3e})")]
    NotOnSurface(f64),
    #[error("singular point: gradient of F vanishes")]
    SingularPoint,
    #[error("no chart with a nonvanishing residue denominator")]
    ChartFailure,
    #[error("invalid surface file: {0}")]
    InvalidFile(String),
    #[error("non-finite value encountered")]
    NonFinite,
}

fn stage_note(stage: Option<usize>) -> String {
    stage.map(|s| format!(" at stage {s}")).unwrap_or_default()
}

impl SurfaceError {
    fn at_stage(self, s: usize) -> Self {
        match self {
            SurfaceError::DegenerateFiber { factor, .. } => SurfaceError::DegenerateFiber { factor, stage: Some(s) },
            SurfaceError::VanishingDenominators { factor, a, b, c, .. } => {
                SurfaceError::VanishingDenominators { factor, a, b, c, stage: Some(s) }
            }
            e => e,
        }
    }
}

/// Relative size below which a fiber quantity counts as zero.
pub const DEGENERACY_TOL: f64 = 1e-12;

/// Membership tolerance for floating-point points.
pub const MEMBERSHIP_TOL: f64 = 1e-10;

/// The 27 coefficients `c_{ijk}` of `F`, stored exactly with derived integral and
/// floating forms.
#[derive(Clone, Debug)]
pub struct WehlerCoefficients {
    exact: Vec<BigRational>,
    integral: [BigInt; 27],
    complex: [C64; 27],
    scale: f64,
    seed: Option<u64>,
    screen: Option<ScreenReport>,
}

impl PartialEq for WehlerCoefficients {
    fn eq(&self, other: &Self) -> bool {
        self.exact == other.exact
    }
}

impl WehlerCoefficients {
    pub fn new(c: Vec<BigRational>) -> Result<Self, SurfaceError> {
        if c.len() != 27 {
            return Err(SurfaceError::InvalidFile(format!("expected 27 coefficients, found {}", c.len())));
        }
        if c.iter().all(Zero::is_zero) {
            return Err(SurfaceError::ZeroPolynomial);
        }
        let lcm = c.iter().fold(BigInt::one(), |acc, r| acc.lcm(r.denom()));
        let integral: [BigInt; 27] = std::array::from_fn(|i| (&c[i] * BigRational::from(lcm.clone())).to_integer());
        let complex: [C64; 27] = std::array::from_fn(|i| C64::new(ratio_to_f64(&c[i]), 0.0));
        let scale = complex.iter().map(|z| z.norm()).sum::<f64>();
        Ok(Self { exact: c, integral, complex, scale, seed: None, screen: None })
    }

    pub fn from_ints(c: &[i64; 27]) -> Result<Self, SurfaceError> {
        Self::new(c.iter().map(|&v| BigRational::from_integer(BigInt::from(v))).collect())
    }

    /// Builds from `c[i][j][k]`.
    pub fn from_nested(c: &[[[i64; 3]; 3]; 3]) -> Result<Self, SurfaceError> {
        let mut flat = [0i64; 27];
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    flat[poly::coeff_index(i, j, k)] = c[i][j][k];
                }
            }
        }
        Self::from_ints(&flat)
    }

    pub fn exact(&self) -> &[BigRational] {
        &self.exact
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> &BigRational {
        &self.exact[poly::coeff_index(i, j, k)]
    }

    /// Coefficients with denominators cleared.
    pub fn integral(&self) -> &[BigInt; 27] {
        &self.integral
    }

    pub fn complex(&self) -> &[C64; 27] {
        &self.complex
    }

    /// `Σ |c_{ijk}|`, the reference size for relative tolerances.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn screen(&self) -> Option<&ScreenReport> {
        self.screen.as_ref()
    }

    pub fn with_screen(mut self, n_samples: usize, seed: u64) -> Self {
        self.screen = Some(smoothness_screen(&self, n_samples, seed));
        self
    }

    pub fn to_file(&self) -> SurfaceFile {
        let c = (0..3)
            .map(|i| {
                (0..3)
                    .map(|j| (0..3).map(|k| format_rational(self.get(i, j, k))).collect())
                    .collect()
            })
            .collect();
        SurfaceFile { c, seed: self.seed, screen: self.screen.clone() }
    }

    pub fn from_file(file: &SurfaceFile) -> Result<Self, SurfaceError> {
        let bad = |m: String| SurfaceError::InvalidFile(m);
        if file.c.len() != 3 || file.c.iter().any(|r| r.len() != 3 || r.iter().any(|s| s.len() != 3)) {
            return Err(bad("\"c\" must be a 3×3×3 array".into()));
        }
        let mut flat = vec![BigRational::zero(); 27];
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    let s = &file.c[i][j][k];
                    flat[poly::coeff_index(i, j, k)] =
                        parse_rational(s).ok_or_else(|| bad(format!("c[{i}][{j}][{k}] = {s:?} is not a rational")))?;
                }
            }
        }
        let mut out = Self::new(flat)?;
        out.seed = file.seed;
        out.screen = file.screen.clone();
        Ok(out)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("surface file serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, SurfaceError> {
        let file: SurfaceFile = serde_json::from_str(text).map_err(|e| SurfaceError::InvalidFile(e.to_string()))?;
        Self::from_file(&file)
    }
}

pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(BigRational::new(n.trim().parse().ok()?, d))
        }
        None => Some(BigRational::from_integer(s.parse().ok()?)),
    }
}

/// On-disk form: `{"c": [[["p/q", ..]]], "seed": int, "screen": {..}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceFile {
    pub c: Vec<Vec<Vec<String>>>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub screen: Option<ScreenReport>,
}

/// Seeded integer coefficients in `[−bound, bound]`, screened with the default sample count.
pub fn random_wehler(seed: u64, coeff_bound: i64) -> Result<WehlerCoefficients, SurfaceError> {
    random_wehler_screened(seed, coeff_bound, DEFAULT_SCREEN_SAMPLES)
}

pub fn random_wehler_screened(
    seed: u64,
    coeff_bound: i64,
    screen_samples: usize,
) -> Result<WehlerCoefficients, SurfaceError> {
    if coeff_bound < 1 {
        return Err(SurfaceError::InvalidBound);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let c: [i64; 27] = std::array::from_fn(|_| rng.random_range(-coeff_bound..=coeff_bound));
        if c.iter().all(|&v| v == 0) {
            continue;
        }
        let mut w = WehlerCoefficients::from_ints(&c)?;
        w.seed = Some(seed);
        return Ok(w.with_screen(screen_samples, seed));
    }
}

/// `F` restricted to one fiber direction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FiberQuadratic {
    pub factor: Factor,
    pub a: C64,
    pub b: C64,
    pub c: C64,
    /// `A = B = C = 0` within the relative tolerance.
    pub degenerate: bool,
}

impl FiberQuadratic {
    pub fn abc(&self) -> [C64; 3] {
        [self.a, self.b, self.c]
    }

    pub fn eval(&self, w: &Pair<C64>) -> C64 {
        poly::quad_eval(&self.abc(), w)
    }

    pub fn discriminant(&self) -> C64 {
        self.b * self.b - 4.0 * self.a * self.c
    }
}

pub fn eval_f(coeffs: &WehlerCoefficients, p: &SurfacePoint) -> C64 {
    poly::eval(coeffs.complex(), p.pairs())
}

pub fn fiber_quadratic(coeffs: &WehlerCoefficients, factor: Factor, p: &SurfacePoint) -> FiberQuadratic {
    let [a, b, c] = poly::fiber_abc(coeffs.complex(), factor.index(), p.pairs());
    let size = a.norm().max(b.norm()).max(c.norm());
    FiberQuadratic { factor, a, b, c, degenerate: size <= DEGENERACY_TOL * coeffs.scale() }
}

/// One involution together with the log-modulus of the renormalizing divisor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LiftedStep {
    pub point: SurfacePoint,
    /// `log|μ|` where the lifted output pair equals `μ` times its normalized form.
    pub renorm_log: f64,
    /// Chart of the input pair, selecting which root-sum form was used.
    pub form: usize,
}

/// Vieta conjugate of the `factor` pair, with the lift `S₀/w₀²` or `S₁/w₁²`
/// chosen by the larger input coordinate.
pub fn involution_lifted(
    coeffs: &WehlerCoefficients,
    factor: Factor,
    p: &SurfacePoint,
) -> Result<LiftedStep, SurfaceError> {
    let d = factor.index();
    let fq = fiber_quadratic(coeffs, factor, p);
    if fq.degenerate {
        return Err(SurfaceError::DegenerateFiber { factor: factor.number(), stage: None });
    }
    let abc = fq.abc();
    let w = p.pair(d);
    let k = chart_of(w);
    // the chart coordinate is exactly 1, so S_k/w_k² = S_k
    let s = if k == 0 { poly::vieta_s0(&abc, w) } else { poly::vieta_s1(&abc, w) };
    let size = s[0].norm().max(s[1].norm());
    if !(size > DEGENERACY_TOL * coeffs.scale()) {
        if !size.is_finite() {
            return Err(SurfaceError::NonFinite);
        }
        return Err(SurfaceError::VanishingDenominators {
            factor: factor.number(),
            a: fq.a.norm(),
            b: fq.b.norm(),
            c: fq.c.norm(),
            stage: None,
        });
    }
    let (w2, _, mu) = normalize_pair(s).ok_or(SurfaceError::NonFinite)?;
    let mut pairs = *p.pairs();
    pairs[d] = w2;
    Ok(LiftedStep { point: SurfacePoint::from_normalized(pairs), renorm_log: mu.norm().ln(), form: k })
}

pub fn involution(coeffs: &WehlerCoefficients, factor: Factor, p: &SurfacePoint) -> Result<SurfacePoint, SurfaceError> {
    involution_lifted(coeffs, factor, p).map(|s| s.point)
}

/// Root-product form `[A w₁ : C w₀]` of the involution; `None` where it degenerates.
pub fn involution_product_form(coeffs: &WehlerCoefficients, factor: Factor, p: &SurfacePoint) -> Option<SurfacePoint> {
    let fq = fiber_quadratic(coeffs, factor, p);
    let s = poly::vieta_product(&fq.abc(), p.pair(factor.index()));
    if s[0].norm().max(s[1].norm()) <= DEGENERACY_TOL * coeffs.scale() {
        return None;
    }
    p.with_pair(factor.index(), s).ok()
}

/// One application of `T` (or `T⁻¹`) with per-factor lift bookkeeping.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepRecord {
    pub point: SurfacePoint,
    /// Per-factor `log|·|` of the lifted composite relative to the normalized output.
    pub kappa: [f64; 3],
}

/// Lift-scale update for one involution: the new pair has degree 2 in the two other
/// pairs and −1 in itself.
pub(crate) fn kappa_update(kappa: &mut [f64; 3], d: usize, renorm_log: f64) {
    let [a, b] = poly::others(d);
    kappa[d] = 2.0 * kappa[a] + 2.0 * kappa[b] - kappa[d] + renorm_log;
}

pub fn automorphism_step(
    coeffs: &WehlerCoefficients,
    p: &SurfacePoint,
    composition: Composition,
) -> Result<StepRecord, SurfaceError> {
    let mut q = *p;
    let mut kappa = [0.0; 3];
    for (stage, f) in composition.application_order().into_iter().enumerate() {
        let st = involution_lifted(coeffs, f, &q).map_err(|e| e.at_stage(stage + 1))?;
        kappa_update(&mut kappa, f.index(), st.renorm_log);
        q = st.point;
    }
    Ok(StepRecord { point: q, kappa })
}

/// `T(p) = σ₁(σ₂(σ₃(p)))`, or `T⁻¹(p) = σ₃(σ₂(σ₁(p)))` when `inverse`.
pub fn automorphism(coeffs: &WehlerCoefficients, p: &SurfacePoint, inverse: bool) -> Result<SurfacePoint, SurfaceError> {
    let comp = if inverse { Composition::default().inverted() } else { Composition::default() };
    automorphism_step(coeffs, p, comp).map(|s| s.point)
}

pub fn apply_composition(
    coeffs: &WehlerCoefficients,
    p: &SurfacePoint,
    composition: Composition,
) -> Result<SurfacePoint, SurfaceError> {
    automorphism_step(coeffs, p, composition).map(|s| s.point)
}

/// A random point of X: Fubini–Study draws on two factors and a random root in the third.
pub fn random_point<R: Rng + ?Sized>(coeffs: &WehlerCoefficients, rng: &mut R) -> SurfacePoint {
    loop {
        let x = random_p1(rng);
        let y = random_p1(rng);
        let base = SurfacePoint::from_normalized([x, y, [point::one(), C64::new(0.0, 0.0)]]);
        let fq = fiber_quadratic(coeffs, Factor::Z, &base);
        if fq.degenerate {
            continue;
        }
        if let Some(roots) = fiber_roots(&fq.abc()) {
            let z = roots[rng.random_range(0..2)];
            return SurfacePoint::from_normalized([x, y, z]);
        }
    }
}

/// Rejects a point whose residual exceeds the membership tolerance.
pub fn check_on_surface(coeffs: &WehlerCoefficients, p: &SurfacePoint) -> Result<(), SurfaceError> {
    let r = p.residual(coeffs);
    if r <= MEMBERSHIP_TOL {
        Ok(())
    } else {
        Err(SurfaceError::NotOnSurface(r))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn reference() -> WehlerCoefficients {
        random_wehler_screened(7, 5, 256).unwrap()
    }

    #[test]
    fn seeded_coefficients_are_deterministic() {
        let a = random_wehler_screened(11, 4, 64).unwrap();
        let b = random_wehler_screened(11, 4, 64).unwrap();
        let c = random_wehler_screened(12, 4, 64).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(random_wehler(1, 0).unwrap_err(), SurfaceError::InvalidBound);
    }

    #[test]
    fn file_round_trip() {
        let w = reference();
        let back = WehlerCoefficients::from_json(&w.to_json()).unwrap();
        assert_eq!(back, w);
        assert_eq!(back.seed(), Some(7));
        assert!(WehlerCoefficients::from_json(r#"{"c": [[["1"]]]}"#).is_err());
    }

    #[test]
    fn origin_involution_matches_vieta() {
        // c000 = 0 puts the affine origin on X; its z-fiber is c002 z² + c001 z
        let mut c = [1i64; 27];
        c[poly::coeff_index(0, 0, 0)] = 0;
        c[poly::coeff_index(0, 0, 1)] = 3;
        c[poly::coeff_index(0, 0, 2)] = 2;
        let w = WehlerCoefficients::from_ints(&c).unwrap();
        let o = SurfacePoint::from_affine(C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0));
        assert_eq!(o.residual(&w), 0.0);
        let q = involution(&w, Factor::Z, &o).unwrap();
        assert!((q.affine(2) - C64::new(-1.5, 0.0)).norm() < 1e-15);
        assert_eq!(q.affine(0), C64::new(0.0, 0.0));
    }

    #[test]
    fn ramification_point_is_fixed() {
        // z-fiber over the origin is (z − 1)² = z² − 2z + 1
        let mut c = [0i64; 27];
        c[poly::coeff_index(0, 0, 0)] = 1;
        c[poly::coeff_index(0, 0, 1)] = -2;
        c[poly::coeff_index(0, 0, 2)] = 1;
        c[poly::coeff_index(2, 2, 2)] = 1;
        let w = WehlerCoefficients::from_ints(&c).unwrap();
        let p = SurfacePoint::from_affine(C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0));
        let q = involution(&w, Factor::Z, &p).unwrap();
        assert!(q.distance(&p) < 1e-15);
    }

    #[test]
    fn degenerate_fiber_is_reported() {
        // F = x₁² y₁² z₁²: every fiber over x = 0 vanishes identically in z
        let mut c = [0i64; 27];
        c[poly::coeff_index(2, 2, 2)] = 1;
        let w = WehlerCoefficients::from_ints(&c).unwrap();
        let p = SurfacePoint::from_affine(C64::new(0.0, 0.0), C64::new(0.5, 0.0), C64::new(0.3, 0.0));
        assert!(fiber_quadratic(&w, Factor::Z, &p).degenerate);
        assert_eq!(
            involution(&w, Factor::Z, &p).unwrap_err(),
            SurfaceError::DegenerateFiber { factor: 3, stage: None }
        );
        let err = automorphism(&w, &p, false).unwrap_err();
        assert_eq!(err, SurfaceError::DegenerateFiber { factor: 3, stage: Some(1) });
    }

    #[test]
    fn involutions_and_automorphism_on_random_points() {
        let w = reference();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let p = random_point(&w, &mut rng);
            assert!(p.residual(&w) < 1e-12);
            for f in Factor::ALL {
                let q = involution(&w, f, &p).unwrap();
                assert!(q.residual(&w) < 1e-10);
                assert!(involution(&w, f, &q).unwrap().distance(&p) < 1e-10);
                if let Some(r) = involution_product_form(&w, f, &p) {
                    let scale = fiber_quadratic(&w, f, &p);
                    if scale.a.norm().min(scale.c.norm()) > 1e-3 {
                        assert!(r.distance(&q) < 1e-9);
                    }
                }
            }
            let t = automorphism(&w, &p, false).unwrap();
            assert!(t.residual(&w) < 1e-10);
            assert!(automorphism(&w, &t, true).unwrap().distance(&p) < 1e-9);
        }
    }
}
