//! Frozen values from verified runs on the reference surface (seed 7, bound 5).

use std::sync::OnceLock;

use k3dyn::currents::{
    dyadic_scales, holder_estimate, lambda, measure_sample, panel, submean_check, ClassWeights, CurrentsError, Sign,
};
use k3dyn::dynamics::{
    dim_plus, dvol_sample, exact_heights, lyapunov, lyapunov_periodic, orbit, orbit_exact, periodic_search,
    Direction,
};
use k3dyn::surface::{random_point, random_wehler_screened, rational_points, WehlerCoefficients};
use num_bigint::BigInt;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn surface() -> &'static WehlerCoefficients {
    static W: OnceLock<WehlerCoefficients> = OnceLock::new();
    W.get_or_init(|| random_wehler_screened(7, 5, 4096).unwrap())
}

#[test]
fn seeded_coefficients() {
    let head = |seed| -> Vec<BigInt> { random_wehler_screened(seed, 5, 0).unwrap().integral()[..6].to_vec() };
    let ints = |v: [i64; 6]| v.map(BigInt::from).to_vec();
    assert_eq!(head(7), ints([-4, -4, 2, 2, 1, -2]));
    assert_eq!(head(8), ints([-5, 3, 4, 1, 1, 4]));
    assert!(surface().screen().unwrap().pass);
}

#[test]
fn saddle_counts_at_low_period() {
    let w = surface();
    let p1 = periodic_search(w, 1, 400, 1e-10, 3).unwrap();
    assert_eq!(p1.saddles.len(), 0);
    let p2 = periodic_search(w, 2, 400, 1e-10, 3).unwrap();
    assert_eq!(p2.saddles.len(), 81);
    for s in &p2.saddles {
        assert!(((s.multipliers[0] * s.multipliers[1]).norm() - 1.0).abs() < 1e-6);
        assert_eq!(s.orbit.len(), 2);
    }
}

#[test]
fn periodic_lyapunov_matches_multiplier() {
    let w = surface();
    let rep = periodic_search(w, 2, 400, 1e-10, 3).unwrap();
    for s in rep.saddles.iter().take(10) {
        let est = lyapunov_periodic(w, s, 300, 1).unwrap();
        assert!((est.lambda_plus - s.unstable_exponent()).abs() < 1e-4);
    }
}

#[test]
fn holder_exponents_near_saddles() {
    let w = surface();
    let rep = periodic_search(w, 2, 8000, 1e-10, 82).unwrap();
    let pts: Vec<_> = rep.saddles.iter().map(|s| s.point).take(32).collect();
    let expected = [(Sign::Plus, 0.9965250355326359), (Sign::Minus, 0.9707569762460561)];
    for (sign, beta) in expected {
        let r = holder_estimate(w, &pts, &ClassWeights::canonical(sign), sign, 12, &dyadic_scales(4, 14), 88).unwrap();
        assert!(r.reliable && r.r2 > 0.999);
        assert!((r.beta - beta).abs() < 1e-6, "{sign:?}: {}", r.beta);
        assert!(r.beta < 1.0);
    }
}

#[test]
fn submean_pass_rate_is_complete() {
    let w = surface();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let (mut pass, mut excluded) = (0, 0);
    for sign in [Sign::Plus, Sign::Minus] {
        let a = ClassWeights::canonical(sign);
        for _ in 0..200 {
            let p = random_point(w, &mut rng);
            for r in [0.1, 0.001] {
                match submean_check(w, &p, &a, sign, 12, r, 64) {
                    Ok(v) => {
                        assert!(v.pass);
                        pass += 1;
                    }
                    Err(CurrentsError::ChartFailure(_)) => excluded += 1,
                    Err(e) => panic!("{e}"),
                }
            }
        }
    }
    assert_eq!(pass + excluded, 800);
    assert!(excluded < 40, "{excluded} discs excluded");
}

#[test]
fn measure_sample_fixtures() {
    let w = surface();
    let m2 = measure_sample(w, 2, 2000, 1e-10, 9).unwrap();
    let m4 = measure_sample(w, 4, 2000, 1e-10, 9).unwrap();
    assert_eq!(m2.orbits_per_period, vec![0, 107]);
    assert_eq!(m4.orbits_per_period, vec![0, 107, 370, 701]);
    let mass = m2.ramification_mass(w, 0.1);
    assert!(mass > 0.0 && (mass - 0.14953271028037382).abs() < 1e-12);
    for f in panel() {
        assert!(m2.pushforward_gap(w, |p| f.eval(p)).unwrap() < 1e-9);
        // change measured against the sup bound; several panel means are near zero
        let shift = (m2.mean(|p| f.eval(p)) - m4.mean(|p| f.eval(p))).abs() / f.bound();
        assert!(shift < 0.05, "{f}: {shift}");
    }
}

#[test]
fn exact_heights_grow_like_lambda() {
    let w = surface();
    let p = &rational_points(w, 6, 1)[0];
    let rec = orbit_exact(w, p, 5, Direction::Forward).unwrap();
    let h: Vec<f64> = exact_heights(&rec).iter().map(|r| r.log_height).collect();
    let slope = (h[5].ln() - h[4].ln()).abs();
    assert!((slope - lambda().ln()).abs() < 0.2 * lambda().ln());
    for q in &rec.exact {
        assert!(q.on_surface(w));
    }
}

#[test]
fn lift_scales_grow_like_lambda() {
    let w = surface();
    let p = random_point(w, &mut ChaCha8Rng::seed_from_u64(3));
    let rec = orbit(w, &p, 50, Direction::Forward).unwrap();
    let k = rec.lift_log_scales();
    let m = k[50].iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let slope = m.ln() / 50.0;
    assert!((slope - lambda().ln()).abs() < 0.2 * lambda().ln());
}

#[test]
fn dvol_estimates_agree_across_seeds() {
    let w = surface();
    let f = &panel()[0];
    let a = dvol_sample(w, 20_000, 1).unwrap().mean(|p| f.eval(p));
    let b = dvol_sample(w, 20_000, 2).unwrap().mean(|p| f.eval(p));
    assert!((a - 0.5214038255660869).abs() < 1e-12);
    assert!((a - b).abs() < 0.01);
}

#[test]
fn lyapunov_is_stable_under_doubling() {
    let w = surface();
    let p = random_point(w, &mut ChaCha8Rng::seed_from_u64(4));
    let a = lyapunov(w, &p, 2000, 4).unwrap();
    let b = lyapunov(w, &p, 4000, 4).unwrap();
    assert!((a.lambda_plus - b.lambda_plus).abs() <= a.half_width + b.half_width);
}

#[test]
fn dimension_boundary() {
    let d = dim_plus(2.887270, 1.443635).unwrap();
    assert!((d.value - 2.0).abs() < 1e-6);
    assert!(dim_plus(2.887270, 1.0).unwrap().flagged);
}
