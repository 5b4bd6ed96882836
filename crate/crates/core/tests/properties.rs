use num_bigint::BigInt;
use num_rational::BigRational;
use polysing::constructor::{exponents, lambda_window, parse_rational};
use polysing::kelvin::{kelvin_identity, kelvin_point};
use polysing::kernel::{make_phi, ProblemParams};
use polysing::potential::{calibration_spec, n_eval, QuadratureConfig, Theorem};
use polysing::symcalc::{rat, RadialExpr};
use polysing::verify::fit_exponent;
use proptest::prelude::*;

fn ratio(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

proptest! {
    #[test]
    fn laplacian_of_a_power_is_closed_form(n in 2usize..13, s in -9i32..10) {
        let got = RadialExpr::rpow(n, rat(1, 1), s).laplacian();
        let c = s as i64 * (s as i64 + n as i64 - 2);
        prop_assert_eq!(got, RadialExpr::rpow(n, rat(c, 1), s - 2));
    }

    #[test]
    fn kelvin_identity_holds_on_powers(m in 1u32..6, n in 2usize..13, s in -9i32..10, c in -20i64..20) {
        prop_assume!(c != 0);
        let id = kelvin_identity(&RadialExpr::rpow(n, rat(c, 1), s), m, n).unwrap();
        prop_assert!(id.holds, "{:?}", id);
    }

    #[test]
    fn kelvin_point_is_an_involution(v in prop::collection::vec(-1e3f64..1e3, 2..9)) {
        prop_assume!(v.iter().any(|x| x.abs() > 1e-6));
        let back = kelvin_point(&kelvin_point(&v).unwrap()).unwrap();
        for (a, b) in v.iter().zip(&back) {
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        }
    }

    #[test]
    fn rationals_parse_exactly(p in -10_000i64..10_000, q in 1i64..10_000) {
        let r = ratio(p, q);
        prop_assert_eq!(parse_rational(&r.to_string()).unwrap(), r);
    }

    #[test]
    fn exponents_accept_exactly_the_window(p in 1i64..200, q in 1i64..30) {
        let l = ratio(p, q);
        for (t, m, n) in [(Theorem::T1_5, 3, 7), (Theorem::T1_8, 3, 6), (Theorem::T1_10, 3, 6), (Theorem::T1_17, 3, 7)] {
            let inside = lambda_window(t, m, n).contains(&l);
            prop_assert_eq!(exponents(t, m, n, &l).is_ok(), inside, "{} λ = {}", t, l);
        }
    }

    #[test]
    fn fit_recovers_power_laws(slope in -8.0f64..8.0, c in 0.01f64..100.0) {
        let pts: Vec<(f64, f64)> = (0..8).map(|k| {
            let r = 0.25f64.powi(k);
            (r, c * r.powf(slope))
        }).collect();
        let (got, se) = fit_exponent(&pts).unwrap();
        prop_assert!((got - slope).abs() < 1e-9 && se < 1e-8);
    }

    #[test]
    fn remainder_is_homogeneous(
        dx in prop::collection::vec(-1.0f64..1.0, 7),
        dy in prop::collection::vec(-1.0f64..1.0, 7),
        frac in 0.01f64..0.45,
        t in 0.05f64..20.0,
    ) {
        // Φ ∝ r^{2m−n} for (3, 7), so Ψ(tx, ty) = t^{2m−n} Ψ(x, y)
        let nx = dx.iter().map(|v| v * v).sum::<f64>().sqrt();
        let ny = dy.iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assume!(nx > 0.1 && ny > 0.1);
        let x: Vec<f64> = dx.iter().map(|v| v / nx).collect();
        let y: Vec<f64> = dy.iter().map(|v| v / ny * frac).collect();
        let ks = make_phi(&ProblemParams::new(3, 7).unwrap());
        let base = ks.psi(&x, &y).unwrap();
        let scaled = ks.psi(&x.iter().map(|v| v * t).collect::<Vec<_>>(), &y.iter().map(|v| v * t).collect::<Vec<_>>()).unwrap();
        prop_assert!((scaled - t.powi(-1) * base).abs() <= 1e-9 * base.abs().max(1e-300), "{} vs {}", scaled, base / t);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn potential_is_linear_in_epsilon(k in 1.0f64..50.0, a in 0.2f64..1.5, b in -0.8f64..0.8) {
        let cfg = QuadratureConfig::default();
        let s1 = calibration_spec(3, 7, 0.5, 0.05, 1.0).unwrap();
        let sk = calibration_spec(3, 7, 0.5, 0.05, k).unwrap();
        let mut x = vec![0.0; 7];
        x[0] = a;
        x[1] = b;
        let (u1, uk) = (n_eval(&s1, &x, &cfg).unwrap(), n_eval(&sk, &x, &cfg).unwrap());
        prop_assert!((uk - k * u1).abs() <= 2e-8 * (k * u1).abs(), "{} vs {}", uk, k * u1);
    }
}
