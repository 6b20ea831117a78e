use predlab::capacity::tau_arcset;
use predlab::covariance::covariances_ma1;
use predlab::geomean::geometric_mean;
use predlab::spectral::SpectralDensity;
use predlab::toeplitz::{levinson, sigma2_via_determinants};
use predlab::{Angle, ArcSet};
use proptest::prelude::*;
use rug::ops::Pow;
use rug::Float;

const PREC: u32 = 128;

fn rel(a: &Float, b: &Float) -> f64 {
    (Float::with_val(PREC, a - b) / b).abs().to_f64()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn ma1_trace_closed_form(b in 0.1f64..0.9, s2 in 0.5f64..3.0) {
        let r = covariances_ma1(b, s2, 40, PREC).unwrap();
        let t = levinson(&r, 40).unwrap();
        let bb = Float::with_val(PREC, b).square();
        for n in 0..=40u32 {
            let num = Float::with_val(PREC, 1 - bb.clone().pow(n + 2));
            let den = Float::with_val(PREC, 1 - bb.clone().pow(n + 1));
            let want = Float::with_val(PREC, num / den) * s2;
            prop_assert!(rel(&t.sigma2[n as usize], &want) < 1e-30, "n = {}", n);
        }
    }

    #[test]
    fn levinson_matches_determinants(b in 0.0f64..=1.0, n in 1usize..12) {
        let r = covariances_ma1(b, 1.0, n, PREC).unwrap();
        let t = levinson(&r, n).unwrap();
        let d = sigma2_via_determinants(&r, n).unwrap();
        prop_assert!(rel(&t.sigma2[n], &d) < 1e-25);
    }

    #[test]
    fn density_display_round_trips(b in 0.0f64..=1.0, d in -0.45f64..0.45, a in 0.1f64..3.0) {
        for f in [
            SpectralDensity::ma1(b, 1.5).unwrap(),
            SpectralDensity::arfima(d, vec![], vec![], 1.0).unwrap(),
            SpectralDensity::pollaczek(a).unwrap(),
        ] {
            let s = f.to_string();
            prop_assert_eq!(SpectralDensity::parse(&s).unwrap().to_string(), s);
        }
    }

    #[test]
    fn ma1_geometric_mean(b in 0.0f64..0.95, s2 in 0.2f64..4.0) {
        let g = geometric_mean(&SpectralDensity::ma1(b, s2).unwrap(), PREC).unwrap();
        let v = g.value.unwrap().to_f64();
        let want = s2 / (2.0 * std::f64::consts::PI);
        prop_assert!(((v - want) / want).abs() < 1e-12, "{} vs {}", v, want);
    }

    #[test]
    fn single_arc_capacity(k in 1i64..24, shift in 0i64..48) {
        let half = Angle::pi_frac(k, 24);
        let arcs = ArcSet::single(Angle::pi_frac(shift, 24), half).unwrap();
        let t = tau_arcset(&arcs);
        let want = (std::f64::consts::PI * k as f64 / 48.0).sin();
        prop_assert!((t.value - want).abs() < 1e-15);
        prop_assert!(t.bracket.is_none());
    }

    #[test]
    fn capacity_rotation_invariant(h1 in 1i64..10, h2 in 1i64..10, rot in 0i64..40) {
        let arcs = ArcSet::new(vec![
            (Angle::zero(), Angle::pi_frac(h1, 24)),
            (Angle::pi_frac(3, 4), Angle::pi_frac(h2, 24)),
        ])
        .unwrap();
        let a = tau_arcset(&arcs);
        let b = tau_arcset(&arcs.rotate(&Angle::pi_frac(rot, 20)));
        prop_assert!((a.value - b.value).abs() < 1e-9, "{} vs {}", a.value, b.value);
        if let Some((lo, hi)) = a.bracket {
            prop_assert!(lo <= a.value && a.value <= hi);
        }
    }
}
