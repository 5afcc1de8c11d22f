use cold_plasma::bounds::BoundFamily;
use cold_plasma::dynamics::{orbit_extremes, CharacteristicState, Dimension};
use cold_plasma::oracle::{count_revolutions_oracle, run_state, sandwich_check, OracleOptions, SandwichOptions};
use cold_plasma::spiral::{build_spiral, lifetime, FplusRule, SigmaPair, SpiralKind};
use proptest::prelude::*;

fn spirals(lambda0: f64, f_plus: f64, family: BoundFamily) -> (cold_plasma::spiral::Spiral, cold_plasma::spiral::Spiral) {
    let rule = FplusRule::OrbitConstant(f_plus);
    let b = |k| build_spiral(k, (lambda0, 0.0), rule, SigmaPair::default(), Dimension::TWO, 6, family).unwrap();
    (b(SpiralKind::Inner), b(SpiralKind::Outer))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn corrected_family_sandwiches_oracle(
        f in -0.15f64..0.15,
        g in -0.1f64..0.12,
        lambda in -0.2f64..0.3,
        d in -0.3f64..0.3,
    ) {
        let s = CharacteristicState { t: 0.0, lambda, div_v: d, f, g, r: 1.0 };
        let run = run_state(s, Dimension::TWO, OracleOptions::new(20.0, 1e-11)).unwrap();
        let f_plus = orbit_extremes(f, g, Dimension::TWO).unwrap().f_plus;
        let so = SandwichOptions {
            sigmas: SigmaPair::default(),
            f_plus,
            family: BoundFamily::Corrected,
            arcs: 3,
            samples_per_arc: 200,
        };
        prop_assert!(sandwich_check(&run, so).unwrap().max_violation < 1e-6);
        prop_assert!(run.min_density() > -1e-8);
    }

    #[test]
    fn inner_crossings_inside_outer(g0 in 0.005f64..0.12) {
        let f_plus = orbit_extremes(0.0, g0, Dimension::TWO).unwrap().f_plus;
        let (inner, outer) = spirals(2.0 * g0, f_plus, BoundFamily::Printed);
        for (a, b) in inner.crossings.iter().zip(&outer.crossings) {
            prop_assert!((a + 1.0).abs() <= (b + 1.0).abs() + 1e-12);
        }
    }

    #[test]
    fn lifetime_bounds_ordered(g0 in 0.005f64..0.12) {
        let f_plus = orbit_extremes(0.0, g0, Dimension::TWO).unwrap().f_plus;
        let (inner, outer) = spirals(2.0 * g0, f_plus, BoundFamily::Printed);
        let est = lifetime(&inner, &outer).unwrap();
        if est.revolutions > 0 {
            prop_assert!(est.t_lower > 0.0 && est.t_lower <= est.t_upper);
        }
    }

    #[test]
    fn oracle_reaches_certified_count(g0 in 0.005f64..0.12) {
        let f_plus = orbit_extremes(0.0, g0, Dimension::TWO).unwrap().f_plus;
        let (_, outer) = spirals(2.0 * g0, f_plus, BoundFamily::Corrected);
        let s = CharacteristicState::on_axis(0.0, g0, Dimension::TWO);
        let t_max = 7.0 * (outer.revolutions as f64 + 1.0);
        let run = run_state(s, Dimension::TWO, OracleOptions::new(t_max, 1e-10)).unwrap();
        prop_assert!(count_revolutions_oracle(&run) >= outer.revolutions);
    }
}

#[test]
fn spiral_and_oracle_are_deterministic() {
    let (a, b) = spirals(0.1, 0.05, BoundFamily::Printed);
    let (c, d) = spirals(0.1, 0.05, BoundFamily::Printed);
    assert_eq!(a.crossings, c.crossings);
    assert_eq!(b.crossings, d.crossings);
    let s = CharacteristicState::on_axis(0.01, 0.05, Dimension::THREE);
    let r1 = run_state(s, Dimension::THREE, OracleOptions::new(15.0, 1e-10)).unwrap();
    let r2 = run_state(s, Dimension::THREE, OracleOptions::new(15.0, 1e-10)).unwrap();
    assert_eq!(r1.trajectory.t, r2.trajectory.t);
    assert_eq!(r1.crossings, r2.crossings);
}
