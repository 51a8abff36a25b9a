//! Property checks over randomized packet parameters: invariants that
//! must hold across the whole family, not just at hand-picked points.

use proptest::prelude::*;

use freewave::observables;
use freewave::packet::{self, FamilyPacket, Interval, WavePacket};
use freewave::{analysis, asymptotics};

fn family(m: usize, a0: f64, k0: f64, x0: f64) -> FamilyPacket {
    FamilyPacket::new(m, a0, k0, x0).expect("valid packet")
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sampled_grids_carry_unit_norm_and_reveal_their_order(
        m in 0usize..=4,
        a0 in 0.7f64..1.4,
        k0 in -1.0f64..1.0,
        x0 in -1.5f64..1.5,
    ) {
        let p = family(m, a0, k0, x0);
        let k_half_width = k0.abs() + 12.0 / a0;
        let g = p.sample_to_grid(k_half_width, 4096).expect("wide window");
        prop_assert!((g.norm() - 1.0).abs() < 1e-8, "norm {}", g.norm());
        let detected = packet::detect_small_k_order(&g, 1e-6).expect("detectable order");
        prop_assert_eq!(detected, m);
    }

    #[test]
    fn probabilities_stay_within_bounds_and_nest(
        m in 0usize..=3,
        a0 in 0.7f64..1.4,
        k0 in -1.0f64..1.0,
        reduced_t in 0.0f64..50.0,
    ) {
        let packet = WavePacket::from(family(m, a0, k0, 0.0));
        let t = packet.default_units().physical_time(reduced_t);
        let s = observables::survival(&packet, t).expect("survival");
        prop_assert!((0.0..=1.0 + 1e-9).contains(&s), "S = {s}");
        let wide = Interval::symmetric(2.0 * a0).expect("interval");
        let narrow = Interval::symmetric(a0).expect("interval");
        let p_wide = observables::nonescape_at(&packet, t, &wide).expect("nonescape");
        let p_narrow = observables::nonescape_at(&packet, t, &narrow).expect("nonescape");
        prop_assert!((0.0..=1.0 + 1e-9).contains(&p_wide), "P = {p_wide}");
        prop_assert!(p_narrow <= p_wide + 1e-12, "nesting violated: {p_narrow} > {p_wide}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn nonescape_adds_over_adjacent_intervals(
        m in 0usize..=2,
        split in -1.6f64..1.6,
        reduced_t in 0.05f64..20.0,
    ) {
        let p = family(m, 1.0, 0.0, 0.0);
        let whole = Interval::new(-2.0, 2.0).expect("interval");
        let left = Interval::new(-2.0, split).expect("interval");
        let right = Interval::new(split, 2.0).expect("interval");
        let t = p.units().physical_time(reduced_t);
        let all = observables::nonescape_family(&p, t, &whole).expect("whole");
        let a = observables::nonescape_family(&p, t, &left).expect("left");
        let b = observables::nonescape_family(&p, t, &right).expect("right");
        prop_assert!((all - (a + b)).abs() < 5e-9, "split {split}: {all} vs {}", a + b);
    }

    #[test]
    fn grid_survival_ignores_the_position_center(
        x0 in -2.0f64..2.0,
        reduced_t in 0.1f64..5.0,
    ) {
        let shifted = family(0, 1.0, 0.0, x0);
        let g = WavePacket::from(shifted.sample_to_grid(9.0, 4096).expect("grid"));
        let s_grid = observables::survival(&g, reduced_t).expect("grid survival");
        let centered = WavePacket::from(family(0, 1.0, 0.0, 0.0));
        let s_ref = observables::survival(&centered, reduced_t).expect("family survival");
        prop_assert!((s_grid - s_ref).abs() < 1e-8, "{s_grid} vs {s_ref}");
    }

    #[test]
    fn odd_orders_place_the_field_root_at_the_position_center(
        m in prop::sample::select(vec![1usize, 3]),
        x0 in -1.0f64..1.0,
    ) {
        let packet = WavePacket::from(family(m, 1.0, 0.0, x0));
        let interval = Interval::symmetric(2.0).expect("interval");
        let profile = asymptotics::asymptotic_profile(&packet, &interval).expect("profile");
        let xi = profile.xi0.expect("real root for odd order, zero momentum");
        prop_assert!((xi - x0).abs() < 1e-9, "root {xi}, center {x0}");
        let at_root = asymptotics::leading_field(&profile, xi, 100.0).expect("field").norm();
        let off_root = asymptotics::leading_field(&profile, xi + 1.0, 100.0).expect("field").norm();
        prop_assert!(at_root < 1e-10 * off_root, "field does not vanish at the root");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn family_survival_depends_only_on_reduced_time(
        m in 0usize..=3,
        a0 in 0.6f64..1.6,
        reduced_t in 0.01f64..200.0,
    ) {
        let packet = WavePacket::from(family(m, a0, 0.0, 0.0));
        let t = packet.default_units().physical_time(reduced_t);
        let s = observables::survival(&packet, t).expect("survival");
        let law = (1.0 + reduced_t * reduced_t).powf(-(2.0 * m as f64 + 1.0) / 2.0);
        prop_assert!((s - law).abs() < 1e-10 * law.max(1e-12), "{s} vs {law}");
    }

    #[test]
    fn power_law_fits_recover_synthetic_laws(
        exponent in -6.0f64..-0.5,
        amplitude in 0.1f64..10.0,
    ) {
        let times = observables::log_spaced_times(1.0, 100.0, 20).expect("times");
        let values: Vec<f64> = times.iter().map(|t| amplitude * t.powf(exponent)).collect();
        let fit = analysis::fit_power_law(&times, &values, (1.0, 100.0)).expect("fit");
        prop_assert!((fit.exponent - exponent).abs() < 1e-9);
        prop_assert!((fit.amplitude - amplitude).abs() < 1e-8 * amplitude);
    }
}
