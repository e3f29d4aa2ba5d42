use proptest::prelude::*;
use slipcontact::dynamics::{simulate, DragLaw, DragTable, FallParameters, OdeSpec};
use slipcontact::drag::ScalingModel;
use slipcontact::field::{aperture_velocity, frobenius_sq};
use slipcontact::geometry::{gamma_s, smoothstep, sphere_normal, GapGeometry};
use slipcontact::profile::{coefficients, ProfileCoefficients, SlipRegime};
use slipcontact::quadrature::{integrate, QuadratureSpec};

fn slip_length() -> impl Strategy<Value = f64> {
    (-3.0f64..3.0).prop_map(|e| 10f64.powf(e))
}

fn regime() -> impl Strategy<Value = SlipRegime> {
    prop_oneof![
        (slip_length(), slip_length()).prop_map(|(s, w)| SlipRegime::Slip { beta_s: s, beta_omega: w }),
        slip_length().prop_map(|w| SlipRegime::Mixed { beta_omega: w }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn slip_groups_satisfy_all_constraints(a_s in 0.0f64..1e6, a_p in 0.0f64..1e6) {
        let c = ProfileCoefficients::slip_from_groups(a_s, a_p).unwrap();
        for r in c.constraint_residuals() {
            prop_assert!(r.abs() < 1e-12, "{:?}", c.constraint_residuals());
        }
    }

    #[test]
    fn mixed_group_satisfies_all_constraints(a_p in 0.0f64..1e9) {
        let c = ProfileCoefficients::mixed_from_group(a_p).unwrap();
        for r in c.constraint_residuals() {
            prop_assert!(r.abs() < 1e-12);
        }
    }

    #[test]
    fn profile_is_increasing_on_the_gap(reg in regime(), h in 1e-8f64..0.4, r in 0.0f64..0.2) {
        let c = coefficients(&reg, h, r).unwrap();
        for i in 0..=20 {
            prop_assert!(c.phi_t(i as f64 / 20.0) >= -1e-12);
        }
    }

    #[test]
    fn sphere_normal_is_unit(r in 0.0f64..0.999) {
        let n = sphere_normal(r).unwrap();
        prop_assert!((n[0].hypot(n[1]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gamma_is_nonnegative_and_increasing(r in 0.0f64..0.99, dr in 1e-6f64..0.009) {
        let a = gamma_s(r).unwrap();
        prop_assert!(a >= 0.0);
        prop_assert!(gamma_s(r + dr).unwrap() > a);
    }

    #[test]
    fn cutoffs_stay_in_unit_interval(
        h in 1e-6f64..0.4,
        x in -6.0f64..6.0,
        y in -6.0f64..6.0,
        z in 0.0f64..8.0,
    ) {
        let g = GapGeometry::with_defaults(h).unwrap();
        let c = g.cutoffs([x, y, z]);
        prop_assert!((0.0..=1.0).contains(&c.chi.v));
        prop_assert!((0.0..=1.0).contains(&c.phi_bump.v));
    }

    #[test]
    fn smoothstep_is_monotone_in_unit_interval(s in -0.5f64..1.5, ds in 0.0f64..0.5) {
        let a = smoothstep(s)[0];
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert!(smoothstep(s + ds)[0] >= a);
    }

    #[test]
    fn aperture_field_is_divergence_free(reg in regime(), h in 1e-7f64..0.4, r in 0.0f64..0.2, t in 0.0f64..=1.0) {
        let z = t * (h + gamma_s(r).unwrap());
        let s = aperture_velocity(&reg, h, 0.2, r, z).unwrap();
        let g = s.gradient.unwrap();
        prop_assert!(s.divergence().unwrap().abs() <= 1e-12 * (1.0 + frobenius_sq(&g).sqrt()));
    }

    #[test]
    fn quadrature_is_exact_on_cubics(c in prop::array::uniform4(-10.0f64..10.0), b in 0.1f64..3.0) {
        let f = |x: f64| c[0] + x * (c[1] + x * (c[2] + x * c[3]));
        let exact = b * (c[0] + b * (c[1] / 2.0 + b * (c[2] / 3.0 + b * c[3] / 4.0)));
        let e = integrate(f, 0.0, b, &QuadratureSpec::default()).unwrap();
        prop_assert!((e.value - exact).abs() <= 1e-12 * (1.0 + exact.abs()));
    }

    #[test]
    fn table_interpolation_stays_between_nodes(
        steps in prop::collection::vec(0.1f64..2.0, 3..7),
        frac in 0.0f64..1.0,
        log in any::<bool>(),
    ) {
        let n = steps.len();
        let h: Vec<f64> = (0..n).map(|i| 10f64.powi(-(i as i32) - 1)).collect();
        let mut d = vec![1.0];
        for s in &steps[1..] {
            let last = *d.last().unwrap();
            d.push(last + s);
        }
        let model = if log { ScalingModel::Log } else { ScalingModel::Inverse };
        let t = DragTable::new(h.clone(), d.clone(), model).unwrap();
        for (i, (&hi, &di)) in h.iter().zip(&d).enumerate() {
            prop_assert!((t.value(hi) - di).abs() <= 1e-12 * di);
            if i + 1 < n {
                let hm = hi * (h[i + 1] / hi).powf(frac);
                let v = t.value(hm);
                prop_assert!(v >= di * (1.0 - 1e-12) && v <= d[i + 1] * (1.0 + 1e-12));
            }
        }
        prop_assert!(t.value(h[n - 1] * 0.1) >= d[n - 1]);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn mechanical_energy_never_increases(kappa in 0.1f64..3.0, g in 0.2f64..3.0, h0 in 0.05f64..0.4) {
        let p = FallParameters::effective(g, kappa);
        let tr = simulate(&p, &DragLaw::Log, h0, 0.0, &OdeSpec::default()).unwrap();
        let w: Vec<f64> = tr.rows.iter().map(|r| 0.5 * r.h_prime * r.h_prime + g * r.h).collect();
        for pair in w.windows(2) {
            prop_assert!(pair[1] <= pair[0] + 1e-9 * (1.0 + pair[0].abs()));
        }
    }

    #[test]
    fn touchdown_comes_sooner_under_stronger_gravity(kappa in 0.1f64..3.0, g in 0.2f64..3.0, h0 in 0.05f64..0.4) {
        let t = |g: f64| {
            simulate(&FallParameters::effective(g, kappa), &DragLaw::Log, h0, 0.0, &OdeSpec::default())
                .unwrap()
                .touchdown_time()
                .unwrap()
        };
        prop_assert!(t(1.5 * g) < t(g));
    }
}
