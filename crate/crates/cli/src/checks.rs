//! Check suites shared by the individual subcommands and `verify all`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};
use slipcontact::drag::{DragCurve, DragModel, ScalingModel};
use slipcontact::dynamics::{dopri_fixed, simulate, DragLaw, FallEvent};
use slipcontact::envelope::{envelope_sweep, sweep_spreads};
use slipcontact::field::{
    aperture_velocity, frobenius_sq, global_velocity, navier_residuals, radial_flux, stokes_residual,
};
use slipcontact::geometry::{gamma_s, GapGeometry};
use slipcontact::profile::{coefficients, ProfileCoefficients, RegimeKind, SlipRegime};
use slipcontact::quadrature::classify_singular;
use slipcontact::Result;

use crate::config::RunConfig;
use crate::report::{Check, Comparison};

fn max_abs(it: impl IntoIterator<Item = f64>) -> f64 {
    it.into_iter().fold(0.0, |m, v| if v.is_nan() { f64::NAN } else { m.max(v.abs()) })
}

/// Boundary identities of the cubic profile on random draws, and its two limits.
pub fn profile_suite(cfg: &RunConfig) -> Result<(Vec<Check>, Value)> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let log_h_max = cfg.h_max.log10();
    let draws: Vec<(SlipRegime, f64, f64)> = (0..cfg.samples)
        .map(|_| {
            let slip = rng.gen_bool(0.5);
            let b = [10f64.powf(rng.gen_range(-3.0..3.0)), 10f64.powf(rng.gen_range(-3.0..3.0))];
            let regime = if slip {
                SlipRegime::Slip {
                    beta_s: b[0],
                    beta_omega: b[1],
                }
            } else {
                SlipRegime::Mixed { beta_omega: b[1] }
            };
            let h = 10f64.powf(rng.gen_range(-8.0..log_h_max));
            let r = rng.gen_range(0.0..cfg.delta);
            (regime, h, r)
        })
        .collect();
    let residuals = draws
        .par_iter()
        .map(|(reg, h, r)| coefficients(reg, *h, *r).map(|c| c.constraint_residuals()))
        .collect::<Result<Vec<_>>>()?;
    let worst: Vec<f64> = (0..4).map(|k| max_abs(residuals.iter().map(|r| r[k]))).collect();

    let ts: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
    let linear = ProfileCoefficients::slip_from_groups(0.0, 0.0)?;
    let cubic = ProfileCoefficients::mixed_from_group(f64::INFINITY)?;
    let near = ProfileCoefficients::mixed_from_group(1e15)?;
    let lin_err = max_abs(ts.iter().map(|&t| linear.phi(t) - t));
    let cub_err = max_abs(ts.iter().map(|&t| cubic.phi(t) - t * t * (3.0 - 2.0 * t)));
    let near_err = max_abs(ts.iter().map(|&t| near.phi(t) - t * t * (3.0 - 2.0 * t)));

    let checks = vec![
        Check::at_most("profile_vanishes_on_wall", "Phi(r,0)=0", worst[0], 1e-12),
        Check::at_most("profile_reaches_one_on_sphere", "Phi(r,1)=1", worst[1], 1e-12),
        Check::at_most("profile_wall_navier", "wall Navier condition on Phi", worst[2], 1e-12),
        Check::at_most("profile_sphere_condition", "sphere Navier / no-slip condition on Phi", worst[3], 1e-12),
        Check::at_most("profile_slip_limit", "alpha_S = alpha_P = 0 gives Phi(t) = t", lin_err, 1e-12),
        Check::at_most("profile_no_slip_limit", "alpha_P -> inf gives Phi(t) = 3t^2 - 2t^3", cub_err, 1e-12),
        Check::at_most(
            "profile_no_slip_limit_approach",
            "alpha_P -> inf gives Phi(t) = 3t^2 - 2t^3",
            near_err,
            1e-12,
        ),
    ];
    Ok((checks, json!({ "draws": cfg.samples, "seed": cfg.seed })))
}

/// Uniform draws in the aperture, away from its edges by `margin` (relative).
fn aperture_points(cfg: &RunConfig, h: f64, n: usize, margin: f64, salt: u64) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ salt);
    (0..n)
        .map(|_| {
            let r = cfg.delta * rng.gen_range(margin..1.0 - margin);
            let gap = h + gamma_s(r).unwrap_or(f64::NAN);
            (r, gap * rng.gen_range(margin..1.0 - margin))
        })
        .collect()
}

/// `(1/r) d(r u_r)/dr + d u_z/dz` by central differences, with its term scale.
fn fd_divergence(regime: &SlipRegime, h: f64, delta: f64, r: f64, z: f64) -> Result<(f64, f64)> {
    let gap = h + gamma_s(r)?;
    let er = 1e-6 * r.min(gap.sqrt());
    let ez = 1e-6 * gap;
    let ur = |s: f64| aperture_velocity(regime, h, delta, s, z).map(|f| s * f.velocity[0]);
    let uz = |t: f64| aperture_velocity(regime, h, delta, r, t).map(|f| f.velocity[2]);
    let radial = (ur(r + er)? - ur(r - er)?) / (2.0 * er * r);
    let axial = (uz(z + ez)? - uz(z - ez)?) / (2.0 * ez);
    Ok((radial + axial, radial.abs().max(axial.abs())))
}

/// Exactness of the aperture field and of its global extension at gap `cfg.h`.
pub fn field_suite(cfg: &RunConfig) -> Result<(Vec<Check>, Value)> {
    let regime = cfg.slip_regime()?;
    let (h, delta) = (cfg.h, cfg.delta);
    let spec = cfg.quadrature();

    let analytic = aperture_points(cfg, h, cfg.samples, 0.0, 0x11)
        .par_iter()
        .map(|&(r, z)| {
            let s = aperture_velocity(&regime, h, delta, r, z)?;
            let g = s.gradient.unwrap_or([[f64::NAN; 3]; 3]);
            Ok(s.divergence().unwrap_or(f64::NAN).abs() / (1.0 + frobenius_sq(&g).sqrt()))
        })
        .collect::<Result<Vec<f64>>>()?;
    let fd = aperture_points(cfg, h, cfg.samples, 0.01, 0x22)
        .par_iter()
        .map(|&(r, z)| fd_divergence(&regime, h, delta, r, z).map(|(d, s)| d.abs() / (1.0 + s)))
        .collect::<Result<Vec<f64>>>()?;

    let radii: Vec<f64> = (0..64).map(|k| delta * (k as f64 + 0.5) / 64.0).collect();
    let flux = radii
        .par_iter()
        .map(|&r| radial_flux(&regime, h, delta, r, &spec).map(|q| q + 0.5 * r))
        .collect::<Result<Vec<f64>>>()?;
    let navier = radii
        .par_iter()
        .map(|&r| navier_residuals(&regime, h, delta, r))
        .collect::<Result<Vec<_>>>()?;
    let stokes = aperture_points(cfg, h, 256, 0.0, 0x33)
        .iter()
        .map(|&(r, z)| stokes_residual(&regime, h, delta, r, z).map(|f| f[0].hypot(f[1])))
        .collect::<Result<Vec<f64>>>()?;

    let geometry = GapGeometry::new(h, delta, cfg.d_delta, cfg.h_max)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x44);
    let mut bulk = Vec::new();
    while bulk.len() < (cfg.samples / 10).max(16) {
        let x = [rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5), rng.gen_range(0.0..2.5)];
        if geometry.sphere_distance(x) > 0.0 {
            bulk.push(x);
        }
    }
    let global_div = bulk
        .par_iter()
        .map(|&x| {
            let s = global_velocity(&regime, &geometry, x)?;
            let g = s.gradient.unwrap_or([[f64::NAN; 3]; 3]);
            Ok(s.divergence().unwrap_or(f64::NAN).abs() / (1.0 + frobenius_sq(&g).sqrt()))
        })
        .collect::<Result<Vec<f64>>>()?;
    let surface: Vec<([f64; 3], [f64; 3])> = (0..256)
        .map(|_| {
            let a: f64 = rng.gen_range(0.0..std::f64::consts::PI);
            let th: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let n = [a.sin() * th.cos(), a.sin() * th.sin(), -a.cos()];
            (n, [n[0], n[1], geometry.center_height() + n[2]])
        })
        .collect();
    let sphere_jump = surface
        .par_iter()
        .map(|&(n, x)| {
            let u = global_velocity(&regime, &geometry, x)?.velocity;
            Ok(u[0] * n[0] + u[1] * n[1] + (u[2] - 1.0) * n[2])
        })
        .collect::<Result<Vec<f64>>>()?;
    let wall = (0..256)
        .map(|_| {
            let x = [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0), 0.0];
            global_velocity(&regime, &geometry, x).map(|s| s.velocity[2])
        })
        .collect::<Result<Vec<f64>>>()?;

    let mut checks = vec![
        Check::at_most("aperture_divergence_analytic", "div u = 0 in the aperture", max_abs(analytic), 1e-12),
        Check::at_most("aperture_divergence_fd", "div u = 0 in the aperture", max_abs(fd), 1e-6),
        Check::at_most("aperture_flux", "int_0^H u_r dz = -r/2", max_abs(flux.iter().copied()), 1e-9),
        Check::at_most(
            "wall_normal_velocity",
            "u . nu = 0 on the wall",
            max_abs(navier.iter().map(|n| n.wall_normal)),
            1e-8,
        ),
        Check::at_most(
            "wall_navier",
            "wall Navier condition",
            max_abs(navier.iter().map(|n| n.wall_tangential)),
            1e-8,
        ),
        Check::at_most(
            "sphere_normal_velocity",
            "n . phi = sqrt(1 - r^2) on the sphere",
            max_abs(navier.iter().map(|n| n.sphere_normal)),
            1e-8,
        ),
        Check::at_most("global_divergence", "div phi = 0 in the fluid", max_abs(global_div), 1e-12),
        Check::at_most(
            "global_sphere_normal_velocity",
            "(phi - e3) . n = 0 on the sphere",
            max_abs(sphere_jump),
            1e-8,
        ),
        Check::at_most("global_wall_normal_velocity", "phi . e3 = 0 on the wall", max_abs(wall), 1e-12),
    ];
    if regime.kind() == RegimeKind::Mixed {
        checks.push(Check::at_most(
            "sphere_no_slip",
            "no-slip condition on the sphere",
            max_abs(navier.iter().map(|n| n.sphere_tangential)),
            1e-8,
        ));
    }
    let data = json!({
        "h": h,
        "points": cfg.samples,
        "sphere_tangential_max": max_abs(navier.iter().map(|n| n.sphere_tangential)),
        "stokes_residual_max": max_abs(stokes),
    });
    Ok((checks, data))
}

/// Model integrals `int_0^delta r^p / (h + r^2)^q dr` on the full `(p, q)` grid.
pub fn integral_suite(cfg: &RunConfig) -> Result<(Vec<Check>, Value)> {
    let mut checks = Vec::new();
    let mut cases = Vec::new();
    for p in [0.0, 1.0, 2.0, 3.0] {
        for q in [1.0, 2.0] {
            let c = classify_singular(p, q, cfg.integral_delta, &cfg.h_list)?;
            checks.push(Check::holds(
                &format!("integral_class_p{p}_q{q}"),
                "power / log / bounded trichotomy of the model integral",
                c.agrees_with_prediction(),
            ));
            if let Some(e) = c.oracle_rel_error {
                checks.push(Check::at_most(
                    "integral_closed_form",
                    "p = q = 1 equals 0.5 ln((h + delta^2) / h)",
                    e,
                    1e-8,
                ));
            }
            cases.push(json!({ "p": p, "q": q, "class": c.class, "predicted": c.predicted,
                "increment_exponent": c.increment_exponent }));
        }
    }
    Ok((checks, json!({ "cases": cases })))
}

/// Free fall, integrator order and the contact dichotomy for the configured regime.
pub fn dynamics_suite(cfg: &RunConfig) -> Result<(Vec<Check>, Value)> {
    let ode = cfg.ode();
    let params = cfg.fall();
    let g = params.effective_gravity();
    let free = simulate(&params, &DragLaw::Constant { value: 0.0 }, cfg.h0, 0.0, &ode)?;
    let exact = (2.0 * cfg.h0 / g).sqrt();
    let free_err = free.touchdown_time().map_or(f64::NAN, |t| (t - exact).abs());

    // h'' = -h' - 1 from rest at h = 1: h = 2 - t - exp(-t)
    let exact_h = 2.0 - 1.0 - (-1.0f64).exp();
    let err = |n| (dopri_fixed(|y| [y[1], -y[1] - 1.0], [1.0, 0.0], 1.0, n)[0] - exact_h).abs();
    let order = (err(10) / err(20)).log2();

    let mut checks = vec![
        Check::at_most("free_fall_touchdown", "t* = sqrt(2 h0 / G) without drag", free_err, 1e-8),
        Check::at_least("integrator_order", "fifth-order embedded Runge-Kutta", order, 4.0),
    ];
    let regime = cfg.slip_regime()?;
    let law = slipcontact::dynamics::drag_law(&regime, slipcontact::dynamics::DragSource::Analytic)?;
    let tr = simulate(&params, &law, cfg.h0, cfg.v0, &ode)?;
    let mut data = json!({ "free_fall_t": free.touchdown_time(), "free_fall_exact": exact,
        "order": order, "event": tr.event });
    match regime.kind() {
        RegimeKind::Slip => {
            let half = slipcontact::dynamics::OdeSpec {
                rel_tol: 0.5 * ode.rel_tol,
                abs_tol: 0.5 * ode.abs_tol,
                ..ode
            };
            let t2 = simulate(&params, &law, cfg.h0, cfg.v0, &half)?;
            let (a, b) = (tr.touchdown_time(), t2.touchdown_time());
            let speed = match tr.event {
                FallEvent::Touchdown { speed, .. } => speed,
                _ => f64::NAN,
            };
            checks.push(Check::holds("slip_touchdown", "finite-time contact with slip", a.is_some()));
            checks.push(Check::at_most(
                "slip_touchdown_stability",
                "finite-time contact with slip",
                match (a, b) {
                    (Some(a), Some(b)) => (a - b).abs(),
                    _ => f64::NAN,
                },
                1e-6,
            ));
            checks.push(Check::new(
                "slip_impact_speed",
                "finite-time contact with slip",
                speed,
                Comparison::Above,
                1e-3 * (2.0 * g * cfg.h0).sqrt(),
            ));
        }
        _ => {
            let no_contact = matches!(tr.event, FallEvent::NoContact { .. });
            checks.push(Check::holds("no_contact", "no contact when the sphere is no-slip", no_contact));
            let fit = tr.log_gap_fit(200)?;
            checks.push(Check::new(
                "log_gap_slope",
                "|ln h(T)| <= C0 (1 + T)",
                fit.slope,
                Comparison::Above,
                0.0,
            ));
            checks.push(Check::at_least("log_gap_linearity", "|ln h(T)| <= C0 (1 + T)", fit.r_squared, 0.99));
            data["log_gap_fit"] = json!(fit);
        }
    }
    Ok((checks, data))
}

/// Spreads of the uniform envelopes across `cfg.h_list`.
pub fn envelope_suite(cfg: &RunConfig, model: &DragModel) -> Result<(Vec<Check>, Value)> {
    let reports = envelope_sweep(model, &cfg.h_list)?;
    let spreads = sweep_spreads(&reports);
    let checks = spreads
        .iter()
        .map(|(k, v)| Check::at_most(&format!("envelope_{k}"), "h-uniform envelope", *v, 10.0))
        .collect();
    Ok((checks, json!({ "spreads": spreads, "sweep": reports })))
}

/// `max / min` of `values[i] * weight(h[i])`.
fn ratio_spread(h: &[f64], values: &[f64], weight: impl Fn(f64) -> f64) -> f64 {
    let w: Vec<f64> = h.iter().zip(values).map(|(&h, &v)| v * weight(h)).collect();
    let hi = w.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
    let lo = w.iter().fold(f64::INFINITY, |m, &v| m.min(v));
    if lo > 0.0 {
        hi / lo
    } else {
        f64::NAN
    }
}

/// Scaling fits of both drag columns on rows with `h <= fit_h_max`.
pub fn fit_suite(cfg: &RunConfig, curve: &DragCurve) -> Result<(Vec<Check>, Value)> {
    use slipcontact::drag::{fit_points, DragColumn};
    let keep: Vec<usize> = (0..curve.rows.len()).filter(|&i| curve.rows[i].h <= cfg.fit_h_max).collect();
    let h: Vec<f64> = keep.iter().map(|&i| curve.rows[i].h).collect();
    let mut checks = Vec::new();
    let mut fits = serde_json::Map::new();
    for (col, label) in [(DragColumn::Energy, "energy"), (DragColumn::SurfaceDrag, "surface_drag")] {
        let all = curve.column(col);
        let v: Vec<f64> = keep.iter().map(|&i| all[i]).collect();
        let log = fit_points(&h, &v, ScalingModel::Log)?;
        let inv = fit_points(&h, &v, ScalingModel::Inverse)?;
        match curve.regime.kind() {
            RegimeKind::Slip => {
                let s = ratio_spread(&h, &v, |h| 1.0 / h.ln().abs());
                checks.push(Check::at_most(&format!("{label}_over_log_spread"), "c|ln h| <= D(h) <= C|ln h|", s, 1.5));
                checks.push(Check::at_least(&format!("{label}_log_r2"), "c|ln h| <= D(h) <= C|ln h|", log.r_squared, 0.99));
                checks.push(Check::new(
                    &format!("{label}_inverse_r2_below_log"),
                    "c|ln h| <= D(h) <= C|ln h|",
                    inv.r_squared,
                    Comparison::Below,
                    log.r_squared,
                ));
                fits.insert(format!("{label}_spread"), json!(s));
            }
            _ => {
                let s = ratio_spread(&h, &v, |h| h);
                checks.push(Check::at_most(&format!("{label}_times_h_spread"), "D(h) ~ 1/h without sphere slip", s, 1.5));
                checks.push(Check::at_least(&format!("{label}_inverse_r2"), "D(h) ~ 1/h without sphere slip", inv.r_squared, 0.99));
                fits.insert(format!("{label}_spread"), json!(s));
            }
        }
        fits.insert(format!("{label}_log"), json!(log));
        fits.insert(format!("{label}_inverse"), json!(inv));
    }
    Ok((checks, json!({ "rows_used": h.len(), "fits": fits })))
}
