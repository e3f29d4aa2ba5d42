use slipcontact::drag::{fit_points, DragCurve, DragModel, ScalingModel};
use slipcontact::profile::SlipRegime;

const SWEEP: [f64; 4] = [1e-3, 1e-4, 1e-5, 1e-6];

fn curve(regime: SlipRegime) -> DragCurve {
    DragModel::with_defaults(regime).unwrap().scan(&SWEEP).unwrap()
}

fn slip() -> DragCurve {
    curve(SlipRegime::slip(1.0, 1.0).unwrap())
}

fn mixed() -> DragCurve {
    curve(SlipRegime::mixed(1.0).unwrap())
}

#[test]
fn energy_is_positive_and_blows_up_monotonically() {
    for c in [slip(), mixed()] {
        assert!(c.rows.iter().all(|r| r.energy > 0.0));
        for w in c.rows.windows(2) {
            assert!(w[1].h < w[0].h);
            assert!(w[1].energy > w[0].energy, "{:?}", c.regime);
            assert!(w[1].surface_drag > w[0].surface_drag, "{:?}", c.regime);
        }
    }
}

#[test]
fn energy_parts_add_up() {
    for c in [slip(), mixed()] {
        for r in &c.rows {
            let sum = r.gradient + r.sphere + r.wall;
            assert!((sum - r.energy).abs() <= 1e-12 * r.energy);
        }
    }
    assert!(mixed().rows.iter().all(|r| r.sphere == 0.0));
}

#[test]
fn slip_energy_grows_like_log() {
    let c = slip();
    let e = c.column(slipcontact::drag::DragColumn::Energy);
    let ratios: Vec<f64> = SWEEP.iter().zip(&e).map(|(h, v)| v / h.ln().abs()).collect();
    let spread = ratios.iter().cloned().fold(0.0, f64::max) / ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(spread <= 1.5, "{ratios:?}");
    let log = fit_points(&SWEEP, &e, ScalingModel::Log).unwrap();
    let inv = fit_points(&SWEEP, &e, ScalingModel::Inverse).unwrap();
    assert!(log.a > 0.0 && log.r_squared >= 0.99);
    assert!(inv.r_squared < log.r_squared);
}

#[test]
fn mixed_energy_grows_like_inverse() {
    let c = mixed();
    let e = c.column(slipcontact::drag::DragColumn::Energy);
    let scaled: Vec<f64> = SWEEP.iter().zip(&e).map(|(h, v)| v * h).collect();
    let spread = scaled.iter().cloned().fold(0.0, f64::max) / scaled.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(spread <= 1.5, "{scaled:?}");
    let n: Vec<f64> = c.column(slipcontact::drag::DragColumn::SurfaceDrag);
    assert!(SWEEP.iter().zip(&n).all(|(h, v)| v * h > 1.0), "{n:?}");
}

#[test]
fn regimes_separate() {
    let (s, m) = (slip(), mixed());
    let ratio = |i: usize| m.rows[i].energy / s.rows[i].energy;
    assert!(ratio(3) >= 10.0 * ratio(0), "{} {}", ratio(0), ratio(3));
}

#[test]
fn one_strain_component_already_grows_like_log() {
    let m = DragModel::with_defaults(SlipRegime::slip(1.0, 1.0).unwrap()).unwrap();
    let w: Vec<f64> = SWEEP.iter().map(|&h| m.strain_component_witness(h).unwrap()).collect();
    let log = fit_points(&SWEEP, &w, ScalingModel::Log).unwrap();
    let inv = fit_points(&SWEEP, &w, ScalingModel::Inverse).unwrap();
    assert!(log.a > 0.0 && log.r_squared >= 0.99, "{log:?}");
    assert!(inv.r_squared < log.r_squared);
    let total = slip().rows.iter().map(|r| r.gradient).collect::<Vec<_>>();
    assert!(w.iter().zip(&total).all(|(a, b)| a <= b));
}
