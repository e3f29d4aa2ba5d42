//! Adaptive quadrature on graded meshes, plus the empirical classifier for
//! the model integrals `int_0^delta r^p / (h + r^2)^q dr`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{gamma_unchecked, surface_measure, Surface};
use crate::regression::{linear_fit, LinearFit};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Maximum number of bisections of the starting interval.
    pub max_depth: u32,
    /// Gauss-Legendre points per vertical column in gap integrals.
    pub order: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            rel_tol: 1e-9,
            abs_tol: 1e-13,
            max_depth: 48,
            order: 8,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(Error::InvalidConfig(format!("rel_tol = {} not in (0, 1)", self.rel_tol)));
        }
        if !(self.abs_tol >= 0.0 && self.abs_tol.is_finite()) {
            return Err(Error::InvalidConfig(format!("abs_tol = {} must be >= 0", self.abs_tol)));
        }
        if self.max_depth == 0 || self.max_depth > 200 {
            return Err(Error::InvalidConfig(format!("max_depth = {} not in 1..=200", self.max_depth)));
        }
        if self.order == 0 || self.order > 64 {
            return Err(Error::InvalidConfig(format!("order = {} not in 1..=64", self.order)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];

const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// One Gauss-Kronrod 7/15 panel: `(kronrod, error)`.
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let hl = 0.5 * (b - a);
    let fc = f(c);
    let mut rk = fc * WGK[7];
    let mut rg = fc * WG[3];
    let mut resabs = rk.abs();
    let mut fv = [(0.0, 0.0); 7];
    for j in 0..7 {
        let dx = hl * XGK[j];
        let (f1, f2) = (f(c - dx), f(c + dx));
        fv[j] = (f1, f2);
        rk += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            rg += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * rk;
    let mut resasc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((fv[j].0 - mean).abs() + (fv[j].1 - mean).abs());
    }
    let (rk, resabs, resasc) = (rk * hl, resabs * hl.abs(), resasc * hl.abs());
    let mut err = (rk - rg * hl).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    (rk, err)
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    depth: u32,
}

impl PartialEq for Panel {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Panel {
    fn cmp(&self, o: &Self) -> Ordering {
        self.error
            .total_cmp(&o.error)
            .then_with(|| o.a.total_cmp(&self.a))
    }
}

/// Sum with pairwise reduction, deterministic for a given order.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 8 {
        return v.iter().sum();
    }
    let (l, r) = v.split_at(v.len() / 2);
    pairwise_sum(l) + pairwise_sum(r)
}

/// Adaptive Gauss-Kronrod integration over `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<Estimate> {
    integrate_graded(f, a, b, (b - a).abs(), spec)
}

/// Adaptive integration whose starting mesh is geometric toward `a`,
/// halving down to width `scale`.
pub fn integrate_graded<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    scale: f64,
    spec: &QuadratureSpec,
) -> Result<Estimate> {
    spec.validate()?;
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidConfig("integration limits must be finite".into()));
    }
    if a == b {
        return Ok(Estimate {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
        });
    }
    let width = b - a;
    let mut breaks = vec![b];
    if scale > 0.0 && scale.is_finite() {
        let mut w = width;
        while (w / 2.0).abs() >= scale.abs() && breaks.len() < 200 {
            w /= 2.0;
            breaks.push(a + w);
        }
    }
    breaks.push(a);
    breaks.reverse();

    let mut heap = BinaryHeap::new();
    let mut evaluations = 0;
    for w in breaks.windows(2) {
        let (value, error) = gk15(&f, w[0], w[1]);
        evaluations += 15;
        heap.push(Panel {
            a: w[0],
            b: w[1],
            value,
            error,
            depth: 0,
        });
    }
    let max_panels = 20_000;
    let mut total: f64 = heap.iter().map(|p| p.value).sum();
    let mut total_err: f64 = heap.iter().map(|p| p.error).sum();
    loop {
        let tol = spec.abs_tol.max(spec.rel_tol * total.abs());
        if !total.is_finite() || !total_err.is_finite() {
            return Err(Error::Quadrature {
                estimate: total,
                error: total_err,
                tolerance: tol,
            });
        }
        if total_err <= tol {
            // Running sums drift; confirm on a fresh sum before stopping.
            total = heap.iter().map(|p| p.value).sum();
            total_err = heap.iter().map(|p| p.error).sum();
            if total_err <= spec.abs_tol.max(spec.rel_tol * total.abs()) {
                break;
            }
        }
        let worst = *heap.peek().expect("at least one panel");
        if worst.depth >= spec.max_depth || heap.len() >= max_panels {
            return Err(Error::Quadrature {
                estimate: total,
                error: total_err,
                tolerance: tol,
            });
        }
        heap.pop();
        total -= worst.value;
        total_err -= worst.error;
        let m = 0.5 * (worst.a + worst.b);
        for (l, r) in [(worst.a, m), (m, worst.b)] {
            let (value, error) = gk15(&f, l, r);
            total += value;
            total_err += error;
            heap.push(Panel {
                a: l,
                b: r,
                value,
                error,
                depth: worst.depth + 1,
            });
        }
        evaluations += 30;
    }
    let mut panels = heap.into_vec();
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    let values: Vec<f64> = panels.iter().map(|p| p.value).collect();
    let errors: Vec<f64> = panels.iter().map(|p| p.error).collect();
    Ok(Estimate {
        value: pairwise_sum(&values),
        error: pairwise_sum(&errors),
        evaluations,
    })
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p1 = z;
                p0 = 1.0;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Composite Gauss-Legendre rule: `panels` equal panels of `n` points on `[a, b]`.
pub fn composite_rule(a: f64, b: f64, panels: usize, n: usize) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(n);
    let step = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(panels * n);
    for p in 0..panels {
        let lo = a + step * p as f64;
        for (xi, wi) in x.iter().zip(&w) {
            out.push((lo + 0.5 * step * (xi + 1.0), 0.5 * step * wi));
        }
    }
    out
}

/// Integral of `f(r, z)` over `{r < r_max, 0 < z < h + gamma_s(r)}` with
/// axisymmetric volume element `2 pi r dr dz`.
///
/// Columns use a fixed Gauss-Legendre rule, exact for the polynomial-in-`z`
/// integrands produced by the cubic profile; radii are adaptive and graded
/// toward the axis down to the contact length `sqrt(h)`.
pub fn integrate_gap<F: Fn(f64, f64) -> f64>(
    f: F,
    h: f64,
    r_max: f64,
    spec: &QuadratureSpec,
) -> Result<Estimate> {
    spec.validate()?;
    if !(h > 0.0) {
        return Err(Error::Domain {
            name: "h",
            value: h,
            domain: "(0, inf)",
        });
    }
    if !(r_max > 0.0 && r_max < 1.0) {
        return Err(Error::Domain {
            name: "r_max",
            value: r_max,
            domain: "(0, 1)",
        });
    }
    let (x, w) = gauss_legendre(spec.order);
    let column = |r: f64| {
        let gap = h + gamma_unchecked(r);
        let mut s = 0.0;
        for (xi, wi) in x.iter().zip(&w) {
            s += wi * f(r, 0.5 * gap * (xi + 1.0));
        }
        2.0 * PI * r * 0.5 * gap * s
    };
    let mut est = integrate_graded(column, 0.0, r_max, h.sqrt(), spec)?;
    est.evaluations *= spec.order;
    Ok(est)
}

/// Integral of an axisymmetric `f(r)` over a surface patch `r < r_max`.
pub fn integrate_surface<F: Fn(f64) -> f64>(
    f: F,
    surface: Surface,
    r_max: f64,
    spec: &QuadratureSpec,
) -> Result<Estimate> {
    integrate_surface_graded(f, surface, r_max, r_max, spec)
}

/// As [`integrate_surface`], with the starting mesh graded toward the axis down to `scale`.
pub fn integrate_surface_graded<F: Fn(f64) -> f64>(
    f: F,
    surface: Surface,
    r_max: f64,
    scale: f64,
    spec: &QuadratureSpec,
) -> Result<Estimate> {
    surface_measure(surface, r_max)?;
    integrate_graded(
        |r| 2.0 * PI * f(r) * surface_measure(surface, r).unwrap_or(f64::NAN),
        0.0,
        r_max,
        scale,
        spec,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SingularClass {
    PowerLaw { exponent: f64 },
    Log,
    Bounded,
}

impl SingularClass {
    /// Behaviour predicted by the exponent `(p + 1) / 2 - q`.
    pub fn predicted(p: f64, q: f64) -> Self {
        let e = 0.5 * (p + 1.0) - q;
        if e.abs() < 1e-12 {
            SingularClass::Log
        } else if e < 0.0 {
            SingularClass::PowerLaw { exponent: e }
        } else {
            SingularClass::Bounded
        }
    }

    /// Same kind, and exponents within `tol` for power laws.
    pub fn matches(&self, other: &SingularClass, tol: f64) -> bool {
        match (self, other) {
            (SingularClass::PowerLaw { exponent: a }, SingularClass::PowerLaw { exponent: b }) => {
                (a - b).abs() <= tol
            }
            (SingularClass::Log, SingularClass::Log) => true,
            (SingularClass::Bounded, SingularClass::Bounded) => true,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularIntegralCase {
    pub p: f64,
    pub q: f64,
    pub delta: f64,
    pub samples: Vec<(f64, f64)>,
    /// Slope of `ln(I(h_{i+1}) - I(h_i))` against `ln h`.
    pub increment_exponent: f64,
    pub power_fit: LinearFit,
    pub log_fit: LinearFit,
    pub bounded_fit: LinearFit,
    pub class: SingularClass,
    pub predicted: SingularClass,
    /// Worst relative deviation from `0.5 ln((h + delta^2) / h)`, for `(p, q) = (1, 1)`.
    pub oracle_rel_error: Option<f64>,
}

impl SingularIntegralCase {
    pub fn agrees_with_prediction(&self) -> bool {
        self.class.matches(&self.predicted, 0.1)
    }
}

/// Band for the increment exponent within which growth is read as logarithmic.
const LOG_BAND: f64 = 0.25;

/// `int_0^delta r^p / (h + r^2)^q dr` by graded adaptive quadrature.
pub fn model_integral(p: f64, q: f64, delta: f64, h: f64, spec: &QuadratureSpec) -> Result<Estimate> {
    integrate_graded(
        |r| if r == 0.0 && p > 0.0 { 0.0 } else { r.powf(p) / (h + r * r).powf(q) },
        0.0,
        delta,
        h.sqrt(),
        spec,
    )
}

/// Measures `I(h)` on `h_list` and classifies its growth as `h -> 0`.
pub fn classify_singular(p: f64, q: f64, delta: f64, h_list: &[f64]) -> Result<SingularIntegralCase> {
    if !(p >= 0.0 && p.is_finite()) || !(q > 0.0 && q.is_finite()) {
        return Err(Error::InvalidConfig(format!("need p >= 0 and q > 0, got p = {p}, q = {q}")));
    }
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::Domain {
            name: "delta",
            value: delta,
            domain: "(0, inf)",
        });
    }
    let mut hs: Vec<f64> = h_list.to_vec();
    if hs.iter().any(|&h| !(h > 0.0 && h.is_finite())) {
        return Err(Error::InvalidConfig("every h must be positive".into()));
    }
    hs.sort_by(|a, b| b.total_cmp(a));
    hs.dedup();
    if hs.len() < 3 {
        return Err(Error::InvalidConfig("need at least three distinct h values".into()));
    }
    let spec = QuadratureSpec {
        rel_tol: 1e-11,
        abs_tol: 0.0,
        ..QuadratureSpec::default()
    };
    let values = hs
        .iter()
        .map(|&h| model_integral(p, q, delta, h, &spec).map(|e| e.value))
        .collect::<Result<Vec<_>>>()?;

    let oracle_rel_error = if p == 1.0 && q == 1.0 {
        let mut worst = 0.0f64;
        for (&h, &v) in hs.iter().zip(&values) {
            let exact = 0.5 * ((h + delta * delta) / h).ln();
            let rel = (v - exact).abs() / exact;
            if rel > 1e-8 {
                return Err(Error::Quadrature {
                    estimate: v,
                    error: (v - exact).abs(),
                    tolerance: 1e-8 * exact,
                });
            }
            worst = worst.max(rel);
        }
        Some(worst)
    } else {
        None
    };

    let lh: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
    let mut xm = Vec::new();
    let mut dl = Vec::new();
    for i in 0..hs.len() - 1 {
        let d = values[i + 1] - values[i];
        if d > 0.0 {
            xm.push(0.5 * (lh[i] + lh[i + 1]));
            dl.push(d.ln());
        }
    }
    let increment_exponent = if dl.len() >= 2 {
        linear_fit(&xm, &dl)?.slope
    } else {
        f64::INFINITY
    };

    let ln_i: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let power_fit = linear_fit(&lh, &ln_i)?;
    let log_fit = linear_fit(&lh, &values)?;
    let kappa = increment_exponent.clamp(0.1, 2.0);
    let hk: Vec<f64> = hs.iter().map(|h| h.powf(kappa)).collect();
    let bounded_fit = linear_fit(&hk, &values)?;

    let best = power_fit.r_squared.max(log_fit.r_squared).max(bounded_fit.r_squared);
    if best < 0.99 {
        return Err(Error::AmbiguousClassification { best_r_squared: best });
    }
    let class = if increment_exponent < -LOG_BAND {
        SingularClass::PowerLaw {
            exponent: increment_exponent,
        }
    } else if increment_exponent <= LOG_BAND {
        SingularClass::Log
    } else {
        SingularClass::Bounded
    };
    Ok(SingularIntegralCase {
        p,
        q,
        delta,
        samples: hs.into_iter().zip(values).collect(),
        increment_exponent,
        power_fit,
        log_fit,
        bounded_fit,
        class,
        predicted: SingularClass::predicted(p, q),
        oracle_rel_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        for n in 1..=12 {
            let (x, w) = gauss_legendre(n);
            for deg in 0..2 * n {
                let got: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(deg as i32)).sum();
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((got - exact).abs() < 1e-13, "n={n} deg={deg}");
            }
        }
    }

    #[test]
    fn kronrod_weights_are_consistent() {
        let sk: f64 = 2.0 * WGK[..7].iter().sum::<f64>() + WGK[7];
        let sg: f64 = 2.0 * WG[..3].iter().sum::<f64>() + WG[3];
        assert!((sk - 2.0).abs() < 1e-15);
        assert!((sg - 2.0).abs() < 1e-15);
    }

    #[test]
    fn smooth_and_singular_integrands() {
        let e = integrate(|x| x.sin(), 0.0, PI, &spec()).unwrap();
        assert!((e.value - 2.0).abs() < 1e-12);
        let e = integrate_graded(|x| x.sqrt().recip(), 0.0, 1.0, 1e-10, &spec()).unwrap();
        assert!((e.value - 2.0).abs() < 1e-7);
        let h: f64 = 1e-6;
        let e = integrate_graded(|r| r / (h + r * r), 0.0, 0.2, f64::sqrt(h), &spec()).unwrap();
        assert!((e.value - 0.5 * ((h + 0.04) / h).ln()).abs() < 1e-9 * e.value);
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let a = integrate(|x| x * x, 0.0, 2.0, &spec()).unwrap().value;
        let b = integrate(|x| x * x, 2.0, 0.0, &spec()).unwrap().value;
        assert!((a + b).abs() < 1e-14);
    }

    #[test]
    fn exhausted_budget_is_reported() {
        let tight = QuadratureSpec {
            max_depth: 3,
            rel_tol: 1e-14,
            abs_tol: 0.0,
            order: 8,
        };
        let r = integrate(|x| (1.0 / x).sin(), 1e-9, 1.0, &tight);
        assert!(matches!(r, Err(Error::Quadrature { .. })));
    }

    #[test]
    fn gap_volume_matches_closed_form() {
        // Volume of {r < R, 0 < z < h + 1 - sqrt(1 - r^2)}.
        let (h, rm) = (1e-4, 0.2f64);
        let e = integrate_gap(|_, _| 1.0, h, rm, &spec()).unwrap();
        let s = (1.0 - rm * rm).sqrt();
        let exact = PI * rm * rm * (h + 1.0) - 2.0 * PI / 3.0 * (1.0 - s * s * s);
        assert!((e.value - exact).abs() < 1e-12);
    }

    #[test]
    fn cap_area_matches_closed_form() {
        let e = integrate_surface(|_| 1.0, Surface::SphereCap, 0.6, &spec()).unwrap();
        assert!((e.value - 2.0 * PI * 0.2).abs() < 1e-12);
        let e = integrate_surface(|_| 1.0, Surface::Plane, 0.5, &spec()).unwrap();
        assert!((e.value - PI * 0.25).abs() < 1e-13);
    }

    #[test]
    fn model_integral_closed_forms() {
        let h = 1e-3;
        let i11 = model_integral(1.0, 1.0, 0.2, h, &spec()).unwrap().value;
        assert!((i11 - 0.5 * ((h + 0.04) / h).ln()).abs() < 1e-8 * i11);
        let i11 = model_integral(1.0, 1.0, 0.25, 1e-4, &spec()).unwrap().value;
        assert!((i11 - 3.219676).abs() < 1e-6);
        // int dr / (h + r^2) = atan(delta / sqrt h) / sqrt h
        let i01 = model_integral(0.0, 1.0, 0.2, h, &spec()).unwrap().value;
        assert!((i01 - (0.2 / h.sqrt()).atan() / h.sqrt()).abs() < 1e-9 * i01);
    }

    #[test]
    fn classifies_the_three_regimes() {
        let hs = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6];
        let c = classify_singular(1.0, 1.0, 0.25, &hs).unwrap();
        assert!(c.oracle_rel_error.unwrap() < 1e-8);
        assert_eq!(c.class, SingularClass::Log);
        let c = classify_singular(0.0, 1.0, 0.25, &hs).unwrap();
        assert!(c.class.matches(&SingularClass::PowerLaw { exponent: -0.5 }, 0.05), "{:?}", c.class);
        let c = classify_singular(3.0, 1.0, 0.25, &hs).unwrap();
        assert_eq!(c.class, SingularClass::Bounded);
        assert!(classify_singular(1.0, 0.0, 0.25, &hs).is_err());
        assert!(classify_singular(1.0, 1.0, 0.25, &hs[..2]).is_err());
    }
}
