//! Reduced fall dynamics `h'' = -kappa D(h) h' - G` with touchdown detection.
//!
//! The explicit phase is Dormand-Prince 5(4) in `(h, h')`. Laws that blow up
//! like `1/h` become stiff near contact; below `log_switch` those are
//! integrated in `(ln h, h'/h)` with a linearly implicit Rosenbrock pair.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::drag::{fit_points, DragColumn, DragCurve, ScalingModel};
use crate::error::{Error, Result};
use crate::profile::{RegimeKind, SlipRegime};
use crate::regression::{linear_fit, LinearFit};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FallParameters {
    pub rho_s: f64,
    pub rho_f: f64,
    pub g: f64,
    pub mu_f: f64,
    pub kappa: f64,
}

impl FallParameters {
    /// Parameters with the given effective gravity (`rho_f = 0`, `rho_s = 1`).
    pub fn effective(g_eff: f64, kappa: f64) -> Self {
        FallParameters {
            rho_s: 1.0,
            rho_f: 0.0,
            g: g_eff,
            mu_f: 1.0,
            kappa,
        }
    }

    /// `(rho_s - rho_f) g / rho_s`
    pub fn effective_gravity(&self) -> f64 {
        (self.rho_s - self.rho_f) * self.g / self.rho_s
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.rho_s > 0.0
            && self.rho_f >= 0.0
            && self.g >= 0.0
            && self.mu_f > 0.0
            && self.kappa >= 0.0
            && [self.rho_s, self.rho_f, self.g, self.mu_f, self.kappa].iter().all(|v| v.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("invalid fall parameters {self:?}")))
        }
    }
}

/// Tabulated drag, interpolated linearly in `(ln h, ln D)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DragTable {
    /// Strictly decreasing.
    h: Vec<f64>,
    d: Vec<f64>,
    asymptote: ScalingModel,
}

impl DragTable {
    pub fn new(h: Vec<f64>, d: Vec<f64>, asymptote: ScalingModel) -> Result<Self> {
        if h.len() != d.len() || h.len() < 2 {
            return Err(Error::InvalidConfig("drag table needs at least two (h, D) pairs".into()));
        }
        for i in 0..h.len() {
            if !(h[i] > 0.0 && d[i] > 0.0 && h[i].is_finite() && d[i].is_finite()) {
                return Err(Error::NonMonotoneTable { h: h[i] });
            }
            if i > 0 && !(h[i] < h[i - 1] && d[i] > d[i - 1]) {
                return Err(Error::NonMonotoneTable { h: h[i] });
            }
        }
        Ok(DragTable { h, d, asymptote })
    }

    pub fn from_curve(curve: &DragCurve, column: DragColumn) -> Result<Self> {
        let asymptote = match curve.regime.kind() {
            RegimeKind::Slip => ScalingModel::Log,
            _ => ScalingModel::Inverse,
        };
        Self::new(curve.h(), curve.column(column), asymptote)
    }

    /// Linear continuation in the asymptotic regressor through the last two nodes.
    fn tail(&self) -> (f64, f64) {
        let n = self.h.len();
        let (x0, x1) = (self.asymptote.regressor(self.h[n - 2]), self.asymptote.regressor(self.h[n - 1]));
        let a = (self.d[n - 1] - self.d[n - 2]) / (x1 - x0);
        (a, self.d[n - 1] - a * x1)
    }

    fn segment(&self, h: f64) -> usize {
        // First node with h[i] <= h, clamped to a valid segment start.
        let i = self.h.partition_point(|&x| x > h);
        i.saturating_sub(1).min(self.h.len() - 2)
    }

    pub fn value(&self, h: f64) -> f64 {
        let n = self.h.len();
        if h <= self.h[n - 1] {
            let (a, b) = self.tail();
            return a * self.asymptote.regressor(h) + b;
        }
        let i = self.segment(h);
        let (x0, x1) = (self.h[i].ln(), self.h[i + 1].ln());
        let (y0, y1) = (self.d[i].ln(), self.d[i + 1].ln());
        (y0 + (y1 - y0) * (h.ln() - x0) / (x1 - x0)).exp()
    }

    pub fn derivative(&self, h: f64) -> f64 {
        let n = self.h.len();
        if h <= self.h[n - 1] {
            let (a, _) = self.tail();
            return match self.asymptote {
                ScalingModel::Log => -a / h,
                ScalingModel::Inverse => -a / (h * h),
            };
        }
        let i = self.segment(h);
        let slope = (self.d[i + 1].ln() - self.d[i].ln()) / (self.h[i + 1].ln() - self.h[i].ln());
        slope * self.value(h) / h
    }

    pub fn nodes(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.h.iter().copied().zip(self.d.iter().copied())
    }
}

/// Shape of the drag as a function of the gap; the prefactor lives in [`FallParameters`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DragLaw {
    Constant { value: f64 },
    /// `|ln h|`
    Log,
    /// `1 / h`; `classical` marks the no-slip surrogate.
    Inverse { classical: bool },
    Table(DragTable),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DragSource<'a> {
    Analytic,
    Table(&'a DragCurve, DragColumn),
}

pub fn drag_law(regime: &SlipRegime, source: DragSource<'_>) -> Result<DragLaw> {
    regime.validate()?;
    match source {
        DragSource::Analytic => Ok(match regime.kind() {
            RegimeKind::Slip => DragLaw::Log,
            RegimeKind::Mixed => DragLaw::Inverse { classical: false },
            RegimeKind::NoSlip => DragLaw::Inverse { classical: true },
        }),
        DragSource::Table(curve, column) => {
            if curve.regime.kind() != regime.kind() {
                return Err(Error::InvalidConfig("drag table belongs to a different regime".into()));
            }
            Ok(DragLaw::Table(DragTable::from_curve(curve, column)?))
        }
    }
}

impl DragLaw {
    /// Unscaled drag at gap `h > 0`.
    pub fn value(&self, h: f64) -> f64 {
        match self {
            DragLaw::Constant { value } => *value,
            DragLaw::Log => h.ln().abs(),
            DragLaw::Inverse { .. } => 1.0 / h,
            DragLaw::Table(t) => t.value(h),
        }
    }

    pub fn derivative(&self, h: f64) -> f64 {
        match self {
            DragLaw::Constant { .. } => 0.0,
            DragLaw::Log => h.ln().signum() / h,
            DragLaw::Inverse { .. } => -1.0 / (h * h),
            DragLaw::Table(t) => t.derivative(h),
        }
    }

    /// Whether the law grows like `1/h` at contact.
    pub fn is_stiff(&self) -> bool {
        match self {
            DragLaw::Inverse { .. } => true,
            DragLaw::Table(t) => t.asymptote == ScalingModel::Inverse,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KappaCalibration {
    pub kappa: f64,
    pub model: ScalingModel,
    pub r_squared: f64,
}

/// Least-squares prefactor of the analytic law against a computed curve.
pub fn calibrate_kappa(curve: &DragCurve, column: DragColumn) -> Result<KappaCalibration> {
    let model = match curve.regime.kind() {
        RegimeKind::Slip => ScalingModel::Log,
        _ => ScalingModel::Inverse,
    };
    let h = curve.h();
    let d = curve.column(column);
    let fit = fit_points(&h, &d, model)?;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (&hi, &di) in h.iter().zip(&d) {
        let x = model.regressor(hi);
        sxy += x * di;
        sxx += x * x;
    }
    Ok(KappaCalibration {
        kappa: sxy / sxx,
        model,
        r_squared: fit.r_squared,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OdeSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub t_max: f64,
    pub h_max: f64,
    /// Gap at which contact is declared in the explicit phase.
    pub touchdown: f64,
    /// Gap below which stiff laws switch to logarithmic variables.
    pub log_switch: f64,
    /// Time tolerance of event location.
    pub event_tol: f64,
    pub max_steps: usize,
}

impl Default for OdeSpec {
    fn default() -> Self {
        OdeSpec {
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            t_max: 50.0,
            h_max: 1.0,
            touchdown: 1e-12,
            log_switch: 1e-6,
            event_tol: 1e-10,
            max_steps: 5_000_000,
        }
    }
}

impl OdeSpec {
    pub fn validate(&self) -> Result<()> {
        let ok = self.rel_tol > 0.0
            && self.abs_tol > 0.0
            && self.t_max > 0.0
            && self.t_max.is_finite()
            && self.h_max > 0.0
            && self.touchdown > 0.0
            && self.log_switch > self.touchdown
            && self.event_tol > 0.0
            && self.max_steps > 0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("invalid ODE settings {self:?}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum FallEvent {
    Touchdown { t: f64, speed: f64 },
    /// `t_max` reached with the gap still open.
    NoContact { t: f64, h: f64 },
    Escaped { t: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub t: f64,
    pub h: f64,
    pub h_prime: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub rows: Vec<TrajectoryRow>,
    pub event: FallEvent,
    pub accepted: usize,
    pub rejected: usize,
    /// Time at which logarithmic variables were first used.
    pub log_phase_start: Option<f64>,
}

impl Trajectory {
    pub fn touchdown_time(&self) -> Option<f64> {
        match self.event {
            FallEvent::Touchdown { t, .. } => Some(t),
            _ => None,
        }
    }

    pub fn min_gap(&self) -> f64 {
        self.rows.iter().map(|r| r.h).fold(f64::INFINITY, f64::min)
    }

    /// `|ln h(t)|` on `n` uniform times over the trajectory, by linear interpolation of `ln h`.
    pub fn log_gap_samples(&self, n: usize) -> Vec<(f64, f64)> {
        let (t0, t1) = (self.rows[0].t, self.rows[self.rows.len() - 1].t);
        let mut j = 0;
        (0..n)
            .map(|i| {
                let t = t0 + (t1 - t0) * i as f64 / (n - 1).max(1) as f64;
                while j + 2 < self.rows.len() && self.rows[j + 1].t < t {
                    j += 1;
                }
                let (a, b) = (&self.rows[j], &self.rows[(j + 1).min(self.rows.len() - 1)]);
                let s = if b.t > a.t { ((t - a.t) / (b.t - a.t)).clamp(0.0, 1.0) } else { 0.0 };
                (t, (a.h.ln() + s * (b.h.ln() - a.h.ln())).abs())
            })
            .collect()
    }

    /// Linear fit of `|ln h|` against `t`.
    pub fn log_gap_fit(&self, n: usize) -> Result<LinearFit> {
        let s = self.log_gap_samples(n);
        let (t, y): (Vec<f64>, Vec<f64>) = s.into_iter().unzip();
        linear_fit(&t, &y)
    }
}

struct System<'a> {
    law: &'a DragLaw,
    kappa: f64,
    g: f64,
    floor: f64,
}

impl System<'_> {
    fn accel(&self, h: f64, v: f64) -> f64 {
        -self.kappa * self.law.value(h.max(self.floor)) * v - self.g
    }

    fn f(&self, y: [f64; 2]) -> [f64; 2] {
        [y[1], self.accel(y[0], y[1])]
    }

    /// Right-hand side in `(u, w) = (ln h, h'/h)`.
    fn f_log(&self, y: [f64; 2]) -> [f64; 2] {
        let h = y[0].exp();
        let d = self.kappa * self.law.value(h);
        [y[1], -d * y[1] - self.g / h - y[1] * y[1]]
    }

    fn jac_log(&self, y: [f64; 2]) -> [[f64; 2]; 2] {
        let h = y[0].exp();
        let d = self.kappa * self.law.value(h);
        let dd = self.kappa * self.law.derivative(h);
        [[0.0, 1.0], [-dd * h * y[1] + self.g / h, -d - 2.0 * y[1]]]
    }
}

const C: [f64; 6] = [0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 5]; 5] = [
    [0.2, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0],
];
const B: [f64; 6] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// One Dormand-Prince step; returns the new state, its derivative and the error estimate.
fn dopri_step<F: Fn([f64; 2]) -> [f64; 2]>(f: &F, y: [f64; 2], k1: [f64; 2], dt: f64) -> ([f64; 2], [f64; 2], [f64; 2]) {
    let mut k = [[0.0; 2]; 7];
    k[0] = k1;
    for s in 1..6 {
        let mut ys = y;
        for (j, kj) in k.iter().enumerate().take(s) {
            for i in 0..2 {
                ys[i] += dt * A[s - 1][j] * kj[i];
            }
        }
        debug_assert!(C[s - 1] > 0.0);
        k[s] = f(ys);
    }
    let mut yn = y;
    for (j, kj) in k.iter().enumerate().take(6) {
        for i in 0..2 {
            yn[i] += dt * B[j] * kj[i];
        }
    }
    k[6] = f(yn);
    let mut err = [0.0; 2];
    for (j, kj) in k.iter().enumerate() {
        for i in 0..2 {
            err[i] += dt * E[j] * kj[i];
        }
    }
    (yn, k[6], err)
}

/// Fixed-step Dormand-Prince integration, for order checks.
pub fn dopri_fixed<F: Fn([f64; 2]) -> [f64; 2]>(f: F, y0: [f64; 2], t_end: f64, steps: usize) -> [f64; 2] {
    let dt = t_end / steps as f64;
    let mut y = y0;
    let mut k1 = f(y);
    for _ in 0..steps {
        let (yn, kn, _) = dopri_step(&f, y, k1, dt);
        y = yn;
        k1 = kn;
    }
    y
}

fn error_norm(err: [f64; 2], y0: [f64; 2], y1: [f64; 2], spec: &OdeSpec) -> f64 {
    let mut s = 0.0;
    for i in 0..2 {
        let sc = spec.abs_tol + spec.rel_tol * y0[i].abs().max(y1[i].abs());
        s += (err[i] / sc).powi(2);
    }
    (0.5 * s).sqrt()
}

/// Quintic Hermite interpolant of `h` over one step, and its time derivative.
fn hermite(s: f64, tau: f64, a: [f64; 3], b: [f64; 3]) -> (f64, f64) {
    let (s2, s3, s4, s5) = (s * s, s * s * s, s.powi(4), s.powi(5));
    let basis = [
        1.0 - 10.0 * s3 + 15.0 * s4 - 6.0 * s5,
        s - 6.0 * s3 + 8.0 * s4 - 3.0 * s5,
        0.5 * s2 - 1.5 * s3 + 1.5 * s4 - 0.5 * s5,
        0.5 * s3 - s4 + 0.5 * s5,
        -4.0 * s3 + 7.0 * s4 - 3.0 * s5,
        10.0 * s3 - 15.0 * s4 + 6.0 * s5,
    ];
    let slope = [
        -30.0 * s2 + 60.0 * s3 - 30.0 * s4,
        1.0 - 18.0 * s2 + 32.0 * s3 - 15.0 * s4,
        s - 4.5 * s2 + 6.0 * s3 - 2.5 * s4,
        1.5 * s2 - 4.0 * s3 + 2.5 * s4,
        -12.0 * s2 + 28.0 * s3 - 15.0 * s4,
        30.0 * s2 - 60.0 * s3 + 30.0 * s4,
    ];
    let c = [a[0], tau * a[1], tau * tau * a[2], tau * tau * b[2], tau * b[1], b[0]];
    let v: f64 = basis.iter().zip(&c).map(|(x, y)| x * y).sum();
    let d: f64 = slope.iter().zip(&c).map(|(x, y)| x * y).sum::<f64>() / tau;
    (v, d)
}

/// Time within the step at which the interpolated gap crosses `level`.
fn locate(t0: f64, tau: f64, a: [f64; 3], b: [f64; 3], level: f64, tol: f64) -> (f64, f64) {
    let below = a[0] > level;
    let (mut lo, mut hi) = (0.0, 1.0);
    while (hi - lo) * tau > tol {
        let mid = 0.5 * (lo + hi);
        let (v, _) = hermite(mid, tau, a, b);
        if (v > level) == below {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (_, d) = hermite(hi, tau, a, b);
    (t0 + hi * tau, d)
}

fn solve2(m: [[f64; 2]; 2], r: [f64; 2]) -> [f64; 2] {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    [
        (r[0] * m[1][1] - m[0][1] * r[1]) / det,
        (m[0][0] * r[1] - m[1][0] * r[0]) / det,
    ]
}

/// Second-order Rosenbrock step with embedded third-order error estimate.
fn rosenbrock_step(sys: &System, y: [f64; 2], dt: f64) -> ([f64; 2], [f64; 2]) {
    let d = 1.0 / (2.0 + 2f64.sqrt());
    let e32 = 6.0 + 2f64.sqrt();
    let j = sys.jac_log(y);
    let w = [
        [1.0 - dt * d * j[0][0], -dt * d * j[0][1]],
        [-dt * d * j[1][0], 1.0 - dt * d * j[1][1]],
    ];
    let f0 = sys.f_log(y);
    let k1 = solve2(w, f0);
    let f1 = sys.f_log([y[0] + 0.5 * dt * k1[0], y[1] + 0.5 * dt * k1[1]]);
    let r = solve2(w, [f1[0] - k1[0], f1[1] - k1[1]]);
    let k2 = [r[0] + k1[0], r[1] + k1[1]];
    let yn = [y[0] + dt * k2[0], y[1] + dt * k2[1]];
    let f2 = sys.f_log(yn);
    let rhs = [
        f2[0] - e32 * (k2[0] - f1[0]) - 2.0 * (k1[0] - f0[0]),
        f2[1] - e32 * (k2[1] - f1[1]) - 2.0 * (k1[1] - f0[1]),
    ];
    let k3 = solve2(w, rhs);
    let err = [
        dt / 6.0 * (k1[0] - 2.0 * k2[0] + k3[0]),
        dt / 6.0 * (k1[1] - 2.0 * k2[1] + k3[1]),
    ];
    // Filtered through W so that relaxed stiff transients do not stall the step size.
    (yn, solve2(w, err))
}

/// Integrates the fall from gap `h0` with speed `v0` until contact, escape or `t_max`.
pub fn simulate(params: &FallParameters, law: &DragLaw, h0: f64, v0: f64, spec: &OdeSpec) -> Result<Trajectory> {
    params.validate()?;
    spec.validate()?;
    if !(h0 > 0.0 && h0 < spec.h_max) {
        return Err(Error::Domain {
            name: "h0",
            value: h0,
            domain: "(0, h_max)",
        });
    }
    if !v0.is_finite() {
        return Err(Error::InvalidConfig("initial speed must be finite".into()));
    }
    let sys = System {
        law,
        kappa: params.kappa,
        g: params.effective_gravity(),
        floor: spec.touchdown,
    };
    let f = |y: [f64; 2]| sys.f(y);
    let log_floor = f64::MIN_POSITIVE.ln();
    let log_exit = (2.0 * spec.log_switch).ln();

    let mut rows = vec![TrajectoryRow { t: 0.0, h: h0, h_prime: v0 }];
    let mut t = 0.0;
    let mut y = [h0, v0];
    let mut k1 = f(y);
    let mut dt = 1e-3f64.min(spec.t_max);
    let (mut accepted, mut rejected) = (0usize, 0usize);
    let mut log_phase_start = None;
    let mut log_mode = false;
    let mut ly = [0.0f64; 2];

    let event = loop {
        if accepted + rejected >= spec.max_steps {
            return Err(Error::StepUnderflow { t, h: y[0], dt });
        }
        let remaining = spec.t_max - t;
        if remaining <= 0.0 {
            let h = if log_mode { ly[0].exp() } else { y[0] };
            break FallEvent::NoContact { t, h };
        }
        dt = dt.min(remaining);
        if dt < 1e-14 * t.max(1.0) {
            let h = if log_mode { ly[0].exp() } else { y[0] };
            return Err(Error::StepUnderflow { t, h, dt });
        }
        if log_mode {
            let (yn, err) = rosenbrock_step(&sys, ly, dt);
            let en = error_norm(err, ly, yn, spec);
            if !(en <= 1.0) || !yn.iter().all(|v| v.is_finite()) {
                rejected += 1;
                let fac = if en.is_finite() { (0.9 * en.powf(-1.0 / 3.0)).clamp(0.2, 1.0) } else { 0.2 };
                dt *= fac;
                continue;
            }
            accepted += 1;
            t += dt;
            ly = yn;
            let h = ly[0].exp();
            rows.push(TrajectoryRow { t, h, h_prime: ly[1] * h });
            if ly[0] < log_floor {
                break FallEvent::Touchdown { t, speed: (ly[1] * h).abs() };
            }
            dt *= (0.9 * en.max(1e-10).powf(-1.0 / 3.0)).clamp(0.2, 5.0);
            if ly[0] > log_exit {
                log_mode = false;
                y = [h, ly[1] * h];
                k1 = f(y);
            }
            continue;
        }

        let (yn, kn, err) = dopri_step(&f, y, k1, dt);
        let en = error_norm(err, y, yn, spec);
        if !(en <= 1.0) || !yn.iter().all(|v| v.is_finite()) {
            rejected += 1;
            let fac = if en.is_finite() { (0.9 * en.powf(-0.2)).clamp(0.2, 1.0) } else { 0.2 };
            dt *= fac;
            continue;
        }
        accepted += 1;
        let a = [y[0], y[1], k1[1]];
        let b = [yn[0], yn[1], kn[1]];
        if yn[0] <= spec.touchdown {
            let (ts, d) = locate(t, dt, a, b, spec.touchdown, spec.event_tol);
            rows.push(TrajectoryRow {
                t: ts,
                h: spec.touchdown,
                h_prime: d,
            });
            break FallEvent::Touchdown { t: ts, speed: d.abs() };
        }
        if yn[0] >= spec.h_max {
            let (ts, d) = locate(t, dt, a, b, spec.h_max, spec.event_tol);
            rows.push(TrajectoryRow {
                t: ts,
                h: spec.h_max,
                h_prime: d,
            });
            break FallEvent::Escaped { t: ts };
        }
        t += dt;
        y = yn;
        k1 = kn;
        rows.push(TrajectoryRow {
            t,
            h: y[0],
            h_prime: y[1],
        });
        dt *= (0.9 * en.max(1e-10).powf(-0.2)).clamp(0.2, 5.0);
        if law.is_stiff() && y[0] < spec.log_switch {
            log_mode = true;
            log_phase_start.get_or_insert(t);
            ly = [y[0].ln(), y[1] / y[0]];
        }
    };
    Ok(Trajectory {
        rows,
        event,
        accepted,
        rejected,
        log_phase_start,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanGrid {
    pub kappa: Vec<f64>,
    pub g: Vec<f64>,
    pub h0: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum CellOutcome {
    Touchdown { t: f64, speed: f64 },
    NoContact { h_min: f64 },
    Escaped { t: f64 },
    Failed { message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanCell {
    pub kappa: f64,
    pub g: f64,
    pub h0: f64,
    pub outcome: CellOutcome,
}

/// One simulation per grid cell, starting at rest; failures are recorded per cell.
pub fn touchdown_scan(grid: &ScanGrid, law: &DragLaw, spec: &OdeSpec) -> Vec<ScanCell> {
    let mut cells = Vec::new();
    for &kappa in &grid.kappa {
        for &g in &grid.g {
            for &h0 in &grid.h0 {
                cells.push((kappa, g, h0));
            }
        }
    }
    cells
        .par_iter()
        .map(|&(kappa, g, h0)| {
            let outcome = match simulate(&FallParameters::effective(g, kappa), law, h0, 0.0, spec) {
                Ok(tr) => match tr.event {
                    FallEvent::Touchdown { t, speed } => CellOutcome::Touchdown { t, speed },
                    FallEvent::NoContact { .. } => CellOutcome::NoContact { h_min: tr.min_gap() },
                    FallEvent::Escaped { t } => CellOutcome::Escaped { t },
                },
                Err(e) => CellOutcome::Failed { message: e.to_string() },
            };
            ScanCell { kappa, g, h0, outcome }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn analytic_laws() {
        assert!((DragLaw::Log.value((-2.0f64).exp()) - 2.0).abs() < 1e-15);
        assert!((3.0 * DragLaw::Inverse { classical: false }.value(0.01) - 300.0).abs() < 1e-12);
        let slip = drag_law(&SlipRegime::slip(1.0, 1.0).unwrap(), DragSource::Analytic).unwrap();
        assert_eq!(slip, DragLaw::Log);
        let ns = drag_law(&SlipRegime::NoSlip, DragSource::Analytic).unwrap();
        assert_eq!(ns, DragLaw::Inverse { classical: true });
    }

    #[test]
    fn law_derivatives_match_differences() {
        let table = DragTable::new(vec![1e-1, 1e-2, 1e-3], vec![2.0, 4.0, 7.0], ScalingModel::Log).unwrap();
        for law in [DragLaw::Log, DragLaw::Inverse { classical: false }, DragLaw::Table(table)] {
            for h in [0.05, 3e-3, 1e-4] {
                let e = h * 1e-6;
                let fd = (law.value(h + e) - law.value(h - e)) / (2.0 * e);
                assert!((fd - law.derivative(h)).abs() < 1e-6 * fd.abs(), "{law:?} {h}");
            }
        }
    }

    #[test]
    fn table_interpolates_and_extrapolates() {
        let h = vec![1e-1, 1e-2, 1e-3];
        let d = vec![2.0, 4.0, 7.0];
        let t = DragTable::new(h.clone(), d.clone(), ScalingModel::Log).unwrap();
        for (a, b) in h.iter().zip(&d) {
            assert!((t.value(*a) - b).abs() < 1e-12 * b);
        }
        let mid = t.value(10f64.powf(-1.5));
        assert!((mid - 8f64.sqrt()).abs() < 1e-12);
        // Tail continues a |ln h| + b through the last two nodes.
        let slope = 3.0 / 10f64.ln();
        assert!((t.value(1e-4) - (7.0 + slope * 10f64.ln())).abs() < 1e-12);
        assert!(matches!(
            DragTable::new(h, vec![2.0, 1.0, 7.0], ScalingModel::Log),
            Err(Error::NonMonotoneTable { .. })
        ));
    }

    #[test]
    fn free_fall_lands_at_the_closed_form_time() {
        let p = FallParameters::effective(1.0, 1.0);
        let tr = simulate(&p, &DragLaw::Constant { value: 0.0 }, 0.5, 0.0, &OdeSpec::default()).unwrap();
        match tr.event {
            FallEvent::Touchdown { t, speed } => {
                assert!((t - 1.0).abs() < 1e-9, "{t}");
                assert!((speed - 1.0).abs() < 1e-9);
            }
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn dopri_has_fifth_order_on_linear_damping() {
        // h'' = -h' - 1 from rest at h = 1: h = 1 + (1 - e^-t) - t.
        let f = |y: [f64; 2]| [y[1], -y[1] - 1.0];
        let exact = 1.0 + (1.0 - (-1.0f64).exp()) - 1.0;
        let e1 = (dopri_fixed(f, [1.0, 0.0], 1.0, 10)[0] - exact).abs();
        let e2 = (dopri_fixed(f, [1.0, 0.0], 1.0, 20)[0] - exact).abs();
        let order = (e1 / e2).log2();
        assert!(order >= 4.0, "{order}");
    }

    #[test]
    fn hermite_reproduces_endpoint_data() {
        let a = [1.0, -0.5, 2.0];
        let b = [0.7, 0.3, -1.0];
        let tau = 0.3;
        let (v0, d0) = hermite(0.0, tau, a, b);
        let (v1, d1) = hermite(1.0, tau, a, b);
        assert!((v0 - 1.0).abs() < 1e-15 && (d0 + 0.5).abs() < 1e-14);
        assert!((v1 - 0.7).abs() < 1e-15 && (d1 - 0.3).abs() < 1e-14);
    }

    #[test]
    fn rising_sphere_escapes() {
        let p = FallParameters {
            rho_s: 1.0,
            rho_f: 2.0,
            g: 1.0,
            mu_f: 1.0,
            kappa: 1.0,
        };
        let tr = simulate(&p, &DragLaw::Log, 0.25, 0.0, &OdeSpec::default()).unwrap();
        assert!(matches!(tr.event, FallEvent::Escaped { .. }));
    }

    #[test]
    fn rejects_bad_inputs() {
        let p = FallParameters::effective(1.0, 1.0);
        assert!(simulate(&p, &DragLaw::Log, 0.0, 0.0, &OdeSpec::default()).is_err());
        assert!(simulate(&p, &DragLaw::Log, 2.0, 0.0, &OdeSpec::default()).is_err());
        assert!(simulate(&p, &DragLaw::Log, 0.2, f64::NAN, &OdeSpec::default()).is_err());
        let bad = FallParameters { rho_s: -1.0, ..p };
        assert!(simulate(&bad, &DragLaw::Log, 0.2, 0.0, &OdeSpec::default()).is_err());
    }
}
