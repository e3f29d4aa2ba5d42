//! Velocity fields built from the stream function: the aperture field, its
//! global extension, the companion pressure and the boundary residuals.
//!
//! Any stream function `psi` yields the divergence-free field
//! `u = (-x psi_z / 2, -y psi_z / 2, psi + (x psi_x + y psi_y) / 2)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{gamma_unchecked, GapGeometry};
use crate::jet::Jet;
use crate::profile::{ProfileEval, PsiDerivatives, RegimeKind, SlipRegime};
use crate::quadrature::{integrate, QuadratureSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "frame", rename_all = "snake_case")]
pub enum Position {
    Cylindrical { r: f64, theta: f64, z: f64 },
    Cartesian { x: [f64; 3] },
}

/// Velocity (and optionally its gradient) at one point.
///
/// Cylindrical samples use physical components `(r, theta, z)`; the gradient
/// entry `[i][j]` is the derivative of component `i` along direction `j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldSample {
    pub position: Position,
    pub velocity: [f64; 3],
    pub gradient: Option<[[f64; 3]; 3]>,
    pub pressure: Option<f64>,
}

impl FieldSample {
    pub fn divergence(&self) -> Option<f64> {
        self.gradient.map(|g| g[0][0] + g[1][1] + g[2][2])
    }

    pub fn strain(&self) -> Option<[[f64; 3]; 3]> {
        self.gradient.map(|g| sym(&g))
    }
}

pub fn sym(g: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut d = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            d[i][j] = 0.5 * (g[i][j] + g[j][i]);
        }
    }
    d
}

pub fn frobenius_sq(m: &[[f64; 3]; 3]) -> f64 {
    m.iter().flatten().map(|v| v * v).sum()
}

/// Axisymmetric kinematics of the aperture field at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Axi {
    pub u_r: f64,
    pub u_z: f64,
    pub ur_r: f64,
    pub ur_z: f64,
    /// `u_r / r`
    pub hoop: f64,
    pub uz_r: f64,
    pub uz_z: f64,
}

impl Axi {
    pub(crate) fn from_psi(d: &PsiDerivatives, r: f64) -> Self {
        Axi {
            u_r: -0.5 * r * d.z,
            u_z: d.psi + 0.5 * r * d.r,
            ur_r: -0.5 * d.z - 0.5 * r * d.rz,
            ur_z: -0.5 * r * d.zz,
            hoop: -0.5 * d.z,
            uz_r: 1.5 * d.r + 0.5 * r * d.rr,
            uz_z: d.z + 0.5 * r * d.rz,
        }
    }

    pub(crate) fn gradient(&self) -> [[f64; 3]; 3] {
        [
            [self.ur_r, 0.0, self.ur_z],
            [0.0, self.hoop, 0.0],
            [self.uz_r, 0.0, self.uz_z],
        ]
    }

    pub(crate) fn grad_sq(&self) -> f64 {
        self.ur_r * self.ur_r
            + self.hoop * self.hoop
            + self.ur_z * self.ur_z
            + self.uz_r * self.uz_r
            + self.uz_z * self.uz_z
    }

    /// `|D(u)|^2`
    pub(crate) fn strain_sq(&self) -> f64 {
        let rz = 0.5 * (self.ur_z + self.uz_r);
        self.ur_r * self.ur_r + self.hoop * self.hoop + self.uz_z * self.uz_z + 2.0 * rz * rz
    }

    /// `D_rz`
    pub(crate) fn strain_rz(&self) -> f64 {
        0.5 * (self.ur_z + self.uz_r)
    }

    /// `D n` for `n = (n_r, 0, n_z)`, as `(e_r, e_z)` components.
    pub(crate) fn strain_times(&self, n: [f64; 2]) -> [f64; 2] {
        let rz = self.strain_rz();
        [self.ur_r * n[0] + rz * n[1], rz * n[0] + self.uz_z * n[1]]
    }
}

fn aperture_eval(regime: &SlipRegime, h: f64, delta: f64, r: f64, z: f64) -> Result<(ProfileEval, PsiDerivatives)> {
    let eval = ProfileEval::new(regime)?;
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::Domain {
            name: "h",
            value: h,
            domain: "(0, inf)",
        });
    }
    if !(r >= 0.0 && r < delta) {
        return Err(Error::Domain {
            name: "r",
            value: r,
            domain: "[0, delta)",
        });
    }
    let gap = h + gamma_unchecked(r);
    if !(z >= 0.0 && z <= gap * (1.0 + 1e-12)) {
        return Err(Error::Domain {
            name: "z",
            value: z,
            domain: "[0, h + gamma_s(r)]",
        });
    }
    Ok((eval, eval.eval(h, r, z)))
}

/// Aperture field at `(r, z)` with `r < delta`.
pub fn aperture_velocity(regime: &SlipRegime, h: f64, delta: f64, r: f64, z: f64) -> Result<FieldSample> {
    let (_, d) = aperture_eval(regime, h, delta, r, z)?;
    let a = Axi::from_psi(&d, r);
    Ok(FieldSample {
        position: Position::Cylindrical { r, theta: 0.0, z },
        velocity: [a.u_r, 0.0, a.u_z],
        gradient: Some(a.gradient()),
        pressure: None,
    })
}

/// Cartesian jet of the aperture stream function at `x`.
pub(crate) fn aperture_jet(eval: &ProfileEval, h: f64, x: [f64; 3]) -> Jet {
    let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
    let d = eval.eval(h, r, x[2]);
    let (c, s) = if r > 0.0 { (x[0] / r, x[1] / r) } else { (1.0, 0.0) };
    let pr_over_r = d.r_over_r(r);
    let mut j = Jet::constant(d.psi);
    j.g = [d.r * c, d.r * s, d.z];
    j.h[0][0] = d.rr * c * c + pr_over_r * s * s;
    j.h[1][1] = d.rr * s * s + pr_over_r * c * c;
    j.h[0][1] = (d.rr - pr_over_r) * c * s;
    j.h[1][0] = j.h[0][1];
    j.h[0][2] = d.rz * c;
    j.h[2][0] = j.h[0][2];
    j.h[1][2] = d.rz * s;
    j.h[2][1] = j.h[1][2];
    j.h[2][2] = d.zz;
    j
}

/// Far-field stream function `B(rho) tau(z / (z + rho))` with `rho` the
/// distance to the ball; equals 1 on the sphere and 0 on the wall.
pub(crate) fn outer_jet(kind: RegimeKind, geometry: &GapGeometry, x: [f64; 3], bump: Jet) -> Jet {
    if bump.v == 0.0 && bump.g == [0.0; 3] {
        return Jet::ZERO;
    }
    let [a, b, c] = Jet::coordinates(x);
    let dz = c - geometry.center_height();
    let rho = (a * a + b * b + dz * dz).sqrt() - 1.0;
    let t = c / (c + rho);
    let tau = match kind {
        RegimeKind::Slip => t,
        _ => t.compose(1.5 * t.v - 0.5 * t.v.powi(3), 1.5 - 1.5 * t.v * t.v, -3.0 * t.v),
    };
    bump * tau
}

/// Stream function of the global field at a fluid point.
pub(crate) fn global_jet(eval: &ProfileEval, kind: RegimeKind, geometry: &GapGeometry, x: [f64; 3]) -> Jet {
    let cut = geometry.cutoffs(x);
    let outer = outer_jet(kind, geometry, x, cut.phi_bump);
    if cut.chi.v == 0.0 && cut.chi.g == [0.0; 3] {
        return outer;
    }
    let inner = aperture_jet(eval, geometry.h, x);
    outer + cut.chi * (inner - outer)
}

/// Velocity and gradient from a stream-function jet.
pub(crate) fn velocity_from_jet(psi: &Jet, x: [f64; 3]) -> ([f64; 3], [[f64; 3]; 3]) {
    let (g, hs) = (psi.g, psi.h);
    let u = [
        -0.5 * x[0] * g[2],
        -0.5 * x[1] * g[2],
        psi.v + 0.5 * (x[0] * g[0] + x[1] * g[1]),
    ];
    let mut grad = [[0.0; 3]; 3];
    for j in 0..3 {
        let dj = |k: usize| if j == k { 1.0 } else { 0.0 };
        grad[0][j] = -0.5 * (dj(0) * g[2] + x[0] * hs[2][j]);
        grad[1][j] = -0.5 * (dj(1) * g[2] + x[1] * hs[2][j]);
        grad[2][j] = g[j] + 0.5 * (dj(0) * g[0] + x[0] * hs[0][j] + dj(1) * g[1] + x[1] * hs[1][j]);
    }
    (u, grad)
}

/// Global field: `e3` inside the ball, the blended stream construction in the fluid.
pub fn global_velocity(regime: &SlipRegime, geometry: &GapGeometry, x: [f64; 3]) -> Result<FieldSample> {
    let eval = ProfileEval::new(regime)?;
    if x.iter().any(|v| !v.is_finite()) || x[2] < 0.0 {
        return Err(Error::Domain {
            name: "x3",
            value: x[2],
            domain: "[0, inf)",
        });
    }
    let position = Position::Cartesian { x };
    if geometry.sphere_distance(x) < 0.0 {
        return Ok(FieldSample {
            position,
            velocity: [0.0, 0.0, 1.0],
            gradient: Some([[0.0; 3]; 3]),
            pressure: None,
        });
    }
    let psi = global_jet(&eval, regime.kind(), geometry, x);
    let (velocity, gradient) = velocity_from_jet(&psi, x);
    Ok(FieldSample {
        position,
        velocity,
        gradient: Some(gradient),
        pressure: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PressureSample {
    pub r: f64,
    pub z: f64,
    pub q: f64,
    /// `(dq/dr, dq/dz)`
    pub gradient: [f64; 2],
}

/// `int_anchor^r Psi_zzz(s) s ds`, which does not depend on `z`.
pub(crate) fn radial_integral(eval: &ProfileEval, h: f64, anchor: f64, r: f64) -> Result<f64> {
    // The integrand keeps one sign, so a relative tolerance alone is safe.
    let spec = QuadratureSpec {
        rel_tol: 1e-12,
        abs_tol: 0.0,
        ..QuadratureSpec::default()
    };
    Ok(integrate(|s| eval.psi_zzz(h, s) * s, anchor, r, &spec)?.value)
}

pub(crate) fn pressure_parts(kind: RegimeKind, d: &PsiDerivatives, r: f64, integral: f64) -> (f64, [f64; 2]) {
    let base = r * d.rz + 2.0 * d.z;
    let dr = 3.0 * d.rz + r * d.rrz;
    let dz = r * d.rzz + 2.0 * d.zz;
    match kind {
        RegimeKind::Slip => (-0.5 * (base + integral), [-0.5 * (dr + r * d.zzz), -0.5 * dz]),
        _ => (0.5 * (base - integral), [0.5 * (dr - r * d.zzz), 0.5 * dz]),
    }
}

/// Aperture pressure, with the radial integral taken from the axis.
pub fn pressure(regime: &SlipRegime, h: f64, delta: f64, r: f64, z: f64) -> Result<PressureSample> {
    let (eval, d) = aperture_eval(regime, h, delta, r, z)?;
    let integral = radial_integral(&eval, h, 0.0, r)?;
    let (q, gradient) = pressure_parts(regime.kind(), &d, r, integral);
    Ok(PressureSample { r, z, q, gradient })
}

/// `(Delta u)_r` and `(Delta u)_z` of the aperture field.
pub(crate) fn vector_laplacian(d: &PsiDerivatives, r: f64) -> [f64; 2] {
    [
        -0.5 * (3.0 * d.rz + r * d.rrz + r * d.zzz),
        2.5 * d.rr + 1.5 * d.r_over_r(r) + d.zz + 0.5 * r * d.rrr + 0.5 * r * d.rzz,
    ]
}

pub(crate) fn residual_from(kind: RegimeKind, d: &PsiDerivatives, r: f64) -> [f64; 2] {
    let lap = vector_laplacian(d, r);
    let (_, gq) = pressure_parts(kind, d, r, 0.0);
    [lap[0] - gq[0], lap[1] - gq[1]]
}

/// `Delta u - grad q` in the aperture, as `(e_r, e_z)` components.
pub fn stokes_residual(regime: &SlipRegime, h: f64, delta: f64, r: f64, z: f64) -> Result<[f64; 2]> {
    let (_, d) = aperture_eval(regime, h, delta, r, z)?;
    Ok(residual_from(regime.kind(), &d, r))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NavierResiduals {
    /// `u_z` on the wall.
    pub wall_normal: f64,
    /// `e_theta` component of `u x nu + 2 beta_omega (D nu) x nu` on the wall.
    pub wall_tangential: f64,
    /// `(u - e3) . n` on the sphere.
    pub sphere_normal: f64,
    /// `e_theta` component of `2 beta_s (D n) x n + (u - e3) x n` on the sphere
    /// (just `(u - e3) x n` when the sphere is no-slip).
    pub sphere_tangential: f64,
}

/// `e_theta` component of `a x n` for meridional vectors `(a_r, a_z)`, `(n_r, n_z)`.
fn cross_theta(a: [f64; 2], n: [f64; 2]) -> f64 {
    a[1] * n[0] - a[0] * n[1]
}

pub(crate) fn sphere_tangential(kind: RegimeKind, beta_s: f64, a: &Axi, n: [f64; 2]) -> f64 {
    let slip = cross_theta([a.u_r, a.u_z - 1.0], n);
    match kind {
        RegimeKind::Slip if beta_s.is_infinite() => 2.0 * cross_theta(a.strain_times(n), n),
        RegimeKind::Slip => 2.0 * beta_s * cross_theta(a.strain_times(n), n) + slip,
        _ => slip,
    }
}

pub(crate) fn sphere_normal_vec(r: f64) -> [f64; 2] {
    [-r, (1.0 - r * r).sqrt()]
}

pub fn navier_residuals(regime: &SlipRegime, h: f64, delta: f64, r: f64) -> Result<NavierResiduals> {
    let (eval, bottom) = aperture_eval(regime, h, delta, r, 0.0)?;
    let wall = Axi::from_psi(&bottom, r);
    let beta_w = regime.beta_omega().unwrap_or(0.0);
    let nu = [0.0, -1.0];
    let wall_strain = cross_theta(wall.strain_times(nu), nu);
    let wall_tangential = if beta_w.is_infinite() {
        2.0 * wall_strain
    } else {
        cross_theta([wall.u_r, wall.u_z], nu) + 2.0 * beta_w * wall_strain
    };
    let gap = h + gamma_unchecked(r);
    let top = Axi::from_psi(&eval.eval(h, r, gap), r);
    let n = sphere_normal_vec(r);
    let beta_s = regime.beta_s().unwrap_or(0.0);
    Ok(NavierResiduals {
        wall_normal: wall.u_z,
        wall_tangential,
        sphere_normal: top.u_r * n[0] + (top.u_z - 1.0) * n[1],
        sphere_tangential: sphere_tangential(regime.kind(), beta_s, &top, n),
    })
}

/// `int_0^{h + gamma_s(r)} u_r dz` by adaptive quadrature.
pub fn radial_flux(regime: &SlipRegime, h: f64, delta: f64, r: f64, spec: &QuadratureSpec) -> Result<f64> {
    let (eval, _) = aperture_eval(regime, h, delta, r, 0.0)?;
    let gap = h + gamma_unchecked(r);
    Ok(integrate(|z| -0.5 * r * eval.eval(h, r, z).z, 0.0, gap, spec)?.value)
}
