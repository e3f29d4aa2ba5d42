//! Drag of the relaxed field: the energy functional, the surface drag
//! identity, drag curves over a sweep of gaps and their scaling fits.
//!
//! Everything outside the aperture `{r < delta}` is bounded uniformly in
//! `h`, so it is integrated once at contact (`h = 0`) on fixed composite
//! Gauss-Legendre grids and added as a constant.

use std::f64::consts::{FRAC_PI_4, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{
    frobenius_sq, global_jet, pressure_parts, radial_integral, residual_from, sphere_normal_vec, sym,
    velocity_from_jet, Axi,
};
use crate::geometry::{check_shape, gamma_unchecked, GapGeometry, Surface, DEFAULT_DELTA, DEFAULT_D_DELTA, DEFAULT_H_MAX};
use crate::profile::{ProfileEval, RegimeKind, SlipRegime};
use crate::quadrature::{composite_rule, integrate_gap, integrate_surface_graded, Estimate, QuadratureSpec};
use crate::regression::linear_fit;

/// Contributions from outside the aperture, evaluated at contact.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Exterior {
    /// `int |grad u|^2`
    pub gradient: f64,
    /// `2 int |D(u)|^2`
    pub strain: f64,
    /// `int |u|^2`
    pub l2: f64,
    /// `int |(u - e3) x n|^2` over the sphere outside the cap.
    pub sphere: f64,
    /// `int |u_t|^2` over the wall outside the disk.
    pub wall: f64,
    /// Sphere boundary form outside the cap minus the stress flux through `r = delta`.
    pub drag_correction: f64,
}

/// Setup shared by every evaluation of one drag curve.
#[derive(Debug, Clone)]
pub struct DragModel {
    regime: SlipRegime,
    delta: f64,
    d_delta: f64,
    h_max: f64,
    spec: QuadratureSpec,
    eval: ProfileEval,
    exterior: Exterior,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub h: f64,
    pub total: f64,
    /// `int_F |grad u|^2`
    pub gradient: f64,
    /// Weighted sphere term (zero when the sphere is no-slip).
    pub sphere: f64,
    /// Weighted wall term.
    pub wall: f64,
    /// `2 int_F |D(u)|^2`
    pub strain: f64,
    /// `||u||_{L^2(F)}`
    pub l2_norm: f64,
    pub error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfaceDrag {
    pub h: f64,
    pub value: f64,
    pub error: f64,
    /// Aperture terms: bulk residual, strain, wall, sphere.
    pub aperture_terms: [f64; 4],
    pub exterior: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DragRow {
    pub h: f64,
    pub energy: f64,
    pub gradient: f64,
    pub sphere: f64,
    pub wall: f64,
    pub surface_drag: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveMeta {
    pub delta: f64,
    pub d_delta: f64,
    pub h_max: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub beta_s: Option<f64>,
    pub beta_omega: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DragCurve {
    pub regime: SlipRegime,
    pub rows: Vec<DragRow>,
    pub meta: CurveMeta,
}

impl DragCurve {
    /// Checks ordering, `h > 0`, `E > 0` and a finite `n` on every row.
    ///
    /// `n` may be negative at larger gaps, where the fixed exterior part dominates.
    pub fn validate(&self) -> Result<()> {
        for w in self.rows.windows(2) {
            if !(w[1].h < w[0].h) {
                return Err(Error::InvalidConfig("drag curve rows must have strictly decreasing h".into()));
            }
        }
        for r in &self.rows {
            if !(r.h > 0.0) || !(r.energy > 0.0) || !r.surface_drag.is_finite() {
                return Err(Error::InvalidConfig(format!(
                    "drag curve row at h = {} must have h > 0, E > 0 and a finite n",
                    r.h
                )));
            }
        }
        Ok(())
    }

    pub fn column(&self, column: DragColumn) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| match column {
                DragColumn::Energy => r.energy,
                DragColumn::SurfaceDrag => r.surface_drag,
            })
            .collect()
    }

    pub fn h(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.h).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DragColumn {
    Energy,
    SurfaceDrag,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalingModel {
    /// `a |ln h| + b`
    Log,
    /// `a / h + b`
    Inverse,
}

impl ScalingModel {
    pub fn regressor(&self, h: f64) -> f64 {
        match self {
            ScalingModel::Log => h.ln().abs(),
            ScalingModel::Inverse => 1.0 / h,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub model: ScalingModel,
    pub a: f64,
    pub b: f64,
    pub r_squared: f64,
}

impl ScalingFit {
    pub fn predict(&self, h: f64) -> f64 {
        self.a * self.model.regressor(h) + self.b
    }
}

/// Least squares of `values` against the model regressor of `h`.
pub fn fit_points(h: &[f64], values: &[f64], model: ScalingModel) -> Result<ScalingFit> {
    if h.len() < 4 {
        return Err(Error::InvalidConfig(format!("scaling fit needs at least 4 rows, got {}", h.len())));
    }
    if h.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::InvalidConfig("scaling fit needs h > 0".into()));
    }
    let x: Vec<f64> = h.iter().map(|&v| model.regressor(v)).collect();
    let f = linear_fit(&x, values)?;
    Ok(ScalingFit {
        model,
        a: f.slope,
        b: f.intercept,
        r_squared: f.r_squared.clamp(0.0, 1.0),
    })
}

/// Fit of the energy column.
pub fn fit_scaling(curve: &DragCurve, model: ScalingModel) -> Result<ScalingFit> {
    fit_column(curve, DragColumn::Energy, model)
}

pub fn fit_column(curve: &DragCurve, column: DragColumn, model: ScalingModel) -> Result<ScalingFit> {
    fit_points(&curve.h(), &curve.column(column), model)
}

impl DragModel {
    pub fn new(regime: SlipRegime, delta: f64, d_delta: f64, h_max: f64, spec: QuadratureSpec) -> Result<Self> {
        check_shape(delta, d_delta, h_max)?;
        spec.validate()?;
        if regime.kind() == RegimeKind::NoSlip {
            return Err(Error::Unsupported(
                "no relaxed field for the no-slip regime; use the classical drag law".into(),
            ));
        }
        let eval = ProfileEval::new(&regime)?;
        let mut model = DragModel {
            regime,
            delta,
            d_delta,
            h_max,
            spec,
            eval,
            exterior: Exterior::default(),
        };
        model.exterior = model.compute_exterior()?;
        Ok(model)
    }

    pub fn with_defaults(regime: SlipRegime) -> Result<Self> {
        Self::new(regime, DEFAULT_DELTA, DEFAULT_D_DELTA, DEFAULT_H_MAX, QuadratureSpec::default())
    }

    pub fn regime(&self) -> &SlipRegime {
        &self.regime
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn spec(&self) -> &QuadratureSpec {
        &self.spec
    }

    pub(crate) fn eval(&self) -> &ProfileEval {
        &self.eval
    }

    pub fn exterior(&self) -> &Exterior {
        &self.exterior
    }

    pub fn meta(&self) -> CurveMeta {
        CurveMeta {
            delta: self.delta,
            d_delta: self.d_delta,
            h_max: self.h_max,
            rel_tol: self.spec.rel_tol,
            abs_tol: self.spec.abs_tol,
            beta_s: self.regime.beta_s(),
            beta_omega: self.regime.beta_omega(),
        }
    }

    fn check_h(&self, h: f64) -> Result<()> {
        if h > 0.0 && h < self.h_max {
            Ok(())
        } else {
            Err(Error::Domain {
                name: "h",
                value: h,
                domain: "(0, h_max)",
            })
        }
    }

    fn sphere_weight(&self) -> f64 {
        match self.regime {
            SlipRegime::Slip { beta_s, .. } => 1.0 / beta_s + 1.0,
            _ => 0.0,
        }
    }

    fn wall_weight(&self) -> f64 {
        self.regime.beta_omega().map_or(0.0, |b| 1.0 / b)
    }

    fn gap_integral<F: Fn(&Axi, f64, f64) -> f64>(&self, h: f64, f: F) -> Result<Estimate> {
        integrate_gap(
            |r, z| {
                let a = Axi::from_psi(&self.eval.eval(h, r, z), r);
                f(&a, r, z)
            },
            h,
            self.delta,
            &self.spec,
        )
    }

    /// Integral over the wall disk `r < delta` of `f(kinematics at z = 0)`.
    fn wall_integral<F: Fn(&Axi, f64) -> f64>(&self, h: f64, f: F) -> Result<Estimate> {
        integrate_surface_graded(
            |r| f(&Axi::from_psi(&self.eval.eval(h, r, 0.0), r), r),
            Surface::Plane,
            self.delta,
            h.sqrt(),
            &self.spec,
        )
    }

    /// Integral over the sphere cap `r < delta` of `f(kinematics, n)`.
    fn cap_integral<F: Fn(&Axi, [f64; 2]) -> f64>(&self, h: f64, f: F) -> Result<Estimate> {
        integrate_surface_graded(
            |r| {
                let top = h + gamma_unchecked(r);
                f(&Axi::from_psi(&self.eval.eval(h, r, top), r), sphere_normal_vec(r))
            },
            Surface::SphereCap,
            self.delta,
            h.sqrt(),
            &self.spec,
        )
    }

    pub fn energy(&self, h: f64) -> Result<EnergyBreakdown> {
        self.check_h(h)?;
        let ext = &self.exterior;
        let grad = self.gap_integral(h, |a, _, _| a.grad_sq())?;
        let strain = self.gap_integral(h, |a, _, _| 2.0 * a.strain_sq())?;
        let l2 = self.gap_integral(h, |a, _, _| a.u_r * a.u_r + a.u_z * a.u_z)?;
        let wall = self.wall_integral(h, |a, _| a.u_r * a.u_r)?;
        let (ws, ww) = (self.sphere_weight(), self.wall_weight());
        let sphere = if ws > 0.0 {
            self.cap_integral(h, |a, n| {
                let c = a.u_z.mul_add(n[0], -n[0]) - a.u_r * n[1];
                c * c
            })?
        } else {
            Estimate {
                value: 0.0,
                error: 0.0,
                evaluations: 0,
            }
        };
        let gradient = grad.value + ext.gradient;
        let sphere_term = ws * (sphere.value + ext.sphere);
        let wall_term = ww * (wall.value + ext.wall);
        Ok(EnergyBreakdown {
            h,
            total: gradient + sphere_term + wall_term,
            gradient,
            sphere: sphere_term,
            wall: wall_term,
            strain: strain.value + ext.strain,
            l2_norm: (l2.value + ext.l2).sqrt(),
            error: grad.error + ws * sphere.error + ww * wall.error,
        })
    }

    pub fn surface_drag(&self, h: f64) -> Result<SurfaceDrag> {
        self.check_h(h)?;
        let kind = self.regime.kind();
        let t1 = integrate_gap(
            |r, z| {
                let d = self.eval.eval(h, r, z);
                let a = Axi::from_psi(&d, r);
                let f = residual_from(kind, &d, r);
                f[0] * a.u_r + f[1] * a.u_z
            },
            h,
            self.delta,
            &self.spec,
        )?;
        let t2 = self.gap_integral(h, |a, _, _| 2.0 * a.strain_sq())?;
        let t3 = self.wall_integral(h, |a, _| 2.0 * a.strain_rz() * a.u_r)?;
        let t4 = if kind == RegimeKind::Slip {
            self.cap_integral(h, |a, n| {
                let dn = a.strain_times(n);
                -dn[0] * a.u_r + dn[1] * (1.0 - a.u_z)
            })?
        } else {
            Estimate {
                value: 0.0,
                error: 0.0,
                evaluations: 0,
            }
        };
        let terms = [t1.value, t2.value, t3.value, t4.value];
        Ok(SurfaceDrag {
            h,
            value: terms.iter().sum::<f64>() + self.exterior.drag_correction,
            error: t1.error + t2.error + t3.error + t4.error,
            aperture_terms: terms,
            exterior: self.exterior.drag_correction,
        })
    }

    pub fn row(&self, h: f64) -> Result<DragRow> {
        let e = self.energy(h)?;
        let n = self.surface_drag(h)?;
        Ok(DragRow {
            h,
            energy: e.total,
            gradient: e.gradient,
            sphere: e.sphere,
            wall: e.wall,
            surface_drag: n.value,
        })
    }

    /// Drag rows for `h_list`, computed in parallel and ordered by decreasing `h`.
    pub fn scan(&self, h_list: &[f64]) -> Result<DragCurve> {
        let mut hs = h_list.to_vec();
        hs.sort_by(|a, b| b.total_cmp(a));
        hs.dedup();
        let rows = hs.par_iter().map(|&h| self.row(h)).collect::<Result<Vec<_>>>()?;
        let curve = DragCurve {
            regime: self.regime,
            rows,
            meta: self.meta(),
        };
        curve.validate()?;
        Ok(curve)
    }

    /// `int (d u_y / d y)^2` over the aperture: one strain component alone.
    pub fn strain_component_witness(&self, h: f64) -> Result<f64> {
        self.check_h(h)?;
        Ok(integrate_gap(
            |r, z| {
                let d = self.eval.eval(h, r, z);
                let a = -0.5 * d.z;
                let b = -0.5 * r * d.rz;
                a * a + a * b + 0.375 * b * b
            },
            h,
            self.delta,
            &self.spec,
        )?
        .value)
    }

    fn compute_exterior(&self) -> Result<Exterior> {
        let kind = self.regime.kind();
        let delta = self.delta;
        let geometry = GapGeometry {
            h: 0.0,
            delta,
            d_delta: self.d_delta,
            h_max: self.h_max,
        };
        let big = 1.0 + self.d_delta;
        let band = (2.0 * 2f64.sqrt() * delta).min(0.999);
        let eval = &self.eval;

        let volume = |x: [f64; 3]| -> [f64; 3] {
            let psi = global_jet(eval, kind, &geometry, x);
            let (u, g) = velocity_from_jet(&psi, x);
            [frobenius_sq(&g), 2.0 * frobenius_sq(&sym(&g)), u[0] * u[0] + u[1] * u[1] + u[2] * u[2]]
        };

        // Theta nodes on [0, pi/4], split where the cube cutoff has kinks.
        let theta_rule = |r: f64| -> Vec<(f64, f64)> {
            let mut br = vec![0.0, FRAC_PI_4];
            for c in [delta, 2.0 * delta] {
                if c < r {
                    for t in [(c / r).acos(), (c / r).asin()] {
                        if t > 0.0 && t < FRAC_PI_4 {
                            br.push(t);
                        }
                    }
                }
            }
            br.sort_by(f64::total_cmp);
            br.windows(2)
                .filter(|w| w[1] > w[0])
                .flat_map(|w| composite_rule(w[0], w[1], 2, 6))
                .collect()
        };
        let segments = |br: &[f64], panels: usize, n: usize| -> Vec<(f64, f64)> {
            br.windows(2)
                .filter(|w| w[1] > w[0])
                .flat_map(|w| composite_rule(w[0], w[1], panels, n))
                .collect()
        };
        let t_rule = |zs: f64| -> Vec<(f64, f64)> {
            let mut br = vec![0.0, 1.0];
            for c in [delta, 2.0 * delta] {
                if c < zs {
                    br.push(c / zs);
                }
            }
            br.sort_by(f64::total_cmp);
            segments(&br, 4, 8)
        };

        // Region under the sphere, r in [delta, 1): r = sin a, z = t gamma_s(r).
        let mut a_breaks: Vec<f64> = [delta, 2f64.sqrt() * delta, 2.0 * delta, band]
            .iter()
            .filter(|&&r| r <= band)
            .map(|r| r.asin())
            .collect();
        a_breaks.dedup();
        let band_nodes = segments(&a_breaks, 4, 8);
        let outer_nodes = composite_rule(band.asin(), 0.5 * PI, 12, 8);
        let mut vol = [0.0; 3];
        let add = |acc: &mut [f64; 3], v: [f64; 3], w: f64| {
            for k in 0..3 {
                acc[k] += w * v[k];
            }
        };
        let band_parts: Vec<[f64; 3]> = band_nodes
            .par_iter()
            .map(|&(a, wa)| {
                let r = a.sin();
                let zs = gamma_unchecked(r);
                let mut acc = [0.0; 3];
                for (th, wt) in theta_rule(r) {
                    for &(t, wz) in &t_rule(zs) {
                        let x = [r * th.cos(), r * th.sin(), t * zs];
                        add(&mut acc, volume(x), 8.0 * wt * wz * zs * r * wa * a.cos());
                    }
                }
                acc
            })
            .collect();
        for p in band_parts {
            add(&mut vol, p, 1.0);
        }
        let axisym = |nodes: &[(f64, f64)], column: &(dyn Fn(f64) -> (f64, f64, f64, f64) + Sync)| -> [f64; 3] {
            let parts: Vec<[f64; 3]> = nodes
                .par_iter()
                .map(|&(s, ws)| {
                    // column(s) -> (r, z_lo, z_hi, jacobian)
                    let (r, lo, hi, jac) = column(s);
                    let mut acc = [0.0; 3];
                    if hi > lo {
                        for &(t, wt) in &segments(&[0.0, 1.0], 8, 8) {
                            let x = [r, 0.0, lo + t * (hi - lo)];
                            add(&mut acc, volume(x), 2.0 * PI * r * jac * ws * wt * (hi - lo));
                        }
                    }
                    acc
                })
                .collect();
            let mut acc = [0.0; 3];
            for p in parts {
                add(&mut acc, p, 1.0);
            }
            acc
        };
        let under = axisym(&outer_nodes, &|a: f64| {
            let r = a.sin();
            (r, 0.0, gamma_unchecked(r), a.cos())
        });
        let above = axisym(&composite_rule(0.0, 0.5 * PI, 12, 8), &|a: f64| {
            let r = a.sin();
            (r, 1.0 + a.cos(), 1.0 + (big * big - r * r).sqrt(), a.cos())
        });
        let side = axisym(&composite_rule(1.0, big, 16, 8), &|r: f64| {
            let s = (big * big - r * r).max(0.0).sqrt();
            (r, (1.0 - s).max(0.0), 1.0 + s, 1.0)
        });
        for p in [under, above, side] {
            add(&mut vol, p, 1.0);
        }

        // Wall outside the disk.
        let wall_speed = |x: [f64; 3]| {
            let (u, _) = velocity_from_jet(&global_jet(eval, kind, &geometry, x), x);
            u[0] * u[0] + u[1] * u[1]
        };
        let mut wall = 0.0;
        for &(r, wr) in &segments(&[delta, 2f64.sqrt() * delta, 2.0 * delta, band], 4, 8) {
            for (th, wt) in theta_rule(r) {
                wall += 8.0 * wr * wt * r * wall_speed([r * th.cos(), r * th.sin(), 0.0]);
            }
        }
        for &(r, wr) in &segments(&[band, 1.0, big], 16, 8) {
            wall += 2.0 * PI * wr * r * wall_speed([r, 0.0, 0.0]);
        }

        // Sphere outside the cap: polar angle a from the south pole.
        let anchor_pressure = |r: f64, z: f64| -> Result<f64> {
            let d = eval.eval(0.0, r, z);
            let integral = radial_integral(eval, 0.0, delta, r)?;
            Ok(pressure_parts(kind, &d, r, integral).0)
        };
        let sphere_point = |a: f64, th: f64| -> Result<[f64; 2]> {
            let (sa, ca) = (a.sin(), a.cos());
            let x = [sa * th.cos(), sa * th.sin(), 1.0 - ca];
            let n = [-x[0], -x[1], ca];
            let (u, g) = velocity_from_jet(&global_jet(eval, kind, &geometry, x), x);
            let d = sym(&g);
            let dn: Vec<f64> = (0..3).map(|i| (0..3).map(|j| d[i][j] * n[j]).sum()).collect();
            let rel = [u[0], u[1], u[2] - 1.0];
            let cross = [
                rel[1] * n[2] - rel[2] * n[1],
                rel[2] * n[0] - rel[0] * n[2],
                rel[0] * n[1] - rel[1] * n[0],
            ];
            let slip = cross.iter().map(|c| c * c).sum::<f64>();
            let chi = geometry.cutoffs(x).chi.v;
            let q = if chi > 0.0 { chi * anchor_pressure(sa, x[2])? } else { 0.0 };
            let form = (0..3).map(|i| 2.0 * dn[i] * u[i] - dn[i] * rel[i]).sum::<f64>() - q * n[2];
            Ok([slip, form])
        };
        let mut sphere = [0.0; 2];
        for &(a, wa) in &band_nodes {
            for (th, wt) in theta_rule(a.sin()) {
                let v = sphere_point(a, th)?;
                for k in 0..2 {
                    sphere[k] += 8.0 * wa * wt * a.sin() * v[k];
                }
            }
        }
        for &(a, wa) in &segments(&[band.asin(), 0.5 * PI, PI], 16, 8) {
            let v = sphere_point(a, 0.0)?;
            for k in 0..2 {
                sphere[k] += 2.0 * PI * wa * a.sin() * v[k];
            }
        }

        // Stress flux through the lateral surface r = delta of the aperture.
        let mut lateral = 0.0;
        let top = gamma_unchecked(delta);
        for &(z, wz) in &composite_rule(0.0, top, 4, 8) {
            let d = eval.eval(0.0, delta, z);
            let a = Axi::from_psi(&d, delta);
            let q = pressure_parts(kind, &d, delta, 0.0).0;
            let flux = 2.0 * (a.ur_r * a.u_r + a.strain_rz() * a.u_z) - q * a.u_r;
            lateral += 2.0 * PI * delta * wz * flux;
        }

        Ok(Exterior {
            gradient: vol[0],
            strain: vol[1],
            l2: vol[2],
            sphere: sphere[0],
            wall,
            drag_correction: sphere[1] - lateral,
        })
    }
}

pub fn energy(regime: &SlipRegime, h: f64, spec: &QuadratureSpec) -> Result<EnergyBreakdown> {
    DragModel::new(*regime, DEFAULT_DELTA, DEFAULT_D_DELTA, DEFAULT_H_MAX, *spec)?.energy(h)
}

pub fn surface_drag(regime: &SlipRegime, h: f64, spec: &QuadratureSpec) -> Result<SurfaceDrag> {
    DragModel::new(*regime, DEFAULT_DELTA, DEFAULT_D_DELTA, DEFAULT_H_MAX, *spec)?.surface_drag(h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_synthetic_fits() {
        let h = [1e-2, 1e-3, 1e-4, 1e-5];
        let y: Vec<f64> = h.iter().map(|v: &f64| 5.0 * v.ln().abs() + 2.0).collect();
        let f = fit_points(&h, &y, ScalingModel::Log).unwrap();
        assert!((f.a - 5.0).abs() < 1e-12 && (f.b - 2.0).abs() < 1e-11 && (f.r_squared - 1.0).abs() < 1e-12);
        let y: Vec<f64> = h.iter().map(|v| 3.0 / v).collect();
        let f = fit_points(&h, &y, ScalingModel::Inverse).unwrap();
        assert!((f.a - 3.0).abs() < 1e-9 && f.b.abs() < 1e-6 && (f.r_squared - 1.0).abs() < 1e-12);
        assert!(fit_points(&h[..3], &y[..3], ScalingModel::Log).is_err());
    }

    /// Divergence theorem on the aperture: the bulk and wall terms plus the
    /// lateral flux must equal the stress pairing on the cap, computed directly.
    #[test]
    fn aperture_terms_satisfy_the_divergence_theorem() {
        let spec = QuadratureSpec::default();
        for regime in [SlipRegime::slip(1.0, 2.0).unwrap(), SlipRegime::mixed(0.5).unwrap()] {
            let m = DragModel::with_defaults(regime).unwrap();
            let kind = regime.kind();
            let delta = DEFAULT_DELTA;
            for h in [1e-2, 1e-4] {
                let q = |r: f64, d: &crate::profile::PsiDerivatives| {
                    pressure_parts(kind, d, r, radial_integral(&m.eval, h, delta, r).unwrap()).0
                };
                let n = m.surface_drag(h).unwrap();
                let [t1, t2, t3, _] = n.aperture_terms;
                let cap = integrate_surface_graded(
                    |r| {
                        let d = m.eval.eval(h, r, h + gamma_unchecked(r));
                        let a = Axi::from_psi(&d, r);
                        let nv = sphere_normal_vec(r);
                        let dn = a.strain_times(nv);
                        2.0 * (dn[0] * a.u_r + dn[1] * a.u_z) - q(r, &d) * (nv[0] * a.u_r + nv[1] * a.u_z)
                    },
                    Surface::SphereCap,
                    delta,
                    h.sqrt(),
                    &spec,
                )
                .unwrap()
                .value;
                let top = h + gamma_unchecked(delta);
                let lateral: f64 = composite_rule(0.0, top, 4, 8)
                    .iter()
                    .map(|&(z, w)| {
                        let d = m.eval.eval(h, delta, z);
                        let a = Axi::from_psi(&d, delta);
                        2.0 * PI * delta * w * (2.0 * (a.ur_r * a.u_r + a.strain_rz() * a.u_z) - q(delta, &d) * a.u_r)
                    })
                    .sum();
                let lhs = t1 + t2 + t3;
                let rhs = cap + lateral;
                assert!((lhs - rhs).abs() < 1e-6 * lhs.abs().max(1.0), "{regime:?} h={h}: {lhs} vs {rhs}");
            }
        }
    }

    #[test]
    fn no_slip_has_no_relaxed_field() {
        assert!(matches!(
            DragModel::with_defaults(SlipRegime::NoSlip),
            Err(Error::Unsupported(_))
        ));
    }
}
