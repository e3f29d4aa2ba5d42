//! Uniform-in-`h` envelopes of the aperture field: weighted derivative
//! sups, residual bounds, boundary residual norms and `h`-derivative norms.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::drag::DragModel;
use crate::error::Result;
use crate::field::{residual_from, sphere_normal_vec, sphere_tangential, Axi};
use crate::geometry::{gamma_unchecked, Surface};
use crate::profile::RegimeKind;
use crate::quadrature::{integrate_gap, integrate_surface_graded};

/// Points per direction of the sampling grid.
pub const GRID: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeReport {
    pub h: f64,
    /// Weighted sups of `Psi` derivatives, keyed by derivative.
    pub psi_sups: BTreeMap<String, f64>,
    /// `max |Psi_rz + r Psi_z / H| H / r` (slip only).
    pub cancellation: Option<f64>,
    /// `max |f_r| H^2 / r`
    pub residual_r: f64,
    /// `max |f_z| H`
    pub residual_z: f64,
    /// L2 norm of the sphere tangential Navier residual over the cap.
    pub sphere_tangential_l2: f64,
    /// `||phi_h||` over the whole fluid domain.
    pub velocity_l2: f64,
    /// `|| int_z^H d_h phi ds ||` over the aperture.
    pub dh_interior: f64,
    /// Same quantity traced on the wall disk.
    pub dh_wall: f64,
}

impl EnvelopeReport {
    /// All monitored quantities as `(name, value)`.
    pub fn quantities(&self) -> Vec<(String, f64)> {
        let mut out: Vec<(String, f64)> = self.psi_sups.iter().map(|(k, v)| (k.clone(), *v)).collect();
        if let Some(c) = self.cancellation {
            out.push(("cancellation".into(), c));
        }
        out.push(("residual_r".into(), self.residual_r));
        out.push(("residual_z".into(), self.residual_z));
        out.push(("sphere_tangential_l2".into(), self.sphere_tangential_l2));
        out.push(("velocity_l2".into(), self.velocity_l2));
        out.push(("dh_interior".into(), self.dh_interior));
        out
    }
}

/// `max / min` of a positive series; values below `floor` count as `floor`.
pub fn spread(values: &[f64], floor: f64) -> f64 {
    let hi = values.iter().fold(floor, |m, &v| m.max(v.abs()));
    let lo = values.iter().fold(f64::INFINITY, |m, &v| m.min(v.abs().max(floor)));
    hi / lo
}

/// Spread of every monitored quantity across a sweep.
pub fn sweep_spreads(reports: &[EnvelopeReport]) -> BTreeMap<String, f64> {
    let mut columns: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for r in reports {
        for (k, v) in r.quantities() {
            columns.entry(k).or_default().push(v);
        }
    }
    columns.into_iter().map(|(k, v)| (k, spread(&v, 1e-12))).collect()
}

pub fn envelopes(model: &DragModel, h: f64) -> Result<EnvelopeReport> {
    let energy = model.energy(h)?;
    let eval = model.eval();
    let kind = model.regime().kind();
    let delta = model.delta();
    let spec = model.spec();

    let slip = kind == RegimeKind::Slip;
    // (name, gap power, divide by r) per regime's derivative bound table.
    let table: &[(&str, i32, bool)] = if slip {
        &[
            ("psi_z", 1, false),
            ("psi_r", 1, true),
            ("psi_zz", 1, false),
            ("psi_rr", 1, false),
            ("psi_zzz", 2, false),
            ("psi_rrz", 2, false),
            ("psi_rzz", 2, true),
        ]
    } else {
        &[
            ("psi_z", 1, false),
            ("psi_r", 1, true),
            ("psi_rr", 1, false),
            ("psi_zz", 2, false),
            ("psi_rz", 2, true),
            ("psi_zzz", 3, false),
            ("psi_rrz", 2, false),
            ("psi_rzz", 3, true),
        ]
    };
    let pick = |d: &crate::profile::PsiDerivatives, name: &str| match name {
        "psi_z" => d.z,
        "psi_r" => d.r,
        "psi_zz" => d.zz,
        "psi_rr" => d.rr,
        "psi_rz" => d.rz,
        "psi_zzz" => d.zzz,
        "psi_rrz" => d.rrz,
        _ => d.rzz,
    };
    let n = table.len();
    let rows: Vec<Vec<f64>> = (0..GRID)
        .into_par_iter()
        .map(|i| {
            let r = delta * (i as f64 + 0.5) / GRID as f64;
            let gap = h + gamma_unchecked(r);
            let mut m = vec![0.0f64; n + 3];
            for j in 0..GRID {
                let z = gap * j as f64 / (GRID - 1) as f64;
                let d = eval.eval(h, r, z);
                let f = residual_from(kind, &d, r);
                for (k, &(name, p, by_r)) in table.iter().enumerate() {
                    let w = gap.powi(p) / if by_r { r } else { 1.0 };
                    m[k] = m[k].max(pick(&d, name).abs() * w);
                }
                let extra = [
                    (d.rz + r * d.z / gap).abs() * gap / r,
                    f[0].abs() * gap * gap / r,
                    f[1].abs() * gap,
                ];
                for (k, v) in extra.into_iter().enumerate() {
                    m[n + k] = m[n + k].max(v);
                }
            }
            m
        })
        .collect();
    let mut m = vec![0.0f64; n + 3];
    for row in &rows {
        for (a, b) in m.iter_mut().zip(row) {
            *a = a.max(*b);
        }
    }
    let psi_sups: BTreeMap<String, f64> = table.iter().zip(&m).map(|(t, v)| (t.0.to_string(), *v)).collect();

    let beta_s = model.regime().beta_s().unwrap_or(0.0);
    let tangential = integrate_surface_graded(
        |r| {
            let a = Axi::from_psi(&eval.eval(h, r, h + gamma_unchecked(r)), r);
            sphere_tangential(kind, beta_s, &a, sphere_normal_vec(r)).powi(2)
        },
        Surface::SphereCap,
        delta,
        h.sqrt(),
        spec,
    )?;

    let dh_vector = |r: f64, z: f64| {
        let top = h + gamma_unchecked(r);
        let (ih, irh) = eval.h_column_integrals(h, r, z);
        let radial = -0.5 * r * (eval.eval(h, r, top).h - eval.eval(h, r, z).h);
        let axial = ih + 0.5 * r * irh;
        radial * radial + axial * axial
    };
    let dh_interior = integrate_gap(dh_vector, h, delta, spec)?;
    let dh_wall = integrate_surface_graded(|r| dh_vector(r, 0.0), Surface::Plane, delta, h.sqrt(), spec)?;

    Ok(EnvelopeReport {
        h,
        psi_sups,
        cancellation: slip.then_some(m[n]),
        residual_r: m[n + 1],
        residual_z: m[n + 2],
        sphere_tangential_l2: tangential.value.max(0.0).sqrt(),
        velocity_l2: energy.l2_norm,
        dh_interior: dh_interior.value.max(0.0).sqrt(),
        dh_wall: dh_wall.value.max(0.0).sqrt(),
    })
}

pub fn envelope_sweep(model: &DragModel, h_list: &[f64]) -> Result<Vec<EnvelopeReport>> {
    h_list.iter().map(|&h| envelopes(model, h)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::SlipRegime;

    #[test]
    fn spread_handles_zeros() {
        assert_eq!(spread(&[0.0, 0.0], 1e-12), 1.0);
        assert_eq!(spread(&[2.0, 4.0, 1.0], 1e-12), 4.0);
    }

    #[test]
    fn mixed_sphere_residual_vanishes() {
        let m = DragModel::with_defaults(SlipRegime::mixed(1.0).unwrap()).unwrap();
        let e = envelopes(&m, 1e-3).unwrap();
        assert!(e.sphere_tangential_l2 < 1e-10);
        assert!(e.cancellation.is_none());
        assert!(e.psi_sups.contains_key("psi_rz"));
    }
}
