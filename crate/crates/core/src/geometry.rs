//! Sphere-over-wall geometry: gap profile, normals, surface measures and
//! the two smooth cutoffs used to glue the aperture field to the far field.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::Jet;

pub const DEFAULT_DELTA: f64 = 0.2;
pub const DEFAULT_D_DELTA: f64 = 4.0;
pub const DEFAULT_H_MAX: f64 = 0.5;

/// Aperture radii must stay below this bound.
pub const MAX_DELTA: f64 = 0.25;

/// A sphere of unit radius centred at `(0, 0, 1 + h)` above the plane `z = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapGeometry {
    pub h: f64,
    pub delta: f64,
    pub d_delta: f64,
    pub h_max: f64,
}

impl GapGeometry {
    pub fn new(h: f64, delta: f64, d_delta: f64, h_max: f64) -> Result<Self> {
        check_shape(delta, d_delta, h_max)?;
        if !(h > 0.0 && h < h_max) {
            return Err(Error::Domain {
                name: "h",
                value: h,
                domain: "(0, h_max)",
            });
        }
        Ok(GapGeometry {
            h,
            delta,
            d_delta,
            h_max,
        })
    }

    pub fn with_defaults(h: f64) -> Result<Self> {
        Self::new(h, DEFAULT_DELTA, DEFAULT_D_DELTA, DEFAULT_H_MAX)
    }

    pub fn center_height(&self) -> f64 {
        1.0 + self.h
    }

    /// Gap height `h + gamma_s(r)`.
    pub fn gap(&self, r: f64) -> Result<f64> {
        Ok(self.h + gamma_s(r)?)
    }

    /// Signed distance from `x` to the sphere surface (negative inside).
    pub fn sphere_distance(&self, x: [f64; 3]) -> f64 {
        let dz = x[2] - self.center_height();
        (x[0] * x[0] + x[1] * x[1] + dz * dz).sqrt() - 1.0
    }

    /// Whether `x` lies in the fluid domain (above the wall, outside the ball).
    pub fn in_fluid(&self, x: [f64; 3]) -> bool {
        x[2] >= 0.0 && self.sphere_distance(x) >= 0.0
    }

    /// Whether `x` lies in the aperture `{r < delta, 0 < z < h + gamma_s(r)}`.
    pub fn in_aperture(&self, r: f64, z: f64) -> bool {
        r >= 0.0 && r < self.delta && z >= 0.0 && z <= self.h + gamma_unchecked(r)
    }

    pub fn cutoffs(&self, x: [f64; 3]) -> CutoffPair {
        let [a, b, c] = Jet::coordinates(x);
        let chi = cube_cutoff(a, self.delta) * cube_cutoff(b, self.delta) * cube_cutoff(c, self.delta);
        let dz = c - self.center_height();
        let rho = (a * a + b * b + dz * dz).sqrt() - 1.0;
        let phi_bump = if rho.v <= 0.0 {
            Jet::constant(1.0)
        } else {
            fall_off(rho * (1.0 / self.d_delta))
        };
        CutoffPair { chi, phi_bump }
    }
}

pub fn check_shape(delta: f64, d_delta: f64, h_max: f64) -> Result<()> {
    if !(delta > 0.0 && delta < MAX_DELTA) {
        return Err(Error::Domain {
            name: "delta",
            value: delta,
            domain: "(0, 0.25)",
        });
    }
    if !(d_delta > 0.0 && d_delta.is_finite()) {
        return Err(Error::Domain {
            name: "d_delta",
            value: d_delta,
            domain: "(0, inf)",
        });
    }
    if !(h_max > 0.0 && h_max <= 1.0) {
        return Err(Error::Domain {
            name: "h_max",
            value: h_max,
            domain: "(0, 1]",
        });
    }
    Ok(())
}

/// Aperture cutoff `chi` (1 on the inner cube) and far-field profile
/// `phi_bump` (1 on the sphere, 0 at distance `d_delta`), with derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffPair {
    pub chi: Jet,
    pub phi_bump: Jet,
}

fn check_r(r: f64) -> Result<()> {
    if (0.0..1.0).contains(&r) {
        Ok(())
    } else {
        Err(Error::Domain {
            name: "r",
            value: r,
            domain: "[0, 1)",
        })
    }
}

pub(crate) fn gamma_unchecked(r: f64) -> f64 {
    let r2 = r * r;
    r2 / (1.0 + (1.0 - r2).sqrt())
}

/// Lower sphere surface height `1 - sqrt(1 - r^2)` above its lowest point.
pub fn gamma_s(r: f64) -> Result<f64> {
    check_r(r)?;
    Ok(gamma_unchecked(r))
}

/// `gamma_s` and its first three derivatives.
pub fn gamma_derivatives(r: f64) -> Result<[f64; 4]> {
    check_r(r)?;
    Ok(gamma_derivatives_unchecked(r))
}

pub(crate) fn gamma_derivatives_unchecked(r: f64) -> [f64; 4] {
    let s2 = 1.0 - r * r;
    let s = s2.sqrt();
    [
        gamma_unchecked(r),
        r / s,
        1.0 / (s2 * s),
        3.0 * r / (s2 * s2 * s),
    ]
}

/// Outward unit normal of the ball at its lower surface point above radius `r`,
/// as `(e_r, e_z)` components pointing into the fluid gap.
pub fn sphere_normal(r: f64) -> Result<[f64; 2]> {
    check_r(r)?;
    Ok([-r, (1.0 - r * r).sqrt()])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Surface {
    SphereCap,
    Plane,
}

/// Area density with respect to `dr dtheta`.
pub fn surface_measure(surface: Surface, r: f64) -> Result<f64> {
    match surface {
        Surface::Plane => {
            if r >= 0.0 && r.is_finite() {
                Ok(r)
            } else {
                Err(Error::Domain {
                    name: "r",
                    value: r,
                    domain: "[0, inf)",
                })
            }
        }
        Surface::SphereCap => {
            check_r(r)?;
            Ok(r / (1.0 - r * r).sqrt())
        }
    }
}

/// Quintic smoothstep on `[0, 1]` with its first two derivatives.
pub fn smoothstep(s: f64) -> [f64; 3] {
    if s <= 0.0 {
        [0.0; 3]
    } else if s >= 1.0 {
        [1.0, 0.0, 0.0]
    } else {
        let s2 = s * s;
        [
            s2 * s * (10.0 - 15.0 * s + 6.0 * s2),
            30.0 * s2 * (1.0 - s) * (1.0 - s),
            60.0 * s * (1.0 - s) * (1.0 - 2.0 * s),
        ]
    }
}

/// `1 - smoothstep(s)` lifted to jets.
fn fall_off(s: Jet) -> Jet {
    let [f, f1, f2] = smoothstep(s.v);
    s.compose(1.0 - f, -f1, -f2)
}

/// One-dimensional factor of the cube cutoff: 1 on `|x| <= delta`, 0 on `|x| >= 2 delta`.
fn cube_cutoff(x: Jet, delta: f64) -> Jet {
    let a = x.v.abs();
    if a <= delta {
        return Jet::constant(1.0);
    }
    if a >= 2.0 * delta {
        return Jet::ZERO;
    }
    let sign = x.v.signum();
    fall_off((x * sign - delta) * (1.0 / delta))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_matches_closed_form_values() {
        assert_eq!(gamma_s(0.0).unwrap(), 0.0);
        assert!((gamma_s(0.6).unwrap() - 0.2).abs() < 1e-15);
        assert!(gamma_s(1.0).is_err());
        assert!(gamma_s(-0.1).is_err());
        let small = gamma_s(1e-9).unwrap();
        assert!((small - 0.5e-18).abs() < 1e-30);
    }

    #[test]
    fn gamma_derivatives_match_central_differences() {
        for &r in &[0.05, 0.2, 0.5, 0.8] {
            let d = gamma_derivatives(r).unwrap();
            let e = 1e-5;
            for k in 0..3 {
                let p = gamma_derivatives(r + e).unwrap()[k];
                let m = gamma_derivatives(r - e).unwrap()[k];
                let fd = (p - m) / (2.0 * e);
                assert!((fd - d[k + 1]).abs() < 1e-7 * (1.0 + d[k + 1].abs()), "r={r} k={k}");
            }
        }
    }

    #[test]
    fn normal_is_unit_and_orthogonal_to_the_profile() {
        let n = sphere_normal(0.6).unwrap();
        assert!((n[0] + 0.6).abs() < 1e-15 && (n[1] - 0.8).abs() < 1e-15);
        let slope = gamma_derivatives(0.6).unwrap()[1];
        assert!((n[0] + slope * n[1]).abs() < 1e-15);
    }

    #[test]
    fn surface_measures() {
        assert_eq!(surface_measure(Surface::Plane, 0.3).unwrap(), 0.3);
        assert!((surface_measure(Surface::SphereCap, 0.6).unwrap() - 0.75).abs() < 1e-15);
        assert!(surface_measure(Surface::SphereCap, 1.0).is_err());
    }

    #[test]
    fn smoothstep_is_c2_at_both_ends() {
        let e = 1e-7;
        let lo = smoothstep(e);
        let hi = smoothstep(1.0 - e);
        assert!(lo[0] < 1e-18 && lo[1] < 1e-11 && lo[2] < 1e-4);
        assert!(1.0 - hi[0] < 1e-18 && hi[1] < 1e-11 && hi[2].abs() < 1e-4);
    }

    #[test]
    fn cutoffs_take_their_plateau_values() {
        let g = GapGeometry::with_defaults(1e-3).unwrap();
        let inner = g.cutoffs([0.1, -0.1, 0.05]);
        assert_eq!(inner.chi.v, 1.0);
        assert_eq!(inner.chi.g, [0.0; 3]);
        let outer = g.cutoffs([0.45, 0.0, 0.05]);
        assert_eq!(outer.chi.v, 0.0);
        let far = g.cutoffs([1.0 + g.d_delta + 0.5, 0.0, 0.0]);
        assert_eq!(far.phi_bump.v, 0.0);
        let on_sphere = g.cutoffs([0.6, 0.0, 1.0 + g.h - 0.8]);
        assert!((on_sphere.phi_bump.v - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_geometry() {
        assert!(GapGeometry::with_defaults(0.0).is_err());
        assert!(GapGeometry::with_defaults(0.6).is_err());
        assert!(GapGeometry::new(1e-3, 0.0, 4.0, 0.5).is_err());
        assert!(GapGeometry::new(1e-3, 0.2, -1.0, 0.5).is_err());
    }
}
