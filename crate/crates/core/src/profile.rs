//! Cubic vertical profiles and the aperture stream function.
//!
//! In the gap the stream function is `Psi(r, z) = Phi(r, z / H(r))` with
//! `H = h + gamma_s(r)` and `Phi(t) = P1 t + P2 t^2 + P3 t^3`. Writing
//! `Psi = sum_k Q_k(H) z^k` with `Q_k = P_k / H^k` shows that `Psi` depends
//! on `r` and `h` only through `H`, so every mixed derivative follows from
//! a third-order Taylor expansion of the `Q_k` in `H` and the chain rule.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::gamma_derivatives_unchecked;

/// Boundary conditions on the sphere and on the wall.
///
/// `beta_s` and `beta_omega` are slip lengths; `f64::INFINITY` gives the
/// idealised free-slip limit on that surface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SlipRegime {
    /// Navier slip on the sphere and on the wall.
    Slip {
        #[serde(with = "slip_length")]
        beta_s: f64,
        #[serde(with = "slip_length")]
        beta_omega: f64,
    },
    /// No-slip on the sphere, Navier slip on the wall.
    Mixed {
        #[serde(with = "slip_length")]
        beta_omega: f64,
    },
    /// No-slip on both; only the classical drag law is provided.
    NoSlip,
}

/// JSON has no infinity: an infinite slip length is written as `null`.
mod slip_length {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() {
            s.serialize_none()
        } else {
            s.serialize_f64(*v)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegimeKind {
    Slip,
    Mixed,
    NoSlip,
}

impl SlipRegime {
    pub fn slip(beta_s: f64, beta_omega: f64) -> Result<Self> {
        let r = SlipRegime::Slip { beta_s, beta_omega };
        r.validate()?;
        Ok(r)
    }

    pub fn mixed(beta_omega: f64) -> Result<Self> {
        let r = SlipRegime::Mixed { beta_omega };
        r.validate()?;
        Ok(r)
    }

    pub fn kind(&self) -> RegimeKind {
        match self {
            SlipRegime::Slip { .. } => RegimeKind::Slip,
            SlipRegime::Mixed { .. } => RegimeKind::Mixed,
            SlipRegime::NoSlip => RegimeKind::NoSlip,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let check = |name: &'static str, b: f64| {
            if b > 0.0 && !b.is_nan() {
                Ok(())
            } else {
                Err(Error::Domain {
                    name,
                    value: b,
                    domain: "(0, inf]",
                })
            }
        };
        match *self {
            SlipRegime::Slip { beta_s, beta_omega } => {
                check("beta_s", beta_s)?;
                check("beta_omega", beta_omega)
            }
            SlipRegime::Mixed { beta_omega } => check("beta_omega", beta_omega),
            SlipRegime::NoSlip => Ok(()),
        }
    }

    /// True when a slip length is infinite (free slip, outside the physical model).
    pub fn is_idealized(&self) -> bool {
        match *self {
            SlipRegime::Slip { beta_s, beta_omega } => beta_s.is_infinite() || beta_omega.is_infinite(),
            SlipRegime::Mixed { beta_omega } => beta_omega.is_infinite(),
            SlipRegime::NoSlip => false,
        }
    }

    pub fn beta_omega(&self) -> Option<f64> {
        match *self {
            SlipRegime::Slip { beta_omega, .. } | SlipRegime::Mixed { beta_omega } => Some(beta_omega),
            SlipRegime::NoSlip => None,
        }
    }

    pub fn beta_s(&self) -> Option<f64> {
        match *self {
            SlipRegime::Slip { beta_s, .. } => Some(beta_s),
            _ => None,
        }
    }

    /// `(a_s, b_p)` with `alpha_S = a_s H` and `alpha_P = b_p H`.
    fn group_rates(&self) -> Result<(f64, f64)> {
        self.validate()?;
        match *self {
            SlipRegime::Slip { beta_s, beta_omega } => Ok((1.0 / beta_s + 2.0, 1.0 / beta_omega)),
            SlipRegime::Mixed { beta_omega } => Ok((f64::NAN, 1.0 / beta_omega)),
            SlipRegime::NoSlip => Err(Error::Unsupported(
                "no-slip regime has no profile; use the classical drag law".into(),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileCoefficients {
    /// `alpha_S`; absent in the mixed regime.
    pub alpha_s: Option<f64>,
    /// `alpha_P`; infinite for the no-slip limit.
    pub alpha_p: f64,
    pub p: [f64; 3],
}

impl ProfileCoefficients {
    pub fn slip_from_groups(alpha_s: f64, alpha_p: f64) -> Result<Self> {
        for (name, a) in [("alpha_s", alpha_s), ("alpha_p", alpha_p)] {
            if !(a >= 0.0 && a.is_finite()) {
                return Err(Error::Domain {
                    name,
                    value: a,
                    domain: "[0, inf)",
                });
            }
        }
        let d = 12.0 + 4.0 * (alpha_s + alpha_p) + alpha_s * alpha_p;
        Ok(ProfileCoefficients {
            alpha_s: Some(alpha_s),
            alpha_p,
            p: [
                6.0 * (2.0 + alpha_s) / d,
                3.0 * (2.0 + alpha_s) * alpha_p / d,
                -2.0 * (alpha_s + alpha_s * alpha_p + alpha_p) / d,
            ],
        })
    }

    /// Mixed-regime coefficients; `alpha_p = inf` gives the no-slip profile `3t^2 - 2t^3`.
    pub fn mixed_from_group(alpha_p: f64) -> Result<Self> {
        if !(alpha_p >= 0.0) {
            return Err(Error::Domain {
                name: "alpha_p",
                value: alpha_p,
                domain: "[0, inf]",
            });
        }
        let p = if alpha_p.is_infinite() {
            [0.0, 3.0, -2.0]
        } else {
            let d = 4.0 + alpha_p;
            [6.0 / d, 3.0 * alpha_p / d, -2.0 * (1.0 + alpha_p) / d]
        };
        Ok(ProfileCoefficients {
            alpha_s: None,
            alpha_p,
            p,
        })
    }

    pub fn phi(&self, t: f64) -> f64 {
        t * (self.p[0] + t * (self.p[1] + t * self.p[2]))
    }

    pub fn phi_t(&self, t: f64) -> f64 {
        self.p[0] + t * (2.0 * self.p[1] + 3.0 * t * self.p[2])
    }

    pub fn phi_tt(&self, t: f64) -> f64 {
        2.0 * self.p[1] + 6.0 * t * self.p[2]
    }

    /// Residuals of `Phi(0) = 0`, `Phi(1) = 1`, the wall condition and the
    /// sphere condition, each scaled to be O(1) for large groups.
    pub fn constraint_residuals(&self) -> [f64; 4] {
        let [p1, p2, p3] = self.p;
        let wall = if self.alpha_p.is_infinite() {
            p1
        } else {
            (2.0 * p2 - self.alpha_p * p1) / (1.0 + self.alpha_p)
        };
        let top_slope = p1 + 2.0 * p2 + 3.0 * p3;
        let sphere = match self.alpha_s {
            Some(a) => (2.0 * p2 + 6.0 * p3 + a * top_slope) / (1.0 + a),
            None => top_slope,
        };
        [self.phi(0.0), p1 + p2 + p3 - 1.0, wall, sphere]
    }
}

/// Profile coefficients at radius `r` of the gap of height `h + gamma_s(r)`.
pub fn coefficients(regime: &SlipRegime, h: f64, r: f64) -> Result<ProfileCoefficients> {
    let (a_s, b_p) = regime.group_rates()?;
    check_point(h, r)?;
    let gap = h + gamma_derivatives_unchecked(r)[0];
    match regime {
        SlipRegime::Slip { .. } => ProfileCoefficients::slip_from_groups(a_s * gap, b_p * gap),
        _ => ProfileCoefficients::mixed_from_group(b_p * gap),
    }
}

fn check_point(h: f64, r: f64) -> Result<()> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::Domain {
            name: "h",
            value: h,
            domain: "(0, inf)",
        });
    }
    if !(0.0..1.0).contains(&r) {
        return Err(Error::Domain {
            name: "r",
            value: r,
            domain: "[0, 1)",
        });
    }
    Ok(())
}

/// Truncated Taylor series `c0 + c1 e + c2 e^2 + c3 e^3`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Taylor([f64; 4]);

impl Taylor {
    fn constant(c: f64) -> Self {
        Taylor([c, 0.0, 0.0, 0.0])
    }

    fn variable(x: f64) -> Self {
        Taylor([x, 1.0, 0.0, 0.0])
    }

    fn add(self, o: Taylor) -> Self {
        let (a, b) = (self.0, o.0);
        Taylor([a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]])
    }

    fn scale(self, c: f64) -> Self {
        let a = self.0;
        Taylor([c * a[0], c * a[1], c * a[2], c * a[3]])
    }

    fn mul(self, o: Taylor) -> Self {
        let (a, b) = (self.0, o.0);
        Taylor([
            a[0] * b[0],
            a[0] * b[1] + a[1] * b[0],
            a[0] * b[2] + a[1] * b[1] + a[2] * b[0],
            a[0] * b[3] + a[1] * b[2] + a[2] * b[1] + a[3] * b[0],
        ])
    }

    fn div(self, o: Taylor) -> Self {
        let (a, b) = (self.0, o.0);
        let mut q = [0.0; 4];
        for k in 0..4 {
            let mut s = a[k];
            for j in 0..k {
                s -= q[j] * b[k - j];
            }
            q[k] = s / b[0];
        }
        Taylor(q)
    }

    /// `k`-th derivative at the expansion point.
    fn derivative(&self, k: usize) -> f64 {
        const FACT: [f64; 4] = [1.0, 1.0, 2.0, 6.0];
        self.0[k] * FACT[k]
    }
}

/// Partial derivatives of `Psi` needed by the field, pressure and residuals.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PsiDerivatives {
    pub psi: f64,
    pub r: f64,
    pub z: f64,
    pub rr: f64,
    pub rz: f64,
    pub zz: f64,
    pub rrr: f64,
    pub rrz: f64,
    pub rzz: f64,
    pub zzz: f64,
    pub h: f64,
    pub rh: f64,
    pub zh: f64,
    pub rrh: f64,
    pub zzh: f64,
    pub rzh: f64,
}

impl PsiDerivatives {
    /// `Psi_r / r`, continuous at the axis.
    pub fn r_over_r(&self, r: f64) -> f64 {
        if r > 1e-8 {
            self.r / r
        } else {
            self.rr
        }
    }
}

/// Fast evaluator for one regime, with inputs already validated.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ProfileEval {
    kind: RegimeKind,
    a_s: f64,
    b_p: f64,
}

impl ProfileEval {
    pub(crate) fn new(regime: &SlipRegime) -> Result<Self> {
        let (a_s, b_p) = regime.group_rates()?;
        Ok(ProfileEval {
            kind: regime.kind(),
            a_s,
            b_p,
        })
    }

    /// `Q_1, Q_2, Q_3` as Taylor series in `H` around `gap`.
    fn q_series(&self, gap: f64) -> [Taylor; 3] {
        let hh = Taylor::variable(gap);
        let one = Taylor::constant(1.0);
        match self.kind {
            RegimeKind::Slip => {
                let (a, b) = (self.a_s, self.b_p);
                // Delta = 12 + 4 (a + b) H + a b H^2
                let d = Taylor::constant(12.0)
                    .add(hh.scale(4.0 * (a + b)))
                    .add(hh.mul(hh).scale(a * b));
                let two_plus = Taylor::constant(2.0).add(hh.scale(a));
                let dh = d.mul(hh);
                let q1 = two_plus.scale(6.0).div(dh);
                let q2 = two_plus.scale(3.0 * b).div(dh);
                let q3 = Taylor::constant(a + b)
                    .add(hh.scale(a * b))
                    .scale(-2.0)
                    .div(dh.mul(hh));
                [q1, q2, q3]
            }
            _ => {
                let b = self.b_p;
                if b.is_infinite() {
                    let h2 = hh.mul(hh);
                    return [
                        Taylor::constant(0.0),
                        Taylor::constant(3.0).div(h2),
                        Taylor::constant(-2.0).div(h2.mul(hh)),
                    ];
                }
                let d = Taylor::constant(4.0).add(hh.scale(b)).mul(hh);
                let q1 = Taylor::constant(6.0).div(d);
                let q2 = Taylor::constant(3.0 * b).div(d);
                let q3 = one.add(hh.scale(b)).scale(-2.0).div(d.mul(hh).mul(hh));
                [q1, q2, q3]
            }
        }
    }

    pub(crate) fn gap(&self, h: f64, r: f64) -> f64 {
        h + gamma_derivatives_unchecked(r)[0]
    }

    pub(crate) fn eval(&self, h: f64, r: f64, z: f64) -> PsiDerivatives {
        let gd = gamma_derivatives_unchecked(r);
        let gap = h + gd[0];
        let q = self.q_series(gap);
        // g[a][b] = d^a/dH^a d^b/dz^b G(H, z)
        let mut g = [[0.0f64; 4]; 4];
        let zp = [1.0, z, z * z, z * z * z];
        for (a, row) in g.iter_mut().enumerate() {
            for (b, cell) in row.iter_mut().enumerate().take(4 - a) {
                let mut s = 0.0;
                for k in 1..=3usize {
                    if k < b {
                        continue;
                    }
                    let falling = (k + 1 - b..=k).fold(1.0, |acc, m| acc * m as f64);
                    s += q[k - 1].derivative(a) * falling * zp[k - b];
                }
                *cell = s;
            }
        }
        let (h1, h2, h3) = (gd[1], gd[2], gd[3]);
        PsiDerivatives {
            psi: g[0][0],
            r: g[1][0] * h1,
            z: g[0][1],
            rr: g[2][0] * h1 * h1 + g[1][0] * h2,
            rz: g[1][1] * h1,
            zz: g[0][2],
            rrr: g[3][0] * h1 * h1 * h1 + 3.0 * g[2][0] * h1 * h2 + g[1][0] * h3,
            rrz: g[2][1] * h1 * h1 + g[1][1] * h2,
            rzz: g[1][2] * h1,
            zzz: g[0][3],
            h: g[1][0],
            rh: g[2][0] * h1,
            zh: g[1][1],
            rrh: g[3][0] * h1 * h1 + g[2][0] * h2,
            zzh: g[1][2],
            rzh: g[2][1] * h1,
        }
    }

    /// `Psi_zzz`, which does not depend on `z`.
    pub(crate) fn psi_zzz(&self, h: f64, r: f64) -> f64 {
        let gap = self.gap(h, r);
        6.0 * self.q_series(gap)[2].0[0]
    }

    /// Antiderivatives in `z` of `Psi_h` and `Psi_rh` from `z` to the top of the gap.
    pub(crate) fn h_column_integrals(&self, h: f64, r: f64, z: f64) -> (f64, f64) {
        let gd = gamma_derivatives_unchecked(r);
        let gap = h + gd[0];
        let q = self.q_series(gap);
        let (mut ih, mut irh) = (0.0, 0.0);
        for (k, qk) in q.iter().enumerate() {
            let p = (k + 2) as i32;
            let span = (gap.powi(p) - z.powi(p)) / p as f64;
            ih += qk.derivative(1) * span;
            irh += qk.derivative(2) * gd[1] * span;
        }
        (ih, irh)
    }
}

/// Stream function and derivatives at `(r, z)` of the gap with minimal height `h`.
pub fn psi(regime: &SlipRegime, h: f64, r: f64, z: f64) -> Result<PsiDerivatives> {
    let eval = ProfileEval::new(regime)?;
    check_point(h, r)?;
    let gap = eval.gap(h, r);
    if !(z >= 0.0 && z <= gap * (1.0 + 1e-12)) {
        return Err(Error::Domain {
            name: "z",
            value: z,
            domain: "[0, h + gamma_s(r)]",
        });
    }
    Ok(eval.eval(h, r, z))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn slip() -> SlipRegime {
        SlipRegime::slip(1.0, 1.0).unwrap()
    }

    fn mixed() -> SlipRegime {
        SlipRegime::mixed(1.0).unwrap()
    }

    #[test]
    fn formal_limits() {
        let c = ProfileCoefficients::slip_from_groups(0.0, 0.0).unwrap();
        assert_eq!(c.p, [1.0, 0.0, 0.0]);
        let m = ProfileCoefficients::mixed_from_group(f64::INFINITY).unwrap();
        assert_eq!(m.p, [0.0, 3.0, -2.0]);
        let big = ProfileCoefficients::mixed_from_group(1e12).unwrap();
        for k in 0..3 {
            assert!((big.p[k] - m.p[k]).abs() < 1e-10);
        }
    }

    #[test]
    fn no_slip_is_unsupported() {
        assert!(matches!(
            coefficients(&SlipRegime::NoSlip, 1e-3, 0.1),
            Err(Error::Unsupported(_))
        ));
        assert!(psi(&SlipRegime::NoSlip, 1e-3, 0.1, 0.0).is_err());
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(SlipRegime::slip(0.0, 1.0).is_err());
        assert!(SlipRegime::mixed(-1.0).is_err());
        assert!(coefficients(&slip(), 0.0, 0.1).is_err());
        assert!(coefficients(&slip(), 1e-3, 1.0).is_err());
        assert!(psi(&slip(), 1e-3, 0.1, 1.0).is_err());
    }

    #[test]
    fn slip_coefficients_satisfy_the_boundary_identities() {
        let c = coefficients(&slip(), 1e-3, 0.1).unwrap();
        let [p1, p2, p3] = c.p;
        let (a_s, a_p) = (c.alpha_s.unwrap(), c.alpha_p);
        assert!((p1 + p2 + p3 - 1.0).abs() < 1e-15);
        assert!((2.0 * p2 - a_p * p1).abs() < 1e-15);
        assert!((2.0 * p2 + 6.0 * p3 + a_s * (p1 + 2.0 * p2 + 3.0 * p3)).abs() < 1e-14);
    }

    #[test]
    fn mixed_coefficients_satisfy_the_boundary_identities() {
        let c = coefficients(&mixed(), 1e-3, 0.1).unwrap();
        let [p1, p2, p3] = c.p;
        assert!((p1 + p2 + p3 - 1.0).abs() < 1e-15);
        assert!((2.0 * p2 - c.alpha_p * p1).abs() < 1e-15);
        assert!((p1 + 2.0 * p2 + 3.0 * p3).abs() < 1e-15);
    }

    #[test]
    fn psi_agrees_with_the_profile_form() {
        for regime in [slip(), mixed()] {
            let (h, r) = (1e-3, 0.07);
            let c = coefficients(&regime, h, r).unwrap();
            let gap = h + crate::geometry::gamma_s(r).unwrap();
            for &t in &[0.0, 0.3, 1.0] {
                let d = psi(&regime, h, r, t * gap).unwrap();
                assert!((d.psi - c.phi(t)).abs() < 1e-14);
                assert!((d.z * gap - c.phi_t(t)).abs() < 1e-12);
                assert!((d.zz * gap * gap - c.phi_tt(t)).abs() < 1e-10);
            }
        }
    }

    fn fd_check(regime: SlipRegime, h: f64, r: f64, z: f64) {
        let ev = ProfileEval::new(&regime).unwrap();
        let d = ev.eval(h, r, z);
        let er = 1e-5 * r;
        let ez = 1e-5 * ev.gap(h, r);
        let eh = 1e-5 * h;
        let cr = |f: &dyn Fn(&PsiDerivatives) -> f64| {
            (f(&ev.eval(h, r + er, z)) - f(&ev.eval(h, r - er, z))) / (2.0 * er)
        };
        let cz = |f: &dyn Fn(&PsiDerivatives) -> f64| {
            (f(&ev.eval(h, r, z + ez)) - f(&ev.eval(h, r, z - ez))) / (2.0 * ez)
        };
        let ch = |f: &dyn Fn(&PsiDerivatives) -> f64| {
            (f(&ev.eval(h + eh, r, z)) - f(&ev.eval(h - eh, r, z))) / (2.0 * eh)
        };
        let close = |name: &str, a: f64, b: f64| {
            assert!((a - b).abs() <= 1e-6 * (1.0 + b.abs()), "{name}: fd {a} vs {b}");
        };
        close("r", cr(&|p| p.psi), d.r);
        close("z", cz(&|p| p.psi), d.z);
        close("rr", cr(&|p| p.r), d.rr);
        close("rz", cz(&|p| p.r), d.rz);
        close("zz", cz(&|p| p.z), d.zz);
        close("rrr", cr(&|p| p.rr), d.rrr);
        close("rrz", cz(&|p| p.rr), d.rrz);
        close("rzz", cr(&|p| p.zz), d.rzz);
        close("zzz", cz(&|p| p.zz), d.zzz);
        close("h", ch(&|p| p.psi), d.h);
        close("rh", ch(&|p| p.r), d.rh);
        close("zh", ch(&|p| p.z), d.zh);
        close("rrh", ch(&|p| p.rr), d.rrh);
        close("zzh", ch(&|p| p.zz), d.zzh);
        close("rzh", ch(&|p| p.rz), d.rzh);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        for regime in [slip(), mixed(), SlipRegime::slip(0.3, 2.5).unwrap()] {
            for &(h, r, t) in &[(1e-2, 0.15, 0.4), (1e-4, 0.01, 0.7), (1e-3, 0.05, 0.1)] {
                let z = t * (h + crate::geometry::gamma_s(r).unwrap());
                fd_check(regime, h, r, z);
            }
        }
    }

    #[test]
    fn column_integrals_match_quadrature() {
        let ev = ProfileEval::new(&slip()).unwrap();
        let (h, r) = (1e-3, 0.04);
        let gap = ev.gap(h, r);
        let z0 = 0.25 * gap;
        let (ih, irh) = ev.h_column_integrals(h, r, z0);
        let n = 2000;
        let (mut sh, mut srh) = (0.0, 0.0);
        for i in 0..n {
            let z = z0 + (gap - z0) * (i as f64 + 0.5) / n as f64;
            let d = ev.eval(h, r, z);
            sh += d.h;
            srh += d.rh;
        }
        let w = (gap - z0) / n as f64;
        assert!((sh * w - ih).abs() < 1e-6 * ih.abs());
        assert!((srh * w - irh).abs() < 1e-6 * irh.abs());
    }

    #[test]
    fn top_and_bottom_values() {
        for regime in [slip(), mixed()] {
            let (h, r) = (1e-5, 0.003);
            let gap = h + crate::geometry::gamma_s(r).unwrap();
            let ev = ProfileEval::new(&regime).unwrap();
            assert!(ev.eval(h, r, 0.0).psi.abs() < 1e-15);
            assert!((ev.eval(h, r, gap).psi - 1.0).abs() < 1e-12);
            // Psi is constant along the sphere, so its h-derivative cancels the z-derivative there.
            let top = ev.eval(h, r, gap);
            assert!((top.h + top.z).abs() < 1e-9 / gap);
        }
    }
}
