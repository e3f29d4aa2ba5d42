//! Run configuration: a flat JSON object whose keys mirror the long flags.

use clap::Args;
use serde::{Deserialize, Serialize};
use slipcontact::drag::DragColumn;
use slipcontact::dynamics::{FallParameters, OdeSpec, ScanGrid};
use slipcontact::geometry::{check_shape, DEFAULT_DELTA, DEFAULT_D_DELTA, DEFAULT_H_MAX};
use slipcontact::profile::SlipRegime;
use slipcontact::quadrature::QuadratureSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum RegimeName {
    Slip,
    Mixed,
    NoSlip,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum DragSourceName {
    Analytic,
    Table,
}

/// Every tunable of every subcommand. Slip lengths use `null` for an
/// infinite slip length (perfect slip), since JSON has no infinity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub regime: RegimeName,
    pub beta_s: Option<f64>,
    pub beta_omega: Option<f64>,
    pub delta: f64,
    pub d_delta: f64,
    pub h_max: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_depth: u32,
    pub order: usize,
    pub h: f64,
    pub h_list: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
    pub p: f64,
    pub q: f64,
    pub integral_delta: f64,
    pub h0: f64,
    pub v0: f64,
    pub t_max: f64,
    pub rho_s: f64,
    pub rho_f: f64,
    pub g: f64,
    pub mu_f: f64,
    pub kappa: f64,
    pub ode_rel_tol: f64,
    pub ode_abs_tol: f64,
    pub ode_h_max: f64,
    pub drag_source: DragSourceName,
    pub column: DragColumn,
    /// Rows with larger `h` are left out of scaling fits.
    pub fit_h_max: f64,
    /// Trajectory CSV rows kept (uniform stride, last row always kept).
    pub max_rows: usize,
    pub input: Option<String>,
    pub kappa_list: Vec<f64>,
    pub g_list: Vec<f64>,
    pub h0_list: Vec<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let q = QuadratureSpec::default();
        let ode = OdeSpec::default();
        RunConfig {
            regime: RegimeName::Slip,
            beta_s: Some(1.0),
            beta_omega: Some(1.0),
            delta: DEFAULT_DELTA,
            d_delta: DEFAULT_D_DELTA,
            h_max: DEFAULT_H_MAX,
            rel_tol: q.rel_tol,
            abs_tol: q.abs_tol,
            max_depth: q.max_depth,
            order: q.order,
            h: 1e-4,
            h_list: vec![1e-2, 1e-3, 1e-4, 1e-5, 1e-6],
            samples: 10_000,
            seed: 1,
            p: 1.0,
            q: 1.0,
            integral_delta: 0.25,
            h0: 0.25,
            v0: 0.0,
            t_max: 50.0,
            rho_s: 1.0,
            rho_f: 0.0,
            g: 1.0,
            mu_f: 1.0,
            kappa: 1.0,
            ode_rel_tol: ode.rel_tol,
            ode_abs_tol: ode.abs_tol,
            ode_h_max: ode.h_max,
            drag_source: DragSourceName::Analytic,
            column: DragColumn::Energy,
            fit_h_max: 1e-3,
            max_rows: 10_000,
            input: None,
            kappa_list: vec![0.5, 1.0, 2.0],
            g_list: vec![0.5, 1.0, 2.0],
            h0_list: vec![0.1, 0.25],
        }
    }
}

fn slip_length(v: Option<f64>) -> f64 {
    v.unwrap_or(f64::INFINITY)
}

/// Parses a slip length; `inf` means perfect slip.
fn parse_slip_length(s: &str) -> Result<f64, String> {
    match s {
        "inf" | "infinity" => Ok(f64::INFINITY),
        _ => s.parse::<f64>().map_err(|e| e.to_string()),
    }
}

impl RunConfig {
    pub fn slip_regime(&self) -> slipcontact::Result<SlipRegime> {
        let r = match self.regime {
            RegimeName::Slip => SlipRegime::Slip {
                beta_s: slip_length(self.beta_s),
                beta_omega: slip_length(self.beta_omega),
            },
            RegimeName::Mixed => SlipRegime::Mixed {
                beta_omega: slip_length(self.beta_omega),
            },
            RegimeName::NoSlip => SlipRegime::NoSlip,
        };
        r.validate()?;
        Ok(r)
    }

    pub fn quadrature(&self) -> QuadratureSpec {
        QuadratureSpec {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            max_depth: self.max_depth,
            order: self.order,
        }
    }

    pub fn ode(&self) -> OdeSpec {
        OdeSpec {
            rel_tol: self.ode_rel_tol,
            abs_tol: self.ode_abs_tol,
            t_max: self.t_max,
            h_max: self.ode_h_max,
            ..OdeSpec::default()
        }
    }

    pub fn fall(&self) -> FallParameters {
        FallParameters {
            rho_s: self.rho_s,
            rho_f: self.rho_f,
            g: self.g,
            mu_f: self.mu_f,
            kappa: self.kappa,
        }
    }

    pub fn scan_grid(&self) -> ScanGrid {
        ScanGrid {
            kappa: self.kappa_list.clone(),
            g: self.g_list.clone(),
            h0: self.h0_list.clone(),
        }
    }

    /// Checks every invariant the subcommands rely on, before any computation.
    pub fn validate(&self) -> slipcontact::Result<()> {
        self.slip_regime()?;
        check_shape(self.delta, self.d_delta, self.h_max)?;
        self.quadrature().validate()?;
        self.ode().validate()?;
        self.fall().validate()?;
        let bad = |what: &str| Err(slipcontact::Error::InvalidConfig(what.to_string()));
        if !(self.h > 0.0 && self.h < self.h_max) {
            return bad("h must lie in (0, h_max)");
        }
        if self.h_list.is_empty() || self.h_list.iter().any(|&h| !(h > 0.0 && h < self.h_max)) {
            return bad("h_list must be non-empty with every h in (0, h_max)");
        }
        if self.samples == 0 || self.max_rows < 2 {
            return bad("samples must be positive and max_rows at least 2");
        }
        if !(self.fit_h_max > 0.0) {
            return bad("fit_h_max must be positive");
        }
        if !(self.p >= 0.0 && self.q > 0.0 && self.integral_delta > 0.0) {
            return bad("integral needs p >= 0, q > 0, integral_delta > 0");
        }
        if !(self.h0 > 0.0 && self.h0 < self.ode_h_max) || !self.v0.is_finite() {
            return bad("h0 must lie in (0, ode_h_max) and v0 must be finite");
        }
        for (name, list) in [("kappa_list", &self.kappa_list), ("g_list", &self.g_list), ("h0_list", &self.h0_list)] {
            if list.is_empty() || list.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                return bad(&format!("{name} must be a non-empty list of finite non-negative values"));
            }
        }
        Ok(())
    }
}

/// Flags overriding the configuration file; each mirrors a config key.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    #[arg(long, global = true, value_enum)]
    pub regime: Option<RegimeName>,
    /// Sphere slip length (`inf` for perfect slip).
    #[arg(long, global = true, value_parser = parse_slip_length)]
    pub beta_s: Option<f64>,
    /// Wall slip length (`inf` for perfect slip).
    #[arg(long, global = true, value_parser = parse_slip_length)]
    pub beta_omega: Option<f64>,
    #[arg(long, global = true)]
    pub delta: Option<f64>,
    #[arg(long, global = true)]
    pub d_delta: Option<f64>,
    #[arg(long, global = true)]
    pub h_max: Option<f64>,
    #[arg(long, global = true)]
    pub rel_tol: Option<f64>,
    #[arg(long, global = true)]
    pub abs_tol: Option<f64>,
    #[arg(long, global = true)]
    pub max_depth: Option<u32>,
    #[arg(long, global = true)]
    pub order: Option<usize>,
    #[arg(long, global = true)]
    pub h: Option<f64>,
    #[arg(long, global = true, value_delimiter = ',')]
    pub h_list: Option<Vec<f64>>,
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub p: Option<f64>,
    #[arg(long, global = true)]
    pub q: Option<f64>,
    #[arg(long, global = true)]
    pub integral_delta: Option<f64>,
    #[arg(long, global = true)]
    pub h0: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub v0: Option<f64>,
    #[arg(long, global = true)]
    pub t_max: Option<f64>,
    #[arg(long, global = true)]
    pub rho_s: Option<f64>,
    #[arg(long, global = true)]
    pub rho_f: Option<f64>,
    #[arg(long, global = true)]
    pub g: Option<f64>,
    #[arg(long, global = true)]
    pub mu_f: Option<f64>,
    #[arg(long, global = true)]
    pub kappa: Option<f64>,
    #[arg(long, global = true)]
    pub ode_rel_tol: Option<f64>,
    #[arg(long, global = true)]
    pub ode_abs_tol: Option<f64>,
    #[arg(long, global = true)]
    pub ode_h_max: Option<f64>,
    #[arg(long, global = true, value_enum)]
    pub drag_source: Option<DragSourceName>,
    #[arg(long, global = true, value_parser = parse_column)]
    pub column: Option<DragColumn>,
    #[arg(long, global = true)]
    pub fit_h_max: Option<f64>,
    #[arg(long, global = true)]
    pub max_rows: Option<usize>,
    /// Drag curve JSON written by `drag scan`.
    #[arg(long, global = true)]
    pub input: Option<String>,
    #[arg(long, global = true, value_delimiter = ',')]
    pub kappa_list: Option<Vec<f64>>,
    #[arg(long, global = true, value_delimiter = ',')]
    pub g_list: Option<Vec<f64>>,
    #[arg(long, global = true, value_delimiter = ',')]
    pub h0_list: Option<Vec<f64>>,
}

fn parse_column(s: &str) -> Result<DragColumn, String> {
    match s {
        "energy" => Ok(DragColumn::Energy),
        "surface_drag" | "surface-drag" => Ok(DragColumn::SurfaceDrag),
        _ => Err(format!("unknown column {s:?} (energy, surface_drag)")),
    }
}

macro_rules! apply {
    ($cfg:ident, $o:ident; $($f:ident),*) => {
        $(if let Some(v) = $o.$f.clone() { $cfg.$f = v; })*
    };
}

impl Overrides {
    pub fn apply(&self, cfg: &mut RunConfig) {
        let o = self;
        apply!(cfg, o; regime, delta, d_delta, h_max, rel_tol, abs_tol, max_depth, order, h, h_list,
            samples, seed, p, q, integral_delta, h0, v0, t_max, rho_s, rho_f, g, mu_f, kappa,
            ode_rel_tol, ode_abs_tol, ode_h_max, drag_source, column, fit_h_max, max_rows, kappa_list, g_list,
            h0_list);
        for (dst, src) in [(&mut cfg.beta_s, o.beta_s), (&mut cfg.beta_omega, o.beta_omega)] {
            if let Some(b) = src {
                *dst = b.is_finite().then_some(b);
            }
        }
        if o.input.is_some() {
            cfg.input = o.input.clone();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid_and_round_trip() {
        let c = RunConfig::default();
        c.validate().unwrap();
        let text = serde_json::to_string(&c).unwrap();
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn perfect_slip_is_null() {
        let mut c = RunConfig::default();
        Overrides {
            beta_s: Some(f64::INFINITY),
            ..Default::default()
        }
        .apply(&mut c);
        assert_eq!(c.beta_s, None);
        assert!(matches!(c.slip_regime().unwrap(), SlipRegime::Slip { beta_s, .. } if beta_s.is_infinite()));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"delta": 0.2, "bogus": 1}"#).is_err());
    }

    #[test]
    fn invalid_values_fail_validation() {
        let c = RunConfig {
            delta: 0.3,
            ..RunConfig::default()
        };
        assert!(c.validate().is_err());
        let c = RunConfig {
            h_list: vec![],
            ..RunConfig::default()
        };
        assert!(c.validate().is_err());
    }
}
