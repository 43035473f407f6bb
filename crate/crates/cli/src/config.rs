//! Run configuration: the built-in Table 1 profile with a user file layered
//! on top, validated field by field and converted to library types.

use std::path::Path;

use optomech::circuit::{calibrate_xzpf, compensating_ej, CircuitParams, EjWindow, FluxWindow, TransmonBias};
use optomech::constants::hz_to_angular;
use optomech::model::Truncation;
use optomech::solvers::StepControl;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const TABLE1_PROFILE: &str = include_str!("../profiles/params_table1.toml");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub circuit: CircuitSection,
    pub bias: BiasSection,
    pub couplings: CouplingsSection,
    pub cooling: CoolingSection,
    pub cat: CatSection,
    pub wigner: WignerSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitSection {
    pub ej_max_mech_hz: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ej_transmon_hz: Option<f64>,
    pub ec_hz: f64,
    pub asym: f64,
    pub flux_mech: f64,
    pub b_field_t: f64,
    pub beam_length_m: f64,
    pub beta0: f64,
    pub omega_m_hz: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_zpf_m: Option<f64>,
    pub q_mech: f64,
    pub t1_s: f64,
    pub t2_s: f64,
    pub n_th_mech: f64,
    pub n_th_transmon: f64,
    pub geometric_inductance_h: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BiasSection {
    pub omega_t_hz: f64,
    pub ej_min_hz: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ej_max_hz: Option<f64>,
    pub g0_max_hz: f64,
    pub calibration_flux: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingsSection {
    pub flux_min: f64,
    pub flux_max: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoolingSection {
    pub n_t: usize,
    pub n_m: usize,
    pub drive_hz: f64,
    pub delta_min: f64,
    pub delta_max: f64,
    pub delta_points: usize,
    pub g_over_wm: Vec<f64>,
    pub fluxes: Vec<f64>,
    pub drive_sweep: DriveSweepSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveSweepSection {
    pub enabled: bool,
    pub amp_min_hz: f64,
    pub amp_max_hz: f64,
    pub points: usize,
    pub g_over_wm: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CatVariant {
    IdealClosed,
    IdealDissipative,
    ThermalClosed,
    ThermalDissipative,
}

impl CatVariant {
    pub fn name(self) -> &'static str {
        match self {
            CatVariant::IdealClosed => "ideal_closed",
            CatVariant::IdealDissipative => "ideal_dissipative",
            CatVariant::ThermalClosed => "thermal_closed",
            CatVariant::ThermalDissipative => "thermal_dissipative",
        }
    }

    pub fn thermal(self) -> bool {
        matches!(self, CatVariant::ThermalClosed | CatVariant::ThermalDissipative)
    }

    pub fn dissipative(self) -> bool {
        matches!(self, CatVariant::IdealDissipative | CatVariant::ThermalDissipative)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CatSection {
    pub n_t: usize,
    pub n_m: usize,
    pub flux_on: f64,
    pub cycles: f64,
    pub samples: usize,
    pub variants: Vec<CatVariant>,
    pub thermal_p1: f64,
    pub thermal_n_mech: f64,
    pub snapshot_cycles: Vec<f64>,
    pub wigner_half_width: f64,
    pub wigner_points: usize,
    pub escalate: bool,
    pub atol: f64,
    pub rtol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WignerSection {
    pub center_x: f64,
    pub center_p: f64,
    pub half_width: f64,
    pub points: usize,
}

/// Overlays `top` on `base`, descending into tables.
fn merge(base: &mut toml::Table, top: toml::Table) {
    for (k, v) in top {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(t)) => merge(b, t),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

/// A user file as a TOML table. JSON files are accepted too, including a
/// run report, whose `config` member is used.
fn user_table(path: &Path) -> Result<toml::Table, CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    if !is_json {
        return text
            .parse::<toml::Table>()
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())));
    }
    let mut value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    if value.get("schema_version").is_some() {
        value = value
            .get_mut("config")
            .map(serde_json::Value::take)
            .ok_or_else(|| CliError::Config(format!("{}: report has no `config` member", path.display())))?;
    }
    toml::Table::try_from(value).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

impl RunConfig {
    /// Table 1 profile, overlaid with `path` when given.
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let mut table: toml::Table = TABLE1_PROFILE.parse().expect("built-in profile parses");
        if let Some(p) = path {
            merge(&mut table, user_table(p)?);
        }
        let cfg: RunConfig = table
            .try_into()
            .map_err(|e: toml::de::Error| CliError::Config(e.message().trim().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let mut errs = Vec::new();
        let mut check = |ok: bool, field: &str, msg: &str| {
            if !ok {
                errs.push(format!("{field}: {msg}"));
            }
        };
        let pos = |v: f64| v.is_finite() && v > 0.0;
        let nonneg = |v: f64| v.is_finite() && v >= 0.0;
        let flux = |v: f64| v.is_finite();

        let c = &self.circuit;
        check(
            pos(c.ej_max_mech_hz),
            "circuit.ej_max_mech_hz",
            "must be finite and > 0",
        );
        check(
            c.ej_transmon_hz.is_none_or(nonneg),
            "circuit.ej_transmon_hz",
            "must be finite and >= 0",
        );
        check(pos(c.ec_hz), "circuit.ec_hz", "must be finite and > 0");
        check((0.0..1.0).contains(&c.asym), "circuit.asym", "must lie in [0, 1)");
        check(flux(c.flux_mech), "circuit.flux_mech", "must be finite");
        check(nonneg(c.b_field_t), "circuit.b_field_t", "must be finite and >= 0");
        check(pos(c.beam_length_m), "circuit.beam_length_m", "must be finite and > 0");
        check(pos(c.beta0), "circuit.beta0", "must be finite and > 0");
        check(pos(c.omega_m_hz), "circuit.omega_m_hz", "must be finite and > 0");
        check(c.x_zpf_m.is_none_or(pos), "circuit.x_zpf_m", "must be finite and > 0");
        check(pos(c.q_mech), "circuit.q_mech", "must be finite and > 0");
        check(pos(c.t1_s), "circuit.t1_s", "must be finite and > 0");
        check(pos(c.t2_s), "circuit.t2_s", "must be finite and > 0");
        check(nonneg(c.n_th_mech), "circuit.n_th_mech", "must be finite and >= 0");
        check(
            nonneg(c.n_th_transmon),
            "circuit.n_th_transmon",
            "must be finite and >= 0",
        );
        check(
            nonneg(c.geometric_inductance_h),
            "circuit.geometric_inductance_h",
            "must be finite and >= 0",
        );

        let b = &self.bias;
        check(pos(b.omega_t_hz), "bias.omega_t_hz", "must be finite and > 0");
        check(nonneg(b.ej_min_hz), "bias.ej_min_hz", "must be finite and >= 0");
        check(
            b.ej_max_hz.is_none_or(|m| m.is_finite() && m > b.ej_min_hz),
            "bias.ej_max_hz",
            "must be finite and above bias.ej_min_hz",
        );
        check(pos(b.g0_max_hz), "bias.g0_max_hz", "must be finite and > 0");
        let [lo, hi] = b.calibration_flux;
        check(
            lo.is_finite() && hi.is_finite() && lo < hi,
            "bias.calibration_flux",
            "needs two finite values, lo < hi",
        );

        let k = &self.couplings;
        check(k.points >= 1, "couplings.points", "must be >= 1");
        check(
            flux(k.flux_min) && flux(k.flux_max) && k.flux_min <= k.flux_max,
            "couplings.flux_min",
            "must be finite and <= couplings.flux_max",
        );

        let cl = &self.cooling;
        check(cl.n_t >= 2, "cooling.n_t", "must be >= 2");
        check(cl.n_m >= 2, "cooling.n_m", "must be >= 2");
        check(nonneg(cl.drive_hz), "cooling.drive_hz", "must be finite and >= 0");
        check(cl.delta_points >= 1, "cooling.delta_points", "must be >= 1");
        check(
            cl.delta_min.is_finite() && cl.delta_max.is_finite() && cl.delta_min <= cl.delta_max,
            "cooling.delta_min",
            "must be finite and <= cooling.delta_max",
        );
        check(
            !(cl.g_over_wm.is_empty() && cl.fluxes.is_empty()),
            "cooling.g_over_wm",
            "no flux columns: give cooling.g_over_wm or cooling.fluxes",
        );
        check(
            cl.g_over_wm.iter().all(|&g| pos(g)),
            "cooling.g_over_wm",
            "entries must be finite and > 0",
        );
        check(
            cl.fluxes.iter().all(|&f| flux(f)),
            "cooling.fluxes",
            "entries must be finite",
        );
        let d = &cl.drive_sweep;
        check(d.points >= 1, "cooling.drive_sweep.points", "must be >= 1");
        check(
            nonneg(d.amp_min_hz) && nonneg(d.amp_max_hz) && d.amp_min_hz <= d.amp_max_hz,
            "cooling.drive_sweep.amp_min_hz",
            "must be finite, >= 0 and <= amp_max_hz",
        );
        check(
            pos(d.g_over_wm),
            "cooling.drive_sweep.g_over_wm",
            "must be finite and > 0",
        );
        check(
            d.delta.is_none_or(f64::is_finite),
            "cooling.drive_sweep.delta",
            "must be finite",
        );

        let ct = &self.cat;
        check(ct.n_t >= 2, "cat.n_t", "must be >= 2");
        check(ct.n_m >= 2, "cat.n_m", "must be >= 2");
        check(flux(ct.flux_on), "cat.flux_on", "must be finite");
        check(pos(ct.cycles), "cat.cycles", "must be finite and > 0");
        check(ct.samples >= 2, "cat.samples", "must be >= 2");
        check(
            !ct.variants.is_empty(),
            "cat.variants",
            "must list at least one variant",
        );
        check(
            (0.0..=1.0).contains(&ct.thermal_p1),
            "cat.thermal_p1",
            "must lie in [0, 1]",
        );
        check(
            nonneg(ct.thermal_n_mech),
            "cat.thermal_n_mech",
            "must be finite and >= 0",
        );
        check(
            ct.snapshot_cycles
                .iter()
                .all(|&s| s.is_finite() && s >= 0.0 && s <= ct.cycles),
            "cat.snapshot_cycles",
            "entries must lie in [0, cat.cycles]",
        );
        check(
            pos(ct.wigner_half_width),
            "cat.wigner_half_width",
            "must be finite and > 0",
        );
        check(ct.wigner_points >= 2, "cat.wigner_points", "must be >= 2");
        check(pos(ct.atol), "cat.atol", "must be finite and > 0");
        check(pos(ct.rtol), "cat.rtol", "must be finite and > 0");

        let w = &self.wigner;
        check(
            w.center_x.is_finite() && w.center_p.is_finite(),
            "wigner.center_x",
            "centre must be finite",
        );
        check(pos(w.half_width), "wigner.half_width", "must be finite and > 0");
        check(w.points >= 2, "wigner.points", "must be >= 2");

        if errs.is_empty() {
            Ok(())
        } else {
            Err(CliError::Config(errs.join("\n")))
        }
    }

    pub fn ej_window(&self) -> EjWindow {
        EjWindow {
            min: hz_to_angular(self.bias.ej_min_hz),
            max: self.bias.ej_max_hz.map_or(f64::INFINITY, hz_to_angular),
        }
    }

    pub fn compensated(&self) -> TransmonBias {
        TransmonBias::Compensated {
            omega_t: hz_to_angular(self.bias.omega_t_hz),
            window: self.ej_window(),
        }
    }

    pub fn calibration_window(&self) -> Result<FluxWindow, CliError> {
        let [lo, hi] = self.bias.calibration_flux;
        FluxWindow::new(lo, hi).map_err(|e| CliError::Config(format!("bias.calibration_flux: {e}")))
    }

    /// Circuit parameters with the transmon `E_J` and `X_ZPF` filled in when
    /// the config leaves them out.
    pub fn circuit_params(&self) -> Result<CircuitParams, CliError> {
        let c = &self.circuit;
        let mut p = CircuitParams {
            ej_max_mech: hz_to_angular(c.ej_max_mech_hz),
            ej_transmon: 0.0,
            ec: hz_to_angular(c.ec_hz),
            asym: c.asym,
            flux_mech: c.flux_mech,
            b_field: c.b_field_t,
            beam_length: c.beam_length_m,
            beta0: c.beta0,
            omega_m: hz_to_angular(c.omega_m_hz),
            x_zpf: 0.0,
            q_mech: c.q_mech,
            t1: c.t1_s,
            t2: c.t2_s,
            n_th_mech: c.n_th_mech,
            n_th_transmon: c.n_th_transmon,
            geometric_inductance: c.geometric_inductance_h,
        };
        p.ej_transmon = match c.ej_transmon_hz {
            Some(hz) => hz_to_angular(hz),
            None => compensating_ej(&p, hz_to_angular(self.bias.omega_t_hz), p.flux_mech),
        };
        p.x_zpf = match c.x_zpf_m {
            Some(x) => x,
            None => calibrate_xzpf(
                &p,
                hz_to_angular(self.bias.g0_max_hz),
                self.calibration_window()?,
                &self.compensated(),
            )
            .map_err(|e| CliError::Config(format!("bias.g0_max_hz: calibration failed: {e}")))?,
        };
        p.validate().map_err(|e| CliError::Config(format!("circuit: {e}")))?;
        Ok(p)
    }

    pub fn cooling_truncation(&self) -> Truncation {
        Truncation {
            n_t: self.cooling.n_t,
            n_m: self.cooling.n_m,
        }
    }

    pub fn cat_truncation(&self) -> Truncation {
        Truncation {
            n_t: self.cat.n_t,
            n_m: self.cat.n_m,
        }
    }

    pub fn cat_control(&self) -> StepControl {
        StepControl::Adaptive {
            atol: self.cat.atol,
            rtol: self.cat.rtol,
        }
    }
}
