//! The four experiment commands. Each writes its data files and returns the
//! command-specific part of the run report.

use std::f64::consts::PI;
use std::path::Path;

use optomech::analysis::{axis, displaced_parity, phonon_number, wigner, Fidelity, WignerGrid};
use optomech::circuit::{
    coupling_curve, flux_for_coupling, linspace, max_abs_g0, CircuitError, CircuitParams, TransmonBias,
};
use optomech::constants::{angular_to_hz, hz_to_angular};
use optomech::formats::{
    cat_timeseries_csv, cooling_drive_csv, cooling_map_csv, coupling_csv, read_density_matrix, wigner_csv,
    write_density_matrix,
};
use optomech::protocols::cooling::drive_sweep_minimum;
use optomech::protocols::{
    cat_protocol, cooling_drive_sweep, cooling_sweep, CatConfig, CatInitial, CoolingPoint, CoolingSetup, WignerGridSpec,
};
use optomech::quantum::MECHANICS;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::report::OutputDir;
use crate::CliError;

/// Results and diagnostics sections of the report.
pub struct Outcome {
    pub results: Value,
    pub diagnostics: Value,
}

fn rejected_json(rejected: &[(f64, CircuitError)]) -> Value {
    rejected
        .iter()
        .map(|(f, e)| json!({ "flux_mech": f, "reason": e.to_string() }))
        .collect()
}

pub fn couplings(cfg: &RunConfig, params: &CircuitParams, out: &mut OutputDir) -> Result<Outcome, CliError> {
    let k = &cfg.couplings;
    let grid = linspace(k.flux_min, k.flux_max, k.points);
    let fixed = coupling_curve(params, &grid, &TransmonBias::Fixed)?;
    let comp = coupling_curve(params, &grid, &cfg.compensated())?;
    out.write("couplings.csv", &coupling_csv(&fixed.rows))?;
    out.write("couplings_compensated.csv", &coupling_csv(&comp.rows))?;
    let (at, g_max) = max_abs_g0(params, cfg.calibration_window()?, &cfg.compensated())?;
    let peak = |rows: &[optomech::circuit::CouplingRow]| {
        rows.iter()
            .max_by(|a, b| a.g0.abs().total_cmp(&b.g0.abs()))
            .map(|r| json!({ "flux_mech": r.flux_mech, "g0_hz": angular_to_hz(r.g0) }))
    };
    Ok(Outcome {
        results: json!({
            "max_abs_g0_hz": angular_to_hz(g_max),
            "max_abs_g0_flux": at,
            "fixed_bias_peak": peak(&fixed.rows),
            "compensated_peak": peak(&comp.rows),
            "rows": { "fixed": fixed.rows.len(), "compensated": comp.rows.len() },
        }),
        diagnostics: json!({
            "rejected_fixed": rejected_json(&fixed.rejected),
            "rejected_compensated": rejected_json(&comp.rejected),
        }),
    })
}

#[derive(Serialize)]
struct PointSummary {
    delta_hz: f64,
    delta_over_wm: f64,
    drive_hz: f64,
    flux_mech: f64,
    g0_over_wm: f64,
    n_phonon: f64,
    n_qubit: f64,
}

fn summary(p: &CoolingPoint, omega_m: f64) -> PointSummary {
    PointSummary {
        delta_hz: angular_to_hz(p.delta),
        delta_over_wm: p.delta / omega_m,
        drive_hz: angular_to_hz(p.drive_amp),
        flux_mech: p.flux_mech,
        g0_over_wm: p.g0_over_omega_m,
        n_phonon: p.n_phonon_ss,
        n_qubit: p.n_qubit_ss,
    }
}

fn failures(points: &[CoolingPoint]) -> Value {
    points
        .iter()
        .filter_map(|p| match &p.status {
            optomech::protocols::PointStatus::Failed(msg) => Some(json!({
                "delta_hz": angular_to_hz(p.delta),
                "flux_mech": p.flux_mech,
                "drive_hz": angular_to_hz(p.drive_amp),
                "reason": msg,
            })),
            _ => None,
        })
        .collect()
}

fn max_of(points: &[CoolingPoint], f: impl Fn(&CoolingPoint) -> f64) -> f64 {
    points.iter().filter(|p| p.status.is_ok()).map(f).fold(0.0, f64::max)
}

fn flux_for(cfg: &RunConfig, params: &CircuitParams, g_over_wm: f64, field: &str) -> Result<f64, CliError> {
    let window = cfg.calibration_window()?;
    flux_for_coupling(params, g_over_wm * params.omega_m, window, &cfg.compensated()).map_err(|e| {
        CliError::Config(format!(
            "{field}: no flux in the calibration window gives |g0_eff|/ω_M = {g_over_wm}: {e}"
        ))
    })
}

pub fn cool(cfg: &RunConfig, params: &CircuitParams, out: &mut OutputDir) -> Result<Outcome, CliError> {
    let c = &cfg.cooling;
    let wm = params.omega_m;
    let setup = CoolingSetup {
        params: *params,
        bias: cfg.compensated(),
        truncation: cfg.cooling_truncation(),
    };
    let mut fluxes = Vec::new();
    for &g in &c.g_over_wm {
        fluxes.push(flux_for(cfg, params, g, "cooling.g_over_wm")?);
    }
    fluxes.extend(c.fluxes.iter().copied());
    let deltas = linspace(c.delta_min * wm, c.delta_max * wm, c.delta_points);
    let amp = hz_to_angular(c.drive_hz);
    let map = cooling_sweep(&setup, &deltas, &fluxes, amp)?;
    out.write("cooling_map.csv", &cooling_map_csv(&map.points))?;

    let markers: Vec<Value> = map
        .markers
        .iter()
        .map(|m| {
            json!({
                "flux_mech": m.flux_mech,
                "g0_eff_over_wm": m.g0_eff / wm,
                "deltas_hz": m.deltas.iter().map(|&d| angular_to_hz(d)).collect::<Vec<_>>(),
            })
        })
        .collect();
    let columns: Vec<Value> = fluxes
        .iter()
        .map(|&f| {
            let col: Vec<CoolingPoint> = map.column(f).into_iter().cloned().collect();
            json!({ "flux_mech": f, "minimum": drive_sweep_minimum(&col).map(|p| summary(p, wm)) })
        })
        .collect();

    let mut drive = Value::Null;
    let mut drive_points = Vec::new();
    let d = &c.drive_sweep;
    if d.enabled {
        let flux = flux_for(cfg, params, d.g_over_wm, "cooling.drive_sweep.g_over_wm")?;
        let delta = match d.delta {
            Some(x) => x * wm,
            None => {
                let col = map.column(flux);
                let col: Vec<CoolingPoint> = if col.is_empty() {
                    cooling_sweep(&setup, &deltas, &[flux], amp)?.points
                } else {
                    col.into_iter().cloned().collect()
                };
                drive_sweep_minimum(&col)
                    .map(|p| p.delta)
                    .ok_or_else(|| CliError::Solver("every point of the drive-sweep column failed".into()))?
            }
        };
        let amps = linspace(hz_to_angular(d.amp_min_hz), hz_to_angular(d.amp_max_hz), d.points);
        drive_points = cooling_drive_sweep(&setup, &amps, delta, flux)?;
        out.write("cooling_drive.csv", &cooling_drive_csv(&drive_points))?;
        drive = json!({
            "flux_mech": flux,
            "delta_hz": angular_to_hz(delta),
            "delta_over_wm": delta / wm,
            "minimum": drive_sweep_minimum(&drive_points).map(|p| summary(p, wm)),
        });
    }

    let all: Vec<CoolingPoint> = map.points.iter().chain(&drive_points).cloned().collect();
    Ok(Outcome {
        results: json!({
            "minimum": map.minimum().map(|p| summary(p, wm)),
            "columns": columns,
            "markers": markers,
            "drive_sweep": drive,
        }),
        diagnostics: json!({
            "points": all.len(),
            "failed": failures(&all),
            "max_scaled_residual": max_of(&all, |p| p.residual),
            "max_top_population": max_of(&all, |p| p.top_population),
        }),
    })
}

#[derive(Serialize)]
struct SnapshotSummary {
    t_s: f64,
    beta_abs: f64,
    p0: f64,
    fidelity_even: Fidelity,
    n_phonon: f64,
    wigner_file: Option<String>,
    wigner_min: Option<f64>,
    wigner_truncation_warning: Option<bool>,
}

#[derive(Serialize)]
struct VariantSummary {
    variant: &'static str,
    g0_eff_hz: f64,
    beta: [f64; 2],
    beta_abs: f64,
    beta_max: f64,
    n_m: usize,
    escalated: bool,
    bellcat_fidelity: Fidelity,
    bellcat_phase: f64,
    virtual_z: f64,
    p_outcome: [f64; 2],
    leakage: f64,
    fidelity_even: Fidelity,
    fidelity_odd: Option<Fidelity>,
    parity_even: f64,
    snapshots: Vec<SnapshotSummary>,
}

pub fn cat(cfg: &RunConfig, params: &CircuitParams, out: &mut OutputDir) -> Result<Outcome, CliError> {
    let c = &cfg.cat;
    let period = 2.0 * PI / params.omega_m;
    let mut summaries = Vec::new();
    let mut diagnostics = serde_json::Map::new();
    for &variant in &c.variants {
        let run_cfg = CatConfig {
            params: *params,
            bias: cfg.compensated(),
            flux_on: c.flux_on,
            truncation: cfg.cat_truncation(),
            evolve_time: c.cycles * period,
            initial: if variant.thermal() {
                CatInitial::Thermal {
                    p1: c.thermal_p1,
                    n_mech: c.thermal_n_mech,
                }
            } else {
                CatInitial::Ideal
            },
            dissipation: variant.dissipative(),
            samples: c.samples,
            // the last snapshot may round past the pulse end
            snapshot_times: c
                .snapshot_cycles
                .iter()
                .map(|&s| (s * period).min(c.cycles * period))
                .collect(),
            wigner: Some(WignerGridSpec {
                half_width: c.wigner_half_width,
                points: c.wigner_points,
                center_on_cat: true,
            }),
            escalate: c.escalate,
            control: cfg.cat_control(),
        };
        let r = cat_protocol(&run_cfg)?;
        let dir = variant.name();
        out.write(&format!("{dir}/cat_timeseries.csv"), &cat_timeseries_csv(&r))?;
        if let Some(rho) = &r.rho_mech_cond[0] {
            out.write(&format!("{dir}/rho_mech_even.dm"), &write_density_matrix(rho))?;
        }
        let mut snaps = Vec::new();
        for (i, s) in r.snapshots.iter().enumerate() {
            let file = match &s.wigner {
                Some(g) => {
                    let name = format!("{dir}/wigner_{i:02}.csv");
                    out.write(&name, &wigner_csv(g))?;
                    Some(name)
                }
                None => None,
            };
            snaps.push(SnapshotSummary {
                t_s: s.t,
                beta_abs: s.beta.norm(),
                p0: s.p0,
                fidelity_even: s.fidelity_even,
                n_phonon: phonon_number(&s.rho_mech).map_err(|e| CliError::Solver(e.to_string()))?,
                wigner_file: file,
                wigner_min: s.wigner.as_ref().map(WignerGrid::min),
                wigner_truncation_warning: s.wigner.as_ref().map(|g| g.truncation_warning),
            });
        }
        diagnostics.insert(
            dir.to_string(),
            serde_json::to_value(r.diagnostics).expect("serialisable"),
        );
        summaries.push(VariantSummary {
            variant: dir,
            g0_eff_hz: angular_to_hz(r.g0_eff),
            beta: [r.beta.re, r.beta.im],
            beta_abs: r.beta.norm(),
            beta_max: r.beta_max,
            n_m: r.truncation.n_m,
            escalated: r.escalated,
            bellcat_fidelity: r.bellcat.fidelity,
            bellcat_phase: r.bellcat.phase,
            virtual_z: r.virtual_z,
            p_outcome: r.p_outcome,
            leakage: r.leakage,
            fidelity_even: r.fidelity_even,
            fidelity_odd: r.fidelity_odd,
            parity_even: r.parity_even,
            snapshots: snaps,
        });
    }
    out.write_json("cat_fidelities.json", &summaries)?;
    let results = json!({
        "variants": summaries.iter().map(|s| json!({
            "variant": s.variant,
            "fidelity_even": s.fidelity_even,
            "p_outcome": s.p_outcome,
            "beta_max": s.beta_max,
            "escalated": s.escalated,
            "n_m": s.n_m,
        })).collect::<Vec<_>>(),
    });
    Ok(Outcome {
        results,
        diagnostics: Value::Object(diagnostics),
    })
}

pub fn wigner_cmd(cfg: &RunConfig, state: &Path, out: &mut OutputDir) -> Result<Outcome, CliError> {
    let text =
        std::fs::read_to_string(state).map_err(|e| CliError::Input(format!("cannot read {}: {e}", state.display())))?;
    let rho = read_density_matrix(&text).map_err(|e| CliError::Input(format!("{}: {e}", state.display())))?;
    let dims = rho.space().dims().to_vec();
    let rho = match dims.len() {
        1 => rho,
        2 => rho
            .partial_trace(MECHANICS)
            .map_err(|e| CliError::Input(e.to_string()))?,
        _ => {
            return Err(CliError::Input(format!(
                "{}: expected one mechanical or a transmon-mechanics pair of dimensions, found {dims:?}",
                state.display()
            )))
        }
    };
    let w = &cfg.wigner;
    let xs = axis(w.center_x - w.half_width, w.center_x + w.half_width, w.points);
    let ps = axis(w.center_p - w.half_width, w.center_p + w.half_width, w.points);
    let grid = wigner(&rho, &xs, &ps).map_err(|e| CliError::Solver(e.to_string()))?;
    out.write("wigner.csv", &wigner_csv(&grid))?;
    let center = num_complex::Complex64::new(w.center_x, w.center_p) / 2f64.sqrt();
    Ok(Outcome {
        results: json!({
            "state_dims": dims,
            "mechanical_dim": rho.dim(),
            "min": grid.min(),
            "max": grid.max(),
            "integral": grid.integral(),
            "parity_about_center": displaced_parity(&rho, center).map_err(|e| CliError::Solver(e.to_string()))?,
            "n_phonon": phonon_number(&rho).map_err(|e| CliError::Solver(e.to_string()))?,
        }),
        diagnostics: json!({ "truncation_warning": grid.truncation_warning }),
    })
}
