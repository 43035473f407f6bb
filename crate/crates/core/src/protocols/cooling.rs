//! Steady-state sideband cooling of the beam by a red-detuned qubit drive.

use serde::{Deserialize, Serialize};

use super::ProtocolError;
use crate::analysis::{phonon_number, qubit_excitation};
use crate::circuit::{CircuitParams, DerivedCircuit, TransmonBias};
use crate::model::{Couplings, Dissipation, DriveSpec, Frame, ModelSpec, SystemModel, Truncation};
use crate::quantum::{DensityMatrix, MECHANICS};
use crate::solvers::steady_state;

/// Everything a cooling point needs besides `(Δ, Φ_M, ε_D)`.
#[derive(Debug, Clone, Copy)]
pub struct CoolingSetup {
    pub params: CircuitParams,
    /// Keeps the qubit frequency fixed while the mechanical flux moves.
    pub bias: TransmonBias,
    pub truncation: Truncation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "message", rename_all = "snake_case")]
pub enum PointStatus {
    Ok,
    Failed(String),
}

impl PointStatus {
    pub fn is_ok(&self) -> bool {
        matches!(self, PointStatus::Ok)
    }

    /// Short form for tables.
    pub fn label(&self) -> &str {
        match self {
            PointStatus::Ok => "ok",
            PointStatus::Failed(_) => "failed",
        }
    }
}

/// Steady state at one `(Δ, Φ_M, ε_D)`. Failed points carry `NaN`
/// observables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoolingPoint {
    /// `Δ = ω_T − ω_D` (rad/s).
    pub delta: f64,
    pub flux_mech: f64,
    /// Signed `g0_eff/ω_M`.
    pub g0_over_omega_m: f64,
    /// `ε_D` (rad/s).
    pub drive_amp: f64,
    pub n_phonon_ss: f64,
    pub n_qubit_ss: f64,
    /// `‖L vec(ρ)‖₂ / ‖L‖_∞` of the returned state.
    pub residual: f64,
    /// Population of the two highest mechanical levels.
    pub top_population: f64,
    pub status: PointStatus,
}

/// Predicted cooling resonances at one flux.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResonanceMarkers {
    pub flux_mech: f64,
    pub g0_eff: f64,
    /// `Δ_k = k (ω_M − g²/ω_M)` inside the swept detuning range.
    pub deltas: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoolingMap {
    /// Flux-major: all detunings of the first flux, then the next.
    pub points: Vec<CoolingPoint>,
    pub markers: Vec<ResonanceMarkers>,
}

impl CoolingMap {
    /// Successful point with the lowest phonon number.
    pub fn minimum(&self) -> Option<&CoolingPoint> {
        lowest(&self.points)
    }

    /// Points belonging to one flux value, in detuning order.
    pub fn column(&self, flux: f64) -> Vec<&CoolingPoint> {
        self.points.iter().filter(|p| p.flux_mech == flux).collect()
    }
}

pub(crate) fn lowest(points: &[CoolingPoint]) -> Option<&CoolingPoint> {
    points
        .iter()
        .filter(|p| p.status.is_ok())
        .min_by(|a, b| a.n_phonon_ss.total_cmp(&b.n_phonon_ss))
}

/// `k (ω_M − g²/ω_M)` for every `k ≥ 1` with the value in `[lo, hi]`.
pub fn resonance_markers(g0_eff: f64, omega_m: f64, lo: f64, hi: f64) -> Vec<f64> {
    let base = omega_m - g0_eff * g0_eff / omega_m;
    if !(base > 0.0) {
        return Vec::new();
    }
    (1..)
        .map(|k| k as f64 * base)
        .take_while(|&d| d <= hi)
        .filter(|&d| d >= lo)
        .collect()
}

fn couplings_at(setup: &CoolingSetup, flux: f64) -> Result<Couplings, ProtocolError> {
    let p = setup.bias.apply(&setup.params, flux)?;
    Ok(Couplings::from_circuit(&DerivedCircuit::compute(&p)))
}

fn solve_point(
    setup: &CoolingSetup,
    couplings: Couplings,
    delta: f64,
    amp: f64,
) -> Result<(f64, f64, f64, f64), ProtocolError> {
    let model = SystemModel::build(ModelSpec {
        truncation: setup.truncation,
        frame: Frame::DriveRotating,
        couplings,
        omega_m: setup.params.omega_m,
        ec: setup.params.ec,
        drive: Some(DriveSpec { amp, detuning: delta }),
        dissipation: Dissipation::from_params(&setup.params),
    })?;
    let ss = steady_state(&model)?;
    let top = top_population(&ss.rho_ss)?;
    Ok((
        phonon_number(&ss.rho_ss)?,
        qubit_excitation(&ss.rho_ss)?,
        ss.residual_scaled,
        top,
    ))
}

fn top_population(rho: &DensityMatrix) -> Result<f64, ProtocolError> {
    let m = rho.partial_trace(MECHANICS)?;
    let n = m.dim();
    Ok((n.saturating_sub(2)..n).map(|k| m.population(k)).sum())
}

fn point(
    setup: &CoolingSetup,
    flux: f64,
    couplings: &Result<Couplings, ProtocolError>,
    delta: f64,
    amp: f64,
) -> CoolingPoint {
    let omega_m = setup.params.omega_m;
    let failed = |g: f64, e: &ProtocolError| CoolingPoint {
        delta,
        flux_mech: flux,
        g0_over_omega_m: g,
        drive_amp: amp,
        n_phonon_ss: f64::NAN,
        n_qubit_ss: f64::NAN,
        residual: f64::NAN,
        top_population: f64::NAN,
        status: PointStatus::Failed(e.to_string()),
    };
    let c = match couplings {
        Ok(c) => *c,
        Err(e) => return failed(f64::NAN, e),
    };
    let g = c.g0_eff() / omega_m;
    match solve_point(setup, c, delta, amp) {
        Ok((n_b, n_c, residual, top)) => CoolingPoint {
            delta,
            flux_mech: flux,
            g0_over_omega_m: g,
            drive_amp: amp,
            n_phonon_ss: n_b,
            n_qubit_ss: n_c,
            residual,
            top_population: top,
            status: PointStatus::Ok,
        },
        Err(e) => failed(g, &e),
    }
}

fn map_ordered<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// Steady-state occupations over a `(Δ, Φ_M)` grid at fixed drive strength.
/// A point that fails is flagged and the sweep continues.
pub fn cooling_sweep(
    setup: &CoolingSetup,
    delta_grid: &[f64],
    flux_grid: &[f64],
    drive_amp: f64,
) -> Result<CoolingMap, ProtocolError> {
    if delta_grid.is_empty() || flux_grid.is_empty() {
        return Err(ProtocolError::InvalidInput(
            "cooling sweep needs non-empty detuning and flux grids".into(),
        ));
    }
    setup.params.validate()?;
    let couplings: Vec<_> = flux_grid.iter().map(|&f| couplings_at(setup, f)).collect();
    let tasks: Vec<(usize, f64)> = (0..flux_grid.len())
        .flat_map(|i| delta_grid.iter().map(move |&d| (i, d)))
        .collect();
    let points = map_ordered(&tasks, |&(i, d)| {
        point(setup, flux_grid[i], &couplings[i], d, drive_amp)
    });

    let lo = delta_grid.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = delta_grid.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let markers = flux_grid
        .iter()
        .zip(&couplings)
        .filter_map(|(&f, c)| c.as_ref().ok().map(|c| (f, c.g0_eff())))
        .map(|(f, g)| ResonanceMarkers {
            flux_mech: f,
            g0_eff: g,
            deltas: resonance_markers(g, setup.params.omega_m, lo, hi),
        })
        .collect();
    Ok(CoolingMap { points, markers })
}

/// Steady-state occupations versus drive amplitude at a fixed operating
/// point.
pub fn cooling_drive_sweep(
    setup: &CoolingSetup,
    amp_grid: &[f64],
    delta: f64,
    flux: f64,
) -> Result<Vec<CoolingPoint>, ProtocolError> {
    if amp_grid.is_empty() {
        return Err(ProtocolError::InvalidInput(
            "drive sweep needs a non-empty amplitude grid".into(),
        ));
    }
    setup.params.validate()?;
    let couplings = couplings_at(setup, flux);
    Ok(map_ordered(amp_grid, |&a| point(setup, flux, &couplings, delta, a)))
}

/// Lowest successful point of a drive sweep.
pub fn drive_sweep_minimum(points: &[CoolingPoint]) -> Option<&CoolingPoint> {
    lowest(points)
}
