//! Browser bindings for the demo page. Each export wraps a plain function
//! that native tests can call without a JavaScript host.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::f64::consts::PI;

use optomech::circuit::{coupling_curve, linspace, CircuitParams, DerivedCircuit, EjWindow, TransmonBias};
use optomech::constants::{angular_to_hz, hz_to_angular};
use optomech::model::Truncation;
use optomech::protocols::cat::CAT_STEP_CONTROL;
use optomech::protocols::{cat_protocol, displacement_oracle, CatConfig, CatInitial, WignerGridSpec};
use wasm_bindgen::prelude::*;

fn device(asym: f64, b_field_t: f64) -> CircuitParams {
    CircuitParams {
        asym,
        b_field: b_field_t,
        ..CircuitParams::table1()
    }
}

fn compensated() -> TransmonBias {
    TransmonBias::Compensated {
        omega_t: hz_to_angular(optomech::circuit::TABLE1_OMEGA_T_HZ),
        window: EjWindow::physical(),
    }
}

/// Rows `[flux, g0_hz, g0p_hz, omega_t_hz]` flattened. Under compensation
/// fluxes the qubit cannot follow are left out.
pub fn coupling_rows(asym: f64, b_field_t: f64, points: usize, compensate: bool) -> Result<Vec<f64>, String> {
    let params = device(asym, b_field_t);
    params.validate().map_err(|e| e.to_string())?;
    let bias = if compensate { compensated() } else { TransmonBias::Fixed };
    let curve = coupling_curve(&params, &linspace(0.0, 0.5, points), &bias).map_err(|e| e.to_string())?;
    Ok(curve
        .rows
        .iter()
        .flat_map(|r| {
            [
                r.flux_mech,
                angular_to_hz(r.g0),
                angular_to_hz(r.g0_prime),
                angular_to_hz(r.omega_t),
            ]
        })
        .collect())
}

/// `g0 + 2g0'` in Hz at a mechanical flux, qubit held at the operating
/// frequency.
pub fn effective_coupling(flux: f64) -> Result<f64, String> {
    let p = compensated()
        .apply(&CircuitParams::table1(), flux)
        .map_err(|e| e.to_string())?;
    let d = DerivedCircuit::compute(&p);
    Ok(angular_to_hz(d.g0 + 2.0 * d.g0_prime))
}

/// Rows `[t_s, re β, im β]` of the qubit-conditioned displacement.
pub fn trajectory_rows(flux: f64, cycles: f64, samples: usize) -> Result<Vec<f64>, String> {
    if !(cycles > 0.0) || samples < 2 {
        return Err("need cycles > 0 and at least two samples".into());
    }
    let g = hz_to_angular(effective_coupling(flux)?);
    let wm = CircuitParams::table1().omega_m;
    let end = cycles * 2.0 * PI / wm;
    Ok(linspace(0.0, end, samples)
        .into_iter()
        .flat_map(|t| {
            let b = displacement_oracle(g, wm, t);
            [t, b.re, b.im]
        })
        .collect())
}

/// Heralded outcome-0 state of a closed, ideal cat run.
#[wasm_bindgen]
#[derive(Debug, Clone)]
pub struct CatDemo {
    p0: f64,
    fidelity: f64,
    beta_re: f64,
    beta_im: f64,
    axis_x: Vec<f64>,
    axis_p: Vec<f64>,
    wigner: Vec<f64>,
    truncation_warning: bool,
}

#[wasm_bindgen]
impl CatDemo {
    #[wasm_bindgen(getter)]
    pub fn p0(&self) -> f64 {
        self.p0
    }

    /// Uhlmann fidelity with the even cat.
    #[wasm_bindgen(getter)]
    pub fn fidelity(&self) -> f64 {
        self.fidelity
    }

    #[wasm_bindgen(getter)]
    pub fn beta_re(&self) -> f64 {
        self.beta_re
    }

    #[wasm_bindgen(getter)]
    pub fn beta_im(&self) -> f64 {
        self.beta_im
    }

    #[wasm_bindgen(getter)]
    pub fn axis_x(&self) -> Vec<f64> {
        self.axis_x.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn axis_p(&self) -> Vec<f64> {
        self.axis_p.clone()
    }

    /// Row-major, one row per `p` value.
    #[wasm_bindgen(getter)]
    pub fn wigner(&self) -> Vec<f64> {
        self.wigner.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn truncation_warning(&self) -> bool {
        self.truncation_warning
    }
}

pub fn simulate_cat(flux_on: f64, cycles: f64, n_m: usize, points: usize) -> Result<CatDemo, String> {
    let params = CircuitParams::table1();
    let end = cycles * 2.0 * PI / params.omega_m;
    let cfg = CatConfig {
        params,
        bias: compensated(),
        flux_on,
        truncation: Truncation { n_t: 3, n_m },
        evolve_time: end,
        initial: CatInitial::Ideal,
        dissipation: false,
        samples: 2,
        snapshot_times: vec![end],
        wigner: Some(WignerGridSpec {
            half_width: 5.0,
            points,
            center_on_cat: true,
        }),
        escalate: false,
        control: CAT_STEP_CONTROL,
    };
    let r = cat_protocol(&cfg).map_err(|e| e.to_string())?;
    let grid = r
        .snapshots
        .into_iter()
        .next()
        .and_then(|s| s.wigner)
        .ok_or("run returned no Wigner snapshot")?;
    Ok(CatDemo {
        p0: r.p_outcome[0],
        fidelity: r.fidelity_even.uhlmann,
        beta_re: r.beta.re,
        beta_im: r.beta.im,
        wigner: grid.values.concat(),
        axis_x: grid.x,
        axis_p: grid.p,
        truncation_warning: grid.truncation_warning,
    })
}

#[wasm_bindgen]
pub fn couplings(asym: f64, b_field_t: f64, points: usize, compensate: bool) -> Result<Vec<f64>, JsError> {
    coupling_rows(asym, b_field_t, points, compensate).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn g_eff_hz(flux: f64) -> Result<f64, JsError> {
    effective_coupling(flux).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn trajectory(flux: f64, cycles: f64, samples: usize) -> Result<Vec<f64>, JsError> {
    trajectory_rows(flux, cycles, samples).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn cat(flux_on: f64, cycles: f64, n_m: usize, points: usize) -> Result<CatDemo, JsError> {
    simulate_cat(flux_on, cycles, n_m, points).map_err(|e| JsError::new(&e))
}
