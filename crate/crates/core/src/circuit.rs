//! Circuit model of a transmon shunted by a mechanically compliant SQUID.
//!
//! Maps the physical circuit parameters onto the derived quantities used by
//! the Hamiltonian: SQUID asymmetry factors, the flux-dependent Josephson
//! energy of the mechanical SQUID, the transmon frequency and impedance, and
//! the radiation-pressure coupling `g0` with its two higher-order companions
//! `g0'` (transmon anharmonicity) and `g0''` (second order in displacement).
//!
//! All energies are angular frequencies (rad/s). Fluxes are in units of the
//! flux quantum. The formulas are evaluated on the raw flux value, so `g0`
//! is odd about zero flux; [`reduce_flux`] maps any bias onto the operating
//! branch `[0, 0.5]`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constants::{cos_pi, hz_to_angular, sin_pi, FLUX_QUANTUM, HBAR, REDUCED_FLUX_QUANTUM, RESISTANCE_UNIT};

/// Transmon frequency at which the Table 1 device is operated.
pub const TABLE1_OMEGA_T_HZ: f64 = 5.53e9;
/// Maximum radiation-pressure coupling of the Table 1 device.
pub const TABLE1_G0_MAX_HZ: f64 = 2.4e6;
/// Operating flux range of the mechanical SQUID.
pub const TABLE1_FLUX_WINDOW: FluxWindow = FluxWindow { lo: 0.49, hi: 0.5 };
/// Tuning range of the transmon Josephson energy.
pub const TABLE1_EJ_WINDOW_HZ: (f64, f64) = (3e9, 10e9);

/// Ratio `Ẽ_J / E_C` below which the transmon becomes charge sensitive.
pub const TRANSMON_REGIME_RATIO: f64 = 20.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CircuitError {
    #[error("invalid circuit parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("degenerate flux window [{lo}, {hi}]: need 0 <= lo < hi <= 0.5")]
    DegenerateWindow { lo: f64, hi: f64 },
    #[error(
        "flux compensation at flux {flux} needs E_J/h = {required_hz:.6e} Hz, \
         which violates the {bound} bound {bound_hz:.6e} Hz"
    )]
    EjOutOfWindow {
        flux: f64,
        required_hz: f64,
        bound: Bound,
        bound_hz: f64,
    },
    #[error("flux grid is empty")]
    EmptyGrid,
    #[error("coupling {target_hz:.6e} Hz is not reachable in the flux window (max {max_hz:.6e} Hz)")]
    CouplingUnreachable { target_hz: f64, max_hz: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Bound {
    Lower,
    Upper,
}

impl std::fmt::Display for Bound {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Bound::Lower => f.write_str("lower"),
            Bound::Upper => f.write_str("upper"),
        }
    }
}

/// Physical inputs of the circuit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircuitParams {
    /// `E_J,max^M`, maximum Josephson energy of the mechanical SQUID (rad/s).
    pub ej_max_mech: f64,
    /// `E_J` of the transmon SQUID (rad/s), set by the transmon flux bias.
    pub ej_transmon: f64,
    /// Charging energy `E_C` (rad/s).
    pub ec: f64,
    /// Junction asymmetry `a_J` of the mechanical SQUID.
    pub asym: f64,
    /// Flux bias of the mechanical SQUID, in flux quanta.
    pub flux_mech: f64,
    /// In-plane magnetic field (T).
    pub b_field: f64,
    /// Beam length (m).
    pub beam_length: f64,
    /// Mode-shape geometric factor.
    pub beta0: f64,
    /// Mechanical angular frequency (rad/s).
    pub omega_m: f64,
    /// Zero-point displacement of the beam (m).
    pub x_zpf: f64,
    /// Mechanical quality factor.
    pub q_mech: f64,
    /// Transmon relaxation time (s).
    pub t1: f64,
    /// Transmon dephasing time (s).
    pub t2: f64,
    /// Thermal phonon occupation of the mechanical bath.
    pub n_th_mech: f64,
    /// Thermal occupation of the transmon bath.
    pub n_th_transmon: f64,
    /// Geometric loop inductance (H); only used for the screening diagnostic.
    pub geometric_inductance: f64,
}

impl CircuitParams {
    /// The Table 1 device, operated at `Φ_M = 0.49 Φ₀` with the transmon
    /// frequency held at 5.53 GHz and `X_ZPF` calibrated so that the largest
    /// coupling over the operating window is 2.4 MHz.
    pub fn table1() -> Self {
        let mut p = Self {
            ej_max_mech: hz_to_angular(200e9),
            ej_transmon: 0.0,
            ec: hz_to_angular(280e6),
            asym: 0.01,
            flux_mech: 0.49,
            b_field: 10e-3,
            beam_length: 147e-6,
            beta0: 1.0,
            omega_m: hz_to_angular(1e6),
            x_zpf: 0.0,
            q_mech: 1e6,
            t1: 10e-6,
            t2: 10e-6,
            n_th_mech: 200.0,
            n_th_transmon: 0.05,
            geometric_inductance: 300e-12,
        };
        let omega_t = hz_to_angular(TABLE1_OMEGA_T_HZ);
        p.ej_transmon = compensating_ej(&p, omega_t, p.flux_mech);
        let bias = TransmonBias::Compensated {
            omega_t,
            window: EjWindow::physical(),
        };
        p.x_zpf = calibrate_xzpf(&p, hz_to_angular(TABLE1_G0_MAX_HZ), TABLE1_FLUX_WINDOW, &bias)
            .expect("Table 1 calibration is well posed");
        p
    }

    pub fn validate(&self) -> Result<(), CircuitError> {
        fn check(name: &'static str, ok: bool, reason: &str) -> Result<(), CircuitError> {
            if ok {
                Ok(())
            } else {
                Err(CircuitError::InvalidParameter {
                    name,
                    reason: reason.to_string(),
                })
            }
        }
        let all = [
            self.ej_max_mech,
            self.ej_transmon,
            self.ec,
            self.asym,
            self.flux_mech,
            self.b_field,
            self.beam_length,
            self.beta0,
            self.omega_m,
            self.x_zpf,
            self.q_mech,
            self.t1,
            self.t2,
            self.n_th_mech,
            self.n_th_transmon,
            self.geometric_inductance,
        ];
        check("*", all.iter().all(|v| v.is_finite()), "all values must be finite")?;
        check("ej_max_mech", self.ej_max_mech > 0.0, "must be > 0")?;
        check("ec", self.ec > 0.0, "must be > 0")?;
        check("ej_transmon", self.ej_transmon >= 0.0, "must be >= 0")?;
        check("asym", (0.0..1.0).contains(&self.asym), "must lie in [0, 1)")?;
        check("omega_m", self.omega_m > 0.0, "must be > 0")?;
        check("x_zpf", self.x_zpf >= 0.0, "must be >= 0")?;
        check("q_mech", self.q_mech > 0.0, "must be > 0")?;
        check("t1", self.t1 > 0.0, "must be > 0")?;
        check("t2", self.t2 > 0.0, "must be > 0")?;
        check("n_th_mech", self.n_th_mech >= 0.0, "must be >= 0")?;
        check("n_th_transmon", self.n_th_transmon >= 0.0, "must be >= 0")?;
        Ok(())
    }

    pub fn at_flux(&self, flux_mech: f64) -> Self {
        Self { flux_mech, ..*self }
    }

    /// `α = π β₀ B l / Φ₀` (1/m).
    pub fn alpha(&self) -> f64 {
        std::f64::consts::PI * self.beta0 * self.b_field * self.beam_length / FLUX_QUANTUM
    }

    /// Mechanical energy decay rate `γ_m = ω_M / Q`.
    pub fn gamma_m(&self) -> f64 {
        self.omega_m / self.q_mech
    }
}

/// Flux interval, in flux quanta, on the branch `[0, 0.5]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluxWindow {
    pub lo: f64,
    pub hi: f64,
}

impl FluxWindow {
    pub fn new(lo: f64, hi: f64) -> Result<Self, CircuitError> {
        let w = Self { lo, hi };
        w.validate()?;
        Ok(w)
    }

    fn validate(&self) -> Result<(), CircuitError> {
        if self.lo.is_finite() && self.hi.is_finite() && 0.0 <= self.lo && self.lo < self.hi && self.hi <= 0.5 {
            Ok(())
        } else {
            Err(CircuitError::DegenerateWindow {
                lo: self.lo,
                hi: self.hi,
            })
        }
    }
}

/// Allowed range of the transmon Josephson energy (rad/s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EjWindow {
    pub min: f64,
    pub max: f64,
}

impl EjWindow {
    /// Only requires `E_J >= 0`.
    pub fn physical() -> Self {
        Self {
            min: 0.0,
            max: f64::INFINITY,
        }
    }

    pub fn table1() -> Self {
        Self {
            min: hz_to_angular(TABLE1_EJ_WINDOW_HZ.0),
            max: hz_to_angular(TABLE1_EJ_WINDOW_HZ.1),
        }
    }
}

/// How the transmon SQUID is biased while the mechanical flux is varied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TransmonBias {
    /// `E_J` stays at `CircuitParams::ej_transmon`.
    Fixed,
    /// `E_J` is retuned at every flux so the transmon frequency stays at
    /// `omega_t`.
    Compensated { omega_t: f64, window: EjWindow },
}

impl TransmonBias {
    /// Parameters at `flux` with the transmon `E_J` chosen by this bias.
    pub fn apply(&self, params: &CircuitParams, flux: f64) -> Result<CircuitParams, CircuitError> {
        let mut p = params.at_flux(flux);
        if let TransmonBias::Compensated { omega_t, window } = *self {
            p.ej_transmon = flux_compensation(params, omega_t, flux, window)?;
        }
        Ok(p)
    }
}

/// Reduce a flux bias modulo one flux quantum and reflect it onto `[0, 0.5]`.
pub fn reduce_flux(flux: f64) -> f64 {
    let r = flux.rem_euclid(1.0);
    if r > 0.5 {
        1.0 - r
    } else {
        r
    }
}

/// SQUID asymmetry factors `c_J`, `s_J`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymmetryFactors {
    /// `√(1 + a_J² tan²(πΦ_M/Φ₀))`; `+∞` exactly at half-integer flux with
    /// finite asymmetry.
    pub c_j: f64,
    /// `(1 − a_J²) / c_J`.
    pub s_j: f64,
}

pub fn asymmetry_factors(flux_mech: f64, asym: f64) -> AsymmetryFactors {
    if asym == 0.0 {
        return AsymmetryFactors { c_j: 1.0, s_j: 1.0 };
    }
    let cos = cos_pi(flux_mech).abs();
    let scale = josephson_scale(flux_mech, asym);
    if cos == 0.0 {
        AsymmetryFactors {
            c_j: f64::INFINITY,
            s_j: 0.0,
        }
    } else {
        let c_j = scale / cos;
        AsymmetryFactors {
            c_j,
            s_j: (1.0 - asym * asym) / c_j,
        }
    }
}

/// `c_J |cos(πΦ_M/Φ₀)| = √(cos² + a_J² sin²)`, finite everywhere.
pub fn josephson_scale(flux_mech: f64, asym: f64) -> f64 {
    let c = cos_pi(flux_mech);
    let s = sin_pi(flux_mech);
    (c * c + asym * asym * s * s).sqrt()
}

/// Josephson energy of the mechanical SQUID at beam displacement `x` (m),
/// without linearisation.
pub fn ejm_exact(params: &CircuitParams, x: f64) -> f64 {
    let phase = params.alpha() * x;
    let (c0, s0) = (cos_pi(params.flux_mech), sin_pi(params.flux_mech));
    let (cp, sp) = (phase.cos(), phase.sin());
    // angle addition keeps X = 0 exact at half-integer flux
    let c = c0 * cp - s0 * sp;
    let s = s0 * cp + c0 * sp;
    params.ej_max_mech * (c * c + params.asym * params.asym * s * s).sqrt()
}

/// First-order expansion of [`ejm_exact`] in the displacement.
pub fn ejm_linearized(params: &CircuitParams, x: f64) -> f64 {
    let f = params.flux_mech;
    let cos = cos_pi(f);
    let sign = if cos < 0.0 { -1.0 } else { 1.0 };
    let cj_cos = sign * josephson_scale(f, params.asym);
    let factors = asymmetry_factors(f, params.asym);
    params.ej_max_mech * (cj_cos - factors.s_j * sin_pi(f) * params.alpha() * x)
}

/// `E_J,max^M c_J |cos(πΦ_M/Φ₀)|`, the static Josephson energy of the
/// mechanical SQUID.
pub fn ej_mech_eff(params: &CircuitParams) -> f64 {
    params.ej_max_mech * josephson_scale(params.flux_mech, params.asym)
}

/// `Ẽ_J = E_J + E_J,max^M c_J |cos(πΦ_M/Φ₀)|`.
pub fn effective_josephson(params: &CircuitParams) -> f64 {
    params.ej_transmon + ej_mech_eff(params)
}

/// Transmon frequency `√(8 Ẽ_J E_C) − E_C`.
pub fn transmon_frequency(ej_tilde: f64, ec: f64) -> f64 {
    (8.0 * ej_tilde * ec).sqrt() - ec
}

/// True when `Ẽ_J/E_C` is below the transmon regime threshold.
pub fn charge_noise_warning(ej_tilde: f64, ec: f64) -> bool {
    ej_tilde / ec < TRANSMON_REGIME_RATIO
}

/// Dimensionless impedance `z = √(E_C / 2Ẽ_J)`, i.e. `Z e²/ħ`.
pub fn impedance_ratio(ej_tilde: f64, ec: f64) -> f64 {
    (ec / (2.0 * ej_tilde)).sqrt()
}

/// Bare radiation-pressure coupling `g0` (rad/s).
pub fn coupling_g0(params: &CircuitParams) -> f64 {
    let z = impedance_ratio(effective_josephson(params), params.ec);
    let s_j = asymmetry_factors(params.flux_mech, params.asym).s_j;
    let lever = params.alpha() * params.x_zpf;
    // +0.0 folds a signed zero into +0
    -2.0 * z * s_j * params.ej_max_mech * sin_pi(params.flux_mech) * lever + 0.0
}

/// Anharmonic correction `g0'` multiplying `c†c†cc(b + b†)`.
pub fn coupling_g0_prime(params: &CircuitParams) -> f64 {
    let z = impedance_ratio(effective_josephson(params), params.ec);
    let s_j = asymmetry_factors(params.flux_mech, params.asym).s_j;
    let lever = params.alpha() * params.x_zpf;
    z * z * s_j * params.ej_max_mech * sin_pi(params.flux_mech) * lever + 0.0
}

/// Second-order coupling `g0''` multiplying `c†c(b + b†)²`.
///
/// Evaluated as `z (1 − a²) sin² cos / (cos² + a² sin²) E (αX)²`, which equals
/// `z (s_J / c_J) tan sin E (αX)²` and tends to zero at half-integer flux when
/// `a_J > 0`. A symmetric SQUID at half flux diverges.
pub fn coupling_g0_dprime(params: &CircuitParams) -> f64 {
    let z = impedance_ratio(effective_josephson(params), params.ec);
    let a2 = params.asym * params.asym;
    let (c, s) = (cos_pi(params.flux_mech), sin_pi(params.flux_mech));
    let lever = params.alpha() * params.x_zpf;
    let denom = c * c + a2 * s * s;
    if denom == 0.0 {
        return f64::INFINITY;
    }
    z * (1.0 - a2) * s * s * c / denom * params.ej_max_mech * lever * lever + 0.0
}

/// Screening parameter `β_L = L_g / (π L_J)` with `L_J = 2φ₀²/E_J,max^M`.
pub fn screening_parameter(params: &CircuitParams) -> f64 {
    let ej_joule = HBAR * params.ej_max_mech;
    let l_j = 2.0 * REDUCED_FLUX_QUANTUM * REDUCED_FLUX_QUANTUM / ej_joule;
    params.geometric_inductance / (std::f64::consts::PI * l_j)
}

/// All derived circuit quantities at the parameters' operating point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedCircuit {
    pub c_j: f64,
    pub s_j: f64,
    pub alpha: f64,
    pub ej_mech_eff: f64,
    pub ej_tilde: f64,
    pub omega_t: f64,
    pub impedance_ratio: f64,
    /// Transmon impedance `Z` in ohms.
    pub impedance_ohm: f64,
    pub g0: f64,
    pub g0_prime: f64,
    pub g0_dprime: f64,
    pub beta_screen: f64,
    pub charge_noise_warning: bool,
}

impl DerivedCircuit {
    pub fn compute(params: &CircuitParams) -> Self {
        let factors = asymmetry_factors(params.flux_mech, params.asym);
        let ej_tilde = effective_josephson(params);
        let z = impedance_ratio(ej_tilde, params.ec);
        Self {
            c_j: factors.c_j,
            s_j: factors.s_j,
            alpha: params.alpha(),
            ej_mech_eff: ej_mech_eff(params),
            ej_tilde,
            omega_t: transmon_frequency(ej_tilde, params.ec),
            impedance_ratio: z,
            impedance_ohm: RESISTANCE_UNIT * z,
            g0: coupling_g0(params),
            g0_prime: coupling_g0_prime(params),
            g0_dprime: coupling_g0_dprime(params),
            beta_screen: screening_parameter(params),
            charge_noise_warning: charge_noise_warning(ej_tilde, params.ec),
        }
    }
}

/// `E_J` that puts the transmon at `omega_t` for the given mechanical flux,
/// without any window check. May be negative when unreachable.
pub fn compensating_ej(params: &CircuitParams, omega_t: f64, flux: f64) -> f64 {
    let ej_tilde = (omega_t + params.ec).powi(2) / (8.0 * params.ec);
    ej_tilde - params.ej_max_mech * josephson_scale(flux, params.asym)
}

/// Transmon `E_J` that holds the qubit at `omega_t` while the mechanical SQUID
/// sits at `flux`; errors when the required value leaves `window`.
pub fn flux_compensation(
    params: &CircuitParams,
    omega_t: f64,
    flux: f64,
    window: EjWindow,
) -> Result<f64, CircuitError> {
    let ej = compensating_ej(params, omega_t, flux);
    let to_hz = crate::constants::angular_to_hz;
    if ej < window.min {
        return Err(CircuitError::EjOutOfWindow {
            flux,
            required_hz: to_hz(ej),
            bound: Bound::Lower,
            bound_hz: to_hz(window.min),
        });
    }
    if ej > window.max {
        return Err(CircuitError::EjOutOfWindow {
            flux,
            required_hz: to_hz(ej),
            bound: Bound::Upper,
            bound_hz: to_hz(window.max),
        });
    }
    Ok(ej)
}

/// Location and size of the largest `|g0|` in `window`.
pub fn max_abs_g0(params: &CircuitParams, window: FluxWindow, bias: &TransmonBias) -> Result<(f64, f64), CircuitError> {
    window.validate()?;
    let eval = |f: f64| -> Result<f64, CircuitError> { Ok(coupling_g0(&bias.apply(params, f)?).abs()) };
    const SAMPLES: usize = 2001;
    let step = (window.hi - window.lo) / (SAMPLES - 1) as f64;
    let mut best = (window.lo, eval(window.lo)?);
    for i in 1..SAMPLES {
        let f = window.lo + step * i as f64;
        let v = eval(f)?;
        if v > best.1 {
            best = (f, v);
        }
    }
    // golden-section refinement inside the bracketing cell
    let (mut a, mut b) = ((best.0 - step).max(window.lo), (best.0 + step).min(window.hi));
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..80 {
        let c = b - inv_phi * (b - a);
        let d = a + inv_phi * (b - a);
        if eval(c)? > eval(d)? {
            b = d;
        } else {
            a = c;
        }
    }
    let mid = 0.5 * (a + b);
    let v = eval(mid)?;
    Ok(if v > best.1 { (mid, v) } else { best })
}

/// `X_ZPF` such that the largest `|g0|` over `window` equals `g0_target`.
/// `g0` is linear in `X_ZPF`, so this is a single division.
pub fn calibrate_xzpf(
    params: &CircuitParams,
    g0_target: f64,
    window: FluxWindow,
    bias: &TransmonBias,
) -> Result<f64, CircuitError> {
    window.validate()?;
    if !(g0_target >= 0.0) || !g0_target.is_finite() {
        return Err(CircuitError::InvalidParameter {
            name: "g0_target",
            reason: "must be finite and >= 0".into(),
        });
    }
    let unit = CircuitParams { x_zpf: 1.0, ..*params };
    let (_, per_metre) = max_abs_g0(&unit, window, bias)?;
    if per_metre == 0.0 {
        return Err(CircuitError::CouplingUnreachable {
            target_hz: crate::constants::angular_to_hz(g0_target),
            max_hz: 0.0,
        });
    }
    Ok(g0_target / per_metre)
}

/// Flux in `window` at which `|g0 + 2g0'|` equals `g_eff_target`, found by
/// bisection. `|g0|` must be monotone on the window (true for the operating
/// window next to half flux).
pub fn flux_for_coupling(
    params: &CircuitParams,
    g_eff_target: f64,
    window: FluxWindow,
    bias: &TransmonBias,
) -> Result<f64, CircuitError> {
    window.validate()?;
    let geff = |f: f64| -> Result<f64, CircuitError> {
        let p = bias.apply(params, f)?;
        Ok((coupling_g0(&p) + 2.0 * coupling_g0_prime(&p)).abs())
    };
    let (mut a, mut b) = (window.lo, window.hi);
    let (fa, fb) = (geff(a)? - g_eff_target, geff(b)? - g_eff_target);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(CircuitError::CouplingUnreachable {
            target_hz: crate::constants::angular_to_hz(g_eff_target),
            max_hz: crate::constants::angular_to_hz(geff(a)?.max(geff(b)?)),
        });
    }
    let sa = fa.signum();
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m == a || m == b {
            break;
        }
        let fm = geff(m)? - g_eff_target;
        if fm == 0.0 {
            return Ok(m);
        }
        if fm.signum() == sa {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// One flux point of a coupling curve (rad/s values).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingRow {
    pub flux_mech: f64,
    pub g0: f64,
    pub g0_prime: f64,
    pub g0_dprime: f64,
    pub omega_t: f64,
    pub ej_transmon: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CouplingCurve {
    pub rows: Vec<CouplingRow>,
    /// Grid points the bias could not reach, with the reason.
    pub rejected: Vec<(f64, CircuitError)>,
}

/// Evaluate the couplings and transmon frequency along `flux_grid`.
pub fn coupling_curve(
    params: &CircuitParams,
    flux_grid: &[f64],
    bias: &TransmonBias,
) -> Result<CouplingCurve, CircuitError> {
    if flux_grid.is_empty() {
        return Err(CircuitError::EmptyGrid);
    }
    let mut rows = Vec::with_capacity(flux_grid.len());
    let mut rejected = Vec::new();
    for &f in flux_grid {
        match bias.apply(params, f) {
            Ok(p) => {
                let d = DerivedCircuit::compute(&p);
                rows.push(CouplingRow {
                    flux_mech: f,
                    g0: d.g0,
                    g0_prime: d.g0_prime,
                    g0_dprime: d.g0_dprime,
                    omega_t: d.omega_t,
                    ej_transmon: p.ej_transmon,
                });
            }
            Err(e @ CircuitError::EjOutOfWindow { .. }) => rejected.push((f, e)),
            Err(e) => return Err(e),
        }
    }
    Ok(CouplingCurve { rows, rejected })
}

/// Evenly spaced grid including both endpoints.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| {
                if i == n - 1 {
                    hi
                } else {
                    lo + (hi - lo) * i as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::angular_to_hz;
    use approx::assert_relative_eq;

    fn table1_at(flux: f64) -> CircuitParams {
        let p = CircuitParams::table1();
        let bias = TransmonBias::Compensated {
            omega_t: hz_to_angular(TABLE1_OMEGA_T_HZ),
            window: EjWindow::physical(),
        };
        bias.apply(&p, flux).unwrap()
    }

    #[test]
    fn zero_asymmetry_factors_are_unity() {
        let f = asymmetry_factors(0.3, 0.0);
        assert_eq!((f.c_j, f.s_j), (1.0, 1.0));
    }

    #[test]
    fn asymmetry_factors_near_half_flux() {
        let f = asymmetry_factors(0.49, 0.01);
        assert!((f.c_j - 1.0494).abs() < 1e-4, "{}", f.c_j);
        assert!((f.s_j - 0.9529).abs() < 1e-4, "{}", f.s_j);
        assert_relative_eq!(f.s_j * f.c_j, 1.0 - 1e-4, max_relative = 1e-14);
    }

    #[test]
    fn asymmetry_factors_at_half_flux_limit() {
        let f = asymmetry_factors(0.5, 0.01);
        assert!(f.c_j.is_infinite());
        assert_eq!(f.s_j, 0.0);
        assert_relative_eq!(josephson_scale(0.5, 0.01), 0.01, max_relative = 1e-15);
    }

    #[test]
    fn c_j_matches_exact_energy_over_cosine() {
        // the factorised form against the exact energy divided by |cos|
        let mut p = CircuitParams::table1();
        p.flux_mech = 0.49;
        let exact_over_cos = ejm_exact(&p, 0.0) / p.ej_max_mech / cos_pi(0.49).abs();
        assert_relative_eq!(exact_over_cos, asymmetry_factors(0.49, 0.01).c_j, max_relative = 1e-13);
    }

    #[test]
    fn ejm_exact_trivial_points() {
        let mut p = CircuitParams::table1();
        p.flux_mech = 0.0;
        assert_relative_eq!(ejm_exact(&p, 0.0), p.ej_max_mech, max_relative = 1e-15);
        p.flux_mech = 0.5;
        assert_relative_eq!(ejm_exact(&p, 0.0), 0.01 * p.ej_max_mech, max_relative = 1e-13);
    }

    #[test]
    fn linearisation_agrees_for_small_displacement() {
        let mut p = CircuitParams::table1();
        p.flux_mech = 0.49;
        let x = 1e-4 / p.alpha();
        let exact = ejm_exact(&p, x);
        let lin = ejm_linearized(&p, x);
        assert!(((lin - exact) / exact).abs() <= 1e-4, "{}", (lin - exact) / exact);
    }

    #[test]
    fn transmon_frequency_examples() {
        let w = transmon_frequency(hz_to_angular(15.07e9), hz_to_angular(0.28e9));
        assert!((angular_to_hz(w) / 1e9 - 5.53).abs() < 5e-3);
        let ec = 1.0;
        assert_eq!(transmon_frequency(ec / 8.0, ec), 0.0);
    }

    #[test]
    fn frequency_floor_at_half_flux() {
        let mut p = CircuitParams::table1();
        p.flux_mech = 0.5;
        p.ej_transmon = hz_to_angular(3e9);
        let d = DerivedCircuit::compute(&p);
        assert_relative_eq!(angular_to_hz(d.ej_tilde), 5e9, max_relative = 1e-12);
        let expected = (8.0f64 * 5.0 * 0.28).sqrt() - 0.28;
        assert!((angular_to_hz(d.omega_t) / 1e9 - expected).abs() < 1e-9);
        assert!((expected - 3.066).abs() < 1e-3);
        // Ẽ_J/E_C ≈ 17.9 sits just inside the charge-sensitive regime
        assert!(d.charge_noise_warning);
    }

    #[test]
    fn charge_regime_flag() {
        assert!(charge_noise_warning(10.0, 1.0));
        assert!(!charge_noise_warning(54.0, 1.0));
    }

    #[test]
    fn g0_vanishes_at_zero_and_half_flux() {
        let p = CircuitParams::table1();
        assert_eq!(coupling_g0(&p.at_flux(0.0)), 0.0);
        assert_eq!(coupling_g0(&p.at_flux(0.5)), 0.0);
        assert_eq!(coupling_g0_prime(&p.at_flux(0.0)), 0.0);
        assert_eq!(coupling_g0_dprime(&p.at_flux(0.0)), 0.0);
        assert_eq!(coupling_g0_dprime(&p.at_flux(0.5)), 0.0);
    }

    #[test]
    fn g0_at_operating_point_is_table_value() {
        let p = table1_at(0.49);
        let d = DerivedCircuit::compute(&p);
        assert!((d.impedance_ratio - 0.0964).abs() < 1e-4);
        assert!((p.x_zpf - 2.9e-14).abs() < 0.05e-14, "{}", p.x_zpf);
        assert!((angular_to_hz(d.g0.abs()) - 2.4e6).abs() < 1.0);
        assert!(d.g0 < 0.0);
    }

    #[test]
    fn g0_prime_ratio_is_minus_half_impedance() {
        for &f in &[0.1, 0.3, 0.45, 0.49, 0.499] {
            let p = table1_at(0.49).at_flux(f);
            let d = DerivedCircuit::compute(&p);
            // -ħZ/(8φ₀²) evaluated in SI units
            let z_ohm = d.impedance_ohm;
            let ratio_si = -HBAR * z_ohm / (8.0 * REDUCED_FLUX_QUANTUM * REDUCED_FLUX_QUANTUM);
            assert_relative_eq!(d.g0_prime / d.g0, ratio_si, max_relative = 1e-12);
            assert_relative_eq!(d.g0_prime / d.g0, -d.impedance_ratio / 2.0, max_relative = 1e-12);
        }
        let d = DerivedCircuit::compute(&table1_at(0.49));
        assert!((angular_to_hz(d.g0_prime.abs()) / 1e6 - 0.116).abs() < 2e-3);
    }

    #[test]
    fn g0_matches_si_formula() {
        let p = table1_at(0.49);
        let d = DerivedCircuit::compute(&p);
        // -(αZ/2φ₀²) s_J E sin X with E in joules, divided by ħ
        let z_ohm = RESISTANCE_UNIT * d.impedance_ratio;
        let e_joule = HBAR * p.ej_max_mech;
        let g0_si = -(d.alpha * z_ohm / (2.0 * REDUCED_FLUX_QUANTUM.powi(2)))
            * d.s_j
            * e_joule
            * (std::f64::consts::PI * 0.49).sin()
            * p.x_zpf;
        assert_relative_eq!(d.g0, g0_si, max_relative = 1e-12);
    }

    #[test]
    fn g0_dprime_peak_near_half_flux() {
        // the transmon bias stays at its operating-point value across the sweep
        let p = CircuitParams::table1();
        let bias = TransmonBias::Fixed;
        let grid = linspace(0.45, 0.4999, 5001);
        let (f_peak, v_peak) = grid
            .iter()
            .map(|&f| (f, coupling_g0_dprime(&bias.apply(&p, f).unwrap()).abs()))
            .fold((0.0, 0.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        let khz = angular_to_hz(v_peak) / 1e3;
        assert!((khz - 5.0).abs() <= 1.5, "peak {khz} kHz");
        assert!((f_peak - 0.497).abs() < 2e-3, "at {f_peak}");
    }

    #[test]
    fn calibration_examples() {
        let p = CircuitParams::table1();
        let bias = TransmonBias::Fixed;
        let w = FluxWindow::new(0.45, 0.5).unwrap();
        let target = hz_to_angular(2.4e6);
        let x = calibrate_xzpf(&p, target, w, &bias).unwrap();
        assert!((x / 2.9e-14 - 1.0).abs() < 0.05, "{x}");
        // implied effective mass is ~1e-14 kg
        let m = HBAR / (2.0 * p.omega_m * x * x);
        assert!(m > 3e-15 && m < 3e-14, "{m}");
        assert_eq!(calibrate_xzpf(&p, 0.0, w, &bias).unwrap(), 0.0);
        let x2 = calibrate_xzpf(&p, 2.0 * target, w, &bias).unwrap();
        assert_relative_eq!(x2, 2.0 * x, max_relative = 1e-14);
        assert!(matches!(
            calibrate_xzpf(&p, target, FluxWindow { lo: 0.4, hi: 0.4 }, &bias),
            Err(CircuitError::DegenerateWindow { .. })
        ));
    }

    #[test]
    fn compensation_examples() {
        let p = CircuitParams::table1();
        let omega_t = hz_to_angular(5.53e9);
        let err = flux_compensation(&p, omega_t, 0.5, EjWindow::table1()).unwrap_err();
        match err {
            CircuitError::EjOutOfWindow { required_hz, bound, .. } => {
                assert_eq!(bound, Bound::Upper);
                assert!((required_hz / 1e9 - 13.07).abs() < 0.01);
            }
            e => panic!("{e:?}"),
        }
        let ej = flux_compensation(&p, omega_t, 0.49, EjWindow::table1()).unwrap();
        assert!((angular_to_hz(ej) / 1e9 - 8.48).abs() < 0.01);
        let back = transmon_frequency(effective_josephson(&CircuitParams { ej_transmon: ej, ..p }), p.ec);
        assert_relative_eq!(back, omega_t, max_relative = 1e-10);

        let mut q = p;
        q.ej_max_mech = 0.0;
        let a = compensating_ej(&q, omega_t, 0.3);
        let b = compensating_ej(&q, omega_t, 0.49);
        assert_eq!(a, b);
    }

    #[test]
    fn screening_parameter_is_small() {
        let b = screening_parameter(&CircuitParams::table1());
        assert!((b - 0.06).abs() <= 0.006, "{b}");
    }

    #[test]
    fn flux_for_quarter_coupling() {
        let p = CircuitParams::table1();
        let bias = TransmonBias::Compensated {
            omega_t: hz_to_angular(TABLE1_OMEGA_T_HZ),
            window: EjWindow::physical(),
        };
        let target = p.omega_m / 4.0;
        let f = flux_for_coupling(&p, target, TABLE1_FLUX_WINDOW, &bias).unwrap();
        let q = bias.apply(&p, f).unwrap();
        let geff = (coupling_g0(&q) + 2.0 * coupling_g0_prime(&q)).abs();
        assert_relative_eq!(geff, target, max_relative = 1e-9);
        assert!(flux_for_coupling(&p, 100.0 * target, TABLE1_FLUX_WINDOW, &bias).is_err());
    }

    #[test]
    fn curve_rejects_empty_grid_and_records_unreachable_points() {
        let p = CircuitParams::table1();
        assert_eq!(
            coupling_curve(&p, &[], &TransmonBias::Fixed),
            Err(CircuitError::EmptyGrid)
        );
        let bias = TransmonBias::Compensated {
            omega_t: hz_to_angular(TABLE1_OMEGA_T_HZ),
            window: EjWindow::table1(),
        };
        let c = coupling_curve(&p, &[0.49, 0.5], &bias).unwrap();
        assert_eq!(c.rows.len(), 1);
        assert_eq!(c.rejected.len(), 1);
    }

    #[test]
    fn reduce_flux_branch() {
        assert!((reduce_flux(0.7) - 0.3).abs() < 1e-15);
        assert!((reduce_flux(-0.2) - 0.2).abs() < 1e-15);
        assert_eq!(reduce_flux(1.5), 0.5);
    }
}
