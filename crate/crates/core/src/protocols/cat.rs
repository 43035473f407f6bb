//! Bell-cat and cat-state preparation by a flux pulse.
//!
//! Sequence: prepare, Hadamard, switch the coupling on and evolve, switch it
//! off, correct the qubit phase, Hadamard, measure the qubit. The qubit phase
//! correction is a virtual Z rotation that cancels the phase the `|1⟩`
//! branch picks up during the pulse (geometric phase plus frequency shifts),
//! so that outcome 0 heralds `|0⟩ + |β⟩` rather than `|0⟩ + e^{iφ}|β⟩`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{displacement_oracle, hadamard, hadamard_with_tolerance, measure_qubit, qubit_phase, ProtocolError};
use crate::analysis::{
    axis, bellcat_fidelity, branch_overlaps, displaced_parity, ideal_cat, wigner, BellCatFidelity, CatParity, Fidelity,
    WignerGrid,
};
use crate::circuit::{CircuitParams, DerivedCircuit, TransmonBias};
use crate::model::{Couplings, Dissipation, Frame, ModelSpec, SystemModel, Truncation};
use crate::quantum::{fock_state, thermal_state, CMat, DensityMatrix, HilbertSpace, Operator};
use crate::solvers::{evolve, EvolveOptions, SolverError, StateStorage, StepControl, StepStats};

/// Step control for the pulse. Tighter than the solver default so that the
/// integration error stays well below the positivity checks on the final
/// state.
pub const CAT_STEP_CONTROL: StepControl = StepControl::Adaptive {
    atol: 1e-11,
    rtol: 1e-9,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CatInitial {
    /// `|0⟩_T |0⟩_M`.
    Ideal,
    /// Diagonal qubit with excited population `p1` times a thermal beam.
    Thermal { p1: f64, n_mech: f64 },
}

impl CatInitial {
    /// Residual excitations left by imperfect pre-cooling and qubit reset.
    pub const PRECOOLED: CatInitial = CatInitial::Thermal { p1: 0.05, n_mech: 0.1 };

    fn state(&self, t: Truncation) -> Result<DensityMatrix, ProtocolError> {
        match *self {
            CatInitial::Ideal => Ok(fock_state(t.n_t, 0)?.tensor(&fock_state(t.n_m, 0)?).to_density()),
            CatInitial::Thermal { p1, n_mech } => {
                if !(0.0..=1.0).contains(&p1) {
                    return Err(ProtocolError::InvalidInput(format!(
                        "qubit population {p1} outside [0, 1]"
                    )));
                }
                let diag: Vec<Complex64> = (0..t.n_t)
                    .map(|n| match n {
                        0 => 1.0 - p1,
                        1 => p1,
                        _ => 0.0,
                    })
                    .map(|p| Complex64::new(p, 0.0))
                    .collect();
                let q = DensityMatrix::new(HilbertSpace::single(t.n_t)?, CMat::from_diag(&diag))?;
                Ok(q.tensor(&thermal_state(t.n_m, n_mech)?))
            }
        }
    }
}

/// Square Wigner window; centred on the cat midpoint `β/2` when
/// `center_on_cat` is set, otherwise on the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WignerGridSpec {
    pub half_width: f64,
    pub points: usize,
    pub center_on_cat: bool,
}

impl Default for WignerGridSpec {
    fn default() -> Self {
        Self {
            half_width: 6.0,
            points: 201,
            center_on_cat: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CatConfig {
    pub params: CircuitParams,
    pub bias: TransmonBias,
    /// Mechanical flux while the coupling is on (Φ₀ units).
    pub flux_on: f64,
    pub truncation: Truncation,
    pub evolve_time: f64,
    pub initial: CatInitial,
    pub dissipation: bool,
    /// Number of evenly spaced time-series samples, endpoints included.
    pub samples: usize,
    /// Times at which the heralded mechanical state is recorded.
    pub snapshot_times: Vec<f64>,
    pub wigner: Option<WignerGridSpec>,
    /// Retry once with a larger mechanical cutoff on a truncation leak.
    pub escalate: bool,
    pub control: StepControl,
}

/// Heralded mechanical state if the pulse were stopped at `t`.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub t: f64,
    pub beta: Complex64,
    pub p0: f64,
    pub fidelity_even: Fidelity,
    pub rho_mech: DensityMatrix,
    pub wigner: Option<WignerGrid>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CatDiagnostics {
    pub max_trace_drift: f64,
    /// Largest population of the two highest mechanical levels.
    pub max_leak: f64,
    /// Of the state at the end of the pulse.
    pub min_eigenvalue: f64,
    pub hermiticity_error: f64,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

#[derive(Debug, Clone)]
pub struct CatRunResult {
    pub times: Vec<f64>,
    pub n_qubit: Vec<f64>,
    pub n_phonon: Vec<f64>,
    /// Oracle displacement at every sample time.
    pub beta_t: Vec<Complex64>,
    /// Coupling during the pulse, `g0 + 2g0'` (rad/s).
    pub g0_eff: f64,
    /// Oracle displacement at the end of the pulse.
    pub beta: Complex64,
    /// `2|g0_eff|/ω_M`.
    pub beta_max: f64,
    pub truncation: Truncation,
    pub escalated: bool,
    /// Bell-cat fidelity of the state at the end of the pulse, maximised over
    /// the branch phase.
    pub bellcat: BellCatFidelity,
    /// Virtual Z angle applied before the second Hadamard.
    pub virtual_z: f64,
    pub p_outcome: [f64; 2],
    /// Transmon population above the qubit subspace at measurement.
    pub leakage: f64,
    pub rho_mech_cond: [Option<DensityMatrix>; 2],
    pub fidelity_even: Fidelity,
    pub fidelity_odd: Option<Fidelity>,
    /// Parity of the outcome-0 state about `β/2`.
    pub parity_even: f64,
    pub snapshots: Vec<Snapshot>,
    pub diagnostics: CatDiagnostics,
}

/// State after the pulse turned into measurement results.
struct Herald {
    bellcat: BellCatFidelity,
    virtual_z: f64,
    p: [f64; 2],
    leakage: f64,
    states: [Option<DensityMatrix>; 2],
    even: Fidelity,
    odd: Option<Fidelity>,
}

fn herald(rho: &DensityMatrix, beta: Complex64) -> Result<Herald, ProtocolError> {
    let n_m = rho.space().dims()[1];
    let bellcat = bellcat_fidelity(rho, beta)?;
    let (c, _, _) = branch_overlaps(rho, beta)?;
    // exp(iθ c†c) multiplies ⟨00|ρ|1β⟩ by e^{−iθ}; θ = arg makes it real
    let theta = c.arg();
    // thermal qubit excitation during the pulse can populate level 2; it is
    // left untouched by the gate and reported as leakage by the measurement
    let corrected = hadamard_with_tolerance(&qubit_phase(rho, theta)?, f64::INFINITY)?;
    let m = measure_qubit(&corrected)?;
    let even = match &m.rho_mech[0] {
        Some(s) => Fidelity::of(s, &ideal_cat(beta, CatParity::Even, n_m)?)?,
        None => Fidelity::from_overlap(0.0),
    };
    let odd = match (&m.rho_mech[1], ideal_cat(beta, CatParity::Odd, n_m)) {
        (Some(s), Ok(psi)) => Some(Fidelity::of(s, &psi)?),
        _ => None,
    };
    Ok(Herald {
        bellcat,
        virtual_z: theta,
        p: [m.p0, m.p1],
        leakage: m.leakage,
        states: m.rho_mech,
        even,
        odd,
    })
}

fn snapshot(
    rho: &DensityMatrix,
    t: f64,
    beta: Complex64,
    spec: Option<WignerGridSpec>,
) -> Result<Snapshot, ProtocolError> {
    let h = herald(rho, beta)?;
    let [s0, _] = h.states;
    let rho_mech = s0.ok_or(ProtocolError::NullOutcome {
        outcome: 0,
        probability: h.p[0],
    })?;
    let wigner = match spec {
        Some(g) => {
            let (cx, cp) = if g.center_on_cat {
                let s = std::f64::consts::FRAC_1_SQRT_2;
                (s * beta.re, s * beta.im)
            } else {
                (0.0, 0.0)
            };
            let xs = axis(cx - g.half_width, cx + g.half_width, g.points);
            let ps = axis(cp - g.half_width, cp + g.half_width, g.points);
            Some(wigner(&rho_mech, &xs, &ps)?)
        }
        None => None,
    };
    Ok(Snapshot {
        t,
        beta,
        p0: h.p[0],
        fidelity_even: h.even,
        rho_mech,
        wigner,
    })
}

/// Output times: the evenly spaced samples merged with the snapshot times.
fn output_grid(cfg: &CatConfig) -> Vec<f64> {
    let mut ts = axis(0.0, cfg.evolve_time, cfg.samples);
    ts.extend(cfg.snapshot_times.iter().copied());
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    ts
}

fn validate(cfg: &CatConfig) -> Result<(), ProtocolError> {
    cfg.params.validate()?;
    if !(cfg.evolve_time > 0.0) || !cfg.evolve_time.is_finite() {
        return Err(ProtocolError::InvalidInput("evolve_time must be finite and > 0".into()));
    }
    if cfg.samples < 2 {
        return Err(ProtocolError::InvalidInput("need at least two time samples".into()));
    }
    if let Some(t) = cfg
        .snapshot_times
        .iter()
        .find(|&&t| !(0.0..=cfg.evolve_time).contains(&t))
    {
        return Err(ProtocolError::InvalidInput(format!(
            "snapshot time {t:e} s lies outside [0, {:e}] s",
            cfg.evolve_time
        )));
    }
    if let Some(g) = cfg.wigner {
        if !(g.half_width > 0.0) || g.points < 2 {
            return Err(ProtocolError::InvalidInput(
                "Wigner grid needs half_width > 0 and >= 2 points".into(),
            ));
        }
    }
    Ok(())
}

/// Runs the full sequence, escalating the mechanical cutoff once if the
/// pulse pushes population into the top levels.
pub fn cat_protocol(cfg: &CatConfig) -> Result<CatRunResult, ProtocolError> {
    validate(cfg)?;
    match run(cfg, cfg.truncation) {
        Err(ProtocolError::Solver(SolverError::TruncationLeak { .. })) if cfg.escalate => {
            let mut r = run(cfg, cfg.truncation.escalated())?;
            r.escalated = true;
            Ok(r)
        }
        other => other,
    }
}

fn run(cfg: &CatConfig, truncation: Truncation) -> Result<CatRunResult, ProtocolError> {
    let p_on = cfg.bias.apply(&cfg.params, cfg.flux_on)?;
    let couplings = Couplings::from_circuit(&DerivedCircuit::compute(&p_on));
    let omega_m = cfg.params.omega_m;
    let g = couplings.g0_eff();
    let model = SystemModel::build(ModelSpec {
        truncation,
        frame: Frame::QubitRotating,
        couplings,
        omega_m,
        ec: cfg.params.ec,
        drive: None,
        dissipation: if cfg.dissipation {
            Dissipation::from_params(&cfg.params)
        } else {
            Dissipation::none()
        },
    })?;
    let observables: Vec<(String, Operator)> = vec![
        ("n_qubit".into(), model.ops.n_c.clone()),
        ("n_phonon".into(), model.ops.n_b.clone()),
    ];

    let rho0 = hadamard(&cfg.initial.state(truncation)?)?;
    let grid = output_grid(cfg);
    let mut stops: Vec<f64> = cfg.snapshot_times.iter().copied().filter(|&t| t > 0.0).collect();
    stops.push(cfg.evolve_time);
    stops.sort_by(f64::total_cmp);
    stops.dedup();

    let opts = EvolveOptions {
        control: cfg.control,
        storage: StateStorage::None,
        ..EvolveOptions::default()
    };
    let mut times = vec![0.0];
    let mut n_qubit = vec![rho0.expectation(&model.ops.n_c)?.re];
    let mut n_phonon = vec![rho0.expectation(&model.ops.n_b)?.re];
    let mut states_at: Vec<(f64, DensityMatrix)> = vec![(0.0, rho0.clone())];
    let mut diag = CatDiagnostics::default();
    let mut stats = StepStats::default();
    let mut rho = rho0;
    let mut t0 = 0.0;
    for &stop in &stops {
        let seg: Vec<f64> = grid.iter().copied().filter(|&t| t >= t0 && t <= stop).collect();
        let seg = if seg.first() != Some(&t0) {
            std::iter::once(t0).chain(seg).collect()
        } else {
            seg
        };
        let res = evolve(&model, &rho, &seg, &observables, opts)?;
        for (k, &t) in res.times.iter().enumerate().skip(1) {
            times.push(t);
            n_qubit.push(res.expectations[0].values[k]);
            n_phonon.push(res.expectations[1].values[k]);
        }
        diag.max_trace_drift = diag.max_trace_drift.max(res.max_trace_drift());
        diag.max_leak = diag.max_leak.max(res.max_leak());
        stats.accepted += res.stats.accepted;
        stats.rejected += res.stats.rejected;
        rho = res.final_state;
        states_at.push((stop, rho.clone()));
        t0 = stop;
    }
    diag.min_eigenvalue = rho.min_eigenvalue()?;
    diag.hermiticity_error = rho.hermiticity_error();
    diag.accepted_steps = stats.accepted;
    diag.rejected_steps = stats.rejected;

    let beta = displacement_oracle(g, omega_m, cfg.evolve_time);
    let h = herald(&rho, beta)?;
    let parity_even = match &h.states[0] {
        Some(s) => displaced_parity(s, beta / 2.0)?,
        None => f64::NAN,
    };

    let mut snapshots = Vec::with_capacity(cfg.snapshot_times.len());
    for &ts in &cfg.snapshot_times {
        let (_, state) = states_at
            .iter()
            .find(|(t, _)| *t == ts)
            .expect("every snapshot time is a segment end");
        snapshots.push(snapshot(state, ts, displacement_oracle(g, omega_m, ts), cfg.wigner)?);
    }

    Ok(CatRunResult {
        beta_t: times.iter().map(|&t| displacement_oracle(g, omega_m, t)).collect(),
        times,
        n_qubit,
        n_phonon,
        g0_eff: g,
        beta,
        beta_max: 2.0 * g.abs() / omega_m,
        truncation,
        escalated: false,
        bellcat: h.bellcat,
        virtual_z: h.virtual_z,
        p_outcome: h.p,
        leakage: h.leakage,
        rho_mech_cond: h.states,
        fidelity_even: h.even,
        fidelity_odd: h.odd,
        parity_even,
        snapshots,
        diagnostics: diag,
    })
}
