//! Embedded Dormand–Prince 5(4) integration of `dρ/dt = L(t) ρ` on the
//! column-stacked density matrix.

use num_complex::Complex64;

use super::SolverError;
use crate::model::{unvectorize, vectorize, SystemModel};
use crate::quantum::{Csr, DensityMatrix, HilbertSpace, Operator, MECHANICS};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Generator active on one piece of a [`Schedule`].
#[derive(Debug, Clone)]
pub enum Generator {
    Constant(Csr),
    /// Linear interpolation `(1 − s) L_from + s L_to`, `s = (t − t0)/(t1 − t0)`,
    /// clamped to `[0, 1]`. Exact for a linear ramp of the couplings because
    /// the Liouvillian is linear in the Hamiltonian.
    Ramp {
        from: Csr,
        to: Csr,
        t0: f64,
        t1: f64,
    },
}

impl Generator {
    fn dim(&self) -> usize {
        match self {
            Generator::Constant(l) => l.rows(),
            Generator::Ramp { from, .. } => from.rows(),
        }
    }

    fn apply(&self, t: f64, x: &[Complex64], y: &mut [Complex64], scratch: &mut [Complex64]) {
        match self {
            Generator::Constant(l) => l.par_matvec_into(x, y),
            Generator::Ramp { from, to, t0, t1 } => {
                let s = ((t - t0) / (t1 - t0)).clamp(0.0, 1.0);
                from.par_matvec_into(x, y);
                to.par_matvec_into(x, scratch);
                for (a, b) in y.iter_mut().zip(scratch.iter()) {
                    *a = *a * (1.0 - s) + *b * s;
                }
            }
        }
    }
}

/// Piecewise generator: piece `k` is active from `starts[k]` until the next
/// start. Switches are instantaneous and the integrator restarts exactly at
/// each one.
#[derive(Debug, Clone)]
pub struct Schedule {
    starts: Vec<f64>,
    pieces: Vec<Generator>,
}

impl Schedule {
    pub fn constant(l: Csr) -> Self {
        Self {
            starts: vec![f64::NEG_INFINITY],
            pieces: vec![Generator::Constant(l)],
        }
    }

    /// `pieces[k] = (start time, generator)`, starts strictly increasing.
    pub fn new(pieces: Vec<(f64, Generator)>) -> Result<Self, SolverError> {
        if pieces.is_empty() {
            return Err(SolverError::InvalidInput("schedule has no pieces".into()));
        }
        let dim = pieces[0].1.dim();
        for w in pieces.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(SolverError::InvalidInput("schedule starts must increase".into()));
            }
        }
        if pieces.iter().any(|(_, g)| g.dim() != dim) {
            return Err(SolverError::InvalidInput("schedule pieces differ in dimension".into()));
        }
        let (mut starts, gens): (Vec<_>, Vec<_>) = pieces.into_iter().unzip();
        starts[0] = f64::NEG_INFINITY;
        Ok(Self { starts, pieces: gens })
    }

    fn dim(&self) -> usize {
        self.pieces[0].dim()
    }

    fn piece_at(&self, t: f64) -> usize {
        // last piece whose start is <= t
        self.starts.partition_point(|&s| s <= t).saturating_sub(1)
    }

    fn switch_times(&self) -> impl Iterator<Item = f64> + '_ {
        self.starts.iter().copied().skip(1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepControl {
    /// Error-controlled steps with per-element tolerance
    /// `atol + rtol · |ρ_ij|`.
    Adaptive { atol: f64, rtol: f64 },
    /// Fixed steps of the fifth-order solution (last step shortened to land on
    /// each stop). Used for convergence-order checks.
    Fixed(f64),
}

impl Default for StepControl {
    fn default() -> Self {
        StepControl::Adaptive { atol: 1e-9, rtol: 1e-7 }
    }
}

/// Which states to keep in the result.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateStorage {
    None,
    All,
    /// Every n-th output time (always including the first).
    Every(usize),
}

/// Abort when the population of the two highest mechanical levels exceeds
/// `limit` at an output time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeakGuard {
    pub limit: f64,
}

impl Default for LeakGuard {
    fn default() -> Self {
        Self { limit: 1e-6 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveOptions {
    pub control: StepControl,
    /// First trial step (s); defaults to `1e-3/ω_M` when evolving a model.
    pub initial_step: Option<f64>,
    pub max_steps: usize,
    pub storage: StateStorage,
    pub leak_guard: Option<LeakGuard>,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            control: StepControl::default(),
            initial_step: None,
            max_steps: 5_000_000,
            storage: StateStorage::All,
            leak_guard: Some(LeakGuard::default()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evaluations: usize,
}

#[derive(Debug, Clone)]
pub struct EvolveResult {
    pub times: Vec<f64>,
    /// `(output index, state)` for the stored outputs.
    pub states: Vec<(usize, DensityMatrix)>,
    pub expectations: Vec<Series>,
    /// Population of the top two mechanical levels at each output.
    pub leak: Vec<f64>,
    /// `|Tr ρ − 1|` at each output.
    pub trace_drift: Vec<f64>,
    pub final_state: DensityMatrix,
    pub stats: StepStats,
}

impl EvolveResult {
    pub fn series(&self, name: &str) -> Option<&[f64]> {
        self.expectations
            .iter()
            .find(|s| s.name == name)
            .map(|s| s.values.as_slice())
    }

    pub fn max_trace_drift(&self) -> f64 {
        self.trace_drift.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_leak(&self) -> f64 {
        self.leak.iter().copied().fold(0.0, f64::max)
    }
}

/// Evolves `rho0` under a single time-independent model and reports the
/// states and observables at every time in `t_grid`.
pub fn evolve(
    model: &SystemModel,
    rho0: &DensityMatrix,
    t_grid: &[f64],
    observables: &[(String, Operator)],
    mut opts: EvolveOptions,
) -> Result<EvolveResult, SolverError> {
    if rho0.space() != &model.space {
        return Err(SolverError::InvalidInput(format!(
            "initial state lives on {} but the model on {}",
            rho0.space(),
            model.space
        )));
    }
    if opts.initial_step.is_none() && model.spec.omega_m > 0.0 {
        opts.initial_step = Some(1e-3 / model.spec.omega_m);
    }
    let schedule = Schedule::constant(model.liouvillian()?);
    evolve_schedule(&schedule, rho0, t_grid, observables, opts)
}

fn expectation_vec(op: &Csr, v: &[Complex64], d: usize) -> Complex64 {
    // Tr(Aρ) = Σ_ij A_ij ρ_ji with ρ_ji = v[j + i·d]
    op.iter().map(|(i, j, a)| a * v[j + i * d]).sum()
}

fn trace_vec(v: &[Complex64], d: usize) -> Complex64 {
    (0..d).map(|i| v[i + i * d]).sum()
}

fn top_levels_population(v: &[Complex64], space: &HilbertSpace) -> f64 {
    let dims = space.dims();
    if dims.len() <= MECHANICS {
        return 0.0;
    }
    let d = space.dim();
    let n_m = dims[MECHANICS];
    let n_t = d / n_m;
    let mut p = 0.0;
    for t in 0..n_t {
        for m in n_m.saturating_sub(2)..n_m {
            let i = t * n_m + m;
            p += v[i + i * d].re;
        }
    }
    p
}

// Dormand–Prince 5(4) tableau
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

struct Stepper<'a> {
    schedule: &'a Schedule,
    k: Vec<Vec<Complex64>>,
    stage: Vec<Complex64>,
    scratch: Vec<Complex64>,
    y_new: Vec<Complex64>,
    fsal_valid: bool,
    stats: StepStats,
}

impl<'a> Stepper<'a> {
    fn new(schedule: &'a Schedule) -> Self {
        let n = schedule.dim();
        Self {
            schedule,
            k: vec![vec![ZERO; n]; 7],
            stage: vec![ZERO; n],
            scratch: vec![ZERO; n],
            y_new: vec![ZERO; n],
            fsal_valid: false,
            stats: StepStats::default(),
        }
    }

    /// One trial step from `(t, y)` with the generator piece `piece`. Leaves
    /// the candidate in `y_new` and returns the scaled error norm (0 when
    /// `tol` is `None`).
    fn trial(&mut self, piece: usize, t: f64, dt: f64, y: &[Complex64], tol: Option<(f64, f64)>) -> f64 {
        let schedule = self.schedule;
        let gen = &schedule.pieces[piece];
        if !self.fsal_valid {
            gen.apply(t, y, &mut self.k[0], &mut self.scratch);
            self.stats.rhs_evaluations += 1;
        }
        for s in 1..7 {
            let a = &A[s];
            for (i, st) in self.stage.iter_mut().enumerate() {
                let mut acc = ZERO;
                for (j, &aj) in a.iter().enumerate().take(s) {
                    if aj != 0.0 {
                        acc += self.k[j][i] * aj;
                    }
                }
                *st = y[i] + acc * dt;
            }
            gen.apply(t + C[s] * dt, &self.stage, &mut self.k[s], &mut self.scratch);
            self.stats.rhs_evaluations += 1;
        }
        // stage 7 input equals the fifth-order solution
        self.y_new.copy_from_slice(&self.stage);
        let Some((atol, rtol)) = tol else { return 0.0 };
        let mut err: f64 = 0.0;
        for (i, yi) in y.iter().enumerate() {
            let mut e = ZERO;
            for (j, &ej) in E.iter().enumerate() {
                if ej != 0.0 {
                    e += self.k[j][i] * ej;
                }
            }
            let sc = atol + rtol * yi.norm().max(self.y_new[i].norm());
            err = err.max((e * dt).norm() / sc);
        }
        err
    }

    fn accept(&mut self, y: &mut Vec<Complex64>) {
        std::mem::swap(y, &mut self.y_new);
        self.k.swap(0, 6);
        self.fsal_valid = true;
        self.stats.accepted += 1;
    }
}

/// Evolves under a piecewise generator.
pub fn evolve_schedule(
    schedule: &Schedule,
    rho0: &DensityMatrix,
    t_grid: &[f64],
    observables: &[(String, Operator)],
    opts: EvolveOptions,
) -> Result<EvolveResult, SolverError> {
    let d = rho0.dim();
    if schedule.dim() != d * d {
        return Err(SolverError::InvalidInput(format!(
            "generator dimension {} does not match state dimension {}",
            schedule.dim(),
            d * d
        )));
    }
    if t_grid.is_empty() {
        return Err(SolverError::InvalidInput("time grid is empty".into()));
    }
    if t_grid.windows(2).any(|w| !(w[1] > w[0])) || t_grid.iter().any(|t| !t.is_finite()) {
        return Err(SolverError::InvalidInput(
            "time grid must be finite and strictly increasing".into(),
        ));
    }
    for (name, op) in observables {
        if op.space() != rho0.space() {
            return Err(SolverError::InvalidInput(format!(
                "observable `{name}` is on a different space"
            )));
        }
    }
    let obs: Vec<Csr> = observables.iter().map(|(_, o)| o.to_csr()).collect();
    let space = rho0.space().clone();
    let n_m = space.dims().get(MECHANICS).copied().unwrap_or(0);

    let mut y = vectorize(rho0.matrix());
    let mut result = EvolveResult {
        times: t_grid.to_vec(),
        states: Vec::new(),
        expectations: observables
            .iter()
            .map(|(n, _)| Series {
                name: n.clone(),
                values: Vec::with_capacity(t_grid.len()),
            })
            .collect(),
        leak: Vec::with_capacity(t_grid.len()),
        trace_drift: Vec::with_capacity(t_grid.len()),
        final_state: rho0.clone(),
        stats: StepStats::default(),
    };

    let record = |k: usize, t: f64, y: &[Complex64], result: &mut EvolveResult| -> Result<(), SolverError> {
        let leak = top_levels_population(y, &space);
        result.leak.push(leak);
        result.trace_drift.push((trace_vec(y, d) - 1.0).norm());
        for (s, o) in result.expectations.iter_mut().zip(&obs) {
            s.values.push(expectation_vec(o, y, d).re);
        }
        let store = match opts.storage {
            StateStorage::None => false,
            StateStorage::All => true,
            StateStorage::Every(n) => n > 0 && k.is_multiple_of(n),
        };
        if store {
            let rho = DensityMatrix::from_matrix_unchecked(space.clone(), unvectorize(y, d))?;
            result.states.push((k, rho));
        }
        if let Some(g) = opts.leak_guard {
            // with fewer than three levels the top two are the whole mode
            if n_m > 2 && leak > g.limit {
                return Err(SolverError::TruncationLeak {
                    leak,
                    t,
                    limit: g.limit,
                    n_m,
                    suggested: n_m + n_m.div_ceil(2),
                });
            }
        }
        Ok(())
    };

    record(0, t_grid[0], &y, &mut result)?;

    // stops are output times plus switch times inside the grid
    let t_end = *t_grid.last().unwrap();
    let mut stops: Vec<(f64, Option<usize>)> = t_grid.iter().enumerate().skip(1).map(|(k, &t)| (t, Some(k))).collect();
    for s in schedule.switch_times() {
        if s > t_grid[0] && s < t_end && !t_grid.contains(&s) {
            stops.push((s, None));
        }
    }
    stops.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut stepper = Stepper::new(schedule);
    let mut t = t_grid[0];
    let span = t_end - t_grid[0];
    let mut dt = match opts.control {
        StepControl::Fixed(h) => {
            if !(h > 0.0) {
                return Err(SolverError::InvalidInput("fixed step must be > 0".into()));
            }
            h
        }
        StepControl::Adaptive { .. } => opts.initial_step.unwrap_or(span * 1e-6).min(span),
    };
    let tol = match opts.control {
        StepControl::Adaptive { atol, rtol } => Some((atol, rtol)),
        StepControl::Fixed(_) => None,
    };

    for (stop, out) in stops {
        // pieces switch at stop times, so the piece is fixed inside an interval
        let piece = schedule.piece_at(0.5 * (t + stop));
        stepper.fsal_valid = false;
        while t < stop {
            let remaining = stop - t;
            let last = dt >= remaining * (1.0 - 1e-12);
            let h = if last { remaining } else { dt };
            if h <= f64::EPSILON * t.abs().max(span) {
                return Err(SolverError::StepUnderflow { t, dt: h });
            }
            if stepper.stats.accepted + stepper.stats.rejected >= opts.max_steps {
                return Err(SolverError::MaxSteps(opts.max_steps));
            }
            let err = stepper.trial(piece, t, h, &y, tol);
            if !err.is_finite() {
                stepper.stats.rejected += 1;
                stepper.fsal_valid = true;
                dt = h * 0.2;
                continue;
            }
            if err <= 1.0 {
                stepper.accept(&mut y);
                t = if last { stop } else { t + h };
                if tol.is_some() {
                    let factor = if err == 0.0 {
                        5.0
                    } else {
                        (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                    };
                    // a shortened final step says nothing about the natural step
                    dt = if last { dt.max(h * factor) } else { h * factor };
                }
            } else {
                stepper.stats.rejected += 1;
                // k[0] still holds f(t, y)
                stepper.fsal_valid = true;
                dt = h * (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
            }
        }
        if let Some(k) = out {
            record(k, t, &y, &mut result)?;
        }
    }
    result.final_state = DensityMatrix::from_matrix_unchecked(space.clone(), unvectorize(&y, d))?;
    result.stats = stepper.stats;
    Ok(result)
}
