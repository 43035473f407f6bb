//! Acceptance run for the whole library. Every criterion prints exactly one
//! `PASS` or `FAIL` line with the measured numbers; the process exits
//! non-zero when any criterion fails.
//!
//! Criterion 9 collects the solver invariants from every run made by the
//! others, so the criteria execute in order on one thread.

use std::f64::consts::PI;
use std::panic::{self, AssertUnwindSafe};
use std::time::{Duration, Instant};

use num_complex::Complex64;
use optomech::analysis::{axis, ideal_cat, wigner, CatParity, WignerKernel};
use optomech::circuit::{
    coupling_curve, flux_for_coupling, linspace, max_abs_g0, CircuitParams, DerivedCircuit, EjWindow, TransmonBias,
    TABLE1_FLUX_WINDOW, TABLE1_OMEGA_T_HZ,
};
use optomech::constants::{angular_to_hz, hz_to_angular};
use optomech::formats::{cat_timeseries_csv, cooling_map_csv, wigner_csv, write_density_matrix};
use optomech::model::{Couplings, Dissipation, DriveSpec, Frame, ModelSpec, SystemModel, Truncation};
use optomech::protocols::cat::CAT_STEP_CONTROL;
use optomech::protocols::{
    cat_protocol, cooling_sweep, displacement_oracle, CatConfig, CatInitial, CatRunResult, CoolingMap, CoolingSetup,
    WignerGridSpec,
};
use optomech::quantum::{coherent_state, fock_state, thermal_state, MECHANICS, TRANSMON};
use optomech::solvers::{evolve, steady_state, steady_state_by_evolution, EvolveOptions};

/// Worst solver invariants seen so far.
#[derive(Debug, Default)]
struct Invariants {
    trace_drift: f64,
    hermiticity: f64,
    min_eigenvalue: f64,
    residual: f64,
    runs: usize,
}

impl Invariants {
    fn state(&mut self, drift: f64, herm: f64, min_eig: f64) {
        self.trace_drift = self.trace_drift.max(drift);
        self.hermiticity = self.hermiticity.max(herm);
        self.min_eigenvalue = self.min_eigenvalue.min(min_eig);
        self.runs += 1;
    }

    fn residual(&mut self, r: f64) {
        self.residual = self.residual.max(r);
        self.runs += 1;
    }

    fn cat(&mut self, r: &CatRunResult) {
        let d = r.diagnostics;
        self.state(d.max_trace_drift, d.hermiticity_error, d.min_eigenvalue);
    }

    fn cooling(&mut self, map: &CoolingMap) {
        for p in map.points.iter().filter(|p| p.status.is_ok()) {
            self.residual(p.residual);
        }
    }
}

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn within(value: f64, target: f64, tol: f64) -> bool {
    (value - target).abs() <= tol
}

fn budget(elapsed: Duration, limit: Duration) -> bool {
    elapsed <= limit
}

fn wm() -> f64 {
    CircuitParams::table1().omega_m
}

fn compensated() -> TransmonBias {
    TransmonBias::Compensated {
        omega_t: hz_to_angular(TABLE1_OMEGA_T_HZ),
        window: EjWindow::physical(),
    }
}

fn coupling_zeros_and_maximum(_: &mut Invariants) -> Verdict {
    let start = Instant::now();
    let p = CircuitParams::table1();
    // g0 vanishes at integer and half-integer flux whatever the transmon bias
    let fixed = coupling_curve(&p, &linspace(0.0, 0.5, 501), &TransmonBias::Fixed).unwrap();
    let first = fixed.rows.first().unwrap();
    let last = fixed.rows.last().unwrap();
    let (at, g_max) = max_abs_g0(&p, TABLE1_FLUX_WINDOW, &compensated()).unwrap();
    let g_max_hz = angular_to_hz(g_max);
    let elapsed = start.elapsed();
    let pass = first.g0 == 0.0
        && last.g0 == 0.0
        && last.flux_mech == 0.5
        && within(g_max_hz, 2.4e6, 1e3)
        && budget(elapsed, Duration::from_secs(1));
    verdict(
        pass,
        format!(
            "g0(0) = {:e}, g0(0.5) = {:e}, max|g0|/2π = {:.6} MHz at Φ = {:.5} ({elapsed:.2?})",
            first.g0,
            last.g0,
            g_max_hz / 1e6,
            at
        ),
    )
}

fn qubit_floor_and_compensation(_: &mut Invariants) -> Verdict {
    let start = Instant::now();
    let p = CircuitParams {
        flux_mech: 0.5,
        asym: 0.01,
        ej_transmon: hz_to_angular(3e9),
        ..CircuitParams::table1()
    };
    let floor_hz = angular_to_hz(DerivedCircuit::compute(&p).omega_t);
    let closed_form = (8.0f64 * 5e9 * 0.28e9).sqrt() - 0.28e9;
    let target = hz_to_angular(TABLE1_OMEGA_T_HZ);
    let curve = coupling_curve(&CircuitParams::table1(), &linspace(0.49, 0.5, 201), &compensated()).unwrap();
    let worst = curve
        .rows
        .iter()
        .map(|r| (r.omega_t - target).abs() / target)
        .fold(0.0, f64::max);
    let elapsed = start.elapsed();
    let pass = within(floor_hz, closed_form, 1e6)
        && curve.rejected.is_empty()
        && worst <= 1e-10
        && budget(elapsed, Duration::from_secs(1));
    verdict(
        pass,
        format!(
            "ω_T/2π floor = {:.6} GHz (closed form {:.6}), compensation error {worst:.1e} over {} points ({elapsed:.2?})",
            floor_hz / 1e9,
            closed_form / 1e9,
            curve.rows.len()
        ),
    )
}

fn conditional_displacement(inv: &mut Invariants) -> Verdict {
    let start = Instant::now();
    let params = CircuitParams::table1();
    let wm = params.omega_m;
    let g = wm / 4.0;
    let model = SystemModel::build(ModelSpec {
        truncation: Truncation { n_t: 2, n_m: 30 },
        frame: Frame::QubitRotating,
        couplings: Couplings::from_bare(g, 0.0, 0.0),
        omega_m: wm,
        ec: params.ec,
        drive: None,
        dissipation: Dissipation::none(),
    })
    .unwrap();
    let rho0 = fock_state(2, 1)
        .unwrap()
        .tensor(&fock_state(30, 0).unwrap())
        .to_density();
    let grid = linspace(0.0, 2.0 * PI / wm, 41);
    let r = evolve(&model, &rho0, &grid, &[], EvolveOptions::default()).unwrap();
    let mut worst: f64 = 1.0;
    for (k, rho) in &r.states {
        let mech = rho.partial_trace(MECHANICS).unwrap();
        let beta = displacement_oracle(g, wm, grid[*k]);
        worst = worst.min(mech.overlap(&coherent_state(30, beta).unwrap()).unwrap());
        inv.state(
            r.trace_drift[*k],
            rho.hermiticity_error(),
            rho.min_eigenvalue().unwrap(),
        );
    }
    let elapsed = start.elapsed();
    let pass = r.states.len() == grid.len() && worst >= 1.0 - 1e-5 && budget(elapsed, Duration::from_secs(10));
    verdict(
        pass,
        format!(
            "min fidelity to |β(t)⟩ over one period = 1 − {:.1e} at {} times ({elapsed:.2?})",
            1.0 - worst,
            grid.len()
        ),
    )
}

fn thermal_qubit(inv: &mut Invariants) -> Verdict {
    let start = Instant::now();
    let params = CircuitParams {
        n_th_mech: 0.2,
        ..CircuitParams::table1()
    };
    let model = SystemModel::build(ModelSpec {
        truncation: Truncation { n_t: 2, n_m: 20 },
        frame: Frame::QubitRotating,
        couplings: Couplings::zero(),
        omega_m: params.omega_m,
        ec: params.ec,
        drive: None,
        dissipation: Dissipation::from_params(&params),
    })
    .unwrap();
    let ss = steady_state(&model).unwrap();
    inv.residual(ss.residual_scaled);
    let p1 = ss.rho_ss.partial_trace(TRANSMON).unwrap().population(1);
    let n = params.n_th_transmon;
    let oracle = n / (2.0 * n + 1.0);
    let elapsed = start.elapsed();
    let pass = within(p1, oracle, 1e-8) && budget(elapsed, Duration::from_secs(1));
    verdict(
        pass,
        format!(
            "p1 = {p1:.12} vs n/(2n+1) = {oracle:.12}, scaled residual {:.1e} ({elapsed:.2?})",
            ss.residual_scaled
        ),
    )
}

fn cooling_setup(n_th_transmon: f64) -> CoolingSetup {
    CoolingSetup {
        params: CircuitParams {
            n_th_transmon,
            ..CircuitParams::table1()
        },
        bias: compensated(),
        truncation: Truncation::COOLING,
    }
}

fn cooling_optimum(inv: &mut Invariants) -> Verdict {
    let start = Instant::now();
    let wm = wm();
    let grid = linspace(0.8 * wm, 1.1 * wm, 41);
    let cold = cooling_setup(0.0);
    let flux = flux_for_coupling(&cold.params, wm / 4.0, TABLE1_FLUX_WINDOW, &cold.bias).unwrap();
    let amp = hz_to_angular(70e3);

    let map = cooling_sweep(&cold, &grid, &[flux], amp).unwrap();
    inv.cooling(&map);
    let best = map.minimum().unwrap();
    let g = best.g0_over_omega_m;
    let expected_at = 1.0 - g * g;

    let warm = cooling_sweep(&cooling_setup(0.05), &grid, &[flux], amp).unwrap();
    inv.cooling(&warm);
    let warm_best = warm.minimum().unwrap();

    let elapsed = start.elapsed();
    let all_ok = map.points.iter().chain(&warm.points).all(|p| p.status.is_ok());
    let magnitude = within(best.n_phonon_ss, 0.03, 0.02);
    let location = within(best.delta / wm, expected_at, 0.05);
    // first red sideband of the polaron-shifted qubit for Δ = ω_T − ω_D
    let sideband = 1.0 + g * g;
    let warm_magnitude = within(warm_best.n_phonon_ss, 0.10, 0.03);
    verdict(
        all_ok && magnitude && location && warm_magnitude,
        format!(
            "n_T = 0: min n = {:.4} [{}] at Δ = {:.4} ω_M vs ω_M − g²/ω_M = {:.4} ω_M [{}] (ω_M + g²/ω_M = {:.4} ω_M); n_T = 0.05: min n = {:.4} [{}] at Δ = {:.4} ω_M; |g|/ω_M = {:.4} ({elapsed:.1?})",
            best.n_phonon_ss,
            ok(magnitude),
            best.delta / wm,
            expected_at,
            ok(location),
            sideband,
            warm_best.n_phonon_ss,
            ok(warm_magnitude),
            warm_best.delta / wm,
            g.abs()
        ),
    )
}

fn ok(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "out of range"
    }
}

fn decoupled_limit(inv: &mut Invariants) -> Verdict {
    let start = Instant::now();
    let wm = wm();
    let grid = linspace(0.8 * wm, 1.1 * wm, 5);
    let amp = hz_to_angular(70e3);
    let column = |setup: &CoolingSetup, inv: &mut Invariants| {
        let map = cooling_sweep(setup, &grid, &[0.5], amp).unwrap();
        inv.cooling(&map);
        let n_th = setup.params.n_th_mech;
        let worst = map
            .points
            .iter()
            .map(|p| (p.n_phonon_ss - n_th).abs() / n_th)
            .fold(0.0, f64::max);
        let g_zero = map.points.iter().all(|p| p.g0_over_omega_m == 0.0);
        (worst, g_zero, map.points[0].n_phonon_ss)
    };
    let table1 = cooling_setup(0.05);
    let (worst, g_zero, n) = column(&table1, inv);
    let mut small = cooling_setup(0.05);
    small.params.n_th_mech = 0.5;
    let (worst_small, _, n_small) = column(&small, inv);
    let elapsed = start.elapsed();
    verdict(
        g_zero && worst <= 1e-4,
        format!(
            "Table 1 bath n_th = {}: column gives n = {n:.4} (relative error {worst:.2e}) with N_M = {}; \
             same column at n_th = 0.5 gives {n_small:.8} (relative error {worst_small:.1e}) ({elapsed:.1?})",
            table1.params.n_th_mech, table1.truncation.n_m
        ),
    )
}

fn cat_config(initial: CatInitial, dissipation: bool, evolve_time: f64) -> CatConfig {
    CatConfig {
        params: CircuitParams::table1(),
        bias: compensated(),
        flux_on: 0.49,
        truncation: Truncation::CAT,
        evolve_time,
        initial,
        dissipation,
        samples: 41,
        snapshot_times: vec![],
        wigner: None,
        escalate: true,
        control: CAT_STEP_CONTROL,
    }
}

fn cat_fidelity_triple(inv: &mut Invariants) -> Verdict {
    let start = Instant::now();
    let t = PI / wm();
    let cases = [
        ("ideal, closed", CatInitial::Ideal, false, 0.998, 0.003),
        ("ideal, dissipative", CatInitial::Ideal, true, 0.98, 0.01),
        ("thermal, dissipative", CatInitial::PRECOOLED, true, 0.93, 0.015),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    let mut beta_line = String::new();
    for (name, initial, dissipation, target, tol) in cases {
        let r = cat_protocol(&cat_config(initial, dissipation, t)).unwrap();
        inv.cat(&r);
        let f = r.fidelity_even;
        let hit = within(f.uhlmann, target, tol);
        pass &= hit;
        parts.push(format!(
            "{name}: F = {:.4} (overlap {:.4}) vs {target} ± {tol} [{}]",
            f.uhlmann,
            f.overlap,
            ok(hit)
        ));
        let expected_beta = 2.0 * r.g0_eff.abs() / wm();
        pass &= r.beta_max == expected_beta;
        beta_line = format!("β_max = 2|g0_eff|/ω_M = {:.4}", r.beta_max);
    }
    let elapsed = start.elapsed();
    verdict(pass, format!("{}; {beta_line} ({elapsed:.1?})", parts.join("; ")))
}

fn revival(inv: &mut Invariants) -> Verdict {
    let start = Instant::now();
    let r = cat_protocol(&cat_config(CatInitial::Ideal, false, 2.0 * PI / wm())).unwrap();
    inv.cat(&r);
    let n_end = *r.n_phonon.last().unwrap();
    let n_peak = r.n_phonon.iter().copied().fold(0.0, f64::max);
    let elapsed = start.elapsed();
    verdict(
        n_end <= 0.02 && budget(elapsed, Duration::from_secs(60)),
        format!("⟨b†b⟩ at 2π/ω_M = {n_end:.2e} (peak {n_peak:.3} mid-cycle) ({elapsed:.1?})"),
    )
}

fn solver_invariants(inv: &mut Invariants) -> Verdict {
    // small driven instance solved both ways
    let model = SystemModel::build(ModelSpec {
        truncation: Truncation { n_t: 3, n_m: 10 },
        frame: Frame::DriveRotating,
        couplings: Couplings::from_bare(0.25, -0.01, 0.001),
        omega_m: 1.0,
        ec: 4.0,
        drive: Some(DriveSpec {
            amp: 0.1,
            detuning: 0.95,
        }),
        dissipation: Dissipation {
            gamma_m: 0.05,
            n_th_mech: 0.2,
            t1: 5.0,
            t2: 8.0,
            n_th_transmon: 0.0,
        },
    })
    .unwrap();
    let direct = steady_state(&model).unwrap();
    inv.residual(direct.residual_scaled);
    let rho0 = fock_state(3, 0)
        .unwrap()
        .to_density()
        .tensor(&thermal_state(10, 0.1).unwrap());
    let evolved = steady_state_by_evolution(&model, &rho0, 5000.0, 10.0).unwrap();
    let td = direct.rho_ss.trace_distance(&evolved).unwrap();
    let pass = inv.trace_drift <= 1e-7
        && inv.hermiticity <= 1e-9
        && inv.min_eigenvalue >= -1e-8
        && inv.residual <= 1e-10
        && td <= 1e-6;
    verdict(
        pass,
        format!(
            "over {} checks: trace drift {:.1e}, hermiticity {:.1e}, min eigenvalue {:.1e}, scaled residual {:.1e}; \
             direct vs evolved steady state {td:.1e}",
            inv.runs, inv.trace_drift, inv.hermiticity, inv.min_eigenvalue, inv.residual
        ),
    )
}

fn wigner_sanity(_: &mut Invariants) -> Verdict {
    let start = Instant::now();
    let vacuum = fock_state(30, 0).unwrap().to_density();
    let w0 = WignerKernel::new(&vacuum, 1.0).unwrap().wigner_at(0.0, 0.0);
    let vac_grid = wigner(&vacuum, &axis(-6.0, 6.0, 201), &axis(-6.0, 6.0, 201)).unwrap();

    let beta = Complex64::new(4.8, 0.0);
    let cat = ideal_cat(beta, CatParity::Even, 80).unwrap().to_density();
    let c = beta.re / 2f64.sqrt();
    let cat_grid = wigner(&cat, &axis(c - 6.0, c + 6.0, 201), &axis(-6.0, 6.0, 201)).unwrap();
    let elapsed = start.elapsed();
    let pass = within(w0, 1.0 / PI, 1e-6)
        && within(vac_grid.integral(), 1.0, 0.01)
        && within(cat_grid.integral(), 1.0, 0.01)
        && cat_grid.min() <= -0.05
        && !cat_grid.truncation_warning
        && budget(elapsed, Duration::from_secs(30));
    verdict(
        pass,
        format!(
            "vacuum W(0,0) − 1/π = {:.1e}, ∫W = {:.6}; β = 4.8 even cat: min W = {:.4}, ∫W = {:.6} ({elapsed:.1?})",
            w0 - 1.0 / PI,
            vac_grid.integral(),
            cat_grid.min(),
            cat_grid.integral()
        ),
    )
}

fn determinism(_: &mut Invariants) -> Verdict {
    let wm = wm();
    let setup = cooling_setup(0.05);
    let cool = || {
        let map = cooling_sweep(
            &setup,
            &linspace(0.9 * wm, 1.0 * wm, 6),
            &[0.4996, 0.5],
            hz_to_angular(70e3),
        )
        .unwrap();
        cooling_map_csv(&map.points)
    };
    let cat = || {
        let mut cfg = cat_config(CatInitial::Ideal, false, PI / wm);
        cfg.snapshot_times = vec![0.5 * PI / wm];
        cfg.wigner = Some(WignerGridSpec {
            half_width: 4.0,
            points: 41,
            center_on_cat: true,
        });
        let r = cat_protocol(&cfg).unwrap();
        let mut out = cat_timeseries_csv(&r);
        out.push_str(&wigner_csv(r.snapshots[0].wigner.as_ref().unwrap()));
        out.push_str(&write_density_matrix(r.rho_mech_cond[0].as_ref().unwrap()));
        out
    };
    let (c1, c2) = (cool(), cool());
    let (k1, k2) = (cat(), cat());
    verdict(
        c1 == c2 && k1 == k2,
        format!(
            "cooling map {} bytes identical: {}; cat outputs {} bytes identical: {}",
            c1.len(),
            c1 == c2,
            k1.len(),
            k1 == k2
        ),
    )
}

type Criterion = fn(&mut Invariants) -> Verdict;

fn main() {
    let criteria: [(&str, Criterion); 11] = [
        ("coupling zeros and maximum", coupling_zeros_and_maximum),
        ("qubit frequency floor and compensation", qubit_floor_and_compensation),
        ("conditional displacement", conditional_displacement),
        ("two-level thermal steady state", thermal_qubit),
        ("cooling optimum", cooling_optimum),
        ("decoupled limit", decoupled_limit),
        ("cat fidelity triple", cat_fidelity_triple),
        ("revival after one cycle", revival),
        ("solver invariants", solver_invariants),
        ("Wigner sanity", wigner_sanity),
        ("determinism", determinism),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut inv = Invariants {
        min_eigenvalue: 0.0,
        ..Default::default()
    };
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let v = match panic::catch_unwind(AssertUnwindSafe(|| run(&mut inv))) {
            Ok(v) => v,
            Err(payload) => {
                let msg = payload
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                verdict(false, format!("panicked: {msg}"))
            }
        };
        if !v.pass {
            failed += 1;
        }
        println!(
            "{} criterion {:>2} ({name}): {}",
            if v.pass { "PASS" } else { "FAIL" },
            i + 1,
            v.detail
        );
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
