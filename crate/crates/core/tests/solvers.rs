use num_complex::Complex64;
use optomech::model::{Couplings, Dissipation, DriveSpec, Frame, ModelSpec, SystemModel, Truncation};
use optomech::quantum::{coherent_state, fock_state, thermal_state, CMat, DensityMatrix, Ket, Operator, MECHANICS};
use optomech::solvers::{
    evolve, evolve_schedule, steady_state, steady_state_by_evolution, EvolveOptions, Generator, Schedule, SolverError,
    StepControl,
};

fn base(n_t: usize, n_m: usize) -> ModelSpec {
    ModelSpec {
        truncation: Truncation { n_t, n_m },
        frame: Frame::QubitRotating,
        couplings: Couplings::zero(),
        omega_m: 1.0,
        ec: 0.0,
        drive: None,
        dissipation: Dissipation::none(),
    }
}

fn product(q: &DensityMatrix, m: &DensityMatrix) -> DensityMatrix {
    q.tensor(m)
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

#[test]
fn zero_generator_leaves_state_unchanged() {
    let mut s = base(2, 3);
    s.omega_m = 0.0;
    let m = SystemModel::build(s).unwrap();
    let q = Ket::new(
        optomech::quantum::HilbertSpace::single(2).unwrap(),
        vec![c(0.6, 0.0), c(0.0, 0.8)],
    )
    .unwrap()
    .to_density();
    let rho0 = product(&q, &fock_state(3, 0).unwrap().to_density());
    let r = evolve(&m, &rho0, &[0.0, 1.0, 5.0], &[], EvolveOptions::default()).unwrap();
    assert_eq!(r.final_state.matrix(), rho0.matrix());
}

#[test]
fn qubit_decay_matches_exponential() {
    let mut s = base(2, 2);
    s.omega_m = 0.0;
    s.dissipation.t1 = 2.0;
    let m = SystemModel::build(s).unwrap();
    let rho0 = product(
        &fock_state(2, 1).unwrap().to_density(),
        &fock_state(2, 0).unwrap().to_density(),
    );
    let grid = linspace(0.0, 6.0, 13);
    let obs = vec![("n_c".to_string(), m.ops.n_c.clone())];
    let r = evolve(&m, &rho0, &grid, &obs, EvolveOptions::default()).unwrap();
    for (t, p) in grid.iter().zip(r.series("n_c").unwrap()) {
        assert!((p - (-t / 2.0f64).exp()).abs() < 1e-6, "t={t} p={p}");
    }
    assert!(r.max_trace_drift() < 1e-7);
}

#[test]
fn fixed_step_order_is_at_least_four() {
    let mut s = base(2, 2);
    s.omega_m = 0.0;
    s.dissipation.t1 = 1.0;
    let m = SystemModel::build(s).unwrap();
    let rho0 = product(
        &fock_state(2, 1).unwrap().to_density(),
        &fock_state(2, 0).unwrap().to_density(),
    );
    let err = |h: f64| {
        let opts = EvolveOptions {
            control: StepControl::Fixed(h),
            ..EvolveOptions::default()
        };
        let r = evolve(&m, &rho0, &[0.0, 2.0], &[], opts).unwrap();
        (r.final_state.population(2) - (-2.0f64).exp()).abs()
    };
    let (e1, e2) = (err(0.25), err(0.125));
    assert!(e1 / e2 >= 16.0, "ratio {}", e1 / e2);
}

#[test]
fn adaptive_error_shrinks_with_tolerance() {
    let mut s = base(2, 2);
    s.omega_m = 0.0;
    s.dissipation.t1 = 1.0;
    let m = SystemModel::build(s).unwrap();
    let rho0 = product(
        &fock_state(2, 1).unwrap().to_density(),
        &fock_state(2, 0).unwrap().to_density(),
    );
    let run = |atol: f64| {
        let opts = EvolveOptions {
            control: StepControl::Adaptive { atol, rtol: atol },
            ..EvolveOptions::default()
        };
        evolve(&m, &rho0, &[0.0, 3.0], &[], opts)
            .unwrap()
            .final_state
            .population(2)
    };
    let reference = run(1e-13);
    let loose = (run(1e-5) - reference).abs();
    let tight = (run(1e-8) - reference).abs();
    assert!(tight < loose, "{tight} vs {loose}");
}

#[test]
fn conditional_displacement_is_coherent() {
    let g = 0.25;
    let mut s = base(2, 30);
    s.couplings = Couplings::from_bare(g, 0.0, 0.0);
    let m = SystemModel::build(s).unwrap();
    let rho0 = product(
        &fock_state(2, 1).unwrap().to_density(),
        &fock_state(30, 0).unwrap().to_density(),
    );
    let t = std::f64::consts::PI;
    let r = evolve(&m, &rho0, &[0.0, t], &[], EvolveOptions::default()).unwrap();
    let mech = r.final_state.partial_trace(MECHANICS).unwrap();
    let beta = c(g, 0.0) * (c(0.0, -t).exp() - 1.0);
    assert!((beta.norm() - 2.0 * g).abs() < 1e-12);
    let f = mech.overlap(&coherent_state(30, beta).unwrap()).unwrap();
    assert!(f >= 1.0 - 1e-6, "{f}");
}

#[test]
fn lab_and_rotating_frames_agree() {
    let omega_t = 7.0;
    let spec = |frame| ModelSpec {
        frame,
        couplings: Couplings::from_bare(0.3, -0.01, 0.002),
        ec: 0.4,
        dissipation: Dissipation {
            gamma_m: 0.01,
            n_th_mech: 0.1,
            t1: 30.0,
            t2: 40.0,
            n_th_transmon: 0.05,
        },
        ..base(2, 4)
    };
    let rot = SystemModel::build(spec(Frame::QubitRotating)).unwrap();
    let lab = SystemModel::build(spec(Frame::Lab { omega_t })).unwrap();
    let plus = Ket::new(
        optomech::quantum::HilbertSpace::single(2).unwrap(),
        vec![c(1.0, 0.0), c(1.0, 0.0)],
    )
    .unwrap()
    .to_density();
    let rho0 = product(&plus, &fock_state(4, 0).unwrap().to_density());
    let t_end = 2.0;
    let opts = EvolveOptions {
        control: StepControl::Adaptive {
            atol: 1e-12,
            rtol: 1e-10,
        },
        leak_guard: None,
        ..EvolveOptions::default()
    };
    let obs = vec![
        ("n_c".to_string(), rot.ops.n_c.clone()),
        ("n_b".to_string(), rot.ops.n_b.clone()),
    ];
    let a = evolve(&rot, &rho0, &[0.0, t_end], &obs, opts).unwrap();
    let b = evolve(&lab, &rho0, &[0.0, t_end], &obs, opts).unwrap();
    for name in ["n_c", "n_b"] {
        let (x, y) = (a.series(name).unwrap()[1], b.series(name).unwrap()[1]);
        assert!((x - y).abs() < 1e-6, "{name}: {x} vs {y}");
    }
    // undo the qubit rotation on the lab state: U = exp(iω_T t c†c)
    let u = CMat::from_diag(
        &(0..rot.dim())
            .map(|i| {
                let n_c = (i / 4) as f64;
                c(0.0, omega_t * t_end * n_c).exp()
            })
            .collect::<Vec<_>>(),
    );
    let back = u.matmul(b.final_state.matrix()).unwrap().matmul(&u.adjoint()).unwrap();
    let diff = back.sub(a.final_state.matrix()).unwrap().max_abs();
    assert!(diff < 1e-6, "{diff}");
}

#[test]
fn phase_rotation_of_qubit_leaves_populations() {
    let mut s = base(3, 5);
    s.couplings = Couplings::from_bare(0.2, -0.01, 0.001);
    s.ec = 0.5;
    s.dissipation = Dissipation {
        gamma_m: 0.02,
        n_th_mech: 0.2,
        t1: 10.0,
        t2: 15.0,
        n_th_transmon: 0.1,
    };
    let m = SystemModel::build(s).unwrap();
    let q = Ket::new(
        optomech::quantum::HilbertSpace::single(3).unwrap(),
        vec![c(0.7, 0.0), c(0.5, 0.2), c(0.1, 0.0)],
    )
    .unwrap()
    .to_density();
    let rho0 = product(&q, &fock_state(5, 0).unwrap().to_density());
    let theta = 0.73;
    let u = CMat::from_diag(
        &(0..m.dim())
            .map(|i| c(0.0, theta * (i / 5) as f64).exp())
            .collect::<Vec<_>>(),
    );
    let rotated = DensityMatrix::new(
        m.space.clone(),
        u.matmul(rho0.matrix()).unwrap().matmul(&u.adjoint()).unwrap(),
    )
    .unwrap();
    let opts = EvolveOptions {
        leak_guard: None,
        ..EvolveOptions::default()
    };
    let a = evolve(&m, &rho0, &[0.0, 3.0], &[], opts).unwrap().final_state;
    let b = evolve(&m, &rotated, &[0.0, 3.0], &[], opts).unwrap().final_state;
    for i in 0..m.dim() {
        assert!((a.population(i) - b.population(i)).abs() < 1e-9);
    }
}

#[test]
fn leak_guard_aborts_with_hint() {
    let mut s = base(2, 8);
    s.couplings = Couplings::from_bare(1.5, 0.0, 0.0);
    let m = SystemModel::build(s).unwrap();
    let rho0 = product(
        &fock_state(2, 1).unwrap().to_density(),
        &fock_state(8, 0).unwrap().to_density(),
    );
    let err = evolve(&m, &rho0, &[0.0, 1.0, 2.0, 3.0], &[], EvolveOptions::default()).unwrap_err();
    match err {
        SolverError::TruncationLeak { n_m, suggested, .. } => {
            assert_eq!(n_m, 8);
            assert_eq!(suggested, 12);
        }
        e => panic!("{e:?}"),
    }
}

#[test]
fn piecewise_schedule_restarts_at_switch() {
    let mut on = base(2, 10);
    on.couplings = Couplings::from_bare(0.2, 0.0, 0.0);
    let off = base(2, 10);
    let m_on = SystemModel::build(on).unwrap();
    let m_off = SystemModel::build(off).unwrap();
    let plus = Ket::new(
        optomech::quantum::HilbertSpace::single(2).unwrap(),
        vec![c(1.0, 0.0), c(1.0, 0.0)],
    )
    .unwrap()
    .to_density();
    let rho0 = product(&plus, &fock_state(10, 0).unwrap().to_density());
    let opts = EvolveOptions {
        control: StepControl::Adaptive {
            atol: 1e-12,
            rtol: 1e-10,
        },
        ..EvolveOptions::default()
    };
    let sched = Schedule::new(vec![
        (0.0, Generator::Constant(m_on.liouvillian().unwrap())),
        (1.3, Generator::Constant(m_off.liouvillian().unwrap())),
    ])
    .unwrap();
    let whole = evolve_schedule(&sched, &rho0, &[0.0, 2.0], &[], opts)
        .unwrap()
        .final_state;
    let first = evolve(&m_on, &rho0, &[0.0, 1.3], &[], opts).unwrap().final_state;
    let second = evolve(&m_off, &first, &[0.0, 0.7], &[], opts).unwrap().final_state;
    let diff = whole.matrix().sub(second.matrix()).unwrap().max_abs();
    assert!(diff < 1e-9, "{diff}");
}

#[test]
fn thermal_qubit_steady_state() {
    let n = 0.05;
    let mut s = base(2, 2);
    s.frame = Frame::DriveRotating;
    s.drive = Some(DriveSpec {
        amp: 0.0,
        detuning: 0.3,
    });
    s.dissipation = Dissipation {
        gamma_m: 2.0 * std::f64::consts::PI,
        n_th_mech: 0.0,
        t1: 10e-6,
        t2: 10e-6,
        n_th_transmon: n,
    };
    s.omega_m = 2.0 * std::f64::consts::PI * 1e6;
    let m = SystemModel::build(s).unwrap();
    let r = steady_state(&m).unwrap();
    let p1 = r.rho_ss.expectation(&m.ops.n_c).unwrap().re;
    assert!((p1 - n / (2.0 * n + 1.0)).abs() < 1e-8, "{p1}");
    assert!(r.residual_scaled < 1e-10);
}

#[test]
fn mechanical_bath_steady_state() {
    let mut s = base(2, 40);
    s.dissipation = Dissipation {
        gamma_m: 0.01,
        n_th_mech: 0.5,
        t1: 5.0,
        t2: f64::INFINITY,
        n_th_transmon: 0.0,
    };
    let m = SystemModel::build(s).unwrap();
    let r = steady_state(&m).unwrap();
    let n_b = r.rho_ss.expectation(&m.ops.n_b).unwrap().re;
    assert!((n_b - 0.5).abs() < 1e-6, "{n_b}");
}

#[test]
fn decoupled_driven_qubit_is_product_state() {
    let mut s = base(3, 15);
    s.frame = Frame::DriveRotating;
    s.ec = 3.0;
    s.drive = Some(DriveSpec {
        amp: 0.2,
        detuning: 0.9,
    });
    s.dissipation = Dissipation {
        gamma_m: 0.05,
        n_th_mech: 0.3,
        t1: 4.0,
        t2: 6.0,
        n_th_transmon: 0.02,
    };
    let m = SystemModel::build(s).unwrap();
    let r = steady_state(&m).unwrap();
    let n_b = r.rho_ss.expectation(&m.ops.n_b).unwrap().re;
    assert!((n_b - 0.3).abs() < 1e-6);
    let q = r.rho_ss.partial_trace(0).unwrap();
    let mech = r.rho_ss.partial_trace(1).unwrap();
    let prod = q.tensor(&mech);
    assert!(prod.matrix().sub(r.rho_ss.matrix()).unwrap().max_abs() < 1e-9);
}

#[test]
fn direct_and_evolved_steady_states_agree() {
    let mut s = base(3, 10);
    s.frame = Frame::DriveRotating;
    s.couplings = Couplings::from_bare(0.25, -0.01, 0.001);
    s.ec = 4.0;
    s.drive = Some(DriveSpec {
        amp: 0.1,
        detuning: 0.95,
    });
    s.dissipation = Dissipation {
        gamma_m: 0.05,
        n_th_mech: 0.2,
        t1: 5.0,
        t2: 8.0,
        n_th_transmon: 0.0,
    };
    let m = SystemModel::build(s).unwrap();
    let direct = steady_state(&m).unwrap();
    let rho0 = product(
        &fock_state(3, 0).unwrap().to_density(),
        &thermal_state(10, 0.1).unwrap(),
    );
    let evolved = steady_state_by_evolution(&m, &rho0, 5000.0, 10.0).unwrap();
    let td = direct.rho_ss.trace_distance(&evolved).unwrap();
    assert!(td <= 1e-6, "{td}");
}

#[test]
fn closed_system_does_not_converge() {
    let mut s = base(2, 4);
    s.couplings = Couplings::from_bare(0.3, 0.0, 0.0);
    let m = SystemModel::build(s).unwrap();
    let plus = Ket::new(
        optomech::quantum::HilbertSpace::single(2).unwrap(),
        vec![c(1.0, 0.0), c(1.0, 0.0)],
    )
    .unwrap()
    .to_density();
    let rho0 = product(&plus, &fock_state(4, 0).unwrap().to_density());
    assert!(matches!(
        steady_state_by_evolution(&m, &rho0, 20.0, 1.0),
        Err(SolverError::NotConverged { .. })
    ));
    assert!(steady_state(&m).is_err());
}

#[test]
fn invalid_grids_are_rejected() {
    let m = SystemModel::build(base(2, 2)).unwrap();
    let rho0 = product(
        &fock_state(2, 0).unwrap().to_density(),
        &fock_state(2, 0).unwrap().to_density(),
    );
    assert!(evolve(&m, &rho0, &[0.0, 0.0], &[], EvolveOptions::default()).is_err());
    assert!(evolve(&m, &rho0, &[], &[], EvolveOptions::default()).is_err());
    let other = product(
        &fock_state(2, 0).unwrap().to_density(),
        &fock_state(3, 0).unwrap().to_density(),
    );
    assert!(evolve(&m, &other, &[0.0, 1.0], &[], EvolveOptions::default()).is_err());
    let _ = Operator::identity(2);
}
