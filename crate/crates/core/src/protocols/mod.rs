//! The two experiments: sideband cooling of the beam through a driven
//! transmon, and flux-pulsed preparation of mechanical cat states.
//!
//! This module also holds the instantaneous qubit operations the cat
//! sequence is built from.

pub mod cat;
pub mod cooling;

use num_complex::Complex64;
use thiserror::Error;

use crate::circuit::CircuitError;
use crate::model::ModelError;
use crate::quantum::{CMat, DensityMatrix, HilbertSpace, Ket, QuantumError, MECHANICS, TRANSMON};
use crate::solvers::SolverError;

pub use cat::{cat_protocol, CatConfig, CatInitial, CatRunResult, Snapshot, WignerGridSpec};
pub use cooling::{
    cooling_drive_sweep, cooling_sweep, resonance_markers, CoolingMap, CoolingPoint, CoolingSetup, PointStatus,
};

/// Largest population tolerated outside the qubit subspace `{0, 1}` when a
/// gate acts on it.
pub const LEAKAGE_TOL: f64 = 1e-6;

/// Smallest outcome probability that may be conditioned on.
pub const MIN_OUTCOME_PROBABILITY: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProtocolError {
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
    #[error("transmon population {population:.3e} outside the qubit subspace exceeds {LEAKAGE_TOL:.0e}")]
    Leakage { population: f64 },
    #[error("outcome {outcome} has probability {probability:.3e}; cannot condition on it")]
    NullOutcome { outcome: usize, probability: f64 },
    #[error("invalid protocol input: {0}")]
    InvalidInput(String),
}

impl ProtocolError {
    /// True when the failure reflects an inadequate truncation or an
    /// unphysical state.
    pub fn is_physics_diagnostic(&self) -> bool {
        match self {
            ProtocolError::Solver(e) => e.is_physics_diagnostic(),
            ProtocolError::Leakage { .. } => true,
            _ => false,
        }
    }
}

/// `β(t) = (g/ω_M)(e^{−iω_M t} − 1)`, the displacement of the mechanics
/// while the qubit sits in `|1⟩`.
pub fn displacement_oracle(g_eff: f64, omega_m: f64, t: f64) -> Complex64 {
    (Complex64::from_polar(1.0, -omega_m * t) - 1.0) * (g_eff / omega_m)
}

fn transmon_dims(space: &HilbertSpace) -> Result<(usize, usize), ProtocolError> {
    let dims = space.dims();
    if dims.len() != 2 {
        return Err(ProtocolError::InvalidInput(format!(
            "expected a transmon-mechanics space, got {space}"
        )));
    }
    Ok((dims[TRANSMON], dims[MECHANICS]))
}

/// Transmon population in levels `≥ 2`.
pub fn leakage_population(rho: &DensityMatrix) -> Result<f64, ProtocolError> {
    let (n_t, n_m) = transmon_dims(rho.space())?;
    Ok((2 * n_m..n_t * n_m).map(|i| rho.population(i)).sum())
}

/// Full-space unitary that acts as `u` on the transmon levels and as the
/// identity on the mechanics.
fn transmon_unitary(u: &CMat, n_m: usize) -> CMat {
    u.kron(&CMat::identity(n_m))
}

fn hadamard_block(n_t: usize) -> CMat {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CMat::from_fn(n_t, n_t, |i, j| match (i, j) {
        (0, 0) | (0, 1) | (1, 0) => Complex64::new(s, 0.0),
        (1, 1) => Complex64::new(-s, 0.0),
        _ if i == j => Complex64::new(1.0, 0.0),
        _ => Complex64::new(0.0, 0.0),
    })
}

fn conjugate(rho: &DensityMatrix, u: &CMat) -> Result<DensityMatrix, ProtocolError> {
    let m = u.matmul(rho.matrix())?.matmul(&u.adjoint())?;
    Ok(DensityMatrix::from_matrix_unchecked(rho.space().clone(), m)?)
}

/// Hadamard on transmon levels `{0, 1}`, identity above.
pub fn hadamard(rho: &DensityMatrix) -> Result<DensityMatrix, ProtocolError> {
    hadamard_with_tolerance(rho, LEAKAGE_TOL)
}

/// [`hadamard`] with a caller-chosen bound on the population outside the
/// qubit subspace. The gate itself is well defined for any state; the bound
/// only guards against applying it where it is not meaningful.
pub fn hadamard_with_tolerance(rho: &DensityMatrix, tol: f64) -> Result<DensityMatrix, ProtocolError> {
    let (n_t, n_m) = transmon_dims(rho.space())?;
    let leak = leakage_population(rho)?;
    if leak > tol {
        return Err(ProtocolError::Leakage { population: leak });
    }
    conjugate(rho, &transmon_unitary(&hadamard_block(n_t), n_m))
}

/// Hadamard applied to a pure state.
pub fn hadamard_ket(psi: &Ket) -> Result<Ket, ProtocolError> {
    let (n_t, n_m) = transmon_dims(psi.space())?;
    let leak: f64 = psi.data()[2 * n_m..].iter().map(|z| z.norm_sqr()).sum();
    if leak > LEAKAGE_TOL {
        return Err(ProtocolError::Leakage { population: leak });
    }
    let v = transmon_unitary(&hadamard_block(n_t), n_m).matvec(psi.data())?;
    Ok(Ket::new(psi.space().clone(), v)?)
}

/// `exp(iθ c†c)` on the transmon, a phase `e^{iθn}` on level `n`.
pub fn qubit_phase(rho: &DensityMatrix, theta: f64) -> Result<DensityMatrix, ProtocolError> {
    let (n_t, n_m) = transmon_dims(rho.space())?;
    let diag: Vec<Complex64> = (0..n_t).map(|n| Complex64::from_polar(1.0, theta * n as f64)).collect();
    conjugate(rho, &transmon_unitary(&CMat::from_diag(&diag), n_m))
}

/// Outcome probabilities of a projective qubit measurement and the
/// conditional mechanical states.
#[derive(Debug, Clone)]
pub struct QubitMeasurement {
    pub p0: f64,
    pub p1: f64,
    /// Population in transmon levels `≥ 2`, which neither outcome includes.
    pub leakage: f64,
    pub rho_mech: [Option<DensityMatrix>; 2],
}

/// `p = Tr[(Π ⊗ I)ρ]` and `Tr_T[(Π ⊗ I)ρ(Π ⊗ I)]/p` for `Π = |outcome⟩⟨outcome|`.
pub fn project_qubit(rho: &DensityMatrix, outcome: usize) -> Result<(f64, DensityMatrix), ProtocolError> {
    let (n_t, n_m) = transmon_dims(rho.space())?;
    if outcome > 1 || outcome >= n_t {
        return Err(ProtocolError::InvalidInput(format!(
            "qubit outcome must be 0 or 1, got {outcome}"
        )));
    }
    let off = outcome * n_m;
    let block = CMat::from_fn(n_m, n_m, |i, j| rho.matrix().get(off + i, off + j));
    let p = block.trace().re;
    if !(p >= MIN_OUTCOME_PROBABILITY) {
        return Err(ProtocolError::NullOutcome {
            outcome,
            probability: p,
        });
    }
    let cond =
        DensityMatrix::from_matrix_unchecked(HilbertSpace::single(n_m)?, block.scale(Complex64::new(1.0 / p, 0.0)))?;
    Ok((p, cond))
}

/// Both outcomes at once; an outcome with vanishing probability has no
/// conditional state.
pub fn measure_qubit(rho: &DensityMatrix) -> Result<QubitMeasurement, ProtocolError> {
    let mut probs = [0.0; 2];
    let mut states = [None, None];
    for outcome in 0..2 {
        match project_qubit(rho, outcome) {
            Ok((p, s)) => {
                probs[outcome] = p;
                states[outcome] = Some(s);
            }
            Err(ProtocolError::NullOutcome { probability, .. }) => probs[outcome] = probability.max(0.0),
            Err(e) => return Err(e),
        }
    }
    Ok(QubitMeasurement {
        p0: probs[0],
        p1: probs[1],
        leakage: leakage_population(rho)?,
        rho_mech: states,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{coherent_state, fock_state};

    fn product(q: &Ket, m: &Ket) -> Ket {
        q.tensor(m)
    }

    #[test]
    fn hadamard_on_vacuum_gives_plus() {
        let psi = product(&fock_state(3, 0).unwrap(), &fock_state(4, 0).unwrap());
        let h = hadamard_ket(&psi).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((h.data()[0].re - s).abs() < 1e-15);
        assert!((h.data()[4].re - s).abs() < 1e-15);
        let back = hadamard_ket(&h).unwrap();
        assert!((back.data()[0].re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn hadamard_on_thermal_qubit() {
        let diag = [0.95, 0.05, 0.0].map(|p| Complex64::new(p, 0.0));
        let q = DensityMatrix::new(HilbertSpace::single(3).unwrap(), CMat::from_diag(&diag)).unwrap();
        let rho = q.tensor(&fock_state(2, 0).unwrap().to_density());
        let h = hadamard(&rho).unwrap();
        // |0⟩⟨1| element of the qubit block sits at (0, n_m)
        assert!((h.matrix().get(0, 2).re - 0.45).abs() < 1e-14);
        assert!((h.matrix().get(2, 0).re - 0.45).abs() < 1e-14);
    }

    #[test]
    fn hadamard_rejects_leakage() {
        let rho = product(&fock_state(3, 2).unwrap(), &fock_state(2, 0).unwrap()).to_density();
        assert!(matches!(hadamard(&rho), Err(ProtocolError::Leakage { .. })));
    }

    #[test]
    fn projection_of_product_state() {
        let q = Ket::new(
            HilbertSpace::single(2).unwrap(),
            vec![Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)],
        )
        .unwrap();
        let m = coherent_state(20, Complex64::new(0.7, 0.2)).unwrap();
        let rho = product(&q, &m).to_density();
        let meas = measure_qubit(&rho).unwrap();
        assert!((meas.p0 - 0.36).abs() < 1e-14);
        assert!((meas.p1 - 0.64).abs() < 1e-14);
        let a = meas.rho_mech[0].as_ref().unwrap();
        let b = meas.rho_mech[1].as_ref().unwrap();
        assert!(a.trace_distance(b).unwrap() < 1e-12);
        let rho0 = product(&fock_state(2, 0).unwrap(), &m).to_density();
        assert!(matches!(
            project_qubit(&rho0, 1),
            Err(ProtocolError::NullOutcome { .. })
        ));
    }

    #[test]
    fn oracle_values() {
        let w = 2.0 * std::f64::consts::PI * 1e6;
        assert_eq!(displacement_oracle(w, w, 0.0), Complex64::new(0.0, 0.0));
        assert!((displacement_oracle(w, w, std::f64::consts::PI / w).norm() - 2.0).abs() < 1e-12);
        assert!((displacement_oracle(2.4 * w, w, std::f64::consts::PI / w).norm() - 4.8).abs() < 1e-12);
    }
}
