//! Hamiltonian, dissipators and Liouvillian of the transmon–beam system.
//!
//! The Hamiltonian (divided by ħ) is
//!
//! ```text
//! H = [ω_T or Δ] c†c − (E_C/2) c†c†cc + ω_M b†b
//!     + g_eff c†c (b + b†) + g' c†c†cc (b + b†) + g'' c†c (b + b†)²
//!     + ε (c + c†)
//! ```
//!
//! where the first coefficient depends on the frame and the drive term is only
//! present in the drive-rotating frame. Every interaction term commutes with
//! `c†c`, so moving to a frame rotating with the qubit (or the drive) is exact.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{CircuitParams, DerivedCircuit};
use crate::quantum::{Csr, HilbertSpace, Operator, QuantumError, MECHANICS, TRANSMON};

/// Default upper bound on `(N_T N_M)²`, the Liouvillian dimension.
pub const DEFAULT_LIOUVILLIAN_CAP: usize = 250_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error(transparent)]
    Quantum(#[from] QuantumError),
    #[error("a drive term needs the drive-rotating frame (model frame is {0:?})")]
    FrameMismatch(Frame),
    #[error("the drive-rotating frame needs a drive specification")]
    MissingDrive,
    #[error(
        "Liouvillian dimension {dim2} exceeds the cap {cap}; reduce the truncation \
         or raise the cap"
    )]
    MemoryCap { dim2: usize, cap: usize },
    #[error("invalid model parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
}

/// Reference frame of the Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Frame {
    /// Rotating at the qubit frequency; `ω_T c†c` is removed.
    QubitRotating,
    /// Rotating at the drive frequency; `ω_T c†c` becomes `Δ c†c`.
    DriveRotating,
    /// No rotation; keeps `ω_T c†c`. Used as a reference for frame checks.
    Lab { omega_t: f64 },
}

/// Coherent qubit drive, already expressed in the drive-rotating frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveSpec {
    /// `ε_D` (rad/s).
    pub amp: f64,
    /// `Δ = ω_T − ω_D` (rad/s).
    pub detuning: f64,
}

impl DriveSpec {
    /// Rough number of drive photons `(ε_D/Δ)²`.
    pub fn photon_estimate(&self) -> f64 {
        (self.amp / self.detuning).powi(2)
    }
}

/// Interaction strengths entering the Hamiltonian.
///
/// The only constructor takes the bare couplings and folds `2g'` into the
/// linear term, so the absorption cannot happen twice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Couplings {
    g0_eff: f64,
    g0_prime: f64,
    g0_dprime: f64,
}

impl Couplings {
    pub fn from_bare(g0: f64, g0_prime: f64, g0_dprime: f64) -> Self {
        Self {
            g0_eff: g0 + 2.0 * g0_prime,
            g0_prime,
            g0_dprime,
        }
    }

    pub fn from_circuit(d: &DerivedCircuit) -> Self {
        Self::from_bare(d.g0, d.g0_prime, d.g0_dprime)
    }

    pub fn zero() -> Self {
        Self::from_bare(0.0, 0.0, 0.0)
    }

    /// `g0 + 2g0'`, the coefficient of `c†c(b + b†)`.
    pub fn g0_eff(&self) -> f64 {
        self.g0_eff
    }

    pub fn g0_prime(&self) -> f64 {
        self.g0_prime
    }

    pub fn g0_dprime(&self) -> f64 {
        self.g0_dprime
    }
}

/// Rates and bath occupations of the Lindblad dissipators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dissipation {
    /// Mechanical energy decay rate `ω_M/Q` (1/s).
    pub gamma_m: f64,
    pub n_th_mech: f64,
    /// Transmon relaxation time (s); `f64::INFINITY` disables relaxation.
    pub t1: f64,
    /// Transmon dephasing time (s); `f64::INFINITY` disables dephasing.
    pub t2: f64,
    pub n_th_transmon: f64,
}

impl Dissipation {
    pub fn from_params(p: &CircuitParams) -> Self {
        Self {
            gamma_m: p.gamma_m(),
            n_th_mech: p.n_th_mech,
            t1: p.t1,
            t2: p.t2,
            n_th_transmon: p.n_th_transmon,
        }
    }

    /// Closed system.
    pub fn none() -> Self {
        Self {
            gamma_m: 0.0,
            n_th_mech: 0.0,
            t1: f64::INFINITY,
            t2: f64::INFINITY,
            n_th_transmon: 0.0,
        }
    }

    fn validate(&self) -> Result<(), ModelError> {
        let bad = |name, reason: &str| {
            Err(ModelError::InvalidParameter {
                name,
                reason: reason.into(),
            })
        };
        if !(self.gamma_m >= 0.0) || !self.gamma_m.is_finite() {
            return bad("gamma_m", "must be finite and >= 0");
        }
        if !(self.n_th_mech >= 0.0) || !(self.n_th_transmon >= 0.0) {
            return bad("n_th", "thermal occupations must be >= 0");
        }
        if !(self.t1 > 0.0) || !(self.t2 > 0.0) {
            return bad("t1/t2", "must be > 0 (use infinity to disable)");
        }
        Ok(())
    }

    /// `(rate, kind)` of the five channels, in a fixed order.
    pub fn rates(&self) -> [f64; 5] {
        let inv = |t: f64| if t.is_infinite() { 0.0 } else { 1.0 / t };
        [
            (self.n_th_mech + 1.0) * self.gamma_m,
            self.n_th_mech * self.gamma_m,
            (self.n_th_transmon + 1.0) * inv(self.t1),
            self.n_th_transmon * inv(self.t1),
            inv(self.t2),
        ]
    }
}

/// Subsystem truncations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Truncation {
    pub n_t: usize,
    pub n_m: usize,
}

impl Truncation {
    pub const COOLING: Truncation = Truncation { n_t: 3, n_m: 30 };
    pub const CAT: Truncation = Truncation { n_t: 3, n_m: 80 };

    pub fn space(&self) -> Result<HilbertSpace, QuantumError> {
        HilbertSpace::bipartite(self.n_t, self.n_m)
    }

    /// Mechanical cutoff raised by half, rounded up.
    pub fn escalated(&self) -> Self {
        Self {
            n_t: self.n_t,
            n_m: self.n_m + self.n_m.div_ceil(2),
        }
    }
}

/// Ladder and number operators embedded in the composite space.
#[derive(Debug, Clone)]
pub struct ModeOperators {
    pub c: Operator,
    pub b: Operator,
    pub n_c: Operator,
    pub n_b: Operator,
    /// `b + b†`.
    pub x_b: Operator,
    /// `c†c†cc`.
    pub kerr_c: Operator,
}

impl ModeOperators {
    pub fn new(space: &HilbertSpace) -> Result<Self, QuantumError> {
        let n_t = space.subsystem_dim(TRANSMON)?;
        let n_m = space.subsystem_dim(MECHANICS)?;
        let c1 = Operator::destroy(n_t)?;
        let b1 = Operator::destroy(n_m)?;
        let cd1 = c1.adjoint();
        let kerr1 = cd1.mul(&cd1)?.mul(&c1)?.mul(&c1)?;
        Ok(Self {
            c: c1.embed(TRANSMON, space)?,
            b: b1.embed(MECHANICS, space)?,
            n_c: Operator::number(n_t)?.embed(TRANSMON, space)?,
            n_b: Operator::number(n_m)?.embed(MECHANICS, space)?,
            x_b: b1.add(&b1.adjoint())?.embed(MECHANICS, space)?,
            kerr_c: kerr1.embed(TRANSMON, space)?,
        })
    }
}

/// Free Hamiltonian in the requested frame. `detuning` is used only in the
/// drive-rotating frame.
pub fn build_h0(
    ops: &ModeOperators,
    omega_m: f64,
    ec: f64,
    frame: Frame,
    detuning: f64,
) -> Result<Operator, QuantumError> {
    let mut h = ops.n_b.scale_re(omega_m).add(&ops.kerr_c.scale_re(-0.5 * ec))?;
    match frame {
        Frame::QubitRotating => {}
        Frame::DriveRotating => h = h.add(&ops.n_c.scale_re(detuning))?,
        Frame::Lab { omega_t } => h = h.add(&ops.n_c.scale_re(omega_t))?,
    }
    Ok(h)
}

/// Radiation-pressure interaction including the two higher-order terms.
pub fn build_hint(ops: &ModeOperators, couplings: &Couplings) -> Result<Operator, QuantumError> {
    let x2 = ops.x_b.mul(&ops.x_b)?;
    ops.n_c
        .mul(&ops.x_b)?
        .scale_re(couplings.g0_eff())
        .add(&ops.kerr_c.mul(&ops.x_b)?.scale_re(couplings.g0_prime()))?
        .add(&ops.n_c.mul(&x2)?.scale_re(couplings.g0_dprime()))
}

/// `ε (c + c†)`; only valid in the drive-rotating frame.
pub fn build_drive(ops: &ModeOperators, amp: f64, frame: Frame) -> Result<Operator, ModelError> {
    if frame != Frame::DriveRotating {
        return Err(ModelError::FrameMismatch(frame));
    }
    Ok(ops.c.add(&ops.c.adjoint())?.scale_re(amp))
}

/// The five rate-weighted jump operators, in the order
/// `b`, `b†`, `c`, `c†`, `c†c`.
pub fn build_collapse_ops(ops: &ModeOperators, diss: &Dissipation) -> Result<Vec<Operator>, QuantumError> {
    let r = diss.rates();
    Ok(vec![
        ops.b.scale_re(r[0].sqrt()),
        ops.b.adjoint().scale_re(r[1].sqrt()),
        ops.c.scale_re(r[2].sqrt()),
        ops.c.adjoint().scale_re(r[3].sqrt()),
        ops.n_c.scale_re(r[4].sqrt()),
    ])
}

/// Full description of one time-independent model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub truncation: Truncation,
    pub frame: Frame,
    pub couplings: Couplings,
    pub omega_m: f64,
    pub ec: f64,
    pub drive: Option<DriveSpec>,
    pub dissipation: Dissipation,
}

/// Assembled Hamiltonian and collapse operators.
#[derive(Debug, Clone)]
pub struct SystemModel {
    pub spec: ModelSpec,
    pub space: HilbertSpace,
    pub ops: ModeOperators,
    pub h_static: Operator,
    pub collapse_ops: Vec<Operator>,
}

impl SystemModel {
    pub fn build(spec: ModelSpec) -> Result<Self, ModelError> {
        spec.dissipation.validate()?;
        for (name, v) in [("omega_m", spec.omega_m), ("ec", spec.ec)] {
            if !v.is_finite() || v < 0.0 {
                return Err(ModelError::InvalidParameter {
                    name,
                    reason: "must be finite and >= 0".into(),
                });
            }
        }
        let space = spec.truncation.space()?;
        let ops = ModeOperators::new(&space)?;
        let detuning = match (spec.frame, spec.drive) {
            (Frame::DriveRotating, Some(d)) => {
                if !(d.amp >= 0.0) || !d.amp.is_finite() || !d.detuning.is_finite() {
                    return Err(ModelError::InvalidParameter {
                        name: "drive",
                        reason: "amplitude must be finite and >= 0, detuning finite".into(),
                    });
                }
                d.detuning
            }
            (Frame::DriveRotating, None) => return Err(ModelError::MissingDrive),
            (f, Some(_)) => return Err(ModelError::FrameMismatch(f)),
            (_, None) => 0.0,
        };
        let mut h =
            build_h0(&ops, spec.omega_m, spec.ec, spec.frame, detuning)?.add(&build_hint(&ops, &spec.couplings)?)?;
        if let Some(d) = spec.drive {
            h = h.add(&build_drive(&ops, d.amp, spec.frame)?)?;
        }
        let collapse_ops = build_collapse_ops(&ops, &spec.dissipation)?;
        Ok(Self {
            spec,
            space,
            ops,
            h_static: h,
            collapse_ops,
        })
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    /// Same model with different couplings.
    pub fn with_couplings(&self, couplings: Couplings) -> Result<Self, ModelError> {
        Self::build(ModelSpec { couplings, ..self.spec })
    }

    pub fn liouvillian(&self) -> Result<Csr, ModelError> {
        build_liouvillian(self, DEFAULT_LIOUVILLIAN_CAP)
    }
}

/// Superoperator acting on column-stacked density matrices,
/// `vec(ρ)[i + j·d] = ρ[i][j]`:
///
/// ```text
/// L = −i (I ⊗ H − Hᵀ ⊗ I) + Σ_k [ c_k* ⊗ c_k − ½ I ⊗ c_k†c_k − ½ (c_k†c_k)ᵀ ⊗ I ]
/// ```
pub fn build_liouvillian(model: &SystemModel, cap: usize) -> Result<Csr, ModelError> {
    let d = model.dim();
    let dim2 = d * d;
    if dim2 > cap {
        return Err(ModelError::MemoryCap { dim2, cap });
    }
    let id = Csr::identity(d);
    let h = model.h_static.to_csr();
    let minus_i = Complex64::new(0.0, -1.0);
    let mut l = id
        .kron(&h)
        .add_scaled(&h.transpose().kron(&id), Complex64::new(-1.0, 0.0))?
        .scale(minus_i);
    let half = Complex64::new(-0.5, 0.0);
    for c in &model.collapse_ops {
        let c = c.to_csr();
        if c.nnz() == 0 {
            continue;
        }
        let cdc = c.adjoint().matmul(&c)?;
        l = l
            .add_scaled(&c.conj().kron(&c), Complex64::new(1.0, 0.0))?
            .add_scaled(&id.kron(&cdc), half)?
            .add_scaled(&cdc.transpose().kron(&id), half)?;
    }
    Ok(l)
}

/// Column-stacks a row-major square matrix.
pub fn vectorize(m: &crate::quantum::CMat) -> Vec<Complex64> {
    let d = m.rows();
    let mut v = vec![Complex64::new(0.0, 0.0); d * d];
    for i in 0..d {
        for j in 0..d {
            v[i + j * d] = m.get(i, j);
        }
    }
    v
}

/// Inverse of [`vectorize`].
pub fn unvectorize(v: &[Complex64], d: usize) -> crate::quantum::CMat {
    crate::quantum::CMat::from_fn(d, d, |i, j| v[i + j * d])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::CMat;

    fn spec(n_t: usize, n_m: usize, frame: Frame) -> ModelSpec {
        ModelSpec {
            truncation: Truncation { n_t, n_m },
            frame,
            couplings: Couplings::zero(),
            omega_m: 1.0,
            ec: 0.0,
            drive: None,
            dissipation: Dissipation::none(),
        }
    }

    #[test]
    fn h0_without_anharmonicity_is_oscillator() {
        let m = SystemModel::build(spec(2, 3, Frame::QubitRotating)).unwrap();
        assert!(m.h_static.sub(&m.ops.n_b).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn drive_frame_detuning_on_excited_level() {
        let mut s = spec(2, 2, Frame::DriveRotating);
        s.omega_m = 0.0;
        s.drive = Some(DriveSpec {
            amp: 0.0,
            detuning: 0.7,
        });
        let m = SystemModel::build(s).unwrap();
        // |1_T, 0_M⟩ is composite index 2
        assert!((m.h_static.get(2, 2).re - 0.7).abs() < 1e-15);
    }

    #[test]
    fn kerr_eigenvalues() {
        let mut s = spec(3, 2, Frame::QubitRotating);
        s.omega_m = 0.0;
        s.ec = 2.0;
        let m = SystemModel::build(s).unwrap();
        let ev = m.h_static.to_dense().hermitian_eigenvalues().unwrap();
        assert!((ev[0] + 2.0).abs() < 1e-14);
        assert!(ev[2..].iter().all(|e| e.abs() < 1e-14));
    }

    #[test]
    fn hint_linear_only() {
        let space = HilbertSpace::bipartite(2, 3).unwrap();
        let ops = ModeOperators::new(&space).unwrap();
        let h = build_hint(&ops, &Couplings::from_bare(0.3, 0.0, 0.0)).unwrap();
        let p1 = Operator::projector(2, 1).unwrap();
        let a = Operator::destroy(3).unwrap();
        let expected = p1.tensor(&a.add(&a.adjoint()).unwrap()).scale_re(0.3);
        assert!(h.sub(&expected).unwrap().max_abs() < 1e-15);
        let full = build_hint(&ops, &Couplings::from_bare(0.3, 0.1, 0.01)).unwrap();
        assert_eq!(full.commutator(&ops.n_c).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn absorption_applied_once() {
        let c = Couplings::from_bare(1.0, -0.05, 0.0);
        assert_eq!(c.g0_eff(), 0.9);
        let m = SystemModel::build(ModelSpec {
            couplings: c,
            ..spec(2, 3, Frame::QubitRotating)
        })
        .unwrap();
        assert_eq!(m.spec.couplings.g0_eff(), 0.9);
    }

    #[test]
    fn second_order_vacuum_element() {
        let space = HilbertSpace::bipartite(2, 3).unwrap();
        let ops = ModeOperators::new(&space).unwrap();
        let h = build_hint(&ops, &Couplings::from_bare(0.0, 0.0, 1.0)).unwrap();
        // ⟨1_T 0_M| c†c (b+b†)² |1_T 0_M⟩
        assert!((h.get(3, 3).re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn collapse_rates() {
        let mut p = CircuitParams::table1();
        p.n_th_mech = 0.0;
        let d = Dissipation::from_params(&p);
        let r = d.rates();
        assert_eq!(r[1], 0.0);
        assert!((d.gamma_m / (2.0 * std::f64::consts::PI) - 1.0).abs() < 1e-12);
        assert!((r[3] - 5e3).abs() < 1e-9);
        let space = HilbertSpace::bipartite(3, 4).unwrap();
        let ops = ModeOperators::new(&space).unwrap();
        assert_eq!(build_collapse_ops(&ops, &d).unwrap().len(), 5);
    }

    #[test]
    fn drive_requires_drive_frame() {
        let space = HilbertSpace::bipartite(2, 2).unwrap();
        let ops = ModeOperators::new(&space).unwrap();
        assert!(build_drive(&ops, 1.0, Frame::QubitRotating).is_err());
        let d = build_drive(&ops, 0.0, Frame::DriveRotating).unwrap();
        assert_eq!(d.max_abs(), 0.0);
        let d = build_drive(&ops, 0.4, Frame::DriveRotating).unwrap();
        assert_eq!(d.hermiticity_error(), 0.0);
        let est = DriveSpec {
            amp: 70e3,
            detuning: 0.9375e6,
        }
        .photon_estimate();
        assert!((est - 0.005575).abs() < 1e-5);
    }

    #[test]
    fn liouvillian_preserves_trace() {
        let mut s = spec(3, 4, Frame::DriveRotating);
        s.couplings = Couplings::from_bare(0.2, 0.01, 0.003);
        s.ec = 5.0;
        s.drive = Some(DriveSpec {
            amp: 0.1,
            detuning: 0.9,
        });
        s.dissipation = Dissipation {
            gamma_m: 0.01,
            n_th_mech: 0.3,
            t1: 20.0,
            t2: 30.0,
            n_th_transmon: 0.05,
        };
        let m = SystemModel::build(s).unwrap();
        let l = m.liouvillian().unwrap();
        let d = m.dim();
        let vec_i = vectorize(&CMat::identity(d));
        // (vec I)† L, one column at a time via the adjoint
        let lt = l.adjoint();
        let r = lt.matvec(&vec_i).unwrap();
        let err = r.iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(err < 1e-12 * l.norm_inf().max(1.0), "{err}");
    }

    #[test]
    fn memory_cap() {
        let m = SystemModel::build(spec(3, 200, Frame::QubitRotating)).unwrap();
        assert!(matches!(m.liouvillian(), Err(ModelError::MemoryCap { .. })));
    }

    #[test]
    fn vectorize_roundtrip() {
        let m = CMat::from_fn(3, 3, |i, j| Complex64::new(i as f64, j as f64));
        assert_eq!(unvectorize(&vectorize(&m), 3), m);
        assert_eq!(vectorize(&m)[1], m.get(1, 0));
    }
}
