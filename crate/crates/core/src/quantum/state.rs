use num_complex::Complex64;

use super::dense::CMat;
use super::operator::Operator;
use super::space::HilbertSpace;
use super::QuantumError;

/// Largest tolerated norm loss when building a truncated coherent state.
pub const COHERENT_TRUNCATION_TOL: f64 = 1e-8;
/// Largest tolerated population beyond the truncation for thermal states.
pub const THERMAL_TRUNCATION_TOL: f64 = 1e-8;

pub const KET_NORM_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-9;
pub const NEGATIVITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Ket {
    space: HilbertSpace,
    data: Vec<Complex64>,
}

impl Ket {
    /// Normalises `data`; errors on a zero vector or a length mismatch.
    pub fn new(space: HilbertSpace, data: Vec<Complex64>) -> Result<Self, QuantumError> {
        if data.len() != space.dim() {
            return Err(QuantumError::DimensionMismatch {
                expected: space.dim(),
                found: data.len(),
            });
        }
        let norm = data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(QuantumError::InvalidState("ket has zero or non-finite norm".into()));
        }
        Ok(Self {
            space,
            data: data.into_iter().map(|z| z / norm).collect(),
        })
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Ket) -> Result<Complex64, QuantumError> {
        if self.space != other.space {
            return Err(QuantumError::DimensionMismatch {
                expected: self.space.dim(),
                found: other.space.dim(),
            });
        }
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| a.conj() * b).sum())
    }

    pub fn tensor(&self, other: &Ket) -> Ket {
        let data = self
            .data
            .iter()
            .flat_map(|a| other.data.iter().map(move |b| a * b))
            .collect();
        Ket {
            space: self.space.tensor(&other.space),
            data,
        }
    }

    pub fn expectation(&self, op: &Operator) -> Result<Complex64, QuantumError> {
        if op.space() != &self.space {
            return Err(QuantumError::DimensionMismatch {
                expected: self.space.dim(),
                found: op.dim(),
            });
        }
        let v = op.apply(&self.data)?;
        Ok(self.data.iter().zip(&v).map(|(a, b)| a.conj() * b).sum())
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix {
            space: self.space.clone(),
            mat: CMat::outer(&self.data, &self.data),
        }
    }
}

/// Density matrix on a [`HilbertSpace`].
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    space: HilbertSpace,
    mat: CMat,
}

impl DensityMatrix {
    /// Wraps a matrix and checks the density-matrix invariants.
    pub fn new(space: HilbertSpace, mat: CMat) -> Result<Self, QuantumError> {
        let rho = Self::from_matrix_unchecked(space, mat)?;
        rho.validate()?;
        Ok(rho)
    }

    /// Wraps a matrix after checking only its shape.
    pub fn from_matrix_unchecked(space: HilbertSpace, mat: CMat) -> Result<Self, QuantumError> {
        if mat.rows() != space.dim() || mat.cols() != space.dim() {
            return Err(QuantumError::DimensionMismatch {
                expected: space.dim(),
                found: mat.rows().max(mat.cols()),
            });
        }
        Ok(Self { space, mat })
    }

    pub fn validate(&self) -> Result<(), QuantumError> {
        let tr = self.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(QuantumError::InvalidState(format!("trace {tr} differs from 1")));
        }
        let herm = self.mat.hermiticity_error();
        if herm > TRACE_TOL {
            return Err(QuantumError::InvalidState(format!("hermiticity error {herm:.3e}")));
        }
        let min = self.min_eigenvalue()?;
        if min < -NEGATIVITY_TOL {
            return Err(QuantumError::InvalidState(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(())
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn into_matrix(self) -> CMat {
        self.mat
    }

    pub fn trace(&self) -> Complex64 {
        self.mat.trace()
    }

    pub fn hermiticity_error(&self) -> f64 {
        self.mat.hermiticity_error()
    }

    pub fn min_eigenvalue(&self) -> Result<f64, QuantumError> {
        Ok(self.mat.hermitian_eigenvalues()?.first().copied().unwrap_or(0.0))
    }

    pub fn purity(&self) -> f64 {
        // Tr ρ² = Σ |ρ_ij|² for Hermitian ρ
        self.mat.data().iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn population(&self, i: usize) -> f64 {
        self.mat.get(i, i).re
    }

    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        DensityMatrix {
            space: self.space.tensor(&other.space),
            mat: self.mat.kron(&other.mat),
        }
    }

    pub fn expectation(&self, op: &Operator) -> Result<Complex64, QuantumError> {
        if op.space() != &self.space {
            return Err(QuantumError::DimensionMismatch {
                expected: self.space.dim(),
                found: op.dim(),
            });
        }
        op.trace_with(&self.mat)
    }

    /// Reduced state of subsystem `keep`.
    pub fn partial_trace(&self, keep: usize) -> Result<DensityMatrix, QuantumError> {
        let (before, d, after) = self.space.split(keep)?;
        let mut out = CMat::zeros(d, d);
        for a in 0..d {
            for b in 0..d {
                let mut s = Complex64::new(0.0, 0.0);
                for i in 0..before {
                    for k in 0..after {
                        let r = (i * d + a) * after + k;
                        let c = (i * d + b) * after + k;
                        s += self.mat.get(r, c);
                    }
                }
                out.set(a, b, s);
            }
        }
        Ok(DensityMatrix {
            space: HilbertSpace::single(d)?,
            mat: out,
        })
    }

    /// `(ρ + ρ†)/2`, renormalised to unit trace.
    pub fn hermitize(&self) -> DensityMatrix {
        let h = self.mat.hermitian_part();
        let tr = h.trace().re;
        DensityMatrix {
            space: self.space.clone(),
            mat: if tr != 0.0 {
                h.scale(Complex64::new(1.0 / tr, 0.0))
            } else {
                h
            },
        }
    }

    /// `⟨ψ|ρ|ψ⟩`.
    pub fn overlap(&self, psi: &Ket) -> Result<f64, QuantumError> {
        if psi.space() != &self.space {
            return Err(QuantumError::DimensionMismatch {
                expected: self.space.dim(),
                found: psi.space().dim(),
            });
        }
        let v = self.mat.matvec(psi.data())?;
        let s: Complex64 = psi.data().iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
        Ok(s.re)
    }

    /// Trace distance `½‖ρ − σ‖₁`.
    pub fn trace_distance(&self, other: &DensityMatrix) -> Result<f64, QuantumError> {
        let diff = self.mat.sub(&other.mat)?;
        let eig = diff.hermitian_eigenvalues()?;
        Ok(0.5 * eig.iter().map(|e| e.abs()).sum::<f64>())
    }
}

/// `|n⟩` in a single mode of dimension `dim`.
pub fn fock_state(dim: usize, n: usize) -> Result<Ket, QuantumError> {
    let space = HilbertSpace::single(dim)?;
    if n >= dim {
        return Err(QuantumError::IndexOutOfRange { index: n, bound: dim });
    }
    let mut v = vec![Complex64::new(0.0, 0.0); dim];
    v[n] = Complex64::new(1.0, 0.0);
    Ket::new(space, v)
}

/// Truncated coherent state `|α⟩`, renormalised. Errors when the truncation
/// discards more than [`COHERENT_TRUNCATION_TOL`] of the norm.
pub fn coherent_state(dim: usize, amp: Complex64) -> Result<Ket, QuantumError> {
    let space = HilbertSpace::single(dim)?;
    let mut v = Vec::with_capacity(dim);
    let mut c = Complex64::new((-0.5 * amp.norm_sqr()).exp(), 0.0);
    v.push(c);
    for n in 1..dim {
        c = c * amp / (n as f64).sqrt();
        v.push(c);
    }
    let kept: f64 = v.iter().map(|z| z.norm_sqr()).sum();
    if 1.0 - kept > COHERENT_TRUNCATION_TOL {
        return Err(QuantumError::Truncation {
            dim,
            detail: format!(
                "coherent amplitude |α| = {:.4} loses {:.3e} of the norm",
                amp.norm(),
                1.0 - kept
            ),
        });
    }
    Ket::new(space, v)
}

/// Thermal state with mean occupation `nbar`, renormalised on the truncated
/// space. Errors when the population beyond the truncation exceeds
/// [`THERMAL_TRUNCATION_TOL`].
pub fn thermal_state(dim: usize, nbar: f64) -> Result<DensityMatrix, QuantumError> {
    let space = HilbertSpace::single(dim)?;
    if !(nbar >= 0.0) || !nbar.is_finite() {
        return Err(QuantumError::InvalidState(format!(
            "thermal occupation {nbar} must be finite and >= 0"
        )));
    }
    let q = nbar / (1.0 + nbar);
    let leak = q.powi(dim as i32);
    if leak > THERMAL_TRUNCATION_TOL {
        return Err(QuantumError::Truncation {
            dim,
            detail: format!("thermal occupation {nbar} leaves {leak:.3e} above the cutoff"),
        });
    }
    let mut p: Vec<f64> = (0..dim).map(|n| q.powi(n as i32)).collect();
    let z: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= z);
    let diag: Vec<Complex64> = p.into_iter().map(|x| Complex64::new(x, 0.0)).collect();
    Ok(DensityMatrix {
        space,
        mat: CMat::from_diag(&diag),
    })
}
