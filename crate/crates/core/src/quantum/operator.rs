use num_complex::Complex64;

use super::dense::CMat;
use super::space::HilbertSpace;
use super::sparse::Csr;
use super::QuantumError;

/// Fill fraction at or below which an operator is kept sparse.
pub const DENSITY_THRESHOLD: f64 = 0.25;

#[derive(Debug, Clone, PartialEq)]
pub enum Storage {
    Dense(CMat),
    Sparse(Csr),
}

/// Square operator on a [`HilbertSpace`].
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    space: HilbertSpace,
    storage: Storage,
}

fn cplx(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

impl Operator {
    fn check_dim(space: &HilbertSpace, rows: usize, cols: usize) -> Result<(), QuantumError> {
        if rows != space.dim() || cols != space.dim() {
            return Err(QuantumError::DimensionMismatch {
                expected: space.dim(),
                found: rows.max(cols),
            });
        }
        Ok(())
    }

    /// Wraps a sparse matrix, choosing storage by fill fraction.
    pub fn from_csr(space: HilbertSpace, m: Csr) -> Result<Self, QuantumError> {
        Self::check_dim(&space, m.rows(), m.cols())?;
        let storage = if m.density() <= DENSITY_THRESHOLD {
            Storage::Sparse(m)
        } else {
            Storage::Dense(m.to_dense())
        };
        Ok(Self { space, storage })
    }

    /// Wraps a dense matrix, choosing storage by fill fraction.
    pub fn from_dense(space: HilbertSpace, m: CMat) -> Result<Self, QuantumError> {
        Self::check_dim(&space, m.rows(), m.cols())?;
        let n = m.rows() * m.cols();
        let storage = if n > 0 && (m.count_nonzero() as f64) / (n as f64) <= DENSITY_THRESHOLD {
            Storage::Sparse(Csr::from_dense(&m))
        } else {
            Storage::Dense(m)
        };
        Ok(Self { space, storage })
    }

    fn with_storage(space: HilbertSpace, storage: Storage) -> Self {
        match storage {
            Storage::Sparse(m) => Self::from_csr(space, m).expect("shape preserved"),
            Storage::Dense(m) => Self::from_dense(space, m).expect("shape preserved"),
        }
    }

    /// Annihilation operator `a` with `⟨n−1|a|n⟩ = √n`.
    pub fn destroy(dim: usize) -> Result<Self, QuantumError> {
        let space = HilbertSpace::single(dim)?;
        let trip = (1..dim).map(|n| (n - 1, n, cplx((n as f64).sqrt()))).collect();
        Self::from_csr(space, Csr::from_triplets(dim, dim, trip)?)
    }

    pub fn create(dim: usize) -> Result<Self, QuantumError> {
        Ok(Self::destroy(dim)?.adjoint())
    }

    pub fn number(dim: usize) -> Result<Self, QuantumError> {
        let space = HilbertSpace::single(dim)?;
        let trip = (1..dim).map(|n| (n, n, cplx(n as f64))).collect();
        Self::from_csr(space, Csr::from_triplets(dim, dim, trip)?)
    }

    pub fn identity(dim: usize) -> Result<Self, QuantumError> {
        Self::identity_on(&HilbertSpace::single(dim)?)
    }

    pub fn identity_on(space: &HilbertSpace) -> Result<Self, QuantumError> {
        Self::from_csr(space.clone(), Csr::identity(space.dim()))
    }

    pub fn zero_on(space: &HilbertSpace) -> Self {
        let n = space.dim();
        Self {
            space: space.clone(),
            storage: Storage::Sparse(Csr::zeros(n, n)),
        }
    }

    /// Diagonal operator.
    pub fn diagonal(space: HilbertSpace, diag: &[f64]) -> Result<Self, QuantumError> {
        let n = space.dim();
        if diag.len() != n {
            return Err(QuantumError::DimensionMismatch {
                expected: n,
                found: diag.len(),
            });
        }
        let trip = diag.iter().enumerate().map(|(i, &d)| (i, i, cplx(d))).collect();
        Self::from_csr(space, Csr::from_triplets(n, n, trip)?)
    }

    /// Projector onto level `level` of a single mode.
    pub fn projector(dim: usize, level: usize) -> Result<Self, QuantumError> {
        if level >= dim {
            return Err(QuantumError::IndexOutOfRange {
                index: level,
                bound: dim,
            });
        }
        let mut d = vec![0.0; dim];
        d[level] = 1.0;
        Self::diagonal(HilbertSpace::single(dim)?, &d)
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn storage(&self) -> &Storage {
        &self.storage
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.storage, Storage::Sparse(_))
    }

    pub fn to_dense(&self) -> CMat {
        match &self.storage {
            Storage::Dense(m) => m.clone(),
            Storage::Sparse(m) => m.to_dense(),
        }
    }

    pub fn to_csr(&self) -> Csr {
        match &self.storage {
            Storage::Dense(m) => Csr::from_dense(m),
            Storage::Sparse(m) => m.clone(),
        }
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        match &self.storage {
            Storage::Dense(m) => m.get(i, j),
            Storage::Sparse(m) => m.get(i, j),
        }
    }

    pub fn adjoint(&self) -> Self {
        let storage = match &self.storage {
            Storage::Dense(m) => Storage::Dense(m.adjoint()),
            Storage::Sparse(m) => Storage::Sparse(m.adjoint()),
        };
        Self {
            space: self.space.clone(),
            storage,
        }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let storage = match &self.storage {
            Storage::Dense(m) => Storage::Dense(m.scale(s)),
            Storage::Sparse(m) => Storage::Sparse(m.scale(s)),
        };
        Self::with_storage(self.space.clone(), storage)
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(cplx(s))
    }

    fn check_space(&self, other: &Self) -> Result<(), QuantumError> {
        if self.space != other.space {
            return Err(QuantumError::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }

    /// `self + s·other`.
    pub fn add_scaled(&self, other: &Self, s: Complex64) -> Result<Self, QuantumError> {
        self.check_space(other)?;
        let storage = match (&self.storage, &other.storage) {
            (Storage::Sparse(a), Storage::Sparse(b)) => Storage::Sparse(a.add_scaled(b, s)?),
            _ => Storage::Dense(self.to_dense().add(&other.to_dense().scale(s))?),
        };
        Ok(Self::with_storage(self.space.clone(), storage))
    }

    pub fn add(&self, other: &Self) -> Result<Self, QuantumError> {
        self.add_scaled(other, cplx(1.0))
    }

    pub fn sub(&self, other: &Self) -> Result<Self, QuantumError> {
        self.add_scaled(other, cplx(-1.0))
    }

    /// Operator product `self · other`.
    pub fn mul(&self, other: &Self) -> Result<Self, QuantumError> {
        self.check_space(other)?;
        let storage = match (&self.storage, &other.storage) {
            (Storage::Sparse(a), Storage::Sparse(b)) => Storage::Sparse(a.matmul(b)?),
            (Storage::Sparse(a), Storage::Dense(b)) => Storage::Dense(a.mul_dense(b)?),
            _ => Storage::Dense(self.to_dense().matmul(&other.to_dense())?),
        };
        Ok(Self::with_storage(self.space.clone(), storage))
    }

    /// `[self, other]`.
    pub fn commutator(&self, other: &Self) -> Result<Self, QuantumError> {
        self.mul(other)?.sub(&other.mul(self)?)
    }

    /// Kronecker product, `self` as the leading factor.
    pub fn tensor(&self, other: &Self) -> Self {
        let space = self.space.tensor(&other.space);
        let storage = match (&self.storage, &other.storage) {
            (Storage::Dense(a), Storage::Dense(b)) => Storage::Dense(a.kron(b)),
            _ => Storage::Sparse(self.to_csr().kron(&other.to_csr())),
        };
        Self::with_storage(space, storage)
    }

    /// Lifts a single-mode operator onto factor `which` of `space`.
    pub fn embed(&self, which: usize, space: &HilbertSpace) -> Result<Self, QuantumError> {
        let (before, d, after) = space.split(which)?;
        if self.dim() != d {
            return Err(QuantumError::DimensionMismatch {
                expected: d,
                found: self.dim(),
            });
        }
        let mut m = self.to_csr();
        if before > 1 {
            m = Csr::identity(before).kron(&m);
        }
        if after > 1 {
            m = m.kron(&Csr::identity(after));
        }
        Self::from_csr(space.clone(), m)
    }

    pub fn max_abs(&self) -> f64 {
        match &self.storage {
            Storage::Dense(m) => m.max_abs(),
            Storage::Sparse(m) => m.max_abs(),
        }
    }

    /// `max |A − A†|`.
    pub fn hermiticity_error(&self) -> f64 {
        self.sub(&self.adjoint()).map(|d| d.max_abs()).unwrap_or(f64::INFINITY)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_error() <= tol
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        match self.adjoint().mul(self) {
            Ok(p) => p
                .sub(&Self::identity_on(&self.space).expect("valid space"))
                .map(|d| d.max_abs() <= tol)
                .unwrap_or(false),
            Err(_) => false,
        }
    }

    /// `A ψ`.
    pub fn apply(&self, psi: &[Complex64]) -> Result<Vec<Complex64>, QuantumError> {
        match &self.storage {
            Storage::Dense(m) => m.matvec(psi),
            Storage::Sparse(m) => m.matvec(psi),
        }
    }

    /// `A ρ` for a dense `ρ`.
    pub fn mul_dense(&self, rho: &CMat) -> Result<CMat, QuantumError> {
        match &self.storage {
            Storage::Dense(m) => m.matmul(rho),
            Storage::Sparse(m) => m.mul_dense(rho),
        }
    }

    /// `Tr(A ρ)`.
    pub fn trace_with(&self, rho: &CMat) -> Result<Complex64, QuantumError> {
        if rho.rows() != self.dim() || rho.cols() != self.dim() {
            return Err(QuantumError::DimensionMismatch {
                expected: self.dim(),
                found: rho.rows(),
            });
        }
        let mut s = Complex64::new(0.0, 0.0);
        match &self.storage {
            Storage::Sparse(m) => {
                for (i, j, v) in m.iter() {
                    s += v * rho.get(j, i);
                }
            }
            Storage::Dense(m) => {
                for i in 0..m.rows() {
                    for j in 0..m.cols() {
                        s += m.get(i, j) * rho.get(j, i);
                    }
                }
            }
        }
        Ok(s)
    }
}
