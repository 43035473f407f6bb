use serde::{Deserialize, Serialize};

use super::QuantumError;

/// Index of the transmon factor.
pub const TRANSMON: usize = 0;
/// Index of the mechanical factor.
pub const MECHANICS: usize = 1;

/// Ordered list of subsystem truncations.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HilbertSpace {
    dims: Vec<usize>,
}

impl HilbertSpace {
    pub fn new(dims: Vec<usize>) -> Result<Self, QuantumError> {
        if dims.is_empty() {
            return Err(QuantumError::DimensionTooSmall(0));
        }
        if let Some(&d) = dims.iter().find(|&&d| d < 2) {
            return Err(QuantumError::DimensionTooSmall(d));
        }
        Ok(Self { dims })
    }

    pub fn single(dim: usize) -> Result<Self, QuantumError> {
        Self::new(vec![dim])
    }

    /// Transmon ⊗ mechanics.
    pub fn bipartite(n_t: usize, n_m: usize) -> Result<Self, QuantumError> {
        Self::new(vec![n_t, n_m])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn n_subsystems(&self) -> usize {
        self.dims.len()
    }

    pub fn subsystem_dim(&self, which: usize) -> Result<usize, QuantumError> {
        self.dims.get(which).copied().ok_or(QuantumError::IndexOutOfRange {
            index: which,
            bound: self.dims.len(),
        })
    }

    /// Space of `self ⊗ other`.
    pub fn tensor(&self, other: &Self) -> Self {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self { dims }
    }

    /// Product of the dimensions before and after `which`.
    pub fn split(&self, which: usize) -> Result<(usize, usize, usize), QuantumError> {
        let d = self.subsystem_dim(which)?;
        let before = self.dims[..which].iter().product();
        let after = self.dims[which + 1..].iter().product();
        Ok((before, d, after))
    }
}

impl std::fmt::Display for HilbertSpace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.dims.iter().map(|d| d.to_string()).collect();
        write!(f, "[{}]", parts.join(" x "))
    }
}
