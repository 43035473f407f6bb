//! Observables and state characterisation: occupations, Wigner functions,
//! fidelities and the reference cat states.
//!
//! Phase-space convention: `x = (b + b†)/√2`, `p = i(b† − b)/√2`, so a
//! coherent state `|β⟩` sits at `(√2 Re β, √2 Im β)` and the vacuum Wigner
//! function peaks at `1/π`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::quantum::{coherent_state, CMat, DensityMatrix, HilbertSpace, Ket, QuantumError, MECHANICS, TRANSMON};

/// Mean excitation number of subsystem `which`.
pub fn mode_number(rho: &DensityMatrix, which: usize) -> Result<f64, QuantumError> {
    let reduced = if rho.space().n_subsystems() == 1 {
        if which != 0 {
            return Err(QuantumError::IndexOutOfRange { index: which, bound: 1 });
        }
        rho.clone()
    } else {
        rho.partial_trace(which)?
    };
    Ok((0..reduced.dim()).map(|n| n as f64 * reduced.population(n)).sum())
}

/// `⟨b†b⟩`; a single-mode state is taken to be the mechanics.
pub fn phonon_number(rho: &DensityMatrix) -> Result<f64, QuantumError> {
    if rho.space().n_subsystems() == 1 {
        mode_number(rho, 0)
    } else {
        mode_number(rho, MECHANICS)
    }
}

/// `⟨c†c⟩` of a composite state.
pub fn qubit_excitation(rho: &DensityMatrix) -> Result<f64, QuantumError> {
    mode_number(rho, TRANSMON)
}

/// Photon-number parity `Σ (−1)ⁿ ρ_nn` of a single mode.
pub fn parity(rho: &DensityMatrix) -> f64 {
    (0..rho.dim())
        .map(|n| if n % 2 == 0 { 1.0 } else { -1.0 } * rho.population(n))
        .sum()
}

/// `Tr[ρ D(c) Π D(c)†]`, the parity about the phase-space point `c`.
pub fn displaced_parity(rho: &DensityMatrix, center: Complex64) -> Result<f64, QuantumError> {
    let k = WignerKernel::new(rho, center.norm())?;
    let s = std::f64::consts::SQRT_2;
    Ok(k.displaced_parity(s * center.re, s * center.im))
}

/// Overlap fidelity `⟨ψ|ρ|ψ⟩`, clamped to `[0, 1]`.
pub fn fidelity_to_pure(rho: &DensityMatrix, psi: &Ket) -> Result<f64, QuantumError> {
    Ok(rho.overlap(psi)?.clamp(0.0, 1.0))
}

/// Uhlmann fidelity `√⟨ψ|ρ|ψ⟩` for a pure target.
pub fn fidelity_uhlmann(rho: &DensityMatrix, psi: &Ket) -> Result<f64, QuantumError> {
    Ok(fidelity_to_pure(rho, psi)?.sqrt())
}

/// Both fidelity conventions side by side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fidelity {
    /// `⟨ψ|ρ|ψ⟩`.
    pub overlap: f64,
    /// `√⟨ψ|ρ|ψ⟩`.
    pub uhlmann: f64,
}

impl Fidelity {
    pub fn from_overlap(overlap: f64) -> Self {
        let overlap = overlap.clamp(0.0, 1.0);
        Self {
            overlap,
            uhlmann: overlap.sqrt(),
        }
    }

    pub fn of(rho: &DensityMatrix, psi: &Ket) -> Result<Self, QuantumError> {
        Ok(Self::from_overlap(rho.overlap(psi)?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CatParity {
    Even,
    Odd,
}

/// `N± (|0⟩ ± |β⟩)`.
pub fn ideal_cat(beta: Complex64, parity: CatParity, dim: usize) -> Result<Ket, QuantumError> {
    let coh = coherent_state(dim, beta)?;
    let sign = match parity {
        CatParity::Even => 1.0,
        CatParity::Odd => -1.0,
    };
    let mut v = coh.data().iter().map(|z| z * sign).collect::<Vec<_>>();
    v[0] += 1.0;
    Ket::new(HilbertSpace::single(dim)?, v)
}

/// `(|0⟩_T|0⟩_M + e^{iφ}|1⟩_T|β⟩_M)/√2`.
pub fn ideal_bellcat(beta: Complex64, phase: f64, dim_t: usize, dim_m: usize) -> Result<Ket, QuantumError> {
    let coh = coherent_state(dim_m, beta)?;
    let mut v = vec![Complex64::new(0.0, 0.0); dim_t * dim_m];
    v[0] = Complex64::new(1.0, 0.0);
    let ph = Complex64::from_polar(1.0, phase);
    for (n, z) in coh.data().iter().enumerate() {
        v[dim_m + n] += ph * z;
    }
    Ket::new(HilbertSpace::bipartite(dim_t, dim_m)?, v)
}

/// Bell-cat fidelity maximised over the relative phase of the two branches.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BellCatFidelity {
    pub fidelity: Fidelity,
    /// Relative phase that attains the maximum.
    pub phase: f64,
}

/// With `A = ⟨00|ρ|00⟩`, `B = ⟨1β|ρ|1β⟩`, `C = ⟨00|ρ|1β⟩` the overlap with
/// the phased Bell-cat is `½(A + B) + Re(e^{iφ} C)`, maximal at `φ = −arg C`.
pub fn bellcat_fidelity(rho: &DensityMatrix, beta: Complex64) -> Result<BellCatFidelity, QuantumError> {
    let (c, a, b) = branch_overlaps(rho, beta)?;
    let overlap = 0.5 * (a + b) + c.norm();
    Ok(BellCatFidelity {
        fidelity: Fidelity::from_overlap(overlap),
        phase: -c.arg(),
    })
}

/// `(⟨00|ρ|1β⟩, ⟨00|ρ|00⟩, ⟨1β|ρ|1β⟩)` of a transmon–mechanics state.
pub fn branch_overlaps(rho: &DensityMatrix, beta: Complex64) -> Result<(Complex64, f64, f64), QuantumError> {
    let dims = rho.space().dims();
    if dims.len() != 2 {
        return Err(QuantumError::InvalidState("need a transmon-mechanics state".into()));
    }
    let n_m = dims[MECHANICS];
    let coh = coherent_state(n_m, beta)?;
    let m = rho.matrix();
    let a = m.get(0, 0).re;
    let mut c = Complex64::new(0.0, 0.0);
    let mut b = Complex64::new(0.0, 0.0);
    for (j, &vj) in coh.data().iter().enumerate() {
        c += m.get(0, n_m + j) * vj;
        for (i, &vi) in coh.data().iter().enumerate() {
            b += vi.conj() * m.get(n_m + i, n_m + j) * vj;
        }
    }
    Ok((c, a, b.re))
}

/// Sampled Wigner function; `values[ip][ix]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WignerGrid {
    pub x: Vec<f64>,
    pub p: Vec<f64>,
    pub values: Vec<Vec<f64>>,
    /// Set when the grid reaches displacements the truncation cannot
    /// represent.
    pub truncation_warning: bool,
}

impl WignerGrid {
    /// Trapezoid-free Riemann sum; exact enough for grids that contain the
    /// whole distribution.
    pub fn integral(&self) -> f64 {
        let dx = spacing(&self.x);
        let dp = spacing(&self.p);
        self.values.iter().flatten().sum::<f64>() * dx * dp
    }

    pub fn min(&self) -> f64 {
        self.values.iter().flatten().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `Σ_p W(x, p) Δp` for every `x`.
    pub fn x_marginal(&self) -> Vec<f64> {
        let dp = spacing(&self.p);
        (0..self.x.len())
            .map(|ix| self.values.iter().map(|row| row[ix]).sum::<f64>() * dp)
            .collect()
    }
}

fn spacing(axis: &[f64]) -> f64 {
    if axis.len() < 2 {
        1.0
    } else {
        (axis[axis.len() - 1] - axis[0]) / (axis.len() - 1) as f64
    }
}

/// Largest tolerated population that a displacement to the grid corner
/// pushes into the top two levels of the working space.
pub const WIGNER_LEAK_TOL: f64 = 1e-4;

/// Upper bound on the padded working dimension of [`WignerKernel`].
pub const WIGNER_MAX_DIM: usize = 1500;

/// Precomputed displaced-parity kernel for one single-mode state.
///
/// `D(β) = R(θ) exp(−i|β| X) R(θ)†` with `X = b + b†`, `R(θ) = exp(iθ b†b)`
/// and `θ = arg β + π/2`. Because `X` anticommutes with the parity `Π`,
/// `D(α) Π D(α)† = D(2α) Π`, and with `X = V Λ Vᵀ`
///
/// ```text
/// Tr[ρ D(2α) Π] = Σ_k e^{−2i|α|λ_k} Σ_d e^{iθd} C_{d,k},
/// C_{d,k} = Σ_m (−1)^m ρ_{m,m+d} V_{m,k} V_{m+d,k}.
/// ```
///
/// The identity holds for truncated operators too, but a truncated `D(α)`
/// only displaces faithfully while `D(α)†|n⟩` fits in the space. The state
/// is therefore zero-padded to a working dimension large enough for the
/// requested reach `|α|`, which makes the result exact to rounding.
pub struct WignerKernel {
    n: usize,
    dim: usize,
    reach: f64,
    lambda: Vec<f64>,
    /// `coeff[k][d + n − 1]`.
    coeff: Vec<Vec<Complex64>>,
    /// Population of the top two working levels after displacing `|n − 1⟩`
    /// by `reach`.
    edge_leak: f64,
}

/// Working dimension that holds `D(r)|n⟩` for every `n < n_state`, with seven
/// standard deviations of margin in `√n`.
fn padded_dim(n_state: usize, reach: f64) -> usize {
    if reach == 0.0 {
        return n_state;
    }
    let s = ((n_state - 1) as f64).sqrt() + reach + 7.0;
    ((s * s).ceil() as usize).max(n_state)
}

impl WignerKernel {
    /// Kernel accurate for `|α| ≤ reach`.
    pub fn new(rho: &DensityMatrix, reach: f64) -> Result<Self, QuantumError> {
        if rho.space().n_subsystems() != 1 {
            return Err(QuantumError::InvalidState(
                "Wigner function needs a single-mode state".into(),
            ));
        }
        if !(reach >= 0.0) || !reach.is_finite() {
            return Err(QuantumError::InvalidState(format!(
                "Wigner reach must be finite and >= 0, got {reach}"
            )));
        }
        let n = rho.dim();
        let dim = padded_dim(n, reach).min(WIGNER_MAX_DIM.max(n));
        let x = CMat::from_fn(dim, dim, |i, j| {
            if j == i + 1 {
                Complex64::new((j as f64).sqrt(), 0.0)
            } else if i == j + 1 {
                Complex64::new((i as f64).sqrt(), 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let (all_lambda, vecs) = x.hermitian_eigen()?;
        // X is real symmetric, so each eigenvector is real up to a global phase
        let mut lambda = Vec::new();
        let mut v: Vec<Vec<f64>> = Vec::new();
        let mut edge = [Complex64::new(0.0, 0.0); 2];
        for (k, &lam) in all_lambda.iter().enumerate() {
            let pivot = (0..dim)
                .max_by(|&a, &b| vecs.get(a, k).norm().total_cmp(&vecs.get(b, k).norm()))
                .unwrap();
            let ph = vecs.get(pivot, k).conj() / vecs.get(pivot, k).norm();
            let col: Vec<f64> = (0..dim).map(|m| (vecs.get(m, k) * ph).re).collect();
            let rot = Complex64::from_polar(1.0, -reach * lam) * col[n - 1];
            for (j, e) in edge.iter_mut().enumerate() {
                *e += rot * col[dim - 1 - j];
            }
            // eigenvectors living far above the state's support contribute
            // below rounding
            if col[..n].iter().any(|c| c.abs() > 1e-10) {
                lambda.push(lam);
                v.push(col);
            }
        }
        let r = rho.matrix();
        let mut coeff = vec![vec![Complex64::new(0.0, 0.0); 2 * n - 1]; v.len()];
        for (ck, vk) in coeff.iter_mut().zip(&v) {
            for m in 0..n {
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                let vm = vk[m] * sign;
                for l in 0..n {
                    ck[l + n - 1 - m] += r.get(m, l) * (vm * vk[l]);
                }
            }
        }
        let edge_leak = if dim > 1 {
            edge.iter().map(|e| e.norm_sqr()).sum()
        } else {
            0.0
        };
        Ok(Self {
            n,
            dim,
            reach,
            lambda,
            coeff,
            edge_leak,
        })
    }

    /// Padded working dimension.
    pub fn working_dim(&self) -> usize {
        self.dim
    }

    pub fn reach(&self) -> f64 {
        self.reach
    }

    /// True when displacements up to the reach lose more than
    /// [`WIGNER_LEAK_TOL`] to the edge of the working space.
    pub fn truncation_warning(&self) -> bool {
        self.edge_leak > WIGNER_LEAK_TOL
    }

    /// `Tr[ρ D(α) Π D(α)†]` at `α = (x + ip)/√2`.
    pub fn displaced_parity(&self, x: f64, p: f64) -> f64 {
        let alpha = Complex64::new(x, p) / std::f64::consts::SQRT_2;
        let r = 2.0 * alpha.norm();
        let theta = if alpha.norm() == 0.0 {
            std::f64::consts::FRAC_PI_2
        } else {
            alpha.arg() + std::f64::consts::FRAC_PI_2
        };
        let n = self.n as isize;
        // phases e^{iθd} for d = −(n−1) .. n−1
        let step = Complex64::from_polar(1.0, theta);
        let mut phases = Vec::with_capacity(2 * self.n - 1);
        let mut ph = Complex64::from_polar(1.0, -theta * (n - 1) as f64);
        for _ in 0..(2 * self.n - 1) {
            phases.push(ph);
            ph *= step;
        }
        let mut total = Complex64::new(0.0, 0.0);
        for (k, ck) in self.coeff.iter().enumerate() {
            let inner: Complex64 = ck.iter().zip(&phases).map(|(c, e)| c * e).sum();
            total += Complex64::from_polar(1.0, -r * self.lambda[k]) * inner;
        }
        total.re
    }

    pub fn wigner_at(&self, x: f64, p: f64) -> f64 {
        self.displaced_parity(x, p) / std::f64::consts::PI
    }
}

/// Wigner function of a single-mode state on the grid `x_grid × p_grid`.
pub fn wigner(rho: &DensityMatrix, x_grid: &[f64], p_grid: &[f64]) -> Result<WignerGrid, QuantumError> {
    let reach = x_grid
        .iter()
        .flat_map(|&x| p_grid.iter().map(move |&p| ((x * x + p * p) / 2.0).sqrt()))
        .fold(0.0, f64::max);
    let kernel = WignerKernel::new(rho, reach)?;
    let row = |p: f64| x_grid.iter().map(|&x| kernel.wigner_at(x, p)).collect::<Vec<f64>>();
    #[cfg(feature = "parallel")]
    let values = {
        use rayon::prelude::*;
        p_grid.par_iter().map(|&p| row(p)).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let values = p_grid.iter().map(|&p| row(p)).collect();

    Ok(WignerGrid {
        x: x_grid.to_vec(),
        p: p_grid.to_vec(),
        values,
        truncation_warning: kernel.truncation_warning(),
    })
}

/// `P(x) = ⟨x|ρ|x⟩` from Hermite functions.
pub fn quadrature_distribution(rho: &DensityMatrix, x_grid: &[f64]) -> Vec<f64> {
    let n = rho.dim();
    x_grid
        .iter()
        .map(|&x| {
            let mut psi = vec![0.0; n];
            psi[0] = std::f64::consts::PI.powf(-0.25) * (-0.5 * x * x).exp();
            if n > 1 {
                psi[1] = std::f64::consts::SQRT_2 * x * psi[0];
            }
            for k in 1..n - 1 {
                psi[k + 1] =
                    (2.0 / (k + 1) as f64).sqrt() * x * psi[k] - (k as f64 / (k + 1) as f64).sqrt() * psi[k - 1];
            }
            let m = rho.matrix();
            let mut s = Complex64::new(0.0, 0.0);
            for i in 0..n {
                for j in 0..n {
                    s += m.get(i, j) * (psi[i] * psi[j]);
                }
            }
            s.re
        })
        .collect()
}

/// Evenly spaced axis including both endpoints.
pub fn axis(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    crate::circuit::linspace(lo, hi, n)
}
